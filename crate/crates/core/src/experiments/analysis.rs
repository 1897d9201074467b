use serde::Serialize;

use crate::error::{Error, Result};

/// Location of the largest sample, refined by a parabola through it and its
/// neighbours when it is interior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub t_star: f64,
    pub value: f64,
    /// Grid argmax (earliest on ties).
    pub index: usize,
    pub raw_t_star: f64,
    pub raw_value: f64,
    pub refined: bool,
}

pub fn max_entanglement(times: &[f64], values: &[f64]) -> Result<Peak> {
    if times.is_empty() {
        return Err(Error::invalid("cannot locate the maximum of an empty table"));
    }
    if times.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |b| *v > values[b]) {
            best = Some(i);
        }
    }
    let i = best.ok_or_else(|| Error::invalid("every value is NaN"))?;
    let mut peak = Peak {
        t_star: times[i],
        value: values[i],
        index: i,
        raw_t_star: times[i],
        raw_value: values[i],
        refined: false,
    };
    if i == 0 || i + 1 == values.len() {
        return Ok(peak);
    }
    let (x0, x1, x2) = (times[i - 1], times[i], times[i + 1]);
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    if !(y0.is_finite() && y2.is_finite()) {
        return Ok(peak);
    }
    // Lagrange form of the vertex for unequal spacing
    let d0 = (x1 - x0) * (y1 - y2);
    let d2 = (x1 - x2) * (y1 - y0);
    let denom = d0 - d2;
    if denom == 0.0 {
        return Ok(peak);
    }
    let t = x1 - 0.5 * ((x1 - x0) * d0 - (x1 - x2) * d2) / denom;
    if !(t >= x0 && t <= x2) {
        return Ok(peak);
    }
    let value = y0 * (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
    if value >= y1 {
        peak.t_star = t;
        peak.value = value;
        peak.refined = true;
    }
    Ok(peak)
}

/// `−d ln v / dt` from a least-squares line through the positive samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::invalid("decay fit needs at least two positive samples"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("decay fit needs distinct times"));
    }
    Ok(-sxy / sxx)
}
