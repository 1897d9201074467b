use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::analysis::{max_entanglement, Peak};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Cell::Num(x) if x.is_nan() => out.push_str("NaN"),
            Cell::Num(x) => {
                let _ = write!(out, "{x:.16e}");
            }
            Cell::Text(s) => out.push_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Rows of numbers (plus the occasional tag column) with free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Map<String, Value>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<String>> {
        let i = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Text(s) => s.clone(),
                    Cell::Num(_) => String::new(),
                })
                .collect(),
        )
    }

    /// Peak of `column` against `t_us`.
    pub fn max_entanglement(&self, column: &str) -> Result<Peak> {
        let t = self
            .column("t_us")
            .ok_or_else(|| Error::invalid("table has no t_us column"))?;
        let v = self
            .column(column)
            .ok_or_else(|| Error::invalid(format!("table has no {column} column")))?;
        max_entanglement(&t, &v)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.write(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
