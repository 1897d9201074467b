//! Drive a sweep from a JSON config, the way the `cqad` binary does, and
//! write the CSV and manifest into a temporary directory.

use cqad::config::{LoadedConfig, Manifest};
use cqad::experiments::run_sweep;

const CONFIG: &str = r#"{
  "name": "loss_grid",
  "profile": "paper_faithful",
  "solver": "gaussian_effective",
  "t_end_us": 200,
  "dt_out_us": 2,
  "params": { "temperature_mK": 100 },
  "axes": [
    { "param": "gamma_kHz", "values": [2, 4, 8] },
    { "param": "omega_d_rad_per_us", "values": [15, 25] }
  ]
}"#;

fn main() -> cqad::Result<()> {
    let loaded = LoadedConfig::parse(CONFIG)?;
    let scenario = loaded.resolve(None, None)?;
    let start = std::time::Instant::now();
    let table = run_sweep(&scenario)?;
    let dir = std::env::temp_dir().join("cqad_config_run");
    std::fs::create_dir_all(&dir)?;
    let csv = format!("{}_grid.csv", scenario.name);
    table.write_csv(&dir.join(&csv))?;
    let manifest = Manifest::new("sweep", &csv, &scenario, &table, start.elapsed().as_secs_f64(), 1);
    std::fs::write(dir.join(format!("{}_manifest.json", scenario.name)), manifest.to_json())?;
    print!("{}", table.to_csv());
    println!("wrote {}", dir.display());
    Ok(())
}
