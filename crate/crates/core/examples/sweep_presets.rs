//! Runs one of the built-in sweep presets and prints the mean error per
//! axis value and pipeline.
//!
//! cargo run --release --example sweep_presets -- [fig3-left|fig3-middle|fig3-right]

use std::collections::BTreeMap;

use covreg::simgen::{fig3_preset, sweep};

fn main() -> covreg::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig3-left".into());
    let preset = fig3_preset(&name)?;
    let rows = sweep(&preset.base, preset.axis, &preset.values, &preset.specs, preset.folds, preset.repeats)?;

    let mut cells: BTreeMap<(String, String), (f64, usize, usize)> = BTreeMap::new();
    for row in &rows {
        let cell = cells.entry((format!("{:8.4}", row.value), row.method.clone())).or_insert((0.0, 0, 0));
        match row.mae {
            Some(mae) => {
                cell.0 += mae / row.label_std;
                cell.1 += 1;
            }
            None => cell.2 += 1,
        }
    }
    println!("{name}: axis {}", preset.axis.name());
    for ((value, method), (sum, count, failed)) in cells {
        let mean = if count > 0 { format!("{:.4}", sum / count as f64) } else { "-".into() };
        let failed = if failed > 0 { format!(" ({failed} failed cells)") } else { String::new() };
        println!("{value}  {method:<28} normalized MAE {mean}{failed}");
    }
    Ok(())
}
