//! Observed order of every shipped tableau on the LLG body.

use forced_ep::harness::{default_sweep, order_sweep, ExperimentConfig, MethodSpec, SweepMeasure};
use forced_ep::rkmk::TABLEAU_NAMES;

fn main() -> forced_ep::Result<()> {
    for name in TABLEAU_NAMES {
        let cfg = ExperimentConfig {
            method: name.parse::<MethodSpec>()?,
            sweep_h: Some(default_sweep()),
            ..ExperimentConfig::default()
        };
        let table = order_sweep(&cfg, SweepMeasure::Momentum)?;
        let errors: Vec<String> = table
            .rows
            .iter()
            .map(|r| r.error.map_or("-".into(), |e| format!("{e:.2e}")))
            .collect();
        let slope = table.fitted_slope.map_or("n/a".into(), |p| format!("{p:.2}"));
        println!("{name:<9} slope {slope:>5}   errors {}", errors.join(" "));
    }
    Ok(())
}
