//! Casimir drift of gauss2 and classical RK4 on the LLG body over a range of steps.

use forced_ep::harness::{drift, run_trajectory, ExperimentConfig, MethodSpec, Quantity};

fn main() -> forced_ep::Result<()> {
    println!("{:>8} {:>14} {:>14}", "h", "gauss2", "rk4_baseline");
    for h in [0.1, 0.05, 0.02, 0.01, 0.005] {
        let mut row = Vec::new();
        for name in ["gauss2", "rk4_baseline"] {
            let cfg = ExperimentConfig {
                method: name.parse::<MethodSpec>()?,
                h,
                ..ExperimentConfig::default()
            };
            row.push(drift(&run_trajectory(&cfg)?, Quantity::Casimir(0)).max_abs());
        }
        println!("{h:>8} {:>14.3e} {:>14.3e}", row[0], row[1]);
    }
    Ok(())
}
