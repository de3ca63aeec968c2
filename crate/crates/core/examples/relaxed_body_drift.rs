//! Relaxed rigid body: energy drift of the Gauss family next to classical RK4.

use forced_ep::harness::{drift, run_trajectory, ExperimentConfig, MethodSpec, Quantity, SystemSpec};

fn main() -> forced_ep::Result<()> {
    let base = ExperimentConfig {
        system: SystemSpec::Relaxed {
            inertia: [0.5, 2.0, 1.0],
            beta: 0.1,
        },
        h: 0.05,
        ..ExperimentConfig::default()
    };
    println!("{:<14} {:>14} {:>14}", "method", "max |dE|", "C(T) - C(0)");
    for name in ["gauss1", "gauss2", "gauss3", "rk4_baseline"] {
        let cfg = ExperimentConfig {
            method: name.parse::<MethodSpec>()?,
            ..base.clone()
        };
        let records = run_trajectory(&cfg)?;
        let energy = drift(&records, Quantity::Energy);
        let casimir = drift(&records, Quantity::Casimir(0));
        println!("{name:<14} {:>14.3e} {:>14.6}", energy.max_abs(), casimir.last());
    }
    Ok(())
}
