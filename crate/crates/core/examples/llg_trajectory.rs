//! LLG rigid body with 2-stage Gauss: energy decays while |M|^2 barely moves.
//!
//! `cargo run --example llg_trajectory -- /tmp/llg` also writes the CSV files.

use forced_ep::harness::{drift, run_trajectory, write_drift, write_trajectory, ExperimentConfig, Quantity};

fn main() -> forced_ep::Result<()> {
    let cfg = ExperimentConfig::default();
    let records = run_trajectory(&cfg)?;
    let energy = drift(&records, Quantity::Energy);
    let casimir = drift(&records, Quantity::Casimir(0));

    for rec in records.iter().step_by(20) {
        println!(
            "t = {:.2}  M = [{:+.6}, {:+.6}, {:+.6}]  E = {:.8}",
            rec.t, rec.lambda[0], rec.lambda[1], rec.lambda[2], rec.energy
        );
    }
    println!("energy change over the run: {:.3e}", energy.last());
    println!("largest energy increase in one step: {:.3e}", energy.max_increment());
    println!("largest |Casimir drift|: {:.3e}", casimir.max_abs());

    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::PathBuf::from(dir);
        std::fs::create_dir_all(&dir).map_err(|source| forced_ep::Error::Io { path: dir.clone(), source })?;
        write_trajectory(&dir.join("trajectory.csv"), &records)?;
        write_drift(&dir.join("drift_energy.csv"), &energy)?;
        write_drift(&dir.join("drift_casimir.csv"), &casimir)?;
        println!("wrote CSV files to {}", dir.display());
    }
    Ok(())
}
