//! A user-defined system: quartic Lagrangian with linear friction, derivatives
//! taken numerically.

use forced_ep::harness::{drift, integrate, MethodSpec, Quantity};
use forced_ep::systems::NumericSystem;
use forced_ep::{AlgebraVector, DualVector, Retraction};

fn main() -> forced_ep::Result<()> {
    let inertia = [1.0, 1.5, 2.5];
    let sys = NumericSystem::new(
        move |e: &AlgebraVector| {
            let q: f64 = (0..3).map(|a| inertia[a] * e[a] * e[a]).sum();
            0.5 * q + 0.05 * q * q
        },
        |e: &AlgebraVector| DualVector(e.0 * -0.2),
    )
    .with_casimir(|m| m.norm_squared());

    let method: MethodSpec = "gauss2".parse()?;
    let records = integrate(&sys, &method, Retraction::cayley(), 0.02, 100, &AlgebraVector::new(0.3, 1.0, -0.4))?;
    let energy = drift(&records, Quantity::Energy);
    let casimir = drift(&records, Quantity::Casimir(0));
    println!("energy change over t = 2: {:.6}", energy.last());
    println!("largest one-step energy increase: {:.3e}", energy.max_increment());
    println!("Casimir change: {:.6}", casimir.last());
    println!("max Newton iterations: {}", records.iter().map(|r| r.newton_iters).max().unwrap_or(0));
    Ok(())
}
