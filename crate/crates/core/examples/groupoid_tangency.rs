//! The forced Hamiltonian field on g* x G x g* is tangent to the identity
//! section and reproduces the forced Lie-Poisson equations there.

use forced_ep::groupoid::{hamiltonian_vector_field, k_force, GroupoidPoint};
use forced_ep::systems::{lie_poisson_rhs, rigid_body_llg, ForcedEpSystem, RigidBodyParams};
use forced_ep::{AlgebraVector, DualVector, Retraction};

fn main() -> forced_ep::Result<()> {
    let sys = rigid_body_llg(RigidBodyParams::new([0.5, 2.0, 1.0], 1.0))?;
    let r = Retraction::cayley();
    let mu = DualVector::new(0.35, -0.2, 0.7);

    let x = hamiltonian_vector_field(&sys, &GroupoidPoint::identity_of(mu), &r)?;
    println!("on (mu, e, mu):");
    println!("  |d_U|                 = {:.2e}", x.d_u.norm());
    println!("  |d_lambda - d_mu|     = {:.2e}", (x.d_lambda - x.d_mu).norm());
    println!("  |d_mu - Lie-Poisson|  = {:.2e}", (x.d_mu - lie_poisson_rhs(&sys, &mu)).norm());

    let p = GroupoidPoint::new(mu, r.tau(&AlgebraVector::new(0.1, 0.3, -0.2)), DualVector::new(-0.4, 0.1, 0.5));
    let k = k_force(|m| sys.force_dual(m), &p, &r)?;
    let k_inv = k_force(|m| sys.force_dual(m), &p.inverse(), &r)?;
    println!("off the section: k = {k:.6}, k at the inverse = {k_inv:.6}");
    Ok(())
}
