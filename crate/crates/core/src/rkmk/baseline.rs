//! Classical RK4 on the Lie-Poisson equations, a non-variational comparator.

use crate::error::Result;
use crate::lie::{DualVector, GroupElement, Retraction};
use crate::systems::{lie_poisson_rhs, reconstruct, ForcedEpSystem};

/// One RK4 step of `mu' = ad*_{h'(mu)} mu + f~(mu)`.
///
/// The group is advanced by `g tau(h legendre_inv(mu_avg))`, with `mu_avg`
/// the RK4-weighted average of the stage momenta.
pub fn rk4_baseline_step<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    h: f64,
    mu: &DualVector,
    g: &GroupElement,
    r: &Retraction,
) -> Result<(DualVector, GroupElement)> {
    let m1 = *mu;
    let k1 = lie_poisson_rhs(sys, &m1);
    let m2 = m1 + k1 * (0.5 * h);
    let k2 = lie_poisson_rhs(sys, &m2);
    let m3 = m1 + k2 * (0.5 * h);
    let k3 = lie_poisson_rhs(sys, &m3);
    let m4 = m1 + k3 * h;
    let k4 = lie_poisson_rhs(sys, &m4);

    let next = m1 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let avg = (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (1.0 / 6.0);
    let g_next = reconstruct(g, &sys.legendre_inv(&avg), h, r)?;
    Ok((next, g_next))
}
