//! The Poisson groupoid `g* x G x g*` and the forced Hamiltonian on it.
//!
//! Derivatives with respect to the group slot are stored left-trivialized:
//! for `A: g* x G x g* -> R`, `d_u` is the element of g* with
//! `<d_u, delta> = d/dt A(lambda, U tau(t delta), mu)` at `t = 0`.

use crate::error::{Error, Result};
use crate::lie::{
    ad_group, ad_star, ad_star_group, adjoint_matrix, bracket, pairing, AlgebraVector, DualVector,
    GroupElement, Retraction,
};
use crate::systems::ForcedEpSystem;

/// A point `(lambda, U, mu)`; the identity section is `lambda = mu`, `U = e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupoidPoint {
    pub lambda: DualVector,
    pub u: GroupElement,
    pub mu: DualVector,
}

impl GroupoidPoint {
    pub fn new(lambda: DualVector, u: GroupElement, mu: DualVector) -> Self {
        Self { lambda, u, mu }
    }

    /// `(mu, e, mu)`.
    pub fn identity_of(mu: DualVector) -> Self {
        Self::new(mu, GroupElement::identity(), mu)
    }

    pub fn source(&self) -> DualVector {
        self.lambda
    }

    pub fn target(&self) -> DualVector {
        self.mu
    }

    /// `(lambda, U, mu) -> (mu, U^-1, lambda)`.
    pub fn inverse(&self) -> Self {
        Self::new(self.mu, self.u.inverse(), self.lambda)
    }

    /// Groupoid multiplication `(lambda, U, mu)(mu, V, rho) = (lambda, UV, rho)`.
    pub fn multiply(&self, other: &GroupoidPoint) -> Result<Self> {
        let gap = (self.mu - other.lambda).norm();
        if gap > 1e-12 * (1.0 + self.mu.norm()) {
            return Err(Error::Parameter(format!(
                "points are not composable: target and source differ by {gap:.3e}"
            )));
        }
        Ok(Self::new(self.lambda, &self.u * &other.u, other.mu))
    }
}

/// Partial derivatives of a function on the groupoid at a point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GroupoidGradient {
    pub d_lambda: AlgebraVector,
    /// Left-trivialized derivative in the group slot.
    pub d_u: DualVector,
    pub d_mu: AlgebraVector,
}

impl GroupoidGradient {
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d_lambda: self.d_lambda * c,
            d_u: self.d_u * c,
            d_mu: self.d_mu * c,
        }
    }

    pub fn plus(&self, other: &GroupoidGradient) -> Self {
        Self {
            d_lambda: self.d_lambda + other.d_lambda,
            d_u: self.d_u + other.d_u,
            d_mu: self.d_mu + other.d_mu,
        }
    }
}

/// Tangent vector `(lambda', U^-1 U', mu')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupoidTangent {
    pub d_lambda: DualVector,
    pub d_u: AlgebraVector,
    pub d_mu: DualVector,
}

/// The linear Poisson bracket `{A, B}` at `p`.
pub fn poisson_bracket(ga: &GroupoidGradient, gb: &GroupoidGradient, p: &GroupoidPoint) -> f64 {
    let u_inv = p.u.inverse();
    let flow_a = ga.d_mu + ad_group(&u_inv, &ga.d_lambda);
    let flow_b = gb.d_mu + ad_group(&u_inv, &gb.d_lambda);
    -pairing(&p.mu, &bracket(&ga.d_mu, &gb.d_mu))
        + pairing(&p.lambda, &bracket(&ga.d_lambda, &gb.d_lambda))
        + pairing(&ga.d_u, &flow_b)
        - pairing(&gb.d_u, &flow_a)
}

/// Hamiltonian vector field of a function with gradient `g`, `F' = {F, A}`.
pub fn vector_field_from_gradient(g: &GroupoidGradient, p: &GroupoidPoint) -> GroupoidTangent {
    let u_inv = p.u.inverse();
    GroupoidTangent {
        d_lambda: -ad_star(&g.d_lambda, &p.lambda) - ad_star_group(&u_inv, &g.d_u),
        d_u: g.d_mu + ad_group(&u_inv, &g.d_lambda),
        d_mu: ad_star(&g.d_mu, &p.mu) - g.d_u,
    }
}

/// Forcing potential `k(lambda, U, mu) = (<f(mu), tau^-1(U^-1)> - <f(lambda), tau^-1(U)>) / 2`.
pub fn k_force<F>(force_dual: F, p: &GroupoidPoint, r: &Retraction) -> Result<f64>
where
    F: Fn(&DualVector) -> DualVector,
{
    let xi = r.tau_inv(&p.u)?;
    let zeta = r.tau_inv(&p.u.inverse())?;
    Ok(0.5 * (pairing(&force_dual(&p.mu), &zeta) - pairing(&force_dual(&p.lambda), &xi)))
}

/// `h(mu) - h(lambda) + k(lambda, U, mu)`.
pub fn forced_hamiltonian<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    p: &GroupoidPoint,
    r: &Retraction,
) -> Result<f64> {
    let k = k_force(|m| sys.force_dual(m), p, r)?;
    Ok(sys.hamiltonian(&p.mu) - sys.hamiltonian(&p.lambda) + k)
}

/// Analytic gradient of the forced Hamiltonian.
pub fn forced_hamiltonian_gradient<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    p: &GroupoidPoint,
    r: &Retraction,
) -> Result<GroupoidGradient> {
    let xi = r.tau_inv(&p.u)?;
    let zeta = r.tau_inv(&p.u.inverse())?;
    let f_mu = sys.force_dual(&p.mu);
    let f_lambda = sys.force_dual(&p.lambda);

    let d_mu = sys.hamiltonian_gradient(&p.mu)
        + AlgebraVector(sys.force_dual_jacobian(&p.mu).transpose() * zeta.0) * 0.5;
    let d_lambda = -sys.hamiltonian_gradient(&p.lambda)
        - AlgebraVector(sys.force_dual_jacobian(&p.lambda).transpose() * xi.0) * 0.5;

    // U tau(t delta) moves tau^-1(U^-1) by -dltau_inv(zeta, Ad_U delta)
    let through_inverse = ad_star_group(&p.u, &adjoint_matrix(&r.dltau_inv_matrix(&zeta)?, &f_mu));
    let through_u = adjoint_matrix(&r.dltau_inv_matrix(&xi)?, &f_lambda);
    let d_u = (through_inverse + through_u) * -0.5;

    Ok(GroupoidGradient {
        d_lambda,
        d_u,
        d_mu,
    })
}

/// Hamiltonian vector field of the forced Hamiltonian at `p`.
pub fn hamiltonian_vector_field<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    p: &GroupoidPoint,
    r: &Retraction,
) -> Result<GroupoidTangent> {
    let g = forced_hamiltonian_gradient(sys, p, r)?;
    Ok(vector_field_from_gradient(&g, p))
}
