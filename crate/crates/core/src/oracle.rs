//! Finite-difference oracles and the cross-module verification suite.
//!
//! Nothing here is on the integration hot path. Each oracle recomputes a
//! closed-form quantity from more primitive ingredients: tangent maps from
//! `tau` and `tau_inv` alone, stage residuals from the doubled discrete action
//! alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discrete::{discrete_flow_step, DiscreteState, FlowOptions};
use crate::error::Result;
use crate::groupoid::{hamiltonian_vector_field, GroupoidPoint};
use crate::lie::{
    ad_group, ad_star_group, adjoint_matrix, vee, AlgebraVector, DualVector, GroupElement, Mat3,
    Retraction,
};
use crate::rkmk::{ButcherTableau, DoubledAction, Rkmk, RkmkDiscreteLagrangian, TABLEAU_NAMES};
use crate::systems::{
    lie_poisson_rhs, relaxed_rigid_body, rigid_body_llg, ForcedEpSystem, RigidBody, RigidBodyParams,
};

/// Central-difference step of the oracles.
pub const ORACLE_STEP: f64 = 1e-5;

/// `vee(tau(xi)^-1 d/dt tau(xi + t eta))`.
pub fn fd_dltau(r: &Retraction, xi: &AlgebraVector, eta: &AlgebraVector, step: f64) -> AlgebraVector {
    let d = *eta * step;
    let diff = (r.tau(&(*xi + d)).0 - r.tau(&(*xi - d)).0) / (2.0 * step);
    AlgebraVector(vee(&(r.tau(xi).0.transpose() * diff)))
}

/// `d/dt tau_inv(tau(xi) tau(t eta))`.
pub fn fd_dltau_inv(r: &Retraction, xi: &AlgebraVector, eta: &AlgebraVector, step: f64) -> Result<AlgebraVector> {
    let g = r.tau(xi);
    let d = *eta * step;
    let plus = r.tau_inv(&(&g * &r.tau(&d)))?;
    let minus = r.tau_inv(&(&g * &r.tau(&-d)))?;
    Ok((plus - minus) * (1.0 / (2.0 * step)))
}

/// `d/dxi (dltau(xi, eta)) . delta`, by differences of the closed form.
pub fn fd_dltau_derivative(
    r: &Retraction,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    delta: &AlgebraVector,
    step: f64,
) -> Result<AlgebraVector> {
    let d = *delta * step;
    Ok((r.dltau(&(*xi + d), eta)? - r.dltau(&(*xi - d), eta)?) * (1.0 / (2.0 * step)))
}

/// `d/dxi (dltau_inv(xi, eta)) . delta`, by differences of the closed form.
pub fn fd_dltau_inv_derivative(
    r: &Retraction,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    delta: &AlgebraVector,
    step: f64,
) -> Result<AlgebraVector> {
    let d = *delta * step;
    Ok((r.dltau_inv(&(*xi + d), eta)? - r.dltau_inv(&(*xi - d), eta)?) * (1.0 / (2.0 * step)))
}

/// Stage residuals recomputed from differences of the doubled discrete action.
///
/// `R_i = dltau_inv(xi)^* [grad_{Psi_i} S / (h b_i)] - Ad*_{tau(xi)} [lambda_k + grad_U S]`,
/// with `S(H, Psi, U)` evaluated at `Psi = H`, `U = e`.
pub fn residual_oracle<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    method: &Rkmk,
    lambda_k: &DualVector,
    hs: &[AlgebraVector],
) -> Result<Vec<DualVector>> {
    let action = DoubledAction::new(sys, method);
    let (h, b, r) = (method.h, &method.tableau.b, &method.retraction);
    let e = GroupElement::identity();
    let step = ORACLE_STEP;
    let xi: AlgebraVector = hs.iter().zip(b).map(|(x, bj)| *x * (h * bj)).sum();

    let mut grad_u = DualVector::zeros();
    for a in 0..3 {
        let d = AlgebraVector::basis(a) * step;
        let plus = action.eval(hs, hs, &r.tau(&d))?;
        let minus = action.eval(hs, hs, &r.tau(&-d))?;
        grad_u.0[a] = (plus - minus) / (2.0 * step);
    }
    let transported = ad_star_group(&r.tau(&xi), &(*lambda_k + grad_u));
    let step_inv = r.dltau_inv_matrix(&xi)?;

    let mut out = Vec::with_capacity(hs.len());
    let mut psis = hs.to_vec();
    for i in 0..hs.len() {
        let mut grad = DualVector::zeros();
        for a in 0..3 {
            let d = AlgebraVector::basis(a) * step;
            psis[i] = hs[i] + d;
            let plus = action.eval(hs, &psis, &e)?;
            psis[i] = hs[i] - d;
            let minus = action.eval(hs, &psis, &e)?;
            psis[i] = hs[i];
            grad.0[a] = (plus - minus) / (2.0 * step);
        }
        out.push(adjoint_matrix(&step_inv, &(grad * (1.0 / (h * b[i])))) - transported);
    }
    Ok(out)
}

/// Largest discrepancy between closed-form and oracle residuals, relative to
/// the momentum scale, at the converged stages and at a perturbation of them.
pub fn variational_consistency<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    method: &Rkmk,
    lambda_k: &DualVector,
) -> Result<f64> {
    let (stage, _, _) = method.solve_stages(sys, lambda_k, None)?;
    let scale = stage
        .lambda_stages
        .iter()
        .map(DualVector::norm)
        .fold(lambda_k.norm(), f64::max);
    let mut worst = 0.0_f64;
    let shift = AlgebraVector::new(0.03, -0.02, 0.05);
    let perturbed: Vec<AlgebraVector> = stage
        .h_stages
        .iter()
        .enumerate()
        .map(|(i, x)| *x + shift * (1.0 + i as f64))
        .collect();
    for hs in [stage.h_stages.clone(), perturbed] {
        let closed = method.residual(sys, lambda_k, &hs)?;
        let oracle = residual_oracle(sys, method, lambda_k, &hs)?;
        for (c, o) in closed.iter().zip(&oracle) {
            worst = worst.max((*c - *o).norm() / scale);
        }
    }
    Ok(worst)
}

/// Outcome of one property in the verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl PropertyCheck {
    fn bound(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= limit,
            detail: format!("{value:.3e} (limit {limit:.1e})"),
        }
    }

    fn failed(name: &str, err: &crate::error::Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            detail: err.to_string(),
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, radius: f64) -> AlgebraVector {
    loop {
        let v = AlgebraVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

fn relative(a: &AlgebraVector, b: &AlgebraVector) -> f64 {
    (*a - *b).norm() / b.norm().max(1e-3)
}

/// Worst relative error of the four closed-form tangent maps over `samples`
/// seeded random inputs with `|xi| <= 1`.
pub fn kernel_tangent_error(r: &Retraction, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let xi = random_vector(&mut rng, 1.0);
        let eta = random_vector(&mut rng, 1.0);
        let delta = random_vector(&mut rng, 1.0);
        worst = worst.max(relative(&r.dltau(&xi, &eta)?, &fd_dltau(r, &xi, &eta, ORACLE_STEP)));
        worst = worst.max(relative(&r.dltau_inv(&xi, &eta)?, &fd_dltau_inv(r, &xi, &eta, ORACLE_STEP)?));
        let lhs = r.dltau(&xi, &r.ddltau(&xi, &eta, &delta)?)?;
        worst = worst.max(relative(&lhs, &fd_dltau_derivative(r, &xi, &eta, &delta, ORACLE_STEP)?));
        worst = worst.max(relative(
            &r.ddltau_inv(&xi, &eta, &delta)?,
            &fd_dltau_inv_derivative(r, &xi, &eta, &delta, ORACLE_STEP)?,
        ));
    }
    Ok(worst)
}

/// Worst entry of `Ad_{tau(xi)}^-1 - dltau(xi) dltau_inv(-xi)` over seeded inputs.
pub fn adjoint_identity_error(r: &Retraction, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let xi = random_vector(&mut rng, 1.0);
        let composed: Mat3 = r.dltau_matrix(&xi)? * r.dltau_inv_matrix(&-xi)?;
        let g_inv = r.tau(&xi).inverse();
        for a in 0..3 {
            let e = AlgebraVector::basis(a);
            let lhs = ad_group(&g_inv, &e);
            worst = worst.max((lhs.0 - composed * e.0).amax());
        }
    }
    Ok(worst)
}

/// Worst tangency defect of the forced Hamiltonian field on the identity
/// section: `(|d_U|, |d_lambda - d_mu|, |d_mu - rhs|)`.
pub fn tangency_defect<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    r: &Retraction,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..samples {
        let mu = DualVector(random_vector(&mut rng, 2.0).0);
        let x = hamiltonian_vector_field(sys, &GroupoidPoint::identity_of(mu), r)?;
        let rhs = lie_poisson_rhs(sys, &mu);
        worst.0 = worst.0.max(x.d_u.norm());
        worst.1 = worst.1.max((x.d_lambda - x.d_mu).norm());
        worst.2 = worst.2.max((x.d_mu - rhs).norm());
    }
    Ok(worst)
}

/// Largest `|tau_inv(U_k)|` along `steps` steps of the discrete flow of the
/// gauss1-generated doubled Lagrangian, started on the identities.
pub fn restriction_drift<S: ForcedEpSystem>(
    sys: S,
    r: Retraction,
    h: f64,
    omega0: &AlgebraVector,
    steps: usize,
) -> Result<f64> {
    let method = Rkmk::new(ButcherTableau::by_name("gauss1")?, r, h)?;
    let ld = RkmkDiscreteLagrangian::new(sys, method);
    let mut state = DiscreteState::on_identities(r.tau(&(*omega0 * h)));
    let mut worst = 0.0_f64;
    for _ in 0..steps {
        let next = discrete_flow_step(&ld, &state, &state, &r, &FlowOptions::default())?;
        worst = worst.max(r.tau_inv(&next.u)?.norm());
        state = next;
    }
    Ok(worst)
}

pub fn sample_systems() -> Result<[(&'static str, RigidBody); 2]> {
    Ok([
        ("llg", rigid_body_llg(RigidBodyParams::new([0.5, 2.0, 1.0], 1.0))?),
        ("relaxed", relaxed_rigid_body(RigidBodyParams::new([0.5, 2.0, 1.0], 0.1))?),
    ])
}

/// Runs the cross-module verification suite.
pub fn run_suite() -> Vec<PropertyCheck> {
    let mut out = Vec::new();
    let retractions = [Retraction::exponential(), Retraction::cayley()];

    for r in &retractions {
        let name = format!("kernel tangent maps ({})", r.kind);
        out.push(match kernel_tangent_error(r, 100, 7) {
            Ok(v) => PropertyCheck::bound(&name, v, 1e-5),
            Err(e) => PropertyCheck::failed(&name, &e),
        });
        let name = format!("adjoint identity ({})", r.kind);
        out.push(match adjoint_identity_error(r, 100, 11) {
            Ok(v) => PropertyCheck::bound(&name, v, 1e-10),
            Err(e) => PropertyCheck::failed(&name, &e),
        });
    }

    let systems = match sample_systems() {
        Ok(s) => s,
        Err(e) => {
            out.push(PropertyCheck::failed("system construction", &e));
            return out;
        }
    };
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let omega0 = AlgebraVector::new(s2, 0.0, s2);

    let mut worst = 0.0_f64;
    let mut failure = None;
    for (_, sys) in &systems {
        for r in &retractions {
            for name in TABLEAU_NAMES {
                let checked = ButcherTableau::by_name(name)
                    .and_then(|t| Rkmk::new(t, *r, 0.05))
                    .and_then(|m| variational_consistency(sys, &m, &sys.dl(&omega0)));
                match checked {
                    Ok(v) => worst = worst.max(v),
                    Err(e) => failure = Some(e),
                }
            }
        }
    }
    out.push(match failure {
        Some(e) => PropertyCheck::failed("variational consistency (24 cases)", &e),
        None => PropertyCheck::bound("variational consistency (24 cases)", worst, 1e-6),
    });

    for (label, sys) in &systems {
        let name = format!("groupoid tangency ({label})");
        out.push(match tangency_defect(sys, &Retraction::cayley(), 100, 3) {
            Ok((du, dl, dm)) => PropertyCheck {
                name,
                passed: du <= 1e-10 && dl <= 1e-10 && dm <= 1e-8,
                detail: format!("|dU| {du:.2e}, |dlambda - dmu| {dl:.2e}, |dmu - rhs| {dm:.2e}"),
            },
            Err(e) => PropertyCheck::failed(&name, &e),
        });
    }

    let name = "restriction to identities (llg, 100 steps)";
    out.push(match restriction_drift(systems[0].1, Retraction::cayley(), 0.01, &omega0, 100) {
        Ok(v) => PropertyCheck::bound(name, v, 1e-9),
        Err(e) => PropertyCheck::failed(name, &e),
    });
    out
}
