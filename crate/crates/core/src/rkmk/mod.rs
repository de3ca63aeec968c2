//! Variationally partitioned Runge-Kutta-Munthe-Kaas integrators.
//!
//! One step advances `(g_k, lambda_k)` by solving for the stage velocities
//! `H_1..H_s`. With `Xi_i = h sum_j a_ij H_j` and `xi = h sum_j b_j H_j`:
//!
//! ```text
//! Pi_i     = dltau(Xi_i)^* l'(dltau(Xi_i) H_i)
//! N_i      = dltau(Xi_i)^* f(dltau(Xi_i) H_i)
//! Lambda_i = dltau_inv(xi)^* [Pi_i + h sum_j (b_j a_ji / b_i) ddltau(Xi_j)^*(H_j, Pi_j)]
//! R_i      = Lambda_i - Ad*_{tau(xi)} [lambda_k + h sum_j b_j (dltau_inv(-Xi_j)^* - (a_ji / b_i) dltau_inv(-xi)^*) N_j]
//! ```
//!
//! where `ddltau(X)^*(H, Pi)` is the covector `delta -> <Pi, ddltau(X, H, delta)>`.
//! After `R = 0` is solved,
//! `lambda_{k+1} = Ad*_{tau(xi)} [lambda_k + h sum_j b_j dltau_inv(-Xi_j)^* N_j]`
//! and `g_{k+1} = g_k tau(xi)`.

pub mod action;
pub mod baseline;
pub mod tableau;

use nalgebra::DVector;

pub use action::{DoubledAction, RkmkDiscreteLagrangian};
pub use baseline::rk4_baseline_step;
pub use tableau::{ButcherTableau, TABLEAU_NAMES};

use crate::error::{Error, Result};
use crate::lie::{
    ad_star_group, adjoint_matrix, pairing, AlgebraVector, DualVector, GroupElement, Retraction,
};
use crate::newton::{self, NewtonOptions};
use crate::systems::{lie_poisson_rhs, ForcedEpSystem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Residual tolerance, relative to `max(1, |lambda_k|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Forward-difference step for the Newton Jacobian.
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-7,
        }
    }
}

/// Stage quantities of one step, all recomputed from `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct StageState {
    pub h_stages: Vec<AlgebraVector>,
    pub xi_stages: Vec<AlgebraVector>,
    pub xi_step: AlgebraVector,
    pub eta_stages: Vec<AlgebraVector>,
    pub pi: Vec<DualVector>,
    pub n: Vec<DualVector>,
    pub lambda_stages: Vec<DualVector>,
}

/// State after a step, with solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub g: GroupElement,
    pub eta: AlgebraVector,
    pub lambda: DualVector,
    pub energy: f64,
    pub casimirs: Vec<f64>,
    pub newton_iters: usize,
    pub residual: f64,
}

impl StepRecord {
    /// Record at `t` for velocity `eta`, with momentum `dl(eta)`.
    pub fn initial<S: ForcedEpSystem + ?Sized>(
        sys: &S,
        t: f64,
        g: GroupElement,
        eta: AlgebraVector,
    ) -> Self {
        Self::from_momentum(sys, t, g, sys.dl(&eta), 0, 0.0)
    }

    pub fn from_momentum<S: ForcedEpSystem + ?Sized>(
        sys: &S,
        t: f64,
        g: GroupElement,
        lambda: DualVector,
        newton_iters: usize,
        residual: f64,
    ) -> Self {
        let eta = sys.legendre_inv(&lambda);
        Self {
            t,
            g,
            eta,
            lambda,
            energy: sys.energy(&eta),
            casimirs: sys.casimirs(&lambda),
            newton_iters,
            residual,
        }
    }
}

/// A tableau, a retraction and a step size.
#[derive(Clone, Debug, PartialEq)]
pub struct Rkmk {
    pub tableau: ButcherTableau,
    pub retraction: Retraction,
    pub h: f64,
    pub options: SolverOptions,
}

impl Rkmk {
    pub fn new(tableau: ButcherTableau, retraction: Retraction, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Parameter(format!("step size must be positive, got {h}")));
        }
        Ok(Self {
            tableau,
            retraction,
            h,
            options: SolverOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    /// Stage quantities and residuals `R_i` at stage velocities `hs`.
    pub fn evaluate<S: ForcedEpSystem + ?Sized>(
        &self,
        sys: &S,
        lambda_k: &DualVector,
        hs: &[AlgebraVector],
    ) -> Result<(StageState, Vec<DualVector>)> {
        let (a, b, h, r) = (&self.tableau.a, &self.tableau.b, self.h, &self.retraction);
        let s = b.len();
        if hs.len() != s {
            return Err(Error::Parameter(format!(
                "expected {s} stage velocities, got {}",
                hs.len()
            )));
        }
        let xi_stages: Vec<AlgebraVector> = (0..s)
            .map(|i| (0..s).map(|j| hs[j] * (h * a[i][j])).sum())
            .collect();
        let xi_step: AlgebraVector = (0..s).map(|j| hs[j] * (h * b[j])).sum();

        let mut eta_stages = Vec::with_capacity(s);
        let mut pi = Vec::with_capacity(s);
        let mut n = Vec::with_capacity(s);
        let mut dd = Vec::with_capacity(s);
        let mut k_hat = Vec::with_capacity(s);
        for i in 0..s {
            let d = r.dltau_matrix(&xi_stages[i])?;
            let eta = AlgebraVector(d * hs[i].0);
            let pi_i = adjoint_matrix(&d, &sys.dl(&eta));
            let n_i = adjoint_matrix(&d, &sys.force(&eta));
            dd.push(dd_adjoint(r, &xi_stages[i], &hs[i], &pi_i)?);
            k_hat.push(adjoint_matrix(&r.dltau_inv_matrix(&-xi_stages[i])?, &n_i));
            eta_stages.push(eta);
            pi.push(pi_i);
            n.push(n_i);
        }

        let step_inv = r.dltau_inv_matrix(&xi_step)?;
        let back_inv = r.dltau_inv_matrix(&-xi_step)?;
        let transport = r.tau(&xi_step);
        let mut lambda_stages = Vec::with_capacity(s);
        let mut residuals = Vec::with_capacity(s);
        for i in 0..s {
            let mut inner = pi[i];
            let mut forcing = *lambda_k;
            for j in 0..s {
                let w = b[j] * a[j][i] / b[i];
                inner += dd[j] * (h * w);
                forcing += (k_hat[j] * b[j] - adjoint_matrix(&back_inv, &n[j]) * w) * h;
            }
            let lambda_i = adjoint_matrix(&step_inv, &inner);
            residuals.push(lambda_i - ad_star_group(&transport, &forcing));
            lambda_stages.push(lambda_i);
        }

        Ok((
            StageState {
                h_stages: hs.to_vec(),
                xi_stages,
                xi_step,
                eta_stages,
                pi,
                n,
                lambda_stages,
            },
            residuals,
        ))
    }

    pub fn residual<S: ForcedEpSystem + ?Sized>(
        &self,
        sys: &S,
        lambda_k: &DualVector,
        hs: &[AlgebraVector],
    ) -> Result<Vec<DualVector>> {
        Ok(self.evaluate(sys, lambda_k, hs)?.1)
    }

    /// `lambda_{k+1}` from converged stage quantities.
    pub fn momentum_update(&self, stage: &StageState, lambda_k: &DualVector) -> Result<DualVector> {
        let r = &self.retraction;
        let mut forcing = *lambda_k;
        for (j, (xi_j, n_j)) in stage.xi_stages.iter().zip(&stage.n).enumerate() {
            let k_hat = adjoint_matrix(&r.dltau_inv_matrix(&-*xi_j)?, n_j);
            forcing += k_hat * (self.h * self.tableau.b[j]);
        }
        Ok(ad_star_group(&r.tau(&stage.xi_step), &forcing))
    }

    /// Solves `R(H) = 0`, starting from `guess` or from `H_i = eta_k`.
    ///
    /// Returns the stage state, the Newton iteration count and the final
    /// residual max-norm.
    pub fn solve_stages<S: ForcedEpSystem + ?Sized>(
        &self,
        sys: &S,
        lambda_k: &DualVector,
        guess: Option<&[AlgebraVector]>,
    ) -> Result<(StageState, usize, f64)> {
        let s = self.tableau.stages();
        let eta_k = sys.legendre_inv(lambda_k);
        let start = match guess {
            Some(g) => g.to_vec(),
            None => vec![eta_k; s],
        };
        match self.newton(sys, lambda_k, &start) {
            Err(Error::NonConvergence { iterations, .. }) => {
                let rate = lie_poisson_rhs(sys, lambda_k);
                let predictor: Vec<AlgebraVector> = self
                    .tableau
                    .c()
                    .iter()
                    .map(|&c| sys.legendre_inv(&(*lambda_k + rate * (c * self.h))))
                    .collect();
                log::debug!("stage solve restarted from an explicit predictor");
                let (state, iters, res) = self.newton(sys, lambda_k, &predictor)?;
                Ok((state, iters + iterations, res))
            }
            other => other,
        }
    }

    fn newton<S: ForcedEpSystem + ?Sized>(
        &self,
        sys: &S,
        lambda_k: &DualVector,
        start: &[AlgebraVector],
    ) -> Result<(StageState, usize, f64)> {
        let s = self.tableau.stages();
        let x0 = DVector::from_iterator(3 * s, start.iter().flat_map(|v| v.as_array()));
        let f = |x: &DVector<f64>| -> Result<DVector<f64>> {
            let hs = unstack(x);
            let res = self.residual(sys, lambda_k, &hs)?;
            Ok(DVector::from_iterator(3 * s, res.iter().flat_map(|v| v.as_array())))
        };
        let opts = NewtonOptions {
            tol: self.options.tol * lambda_k.norm().max(1.0),
            max_iter: self.options.max_iter,
            fd_step: self.options.fd_step,
            check_regularity: false,
        };
        let sol = newton::solve(f, x0, &opts)?;
        let (state, _) = self.evaluate(sys, lambda_k, &unstack(&sol.x))?;
        Ok((state, sol.iterations, sol.residual))
    }

    /// One step from `state`.
    pub fn step<S: ForcedEpSystem + ?Sized>(
        &self,
        sys: &S,
        state: &StepRecord,
        guess: Option<&[AlgebraVector]>,
    ) -> Result<StepRecord> {
        let (stage, iters, residual) = self.solve_stages(sys, &state.lambda, guess)?;
        let lambda = self.momentum_update(&stage, &state.lambda)?;
        let g = &state.g * &self.retraction.tau(&stage.xi_step);
        Ok(StepRecord::from_momentum(
            sys,
            state.t + self.h,
            g,
            lambda,
            iters,
            residual,
        ))
    }
}

/// `delta -> <pi, ddltau(xi, eta, delta)>` as a covector.
fn dd_adjoint(
    r: &Retraction,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
    pi: &DualVector,
) -> Result<DualVector> {
    let mut out = DualVector::zeros();
    for a in 0..3 {
        out.0[a] = pairing(pi, &r.ddltau(xi, eta, &AlgebraVector::basis(a))?);
    }
    Ok(out)
}

fn unstack(x: &DVector<f64>) -> Vec<AlgebraVector> {
    x.as_slice().chunks(3).map(AlgebraVector::from_slice).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{free_rigid_body, rigid_body_llg, RigidBodyParams};
    use approx::assert_relative_eq;

    const INERTIA: [f64; 3] = [0.5, 2.0, 1.0];

    fn omega0() -> AlgebraVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        AlgebraVector::new(s, 0.0, s)
    }

    #[test]
    fn small_step_residual_collapses() {
        let sys = rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap();
        let lambda = sys.dl(&omega0());
        for name in TABLEAU_NAMES {
            let m = Rkmk::new(ButcherTableau::by_name(name).unwrap(), Retraction::cayley(), 1e-9)
                .unwrap();
            let hs = vec![omega0(); m.tableau.stages()];
            for r in m.residual(&sys, &lambda, &hs).unwrap() {
                assert!(r.norm() < 1e-8, "{name}: {}", r.norm());
            }
        }
    }

    #[test]
    fn single_stage_residual_by_hand() {
        let sys = rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap();
        let r = Retraction::exponential();
        let h = 0.1;
        let m = Rkmk::new(ButcherTableau::by_name("gauss1").unwrap(), r, h).unwrap();
        let lambda = DualVector::new(0.2, -0.3, 0.6);
        let big_h = AlgebraVector::new(0.5, 0.1, -0.2);
        let xi = big_h * h;
        let half = xi * 0.5;
        let d = r.dltau_matrix(&half).unwrap();
        let eta = AlgebraVector(d * big_h.0);
        let pi = adjoint_matrix(&d, &sys.dl(&eta));
        let n = adjoint_matrix(&d, &sys.force(&eta));
        let dd = dd_adjoint(&r, &half, &big_h, &pi).unwrap();
        let lambda_1 = adjoint_matrix(&r.dltau_inv_matrix(&xi).unwrap(), &(pi + dd * (0.5 * h)));
        let k_hat = adjoint_matrix(&r.dltau_inv_matrix(&-half).unwrap(), &n);
        let back = adjoint_matrix(&r.dltau_inv_matrix(&-xi).unwrap(), &n);
        let expected = lambda_1 - ad_star_group(&r.tau(&xi), &(lambda + (k_hat - back * 0.5) * h));
        let got = m.residual(&sys, &lambda, &[big_h]).unwrap();
        assert_relative_eq!(got[0].0, expected.0, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_at_rest() {
        let sys = rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap();
        let m = Rkmk::new(ButcherTableau::by_name("gauss2").unwrap(), Retraction::cayley(), 0.01)
            .unwrap();
        let rec = StepRecord::initial(&sys, 0.0, GroupElement::identity(), AlgebraVector::zeros());
        let next = m.step(&sys, &rec, None).unwrap();
        assert_eq!(next.lambda, DualVector::zeros());
        assert_eq!(next.g, GroupElement::identity());
    }

    #[test]
    fn free_step_transports_momentum_on_its_orbit() {
        let sys = free_rigid_body(INERTIA).unwrap();
        let m = Rkmk::new(ButcherTableau::by_name("gauss2").unwrap(), Retraction::cayley(), 0.01)
            .unwrap();
        let rec = StepRecord::initial(&sys, 0.0, GroupElement::identity(), omega0());
        let next = m.step(&sys, &rec, None).unwrap();
        assert!((next.casimirs[0] - rec.casimirs[0]).abs() <= 1e-10);
        assert!(next.newton_iters <= 10);
        assert_relative_eq!(next.lambda.0, sys.dl(&next.eta).0, epsilon = 1e-12);
    }

    #[test]
    fn llg_energy_decreases() {
        let sys = rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap();
        let m = Rkmk::new(ButcherTableau::by_name("gauss2").unwrap(), Retraction::cayley(), 0.01)
            .unwrap();
        let mut rec = StepRecord::initial(&sys, 0.0, GroupElement::identity(), omega0());
        for _ in 0..100 {
            let next = m.step(&sys, &rec, None).unwrap();
            assert!(next.energy <= rec.energy + 1e-8);
            rec = next;
        }
    }

    #[test]
    fn oversized_step_is_a_domain_error() {
        let sys = free_rigid_body(INERTIA).unwrap();
        let m = Rkmk::new(ButcherTableau::by_name("gauss1").unwrap(), Retraction::exponential(), 10.0)
            .unwrap();
        let rec = StepRecord::initial(&sys, 0.0, GroupElement::identity(), omega0() * 2.0);
        assert!(matches!(m.step(&sys, &rec, None), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_nonpositive_step() {
        let t = ButcherTableau::by_name("gauss1").unwrap();
        assert!(Rkmk::new(t.clone(), Retraction::cayley(), 0.0).is_err());
        assert!(Rkmk::new(t, Retraction::cayley(), f64::NAN).is_err());
    }
}
