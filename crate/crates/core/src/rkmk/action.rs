//! Discrete actions generated by a tableau.
//!
//! The doubled system `l_f(eta, U, psi) = l(psi) - l(eta) - k_f(eta, U, psi)`
//! with `k_f(eta, U, psi) = (<f(psi), tau^-1(U^-1)> - <f(eta), tau^-1(U)>) / 2`
//! is a plain Lagrangian on `g x G x g`. Quadrature along the stage curves
//! turns it into a function of the stage velocities, and extremizing over the
//! stages at fixed endpoints gives a discrete Lagrangian on `G x G x G`.

use nalgebra::DVector;

use crate::discrete::DiscreteLagrangian;
use crate::error::Result;
use crate::lie::{pairing, AlgebraVector, GroupElement, Retraction};
use crate::newton::{self, NewtonOptions};
use crate::rkmk::{ButcherTableau, Rkmk};
use crate::systems::ForcedEpSystem;

/// `k_f(eta, U, psi)` on the Lagrangian side.
pub fn k_force_lagrangian<S: ForcedEpSystem + ?Sized>(
    sys: &S,
    eta: &AlgebraVector,
    u: &GroupElement,
    psi: &AlgebraVector,
    r: &Retraction,
) -> Result<f64> {
    let xi = r.tau_inv(u)?;
    let zeta = r.tau_inv(&u.inverse())?;
    Ok(0.5 * (pairing(&sys.force(psi), &zeta) - pairing(&sys.force(eta), &xi)))
}

/// Quadrature of the reduced and doubled actions over one step.
pub struct DoubledAction<'a, S: ?Sized> {
    sys: &'a S,
    tableau: &'a ButcherTableau,
    r: Retraction,
    h: f64,
}

impl<'a, S: ForcedEpSystem + ?Sized> DoubledAction<'a, S> {
    pub fn new(sys: &'a S, method: &'a Rkmk) -> Self {
        Self {
            sys,
            tableau: &method.tableau,
            r: method.retraction,
            h: method.h,
        }
    }

    fn stages(&self, hs: &[AlgebraVector]) -> Result<(Vec<AlgebraVector>, Vec<AlgebraVector>)> {
        let a = &self.tableau.a;
        let s = hs.len();
        let mut xis = Vec::with_capacity(s);
        let mut etas = Vec::with_capacity(s);
        for i in 0..s {
            let xi: AlgebraVector = (0..s).map(|j| hs[j] * (self.h * a[i][j])).sum();
            etas.push(self.r.dltau(&xi, &hs[i])?);
            xis.push(xi);
        }
        Ok((xis, etas))
    }

    /// `h sum_i b_i l(dltau(Xi_i) H_i)`.
    pub fn single(&self, hs: &[AlgebraVector]) -> Result<f64> {
        let (_, etas) = self.stages(hs)?;
        Ok(self
            .tableau
            .b
            .iter()
            .zip(&etas)
            .map(|(b, eta)| self.h * b * self.sys.lagrangian(eta))
            .sum())
    }

    /// `h sum_i b_i l_f(eta_i, tau(-Xi_i) U tau(X_i), psi_i)`.
    pub fn eval(&self, hs: &[AlgebraVector], psis: &[AlgebraVector], u: &GroupElement) -> Result<f64> {
        let (xis, etas) = self.stages(hs)?;
        let (chis, psi_vals) = self.stages(psis)?;
        let mut total = 0.0;
        for i in 0..hs.len() {
            let u_i = &(&self.r.tau(&-xis[i]) * u) * &self.r.tau(&chis[i]);
            let lf = self.sys.lagrangian(&psi_vals[i])
                - self.sys.lagrangian(&etas[i])
                - k_force_lagrangian(self.sys, &etas[i], &u_i, &psi_vals[i], &self.r)?;
            total += self.h * self.tableau.b[i] * lf;
        }
        Ok(total)
    }
}

/// Discrete Lagrangian on `G x G x G` obtained by extremizing the doubled
/// action over the stage velocities of both copies.
///
/// One-stage tableaus are explicit; otherwise the stage problem is solved
/// with difference gradients, which is slow and meant for checks.
pub struct RkmkDiscreteLagrangian<S> {
    sys: S,
    method: Rkmk,
}

impl<S: ForcedEpSystem> RkmkDiscreteLagrangian<S> {
    pub fn new(sys: S, method: Rkmk) -> Self {
        Self { sys, method }
    }

    pub fn method(&self) -> &Rkmk {
        &self.method
    }

    fn action(&self) -> DoubledAction<'_, S> {
        DoubledAction::new(&self.sys, &self.method)
    }

    /// Free single-copy discrete Lagrangian `l_d(V)`.
    pub fn single(&self, v: &GroupElement) -> Result<f64> {
        let xi = self.method.retraction.tau_inv(v)?;
        let action = self.action();
        let hs = self.extremize(|z| action.single(z), &[xi])?;
        action.single(&hs)
    }

    /// Stage velocities extremizing `objective` subject to
    /// `h sum_j b_j H_j = target` for each copy.
    fn extremize<F>(&self, objective: F, targets: &[AlgebraVector]) -> Result<Vec<AlgebraVector>>
    where
        F: Fn(&[AlgebraVector]) -> Result<f64>,
    {
        let (h, b) = (self.method.h, &self.method.tableau.b);
        let s = b.len();
        let copies = targets.len();
        let base: Vec<AlgebraVector> = targets
            .iter()
            .flat_map(|t| std::iter::repeat_n(*t * (1.0 / h), s))
            .collect();
        if s == 1 {
            return Ok(base.into_iter().map(|x| x * (1.0 / b[0])).collect());
        }

        let n_stage = 3 * s * copies;
        let to_stages = |z: &DVector<f64>| -> Vec<AlgebraVector> {
            z.as_slice()[..n_stage].chunks(3).map(AlgebraVector::from_slice).collect()
        };
        let kkt = |z: &DVector<f64>| -> Result<DVector<f64>> {
            let stages = to_stages(z);
            let mut out = DVector::zeros(n_stage + 3 * copies);
            let step = 1e-6;
            let mut probe = stages.clone();
            for (k, stage) in stages.iter().enumerate() {
                let copy = k / s;
                let bk = b[k % s];
                for a in 0..3 {
                    let d = AlgebraVector::basis(a) * step;
                    probe[k] = *stage + d;
                    let plus = objective(&probe)?;
                    probe[k] = *stage - d;
                    let minus = objective(&probe)?;
                    probe[k] = *stage;
                    let nu = z[n_stage + 3 * copy + a];
                    out[3 * k + a] = (plus - minus) / (2.0 * step) - h * bk * nu;
                }
            }
            for (c, target) in targets.iter().enumerate() {
                let sum: AlgebraVector = (0..s).map(|j| stages[c * s + j] * (h * b[j])).sum();
                for a in 0..3 {
                    out[n_stage + 3 * c + a] = sum[a] - target[a];
                }
            }
            Ok(out)
        };
        let mut z0 = DVector::zeros(n_stage + 3 * copies);
        for (k, v) in base.iter().enumerate() {
            z0.rows_mut(3 * k, 3).copy_from(&v.0);
        }
        let opts = NewtonOptions {
            tol: 1e-11,
            max_iter: 50,
            fd_step: 1e-5,
            check_regularity: false,
        };
        let sol = newton::solve(kkt, z0, &opts)?;
        Ok(to_stages(&sol.x))
    }
}

impl<S: ForcedEpSystem> DiscreteLagrangian for RkmkDiscreteLagrangian<S> {
    fn eval(&self, v: &GroupElement, u: &GroupElement, w: &GroupElement) -> Result<f64> {
        let r = &self.method.retraction;
        let xi = r.tau_inv(v)?;
        let chi = r.tau_inv(w)?;
        let s = self.method.tableau.stages();
        let action = self.action();
        let stages = self.extremize(|z| action.eval(&z[..s], &z[s..], u), &[xi, chi])?;
        action.eval(&stages[..s], &stages[s..], u)
    }

    fn step(&self) -> f64 {
        self.method.h
    }

    fn is_antisymmetric(&self) -> bool {
        true
    }
}
