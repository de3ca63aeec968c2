//! Discrete mechanics on `G` and on `G x G x G`.
//!
//! Group derivatives are taken by central differences along retraction
//! curves: the left-trivialized derivative of `F` at `X` in direction `delta`
//! follows `X tau(t delta)`, the right-trivialized one follows `tau(t delta) X`.

use nalgebra::DVector;

use crate::error::Result;
use crate::lie::{AlgebraVector, DualVector, GroupElement, Retraction};
use crate::newton::{self, NewtonOptions};

/// Difference step for group derivatives.
pub const FD_STEP: f64 = 1e-5;

/// A reduced discrete Lagrangian `l_d(V, U, W)` for a step of size `h`.
pub trait DiscreteLagrangian: Send + Sync {
    fn eval(&self, v: &GroupElement, u: &GroupElement, w: &GroupElement) -> Result<f64>;

    fn step(&self) -> f64;

    /// Whether `l_d(W, U^-1, V) = -l_d(V, U, W)` holds by construction.
    fn is_antisymmetric(&self) -> bool {
        false
    }
}

/// A discrete Lagrangian given by a closure.
pub struct FnDiscreteLagrangian<F> {
    f: F,
    h: f64,
    antisymmetric: bool,
}

impl<F> FnDiscreteLagrangian<F>
where
    F: Fn(&GroupElement, &GroupElement, &GroupElement) -> Result<f64> + Send + Sync,
{
    pub fn new(h: f64, f: F) -> Self {
        Self {
            f,
            h,
            antisymmetric: false,
        }
    }

    pub fn antisymmetric(mut self, flag: bool) -> Self {
        self.antisymmetric = flag;
        self
    }
}

impl<F> DiscreteLagrangian for FnDiscreteLagrangian<F>
where
    F: Fn(&GroupElement, &GroupElement, &GroupElement) -> Result<f64> + Send + Sync,
{
    fn eval(&self, v: &GroupElement, u: &GroupElement, w: &GroupElement) -> Result<f64> {
        (self.f)(v, u, w)
    }

    fn step(&self) -> f64 {
        self.h
    }

    fn is_antisymmetric(&self) -> bool {
        self.antisymmetric
    }
}

/// `V_k = g_k^-1 g_{k+1}`, `U_k = g_k^-1 g~_k`, `W_k = g~_k^-1 g~_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteState {
    pub v: GroupElement,
    pub u: GroupElement,
    pub w: GroupElement,
}

impl DiscreteState {
    pub fn new(v: GroupElement, u: GroupElement, w: GroupElement) -> Self {
        Self { v, u, w }
    }

    /// `(V, e, V)`.
    pub fn on_identities(v: GroupElement) -> Self {
        Self::new(v, GroupElement::identity(), v)
    }

    /// The relabeling `(V, U, W) -> (W, U^-1, V)`.
    pub fn relabeled(&self) -> Self {
        Self::new(self.w, self.u.inverse(), self.v)
    }

    /// `V^-1 U W`, the `U` of the following step.
    pub fn next_u(&self) -> GroupElement {
        &(&self.v.inverse() * &self.u) * &self.w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn perturb(x: &GroupElement, d: &AlgebraVector, side: Side, r: &Retraction) -> GroupElement {
    match side {
        Side::Left => x * &r.tau(d),
        Side::Right => &r.tau(d) * x,
    }
}

/// Trivialized derivative of a function on `G` at `x`.
pub fn group_derivative<F>(f: F, x: &GroupElement, side: Side, r: &Retraction, step: f64) -> Result<DualVector>
where
    F: Fn(&GroupElement) -> Result<f64>,
{
    let mut out = DualVector::zeros();
    for a in 0..3 {
        let d = AlgebraVector::basis(a) * step;
        let plus = f(&perturb(x, &d, side, r))?;
        let minus = f(&perturb(x, &-d, side, r))?;
        out.0[a] = (plus - minus) / (2.0 * step);
    }
    Ok(out)
}

/// Trivialized derivative of `l_d` in slot `slot` (0, 1, 2 for V, U, W).
pub fn slot_derivative<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    s: &DiscreteState,
    slot: usize,
    side: Side,
    r: &Retraction,
    step: f64,
) -> Result<DualVector> {
    let f = |x: &GroupElement| match slot {
        0 => ld.eval(x, &s.u, &s.w),
        1 => ld.eval(&s.v, x, &s.w),
        _ => ld.eval(&s.v, &s.u, x),
    };
    let at = [s.v, s.u, s.w][slot.min(2)];
    group_derivative(f, &at, side, r, step)
}

/// The six pulled-back slot derivatives `L*_X D_i l_d` and `R*_X D_i l_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrivializedDerivatives {
    pub d1_left: DualVector,
    pub d1_right: DualVector,
    pub d2_left: DualVector,
    pub d2_right: DualVector,
    pub d3_left: DualVector,
    pub d3_right: DualVector,
}

pub fn trivialized_derivatives<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    s: &DiscreteState,
    r: &Retraction,
) -> Result<TrivializedDerivatives> {
    let d = |slot, side| slot_derivative(ld, s, slot, side, r, FD_STEP);
    Ok(TrivializedDerivatives {
        d1_left: d(0, Side::Left)?,
        d1_right: d(0, Side::Right)?,
        d2_left: d(1, Side::Left)?,
        d2_right: d(1, Side::Right)?,
        d3_left: d(2, Side::Left)?,
        d3_right: d(2, Side::Right)?,
    })
}

/// Residuals of the discrete reduced Euler-Lagrange equations between two
/// consecutive states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElResidual {
    /// `L*_{V_{k-1}} D1 l_d(prev) - R*_{V_k} D1 l_d(next) - R*_{U_k} D2 l_d(next)`.
    pub res1: DualVector,
    /// `L*_{W_{k-1}} D3 l_d(prev) - R*_{W_k} D3 l_d(next) + L*_{U_k} D2 l_d(next)`.
    pub res2: DualVector,
    /// `U_k^-1 V_{k-1}^-1 U_{k-1} W_{k-1}`, the identity when composition holds.
    pub res3: GroupElement,
}

impl ElResidual {
    pub fn momentum_norm(&self) -> f64 {
        self.res1.0.amax().max(self.res2.0.amax())
    }
}

pub fn discrete_el_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    prev: &DiscreteState,
    next: &DiscreteState,
    r: &Retraction,
) -> Result<ElResidual> {
    let (res1, res2) = momentum_residual(ld, prev, next, r)?;
    Ok(ElResidual {
        res1,
        res2,
        res3: &next.u.inverse() * &prev.next_u(),
    })
}

fn momentum_residual<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    prev: &DiscreteState,
    next: &DiscreteState,
    r: &Retraction,
) -> Result<(DualVector, DualVector)> {
    let d = |s, slot, side| slot_derivative(ld, s, slot, side, r, FD_STEP);
    let res1 = d(prev, 0, Side::Left)? - d(next, 0, Side::Right)? - d(next, 1, Side::Right)?;
    let res2 = d(prev, 2, Side::Left)? - d(next, 2, Side::Right)? + d(next, 1, Side::Left)?;
    Ok((res1, res2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            fd_step: 1e-7,
        }
    }
}

/// Advances the discrete flow one step.
///
/// `U_k` is fixed by composition; Newton runs on the retraction coordinates
/// of the `V` and `W` corrections around `guess`.
pub fn discrete_flow_step<L: DiscreteLagrangian + ?Sized>(
    ld: &L,
    prev: &DiscreteState,
    guess: &DiscreteState,
    r: &Retraction,
    opts: &FlowOptions,
) -> Result<DiscreteState> {
    let u = prev.next_u();
    let at = |x: &DVector<f64>| {
        let a = AlgebraVector::new(x[0], x[1], x[2]);
        let b = AlgebraVector::new(x[3], x[4], x[5]);
        DiscreteState::new(&guess.v * &r.tau(&a), u, &guess.w * &r.tau(&b))
    };
    let f = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let (r1, r2) = momentum_residual(ld, prev, &at(x), r)?;
        Ok(DVector::from_iterator(6, r1.as_array().into_iter().chain(r2.as_array())))
    };
    let nopts = NewtonOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        fd_step: opts.fd_step,
        check_regularity: true,
    };
    let sol = newton::solve(f, DVector::zeros(6), &nopts)?;
    Ok(at(&sol.x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegendreSign {
    /// `F- l_d(W) = R*_W l_d'(W)`.
    Minus,
    /// `F+ l_d(W) = L*_W l_d'(W)`.
    Plus,
}

/// Discrete Legendre transforms of a single-slot discrete Lagrangian.
pub fn discrete_legendre<F>(ld: F, w: &GroupElement, sign: LegendreSign, r: &Retraction) -> Result<DualVector>
where
    F: Fn(&GroupElement) -> Result<f64>,
{
    let side = match sign {
        LegendreSign::Minus => Side::Right,
        LegendreSign::Plus => Side::Left,
    };
    group_derivative(ld, w, side, r, FD_STEP)
}

/// Max over basis directions of the mismatch between the left-invariant
/// derivative at `W1` and the right-invariant derivative at `W2`.
pub fn discrete_ep_check<F>(ld: F, w1: &GroupElement, w2: &GroupElement, r: &Retraction) -> Result<f64>
where
    F: Fn(&GroupElement) -> Result<f64>,
{
    let plus = group_derivative(&ld, w1, Side::Left, r, FD_STEP)?;
    let minus = group_derivative(&ld, w2, Side::Right, r, FD_STEP)?;
    Ok((plus - minus).0.amax())
}
