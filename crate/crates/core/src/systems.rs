//! Forced Euler-Poincare systems `(l, f)` on so(3) and their Lie-Poisson form.
//!
//! Systems are defined on the Lagrangian side; the Hamiltonian `h` and the
//! dual-side force `f~` are obtained through the Legendre map, `f~ o Fl = f`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::lie::{ad_star, pairing, AlgebraVector, DualVector, GroupElement, Mat3, Retraction, Vec3};

/// Central-difference step used for numerically differentiated forces.
pub const NUMERIC_LAGRANGIAN_STEP: f64 = 1e-6;

/// Step of the five-point stencil for `dl` of a [`NumericSystem`].
pub const NUMERIC_GRADIENT_STEP: f64 = 1e-3;

/// A reduced Lagrangian with a velocity-dependent force `f: g -> g*`.
pub trait ForcedEpSystem: Send + Sync {
    fn lagrangian(&self, eta: &AlgebraVector) -> f64;

    /// `dl/deta`.
    fn dl(&self, eta: &AlgebraVector) -> DualVector;

    /// Hessian of `l`, as a map g -> g*.
    fn d2l(&self, eta: &AlgebraVector) -> Mat3;

    /// Inverse Legendre map, `legendre_inv(dl(eta)) = eta`.
    fn legendre_inv(&self, mu: &DualVector) -> AlgebraVector;

    fn force(&self, eta: &AlgebraVector) -> DualVector;

    /// Casimir functions of the Lie-Poisson bracket evaluated at `mu`.
    fn casimirs(&self, mu: &DualVector) -> Vec<f64>;

    /// Jacobian of the force with respect to the velocity.
    fn force_jacobian(&self, eta: &AlgebraVector) -> Mat3 {
        central_jacobian(|x| self.force(x).0, eta, NUMERIC_LAGRANGIAN_STEP)
    }

    fn energy(&self, eta: &AlgebraVector) -> f64 {
        pairing(&self.dl(eta), eta) - self.lagrangian(eta)
    }

    /// Hamiltonian `h` with `h o Fl = E_l`.
    fn hamiltonian(&self, mu: &DualVector) -> f64 {
        self.energy(&self.legendre_inv(mu))
    }

    /// `h'(mu)`, which equals the velocity `legendre_inv(mu)` for a regular `l`.
    fn hamiltonian_gradient(&self, mu: &DualVector) -> AlgebraVector {
        self.legendre_inv(mu)
    }

    /// Dual-side force `f~(mu) = f(legendre_inv(mu))`.
    fn force_dual(&self, mu: &DualVector) -> DualVector {
        self.force(&self.legendre_inv(mu))
    }

    fn force_dual_jacobian(&self, mu: &DualVector) -> Mat3 {
        let eta = self.legendre_inv(mu);
        let hess_inv = self
            .d2l(&eta)
            .try_inverse()
            .expect("regular Lagrangian has an invertible Hessian");
        self.force_jacobian(&eta) * hess_inv
    }
}

impl<S: ForcedEpSystem + ?Sized> ForcedEpSystem for &S {
    fn lagrangian(&self, eta: &AlgebraVector) -> f64 {
        (**self).lagrangian(eta)
    }
    fn dl(&self, eta: &AlgebraVector) -> DualVector {
        (**self).dl(eta)
    }
    fn d2l(&self, eta: &AlgebraVector) -> Mat3 {
        (**self).d2l(eta)
    }
    fn legendre_inv(&self, mu: &DualVector) -> AlgebraVector {
        (**self).legendre_inv(mu)
    }
    fn force(&self, eta: &AlgebraVector) -> DualVector {
        (**self).force(eta)
    }
    fn casimirs(&self, mu: &DualVector) -> Vec<f64> {
        (**self).casimirs(mu)
    }
    fn force_jacobian(&self, eta: &AlgebraVector) -> Mat3 {
        (**self).force_jacobian(eta)
    }
}

/// Parameters shared by the rigid-body test systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBodyParams {
    /// Principal moments of inertia `(I_x, I_y, I_z)`.
    pub inertia: [f64; 3],
    /// `alpha` for the LLG force, `beta` for the relaxed body; unused when free.
    pub coefficient: f64,
}

impl RigidBodyParams {
    pub fn new(inertia: [f64; 3], coefficient: f64) -> Self {
        Self {
            inertia,
            coefficient,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RigidBodyForce {
    Free,
    /// `f = alpha M x (M x Omega)`: double-bracket dissipation.
    Llg { alpha: f64 },
    /// `f = beta (Omega x M) x Omega`: energy-conserving, Casimir-increasing.
    Relaxed { beta: f64 },
}

/// Rigid body `l(Omega) = Omega^T I Omega / 2` with one of the shipped forces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBody {
    inertia: Vec3,
    force: RigidBodyForce,
}

impl RigidBody {
    pub fn new(inertia: [f64; 3], force: RigidBodyForce) -> Result<Self> {
        if inertia.iter().any(|&i| !(i > 0.0) || !i.is_finite()) {
            return Err(Error::Parameter(format!(
                "inertia entries must be positive, got {inertia:?}"
            )));
        }
        Ok(Self {
            inertia: Vector3::from(inertia),
            force,
        })
    }

    pub fn inertia(&self) -> [f64; 3] {
        [self.inertia.x, self.inertia.y, self.inertia.z]
    }

    pub fn force_kind(&self) -> RigidBodyForce {
        self.force
    }

    fn momentum(&self, omega: &Vec3) -> Vec3 {
        self.inertia.component_mul(omega)
    }
}

pub fn free_rigid_body(inertia: [f64; 3]) -> Result<RigidBody> {
    RigidBody::new(inertia, RigidBodyForce::Free)
}

pub fn rigid_body_llg(params: RigidBodyParams) -> Result<RigidBody> {
    RigidBody::new(
        params.inertia,
        RigidBodyForce::Llg {
            alpha: params.coefficient,
        },
    )
}

pub fn relaxed_rigid_body(params: RigidBodyParams) -> Result<RigidBody> {
    RigidBody::new(
        params.inertia,
        RigidBodyForce::Relaxed {
            beta: params.coefficient,
        },
    )
}

impl ForcedEpSystem for RigidBody {
    fn lagrangian(&self, eta: &AlgebraVector) -> f64 {
        0.5 * eta.0.dot(&self.momentum(&eta.0))
    }

    fn dl(&self, eta: &AlgebraVector) -> DualVector {
        DualVector(self.momentum(&eta.0))
    }

    fn d2l(&self, _eta: &AlgebraVector) -> Mat3 {
        Mat3::from_diagonal(&self.inertia)
    }

    fn legendre_inv(&self, mu: &DualVector) -> AlgebraVector {
        AlgebraVector(mu.0.component_div(&self.inertia))
    }

    fn force(&self, eta: &AlgebraVector) -> DualVector {
        let omega = &eta.0;
        let m = self.momentum(omega);
        DualVector(match self.force {
            RigidBodyForce::Free => Vec3::zeros(),
            RigidBodyForce::Llg { alpha } => m.cross(&m.cross(omega)) * alpha,
            RigidBodyForce::Relaxed { beta } => omega.cross(&m).cross(omega) * beta,
        })
    }

    fn force_jacobian(&self, eta: &AlgebraVector) -> Mat3 {
        let omega = eta.0;
        let m = self.momentum(&omega);
        let mut jac = Mat3::zeros();
        for a in 0..3 {
            let d = Vec3::ith(a, 1.0);
            let dm = self.momentum(&d);
            let col = match self.force {
                RigidBodyForce::Free => Vec3::zeros(),
                RigidBodyForce::Llg { alpha } => {
                    (dm.cross(&m.cross(&omega)) + m.cross(&dm.cross(&omega)) + m.cross(&m.cross(&d)))
                        * alpha
                }
                RigidBodyForce::Relaxed { beta } => {
                    ((d.cross(&m) + omega.cross(&dm)).cross(&omega) + omega.cross(&m).cross(&d))
                        * beta
                }
            };
            jac.set_column(a, &col);
        }
        jac
    }

    fn casimirs(&self, mu: &DualVector) -> Vec<f64> {
        vec![mu.norm_squared()]
    }
}

type ScalarFn = Box<dyn Fn(&AlgebraVector) -> f64 + Send + Sync>;
type ForceFn = Box<dyn Fn(&AlgebraVector) -> DualVector + Send + Sync>;
type CasimirFn = Box<dyn Fn(&DualVector) -> f64 + Send + Sync>;

/// A user-defined system whose Lagrangian derivatives are taken numerically.
pub struct NumericSystem {
    lagrangian: ScalarFn,
    force: ForceFn,
    casimirs: Vec<CasimirFn>,
}

impl NumericSystem {
    pub fn new<L, F>(lagrangian: L, force: F) -> Self
    where
        L: Fn(&AlgebraVector) -> f64 + Send + Sync + 'static,
        F: Fn(&AlgebraVector) -> DualVector + Send + Sync + 'static,
    {
        Self {
            lagrangian: Box::new(lagrangian),
            force: Box::new(force),
            casimirs: Vec::new(),
        }
    }

    pub fn with_casimir<C>(mut self, casimir: C) -> Self
    where
        C: Fn(&DualVector) -> f64 + Send + Sync + 'static,
    {
        self.casimirs.push(Box::new(casimir));
        self
    }
}

impl ForcedEpSystem for NumericSystem {
    fn lagrangian(&self, eta: &AlgebraVector) -> f64 {
        (self.lagrangian)(eta)
    }

    fn dl(&self, eta: &AlgebraVector) -> DualVector {
        let step = NUMERIC_GRADIENT_STEP;
        let l = &self.lagrangian;
        let mut out = Vec3::zeros();
        for a in 0..3 {
            let d = AlgebraVector::basis(a) * step;
            let near = l(&(*eta + d)) - l(&(*eta - d));
            let far = l(&(*eta + d * 2.0)) - l(&(*eta - d * 2.0));
            out[a] = (8.0 * near - far) / (12.0 * step);
        }
        DualVector(out)
    }

    fn d2l(&self, eta: &AlgebraVector) -> Mat3 {
        // second differences of l directly; a nested first difference would
        // amplify roundoff by 1/step^2
        let step = 1e-4;
        let l = &self.lagrangian;
        let mut hess = Mat3::zeros();
        for a in 0..3 {
            for b in a..3 {
                let da = AlgebraVector::basis(a) * step;
                let db = AlgebraVector::basis(b) * step;
                let v = (l(&(*eta + da + db)) - l(&(*eta + da - db)) - l(&(*eta - da + db))
                    + l(&(*eta - da - db)))
                    / (4.0 * step * step);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        hess
    }

    fn legendre_inv(&self, mu: &DualVector) -> AlgebraVector {
        let mut eta = AlgebraVector(mu.0);
        for _ in 0..50 {
            let r = self.dl(&eta) - *mu;
            if r.norm() <= 1e-13 * (1.0 + mu.norm()) {
                break;
            }
            let Some(step) = self.d2l(&eta).lu().solve(&r.0) else {
                break;
            };
            eta -= AlgebraVector(step);
        }
        eta
    }

    fn force(&self, eta: &AlgebraVector) -> DualVector {
        (self.force)(eta)
    }

    fn casimirs(&self, mu: &DualVector) -> Vec<f64> {
        self.casimirs.iter().map(|c| c(mu)).collect()
    }
}

/// Wraps a system, replacing its force by `f(eta) = ad*_{zeta(eta)} dl(eta)`.
///
/// Forces of this form keep the continuous flow on coadjoint orbits. The
/// discrete integrators do not preserve the orbit exactly for them.
pub struct OrbitPreservingForce<S, Z> {
    base: S,
    zeta: Z,
}

impl<S, Z> OrbitPreservingForce<S, Z>
where
    S: ForcedEpSystem,
    Z: Fn(&AlgebraVector) -> AlgebraVector + Send + Sync,
{
    pub fn new(base: S, zeta: Z) -> Self {
        Self { base, zeta }
    }
}

impl<S, Z> ForcedEpSystem for OrbitPreservingForce<S, Z>
where
    S: ForcedEpSystem,
    Z: Fn(&AlgebraVector) -> AlgebraVector + Send + Sync,
{
    fn lagrangian(&self, eta: &AlgebraVector) -> f64 {
        self.base.lagrangian(eta)
    }
    fn dl(&self, eta: &AlgebraVector) -> DualVector {
        self.base.dl(eta)
    }
    fn d2l(&self, eta: &AlgebraVector) -> Mat3 {
        self.base.d2l(eta)
    }
    fn legendre_inv(&self, mu: &DualVector) -> AlgebraVector {
        self.base.legendre_inv(mu)
    }
    fn force(&self, eta: &AlgebraVector) -> DualVector {
        ad_star(&(self.zeta)(eta), &self.base.dl(eta))
    }
    fn casimirs(&self, mu: &DualVector) -> Vec<f64> {
        self.base.casimirs(mu)
    }
}

/// Forced Lie-Poisson vector field `ad*_{h'(mu)} mu + f~(mu)`.
pub fn lie_poisson_rhs<S: ForcedEpSystem + ?Sized>(sys: &S, mu: &DualVector) -> DualVector {
    let eta = sys.legendre_inv(mu);
    ad_star(&eta, mu) + sys.force(&eta)
}

/// One reconstruction substep `g tau(h eta)` of `g' = g eta`.
pub fn reconstruct(
    g: &GroupElement,
    eta: &AlgebraVector,
    h: f64,
    r: &Retraction,
) -> Result<GroupElement> {
    let xi = *eta * h;
    if xi.norm() > r.domain_radius {
        return Err(Error::Domain(format!(
            "reconstruction increment |h eta| = {:.6} exceeds the retraction domain",
            xi.norm()
        )));
    }
    Ok(g * &r.tau(&xi))
}

pub(crate) fn central_jacobian<F>(f: F, x: &AlgebraVector, step: f64) -> Mat3
where
    F: Fn(&AlgebraVector) -> Vec3,
{
    let mut jac = Mat3::zeros();
    for a in 0..3 {
        let d = AlgebraVector::basis(a) * step;
        let col = (f(&(*x + d)) - f(&(*x - d))) / (2.0 * step);
        jac.set_column(a, &col);
    }
    jac
}
