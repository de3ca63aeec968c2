//! Lie algebra and group kernel for SO(3).
//!
//! Elements of so(3) and so(3)* are stored as coordinate 3-vectors in the basis
//! `e_a` for which `hat(e_1) e_2 = e_3`; the pairing is the Euclidean dot product.
//! Under these conventions the bracket is the cross product and
//! `ad*_xi mu = mu x xi`.
//!
//! Retractions carry closed forms for their first and second left-trivialized
//! tangents:
//!
//! * `dltau(xi, eta)` satisfies `T_xi tau . eta = tau(xi) . dltau(xi, eta)`,
//! * `ddltau(xi, eta, delta)` satisfies
//!   `d/dxi (dltau(xi, eta)) . delta = dltau(xi, ddltau(xi, eta, delta))`,
//! * `ddltau_inv(xi, eta, delta)` is the plain base-point derivative
//!   `d/dxi (dltau_inv(xi, eta)) . delta`.

use std::ops::Mul;

use derive_more::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Coordinates of an element of the Lie algebra.
#[derive(
    Clone, Copy, Debug, PartialEq, Default, Add, Sub, Neg, Mul, AddAssign, SubAssign, MulAssign,
)]
pub struct AlgebraVector(pub Vec3);

/// Coordinates of an element of the dual of the Lie algebra.
#[derive(
    Clone, Copy, Debug, PartialEq, Default, Add, Sub, Neg, Mul, AddAssign, SubAssign, MulAssign,
)]
pub struct DualVector(pub Vec3);

macro_rules! coords_impl {
    ($t:ident) => {
        impl $t {
            pub const DIM: usize = 3;

            pub fn new(x: f64, y: f64, z: f64) -> Self {
                Self(Vec3::new(x, y, z))
            }

            pub fn zeros() -> Self {
                Self(Vec3::zeros())
            }

            /// The `a`-th basis vector.
            pub fn basis(a: usize) -> Self {
                let mut v = Vec3::zeros();
                v[a] = 1.0;
                Self(v)
            }

            pub fn from_slice(s: &[f64]) -> Self {
                Self(Vec3::new(s[0], s[1], s[2]))
            }

            pub fn norm(&self) -> f64 {
                self.0.norm()
            }

            pub fn norm_squared(&self) -> f64 {
                self.0.norm_squared()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.is_finite())
            }

            pub fn as_array(&self) -> [f64; 3] {
                [self.0.x, self.0.y, self.0.z]
            }
        }

        impl std::ops::Index<usize> for $t {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl std::iter::Sum for $t {
            fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
                iter.fold(Self::zeros(), |acc, x| acc + x)
            }
        }
    };
}

coords_impl!(AlgebraVector);
coords_impl!(DualVector);

impl AlgebraVector {
    /// Skew-symmetric matrix with `hat(u) v = u x v`.
    pub fn hat(&self) -> Mat3 {
        hat(&self.0)
    }

    pub fn vee(m: &Mat3) -> Self {
        Self(vee(m))
    }
}

pub fn hat(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

/// Inverse of [`hat`]; reads the skew part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

pub fn pairing(mu: &DualVector, eta: &AlgebraVector) -> f64 {
    mu.0.dot(&eta.0)
}

pub fn bracket(xi: &AlgebraVector, eta: &AlgebraVector) -> AlgebraVector {
    AlgebraVector(xi.0.cross(&eta.0))
}

/// `ad*_xi mu`, defined by `<ad*_xi mu, eta> = <mu, [xi, eta]>`.
pub fn ad_star(xi: &AlgebraVector, mu: &DualVector) -> DualVector {
    DualVector(mu.0.cross(&xi.0))
}

/// `Ad_g xi = vee(g hat(xi) g^-1)`.
pub fn ad_group(g: &GroupElement, xi: &AlgebraVector) -> AlgebraVector {
    AlgebraVector(g.0 * xi.0)
}

/// `Ad*_g mu`, the dual of `Ad_g`: `<Ad*_g mu, xi> = <mu, Ad_g xi>`.
pub fn ad_star_group(g: &GroupElement, mu: &DualVector) -> DualVector {
    DualVector(g.0.transpose() * mu.0)
}

/// Pullback of `mu` through a linear map on the algebra:
/// `<adjoint_of(map, mu), eta> = <mu, map(eta)>`.
pub fn adjoint_of<F>(map: F, mu: &DualVector) -> DualVector
where
    F: Fn(&AlgebraVector) -> AlgebraVector,
{
    let mut out = Vec3::zeros();
    for a in 0..3 {
        out[a] = pairing(mu, &map(&AlgebraVector::basis(a)));
    }
    DualVector(out)
}

/// Pullback through a linear map given as a matrix acting on coordinates.
pub fn adjoint_matrix(map: &Mat3, mu: &DualVector) -> DualVector {
    DualVector(map.transpose() * mu.0)
}

/// An element of SO(3) as a 3x3 matrix.
///
/// No re-orthonormalization happens behind the caller's back; use
/// [`GroupElement::project_to_group`] explicitly when a long run needs it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(pub Mat3);

impl GroupElement {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `||R^T R - I||_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).norm()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Nearest rotation in the Frobenius norm (polar factor).
    pub fn project_to_group(&self) -> Self {
        let svd = self.0.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        Self(r)
    }

    pub fn distance(&self, other: &GroupElement) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RetractionKind {
    Exponential,
    Cayley,
}

impl std::fmt::Display for RetractionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RetractionKind::Exponential => f.write_str("exp"),
            RetractionKind::Cayley => f.write_str("cayley"),
        }
    }
}

impl std::str::FromStr for RetractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(RetractionKind::Exponential),
            "cay" | "cayley" => Ok(RetractionKind::Cayley),
            other => Err(Error::Parameter(format!("unknown retraction `{other}`"))),
        }
    }
}

/// A retraction `tau: so(3) -> SO(3)` with its inverse and trivialized tangents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Retraction {
    pub kind: RetractionKind,
    /// Radius (algebra norm) inside which `tau_inv` and the tangent maps are used.
    pub domain_radius: f64,
}

const EXP_DOMAIN_RADIUS: f64 = std::f64::consts::PI - 0.1;
const CAYLEY_DOMAIN_RADIUS: f64 = 10.0;
// Below this angle the exp coefficients are evaluated by their Taylor series.
const SERIES_ANGLE: f64 = 1.0;

impl Retraction {
    pub fn new(kind: RetractionKind) -> Self {
        let domain_radius = match kind {
            RetractionKind::Exponential => EXP_DOMAIN_RADIUS,
            RetractionKind::Cayley => CAYLEY_DOMAIN_RADIUS,
        };
        Self {
            kind,
            domain_radius,
        }
    }

    pub fn exponential() -> Self {
        Self::new(RetractionKind::Exponential)
    }

    pub fn cayley() -> Self {
        Self::new(RetractionKind::Cayley)
    }

    fn check(&self, xi: &AlgebraVector) -> Result<()> {
        let n = xi.norm();
        if !n.is_finite() || n > self.domain_radius {
            return Err(Error::Domain(format!(
                "|xi| = {n:.6} outside the {} retraction domain (radius {:.6})",
                self.kind, self.domain_radius
            )));
        }
        Ok(())
    }

    pub fn tau(&self, xi: &AlgebraVector) -> GroupElement {
        let x = xi.hat();
        let theta2 = xi.norm_squared();
        let m = match self.kind {
            RetractionKind::Exponential => {
                let c = ExpCoefficients::new(theta2.sqrt());
                Mat3::identity() + x * c.s1 + x * x * c.s2
            }
            RetractionKind::Cayley => {
                let k = 4.0 / (4.0 + theta2);
                Mat3::identity() + (x + x * x * 0.5) * k
            }
        };
        GroupElement(m)
    }

    pub fn tau_inv(&self, g: &GroupElement) -> Result<AlgebraVector> {
        let r = &g.0;
        let trace = r.trace();
        let skew = vee(r);
        let xi = match self.kind {
            RetractionKind::Exponential => {
                let sin_theta = skew.norm();
                let cos_theta = 0.5 * (trace - 1.0);
                let theta = sin_theta.atan2(cos_theta);
                let scale = if theta < 1e-4 {
                    1.0 + theta * theta / 6.0
                } else {
                    theta / sin_theta
                };
                AlgebraVector(skew * scale)
            }
            RetractionKind::Cayley => {
                let denom = 1.0 + trace;
                if denom.abs() < 1e-12 {
                    return Err(Error::Domain(
                        "Cayley inverse undefined at trace(g) = -1".to_string(),
                    ));
                }
                AlgebraVector(skew * (4.0 / denom))
            }
        };
        self.check(&xi)?;
        Ok(xi)
    }

    /// Matrix of `dltau(xi, .)`.
    pub fn dltau_matrix(&self, xi: &AlgebraVector) -> Result<Mat3> {
        self.check(xi)?;
        let x = xi.hat();
        let theta2 = xi.norm_squared();
        Ok(match self.kind {
            RetractionKind::Exponential => {
                let c = ExpCoefficients::new(theta2.sqrt());
                Mat3::identity() - x * c.s2 + x * x * c.s3
            }
            RetractionKind::Cayley => {
                (Mat3::identity() * 2.0 - x) * (2.0 / (4.0 + theta2))
            }
        })
    }

    /// Matrix of `dltau_inv(xi, .)`.
    pub fn dltau_inv_matrix(&self, xi: &AlgebraVector) -> Result<Mat3> {
        self.check(xi)?;
        let x = xi.hat();
        Ok(match self.kind {
            RetractionKind::Exponential => {
                let c = ExpCoefficients::new(xi.norm());
                Mat3::identity() + x * 0.5 + x * x * c.inv
            }
            RetractionKind::Cayley => {
                Mat3::identity() + x * 0.5 + xi.0 * xi.0.transpose() * 0.25
            }
        })
    }

    pub fn dltau(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
        Ok(AlgebraVector(self.dltau_matrix(xi)? * eta.0))
    }

    pub fn dltau_inv(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
        Ok(AlgebraVector(self.dltau_inv_matrix(xi)? * eta.0))
    }

    /// Second left-trivialized tangent, bilinear in `(eta, delta)`.
    pub fn ddltau(
        &self,
        xi: &AlgebraVector,
        eta: &AlgebraVector,
        delta: &AlgebraVector,
    ) -> Result<AlgebraVector> {
        self.check(xi)?;
        let (x, e, d) = (&xi.0, &eta.0, &delta.0);
        let xd = x.dot(d);
        Ok(match self.kind {
            RetractionKind::Exponential => {
                let c = ExpCoefficients::new(x.norm());
                let x_e = x.cross(e);
                let raw = -x_e * (c.ds2 * xd) - d.cross(e) * c.s2
                    + x.cross(&x_e) * (c.ds3 * xd)
                    + (d.cross(&x_e) + x.cross(&d.cross(e))) * c.s3;
                self.dltau_inv(xi, &AlgebraVector(raw))?
            }
            RetractionKind::Cayley => {
                let c = 2.0 / (4.0 + x.norm_squared());
                let tail = self.dltau_inv(xi, &AlgebraVector(d.cross(e)))?;
                AlgebraVector(-e * (c * xd)) - tail * c
            }
        })
    }

    /// Base-point derivative of `dltau_inv`, bilinear in `(eta, delta)`.
    pub fn ddltau_inv(
        &self,
        xi: &AlgebraVector,
        eta: &AlgebraVector,
        delta: &AlgebraVector,
    ) -> Result<AlgebraVector> {
        self.check(xi)?;
        let (x, e, d) = (&xi.0, &eta.0, &delta.0);
        Ok(AlgebraVector(match self.kind {
            RetractionKind::Exponential => {
                let c = ExpCoefficients::new(x.norm());
                d.cross(e) * 0.5
                    + x.cross(&x.cross(e)) * (c.dinv * x.dot(d))
                    + (d.cross(&x.cross(e)) + x.cross(&d.cross(e))) * c.inv
            }
            RetractionKind::Cayley => {
                d.cross(e) * 0.5 + (d * x.dot(e) + x * d.dot(e)) * 0.25
            }
        }))
    }
}

/// Scalar coefficient functions of the exponential map on so(3).
///
/// `ds2`, `ds3` and `dinv` are the angle derivatives divided by the angle, so
/// that `d(coef) = coef' . (xi . delta)`.
struct ExpCoefficients {
    s1: f64,
    s2: f64,
    s3: f64,
    ds2: f64,
    ds3: f64,
    inv: f64,
    dinv: f64,
}

impl ExpCoefficients {
    fn new(theta: f64) -> Self {
        if theta < SERIES_ANGLE {
            Self::series(theta)
        } else {
            Self::closed(theta)
        }
    }

    fn closed(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        let t2 = t * t;
        let half_cot = (0.5 * t).cos() / (0.5 * t).sin();
        let half_csc2 = 1.0 / (0.5 * t).sin().powi(2);
        Self {
            s1: s / t,
            s2: (1.0 - c) / t2,
            s3: (t - s) / (t2 * t),
            ds2: (t * s - 2.0 * (1.0 - c)) / (t2 * t2),
            ds3: (t * (1.0 - c) - 3.0 * (t - s)) / (t2 * t2 * t),
            inv: 1.0 / t2 - half_cot / (2.0 * t),
            dinv: (-2.0 / (t2 * t) + half_cot / (2.0 * t2) + half_csc2 / (4.0 * t)) / t,
        }
    }

    fn series(t: f64) -> Self {
        let t2 = t * t;
        // sum_k (-1)^k t^{2k} / (2k + offset)!
        let alt = |offset: u32| -> f64 {
            let mut value = 0.0;
            let mut pow = 1.0;
            for k in 0..10u32 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                value += sign * pow / factorial(2 * k + offset);
                pow *= t2;
            }
            value
        };
        // derivative of the series above, divided by t
        let alt_deriv = |offset: u32| -> f64 {
            let mut deriv = 0.0;
            let mut pow = 1.0;
            for k in 1..10u32 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                deriv += sign * (2 * k) as f64 * pow / factorial(2 * k + offset);
                pow *= t2;
            }
            deriv
        };
        let (s1, s2, s3) = (alt(1), alt(2), alt(3));
        // 1/t^2 - cot(t/2)/(2t) = sum_{n>=1} |B_2n| t^{2n-2} / (2n)!
        const BERNOULLI: [f64; 12] = [
            1.0 / 6.0,
            1.0 / 30.0,
            1.0 / 42.0,
            1.0 / 30.0,
            5.0 / 66.0,
            691.0 / 2730.0,
            7.0 / 6.0,
            3617.0 / 510.0,
            43867.0 / 798.0,
            174611.0 / 330.0,
            854513.0 / 138.0,
            236364091.0 / 2730.0,
        ];
        let mut inv = 0.0;
        let mut dinv = 0.0;
        let mut pow = 1.0;
        for (i, b) in BERNOULLI.iter().enumerate() {
            let n = (i + 1) as u32;
            inv += b * pow / factorial(2 * n);
            if n < BERNOULLI.len() as u32 {
                let b_next = BERNOULLI[i + 1];
                dinv += b_next * (2 * n) as f64 * pow / factorial(2 * n + 2);
            }
            pow *= t2;
        }
        Self {
            s1,
            s2,
            s3,
            ds2: alt_deriv(2),
            ds3: alt_deriv(3),
            inv,
            dinv,
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
