use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Names of the shipped tableaus.
pub const TABLEAU_NAMES: [&str; 6] = ["gauss1", "gauss2", "gauss3", "lobatto2", "lobatto3", "rk4"];

/// Butcher coefficients `(a, b)` with stage count `s` and classical order `p`.
///
/// Every weight `b_j` must be nonzero because the stage equations divide by it.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::Parameter(format!("tableau `{name}` has inconsistent shape")));
        }
        if b.iter().any(|&w| w == 0.0) {
            return Err(Error::Parameter(format!("tableau `{name}` has a zero weight")));
        }
        let total: f64 = b.iter().sum();
        if (total - 1.0).abs() > 1e-14 {
            return Err(Error::Parameter(format!(
                "weights of tableau `{name}` sum to {total}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            a,
            b,
            order,
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let r3 = 3f64.sqrt();
        let r15 = 15f64.sqrt();
        let (a, b, order) = match name {
            "gauss1" => (vec![vec![0.5]], vec![1.0], 2),
            "gauss2" => (
                vec![
                    vec![0.25, 0.25 - r3 / 6.0],
                    vec![0.25 + r3 / 6.0, 0.25],
                ],
                vec![0.5, 0.5],
                4,
            ),
            "gauss3" => (
                vec![
                    vec![5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0],
                    vec![5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0],
                    vec![5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0],
                ],
                vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                6,
            ),
            "lobatto2" => (vec![vec![0.0, 0.0], vec![0.5, 0.5]], vec![0.5, 0.5], 2),
            "lobatto3" => (
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0],
                    vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                ],
                vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                4,
            ),
            "rk4" => (
                vec![
                    vec![0.0, 0.0, 0.0, 0.0],
                    vec![0.5, 0.0, 0.0, 0.0],
                    vec![0.0, 0.5, 0.0, 0.0],
                    vec![0.0, 0.0, 1.0, 0.0],
                ],
                vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
                4,
            ),
            other => return Err(Error::UnknownTableau(other.to_string())),
        };
        Self::new(name, a, b, order)
    }

    pub fn all() -> Vec<Self> {
        TABLEAU_NAMES
            .iter()
            .map(|n| Self::by_name(n).expect("shipped tableau"))
            .collect()
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Nodes `c_i = sum_j a_ij`.
    pub fn c(&self) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().sum()).collect()
    }
}

impl FromStr for ButcherTableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::by_name(s)
    }
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (s = {}, p = {})", self.name, self.stages(), self.order)
    }
}
