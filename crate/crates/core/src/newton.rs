use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Forward-difference step for the Jacobian.
    pub fd_step: f64,
    /// Factorize at the starting point even if it already satisfies `tol`.
    pub check_regularity: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct NewtonSolution {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Newton iteration on `f(x) = 0` with a forward-difference Jacobian.
pub(crate) fn solve<F>(f: F, x0: DVector<f64>, opts: &NewtonOptions) -> Result<NewtonSolution>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut fx = f(&x)?;
    let mut residual = max_norm(&fx);
    let mut iterations = 0;
    loop {
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        let must_check = opts.check_regularity && iterations == 0;
        if residual <= opts.tol && !must_check {
            return Ok(NewtonSolution {
                x,
                iterations,
                residual,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        let jac = jacobian(&f, &x, &fx, opts.fd_step)?;
        let lu = jac.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularJacobian);
        }
        if residual <= opts.tol {
            return Ok(NewtonSolution {
                x,
                iterations,
                residual,
            });
        }
        let dx = lu.solve(&fx).ok_or(Error::SingularJacobian)?;
        x -= dx;
        fx = f(&x)?;
        residual = max_norm(&fx);
        iterations += 1;
    }
}

fn jacobian<F>(f: &F, x: &DVector<f64>, fx: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(fx.len(), n);
    let mut xp = x.clone();
    for j in 0..n {
        let dj = step * (1.0 + x[j].abs());
        xp[j] = x[j] + dj;
        let col = (f(&xp)? - fx) / dj;
        jac.set_column(j, &col);
        xp[j] = x[j];
    }
    Ok(jac)
}
