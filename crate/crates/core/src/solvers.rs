//! Preconditioned conjugate gradients on scalar fields.

use crate::error::{Error, Result};
use crate::spectral::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// final `|r| / |b|`
    pub residual: f64,
}

/// Solve `A x = b` for symmetric positive definite `A`.
///
/// Stops when `|b - A x| <= tol |b|`.
pub fn pcg(
    name: &'static str,
    apply: impl Fn(&Field) -> Field,
    precond: impl Fn(&Field) -> Field,
    b: &Field,
    x0: Option<Field>,
    tol: f64,
    max_iter: usize,
) -> Result<(Field, SolveStats)> {
    let b_norm = b.l2_norm();
    if b_norm == 0.0 {
        return Ok((
            Field::zeros(*b.grid()),
            SolveStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let mut x = x0.unwrap_or_else(|| precond(b));
    let mut r = b - &apply(&x);
    let mut res = r.l2_norm() / b_norm;
    if res <= tol {
        return Ok((x, SolveStats { iterations: 0, residual: res }));
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.inner(&z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = p.inner(&ap);
        if !(pap > 0.0) {
            return Err(Error::IterationLimit {
                solver: name,
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        x = x.axpy(alpha, &p);
        r = r.axpy(-alpha, &ap);
        res = r.l2_norm() / b_norm;
        if !res.is_finite() {
            break;
        }
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        z = precond(&r);
        let rz_new = r.inner(&z);
        p = z.axpy(rz_new / rz, &p);
        rz = rz_new;
    }
    Err(Error::IterationLimit {
        solver: name,
        iterations: max_iter,
        residual: res,
    })
}
