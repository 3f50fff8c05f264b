use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

use super::matrix::{Complex64, ComplexMatrix, ZERO};

/// Eigenvalues ascending; columns of `vectors` are the matching eigenvectors,
/// so H = U diag(values) U*.
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS: usize = 64;

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input must be Hermitian within `herm_tol` (absolute, entrywise); it is
/// symmetrized before iteration so the rotations see an exactly Hermitian
/// matrix.
pub fn herm_eig(h: &ComplexMatrix, herm_tol: f64) -> Result<HermEig> {
    h.require_square("herm_eig")?;
    let defect = h.herm_defect();
    if defect > herm_tol {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.rows();
    let mut w = ComplexMatrix::from_fn(n, n, |i, j| {
        (h.get(i, j) + h.get(j, i).conj()) * 0.5
    });
    let mut u = ComplexMatrix::identity(n);

    let scale = w.fro_norm();
    if n <= 1 || scale == 0.0 {
        let values: Vec<f64> = (0..n).map(|i| w.get(i, i).re).collect();
        return Ok(HermEig { values, vectors: u });
    }
    let off_target = scale * f64::EPSILON * (n as f64).sqrt();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off2 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off2 += 2.0 * w.get(i, j).norm_sqr();
            }
        }
        if off2.sqrt() <= off_target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = w.get(p, q);
                let r = hpq.norm();
                if r <= off_target / (n as f64) {
                    continue;
                }
                let phase = hpq / r;
                let app = w.get(p, p).re;
                let aqq = w.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);

                // Right-multiply by G: columns p, q.
                for i in 0..n {
                    let wip = w.get(i, p);
                    let wiq = w.get(i, q);
                    w.set(i, p, wip * c - wiq * s.conj());
                    w.set(i, q, wip * s + wiq * c);
                }
                // Left-multiply by G*: rows p, q.
                for j in 0..n {
                    let wpj = w.get(p, j);
                    let wqj = w.get(q, j);
                    w.set(p, j, wpj * c - wqj * s);
                    w.set(q, j, wpj * s.conj() + wqj * c);
                }
                // The rotation zeroes the (p, q) pair and keeps diagonals real.
                w.set(p, q, ZERO);
                w.set(q, p, ZERO);
                let dpp = w.get(p, p).re;
                let dqq = w.get(q, q).re;
                w.set(p, p, Complex64::new(dpp, 0.0));
                w.set(q, q, Complex64::new(dqq, 0.0));

                for i in 0..n {
                    let uip = u.get(i, p);
                    let uiq = u.get(i, q);
                    u.set(i, p, uip * c - uiq * s.conj());
                    u.set(i, q, uip * s + uiq * c);
                }
            }
        }
    }
    if !converged {
        let mut off2 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off2 += 2.0 * w.get(i, j).norm_sqr();
            }
        }
        if off2.sqrt() > off_target * 16.0 {
            return Err(Error::NoConvergence {
                context: "jacobi eigensolver",
                last_delta: off2.sqrt(),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| w.get(a, a).re.total_cmp(&w.get(b, b).re));
    let values: Vec<f64> = order.iter().map(|&i| w.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u.get(i, order[j]));
    Ok(HermEig { values, vectors })
}

/// Hermitian tolerance used when callers have no better scale information.
pub fn default_herm_tol(m: &ComplexMatrix) -> f64 {
    1e-10 * (1.0 + m.fro_norm())
}

/// PSD square root via the Hermitian eigendecomposition.
///
/// Eigenvalues in [-tol, 0) are clipped to zero; anything below -tol is
/// rejected as not positive semidefinite.
pub fn psd_sqrt(h: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(h, default_herm_tol(h))?;
    let mut vals = eig.values.clone();
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(Error::NotPsd { min_eigenvalue: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let n = h.rows();
    let u = &eig.vectors;
    let mut scaled = u.clone();
    for j in 0..n {
        let s = vals[j].sqrt();
        for i in 0..n {
            scaled.set(i, j, u.get(i, j) * s);
        }
    }
    Ok(scaled.mul_m(&u.adjoint()))
}
