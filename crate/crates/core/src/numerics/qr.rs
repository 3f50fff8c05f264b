use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

use super::matrix::{Complex64, ComplexMatrix, ONE, ZERO};

/// Column-pivoted Householder factorization A P = Q R.
///
/// `q` has orthonormal columns (m x rank), `r` is rank x n and upper
/// triangular in the permuted column order: column j of A P is A[:, perm[j]].
pub struct PivotedQr {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    pub perm: Vec<usize>,
    pub rank: usize,
}

fn trailing_col_norm(w: &ComplexMatrix, from_row: usize, j: usize) -> f64 {
    (from_row..w.rows())
        .map(|i| w.get(i, j).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Rank detection stops when the largest trailing column norm falls at or
/// below rel_tol times the largest initial column norm.
pub fn qr_pivoted(a: &ComplexMatrix, rel_tol: f64) -> PivotedQr {
    let (m, n) = a.shape();
    let kmax = m.min(n);
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::new();

    let mut norm0: f64 = 0.0;
    for j in 0..n {
        norm0 = norm0.max(trailing_col_norm(&w, 0, j));
    }
    let floor = norm0 * rel_tol.max(f64::EPSILON * (m.max(n) as f64));

    let mut rank = 0;
    for k in 0..kmax {
        let mut best_j = k;
        let mut best_norm = trailing_col_norm(&w, k, k);
        for j in (k + 1)..n {
            let nj = trailing_col_norm(&w, k, j);
            if nj > best_norm {
                best_norm = nj;
                best_j = j;
            }
        }
        if best_norm <= floor || best_norm == 0.0 {
            break;
        }
        if best_j != k {
            for i in 0..m {
                let tmp = w.get(i, k);
                w.set(i, k, w.get(i, best_j));
                w.set(i, best_j, tmp);
            }
            perm.swap(k, best_j);
        }

        let x0 = w.get(k, k);
        let alpha = if x0 == ZERO {
            Complex64::new(-best_norm, 0.0)
        } else {
            -(x0 / x0.norm()) * best_norm
        };
        let mut v: Vec<Complex64> = (k..m).map(|i| w.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for z in v.iter_mut() {
                *z = *z / vnorm;
            }
            for j in (k + 1)..n {
                let mut dot = ZERO;
                for (i, vi) in v.iter().enumerate() {
                    dot += vi.conj() * w.get(k + i, j);
                }
                let dot2 = dot * 2.0;
                for (i, vi) in v.iter().enumerate() {
                    let cur = w.get(k + i, j);
                    w.set(k + i, j, cur - dot2 * vi);
                }
            }
        }
        w.set(k, k, alpha);
        for i in (k + 1)..m {
            w.set(i, k, ZERO);
        }
        reflectors.push(v);
        rank += 1;
    }

    let mut q = ComplexMatrix::zeros(m, rank);
    for i in 0..rank {
        q.set(i, i, ONE);
    }
    for k in (0..rank).rev() {
        let v = &reflectors[k];
        for j in 0..rank {
            let mut dot = ZERO;
            for (i, vi) in v.iter().enumerate() {
                dot += vi.conj() * q.get(k + i, j);
            }
            let dot2 = dot * 2.0;
            for (i, vi) in v.iter().enumerate() {
                let cur = q.get(k + i, j);
                q.set(k + i, j, cur - dot2 * vi);
            }
        }
    }

    let r = if rank > 0 {
        w.block(0, 0, rank, n)
    } else {
        ComplexMatrix::zeros(0, n)
    };
    PivotedQr { q, r, perm, rank }
}

/// Numerical rank at a relative singular-threshold (column-norm based).
pub fn rank_of(a: &ComplexMatrix, rel_tol: f64) -> usize {
    qr_pivoted(a, rel_tol).rank
}

/// Orthonormal basis of the column space at the given relative tolerance.
pub fn orthonormal_range(a: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    qr_pivoted(a, rel_tol).q
}

/// Least-squares solution of min ||A X - B||_F via the pivoted factorization.
///
/// Requires full column rank at the given threshold; callers that want a
/// regularized answer on deficiency should fall back to normal equations.
pub fn lstsq(a: &ComplexMatrix, b: &ComplexMatrix, rel_tol: f64) -> Result<ComplexMatrix> {
    let (m, n) = a.shape();
    if b.rows() != m {
        return Err(Error::Dimension {
            context: "least-squares right-hand side",
            expected: (m, b.cols()),
            found: b.shape(),
        });
    }
    let f = qr_pivoted(a, rel_tol);
    if f.rank < n {
        return Err(Error::RankDeficient {
            rank: f.rank,
            required: n,
        });
    }
    let y = f.q.adjoint().mul_m(b);
    let nb = b.cols();
    let mut z = vec![ZERO; n * nb];
    for col in 0..nb {
        for i in (0..n).rev() {
            let mut acc = y.get(i, col);
            for j in (i + 1)..n {
                acc -= f.r.get(i, j) * z[j * nb + col];
            }
            z[i * nb + col] = acc / f.r.get(i, i);
        }
    }
    let mut x = ComplexMatrix::zeros(n, nb);
    for i in 0..n {
        for col in 0..nb {
            x.set(f.perm[i], col, z[i * nb + col]);
        }
    }
    Ok(x)
}

/// Solves A X = B for square A; rejects numerically rank-deficient systems.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("solve")?;
    lstsq(a, b, 1e-13)
}

/// Inverse via the pivoted solve; same rank-deficiency contract.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}
