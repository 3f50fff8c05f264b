use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;

use super::eig::herm_eig;
use super::matrix::{Complex64, ComplexMatrix, ZERO};

/// Thin singular value decomposition A = U diag(sigma) V*, sigma descending,
/// with k = min(rows, cols) columns in U and V.
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

fn gram_herm_tol(scale2: f64, n: usize) -> f64 {
    1e-12 * (1.0 + scale2) * (n as f64)
}

/// Computed from the Hermitian eigensystem of A*A; left vectors are recovered
/// as A v / ||A v|| and completed orthonormally where singular values vanish.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd {
            u: ComplexMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: ComplexMatrix::zeros(n, 0),
        });
    }
    let gram = a.adjoint().mul_m(a);
    let scale2 = gram.fro_norm();
    let eig = herm_eig(&gram, gram_herm_tol(scale2, n))?;

    // Descending by eigenvalue; keep the top k of n.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&x, &y| eig.values[y].total_cmp(&eig.values[x]));
    let order = &order[..k];

    let v = ComplexMatrix::from_fn(n, k, |i, j| eig.vectors.get(i, order[j]));
    let b = a.mul_m(&v);

    let sig_max = eig.values[*order.first().unwrap()].max(0.0).sqrt();
    let floor = sig_max * f64::EPSILON * (m.max(n) as f64) * 16.0;

    let mut sigma = Vec::with_capacity(k);
    let mut u = ComplexMatrix::zeros(m, k);
    let mut needs_completion: Vec<usize> = Vec::new();
    for j in 0..k {
        let norm = b.col_norm(j);
        sigma.push(norm);
        if norm > floor && norm > 0.0 {
            for i in 0..m {
                u.set(i, j, b.get(i, j) / norm);
            }
        } else {
            needs_completion.push(j);
        }
    }

    // Fill the null-direction left vectors with an orthonormal completion.
    if !needs_completion.is_empty() {
        let filled: Vec<usize> = (0..k).filter(|j| !needs_completion.contains(j)).collect();
        let mut basis: Vec<Vec<Complex64>> = filled
            .iter()
            .map(|&j| (0..m).map(|i| u.get(i, j)).collect())
            .collect();
        let mut cand = 0usize;
        for &j in &needs_completion {
            loop {
                assert!(cand < m, "orthonormal completion exhausted candidates");
                let mut vcol: Vec<Complex64> = (0..m)
                    .map(|i| if i == cand { Complex64::new(1.0, 0.0) } else { ZERO })
                    .collect();
                for _ in 0..2 {
                    for bcol in &basis {
                        let dot: Complex64 = bcol
                            .iter()
                            .zip(vcol.iter())
                            .map(|(x, y)| x.conj() * y)
                            .fold(ZERO, |acc, z| acc + z);
                        for (x, y) in vcol.iter_mut().zip(bcol.iter()) {
                            *x -= dot * y;
                        }
                    }
                }
                let norm = vcol.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                cand += 1;
                if norm > 0.5 {
                    for z in vcol.iter_mut() {
                        *z = *z / norm;
                    }
                    for i in 0..m {
                        u.set(i, j, vcol[i]);
                    }
                    basis.push(vcol);
                    break;
                }
            }
        }
    }

    Ok(Svd { u, sigma, v })
}

/// Largest singular value (spectral norm); 0 for empty shapes.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let gram = if n <= m {
        a.adjoint().mul_m(a)
    } else {
        a.mul_m(&a.adjoint())
    };
    let dim = gram.rows();
    let eig = herm_eig(&gram, gram_herm_tol(gram.fro_norm(), dim))
        .expect("gram matrix is Hermitian by construction");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Smallest of the min(m, n) singular values.
pub fn min_singular(a: &ComplexMatrix) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let gram = if n <= m {
        a.adjoint().mul_m(a)
    } else {
        a.mul_m(&a.adjoint())
    };
    let dim = gram.rows();
    let eig = herm_eig(&gram, gram_herm_tol(gram.fro_norm(), dim))
        .expect("gram matrix is Hermitian by construction");
    eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Orthonormal basis of the right null space at an absolute singular threshold.
pub fn null_space(a: &ComplexMatrix, abs_tol: f64) -> Result<ComplexMatrix> {
    let n = a.cols();
    let gram = a.adjoint().mul_m(a);
    let eig = herm_eig(&gram, gram_herm_tol(gram.fro_norm(), n))?;
    let keep: Vec<usize> = (0..n)
        .filter(|&j| eig.values[j].max(0.0).sqrt() <= abs_tol)
        .collect();
    Ok(ComplexMatrix::from_fn(n, keep.len(), |i, j| {
        eig.vectors.get(i, keep[j])
    }))
}
