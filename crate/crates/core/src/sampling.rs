//! Seeded generators for the matrix ensembles the verification suites draw from.
//!
//! Every generator is deterministic given the `Rng` state, so a fixed seed
//! reproduces a run bit for bit.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};

pub use rand_chacha::ChaCha8Rng;

use crate::numerics::{op_norm, qr_pivoted, Complex64, ComplexMatrix, ONE};

/// Stream cipher RNG keyed by a single word.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * core::f64::consts::PI * u2;
    (r * angle.cos(), r * angle.sin())
}

/// Matrix with iid standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let (x, y) = standard_normal_pair(rng);
        data.push(Complex64::new(x, y) * core::f64::consts::FRAC_1_SQRT_2);
    }
    ComplexMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

/// Unitary drawn by orthonormalizing a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let f = qr_pivoted(&g, 1e-12);
    assert_eq!(f.rank, n, "gaussian sample was singular");
    f.q
}

/// Contraction with operator norm exactly `rho`.
pub fn random_contraction<R: Rng>(rng: &mut R, n: usize, rho: f64) -> ComplexMatrix {
    assert!(rho >= 0.0);
    let g = gaussian_matrix(rng, n, n);
    let norm = op_norm(&g);
    if norm == 0.0 {
        return ComplexMatrix::zeros(n, n);
    }
    g.scale_re(rho / norm)
}

/// Point distributed uniformly over the closed disk of the given radius.
pub fn uniform_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let angle = 2.0 * core::f64::consts::PI * rng.gen::<f64>();
    Complex64::new(r * angle.cos(), r * angle.sin())
}

/// Commuting normal tuple with known joint spectrum.
pub struct NormalTupleSample {
    /// The tuple itself, `matrices[j] = U diag(atoms[..][j]) U*`.
    pub matrices: Vec<ComplexMatrix>,
    /// Shared eigenvector frame.
    pub frame: ComplexMatrix,
    /// `atoms[i]` is the joint eigenvalue in `C^n` attached to column `i` of the frame.
    pub atoms: Vec<Vec<Complex64>>,
}

/// Draws a commuting normal tuple of `n` contractions on `C^dim`.
///
/// Atom coordinates are uniform over the disk of radius `radius` and are
/// redrawn while they fall within `gap_from_one` of the point `1`.
pub fn random_normal_tuple<R: Rng>(
    rng: &mut R,
    dim: usize,
    n: usize,
    radius: f64,
    gap_from_one: f64,
) -> NormalTupleSample {
    assert!(radius <= 1.0);
    let frame = random_unitary(rng, dim);
    let mut atoms = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut point = Vec::with_capacity(n);
        for _ in 0..n {
            let mut z = uniform_in_disk(rng, radius);
            while (z - ONE).norm() <= gap_from_one {
                z = uniform_in_disk(rng, radius);
            }
            point.push(z);
        }
        atoms.push(point);
    }
    let matrices = (0..n)
        .map(|j| {
            let d = ComplexMatrix::from_diag(&atoms.iter().map(|p| p[j]).collect::<Vec<_>>());
            &(&frame * &d) * &frame.adjoint()
        })
        .collect();
    NormalTupleSample { matrices, frame, atoms }
}

/// Commuting contractions built as polynomials in one random contraction.
///
/// Each member has operator norm exactly `target_norm`.
pub fn commuting_polynomial_family<R: Rng>(
    rng: &mut R,
    dim: usize,
    n: usize,
    degree: usize,
    target_norm: f64,
) -> Vec<ComplexMatrix> {
    let base = random_contraction(rng, dim, 0.9);
    let mut family = Vec::with_capacity(n);
    for _ in 0..n {
        let mut acc = ComplexMatrix::zeros(dim, dim);
        let mut power = ComplexMatrix::identity(dim);
        for _ in 0..=degree {
            let c = uniform_in_disk(rng, 1.0);
            acc = &acc + &power.scale(c);
            power = &power * &base;
        }
        let norm = op_norm(&acc);
        if norm == 0.0 {
            family.push(acc);
        } else {
            family.push(acc.scale_re(target_norm / norm));
        }
    }
    family
}

/// Doubly commuting tuple acting on a tensor product, one contraction per leg.
pub struct TensorTupleSample {
    pub leg_dims: Vec<usize>,
    /// `legs[j]` acts on the `j`-th factor.
    pub legs: Vec<ComplexMatrix>,
    /// `matrices[j]` is `legs[j]` amplified by identities on the other factors.
    pub matrices: Vec<ComplexMatrix>,
}

/// Draws one strict contraction per leg and amplifies each to the product space.
///
/// Members commute exactly and so do their adjoint mixtures, since they act on
/// disjoint tensor factors.
pub fn doubly_commuting_tuple<R: Rng>(
    rng: &mut R,
    leg_dims: &[usize],
    rho: f64,
) -> TensorTupleSample {
    let legs: Vec<ComplexMatrix> = leg_dims
        .iter()
        .map(|&d| random_contraction(rng, d, rho))
        .collect();
    let matrices = (0..legs.len())
        .map(|j| amplify_to_product(&legs[j], leg_dims, j))
        .collect();
    TensorTupleSample { leg_dims: leg_dims.to_vec(), legs, matrices }
}

/// Places `op` on leg `j` of the tensor product with identities elsewhere.
pub fn amplify_to_product(op: &ComplexMatrix, leg_dims: &[usize], j: usize) -> ComplexMatrix {
    assert_eq!(op.rows(), leg_dims[j]);
    let mut acc = ComplexMatrix::identity(1);
    for (k, &d) in leg_dims.iter().enumerate() {
        let factor = if k == j {
            op.clone()
        } else {
            ComplexMatrix::identity(d)
        };
        acc = acc.kron(&factor);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{commutator, diff_norm, min_singular};

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded_rng(7);
        let u = random_unitary(&mut rng, 6);
        let gram = &u.adjoint() * &u;
        assert!(diff_norm(&gram, &ComplexMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn contraction_norm_is_pinned() {
        let mut rng = seeded_rng(8);
        let t = random_contraction(&mut rng, 5, 0.9);
        assert!((op_norm(&t) - 0.9).abs() < 1e-12);
        assert!(min_singular(&t.sub_m(&ComplexMatrix::identity(5))) >= 0.1 - 1e-12);
    }

    #[test]
    fn normal_tuple_commutes_and_matches_atoms() {
        let mut rng = seeded_rng(9);
        let sample = random_normal_tuple(&mut rng, 6, 2, 1.0, 1e-2);
        let [a, b] = [&sample.matrices[0], &sample.matrices[1]];
        assert!(commutator(a, b).fro_norm() < 1e-12);
        assert!(commutator(a, &b.adjoint()).fro_norm() < 1e-12);
        for (i, point) in sample.atoms.iter().enumerate() {
            let col = sample.frame.column(i);
            let lhs = a * &col;
            let rhs = col.scale(point[0]);
            assert!(diff_norm(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn polynomial_family_commutes() {
        let mut rng = seeded_rng(10);
        let family = commuting_polynomial_family(&mut rng, 7, 3, 4, 0.8);
        for a in &family {
            assert!((op_norm(a) - 0.8).abs() < 1e-10);
            for b in &family {
                assert!(commutator(a, b).fro_norm() < 1e-10);
            }
        }
    }

    #[test]
    fn tensor_tuple_doubly_commutes() {
        let mut rng = seeded_rng(11);
        let sample = doubly_commuting_tuple(&mut rng, &[2, 3], 0.5);
        let [a, b] = [&sample.matrices[0], &sample.matrices[1]];
        assert_eq!(a.rows(), 6);
        assert_eq!(commutator(a, b).fro_norm(), 0.0);
        assert_eq!(commutator(a, &b.adjoint()).fro_norm(), 0.0);
        assert!((op_norm(a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disk_points_stay_in_disk() {
        let mut rng = seeded_rng(12);
        for _ in 0..200 {
            assert!(uniform_in_disk(&mut rng, 0.7).norm() <= 0.7 + 1e-15);
        }
    }
}
