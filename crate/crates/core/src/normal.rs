//! Spectral models for commuting normal contraction tuples: joint
//! diagonalization, the discrete measure model on the joint spectrum, and
//! the semigroups the model generates.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::cogenerator::mobius_scalar;
use crate::error::{Error, Result};
use crate::numerics::{
    commutator, default_herm_tol, herm_eig, op_norm, tol, Complex64, ComplexMatrix,
};
use crate::sampling::seeded_rng;

/// Eigenvalues of a Hermitian combination closer than this form a degenerate
/// cluster and are resolved by recursing on the cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Diagonal values this close to one are rejected as atoms; by the spectral
/// picture that is exactly the case where no cogenerator model exists.
pub const ATOM_ONE_GAP: f64 = 1e-8;
/// Allowed off-diagonal residual after diagonalization, relative to the
/// largest operator norm in the tuple.
const OFF_DIAGONAL_REL: f64 = 1e-7;
/// Recursion budget for cluster splitting; generic combinations split on the
/// first try, so hitting this means the input was not a commuting normal tuple.
const MAX_SPLIT_DEPTH: usize = 12;

fn check_tuple(ops: &[ComplexMatrix], pre_tol: f64) -> Result<()> {
    if ops.is_empty() {
        return Err(Error::Domain {
            context: "tuple must contain at least one operator",
        });
    }
    let dim = ops[0].rows();
    for t in ops {
        t.require_square("normal tuple entry")?;
        if t.rows() != dim {
            return Err(Error::Dimension {
                context: "tuple entries on a shared space",
                expected: (dim, dim),
                found: t.shape(),
            });
        }
        let defect = op_norm(&commutator(t, &t.adjoint()));
        if defect > pre_tol {
            return Err(Error::Structure {
                context: "operator is not normal",
                defect,
            });
        }
    }
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let norm = op_norm(&commutator(&ops[i], &ops[j]));
            if norm > pre_tol {
                return Err(Error::NotCommuting {
                    context: "tuple operators do not commute",
                    norm,
                });
            }
        }
    }
    Ok(())
}

fn hermitian_combination<R: Rng>(ops: &[ComplexMatrix], rng: &mut R) -> ComplexMatrix {
    let dim = ops[0].rows();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for t in ops {
        let adj = t.adjoint();
        let re = t.add_m(&adj).scale_re(0.5);
        let im = t.sub_m(&adj).scale(Complex64::new(0.0, -0.5));
        // Weights bounded away from zero; joint eigenvalues collide only on
        // a measure-zero set of weights.
        let a = 0.5 + rng.gen::<f64>();
        let b = 0.5 + rng.gen::<f64>();
        h = h.add_m(&re.scale_re(a)).add_m(&im.scale_re(b));
    }
    h
}

fn max_scalar_defect(ops: &[ComplexMatrix]) -> f64 {
    let dim = ops[0].rows();
    let mut worst: f64 = 0.0;
    for t in ops {
        let mean = t.trace() / dim as f64;
        let centered = t.sub_m(&ComplexMatrix::identity(dim).scale(mean));
        worst = worst.max(centered.fro_norm());
    }
    worst
}

fn split_basis<R: Rng>(ops: &[ComplexMatrix], rng: &mut R, depth: usize) -> Result<ComplexMatrix> {
    let dim = ops[0].rows();
    if dim == 1 {
        return Ok(ComplexMatrix::identity(1));
    }
    let scale = ops.iter().map(op_norm).fold(1.0f64, f64::max);
    let defect = max_scalar_defect(ops);
    if defect <= 1e-12 * scale {
        // Every operator is a scalar here; any orthonormal basis works.
        return Ok(ComplexMatrix::identity(dim));
    }
    if depth >= MAX_SPLIT_DEPTH {
        return Err(Error::NoConvergence {
            context: "joint diagonalization cluster split",
            last_delta: defect,
        });
    }
    let h = hermitian_combination(ops, rng);
    let eig = herm_eig(&h, default_herm_tol(&h))?;

    let mut basis = ComplexMatrix::zeros(dim, dim);
    let mut start = 0;
    let mut filled = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.values[end] - eig.values[end - 1] <= CLUSTER_TOL {
            end += 1;
        }
        let size = end - start;
        let cluster = eig.vectors.block(0, start, dim, size);
        if size == 1 {
            basis.set_block(0, filled, &cluster);
        } else {
            let compressed: Vec<ComplexMatrix> = ops
                .iter()
                .map(|t| &cluster.adjoint() * &(t * &cluster))
                .collect();
            let inner = split_basis(&compressed, rng, depth + 1)?;
            basis.set_block(0, filled, &(&cluster * &inner));
        }
        filled += size;
        start = end;
    }
    Ok(basis)
}

/// Joint diagonalization of a commuting normal tuple.
///
/// Diagonalizes a random Hermitian combination of the real and imaginary
/// parts, then resolves degenerate clusters by recursing with fresh weights.
/// Returns the conjugating unitary `γ` and the diagonal of each `γ* T_j γ`,
/// in a deterministic order for a fixed `seed`.
pub fn joint_diagonalize(
    ops: &[ComplexMatrix],
    pre_tol: f64,
    seed: u64,
) -> Result<(ComplexMatrix, Vec<Vec<Complex64>>)> {
    check_tuple(ops, pre_tol)?;
    let mut rng = seeded_rng(seed);
    let gamma = split_basis(ops, &mut rng, 0)?;
    let scale = ops.iter().map(op_norm).fold(0.0f64, f64::max);
    let mut values = Vec::with_capacity(ops.len());
    for t in ops {
        let rotated = &gamma.adjoint() * &(t * &gamma);
        let mut diagonal = Vec::with_capacity(t.rows());
        let mut off = rotated.clone();
        for k in 0..t.rows() {
            diagonal.push(rotated.get(k, k));
            off.set(k, k, crate::numerics::ZERO);
        }
        let residual = op_norm(&off);
        if residual > OFF_DIAGONAL_REL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Structure {
                context: "joint diagonalization residual",
                defect: residual,
            });
        }
        values.push(diagonal);
    }
    Ok((gamma, values))
}

/// Finite spectral model: counting measure on the joint eigenbasis with one
/// symbol value per operator and atom, plus the conjugating unitary.
#[derive(Clone, Debug)]
pub struct DiscreteMeasureModel {
    /// Basis labels of the atoms, in diagonalization order.
    pub atoms: Vec<usize>,
    /// Counting-measure weights, one per atom.
    pub weights: Vec<f64>,
    /// `values[j][k]` is the symbol of the `j`-th operator at atom `k`.
    pub values: Vec<Vec<Complex64>>,
    /// Unitary carrying the model back onto the tuple.
    pub gamma: ComplexMatrix,
}

/// Builds the discrete measure model of a commuting normal contraction tuple.
///
/// Every symbol value must stay inside the closed disk and away from one;
/// an atom at one means the operator has no cogenerator model and is
/// reported with its operator and atom index rather than perturbed.
pub fn normal_model(
    ops: &[ComplexMatrix],
    pre_tol: f64,
    seed: u64,
) -> Result<DiscreteMeasureModel> {
    let (gamma, values) = joint_diagonalize(ops, pre_tol, seed)?;
    for (j, vals) in values.iter().enumerate() {
        for (k, v) in vals.iter().enumerate() {
            if v.norm() > 1.0 + tol::CONTRACTION_SLACK {
                return Err(Error::NotContractive { norm: v.norm() });
            }
            if (v - crate::numerics::ONE).norm() <= ATOM_ONE_GAP {
                return Err(Error::AtomAtOne {
                    operator: j,
                    atom: k,
                });
            }
        }
    }
    let dim = gamma.rows();
    Ok(DiscreteMeasureModel {
        atoms: (0..dim).collect(),
        weights: vec![1.0; dim],
        values,
        gamma,
    })
}

/// Semigroup generated by the `j`-th model symbol at time `t`:
/// `γ diag(e^{t(λ+1)/(λ-1)}) γ*` over the atoms `λ`.
pub fn model_semigroup_at(model: &DiscreteMeasureModel, j: usize, t: f64) -> Result<ComplexMatrix> {
    if j >= model.values.len() {
        return Err(Error::Domain {
            context: "semigroup index out of range",
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            context: "time must be nonnegative and finite",
        });
    }
    let mut entries = Vec::with_capacity(model.atoms.len());
    for (k, &lambda) in model.values[j].iter().enumerate() {
        if (lambda - crate::numerics::ONE).norm() <= ATOM_ONE_GAP {
            return Err(Error::AtomAtOne {
                operator: j,
                atom: k,
            });
        }
        entries.push((mobius_scalar(lambda) * t).exp());
    }
    let diag = ComplexMatrix::from_diag(&entries);
    Ok(&(&model.gamma * &diag) * &model.gamma.adjoint())
}
