//! Minimal isometric dilation of doubly commuting pure contraction tuples.
//!
//! The dilation space is a box-truncated tensor Hardy space over the joint
//! defect fiber. The isometry is the defect expansion sending `h` to the sum
//! of monomials `z^m` weighted by `D (T*)^m h`, and every claimed property
//! (isometry, intertwining, compression recovery, minimality) is measured as
//! a residual rather than assumed. Residuals are only trusted when they sit
//! below an a priori tail bound computed from actual power norms, so a too
//! small truncation is an error instead of a silently wrong answer.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cogenerator::{purity_defect, semigroup_at, Contraction};
use crate::error::{Error, Result};
use crate::hardy::{phi_coeffs, shift_semigroup_matrix, SubspaceBasis, TruncationParams};
use crate::numerics::{commutator, op_norm, psd_sqrt, qr_pivoted, Complex64, ComplexMatrix, ONE};
use crate::sampling::amplify_to_product;

/// Relative singular value threshold for defect and span ranks.
pub const SPAN_RANK_REL: f64 = 1e-9;

const DOUBLY_COMMUTING_TOL: f64 = 1e-10;
const PURITY_HORIZON: usize = 24;
const PURITY_THRESHOLD: f64 = 0.99;
const PSD_SLACK: f64 = 1e-10;
const RATIO_CEILING: f64 = 1.0 - 1e-9;

fn check_tuple(tuple: &[Contraction]) -> Result<usize> {
    if tuple.is_empty() {
        return Err(Error::Domain {
            context: "tuple needs at least one contraction",
        });
    }
    let d = tuple[0].dim();
    for t in tuple {
        if t.dim() != d {
            return Err(Error::Dimension {
                context: "tuple entries on a shared space",
                expected: (d, d),
                found: t.matrix().shape(),
            });
        }
    }
    for i in 0..tuple.len() {
        for j in (i + 1)..tuple.len() {
            let a = tuple[i].matrix();
            let b = tuple[j].matrix();
            let straight = op_norm(&commutator(a, b));
            if straight > DOUBLY_COMMUTING_TOL {
                return Err(Error::NotCommuting {
                    context: "tuple entries do not commute",
                    norm: straight,
                });
            }
            let star = op_norm(&commutator(a, &b.adjoint()));
            if star > DOUBLY_COMMUTING_TOL {
                return Err(Error::NotCommuting {
                    context: "tuple is not doubly commuting",
                    norm: star,
                });
            }
        }
    }
    for t in tuple {
        let horizon = PURITY_HORIZON.max(2);
        let decay = purity_defect(t, horizon);
        let last = decay[horizon - 1];
        if !(last < PURITY_THRESHOLD) {
            return Err(Error::NotPure { defect: last });
        }
    }
    Ok(d)
}

/// Joint defect `D = (Π_j (I - T_j T_j*))^{1/2}` with an orthonormal basis of
/// its range. The product is Hermitian because the factors commute for a
/// doubly commuting tuple; losing positivity is therefore a commutation
/// failure, not a numerics one.
pub fn defect_operator(tuple: &[Contraction]) -> Result<(ComplexMatrix, SubspaceBasis)> {
    let d = check_tuple(tuple)?;
    let eye = ComplexMatrix::identity(d);
    let mut prod = eye.clone();
    for t in tuple {
        let factor = eye.sub_m(&(t.matrix() * &t.matrix().adjoint()));
        prod = &prod * &factor;
    }
    let sym = prod.add_m(&prod.adjoint()).scale_re(0.5);
    let defect = match psd_sqrt(&sym, PSD_SLACK) {
        Ok(m) => m,
        Err(Error::NotPsd { min_eigenvalue }) => {
            return Err(Error::NotCommuting {
                context: "defect product lost positivity",
                norm: min_eigenvalue.abs(),
            })
        }
        Err(e) => return Err(e),
    };
    let pivoted = qr_pivoted(&defect, SPAN_RANK_REL);
    if pivoted.rank == 0 {
        return Err(Error::RankDeficient {
            rank: 0,
            required: 1,
        });
    }
    let basis = SubspaceBasis::new(pivoted.q.block(0, 0, d, pivoted.rank))?;
    Ok((defect, basis))
}

/// The dilation with its measured quality.
#[derive(Clone, Debug)]
pub struct DilationResult {
    pub defect_dim: usize,
    /// Isometry from the tuple space into the box-truncated tensor Hardy
    /// space over the defect fiber; leg coordinates are degree major with the
    /// fiber fastest.
    pub omega: ComplexMatrix,
    pub leg_truncations: Vec<TruncationParams>,
    pub isometry_residual: f64,
    /// Per index. Dominated by one boundary row of discarded coefficients,
    /// so these scale like the square root of the tail bound.
    pub intertwining_residuals: Vec<f64>,
    /// Frobenius norm of the margin left uncovered by the span of shifted
    /// copies of `range(Ω)` over the full power box; zero exactly when the
    /// defect seed rows span the whole fiber.
    pub minimality_residual: f64,
    /// A priori bound on everything the box truncation discards.
    pub tail_bound: f64,
}

impl DilationResult {
    pub fn n(&self) -> usize {
        self.leg_truncations.len()
    }

    pub fn dilation_dim(&self) -> usize {
        self.box_dim() * self.defect_dim
    }

    fn box_dim(&self) -> usize {
        self.leg_truncations.iter().map(|p| p.n_trunc).product()
    }

    fn layout(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.leg_truncations.iter().map(|p| p.n_trunc).collect();
        dims.push(self.defect_dim);
        dims
    }

    /// The shift on leg `j`, amplified to the dilation space.
    pub fn upstairs_shift(&self, j: usize) -> Result<ComplexMatrix> {
        let p = self.leg_params(j)?;
        let mut s = ComplexMatrix::zeros(p.n_trunc, p.n_trunc);
        for r in 1..p.n_trunc {
            s.set(r, r - 1, ONE);
        }
        Ok(amplify_to_product(&s, &self.layout(), j))
    }

    /// The shift semigroup at time `t` on leg `j`, amplified likewise.
    pub fn upstairs_semigroup(&self, j: usize, t: f64) -> Result<ComplexMatrix> {
        let p = self.leg_params(j)?;
        Ok(amplify_to_product(
            &shift_semigroup_matrix(t, &p, 1),
            &self.layout(),
            j,
        ))
    }

    fn leg_params(&self, j: usize) -> Result<TruncationParams> {
        self.leg_truncations.get(j).cloned().ok_or(Error::Domain {
            context: "leg index out of range",
        })
    }
}

/// Applies the lower-triangular Toeplitz operator with the given coefficient
/// column along tensor leg `j` (its adjoint with `star`) to a block of
/// vectors, without materializing the amplified matrix. The shift itself is
/// the coefficient column `[0, 1]`.
fn leg_apply(
    x: &ComplexMatrix,
    layout: &[usize],
    j: usize,
    coeffs: &[Complex64],
    star: bool,
) -> ComplexMatrix {
    let stride: usize = layout[j + 1..].iter().product();
    let nj = layout[j];
    let (rows, cols) = x.shape();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for row in 0..rows {
        let mj = (row / stride) % nj;
        for (k, &c) in coeffs.iter().enumerate() {
            if mj + k >= nj {
                break;
            }
            for col in 0..cols {
                if star {
                    let v = out.get(row, col) + c.conj() * x.get(row + k * stride, col);
                    out.set(row, col, v);
                } else {
                    let v = out.get(row + k * stride, col) + c * x.get(row, col);
                    out.set(row + k * stride, col, v);
                }
            }
        }
    }
    out
}

const SHIFT_COEFFS: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

/// Tail of `Σ ‖D (T*)^m‖²` outside the truncation box, bounded leg by leg
/// from measured power norms with a geometric extrapolation of the last
/// ratio. Honest only for strictly decaying tails; a flat tail is an error.
fn tail_estimate(tuple: &[Contraction], legs: &[TruncationParams], tol: f64) -> Result<f64> {
    let n = tuple.len();
    let mut partial_sums = Vec::with_capacity(n);
    let mut tails = Vec::with_capacity(n);
    for (t, p) in tuple.iter().zip(legs) {
        let norms = purity_defect(t, p.n_trunc);
        let mut head = 1.0f64;
        for k in 0..(p.n_trunc - 1) {
            head += norms[k] * norms[k];
        }
        let last = norms[p.n_trunc - 1];
        let prev = norms[p.n_trunc - 2].max(f64::MIN_POSITIVE);
        let ratio = (last / prev).min(RATIO_CEILING);
        let tail = if last == 0.0 {
            0.0
        } else {
            let r2 = ratio * ratio;
            if r2 >= 1.0 - 1e-9 {
                return Err(Error::Truncation {
                    tail_bound: f64::INFINITY,
                    tol,
                });
            }
            last * last / (1.0 - r2)
        };
        partial_sums.push(head + tail);
        tails.push(tail);
    }
    let mut total = 0.0f64;
    for j in 0..n {
        let mut term = tails[j];
        for (i, s) in partial_sums.iter().enumerate() {
            if i != j {
                term *= s;
            }
        }
        total += term;
    }
    Ok(total)
}

fn box_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; dims.len()];
    loop {
        out.push(idx.clone());
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < dims[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Builds the defect expansion isometry for a doubly commuting pure tuple and
/// measures its quality. The truncation must make the a priori tail bound
/// smaller than the tightest leg tolerance.
pub fn dilation_isometry(
    tuple: &[Contraction],
    legs: &[TruncationParams],
) -> Result<DilationResult> {
    let d = check_tuple(tuple)?;
    let n = tuple.len();
    if legs.len() != n {
        return Err(Error::Dimension {
            context: "one truncation per leg",
            expected: (n, 1),
            found: (legs.len(), 1),
        });
    }
    let tol = legs.iter().map(|p| p.tol).fold(f64::INFINITY, f64::min);
    let tail_bound = tail_estimate(tuple, legs, tol)?;
    if tail_bound > tol {
        return Err(Error::Truncation { tail_bound, tol });
    }

    let (defect, basis) = defect_operator(tuple)?;
    let r = basis.dim();
    let seed = &basis.frame().adjoint() * &defect;

    let mut leg_powers: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(n);
    for (t, p) in tuple.iter().zip(legs) {
        let step = t.matrix().adjoint();
        let mut powers = Vec::with_capacity(p.n_trunc);
        powers.push(ComplexMatrix::identity(d));
        for k in 1..p.n_trunc {
            powers.push(&powers[k - 1] * &step);
        }
        leg_powers.push(powers);
    }

    let dims: Vec<usize> = legs.iter().map(|p| p.n_trunc).collect();
    let box_dim: usize = dims.iter().product();
    let mut omega = ComplexMatrix::zeros(box_dim * r, d);
    for (flat, m) in box_indices(&dims).iter().enumerate() {
        let mut acc = leg_powers[0][m[0]].clone();
        for j in 1..n {
            acc = &acc * &leg_powers[j][m[j]];
        }
        let block = &seed * &acc;
        omega.set_block(flat * r, 0, &block);
    }

    let gram = &omega.adjoint() * &omega;
    let isometry_residual = op_norm(&gram.sub_m(&ComplexMatrix::identity(d)));

    let mut result = DilationResult {
        defect_dim: r,
        omega,
        leg_truncations: legs.to_vec(),
        isometry_residual,
        intertwining_residuals: Vec::new(),
        minimality_residual: 0.0,
        tail_bound,
    };
    let layout = result.layout();
    let mut intertwining = Vec::with_capacity(n);
    for (j, t) in tuple.iter().enumerate() {
        let lhs = &result.omega * &t.matrix().adjoint();
        let rhs = leg_apply(&result.omega, &layout, j, &SHIFT_COEFFS, true);
        intertwining.push(op_norm(&lhs.sub_m(&rhs)));
    }
    result.intertwining_residuals = intertwining;
    // Over the full power box the span columns stack block triangularly by
    // degree with `seed` on the diagonal, and every off-diagonal block has
    // range inside range(seed). Eliminating degrees from the top is exact,
    // so the span misses exactly the fiber directions outside range(seed),
    // once per box degree.
    let pivot = qr_pivoted(&seed, SPAN_RANK_REL);
    let covered = pivot.q.block(0, 0, r, pivot.rank);
    let miss = ComplexMatrix::identity(r).sub_m(&(&covered * &covered.adjoint()));
    result.minimality_residual = (box_dim as f64).sqrt() * miss.fro_norm();
    Ok(result)
}

/// `‖Ω* (M_{z_j} ⊗ I) Ω − T_j‖` per index: the dilation compresses back to
/// the tuple up to the tail.
pub fn compression_defects(result: &DilationResult, tuple: &[Contraction]) -> Result<Vec<f64>> {
    let d = check_tuple(tuple)?;
    if result.omega.cols() != d {
        return Err(Error::Dimension {
            context: "dilation built from a different tuple",
            expected: (result.omega.cols(), 1),
            found: (d, 1),
        });
    }
    let layout = result.layout();
    let mut out = Vec::with_capacity(tuple.len());
    for (j, t) in tuple.iter().enumerate() {
        let pushed = leg_apply(&result.omega, &layout, j, &SHIFT_COEFFS, false);
        let compressed = &result.omega.adjoint() * &pushed;
        out.push(op_norm(&compressed.sub_m(t.matrix())));
    }
    Ok(out)
}

/// Residuals of the semigroup form of the intertwining relation on a time
/// grid. Tuple entries must be cogenerators, since the left side runs their
/// semigroups.
#[derive(Clone, Debug)]
pub struct SemigroupDilationReport {
    pub times: Vec<f64>,
    /// `residuals[k][j]` is the defect at `times[k]` for index `j`.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
}

pub fn verify_semigroup_dilation(
    result: &DilationResult,
    tuple: &[Contraction],
    times: &[f64],
) -> Result<SemigroupDilationReport> {
    let d = check_tuple(tuple)?;
    if result.omega.cols() != d || tuple.len() != result.n() {
        return Err(Error::Dimension {
            context: "dilation built from a different tuple",
            expected: (result.omega.cols(), result.n()),
            found: (d, tuple.len()),
        });
    }
    let layout = result.layout();
    let mut residuals = Vec::with_capacity(times.len());
    let mut max_residual = 0.0f64;
    for &t in times {
        let mut row = Vec::with_capacity(tuple.len());
        for (j, c) in tuple.iter().enumerate() {
            let downstairs = semigroup_at(c, t)?;
            let coeffs = phi_coeffs(t, result.leg_truncations[j].n_trunc);
            let lhs = &result.omega * &downstairs.adjoint();
            let rhs = leg_apply(&result.omega, &layout, j, &coeffs, true);
            let res = op_norm(&lhs.sub_m(&rhs));
            max_residual = max_residual.max(res);
            row.push(res);
        }
        residuals.push(row);
    }
    Ok(SemigroupDilationReport {
        times: times.to_vec(),
        residuals,
        max_residual,
    })
}

fn power_span_columns(result: &DilationResult, caps: &[usize]) -> Result<ComplexMatrix> {
    let n = result.n();
    let layout = result.layout();
    let grid: Vec<usize> = caps.iter().map(|&c| c + 1).collect();
    let mut columns: Vec<ComplexMatrix> = Vec::new();
    let indices = box_indices(&grid);
    for (flat, m) in indices.iter().enumerate() {
        if flat == 0 {
            columns.push(result.omega.clone());
            continue;
        }
        let j = (0..n).find(|&j| m[j] > 0).expect("nonzero index");
        let mut prev = m.clone();
        prev[j] -= 1;
        let prev_flat = indices
            .iter()
            .position(|q| *q == prev)
            .expect("predecessor enumerated");
        let next = leg_apply(&columns[prev_flat], &layout, j, &SHIFT_COEFFS, false);
        columns.push(next);
    }
    let refs: Vec<&ComplexMatrix> = columns.iter().collect();
    Ok(ComplexMatrix::hstack(&refs))
}

/// How far the shifted copies of `range(Ω)` are from filling the part of the
/// dilation space reachable with powers up to `max_power`: the projection
/// onto `span{V^m Ω h : m_j ≤ max_power}` is compared with the identity on
/// the coordinates of degree at most `max_power` per leg. Reported as a
/// Frobenius norm, an upper bound on the operator norm defect. Only the full
/// cap `n_trunc − 1` makes the margin reachable; with smaller caps the span
/// columns trail into higher degrees and the defect stays of order one.
pub fn minimality_defect(
    result: &DilationResult,
    tuple: &[Contraction],
    max_power: usize,
) -> Result<f64> {
    if result.omega.cols() != tuple.first().map_or(0, Contraction::dim) {
        return Err(Error::Dimension {
            context: "dilation built from a different tuple",
            expected: (result.omega.cols(), 1),
            found: (tuple.first().map_or(0, Contraction::dim), 1),
        });
    }
    let caps: Vec<usize> = result
        .leg_truncations
        .iter()
        .map(|p| max_power.min(p.n_trunc - 1))
        .collect();
    let stack = power_span_columns(result, &caps)?;
    let q = qr_pivoted(&stack, SPAN_RANK_REL).q;

    let dims: Vec<usize> = result
        .leg_truncations
        .iter()
        .map(|p| p.n_trunc)
        .collect();
    let r = result.defect_dim;
    let mut kept = Vec::new();
    for (flat, m) in box_indices(&dims).iter().enumerate() {
        if m.iter().zip(&caps).all(|(&mi, &cap)| mi <= cap) {
            for fiber in 0..r {
                kept.push(flat * r + fiber);
            }
        }
    }
    let total = result.dilation_dim();
    let mut margin = ComplexMatrix::zeros(total, kept.len());
    for (c, &row) in kept.iter().enumerate() {
        margin.set(row, c, ONE);
    }
    let overlap = &q * &(&q.adjoint() * &margin);
    Ok(margin.sub_m(&overlap).fro_norm())
}

/// Rank of `span{V^m Ω : m_j ≤ max_power}` at a relative rank threshold.
pub fn dilation_span_rank_powers(
    result: &DilationResult,
    max_power: usize,
    rank_rel_tol: f64,
) -> Result<usize> {
    let caps: Vec<usize> = result
        .leg_truncations
        .iter()
        .map(|p| max_power.min(p.n_trunc - 1))
        .collect();
    let stack = power_span_columns(result, &caps)?;
    Ok(qr_pivoted(&stack, rank_rel_tol).rank)
}

/// Rank of the span of semigroup translates of `range(Ω)` over the grid of
/// per-leg times; equals the power span rank for a minimal dilation.
pub fn dilation_span_rank_times(
    result: &DilationResult,
    times: &[f64],
    rank_rel_tol: f64,
) -> Result<usize> {
    if times.is_empty() {
        return Err(Error::Domain {
            context: "time grid must be nonempty",
        });
    }
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain {
                context: "time must be nonnegative and finite",
            });
        }
    }
    let n = result.n();
    let layout = result.layout();
    let grid = vec![times.len(); n];
    let mut columns: Vec<ComplexMatrix> = Vec::new();
    for m in box_indices(&grid) {
        let mut block = result.omega.clone();
        for (j, &ti) in m.iter().enumerate() {
            let coeffs = phi_coeffs(times[ti], result.leg_truncations[j].n_trunc);
            block = leg_apply(&block, &layout, j, &coeffs, false);
        }
        columns.push(block);
    }
    let refs: Vec<&ComplexMatrix> = columns.iter().collect();
    let stack = ComplexMatrix::hstack(&refs);
    Ok(qr_pivoted(&stack, rank_rel_tol).rank)
}

/// Outcome of the tensor splitting test for a joint *-invariant subspace of
/// the truncated scalar Hardy space over the polydisk.
#[derive(Clone, Debug)]
pub enum TensorCheckVerdict {
    /// Compressed shifts doubly commute; the subspace factors leg by leg.
    DoublyCommuting {
        factors: Vec<SubspaceBasis>,
        reassembly_defect: f64,
    },
    /// A compressed pair fails double commutation by the reported amount.
    Coupled {
        pair: (usize, usize),
        commutator_norm: f64,
    },
}

/// Tests whether a joint *-invariant subspace is a tensor product of per-leg
/// subspaces: the compressed shift tuple doubly commutes exactly when it is,
/// and in that case the factors fall out of per-leg unfoldings of the frame.
pub fn tensor_invariant_subspace_check(
    q: &SubspaceBasis,
    legs: &[TruncationParams],
) -> Result<TensorCheckVerdict> {
    let n = legs.len();
    if n == 0 || n > 3 {
        return Err(Error::Domain {
            context: "tensor check supports one to three legs",
        });
    }
    let dims: Vec<usize> = legs.iter().map(|p| p.n_trunc).collect();
    let ambient: usize = dims.iter().product();
    if q.ambient_dim() != ambient {
        return Err(Error::Dimension {
            context: "subspace in the truncated polydisk space",
            expected: (ambient, q.dim()),
            found: (q.ambient_dim(), q.dim()),
        });
    }
    let tol = legs.iter().map(|p| p.tol).fold(f64::INFINITY, f64::min);
    let f = q.frame();

    let mut shifts = Vec::with_capacity(n);
    for (j, p) in legs.iter().enumerate() {
        let mut s = ComplexMatrix::zeros(p.n_trunc, p.n_trunc);
        for r in 1..p.n_trunc {
            s.set(r, r - 1, ONE);
        }
        shifts.push(amplify_to_product(&s, &dims, j));
    }
    for s in &shifts {
        let pushed = &s.adjoint() * f;
        let inside = f * &(&f.adjoint() * &pushed);
        let defect = op_norm(&pushed.sub_m(&inside));
        if defect > tol {
            return Err(Error::Structure {
                context: "subspace is not invariant under the adjoint shifts",
                defect,
            });
        }
    }

    let mut compressed = Vec::with_capacity(n);
    for s in &shifts {
        compressed.push(&f.adjoint() * &(s * f));
    }
    let mut worst = 0.0f64;
    let mut worst_pair = (0usize, 0usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let straight = op_norm(&commutator(&compressed[i], &compressed[j]));
            let star = op_norm(&commutator(&compressed[i], &compressed[j].adjoint()));
            let local = straight.max(star);
            if local > worst {
                worst = local;
                worst_pair = (i, j);
            }
        }
    }
    if worst > tol {
        return Ok(TensorCheckVerdict::Coupled {
            pair: worst_pair,
            commutator_norm: worst,
        });
    }

    let mut factors = Vec::with_capacity(n);
    for j in 0..n {
        let rest: usize = ambient / dims[j];
        let mut unfold = ComplexMatrix::zeros(dims[j], rest * q.dim());
        let stride_after: usize = dims[j + 1..].iter().product();
        for c in 0..q.dim() {
            for row in 0..ambient {
                let mj = (row / stride_after) % dims[j];
                let before = row / (stride_after * dims[j]);
                let after = row % stride_after;
                let col = (c * (ambient / dims[j])) + before * stride_after + after;
                unfold.set(mj, col, f.get(row, c));
            }
        }
        let pivoted = qr_pivoted(&unfold, SPAN_RANK_REL);
        let frame = pivoted.q.block(0, 0, dims[j], pivoted.rank);
        factors.push(SubspaceBasis::new(frame)?);
    }

    let mut tensor_proj = ComplexMatrix::identity(1);
    for factor in &factors {
        tensor_proj = tensor_proj.kron(&factor.projector());
    }
    let reassembly_defect = op_norm(&tensor_proj.sub_m(&q.projector()));
    if reassembly_defect > tol {
        return Err(Error::Structure {
            context: "doubly commuting subspace failed to factor",
            defect: reassembly_defect,
        });
    }
    Ok(TensorCheckVerdict::DoublyCommuting {
        factors,
        reassembly_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::blaschke_model_space;
    use crate::numerics::{diff_norm, Complex64};
    use crate::sampling::{doubly_commuting_tuple, random_unitary, seeded_rng};

    fn scalar(c: f64) -> Contraction {
        Contraction::strict(ComplexMatrix::from_diag(&[Complex64::new(c, 0.0)])).unwrap()
    }

    fn params(n_trunc: usize, tol: f64) -> TruncationParams {
        TruncationParams::new(n_trunc, 1, tol).unwrap()
    }

    fn tensor_tuple(seed: u64, leg_dims: &[usize], rho: f64) -> Vec<Contraction> {
        let mut rng = seeded_rng(seed);
        let sample = doubly_commuting_tuple(&mut rng, leg_dims, rho);
        sample
            .matrices
            .into_iter()
            .map(|m| Contraction::strict(m).unwrap())
            .collect()
    }

    #[test]
    fn defect_of_a_scalar_pair_is_the_product_rule() {
        let tuple = [scalar(0.5), scalar(0.5)];
        let (d, basis) = defect_operator(&tuple).unwrap();
        assert!((d.get(0, 0).re - 0.75).abs() < 1e-14);
        assert_eq!(basis.dim(), 1);
    }

    #[test]
    fn defect_of_the_zero_tuple_is_the_identity() {
        let z = Contraction::strict(ComplexMatrix::zeros(3, 3)).unwrap();
        let (d, basis) = defect_operator(&[z.clone(), z]).unwrap();
        assert!(diff_norm(&d, &ComplexMatrix::identity(3)) < 1e-14);
        assert_eq!(basis.dim(), 3);
    }

    #[test]
    fn merely_commuting_tuples_are_rejected() {
        let mut jordan = ComplexMatrix::zeros(2, 2);
        jordan.set(0, 1, Complex64::new(0.5, 0.0));
        let t = Contraction::strict(jordan).unwrap();
        let err = defect_operator(&[t.clone(), t]).unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }));
    }

    #[test]
    fn impure_tuples_are_rejected() {
        let u = Contraction::strict(ComplexMatrix::identity(2)).unwrap();
        let err = defect_operator(&[u]).unwrap_err();
        assert!(matches!(err, Error::NotPure { .. }));
    }

    #[test]
    fn dilation_of_zero_is_the_constant_embedding() {
        let z = Contraction::strict(ComplexMatrix::zeros(1, 1)).unwrap();
        let result = dilation_isometry(&[z], &[params(8, 1e-9)]).unwrap();
        assert_eq!(result.defect_dim, 1);
        assert!((result.omega.get(0, 0).norm() - 1.0).abs() < 1e-14);
        for row in 1..8 {
            assert!(result.omega.get(row, 0).norm() < 1e-14);
        }
        assert!(result.isometry_residual < 1e-14);
        assert!(result.minimality_residual < 1e-12);
        let shift = result.upstairs_shift(0).unwrap();
        let back = &result.omega.adjoint() * &(&shift * &result.omega);
        assert!(back.get(0, 0).norm() < 1e-14);
    }

    #[test]
    fn scalar_dilation_reproduces_the_geometric_series() {
        let result = dilation_isometry(&[scalar(0.5)], &[params(40, 1e-9)]).unwrap();
        let scale = 0.75f64.sqrt();
        let sign = result.omega.get(0, 0).re.signum();
        for m in 0..40 {
            let want = scale * 0.5f64.powi(m as i32);
            assert!(
                (sign * result.omega.get(m, 0).re - want).abs() < 1e-13,
                "m={m}"
            );
        }
        assert!(result.isometry_residual < 1e-12);
        assert!(result.tail_bound < 1e-9);
        assert!(result.isometry_residual <= result.tail_bound + 1e-14);
    }

    #[test]
    fn short_truncations_are_refused() {
        let err = dilation_isometry(&[scalar(0.9)], &[params(4, 1e-9)]).unwrap_err();
        match err {
            Error::Truncation { tail_bound, tol } => {
                assert!(tail_bound > tol);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn tensor_pair_dilation_intertwines_and_compresses_back() {
        let tuple = tensor_tuple(41, &[2, 2], 0.25);
        let legs = [params(12, 1e-8), params(12, 1e-8)];
        let result = dilation_isometry(&tuple, &legs).unwrap();
        assert!(result.isometry_residual <= 1e-9);
        let sqrt_tail = result.tail_bound.sqrt();
        for &r in &result.intertwining_residuals {
            assert!(r <= 1e-7);
            assert!(r <= 10.0 * sqrt_tail);
        }
        assert!(result.minimality_residual <= 1e-9);
        for d in compression_defects(&result, &tuple).unwrap() {
            assert!(d <= 1e-9);
        }
    }

    #[test]
    fn semigroup_intertwining_follows_the_power_form() {
        let tuple = tensor_tuple(43, &[2, 2], 0.25);
        let legs = [params(12, 1e-8), params(12, 1e-8)];
        let result = dilation_isometry(&tuple, &legs).unwrap();
        let report = verify_semigroup_dilation(&result, &tuple, &[0.0, 0.5, 1.0]).unwrap();
        assert!(report.residuals[0].iter().all(|&r| r < 1e-12));
        assert!(report.max_residual <= 1e-7);
    }

    #[test]
    fn zero_tuple_semigroup_residual_is_tiny() {
        let z = Contraction::strict(ComplexMatrix::zeros(2, 2)).unwrap();
        let result = dilation_isometry(&[z.clone()], &[params(8, 1e-9)]).unwrap();
        let report = verify_semigroup_dilation(&result, &[z], &[0.8]).unwrap();
        assert!(report.max_residual <= 1e-10);
    }

    #[test]
    fn reported_minimality_matches_full_power_span() {
        let tuple = tensor_tuple(61, &[2, 2], 0.3);
        let legs = [params(6, 1e-6), params(6, 1e-6)];
        let result = dilation_isometry(&tuple, &legs).unwrap();
        let explicit = minimality_defect(&result, &tuple, 5).unwrap();
        assert!(result.minimality_residual <= 1e-9);
        assert!(explicit <= 1e-9);
    }

    #[test]
    fn partial_power_span_really_misses_the_margin() {
        let result = dilation_isometry(&[scalar(0.5)], &[params(8, 1e-3)]).unwrap();
        assert!(minimality_defect(&result, &[scalar(0.5)], 1).unwrap() >= 1e-2);
    }

    #[test]
    fn power_and_time_spans_have_equal_rank() {
        let result = dilation_isometry(&[scalar(0.5)], &[params(8, 1e-3)]).unwrap();
        assert!(minimality_defect(&result, &[scalar(0.5)], 7).unwrap() <= 1e-9);
        let rank_powers = dilation_span_rank_powers(&result, 7, SPAN_RANK_REL).unwrap();
        let times: Vec<f64> = (0..8).map(|k| 0.3 * k as f64).collect();
        let rank_times = dilation_span_rank_times(&result, &times, SPAN_RANK_REL).unwrap();
        assert_eq!(rank_powers, 8);
        assert_eq!(rank_times, 8);
    }

    #[test]
    fn residuals_are_unitarily_covariant() {
        let tuple = tensor_tuple(47, &[2, 2], 0.25);
        let legs = [params(10, 1e-8), params(10, 1e-8)];
        let plain = dilation_isometry(&tuple, &legs).unwrap();

        let w = random_unitary(&mut seeded_rng(48), 4);
        let conjugated: Vec<Contraction> = tuple
            .iter()
            .map(|t| {
                Contraction::strict(&(&w * t.matrix()) * &w.adjoint()).unwrap()
            })
            .collect();
        let twisted = dilation_isometry(&conjugated, &legs).unwrap();

        assert!((plain.isometry_residual - twisted.isometry_residual).abs() < 1e-10);
        for (a, b) in plain
            .intertwining_residuals
            .iter()
            .zip(&twisted.intertwining_residuals)
        {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((plain.minimality_residual - twisted.minimality_residual).abs() < 1e-8);
    }

    #[test]
    fn tensor_check_accepts_product_subspaces() {
        let legs = [params(4, 1e-8), params(4, 1e-8)];
        let leg_frame = SubspaceBasis::leading_coordinates(4, 2);
        let frame = leg_frame.frame().kron(leg_frame.frame());
        let q = SubspaceBasis::new(frame).unwrap();
        match tensor_invariant_subspace_check(&q, &legs).unwrap() {
            TensorCheckVerdict::DoublyCommuting {
                factors,
                reassembly_defect,
            } => {
                assert_eq!(factors[0].dim(), 2);
                assert_eq!(factors[1].dim(), 2);
                assert!(reassembly_defect < 1e-10);
            }
            other => panic!("expected a tensor verdict, got {other:?}"),
        }
    }

    #[test]
    fn tensor_check_rejects_the_coupled_triangle() {
        let legs = [params(4, 1e-8), params(4, 1e-8)];
        let mut frame = ComplexMatrix::zeros(16, 3);
        frame.set(0, 0, ONE);
        frame.set(4, 1, ONE);
        frame.set(1, 2, ONE);
        let q = SubspaceBasis::new(frame).unwrap();
        match tensor_invariant_subspace_check(&q, &legs).unwrap() {
            TensorCheckVerdict::Coupled {
                commutator_norm, ..
            } => {
                assert!(commutator_norm >= 1e-2);
            }
            other => panic!("expected a coupled verdict, got {other:?}"),
        }
    }

    #[test]
    fn tensor_check_factors_blaschke_products() {
        let p = params(24, 1e-8);
        let zeros1 = [Complex64::new(0.3, 0.0), Complex64::new(-0.25, 0.1)];
        let zeros2 = [Complex64::new(0.2, -0.2), Complex64::new(-0.1, 0.0)];
        let (q1, _) = blaschke_model_space(&zeros1, &p).unwrap();
        let (q2, _) = blaschke_model_space(&zeros2, &p).unwrap();
        let frame = q1.frame().kron(q2.frame());
        let q = SubspaceBasis::new(frame).unwrap();
        match tensor_invariant_subspace_check(&q, &[p.clone(), p]).unwrap() {
            TensorCheckVerdict::DoublyCommuting { factors, .. } => {
                assert_eq!(factors[0].dim(), 2);
                assert_eq!(factors[1].dim(), 2);
            }
            other => panic!("expected a tensor verdict, got {other:?}"),
        }
    }
}
