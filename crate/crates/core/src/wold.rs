//! Joint Wold decomposition for commuting isometric tuples.
//!
//! Tuples are built structurally as direct sums of tensor blocks, each block a
//! tensor product of truncated shift legs and unitary legs. The construction
//! carries its own ground truth, so the decomposition routines are checked
//! against the intended answer on every instance rather than trusted blindly.
//!
//! Truncation forces a margin discipline: asymptotic range projections
//! `V^m V^{*m}` are only meaningful on coordinates that the first `m` powers
//! move isometrically. The margin subspace collects exactly those, and every
//! projection in this module lives in margin coordinates.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cogenerator::{semigroup_at, Contraction};
use crate::error::{Error, Result};
use crate::hardy::{shift_semigroup_matrix, SubspaceBasis, TruncationParams};
use crate::numerics::{commutator, default_herm_tol, herm_eig, op_norm, ComplexMatrix, ONE};

/// Default power used for asymptotic range projections.
pub const DEFAULT_ASYMPTOTIC_POWER: usize = 8;

/// Default shift leg truncation, sized so the default power clears the margin.
pub const DEFAULT_SHIFT_TRUNCATION: usize = 16;

/// Tolerance for resolution-of-identity and reducing-subspace residuals.
pub const RESOLUTION_TOL: f64 = 1e-8;

const PROJECTION_ROUND_TOL: f64 = 1e-6;
const DOUBLY_COMMUTING_TOL: f64 = 1e-10;
const LEG_UNITARY_TOL: f64 = 1e-9;
const MARGIN_ISOMETRY_TOL: f64 = 1e-8;

/// One tensor factor of a block.
#[derive(Clone, Debug)]
pub enum LegSpec {
    /// Truncated unilateral shift with the given fiber multiplicity.
    Shift { n_trunc: usize, multiplicity: usize },
    /// A fixed unitary acting on its own factor.
    Unitary { matrix: ComplexMatrix },
}

impl LegSpec {
    pub fn dim(&self) -> usize {
        match self {
            LegSpec::Shift {
                n_trunc,
                multiplicity,
            } => n_trunc * multiplicity,
            LegSpec::Unitary { matrix } => matrix.rows(),
        }
    }

    /// Margin coordinates kept on this leg when powers up to `n_max` must act
    /// isometrically. Shift legs drop the top `n_max` degrees.
    fn margin_len(&self, n_max: usize) -> usize {
        match self {
            LegSpec::Shift {
                n_trunc,
                multiplicity,
            } => n_trunc.saturating_sub(n_max) * multiplicity,
            LegSpec::Unitary { matrix } => matrix.rows(),
        }
    }
}

/// A tensor product of legs together with the map sending each semigroup
/// index to the leg it acts on.
#[derive(Clone, Debug)]
pub struct TensorBlock {
    pub legs: Vec<LegSpec>,
    /// `assignment[j]` is the leg index that the `j`-th isometry acts on.
    pub assignment: Vec<usize>,
}

impl TensorBlock {
    pub fn dim(&self) -> usize {
        self.legs.iter().map(LegSpec::dim).product()
    }

    fn margin_dim(&self, n_max: usize) -> usize {
        self.legs.iter().map(|l| l.margin_len(n_max)).product()
    }

    /// Bitmask of indices assigned to shift legs. On the margin the block
    /// contributes exactly to the subset with this mask.
    fn shift_mask(&self) -> usize {
        let mut mask = 0usize;
        for (j, &leg) in self.assignment.iter().enumerate() {
            if matches!(self.legs[leg], LegSpec::Shift { .. }) {
                mask |= 1 << j;
            }
        }
        mask
    }
}

/// A commuting isometric tuple presented as scrambled structured blocks.
///
/// Within each block every shift leg carries exactly one index and unitary
/// legs may be shared. The scramble hides the block and tensor structure from
/// the decomposition routines while the construction keeps the answer key.
#[derive(Clone, Debug)]
pub struct StructuredIsometryTuple {
    n: usize,
    blocks: Vec<TensorBlock>,
    scramble: ComplexMatrix,
    plain_scramble: bool,
}

impl StructuredIsometryTuple {
    pub fn new(blocks: Vec<TensorBlock>, scramble: Option<ComplexMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain {
                context: "tuple needs at least one block",
            });
        }
        let n = blocks[0].assignment.len();
        if n == 0 {
            return Err(Error::Domain {
                context: "tuple needs at least one semigroup index",
            });
        }
        for block in &blocks {
            if block.legs.is_empty() {
                return Err(Error::Domain {
                    context: "block needs at least one leg",
                });
            }
            if block.assignment.len() != n {
                return Err(Error::Dimension {
                    context: "per-block assignment length",
                    expected: (n, 1),
                    found: (block.assignment.len(), 1),
                });
            }
            let mut hits = vec![0usize; block.legs.len()];
            for &leg in &block.assignment {
                if leg >= block.legs.len() {
                    return Err(Error::Domain {
                        context: "assignment points past the last leg",
                    });
                }
                hits[leg] += 1;
            }
            for (leg, spec) in block.legs.iter().enumerate() {
                match spec {
                    LegSpec::Shift {
                        n_trunc,
                        multiplicity,
                    } => {
                        if *n_trunc < 2 || *multiplicity == 0 {
                            return Err(Error::Domain {
                                context: "shift leg needs degree at least two and a fiber",
                            });
                        }
                        if hits[leg] != 1 {
                            return Err(Error::Structure {
                                context: "each shift leg must carry exactly one index",
                                defect: hits[leg] as f64,
                            });
                        }
                    }
                    LegSpec::Unitary { matrix } => {
                        matrix.require_square("unitary leg")?;
                        let defect = unitary_defect(matrix);
                        if defect > LEG_UNITARY_TOL {
                            return Err(Error::Structure {
                                context: "unitary leg is not unitary",
                                defect,
                            });
                        }
                    }
                }
            }
        }
        let total: usize = blocks.iter().map(TensorBlock::dim).sum();
        let (scramble, plain_scramble) = match scramble {
            Some(g) => {
                g.require_square("scramble")?;
                if g.rows() != total {
                    return Err(Error::Dimension {
                        context: "scramble on the full space",
                        expected: (total, total),
                        found: g.shape(),
                    });
                }
                let defect = unitary_defect(&g);
                if defect > LEG_UNITARY_TOL {
                    return Err(Error::Structure {
                        context: "scramble is not unitary",
                        defect,
                    });
                }
                (g, false)
            }
            None => (ComplexMatrix::identity(total), true),
        };
        Ok(Self {
            n,
            blocks,
            scramble,
            plain_scramble,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[TensorBlock] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(TensorBlock::dim).sum()
    }

    /// Expected margin dimension of every subset part, indexed by bitmask.
    /// This is the answer key the decomposition is checked against.
    pub fn ground_truth(&self, n_max: usize) -> Result<Vec<usize>> {
        self.check_headroom(n_max)?;
        let mut dims = vec![0usize; 1 << self.n];
        for block in &self.blocks {
            dims[block.shift_mask()] += block.margin_dim(n_max);
        }
        Ok(dims)
    }

    /// Coordinates that powers up to `n_max` move isometrically, scrambled
    /// into the ambient picture.
    pub fn margin_basis(&self, n_max: usize) -> Result<SubspaceBasis> {
        self.check_headroom(n_max)?;
        let total = self.total_dim();
        let margin_total: usize = self.blocks.iter().map(|b| b.margin_dim(n_max)).sum();
        let mut frame = ComplexMatrix::zeros(total, margin_total);
        let mut col = 0;
        let mut offset = 0;
        for block in &self.blocks {
            for flat in block_margin_indices(block, n_max) {
                frame.set(offset + flat, col, ONE);
                col += 1;
            }
            offset += block.dim();
        }
        let frame = if self.plain_scramble {
            frame
        } else {
            &self.scramble * &frame
        };
        SubspaceBasis::new(frame)
    }

    /// Shift truncations must lie in `(n_max, 2 n_max]`: the lower bound keeps
    /// the margin nonempty, the upper makes `V^{n_max}` clear it exactly.
    fn check_headroom(&self, n_max: usize) -> Result<()> {
        if n_max == 0 {
            return Err(Error::Domain {
                context: "asymptotic power must be positive",
            });
        }
        for block in &self.blocks {
            for leg in &block.legs {
                if let LegSpec::Shift { n_trunc, .. } = leg {
                    if *n_trunc <= n_max || *n_trunc > 2 * n_max {
                        return Err(Error::Headroom {
                            context: "shift truncation outside (n_max, 2 n_max]",
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn conjugate(&self, op: &ComplexMatrix) -> ComplexMatrix {
        if self.plain_scramble {
            return op.clone();
        }
        &(&self.scramble * op) * &self.scramble.adjoint()
    }
}

fn unitary_defect(u: &ComplexMatrix) -> f64 {
    let gram = &u.adjoint() * u;
    op_norm(&gram.sub_m(&ComplexMatrix::identity(u.rows())))
}

/// Flat margin coordinates of one block, ascending. Kept coordinates are per
/// leg prefixes, so a mixed-radix walk over kept lengths enumerates them.
fn block_margin_indices(block: &TensorBlock, n_max: usize) -> Vec<usize> {
    let dims: Vec<usize> = block.legs.iter().map(LegSpec::dim).collect();
    let keep: Vec<usize> = block.legs.iter().map(|l| l.margin_len(n_max)).collect();
    if keep.iter().any(|&k| k == 0) {
        return Vec::new();
    }
    let mut idx = vec![0usize; dims.len()];
    let mut out = Vec::new();
    loop {
        let mut flat = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * dims[k] + i;
        }
        out.push(flat);
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < keep[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn mat_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(m.rows());
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// The truncated shift to the `m`-th power, built directly.
fn shift_power(n_trunc: usize, m: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(n_trunc, n_trunc);
    for r in m..n_trunc {
        s.set(r, r - m, ONE);
    }
    s
}

fn leg_power(leg: &LegSpec, m: usize) -> ComplexMatrix {
    match leg {
        LegSpec::Shift {
            n_trunc,
            multiplicity,
        } => shift_power(*n_trunc, m).kron(&ComplexMatrix::identity(*multiplicity)),
        LegSpec::Unitary { matrix } => mat_power(matrix, m),
    }
}

fn assemble<F>(tuple: &StructuredIsometryTuple, j: usize, leg_op: F) -> Result<ComplexMatrix>
where
    F: Fn(&LegSpec) -> Result<ComplexMatrix>,
{
    let mut op: Option<ComplexMatrix> = None;
    for block in &tuple.blocks {
        let mut blk: Option<ComplexMatrix> = None;
        for (idx, leg) in block.legs.iter().enumerate() {
            let factor = if block.assignment[j] == idx {
                leg_op(leg)?
            } else {
                ComplexMatrix::identity(leg.dim())
            };
            blk = Some(match blk {
                Some(acc) => acc.kron(&factor),
                None => factor,
            });
        }
        let blk = blk.expect("blocks are nonempty");
        op = Some(match op {
            Some(acc) => acc.direct_sum(&blk),
            None => blk,
        });
    }
    Ok(tuple.conjugate(&op.expect("tuples are nonempty")))
}

/// The tuple at the given per-index powers: entry `j` is `V_j^{powers[j]}`.
pub fn realize_powers(
    tuple: &StructuredIsometryTuple,
    powers: &[usize],
) -> Result<Vec<ComplexMatrix>> {
    if powers.len() != tuple.n {
        return Err(Error::Dimension {
            context: "one power per semigroup index",
            expected: (tuple.n, 1),
            found: (powers.len(), 1),
        });
    }
    (0..tuple.n)
        .map(|j| assemble(tuple, j, |leg| Ok(leg_power(leg, powers[j]))))
        .collect()
}

/// The tuple at a common semigroup time. Shift legs carry the shift semigroup
/// in the truncated basis, unitary legs the semigroup of their cogenerator;
/// a unitary leg with spectrum at one is therefore rejected.
pub fn realize_semigroup(tuple: &StructuredIsometryTuple, t: f64) -> Result<Vec<ComplexMatrix>> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            context: "time must be nonnegative and finite",
        });
    }
    (0..tuple.n)
        .map(|j| {
            assemble(tuple, j, |leg| match leg {
                LegSpec::Shift {
                    n_trunc,
                    multiplicity,
                } => {
                    let p = TruncationParams::new(*n_trunc, 1, RESOLUTION_TOL)?;
                    Ok(shift_semigroup_matrix(t, &p, 1)
                        .kron(&ComplexMatrix::identity(*multiplicity)))
                }
                LegSpec::Unitary { matrix } => {
                    semigroup_at(&Contraction::strict(matrix.clone())?, t)
                }
            })
        })
        .collect()
}

/// Rounds a Hermitian matrix with eigenvalues near `{0, 1}` to the exact
/// spectral projection, returning it with its rank. Eigenvalues farther than
/// the rounding tolerance from both targets are structural failures.
fn round_to_projection(h: &ComplexMatrix, tol: f64) -> Result<(ComplexMatrix, usize)> {
    let eig = herm_eig(h, default_herm_tol(h))?;
    let n = h.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &val) in eig.values.iter().enumerate() {
        if (val - 1.0).abs() <= tol {
            let col = eig.vectors.block(0, k, n, 1);
            p = p.add_m(&(&col * &col.adjoint()));
            rank += 1;
        } else if val.abs() > tol {
            return Err(Error::Structure {
                context: "projection eigenvalue away from zero and one",
                defect: val.abs().min((val - 1.0).abs()),
            });
        }
    }
    Ok((p, rank))
}

/// Asymptotic range projection `V^{n_max} V^{*n_max}` compressed to the
/// margin and rounded to an exact projection. Zero on a pure shift, the
/// identity on a unitary, and the unitary-summand projection on a mix.
pub fn asymptotic_unitary_projection(
    v: &ComplexMatrix,
    n_max: usize,
    margin: &SubspaceBasis,
) -> Result<ComplexMatrix> {
    v.require_square("asymptotic projection operator")?;
    if v.rows() != margin.ambient_dim() {
        return Err(Error::Dimension {
            context: "margin inside the operator space",
            expected: (v.rows(), margin.dim()),
            found: (margin.ambient_dim(), margin.dim()),
        });
    }
    if n_max == 0 {
        return Err(Error::Domain {
            context: "asymptotic power must be positive",
        });
    }
    let f = margin.frame();
    let gram = &(&v.adjoint() * v) * f;
    let iso_defect = op_norm(&gram.sub_m(f));
    if iso_defect > MARGIN_ISOMETRY_TOL {
        return Err(Error::Structure {
            context: "operator is not isometric on the margin",
            defect: iso_defect,
        });
    }
    let w = &mat_power(v, n_max).adjoint() * f;
    let e = &w.adjoint() * &w;
    let sym = e.add_m(&e.adjoint()).scale_re(0.5);
    let (proj, _) = round_to_projection(&sym, PROJECTION_ROUND_TOL)?;
    Ok(proj)
}

/// Classification of one index on one subset part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartClass {
    CompletelyNonUnitary,
    Unitary,
}

/// One subset summand of the decomposition, in margin coordinates.
#[derive(Clone, Debug)]
pub struct SubsetPart {
    /// Bitmask over semigroup indices; bit `j` set means `V_j` acts as a
    /// shift on this part.
    pub subset: u32,
    pub projection: ComplexMatrix,
    pub dimension: usize,
    /// Per-index classification, absent on zero parts.
    pub tags: Option<Vec<PartClass>>,
}

/// The full joint decomposition with its quality residuals.
#[derive(Clone, Debug)]
pub struct SlocinskiDecomposition {
    /// All `2^n` parts, indexed by subset bitmask.
    pub parts: Vec<SubsetPart>,
    pub completeness_residual: f64,
    pub orthogonality_residual: f64,
    pub reducing_residual: f64,
}

impl SlocinskiDecomposition {
    pub fn part(&self, subset: u32) -> &SubsetPart {
        &self.parts[subset as usize]
    }
}

/// Splits the margin into joint shift/unitary parts: the projection for a
/// subset `A` is the product of `I - E_i` over `i` in `A` and `E_i` outside,
/// where `E_i` is the asymptotic range projection of `V_i`.
///
/// Every recovered dimension is checked against the construction's ground
/// truth and every part is classified; disagreement is an error, not a
/// wrong answer.
pub fn slocinski_decompose(
    tuple: &StructuredIsometryTuple,
    n_max: usize,
) -> Result<SlocinskiDecomposition> {
    let n = tuple.n();
    let margin = tuple.margin_basis(n_max)?;
    let f = margin.frame();
    let md = margin.dim();
    let ones = realize_powers(tuple, &vec![1; n])?;

    for v in &ones {
        let gram = &(&v.adjoint() * v) * f;
        let defect = op_norm(&gram.sub_m(f));
        if defect > MARGIN_ISOMETRY_TOL {
            return Err(Error::Structure {
                context: "tuple entry is not isometric on the margin",
                defect,
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = &ones[i];
            let b = &ones[j];
            let af = a * f;
            let bf = b * f;
            let straight = op_norm(&(a * &bf).sub_m(&(b * &af)));
            let bsf = &b.adjoint() * f;
            let star = op_norm(&(a * &bsf).sub_m(&(&b.adjoint() * &af)));
            let worst = straight.max(star);
            if worst > DOUBLY_COMMUTING_TOL {
                return Err(Error::NotCommuting {
                    context: "tuple is not doubly commuting on the margin",
                    norm: worst,
                });
            }
        }
    }

    let pows = realize_powers(tuple, &vec![n_max; n])?;
    let mut asymptotics = Vec::with_capacity(n);
    for pow in &pows {
        let w = &pow.adjoint() * f;
        let e = &w.adjoint() * &w;
        let sym = e.add_m(&e.adjoint()).scale_re(0.5);
        let (proj, _) = round_to_projection(&sym, PROJECTION_ROUND_TOL)?;
        asymptotics.push(proj);
    }

    let eye = ComplexMatrix::identity(md);
    let mut parts = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut prod = eye.clone();
        for (i, e) in asymptotics.iter().enumerate() {
            let factor = if mask & (1 << i) != 0 {
                eye.sub_m(e)
            } else {
                e.clone()
            };
            prod = &prod * &factor;
        }
        let sym = prod.add_m(&prod.adjoint()).scale_re(0.5);
        let (projection, dimension) = round_to_projection(&sym, PROJECTION_ROUND_TOL)?;
        parts.push(SubsetPart {
            subset: mask,
            projection,
            dimension,
            tags: None,
        });
    }

    let mut sum = ComplexMatrix::zeros(md, md);
    for part in &parts {
        sum = sum.add_m(&part.projection);
    }
    let completeness_residual = op_norm(&sum.sub_m(&eye));
    if completeness_residual > RESOLUTION_TOL {
        return Err(Error::Structure {
            context: "subset projections do not resolve the identity",
            defect: completeness_residual,
        });
    }
    let mut orthogonality_residual = 0.0f64;
    for a in 0..parts.len() {
        for b in (a + 1)..parts.len() {
            orthogonality_residual =
                orthogonality_residual.max(op_norm(&(&parts[a].projection * &parts[b].projection)));
        }
    }
    if orthogonality_residual > RESOLUTION_TOL {
        return Err(Error::Structure {
            context: "subset projections are not mutually orthogonal",
            defect: orthogonality_residual,
        });
    }
    let mut reducing_residual = 0.0f64;
    for v in &ones {
        let compressed = &f.adjoint() * &(v * f);
        for part in &parts {
            reducing_residual =
                reducing_residual.max(op_norm(&commutator(&part.projection, &compressed)));
        }
    }
    if reducing_residual > RESOLUTION_TOL {
        return Err(Error::NotCommuting {
            context: "subset projections do not reduce the tuple on the margin",
            norm: reducing_residual,
        });
    }

    let expected = tuple.ground_truth(n_max)?;
    for (part, &want) in parts.iter().zip(&expected) {
        if part.dimension != want {
            return Err(Error::Structure {
                context: "recovered dimension disagrees with the construction",
                defect: (part.dimension as f64 - want as f64).abs(),
            });
        }
    }

    for part in &mut parts {
        if part.dimension == 0 {
            continue;
        }
        let mut tags = Vec::with_capacity(n);
        for (j, e) in asymptotics.iter().enumerate() {
            let unitary_weight = op_norm(&(e * &part.projection));
            let shift_weight = op_norm(&(&eye.sub_m(e) * &part.projection));
            let class = if unitary_weight <= RESOLUTION_TOL {
                PartClass::CompletelyNonUnitary
            } else if shift_weight <= RESOLUTION_TOL {
                PartClass::Unitary
            } else {
                return Err(Error::Structure {
                    context: "part mixes shift and unitary directions",
                    defect: unitary_weight.min(shift_weight),
                });
            };
            let expected_class = if part.subset & (1 << j) != 0 {
                PartClass::CompletelyNonUnitary
            } else {
                PartClass::Unitary
            };
            if class != expected_class {
                return Err(Error::Structure {
                    context: "classification disagrees with the subset label",
                    defect: unitary_weight.min(shift_weight),
                });
            }
            tags.push(class);
        }
        part.tags = Some(tags);
    }

    Ok(SlocinskiDecomposition {
        parts,
        completeness_residual,
        orthogonality_residual,
        reducing_residual,
    })
}

/// Multishift verdict: the tuple is a pure multishift when every proper
/// subset part vanishes. The multiplicity compares the margin dimension with
/// the scalar multishift's, so it is only meaningful on a positive verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultishiftReport {
    pub is_multishift: bool,
    pub multiplicity: usize,
}

pub fn classify_multishift(
    tuple: &StructuredIsometryTuple,
    n_max: usize,
) -> Result<MultishiftReport> {
    let decomposition = slocinski_decompose(tuple, n_max)?;
    let full = (1usize << tuple.n()) - 1;
    let is_multishift = decomposition
        .parts
        .iter()
        .all(|p| p.subset as usize == full || p.dimension == 0);
    if !is_multishift {
        return Ok(MultishiftReport {
            is_multishift: false,
            multiplicity: 0,
        });
    }
    let margin_total: usize = decomposition.parts.iter().map(|p| p.dimension).sum();
    let mut scalar_margin = 1usize;
    for leg in &tuple.blocks()[0].legs {
        if let LegSpec::Shift { n_trunc, .. } = leg {
            scalar_margin *= n_trunc - n_max;
        }
    }
    let multiplicity = ((margin_total as f64) / (scalar_margin as f64)).round() as usize;
    Ok(MultishiftReport {
        is_multishift,
        multiplicity,
    })
}
