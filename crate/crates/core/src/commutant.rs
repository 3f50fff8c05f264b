//! Commutants of compressed shifts: fitting Toeplitz symbols to operators
//! that commute with the model shift, testing symbols for membership in the
//! cogenerator class, and repairing symbols whose values fix a common
//! eigenspace at one.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hardy::{
    check_star_invariant, compress, shift_matrix, toeplitz_of_symbol, OperatorSymbol,
    SubspaceBasis, TruncationParams,
};
use crate::numerics::{
    commutator, lstsq, min_singular, null_space, op_norm, qr_pivoted, tol, Complex64,
    ComplexMatrix, ONE, ZERO,
};
use crate::sampling::{commuting_polynomial_family, random_contraction, seeded_rng};

/// Radius of the circle sampled by the default membership grid.
const GRID_RADIUS: f64 = 0.95;
/// Number of circle samples in the default membership grid.
const GRID_CIRCLE_POINTS: usize = 16;
/// Singular values at or below this count as kernel directions at one.
pub const KERNEL_THRESHOLD: f64 = 1e-7;
/// Margin below which a value of `ψ(z) - I` counts as singular.
const EIG1_FLOOR: f64 = 1e-12;
/// Ridge weight used for rank-deficient symbol fits.
const RIDGE: f64 = 1e-12;

/// Default evaluation grid: equispaced points on `|z| = 0.95` plus the origin.
///
/// The radius stays inside the disk so polynomial symbols of moderate degree
/// are sampled where their values are still controlled by the sup norm.
pub fn default_ce_grid() -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(GRID_CIRCLE_POINTS + 1);
    for k in 0..GRID_CIRCLE_POINTS {
        let angle = 2.0 * core::f64::consts::PI * k as f64 / GRID_CIRCLE_POINTS as f64;
        grid.push(Complex64::new(
            GRID_RADIUS * angle.cos(),
            GRID_RADIUS * angle.sin(),
        ));
    }
    grid.push(ZERO);
    grid
}

/// Evidence that a symbol's values are contractive and fix nothing at one.
#[derive(Clone)]
pub struct ClassCEWitness {
    pub symbol: OperatorSymbol,
    /// Largest excess of `‖ψ(z)‖` over one across the grid, clipped at zero.
    pub norm_bound_residual: f64,
    /// Smallest `min_singular(ψ(z) - I)` across the grid.
    pub eig1_margin: f64,
}

/// Outcome of the class test; rejection names the first offending point.
pub enum CeMembership {
    Accepted(ClassCEWitness),
    Rejected {
        z: Complex64,
        op_norm: f64,
        eig1_margin: f64,
    },
}

impl CeMembership {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CeMembership::Accepted(_))
    }
}

/// Tests every grid value for `‖ψ(z)‖ ≤ 1 + norm_slack` and
/// `min_singular(ψ(z) - I) > 0`. Total: failures come back as `Rejected`
/// with the offending point, not as errors.
pub fn in_class_ce(psi: &OperatorSymbol, grid: &[Complex64], norm_slack: f64) -> CeMembership {
    let eye = ComplexMatrix::identity(psi.coeff_dim());
    let mut worst_norm: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for &z in grid {
        let value = psi.eval(z);
        let norm = op_norm(&value);
        let margin = min_singular(&value.sub_m(&eye));
        if norm > 1.0 + norm_slack || margin <= EIG1_FLOOR {
            return CeMembership::Rejected {
                z,
                op_norm: norm,
                eig1_margin: margin,
            };
        }
        worst_norm = worst_norm.max(norm);
        worst_margin = worst_margin.min(margin);
    }
    CeMembership::Accepted(ClassCEWitness {
        symbol: psi.clone(),
        norm_bound_residual: (worst_norm - 1.0).max(0.0),
        eig1_margin: worst_margin,
    })
}

/// A fitted symbol together with the fit quality.
#[derive(Debug)]
pub struct CommutantFit {
    pub symbol: OperatorSymbol,
    /// Operator norm of `compress(T_ψ) - T`.
    pub residual: f64,
    /// True when the compression map on the candidate degrees was singular
    /// and the fit fell back to the ridge-regularized representative.
    pub rank_deficient: bool,
}

/// Least-squares symbol recovery: finds `ψ` of degree at most `max_degree`
/// whose Toeplitz compression to `q` is closest to `t` in Frobenius norm.
///
/// Requires `q` invariant under the adjoint shift, `t` contractive, and
/// `t` commuting with the compressed shift; each precondition is verified.
/// When several symbols induce the same compression, a small ridge picks the
/// minimum-norm coefficient representative.
pub fn commutant_solve(
    q: &SubspaceBasis,
    p: &TruncationParams,
    t: &ComplexMatrix,
    max_degree: usize,
) -> Result<CommutantFit> {
    if q.ambient_dim() % p.n_trunc != 0 {
        return Err(Error::Domain {
            context: "subspace ambient dimension is not a multiple of the degree cut",
        });
    }
    let dim_e = q.ambient_dim() / p.n_trunc;
    let d = q.dim();
    if t.shape() != (d, d) {
        return Err(Error::Dimension {
            context: "commutant candidate",
            expected: (d, d),
            found: t.shape(),
        });
    }
    let shift = shift_matrix(p, dim_e);
    let invariance = check_star_invariant(&shift, q)?;
    if invariance > p.tol {
        return Err(Error::Structure {
            context: "subspace is not invariant under the adjoint shift",
            defect: invariance,
        });
    }
    let s_c = compress(&shift, q)?;
    let t_norm = op_norm(t);
    if t_norm > 1.0 + tol::CONTRACTION_SLACK {
        return Err(Error::NotContractive { norm: t_norm });
    }
    let commutation = op_norm(&commutator(t, &s_c));
    if commutation > p.tol {
        return Err(Error::NotCommuting {
            context: "candidate does not commute with the compressed shift",
            norm: commutation,
        });
    }

    let unknowns = (max_degree + 1) * dim_e * dim_e;
    let mut design = ComplexMatrix::zeros(d * d, unknowns);
    let mut col = 0;
    for k in 0..=max_degree {
        for a in 0..dim_e {
            for b in 0..dim_e {
                let mut coeffs = vec![ComplexMatrix::zeros(dim_e, dim_e); k + 1];
                coeffs[k].set(a, b, ONE);
                let basis = OperatorSymbol::new(dim_e, coeffs)?;
                let image = compress(&toeplitz_of_symbol(&basis, p), q)?;
                for (i, z) in image.vec_cols().iter().enumerate() {
                    design.set(i, col, *z);
                }
                col += 1;
            }
        }
    }
    let mut rhs = ComplexMatrix::zeros(d * d, 1);
    for (i, z) in t.vec_cols().iter().enumerate() {
        rhs.set(i, 0, *z);
    }

    let rank_deficient = qr_pivoted(&design, tol::RANK_REL).rank < unknowns;
    let x = if rank_deficient {
        let mut augmented = ComplexMatrix::zeros(d * d + unknowns, unknowns);
        augmented.set_block(0, 0, &design);
        let ridge_root = Complex64::new(RIDGE.sqrt(), 0.0);
        for j in 0..unknowns {
            augmented.set(d * d + j, j, ridge_root);
        }
        let mut rhs_aug = ComplexMatrix::zeros(d * d + unknowns, 1);
        rhs_aug.set_block(0, 0, &rhs);
        lstsq(&augmented, &rhs_aug, 1e-12)?
    } else {
        lstsq(&design, &rhs, tol::RANK_REL)?
    };

    let mut coefficients = Vec::with_capacity(max_degree + 1);
    let mut idx = 0;
    for _ in 0..=max_degree {
        let mut c = ComplexMatrix::zeros(dim_e, dim_e);
        for a in 0..dim_e {
            for b in 0..dim_e {
                c.set(a, b, x.get(idx, 0));
                idx += 1;
            }
        }
        coefficients.push(c);
    }
    let symbol = OperatorSymbol::new(dim_e, coefficients)?;
    let fitted = compress(&toeplitz_of_symbol(&symbol, p), q)?;
    let residual = op_norm(&fitted.sub_m(t));
    Ok(CommutantFit {
        symbol,
        residual,
        rank_deficient,
    })
}

/// Common eigenspace of `η(z)` at eigenvalue one across the grid.
///
/// Each grid value must have the same kernel dimension for `η(z) - I`
/// (threshold `KERNEL_THRESHOLD` on singular values); the intersection is
/// taken through the kernel of `Σ_z (η(z)-I)*(η(z)-I)` and then re-verified
/// pointwise against `residual_tol`. A mismatch between the pointwise
/// dimensions and the intersection is reported at grid index zero.
pub fn eigenspace_one(
    eta: &OperatorSymbol,
    grid: &[Complex64],
    residual_tol: f64,
) -> Result<SubspaceBasis> {
    if grid.is_empty() {
        return Err(Error::Domain {
            context: "eigenspace grid must be nonempty",
        });
    }
    let e = eta.coeff_dim();
    let eye = ComplexMatrix::identity(e);
    let mut expected = 0;
    let mut accumulated = ComplexMatrix::zeros(e, e);
    for (i, &z) in grid.iter().enumerate() {
        let value = eta.eval(z);
        let norm = op_norm(&value);
        if norm > 1.0 + tol::CONTRACTION_SLACK {
            return Err(Error::NotContractive { norm });
        }
        let shifted = value.sub_m(&eye);
        let kernel = null_space(&shifted, KERNEL_THRESHOLD)?;
        if i == 0 {
            expected = kernel.cols();
        } else if kernel.cols() != expected {
            return Err(Error::InconsistentKernel {
                expected,
                found: kernel.cols(),
                grid_index: i,
            });
        }
        accumulated = accumulated.add_m(&(&shifted.adjoint() * &shifted));
    }
    let intersection_tol = grid.len() as f64 * KERNEL_THRESHOLD * KERNEL_THRESHOLD;
    let frame = null_space(&accumulated, intersection_tol)?;
    if frame.cols() != expected {
        return Err(Error::InconsistentKernel {
            expected,
            found: frame.cols(),
            grid_index: 0,
        });
    }
    for &z in grid {
        let residual = op_norm(&(&eta.eval(z).sub_m(&eye) * &frame));
        if residual > residual_tol {
            return Err(Error::Structure {
                context: "eigenspace at one varies across the grid",
                defect: residual,
            });
        }
    }
    SubspaceBasis::new(frame)
}

/// Replaces the identity part of `η = I ⊕ θ` (split against the common
/// eigenspace at one) by `κ`, producing a symbol in the cogenerator class
/// with the same action outside the eigenspace.
///
/// `κ` defaults to the zero symbol on the eigenspace and must itself pass
/// the class test there. When the eigenspace is trivial the symbol comes
/// back unchanged, making the repair idempotent.
pub fn repair_symbol(
    eta: &OperatorSymbol,
    kappa: Option<&OperatorSymbol>,
    grid: &[Complex64],
    residual_tol: f64,
) -> Result<OperatorSymbol> {
    let e = eta.coeff_dim();
    let e1 = eigenspace_one(eta, grid, residual_tol)?;
    let k = e1.dim();
    if k == 0 {
        return Ok(eta.clone());
    }
    let frame1 = e1.frame();
    let frame2 = null_space(&frame1.adjoint(), 1e-9)?;

    let default_kappa;
    let kappa = match kappa {
        Some(s) => s,
        None => {
            default_kappa = OperatorSymbol::constant(ComplexMatrix::zeros(k, k))?;
            &default_kappa
        }
    };
    if kappa.coeff_dim() != k {
        return Err(Error::Dimension {
            context: "replacement symbol fiber",
            expected: (k, k),
            found: (kappa.coeff_dim(), kappa.coeff_dim()),
        });
    }
    if !in_class_ce(kappa, grid, tol::CONTRACTION_SLACK).is_accepted() {
        return Err(Error::Domain {
            context: "replacement symbol rejected by the class test",
        });
    }

    let mut split_defect: f64 = 0.0;
    for (idx, a) in eta.coefficients().iter().enumerate() {
        let coupling_up = &frame1.adjoint() * &(a * &frame2);
        let coupling_down = &frame2.adjoint() * &(a * frame1);
        split_defect = split_defect
            .max(op_norm(&coupling_up))
            .max(op_norm(&coupling_down));
        let identity_block = if idx == 0 {
            op_norm(&(a * frame1).sub_m(frame1))
        } else {
            op_norm(&(a * frame1))
        };
        split_defect = split_defect.max(identity_block);
    }
    if split_defect > residual_tol {
        return Err(Error::Structure {
            context: "symbol does not split against the eigenspace at one",
            defect: split_defect,
        });
    }

    let degree = eta.degree().max(kappa.degree());
    let mut coefficients = Vec::with_capacity(degree + 1);
    for idx in 0..=degree {
        let mut c = ComplexMatrix::zeros(e, e);
        if idx <= kappa.degree() {
            let lifted = &(frame1 * &kappa.coefficients()[idx]) * &frame1.adjoint();
            c = c.add_m(&lifted);
        }
        if idx <= eta.degree() {
            let theta = &frame2.adjoint() * &(&eta.coefficients()[idx] * &frame2);
            c = c.add_m(&(&(&frame2 * &theta) * &frame2.adjoint()));
        }
        coefficients.push(c);
    }
    let repaired = OperatorSymbol::new(e, coefficients)?;
    match in_class_ce(&repaired, grid, tol::CONTRACTION_SLACK) {
        CeMembership::Accepted(_) => Ok(repaired),
        CeMembership::Rejected { eig1_margin, .. } => Err(Error::Structure {
            context: "repaired symbol fails the class test",
            defect: eig1_margin,
        }),
    }
}

/// A commuting tuple of compressions to the degree-one jet space.
pub struct CommutingModel {
    /// Degree-one symbols; the first entry is the coordinate symbol.
    pub symbols: Vec<OperatorSymbol>,
    /// Compressions to the jet space `{a_0 + a_1 z}`, listed like the symbols.
    pub compressions: Vec<ComplexMatrix>,
    pub fiber_dims: (usize, usize),
}

fn jet_compression(a0: &ComplexMatrix, a1: &ComplexMatrix) -> ComplexMatrix {
    let e = a0.rows();
    let mut t = ComplexMatrix::zeros(2 * e, 2 * e);
    t.set_block(0, 0, a0);
    t.set_block(e, 0, a1);
    t.set_block(e, e, a0);
    t
}

/// Builds `n` commuting contractions on the jet space over `E_0 ⊕ E_1`.
///
/// The first operator is the compressed coordinate shift. The others come
/// from symbols `A_{j,0} + z A_{j,1}` with `A_{j,0} = B_{j,0} ⊕ 0` and
/// `A_{j,1} = 0 ⊕ B_{j,1}`: the direct-sum structure kills every cross term,
/// so the tuple commutes exactly once the `B_{j,0}` commute, while the
/// `B_{j,1}` stay free. Norms are scaled so no compression has one in its
/// spectrum.
pub fn build_commuting_model(
    n: usize,
    dims: (usize, usize),
    seed: u64,
) -> Result<CommutingModel> {
    let (e0, e1) = dims;
    if n == 0 || e0 == 0 || e1 == 0 {
        return Err(Error::Domain {
            context: "model needs at least one operator and nonzero fiber parts",
        });
    }
    let e = e0 + e1;
    let mut rng = seeded_rng(seed);
    let diagonal_parts = commuting_polynomial_family(&mut rng, e0, n - 1, 3, 0.45);

    let mut symbols = vec![OperatorSymbol::coordinate(e)];
    let mut compressions = vec![jet_compression(
        &ComplexMatrix::zeros(e, e),
        &ComplexMatrix::identity(e),
    )];
    for b0 in diagonal_parts {
        let b1 = random_contraction(&mut rng, e1, 0.45);
        let a0 = b0.direct_sum(&ComplexMatrix::zeros(e1, e1));
        let a1 = ComplexMatrix::zeros(e0, e0).direct_sum(&b1);
        compressions.push(jet_compression(&a0, &a1));
        symbols.push(OperatorSymbol::new(e, vec![a0, a1])?);
    }

    for i in 0..compressions.len() {
        for j in (i + 1)..compressions.len() {
            let defect = op_norm(&commutator(&compressions[i], &compressions[j]));
            if defect > 1e-10 {
                return Err(Error::NotCommuting {
                    context: "jet model construction lost commutativity",
                    norm: defect,
                });
            }
        }
    }
    Ok(CommutingModel {
        symbols,
        compressions,
        fiber_dims: dims,
    })
}
