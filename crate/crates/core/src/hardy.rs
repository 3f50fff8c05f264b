//! Truncated Hardy-space models: the shift semigroup, Toeplitz symbol
//! operators, the Laguerre picture of the half-line space, and model spaces
//! built from Cauchy kernels.
//!
//! The basis of the truncated space is degree-major: coordinate `m * dim_e + i`
//! holds the `i`-th fiber coordinate of the degree-`m` coefficient. Products of
//! lower-triangular Toeplitz matrices are complete convolutions for every
//! retained degree, so multiplicativity statements hold to roundoff, not just
//! on a margin.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cogenerator::{semigroup_at, Contraction};
use crate::error::{Error, Result};
use crate::numerics::{op_norm, qr_pivoted, Complex64, ComplexMatrix, ONE, ZERO};

/// Matrix polynomial `ψ(z) = Σ A_k z^k` with square coefficients.
#[derive(Clone, Debug)]
pub struct OperatorSymbol {
    coeff_dim: usize,
    coefficients: Vec<ComplexMatrix>,
}

impl OperatorSymbol {
    pub fn new(coeff_dim: usize, coefficients: Vec<ComplexMatrix>) -> Result<Self> {
        if coefficients.is_empty() || coeff_dim == 0 {
            return Err(Error::Domain {
                context: "symbol needs at least one coefficient and a positive fiber dimension",
            });
        }
        for a in &coefficients {
            if a.shape() != (coeff_dim, coeff_dim) {
                return Err(Error::Dimension {
                    context: "symbol coefficient",
                    expected: (coeff_dim, coeff_dim),
                    found: a.shape(),
                });
            }
        }
        Ok(Self { coeff_dim, coefficients })
    }

    /// Scalar polynomial as a symbol with one-dimensional fiber.
    pub fn scalar(coeffs: &[Complex64]) -> Self {
        let coefficients = coeffs
            .iter()
            .map(|&c| ComplexMatrix::from_diag(&[c]))
            .collect();
        Self { coeff_dim: 1, coefficients }
    }

    /// The coordinate symbol `z -> z I`.
    pub fn coordinate(dim: usize) -> Self {
        Self {
            coeff_dim: dim,
            coefficients: vec![ComplexMatrix::zeros(dim, dim), ComplexMatrix::identity(dim)],
        }
    }

    pub fn constant(a0: ComplexMatrix) -> Result<Self> {
        let dim = a0.rows();
        a0.require_square("constant symbol")?;
        Ok(Self { coeff_dim: dim, coefficients: vec![a0] })
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[ComplexMatrix] {
        &self.coefficients
    }

    /// Horner evaluation at a point of the plane.
    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let mut acc = self.coefficients.last().unwrap().clone();
        for a in self.coefficients.iter().rev().skip(1) {
            acc = acc.scale(z).add_m(a);
        }
        acc
    }

    /// Coefficient convolution; degrees add.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.coeff_dim != other.coeff_dim {
            return Err(Error::Dimension {
                context: "symbol product",
                expected: (self.coeff_dim, self.coeff_dim),
                found: (other.coeff_dim, other.coeff_dim),
            });
        }
        let d = self.degree() + other.degree();
        let mut coefficients =
            vec![ComplexMatrix::zeros(self.coeff_dim, self.coeff_dim); d + 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                coefficients[i + j] = coefficients[i + j].add_m(&(a * b));
            }
        }
        Ok(Self { coeff_dim: self.coeff_dim, coefficients })
    }

    /// Largest operator norm over equispaced samples of the unit circle. By
    /// the maximum principle this dominates every interior value.
    pub fn sup_norm(&self, samples: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for k in 0..samples {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / samples as f64;
            let z = Complex64::new(angle.cos(), angle.sin());
            sup = sup.max(op_norm(&self.eval(z)));
        }
        sup
    }
}

/// Degree window of the truncated Hardy space.
///
/// Identities that hold exactly in infinite dimensions are asserted only on
/// coefficients of degree below `n_trunc - margin`; the top `margin` degrees
/// absorb truncation spill.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationParams {
    pub n_trunc: usize,
    pub margin: usize,
    pub tol: f64,
}

impl TruncationParams {
    pub fn new(n_trunc: usize, margin: usize, tol: f64) -> Result<Self> {
        if n_trunc == 0 || margin >= n_trunc {
            return Err(Error::Headroom {
                context: "margin must be smaller than the degree cut",
            });
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain {
                context: "tolerance must be positive and finite",
            });
        }
        Ok(Self { n_trunc, margin, tol })
    }

    /// Number of degrees kept faithful.
    pub fn faithful_degrees(&self) -> usize {
        self.n_trunc - self.margin
    }
}

/// Orthonormal frame spanning a subspace of a truncated model space.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    frame: ComplexMatrix,
}

impl SubspaceBasis {
    /// Accepts a frame after verifying its columns are orthonormal.
    pub fn new(frame: ComplexMatrix) -> Result<Self> {
        let gram = &frame.adjoint() * &frame;
        let defect = gram
            .sub_m(&ComplexMatrix::identity(frame.cols()))
            .fro_norm();
        if defect > 1e-10 * (1.0 + frame.cols() as f64) {
            return Err(Error::Structure {
                context: "subspace frame is not orthonormal",
                defect,
            });
        }
        Ok(Self { ambient_dim: frame.rows(), frame })
    }

    /// Orthonormalizes the span of the given columns.
    pub fn from_span(ambient_dim: usize, columns: &ComplexMatrix, required_dim: usize) -> Result<Self> {
        if columns.rows() != ambient_dim {
            return Err(Error::Dimension {
                context: "span columns",
                expected: (ambient_dim, columns.cols()),
                found: columns.shape(),
            });
        }
        let f = qr_pivoted(columns, 1e-12);
        if f.rank < required_dim {
            return Err(Error::RankDeficient {
                rank: f.rank,
                required: required_dim,
            });
        }
        Self::new(f.q)
    }

    /// Span of the first `k` coordinates.
    pub fn leading_coordinates(ambient_dim: usize, k: usize) -> Self {
        let mut frame = ComplexMatrix::zeros(ambient_dim, k);
        for j in 0..k {
            frame.set(j, j, ONE);
        }
        Self { ambient_dim, frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.frame * &self.frame.adjoint()
    }
}

/// Maclaurin coefficients `c_0..c_{n-1}` of `φ_t(z) = exp(t(z+1)/(z-1))`.
///
/// Uses `c_k = e^{-t}(L_k(2t) - L_{k-1}(2t))` with the three-term Laguerre
/// recurrence. The coefficients are real and square-summable with sum 1.
pub fn phi_coeffs(t: f64, n: usize) -> Vec<Complex64> {
    assert!(t >= 0.0 && t.is_finite(), "time must be finite and nonnegative");
    assert!(n >= 1);
    let x = 2.0 * t;
    let damp = (-t).exp();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    out.push(Complex64::new(damp, 0.0));
    for k in 0..n.saturating_sub(1) {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        out.push(Complex64::new(damp * (next - cur), 0.0));
        prev = cur;
        cur = next;
    }
    out
}

/// `φ_t ∘ (z -> z I)` truncated to `n` coefficients, fiber dimension `dim_e`.
pub fn phi_symbol(t: f64, n: usize, dim_e: usize) -> OperatorSymbol {
    let coeffs = phi_coeffs(t, n);
    let coefficients = coeffs
        .iter()
        .map(|&c| ComplexMatrix::identity(dim_e).scale(c))
        .collect();
    OperatorSymbol { coeff_dim: dim_e, coefficients }
}

/// Square-root defect of the retained coefficient mass, `sqrt(1 - Σ_{k<n}|c_k|²)`.
///
/// `φ_t` is inner, so this bounds the column tail dropped by an `n`-term
/// truncation.
pub fn phi_tail_defect(t: f64, n: usize) -> f64 {
    let coeffs = phi_coeffs(t, n);
    let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    (1.0 - kept).max(0.0).sqrt()
}

/// Block lower-triangular Toeplitz matrix of the symbol on the degree window.
///
/// Block `(i, j)` is coefficient `A_{i-j}` for `i >= j`.
pub fn toeplitz_of_symbol(psi: &OperatorSymbol, p: &TruncationParams) -> ComplexMatrix {
    let e = psi.coeff_dim();
    let n = p.n_trunc;
    let mut m = ComplexMatrix::zeros(n * e, n * e);
    for i in 0..n {
        for j in 0..=i {
            let k = i - j;
            if k <= psi.degree() {
                m.set_block(i * e, j * e, &psi.coefficients[k]);
            }
        }
    }
    m
}

/// Truncated multiplication by the coordinate, one block subdiagonal of
/// identities.
pub fn shift_matrix(p: &TruncationParams, dim_e: usize) -> ComplexMatrix {
    toeplitz_of_symbol(&OperatorSymbol::coordinate(dim_e), p)
}

/// The shift semigroup element at time `t` in the truncated basis.
pub fn shift_semigroup_matrix(t: f64, p: &TruncationParams, dim_e: usize) -> ComplexMatrix {
    toeplitz_of_symbol(&phi_symbol(t, p.n_trunc, dim_e), p)
}

/// Operator norm of `(S*S - I)` restricted to the first `cols` coordinates.
pub fn isometry_defect_on(op: &ComplexMatrix, cols: usize) -> f64 {
    let gram = &op.adjoint() * op;
    let window = gram.block(0, 0, cols, cols);
    op_norm(&window.sub_m(&ComplexMatrix::identity(cols)))
}

/// Values of the Laguerre picture basis function `e_n(x) = √2 e^{-x} L_n(2x)`.
pub fn laguerre_basis(n: usize, points: &[f64]) -> Vec<f64> {
    let root2 = 2.0f64.sqrt();
    points
        .iter()
        .map(|&x| {
            debug_assert!(x >= 0.0);
            let u = 2.0 * x;
            let mut prev = 0.0f64;
            let mut cur = 1.0f64;
            for k in 0..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0 - u) * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            root2 * (-x).exp() * cur
        })
        .collect()
}

/// Maclaurin coefficients of the disk automorphism `(z - a) / (1 - ā z)`.
pub fn blaschke_coeffs(a: Complex64, n: usize) -> Result<Vec<Complex64>> {
    if a.norm() >= 1.0 {
        return Err(Error::Domain {
            context: "Blaschke zero must lie inside the open disk",
        });
    }
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    out.push(-a);
    let head = ONE - a.norm_sqr();
    let mut power = ONE;
    for _ in 1..n {
        out.push(head * power);
        power *= a.conj();
    }
    Ok(out)
}

fn falling_factorial(n: usize, s: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..s {
        acc *= (n - i) as f64;
    }
    acc
}

/// Truncated Cauchy kernel chain vector `∂^s_w̄ (n -> w̄^n)`.
fn kernel_chain_column(w: Complex64, s: usize, n_trunc: usize) -> ComplexMatrix {
    let wbar = w.conj();
    let mut entries = vec![ZERO; n_trunc];
    for (n, e) in entries.iter_mut().enumerate() {
        if n >= s {
            let mut v = Complex64::new(falling_factorial(n, s), 0.0);
            for _ in 0..n - s {
                v *= wbar;
            }
            *e = v;
        }
    }
    ComplexMatrix::col_vec(&entries)
}

/// Model space of the Blaschke product vanishing at `zeros` (with
/// multiplicity), together with the compressed shift on it.
///
/// The frame spans truncated Cauchy kernels and their derivative chains; the
/// span is invariant under the adjoint shift up to a defect of order
/// `max|w|^{n_trunc}`. Eigenvalues of the compressed shift are the zeros.
pub fn blaschke_model_space(
    zeros: &[Complex64],
    p: &TruncationParams,
) -> Result<(SubspaceBasis, ComplexMatrix)> {
    if zeros.is_empty() {
        return Err(Error::Domain {
            context: "model space needs at least one zero",
        });
    }
    for w in zeros {
        if w.norm() >= 1.0 {
            return Err(Error::Domain {
                context: "model space zeros must lie inside the open disk",
            });
        }
    }
    if zeros.len() > p.n_trunc {
        return Err(Error::Headroom {
            context: "more zeros than truncated degrees",
        });
    }
    let mut columns: Vec<ComplexMatrix> = Vec::with_capacity(zeros.len());
    for (i, &w) in zeros.iter().enumerate() {
        let multiplicity_so_far = zeros[..i].iter().filter(|&&v| v == w).count();
        columns.push(kernel_chain_column(w, multiplicity_so_far, p.n_trunc));
    }
    let refs: Vec<&ComplexMatrix> = columns.iter().collect();
    let stacked = ComplexMatrix::hstack(&refs);
    let q = SubspaceBasis::from_span(p.n_trunc, &stacked, zeros.len())?;
    let s_theta = compress(&shift_matrix(p, 1), &q)?;
    Ok((q, s_theta))
}

/// Compression `F* op F` of an ambient operator to the subspace.
pub fn compress(op: &ComplexMatrix, q: &SubspaceBasis) -> Result<ComplexMatrix> {
    if op.shape() != (q.ambient_dim(), q.ambient_dim()) {
        return Err(Error::Dimension {
            context: "compression operand",
            expected: (q.ambient_dim(), q.ambient_dim()),
            found: op.shape(),
        });
    }
    Ok(&(&q.frame().adjoint() * op) * q.frame())
}

/// Residual `‖(I - FF*) op* F‖`; zero when the subspace is invariant for `op*`.
pub fn check_star_invariant(op: &ComplexMatrix, q: &SubspaceBasis) -> Result<f64> {
    if op.shape() != (q.ambient_dim(), q.ambient_dim()) {
        return Err(Error::Dimension {
            context: "invariance operand",
            expected: (q.ambient_dim(), q.ambient_dim()),
            found: op.shape(),
        });
    }
    let moved = &op.adjoint() * q.frame();
    let outside = moved.sub_m(&(&q.projector() * &moved));
    Ok(op_norm(&outside))
}

/// Coefficients of `z -> φ_t(ψ(z))` by contour integration over `|z| = radius`.
///
/// Requires `ψ(z)` to be a cogenerator at every sample; the sampled radius
/// must keep `ψ` strictly contractive there.
pub fn phi_of_symbol(
    t: f64,
    psi: &OperatorSymbol,
    n_out: usize,
    radius: f64,
    samples: usize,
) -> Result<OperatorSymbol> {
    assert!(n_out >= 1);
    assert!(radius > 0.0 && radius < 1.0);
    assert!(samples >= 2 * n_out);
    let e = psi.coeff_dim();
    let mut frames = Vec::with_capacity(samples);
    for k in 0..samples {
        let angle = 2.0 * core::f64::consts::PI * k as f64 / samples as f64;
        let z = Complex64::new(radius * angle.cos(), radius * angle.sin());
        let value = Contraction::strict(psi.eval(z))?;
        frames.push((angle, semigroup_at(&value, t)?));
    }
    let mut coefficients = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let mut acc = ComplexMatrix::zeros(e, e);
        for (angle, g) in &frames {
            let phase = Complex64::new(0.0, -(k as f64) * angle).exp();
            acc = acc.add_m(&g.scale(phase));
        }
        let norm = 1.0 / (samples as f64 * radius.powi(k as i32));
        coefficients.push(acc.scale_re(norm));
    }
    OperatorSymbol::new(e, coefficients)
}
