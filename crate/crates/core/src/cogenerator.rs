//! Dictionary between contractive semigroups and their cogenerators.
//!
//! A matrix `T` with `1` outside its point spectrum pairs with the semigroup
//! `t -> expm(t A)` where `A = (T+I)(T-I)^{-1}`, and the pairing inverts by a
//! boundary limit that we evaluate with Richardson extrapolation.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{expm, min_singular, op_norm, solve, Complex64, ComplexMatrix};

/// Largest admitted overshoot of the unit norm bound.
pub const NORM_SLACK: f64 = 1e-8;
/// A matrix counts as having eigenvalue `1` when `min_singular(T - I)` is at or
/// below this.
pub const EIGEN_GAP_TOL: f64 = 1e-8;
/// Base step of the extrapolated boundary limit in `cogenerator_of`. The
/// leading error term scales like `(h / gap)^3` with `gap = min_singular(T-I)`,
/// which keeps the limit below 1e-7 whenever `gap >= 0.1`.
const RICHARDSON_BASE_STEP: f64 = 1e-3;
/// Defect level under which a power sequence counts as vanishing.
pub const PURE_THRESHOLD: f64 = 1e-6;

/// Square matrix of operator norm at most `1 + norm_slack`.
#[derive(Clone)]
pub struct Contraction {
    matrix: ComplexMatrix,
    norm_slack: f64,
}

impl Contraction {
    /// Validates the norm bound. `norm_slack` widens it for matrices assembled
    /// from computed factors.
    pub fn new(matrix: ComplexMatrix, norm_slack: f64) -> Result<Self> {
        matrix.require_square("contraction")?;
        let norm = op_norm(&matrix);
        if norm > 1.0 + norm_slack {
            return Err(Error::NotContractive { norm });
        }
        Ok(Self { matrix, norm_slack })
    }

    /// Accepts with the default roundoff allowance.
    pub fn strict(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, NORM_SLACK)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn norm_slack(&self) -> f64 {
        self.norm_slack
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// The adjoint is a contraction with the same slack.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            norm_slack: self.norm_slack,
        }
    }
}

/// Time-indexed family of matrices claimed to form a contractive semigroup.
pub struct SemigroupSampler {
    evaluate: Box<dyn Fn(f64) -> ComplexMatrix>,
    dimension: usize,
    generator: Option<ComplexMatrix>,
}

impl SemigroupSampler {
    pub fn new(dimension: usize, evaluate: Box<dyn Fn(f64) -> ComplexMatrix>) -> Self {
        Self { evaluate, dimension, generator: None }
    }

    /// Attaches the matrix whose exponentials the sampler claims to produce.
    pub fn with_generator(mut self, generator: ComplexMatrix) -> Self {
        self.generator = Some(generator);
        self
    }

    /// Sampler backed by `t -> expm(t A)` for `A = cayley_generator(T)`.
    pub fn from_cogenerator(t: &Contraction) -> Result<Self> {
        let a = cayley_generator(t)?;
        let dim = a.rows();
        let gen = a.clone();
        let evaluate = Box::new(move |time: f64| {
            expm(&a.scale_re(time)).expect("generator is square")
        });
        Ok(Self::new(dim, evaluate).with_generator(gen))
    }

    pub fn evaluate(&self, t: f64) -> ComplexMatrix {
        (self.evaluate)(t)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generator(&self) -> Option<&ComplexMatrix> {
        self.generator.as_ref()
    }

    /// Checks the unit at zero, the semigroup law over pairs from `grid`, and
    /// contractivity at each grid time.
    pub fn validate(&self, grid: &[f64], tol: f64) -> Result<()> {
        let at_zero = self.evaluate(0.0);
        let id = ComplexMatrix::identity(self.dimension);
        let unit_defect = at_zero.sub_m(&id).fro_norm();
        if unit_defect > tol {
            return Err(Error::Structure {
                context: "semigroup unit",
                defect: unit_defect,
            });
        }
        for &s in grid {
            let at_s = self.evaluate(s);
            let norm = op_norm(&at_s);
            if norm > 1.0 + tol {
                return Err(Error::NotContractive { norm });
            }
            for &t in grid {
                let product = &at_s * &self.evaluate(t);
                let law_defect = product.sub_m(&self.evaluate(s + t)).fro_norm();
                if law_defect > tol {
                    return Err(Error::Structure {
                        context: "semigroup law on grid",
                        defect: law_defect,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Default grid for semigroup law checks.
pub const LAW_GRID: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

/// Möbius map `M -> (M+I)(M-I)^{-1}`, an involution where defined.
pub fn cayley_transform(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.require_square("cayley transform")?;
    let id = ComplexMatrix::identity(m.rows());
    // (M+I) and (M-I)^{-1} commute, so the one-sided solve gives both orders.
    solve(&m.sub_m(&id), &m.add_m(&id))
}

/// Generator `A = (T+I)(T-I)^{-1}` of the semigroup attached to `T`.
pub fn cayley_generator(t: &Contraction) -> Result<ComplexMatrix> {
    let id = ComplexMatrix::identity(t.dim());
    let shifted = t.matrix().sub_m(&id);
    let gap = min_singular(&shifted);
    if gap <= EIGEN_GAP_TOL {
        return Err(Error::NotACogenerator { min_singular: gap });
    }
    solve(&shifted, &t.matrix().add_m(&id))
}

/// Semigroup element `expm(time * cayley_generator(T))`.
pub fn semigroup_at(t: &Contraction, time: f64) -> Result<ComplexMatrix> {
    if time < 0.0 || !time.is_finite() {
        return Err(Error::Domain {
            context: "semigroup time must be finite and nonnegative",
        });
    }
    let a = cayley_generator(t)?;
    expm(&a.scale_re(time))
}

/// One boundary-limit sample `(T_h - (1-h)I)(T_h - (1+h)I)^{-1}`.
fn limit_sample(s: &SemigroupSampler, h: f64) -> Result<ComplexMatrix> {
    let t_h = s.evaluate(h);
    let id = ComplexMatrix::identity(s.dimension());
    let num = t_h.sub_m(&id.scale_re(1.0 - h));
    let den = t_h.sub_m(&id.scale_re(1.0 + h));
    // Both factors are rational in T_h, so the solve order is immaterial.
    solve(&den, &num)
}

/// Recovers the cogenerator from semigroup samples near zero.
///
/// Evaluates the boundary limit at steps `h, h/2, h/4` and extrapolates twice.
pub fn cogenerator_of(s: &SemigroupSampler) -> Result<Contraction> {
    let h = RICHARDSON_BASE_STEP;
    let e0 = limit_sample(s, h)?;
    let e1 = limit_sample(s, h / 2.0)?;
    let e2 = limit_sample(s, h / 4.0)?;
    let r1a = e1.scale_re(2.0).sub_m(&e0);
    let r1b = e2.scale_re(2.0).sub_m(&e1);
    let d1 = e1.sub_m(&e0).fro_norm();
    let d2 = r1b.sub_m(&r1a).fro_norm();
    let scale = 1.0 + e2.fro_norm();
    if d2 > 0.75 * d1 + 1e-9 * scale {
        return Err(Error::NoConvergence {
            context: "cogenerator extrapolation",
            last_delta: d2,
        });
    }
    let r2 = r1b.scale_re(4.0).sub_m(&r1a).scale_re(1.0 / 3.0);
    Contraction::new(r2, 1e-6)
}

/// Diagnostics from the cogenerator membership test.
pub struct CogeneratorCheck {
    pub is_cogenerator: bool,
    pub op_norm: f64,
    /// `min_singular(T - I)`; zero exactly when `1` is an eigenvalue.
    pub gap_at_one: f64,
}

/// Tests contractivity and absence of eigenvalue `1`.
pub fn is_cogenerator(t: &ComplexMatrix) -> Result<CogeneratorCheck> {
    t.require_square("cogenerator test")?;
    let id = ComplexMatrix::identity(t.rows());
    let norm = op_norm(t);
    let gap = min_singular(&t.sub_m(&id));
    Ok(CogeneratorCheck {
        is_cogenerator: norm <= 1.0 + NORM_SLACK && gap > EIGEN_GAP_TOL,
        op_norm: norm,
        gap_at_one: gap,
    })
}

/// Norms of adjoint powers, `‖(T*)^n‖` for `n = 1..=horizon`.
///
/// The sequence is non-increasing; its tail vanishing is equivalent to the
/// semigroup adjoints vanishing, and classifies both as pure.
pub fn purity_defect(t: &Contraction, horizon: usize) -> Vec<f64> {
    assert!(horizon >= 1);
    let step = t.matrix().adjoint();
    let mut power = step.clone();
    let mut norms = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        norms.push(op_norm(&power));
        power = &power * &step;
    }
    norms
}

/// Scalar form of the generator map, `z -> (z+1)/(z-1)`.
pub fn mobius_scalar(z: Complex64) -> Complex64 {
    (z + 1.0) / (z - 1.0)
}
