#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;

use super::matrix::ComplexMatrix;
use super::qr::solve;
use super::svd::op_norm;

/// Degree-13 Padé numerator coefficients for exp.
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest spectral norm for which the unscaled [13/13] approximant stays at
/// unit roundoff backward error.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the [13/13] Padé
/// approximant; the scaling power is chosen from the spectral norm.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("expm")?;
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let norm = op_norm(a);
    let s: u32 = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale_re(0.5f64.powi(s as i32));

    let ident = ComplexMatrix::identity(n);
    let a2 = scaled.mul_m(&scaled);
    let a4 = a2.mul_m(&a2);
    let a6 = a2.mul_m(&a4);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner = a6
        .scale_re(B13[13])
        .add_m(&a4.scale_re(B13[11]))
        .add_m(&a2.scale_re(B13[9]));
    let u_poly = a6
        .mul_m(&u_inner)
        .add_m(&a6.scale_re(B13[7]))
        .add_m(&a4.scale_re(B13[5]))
        .add_m(&a2.scale_re(B13[3]))
        .add_m(&ident.scale_re(B13[1]));
    let u = scaled.mul_m(&u_poly);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v_inner = a6
        .scale_re(B13[12])
        .add_m(&a4.scale_re(B13[10]))
        .add_m(&a2.scale_re(B13[8]));
    let v = a6
        .mul_m(&v_inner)
        .add_m(&a6.scale_re(B13[6]))
        .add_m(&a4.scale_re(B13[4]))
        .add_m(&a2.scale_re(B13[2]))
        .add_m(&ident.scale_re(B13[0]));

    let p = v.add_m(&u);
    let q = v.sub_m(&u);
    let mut r = solve(&q, &p)?;
    for _ in 0..s {
        r = r.mul_m(&r);
    }
    Ok(r)
}
