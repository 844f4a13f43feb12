//! Word traces under σ_z in exact arithmetic.
//!
//! A double is a dyadic rational, so `z = Z / 2^S` with `Z` a Gaussian
//! integer. Scaling `a` and `a⁻¹` by `2^S` keeps every product integral, and
//! the trace of a word with `m` letters `a`/`A` is `tr(M) / 2^{Sm}`. The only
//! rounding is the final conversion.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_traits::{One, Signed, ToPrimitive, Zero};

type Gauss = Complex<BigInt>;
type Matrix = [[Gauss; 2]; 2];

/// `x = mantissa · 2^exponent`, exactly.
fn decode(x: f64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1 << 52) - 1)) as i64;
    let (mant, exp) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    (sign * mant, exp)
}

fn gauss(re: BigInt, im: BigInt) -> Gauss {
    Complex::new(re, im)
}

fn small(re: i64, im: i64) -> Gauss {
    gauss(BigInt::from(re), BigInt::from(im))
}

fn mul(x: &Matrix, y: &Matrix) -> Matrix {
    let e = |i: usize, j: usize| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `x · 2^e` without intermediate overflow or underflow.
fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    let big = 2f64.powi(1000);
    while e > 1000 {
        x *= big;
        e -= 1000;
    }
    while e < -1000 {
        x /= big;
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `n · 2^e` rounded to a double.
fn to_f64(n: &BigInt, e: i64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let shift = n.bits().saturating_sub(64);
    let top = (n.abs() >> shift).to_u64().expect("at most 64 bits") as f64;
    let v = scale_pow2(top, e + shift as i64);
    if n.is_negative() {
        -v
    } else {
        v
    }
}

/// Trace of `word` (letters `a`, `b`, `A = a⁻¹`, `B = b⁻¹`) under σ_z.
///
/// Panics on any other letter.
pub fn exact_word_trace(z: Complex64, word: &str) -> Complex64 {
    let (mr, er) = decode(z.re);
    let (mi, ei) = decode(z.im);
    let s = (-er.min(ei)).max(0);
    let zr = BigInt::from(mr) << (er + s) as usize;
    let zi = BigInt::from(mi) << (ei + s) as usize;
    let d = BigInt::one() << s as usize;
    let zero = || small(0, 0);

    // 2^S·a = [[iZ, iD], [iD, 0]], 2^S·a⁻¹ = [[0, −iD], [−iD, iZ]]
    let iz = gauss(-zi, zr);
    let id = gauss(BigInt::zero(), d.clone());
    let neg_id = gauss(BigInt::zero(), -d);
    let a: Matrix = [[iz.clone(), id.clone()], [id, zero()]];
    let a_inv: Matrix = [[zero(), neg_id.clone()], [neg_id, iz]];
    let b: Matrix = [[small(1, 0), small(2, 0)], [zero(), small(1, 0)]];
    let b_inv: Matrix = [[small(1, 0), small(-2, 0)], [zero(), small(1, 0)]];

    let mut acc: Matrix = [[small(1, 0), zero()], [zero(), small(1, 0)]];
    let mut scaled = 0i64;
    for ch in word.chars() {
        let g = match ch {
            'a' => &a,
            'A' => &a_inv,
            'b' => &b,
            'B' => &b_inv,
            other => panic!("unexpected letter {other:?} in word"),
        };
        if matches!(ch, 'a' | 'A') {
            scaled += 1;
        }
        acc = mul(&acc, g);
    }
    let tr = &acc[0][0] + &acc[1][1];
    let e = -s * scaled;
    Complex64::new(to_f64(&tr.re, e), to_f64(&tr.im, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_round_trips() {
        for x in [1.0, -0.375, 1e-300, 5e-324, 3.0e200, f64::MAX] {
            let (m, e) = decode(x);
            assert_eq!(to_f64(&BigInt::from(m), e), x);
        }
    }

    #[test]
    fn short_words() {
        let z = Complex64::new(0.3, 1.25);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(exact_word_trace(z, ""), Complex64::new(2.0, 0.0));
        assert_eq!(exact_word_trace(z, "a"), i * z);
        assert_eq!(exact_word_trace(z, "ab"), i * (z + 2.0));
        assert_eq!(exact_word_trace(z, "aA"), Complex64::new(2.0, 0.0));
        assert_eq!(exact_word_trace(z, "abAB"), Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn quadratic_word() {
        // tr(aab) = −(z(z + 2) + 2), exact for these dyadic inputs
        let z = Complex64::new(-0.75, 1.5);
        assert_eq!(exact_word_trace(z, "aab"), -(z * (z + 2.0) + 2.0));
    }
}
