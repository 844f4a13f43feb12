//! Exact trace polynomials `t_{p/q}(z) ∈ ℤ[i][z]`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::farey::{trace_recursion, FareySlope};

/// Largest denominator accepted by [`trace_polynomial`].
pub const MAX_SYMBOLIC_Q: i64 = 64;

pub type GaussianInt = Complex<BigInt>;

/// Polynomial with Gaussian-integer coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePolynomial {
    coeffs: Vec<GaussianInt>,
}

fn gi(re: i64, im: i64) -> GaussianInt {
    Complex::new(BigInt::from(re), BigInt::from(im))
}

impl TracePolynomial {
    pub fn new(mut coeffs: Vec<GaussianInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(gi(0, 0));
        }
        TracePolynomial { coeffs }
    }

    pub fn constant(re: i64, im: i64) -> Self {
        TracePolynomial::new(vec![gi(re, im)])
    }

    pub fn coeffs(&self) -> &[GaussianInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients rounded to double precision.
    pub fn to_f64(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Horner evaluation in double precision.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.to_f64().iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
    }

    /// `self − c` for a Gaussian-integer constant `c`.
    pub fn minus_constant(&self, re: i64, im: i64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= gi(re, im);
        TracePolynomial::new(coeffs)
    }
}

impl Mul for &TracePolynomial {
    type Output = TracePolynomial;

    fn mul(self, rhs: &TracePolynomial) -> TracePolynomial {
        let mut out = vec![gi(0, 0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TracePolynomial::new(out)
    }
}

impl Sub for &TracePolynomial {
    type Output = TracePolynomial;

    fn sub(self, rhs: &TracePolynomial) -> TracePolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = gi(0, 0);
        let out = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&zero) - rhs.coeffs.get(k).unwrap_or(&zero))
            .collect();
        TracePolynomial::new(out)
    }
}

impl fmt::Display for TracePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({} + {}i)", c.re, c.im)?;
            match k {
                0 => {}
                1 => write!(f, "·z")?,
                _ => write!(f, "·z^{k}")?,
            }
        }
        Ok(())
    }
}

/// Exact `t_{p/q}(z)`; degree `q`, same sign convention as the numeric
/// recursion.
pub fn trace_polynomial(s: FareySlope) -> Result<TracePolynomial> {
    if s.q() == 0 {
        return Err(Error::ConstantTrace);
    }
    if s.q() > MAX_SYMBOLIC_Q {
        return Err(Error::DenominatorTooLarge {
            slope: s,
            cap: MAX_SYMBOLIC_Q,
        });
    }
    let mut memo = HashMap::new();
    // t(n/1) = i·z + 2n·i
    let integer = |n: i64| TracePolynomial::new(vec![gi(0, 2 * n), gi(0, 1)]);
    Ok(trace_recursion(
        s,
        &mut memo,
        &integer,
        &TracePolynomial::constant(2, 0),
    ))
}
