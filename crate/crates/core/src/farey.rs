//! Simple closed curves on the punctured torus, indexed by Farey slopes, and
//! their traces under σ_z.
//!
//! Traces are computed with the recursion `t(l ⊕ r) = t(l)·t(r) − t(r ⊖ l)`,
//! which for the Christoffel words produced by [`slope_word`] holds exactly in
//! SL₂ (no sign ambiguity). Integer slopes are closed-form: `t(n/1) = i(z + 2n)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The slope `p/q` naming the curve γ_{p/q} with homology class ±(q, p).
///
/// Invariants: `gcd(|p|, q) = 1`, `q ≥ 0`, and `1/0` is the only slope with
/// `q = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FareySlope {
    p: i64,
    q: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl FareySlope {
    pub const ZERO: FareySlope = FareySlope { p: 0, q: 1 };
    pub const INFINITY: FareySlope = FareySlope { p: 1, q: 0 };
    pub const ONE: FareySlope = FareySlope { p: 1, q: 1 };
    pub const MINUS_ONE: FareySlope = FareySlope { p: -1, q: 1 };

    pub fn new(p: i64, q: i64) -> Result<Self> {
        let valid = q >= 0 && gcd(p, q) == 1 && (q != 0 || p == 1);
        if valid {
            Ok(FareySlope { p, q })
        } else {
            Err(Error::InvalidSlope { p, q })
        }
    }

    /// Reduces an arbitrary nonzero vector `(p, q)` to its slope.
    pub fn from_vector(p: i64, q: i64) -> Option<Self> {
        let g = gcd(p, q);
        if g == 0 {
            return None;
        }
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 || (q == 0 && p < 0) {
            p = -p;
            q = -q;
        }
        Some(FareySlope { p, q })
    }

    pub const fn integer(n: i64) -> Self {
        FareySlope { p: n, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// The four slopes used to seed the Farey tessellation.
    pub fn is_base(&self) -> bool {
        self.q == 0 || (self.q == 1 && self.p.abs() <= 1)
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Farey mediant `(p + r)/(q + s)`.
    pub fn mediant(&self, other: &FareySlope) -> FareySlope {
        FareySlope::from_vector(self.p + other.p, self.q + other.q).expect("mediant of distinct slopes is nonzero")
    }

    /// `(p + kq)/q`, the image under the Dehn twist `a ↦ ba`.
    pub fn shifted(&self, k: i64) -> FareySlope {
        FareySlope::from_vector(self.p + k * self.q, self.q).unwrap()
    }

    pub fn negated(&self) -> FareySlope {
        FareySlope::from_vector(-self.p, self.q).unwrap()
    }
}

impl fmt::Display for FareySlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Oriented Farey neighbours `(left, right)` as integer vectors with
/// `right.p·left.q − left.p·right.q = 1`. When `1/0` sits on the left it is
/// written `(-1, 0)`.
fn parent_vectors(s: FareySlope) -> Result<((i64, i64), (i64, i64))> {
    if s.is_base() {
        return Err(Error::RootSlope(s));
    }
    let (p, q) = (s.p, s.q);
    if q == 1 {
        return Ok(if p > 0 {
            ((p - 1, 1), (1, 0))
        } else {
            ((-1, 0), (p + 1, 1))
        });
    }
    // right parent u/v solves q·u − p·v = 1 with 0 < v < q
    let v = (-mod_inverse(p.rem_euclid(q), q)).rem_euclid(q);
    let u = (1 + p * v) / q;
    Ok(((p - u, q - v), (u, v)))
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let k = old_r / r;
        (old_r, r) = (r, old_r - k * r);
        (old_s, s) = (s, old_s - k * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m)
}

/// The unique Farey neighbours `(left, right)` whose mediant is `s`.
pub fn farey_parents(s: FareySlope) -> Result<(FareySlope, FareySlope)> {
    let (l, r) = parent_vectors(s)?;
    Ok((
        FareySlope::from_vector(l.0, l.1).unwrap(),
        FareySlope::from_vector(r.0, r.1).unwrap(),
    ))
}

/// Fourth vertex of the Farey quadrilateral on the edge `(left, right)`:
/// the slope of `right − left`.
pub fn farey_difference(left: FareySlope, right: FareySlope) -> FareySlope {
    let l = if left == FareySlope::INFINITY && right.p < 0 {
        (-1, 0)
    } else {
        (left.p, left.q)
    };
    FareySlope::from_vector(right.p - l.0, right.q - l.1).expect("neighbours are distinct")
}

/// The three slopes `(left, right, difference)` feeding the recursion for `s`.
pub fn recursion_triple(s: FareySlope) -> Result<(FareySlope, FareySlope, FareySlope)> {
    let (l, r) = parent_vectors(s)?;
    let diff = FareySlope::from_vector(r.0 - l.0, r.1 - l.1).unwrap();
    Ok((
        FareySlope::from_vector(l.0, l.1).unwrap(),
        FareySlope::from_vector(r.0, r.1).unwrap(),
        diff,
    ))
}

/// Christoffel word for `s` over `a`, `b` with `A = a⁻¹`, `B = b⁻¹`.
///
/// Integer slopes give `a bⁿ`; other slopes concatenate the words of their
/// left and right parents.
pub fn slope_word(s: FareySlope) -> String {
    if s.q == 0 {
        return "b".to_owned();
    }
    if s.q == 1 {
        let letter = if s.p >= 0 { "b" } else { "B" };
        return format!("a{}", letter.repeat(s.p.unsigned_abs() as usize));
    }
    let (l, r) = farey_parents(s).expect("q ≥ 2 is never a base slope");
    slope_word(l) + &slope_word(r)
}

/// All slopes `p/q` in `[0, 1]` with `1 ≤ q ≤ q_max`, sorted by `q` then `p`.
pub fn farey_sequence(q_max: i64) -> Vec<FareySlope> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        for p in 0..=q {
            if gcd(p, q) == 1 {
                out.push(FareySlope { p, q });
            }
        }
    }
    out
}

/// Memoised evaluation of the trace recursion over any commutative ring.
pub(crate) fn trace_recursion<T, F>(s: FareySlope, memo: &mut HashMap<FareySlope, T>, integer: &F, two: &T) -> T
where
    T: Clone,
    for<'x> &'x T: Mul<&'x T, Output = T> + Sub<&'x T, Output = T>,
    F: Fn(i64) -> T,
{
    if s.q == 0 {
        return two.clone();
    }
    if s.q == 1 {
        return integer(s.p);
    }
    if let Some(t) = memo.get(&s) {
        return t.clone();
    }
    let (l, r, d) = recursion_triple(s).expect("q ≥ 2 is never a base slope");
    let tl = trace_recursion(l, memo, integer, two);
    let tr = trace_recursion(r, memo, integer, two);
    let td = trace_recursion(d, memo, integer, two);
    let t = &(&tl * &tr) - &td;
    memo.insert(s, t.clone());
    t
}

/// Trace of σ_z(γ_{n/1}) = tr(a bⁿ).
pub fn integer_slope_trace(z: Complex64, n: i64) -> Complex64 {
    I * (z + 2.0 * n as f64)
}

/// Per-parameter memo of slope traces. Never share one across `z` values.
#[derive(Clone, Debug)]
pub struct TraceCache {
    z: Complex64,
    map: HashMap<FareySlope, Complex64>,
}

impl TraceCache {
    pub fn new(z: Complex64) -> Self {
        let mut map = HashMap::new();
        map.insert(FareySlope::ZERO, I * z);
        map.insert(FareySlope::INFINITY, Complex64::new(2.0, 0.0));
        map.insert(FareySlope::ONE, I * (z + 2.0));
        TraceCache { z, map }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn get(&self, s: &FareySlope) -> Option<Complex64> {
        self.map.get(s).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn trace(&mut self, s: FareySlope) -> Complex64 {
        let z = self.z;
        trace_recursion(
            s,
            &mut self.map,
            &|n| integer_slope_trace(z, n),
            &Complex64::new(2.0, 0.0),
        )
    }
}

/// `t_{p/q}(z)`, the SL₂ trace of σ_z applied to [`slope_word`]`(s)`.
///
/// Panics if `cache` was built for a different parameter.
pub fn trace_of_slope(z: Complex64, s: FareySlope, cache: &mut TraceCache) -> Complex64 {
    assert_eq!(cache.z, z, "trace cache belongs to a different parameter");
    cache.trace(s)
}

/// First-order jet `value + ε·derivative`, used to differentiate traces in `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub deriv: Complex64,
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        Jet {
            value: self.value * o.value,
            deriv: self.deriv * o.value + self.value * o.deriv,
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet {
            value: self.value - o.value,
            deriv: self.deriv - o.deriv,
        }
    }
}

/// `t_s(z)` together with `dt_s/dz`.
pub fn trace_with_derivative(z: Complex64, s: FareySlope) -> Jet {
    let mut memo = HashMap::new();
    trace_recursion(
        s,
        &mut memo,
        &|n| Jet {
            value: integer_slope_trace(z, n),
            deriv: I,
        },
        &Jet {
            value: Complex64::new(2.0, 0.0),
            deriv: Complex64::new(0.0, 0.0),
        },
    )
}
