//! 2×2 complex matrices standing for elements of PSL₂(ℂ), plus the explicit
//! Maskit-slice representations σ_z and their extensions σ_{z,w}.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A unimodular matrix `[[a, b], [c, d]]`.
///
/// Every constructor except [`Moebius::from_entries_exact`] rescales by
/// `sqrt(det)` so the determinant is one up to rounding. The PSL₂ sign
/// ambiguity is left to callers: [`Moebius::trace`] returns the SL₂ trace of
/// this particular representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    /// Builds a matrix and renormalizes it to determinant one.
    ///
    /// Panics if the determinant is zero.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Moebius { a, b, c, d }.renormalized()
    }

    /// Takes the entries verbatim. The caller promises `ad - bc = 1`.
    pub const fn from_entries_exact(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Moebius { a, b, c, d }
    }

    /// Upper-triangular unipotent `[[1, t], [0, 1]]`.
    pub const fn translation(t: Complex64) -> Self {
        Moebius {
            a: ONE,
            b: t,
            c: ZERO,
            d: ONE,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Matrix product `self · other`, renormalized.
    pub fn compose(&self, other: &Moebius) -> Self {
        self.mul_raw(other).renormalized()
    }

    /// `self · other · self⁻¹ · other⁻¹`.
    pub fn commutator(&self, other: &Moebius) -> Self {
        self.mul_raw(other)
            .mul_raw(&self.inverse())
            .mul_raw(&other.inverse())
            .renormalized()
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Moebius) -> f64 {
        [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d]
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    /// Distance to `other` in PSL₂, i.e. minimized over the sign of `other`.
    pub fn projective_distance(&self, other: &Moebius) -> f64 {
        let neg = Moebius {
            a: -other.a,
            b: -other.b,
            c: -other.c,
            d: -other.d,
        };
        self.distance(other).min(self.distance(&neg))
    }

    fn mul_raw(&self, o: &Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    fn renormalized(self) -> Moebius {
        let det = self.det();
        assert!(det != ZERO, "singular matrix cannot be normalized");
        if det == ONE {
            return self;
        }
        let s = det.sqrt();
        Moebius {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
    }
}

impl Mul for Moebius {
    type Output = Moebius;

    fn mul(self, rhs: Moebius) -> Moebius {
        self.compose(&rhs)
    }
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// The representation σ_z of ⟨a, b⟩ with parabolic commutator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuncturedTorusRep {
    pub a: Moebius,
    pub b: Moebius,
    pub z: Complex64,
}

impl PuncturedTorusRep {
    /// Image of a word over `a`, `b` and their inverses. Upper-case letters
    /// denote inverses (`A = a⁻¹`, `B = b⁻¹`).
    ///
    /// Panics on any other character.
    pub fn eval_word(&self, word: &str) -> Moebius {
        let (ai, bi) = (self.a.inverse(), self.b.inverse());
        word.chars().fold(Moebius::IDENTITY, |acc, ch| {
            let g = match ch {
                'a' => &self.a,
                'b' => &self.b,
                'A' => &ai,
                'B' => &bi,
                other => panic!("unexpected letter {other:?} in word"),
            };
            acc.compose(g)
        })
    }
}

/// σ_z(a) = [[iz, i], [i, 0]], σ_z(b) = [[1, 2], [0, 1]].
pub fn make_sigma_z(z: Complex64) -> PuncturedTorusRep {
    PuncturedTorusRep {
        a: Moebius::from_entries_exact(I * z, I, I, ZERO),
        b: Moebius::translation(Complex64::new(2.0, 0.0)),
        z,
    }
}

/// σ_{z,w}: σ_z extended by the parabolic c = [[1, w], [0, 1]] commuting with b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedRep {
    pub base: PuncturedTorusRep,
    pub c: Moebius,
    pub w: Complex64,
}

impl ExtendedRep {
    /// σ_{z,w} restricted to ⟨c⁻ⁿa, b⟩, which is exactly σ_{z-nw}.
    pub fn shifted_subgroup(&self, n: i64) -> PuncturedTorusRep {
        let cn = Moebius::translation(-self.w * n as f64);
        PuncturedTorusRep {
            a: cn.compose(&self.base.a),
            b: self.base.b,
            z: self.base.z - self.w * n as f64,
        }
    }
}

pub fn make_sigma_zw(z: Complex64, w: Complex64) -> ExtendedRep {
    ExtendedRep {
        base: make_sigma_z(z),
        c: Moebius::translation(w),
        w,
    }
}

/// Normalized length `|w| / sqrt(2 Im w)` of the curve with translation `w`
/// in the rank-two cusp generated by translations `2` and `w`.
pub fn normalized_length(w: Complex64) -> Result<f64> {
    if !(w.im > 0.0) {
        return Err(Error::InvalidCuspParameter(w));
    }
    Ok(w.norm() / (2.0 * w.im).sqrt())
}
