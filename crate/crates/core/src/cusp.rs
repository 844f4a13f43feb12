//! Cusps of the Maskit slice: parameters where γ_{p/q} becomes parabolic.
//!
//! Roots of `t_{p/q}(z) = ±2` come from Aberth–Ehrlich simultaneous iteration
//! on the exact trace polynomial, then Newton polishing against the trace
//! recursion, which stays accurate where the expanded polynomial cancels.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_point, ClassifierConfig, Verdict};
use crate::error::{Error, Result};
use crate::farey::{trace_with_derivative, FareySlope, TraceCache};
use crate::poly::{trace_polynomial, TracePolynomial};

/// Knobs for the simultaneous root iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSolverConfig {
    pub seed: u64,
    pub max_iterations: usize,
    /// Relative step size below which a root counts as converged.
    pub step_tol: f64,
    pub residual_tol: f64,
}

impl Default for RootSolverConfig {
    fn default() -> Self {
        RootSolverConfig {
            seed: 0,
            max_iterations: 500,
            step_tol: 1e-14,
            residual_tol: 1e-9,
        }
    }
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Value, derivative and rounding-noise estimate of the function being solved.
type Evaluator<'a> = &'a dyn Fn(Complex64) -> (Complex64, Complex64, f64);

/// Aberth–Ehrlich iteration for all roots of the polynomial `coeffs` (lowest
/// degree first), evaluated through `eval`. A root is frozen once its value
/// drops to the noise level or its step drops below `step_tol`.
fn aberth(coeffs: &[Complex64], eval: Evaluator<'_>, cfg: &RootSolverConfig) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let center = -coeffs[n - 1] / (lead * n as f64);
    // Fujiwara-style radius about the origin, shrunk towards the centroid
    let radius = (0..n)
        .map(|k| (coeffs[k] / lead).norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let phase: f64 = rng.gen_range(0.0..TAU / n as f64) + 0.4;
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| center + Complex64::from_polar(radius, phase + TAU * k as f64 / n as f64))
        .collect();
    if n == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }

    let mut done = vec![false; n];
    for _ in 0..cfg.max_iterations {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp, noise) = eval(roots[k]);
            if p.norm() <= noise {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (roots[k] - roots[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            roots[k] -= step;
            if step.norm() <= cfg.step_tol * (1.0 + roots[k].norm()) {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(roots);
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        estimates: roots,
    })
}

/// Newton steps on `f(z) = 0`.
fn polish(z: Complex64, eval: Evaluator<'_>) -> Complex64 {
    let mut z = z;
    for _ in 0..8 {
        let (f, df, _) = eval(z);
        if df == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = f / df;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// All roots of `poly(z) = target`, each with `|poly(root) − target|` within
/// the residual tolerance under double-precision Horner evaluation.
pub fn poly_roots(poly: &TracePolynomial, target: f64, cfg: &RootSolverConfig) -> Result<Vec<Complex64>> {
    let coeffs: Vec<Complex64> = poly.to_f64();
    let moduli: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    let scale = 4.0 * coeffs.len() as f64 * f64::EPSILON;
    let eval = |z: Complex64| {
        let (p, dp) = horner_with_derivative(&coeffs, z);
        // rounding bound of Horner's rule at z
        let r = z.norm();
        let noise = moduli.iter().rev().fold(0.0, |acc, m| acc * r + m) * scale;
        (p - target, dp, noise)
    };
    roots_with_evaluator(poly, target, cfg, &eval)
}

fn roots_with_evaluator(
    poly: &TracePolynomial,
    target: f64,
    cfg: &RootSolverConfig,
    eval: Evaluator<'_>,
) -> Result<Vec<Complex64>> {
    if poly.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let mut shifted = poly.to_f64();
    shifted[0] -= target;
    let mut roots: Vec<Complex64> = aberth(&shifted, eval, cfg)?
        .into_iter()
        .map(|z| polish(z, eval))
        .collect();
    let bad = roots.iter().any(|&z| !(eval(z).0.norm() < cfg.residual_tol));
    if bad {
        return Err(Error::NotConverged {
            iterations: cfg.max_iterations,
            estimates: roots,
        });
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Roots of `t_s(z) = ±2` for one sign, iterated and polished against the
/// recursion rather than the expanded polynomial.
pub fn slope_roots(s: FareySlope, target: f64, cfg: &RootSolverConfig) -> Result<Vec<Complex64>> {
    let poly = trace_polynomial(s)?;
    let eval = |z: Complex64| {
        let jet = trace_with_derivative(z, s);
        // the value is only meaningful up to the rounding of z itself
        let noise = 64.0 * f64::EPSILON * (1.0 + z.norm() * jet.deriv.norm());
        (jet.value - target, jet.deriv, noise)
    };
    roots_with_evaluator(&poly, target, cfg, &eval)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspResult {
    pub slope: FareySlope,
    /// The cusp on `∂M⁺`.
    pub z: Complex64,
    /// Every solution of `t² = 4`, both signs.
    pub all_roots: Vec<Complex64>,
    /// `|t(z)² − 4|` at the reported cusp.
    pub residual: f64,
    /// Set when more than one root passed the boundary probe.
    pub ambiguous: bool,
}

/// Does the root `z` of `t_s = ±2` look like a point of `∂M⁺`: inside on the
/// side where `t_s` is real beyond `±2`, not inside on the side where it is
/// real in `(-2, 2)`.
///
/// The exterior near a cusp is a thin horn around the elliptic locus that
/// need not leave the cusp vertically, so the probes follow `t_s` rather
/// than the imaginary axis, and `boundary_tol` is the displacement of `t_s`
/// (not of `z`) to first order. For `0/1` both readings coincide. Probes
/// classify with the inside margin capped at `boundary_tol / 1000`: cusps of
/// `1/q` crowd towards `2i`, where `t_{0/1}` is itself nearly parabolic.
pub fn is_boundary_point(s: FareySlope, z: Complex64, cfg: &ClassifierConfig) -> bool {
    let eps = cfg.boundary_tol;
    let probe = ClassifierConfig {
        inside_margin: cfg.inside_margin.min(1e-3 * eps),
        ..*cfg
    };
    let jet = trace_with_derivative(z, s);
    if jet.deriv.norm() == 0.0 {
        return false;
    }
    // moving by `toward` pushes t_s along the reals toward 0
    let toward = -jet.value / jet.deriv;
    let toward = toward / toward.norm() / jet.deriv.norm().max(1.0);
    let above = classify_point(z - toward * eps, &probe).verdict;
    let below = classify_point(z + toward * eps, &probe).verdict;
    above == Verdict::InsidePlus && below != Verdict::InsidePlus
}

/// Locates the cusp of `s` on `∂M⁺`.
pub fn cusp_point(s: FareySlope, cfg: &ClassifierConfig, solver: &RootSolverConfig) -> Result<CuspResult> {
    if s.q() == 0 {
        return Err(Error::ConstantTrace);
    }
    let mut all_roots = slope_roots(s, 2.0, solver)?;
    all_roots.extend(slope_roots(s, -2.0, solver)?);

    let best = all_roots
        .iter()
        .copied()
        .filter(|z| z.im > 0.0 && is_boundary_point(s, *z, cfg))
        .collect::<Vec<_>>();
    let Some(z) = best.iter().copied().max_by(|a, b| a.im.total_cmp(&b.im)) else {
        return Err(Error::NoBoundaryRepresentative {
            slope: s,
            roots: all_roots,
        });
    };
    let t = TraceCache::new(z).trace(s);
    Ok(CuspResult {
        slope: s,
        z,
        all_roots,
        residual: (t * t - 4.0).norm(),
        ambiguous: best.len() > 1,
    })
}
