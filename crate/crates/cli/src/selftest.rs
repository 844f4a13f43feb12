//! Invariant suites run by `maskit selftest`.

use std::collections::HashMap;

use maskit_core::classify::{a_membership, ClassifierConfig, MembershipVerdict};
use maskit_core::cusp::{cusp_point, slope_roots, RootSolverConfig};
use maskit_core::farey::{farey_sequence, integer_slope_trace, recursion_triple};
use maskit_core::raster::{check_symmetries, SYMMETRY_DEPTH};
use maskit_core::{exact_word_trace, make_sigma_z, normalized_length, slope_word, Complex64, FareySlope, TraceCache};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of slope traces under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Traces {
    Library,
    /// Recursion with the sign of the difference term flipped.
    FlippedSign,
}

impl Traces {
    fn trace(self, z: Complex64, s: FareySlope) -> Complex64 {
        match self {
            Traces::Library => TraceCache::new(z).trace(s),
            Traces::FlippedSign => flipped(z, s, &mut HashMap::new()),
        }
    }
}

fn flipped(z: Complex64, s: FareySlope, memo: &mut HashMap<FareySlope, Complex64>) -> Complex64 {
    if s.q() == 0 {
        return Complex64::new(2.0, 0.0);
    }
    if s.q() == 1 {
        return integer_slope_trace(z, s.p());
    }
    if let Some(t) = memo.get(&s) {
        return *t;
    }
    let (l, r, d) = recursion_triple(s).expect("non-base slope");
    let t = flipped(z, l, memo) * flipped(z, r, memo) + flipped(z, d, memo);
    memo.insert(s, t);
    t
}

pub struct SuiteResult {
    pub name: &'static str,
    pub failure: Option<String>,
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-half..half), rng.gen_range(-half..half)))
        .collect()
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> SuiteResult {
    SuiteResult {
        name,
        failure: f().err(),
    }
}

fn slopes(depth: i64) -> Vec<FareySlope> {
    let mut out = farey_sequence(depth);
    let negatives: Vec<_> = out.iter().filter(|s| s.p() != 0).map(|s| s.negated()).collect();
    out.extend(negatives);
    out.push(FareySlope::INFINITY);
    out
}

pub fn run(cfg: &ClassifierConfig, seed: u64, traces: Traces) -> Vec<SuiteResult> {
    let depth = cfg.q_max.clamp(1, SYMMETRY_DEPTH);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = random_points(&mut rng, 100, 4.0);
    let slopes = slopes(depth);
    let mut results = Vec::new();

    results.push(check("commutator is parabolic", || {
        for &z in &points {
            let rep = make_sigma_z(z);
            let t = rep.a.commutator(&rep.b).trace();
            if (t + 2.0).norm() >= 1e-10 {
                return Err(format!("tr[a,b] = {t} at z = {z}"));
            }
        }
        Ok(())
    }));

    results.push(check("recursion matches word matrices", || {
        for &z in points.iter().take(20) {
            for &s in &slopes {
                let t = traces.trace(z, s);
                let m = exact_word_trace(z, &slope_word(s));
                if (t - m).norm() > 1e-8 * m.norm().max(1.0) {
                    return Err(format!("t_{s}({z}) = {t}, word matrix gives {m}"));
                }
            }
        }
        Ok(())
    }));

    results.push(check("Markov identity", || {
        for &z in &points {
            let x = traces.trace(z, FareySlope::ZERO);
            let y = traces.trace(z, FareySlope::INFINITY);
            let u = traces.trace(z, FareySlope::ONE);
            let m = x * x + y * y + u * u - x * y * u;
            if m.norm() > 1e-10 * (1.0 + (x * y * u).norm()) {
                return Err(format!("x² + y² + u² − xyu = {m} at z = {z}"));
            }
        }
        Ok(())
    }));

    results.push(check("symmetry laws", || {
        let grid: Vec<Complex64> = (0..8)
            .flat_map(|i| (0..8).map(move |j| Complex64::new(-3.0 + 0.8 * i as f64, 0.3 + 0.45 * j as f64)))
            .collect();
        match check_symmetries(cfg, &grid).into_iter().find(|c| !c.passed()) {
            Some(c) => Err(format!("symmetry check failed at {}", c.z)),
            None => Ok(()),
        }
    }));

    results.push(check("cusp values", || {
        let solver = RootSolverConfig {
            seed,
            ..RootSolverConfig::default()
        };
        let r3 = 3f64.sqrt();
        let fixtures = [
            (FareySlope::ZERO, Complex64::new(0.0, 2.0)),
            (FareySlope::new(1, 2).unwrap(), Complex64::new(-1.0, r3)),
            (FareySlope::ONE, Complex64::new(-2.0, 2.0)),
        ];
        for (s, want) in fixtures {
            let c = cusp_point(s, cfg, &solver).map_err(|e| format!("cusp {s}: {e}"))?;
            if (c.z - want).norm() > 1e-9 || c.residual >= 1e-9 {
                return Err(format!("cusp {s} at {} (residual {:e}), want {want}", c.z, c.residual));
            }
        }
        let half = FareySlope::new(1, 2).unwrap();
        let mut roots = slope_roots(half, 2.0, &solver).map_err(|e| e.to_string())?;
        roots.extend(slope_roots(half, -2.0, &solver).map_err(|e| e.to_string())?);
        for want in [(0.0, 0.0), (-2.0, 0.0), (-1.0, r3), (-1.0, -r3)] {
            let want = Complex64::new(want.0, want.1);
            if !roots.iter().any(|r| (r - want).norm() < 1e-9) {
                return Err(format!("1/2 roots {roots:?} miss {want}"));
            }
        }
        Ok(())
    }));

    results.push(check("membership fixtures", || {
        let z = Complex64::new(0.0, 4.0);
        let m = a_membership(z, Complex64::new(0.0, 8.0), cfg).map_err(|e| e.to_string())?;
        if m.verdict != MembershipVerdict::Member || m.n != Some(0) {
            return Err(format!("(4i, 8i) gave {:?} with n = {:?}", m.verdict, m.n));
        }
        for x in [-3.0, 0.0, 1.5] {
            let m = a_membership(z, Complex64::new(x, 0.0), cfg).map_err(|e| e.to_string())?;
            if m.verdict != MembershipVerdict::NonMemberCertified {
                return Err(format!("real w = {x} gave {:?}", m.verdict));
            }
        }
        for _ in 0..16 {
            let w = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.5..9.0));
            let a = a_membership(z, w, cfg).map_err(|e| e.to_string())?.verdict;
            let b = a_membership(z, w + 2.0, cfg).map_err(|e| e.to_string())?.verdict;
            let determined = a != MembershipVerdict::Undetermined && b != MembershipVerdict::Undetermined;
            if determined && a != b {
                return Err(format!("verdict at {w} differs from its translate by 2"));
            }
        }
        Ok(())
    }));

    results.push(check("normalized length", || {
        for (w, want) in [((0.0, 2.0), 1.0), ((2.0, 2.0), 2f64.sqrt()), ((0.0, 8.0), 2.0)] {
            let got = normalized_length(Complex64::new(w.0, w.1)).map_err(|e| e.to_string())?;
            if (got - want).abs() > 1e-12 {
                return Err(format!("normalized length of {w:?} is {got}, want {want}"));
            }
        }
        Ok(())
    }));

    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let failed: Vec<_> = run(&ClassifierConfig::default(), 0, Traces::Library)
            .into_iter()
            .filter_map(|r| r.failure)
            .collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn flipped_sign_is_caught() {
        let results = run(&ClassifierConfig::default(), 0, Traces::FlippedSign);
        assert!(results.iter().any(|r| r.failure.is_some()));
    }
}
