//! Maskit-slice membership by searching the set Ω of simple slopes whose
//! trace is short.
//!
//! Ω = {s : |t_s(z)| ≤ K} with `K = reject_threshold`. It always contains
//! `1/0`, whose trace is 2. For a point inside the slice Ω is finite and
//! no trace in it is real in `[-2, 2]` except the one at `1/0`. The search
//! grows Ω outward from `1/0`. Around each member `s` the Farey neighbours
//! form a sequence `r_k = r_0 + k·s` whose traces satisfy
//! `t_{k+1} = t_s t_k − t_{k−1}`, so `t_k = Aλ^k + Bλ^{−k}` with
//! `λ + 1/λ = t_s`. Once `|A||λ|^k − |B||λ|^{−k}` exceeds the scan bound
//! the rest of that direction is provably outside Ω.
//!
//! Outcomes:
//! * a member with real trace in `(-2, 2)` is elliptic, so the point is outside;
//! * a member with denominator above `q_max` means Ω escaped to depth, which
//!   is taken as outside;
//! * a finite Ω whose traces keep `inside_margin` away from `[-2, 2]` is inside;
//! * anything else is undetermined.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use std::collections::HashSet;

use crate::farey::{integer_slope_trace, FareySlope};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// A member of Ω with a larger denominator counts as escape.
    pub q_max: i64,
    /// Neighbour scans stop once the growth bound passes this modulus.
    pub grow_threshold: f64,
    /// The bound `K` defining Ω.
    pub reject_threshold: f64,
    /// Inside needs every member of Ω other than `1/0` to keep its trace at
    /// least this far from the segment `[-2, 2]`.
    pub inside_margin: f64,
    pub node_budget: usize,
    /// Probe distance used when picking boundary cusps.
    pub boundary_tol: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            q_max: 512,
            grow_threshold: 4.0,
            reject_threshold: 2.0,
            inside_margin: 1e-3,
            node_budget: 20_000,
            boundary_tol: 1e-3,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.q_max < 2 {
            return err("q_max must be at least 2");
        }
        if !(self.inside_margin > 0.0 && self.inside_margin < self.grow_threshold - 2.0) {
            return err("inside_margin must lie in (0, grow_threshold - 2)");
        }
        if self.node_budget == 0 {
            return err("node_budget must be positive");
        }
        if !(self.reject_threshold >= 2.0 && self.reject_threshold <= self.grow_threshold) {
            return err("reject_threshold must lie in [2, grow_threshold]");
        }
        if !(self.boundary_tol > 0.0) {
            return err("boundary_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    InsidePlus,
    InsideMinus,
    OutsideCertified,
    Undetermined,
}

impl Verdict {
    pub fn is_determined(&self) -> bool {
        !matches!(self, Verdict::Undetermined)
    }

    pub fn is_inside(&self) -> bool {
        matches!(self, Verdict::InsidePlus | Verdict::InsideMinus)
    }
}

/// Why a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// `z` is real.
    RealAxis,
    /// The witness slope has real trace in `(-2, 2)`.
    Elliptic,
    /// The witness slope lies in Ω beyond `q_max`.
    Escape,
    /// Ω was exhausted.
    FiniteOmega,
    /// Ω was exhausted but some trace came within `inside_margin` of `[-2, 2]`.
    Marginal,
    /// A neighbour scan reached its depth cap before its growth bound.
    Truncated,
    BudgetExhausted,
    /// Not the trace search (synthetic classifiers, non-finite input).
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Slope whose trace triggered rejection, with `|t| ≤ reject_threshold`.
    /// `None` for outside verdicts only when the point is real.
    pub witness: Option<FareySlope>,
    pub explored: usize,
    pub evidence: Evidence,
}

impl Classification {
    fn bare(verdict: Verdict, explored: usize, evidence: Evidence) -> Self {
        Classification {
            verdict,
            witness: None,
            explored,
            evidence,
        }
    }
}

/// Anything that can sort points of the plane into `M⁺`, `M⁻` and the rest.
pub trait PointClassifier: Sync {
    fn classify(&self, z: Complex64) -> Classification;

    /// Parameters echoed into report metadata.
    fn describe(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

impl<C: PointClassifier + ?Sized> PointClassifier for &C {
    fn classify(&self, z: Complex64) -> Classification {
        (**self).classify(z)
    }

    fn describe(&self) -> serde_json::Value {
        (**self).describe()
    }
}

/// The trace-tree classifier with a fixed configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceTreeClassifier {
    pub cfg: ClassifierConfig,
}

impl TraceTreeClassifier {
    pub fn new(cfg: ClassifierConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(TraceTreeClassifier { cfg })
    }
}

impl PointClassifier for TraceTreeClassifier {
    fn classify(&self, z: Complex64) -> Classification {
        classify_point(z, &self.cfg)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "classifier": "trace-tree", "params": self.cfg })
    }
}

/// Stand-in classifier whose `M⁺` is `{Im z > h(Re z)}` with
/// `h(x) = peak − dip·(1 − cos πx)`, mirrored into the lower half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClassifier {
    pub peak: f64,
    pub dip: f64,
    /// Points within this distance of the boundary curve are undetermined.
    pub fuzz: f64,
}

impl Default for SyntheticClassifier {
    fn default() -> Self {
        SyntheticClassifier {
            peak: 2.0,
            dip: 0.25,
            fuzz: 0.0,
        }
    }
}

impl SyntheticClassifier {
    pub fn boundary_height(&self, x: f64) -> f64 {
        self.peak - self.dip * (1.0 - (std::f64::consts::PI * x).cos())
    }
}

impl PointClassifier for SyntheticClassifier {
    fn classify(&self, z: Complex64) -> Classification {
        let h = self.boundary_height(z.re);
        let y = z.im.abs();
        let verdict = if z.im == 0.0 || y < h - self.fuzz {
            Verdict::OutsideCertified
        } else if y <= h + self.fuzz {
            Verdict::Undetermined
        } else if z.im > 0.0 {
            Verdict::InsidePlus
        } else {
            Verdict::InsideMinus
        };
        Classification::bare(verdict, 1, Evidence::External)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "classifier": "synthetic", "params": self })
    }
}

/// One slope visited by the search, with the modulus of its trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Visit {
    pub slope: FareySlope,
    pub modulus: f64,
}

/// Imaginary parts below this (relative to `|t|`) count as real.
const REAL_TOL: f64 = 1e-12;

type Vector = (i64, i64);

fn normalize(v: Vector) -> Vector {
    if v.1 < 0 || (v.1 == 0 && v.0 < 0) {
        (-v.0, -v.1)
    } else {
        v
    }
}

enum Stop {
    Outside(FareySlope, Evidence),
    Undetermined(Evidence),
}

/// A member of Ω waiting to be scanned, with two consecutive neighbours
/// `u` and `u + v` and their traces.
struct Pending {
    v: Vector,
    t_v: Complex64,
    u: Vector,
    t_u: Complex64,
    t_next: Complex64,
}

struct Search<'a> {
    cfg: &'a ClassifierConfig,
    /// Ω so far.
    members: HashSet<Vector>,
    stack: Vec<Pending>,
    explored: usize,
    marginal: bool,
    truncated: bool,
    log: Option<&'a mut Vec<Visit>>,
}

impl Search<'_> {
    /// Charges one evaluated trace against the budget.
    fn count(&mut self, v: Vector, t: Complex64) -> std::result::Result<(), Stop> {
        if self.explored >= self.cfg.node_budget {
            return Err(Stop::Undetermined(Evidence::BudgetExhausted));
        }
        self.explored += 1;
        if let Some(log) = self.log.as_deref_mut() {
            log.push(Visit {
                slope: slope_of(v),
                modulus: t.norm(),
            });
        }
        Ok(())
    }

    /// Adds `p.v` to Ω if its trace is short enough.
    fn offer(&mut self, p: Pending) -> std::result::Result<(), Stop> {
        let t = p.t_v;
        let key = normalize(p.v);
        // `!(a > b)` so that NaN traces join Ω and end up undetermined
        if !(t.norm() > self.cfg.reject_threshold) && self.members.insert(key) {
            let real = t.im.abs() <= REAL_TOL * t.norm().max(1.0);
            if real && t.re.abs() < 2.0 - self.cfg.inside_margin {
                return Err(Stop::Outside(slope_of(key), Evidence::Elliptic));
            }
            if !(segment_distance(t) >= self.cfg.inside_margin) {
                self.marginal = true;
            }
            if key.1 > self.cfg.q_max {
                return Err(Stop::Outside(slope_of(key), Evidence::Escape));
            }
            self.stack.push(p);
        }
        Ok(())
    }

    /// Walks the neighbours `u + k·v` of a member in both directions until the
    /// growth bound closes them.
    fn scan(&mut self, p: Pending) -> std::result::Result<(), Stop> {
        let Pending { v, t_v, u, t_u, t_next } = p;
        let disc = (t_v * t_v - 4.0).sqrt();
        let mut lambda = (t_v + disc) / 2.0;
        if lambda.norm() < 1.0 {
            lambda = lambda.inv();
        }
        // t_k = Aλ^k + Bλ^{−k}
        let a = (t_next - t_u / lambda) / (lambda - lambda.inv());
        let b = t_u - a;
        let growth = lambda.norm();
        let cap = 4 * self.cfg.q_max;
        for (dir, lead, tail) in [(1, a.norm(), b.norm()), (-1, b.norm(), a.norm())] {
            // t_{k+1} = t_v t_k − t_{k−1} in either direction
            let (mut prev, mut cur) = if dir == 1 {
                (t_v * t_u - t_next, t_u)
            } else {
                (t_next, t_u)
            };
            let step = (dir * v.0, dir * v.1);
            let mut w = u;
            let mut up = 1.0;
            let mut k = 0;
            loop {
                if lead * up - tail / up > self.cfg.grow_threshold {
                    break;
                }
                let key = normalize(w);
                if key.1 > cap {
                    self.truncated = true;
                    break;
                }
                let next = t_v * cur - prev;
                if key != (1, 0) {
                    // u and u + v were evaluated by whoever queued this member
                    if k > 1 || (k == 1 && dir == -1) {
                        self.count(key, cur)?;
                    }
                    self.offer(Pending {
                        v: w,
                        t_v: cur,
                        u: step,
                        t_u: t_v,
                        t_next: next,
                    })?;
                }
                (prev, cur) = (cur, next);
                w = (w.0 + step.0, w.1 + step.1);
                up *= growth;
                k += 1;
            }
        }
        Ok(())
    }
}

fn slope_of(v: Vector) -> FareySlope {
    FareySlope::from_vector(v.0, v.1).expect("nonzero Farey vector")
}

/// Distance from `t` to the real segment `[-2, 2]`.
fn segment_distance(t: Complex64) -> f64 {
    let dx = (t.re.abs() - 2.0).max(0.0);
    dx.hypot(t.im)
}

/// Classifies `z` as in `M⁺`, in `M⁻`, certified outside, or undetermined.
/// Pure in `(z, cfg)`.
pub fn classify_point(z: Complex64, cfg: &ClassifierConfig) -> Classification {
    search_omega(z, cfg, None)
}

/// As [`classify_point`], also recording every trace evaluated.
pub fn classify_point_logged(z: Complex64, cfg: &ClassifierConfig) -> (Classification, Vec<Visit>) {
    let mut log = Vec::new();
    let c = search_omega(z, cfg, Some(&mut log));
    (c, log)
}

fn search_omega(z: Complex64, cfg: &ClassifierConfig, log: Option<&mut Vec<Visit>>) -> Classification {
    if z.im == 0.0 {
        return Classification::bare(Verdict::OutsideCertified, 0, Evidence::RealAxis);
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Classification::bare(Verdict::Undetermined, 0, Evidence::External);
    }
    let mut search = Search {
        cfg,
        members: HashSet::from([(1, 0)]),
        stack: Vec::new(),
        explored: 0,
        marginal: false,
        truncated: false,
        log,
    };
    match run_search(&mut search, z) {
        Ok(()) => {}
        Err(Stop::Outside(s, evidence)) => {
            return Classification {
                verdict: Verdict::OutsideCertified,
                witness: Some(s),
                explored: search.explored,
                evidence,
            }
        }
        Err(Stop::Undetermined(evidence)) => {
            return Classification::bare(Verdict::Undetermined, search.explored, evidence)
        }
    }
    let (verdict, evidence) = if search.truncated {
        (Verdict::Undetermined, Evidence::Truncated)
    } else if search.marginal {
        (Verdict::Undetermined, Evidence::Marginal)
    } else if z.im > 0.0 {
        (Verdict::InsidePlus, Evidence::FiniteOmega)
    } else {
        (Verdict::InsideMinus, Evidence::FiniteOmega)
    };
    Classification::bare(verdict, search.explored, evidence)
}

fn run_search(search: &mut Search<'_>, z: Complex64) -> std::result::Result<(), Stop> {
    // Neighbours of 1/0 are the integers, with |t_{n/1}| = |z + 2n|.
    let k = search.cfg.reject_threshold;
    let lo = ((-z.re - k) / 2.0).floor() as i64 - 1;
    let hi = ((-z.re + k) / 2.0).ceil() as i64 + 1;
    for n in lo..=hi {
        let t = integer_slope_trace(z, n);
        search.count((n, 1), t)?;
        search.offer(Pending {
            v: (n, 1),
            t_v: t,
            u: (1, 0),
            t_u: Complex64::new(2.0, 0.0),
            t_next: integer_slope_trace(z, n + 1),
        })?;
    }
    // depth first, so an escaping Ω is caught early
    while let Some(p) = search.stack.pop() {
        search.scan(p)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MembershipVerdict {
    Member,
    NonMemberCertified,
    Undetermined,
}

/// Outcome of testing whether `σ_{z,w}` is discrete and faithful.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AMembership {
    pub verdict: MembershipVerdict,
    /// The unique candidate index with `Im(z − snw) > 0 > Im(z − s(n+1)w)`.
    pub n: Option<i64>,
    /// Verdicts at `z − snw` and `z − s(n+1)w`, when those were tested.
    pub sub_verdicts: Option<(Classification, Classification)>,
}

impl AMembership {
    fn excluded(n: Option<i64>) -> Self {
        AMembership {
            verdict: MembershipVerdict::NonMemberCertified,
            n,
            sub_verdicts: None,
        }
    }
}

/// The slice `A_{σ_z}` for a base point certified in `M⁺`.
#[derive(Clone, Copy, Debug)]
pub struct ASlice<C> {
    base: Complex64,
    classifier: C,
}

impl<C: PointClassifier> ASlice<C> {
    /// Fails unless `classifier` puts `base` in `M⁺`.
    pub fn new(classifier: C, base: Complex64) -> Result<Self> {
        if classifier.classify(base).verdict != Verdict::InsidePlus {
            return Err(Error::BaseNotInside(base));
        }
        Ok(ASlice { base, classifier })
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn classifier(&self) -> &C {
        &self.classifier
    }

    /// Membership of `σ_{z,w}` in the deformation space, with `z` the base.
    pub fn membership(&self, w: Complex64) -> AMembership {
        let z = self.base;
        if w.im == 0.0 {
            return AMembership::excluded(None);
        }
        let s = w.im.signum();
        let ratio = z.im / w.im.abs();
        let n = ratio.floor();
        if ratio == n {
            // z − s·n·w would be real
            return AMembership::excluded(Some(n as i64));
        }
        let upper = z - w * (s * n);
        let lower = z - w * (s * (n + 1.0));
        let cu = self.classifier.classify(upper);
        let cl = self.classifier.classify(lower);
        let verdict = match (cu.verdict, cl.verdict) {
            (Verdict::InsidePlus, Verdict::InsideMinus) => MembershipVerdict::Member,
            (Verdict::OutsideCertified, _) | (_, Verdict::OutsideCertified) => MembershipVerdict::NonMemberCertified,
            _ => MembershipVerdict::Undetermined,
        };
        AMembership {
            verdict,
            n: Some(n as i64),
            sub_verdicts: Some((cu, cl)),
        }
    }
}

/// Membership test for `σ_{z,w}` with the trace-tree classifier. Errors if
/// `z` is not certified in `M⁺`.
pub fn a_membership(z: Complex64, w: Complex64, cfg: &ClassifierConfig) -> Result<AMembership> {
    let slice = ASlice::new(TraceTreeClassifier { cfg: *cfg }, z)?;
    Ok(slice.membership(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::TraceCache;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn config_validation() {
        let cfg = ClassifierConfig::default();
        assert!(cfg.validate().is_ok());
        assert!(ClassifierConfig { q_max: 1, ..cfg }.validate().is_err());
        assert!(ClassifierConfig {
            inside_margin: 0.0,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(ClassifierConfig {
            inside_margin: 2.5,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(ClassifierConfig { node_budget: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn small_imaginary_rejected_by_seed() {
        let r = classify_point(c(0.0, 0.1), &ClassifierConfig::default());
        assert_eq!(r.verdict, Verdict::OutsideCertified);
        assert_eq!(r.witness, Some(FareySlope::ZERO));
    }

    #[test]
    fn real_axis_is_outside() {
        for x in [1.5, 0.0, -7.25] {
            let r = classify_point(c(x, 0.0), &ClassifierConfig::default());
            assert_eq!(r.verdict, Verdict::OutsideCertified);
            assert_eq!(r.witness, None);
        }
    }

    #[test]
    fn high_points_are_inside() {
        let cfg = ClassifierConfig::default();
        assert_eq!(classify_point(c(0.0, 4.0), &cfg).verdict, Verdict::InsidePlus);
        assert_eq!(classify_point(c(0.0, -4.0), &cfg).verdict, Verdict::InsideMinus);
        assert_eq!(classify_point(c(13.7, 2.5), &cfg).verdict, Verdict::InsidePlus);
    }

    #[test]
    fn witness_trace_is_small() {
        let cfg = ClassifierConfig::default();
        for z in [c(0.3, 1.5), c(-1.0, 1.7), c(0.9, 1.6), c(5.1, -1.2)] {
            let r = classify_point(z, &cfg);
            assert_eq!(r.verdict, Verdict::OutsideCertified, "{z}");
            let t = TraceCache::new(z).trace(r.witness.unwrap());
            assert!(t.norm() < cfg.reject_threshold + 1e-9);
        }
    }

    #[test]
    fn elliptic_and_escape_evidence() {
        let cfg = ClassifierConfig::default();
        // on the symmetry line the 1/2 trace is real
        let r = classify_point(c(-1.0, 1.72), &cfg);
        assert_eq!(r.evidence, Evidence::Elliptic);
        assert_eq!(r.witness, Some(FareySlope::new(1, 2).unwrap()));
        let r = classify_point(c(0.3, 0.5), &cfg);
        assert_eq!(r.evidence, Evidence::Escape);
        assert!(r.witness.unwrap().q() > cfg.q_max);
    }

    #[test]
    fn short_integer_trace_can_be_inside() {
        // |t_{0/1}| = |z| < 2, yet the point sits above the boundary
        let cfg = ClassifierConfig::default();
        let r = classify_point(c(-0.1, 1.99), &cfg);
        assert_eq!(r.verdict, Verdict::InsidePlus);
        assert_eq!(r.evidence, Evidence::FiniteOmega);
    }

    #[test]
    fn third_cusp_separates() {
        // the 1/3 cusp sits at about -0.5812 + 1.6939i
        let cfg = ClassifierConfig::default();
        assert_eq!(classify_point(c(-0.5812, 1.70), &cfg).verdict, Verdict::InsidePlus);
        assert_eq!(
            classify_point(c(-0.5812, 1.68), &cfg).verdict,
            Verdict::OutsideCertified
        );
    }

    #[test]
    fn budget_exhaustion_is_undetermined() {
        let cfg = ClassifierConfig {
            node_budget: 1,
            ..ClassifierConfig::default()
        };
        let r = classify_point(c(-1.0, 1.8), &cfg);
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert_eq!(r.evidence, Evidence::BudgetExhausted);
    }

    #[test]
    fn synthetic_boundary() {
        let syn = SyntheticClassifier::default();
        assert_eq!(syn.classify(c(0.0, 2.1)).verdict, Verdict::InsidePlus);
        assert_eq!(syn.classify(c(0.0, 1.9)).verdict, Verdict::OutsideCertified);
        assert_eq!(syn.classify(c(1.0, 1.6)).verdict, Verdict::InsidePlus);
        assert_eq!(syn.classify(c(1.0, -1.6)).verdict, Verdict::InsideMinus);
        assert_eq!(syn.classify(c(1.0, 1.4)).verdict, Verdict::OutsideCertified);
    }

    #[test]
    fn membership_fixtures() {
        let cfg = ClassifierConfig::default();
        let m = a_membership(c(0.0, 4.0), c(0.0, 8.0), &cfg).unwrap();
        assert_eq!(m.verdict, MembershipVerdict::Member);
        assert_eq!(m.n, Some(0));
        let (up, down) = m.sub_verdicts.unwrap();
        assert_eq!(up.verdict, Verdict::InsidePlus);
        assert_eq!(down.verdict, Verdict::InsideMinus);

        let real = a_membership(c(0.0, 4.0), c(5.0, 0.0), &cfg).unwrap();
        assert_eq!(real.verdict, MembershipVerdict::NonMemberCertified);

        let integral = a_membership(c(0.0, 4.0), c(0.0, 4.0), &cfg).unwrap();
        assert_eq!(integral.verdict, MembershipVerdict::NonMemberCertified);
        assert!(integral.sub_verdicts.is_none());
    }

    #[test]
    fn membership_requires_inside_base() {
        let cfg = ClassifierConfig::default();
        assert!(matches!(
            a_membership(c(1.0, 0.0), c(0.0, 1.0), &cfg),
            Err(Error::BaseNotInside(_))
        ));
    }

    #[test]
    fn negative_imaginary_extension() {
        let cfg = ClassifierConfig::default();
        // s = -1: z + nw and z + (n+1)w
        let m = a_membership(c(0.0, 4.0), c(0.0, -8.0), &cfg).unwrap();
        assert_eq!(m.verdict, MembershipVerdict::Member);
        assert_eq!(m.n, Some(0));
    }
}
