//! The rectangle construction behind non-local connectivity of the
//! deformation space at a Maskit cusp.
//!
//! A rectangle `Q` of width < 2 whose vertical and lower sides miss `M⁺`
//! and a point `z ∈ Q ∩ M⁺` at one third of its height give a rectangle
//! `R = 3z − Q` whose boundary misses `A_{σ_{3z}}` while `2z ∈ R` is a member.
//! Translates of `R` by 2 then carry pairwise disjoint bounded components.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{AMembership, ASlice, MembershipVerdict, PointClassifier, Verdict};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::raster::{components, rasterize_slice, CellBox, Raster, Window};

/// Closed rectangle with sides parallel to the axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Right,
    Upper,
    Left,
}

impl AxisRectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::InvalidRectangle(format!(
                "[{re_min}, {re_max}] x [{im_min}, {im_max}] is empty"
            )));
        }
        Ok(AxisRectangle {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains_interior(&self, z: Complex64) -> bool {
        self.re_min < z.re && z.re < self.re_max && self.im_min < z.im && z.im < self.im_max
    }

    pub fn translated(&self, dx: f64) -> Self {
        AxisRectangle {
            re_min: self.re_min + dx,
            re_max: self.re_max + dx,
            ..*self
        }
    }

    /// Points along one side, at most `spacing` apart, endpoints included.
    pub fn side_samples(&self, side: Side, spacing: f64) -> Vec<Complex64> {
        let (a, b) = match side {
            Side::Lower => ((self.re_min, self.im_min), (self.re_max, self.im_min)),
            Side::Right => ((self.re_max, self.im_min), (self.re_max, self.im_max)),
            Side::Upper => ((self.re_max, self.im_max), (self.re_min, self.im_max)),
            Side::Left => ((self.re_min, self.im_max), (self.re_min, self.im_min)),
        };
        let len = (b.0 - a.0).abs() + (b.1 - a.1).abs();
        let n = ((len / spacing).ceil() as usize).max(1);
        (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                Complex64::new(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
            })
            .collect()
    }
}

/// `R = {w : 3z − w ∈ Q}`.
pub fn build_r(q: &AxisRectangle, z: Complex64) -> AxisRectangle {
    AxisRectangle {
        re_min: 3.0 * z.re - q.re_max,
        re_max: 3.0 * z.re - q.re_min,
        im_min: 3.0 * z.im - q.im_max,
        im_max: 3.0 * z.im - q.im_min,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Real interval scanned for a valley of the boundary.
    pub strip: (f64, f64),
    pub profile_samples: usize,
    /// Height assumed to lie inside `M⁺` everywhere in the strip.
    pub y_max: f64,
    pub bisection_steps: usize,
    /// Distance between boundary samples.
    pub sample_spacing: f64,
    /// Width of the band along each side that must certify outside.
    pub margin: f64,
    /// Number of candidate rectangles tried.
    pub budget: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        let pitch = 2.0 / 1024.0;
        SearchParams {
            strip: (-2.0, 0.0),
            profile_samples: 81,
            y_max: 3.0,
            bisection_steps: 40,
            sample_spacing: pitch / 2.0,
            margin: 2.0 * pitch,
            budget: 64,
        }
    }
}

impl SearchParams {
    /// Spacing and margin tied to a raster with `pitch` between pixel centers.
    pub fn for_pitch(pitch: f64) -> Self {
        SearchParams {
            sample_spacing: pitch / 2.0,
            margin: 2.0 * pitch,
            ..SearchParams::default()
        }
    }
}

/// Lowest height at which `pred` switches on above `x`, by bisection.
fn threshold_height<C: PointClassifier>(
    classifier: &C,
    x: f64,
    params: &SearchParams,
    pred: impl Fn(Verdict) -> bool,
) -> f64 {
    let (mut lo, mut hi) = (0.0, params.y_max);
    if !pred(classifier.classify(Complex64::new(x, hi)).verdict) {
        return hi;
    }
    for _ in 0..params.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if pred(classifier.classify(Complex64::new(x, mid)).verdict) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Heights below which the classifier certifies points outside, sampled
/// across the search strip.
pub fn outside_profile<C: PointClassifier>(classifier: &C, params: &SearchParams) -> Vec<(f64, f64)> {
    let (a, b) = params.strip;
    let n = params.profile_samples.max(3);
    (0..n)
        .map(|k| {
            let x = a + (b - a) * k as f64 / (n - 1) as f64;
            (
                x,
                threshold_height(classifier, x, params, |v| v != Verdict::OutsideCertified),
            )
        })
        .collect()
}

fn band_is_outside<C: PointClassifier>(classifier: &C, q: &AxisRectangle, params: &SearchParams) -> bool {
    let inner = |side: Side, t: f64| -> AxisRectangle {
        let mut r = *q;
        match side {
            Side::Lower => r.im_min += t,
            Side::Left => r.re_min += t,
            Side::Right => r.re_max -= t,
            Side::Upper => r.im_max -= t,
        }
        r
    };
    [Side::Left, Side::Lower, Side::Right].iter().all(|&side| {
        [0.0, 0.5, 1.0].iter().all(|f| {
            inner(side, f * params.margin)
                .side_samples(side, params.sample_spacing)
                .into_iter()
                .all(|p| classifier.classify(p).verdict == Verdict::OutsideCertified)
        })
    })
}

/// Searches the strip for `Q` and `z`: vertical and lower sides of `Q`
/// certified outside `M⁺` (together with a band of width `margin`), `z` in
/// `M⁺` with twice as much room above it in `Q` as below, `3z` in `M⁺`.
pub fn find_rectangle<C: PointClassifier>(classifier: &C, params: &SearchParams) -> Result<(AxisRectangle, Complex64)> {
    let profile = outside_profile(classifier, params);
    let fail = |profile: Vec<(f64, f64)>| Err(Error::NoRectangle { profile });
    if params.budget == 0 {
        return fail(profile);
    }
    let interior = &profile[1..profile.len() - 1];
    let (x_v, h_min) = interior
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("profile has interior samples");
    let depth = interior.iter().map(|p| p.1).fold(f64::MIN, f64::max) - h_min;
    let floor = threshold_height(classifier, x_v, params, |v| v == Verdict::InsidePlus);
    if !(depth > 0.0) {
        return fail(profile);
    }

    let mut tried = 0;
    for a in [0.1, 0.2, 0.05, 0.3] {
        for b in [0.25, 0.2, 0.15, 0.1, 0.05] {
            let y = floor + a * depth;
            let d = b * depth;
            let (im_min, im_max) = (y - d, y + 2.0 * d);
            let high_enough = |p: &&(f64, f64)| p.1 >= im_max + params.margin;
            let left = interior.iter().filter(|p| p.0 < x_v).find(high_enough);
            let right = interior.iter().rev().filter(|p| p.0 > x_v).find(high_enough);
            let (Some(&(x_l, _)), Some(&(x_r, _))) = (left, right) else {
                continue;
            };
            tried += 1;
            if tried > params.budget {
                return fail(profile);
            }
            let Ok(q) = AxisRectangle::new(x_l, x_r, im_min, im_max) else {
                continue;
            };
            let z = Complex64::new(x_v, y);
            if q.width() >= 2.0
                || classifier.classify(z).verdict != Verdict::InsidePlus
                || classifier.classify(3.0 * z).verdict != Verdict::InsidePlus
            {
                continue;
            }
            if band_is_outside(classifier, &q, params) {
                return Ok((q, z));
            }
        }
    }
    fail(profile)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub side: Side,
    pub w: Complex64,
    pub verdict: MembershipVerdict,
}

/// Boundary evidence: counts, and every sample that failed to certify.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySummary {
    pub spacing: f64,
    pub total: usize,
    pub certified: usize,
    pub uncertified: Vec<BoundarySample>,
}

impl BoundarySummary {
    pub fn all_certified(&self) -> bool {
        self.total > 0 && self.certified == self.total
    }
}

fn certify_boundary<C: PointClassifier>(
    slice: &ASlice<C>,
    r: &AxisRectangle,
    spacing: f64,
    exec: Execution,
) -> BoundarySummary {
    let samples: Vec<(Side, Complex64)> = [Side::Lower, Side::Right, Side::Upper, Side::Left]
        .iter()
        .flat_map(|&side| r.side_samples(side, spacing).into_iter().map(move |w| (side, w)))
        .collect();
    let verdicts = exec.map(&samples, |&(_, w)| slice.membership(w).verdict);
    let uncertified: Vec<BoundarySample> = samples
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| **v != MembershipVerdict::NonMemberCertified)
        .map(|(&(side, w), &verdict)| BoundarySample { side, w, verdict })
        .collect();
    BoundarySummary {
        spacing,
        total: samples.len(),
        certified: samples.len() - uncertified.len(),
        uncertified,
    }
}

/// Components of `A_{σ_{3z}}` found in translates `R + 2j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslateReport {
    pub window: Window,
    pub k: usize,
    pub translates: Vec<TranslateDiagnostics>,
    /// Translates holding a bounded member component around `2z + 2j`.
    pub found: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslateDiagnostics {
    pub j: usize,
    pub rect: AxisRectangle,
    pub cells: CellBox,
    /// Component label of the cell containing `2z + 2j`, if it is a member.
    pub label: Option<usize>,
    pub component_cells: usize,
    pub bounded_inside: bool,
    pub boundary: BoundarySummary,
}

/// Pixels whose centers lie in `rect`.
fn covered_cells(win: &Window, rect: &AxisRectangle) -> Option<CellBox> {
    let (dx, dy) = win.pitch();
    let col_min = ((rect.re_min - win.re_min()) / dx - 0.5).ceil().max(0.0) as usize;
    let col_max = ((rect.re_max - win.re_min()) / dx - 0.5).floor();
    let row_min = ((win.im_max() - rect.im_max) / dy - 0.5).ceil().max(0.0) as usize;
    let row_max = ((win.im_max() - rect.im_min) / dy - 0.5).floor();
    if col_max < col_min as f64 || row_max < row_min as f64 {
        return None;
    }
    Some(CellBox {
        col_min,
        col_max: (col_max as usize).min(win.cols() - 1),
        row_min,
        row_max: (row_max as usize).min(win.rows() - 1),
    })
}

/// Rasterizes `A_{σ_z}` over the `k` translates `R + 2j` in one window with
/// horizontal pitch `2 / cols_per_period`, so translates line up cell for
/// cell, and checks that each holds a bounded component of its own.
pub fn components_near_infinity<C: PointClassifier>(
    slice: &ASlice<C>,
    r: &AxisRectangle,
    k: usize,
    cols_per_period: usize,
    rows: usize,
    exec: Execution,
) -> Result<(TranslateReport, Raster<MembershipVerdict>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if cols_per_period == 0 || rows == 0 {
        return Err(Error::InvalidParameter("raster resolution must be positive".into()));
    }
    if r.width() >= 2.0 {
        return Err(Error::InvalidRectangle(format!("width {} is not below 2", r.width())));
    }
    const PAD: usize = 3;
    let dx = 2.0 / cols_per_period as f64;
    let dy = r.height() / rows as f64;
    let span = r.width() + 2.0 * (k - 1) as f64;
    let cols = (span / dx).ceil() as usize + 2 * PAD;
    let re_min = r.re_min - PAD as f64 * dx;
    let im_max = r.im_max + PAD as f64 * dy;
    let win = Window::from_bounds(
        re_min,
        re_min + cols as f64 * dx,
        im_max - (rows + 2 * PAD) as f64 * dy,
        im_max,
        cols,
        rows + 2 * PAD,
    )?;
    let raster = rasterize_slice(slice, win, exec);
    let report = components(&raster);
    let spacing = 0.5 * dx.min(dy);
    let center = slice.base() * (2.0 / 3.0);

    let translates: Vec<TranslateDiagnostics> = (0..k)
        .map(|j| {
            let rect = r.translated(2.0 * j as f64);
            let cells = covered_cells(&win, &rect).expect("translate lies in the window");
            let label = win
                .pixel_of(center + 2.0 * j as f64)
                .and_then(|(c, row)| report.label_at(c, row));
            let comp = label.map(|l| &report.components[l]);
            let bounded_inside = comp.is_some_and(|c| !c.touches_edge && c.bbox.within(&cells));
            TranslateDiagnostics {
                j,
                rect,
                cells,
                label,
                component_cells: comp.map_or(0, |c| c.cells),
                bounded_inside,
                boundary: certify_boundary(slice, &rect, spacing, exec),
            }
        })
        .collect();
    let found = translates
        .iter()
        .filter(|t| t.bounded_inside && t.boundary.all_certified())
        .count();
    Ok((
        TranslateReport {
            window: win,
            k,
            translates,
            found,
            pass: found >= k,
        },
        raster,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub q: AxisRectangle,
    pub z: Complex64,
    pub r: AxisRectangle,
    /// Membership of `2z` in `A_{σ_{3z}}`.
    pub interior_verdict: AMembership,
    pub boundary_samples: BoundarySummary,
    pub components: Option<TranslateReport>,
    pub all_certified: bool,
    pub cfg: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl WitnessReport {
    /// Verified witness and, if requested, enough translated components.
    pub fn passed(&self) -> bool {
        self.all_certified && self.components.as_ref().is_none_or(|c| c.pass)
    }
}

/// Checks `2z ∈ A_{σ_{3z}}` and that sampled points of `∂R` are certified
/// non-members. Fails outright if `3z` is not certified in `M⁺`.
pub fn verify_witness<C: PointClassifier>(
    classifier: C,
    q: &AxisRectangle,
    z: Complex64,
    spacing: f64,
    exec: Execution,
) -> Result<(WitnessReport, ASlice<C>)> {
    if !q.contains_interior(z) {
        return Err(Error::InvalidRectangle(format!("{z} is not interior to Q")));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter("sample spacing must be positive".into()));
    }
    let cfg = serde_json::json!({ "classifier": classifier.describe(), "sample_spacing": spacing });
    let slice = ASlice::new(classifier, 3.0 * z)?;
    let r = build_r(q, z);
    let interior_verdict = slice.membership(2.0 * z);
    let boundary_samples = certify_boundary(&slice, &r, spacing, exec);
    let all_certified = interior_verdict.verdict == MembershipVerdict::Member && boundary_samples.all_certified();
    Ok((
        WitnessReport {
            q: *q,
            z,
            r,
            interior_verdict,
            boundary_samples,
            components: None,
            all_certified,
            cfg,
            timestamp: None,
        },
        slice,
    ))
}

/// Search, verification and translate count for one classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub search: SearchParams,
    pub k: usize,
    /// Raster columns per horizontal period 2.
    pub cols_per_period: usize,
    /// Raster rows across the height of `R`.
    pub rows: usize,
}

impl WitnessParams {
    pub fn new(k: usize, cols_per_period: usize, rows: usize) -> Self {
        WitnessParams {
            search: SearchParams::for_pitch(2.0 / cols_per_period.max(1) as f64),
            k,
            cols_per_period,
            rows,
        }
    }
}

pub struct WitnessRun {
    pub report: WitnessReport,
    pub raster: Raster<MembershipVerdict>,
}

/// Finds `(Q, z)`, verifies it, and counts components over `k` translates.
pub fn run_witness<C: PointClassifier>(classifier: C, params: &WitnessParams, exec: Execution) -> Result<WitnessRun> {
    if params.k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let (q, z) = find_rectangle(&classifier, &params.search)?;
    let (mut report, slice) = verify_witness(classifier, &q, z, params.search.sample_spacing, exec)?;
    let (translates, raster) =
        components_near_infinity(&slice, &report.r, params.k, params.cols_per_period, params.rows, exec)?;
    report.components = Some(translates);
    report.cfg = serde_json::json!({
        "classifier": slice.classifier().describe(),
        "search": params.search,
        "k": params.k,
        "cols_per_period": params.cols_per_period,
        "rows": params.rows,
    });
    Ok(WitnessRun { report, raster })
}
