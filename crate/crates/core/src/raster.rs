//! Verdict grids over rectangular windows of the plane, their connected
//! components, and PPM export.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_point, ASlice, ClassifierConfig, MembershipVerdict, PointClassifier, TraceTreeClassifier, Verdict,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::farey::{farey_sequence, FareySlope, TraceCache};

/// A `cols × rows` pixel grid laid over `[re_min, re_max] × [im_min, im_max]`.
/// Row 0 is the top (largest imaginary part).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    cols: usize,
    rows: usize,
}

impl Window {
    pub fn from_bounds(re_min: f64, re_max: f64, im_min: f64, im_max: f64, cols: usize, rows: usize) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite());
        if !finite || !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::InvalidWindow(format!(
                "bounds [{re_min}, {re_max}] x [{im_min}, {im_max}] are empty or not finite"
            )));
        }
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidWindow(format!("resolution {cols}x{rows} has no pixels")));
        }
        Ok(Window {
            re_min,
            re_max,
            im_min,
            im_max,
            cols,
            rows,
        })
    }

    pub fn from_center(center: Complex64, width: f64, height: f64, cols: usize, rows: usize) -> Result<Self> {
        Window::from_bounds(
            center.re - width / 2.0,
            center.re + width / 2.0,
            center.im - height / 2.0,
            center.im + height / 2.0,
            cols,
            rows,
        )
    }

    pub fn re_min(&self) -> f64 {
        self.re_min
    }

    pub fn re_max(&self) -> f64 {
        self.re_max
    }

    pub fn im_min(&self) -> f64 {
        self.im_min
    }

    pub fn im_max(&self) -> f64 {
        self.im_max
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new((self.re_min + self.re_max) / 2.0, (self.im_min + self.im_max) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn pitch(&self) -> (f64, f64) {
        (self.width() / self.cols as f64, self.height() / self.rows as f64)
    }

    /// Center of pixel `(col, row)`.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let (dx, dy) = self.pitch();
        Complex64::new(
            self.re_min + (col as f64 + 0.5) * dx,
            self.im_max - (row as f64 + 0.5) * dy,
        )
    }

    /// The pixel containing `z`, if any.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let (dx, dy) = self.pitch();
        let x = ((z.re - self.re_min) / dx).floor();
        let y = ((self.im_max - z.im) / dy).floor();
        if x >= 0.0 && y >= 0.0 && (x as usize) < self.cols && (y as usize) < self.rows {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }
}

/// Cell values that can be painted and tested for membership.
pub trait Cell: Copy + Send + Sync {
    fn rgb(&self) -> [u8; 3];
    /// Whether the cell counts towards a connected component.
    fn is_member(&self) -> bool;
    fn name(&self) -> &'static str;
}

impl Cell for Verdict {
    fn rgb(&self) -> [u8; 3] {
        match self {
            Verdict::InsidePlus => [0, 0, 0],
            Verdict::InsideMinus => [64, 64, 64],
            Verdict::OutsideCertified => [255, 255, 255],
            Verdict::Undetermined => [255, 0, 0],
        }
    }

    fn is_member(&self) -> bool {
        self.is_inside()
    }

    fn name(&self) -> &'static str {
        match self {
            Verdict::InsidePlus => "inside_plus",
            Verdict::InsideMinus => "inside_minus",
            Verdict::OutsideCertified => "outside",
            Verdict::Undetermined => "undetermined",
        }
    }
}

impl Cell for MembershipVerdict {
    fn rgb(&self) -> [u8; 3] {
        match self {
            MembershipVerdict::Member => [0, 0, 255],
            MembershipVerdict::NonMemberCertified => [255, 255, 255],
            MembershipVerdict::Undetermined => [255, 0, 0],
        }
    }

    fn is_member(&self) -> bool {
        *self == MembershipVerdict::Member
    }

    fn name(&self) -> &'static str {
        match self {
            MembershipVerdict::Member => "member",
            MembershipVerdict::NonMemberCertified => "non_member",
            MembershipVerdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RasterMeta {
    /// Classifier parameters the grid was computed with.
    pub params: serde_json::Value,
    /// Seconds since the Unix epoch, if stamped.
    pub generated_unix: Option<u64>,
}

/// Row-major grid of cells over a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster<T> {
    pub window: Window,
    pub cells: Vec<T>,
    pub meta: RasterMeta,
}

impl<T: Cell> Raster<T> {
    pub fn get(&self, col: usize, row: usize) -> T {
        self.cells[row * self.window.cols + col]
    }

    pub fn at(&self, z: Complex64) -> Option<T> {
        self.window.pixel_of(z).map(|(c, r)| self.get(c, r))
    }

    /// Number of cells per cell kind, keyed by kind name.
    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            *out.entry(c.name()).or_insert(0) += 1;
        }
        out
    }

    pub fn stamp_now(&mut self) {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.meta.generated_unix = Some(now);
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.window.cols, self.window.rows)?;
        let bytes: Vec<u8> = self.cells.iter().flat_map(|c| c.rgb()).collect();
        out.write_all(&bytes)?;
        out.flush()
    }

    pub fn ppm_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.cells.len() * 3 + 32);
        self.write_ppm(&mut buf).expect("writing to memory");
        buf
    }
}

fn sweep<T, F>(win: Window, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Complex64) -> T + Sync + Send,
{
    exec.map_rows(win.rows, |row| {
        (0..win.cols).map(|col| f(win.pixel_center(col, row))).collect()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Classifies every pixel center of `win`.
pub fn rasterize<C: PointClassifier>(win: Window, classifier: &C, exec: Execution) -> Raster<Verdict> {
    Raster {
        window: win,
        cells: sweep(win, exec, |z| classifier.classify(z).verdict),
        meta: RasterMeta {
            params: classifier.describe(),
            generated_unix: None,
        },
    }
}

/// The Maskit slice over `win` with the trace-tree classifier.
pub fn rasterize_maskit(win: Window, cfg: &ClassifierConfig, exec: Execution) -> Raster<Verdict> {
    rasterize(win, &TraceTreeClassifier { cfg: *cfg }, exec)
}

/// Membership in `A_{σ_z}` at every pixel center; cells with `Im w ≤ 0` are
/// non-members by definition.
pub fn rasterize_slice<C: PointClassifier>(
    slice: &ASlice<C>,
    win: Window,
    exec: Execution,
) -> Raster<MembershipVerdict> {
    let cells = sweep(win, exec, |w| {
        if w.im > 0.0 {
            slice.membership(w).verdict
        } else {
            MembershipVerdict::NonMemberCertified
        }
    });
    Raster {
        window: win,
        cells,
        meta: RasterMeta {
            params: serde_json::json!({
                "base": [slice.base().re, slice.base().im],
                "classifier": slice.classifier().describe(),
            }),
            generated_unix: None,
        },
    }
}

/// [`rasterize_slice`] with the trace-tree classifier; fails unless `z` is
/// certified in `M⁺`.
pub fn rasterize_a_slice(
    z: Complex64,
    win: Window,
    cfg: &ClassifierConfig,
    exec: Execution,
) -> Result<Raster<MembershipVerdict>> {
    let slice = ASlice::new(TraceTreeClassifier { cfg: *cfg }, z)?;
    Ok(rasterize_slice(&slice, win, exec))
}

/// Inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellBox {
    pub col_min: usize,
    pub col_max: usize,
    pub row_min: usize,
    pub row_max: usize,
}

impl CellBox {
    pub fn within(&self, other: &CellBox) -> bool {
        self.col_min >= other.col_min
            && self.col_max <= other.col_max
            && self.row_min >= other.row_min
            && self.row_max <= other.row_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: usize,
    pub cells: usize,
    pub bbox: CellBox,
    pub touches_edge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub components: Vec<Component>,
    #[serde(skip)]
    labels: Vec<Option<usize>>,
    #[serde(skip)]
    cols: usize,
}

impl ComponentReport {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn label_at(&self, col: usize, row: usize) -> Option<usize> {
        self.labels[row * self.cols + col]
    }

    pub fn bounded(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| !c.touches_edge)
    }
}

/// 4-connected components of member cells. Labels are assigned in row-major
/// order of each component's first cell.
pub fn components<T: Cell>(r: &Raster<T>) -> ComponentReport {
    let (cols, rows) = (r.window.cols, r.window.rows);
    let mut labels: Vec<Option<usize>> = vec![None; cols * rows];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..cols * rows {
        if labels[start].is_some() || !r.cells[start].is_member() {
            continue;
        }
        let label = comps.len();
        let mut comp = Component {
            label,
            cells: 0,
            bbox: CellBox {
                col_min: usize::MAX,
                col_max: 0,
                row_min: usize::MAX,
                row_max: 0,
            },
            touches_edge: false,
        };
        labels[start] = Some(label);
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (col, row) = (idx % cols, idx / cols);
            comp.cells += 1;
            comp.bbox.col_min = comp.bbox.col_min.min(col);
            comp.bbox.col_max = comp.bbox.col_max.max(col);
            comp.bbox.row_min = comp.bbox.row_min.min(row);
            comp.bbox.row_max = comp.bbox.row_max.max(row);
            if col == 0 || row == 0 || col + 1 == cols || row + 1 == rows {
                comp.touches_edge = true;
            }
            let mut push = |n: usize| {
                if labels[n].is_none() && r.cells[n].is_member() {
                    labels[n] = Some(label);
                    stack.push(n);
                }
            };
            if col > 0 {
                push(idx - 1);
            }
            if col + 1 < cols {
                push(idx + 1);
            }
            if row > 0 {
                push(idx - cols);
            }
            if row + 1 < rows {
                push(idx + cols);
            }
        }
        comps.push(comp);
    }
    ComponentReport {
        components: comps,
        labels,
        cols,
    }
}

/// Outcome of the symmetry checks at one sample point. `None` means the pair
/// of verdicts was not both determined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub z: Complex64,
    pub trace_identities: bool,
    pub translation: Option<bool>,
    pub reflection: Option<bool>,
}

impl SymmetryCheck {
    pub fn passed(&self) -> bool {
        self.trace_identities && self.translation != Some(false) && self.reflection != Some(false)
    }
}

/// Deepest denominator used by the trace-level part of [`check_symmetries`].
pub const SYMMETRY_DEPTH: i64 = 12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Trace reindexing identities and verdict symmetries `z ↦ z + 2`,
/// `z ↦ −z̄` at each sample.
pub fn check_symmetries(cfg: &ClassifierConfig, samples: &[Complex64]) -> Vec<SymmetryCheck> {
    let depth = cfg.q_max.clamp(1, SYMMETRY_DEPTH);
    let slopes = farey_sequence(depth);
    samples
        .iter()
        .map(|&z| {
            let mut at_z = TraceCache::new(z);
            let mut shifted = TraceCache::new(z + 2.0);
            let mut negated = TraceCache::new(-z);
            let mut conjugated = TraceCache::new(z.conj());
            let trace_identities = slopes.iter().all(|&s| {
                let t = at_z.trace(s).norm();
                let up = FareySlope::new(s.p() + s.q(), s.q()).expect("valid slope");
                let minus = s.negated();
                close(at_z.trace(up).norm(), shifted.trace(s).norm())
                    && close(negated.trace(minus).norm(), t)
                    && close(conjugated.trace(s).norm(), t)
            });
            let v = classify_point(z, cfg).verdict;
            let compare = |w: Complex64| {
                let u = classify_point(w, cfg).verdict;
                (v.is_determined() && u.is_determined()).then_some(u == v)
            };
            SymmetryCheck {
                z,
                trace_identities,
                translation: compare(z + 2.0),
                reflection: compare(-z.conj()),
            }
        })
        .collect()
}
