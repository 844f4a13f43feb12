//! `maskit`: render the Maskit slice and its extension slices, tabulate
//! cusps, and run the bounded-component witness.

mod config;
mod selftest;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maskit_core::classify::{ASlice, ClassifierConfig, PointClassifier, SyntheticClassifier, TraceTreeClassifier};
use maskit_core::cusp::{cusp_point, slope_roots, RootSolverConfig};
use maskit_core::exec::Execution;
use maskit_core::farey::farey_sequence;
use maskit_core::raster::{components, rasterize_maskit, rasterize_slice, Raster, Window};
use maskit_core::witness::{run_witness, WitnessParams};
use maskit_core::{normalized_length, Complex64, Error};
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_WITNESS: u8 = 4;
const EXIT_SELFTEST: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "maskit",
    version,
    about = "Maskit slice renderer and non-local connectivity witness"
)]
#[command(after_help = "Exit codes: 0 ok, 1 usage, 2 I/O, 3 precondition, 4 witness failure, 5 selftest failure.")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// key = value file; keys are the long flag names, flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Plane window [render-maskit: -3 3 0 3, a-slice: -4 4 0 10]
    #[arg(long, global = true, num_args = 4, allow_negative_numbers = true,
          value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"])]
    window: Option<Vec<f64>>,
    /// Raster size WxH [512x512; witness: columns per period 2 x rows across R, 1024x1024]
    #[arg(long, global = true, value_name = "WxH")]
    res: Option<String>,
    /// Farey depth cap of the classifier [512]; for `cusps`, the largest denominator [8]
    #[arg(long, global = true, value_name = "Q")]
    qmax: Option<i64>,
    /// Trace-tree node budget per point [20000]
    #[arg(long, global = true, value_name = "N")]
    budget: Option<usize>,
    /// Output path [maskit.ppm, a_slice.ppm, witness.json; cusps: stdout]
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads [all cores]
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Seed for the root solver and sampled suites [0]
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Use the analytic stand-in classifier
    #[arg(long, global = true)]
    synthetic: bool,
    /// Leave timestamps out of JSON output
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Number of translates for `witness` [5]
    #[arg(short = 'k', global = true, value_name = "K")]
    k: Option<usize>,
    /// Base point of `a-slice` [0 4]
    #[arg(long, global = true, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    z: Option<Vec<f64>>,
    /// `cusps`: list every root of t = ±2 instead of the boundary cusps
    #[arg(long, global = true)]
    all_roots: bool,
    /// Classifier acceptance margin δ [1e-3]
    #[arg(long, global = true)]
    inside_margin: Option<f64>,
    /// Classifier rejection threshold [2]
    #[arg(long, global = true)]
    reject_threshold: Option<f64>,
    /// Classifier integer-fan growth threshold [4]
    #[arg(long, global = true)]
    grow_threshold: Option<f64>,
    /// Cusp boundary probe distance ε [1e-3]
    #[arg(long, global = true)]
    boundary_tol: Option<f64>,
    /// Self-test a trace recursion with a flipped sign (must fail)
    #[arg(long, global = true, hide = true)]
    mutate_sign: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the Maskit slice M as a PPM image
    RenderMaskit,
    /// CSV of cusp positions p,q,re,im,residual for 0/1 and slopes in (0, 1]
    Cusps,
    /// Render A for the base point --z and report its components
    ASlice,
    /// Find Q, z, R, verify them, and count components over k translates
    Witness,
    /// Run the invariant suites
    Selftest,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

fn core_failure(e: Error) -> Failure {
    let code = match &e {
        Error::Io(_) => EXIT_IO,
        Error::InvalidConfig(_) | Error::InvalidWindow(_) | Error::InvalidParameter(_) | Error::InvalidSlope { .. } => {
            EXIT_USAGE
        }
        Error::NoRectangle { .. } => EXIT_WITNESS,
        _ => EXIT_PRECONDITION,
    };
    Failure::new(code, e.to_string())
}

/// Flags merged over the config file.
#[derive(Debug, Serialize)]
struct Settings {
    window: Option<[f64; 4]>,
    res: Option<(usize, usize)>,
    qmax: Option<i64>,
    out: Option<PathBuf>,
    #[serde(skip)]
    workers: Option<usize>,
    seed: u64,
    synthetic: bool,
    no_timestamp: bool,
    k: usize,
    z: [f64; 2],
    all_roots: bool,
    classifier: ClassifierConfig,
    #[serde(skip)]
    mutate_sign: bool,
}

fn resolve(opts: Opts) -> Result<Settings, Failure> {
    let file = match &opts.config {
        Some(path) => config::load(path).map_err(|e| match e {
            config::ConfigError::Io(e) => Failure::new(EXIT_IO, format!("{}: {e}", path.display())),
            config::ConfigError::Syntax(e) => Failure::usage(format!("{}: {e}", path.display())),
        })?,
        None => BTreeMap::new(),
    };
    fn bad(key: &'static str) -> impl Fn(String) -> Failure {
        move |e| Failure::usage(format!("config key '{key}': {e}"))
    }
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure> {
        v.parse()
            .map_err(|_| Failure::usage(format!("config key '{key}': '{v}' is not a valid number")))
    }
    let get = |key: &str| file.get(key).map(String::as_str);

    let window = match opts.window {
        Some(v) => Some([v[0], v[1], v[2], v[3]]),
        None => get("window")
            .map(config::parse_floats::<4>)
            .transpose()
            .map_err(bad("window"))?,
    };
    let res = match opts.res.as_deref().or(get("res")) {
        Some(s) => Some(config::parse_res(s).map_err(Failure::usage)?),
        None => None,
    };
    let z = match opts.z {
        Some(v) => [v[0], v[1]],
        None => get("z")
            .map(config::parse_floats::<2>)
            .transpose()
            .map_err(bad("z"))?
            .unwrap_or([0.0, 4.0]),
    };
    let flag = |set: bool, key: &'static str| -> Result<bool, Failure> {
        if set {
            return Ok(true);
        }
        get(key)
            .map(config::parse_bool)
            .transpose()
            .map_err(bad(key))
            .map(|b| b.unwrap_or(false))
    };
    macro_rules! pick {
        ($field:expr, $key:literal) => {
            match $field {
                Some(v) => Some(v),
                None => get($key).map(|v| num($key, v)).transpose()?,
            }
        };
    }

    let mut classifier = ClassifierConfig::default();
    let qmax: Option<i64> = pick!(opts.qmax, "qmax");
    if let Some(b) = pick!(opts.budget, "budget") {
        classifier.node_budget = b;
    }
    if let Some(v) = pick!(opts.inside_margin, "inside-margin") {
        classifier.inside_margin = v;
    }
    if let Some(v) = pick!(opts.reject_threshold, "reject-threshold") {
        classifier.reject_threshold = v;
    }
    if let Some(v) = pick!(opts.grow_threshold, "grow-threshold") {
        classifier.grow_threshold = v;
    }
    if let Some(v) = pick!(opts.boundary_tol, "boundary-tol") {
        classifier.boundary_tol = v;
    }
    let k = pick!(opts.k, "k").unwrap_or(5);
    if k == 0 {
        return Err(Failure::usage("-k must be at least 1"));
    }
    let workers: Option<usize> = pick!(opts.workers, "workers");
    if workers == Some(0) {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    Ok(Settings {
        window,
        res,
        qmax,
        out: opts.out.or_else(|| get("out").map(PathBuf::from)),
        workers,
        seed: pick!(opts.seed, "seed").unwrap_or(0),
        synthetic: flag(opts.synthetic, "synthetic")?,
        no_timestamp: flag(opts.no_timestamp, "no-timestamp")?,
        k,
        z,
        all_roots: flag(opts.all_roots, "all-roots")?,
        classifier,
        mutate_sign: opts.mutate_sign,
    })
}

impl Settings {
    /// Classifier config with `--qmax` applied as the Farey depth.
    fn classifier_cfg(&self) -> Result<ClassifierConfig, Failure> {
        let mut cfg = self.classifier;
        if let Some(q) = self.qmax {
            cfg.q_max = q;
        }
        cfg.validate().map_err(core_failure)?;
        Ok(cfg)
    }

    fn window(&self, default: [f64; 4], res: (usize, usize)) -> Result<Window, Failure> {
        let [a, b, c, d] = self.window.unwrap_or(default);
        Window::from_bounds(a, b, c, d, res.0, res.1).map_err(core_failure)
    }

    fn timestamp(&self) -> Option<u64> {
        if self.no_timestamp {
            return None;
        }
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    }
}

fn exec() -> Execution {
    Execution::default()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = create(path)?;
    f.write_all(bytes)
        .and_then(|_| f.flush())
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn counts_line<T: maskit_core::raster::Cell>(r: &Raster<T>) -> String {
    r.counts()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn render_maskit(s: &Settings) -> Result<(), Failure> {
    let cfg = s.classifier_cfg()?;
    let win = s.window([-3.0, 3.0, 0.0, 3.0], s.res.unwrap_or((512, 512)))?;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("maskit.ppm"));
    let raster = if s.synthetic {
        maskit_core::raster::rasterize(win, &SyntheticClassifier::default(), exec())
    } else {
        rasterize_maskit(win, &cfg, exec())
    };
    write_bytes(&out, &raster.ppm_bytes())?;
    println!("{}", counts_line(&raster));
    Ok(())
}

fn cusps(s: &Settings) -> Result<(), Failure> {
    let cfg = s.classifier_cfg().map(|mut c| {
        c.q_max = ClassifierConfig::default().q_max;
        c
    })?;
    let max_q = s.qmax.unwrap_or(8);
    if !(1..=maskit_core::poly::MAX_SYMBOLIC_Q).contains(&max_q) {
        return Err(Failure::new(
            EXIT_PRECONDITION,
            format!("--qmax for cusps must lie in 1..={}", maskit_core::poly::MAX_SYMBOLIC_Q),
        ));
    }
    let solver = RootSolverConfig {
        seed: s.seed,
        ..RootSolverConfig::default()
    };
    let slopes = farey_sequence(max_q);
    let mut csv = String::new();
    let mut flagged = 0;
    if s.all_roots {
        csv.push_str("p,q,target,re,im\n");
        for slope in &slopes {
            for target in [2.0, -2.0] {
                match slope_roots(*slope, target, &solver) {
                    Ok(roots) => {
                        for r in roots {
                            csv.push_str(&format!(
                                "{},{},{target:?},{:?},{:?}\n",
                                slope.p(),
                                slope.q(),
                                r.re,
                                r.im
                            ));
                        }
                    }
                    Err(e) => {
                        flagged += 1;
                        eprintln!("{slope} t = {target}: {e}");
                        csv.push_str(&format!("{},{},{target:?},NaN,NaN\n", slope.p(), slope.q()));
                    }
                }
            }
        }
    } else {
        csv.push_str("p,q,re,im,residual\n");
        for slope in &slopes {
            match cusp_point(*slope, &cfg, &solver) {
                Ok(c) => {
                    if c.ambiguous {
                        flagged += 1;
                        eprintln!("{slope}: several roots pass the boundary probe, kept the highest");
                    }
                    csv.push_str(&format!(
                        "{},{},{:?},{:?},{:e}\n",
                        slope.p(),
                        slope.q(),
                        c.z.re,
                        c.z.im,
                        c.residual
                    ));
                }
                Err(e) => {
                    flagged += 1;
                    eprintln!("{slope}: {e}");
                    csv.push_str(&format!("{},{},NaN,NaN,NaN\n", slope.p(), slope.q()));
                }
            }
        }
    }
    match &s.out {
        Some(path) => write_bytes(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if flagged > 0 {
        eprintln!("{flagged} row(s) flagged");
    }
    Ok(())
}

#[derive(Serialize)]
struct ComponentEntry {
    label: usize,
    cells: usize,
    bbox: maskit_core::raster::CellBox,
    touches_edge: bool,
    /// Center of the bounding box in the w-plane.
    center: Complex64,
    normalized_length: Option<f64>,
}

#[derive(Serialize)]
struct SliceReport {
    z: Complex64,
    window: Window,
    counts: BTreeMap<&'static str, usize>,
    components: Vec<ComponentEntry>,
    cfg: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn slice_report<C: PointClassifier>(s: &Settings, slice: &ASlice<C>, win: Window) -> Result<(), Failure> {
    let raster = rasterize_slice(slice, win, exec());
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("a_slice.ppm"));
    write_bytes(&out, &raster.ppm_bytes())?;
    let report = components(&raster);
    let entries = report
        .components
        .iter()
        .map(|c| {
            let a = win.pixel_center(c.bbox.col_min, c.bbox.row_max);
            let b = win.pixel_center(c.bbox.col_max, c.bbox.row_min);
            let center = (a + b) / 2.0;
            ComponentEntry {
                label: c.label,
                cells: c.cells,
                bbox: c.bbox,
                touches_edge: c.touches_edge,
                center,
                normalized_length: normalized_length(center).ok(),
            }
        })
        .collect();
    let json = SliceReport {
        z: slice.base(),
        window: win,
        counts: raster.counts(),
        components: entries,
        cfg: serde_json::json!({ "classifier": raster.meta.params, "settings": s }),
        timestamp: s.timestamp(),
    };
    write_json(&out.with_extension("json"), &json)?;
    println!("{} components={}", counts_line(&raster), report.len());
    Ok(())
}

fn a_slice(s: &Settings) -> Result<(), Failure> {
    let cfg = s.classifier_cfg()?;
    let win = s.window([-4.0, 4.0, 0.0, 10.0], s.res.unwrap_or((512, 640)))?;
    let z = Complex64::new(s.z[0], s.z[1]);
    if s.synthetic {
        let slice = ASlice::new(SyntheticClassifier::default(), z).map_err(core_failure)?;
        slice_report(s, &slice, win)
    } else {
        let slice = ASlice::new(TraceTreeClassifier { cfg }, z).map_err(core_failure)?;
        slice_report(s, &slice, win)
    }
}

fn witness(s: &Settings) -> Result<(), Failure> {
    let cfg = s.classifier_cfg()?;
    let (cols, rows) = s.res.unwrap_or((1024, 1024));
    let params = WitnessParams::new(s.k, cols, rows);
    let run = if s.synthetic {
        run_witness(SyntheticClassifier::default(), &params, exec())
    } else {
        run_witness(TraceTreeClassifier { cfg }, &params, exec())
    };
    let mut run = match run {
        Ok(run) => run,
        Err(Error::NoRectangle { profile }) => {
            eprintln!("no rectangle found; outside-certified heights across the strip:");
            for (x, h) in profile {
                eprintln!("  {x:.4} {h:.6}");
            }
            return Err(Failure::new(EXIT_WITNESS, "witness search failed"));
        }
        Err(e @ Error::BaseNotInside(_)) => return Err(Failure::new(EXIT_WITNESS, e.to_string())),
        Err(e) => return Err(core_failure(e)),
    };
    run.report.timestamp = s.timestamp();
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("witness.json"));
    write_json(&out, &run.report)?;
    write_bytes(&out.with_extension("ppm"), &run.raster.ppm_bytes())?;

    let r = &run.report;
    println!(
        "Q = [{}, {}] x [{}, {}]",
        r.q.re_min, r.q.re_max, r.q.im_min, r.q.im_max
    );
    println!("z = {}", r.z);
    println!(
        "R = [{}, {}] x [{}, {}]",
        r.r.re_min, r.r.re_max, r.r.im_min, r.r.im_max
    );
    println!(
        "2z: {:?}; boundary of R: {}/{} certified",
        r.interior_verdict.verdict, r.boundary_samples.certified, r.boundary_samples.total
    );
    if let Some(c) = &r.components {
        for t in &c.translates {
            println!(
                "translate {}: component {:?}, {} cells, bounded {}, boundary {}/{}",
                t.j, t.label, t.component_cells, t.bounded_inside, t.boundary.certified, t.boundary.total
            );
        }
        println!("components {} of {}", c.found, c.k);
    }
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_WITNESS, "witness not certified"))
    }
}

fn selftest_cmd(s: &Settings) -> Result<(), Failure> {
    let cfg = s.classifier_cfg()?;
    let traces = if s.mutate_sign {
        selftest::Traces::FlippedSign
    } else {
        selftest::Traces::Library
    };
    let results = selftest::run(&cfg, s.seed, traces);
    let mut failed = 0;
    for r in &results {
        match &r.failure {
            None => println!("PASS {}", r.name),
            Some(msg) => {
                failed += 1;
                println!("FAIL {}: {msg}", r.name);
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::new(EXIT_SELFTEST, format!("{failed} suite(s) failed")))
    }
}

fn dispatch(cmd: &Command, s: &Settings) -> Result<(), Failure> {
    match cmd {
        Command::RenderMaskit => render_maskit(s),
        Command::Cusps => cusps(s),
        Command::ASlice => a_slice(s),
        Command::Witness => witness(s),
        Command::Selftest => selftest_cmd(s),
    }
}

#[cfg(feature = "parallel")]
fn in_pool(workers: Option<usize>, f: impl FnOnce() -> Result<(), Failure> + Send) -> Result<(), Failure> {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::usage(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool(_workers: Option<usize>, f: impl FnOnce() -> Result<(), Failure> + Send) -> Result<(), Failure> {
    f()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = resolve(cli.opts).and_then(|s| in_pool(s.workers, || dispatch(&cli.cmd, &s)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("maskit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
