//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Criteria 1, 6 and 7 go through the `maskit` binary with `--workers 8`;
//! criterion 8 repeats every binary run with `--workers 1` and compares the
//! artifacts byte for byte.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use maskit_core::classify::{a_membership, classify_point, ClassifierConfig, MembershipVerdict};
use maskit_core::exec::Execution;
use maskit_core::raster::{rasterize_maskit, Window};
use maskit_core::{exact_word_trace, make_sigma_z, normalized_length, slope_word, Complex64, FareySlope, TraceCache};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

type Check = Result<String, String>;

struct Runs {
    dir: TempDir,
    /// Binary invocations with the files they write.
    log: Vec<(Vec<&'static str>, Vec<&'static str>, Output)>,
}

impl Runs {
    fn run(&mut self, args: &[&'static str], files: &[&'static str]) -> Output {
        let out = maskit(self.dir.path(), args, 8);
        self.log.push((args.to_vec(), files.to_vec(), out.clone()));
        out
    }

    fn read(&self, name: &str) -> Result<Vec<u8>, String> {
        std::fs::read(self.dir.path().join(name)).map_err(|e| format!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Result<Value, String> {
        serde_json::from_slice(&self.read(name)?).map_err(|e| format!("{name}: {e}"))
    }
}

fn maskit(dir: &Path, args: &[&str], workers: usize) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskit"))
        .current_dir(dir)
        .args(args)
        .args(["--workers", &workers.to_string()])
        .output()
        .expect("spawn maskit")
}

fn exited_ok(out: &Output) -> Result<(), String> {
    match out.status.code() {
        Some(0) => Ok(()),
        code => Err(format!(
            "exit {code:?}: {}",
            String::from_utf8_lossy(&out.stderr).lines().last().unwrap_or("")
        )),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-4.0..=4.0), rng.gen_range(-4.0..=4.0)))
        .collect()
}

/// Every reduced `p/q` with `1 ≤ q ≤ q_max` and `|p| ≤ 2q`, and `1/0`.
fn slopes(q_max: i64) -> Vec<FareySlope> {
    let mut out = vec![FareySlope::INFINITY];
    for q in 1..=q_max {
        out.extend((-2 * q..=2 * q).filter_map(|p| FareySlope::new(p, q).ok()));
    }
    out
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn parse_csv(text: &[u8]) -> Vec<Vec<String>> {
    String::from_utf8_lossy(text)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

fn c1_cusps(runs: &mut Runs) -> Check {
    let out = runs.run(&["cusps", "--qmax", "2", "--out", "cusps.csv"], &["cusps.csv"]);
    exited_ok(&out)?;
    let rows = parse_csv(&runs.read("cusps.csv")?);
    let r3 = 3f64.sqrt();
    let mut worst = 0f64;
    for (p, q, want) in [(0, 1, Complex64::new(0.0, 2.0)), (1, 2, Complex64::new(-1.0, r3))] {
        let row = rows
            .iter()
            .find(|r| r[0] == p.to_string() && r[1] == q.to_string())
            .ok_or(format!("no row for {p}/{q}"))?;
        let z = Complex64::new(num(&row[2]), num(&row[3]));
        ensure((z - want).norm() < 1e-9, || format!("{p}/{q} cusp at {z}, want {want}"))?;
        let t = exact_word_trace(z, &slope_word(FareySlope::new(p, q).unwrap()));
        let res = (t * t - 4.0).norm();
        ensure(res < 1e-9 && num(&row[4]) < 1e-9, || {
            format!("{p}/{q}: |t² − 4| = {res:e}")
        })?;
        worst = worst.max(res);
    }

    let out = runs.run(
        &["cusps", "--qmax", "2", "--all-roots", "--out", "roots.csv"],
        &["roots.csv"],
    );
    exited_ok(&out)?;
    let roots: Vec<Complex64> = parse_csv(&runs.read("roots.csv")?)
        .iter()
        .filter(|r| r[0] == "1" && r[1] == "2")
        .map(|r| Complex64::new(num(&r[3]), num(&r[4])))
        .collect();
    let want = [(0.0, 0.0), (-2.0, 0.0), (-1.0, r3), (-1.0, -r3)].map(|(a, b)| Complex64::new(a, b));
    ensure(roots.len() == 4, || format!("{} roots for 1/2", roots.len()))?;
    for w in want {
        ensure(roots.iter().any(|r| (r - w).norm() < 1e-9), || {
            format!("1/2 roots {roots:?} miss {w}")
        })?;
    }
    Ok(format!(
        "2i and −1+i√3, max |t²−4| = {worst:.1e}; 1/2 roots = {{0, −2, −1±i√3}}"
    ))
}

fn c2_commutator() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0f64;
    for z in points(&mut rng, 1000) {
        let rep = make_sigma_z(z);
        let t = rep.a.commutator(&rep.b).trace();
        let exact = exact_word_trace(z, "abAB");
        worst = worst.max((t + 2.0).norm());
        ensure((t + 2.0).norm() < 1e-10 && (exact + 2.0).norm() < 1e-10, || {
            format!("tr[a,b] = {t} (exact {exact}) at {z}")
        })?;
    }
    Ok(format!("1000 points, max |tr + 2| = {worst:.1e}"))
}

fn c3_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let slopes = slopes(20);
    let words: Vec<String> = slopes.iter().map(|s| slope_word(*s)).collect();
    let mut worst = 0f64;
    for z in points(&mut rng, 100) {
        let mut cache = TraceCache::new(z);
        for (s, word) in slopes.iter().zip(&words) {
            let t = cache.trace(*s);
            let m = exact_word_trace(z, word);
            let err = (t - m).norm() / m.norm().max(1.0);
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("t_{s}({z}) = {t}, word matrix {m}"))?;
        }
    }
    Ok(format!(
        "{} slopes x 100 points, max relative error {worst:.1e}",
        slopes.len()
    ))
}

fn c4_symmetry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for z in points(&mut rng, 100) {
        let (mut at, mut up, mut neg, mut conj) = (
            TraceCache::new(z),
            TraceCache::new(z + 2.0),
            TraceCache::new(-z),
            TraceCache::new(z.conj()),
        );
        for s in slopes(20) {
            if s.q() == 0 {
                continue;
            }
            let t = at.trace(s).norm();
            ensure(
                rel_close(at.trace(s.shifted(1)).norm(), up.trace(s).norm(), 1e-9),
                || format!("translation fails for {s} at {z}"),
            )?;
            ensure(rel_close(neg.trace(s.negated()).norm(), t, 1e-9), || {
                format!("negation fails for {s} at {z}")
            })?;
            ensure(rel_close(conj.trace(s).norm(), t, 1e-9), || {
                format!("conjugation fails for {s} at {z}")
            })?;
        }
    }

    let cfg = ClassifierConfig::default();
    let win = Window::from_bounds(-3.0, 3.0, 0.0, 3.0, 64, 64).map_err(|e| e.to_string())?;
    let base = rasterize_maskit(win, &cfg, Execution::default());
    let (mut compared, mut skipped) = (0, 0);
    for row in 0..64 {
        for col in 0..64 {
            let z = win.pixel_center(col, row);
            let v = base.get(col, row);
            for w in [z + 2.0, -z.conj()] {
                let u = classify_point(w, &cfg).verdict;
                if !(v.is_determined() && u.is_determined()) {
                    skipped += 1;
                    continue;
                }
                compared += 1;
                ensure(u == v, || format!("{z}: {v:?}, {w}: {u:?}"))?;
            }
        }
    }
    Ok(format!(
        "identities to q = 20 at 100 points; {compared} verdict pairs equal, {skipped} undetermined"
    ))
}

fn c5_membership() -> Check {
    let cfg = ClassifierConfig::default();
    let z = Complex64::new(0.0, 4.0);
    let m = a_membership(z, Complex64::new(0.0, 8.0), &cfg).map_err(|e| e.to_string())?;
    ensure(m.verdict == MembershipVerdict::Member && m.n == Some(0), || {
        format!("(4i, 8i): {m:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases = [z, Complex64::new(-1.0, 2.5), Complex64::new(0.5, 3.0)];
    for base in bases {
        for _ in 0..20 {
            let w = Complex64::new(rng.gen_range(-10.0..10.0), 0.0);
            let v = a_membership(base, w, &cfg).map_err(|e| e.to_string())?.verdict;
            ensure(v == MembershipVerdict::NonMemberCertified, || {
                format!("({base}, {w}): {v:?}")
            })?;
        }
    }

    let (mut n, mut tries) = (0, 0);
    while n < 128 {
        tries += 1;
        ensure(tries < 10_000, || format!("only {n} determined pairs"))?;
        let w = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(0.05..10.0));
        let a = a_membership(z, w, &cfg).map_err(|e| e.to_string())?.verdict;
        let b = a_membership(z, w + 2.0, &cfg).map_err(|e| e.to_string())?.verdict;
        if a == MembershipVerdict::Undetermined || b == MembershipVerdict::Undetermined {
            continue;
        }
        ensure(a == b, || format!("w = {w}: {a:?}, w + 2: {b:?}"))?;
        n += 1;
    }
    Ok(format!(
        "(4i, 8i) member with n = 0; real w excluded; 128 determined pairs invariant ({tries} draws)"
    ))
}

fn components_summary(report: &Value, k: u64) -> Result<String, String> {
    ensure(report["all_certified"] == Value::Bool(true), || {
        "boundary of R not certified".into()
    })?;
    ensure(report["interior_verdict"]["verdict"] == "Member", || {
        "2z is not a member".into()
    })?;
    let comps = &report["components"];
    ensure(comps["found"] == k && comps["pass"] == true, || {
        format!("components: {}", comps["found"])
    })?;
    let translates = comps["translates"].as_array().ok_or("no translates")?;
    let mut labels: Vec<u64> = translates.iter().filter_map(|t| t["label"].as_u64()).collect();
    ensure(translates.iter().all(|t| t["bounded_inside"] == true), || {
        "a component leaves its translate".into()
    })?;
    labels.sort();
    labels.dedup();
    ensure(labels.len() as u64 == k, || {
        format!("labels {labels:?} are not distinct")
    })?;
    Ok(format!("{k} distinct bounded components"))
}

fn c6_synthetic(runs: &mut Runs) -> Check {
    let out = runs.run(
        &[
            "witness",
            "--synthetic",
            "-k",
            "5",
            "--no-timestamp",
            "--out",
            "synthetic.json",
        ],
        &["synthetic.json", "synthetic.ppm"],
    );
    exited_ok(&out)?;
    components_summary(&runs.json("synthetic.json")?, 5)
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/witness_k5.json")
}

fn c7_real(runs: &mut Runs) -> Check {
    let out = runs.run(
        &["witness", "-k", "5", "--no-timestamp", "--out", "witness.json"],
        &["witness.json", "witness.ppm"],
    );
    exited_ok(&out)?;
    let report = runs.json("witness.json")?;
    let summary = components_summary(&report, 5)?;
    let found = serde_json::json!({ "q": report["q"], "z": report["z"], "r": report["r"] });

    let path = fixture_path();
    if !path.exists() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        let text = serde_json::to_string_pretty(&found).unwrap() + "\n";
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        return Ok(format!("{summary}; recorded Q, z, R in {}", path.display()));
    }
    let recorded: Value =
        serde_json::from_slice(&std::fs::read(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let flat = |v: &Value| -> Vec<f64> {
        let mut out = Vec::new();
        for key in ["q", "r"] {
            for side in ["re_min", "re_max", "im_min", "im_max"] {
                out.push(v[key][side].as_f64().unwrap_or(f64::NAN));
            }
        }
        out.extend(
            v["z"]
                .as_array()
                .into_iter()
                .flatten()
                .map(|x| x.as_f64().unwrap_or(f64::NAN)),
        );
        out
    };
    let (a, b) = (flat(&found), flat(&recorded));
    ensure(a.len() == 10 && b.len() == 10, || "malformed fixture".into())?;
    ensure(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12), || {
        format!("(Q, z, R) drifted from fixture: {found}")
    })?;
    Ok(format!(
        "{summary}; (Q, z, R) match the recorded fixture, z = {}",
        found["z"]
    ))
}

fn c8_determinism(runs: &Runs) -> Check {
    let other = TempDir::new().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (args, outputs, first) in &runs.log {
        let again = maskit(other.path(), args, 1);
        ensure(
            again.status.code() == first.status.code() && again.stdout == first.stdout,
            || format!("`maskit {}` differs in exit code or stdout", args.join(" ")),
        )?;
        for name in outputs {
            let a = runs.read(name)?;
            let b = std::fs::read(other.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, || format!("{name} differs between 8 and 1 workers"))?;
            files += 1;
        }
    }
    for (args, name) in [
        (&["render-maskit", "--res", "96x48", "--out", "m.ppm"][..], "m.ppm"),
        (
            &["a-slice", "--res", "64x80", "--no-timestamp", "--out", "a.ppm"][..],
            "a.json",
        ),
        (
            &["a-slice", "--res", "64x80", "--no-timestamp", "--out", "a.ppm"][..],
            "a.ppm",
        ),
    ] {
        let one = TempDir::new().map_err(|e| e.to_string())?;
        let eight = TempDir::new().map_err(|e| e.to_string())?;
        exited_ok(&maskit(one.path(), args, 1))?;
        exited_ok(&maskit(eight.path(), args, 8))?;
        let a = std::fs::read(one.path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(eight.path().join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between 1 and 8 workers"))?;
        files += 1;
    }
    let a = maskit(other.path(), &["selftest", "--qmax", "20"], 1);
    let b = maskit(other.path(), &["selftest", "--qmax", "20"], 8);
    exited_ok(&a)?;
    ensure(a.stdout == b.stdout, || "selftest output differs".into())?;
    Ok(format!(
        "{} binary runs, {files} artifacts byte-identical",
        runs.log.len() + 5
    ))
}

fn c9_normalized_length() -> Check {
    let r2 = 2f64.sqrt();
    for (w, want) in [((0.0, 2.0), 1.0), ((2.0, 2.0), r2), ((0.0, 8.0), 2.0)] {
        let w = Complex64::new(w.0, w.1);
        let got = normalized_length(w).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= 1e-12, || format!("L({w}) = {got}, want {want}"))?;
    }
    ensure(normalized_length(Complex64::new(1.0, 0.0)).is_err(), || {
        "real w accepted".into()
    })?;
    Ok("2i → 1, 2+2i → √2, 8i → 2".into())
}

fn report(n: usize, budget: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let over = budget.filter(|b| took > *b);
    let (ok, detail) = match (&result, over) {
        (Ok(d), None) => (true, d.clone()),
        (Ok(d), Some(b)) => (false, format!("{d}; over the {b:?} budget")),
        (Err(e), _) => (false, e.clone()),
    };
    let budget = budget.map(|b| format!(" / {b:?}")).unwrap_or_default();
    println!(
        "criterion {n}: {} [{took:.2?}{budget}] {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn main() {
    // `cargo test -- <filter>` passes arguments; only the bare run is meaningful here
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return;
    }
    let mut runs = Runs {
        dir: TempDir::new().expect("temp dir"),
        log: Vec::new(),
    };
    let secs = Duration::from_secs;
    let results = [
        report(1, Some(secs(1)), || c1_cusps(&mut runs)),
        report(2, Some(secs(1)), c2_commutator),
        report(3, Some(secs(30)), c3_oracle),
        report(4, None, c4_symmetry),
        report(5, None, c5_membership),
        report(6, Some(secs(10)), || c6_synthetic(&mut runs)),
        report(7, Some(secs(600)), || c7_real(&mut runs)),
        report(8, None, || c8_determinism(&runs)),
        report(9, None, c9_normalized_length),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
