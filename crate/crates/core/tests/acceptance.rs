//! Desk-scale acceptance suite. Prints one `PASS`/`FAIL` line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 4 5`. The process
//! exits non-zero on a failed criterion only when `VPMCF_ACCEPTANCE_STRICT`
//! is set; a run that errors out always fails the process.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vpmcf_core::calibration::{verify_static, verify_transport, Calibration, CalibrationResiduals};
use vpmcf_core::entropy::kernel_gap;
use vpmcf_core::fields::{PeriodicGrid, Spectral};
use vpmcf_core::harness::{
    certificate, compare, simulate, track, Comparison, Outcome, RunConfig, SimulateSummary, TRACK_DT_FRACTION,
};
use vpmcf_core::sharpinterface::{stable_dt, step, Curve, LambdaMode};
use vpmcf_core::Result;

const LADDER: [f64; 3] = [0.08, 0.04, 0.02];
const ALPHA: f64 = 0.5;
const GRID: usize = 256;

// Criterion 1.
const DRIFT_FACTOR: f64 = 2.0;
const C1_SOFT_SECONDS: f64 = 120.0;
// Criterion 2.
const ENERGY_SLACK: f64 = 1e-8;
const DE_GIORGI_REL: f64 = 1e-4;
const HALVING: [f64; 2] = [1.7, 2.3];
// Criterion 3.
const DISC_EPS: f64 = 0.04;
const DISC_T: f64 = 0.02;
const DISC_REFINEMENT: f64 = 1.5;
// Criterion 4.
const STATIONARY_STEP: f64 = 1e-12;
const AREA_DRIFT: f64 = 1e-10;
const ISO_EXCESS: f64 = 1e-3;
const PERIMETER_SLACK: f64 = 1e-10;
const STRONG_DE_GIORGI: f64 = 1e-4;
const C4_SECONDS: f64 = 30.0;
// Criterion 5.
const GEOMETRIC_STATIONARY: f64 = 5e-2;
const REFINEMENT_GROWTH: f64 = 2.0;
const TRANSPORT_CHANGE: f64 = 2.0;
const C5_SECONDS: f64 = 60.0;
// Criterion 6.
const KERNEL_SAMPLES: usize = 1_000_000;
const KERNEL_TOL: f64 = 1e-14;
// Criterion 7.
const C7_SECONDS: f64 = 600.0;
// Criterion 8.
const ENTROPY_GROWTH: f64 = 2.0;
const GRONWALL_CHANGE: f64 = 2.0;

struct Verdict {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn config(shape: &str, eps: f64, n: usize, t_end: f64, times: &[f64]) -> RunConfig {
    let init = match shape {
        "circle" => "shape = \"circle\"\ncenter = [0.5, 0.5]\nradius = 0.25",
        "ellipse" => "shape = \"ellipse\"\ncenter = [0.5, 0.5]\na = 0.30\nb = 0.20",
        _ => "shape = \"strip\"\nlo = 0.25\nhi = 0.75",
    };
    let times: Vec<String> = times.iter().map(|t| format!("{t:?}")).collect();
    let text = format!(
        "[grid]\nn = {n}\n[phase]\neps = {eps:?}\nalpha = {ALPHA:?}\nt_end = {t_end:?}\nsnapshot_every = 1000000\n\
         [init]\n{init}\n[compare]\ntimes = [{}]\n",
        times.join(", ")
    );
    RunConfig::from_toml_str(&text).expect("acceptance config parses")
}

fn quarters(t_end: f64) -> Vec<f64> {
    (0..=4).map(|i| t_end * i as f64 / 4.0).collect()
}

/// Artifact directories of the shared runs.
struct Lab {
    root: PathBuf,
}

impl Lab {
    fn dir(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn simulate(&self, name: &str, cfg: &RunConfig) -> Result<(SimulateSummary, f64)> {
        let start = Instant::now();
        let out = simulate(cfg, &self.dir(name))?;
        let secs = start.elapsed().as_secs_f64();
        eprintln!("  {name}: {} steps in {secs:.1} s", out.summary.steps);
        Ok((out.summary, secs))
    }

    /// Phase run, shared track run and comparison; returns the outcome and
    /// the wall time of all three.
    fn pair(&self, name: &str, cfg: &RunConfig, track_name: &str) -> Result<(Outcome<Comparison>, f64)> {
        let start = Instant::now();
        let tdir = self.dir(track_name);
        if !tdir.join("manifest.json").exists() {
            track(cfg, &tdir)?;
        }
        self.simulate(&format!("{name}/phase"), cfg)?;
        let out = compare(
            cfg,
            &self.dir(&format!("{name}/phase")),
            &tdir,
            &self.dir(&format!("{name}/compare")),
        )?;
        Ok((out, start.elapsed().as_secs_f64()))
    }
}

fn volume_drift(lab: &Lab, runs: &mut Vec<(f64, SimulateSummary, f64)>) -> Result<Verdict> {
    for eps in LADDER {
        let cfg = config("circle", eps, GRID, 0.25, &[0.0, 0.25]);
        let (s, secs) = lab.simulate(&format!("c1_eps{eps}"), &cfg)?;
        runs.push((eps, s, secs));
    }
    let mut passed = true;
    let mut parts = Vec::new();
    for (eps, s, secs) in runs.iter() {
        let bound = DRIFT_FACTOR * s.drift_bound;
        passed &= s.volume_drift_max <= bound;
        let slow = if *secs > C1_SOFT_SECONDS {
            " (over the expected runtime)"
        } else {
            ""
        };
        parts.push(format!(
            "eps={eps}: drift {:.3e} <= {bound:.3e}, {secs:.0} s{slow}",
            s.volume_drift_max
        ));
    }
    Ok(Verdict {
        id: 1,
        name: "volume-drift bound",
        passed,
        detail: parts.join("; "),
    })
}

fn energy_ledger(lab: &Lab, runs: &[(f64, SimulateSummary, f64)]) -> Result<Verdict> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (eps, s, _) in runs {
        let mono = s.max_energy_increase <= ENERGY_SLACK * s.e0;
        let rel = s.de_giorgi_final.abs() / s.e0;
        passed &= mono && rel <= DE_GIORGI_REL;
        parts.push(format!(
            "eps={eps}: max step increase {:.2e} E0, |R(T)| {rel:.2e} E0",
            s.max_energy_increase / s.e0
        ));
    }
    let (eps, coarse, _) = &runs[0];
    let mut cfg = config("circle", *eps, GRID, 0.25, &[0.0, 0.25]);
    cfg.phase.dt = Some(0.5 * cfg.phase_dt());
    let (fine, _) = lab.simulate("c2_half_dt", &cfg)?;
    let ratio = coarse.de_giorgi_final / fine.de_giorgi_final;
    passed &= fine.max_energy_increase <= ENERGY_SLACK * fine.e0;
    passed &= (HALVING[0]..=HALVING[1]).contains(&ratio);
    parts.push(format!("eps={eps}: R(dt)/R(dt/2) = {ratio:.3}"));
    Ok(Verdict {
        id: 2,
        name: "energy monotonicity and De Giorgi ledger",
        passed,
        detail: parts.join("; "),
    })
}

fn discrepancy(lab: &Lab) -> Result<Verdict> {
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in ["strip", "circle"] {
        let mut at = Vec::new();
        for n in [GRID, 2 * GRID] {
            let cfg = config(shape, DISC_EPS, n, DISC_T, &[0.0, DISC_T]);
            let (s, _) = lab.simulate(&format!("c3_{shape}_{n}"), &cfg)?;
            passed &= s.discrepancy_max <= s.tau_disc;
            at.push(s);
        }
        let shrink = at[0].discrepancy_max / at[1].discrepancy_max;
        passed &= shrink >= DISC_REFINEMENT;
        parts.push(format!(
            "{shape}: max discrepancy {:.2e} -> {:.2e} (x{shrink:.1} smaller) vs tau_disc {:.3e}",
            at[0].discrepancy_max, at[1].discrepancy_max, at[0].tau_disc
        ));
    }
    Ok(Verdict {
        id: 3,
        name: "discrepancy nonpositivity",
        passed,
        detail: parts.join("; "),
    })
}

fn strong_solver() -> Result<Verdict> {
    let start = Instant::now();
    let circle = Curve::circle([0.5, 0.5], 0.25, 128)?;
    let dt = TRACK_DT_FRACTION * stable_dt(&circle);
    let mut c = circle.clone();
    let mut displacement: f64 = 0.0;
    for _ in 0..1000 {
        let next = step(&c, dt, LambdaMode::Projected)?.curve;
        for (p, q) in c.points().iter().zip(next.points()) {
            displacement = displacement.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
        c = next;
    }

    let first = Curve::ellipse([0.5, 0.5], 0.30, 0.20, 128)?;
    let dt = TRACK_DT_FRACTION * stable_dt(&first);
    let steps = ((1.0 / dt).ceil() as usize).max(10_000);
    let (mut c, mut dissipation, mut monotone, mut drift) = (first.clone(), 0.0, true, 0.0_f64);
    let mut at_one = None;
    for k in 1..=steps {
        let s = step(&c, dt, LambdaMode::Projected)?;
        if at_one.is_none() {
            dissipation += dt * s.dissipation;
        }
        monotone &= s.curve.length() <= c.length() + PERIMETER_SLACK * first.length();
        c = s.curve;
        if k <= 10_000 {
            drift = drift.max((c.area() - first.area()).abs() / first.area());
        }
        if at_one.is_none() && k as f64 * dt >= 1.0 {
            at_one = Some(c.clone());
        }
    }
    let last = at_one.expect("run reaches T = 1");
    let iso = last.length().powi(2) / (4.0 * PI * last.area()) - 1.0;
    let drop = first.length() - last.length();
    let de_giorgi = ((drop - dissipation) / drop).abs();
    let secs = start.elapsed().as_secs_f64();
    let passed = displacement < STATIONARY_STEP
        && drift < AREA_DRIFT
        && iso < ISO_EXCESS
        && monotone
        && de_giorgi < STRONG_DE_GIORGI
        && secs < C4_SECONDS;
    Ok(Verdict {
        id: 4,
        name: "strong solver",
        passed,
        detail: format!(
            "circle step {displacement:.1e}; area drift {drift:.1e} over {} steps; L^2/(4 pi A) - 1 = {iso:.1e}; \
             perimeter monotone {monotone}; De Giorgi {de_giorgi:.1e}; {secs:.1} s",
            steps.min(10_000)
        ),
    })
}

fn quadrupole(curve: &Curve) -> Vec<f64> {
    curve
        .points()
        .iter()
        .map(|p| (2.0 * (p[1] - 0.5).atan2(p[0] - 0.5)).cos())
        .collect()
}

fn displaced(curve: &Curve, v: &[f64], dt: f64) -> Result<Curve> {
    let pts = curve
        .points()
        .iter()
        .zip(curve.normals())
        .zip(v)
        .map(|((p, n), vi)| [p[0] + dt * vi * n[0], p[1] + dt * vi * n[1]])
        .collect();
    Curve::new(pts)
}

fn certified(res: &CalibrationResiduals) -> bool {
    certificate(res).iter().all(|c| c.passed)
}

fn calibration() -> Result<Verdict> {
    let start = Instant::now();
    let curve = Curve::circle([0.5, 0.5], 0.25, 256)?;
    let sp = Spectral::new(PeriodicGrid::new(GRID, 1.0)?);
    let still = vec![0.0; curve.len()];
    let cal = Calibration::build(&sp, &curve, Some(&still), None, 0.0)?;
    let stat = verify_static(&sp, &cal)?;
    let mut passed = stat.geometric_interface < GEOMETRIC_STATIONARY
        && stat.div_b == Some(0.0)
        && stat.tangential_b == Some(0.0)
        && certified(&stat);

    let v = quadrupole(&curve);
    let delta = Some(0.1);
    let manufactured = |n: usize| -> Result<(Spectral, CalibrationResiduals)> {
        let sp = Spectral::new(PeriodicGrid::new(n, 1.0)?);
        let cal = Calibration::build(&sp, &curve, Some(&v), delta, 0.0)?;
        let res = verify_static(&sp, &cal)?;
        Ok((sp, res))
    };
    let (_, coarse) = manufactured(GRID / 2)?;
    let (sp_fine, fine) = manufactured(GRID)?;
    let pairs = [
        ("div", coarse.div_b, fine.div_b),
        ("tangential", coarse.tangential_b, fine.tangential_b),
        ("geometric", coarse.geometric_forced, fine.geometric_forced),
    ];
    let mut growth = Vec::new();
    for (name, a, b) in pairs {
        match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                passed &= b < REFINEMENT_GROWTH * a;
                growth.push(format!("{name} x{:.2}", b / a));
            }
            _ => {
                passed = false;
                growth.push(format!("{name} missing"));
            }
        }
    }
    passed &= certified(&coarse) && certified(&fine);

    let c0 = Calibration::build(&sp_fine, &curve, Some(&v), delta, 0.0)?;
    let transport = |dt: f64| -> Result<_> {
        let c1 = Calibration::build(&sp_fine, &displaced(&curve, &v, dt)?, None, delta, dt)?;
        verify_transport(&sp_fine, &c0, &c1, dt)
    };
    let (a, b) = (transport(1e-3)?, transport(5e-4)?);
    let mut change: f64 = 1.0;
    for (x, y) in [
        (a.theta_transport, b.theta_transport),
        (a.xi_len_transport, b.xi_len_transport),
        (a.xi_transport, b.xi_transport),
    ] {
        let r = if x > y { x / y } else { y / x };
        change = change.max(r);
        passed &= x.is_finite() && y.is_finite();
    }
    passed &= change < TRANSPORT_CHANGE;
    let secs = start.elapsed().as_secs_f64();
    passed &= secs < C5_SECONDS;
    Ok(Verdict {
        id: 5,
        name: "calibration certification",
        passed,
        detail: format!(
            "stationary geometric {:.2e}, div B {:?}, tangential B {:?}; refinement {}; transport change x{change:.2}; {secs:.1} s",
            stat.geometric_interface,
            stat.div_b,
            stat.tangential_b,
            growth.join(", ")
        ),
    })
}

fn coercivity(violations: &[(String, usize)]) -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    let mut tilt_worst = f64::INFINITY;
    for _ in 0..KERNEL_SAMPLES {
        let a = rng.random_range(0.0..2.0 * PI);
        let b = rng.random_range(0.0..2.0 * PI);
        let r: f64 = rng.random_range(0.0..=1.0);
        let p = [a.cos(), a.sin()];
        let xi = [r * b.cos(), r * b.sin()];
        worst = worst.min(kernel_gap(p, xi));
        let d = [p[0] - xi[0], p[1] - xi[1]];
        tilt_worst = tilt_worst.min(2.0 * (1.0 - p[0] * xi[0] - p[1] * xi[1]) - (d[0] * d[0] + d[1] * d[1]));
    }
    let total: usize = violations.iter().map(|(_, v)| v).sum();
    let passed = worst >= -KERNEL_TOL && tilt_worst >= -KERNEL_TOL && total == 0 && !violations.is_empty();
    let runs: Vec<String> = violations.iter().map(|(n, v)| format!("{n}: {v}")).collect();
    Verdict {
        id: 6,
        name: "coercivity suite",
        passed,
        detail: format!(
            "min kernel gap {worst:.1e} and tilt gap {tilt_worst:.1e} over {KERNEL_SAMPLES} samples; violations {}",
            if runs.is_empty() {
                "(no paired runs)".into()
            } else {
                runs.join(", ")
            }
        ),
    }
}

fn last_entropy(c: &Comparison) -> f64 {
    c.reports.last().map_or(f64::NAN, |r| r.e_rel)
}

fn convergence(lab: &Lab, paired: &mut Vec<(String, usize)>) -> Result<(Verdict, Comparison)> {
    let mut runs = Vec::new();
    let mut secs = 0.0;
    for eps in LADDER {
        let cfg = config("ellipse", eps, GRID, 0.25, &quarters(0.25));
        let name = format!("c7_eps{eps}");
        let (out, s) = lab.pair(&name, &cfg, "ellipse_track")?;
        secs += s;
        paired.push((name, out.summary.summary.violations));
        runs.push(out.summary);
    }
    let sym: Vec<f64> = runs.iter().map(|c| c.summary.symdiff_final).collect();
    let rel: Vec<f64> = runs.iter().map(last_entropy).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let passed = decreasing(&sym) && decreasing(&rel) && secs < C7_SECONDS;
    let verdict = Verdict {
        id: 7,
        name: "sharp-interface convergence",
        passed,
        detail: format!(
            "symdiff(T) {:.4e} / {:.4e} / {:.4e}; E_rel(T) {:.3e} / {:.3e} / {:.3e}; {secs:.0} s",
            sym[0], sym[1], sym[2], rel[0], rel[1], rel[2]
        ),
    };
    Ok((verdict, runs.swap_remove(0)))
}

fn stability(lab: &Lab, coarse: &Comparison, paired: &mut Vec<(String, usize)>) -> Result<Verdict> {
    let eps = LADDER[0];
    let cfg = config("circle", eps, GRID, 0.5, &quarters(0.5));
    let (circle, _) = lab.pair("c8_circle", &cfg, "circle_track")?;
    paired.push(("c8_circle".into(), circle.summary.summary.violations));
    let reports = &circle.summary.reports;
    let (e0, et) = (reports[0].total(), reports[reports.len() - 1].total());
    let mut passed = et <= ENTROPY_GROWTH * e0;

    let cfg = config("ellipse", eps, 2 * GRID, 0.25, &quarters(0.25));
    let (fine, _) = lab.pair("c8_ellipse_fine", &cfg, "ellipse_track")?;
    paired.push(("c8_ellipse_fine".into(), fine.summary.summary.violations));
    let (a, b) = (coarse.summary.stability.c_fit, fine.summary.summary.stability.c_fit);
    let change = if a > b { a / b } else { b / a };
    passed &= a.is_finite() && b.is_finite() && change < GRONWALL_CHANGE;
    Ok(Verdict {
        id: 8,
        name: "weak-strong stability",
        passed,
        detail: format!(
            "circle E_rel+E_bulk {e0:.3e} -> {et:.3e} (x{:.1}); ellipse C(T) {a:.3e} on {GRID}^2, {b:.3e} on {}^2",
            et / e0,
            2 * GRID
        ),
    })
}

fn failed(id: u8, name: &'static str, e: vpmcf_core::Error) -> Verdict {
    Verdict {
        id,
        name,
        passed: false,
        detail: format!("run failed: {e}"),
    }
}

fn main() {
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |id: u8| wanted.is_empty() || wanted.contains(&id);
    let keep = std::env::var_os("VPMCF_ACCEPTANCE_DIR").map(PathBuf::from);
    let tmp = tempfile::tempdir().expect("temporary directory");
    let lab = Lab {
        root: keep.clone().unwrap_or_else(|| tmp.path().to_path_buf()),
    };
    let mut verdicts = Vec::new();
    let mut errored = false;
    let mut record = |v: Result<Verdict>, id: u8, name: &'static str| {
        let v = v.unwrap_or_else(|e| {
            errored = true;
            failed(id, name, e)
        });
        eprintln!("  [{}] done", v.id);
        verdicts.push(v);
    };

    let mut runs = Vec::new();
    if on(1) || on(2) {
        let v = volume_drift(&lab, &mut runs);
        if on(1) {
            record(v, 1, "volume-drift bound");
        }
    }
    if on(2) && !runs.is_empty() {
        record(
            energy_ledger(&lab, &runs),
            2,
            "energy monotonicity and De Giorgi ledger",
        );
    }
    if on(3) {
        record(discrepancy(&lab), 3, "discrepancy nonpositivity");
    }
    if on(4) {
        record(strong_solver(), 4, "strong solver");
    }
    if on(5) {
        record(calibration(), 5, "calibration certification");
    }
    let mut paired = Vec::new();
    let mut coarse = None;
    if on(7) || on(8) || on(6) {
        match convergence(&lab, &mut paired) {
            Ok((v, c)) => {
                coarse = Some(c);
                if on(7) {
                    record(Ok(v), 7, "sharp-interface convergence");
                }
            }
            Err(e) => record(Err(e), 7, "sharp-interface convergence"),
        }
    }
    if on(8) || on(6) {
        let v = match &coarse {
            Some(c) => stability(&lab, c, &mut paired),
            None => Err(vpmcf_core::Error::EmptySeries("ellipse pairing")),
        };
        if on(8) {
            record(v, 8, "weak-strong stability");
        }
    }
    if on(6) {
        verdicts.push(coercivity(&paired));
    }

    verdicts.sort_by_key(|v| v.id);
    for v in &verdicts {
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("{mark} [{}] {}: {}", v.id, v.name, v.detail);
    }
    if let Some(dir) = keep {
        println!("artifacts kept in {}", Path::new(&dir).display());
    }
    let strict = std::env::var_os("VPMCF_ACCEPTANCE_STRICT").is_some();
    if errored || (strict && verdicts.iter().any(|v| !v.passed)) {
        std::process::exit(1);
    }
}
