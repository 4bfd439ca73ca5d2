//! Acceptance suite: one pass/fail line per criterion.
//!
//! `cargo test --release --test acceptance` runs everything; trailing
//! arguments select criteria by name (`-- fig1 invariants`). Runs go to a
//! temporary directory unless `GPF_ACCEPTANCE_DIR` is set, in which case
//! completed runs found there are reused. The process exits non-zero on a
//! failed criterion only when `GPF_ACCEPTANCE_STRICT=1`.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use gpf::analysis::GrowthOptions;
use gpf::config::ExperimentConfig;
use gpf::experiment::{background_for, cmd_analyze, cmd_evolve, cmd_sweep, AnalysisSummary};
use gpf::io::snapshot::read_snapshot;
use gpf::linear::{sound_and_healing, Background, Channel};
use gpf::series::TimeSeries;
use gpf::setup::Couplings;
use gpf::units::UnitSystem;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Ctx {
    root: PathBuf,
}

impl Ctx {
    fn run(&self, preset: &str, overrides: &str, tag: &str) -> gpf::Result<(ExperimentConfig, AnalysisSummary)> {
        let cfg = ExperimentConfig::preset_with(preset, overrides)?;
        let dir = self.root.join(tag);
        cmd_evolve(&cfg, &dir)?;
        let s = cmd_analyze(&cfg, &dir)?;
        Ok((cfg, s))
    }

    fn series(&self, tag: &str) -> TimeSeries {
        let f = std::fs::File::open(self.root.join(tag).join("series.tsv")).unwrap();
        TimeSeries::read_tsv(std::io::BufReader::new(f)).unwrap()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fig2(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (_, s) = ctx.run("fig2", "", "fig2")?;
    let Some(k) = s.peak_at_growth_peak.as_ref().and_then(|p| p.k_peak) else {
        return Ok(outcome(false, "no spin side peak at the growth peak".into()));
    };
    let (e1, e2) = (rel(k, s.predicted_k), rel(k, 0.58));
    Ok(outcome(
        e1 <= 0.10 && e2 <= 0.15,
        format!(
            "k_peak {k:.4}/μm; 2ω_s resonance {:.4} ({:.1}%); vs 0.58 ({:.1}%)",
            s.predicted_k,
            100.0 * e1,
            100.0 * e2
        ),
    ))
}

fn fig1(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (_, s) = ctx.run("fig1", "", "fig1")?;
    let Some(k) = s.peak_at_growth_peak.as_ref().and_then(|p| p.k_peak) else {
        return Ok(outcome(false, "no density side peak".into()));
    };
    let t_peak = s.growth.map_or(f64::INFINITY, |g| g.t_peak);
    let series = ctx.series("fig1");
    let sp = series.column("spin_power").unwrap();
    let dp = series.column("density_power").unwrap();
    let worst = series
        .times
        .iter()
        .enumerate()
        .filter(|&(i, &t)| t <= t_peak && dp[i] > 0.0)
        .map(|(i, _)| sp[i] / dp[i])
        .fold(0.0, f64::max);
    let e = rel(k, s.predicted_k);
    Ok(outcome(
        e <= 0.10 && worst < 0.01,
        format!(
            "k_peak {k:.4}/μm vs 2ω_d resonance {:.4} ({:.1}%); max spin/density power {worst:.2e}",
            s.predicted_k,
            100.0 * e
        ),
    ))
}

fn linearity(ctx: &Ctx) -> gpf::Result<Outcome> {
    let mut cfg = ExperimentConfig::preset("fig1")?;
    cfg.sweep.frequencies_hz = vec![300.0, 340.0, 384.0, 430.0, 480.0, 540.0];
    cfg.sweep.workers = 1;
    let dir = ctx.root.join("linearity");
    let table = cmd_sweep(&cfg, &dir)?;
    let col = |name: &str| {
        table
            .column_f64(name)
            .ok_or_else(|| gpf::GpfError::Analysis(format!("sweep table lacks {name}")))
    };
    let (om, kk) = (col("omega_m")?, col("k_peak")?);
    let pts: Vec<(f64, f64)> = kk.into_iter().zip(om).filter(|(k, _)| k.is_finite()).collect();
    if pts.len() < 5 {
        return Ok(outcome(false, format!("only {} of 6 drives formed a pattern", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ground = read_snapshot(&dir.join(gpf::experiment::GROUND_STATE_FILE))?;
    let (c_d, _) = sound_and_healing(&background_for(&cfg, &ground), Channel::Density);
    let e = rel(slope, 2.0 * c_d);
    Ok(outcome(
        e <= 0.10,
        format!("{} points, slope {slope:.4} vs 2c_d {:.4} μm/ms ({:.1}%)", pts.len(), 2.0 * c_d, 100.0 * e),
    ))
}

fn fig3(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (_, small) = ctx.run("fig3", "", "fig3")?;
    let large_over = r#"
name = "fig3-3hz"
[setup]
trap_hz = [3.0, 512.0, 512.0]
[grid]
points = [8192]
half_widths = [512.0]
[grid.full_3d]
points = [2048, 16, 16]
half_widths = [512.0, 4.0, 4.0]
"#;
    let (_, large) = ctx.run("fig3", large_over, "fig3-3hz")?;
    let (Some(a), Some(b)) = (small.growth, large.growth) else {
        return Ok(outcome(false, "no growth report".into()));
    };
    let (ia, ib) = (a.t_saturation - a.t_onset, b.t_saturation - b.t_onset);
    let shape = a.crossed && a.rate > 0.0 && a.declined;
    Ok(outcome(
        shape && ib > ia,
        format!(
            "5 Hz: rate {:.4}/ms, onset {:.0}, saturation {:.0}, peak {:.0} ms, decline {}; 3 Hz: onset→saturation {:.0} ms vs {:.0} ms",
            a.rate, a.t_onset, a.t_saturation, a.t_peak, a.declined, ib, ia
        ),
    ))
}

fn label_line(s: &AnalysisSummary) -> (Option<(usize, usize, f64)>, String) {
    match &s.mode_at_growth_peak {
        Some(m) => (
            Some((m.label.l, m.label.n_r, m.label.confidence)),
            format!(
                "({}, {}) conf {:.2} at t = {:.0} ms",
                m.label.l, m.label.n_r, m.label.confidence, m.time_ms
            ),
        ),
        None => (None, "no growth peak".into()),
    }
}

fn fig6(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (_, s) = ctx.run("fig6", "", "fig6")?;
    let (l, text) = label_line(&s);
    let pass = matches!(l, Some((3, 2, c)) if c >= 0.5);
    Ok(outcome(pass, text))
}

fn fig7(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (cfg, s) = ctx.run("fig7", "", "fig7")?;
    let Some(r) = s.subharmonic else {
        return Ok(outcome(false, "no confidently labelled pattern in the snapshot window".into()));
    };
    let half = 0.5 * cfg.protocol().omega_m;
    let pass = (r.ratio - 2.0).abs() <= 0.05 && rel(r.response_omega, half) <= 0.05;
    Ok(outcome(
        pass,
        format!(
            "period ratio {:.3}; response {:.4} rad/ms vs ω_m/2 {:.4}; {}",
            r.ratio,
            r.response_omega,
            half,
            label_line(&s).1
        ),
    ))
}

/// Time from the power peak until the envelope first drops below half of it.
fn decay_time(series: &TimeSeries, key: &str, t_peak: f64, window: f64) -> f64 {
    let v = series.column(key).unwrap();
    let t = &series.times;
    let Some(ip) = t.iter().position(|&x| x >= t_peak) else {
        return f64::INFINITY;
    };
    let start_env = |i: usize| {
        let mut m: f64 = 0.0;
        for j in (0..=i).rev() {
            if t[i] - t[j] > window {
                break;
            }
            m = m.max(v[j]);
        }
        m
    };
    let peak = v[ip];
    (ip..t.len())
        .find(|&i| start_env(i) < 0.5 * peak)
        .map_or(f64::INFINITY, |i| t[i] - t_peak)
}

fn fig8(ctx: &Ctx) -> gpf::Result<Outcome> {
    let (_, a) = ctx.run("fig6", "", "fig6")?;
    let (_, b) = ctx.run("fig8-B", "", "fig8-B")?;
    let (_, c) = ctx.run("fig8-C", "", "fig8-C")?;
    let window = GrowthOptions::default().envelope_window.max(10.0);
    let mut parts = Vec::new();
    let mut labels_ok = true;
    let mut stats = Vec::new();
    for (name, tag, s) in [("A", "fig6", &a), ("B", "fig8-B", &b), ("C", "fig8-C", &c)] {
        let (l, text) = label_line(s);
        labels_ok &= matches!(l, Some((3, 2, _)));
        let g = s.growth;
        let onset = g.filter(|g| g.crossed).map_or(f64::INFINITY, |g| g.t_onset);
        let decay = g.map_or(f64::INFINITY, |g| decay_time(&ctx.series(tag), &s.growth_key, g.t_peak, window));
        parts.push(format!("{name}: {text}, onset {onset:.0}, decay {decay:.0} ms"));
        stats.push((onset, decay));
    }
    let order = (1..3).all(|i| stats[i].0 < stats[0].0 && stats[i].1 < stats[0].1);
    Ok(outcome(labels_ok && order, parts.join("; ")))
}

fn invariants(_: &Ctx) -> gpf::Result<Outcome> {
    let (s, g) = common::small_ground_1d();
    let norm = common::norm_drift_per_1000_steps(&s, &g);
    let energy = common::energy_drift(&s, &g);
    let rev = common::time_reversal_error(&s, &g);
    let ratio = common::convergence_ratio(&s, &g);
    let values: Vec<f64> = (0..256).map(|i| ((i * i) as f64 * 0.37).sin() + 0.1 * i as f64).collect();
    let parseval = common::parseval_error(values, 0.3);
    let bessel = common::bessel_l3_fraction();
    let (tongue, flank) = common::mathieu_first_tongue();
    let pass = norm < 1e-10
        && energy < 1e-8
        && rev < 1e-8
        && (ratio - 4.0).abs() <= 1.0
        && parseval < 1e-10
        && bessel >= 0.95
        && tongue
        && !flank;
    Ok(outcome(
        pass,
        format!(
            "norm {norm:.1e}/10³ steps, energy {energy:.1e}, reversal {rev:.1e}, dt-ratio {ratio:.2}, Parseval {parseval:.1e}, l=3 share {bessel:.3}, tongue {tongue}/flank {flank}"
        ),
    ))
}

fn ratios(_: &Ctx) -> gpf::Result<Outcome> {
    let c = Couplings {
        g11: 1.0,
        g22: 1.0,
        g12: 0.93,
    };
    let bg = Background::new(1.0, &c, UnitSystem::default());
    let (cd, xd) = sound_and_healing(&bg, Channel::Density);
    let (cs, xs) = sound_and_healing(&bg, Channel::Spin);
    let (rc, rx) = (cs / cd, xs / xd);
    Ok(outcome(
        (rc - 0.1904).abs() <= 1e-4 && (rx - 5.251).abs() <= 1e-3,
        format!("c_s/c_d {rc:.5}, ξ_s/ξ_d {rx:.4}"),
    ))
}

type Criterion = fn(&Ctx) -> gpf::Result<Outcome>;

fn main() {
    let criteria: [(&str, &str, Criterion); 9] = [
        ("ratios", "analytic sound-speed and healing-length ratios", ratios),
        ("invariants", "numerical invariant suite", invariants),
        ("fig1", "density resonance, in-phase 384 Hz", fig1),
        ("fig2", "spin resonance, out-of-phase 195 Hz", fig2),
        ("linearity", "density resonance map slope", linearity),
        ("fig3", "spin growth, saturation and condensate size", fig3),
        ("fig6", "(3,2) label at the power peak, 152 Hz", fig6),
        ("fig7", "sub-harmonic response of the (3,3) pattern", fig7),
        ("fig8", "protocols A, B, C at 152 Hz", fig8),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let keep_dir = std::env::var_os("GPF_ACCEPTANCE_DIR").map(PathBuf::from);
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = keep_dir.unwrap_or_else(|| tmp.path().to_path_buf());
    let ctx = Ctx { root };
    let mut failed = 0;
    for (name, what, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|x| x == name) {
            continue;
        }
        let t0 = Instant::now();
        let r = f(&ctx).unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        if !r.pass {
            failed += 1;
        }
        println!(
            "{} {name:<10} {what}: {} [{:.0} s]",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("{failed} criteria failed");
    let strict = std::env::var("GPF_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
