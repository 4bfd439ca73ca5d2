//! End-to-end commands: ground states, evolutions with checkpoints,
//! analyses of run directories, frequency sweeps and dispersion tables.
//!
//! A run directory contains
//!
//! ```text
//! config.toml          resolved configuration
//! manifest.json        snapshot index, hashes and status
//! ground_state.gpf     stationary state (+ .json sidecar)
//! initial.gpf          seeded initial state (+ .json sidecar)
//! snapshots/s*.gpf     sampled states (+ sidecars)
//! checkpoints/c*.gpf   restart points (+ sidecars)
//! series.tsv           observable time series
//! analysis/            tables, spectral blocks and summary.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::analysis::{
    bessel_decompose, fourier_1d, growth_report, integrate_profile, label_mode, side_peaks, spin_column_2d,
    subharmonic_check, GrowthReport, ModeLabel, PeakResult, PlanarField, ProfileKind, SubharmonicReport,
};
use crate::config::ExperimentConfig;
use crate::error::{GpfError, Result};
use crate::evolve::{evolve_with, EvolutionObserver, RunStart};
use crate::field::{densities, BinaryField};
use crate::ground::{imaginary_time_solve, initial_profile, inject_noise, thomas_fermi, GroundState};
use crate::io::manifest::{verify_entry, FileEntry, RunManifest, RunStatus};
use crate::io::snapshot::{read_sidecar, read_snapshot, write_with_sidecar, SnapshotRole};
use crate::io::spectral::SpectralBlock;
use crate::io::table::{num, Table};
use crate::io::write_atomic;
use crate::linear::{
    background_density, bogoliubov_omega, resonance_k, sound_and_healing, sum_resonance_k, Background, Channel,
};
use crate::series::TimeSeries;
use crate::units::{hz_to_rad_per_ms, rad_per_ms_to_hz};

pub const GROUND_STATE_FILE: &str = "ground_state.gpf";
pub const INITIAL_FILE: &str = "initial.gpf";
pub const SERIES_FILE: &str = "series.tsv";
pub const CONFIG_FILE: &str = "config.toml";
pub const ANALYSIS_DIR: &str = "analysis";

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_atomic(path, text.as_bytes())
}

fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut buf = Vec::new();
    series.write_tsv(&mut buf).map_err(|e| GpfError::io(path, e))?;
    write_atomic(path, &buf)
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    let f = fs::File::open(path).map_err(|e| GpfError::io(path, e))?;
    TimeSeries::read_tsv(std::io::BufReader::new(f))
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> Result<()> {
    write_atomic(&dir.join(CONFIG_FILE), cfg.to_toml().as_bytes())
}

/// Summary of a ground-state computation.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    pub config_hash: String,
    pub dims: usize,
    pub iterations: usize,
    /// rad/ms per component.
    pub chemical_potentials: [f64; 2],
    /// E/(ħN) in rad/ms.
    pub energy_per_particle: f64,
    pub central_density: f64,
    /// Absent for an interaction-free mixture.
    pub thomas_fermi: Option<TfComparison>,
    /// √⟨x_i²⟩ of the total density per simulated axis (μm).
    pub rms_widths: Vec<f64>,
    /// l_i/√2, the rms width of a harmonic-oscillator ground state.
    pub oscillator_rms_widths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TfComparison {
    pub mu: f64,
    pub central_density: f64,
    pub radii: Vec<f64>,
    /// (n(0) − n_TF(0)) / n_TF(0).
    pub central_density_rel_diff: f64,
}

fn rms_widths(field: &BinaryField) -> Vec<f64> {
    let grid = &field.grid;
    let n = densities(field).total;
    let norm: f64 = n.iter().sum();
    (0..grid.dims())
        .map(|axis| {
            let mut i = 0;
            let x2 = grid.map_points(|p| {
                let v = p[axis] * p[axis] * n[i];
                i += 1;
                v
            });
            (x2.iter().sum::<f64>() / norm).sqrt()
        })
        .collect()
}

/// Solve for the stationary state of `cfg` without touching the disk.
pub fn solve_ground_state(cfg: &ExperimentConfig) -> Result<(GroundState, GroundStateReport)> {
    let setup = cfg.setup();
    let grid = cfg.to_grid()?;
    let init = initial_profile(&setup, &grid, cfg.ground_state.init)?;
    let gs = imaginary_time_solve(init, &setup, &cfg.ground_state)?;
    let center = gs.field.central_density();
    let tf = if setup.a_base > 0.0 {
        let tf = thomas_fermi(&setup, &grid)?;
        let c = tf.total_density[grid.center_index()];
        Some(TfComparison {
            mu: tf.mu,
            central_density: c,
            radii: tf.radii,
            central_density_rel_diff: (center - c) / c,
        })
    } else {
        None
    };
    let report = GroundStateReport {
        config_hash: cfg.hash(),
        dims: grid.dims(),
        iterations: gs.iterations,
        chemical_potentials: gs.chemical_potentials,
        energy_per_particle: gs.energy_per_particle,
        central_density: center,
        thomas_fermi: tf,
        rms_widths: rms_widths(&gs.field),
        oscillator_rms_widths: (0..grid.dims())
            .map(|i| setup.units.oscillator_length(setup.trap[i]) / 2f64.sqrt())
            .collect(),
    };
    Ok((gs, report))
}

/// `gpf groundstate`: solve, persist the state and a JSON report.
pub fn cmd_groundstate(cfg: &ExperimentConfig, out: &Path) -> Result<GroundStateReport> {
    cfg.validate()?;
    let (gs, report) = solve_ground_state(cfg)?;
    write_config(out, cfg)?;
    write_with_sidecar(&out.join(GROUND_STATE_FILE), &gs.field, SnapshotRole::GroundState, 0, &report.config_hash)?;
    write_json(&out.join("groundstate.json"), &report)?;
    Ok(report)
}

/// The ground state stored in `out` if it belongs to `cfg`, else a fresh one.
fn ensure_ground_state(cfg: &ExperimentConfig, out: &Path) -> Result<(BinaryField, String)> {
    let path = out.join(GROUND_STATE_FILE);
    let hash = cfg.hash();
    if path.is_file() {
        match read_sidecar(&path) {
            Ok(meta) if meta.config_hash == hash => {
                let field = read_snapshot(&path)?;
                return Ok((field, meta.content_hash));
            }
            Ok(_) => log::info!("{} belongs to another config; recomputing", path.display()),
            Err(e) => log::warn!("ignoring {}: {e}", path.display()),
        }
    }
    let (gs, report) = solve_ground_state(cfg)?;
    log::info!(
        "ground state: μ = {:.4} rad/ms, n(0) = {:.4} after {} iterations",
        report.chemical_potentials[0],
        report.central_density,
        report.iterations
    );
    let h = write_with_sidecar(&path, &gs.field, SnapshotRole::GroundState, 0, &hash)?;
    write_json(&out.join("groundstate.json"), &report)?;
    Ok((gs.field, h))
}

/// Controls for [`run_evolve`] beyond the configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveOptions {
    /// Stop (leaving the run resumable) after this step; must be a
    /// checkpoint step.
    pub stop_after: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveSummary {
    pub config_hash: String,
    pub status: RunStatus,
    pub resumed_from: Option<u64>,
    pub final_step: u64,
    pub final_time: f64,
    pub snapshots: usize,
    pub checkpoints: usize,
}

struct FileRecorder<'a> {
    dir: &'a Path,
    hash: String,
    manifest: &'a mut RunManifest,
    stride: u64,
    field_every: u64,
    window: Option<[f64; 2]>,
    total: u64,
}

impl EvolutionObserver for FileRecorder<'_> {
    fn snapshot(&mut self, step: u64, field: &BinaryField) -> Result<()> {
        let sample = step / self.stride;
        let due = sample.is_multiple_of(self.field_every) || step == self.total;
        let inside = self.window.is_none_or(|[a, b]| field.time >= a - 1e-9 && field.time <= b + 1e-9);
        if !(due && inside) {
            return Ok(());
        }
        let file = format!("snapshots/s{step:010}.gpf");
        let hash = write_with_sidecar(&self.dir.join(&file), field, SnapshotRole::Sample, step, &self.hash)?;
        self.manifest.snapshots.push(FileEntry {
            file,
            step,
            time_ms: field.time,
            hash,
        });
        self.manifest.save(self.dir)
    }

    fn checkpoint(&mut self, step: u64, field: &BinaryField, series: &TimeSeries) -> Result<Option<PathBuf>> {
        write_series(&self.dir.join(SERIES_FILE), series)?;
        let file = format!("checkpoints/c{step:010}.gpf");
        let path = self.dir.join(&file);
        let hash = write_with_sidecar(&path, field, SnapshotRole::Checkpoint, step, &self.hash)?;
        self.manifest.checkpoints.push(FileEntry {
            file,
            step,
            time_ms: field.time,
            hash,
        });
        self.manifest.save(self.dir)?;
        Ok(Some(path))
    }
}

/// `gpf evolve`: run or resume the evolution described by `cfg` in `out`.
pub fn cmd_evolve(cfg: &ExperimentConfig, out: &Path) -> Result<EvolveSummary> {
    run_evolve(cfg, out, EvolveOptions::default())
}

pub fn run_evolve(cfg: &ExperimentConfig, out: &Path, opts: EvolveOptions) -> Result<EvolveSummary> {
    cfg.validate()?;
    let hash = cfg.hash();
    let setup = cfg.setup();
    let protocol = cfg.protocol();
    let total = cfg.evolution.total_steps();
    if let Some(s) = opts.stop_after {
        if cfg.evolution.checkpoint_stride == 0 || s % cfg.evolution.checkpoint_stride != 0 || s > total {
            return Err(GpfError::Config(format!("stop step {s} is not a checkpoint step")));
        }
    }
    fs::create_dir_all(out).map_err(|e| GpfError::io(out, e))?;

    let mut resumed = None;
    let mut manifest;
    let (state, start, prior) = if RunManifest::exists(out) {
        manifest = RunManifest::load(out)?;
        if manifest.config_hash != hash {
            return Err(GpfError::Config(format!(
                "{} holds a run of config {}, not {hash}; refusing to resume",
                out.display(),
                manifest.config_hash
            )));
        }
        if manifest.status == RunStatus::Complete {
            log::info!("{} is already complete", out.display());
            return Ok(summary(&manifest, None));
        }
        let initial = read_snapshot(&out.join(INITIAL_FILE))?;
        let reference = densities(&initial).total;
        match manifest.last_valid_checkpoint(out).cloned() {
            Some(c) => {
                let field = read_snapshot(&out.join(&c.file))?;
                let mut series = read_series(&out.join(SERIES_FILE))?;
                series.truncate_after(c.step);
                manifest.truncate_after(c.step);
                manifest.status = RunStatus::Running;
                manifest.failure = None;
                resumed = Some(c.step);
                log::info!("resuming {} from step {}", out.display(), c.step);
                (field, RunStart { step: c.step, reference: Some(reference) }, Some(series))
            }
            None => {
                manifest.truncate_after(0);
                manifest.snapshots.clear();
                manifest.checkpoints.clear();
                manifest.status = RunStatus::Running;
                (initial, RunStart { step: 0, reference: Some(reference) }, None)
            }
        }
    } else {
        manifest = RunManifest::new("evolve", Some(cfg.name.clone()), &hash, cfg.evolution.dt, total);
        write_config(out, cfg)?;
        let (gs, gs_hash) = ensure_ground_state(cfg, out)?;
        manifest.ground_state = Some(FileEntry {
            file: GROUND_STATE_FILE.into(),
            step: 0,
            time_ms: 0.0,
            hash: gs_hash,
        });
        let initial = inject_noise(&gs, &cfg.noise());
        write_with_sidecar(&out.join(INITIAL_FILE), &initial, SnapshotRole::Initial, 0, &hash)?;
        let reference = densities(&initial).total;
        manifest.save(out)?;
        (initial, RunStart { step: 0, reference: Some(reference) }, None)
    };

    let mut evo = cfg.evolution.clone();
    if let Some(s) = opts.stop_after {
        evo.t_final = s as f64 * evo.dt;
    }
    let mut recorder = FileRecorder {
        dir: out,
        hash: hash.clone(),
        manifest: &mut manifest,
        stride: cfg.evolution.snapshot_stride,
        field_every: cfg.output.field_every,
        window: cfg.output.field_window,
        total,
    };
    let result = evolve_with(&state, &setup, &protocol, &evo, start, &mut recorder);
    let (last, tail) = match result {
        Ok(v) => v,
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.failure = Some(e.to_string());
            manifest.save(out)?;
            return Err(e);
        }
    };
    let mut series = prior.unwrap_or_else(|| TimeSeries::new(tail.keys.clone()));
    for i in 0..tail.len() {
        series.push(tail.steps[i], tail.times[i], tail.rows[i].clone());
    }
    write_series(&out.join(SERIES_FILE), &series)?;
    manifest.series = Some(SERIES_FILE.into());
    let final_step = (last.time / cfg.evolution.dt).round() as u64;
    if final_step >= total {
        manifest.status = RunStatus::Complete;
    }
    manifest.save(out)?;
    Ok(summary(&manifest, resumed))
}

fn summary(m: &RunManifest, resumed_from: Option<u64>) -> EvolveSummary {
    let last = m.snapshots.last();
    EvolveSummary {
        config_hash: m.config_hash.clone(),
        status: m.status,
        resumed_from,
        final_step: last.map_or(0, |s| s.step),
        final_time: last.map_or(0.0, |s| s.time_ms),
        snapshots: m.snapshots.len(),
        checkpoints: m.checkpoints.len(),
    }
}

/// Linear-theory background for the ground state of a run.
pub fn background_for(cfg: &ExperimentConfig, ground: &BinaryField) -> Background {
    let setup = cfg.setup();
    let dims = ground.grid.dims();
    Background::new(
        background_density(ground.central_density(), dims),
        &setup.couplings(dims),
        setup.units,
    )
}

/// The side peak of one 1D snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct PeakRecord {
    pub step: u64,
    pub time_ms: f64,
    pub channel: Channel,
    pub k_peak: Option<f64>,
    pub amplitude: f64,
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRecord {
    pub step: u64,
    pub time_ms: f64,
    pub label: ModeLabel,
    pub total_power: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub config_hash: String,
    pub analysed: usize,
    pub skipped: Vec<String>,
    pub channel: Channel,
    pub n_bar: f64,
    /// Resonant k of ω_m = 2ω(k) in the analysed channel.
    pub predicted_k: f64,
    pub growth_key: String,
    pub growth: Option<GrowthReport>,
    /// 1D: peak of the snapshot nearest the growth peak.
    pub peak_at_growth_peak: Option<PeakRecord>,
    /// 2D: series label at the growth peak.
    pub mode_at_growth_peak: Option<ModeRecord>,
    pub subharmonic: Option<SubharmonicReport>,
    pub tables: Vec<String>,
}

fn k_min_for(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.analysis.k_min {
        Some(k) => Ok(k),
        None => {
            let tf = thomas_fermi(&cfg.setup(), &cfg.to_grid()?)?;
            Ok(2.0 * std::f64::consts::PI / (2.0 * tf.radii[0]))
        }
    }
}

fn nearest(times: &[f64], t: f64) -> Option<usize> {
    (0..times.len()).min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
}

/// `gpf analyze`: derive tables from a completed run directory.
pub fn cmd_analyze(cfg: &ExperimentConfig, run: &Path) -> Result<AnalysisSummary> {
    if !RunManifest::exists(run) {
        return Err(GpfError::Analysis(format!("no snapshots: {} has no manifest", run.display())));
    }
    let manifest = RunManifest::load(run)?;
    if manifest.snapshots.is_empty() {
        return Err(GpfError::Analysis(format!("no snapshots in {}", run.display())));
    }
    if manifest.status != RunStatus::Complete {
        return Err(GpfError::Analysis(format!("run in {} is not complete", run.display())));
    }
    let hash = cfg.hash();
    if manifest.config_hash != hash {
        return Err(GpfError::Config(format!(
            "config hash {hash} does not match the run's {}",
            manifest.config_hash
        )));
    }
    let adir = run.join(ANALYSIS_DIR);
    fs::create_dir_all(adir.join("spectra")).map_err(|e| GpfError::io(&adir, e))?;

    let mut skipped = Vec::new();
    let mut fields = Vec::new();
    for entry in &manifest.snapshots {
        match verify_entry(run, entry).and_then(|_| read_snapshot(&run.join(&entry.file))) {
            Ok(f) => fields.push((entry.step, f)),
            Err(e) => {
                log::warn!("skipping {}: {e}", entry.file);
                skipped.push(entry.file.clone());
            }
        }
    }
    if fields.is_empty() {
        return Err(GpfError::Analysis(format!("no readable snapshots in {}", run.display())));
    }
    let ground = read_snapshot(&run.join(GROUND_STATE_FILE))?;
    let initial = read_snapshot(&run.join(INITIAL_FILE))?;
    let reference = densities(&initial).total;
    let bg = background_for(cfg, &ground);
    let channel = cfg.channel();
    let omega_m = cfg.protocol().omega_m;
    let predicted_k = resonance_k(omega_m, &bg, channel);
    let series = read_series(&run.join(SERIES_FILE))?;
    let growth_key = cfg.growth_key();
    let growth = match series.column(&growth_key) {
        Some(v) if v.len() >= 50 => Some(growth_report(&series.times, &v, &cfg.analysis.growth)?),
        Some(_) => {
            log::warn!("series too short for a growth report");
            None
        }
        None => {
            log::warn!("series has no '{growth_key}' column");
            None
        }
    };
    let mut tables = Vec::new();
    let mut peak_at_growth_peak = None;
    let mut mode_at_growth_peak = None;
    let mut subharmonic = None;
    let dims = ground.grid.dims();

    if dims == 1 {
        let k_min = k_min_for(cfg)?;
        let mut peaks = Table::new(&["step", "time_ms", "channel", "k_peak", "amplitude", "width", "contrast"]);
        let mut spectra = Table::new(&["step", "time_ms", "k", "spin_abs", "delta_n_abs"]);
        let mut profiles = Table::new(&["step", "time_ms", "x", "delta_n", "spin"]);
        let mut records = Vec::new();
        for (step, f) in &fields {
            let spin = integrate_profile(f, ProfileKind::Spin, None)?;
            let dn = integrate_profile(f, ProfileKind::DeltaN, Some(&reference))?;
            for (ch, prof) in [(Channel::Spin, &spin), (Channel::Density, &dn)] {
                let r = side_peaks(prof, k_min)?;
                let row = match &r {
                    PeakResult::Pattern(p) => vec![num(p.k), num(p.amplitude), num(p.width), num(p.contrast)],
                    PeakResult::NoPattern { max, .. } => vec!["NaN".into(), num(*max), "NaN".into(), "NaN".into()],
                };
                let mut cells = vec![step.to_string(), num(f.time), ch.name().into()];
                cells.extend(row);
                peaks.push(cells);
                if ch == channel {
                    records.push(PeakRecord {
                        step: *step,
                        time_ms: f.time,
                        channel: ch,
                        k_peak: r.peak().map(|p| p.k),
                        amplitude: match &r {
                            PeakResult::Pattern(p) => p.amplitude,
                            PeakResult::NoPattern { max, .. } => *max,
                        },
                        width: r.peak().map(|p| p.width),
                    });
                }
            }
            let fs_ = fourier_1d(&spin);
            let fd = fourier_1d(&dn);
            let half = fs_.k.len() / 2;
            for i in 0..=half {
                spectra.push(vec![
                    step.to_string(),
                    num(f.time),
                    num(fs_.k[i]),
                    num(fs_.amplitude[i].norm()),
                    num(fd.amplitude[i].norm()),
                ]);
            }
            for i in 0..spin.x.len() {
                profiles.push(vec![step.to_string(), num(f.time), num(spin.x[i]), num(dn.values[i]), num(spin.values[i])]);
            }
            let block = SpectralBlock::from_fourier(if channel == Channel::Spin { &fs_ } else { &fd }, f.time, &hash);
            block.write(&adir.join(format!("spectra/s{step:010}.gpfs")))?;
        }
        if let Some(g) = &growth {
            let times: Vec<f64> = records.iter().map(|r| r.time_ms).collect();
            peak_at_growth_peak = nearest(&times, g.t_peak).map(|i| records[i].clone());
        }
        for (name, t) in [("peaks.tsv", &peaks), ("spectra.tsv", &spectra), ("profiles.tsv", &profiles)] {
            t.write(&adir.join(name))?;
            tables.push(name.to_string());
        }
    } else {
        let tf = thomas_fermi(&cfg.setup(), &cfg.to_grid()?)?;
        let opts = cfg.analysis.bessel;
        let mut modes =
            Table::new(&["step", "time_ms", "l", "n_r", "confidence", "low_confidence", "k_peak", "total_power"]);
        let mut lhead = vec!["step".to_string(), "time_ms".to_string()];
        lhead.extend((0..=opts.l_max).map(|l| format!("l{l}")));
        let mut lpow = Table::new(&lhead);
        let mut kpow = Table::new(&["step", "time_ms", "k_r", "power"]);
        let mut planar: Vec<(f64, PlanarField)> = Vec::new();
        let mut labels: Vec<ModeLabel> = Vec::new();
        for (step, f) in &fields {
            let p = spin_column_2d(f)?;
            let d = bessel_decompose(&p, &opts)?;
            let m = label_mode(&d, tf.radii[0]);
            modes.push(vec![
                step.to_string(),
                num(f.time),
                m.l.to_string(),
                m.n_r.to_string(),
                num(m.confidence),
                m.low_confidence.to_string(),
                num(m.k_peak),
                num(d.total_power()),
            ]);
            let mut row = vec![step.to_string(), num(f.time)];
            row.extend((0..=opts.l_max).map(|l| num(d.l_power(l))));
            lpow.push(row);
            for (k, pk) in d.k.iter().zip(d.k_power()) {
                kpow.push(vec![step.to_string(), num(f.time), num(*k), num(pk)]);
            }
            SpectralBlock::from_bessel(&d, f.time, &hash).write(&adir.join(format!("spectra/s{step:010}.gpfs")))?;
            labels.push(m);
            planar.push((f.time, p));
        }
        if let Some(g) = &growth {
            let l = series.column("spin_mode_l");
            let n = series.column("spin_mode_nr");
            let c = series.column("spin_mode_confidence");
            let power = series.column(&growth_key);
            if let (Some(l), Some(n), Some(c), Some(p)) = (l, n, c, power) {
                if let Some(i) = nearest(&series.times, g.t_peak) {
                    mode_at_growth_peak = Some(ModeRecord {
                        step: series.steps[i],
                        time_ms: series.times[i],
                        label: ModeLabel {
                            l: l[i] as usize,
                            n_r: n[i] as usize,
                            confidence: c[i],
                            low_confidence: c[i] < 0.5,
                            k_peak: f64::NAN,
                        },
                        total_power: p[i],
                    });
                }
            }
        }
        if cfg.analysis.subharmonic {
            let confident: Vec<&ModeLabel> = labels.iter().filter(|m| m.l >= 1 && !m.low_confidence).collect();
            match confident.first() {
                Some(m) => {
                    let k = confident.iter().map(|m| m.k_peak).sum::<f64>() / confident.len() as f64;
                    match subharmonic_check(&planar, m.l, k, omega_m, tf.radii[0]) {
                        Ok(r) => subharmonic = Some(r),
                        Err(e) => log::warn!("sub-harmonic check failed: {e}"),
                    }
                }
                None => log::warn!("no confidently labelled l ≥ 1 pattern for the sub-harmonic check"),
            }
        }
        for (name, t) in [("modes.tsv", &modes), ("l_power.tsv", &lpow), ("k_power.tsv", &kpow)] {
            t.write(&adir.join(name))?;
            tables.push(name.to_string());
        }
    }

    let summary = AnalysisSummary {
        config_hash: hash,
        analysed: fields.len(),
        skipped,
        channel,
        n_bar: bg.n_bar,
        predicted_k,
        growth_key,
        growth,
        peak_at_growth_peak,
        mode_at_growth_peak,
        subharmonic,
        tables,
    };
    write_json(&adir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// One line of a sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub f_hz: f64,
    pub omega_m: f64,
    pub ok: bool,
    pub error: Option<String>,
    pub k_peak: Option<f64>,
    pub k_predicted: f64,
    pub growth: Option<GrowthReport>,
    pub label: Option<ModeLabel>,
}

pub const SWEEP_HEADER: [&str; 13] = [
    "f_hz",
    "omega_m",
    "status",
    "k_peak",
    "k_predicted",
    "growth_rate",
    "t_onset",
    "t_peak",
    "l",
    "n_r",
    "confidence",
    "mode_omega",
    "error",
];

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map_or("NaN".to_string(), num);
        vec![
            num(self.f_hz),
            num(self.omega_m),
            if self.ok { "ok" } else { "failed" }.into(),
            opt(self.k_peak),
            num(self.k_predicted),
            opt(self.growth.map(|g| g.rate)),
            opt(self.growth.map(|g| g.t_onset)),
            opt(self.growth.map(|g| g.t_peak)),
            self.label.map_or("NaN".into(), |m| m.l.to_string()),
            self.label.map_or("NaN".into(), |m| m.n_r.to_string()),
            opt(self.label.map(|m| m.confidence)),
            num(0.5 * self.omega_m),
            self.error.clone().unwrap_or_default().replace(['\t', '\n'], " "),
        ]
    }
}

/// Keeps the sampled state with the largest band power of one channel.
/// Band power and dominant side peak of every 1D sample.
struct PeakKeeper {
    channel: Channel,
    k_min: f64,
    reference: Vec<f64>,
    samples: Vec<(f64, f64, Option<f64>)>,
}

impl EvolutionObserver for PeakKeeper {
    fn snapshot(&mut self, _step: u64, field: &BinaryField) -> Result<()> {
        if field.grid.dims() != 1 {
            return Ok(());
        }
        let prof = match self.channel {
            Channel::Spin => integrate_profile(field, ProfileKind::Spin, None)?,
            Channel::Density => integrate_profile(field, ProfileKind::DeltaN, Some(&self.reference))?,
        };
        let p = crate::analysis::band_power(&prof, self.k_min);
        let k = side_peaks(&prof, self.k_min)?.peak().map(|p| p.k);
        self.samples.push((field.time, p, k));
        Ok(())
    }
}

impl PeakKeeper {
    /// Side peak while the pattern is still linear: the first sample after
    /// onset whose band power reaches √(baseline · saturation). Without
    /// growth, the sample of largest band power.
    fn linear_peak(&self, growth: Option<&GrowthReport>) -> Option<f64> {
        if let Some(g) = growth.filter(|g| g.crossed) {
            let mid = (g.baseline.max(f64::MIN_POSITIVE) * g.saturation_value).sqrt();
            let hit = self.samples.iter().find(|(t, p, k)| *t >= g.t_onset && *p >= mid && k.is_some());
            if let Some((_, _, k)) = hit {
                return *k;
            }
        }
        self.samples
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .and_then(|s| s.2)
    }
}

fn sweep_one(cfg: &ExperimentConfig, ground: &BinaryField, f_hz: f64, dir: &Path) -> Result<SweepRow> {
    let mut c = cfg.clone();
    c.protocol.f_hz = f_hz;
    c.validate()?;
    let setup = c.setup();
    let protocol = c.protocol();
    let channel = c.channel();
    let bg = background_for(&c, ground);
    let initial = inject_noise(ground, &c.noise());
    let reference = densities(&initial).total;
    let mut keeper = PeakKeeper {
        channel,
        k_min: k_min_for(&c)?,
        reference: reference.clone(),
        samples: Vec::new(),
    };
    let start = RunStart { step: 0, reference: Some(reference) };
    let (_, series) = evolve_with(&initial, &setup, &protocol, &c.evolution, start, &mut keeper)?;
    fs::create_dir_all(dir).map_err(|e| GpfError::io(dir, e))?;
    write_series(&dir.join(SERIES_FILE), &series)?;
    let key = c.growth_key();
    let growth = match series.column(&key) {
        Some(v) if v.len() >= 50 => Some(growth_report(&series.times, &v, &c.analysis.growth)?),
        _ => None,
    };
    let mut k_peak = None;
    let mut label = None;
    if ground.grid.dims() == 1 {
        k_peak = keeper.linear_peak(growth.as_ref());
    } else if let (Some(g), Some(l), Some(n), Some(conf)) = (
        &growth,
        series.column("spin_mode_l"),
        series.column("spin_mode_nr"),
        series.column("spin_mode_confidence"),
    ) {
        if let Some(i) = nearest(&series.times, g.t_peak) {
            label = Some(ModeLabel {
                l: l[i] as usize,
                n_r: n[i] as usize,
                confidence: conf[i],
                low_confidence: conf[i] < 0.5,
                k_peak: f64::NAN,
            });
        }
    }
    Ok(SweepRow {
        f_hz,
        omega_m: protocol.omega_m,
        ok: true,
        error: None,
        k_peak,
        k_predicted: resonance_k(protocol.omega_m, &bg, channel),
        growth,
        label,
    })
}

/// `gpf sweep`: one run per drive frequency, dispatched over a worker
/// pool; failures are recorded and the sweep continues.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Table> {
    let mut table = Table::new(&SWEEP_HEADER);
    fs::create_dir_all(out).map_err(|e| GpfError::io(out, e))?;
    let freqs = cfg.sweep.frequencies_hz.clone();
    if freqs.is_empty() {
        table.write(&out.join("sweep.tsv"))?;
        return Ok(table);
    }
    cfg.validate()?;
    // the ground state does not depend on the drive frequency
    let (ground, _) = ensure_ground_state(cfg, out)?;
    let workers = match cfg.sweep.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(freqs.len());
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; freqs.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= freqs.len() {
                    break;
                }
                let f = freqs[i];
                let dir = out.join(format!("f{f}"));
                let row = sweep_one(cfg, &ground, f, &dir).unwrap_or_else(|e| {
                    log::warn!("sweep run at {f} Hz failed: {e}");
                    SweepRow {
                        f_hz: f,
                        omega_m: hz_to_rad_per_ms(f),
                        ok: false,
                        error: Some(e.to_string()),
                        k_peak: None,
                        k_predicted: f64::NAN,
                        growth: None,
                        label: None,
                    }
                });
                rows.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    for row in rows.into_inner().expect("no worker panicked").into_iter().flatten() {
        table.push(row.cells());
    }
    table.write(&out.join("sweep.tsv"))?;
    Ok(table)
}

/// Dispersion curves and resonant wavenumbers for the ground state of `cfg`.
#[derive(Debug, Clone)]
pub struct DispersionTables {
    pub background: Background,
    pub dispersion: Table,
    pub resonances: Table,
}

pub fn dispersion_tables(cfg: &ExperimentConfig, bg: &Background) -> DispersionTables {
    let d = &cfg.dispersion;
    let (c_d, _) = sound_and_healing(bg, Channel::Density);
    let (c_s, _) = sound_and_healing(bg, Channel::Spin);
    let mut disp = Table::new(&["k", "omega_d", "omega_s", "omega_d_linear", "omega_s_linear"]);
    for i in 0..=d.n_k {
        let k = d.k_max * i as f64 / d.n_k.max(1) as f64;
        disp.push_nums(&[
            k,
            bogoliubov_omega(k, bg, Channel::Density),
            bogoliubov_omega(k, bg, Channel::Spin),
            c_d * k,
            c_s * k,
        ]);
    }
    let mut res = Table::new(&["f_hz", "omega_m", "k_density", "k_spin", "k_sum"]);
    for &f in &d.frequencies_hz {
        let w = hz_to_rad_per_ms(f);
        res.push_nums(&[
            f,
            w,
            resonance_k(w, bg, Channel::Density),
            resonance_k(w, bg, Channel::Spin),
            sum_resonance_k(w, bg),
        ]);
    }
    DispersionTables {
        background: *bg,
        dispersion: disp,
        resonances: res,
    }
}

/// `gpf dispersion`: tables built on the simulated central density.
pub fn cmd_dispersion(cfg: &ExperimentConfig, out: &Path) -> Result<DispersionTables> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| GpfError::io(out, e))?;
    let (ground, _) = ensure_ground_state(cfg, out)?;
    let bg = background_for(cfg, &ground);
    let t = dispersion_tables(cfg, &bg);
    t.dispersion.write(&out.join("dispersion.tsv"))?;
    t.resonances.write(&out.join("resonances.tsv"))?;
    let (c_d, xi_d) = sound_and_healing(&bg, Channel::Density);
    let (c_s, xi_s) = sound_and_healing(&bg, Channel::Spin);
    let mut sound = Table::new(&["n_bar", "c_d", "c_s", "xi_d", "xi_s", "f_mode_hz_per_k"]);
    sound.push_nums(&[bg.n_bar, c_d, c_s, xi_d, xi_s, rad_per_ms_to_hz(c_s)]);
    sound.write(&out.join("sound.tsv"))?;
    Ok(t)
}
