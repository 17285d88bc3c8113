use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use tmnoise::acceptance::{self, AcceptanceOptions};
use tmnoise::calibration::{calibrate as calibrate_triple, demodulate};
use tmnoise::config::{Detection, RunConfig, SCHEMA_VERSION};
use tmnoise::fitting::{fit_couplings, fit_lorentzians};
use tmnoise::model::{solve_steady_state, SystemParams, PUMP};
use tmnoise::noise::Ordering;
use tmnoise::oracle::{self, OracleOutput};
use tmnoise::presets;
use tmnoise::recipes;
use tmnoise::spectra::solver::{by_name, TransferSolver};
use tmnoise::spectra::{SpectrumEngine, SpectrumMeta, SpectrumResult};
use tmnoise::units::hz_to_rad;

use crate::output::{kv, num, read_numeric, Meta, OutDir};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    Core(tmnoise::Error),
    Input(String),
    Output(String),
    Acceptance(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(tmnoise::Error::Io(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Input(_) => 2,
            CliError::Output(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) | CliError::Output(s) => f.write_str(s),
            CliError::Acceptance(names) => write!(f, "acceptance failed: {}", names.join(", ")),
        }
    }
}

impl From<tmnoise::Error> for CliError {
    fn from(e: tmnoise::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Configuration with command-line overrides applied and validated.
fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig {
            schema_version: SCHEMA_VERSION,
            ..RunConfig::default()
        },
    };
    if let Some(p) = &common.preset {
        cfg.preset = Some(p.clone());
    }
    if let Some(s) = &common.solver {
        cfg.solver.name = Some(s.clone());
    }
    if let Some(seed) = common.seed {
        cfg.oracle.seed = Some(seed);
        cfg.fit.seed = Some(seed);
        cfg.calibration.seed = Some(seed);
    }
    if common.fmin.is_some() {
        cfg.grid.fmin_hz = common.fmin;
    }
    if common.fmax.is_some() {
        cfg.grid.fmax_hz = common.fmax;
    }
    if common.points.is_some() {
        cfg.grid.points = common.points;
    }
    if common.quadrature.is_some() {
        cfg.detection.quadrature = common.quadrature.clone();
    }
    if common.port.is_some() {
        cfg.detection.port = common.port.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Resolved {
    cfg: RunConfig,
    params: SystemParams,
    det: Detection,
    solver: Box<dyn TransferSolver>,
    out: OutDir,
}

fn resolve(common: &Common) -> Result<Resolved> {
    let cfg = load(common)?;
    let params = cfg.system_params()?;
    let det = cfg.detection()?;
    let solver = by_name(&cfg.solver_name())?;
    let out = OutDir::create(&common.out)?;
    Ok(Resolved {
        cfg,
        params,
        det,
        solver,
        out,
    })
}

impl Resolved {
    fn sidecar(&self, stem: &str, extra: &Meta) -> Result<PathBuf> {
        Ok(self.out.sidecar(stem, &self.cfg, &self.params, self.solver.name(), extra)?)
    }
}

pub fn spectrum(common: &Common) -> Result<()> {
    let r = resolve(common)?;
    let grid = r.cfg.grid()?;
    let engine = SpectrumEngine::new(&r.params, r.solver.as_ref())?.ordering(r.det.ordering);
    let mut spec = engine.psd(&r.det.selector, &grid, r.det.sided)?;
    if !r.det.chain.is_identity() {
        spec = r.det.chain.apply(&spec);
    }
    r.out.spectrum("spectrum.csv", &spec, &Vec::new())?;
    r.sidecar("spectrum", &spec.meta.pairs())?;
    Ok(())
}

pub fn dips(common: &Common) -> Result<()> {
    let r = resolve(common)?;
    let grid = r.cfg.grid()?;
    let spec = SpectrumEngine::new(&r.params, r.solver.as_ref())?
        .ordering(r.det.ordering)
        .psd(&r.det.selector, &grid, r.det.sided)?;
    let found = recipes::find_dips(&spec, &r.params)?;
    let rows: Vec<Vec<String>> = found
        .iter()
        .map(|d| {
            vec![
                d.window.to_string(),
                num(d.omega / TAU),
                num(d.value),
                num(d.baseline),
                num(d.depth_db),
            ]
        })
        .collect();
    let meta = spec.meta.pairs();
    r.out.table("dips.csv", &meta, &["membrane", "freq_hz", "psd_value", "baseline", "depth_db"], &rows)?;
    r.out.spectrum("spectrum.csv", &spec, &Vec::new())?;
    r.sidecar("dips", &meta)?;
    for d in &found {
        println!("membrane {}: dip at {:.4} Hz, {:.2} dB", d.window, d.omega / TAU, d.depth_db);
    }
    Ok(())
}

pub fn cancellation(common: &Common) -> Result<()> {
    let r = resolve(common)?;
    let grid = r.cfg.grid()?;
    let mut summary = Vec::new();
    for (i, level) in r.cfg.cancellation_levels()?.into_iter().enumerate() {
        let mut params = r.params.clone();
        params.noise.lasers[PUMP] = r.cfg.cancellation_noise(level);
        let run = recipes::cancellation(&params, &r.det.selector, &grid, r.solver.as_ref(), r.det.sided, r.det.ordering)?;
        let mut meta = vec![kv("eps_m_sq", num(level))];
        match &run.window {
            Some(w) => {
                meta.push(kv("window_freq_hz", num(w.omega_min / TAU)));
                meta.push(kv("window_value", num(w.value)));
                meta.push(kv("window_left_peak", num(w.left_peak)));
                meta.push(kv("window_right_peak", num(w.right_peak)));
                meta.push(kv("window_width_half_depth_hz", num(w.width_half_depth / TAU)));
                meta.push(kv("window_width_below_thermal_hz", num(w.width_below_thermal / TAU)));
                summary.push(vec![
                    num(level),
                    num(w.omega_min / TAU),
                    num(w.value),
                    num(w.left_peak),
                    num(w.right_peak),
                    num(w.width_half_depth / TAU),
                    num(w.width_below_thermal / TAU),
                ]);
                println!("eps_m^2 = {level:e}: window at {:.3} Hz", w.omega_min / TAU);
            }
            None => {
                meta.push(kv("window", "absent"));
                summary.push(vec![num(level), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]);
                println!("eps_m^2 = {level:e}: no cancellation window");
            }
        }
        r.out.spectrum(&format!("cancellation_{i}.csv"), &run.total, &meta)?;
        r.out.spectrum(&format!("cancellation_{i}_thermal.csv"), &run.thermal, &meta)?;
    }
    r.out.table(
        "cancellation.csv",
        &Vec::new(),
        &[
            "eps_m_sq",
            "window_freq_hz",
            "window_value",
            "left_peak",
            "right_peak",
            "width_half_depth_hz",
            "width_below_thermal_hz",
        ],
        &summary,
    )?;
    r.sidecar("cancellation", &Vec::new())?;
    Ok(())
}

pub fn calibrate(common: &Common) -> Result<()> {
    let r = resolve(common)?;
    let pump = r.params.optical[PUMP];
    let bw = r.cfg.cancellation.measurement_bw_hz.unwrap_or(presets::MEASUREMENT_BW_HZ);
    let (beat, lockin_bw) = r.cfg.beat_config()?;
    let (triples, source) = match &r.cfg.calibration.data {
        Some(path) => {
            let rows = read_numeric(&data_path(common, path), 3).map_err(CliError::Input)?;
            (rows.into_iter().map(|v| [v[0], v[1], v[2]]).collect::<Vec<_>>(), path.clone())
        }
        None => {
            let samples = beat.sample()?;
            (vec![demodulate(&beat, &samples, lockin_bw)?], "synthetic".to_string())
        }
    };
    let mut rows = Vec::new();
    for [v_car, v_sb, v_om] in triples {
        let c = calibrate_triple(v_car, v_sb, v_om, pump.power, pump.omega_l, bw)?;
        rows.push(vec![
            num(c.v_car),
            num(c.v_sb),
            num(c.v_omega_m),
            num(c.eps_m_sq),
            num(c.eps_m()),
            num(c.a_factor),
            num(c.gamma_eps_equiv),
            num(c.amplitude_white_level()),
        ]);
        println!("eps_m^2 = {:e} photons/s, A = {:e}", c.eps_m_sq, c.a_factor);
    }
    let meta = vec![
        kv("source", source),
        kv("measurement_bw_hz", num(bw)),
        kv("lockin_bw_hz", num(lockin_bw)),
    ];
    r.out.table(
        "calibration.csv",
        &meta,
        &[
            "v_car",
            "v_sb",
            "v_omega_m",
            "eps_m_sq",
            "eps_m",
            "a_factor",
            "gamma_eps",
            "amplitude_white_level",
        ],
        &rows,
    )?;
    r.sidecar("calibration", &meta)?;
    Ok(())
}

/// Relative data paths in a config resolve against the config's directory.
fn data_path(common: &Common, path: &str) -> PathBuf {
    let p = Path::new(path);
    match (&common.config, p.is_relative()) {
        (Some(cfg), true) => cfg.parent().unwrap_or(Path::new(".")).join(p),
        _ => p.to_path_buf(),
    }
}

fn measured_spectrum(rows: Vec<Vec<f64>>, r: &Resolved, source: &str) -> SpectrumResult {
    SpectrumResult {
        omega: rows.iter().map(|v| hz_to_rad(v[0])).collect(),
        values: rows.iter().map(|v| v[1]).collect(),
        meta: SpectrumMeta::new(&r.params, "measured", source.to_string(), r.det.sided, r.det.ordering),
    }
}

pub fn fit(common: &Common, model: &str, data: Option<&Path>, starts: Option<usize>) -> Result<()> {
    let r = resolve(common)?;
    let data = match data {
        Some(p) => Some(p.to_path_buf()),
        None => r.cfg.fit.data.as_deref().map(|p| data_path(common, p)),
    };
    let spec = match &data {
        Some(path) => measured_spectrum(read_numeric(path, 2).map_err(CliError::Input)?, &r, &path.display().to_string()),
        None => SpectrumEngine::new(&r.params, r.solver.as_ref())?
            .ordering(r.det.ordering)
            .psd(&r.det.selector, &recipes::fit_grid(&r.params), r.det.sided)?,
    };
    let mut meta = vec![kv("model", model), kv("points", spec.len())];
    let mut pairs;
    match model {
        "couplings" => {
            let mut opts = r.cfg.fit_options()?;
            if let Some(n) = starts {
                if n == 0 {
                    return Err(CliError::Input("--starts must be at least 1".into()));
                }
                opts.starts = n;
            }
            meta.push(kv("starts", opts.starts));
            let report = fit_couplings(&spec, &r.params, &r.det.selector, r.solver.as_ref(), &opts)?;
            pairs = report.pairs();
            for w in &report.warnings {
                log::warn!("{}: {}", w.parameter, w.reason);
            }
            for j in 0..2 {
                if let Some((g, s)) = report.get(&format!("g0_{j}_{PUMP}")) {
                    pairs.push(kv(&format!("g0_{j}_hz"), num(g / TAU)));
                    pairs.push(kv(&format!("g0_{j}_hz_sigma"), num(s / TAU)));
                    println!("g0[{j}] = {:.4} Hz +- {:.2e}", g / TAU, s / TAU);
                }
            }
        }
        _ => {
            let windows = recipes::resonance_windows(&r.params, recipes::DIP_WINDOW_LINEWIDTHS);
            let (peaks, report) = fit_lorentzians(&spec, &windows)?;
            pairs = report.pairs();
            for (i, p) in peaks.iter().enumerate() {
                pairs.push(kv(&format!("peak{i}_center_hz"), num(p.center / TAU)));
                pairs.push(kv(&format!("peak{i}_fwhm_hz"), num(p.fwhm / TAU)));
                pairs.push(kv(&format!("peak{i}_area"), num(p.area)));
                pairs.push(kv(&format!("peak{i}_offset"), num(p.offset)));
                println!("peak {i}: {:.3} Hz, FWHM {:.3} Hz", p.center / TAU, p.fwhm / TAU);
            }
        }
    }
    meta.push(kv("data", data.map_or("synthetic".to_string(), |p| p.display().to_string())));
    r.out.key_values("fit.csv", &meta, &pairs)?;
    r.sidecar("fit", &meta)?;
    Ok(())
}

pub fn oracle(common: &Common, duration: Option<f64>, decimate: usize) -> Result<()> {
    if decimate == 0 {
        return Err(CliError::Input("--decimate must be at least 1".into()));
    }
    let mut r = resolve(common)?;
    if let Some(d) = duration {
        r.cfg.oracle.duration_s = Some(d);
    }
    let sim = r.cfg.sim_config()?;
    let grid = r.cfg.grid()?;
    let ss = solve_steady_state(&r.params)?;
    let sel = r.det.selector;
    let run = oracle::integrate(&r.params, &ss, &[OracleOutput::Quadrature(sel)], &sim)?;
    let band = oracle::band(&run.omega, grid[0], grid[grid.len() - 1]);
    if band.is_empty() {
        return Err(CliError::Input("grid range contains no Welch bin".into()));
    }
    let engine = SpectrumEngine::with_steady(&r.params, ss, r.solver.as_ref()).ordering(Ordering::Symmetrized);
    let omega = run.omega[band.clone()].to_vec();
    let expected = oracle::expected_welch(&engine, &sel, &omega, run.dt, run.segment_duration)?;
    let mut spec = run.spectrum(&r.params, 0);
    spec.omega = omega.clone();
    spec.values = run.psd[0][band].to_vec();
    let mut worst: f64 = 0.0;
    for m in &r.params.mechanical {
        let b = oracle::band(&omega, m.omega_m - 10.0 * m.gamma_m, m.omega_m + 10.0 * m.gamma_m);
        if !b.is_empty() {
            worst = worst.max(oracle::max_relative_deviation(&spec.values[b.clone()], &expected[b]));
        }
    }
    let meta = vec![
        kv("seed", sim.seed),
        kv("duration_s", num(sim.duration)),
        kv("max_rel_dev_resonances", num(worst)),
    ];
    r.out.spectrum("oracle_psd.csv", &spec, &meta)?;
    let mut exp_spec = engine.psd(&sel, &omega[..1], tmnoise::spectra::Sidedness::TwoSided)?;
    exp_spec.omega = omega;
    exp_spec.values = expected;
    exp_spec.meta.extra.insert("estimator".into(), "expected welch".into());
    r.out.spectrum("oracle_expected.csv", &exp_spec, &meta)?;
    if !run.series.is_empty() && !run.series[0].is_empty() {
        let n = run.series.len();
        let mut header: Vec<String> = vec!["t_s".into()];
        header.extend((0..n - 1).map(|i| format!("state{i}")));
        header.push(run.labels[0].clone());
        let rows: Vec<Vec<String>> = (0..run.series[0].len())
            .step_by(decimate)
            .map(|k| {
                let mut row = vec![num((k + 1) as f64 * run.dt)];
                row.extend(run.series.iter().map(|s| num(s[k])));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        r.out.table("oracle_series.csv", &meta, &header, &rows)?;
    }
    r.sidecar("oracle", &meta)?;
    println!(
        "{} segments, max relative deviation near resonances {:.3}",
        run.segments, worst
    );
    Ok(())
}

pub fn acceptance(common: &Common, tolerance_scale: f64, only: Vec<u32>) -> Result<()> {
    if !(tolerance_scale >= 0.0 && tolerance_scale.is_finite()) {
        return Err(CliError::Input("--tolerance-scale must be finite and >= 0".into()));
    }
    let opts = AcceptanceOptions {
        tolerance_scale,
        only,
        seed: common.seed.unwrap_or(0),
    };
    let report = acceptance::run(&opts);
    for line in report.lines() {
        println!("{line}");
    }
    let out = OutDir::create(&common.out)?;
    std::fs::write(out.path("acceptance.json"), report.to_json())?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Acceptance(
            report.criteria.iter().filter(|c| !c.passed).map(|c| format!("{} {}", c.id, c.name)).collect(),
        ))
    }
}

pub fn validate(files: &[PathBuf]) -> Result<()> {
    if files.is_empty() {
        return Err(CliError::Input("no configuration files given".into()));
    }
    for f in files {
        let cfg = RunConfig::load(f)?;
        cfg.validate()?;
        cfg.grid()?;
        cfg.sim_config()?;
        println!("{}: ok", f.display());
    }
    Ok(())
}
