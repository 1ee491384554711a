//! Experiment configuration: figure presets, config-file parsing, validation,
//! and plot-ready CSV/JSON output with a reproducibility sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WlbcError};
use crate::modulation::{Constellation, ConstellationKind};
use crate::precoding::Method;
use crate::simulate::{
    run_selection_census, run_sweep, ScenarioConfig, SelectionAlgorithm, SweepResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        Some(match s {
            "fig1" => Preset::Fig1,
            "fig2" => Preset::Fig2,
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            "fig5" => Preset::Fig5,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One executable unit of an experiment: either an SNR sweep of a single
/// method or a selected-user census over a K_T grid.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Job {
    Sweep {
        label: String,
        scenario: ScenarioConfig,
        method: Method,
    },
    Census {
        label: String,
        m: usize,
        k_t_grid: Vec<usize>,
        alpha: f64,
        n_trials: usize,
        algorithm: SelectionAlgorithm,
        seed: u64,
    },
}

/// A fully resolved experiment: jobs plus output destination.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub jobs: Vec<Job>,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
}

/// Command-line level overrides applied on top of a preset or config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub symbols: Option<usize>,
    pub alpha: Option<f64>,
    pub snr_min: Option<f64>,
    pub snr_max: Option<f64>,
    pub snr_step: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 12345;
pub const DEFAULT_ALPHA: f64 = 0.4;
const DESK_CHANNELS: usize = 1000;
const DESK_SYMBOLS: usize = 200;

fn snr_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && max >= min);
    let n = ((max - min) / step).round() as usize;
    (0..=n).map(|i| min + i as f64 * step).collect()
}

fn base_scenario(seed: u64, alpha: f64) -> ScenarioConfig {
    ScenarioConfig {
        m: 4,
        k_t: 4,
        constellation: Constellation::pam_unit_power(4),
        methods: vec![Method::WlZf],
        selection: SelectionAlgorithm::None,
        alpha,
        snr_grid_db: snr_grid(0.0, 40.0, 2.5),
        n_channels: DESK_CHANNELS,
        n_symbols: DESK_SYMBOLS,
        tau: 1.0,
        seed,
    }
}

fn sweep_jobs(label_suffix: &str, scenario: &ScenarioConfig) -> Vec<Job> {
    scenario
        .methods
        .iter()
        .map(|&method| Job::Sweep {
            label: format!("{}{}", method.label(), label_suffix),
            scenario: scenario.clone(),
            method,
        })
        .collect()
}

/// Expands a figure preset into its jobs. All parameters (alpha, trial
/// counts, the SNR axis) are pinned here so each figure is one command.
pub fn preset_jobs(preset: Preset, ov: &Overrides) -> Vec<Job> {
    let seed = ov.seed.unwrap_or(DEFAULT_SEED);
    let alpha = ov.alpha.unwrap_or(DEFAULT_ALPHA);
    let mut jobs = match preset {
        Preset::Fig1 => {
            let mut sc = base_scenario(seed, alpha);
            sc.methods = Method::all().to_vec();
            sweep_jobs("", &sc)
        }
        Preset::Fig2 => {
            let mut pam = base_scenario(seed, alpha);
            pam.methods = vec![
                Method::Mrt,
                Method::WlZf,
                Method::WlMmse,
                Method::WlMmseIter,
                Method::WlMslnr,
            ];
            let mut qam = base_scenario(seed, alpha);
            qam.k_t = 2;
            qam.constellation = Constellation::qam_unit_power(16);
            qam.methods = vec![Method::LinZf, Method::LinMmse];
            let mut jobs = sweep_jobs("", &pam);
            jobs.extend(sweep_jobs("_qam16", &qam));
            jobs
        }
        Preset::Fig3 => {
            let grid = vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];
            let mut jobs = Vec::new();
            for m in [2usize, 4] {
                for alg in [SelectionAlgorithm::Sus, SelectionAlgorithm::Susom] {
                    jobs.push(Job::Census {
                        label: format!("{}_m{}", alg.label(), m),
                        m,
                        k_t_grid: grid.clone(),
                        alpha,
                        n_trials: ov.trials.unwrap_or(1000),
                        algorithm: alg,
                        seed,
                    });
                }
            }
            jobs
        }
        Preset::Fig4 => {
            let mut sc = base_scenario(seed, alpha);
            sc.k_t = 100;
            sc.selection = SelectionAlgorithm::Susom;
            sc.n_channels = 500;
            sc.methods = vec![
                Method::Mrt,
                Method::LinMslnr,
                Method::WlZf,
                Method::WlMmse,
                Method::WlMmseIter,
                Method::WlMslnr,
            ];
            sweep_jobs("", &sc)
        }
        Preset::Fig5 => {
            let mut susom_pam = base_scenario(seed, alpha);
            susom_pam.k_t = 100;
            susom_pam.selection = SelectionAlgorithm::Susom;
            susom_pam.n_channels = 500;
            susom_pam.methods = vec![Method::WlMmse];
            let mut sus_pam = susom_pam.clone();
            sus_pam.selection = SelectionAlgorithm::Sus;
            let mut sus_qam = sus_pam.clone();
            sus_qam.constellation = Constellation::qam_unit_power(16);
            sus_qam.methods = vec![Method::LinMmse];
            let mut jobs = sweep_jobs("_susom", &susom_pam);
            jobs.extend(sweep_jobs("_sus", &sus_pam));
            jobs.extend(sweep_jobs("_sus_qam16", &sus_qam));
            jobs
        }
    };
    for job in &mut jobs {
        if let Job::Sweep { scenario, .. } = job {
            apply_overrides(scenario, ov);
        }
    }
    jobs
}

fn apply_overrides(sc: &mut ScenarioConfig, ov: &Overrides) {
    if let Some(s) = ov.seed {
        sc.seed = s;
    }
    if let Some(t) = ov.trials {
        sc.n_channels = t;
    }
    if let Some(n) = ov.symbols {
        sc.n_symbols = n;
    }
    if let Some(a) = ov.alpha {
        sc.alpha = a;
    }
    if ov.snr_min.is_some() || ov.snr_max.is_some() || ov.snr_step.is_some() {
        let min = ov.snr_min.unwrap_or(0.0);
        let max = ov.snr_max.unwrap_or(40.0);
        let step = ov.snr_step.unwrap_or(2.5);
        sc.snr_grid_db = snr_grid(min, max, step);
    }
}

/// Flat key-value config file (TOML), mirroring the scenario field names.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m: usize,
    pub k_t: usize,
    /// e.g. "pam4", "pam2", "qam16"
    pub modulation: String,
    pub methods: Vec<String>,
    #[serde(default = "default_selection")]
    pub selection: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub snr_min: f64,
    #[serde(default = "default_snr_max")]
    pub snr_max: f64,
    #[serde(default = "default_snr_step")]
    pub snr_step: f64,
    #[serde(default = "default_channels")]
    pub n_channels: usize,
    #[serde(default = "default_symbols")]
    pub n_symbols: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_selection() -> String {
    "none".into()
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_snr_max() -> f64 {
    40.0
}
fn default_snr_step() -> f64 {
    2.5
}
fn default_channels() -> usize {
    DESK_CHANNELS
}
fn default_symbols() -> usize {
    DESK_SYMBOLS
}
fn default_tau() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn parse_modulation(s: &str) -> Result<Constellation> {
    let lower = s.to_ascii_lowercase();
    if let Some(order) = lower.strip_prefix("pam") {
        let order: usize = order
            .parse()
            .map_err(|_| WlbcError::InvalidConfig(format!("modulation: bad PAM order in {s:?}")))?;
        if order < 2 {
            return Err(WlbcError::InvalidConfig(
                "modulation: PAM order must be >= 2".into(),
            ));
        }
        Ok(Constellation::pam_unit_power(order))
    } else if let Some(order) = lower.strip_prefix("qam") {
        let order: usize = order
            .parse()
            .map_err(|_| WlbcError::InvalidConfig(format!("modulation: bad QAM order in {s:?}")))?;
        let axis = (order as f64).sqrt().round() as usize;
        if axis * axis != order || !axis.is_power_of_two() {
            return Err(WlbcError::InvalidConfig(
                "modulation: QAM order must be an even power of 2".into(),
            ));
        }
        Ok(Constellation::qam_unit_power(order))
    } else {
        Err(WlbcError::InvalidConfig(format!(
            "modulation: expected pam<L> or qam<L>, got {s:?}"
        )))
    }
}

/// Resolves a config file into jobs, applying CLI overrides.
pub fn config_file_jobs(path: &Path, ov: &Overrides) -> Result<Vec<Job>> {
    let text = std::fs::read_to_string(path)?;
    let cf: ConfigFile = toml::from_str(&text)
        .map_err(|e| WlbcError::InvalidConfig(format!("config file: {e}")))?;
    let constellation = parse_modulation(&cf.modulation)?;
    let methods: Vec<Method> = cf
        .methods
        .iter()
        .map(|s| {
            Method::parse(s)
                .ok_or_else(|| WlbcError::InvalidConfig(format!("methods: unknown method {s:?}")))
        })
        .collect::<Result<_>>()?;
    let selection = SelectionAlgorithm::parse(&cf.selection)
        .ok_or_else(|| WlbcError::InvalidConfig(format!("selection: unknown {:?}", cf.selection)))?;
    let mut sc = ScenarioConfig {
        m: cf.m,
        k_t: cf.k_t,
        constellation,
        methods,
        selection,
        alpha: cf.alpha,
        snr_grid_db: snr_grid(cf.snr_min, cf.snr_max, cf.snr_step),
        n_channels: cf.n_channels,
        n_symbols: cf.n_symbols,
        tau: cf.tau,
        seed: cf.seed,
    };
    apply_overrides(&mut sc, ov);
    Ok(sweep_jobs("", &sc))
}

/// Checks a resolved job list; an empty return means valid.
pub fn validate_config(jobs: &[Job]) -> Vec<String> {
    let mut violations = Vec::new();
    if jobs.is_empty() {
        violations.push("no jobs resolved (empty methods list?)".into());
    }
    for job in jobs {
        match job {
            Job::Sweep {
                label, scenario, ..
            } => {
                let sc = scenario;
                if sc.m < 1 || sc.k_t < 1 {
                    violations.push(format!("{label}: M and K must be >= 1"));
                }
                if !(0.0..1.0).contains(&sc.alpha) {
                    violations.push(format!("{label}: alpha must be in [0, 1)"));
                }
                if sc.snr_grid_db.is_empty() {
                    violations.push(format!("{label}: SNR grid is empty"));
                }
                if sc.n_channels < 1 || sc.n_symbols < 1 {
                    violations.push(format!("{label}: n_channels and n_symbols must be >= 1"));
                }
                if sc.tau <= 0.0 {
                    violations.push(format!("{label}: tau must be positive"));
                }
                if sc.constellation.kind == ConstellationKind::SquareQam
                    && sc.methods.iter().any(|m| {
                        matches!(
                            m,
                            Method::WlZf | Method::WlMmse | Method::WlMmseIter | Method::WlMslnr
                        )
                    })
                {
                    violations.push(format!(
                        "{label}: widely linear methods apply to one-dimensional modulation only"
                    ));
                }
                // dimension rules only bind when the served set is fixed;
                // selection bounds K by construction (M for SUS, 2M for SUSOM)
                if sc.selection == SelectionAlgorithm::None {
                    for &m in &sc.methods {
                        match m {
                            Method::WlZf | Method::WlMmseIter if sc.k_t > 2 * sc.m => {
                                violations.push(format!(
                                    "{label}: {} requires K <= 2M ({} > {})",
                                    m.label(),
                                    sc.k_t,
                                    2 * sc.m
                                ));
                            }
                            Method::LinZf | Method::LinMmse | Method::LinMmseIter
                                if sc.k_t > sc.m =>
                            {
                                violations.push(format!(
                                    "{label}: {} requires K <= M ({} > {})",
                                    m.label(),
                                    sc.k_t,
                                    sc.m
                                ));
                            }
                            _ => {}
                        }
                    }
                }
            }
            Job::Census {
                label,
                m,
                k_t_grid,
                alpha,
                n_trials,
                ..
            } => {
                if *m < 1 {
                    violations.push(format!("{label}: M must be >= 1"));
                }
                if k_t_grid.is_empty() {
                    violations.push(format!("{label}: K_T grid is empty"));
                }
                if !(0.0..1.0).contains(alpha) {
                    violations.push(format!("{label}: alpha must be in [0, 1)"));
                }
                if *n_trials < 1 {
                    violations.push(format!("{label}: n_trials must be >= 1"));
                }
            }
        }
    }
    violations
}

/// One output row, shared by all presets: same columns in the same order.
#[derive(Debug, Clone, Serialize)]
pub struct OutputRow {
    pub method: String,
    pub x_value: f64,
    pub avg_ser: f64,
    pub avg_sum_rate_bits: f64,
    pub avg_selected_users: f64,
    pub n_trials: usize,
    pub seed: u64,
}

fn rows_from_sweep(label: &str, seed: u64, result: &SweepResult) -> Vec<OutputRow> {
    result
        .points
        .iter()
        .map(|p| OutputRow {
            method: label.to_string(),
            x_value: p.x_value,
            avg_ser: p.avg_ser,
            avg_sum_rate_bits: p.avg_sum_rate,
            avg_selected_users: p.avg_selected_users,
            n_trials: p.n_trials,
            seed,
        })
        .collect()
}

/// Outcome of an experiment: the emitted rows plus the realization failure
/// count for the numerical-failure exit code.
pub struct ExperimentOutcome {
    pub rows: Vec<OutputRow>,
    pub rejected: usize,
    pub total_trials: usize,
}

/// Runs every job and writes the tabular output plus a JSON sidecar with the
/// fully resolved configuration.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let violations = validate_config(&spec.jobs);
    if !violations.is_empty() {
        return Err(WlbcError::InvalidConfig(violations.join("; ")));
    }

    let mut rows = Vec::new();
    let mut rejected = 0usize;
    let mut total_trials = 0usize;
    for job in &spec.jobs {
        match job {
            Job::Sweep {
                label,
                scenario,
                method,
            } => {
                let result = run_sweep(scenario, *method);
                for p in &result.points {
                    rejected += p.rejected;
                    total_trials += p.n_trials;
                }
                rows.extend(rows_from_sweep(label, scenario.seed, &result));
            }
            Job::Census {
                label,
                m,
                k_t_grid,
                alpha,
                n_trials,
                algorithm,
                seed,
            } => {
                let results =
                    run_selection_census(*m, k_t_grid, *alpha, *n_trials, &[*algorithm], *seed);
                total_trials += n_trials * k_t_grid.len();
                rows.extend(rows_from_sweep(label, *seed, &results[0]));
            }
        }
    }

    write_output(&spec.output_path, spec.output_format, &rows)?;
    write_sidecar(spec)?;
    Ok(ExperimentOutcome {
        rows,
        rejected,
        total_trials,
    })
}

fn write_output(path: &Path, format: OutputFormat, rows: &[OutputRow]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    match format {
        OutputFormat::Csv => {
            writeln!(
                file,
                "method,x_value,avg_ser,avg_sum_rate_bits,avg_selected_users,n_trials,seed"
            )?;
            for r in rows {
                writeln!(
                    file,
                    "{},{},{},{},{},{},{}",
                    r.method,
                    r.x_value,
                    r.avg_ser,
                    r.avg_sum_rate_bits,
                    r.avg_selected_users,
                    r.n_trials,
                    r.seed
                )?;
            }
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(rows).expect("rows serialize");
            file.write_all(text.as_bytes())?;
            file.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn write_sidecar(spec: &ExperimentSpec) -> Result<()> {
    let mut sidecar = spec.output_path.as_os_str().to_owned();
    sidecar.push(".meta.json");
    let text = serde_json::to_string_pretty(spec).expect("spec serialize");
    std::fs::write(PathBuf::from(sidecar), text + "\n")?;
    Ok(())
}
