//! Link-level Monte Carlo engine: end-to-end downlink transmission, symbol
//! error rates, per-user SINR measurement, sum-rate estimation, and SNR
//! sweeps with deterministic counter-addressed RNG substreams.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{draw_noise, draw_rayleigh_channel, ChannelSet, RngStream};
use crate::error::{Result, WlbcError};
use crate::modulation::{
    mi_pam_awgn, mi_qam_awgn, qam_detect, wl_pam_detect, Constellation, ConstellationKind,
};
use crate::numerics::{CMat, RMat};
use crate::precoding::{build_precoder, Method, Precoder};
use crate::selection::{sus, susom};

/// Which user-selection algorithm runs before precoding, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionAlgorithm {
    None,
    Sus,
    Susom,
}

impl SelectionAlgorithm {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => SelectionAlgorithm::None,
            "sus" => SelectionAlgorithm::Sus,
            "susom" => SelectionAlgorithm::Susom,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            SelectionAlgorithm::None => "none",
            SelectionAlgorithm::Sus => "sus",
            SelectionAlgorithm::Susom => "susom",
        }
    }
}

/// One simulated scenario: system dimensions, modulation, selection, SNR
/// grid, and Monte Carlo budget. `k_t` is the number of available users;
/// with `selection = None` all of them are served.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScenarioConfig {
    pub m: usize,
    pub k_t: usize,
    pub constellation: Constellation,
    pub methods: Vec<Method>,
    pub selection: SelectionAlgorithm,
    pub alpha: f64,
    pub snr_grid_db: Vec<f64>,
    pub n_channels: usize,
    pub n_symbols: usize,
    pub tau: f64,
    pub seed: u64,
}

/// Estimates at one sweep point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepPoint {
    pub x_value: f64,
    pub avg_ser: f64,
    pub avg_sum_rate: f64,
    pub avg_selected_users: f64,
    pub n_trials: usize,
    pub total_symbols: u64,
    pub symbol_errors: u64,
    pub rejected: usize,
}

/// Per-SNR-point results of one method's sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepResult {
    pub method: String,
    pub points: Vec<SweepPoint>,
}

/// Real received samples `y^R = Re{W H U s + W z}` for a block of symbols.
pub fn transmit_block(cs: &ChannelSet, p: &Precoder, symbols: &CMat, noise: &CMat) -> Result<RMat> {
    let y = transmit_block_complex(cs, p, symbols, noise)?;
    Ok(RMat::from_fn(y.nrows(), y.ncols(), |i, j| y[(i, j)].re))
}

/// Complex received samples `y = W H U s + W z`.
pub fn transmit_block_complex(
    cs: &ChannelSet,
    p: &Precoder,
    symbols: &CMat,
    noise: &CMat,
) -> Result<CMat> {
    let k = cs.num_users();
    if symbols.nrows() != k || noise.nrows() != k || symbols.ncols() != noise.ncols() {
        return Err(WlbcError::DimensionMismatch(format!(
            "transmit_block: {} users, symbols {}x{}, noise {}x{}",
            k,
            symbols.nrows(),
            symbols.ncols(),
            noise.nrows(),
            noise.ncols()
        )));
    }
    if p.u.nrows() != cs.num_antennas() || p.u.ncols() != k {
        return Err(WlbcError::DimensionMismatch(format!(
            "transmit_block: U is {}x{}, expected {}x{}",
            p.u.nrows(),
            p.u.ncols(),
            cs.num_antennas(),
            k
        )));
    }
    let g = cs.effective_channel() * &p.u;
    let mut y = &g * symbols;
    for i in 0..k {
        let w = cs.rx_filters[i];
        for j in 0..y.ncols() {
            y[(i, j)] += w * noise[(i, j)];
        }
    }
    Ok(y)
}

/// Detection/measurement domain: the real part only (PAM with widely linear
/// receivers) or the full complex observation (QAM).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    Complex,
}

impl Domain {
    pub fn for_constellation(c: &Constellation) -> Domain {
        match c.kind {
            ConstellationKind::Pam => Domain::Real,
            ConstellationKind::SquareQam => Domain::Complex,
        }
    }
}

/// Per-user SINR at the intended receivers. In the real domain the useful
/// gain is `Re{w_k h_k u_k}`, interference counts only real parts, and the
/// effective noise is `sigma_{z'_k}^2 / 2`; in the complex domain magnitudes
/// and the full noise variance are used.
pub fn measure_sinr(cs: &ChannelSet, p: &Precoder, domain: Domain) -> Vec<f64> {
    let g = cs.effective_channel() * &p.u;
    let k = cs.num_users();
    (0..k)
        .map(|i| {
            let (signal, interference) = match domain {
                Domain::Real => {
                    let s = p.symbol_powers[i] * g[(i, i)].re * g[(i, i)].re;
                    let int: f64 = (0..k)
                        .filter(|&j| j != i)
                        .map(|j| p.symbol_powers[j] * g[(i, j)].re * g[(i, j)].re)
                        .sum();
                    (s, int)
                }
                Domain::Complex => {
                    let s = p.symbol_powers[i] * g[(i, i)].norm_sqr();
                    let int: f64 = (0..k)
                        .filter(|&j| j != i)
                        .map(|j| p.symbol_powers[j] * g[(i, j)].norm_sqr())
                        .sum();
                    (s, int)
                }
            };
            let noise = match domain {
                Domain::Real => cs.post_filter_noise_var(i) / 2.0,
                Domain::Complex => cs.post_filter_noise_var(i),
            };
            signal / (interference + noise)
        })
        .collect()
}

// Substream address spaces: channels are shared across SNR points (paired
// comparisons), symbols and noise are unique per (point, trial).
const STREAM_SYMBOLS: u64 = 1 << 40;
const STREAM_NOISE: u64 = 1 << 41;

struct TrialOutcome {
    errors: u64,
    symbols: u64,
    sum_rate: f64,
    selected: usize,
    rejected: bool,
}

fn zero_trial() -> TrialOutcome {
    TrialOutcome {
        errors: 0,
        symbols: 0,
        sum_rate: 0.0,
        selected: 0,
        rejected: true,
    }
}

fn run_trial(cfg: &ScenarioConfig, method: Method, point_idx: usize, trial: usize) -> TrialOutcome {
    use rand::Rng;
    let snr_db = cfg.snr_grid_db[point_idx];
    let sigma_z2 = cfg.tau / 10f64.powf(snr_db / 10.0);

    let mut cs = draw_rayleigh_channel(cfg.m, cfg.k_t, RngStream::new(cfg.seed, trial as u64));
    for v in cs.noise_vars.iter_mut() {
        *v = sigma_z2;
    }

    let cs = match cfg.selection {
        SelectionAlgorithm::None => cs,
        SelectionAlgorithm::Sus => cs.subset(&sus(&cs, cfg.alpha).selected),
        SelectionAlgorithm::Susom => cs.subset(&susom(&cs, cfg.alpha).selected),
    };
    let k = cs.num_users();
    let powers = vec![cfg.constellation.symbol_power(); k];

    let precoder = match build_precoder(method, &cs, cfg.tau, &powers) {
        Ok(p) => p,
        Err(_) => return zero_trial(),
    };

    let domain = Domain::for_constellation(&cfg.constellation);
    let g = cs.effective_channel() * &precoder.u;
    // effective gains; a non-positive real gain violates the WL sign
    // convention and rejects the realization
    let gains: Vec<Complex64> = (0..k).map(|i| g[(i, i)]).collect();
    if domain == Domain::Real && gains.iter().any(|v| v.re <= 0.0) {
        return zero_trial();
    }
    if domain == Domain::Complex && gains.iter().any(|v| v.norm() == 0.0) {
        return zero_trial();
    }

    let sinrs = measure_sinr(&cs, &precoder, domain);
    let sum_rate: f64 = sinrs
        .iter()
        .map(|&s| match domain {
            Domain::Real => mi_pam_awgn(&cfg.constellation, s),
            Domain::Complex => mi_qam_awgn(&cfg.constellation, s),
        })
        .sum();

    let stream_off = (point_idx * cfg.n_channels + trial) as u64;
    let mut sym_rng = RngStream::new(cfg.seed, STREAM_SYMBOLS + stream_off).rng();
    let order = cfg.constellation.order;
    let indices: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            (0..cfg.n_symbols)
                .map(|_| sym_rng.random_range(0..order))
                .collect()
        })
        .collect();
    let symbols = CMat::from_fn(k, cfg.n_symbols, |i, j| cfg.constellation.symbol(indices[i][j]));
    let noise = draw_noise(&cs, cfg.n_symbols, RngStream::new(cfg.seed, STREAM_NOISE + stream_off));

    let y = match transmit_block_complex(&cs, &precoder, &symbols, &noise) {
        Ok(y) => y,
        Err(_) => return zero_trial(),
    };

    let mut errors = 0u64;
    for i in 0..k {
        for j in 0..cfg.n_symbols {
            let detected = match domain {
                Domain::Real => wl_pam_detect(y[(i, j)].re, gains[i].re, &cfg.constellation),
                Domain::Complex => qam_detect(y[(i, j)], gains[i], &cfg.constellation),
            };
            match detected {
                Ok(l) if l == indices[i][j] => {}
                Ok(_) => errors += 1,
                Err(_) => return zero_trial(),
            }
        }
    }

    TrialOutcome {
        errors,
        symbols: (k * cfg.n_symbols) as u64,
        sum_rate,
        selected: k,
        rejected: false,
    }
}

/// Full sweep of one method over the configured SNR grid, estimating both
/// symbol error rate and Gaussian-interference sum rate per point.
pub fn run_sweep(cfg: &ScenarioConfig, method: Method) -> SweepResult {
    assert!(cfg.n_channels >= 1 && cfg.n_symbols >= 1);
    assert!(!cfg.snr_grid_db.is_empty());
    let points = cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(pi, &snr)| {
            let outcomes: Vec<TrialOutcome> = (0..cfg.n_channels)
                .into_par_iter()
                .map(|t| run_trial(cfg, method, pi, t))
                .collect();
            summarize(snr, &outcomes)
        })
        .collect();
    SweepResult {
        method: method.label().to_string(),
        points,
    }
}

fn summarize(x_value: f64, outcomes: &[TrialOutcome]) -> SweepPoint {
    let mut errors = 0u64;
    let mut symbols = 0u64;
    let mut rate = 0.0;
    let mut rate_c = 0.0; // Kahan compensation
    let mut selected = 0usize;
    let mut rejected = 0usize;
    let mut kept = 0usize;
    for o in outcomes {
        if o.rejected {
            rejected += 1;
            continue;
        }
        kept += 1;
        errors += o.errors;
        symbols += o.symbols;
        let y = o.sum_rate - rate_c;
        let t = rate + y;
        rate_c = (t - rate) - y;
        rate = t;
        selected += o.selected;
    }
    SweepPoint {
        x_value,
        avg_ser: if symbols > 0 {
            errors as f64 / symbols as f64
        } else {
            f64::NAN
        },
        avg_sum_rate: if kept > 0 { rate / kept as f64 } else { f64::NAN },
        avg_selected_users: if kept > 0 {
            selected as f64 / kept as f64
        } else {
            f64::NAN
        },
        n_trials: outcomes.len(),
        total_symbols: symbols,
        symbol_errors: errors,
        rejected,
    }
}

/// SER-focused sweep (alias of [`run_sweep`]; both estimates are computed in
/// one pass over the realizations).
pub fn run_ser_sweep(cfg: &ScenarioConfig, method: Method) -> SweepResult {
    run_sweep(cfg, method)
}

/// Sum-rate-focused sweep.
pub fn run_rate_sweep(cfg: &ScenarioConfig, method: Method) -> SweepResult {
    run_sweep(cfg, method)
}

/// Average selected-user counts vs. the number of available users.
pub fn run_selection_census(
    m: usize,
    k_t_grid: &[usize],
    alpha: f64,
    n_trials: usize,
    algorithms: &[SelectionAlgorithm],
    seed: u64,
) -> Vec<SweepResult> {
    algorithms
        .iter()
        .map(|&alg| {
            let points = k_t_grid
                .iter()
                .map(|&k_t| {
                    let counts: Vec<usize> = (0..n_trials)
                        .into_par_iter()
                        .map(|t| {
                            let cs = draw_rayleigh_channel(
                                m,
                                k_t,
                                RngStream::new(seed, (k_t * n_trials + t) as u64),
                            );
                            match alg {
                                SelectionAlgorithm::Sus => sus(&cs, alpha).selected.len(),
                                SelectionAlgorithm::Susom => susom(&cs, alpha).selected.len(),
                                SelectionAlgorithm::None => cs.num_users(),
                            }
                        })
                        .collect();
                    let avg = counts.iter().sum::<usize>() as f64 / n_trials as f64;
                    SweepPoint {
                        x_value: k_t as f64,
                        avg_ser: f64::NAN,
                        avg_sum_rate: f64::NAN,
                        avg_selected_users: avg,
                        n_trials,
                        total_symbols: 0,
                        symbol_errors: 0,
                        rejected: 0,
                    }
                })
                .collect();
            SweepResult {
                method: alg.label().to_string(),
                points,
            }
        })
        .collect()
}
