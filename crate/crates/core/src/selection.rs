//! Semi-orthogonal user selection: SUSOM (real-part orthogonality, up to 2M
//! users) and the conventional SUS baseline (complex orthogonality, up to M).

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Result, WlbcError};
use crate::numerics::CMat;

/// Inner-product convention used by the selection routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistMode {
    /// `|Re{h e^H}| / (|h| |e|)` — the one-dimensional-modulation notion.
    Real,
    /// `|h e^H| / (|h| |e|)` — cosine of the principal angle.
    Complex,
}

/// Ordered selection outcome: chosen user indices and the orthogonalized
/// basis vectors `e_{pi_i}` stored during the greedy loop.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub basis: Vec<CMat>,
    pub alpha: f64,
}

fn inner(h: &CMat, e: &CMat) -> Complex64 {
    (0..h.ncols()).map(|j| h[(0, j)] * e[(0, j)].conj()).sum()
}

/// Normalized orthogonality measure between a channel and a basis vector.
pub fn channel_dist(hj: &CMat, e: &CMat, mode: DistMode) -> Result<f64> {
    let nh = hj.norm();
    let ne = e.norm();
    if nh == 0.0 || ne == 0.0 {
        return Err(WlbcError::ZeroVector("channel_dist"));
    }
    let ip = inner(hj, e);
    let num = match mode {
        DistMode::Real => ip.re.abs(),
        DistMode::Complex => ip.norm(),
    };
    Ok(num / (nh * ne))
}

/// Component of `h` orthogonal to the stored basis under the chosen inner
/// product: real mode deflates only the real part of each projection.
fn project_residual(h: &CMat, basis: &[CMat], mode: DistMode) -> CMat {
    let mut res = h.clone();
    for e in basis {
        let denom = e.norm_squared();
        let ip = inner(&res, e);
        match mode {
            DistMode::Real => {
                let coeff = Complex64::new(ip.re / denom, 0.0);
                res -= e * coeff;
            }
            DistMode::Complex => {
                res -= e * (ip / denom);
            }
        }
    }
    res
}

fn greedy_select(cs: &ChannelSet, alpha: f64, mode: DistMode, max_users: usize) -> SelectionResult {
    assert!((0.0..1.0).contains(&alpha));
    let k_t = cs.num_users();
    let mut available: Vec<usize> = (0..k_t).collect();
    let mut selected = Vec::new();
    let mut basis: Vec<CMat> = Vec::new();

    while selected.len() < max_users && !available.is_empty() {
        // Step 1: strongest residual channel-to-noise ratio; ties break by
        // the lowest user index (strict > keeps the earliest maximum).
        let mut best: Option<(usize, f64, CMat)> = None;
        for &k in &available {
            let hk = CMat::from_fn(1, cs.num_antennas(), |_, j| cs.h[(k, j)]);
            let resid = project_residual(&hk, &basis, mode);
            let metric = resid.norm() / cs.noise_vars[k].sqrt();
            if best.as_ref().map_or(true, |(_, m, _)| metric > *m) {
                best = Some((k, metric, resid));
            }
        }
        let (pi, _, resid) = best.expect("available set is nonempty");

        // Steps 2-4: bookkeeping.
        selected.push(pi);
        basis.push(resid);
        available.retain(|&k| k != pi);

        // Step 5: prune users not semi-orthogonal to the new basis vector.
        let e = basis.last().unwrap();
        available.retain(|&k| {
            let hk = CMat::from_fn(1, cs.num_antennas(), |_, j| cs.h[(k, j)]);
            channel_dist(&hk, e, mode).map_or(false, |d| d <= alpha)
        });
    }

    SelectionResult {
        selected,
        basis,
        alpha,
    }
}

/// Semi-orthogonal user selection for one-dimensional modulation. Selects up
/// to 2M users using real-part orthogonality.
pub fn susom(cs: &ChannelSet, alpha: f64) -> SelectionResult {
    greedy_select(cs, alpha, DistMode::Real, 2 * cs.num_antennas())
}

/// Conventional semi-orthogonal user selection. Selects up to M users using
/// complex orthogonality.
pub fn sus(cs: &ChannelSet, alpha: f64) -> SelectionResult {
    greedy_select(cs, alpha, DistMode::Complex, cs.num_antennas())
}
