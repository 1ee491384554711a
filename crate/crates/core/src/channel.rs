//! Rayleigh channel and CSCG noise generation with deterministic,
//! counter-addressable RNG substreams, plus the per-user receive-filter model.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::numerics::CMat;

/// A (seed, stream) pair addressing one independent RNG substream.
/// Identical pairs reproduce identical draws; distinct stream ids are
/// non-overlapping by construction of the counter-based generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Channel matrix H (rows h_k), per-user noise variances, and receive-filter
/// coefficients w_k (the diagonal of W).
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h: CMat,
    pub noise_vars: Vec<f64>,
    pub rx_filters: Vec<Complex64>,
}

impl ChannelSet {
    pub fn new(h: CMat, noise_vars: Vec<f64>, rx_filters: Vec<Complex64>) -> Self {
        let k = h.nrows();
        assert!(k >= 1 && h.ncols() >= 1);
        assert_eq!(noise_vars.len(), k);
        assert_eq!(rx_filters.len(), k);
        assert!(noise_vars.iter().all(|&v| v > 0.0));
        assert!(rx_filters.iter().all(|w| w.norm_sqr() > 0.0));
        ChannelSet {
            h,
            noise_vars,
            rx_filters,
        }
    }

    pub fn num_users(&self) -> usize {
        self.h.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.h.ncols()
    }

    /// Effective channel H' = W H (row k scaled by w_k).
    pub fn effective_channel(&self) -> CMat {
        let mut hp = self.h.clone();
        for (k, w) in self.rx_filters.iter().enumerate() {
            for j in 0..hp.ncols() {
                hp[(k, j)] *= w;
            }
        }
        hp
    }

    /// Post-filter noise variance of user k, `sigma_{z'_k}^2 = sigma_{z_k}^2 |w_k|^2`.
    pub fn post_filter_noise_var(&self, k: usize) -> f64 {
        self.noise_vars[k] * self.rx_filters[k].norm_sqr()
    }

    /// A new set holding only the listed users (selection output).
    pub fn subset(&self, users: &[usize]) -> ChannelSet {
        let h = CMat::from_fn(users.len(), self.num_antennas(), |i, j| {
            self.h[(users[i], j)]
        });
        ChannelSet::new(
            h,
            users.iter().map(|&u| self.noise_vars[u]).collect(),
            users.iter().map(|&u| self.rx_filters[u]).collect(),
        )
    }
}

fn cscg(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws a K x M channel with i.i.d. unit-variance CSCG entries.
/// Noise variances default to 1 and receive filters to 1; callers overwrite
/// them for a given operating point.
pub fn draw_rayleigh_channel(m: usize, k: usize, stream: RngStream) -> ChannelSet {
    assert!(m >= 1 && k >= 1);
    let mut rng = stream.rng();
    let h = DMatrix::from_fn(k, m, |_, _| cscg(&mut rng, 1.0));
    ChannelSet::new(h, vec![1.0; k], vec![Complex64::new(1.0, 0.0); k])
}

/// Draws a K x n matrix of CSCG noise, row k with variance `noise_vars[k]`.
pub fn draw_noise(cs: &ChannelSet, n_symbols: usize, stream: RngStream) -> CMat {
    assert!(n_symbols >= 1);
    let mut rng = stream.rng();
    let k = cs.num_users();
    let mut z = CMat::zeros(k, n_symbols);
    for i in 0..k {
        for j in 0..n_symbols {
            z[(i, j)] = cscg(&mut rng, cs.noise_vars[i]);
        }
    }
    z
}
