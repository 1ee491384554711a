//! Transmit precoders for the MISO broadcast channel: widely linear MRT, ZF,
//! MMSE (closed-form regularized and dual-ascent iterative), and MSLNR, plus
//! their strictly linear complex-domain baselines.
//!
//! All widely linear constructions solve in the composite-real domain
//! (`t1_stack`/`t2_widen`) and map the solution back to one canonical
//! complex precoding matrix `U` (M x K).

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Result, WlbcError};
use crate::numerics::{hpd_solve, rank1_gev_max, spd_solve, t1_unstack, t2_widen, CMat, RMat};

/// Precoding method tag, used for dispatch and output labelling.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Maximum ratio transmission. Identical under linear and widely linear
    /// processing, listed once per family in figure presets.
    Mrt,
    WlMrt,
    WlZf,
    WlMmse,
    WlMmseIter,
    WlMslnr,
    LinZf,
    LinMmse,
    LinMmseIter,
    LinMslnr,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mrt => "mrt",
            Method::WlMrt => "wl_mrt",
            Method::WlZf => "wl_zf",
            Method::WlMmse => "wl_mmse",
            Method::WlMmseIter => "wl_mmse_iter",
            Method::WlMslnr => "wl_mslnr",
            Method::LinZf => "lin_zf",
            Method::LinMmse => "lin_mmse",
            Method::LinMmseIter => "lin_mmse_iter",
            Method::LinMslnr => "lin_mslnr",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Some(match s {
            "mrt" => Method::Mrt,
            "wl_mrt" => Method::WlMrt,
            "wl_zf" => Method::WlZf,
            "wl_mmse" => Method::WlMmse,
            "wl_mmse_iter" => Method::WlMmseIter,
            "wl_mslnr" => Method::WlMslnr,
            "lin_zf" => Method::LinZf,
            "lin_mmse" => Method::LinMmse,
            "lin_mmse_iter" => Method::LinMmseIter,
            "lin_mslnr" => Method::LinMslnr,
            _ => return None,
        })
    }

    pub fn all() -> &'static [Method] {
        &[
            Method::Mrt,
            Method::WlMrt,
            Method::WlZf,
            Method::WlMmse,
            Method::WlMmseIter,
            Method::WlMslnr,
            Method::LinZf,
            Method::LinMmse,
            Method::LinMmseIter,
            Method::LinMslnr,
        ]
    }
}

/// A precoding matrix U (M x K) together with the per-user symbol powers
/// (the diagonal of R_s) it was designed for.
#[derive(Debug, Clone)]
pub struct Precoder {
    pub u: CMat,
    pub symbol_powers: Vec<f64>,
    pub method: Method,
}

impl Precoder {
    /// Transmit power Tr(U R_s U^H).
    pub fn transmit_power(&self) -> f64 {
        (0..self.u.ncols())
            .map(|k| self.symbol_powers[k] * self.u.column(k).norm_squared())
            .sum()
    }
}

/// Total power budget and its split across users.
#[derive(Debug, Clone)]
pub struct PowerBudget {
    pub total: f64,
    pub per_user: Vec<f64>,
}

/// Equal power allocation.
pub fn allocate_power(tau: f64, k: usize) -> PowerBudget {
    assert!(tau > 0.0 && k >= 1);
    PowerBudget {
        total: tau,
        per_user: vec![tau / k as f64; k],
    }
}

/// Per-user ZF received-amplitude targets, the diagonal sqrt(lambda_k).
#[derive(Debug, Clone)]
pub struct ZfTargets(pub Vec<f64>);

impl ZfTargets {
    pub fn unit(k: usize) -> Self {
        ZfTargets(vec![1.0; k])
    }
}

fn r2c(r: &RMat) -> CMat {
    CMat::from_fn(r.nrows(), r.ncols(), |i, j| Complex64::new(r[(i, j)], 0.0))
}

/// Maximum ratio transmission: `u_k = sqrt(tau_k)/sigma_{s_k} * h'_k^H / |h'_k|`.
/// The same matrix serves as both the linear and widely linear MRT precoder.
pub fn mrt(cs: &ChannelSet, pb: &PowerBudget, powers: &[f64]) -> Result<Precoder> {
    let hp = cs.effective_channel();
    let (k, m) = hp.shape();
    let mut u = CMat::zeros(m, k);
    for i in 0..k {
        let row = hp.row(i);
        let norm = row.norm();
        if norm == 0.0 {
            return Err(WlbcError::ZeroChannel(i));
        }
        let scale = pb.per_user[i].sqrt() / (powers[i].sqrt() * norm);
        for j in 0..m {
            u[(j, i)] = hp[(i, j)].conj() * scale;
        }
    }
    Ok(Precoder {
        u,
        symbol_powers: powers.to_vec(),
        method: Method::Mrt,
    })
}

/// Widely linear zero-forcing: `U = H'^H [Re{H' H'^H}]^{-1} Lambda`,
/// achieving `Re{H' U} = Lambda` for up to K = 2M users.
pub fn wl_zf(cs: &ChannelSet, targets: &ZfTargets, powers: &[f64]) -> Result<Precoder> {
    let hp = cs.effective_channel();
    let k = hp.nrows();
    if k > 2 * hp.ncols() {
        // Re{H' H'^H} has rank at most 2M; see the matching guard in lin_zf
        return Err(WlbcError::NotPositiveDefinite("wl_zf: K > 2M"));
    }
    let gram = &hp * hp.adjoint();
    let gram_re = RMat::from_fn(k, k, |i, j| gram[(i, j)].re);
    let lambda = RMat::from_fn(k, k, |i, j| if i == j { targets.0[i] } else { 0.0 });
    let x = spd_solve(&gram_re, &lambda)?;
    let u = hp.adjoint() * r2c(&x);
    Ok(Precoder {
        u,
        symbol_powers: powers.to_vec(),
        method: Method::WlZf,
    })
}

/// Linear zero-forcing: `U = H'^H (H' H'^H)^{-1} Lambda`, requires K <= M.
pub fn lin_zf(cs: &ChannelSet, targets: &ZfTargets, powers: &[f64]) -> Result<Precoder> {
    let hp = cs.effective_channel();
    let k = hp.nrows();
    if k > hp.ncols() {
        // the Gram matrix has rank at most M and Cholesky may not detect
        // the singularity at floating point, so reject explicitly
        return Err(WlbcError::NotPositiveDefinite("lin_zf: K > M"));
    }
    let gram = &hp * hp.adjoint();
    let lambda = CMat::from_fn(k, k, |i, j| {
        if i == j {
            Complex64::new(targets.0[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let x = hpd_solve(&gram, &lambda)?;
    let u = hp.adjoint() * x;
    Ok(Precoder {
        u,
        symbol_powers: powers.to_vec(),
        method: Method::LinZf,
    })
}

/// Rescales a precoder by `gamma = sqrt(tau / Tr(U R_s U^H))` so its
/// transmit power equals `tau`.
pub fn normalize_power(p: &Precoder, tau: f64) -> Result<Precoder> {
    let power = p.transmit_power();
    if power <= 0.0 {
        return Err(WlbcError::ZeroPrecoder);
    }
    let gamma = (tau / power).sqrt();
    Ok(Precoder {
        u: &p.u * Complex64::new(gamma, 0.0),
        symbol_powers: p.symbol_powers.clone(),
        method: p.method,
    })
}

/// Closed-form widely linear MMSE from the regularized-inversion viewpoint:
/// `Ubar = Htilde'^T (Htilde' Htilde'^T + (1/2 gamma) I_K)^{-1}` with
/// `gamma = tau / (K sigma_z^2)`, mapped back to the complex domain and then
/// power-normalized to `tau`.
pub fn wl_mmse_regularized(cs: &ChannelSet, tau: f64, powers: &[f64]) -> Result<Precoder> {
    let k = cs.num_users();
    let sigma_z2 = cs.noise_vars[0];
    let gamma = tau / (k as f64 * sigma_z2);
    let ht = t2_widen(&cs.effective_channel());
    let a = &ht * ht.transpose() + RMat::identity(k, k) * (1.0 / (2.0 * gamma));
    let x = spd_solve(&a, &RMat::identity(k, k))?;
    let ubar = ht.transpose() * x;
    let p = Precoder {
        u: t1_unstack(&ubar),
        symbol_powers: powers.to_vec(),
        method: Method::WlMmse,
    };
    normalize_power(&p, tau)
}

/// Linear MMSE (regularized channel inversion):
/// `U = H'^H (H' H'^H + (1/2 gamma) I_K)^{-1}`, power-normalized to `tau`.
/// Requires K <= M so the complex channels are linearly independent.
pub fn lin_mmse_regularized(cs: &ChannelSet, tau: f64, powers: &[f64]) -> Result<Precoder> {
    let k = cs.num_users();
    let m = cs.num_antennas();
    if k > m {
        return Err(WlbcError::NotPositiveDefinite(
            "linear MMSE requires K <= M",
        ));
    }
    let sigma_z2 = cs.noise_vars[0];
    let gamma = tau / (k as f64 * sigma_z2);
    let hp = cs.effective_channel();
    let reg = Complex64::new(1.0 / (2.0 * gamma), 0.0);
    let a = &hp * hp.adjoint() + CMat::identity(k, k) * reg;
    let x = hpd_solve(&a, &CMat::identity(k, k))?;
    let p = Precoder {
        u: hp.adjoint() * x,
        symbol_powers: powers.to_vec(),
        method: Method::LinMmse,
    };
    normalize_power(&p, tau)
}

/// Step-size schedule and stopping rule for the dual-ascent MMSE solver.
#[derive(Debug, Clone)]
pub struct DualAscentConfig {
    pub mu_init: f64,
    pub step0: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl DualAscentConfig {
    /// Defaults: `mu0 = K sigma_z^2 / (2 tau)`, diminishing steps
    /// `delta_l = (0.1/tau) / (1 + l/100)`, tol 1e-8, 5000 iterations max.
    pub fn defaults(cs: &ChannelSet, tau: f64) -> Self {
        DualAscentConfig {
            mu_init: cs.num_users() as f64 * cs.noise_vars[0] / (2.0 * tau),
            step0: 0.1 / tau,
            tol: 1e-8,
            max_iters: 5000,
        }
    }
}

/// Convergence record of the dual-ascent solver.
#[derive(Debug, Clone)]
pub struct DualAscentDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub mu: f64,
    /// Complementary-slackness residual `mu * (Tr(U R_s U^T) - tau)`.
    pub slackness: f64,
}

fn dual_ascent_real(
    ht: &RMat,
    powers: &[f64],
    tau: f64,
    cfg: &DualAscentConfig,
) -> Result<(RMat, DualAscentDiagnostics)> {
    let k = ht.nrows();
    let eye = RMat::identity(k, k);
    let minimizer = |mu: f64| -> Result<RMat> {
        let a = ht * ht.transpose() + &eye * mu;
        let x = spd_solve(&a, &eye)?;
        Ok(ht.transpose() * x)
    };
    let power_of = |ubar: &RMat| -> f64 {
        (0..k)
            .map(|j| powers[j] * ubar.column(j).norm_squared())
            .sum()
    };

    let mut mu = cfg.mu_init;
    let mut ubar = minimizer(mu)?;
    let mut converged = false;
    let mut iter = 0;
    while iter < cfg.max_iters {
        let step = cfg.step0 / (1.0 + iter as f64 / 100.0);
        mu = (mu + step * (power_of(&ubar) - tau)).max(0.0);
        let next = minimizer(mu)?;
        let delta = (&next - &ubar).norm();
        ubar = next;
        iter += 1;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    let slackness = mu * (power_of(&ubar) - tau);
    Ok((
        ubar,
        DualAscentDiagnostics {
            iterations: iter,
            converged,
            mu,
            slackness,
        },
    ))
}

/// Iterative widely linear MMSE: dual ascent on the power-constraint
/// multiplier, alternating `Ubar(mu) = Htilde'^T (Htilde' Htilde'^T + mu I)^{-1}`
/// with the projected gradient update of `mu`. Returns the final iterate and
/// convergence diagnostics; non-convergence is flagged, not fatal.
pub fn wl_mmse_dual_ascent(
    cs: &ChannelSet,
    tau: f64,
    powers: &[f64],
    cfg: &DualAscentConfig,
) -> Result<(Precoder, DualAscentDiagnostics)> {
    let ht = t2_widen(&cs.effective_channel());
    let (ubar, diag) = dual_ascent_real(&ht, powers, tau, cfg)?;
    Ok((
        Precoder {
            u: t1_unstack(&ubar),
            symbol_powers: powers.to_vec(),
            method: Method::WlMmseIter,
        },
        diag,
    ))
}

/// Iterative linear MMSE: the complex-domain dual ascent,
/// `U(mu) = H'^H (H' H'^H + mu I)^{-1}`. Requires K <= M.
pub fn lin_mmse_dual_ascent(
    cs: &ChannelSet,
    tau: f64,
    powers: &[f64],
    cfg: &DualAscentConfig,
) -> Result<(Precoder, DualAscentDiagnostics)> {
    let k = cs.num_users();
    if k > cs.num_antennas() {
        return Err(WlbcError::NotPositiveDefinite(
            "iterative linear MMSE requires K <= M",
        ));
    }
    let hp = cs.effective_channel();
    // Run the same real-valued solver on the full composite representation
    // [Re -Im; Im Re], which is exactly the complex least-squares problem.
    let m = hp.ncols();
    let full = RMat::from_fn(2 * k, 2 * m, |i, j| {
        let v = hp[(i % k, j % m)];
        match (i < k, j < m) {
            (true, true) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
            (false, false) => v.re,
        }
    });
    let powers2: Vec<f64> = powers.iter().chain(powers.iter()).copied().collect();
    let (ubar, diag) = dual_ascent_real(&full, &powers2, 2.0 * tau, cfg)?;
    // Columns k..2k replicate columns 0..k rotated by i; keep the first K.
    let u = CMat::from_fn(m, k, |i, j| Complex64::new(ubar[(i, j)], ubar[(i + m, j)]));
    let p = Precoder {
        u,
        symbol_powers: powers.to_vec(),
        method: Method::LinMmseIter,
    };
    Ok((p, diag))
}

/// Widely linear maximum-SLNR precoding: per user, the unit generalized
/// eigenvector of the rank-one numerator against
/// `Q'_k = Htilde'_{kbar}^T Htilde'_{kbar} + sigma_{z'_k}^2/(2 tau_k) I_{2M}`,
/// scaled to its per-user power share.
pub fn wl_mslnr(cs: &ChannelSet, pb: &PowerBudget, powers: &[f64]) -> Result<Precoder> {
    let hp = cs.effective_channel();
    let (k, m) = hp.shape();
    let ht = t2_widen(&hp);
    let mut ubar = RMat::zeros(2 * m, k);
    for i in 0..k {
        let a = RMat::from_fn(1, 2 * m, |_, j| ht[(i, j)]);
        let mut q = RMat::zeros(2 * m, 2 * m);
        for other in 0..k {
            if other == i {
                continue;
            }
            let row = ht.row(other);
            q += row.transpose() * row;
        }
        let reg = cs.post_filter_noise_var(i) / (2.0 * pb.per_user[i]);
        q += RMat::identity(2 * m, 2 * m) * reg;
        let v = rank1_gev_max(&a, &q)?;
        let scale = pb.per_user[i].sqrt() / powers[i].sqrt();
        for j in 0..2 * m {
            ubar[(j, i)] = scale * v[j];
        }
    }
    Ok(Precoder {
        u: t1_unstack(&ubar),
        symbol_powers: powers.to_vec(),
        method: Method::WlMslnr,
    })
}

/// Linear maximum-SLNR precoding: the complex-domain generalized Rayleigh
/// quotient solution `u_k ~ (H'_{kbar}^H H'_{kbar} + sigma_{z'_k}^2/tau_k I)^{-1} h'_k^H`,
/// phase-rotated so the useful gain `h'_k u_k` is real and nonnegative.
pub fn lin_mslnr(cs: &ChannelSet, pb: &PowerBudget, powers: &[f64]) -> Result<Precoder> {
    let hp = cs.effective_channel();
    let (k, m) = hp.shape();
    let mut u = CMat::zeros(m, k);
    for i in 0..k {
        let mut q = CMat::zeros(m, m);
        for other in 0..k {
            if other == i {
                continue;
            }
            let row = hp.row(other);
            q += row.adjoint() * row;
        }
        let reg = cs.post_filter_noise_var(i) / pb.per_user[i];
        q += CMat::identity(m, m) * Complex64::new(reg, 0.0);
        let rhs = hp.row(i).adjoint();
        let v = hpd_solve(&q, &CMat::from_fn(m, 1, |r, _| rhs[r]))?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(WlbcError::ZeroVector("lin_mslnr solution"));
        }
        let gain: Complex64 = (0..m).map(|j| hp[(i, j)] * v[(j, 0)]).sum();
        let phase = if gain.norm() > 0.0 {
            gain.conj() / gain.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let scale = pb.per_user[i].sqrt() / (powers[i].sqrt() * norm);
        for j in 0..m {
            u[(j, i)] = v[(j, 0)] * phase * scale;
        }
    }
    Ok(Precoder {
        u,
        symbol_powers: powers.to_vec(),
        method: Method::LinMslnr,
    })
}

/// Builds the precoder for a method tag with the crate's default settings:
/// unit ZF targets, equal power allocation, default dual-ascent schedule,
/// and total-power normalization to `tau` for the power-constrained methods.
pub fn build_precoder(method: Method, cs: &ChannelSet, tau: f64, powers: &[f64]) -> Result<Precoder> {
    let k = cs.num_users();
    let pb = allocate_power(tau, k);
    match method {
        Method::Mrt | Method::WlMrt => {
            let mut p = mrt(cs, &pb, powers)?;
            p.method = method;
            Ok(p)
        }
        Method::WlZf => {
            let p = wl_zf(cs, &ZfTargets::unit(k), powers)?;
            let mut p = normalize_power(&p, tau)?;
            p.method = Method::WlZf;
            Ok(p)
        }
        Method::LinZf => {
            let p = lin_zf(cs, &ZfTargets::unit(k), powers)?;
            let mut p = normalize_power(&p, tau)?;
            p.method = Method::LinZf;
            Ok(p)
        }
        Method::WlMmse => wl_mmse_regularized(cs, tau, powers),
        Method::LinMmse => lin_mmse_regularized(cs, tau, powers),
        Method::WlMmseIter => {
            let cfg = DualAscentConfig::defaults(cs, tau);
            wl_mmse_dual_ascent(cs, tau, powers, &cfg).map(|(p, _)| p)
        }
        Method::LinMmseIter => {
            let cfg = DualAscentConfig::defaults(cs, tau);
            lin_mmse_dual_ascent(cs, tau, powers, &cfg).map(|(p, _)| p)
        }
        Method::WlMslnr => wl_mslnr(cs, &pb, powers),
        Method::LinMslnr => lin_mslnr(cs, &pb, powers),
    }
}
