//! PAM constellations, the widely linear decision rule, the square-QAM
//! baseline, and discrete-input mutual information over a real AWGN channel.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Result, WlbcError};
use crate::numerics::gauss_hermite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstellationKind {
    Pam,
    SquareQam,
}

impl ConstellationKind {
    fn name(self) -> &'static str {
        match self {
            ConstellationKind::Pam => "PAM",
            ConstellationKind::SquareQam => "SquareQAM",
        }
    }
}

/// An L-point PAM constellation (or a square QAM built from two PAM axes).
///
/// PAM points are `(2l - 1 - L) * d * sqrt(Eg)` for `l = 1..=L`, so the
/// average symbol power is `(L^2 - 1)/3 * d^2 * Eg`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Constellation {
    pub kind: ConstellationKind,
    /// Number of constellation points (per axis pair for QAM the total order).
    pub order: usize,
    /// Half the spacing parameter d; adjacent points are `2 d sqrt(Eg)` apart.
    pub half_spacing: f64,
    /// Pulse power Eg.
    pub pulse_power: f64,
}

impl Constellation {
    pub fn pam(order: usize, half_spacing: f64, pulse_power: f64) -> Self {
        assert!(order >= 2, "PAM order must be at least 2");
        assert!(half_spacing > 0.0 && pulse_power > 0.0);
        Constellation {
            kind: ConstellationKind::Pam,
            order,
            half_spacing,
            pulse_power,
        }
    }

    /// L-PAM scaled to unit average symbol power.
    pub fn pam_unit_power(order: usize) -> Self {
        let l = order as f64;
        let d = (3.0 / (l * l - 1.0)).sqrt();
        Self::pam(order, d, 1.0)
    }

    /// Square QAM of the given total order (must be an even power of two),
    /// scaled to unit average symbol power. The two axes are independent
    /// sqrt(order)-PAM constellations each carrying half the power.
    pub fn qam_unit_power(order: usize) -> Self {
        let axis = (order as f64).sqrt().round() as usize;
        assert_eq!(axis * axis, order, "QAM order must be a perfect square");
        assert!(axis.is_power_of_two(), "QAM order must be a power of 2");
        let l = axis as f64;
        // per-axis mean square must be 1/2
        let d = (3.0 / (2.0 * (l * l - 1.0))).sqrt();
        Constellation {
            kind: ConstellationKind::SquareQam,
            order,
            half_spacing: d,
            pulse_power: 1.0,
        }
    }

    /// Order of one PAM axis (L for PAM, sqrt(L) for square QAM).
    pub fn axis_order(&self) -> usize {
        match self.kind {
            ConstellationKind::Pam => self.order,
            ConstellationKind::SquareQam => (self.order as f64).sqrt().round() as usize,
        }
    }

    /// Bits per channel use at saturation.
    pub fn max_bits(&self) -> f64 {
        (self.order as f64).log2()
    }

    /// Average symbol power `sigma_s^2`.
    pub fn symbol_power(&self) -> f64 {
        match self.kind {
            ConstellationKind::Pam => {
                let l = self.order as f64;
                (l * l - 1.0) / 3.0 * self.half_spacing * self.half_spacing * self.pulse_power
            }
            ConstellationKind::SquareQam => {
                let l = self.axis_order() as f64;
                2.0 * (l * l - 1.0) / 3.0
                    * self.half_spacing
                    * self.half_spacing
                    * self.pulse_power
            }
        }
    }

    /// Half the distance between adjacent points on one axis, `d sqrt(Eg)`.
    pub fn half_min_distance(&self) -> f64 {
        self.half_spacing * self.pulse_power.sqrt()
    }

    fn axis_point(&self, l: usize) -> f64 {
        let n = self.axis_order() as f64;
        (2.0 * (l as f64 + 1.0) - 1.0 - n) * self.half_min_distance()
    }

    /// Complex symbol value for a 0-based index. PAM symbols lie on the real
    /// axis; QAM indices enumerate the grid row-major (I axis fastest).
    pub fn symbol(&self, index: usize) -> Complex64 {
        assert!(index < self.order);
        match self.kind {
            ConstellationKind::Pam => Complex64::new(self.axis_point(index), 0.0),
            ConstellationKind::SquareQam => {
                let axis = self.axis_order();
                Complex64::new(
                    self.axis_point(index % axis),
                    self.axis_point(index / axis),
                )
            }
        }
    }
}

/// Sorted amplitudes of an L-PAM constellation.
pub fn pam_points(c: &Constellation) -> Result<Vec<f64>> {
    if c.kind != ConstellationKind::Pam {
        return Err(WlbcError::WrongKind {
            expected: "PAM",
            got: c.kind.name(),
        });
    }
    Ok((0..c.order).map(|l| c.axis_point(l)).collect())
}

fn pam_axis_detect(y: f64, gain: f64, c: &Constellation) -> usize {
    // Thresholds at midpoints gain * (s(l) + d sqrt(Eg)); a value exactly on
    // a threshold belongs to the lower symbol ("< y <=" bracketing).
    let delta = c.half_min_distance();
    let n = c.axis_order();
    for l in 0..n - 1 {
        if y <= gain * (c.axis_point(l) + delta) {
            return l;
        }
    }
    n - 1
}

/// Widely linear PAM decision rule: thresholds the real observation at the
/// gain-scaled midpoints between constellation points. Returns a 0-based
/// symbol index.
pub fn wl_pam_detect(y_r: f64, gain: f64, c: &Constellation) -> Result<usize> {
    if c.kind != ConstellationKind::Pam {
        return Err(WlbcError::WrongKind {
            expected: "PAM",
            got: c.kind.name(),
        });
    }
    if gain <= 0.0 {
        return Err(WlbcError::NonPositiveGain(gain));
    }
    Ok(pam_axis_detect(y_r, gain, c))
}

/// Square-QAM detection: compensates the complex gain's phase, then applies
/// per-axis PAM thresholds. Returns a 0-based symbol index in the same grid
/// enumeration as [`Constellation::symbol`].
pub fn qam_detect(y: Complex64, gain: Complex64, c: &Constellation) -> Result<usize> {
    if c.kind != ConstellationKind::SquareQam {
        return Err(WlbcError::WrongKind {
            expected: "SquareQAM",
            got: c.kind.name(),
        });
    }
    let mag = gain.norm();
    if mag == 0.0 {
        return Err(WlbcError::ZeroGain);
    }
    let rotated = y * gain.conj() / mag;
    let axis = c.axis_order();
    let i_idx = pam_axis_detect(rotated.re, mag, c);
    let q_idx = pam_axis_detect(rotated.im, mag, c);
    Ok(q_idx * axis + i_idx)
}

static GH_RULE: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_hermite(96));

/// Mutual information (bits/channel use) of equiprobable L-PAM over a real
/// AWGN channel at the given SINR, by Gauss-Hermite quadrature.
pub fn mi_pam_awgn(c: &Constellation, sinr: f64) -> f64 {
    assert!(sinr >= 0.0 && sinr.is_finite());
    let points: Vec<f64> = (0..c.axis_order()).map(|l| c.axis_point(l)).collect();
    let l = points.len() as f64;
    if sinr == 0.0 {
        return 0.0;
    }
    let power: f64 = points.iter().map(|p| p * p).sum::<f64>() / l;
    let sigma2 = power / sinr;
    let sigma = sigma2.sqrt();
    let (nodes, weights) = &*GH_RULE;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let ln2 = std::f64::consts::LN_2;

    // I(X;Y) = log2 L - (1/L) sum_i E_w[ log2 sum_j exp(-(d_ij^2 + 2 d_ij w)/(2 s^2)) ]
    // with w = sqrt(2) s t under the Gauss-Hermite weight exp(-t^2).
    let mut penalty = 0.0;
    for pi in &points {
        let mut exp_term = 0.0;
        for (t, w) in nodes.iter().zip(weights) {
            let noise = std::f64::consts::SQRT_2 * sigma * t;
            let mut sum = 0.0;
            for pj in &points {
                let d = pi - pj;
                sum += (-(d * d + 2.0 * d * noise) / (2.0 * sigma2)).exp();
            }
            exp_term += w * (sum.ln() / ln2);
        }
        penalty += inv_sqrt_pi * exp_term;
    }
    ((l.log2() - penalty / l).max(0.0)).min(l.log2())
}

/// Mutual information of square QAM over a complex AWGN channel: two
/// independent PAM axes, each seeing the full per-axis SINR.
pub fn mi_qam_awgn(c: &Constellation, sinr: f64) -> f64 {
    2.0 * mi_pam_awgn(c, sinr)
}

/// Closed-form symbol error rate of L-PAM over real AWGN at the given SINR:
/// `2 (L-1)/L * Q( sqrt(3 SINR / (L^2 - 1)) )`.
pub fn pam_ser_awgn(order: usize, sinr: f64) -> f64 {
    let l = order as f64;
    let arg = (3.0 * sinr / (l * l - 1.0)).sqrt();
    2.0 * (l - 1.0) / l * q_function(arg)
}

/// Gaussian tail function Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
