//! Receiver I/Q imbalance: `y' = alpha y + beta conj(y)`.

use num_complex::Complex64;
use serde::Serialize;

/// Receiver I/Q imbalance parameters.
///
/// `alpha = (1 + g e^{-j phi}) / 2`, `beta = (1 - g e^{+j phi}) / 2`, with the
/// image rejection ratio `IRR = -10 log10(|beta|^2 / |alpha|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqiParams {
    /// Amplitude imbalance as a linear ratio.
    pub g_r: f64,
    /// Phase imbalance in radians.
    pub phi_r: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `|beta|^2 / |alpha|^2`.
    pub rho: f64,
    /// `-10 log10(rho)`; `+inf` for an ideal front end.
    pub irr_db: f64,
}

impl IqiParams {
    pub fn from_gain_phase(g_r: f64, phi_r: f64) -> Self {
        let alpha = 0.5 * (1.0 + Complex64::from_polar(g_r, -phi_r));
        let beta = 0.5 * (1.0 - Complex64::from_polar(g_r, phi_r));
        let rho = beta.norm_sqr() / alpha.norm_sqr();
        let irr_db = if rho == 0.0 {
            f64::INFINITY
        } else {
            -10.0 * rho.log10()
        };
        Self {
            g_r,
            phi_r,
            alpha,
            beta,
            rho,
            irr_db,
        }
    }

    /// No imbalance: `alpha = 1`, `beta = 0`.
    pub fn ideal() -> Self {
        Self::from_gain_phase(1.0, 0.0)
    }

    pub fn is_ideal(&self) -> bool {
        self.beta == Complex64::new(0.0, 0.0)
    }

    #[inline]
    pub fn distort(&self, y: Complex64) -> Complex64 {
        self.alpha * y + self.beta * y.conj()
    }
}

/// Builds [`IqiParams`] from `kappa = 20 log10(g)` in dB and the phase
/// imbalance in degrees.
pub fn derive_iqi_params(kappa_db: f64, phi_deg: f64) -> IqiParams {
    IqiParams::from_gain_phase(10f64.powf(kappa_db / 20.0), phi_deg.to_radians())
}

pub fn apply_rx_iqi(samples: &[Complex64], p: &IqiParams) -> Vec<Complex64> {
    samples.iter().map(|&y| p.distort(y)).collect()
}

pub fn apply_rx_iqi_in_place(samples: &mut [Complex64], p: &IqiParams) {
    if p.is_ideal() {
        return;
    }
    samples.iter_mut().for_each(|y| *y = p.distort(*y));
}
