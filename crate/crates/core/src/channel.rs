//! Tapped-delay-line Rayleigh channel for two transmit antennas and one
//! receive antenna, with Jakes Doppler fading.
//!
//! Each tap is a sum of `FADING_OSCILLATORS` complex sinusoids with
//! stratified random arrival angles and random phases, which gives a
//! zero-mean, approximately complex Gaussian process with autocorrelation
//! `J0(2 pi f_d tau)`. Taps are sampled once per OFDM symbol at the symbol
//! midpoint and held for the whole symbol.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

pub const FADING_OSCILLATORS: usize = 64;

/// Relative tap delays and powers of a multipath profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub name: String,
    /// Seconds, starting at 0 and strictly increasing.
    pub tap_delays_s: Vec<f64>,
    /// Relative powers in dB.
    pub tap_powers_db: Vec<f64>,
    pub doppler_hz: f64,
}

impl ChannelProfile {
    /// Builds and validates a profile from delays in nanoseconds.
    pub fn custom(
        name: impl Into<String>,
        delays_ns: &[f64],
        powers_db: &[f64],
        doppler_hz: f64,
    ) -> Result<Self> {
        let p = Self {
            name: name.into(),
            tap_delays_s: delays_ns.iter().map(|d| d * 1e-9).collect(),
            tap_powers_db: powers_db.to_vec(),
            doppler_hz,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidProfile(format!("{}: {msg}", self.name)));
        if self.tap_delays_s.is_empty() {
            return bad("no taps");
        }
        if self.tap_delays_s.len() != self.tap_powers_db.len() {
            return bad("delay and power lists differ in length");
        }
        if self.tap_delays_s[0] != 0.0 {
            return bad("first delay must be 0");
        }
        if self.tap_delays_s.windows(2).any(|w| w[1] <= w[0]) {
            return bad("delays must be strictly increasing");
        }
        if self.tap_powers_db.iter().any(|p| !p.is_finite()) {
            return bad("tap powers must be finite");
        }
        if !(self.doppler_hz.is_finite() && self.doppler_hz >= 0.0) {
            return bad("doppler must be finite and non-negative");
        }
        Ok(())
    }

    /// Linear tap powers normalised to unit sum.
    pub fn linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self
            .tap_powers_db
            .iter()
            .map(|p| 10f64.powf(p / 10.0))
            .collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    fn quantize_unmerged(&self, sample_period: f64) -> Vec<(usize, f64)> {
        self.tap_delays_s
            .iter()
            .zip(self.linear_powers())
            .map(|(d, p)| ((d / sample_period).round() as usize, p))
            .collect()
    }

    /// Delays rounded to the nearest sample; taps that land on the same
    /// sample have their linear powers summed. Returns `(sample, power)`
    /// pairs in ascending sample order.
    pub fn quantize(&self, sample_period: f64) -> Vec<(usize, f64)> {
        let mut taps: Vec<(usize, f64)> = Vec::new();
        for (d, p) in self.tap_delays_s.iter().zip(self.linear_powers()) {
            let idx = (d / sample_period).round() as usize;
            match taps.last_mut() {
                Some(last) if last.0 == idx => last.1 += p,
                _ => taps.push((idx, p)),
            }
        }
        taps
    }
}

/// Embedded profiles: `itu-pb` (ITU-R M.1225 Pedestrian B), `itu-va`
/// (Vehicular A) and `flat`.
pub fn load_profile(name: &str, doppler_hz: f64) -> Result<ChannelProfile> {
    let (delays, powers): (&[f64], &[f64]) = match name.to_ascii_lowercase().as_str() {
        "itu-pb" => (
            &[0.0, 200.0, 800.0, 1200.0, 2300.0, 3700.0],
            &[0.0, -0.9, -4.9, -8.0, -7.8, -23.9],
        ),
        "itu-va" => (
            &[0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0],
            &[0.0, -1.0, -9.0, -10.0, -15.0, -20.0],
        ),
        "flat" => (&[0.0], &[0.0]),
        _ => return Err(Error::UnknownProfile(name.to_string())),
    };
    ChannelProfile::custom(name.to_ascii_lowercase(), delays, powers, doppler_hz)
}

/// Maximum Doppler shift for a terminal speed at a carrier frequency.
pub fn doppler_from_speed(speed_kmh: f64, carrier_hz: f64) -> f64 {
    speed_kmh / 3.6 * carrier_hz / 299_792_458.0
}

/// Tap gains of both transmit antennas, held constant per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    /// Sample delay of each non-zero tap, ascending.
    tap_samples: Vec<usize>,
    /// Layout `[symbol][antenna][tap]`.
    gains: Vec<Complex64>,
    n_symbols: usize,
    pub sample_period: f64,
    pub symbol_period: f64,
}

impl FadingRealization {
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn tap_samples(&self) -> &[usize] {
        &self.tap_samples
    }

    /// Channel order `L` in samples.
    pub fn order(&self) -> usize {
        *self.tap_samples.last().unwrap_or(&0)
    }

    /// Gains of the non-zero taps for `antenna` (0 or 1).
    #[inline]
    pub fn gains(&self, antenna: usize, symbol: usize) -> &[Complex64] {
        let t = self.tap_samples.len();
        let start = (symbol * 2 + antenna) * t;
        &self.gains[start..start + t]
    }

    /// Dense impulse response `h = [h_0 .. h_L]`.
    pub fn impulse_response(&self, antenna: usize, symbol: usize) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.order() + 1];
        for (&l, &g) in self.tap_samples.iter().zip(self.gains(antenna, symbol)) {
            h[l] = g;
        }
        h
    }

    /// Builds a realization from explicit gains; `gains[symbol][antenna]`
    /// lists one gain per entry of `tap_samples`.
    pub fn from_gains(
        tap_samples: Vec<usize>,
        gains: &[[Vec<Complex64>; 2]],
        sample_period: f64,
        symbol_period: f64,
    ) -> Result<Self> {
        let t = tap_samples.len();
        let mut flat = Vec::with_capacity(gains.len() * 2 * t);
        for sym in gains {
            for ant in sym {
                if ant.len() != t {
                    return Err(Error::Length {
                        expected: t,
                        actual: ant.len(),
                    });
                }
                flat.extend_from_slice(ant);
            }
        }
        Ok(Self {
            tap_samples,
            gains: flat,
            n_symbols: gains.len(),
            sample_period,
            symbol_period,
        })
    }
}

/// Draws a fading realization for `n_symbols` OFDM symbols.
///
/// Antenna `i` uses ChaCha stream `i` of `seed`, so the two antennas fade
/// independently.
pub fn realize_fading(
    profile: &ChannelProfile,
    sample_period: f64,
    ofdm: &OfdmConfig,
    n_symbols: usize,
    seed: u64,
) -> Result<FadingRealization> {
    if !(sample_period > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    profile.validate()?;
    let taps = profile.quantize(sample_period);
    for (&d, &(idx, _)) in profile
        .tap_delays_s
        .iter()
        .zip(profile.quantize_unmerged(sample_period).iter())
    {
        if idx > ofdm.cp_len {
            return Err(Error::DelayExceedsCp {
                delay_s: d,
                sample: idx,
                cp_len: ofdm.cp_len,
            });
        }
    }
    let symbol_period = ofdm.symbol_len() as f64 * sample_period;
    let n_taps = taps.len();
    let mut gains = vec![Complex64::new(0.0, 0.0); n_symbols * 2 * n_taps];

    let mut osc = vec![Complex64::new(0.0, 0.0); FADING_OSCILLATORS];
    let mut rot = vec![Complex64::new(0.0, 0.0); FADING_OSCILLATORS];
    for antenna in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(antenna as u64);
        for (tap, &(_, power)) in taps.iter().enumerate() {
            let theta: f64 = rng.random_range(-PI..PI);
            let amp = (power / FADING_OSCILLATORS as f64).sqrt();
            for k in 0..FADING_OSCILLATORS {
                let angle = (2.0 * PI * (k + 1) as f64 - PI + theta) / FADING_OSCILLATORS as f64;
                let w = 2.0 * PI * profile.doppler_hz * angle.cos();
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                osc[k] = Complex64::from_polar(amp, phase + w * 0.5 * symbol_period);
                rot[k] = Complex64::from_polar(1.0, w * symbol_period);
            }
            for s in 0..n_symbols {
                gains[(s * 2 + antenna) * n_taps + tap] = osc.iter().sum();
                for (o, r) in osc.iter_mut().zip(&rot) {
                    *o *= r;
                }
            }
        }
    }
    Ok(FadingRealization {
        tap_samples: taps.iter().map(|t| t.0).collect(),
        gains,
        n_symbols,
        sample_period,
        symbol_period,
    })
}

/// `lambda = sqrt(N) F^H [h; 0]`, i.e. `lambda(n) = sum_l h_l e^{+j 2 pi (n-1) l / N}`
/// for 1-based subcarrier `n`. Returned 0-based.
pub fn freq_response(
    realization: &FadingRealization,
    antenna: usize,
    symbol: usize,
    fft_len: usize,
) -> Result<Vec<Complex64>> {
    if antenna > 1 {
        return Err(Error::InvalidArgument(format!("antenna {antenna}")));
    }
    if realization.order() + 1 > fft_len {
        return Err(Error::InvalidArgument(format!(
            "channel order {} needs N > L",
            realization.order()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); fft_len];
    freq_response_into(
        realization.tap_samples(),
        realization.gains(antenna, symbol),
        &mut out,
    );
    Ok(out)
}

/// Evaluates the sparse taps into `out` without allocating.
pub fn freq_response_into(tap_samples: &[usize], gains: &[Complex64], out: &mut [Complex64]) {
    let n = out.len();
    for (k, o) in out.iter_mut().enumerate() {
        *o = tap_samples
            .iter()
            .zip(gains)
            .map(|(&l, &g)| g * Complex64::from_polar(1.0, 2.0 * PI * ((k * l) % n) as f64 / n as f64))
            .sum();
    }
}
