//! OFDM framing (IDFT + cyclic prefix), reception, and packing of received
//! spectra into Alamouti observation matrices.
//!
//! Subcarriers are numbered `1..=N` at every public interface. Subcarrier 1
//! (DC) and `N/2 + 1` are their own mirror images and stay unused; every
//! other subcarrier `n` pairs with its image `N - n + 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DftPlan;
use crate::stbc::AlamoutiMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub fft_len: usize,
    pub cp_len: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            fft_len: 64,
            cp_len: 20,
        }
    }
}

impl OfdmConfig {
    pub fn new(fft_len: usize, cp_len: usize) -> Result<Self> {
        if !fft_len.is_power_of_two() || fft_len < 4 {
            return Err(Error::NotPowerOfTwo(fft_len));
        }
        if cp_len > fft_len {
            return Err(Error::InvalidArgument(format!(
                "cyclic prefix {cp_len} longer than the symbol {fft_len}"
            )));
        }
        Ok(Self { fft_len, cp_len })
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_len + self.cp_len
    }

    pub fn is_active(&self, n: usize) -> bool {
        n >= 2 && n <= self.fft_len && n != self.fft_len / 2 + 1
    }

    /// Active subcarriers in ascending order (1-based).
    pub fn active_set(&self) -> Vec<usize> {
        (1..=self.fft_len).filter(|&n| self.is_active(n)).collect()
    }

    /// Lower member of every `(n, N - n + 2)` pair, ascending.
    pub fn pair_heads(&self) -> Vec<usize> {
        (2..=self.fft_len / 2).collect()
    }
}

/// Image subcarrier `N - n + 2` of an active subcarrier.
pub fn mirror_index(n: usize, fft_len: usize) -> Result<usize> {
    if n < 2 || n > fft_len || n == fft_len / 2 + 1 {
        return Err(Error::InactiveSubcarrier { n, fft_len });
    }
    Ok(fft_len - n + 2)
}

/// IDFT of one frequency-domain symbol with the last `cp_len` samples
/// prepended.
pub fn ofdm_modulate(freq_symbols: &[Complex64], cfg: &OfdmConfig) -> Result<Vec<Complex64>> {
    let mut modem = OfdmModem::new(*cfg)?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.symbol_len()];
    modem.modulate_into(freq_symbols, &mut out)?;
    Ok(out)
}

/// Drops the cyclic prefix and applies the DFT.
pub fn ofdm_demodulate(time_samples: &[Complex64], cfg: &OfdmConfig) -> Result<Vec<Complex64>> {
    let mut modem = OfdmModem::new(*cfg)?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.fft_len];
    modem.demodulate_into(time_samples, &mut out)?;
    Ok(out)
}

/// Reusable modulator/demodulator holding a planned DFT.
pub struct OfdmModem {
    cfg: OfdmConfig,
    plan: DftPlan,
}

impl OfdmModem {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        Ok(Self {
            plan: DftPlan::new(cfg.fft_len)?,
            cfg,
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    pub fn modulate_into(&mut self, freq: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let (n, cp) = (self.cfg.fft_len, self.cfg.cp_len);
        if freq.len() != n {
            return Err(Error::Length {
                expected: n,
                actual: freq.len(),
            });
        }
        if out.len() != n + cp {
            return Err(Error::Length {
                expected: n + cp,
                actual: out.len(),
            });
        }
        for idx in [1, n / 2 + 1] {
            if freq[idx - 1].norm_sqr() > 0.0 {
                return Err(Error::InactiveEnergy(idx));
            }
        }
        let body = &mut out[cp..];
        body.copy_from_slice(freq);
        self.plan.inverse(body);
        out.copy_within(n..n + cp, 0);
        Ok(())
    }

    pub fn demodulate_into(&mut self, time: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let (n, cp) = (self.cfg.fft_len, self.cfg.cp_len);
        if time.len() != n + cp {
            return Err(Error::Length {
                expected: n + cp,
                actual: time.len(),
            });
        }
        if out.len() != n {
            return Err(Error::Length {
                expected: n,
                actual: out.len(),
            });
        }
        out.copy_from_slice(&time[cp..]);
        self.plan.forward(out);
        Ok(())
    }
}

/// Received blocks `k` and `k + 1` at subcarrier `n` together with the
/// conjugated image-subcarrier companions.
///
/// `z_k = [[z1(n), z2(n)], [-z2(n)*, z1(n)*]]` from OFDM symbols `2k+1`,
/// `2k+2`; `zbar_k = [[z1(m)*, z2(m)*], [-z2(m), z1(m)]]` with
/// `m = N - n + 2`, i.e. the element-wise conjugate of the image block. With
/// this convention the imbalance acts as `Z' = A Z + B Zbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcarrierObservation {
    pub n: usize,
    pub z_k: AlamoutiMatrix,
    pub z_next: AlamoutiMatrix,
    pub zbar_k: AlamoutiMatrix,
    pub zbar_next: AlamoutiMatrix,
}

impl SubcarrierObservation {
    /// The same observation seen from the image subcarrier.
    pub fn swapped(&self, fft_len: usize) -> Self {
        Self {
            n: fft_len - self.n + 2,
            z_k: self.zbar_k.conj(),
            z_next: self.zbar_next.conj(),
            zbar_k: self.z_k.conj(),
            zbar_next: self.z_next.conj(),
        }
    }
}

/// Alamouti block at 1-based subcarrier `n` from two consecutive spectra.
#[inline]
pub fn block_at(first: &[Complex64], second: &[Complex64], n: usize) -> AlamoutiMatrix {
    AlamoutiMatrix::new(first[n - 1], second[n - 1])
}

/// Packs four consecutive received spectra into the observation at `n`.
pub fn build_observation(
    spectra: [&[Complex64]; 4],
    n: usize,
    cfg: &OfdmConfig,
) -> Result<SubcarrierObservation> {
    for s in spectra {
        if s.len() != cfg.fft_len {
            return Err(Error::Length {
                expected: cfg.fft_len,
                actual: s.len(),
            });
        }
    }
    let m = mirror_index(n, cfg.fft_len)?;
    Ok(SubcarrierObservation {
        n,
        z_k: block_at(spectra[0], spectra[1], n),
        z_next: block_at(spectra[2], spectra[3], n),
        zbar_k: block_at(spectra[0], spectra[1], m).conj(),
        zbar_next: block_at(spectra[2], spectra[3], m).conj(),
    })
}
