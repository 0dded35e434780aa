//! Complex-vector primitives shared by the rest of the chain: the unitary DFT
//! and Gray-mapped M-PSK.
//!
//! The DFT follows `[F]_{m,n} = exp(-j 2 pi m n / N) / sqrt(N)`, so `idft` is
//! exactly `F^H` and both transforms preserve energy.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A planned unitary DFT of fixed length.
///
/// Holds forward/inverse plans and scratch so the simulator's inner loop can
/// transform in place without allocating.
pub struct DftPlan {
    len: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            len,
            scale: 1.0 / (len as f64).sqrt(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place `x <- F x`.
    pub fn forward(&mut self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.len, "DFT length mismatch");
        self.forward.process_with_scratch(x, &mut self.scratch);
        x.iter_mut().for_each(|v| *v *= self.scale);
    }

    /// In-place `x <- F^H x`.
    pub fn inverse(&mut self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.len, "DFT length mismatch");
        self.inverse.process_with_scratch(x, &mut self.scratch);
        x.iter_mut().for_each(|v| *v *= self.scale);
    }
}

/// Unitary DFT `F x`.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut plan = DftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.forward(&mut out);
    Ok(out)
}

/// Unitary inverse DFT `F^H x`.
pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut plan = DftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.inverse(&mut out);
    Ok(out)
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Gray-coded M-PSK constellation.
///
/// Point `g` sits at phase `2 pi g / M` and carries the bit pattern
/// `g ^ (g >> 1)` (MSB first), so neighbouring points differ in one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PskConstellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    /// phase index -> bit pattern
    index_to_bits: Vec<u8>,
    /// bit pattern -> phase index
    bits_to_index: Vec<u8>,
}

impl PskConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 2 | 4 | 8 | 16) {
            return Err(Error::UnsupportedOrder(order));
        }
        // exact zeros on the axes keep decision ties symmetric
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        let points = (0..order)
            .map(|g| {
                let p = Complex64::from_polar(1.0, 2.0 * PI * g as f64 / order as f64);
                Complex64::new(snap(p.re), snap(p.im))
            })
            .collect();
        let mut index_to_bits = vec![0u8; order];
        let mut bits_to_index = vec![0u8; order];
        for g in 0..order {
            let b = gray_encode(g);
            bits_to_index[b] = g as u8;
            index_to_bits[g] = b as u8;
        }
        Ok(Self {
            order,
            bits_per_symbol: order.trailing_zeros() as usize,
            points,
            index_to_bits,
            bits_to_index,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Phase index carrying the bit pattern `pattern`.
    pub fn index_of_bits(&self, pattern: usize) -> usize {
        self.bits_to_index[pattern] as usize
    }

    /// Bit pattern carried by phase index `index`.
    pub fn bits_of_index(&self, index: usize) -> usize {
        self.index_to_bits[index] as usize
    }

    /// Index maximising `Re{conj(p) q}`; ties go to the smaller index.
    #[inline]
    pub fn best_correlation(&self, q: Complex64) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let score = p.re * q.re + p.im * q.im;
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        best
    }

    /// Nearest point by Euclidean distance; ties go to the smaller index.
    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Packs `bits_per_symbol` bits (MSB first) into a pattern.
    pub fn pattern_from_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    pub fn write_bits(&self, pattern: usize, out: &mut [u8]) {
        let k = self.bits_per_symbol;
        for (j, o) in out.iter_mut().enumerate().take(k) {
            *o = ((pattern >> (k - 1 - j)) & 1) as u8;
        }
    }
}

pub fn gray_encode(b: usize) -> usize {
    b ^ (b >> 1)
}

pub fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 1 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Maps bits (0/1 bytes, MSB first per symbol) onto Gray-coded M-PSK.
pub fn psk_modulate(bits: &[u8], order: usize) -> Result<Vec<Complex64>> {
    let c = PskConstellation::new(order)?;
    let k = c.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::BitCount {
            bits: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| c.point(c.index_of_bits(c.pattern_from_bits(chunk))))
        .collect())
}

/// Hard-decision inverse of [`psk_modulate`].
pub fn psk_demodulate(symbols: &[Complex64], order: usize) -> Result<Vec<u8>> {
    let c = PskConstellation::new(order)?;
    let k = c.bits_per_symbol();
    let mut out = vec![0u8; symbols.len() * k];
    for (y, chunk) in symbols.iter().zip(out.chunks_exact_mut(k)) {
        c.write_bits(c.bits_of_index(c.nearest(*y)), chunk);
    }
    Ok(out)
}
