//! Monte Carlo BER simulation of one SNR point and of a sweep.
//!
//! Each SNR point draws from its own ChaCha8 key derived from the master
//! seed and the SNR value, so results do not depend on grid order or on
//! how points are scheduled across threads.
//!
//! Data is sent in frames. A frame gets a fresh fading realization; in
//! differential mode it opens with the reference block `S_0 = I`, followed
//! by `blocks_per_frame` information blocks. The channel convolution keeps
//! inter-symbol memory inside a frame and starts from silence.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Compensation, Detection, SimConfig};
use crate::channel::realize_fading;
use crate::compensator::{gamma_true, step_matrix, IqiCompensator};
use crate::error::{Error, Result};
use crate::numerics::{DftPlan, PskConstellation};
use crate::ofdm::{build_observation, OfdmModem};
use crate::stbc::{coherent_detect, AlamoutiMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Result of one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub detection: Detection,
    pub compensation: Compensation,
    pub channel: String,
    pub doppler_hz: f64,
    /// Image rejection ratio of the receiver, `inf` without imbalance.
    pub irr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub seed: u64,
    /// Compensation coefficient after the last block (zero when unused).
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub elapsed_s: f64,
}

/// A record plus the compensation coefficient after every block pair.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub record: BerRecord,
    pub gamma_trace: Vec<(u64, Complex64)>,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key of the SNR point `snr_db` under master `seed`.
pub fn point_key(seed: u64, snr_db: f64) -> u64 {
    mix(seed ^ mix(snr_db.to_bits().wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn stream(key: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(id);
    rng
}

/// Runs one SNR point. `snr_db = +inf` disables the noise.
pub fn run_point(cfg: &SimConfig, snr_db: f64, seed: u64) -> Result<BerRecord> {
    Ok(run_point_traced(cfg, snr_db, seed)?.record)
}

/// Runs every point of the configured grid in parallel, in grid order.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    Ok(run_sweep_traced(cfg)?.into_iter().map(|p| p.record).collect())
}

pub fn run_sweep_traced(cfg: &SimConfig) -> Result<Vec<PointRun>> {
    cfg.validate()?;
    cfg.snr_grid_db
        .par_iter()
        .map(|&snr| run_point_traced(cfg, snr, cfg.seed))
        .collect()
}

/// Per-frame transmit and receive buffers.
struct Link {
    modem: OfdmModem,
    plan: DftPlan,
    sym_len: usize,
    order: usize,
    /// Per antenna: the last `order` samples of the previous symbol followed
    /// by the current symbol.
    tx: [Vec<Complex64>; 2],
    rx: Vec<Complex64>,
    freq: [Vec<Complex64>; 2],
    dense: Vec<Complex64>,
}

impl Link {
    fn new(cfg: &SimConfig, order: usize) -> Result<Self> {
        let n = cfg.ofdm.fft_len;
        let sym_len = cfg.ofdm.symbol_len();
        Ok(Self {
            modem: OfdmModem::new(cfg.ofdm)?,
            plan: DftPlan::new(n)?,
            sym_len,
            order,
            tx: [vec![ZERO; order + sym_len], vec![ZERO; order + sym_len]],
            rx: vec![ZERO; sym_len],
            freq: [vec![ZERO; n], vec![ZERO; n]],
            dense: vec![ZERO; n],
        })
    }

    fn reset(&mut self) {
        for t in &mut self.tx {
            t.fill(ZERO);
        }
    }

    /// Sends `self.freq` through the channel of `symbol` and writes the
    /// noiseless received time samples to `self.rx`.
    fn transmit(&mut self, taps: &[usize], gains: [&[Complex64]; 2]) -> Result<()> {
        let (l, len) = (self.order, self.sym_len);
        for ant in 0..2 {
            let buf = &mut self.tx[ant];
            buf.copy_within(len..len + l, 0);
            self.modem.modulate_into(&self.freq[ant], &mut buf[l..])?;
        }
        self.rx.fill(ZERO);
        for ant in 0..2 {
            let x = &self.tx[ant];
            for (&d, &g) in taps.iter().zip(gains[ant]) {
                for (t, y) in self.rx.iter_mut().enumerate() {
                    *y += g * x[t + l - d];
                }
            }
        }
        Ok(())
    }

    /// Gain that subcarrier `n` actually experiences after convolution and
    /// the receive DFT: `sqrt(N) F [h; 0]`. This is `freq_response` read at
    /// the image index.
    fn response(&mut self, taps: &[usize], gains: &[Complex64], out: &mut [Complex64]) {
        self.dense.fill(ZERO);
        for (&d, &g) in taps.iter().zip(gains) {
            self.dense[d] = g;
        }
        self.plan.forward(&mut self.dense);
        let s = (self.dense.len() as f64).sqrt();
        for (o, v) in out.iter_mut().zip(&self.dense) {
            *o = v * s;
        }
    }
}

/// True information symbols of one block at every subcarrier (0-based).
struct Block {
    idx: Vec<(usize, usize)>,
    u: Vec<AlamoutiMatrix>,
}

/// Runs one point and keeps the compensation trajectory.
pub fn run_point_traced(cfg: &SimConfig, snr_db: f64, seed: u64) -> Result<PointRun> {
    cfg.validate()?;
    if snr_db.is_nan() {
        return Err(Error::Config("SNR is NaN".into()));
    }
    let start = Instant::now();
    let key = point_key(seed, snr_db);
    let mut data_rng = stream(key, 0);
    let mut noise_rng = stream(key, 1);
    let sigma = if snr_db == f64::INFINITY {
        0.0
    } else {
        (10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
    };

    let n = cfg.ofdm.fft_len;
    let c = PskConstellation::new(cfg.order)?;
    let k_bits = c.bits_per_symbol() as u64;
    let active = cfg.ofdm.active_set();
    let heads = cfg.ofdm.pair_heads();
    let iqi = cfg.iqi_params();
    let differential = cfg.detection == Detection::Differential;

    let mut comp = match cfg.compensation {
        Compensation::Off => IqiCompensator::fixed(ZERO),
        Compensation::Genie => IqiCompensator::fixed(gamma_true(&iqi)?),
        Compensation::Lms => IqiCompensator::adaptive(cfg.step_size),
    };

    let taps0 = cfg.channel.quantize(cfg.sample_period());
    let order = taps0.last().map(|t| t.0).unwrap_or(0);
    let mut link = Link::new(cfg, order)?;

    let b = cfg.blocks_per_frame;
    let ref_blocks = usize::from(differential);
    let n_symbols = 2 * (b + ref_blocks);

    // spectra[0..2] previous block, spectra[2..4] current block
    let mut spectra = vec![vec![ZERO; n]; 4];
    let mut s_state = vec![AlamoutiMatrix::identity(); n];
    let mut block = Block {
        idx: vec![(0, 0); n],
        u: vec![AlamoutiMatrix::identity(); n],
    };
    let mut lambda = [vec![ZERO; n], vec![ZERO; n]];
    let mut lam_tmp = vec![ZERO; n];

    let mut bits = 0u64;
    let mut errors = 0u64;
    let mut blocks_done = 0u64;
    let mut trace = Vec::new();
    let mut frame = 0u64;

    'frames: loop {
        let real = realize_fading(
            &cfg.channel,
            cfg.sample_period(),
            &cfg.ofdm,
            n_symbols,
            mix(key ^ mix(frame + 1)),
        )?;
        let taps = real.tap_samples().to_vec();
        link.reset();
        s_state.fill(AlamoutiMatrix::identity());

        for j in 0..(b + ref_blocks) {
            let is_ref = differential && j == 0;
            if !is_ref {
                for &sc in &active {
                    let i1 = data_rng.random_range(0..c.order());
                    let i2 = data_rng.random_range(0..c.order());
                    block.idx[sc - 1] = (i1, i2);
                    block.u[sc - 1] = AlamoutiMatrix::new(c.point(i1), c.point(i2));
                }
            }
            // transmitted matrix per subcarrier: rows antennas, columns slots
            for &sc in &active {
                let s = if is_ref {
                    AlamoutiMatrix::identity()
                } else if differential {
                    s_state[sc - 1] * step_matrix(&block.u[sc - 1])
                } else {
                    step_matrix(&block.u[sc - 1])
                };
                s_state[sc - 1] = s;
            }

            for slot in 0..2 {
                let sym = 2 * j + slot;
                for &sc in &active {
                    let [[s00, s01], [s10, s11]] = s_state[sc - 1].entries();
                    let (x0, x1) = if slot == 0 { (s00, s10) } else { (s01, s11) };
                    link.freq[0][sc - 1] = x0;
                    link.freq[1][sc - 1] = x1;
                }
                link.transmit(&taps, [real.gains(0, sym), real.gains(1, sym)])?;
                if sigma > 0.0 {
                    for y in link.rx.iter_mut() {
                        let re: f64 = noise_rng.sample(StandardNormal);
                        let im: f64 = noise_rng.sample(StandardNormal);
                        *y += Complex64::new(re, im) * sigma;
                    }
                }
                if !iqi.is_ideal() {
                    for y in link.rx.iter_mut() {
                        *y = iqi.distort(*y);
                    }
                }
                let dst = 2 + slot;
                link.modem.demodulate_into(&link.rx, &mut spectra[dst])?;
                if !differential {
                    for ant in 0..2 {
                        link.response(&taps, real.gains(ant, sym), &mut lam_tmp);
                        if slot == 0 {
                            lambda[ant].copy_from_slice(&lam_tmp);
                        } else {
                            for (l, t) in lambda[ant].iter_mut().zip(&lam_tmp) {
                                *l = (*l + t) * 0.5;
                            }
                        }
                    }
                }
            }

            if !is_ref {
                let mut count = |sc: usize, got: (usize, usize)| {
                    let want = block.idx[sc - 1];
                    errors += (c.bits_of_index(want.0) ^ c.bits_of_index(got.0)).count_ones() as u64;
                    errors += (c.bits_of_index(want.1) ^ c.bits_of_index(got.1)).count_ones() as u64;
                };
                if differential {
                    for &h in &heads {
                        let obs = build_observation(
                            [&spectra[0], &spectra[1], &spectra[2], &spectra[3]],
                            h,
                            &cfg.ofdm,
                        )?;
                        let d = comp.process(&obs, &c, None);
                        count(h, d.desired.indices);
                        count(n - h + 2, d.image.indices);
                    }
                } else {
                    for &sc in &active {
                        let z = AlamoutiMatrix::new(spectra[2][sc - 1], spectra[3][sc - 1]);
                        let lam = AlamoutiMatrix::new(lambda[0][sc - 1], lambda[1][sc - 1]);
                        count(sc, coherent_detect(&z, &lam, &c).indices);
                    }
                }
                bits += 2 * k_bits * active.len() as u64;
                blocks_done += 1;
                if cfg.compensation == Compensation::Lms {
                    trace.push((comp.state.iteration, comp.gamma()));
                }
                if bits >= cfg.min_bits || blocks_done >= cfg.max_block_pairs {
                    break 'frames;
                }
            }
            spectra.swap(0, 2);
            spectra.swap(1, 3);
        }
        frame += 1;
    }

    let gamma = if cfg.compensation == Compensation::Off {
        ZERO
    } else {
        comp.gamma()
    };
    let record = BerRecord {
        snr_db,
        detection: cfg.detection,
        compensation: cfg.compensation,
        channel: cfg.channel.name.clone(),
        doppler_hz: cfg.channel.doppler_hz,
        irr_db: iqi.irr_db,
        bit_errors: errors,
        bits,
        ber: errors as f64 / bits as f64,
        seed,
        gamma_re: gamma.re,
        gamma_im: gamma.im,
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    Ok(PointRun {
        record,
        gamma_trace: trace,
    })
}
