//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls the detector or analysis code it checks.
#![allow(dead_code, clippy::needless_range_loop)]

use dstbc_core::channel::{load_profile, realize_fading};
use dstbc_core::numerics::PskConstellation;
use dstbc_core::ofdm::OfdmConfig;
use dstbc_core::stbc::{coherent_detect, ml_differential_detect, AlamoutiMatrix};
use dstbc_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const TS: f64 = 200e-9;

pub type M2 = [[Complex64; 2]; 2];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cn<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re * s, im * s)
}

pub fn alam(a: Complex64, b: Complex64) -> M2 {
    [[a, b], [-b.conj(), a.conj()]]
}

pub fn mul(x: &M2, y: &M2) -> M2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub fn dist2(x: &M2, y: &M2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (x[i][j] - y[i][j]).norm_sqr();
        }
    }
    s
}

pub fn psk(m: usize, i: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / m as f64)
}

/// Exhaustive search over all `M^2` Alamouti candidates minimising
/// `|target - base * U / sqrt(2)|_F`.
pub fn exhaustive(base: &M2, target: &M2, m: usize) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i1 in 0..m {
        for i2 in 0..m {
            let u = alam(psk(m, i1) * s, psk(m, i2) * s);
            let d = dist2(target, &mul(base, &u));
            if d < best_d {
                best_d = d;
                best = (i1, i2);
            }
        }
    }
    best
}

/// Bessel function of the first kind, order zero, by its power series.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum
}

/// SNR (dB) at which a BER curve, interpolated linearly in log10(BER),
/// first falls to `target`. `None` if it never does.
pub fn snr_at_ber(snr: &[f64], ber: &[f64], target: f64) -> Option<f64> {
    for i in 1..snr.len() {
        let (b0, b1) = (ber[i - 1], ber[i]);
        if b0 >= target && b1 <= target && b1 > 0.0 {
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            let t = if l0 == l1 { 0.0 } else { (l0 - lt) / (l0 - l1) };
            return Some(snr[i - 1] + t * (snr[i] - snr[i - 1]));
        }
    }
    None
}

/// Matrix-product DFT with the `exp(-j 2 pi m n / N) / sqrt(N)` kernel.
pub fn matrix_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(k, v)| {
                    v * Complex64::from_polar(
                        1.0,
                        sign * 2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64,
                    )
                })
                .sum::<Complex64>()
                / (n as f64).sqrt()
        })
        .collect()
}

/// Two-sample-free Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Linear convolution of one CP-extended symbol with `taps` (static channel,
/// silence before the symbol), truncated to the symbol length.
pub fn convolve(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    (0..x.len())
        .map(|t| {
            taps.iter()
                .enumerate()
                .filter(|(l, _)| *l <= t)
                .map(|(l, h)| h * x[t - l])
                .sum()
        })
        .collect()
}

/// Gain that subcarrier `n` (1-based) sees: `sum_l h_l exp(-j 2 pi (n-1) l / N)`.
pub fn physical_gain(taps: &[Complex64], n: usize, fft_len: usize) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(l, h)| {
            h * Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * ((n - 1) * l) as f64 / fft_len as f64,
            )
        })
        .sum()
}

fn noise(rng: &mut ChaCha8Rng, var: f64) -> M2 {
    alam(cn(rng, var), cn(rng, var))
}

fn add(x: &M2, y: &M2) -> M2 {
    let mut o = *x;
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] += y[i][j];
        }
    }
    o
}

/// Returns (differential mismatches, coherent mismatches) over `trials`.
pub fn detector_mismatches(trials: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let con = PskConstellation::new(8).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (mut diff_bad, mut coh_bad) = (0, 0);
    for _ in 0..trials {
        let lam = alam(cn(&mut rng, 1.0), cn(&mut rng, 1.0));
        let prev = (rng.random_range(0..8), rng.random_range(0..8));
        let s_k = alam(con.point(prev.0) * s, con.point(prev.1) * s);
        let idx = (rng.random_range(0..8), rng.random_range(0..8));
        let u = alam(con.point(idx.0) * s, con.point(idx.1) * s);
        let var = rng.random_range(0.01..1.0);
        let z_k = add(&mul(&lam, &s_k), &noise(&mut rng, var));
        let z_next = add(&mul(&mul(&lam, &s_k), &u), &noise(&mut rng, var));

        let a = |m: &M2| AlamoutiMatrix::new(m[0][0], m[0][1]);
        let got = ml_differential_detect(&a(&z_k), &a(&z_next), &con).indices;
        if got != exhaustive(&z_k, &z_next, 8) {
            diff_bad += 1;
        }
        let got = coherent_detect(&a(&z_next), &a(&mul(&lam, &s_k)), &con).indices;
        if got != exhaustive(&mul(&lam, &s_k), &z_next, 8) {
            coh_bad += 1;
        }
    }
    (diff_bad, coh_bad)
}


/// Ensemble autocorrelation of tap 0 against `J0(2 pi f_d tau)`.
pub fn max_autocorr_error(seeds: u64) -> f64 {
    let fd = 11.6;
    let p = load_profile("itu-pb", fd).unwrap();
    let cfg = OfdmConfig::default();
    let t_sym = cfg.symbol_len() as f64 * TS;
    let max_lag = (1.0 / (4.0 * fd) / t_sym).floor() as usize;
    let lags: Vec<usize> = (0..=10).map(|i| i * max_lag / 10).collect();
    let span = 2 * max_lag + 1;
    let mut num = vec![c(0.0, 0.0); lags.len()];
    let mut pow = 0.0;
    let mut count = 0.0;
    for seed in 0..seeds {
        let r = realize_fading(&p, TS, &cfg, span, 1000 + seed).unwrap();
        for t0 in (0..=max_lag).step_by(16) {
            let h0 = r.gains(0, t0)[0];
            pow += h0.norm_sqr();
            count += 1.0;
            for (nm, &lag) in num.iter_mut().zip(&lags) {
                *nm += h0.conj() * r.gains(0, t0 + lag)[0];
            }
        }
    }
    let p0 = pow / count;
    lags.iter()
        .zip(&num)
        .map(|(&lag, nm)| {
            let rho = nm.re / count / p0;
            let want = bessel_j0(2.0 * std::f64::consts::PI * fd * lag as f64 * t_sym);
            (rho - want).abs()
        })
        .fold(0.0, f64::max)
}


/// Received spectra of four OFDM symbols (two blocks) through static
/// per-antenna taps followed by receiver imbalance. `blocks` holds the
/// transmitted matrix of both blocks at every 1-based subcarrier.
pub fn receive_blocks(
    cfg: &OfdmConfig,
    taps: [&[Complex64]; 2],
    iqi: &dstbc_core::iqi::IqiParams,
    blocks: [&[AlamoutiMatrix]; 2],
) -> Vec<Vec<Complex64>> {
    use dstbc_core::iqi::apply_rx_iqi;
    use dstbc_core::ofdm::{ofdm_demodulate, ofdm_modulate};
    let mut out = Vec::new();
    for block in blocks {
        for slot in 0..2 {
            let mut rx = vec![c(0.0, 0.0); cfg.symbol_len()];
            for ant in 0..2 {
                let mut x = vec![c(0.0, 0.0); cfg.fft_len];
                for n in cfg.active_set() {
                    x[n - 1] = block[n - 1].entries()[ant][slot];
                }
                let y = convolve(&ofdm_modulate(&x, cfg).unwrap(), taps[ant]);
                for (r, v) in rx.iter_mut().zip(y) {
                    *r += v;
                }
            }
            out.push(ofdm_demodulate(&apply_rx_iqi(&rx, iqi), cfg).unwrap());
        }
    }
    out
}

/// Largest `|xi + gamma_true delta|` and largest deviation of the
/// compensated blocks from the differential recursion, over `draws` random
/// channels, imbalances, and data.
pub fn compensator_exactness(draws: usize, seed: u64) -> (f64, f64) {
    use dstbc_core::compensator::{build_residuals, compensate_observation, gamma_true, step_matrix};
    use dstbc_core::iqi::derive_iqi_params;
    use dstbc_core::ofdm::build_observation;
    let cfg = OfdmConfig::default();
    let con = PskConstellation::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_res, mut worst_rec) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let taps: Vec<Vec<Complex64>> = (0..2)
            .map(|_| (0..rng.random_range(1..=cfg.cp_len + 1)).map(|_| cn(&mut rng, 0.2)).collect())
            .collect();
        let p = derive_iqi_params(rng.random_range(-3.0..3.0), rng.random_range(-15.0..15.0));
        let g = gamma_true(&p).unwrap();
        let mut s_k = vec![AlamoutiMatrix::identity(); cfg.fft_len];
        let mut u = vec![AlamoutiMatrix::identity(); cfg.fft_len];
        let mut s_next = vec![AlamoutiMatrix::identity(); cfg.fft_len];
        for n in 0..cfg.fft_len {
            let r = |rng: &mut ChaCha8Rng| con.point(rng.random_range(0..8));
            s_k[n] = step_matrix(&AlamoutiMatrix::new(r(&mut rng), r(&mut rng)));
            u[n] = AlamoutiMatrix::new(r(&mut rng), r(&mut rng));
            s_next[n] = s_k[n] * step_matrix(&u[n]);
        }
        let z = receive_blocks(&cfg, [&taps[0], &taps[1]], &p, [&s_k, &s_next]);
        for h in cfg.pair_heads() {
            let obs = build_observation([&z[0], &z[1], &z[2], &z[3]], h, &cfg).unwrap();
            for r in build_residuals(&obs, &step_matrix(&u[h - 1])) {
                worst_res = worst_res.max((r.xi + g * r.delta).norm());
            }
            let comp = compensate_observation(&obs, g);
            let dev = comp.s_next - comp.s_k * step_matrix(&u[h - 1]);
            worst_rec = worst_rec.max(dev.norm());
            let m = cfg.fft_len - h + 2;
            let dev = comp.sbar_next.conj() - comp.sbar_k.conj() * step_matrix(&u[m - 1]);
            worst_rec = worst_rec.max(dev.norm());
        }
    }
    (worst_res, worst_rec)
}

/// `X = |lambda|^2 / |lambdabar|^2` with both antennas summed, the two
/// responses taken from independent fading realizations of the channel
/// simulator.
pub fn channel_ratio_draws(count: usize, seed: u64) -> Vec<f64> {
    let p = load_profile("flat", 0.0).unwrap();
    let cfg = OfdmConfig::default();
    let power = |s: u64| {
        let r = realize_fading(&p, TS, &cfg, 1, s).unwrap();
        r.gains(0, 0)[0].norm_sqr() + r.gains(1, 0)[0].norm_sqr()
    };
    let base = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    (0..count as u64)
        .map(|i| power(base.wrapping_add(2 * i)) / power(base.wrapping_add(2 * i + 1)))
        .collect()
}

/// Monte Carlo of the asymptotic BER: Gaussian channel draws, the
/// asymptotic SINR, and the conditional PSK BER, averaged.
pub fn floor_monte_carlo(m: usize, rho: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (m as f64).log2();
    let s = (std::f64::consts::PI / m as f64).sin();
    let mut acc = 0.0;
    for _ in 0..draws {
        let num = cn(&mut rng, 1.0).norm_sqr() + cn(&mut rng, 1.0).norm_sqr();
        let den = cn(&mut rng, 1.0).norm_sqr() + cn(&mut rng, 1.0).norm_sqr();
        let eta = num / (2.0 * den * rho);
        acc += libm::erfc(eta.sqrt() * s) / k;
    }
    acc / draws as f64
}
