//! Closed-form and semi-analytic SINR/BER of differential and coherent
//! Alamouti STBC-OFDM under receiver I/Q imbalance.
//!
//! Conventions: `sigma_sq = 1 / SNR` (unit average received power per
//! subcarrier), `rho = |beta|^2 / |alpha|^2 = 1 / IRR`, and `lambda_sq`,
//! `lambdabar_sq` are the Alamouti channel powers `|l1|^2 + |l2|^2` at the
//! desired and image subcarriers.
//!
//! The image-interference analysis replaces `A_r`, `B_r` by `|alpha| I` and
//! `|beta| I`; that simplification lives only here, the simulator keeps the
//! complex coefficients.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Conditional power of an entry of the image-interference term,
/// `|alpha beta|^2 |lambda|^2 |lambdabar|^2`.
pub fn interference_power(alpha_abs: f64, beta_abs: f64, lambda_sq: f64, lambdabar_sq: f64) -> f64 {
    (alpha_abs * beta_abs).powi(2) * lambda_sq * lambdabar_sq
}

/// Conditional signal power `|alpha lambda|^4 / 2`.
pub fn signal_power(alpha_abs: f64, lambda_sq: f64) -> f64 {
    0.5 * alpha_abs.powi(4) * lambda_sq * lambda_sq
}

/// Conditional noise power `2 |alpha|^4 |lambda|^2 sigma^2`.
pub fn noise_power(alpha_abs: f64, lambda_sq: f64, sigma_sq: f64) -> f64 {
    2.0 * alpha_abs.powi(4) * lambda_sq * sigma_sq
}

fn check_nonneg(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "expected non-negative inputs, got {values:?}"
        )));
    }
    Ok(())
}

/// Instantaneous SINR of differential detection,
/// `|l|^2 / (2 |lbar|^2 rho + 4 sigma^2)`.
pub fn sinr_differential(lambda_sq: f64, lambdabar_sq: f64, rho: f64, sigma_sq: f64) -> Result<f64> {
    check_nonneg(&[lambda_sq, lambdabar_sq, rho, sigma_sq])?;
    let den = 2.0 * lambdabar_sq * rho + 4.0 * sigma_sq;
    if den == 0.0 {
        return Err(Error::InvalidArgument("SINR denominator is zero".into()));
    }
    Ok(lambda_sq / den)
}

/// Noise-free limit `|l|^2 / (2 |lbar|^2 rho)`.
pub fn sinr_differential_asymptotic(lambda_sq: f64, lambdabar_sq: f64, rho: f64) -> Result<f64> {
    sinr_differential(lambda_sq, lambdabar_sq, rho, 0.0)
}

/// Instantaneous SINR of coherent detection with perfect CSI,
/// `|l|^2 / (|lbar|^2 rho + 2 sigma^2)`.
pub fn sinr_coherent(lambda_sq: f64, lambdabar_sq: f64, rho: f64, sigma_sq: f64) -> Result<f64> {
    check_nonneg(&[lambda_sq, lambdabar_sq, rho, sigma_sq])?;
    let den = lambdabar_sq * rho + 2.0 * sigma_sq;
    if den == 0.0 {
        return Err(Error::InvalidArgument("SINR denominator is zero".into()));
    }
    Ok(lambda_sq / den)
}

/// Density of the F(4, 4) law, `6 x / (1 + x)^4`.
pub fn f44_pdf(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("F(4,4) support is x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(6.0 * x / (1.0 + x).powi(4))
}

/// Distribution function of F(4, 4): `I_t(2, 2) = t^2 (3 - 2 t)` with
/// `t = x / (1 + x)`.
pub fn f44_cdf(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("F(4,4) support is x >= 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let t = x / (1.0 + x);
    Ok(t * t * (3.0 - 2.0 * t))
}

fn check_order(m: usize) -> Result<()> {
    if matches!(m, 2 | 4 | 8 | 16) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(m))
    }
}

/// Conditional M-PSK bit error approximation `erfc(sqrt(eta) sin(pi/M)) / log2 M`.
pub fn psk_ber_given_sinr(m: usize, eta: f64) -> f64 {
    libm::erfc(eta.sqrt() * (PI / m as f64).sin()) / (m as f64).log2()
}

/// Average BER floor: the conditional PSK BER averaged over the
/// asymptotic SINR `eta = X / (2 rho)`, `X ~ F(4, 4)`.
///
/// Substituting `x = t / (1 - t)` turns `f44(x) dx` into `6 t (1 - t) dt`
/// on `[0, 1]`, so no tail truncation is needed.
pub fn ber_floor(m: usize, rho: f64) -> Result<f64> {
    check_order(m)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "BER floor needs 0 < rho, got {rho}"
        )));
    }
    let integrand = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        psk_ber_given_sinr(m, x / (2.0 * rho)) * 6.0 * t * (1.0 - t)
    };
    Ok(quadrature::integrate(integrand, 0.0, 1.0, 1e-9, 1e-15))
}

/// `SNR_eq = (1/SNR + 1/IRR)^-1` on linear values; infinite inputs drop out.
pub fn snr_eq(snr_lin: f64, irr_lin: f64) -> f64 {
    let inv = snr_lin.recip() + irr_lin.recip();
    if inv == 0.0 {
        f64::INFINITY
    } else {
        inv.recip()
    }
}

/// Closed-form BER approximation `0.2 (1 + 1.75 SNR_eq / (M^1.9 + 1))^-2`.
pub fn ber_closed_form(m: usize, snr_eq: f64) -> f64 {
    debug_assert!(snr_eq >= 0.0);
    if snr_eq.is_infinite() {
        return 0.0;
    }
    let m = m as f64;
    0.2 * (1.0 + 1.75 * snr_eq / (m.powf(1.9) + 1.0)).powi(-2)
}

/// `(IRR + 10 dB, IRR)`: SNR at which the floor sets in, and the SNR of an
/// imbalance-free receiver whose BER equals the floor.
pub fn floor_onset_and_ideal_snr(irr_db: f64) -> (f64, f64) {
    (irr_db + 10.0, irr_db)
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// One row of an analytic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPoint {
    pub snr_db: f64,
    pub irr_db: f64,
    pub order: usize,
    /// Linear `SNR_eq`.
    pub sinr_eq: f64,
    pub ber_closed_form: f64,
    /// `0` when the receiver has no imbalance.
    pub ber_floor: f64,
}

pub fn analytic_curve(m: usize, irr_db: f64, snr_grid_db: &[f64]) -> Result<Vec<AnalyticPoint>> {
    check_order(m)?;
    let irr_lin = db_to_lin(irr_db);
    let floor = if irr_db.is_infinite() {
        0.0
    } else {
        ber_floor(m, irr_lin.recip())?
    };
    Ok(snr_grid_db
        .iter()
        .map(|&snr_db| {
            let eq = snr_eq(db_to_lin(snr_db), irr_lin);
            AnalyticPoint {
                snr_db,
                irr_db,
                order: m,
                sinr_eq: eq,
                ber_closed_form: ber_closed_form(m, eq),
                ber_floor: floor,
            }
        })
        .collect())
}

/// Adaptive Gauss-Kronrod (7/15) integration.
#[allow(clippy::excessive_precision)]
pub mod quadrature {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_845_693_013,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ];

    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for j in 0..7 {
            let dx = h * XGK[j];
            let s = f(c - dx) + f(c + dx);
            kronrod += WGK[j] * s;
            if j % 2 == 1 {
                gauss += WG[j / 2] * s;
            }
        }
        (kronrod * h, ((kronrod - gauss) * h).abs())
    }

    /// Integrates `f` over `[a, b]` until the estimated error is below
    /// `max(rel_tol * |I|, abs_tol)`.
    pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
        let (i0, e0) = gk15(&f, a, b);
        let mut intervals = vec![(a, b, i0, e0)];
        for _ in 0..10_000 {
            let total: f64 = intervals.iter().map(|s| s.2).sum();
            let err: f64 = intervals.iter().map(|s| s.3).sum();
            if err <= (rel_tol * total.abs()).max(abs_tol) {
                break;
            }
            let worst = intervals
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .map(|(i, _)| i)
                .unwrap();
            let (lo, hi, _, _) = intervals.swap_remove(worst);
            let mid = 0.5 * (lo + hi);
            let (il, el) = gk15(&f, lo, mid);
            let (ir, er) = gk15(&f, mid, hi);
            intervals.push((lo, mid, il, el));
            intervals.push((mid, hi, ir, er));
        }
        intervals.iter().map(|s| s.2).sum()
    }

    /// Integrates over `[0, inf)` via `x = t / (1 - t)`.
    pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> f64 {
        integrate(
            |t| {
                if t >= 1.0 {
                    0.0
                } else {
                    let u = 1.0 - t;
                    f(t / u) / (u * u)
                }
            },
            0.0,
            1.0,
            rel_tol,
            1e-300,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differential_sinr_examples() {
        assert!((sinr_differential(2.0, 1.3, 0.0, 0.01).unwrap() - 50.0).abs() < 1e-12);
        assert!(
            (sinr_differential(2.0, 1.5, 0.02, 0.0).unwrap() - 2.0 / (2.0 * 1.5 * 0.02)).abs()
                < 1e-12
        );
        assert!((sinr_differential(2.0, 2.0, 0.02, 0.01).unwrap() - 16.666_666_666_666_668).abs() < 1e-9);
        assert!(sinr_differential(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(sinr_differential(-1.0, 1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn coherent_sinr_examples() {
        let d = sinr_differential(1.7, 0.9, 0.0, 0.03).unwrap();
        let c = sinr_coherent(1.7, 0.9, 0.0, 0.03).unwrap();
        assert!((c - 2.0 * d).abs() < 1e-12);
        let d = sinr_differential_asymptotic(1.7, 0.9, 0.05).unwrap();
        let c = sinr_coherent(1.7, 0.9, 0.05, 0.0).unwrap();
        assert!((c - 2.0 * d).abs() < 1e-12);
        assert!((sinr_coherent(2.0, 2.0, 0.02, 0.01).unwrap() - 33.333_333_333_333_336).abs() < 1e-9);
    }

    #[test]
    fn coherent_is_differential_with_halved_impairments() {
        for &(l, lb, r, s) in &[(2.0, 2.0, 0.02, 0.01), (0.3, 4.0, 0.1, 1e-3), (5.0, 0.1, 1e-4, 0.5)] {
            let lhs = sinr_coherent(l, lb, r, s).unwrap();
            let rhs = sinr_differential(l, lb, r / 2.0, s / 2.0).unwrap();
            let literal = l / (lb * r + 2.0 * s);
            assert!((lhs - literal).abs() / literal < 1e-12);
            assert!((rhs - literal).abs() / literal < 1e-12);
        }
    }

    #[test]
    fn asymptotic_limit() {
        let a = sinr_differential_asymptotic(1.2, 0.8, 0.03).unwrap();
        let d = sinr_differential(1.2, 0.8, 0.03, 1e-10).unwrap();
        assert!((a - d).abs() / a < 1e-6);
    }

    #[test]
    fn power_terms_compose_to_sinr() {
        let (a, b) = (1.12675_f64, 0.15129_f64);
        let rho = (b / a).powi(2);
        let (l, lb, s2) = (1.7, 0.6, 0.02);
        let eta = signal_power(a, l) / (interference_power(a, b, l, lb) + noise_power(a, l, s2));
        assert!((eta - sinr_differential(l, lb, rho, s2).unwrap()).abs() / eta < 1e-12);
        assert!((interference_power(a, b, l, lb) - (a * b).powi(2) * l * lb).abs() < 1e-15);
        assert!((signal_power(a, l) - 0.5 * (a * a * l).powi(2)).abs() < 1e-12);
        assert!((noise_power(a, l, s2) - 2.0 * a.powi(4) * l * s2).abs() < 1e-15);
    }

    #[test]
    fn f44_moments() {
        let one = quadrature::integrate_semi_infinite(|x| f44_pdf(x).unwrap(), 1e-12);
        assert!((one - 1.0).abs() < 1e-8, "{one}");
        let mean = quadrature::integrate_semi_infinite(|x| x * f44_pdf(x).unwrap(), 1e-10);
        assert!((mean - 2.0).abs() < 1e-6, "{mean}");
        assert!(f44_pdf(-0.1).is_err());
        assert!((f44_cdf(1.0).unwrap() - 0.5).abs() < 1e-15);
        let numeric = quadrature::integrate(|x| f44_pdf(x).unwrap(), 0.0, 3.0, 1e-12, 1e-15);
        assert!((numeric - f44_cdf(3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn floor_behaviour() {
        assert!(ber_floor(2, 0.999).unwrap() > 0.1);
        let grid = [1e-4, 1e-3, 0.01, 0.0179, 0.05, 0.2, 0.6];
        let vals: Vec<f64> = grid.iter().map(|&r| ber_floor(8, r).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
        assert!(ber_floor(8, 0.0).is_err());
        assert!(ber_floor(6, 0.1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(ber_closed_form(8, 0.0), 0.2);
        assert_eq!(ber_closed_form(8, f64::INFINITY), 0.0);
        let v = ber_closed_form(8, 100.0);
        let m19 = 8f64.powf(1.9);
        assert!((m19 - 51.98).abs() < 0.01);
        assert!((v - 0.2 * (1.0 + 175.0 / (m19 + 1.0)).powi(-2)).abs() < 1e-15);
        assert!((v - 1.081e-2).abs() < 5e-5, "{v}");
        let mut prev = 1.0;
        for s in 0..60 {
            let b = ber_closed_form(8, db_to_lin(s as f64));
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn onset_rule() {
        let (on, ideal) = floor_onset_and_ideal_snr(16.8);
        assert!((on - 26.8).abs() < 1e-12 && (ideal - 16.8).abs() < 1e-12);
        assert_eq!(floor_onset_and_ideal_snr(30.0), (40.0, 30.0));
    }

    #[test]
    fn snr_eq_harmonic() {
        assert!((snr_eq(100.0, 100.0) - 50.0).abs() < 1e-12);
        assert_eq!(snr_eq(f64::INFINITY, 40.0), 40.0);
        assert_eq!(snr_eq(f64::INFINITY, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn analytic_curve_rows() {
        let rows = analytic_curve(8, 16.8, &[0.0, 5.0, 10.0]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.ber_floor > 0.0));
        assert!(rows.windows(2).all(|w| w[1].ber_closed_form < w[0].ber_closed_form));
        let clean = analytic_curve(8, f64::INFINITY, &[10.0]).unwrap();
        assert_eq!(clean[0].ber_floor, 0.0);
        assert!((clean[0].sinr_eq - 10.0).abs() < 1e-12);
    }
}
