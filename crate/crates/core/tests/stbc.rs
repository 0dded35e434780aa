mod common;

use common::{cn, detector_mismatches, M2};
use dstbc_core::numerics::PskConstellation;
use dstbc_core::stbc::{alamouti_encode, ml_differential_detect, AlamoutiMatrix};
use dstbc_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_m2(x: &AlamoutiMatrix) -> M2 {
    x.entries()
}

#[test]
fn detectors_match_exhaustive_search() {
    assert_eq!(detector_mismatches(10_000, 17), (0, 0));
}

#[test]
fn noiseless_differential_chain() {
    let con = PskConstellation::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lam = AlamoutiMatrix::new(cn(&mut rng, 1.0), cn(&mut rng, 1.0));
    let mut s = AlamoutiMatrix::identity();
    let mut z_prev = lam * s;
    for _ in 0..200 {
        let (i1, i2) = (rng.random_range(0..8), rng.random_range(0..8));
        let u = alamouti_encode(con.point(i1), con.point(i2)).unwrap();
        s = s * u.scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!((s.power() - 1.0).abs() < 1e-9);
        let z = lam * s;
        assert_eq!(ml_differential_detect(&z_prev, &z, &con).indices, (i1, i2));
        z_prev = z;
    }
    let m: M2 = to_m2(&s);
    assert!(m[0][0].norm() <= 1.0 + 1e-12);
}

#[test]
fn encoder_rejects_non_psk() {
    assert!(alamouti_encode(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)).is_err());
}
