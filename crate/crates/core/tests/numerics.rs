mod common;

use common::{c, cn, matrix_dft};
use dstbc_core::numerics::{dft, idft, psk_demodulate, psk_modulate, PskConstellation};
use dstbc_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec_strategy() -> impl Strategy<Value = Vec<Complex64>> {
    (1u32..8).prop_flat_map(|log| {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1usize << log)
            .prop_map(|v| v.into_iter().map(|(r, i)| c(r, i)).collect())
    })
}

proptest! {
    #[test]
    fn dft_preserves_norm(x in vec_strategy()) {
        let n_in: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let y = dft(&x).unwrap();
        let n_out: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((n_in - n_out).abs() <= 1e-12 * n_in.max(1.0));
    }

    #[test]
    fn dft_roundtrip(x in vec_strategy()) {
        let back = idft(&dft(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn psk_roundtrip(m_log in 1usize..5, raw in prop::collection::vec(0u8..2, 0..96)) {
        let k = m_log;
        let m = 1 << m_log;
        let bits: Vec<u8> = raw[..raw.len() / k * k].to_vec();
        let syms = psk_modulate(&bits, m).unwrap();
        prop_assert!(syms.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
        prop_assert_eq!(psk_demodulate(&syms, m).unwrap(), bits);
    }
}

#[test]
fn dft_matches_matrix_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [4usize, 16, 64] {
        let x: Vec<Complex64> = (0..n).map(|_| cn(&mut rng, 1.0)).collect();
        let fast = dft(&x).unwrap();
        let slow = matrix_dft(&x, -1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let fast = idft(&x).unwrap();
        let slow = matrix_dft(&x, 1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn dft_anchor_values() {
    let mut x = vec![c(0.0, 0.0); 4];
    x[0] = c(1.0, 0.0);
    assert!(dft(&x).unwrap().iter().all(|v| (v - c(0.5, 0.0)).norm() < 1e-15));
    let y = dft(&[c(1.0, 0.0); 4]).unwrap();
    assert!((y[0] - c(2.0, 0.0)).norm() < 1e-15);
    assert!(y[1..].iter().all(|v| v.norm() < 1e-15));
}

#[test]
fn noisy_demodulation_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [2usize, 4, 8, 16] {
        let con = PskConstellation::new(m).unwrap();
        let k = con.bits_per_symbol();
        for _ in 0..2000 {
            let idx = rng.random_range(0..m);
            let y = con.point(idx) + cn(&mut rng, 0.5);
            let got = psk_demodulate(&[y], m).unwrap();
            let best = (0..m)
                .min_by(|&a, &b| {
                    (y - con.point(a))
                        .norm_sqr()
                        .partial_cmp(&(y - con.point(b)).norm_sqr())
                        .unwrap()
                })
                .unwrap();
            let mut want = vec![0u8; k];
            con.write_bits(con.bits_of_index(best), &mut want);
            assert_eq!(got, want);
        }
    }
}

#[test]
fn gray_neighbours_differ_in_one_bit() {
    for m in [4usize, 8, 16] {
        let con = PskConstellation::new(m).unwrap();
        for g in 0..m {
            let d = con.bits_of_index(g) ^ con.bits_of_index((g + 1) % m);
            assert_eq!(d.count_ones(), 1, "M={m} g={g}");
        }
    }
}
