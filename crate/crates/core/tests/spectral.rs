use std::f64::consts::PI;

use arena_core::problems::{linf_rel_error_values, TestCase};
use arena_core::spectral::{dft3_forward, dft3_inverse, poisson_spectral_solve, spectral_neg_laplacian, GridField};
use arena_oracles::dft::direct_dft3;
use arena_oracles::SplitMix;
use proptest::prelude::*;

fn uniform(rng: &mut SplitMix) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Real field with random modes of frequency at most `kmax` per axis.
fn band_limited(n: usize, kmax: i32, seed: u64) -> GridField {
    let mut rng = SplitMix(seed);
    let mut modes = Vec::new();
    for _ in 0..12 {
        let k = [0; 3].map(|_: i32| (rng.next_u64() % (2 * kmax as u64 + 1)) as i32 - kmax);
        modes.push((k, uniform(&mut rng), uniform(&mut rng) * PI));
    }
    GridField::sample(n, |p| {
        modes
            .iter()
            .map(|(k, a, ph)| a * (2.0 * PI * (k[0] as f64 * p[0] + k[1] as f64 * p[1] + k[2] as f64 * p[2]) + ph).cos())
            .sum::<f64>()
            + 0.7
    })
    .unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn fft_matches_direct_dft() {
    for n in [2, 3, 4, 5] {
        let mut rng = SplitMix(n as u64);
        let data: Vec<f64> = (0..n * n * n).map(|_| uniform(&mut rng)).collect();
        let g = GridField::new(n, data.clone()).unwrap();
        let fast = dft3_forward(&g).unwrap();
        let slow = direct_dft3(n, &data);
        let scale = slow.iter().fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
        for (f, (re, im)) in fast.data.iter().zip(&slow) {
            assert!((f.re - re).abs() <= 1e-12 * scale && (f.im - im).abs() <= 1e-12 * scale, "n={n}");
        }
        let back = dft3_inverse(&fast).unwrap();
        for (a, b) in back.data().iter().zip(&data) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn oscillatory_case_to_machine_accuracy() {
    let tc = TestCase::oscillatory(8).unwrap();
    let f = GridField::sample(32, |p| tc.f(p)).unwrap();
    let sol = poisson_spectral_solve(&f).unwrap();
    let exact: Vec<f64> = f.points().iter().map(|p| tc.u(p)).collect();
    let err = linf_rel_error_values(sol.u.data(), &exact).unwrap();
    assert!(err.linf_rel <= 1e-12, "{:e}", err.linf_rel);
}

#[test]
fn pure_mean_gives_zero() {
    let f = GridField::new(6, vec![7.0; 216]).unwrap();
    let sol = poisson_spectral_solve(&f).unwrap();
    assert!(max_abs(sol.u.data()) < 1e-14);
    assert!((sol.removed_mean - 7.0).abs() < 1e-13);
}

#[test]
fn refining_the_grid_changes_nothing() {
    let f8 = band_limited(8, 3, 21);
    let f16 = band_limited(16, 3, 21);
    let u8 = poisson_spectral_solve(&f8).unwrap();
    let u16 = poisson_spectral_solve(&f16).unwrap();
    let scale = max_abs(u8.u.data());
    for (idx, p) in f8.points().iter().enumerate() {
        let (i, j, k) = (idx / 64, idx / 8 % 8, idx % 8);
        let fine = u16.u.data()[(2 * i * 16 + 2 * j) * 16 + 2 * k];
        assert!((u8.u.data()[idx] - fine).abs() <= 1e-12 * scale, "{p:?}");
        // the trigonometric interpolant agrees too
        assert!((u16.eval(p) - fine).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_and_mean(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 12, 16])) {
        let f = band_limited(n, (n / 4) as i32, seed);
        let sol = poisson_spectral_solve(&f).unwrap();
        let lap = spectral_neg_laplacian(&sol.u).unwrap();
        let mean = f.mean();
        let scale = max_abs(f.data());
        for (a, b) in lap.data().iter().zip(f.data()) {
            prop_assert!((a - (b - mean)).abs() <= 1e-11 * scale);
        }
        prop_assert!(sol.u.mean().abs() <= 1e-13 * max_abs(sol.u.data()).max(1e-300));
    }
}
