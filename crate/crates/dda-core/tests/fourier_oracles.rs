//! Spectral ops against their brute-force double-sum oracles.

mod common;

use common::*;
use dda_core::fourier::{
    autocorrelate, center_shift, convolve, cross_correlate, fft2, ifft2, Plane,
};

#[test]
fn fft2_matches_direct_dft_on_random_planes() {
    let mut rng = seeded(0xF0F0);
    for &(h, w) in &[(4usize, 4usize), (3, 5), (7, 2), (8, 8)] {
        let p = rand_plane(&mut rng, h, w);
        let s = fft2(&p).unwrap();
        let want = dft2_direct(&p);
        for (bin, &(re, im)) in s.bins().iter().zip(&want) {
            assert!((bin.re - re).abs() < 1e-12, "{h}x{w} re: {} vs {re}", bin.re);
            assert!((bin.im - im).abs() < 1e-12, "{h}x{w} im: {} vs {im}", bin.im);
        }
    }
}

#[test]
fn fft2_dc_term_is_the_sum() {
    let mut rng = seeded(0xD0);
    let p = rand_plane(&mut rng, 6, 7);
    let s = fft2(&p).unwrap();
    let sum: f64 = p.values().iter().sum();
    assert!((s.at(0, 0).re - sum).abs() < 1e-12);
    assert!(s.at(0, 0).im.abs() < 1e-12);
}

#[test]
fn roundtrip_recovers_random_planes() {
    let mut rng = seeded(0xACE);
    for _ in 0..20 {
        let p = rand_plane(&mut rng, 8, 8);
        let back = ifft2(&fft2(&p).unwrap()).unwrap();
        let scale: f64 = p.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(max_abs_diff(&p, &back) < 1e-12 * (scale + 1.0));
    }
}

#[test]
fn correlation_matches_lag_sum_oracle() {
    let mut rng = seeded(0xC0FE);
    for _ in 0..40 {
        let a = rand_plane(&mut rng, 4, 4);
        let b = rand_plane(&mut rng, 4, 4);
        let fast = cross_correlate(&a, &b).unwrap();
        let slow = corr2_direct(&a, &b);
        assert!(max_abs_diff(&fast, &slow) < 1e-10);
    }
}

#[test]
fn convolution_matches_lag_sum_oracle() {
    let mut rng = seeded(0xC0DE);
    for _ in 0..40 {
        let a = rand_plane(&mut rng, 4, 4);
        let b = rand_plane(&mut rng, 4, 4);
        let fast = convolve(&a, &b).unwrap();
        let slow = conv2_direct(&a, &b);
        assert!(max_abs_diff(&fast, &slow) < 1e-10);
    }
}

#[test]
fn autocorrelation_matches_its_own_oracle_and_definition() {
    let mut rng = seeded(0xAC);
    let p = rand_plane(&mut rng, 4, 4);
    let ac = autocorrelate(&p).unwrap();
    assert!(max_abs_diff(&ac, &corr2_direct(&p, &p)) < 1e-10);
    assert_eq!(ac.values(), cross_correlate(&p, &p).unwrap().values());
}

#[test]
fn correlation_with_centered_delta_is_center_shift_of_scaling() {
    // Shift theorem at the op level: a kernel holding v at the image center
    // produces the center-shifted copy of v·x on even dimensions.
    let mut rng = seeded(0x5417);
    let x = rand_plane(&mut rng, 8, 8);
    let v = 0.73;
    let kernel = Plane::delta(8, 8, 4, 4, v);
    let got = cross_correlate(&x, &kernel).unwrap();
    let want = center_shift(&x.scaled(v));
    assert!(max_abs_diff(&got, &want) < 1e-12);
}
