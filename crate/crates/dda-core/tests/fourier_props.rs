//! Property tests for the spectral kernel invariants.

mod common;

use common::{conv2_direct, corr2_direct, max_abs_diff};
use dda_core::fourier::{autocorrelate, convolve, cross_correlate, fft2, ifft2, Plane};
use proptest::prelude::*;

fn plane_strategy() -> impl Strategy<Value = Plane> {
    ((1usize..=8), (1usize..=8))
        .prop_flat_map(|(h, w)| {
            (
                Just(h),
                Just(w),
                prop::collection::vec(-1.0f64..1.0, h * w),
            )
        })
        .prop_map(|(h, w, values)| Plane::new(h, w, values).unwrap())
}

fn plane_pair() -> impl Strategy<Value = (Plane, Plane)> {
    ((1usize..=8), (1usize..=8)).prop_flat_map(|(h, w)| {
        (
            prop::collection::vec(-1.0f64..1.0, h * w),
            prop::collection::vec(-1.0f64..1.0, h * w),
        )
            .prop_map(move |(a, b)| {
                (
                    Plane::new(h, w, a).unwrap(),
                    Plane::new(h, w, b).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn oracle_equivalence(pair in plane_pair()) {
        let (a, b) = pair;
        prop_assert!(max_abs_diff(&cross_correlate(&a, &b).unwrap(), &corr2_direct(&a, &b)) < 1e-10);
        prop_assert!(max_abs_diff(&convolve(&a, &b).unwrap(), &conv2_direct(&a, &b)) < 1e-10);
        prop_assert!(max_abs_diff(&autocorrelate(&a).unwrap(), &corr2_direct(&a, &a)) < 1e-10);
    }

    #[test]
    fn zero_phase_of_autocorrelation(p in plane_strategy()) {
        let s = fft2(&autocorrelate(&p).unwrap()).unwrap();
        let peak = s.peak_magnitude();
        for bin in s.bins() {
            prop_assert!(bin.im.abs() <= 1e-9 * (peak + 1.0));
            prop_assert!(bin.re >= -1e-9 * (peak + 1.0));
        }
    }

    #[test]
    fn convolution_commutes(pair in plane_pair()) {
        let (a, b) = pair;
        prop_assert!(max_abs_diff(&convolve(&a, &b).unwrap(), &convolve(&b, &a).unwrap()) < 1e-12);
    }

    #[test]
    fn correlation_is_linear_in_first_argument(pair in plane_pair(), alpha in -4.0f64..4.0) {
        let (a, b) = pair;
        let scaled_first = cross_correlate(&a.scaled(alpha), &b).unwrap();
        let scaled_after = cross_correlate(&a, &b).unwrap().scaled(alpha);
        prop_assert!(max_abs_diff(&scaled_first, &scaled_after) < 1e-12 * (1.0 + alpha.abs()));
    }

    #[test]
    fn parseval_roundtrip(p in plane_strategy()) {
        let back = ifft2(&fft2(&p).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&p, &back) < 1e-12);
    }
}
