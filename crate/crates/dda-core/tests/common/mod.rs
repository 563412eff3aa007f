//! Brute-force reference implementations, independent of the FFT path under
//! test: direct double-sum DFT and direct circular correlation/convolution.

use dda_core::fourier::Plane;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// O(n²·n²) direct DFT; returns (re, im) per bin, row-major.
pub fn dft2_direct(p: &Plane) -> Vec<(f64, f64)> {
    let (h, w) = (p.height(), p.width());
    let mut out = Vec::with_capacity(h * w);
    for kr in 0..h {
        for kc in 0..w {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for r in 0..h {
                for c in 0..w {
                    let theta = -2.0 * std::f64::consts::PI
                        * (kr as f64 * r as f64 / h as f64 + kc as f64 * c as f64 / w as f64);
                    re += p.at(r, c) * theta.cos();
                    im += p.at(r, c) * theta.sin();
                }
            }
            out.push((re, im));
        }
    }
    out
}

/// out(lr, lc) = Σ_{r,c} a(r, c) · b((r − lr) mod H, (c − lc) mod W)
pub fn corr2_direct(a: &Plane, b: &Plane) -> Plane {
    let (h, w) = (a.height(), a.width());
    Plane::from_fn(h, w, |lr, lc| {
        let mut acc = 0.0;
        for r in 0..h {
            for c in 0..w {
                acc += a.at(r, c) * b.at((r + h - lr) % h, (c + w - lc) % w);
            }
        }
        acc
    })
}

/// out(lr, lc) = Σ_{r,c} a(r, c) · b((lr − r) mod H, (lc − c) mod W)
pub fn conv2_direct(a: &Plane, b: &Plane) -> Plane {
    let (h, w) = (a.height(), a.width());
    Plane::from_fn(h, w, |lr, lc| {
        let mut acc = 0.0;
        for r in 0..h {
            for c in 0..w {
                acc += a.at(r, c) * b.at((lr + h - r) % h, (lc + w - c) % w);
            }
        }
        acc
    })
}

pub fn rand_plane(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Plane {
    let values: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Plane::new(h, w, values).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &Plane, b: &Plane) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
