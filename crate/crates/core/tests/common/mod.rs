#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficient vector with entries uniform in the unit square, transform order.
pub fn random_coeffs(k: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * k)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Hermitian coefficient vector (real field), transform order.
pub fn random_real_coeffs(k: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * k;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    v[k] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    for m in 1..k {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        v[m] = c;
        v[n - m] = c.conj();
    }
    v
}

/// Mode index in `-K..K` to position in transform order.
pub fn pos(j: i64, k: usize) -> usize {
    j.rem_euclid(2 * k as i64) as usize
}

/// Aliased convolution written as a double sum over mode indices in `-K..K`.
pub fn convolution_by_modes(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let k = a.len() / 2;
    let kk = k as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * k];
    for j in -kk..kk {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in -kk..kk {
            for m in -kk..kk {
                if (l + m - j).rem_euclid(2 * kk) == 0 {
                    acc += a[pos(l, k)] * b[pos(m, k)];
                }
            }
        }
        out[pos(j, k)] = acc;
    }
    out
}

pub fn power_by_modes(y: &[Complex64], p: u32) -> Vec<Complex64> {
    let mut acc = y.to_vec();
    for _ in 1..p {
        acc = convolution_by_modes(&acc, y);
    }
    acc
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rel_diff(got: &[Complex64], want: &[Complex64]) -> f64 {
    max_abs_diff(got, want) / max_abs(want).max(f64::MIN_POSITIVE)
}
