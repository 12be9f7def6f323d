mod common;

use astro_float::{BigFloat, Consts, RoundingMode};
use common::*;
use erkn_wave::field::{pair_norm, FourierState, FrequencySet};
use erkn_wave::integrators::{
    erkn_step, exact_linear_flow, oscillator_step, phi, scheme_by_id, scheme_registry, Forcing,
    Stepper,
};
use num_complex::Complex64;

const PREC: usize = 512;
const RM: RoundingMode = RoundingMode::ToEven;

fn big_to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap()
}

/// `cos ξ`, `sin ξ / ξ`, `(1 - cos ξ)/ξ²` in 512-bit arithmetic.
fn phi_oracle(xi: f64, cc: &mut Consts) -> [f64; 3] {
    let x = BigFloat::from_f64(xi, PREC);
    let one = BigFloat::from_f64(1.0, PREC);
    let c = x.cos(PREC, RM, cc);
    let s = x.sin(PREC, RM, cc);
    let x2 = x.mul(&x, PREC, RM);
    [
        big_to_f64(&c),
        big_to_f64(&s.div(&x, PREC, RM)),
        big_to_f64(&one.sub(&c, PREC, RM).div(&x2, PREC, RM)),
    ]
}

#[test]
fn phi_functions_match_high_precision() {
    let mut cc = Consts::new().unwrap();
    let n = 10_000;
    let (lo, hi) = (1e-12f64.ln(), 1e3f64.ln());
    let mut worst = [0.0f64; 3];
    for i in 0..n {
        let xi = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        let want = phi_oracle(xi, &mut cc);
        for j in 0..3 {
            let got = phi(j as u32, xi).unwrap();
            // φ0 and φ1 pass through zero; measure against the function scale there.
            let scale = match j {
                0 => 1.0,
                1 => want[1].abs().max(1.0 / xi),
                _ => want[2].abs(),
            };
            worst[j] = worst[j].max((got - want[j]).abs() / scale);
        }
    }
    for (j, w) in worst.iter().enumerate() {
        assert!(*w < 1e-14, "phi{j}: worst relative error {w:e}");
    }
}

#[test]
fn phi_functions_are_even() {
    for xi in [1e-9, 1e-3, 0.7, 5.0, 300.0] {
        for j in 0..3 {
            assert_eq!(phi(j, xi).unwrap(), phi(j, -xi).unwrap());
        }
    }
}

/// ERKN3 step written out mode by mode with the direct convolution.
fn erkn3_oracle(
    st: &FourierState,
    omegas: &[f64],
    h: f64,
    p: u32,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let y = st.y();
    let yd = st.ydot();
    let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
    let stage: Vec<Complex64> = omegas
        .iter()
        .enumerate()
        .map(|(m, &w)| y[m] * (0.5 * h * w).cos() + yd[m] * (0.5 * h * sinc(0.5 * h * w)))
        .collect();
    let f = power_by_modes(&stage, p);
    let mut ny = Vec::new();
    let mut nyd = Vec::new();
    for (m, &w) in omegas.iter().enumerate() {
        let xi = h * w;
        let bbar = 0.5 * sinc(0.5 * xi);
        let b = (0.5 * xi).cos();
        ny.push(y[m] * xi.cos() + yd[m] * (h * sinc(xi)) + f[m] * (h * h * bbar));
        nyd.push(y[m] * (-h * w * w * sinc(xi)) + yd[m] * xi.cos() + f[m] * (h * b));
    }
    (ny, nyd)
}

#[test]
fn erkn3_step_matches_direct_oracle() {
    let k = 4;
    let fs = FrequencySet::spectral(k).unwrap();
    let st = FourierState::new(random_real_coeffs(k, 11), random_real_coeffs(k, 12)).unwrap();
    let scheme = scheme_by_id("ERKN3").unwrap();
    let got = erkn_step(&scheme, &st, &fs, 0.1, 2).unwrap();
    let (wy, wyd) = erkn3_oracle(&st, fs.omegas(), 0.1, 2);
    assert!(max_abs_diff(got.y(), &wy) < 1e-12);
    assert!(max_abs_diff(got.ydot(), &wyd) < 1e-12);
}

#[test]
fn every_scheme_is_exact_on_linear_problem() {
    let k = 16;
    let fs = FrequencySet::spectral(k).unwrap();
    let st = FourierState::new(random_real_coeffs(k, 1), random_real_coeffs(k, 2)).unwrap();
    let scale = pair_norm(&st, 0.0, &fs).unwrap();
    let h = 0.01;
    let n = 1000;
    let want = exact_linear_flow(&st, &fs, n as f64 * h).unwrap();
    for scheme in scheme_registry() {
        let stepper = Stepper::new(&scheme, &fs, h, Forcing::None).unwrap();
        let mut cur = st.clone();
        for _ in 0..n {
            stepper.step_in_place(&mut cur).unwrap();
        }
        let err = pair_norm(&cur.difference(&want).unwrap(), 0.0, &fs).unwrap();
        assert!(err < 1e-12 * scale, "{}: {err:e}", scheme.id());
    }
}

#[test]
fn linear_flow_composes() {
    let k = 8;
    let fs = FrequencySet::spectral(k).unwrap();
    let st = FourierState::new(random_real_coeffs(k, 5), random_real_coeffs(k, 6)).unwrap();
    let a = exact_linear_flow(&exact_linear_flow(&st, &fs, 0.3).unwrap(), &fs, 0.9).unwrap();
    let b = exact_linear_flow(&st, &fs, 1.2).unwrap();
    assert!(pair_norm(&a.difference(&b).unwrap(), 0.0, &fs).unwrap() < 1e-13);
}

#[test]
fn schemes_are_second_order_on_scalar_oscillator() {
    // q̈ = -q + q², reference by a fine ERKN3 run.
    let run = |id: &str, h: f64, n: usize| {
        let s = scheme_by_id(id).unwrap();
        let (mut q, mut p) = (0.3, 0.1);
        for _ in 0..n {
            (q, p) = oscillator_step(&s, 1.0, h, q, p, |x| x * x);
        }
        (q, p)
    };
    let (qr, pr) = run("ERKN3", 1.0 / 8192.0, 8192);
    for scheme in scheme_registry() {
        let err = |n: usize| {
            let (q, p) = run(scheme.id(), 1.0 / n as f64, n);
            (q - qr).hypot(p - pr)
        };
        let ratio = err(32) / err(64);
        assert!(
            (3.5..4.5).contains(&ratio),
            "{}: ratio {ratio}",
            scheme.id()
        );
    }
}
