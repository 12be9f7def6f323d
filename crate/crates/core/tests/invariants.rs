mod common;

use common::*;
use erkn_wave::field::{
    discrete_convolution, hermitian_defect, nonlinearity, sobolev_norm, FourierState, FrequencySet,
};
use erkn_wave::integrators::{phi0, phi1, phi2, scheme_registry, Forcing, Stepper};
use num_complex::Complex64;
use proptest::prelude::*;

fn k_strategy() -> impl Strategy<Value = usize> {
    (0u32..=5).prop_map(|e| 1usize << e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_commutative(k in k_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_coeffs(k, s1);
        let b = random_coeffs(k, s2);
        let ab = discrete_convolution(&a, &b).unwrap();
        let ba = discrete_convolution(&b, &a).unwrap();
        prop_assert!(max_abs_diff(&ab, &ba) <= 1e-13 * max_abs(&ab).max(1.0));
    }

    #[test]
    fn convolution_is_bilinear(k in k_strategy(), s in any::<u64>(), lam in -3.0f64..3.0) {
        let a = random_coeffs(k, s);
        let b = random_coeffs(k, s ^ 1);
        let c = random_coeffs(k, s ^ 2);
        let lhs_arg: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * lam + y).collect();
        let lhs = discrete_convolution(&lhs_arg, &c).unwrap();
        let ac = discrete_convolution(&a, &c).unwrap();
        let bc = discrete_convolution(&b, &c).unwrap();
        let rhs: Vec<Complex64> = ac.iter().zip(&bc).map(|(x, y)| x * lam + y).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn nonlinearity_preserves_real_fields(k in k_strategy(), s in any::<u64>(), p in 2u32..=4) {
        let y = random_real_coeffs(k, s);
        let f = nonlinearity(&y, p).unwrap();
        prop_assert!(hermitian_defect(&f) <= 1e-13 * max_abs(&f).max(1.0));
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(k in k_strategy(), seed in any::<u64>(), s in -2.0f64..2.0, ds in 0.0f64..2.0) {
        let fs = FrequencySet::spectral(k).unwrap();
        let v = random_coeffs(k, seed);
        let lo = sobolev_norm(&v, s, &fs).unwrap();
        let hi = sobolev_norm(&v, s + ds, &fs).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn sobolev_norm_is_homogeneous(k in k_strategy(), seed in any::<u64>(), s in -1.0f64..1.0, lam in -5.0f64..5.0) {
        let fs = FrequencySet::spectral(k).unwrap();
        let v = random_coeffs(k, seed);
        let scaled: Vec<Complex64> = v.iter().map(|c| c * lam).collect();
        let a = sobolev_norm(&scaled, s, &fs).unwrap();
        let b = lam.abs() * sobolev_norm(&v, s, &fs).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * b.max(1e-300));
    }

    #[test]
    fn phi_identities(xi in 1e-8f64..50.0) {
        // φ0 = 1 - ξ²φ2 and φ2(ξ) = ½ φ1(ξ/2)².
        prop_assert!((phi0(xi) - (1.0 - xi * xi * phi2(xi))).abs() <= 1e-13 * (1.0 + xi * xi));
        let h = phi1(0.5 * xi);
        prop_assert!((phi2(xi) - 0.5 * h * h).abs() <= 1e-15);
    }

    #[test]
    fn steps_keep_real_fields_real(seed in any::<u64>(), h in 0.01f64..1.0, scheme_idx in 0usize..5) {
        let k = 8;
        let fs = FrequencySet::spectral(k).unwrap();
        let y: Vec<Complex64> = random_real_coeffs(k, seed).iter().map(|c| c * 0.1).collect();
        let yd: Vec<Complex64> = random_real_coeffs(k, seed ^ 7).iter().map(|c| c * 0.1).collect();
        let st = FourierState::new(y, yd).unwrap();
        let scheme = &scheme_registry()[scheme_idx];
        let next = Stepper::new(scheme, &fs, h, Forcing::Power(2)).unwrap().step(&st).unwrap();
        prop_assert!(next.hermitian_defect() <= 1e-14);
    }

    #[test]
    fn symmetric_schemes_invert_with_negative_step(seed in any::<u64>(), h in 0.01f64..0.5, scheme_idx in 1usize..5) {
        let k = 8;
        let fs = FrequencySet::spectral(k).unwrap();
        let y: Vec<Complex64> = random_real_coeffs(k, seed).iter().map(|c| c * 0.1).collect();
        let yd: Vec<Complex64> = random_real_coeffs(k, seed ^ 7).iter().map(|c| c * 0.1).collect();
        let st = FourierState::new(y, yd).unwrap();
        let scheme = &scheme_registry()[scheme_idx];
        let fwd = Stepper::new(scheme, &fs, h, Forcing::Power(2)).unwrap();
        let bwd = Stepper::new(scheme, &fs, -h, Forcing::Power(2)).unwrap();
        let back = bwd.step(&fwd.step(&st).unwrap()).unwrap();
        prop_assert!(max_abs_diff(back.y(), st.y()) <= 1e-13);
        prop_assert!(max_abs_diff(back.ydot(), st.ydot()) <= 1e-13);
    }
}
