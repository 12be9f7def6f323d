//! Numerical checks of symmetry and symplecticity of a scheme.

use crate::analysis::fit_order;
use crate::error::Result;
use crate::field::{FourierState, PairNorm};
use crate::integrators::{canonical_step, ErknScheme, Stepper};
use crate::problem::{
    make_initial_state, make_spectral_problem, InitialDataSpec, SemidiscreteProblem,
};

/// Defect below which a scheme counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Defect below which a scheme counts as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-7;
/// Central-difference increment for the step-map Jacobian.
pub const JACOBIAN_EPS: f64 = 1e-6;

/// `|||Φ_{-h}(Φ_h(st)) - st|||_0`.
pub fn symmetry_defect(
    scheme: &ErknScheme,
    prob: &SemidiscreteProblem,
    st: &FourierState,
    h: f64,
) -> Result<f64> {
    let forward = Stepper::new(scheme, prob.frequencies(), h, prob.forcing())?;
    let backward = Stepper::new(scheme, prob.frequencies(), -h, prob.forcing())?;
    let back = backward.step(&forward.step(st)?)?;
    PairNorm::new(prob.frequencies(), 0.0).eval(&back.difference(st)?)
}

/// Observed order of the symmetry defect over `h, h/2, ..., h/2^{levels-1}`.
pub fn symmetry_defect_order(
    scheme: &ErknScheme,
    prob: &SemidiscreteProblem,
    st: &FourierState,
    h: f64,
    levels: usize,
) -> Result<f64> {
    let pts = (0..levels)
        .map(|i| {
            let hi = h / 2f64.powi(i as i32);
            symmetry_defect(scheme, prob, st, hi).map(|d| (hi, d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_order(&pts).unwrap_or(f64::NAN))
}

/// `‖DᵀJD - J‖_max` for the step map of `scheme` on `q̈ = -Ω²q + force(q)`
/// at `(q, p)`, with `D` from central differences.
///
/// `force` must be a gradient field for the test to be meaningful.
pub fn symplecticity_defect_of(
    scheme: &ErknScheme,
    omegas: &[f64],
    h: f64,
    q: &[f64],
    p: &[f64],
    force: impl Fn(&[f64]) -> Vec<f64>,
) -> f64 {
    let d = omegas.len();
    let n = 2 * d;
    let step = |z: &[f64]| {
        let (q1, p1) = canonical_step(scheme, omegas, h, &z[..d], &z[d..], &force);
        [q1, p1].concat()
    };
    let z0 = [q, p].concat();
    let e = JACOBIAN_EPS;
    // jac[r][c] = ∂ out_r / ∂ z_c
    let mut jac = vec![vec![0.0; n]; n];
    for c in 0..n {
        let mut plus = z0.clone();
        let mut minus = z0.clone();
        plus[c] += e;
        minus[c] -= e;
        let (fp, fm) = (step(&plus), step(&minus));
        for r in 0..n {
            jac[r][c] = (fp[r] - fm[r]) / (2.0 * e);
        }
    }
    let j = |a: usize, b: usize| -> f64 {
        if a < d && b == a + d {
            1.0
        } else if a >= d && b + d == a {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let jab = j(a, b);
                    if jab != 0.0 {
                        acc += jac[a][r] * jab * jac[b][c];
                    }
                }
            }
            worst = worst.max((acc - j(r, c)).abs());
        }
    }
    worst
}

/// Defect on the one-degree-of-freedom oscillator `q̈ = -ω²q + q²`.
pub fn symplecticity_defect(scheme: &ErknScheme, omega: f64, h: f64, q: f64, p: f64) -> f64 {
    symplecticity_defect_of(scheme, &[omega], h, &[q], &[p], |x| vec![x[0] * x[0]])
}

/// Defect on two oscillators with distinct frequencies coupled through
/// `U(q) = -(q₁ + q₂)³/3`.
///
/// A single frequency cannot separate the schemes: with one degree of
/// freedom the step map is symplectic iff its Jacobian has unit
/// determinant, which ERKN2, ERKN4 and ERKN5 also satisfy. Two
/// frequencies expose the mode-dependent scaling those schemes carry.
pub fn coupled_symplecticity_defect(
    scheme: &ErknScheme,
    omegas: [f64; 2],
    h: f64,
    q: [f64; 2],
    p: [f64; 2],
) -> f64 {
    symplecticity_defect_of(scheme, &omegas, h, &q, &p, |x| {
        let s = (x[0] + x[1]) * (x[0] + x[1]);
        vec![s, s]
    })
}

/// Fixed setting of the structure probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSetup {
    pub k: usize,
    pub p: u32,
    pub seed: u64,
    pub symmetry_h: f64,
    pub symmetry_levels: usize,
    pub symplectic_h: f64,
    pub oscillator_omega: f64,
    pub oscillator_point: (f64, f64),
    pub coupled_omegas: [f64; 2],
    pub coupled_q: [f64; 2],
    pub coupled_p: [f64; 2],
}

impl Default for ProbeSetup {
    fn default() -> Self {
        Self {
            k: 8,
            p: 2,
            seed: 1,
            symmetry_h: 0.1,
            symmetry_levels: 4,
            symplectic_h: 0.5,
            oscillator_omega: 1.0,
            oscillator_point: (0.5, 0.5),
            coupled_omegas: [1.0, 2.5],
            coupled_q: [0.5, -0.3],
            coupled_p: [0.2, 0.4],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub scheme: String,
    pub symmetry_defect: f64,
    /// Decay order of the symmetry defect under halving `h`.
    pub symmetry_order: f64,
    /// Defect on the single oscillator.
    pub symplectic_defect: f64,
    /// Defect on the coupled two-frequency system; drives the classification.
    pub coupled_symplectic_defect: f64,
    pub declared_symmetric: bool,
    pub declared_symplectic: bool,
}

impl ProbeReport {
    pub fn measured_symmetric(&self) -> bool {
        self.symmetry_defect <= SYMMETRY_TOL
    }

    pub fn measured_symplectic(&self) -> bool {
        self.coupled_symplectic_defect <= SYMPLECTIC_TOL
    }

    /// Measured classification agrees with the declared flags.
    pub fn passes(&self) -> bool {
        self.measured_symmetric() == self.declared_symmetric
            && self.measured_symplectic() == self.declared_symplectic
    }
}

/// Runs both probes for `scheme` with the given setup.
pub fn run_property_probe(scheme: &ErknScheme, setup: &ProbeSetup) -> Result<ProbeReport> {
    let prob = make_spectral_problem(setup.k, setup.p)?;
    let st = make_initial_state(&prob, &InitialDataSpec::seeded(setup.seed, 1.51, 0.51))?;
    let (q, p) = setup.oscillator_point;
    Ok(ProbeReport {
        scheme: scheme.id().to_string(),
        symmetry_defect: symmetry_defect(scheme, &prob, &st, setup.symmetry_h)?,
        symmetry_order: symmetry_defect_order(
            scheme,
            &prob,
            &st,
            setup.symmetry_h,
            setup.symmetry_levels,
        )?,
        symplectic_defect: symplecticity_defect(
            scheme,
            setup.oscillator_omega,
            setup.symplectic_h,
            q,
            p,
        ),
        coupled_symplectic_defect: coupled_symplecticity_defect(
            scheme,
            setup.coupled_omegas,
            setup.symplectic_h,
            setup.coupled_q,
            setup.coupled_p,
        ),
        declared_symmetric: scheme.declared_symmetric(),
        declared_symplectic: scheme.declared_symplectic(),
    })
}
