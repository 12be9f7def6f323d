//! Semidiscrete problems and their initial data.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::field::{angle_bracket, mode_of_slot, slot, FourierState, FrequencySet};
use crate::integrators::Forcing;

/// Name of the generator behind [`InitialDataSpec::SeededRandom`].
pub const PRNG_NAME: &str = "chacha20";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    Spectral,
    FiniteDifference,
}

impl Discretization {
    pub fn as_str(self) -> &'static str {
        match self {
            Discretization::Spectral => "spectral",
            Discretization::FiniteDifference => "finite_difference",
        }
    }
}

impl std::str::FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Discretization::Spectral),
            "finite_difference" | "fd" => Ok(Discretization::FiniteDifference),
            other => Err(Error::Domain(format!("unknown discretization `{other}`"))),
        }
    }
}

/// `ÿ = -Ω²y + f(y)` with `f(y) = y^{*p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidiscreteProblem {
    fs: FrequencySet,
    p: u32,
    real_field: bool,
    linear: bool,
}

impl SemidiscreteProblem {
    fn build(fs: FrequencySet, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!(
                "nonlinearity power must be >= 2, got {p}"
            )));
        }
        Ok(Self {
            fs,
            p,
            real_field: true,
            linear: false,
        })
    }

    pub fn frequencies(&self) -> &FrequencySet {
        &self.fs
    }

    pub fn k(&self) -> usize {
        self.fs.k()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn real_field(&self) -> bool {
        self.real_field
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn discretization(&self) -> Discretization {
        match self.fs.rule() {
            crate::field::WeightRule::SpectralAngle => Discretization::Spectral,
            crate::field::WeightRule::FiniteDifference { .. } => Discretization::FiniteDifference,
        }
    }

    /// The same problem with the nonlinearity switched off.
    pub fn linearized(mut self) -> Self {
        self.linear = true;
        self
    }

    pub fn forcing(&self) -> Forcing {
        if self.linear {
            Forcing::None
        } else {
            Forcing::Power(self.p)
        }
    }
}

/// Spectral collocation: `ω_j = |j|`.
pub fn make_spectral_problem(k: usize, p: u32) -> Result<SemidiscreteProblem> {
    SemidiscreteProblem::build(FrequencySet::spectral(k)?, p)
}

/// Central finite differences on the collocation grid.
pub fn make_fd_problem(k: usize, p: u32) -> Result<SemidiscreteProblem> {
    SemidiscreteProblem::build(FrequencySet::finite_difference(k)?, p)
}

pub fn make_problem(disc: Discretization, k: usize, p: u32) -> Result<SemidiscreteProblem> {
    match disc {
        Discretization::Spectral => make_spectral_problem(k, p),
        Discretization::FiniteDifference => make_fd_problem(k, p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    /// Unit-modulus coefficients with uniform phase, scaled by `amplitude · ⟨j⟩^{-decay}`.
    ///
    /// Modes `1..K-1` get a free phase and their mirrors the conjugate;
    /// modes `0` and `-K` get a random sign. All draws for `y` come before
    /// those for `ẏ`, each in the order `0, -K, 1, ..., K-1`. With
    /// `zero_mean_velocity` the drawn `ẏ_0` is replaced by zero so the
    /// spatial mean does not drift linearly in time.
    SeededRandom {
        seed: u64,
        decay_y: f64,
        decay_ydot: f64,
        amplitude: f64,
        zero_mean_velocity: bool,
    },
    /// Coefficients given directly (transform order).
    ExplicitFourier {
        y: Vec<Complex64>,
        ydot: Vec<Complex64>,
    },
}

impl InitialDataSpec {
    pub fn seeded(seed: u64, decay_y: f64, decay_ydot: f64) -> Self {
        InitialDataSpec::SeededRandom {
            seed,
            decay_y,
            decay_ydot,
            amplitude: 1.0,
            zero_mean_velocity: false,
        }
    }
}

fn draw_real_field(rng: &mut ChaCha20Rng, k: usize, decay: f64, amplitude: f64) -> Vec<Complex64> {
    let n = 2 * k;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let scale = |m: usize| amplitude * angle_bracket(mode_of_slot(m, k)).powf(-decay);
    for m in [0, k] {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        v[m] = Complex64::new(sign * scale(m), 0.0);
    }
    for j in 1..k as i64 {
        let phase = TAU * rng.gen::<f64>();
        let c = Complex64::from_polar(scale(slot(j, k)), phase);
        v[slot(j, k)] = c;
        v[slot(-j, k)] = c.conj();
    }
    v
}

pub fn make_initial_state(
    prob: &SemidiscreteProblem,
    spec: &InitialDataSpec,
) -> Result<FourierState> {
    let k = prob.k();
    match spec {
        InitialDataSpec::SeededRandom {
            seed,
            decay_y,
            decay_ydot,
            amplitude,
            zero_mean_velocity,
        } => {
            if !(decay_y.is_finite() && decay_ydot.is_finite() && amplitude.is_finite()) {
                return Err(Error::Domain(
                    "initial-data parameters must be finite".into(),
                ));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            let y = draw_real_field(&mut rng, k, *decay_y, *amplitude);
            let mut ydot = draw_real_field(&mut rng, k, *decay_ydot, *amplitude);
            if *zero_mean_velocity {
                ydot[0] = Complex64::new(0.0, 0.0);
            }
            FourierState::new(y, ydot)
        }
        InitialDataSpec::ExplicitFourier { y, ydot } => {
            let st = FourierState::new(y.clone(), ydot.clone())?;
            if st.k() != k {
                return Err(Error::SizeMismatch {
                    expected: k,
                    found: st.k(),
                });
            }
            Ok(st)
        }
    }
}
