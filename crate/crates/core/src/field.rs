//! Fourier coefficient states on the mode set `{-K, ..., K-1}`.
//!
//! Coefficient vectors are stored in transform order: slot `m` holds mode
//! `j = m` for `m < K` and mode `j = m - 2K` otherwise, so the collocation
//! transform is a plain length-`2K` DFT. Use [`slot`] and [`mode_of_slot`]
//! to move between the two labellings.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Storage slot of mode `j` for a `2K`-mode vector.
pub fn slot(j: i64, k: usize) -> usize {
    j.rem_euclid(2 * k as i64) as usize
}

/// Mode index `j ∈ {-K, ..., K-1}` stored in `slot`.
pub fn mode_of_slot(slot: usize, k: usize) -> i64 {
    if slot < k {
        slot as i64
    } else {
        slot as i64 - 2 * k as i64
    }
}

/// `⟨j⟩ = max(1, |j|)`.
pub fn angle_bracket(j: i64) -> f64 {
    j.unsigned_abs().max(1) as f64
}

fn half_len(v: &[Complex64]) -> Result<usize> {
    if v.is_empty() || !v.len().is_multiple_of(2) {
        return Err(Error::BadLength { len: v.len() });
    }
    Ok(v.len() / 2)
}

fn check_same(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::SizeMismatch { expected, found });
    }
    Ok(())
}

/// Vector with a single unit coefficient at mode `j`.
pub fn unit_mode(k: usize, j: i64) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * k];
    v[slot(j, k)] = Complex64::new(1.0, 0.0);
    v
}

/// Largest violation of `v_{-j} = conj(v_j)` with `v_0`, `v_{-K}` real.
pub fn hermitian_defect(v: &[Complex64]) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let k = n / 2;
    let mut worst = v[0].im.abs().max(v[k].im.abs());
    for m in 1..k {
        worst = worst.max((v[n - m] - v[m].conj()).norm());
    }
    worst
}

/// The pair `(y, ẏ)` of coefficient vectors describing a discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState {
    k: usize,
    y: Vec<Complex64>,
    ydot: Vec<Complex64>,
}

impl FourierState {
    /// Builds a state from two coefficient vectors in transform order.
    pub fn new(y: Vec<Complex64>, ydot: Vec<Complex64>) -> Result<Self> {
        let k = half_len(&y)?;
        check_same(k, half_len(&ydot)?)?;
        if !y.iter().chain(&ydot).all(|c| c.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(Self { k, y, ydot })
    }

    pub fn zeros(k: usize) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); 2 * k];
        Self {
            k,
            y: zero.clone(),
            ydot: zero,
        }
    }

    pub(crate) fn from_parts_unchecked(k: usize, y: Vec<Complex64>, ydot: Vec<Complex64>) -> Self {
        debug_assert!(y.len() == 2 * k && ydot.len() == 2 * k);
        Self { k, y, ydot }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn ydot(&self) -> &[Complex64] {
        &self.ydot
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.y, &mut self.ydot)
    }

    pub fn into_parts(self) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.y, self.ydot)
    }

    /// Coefficients of mode `j` as `(y_j, ẏ_j)`.
    pub fn mode(&self, j: i64) -> (Complex64, Complex64) {
        let m = slot(j, self.k);
        (self.y[m], self.ydot[m])
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().chain(&self.ydot).all(|c| c.is_finite())
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.y).max(hermitian_defect(&self.ydot))
    }

    /// Componentwise difference `self - other`.
    pub fn difference(&self, other: &FourierState) -> Result<FourierState> {
        check_same(self.k, other.k)?;
        let sub = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, z)| x - z).collect();
        Ok(Self {
            k: self.k,
            y: sub(&self.y, &other.y),
            ydot: sub(&self.ydot, &other.ydot),
        })
    }

    /// Mirror image `u(x) -> u(-x)`, i.e. `y_j -> y_{-j}` with `y_{-K}` kept.
    pub fn reflected(&self) -> FourierState {
        let n = 2 * self.k;
        let flip = |v: &[Complex64]| (0..n).map(|m| v[(n - m) % n]).collect();
        Self {
            k: self.k,
            y: flip(&self.y),
            ydot: flip(&self.ydot),
        }
    }
}

/// How per-mode norm weights are derived from a [`FrequencySet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// `⟨j⟩ = max(1, |j|)`.
    SpectralAngle,
    /// `max(ω_j, ω_min)` with `ω_min` the smallest nonzero frequency.
    FiniteDifference { omega_min: f64 },
}

/// Per-mode frequencies `ω_j` of the semidiscrete linear operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    k: usize,
    omegas: Vec<f64>,
    rule: WeightRule,
}

impl FrequencySet {
    /// Spectral collocation frequencies `ω_j = |j|`.
    pub fn spectral(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be positive".into()));
        }
        let omegas = (0..2 * k)
            .map(|m| mode_of_slot(m, k).unsigned_abs() as f64)
            .collect();
        Ok(Self {
            k,
            omegas,
            rule: WeightRule::SpectralAngle,
        })
    }

    /// Frequencies of the second-order central difference Laplacian on the
    /// grid `x_k = πk/K`: `ω_j = (2/Δx)|sin(jΔx/2)|`, `Δx = π/K`.
    pub fn finite_difference(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be positive".into()));
        }
        let two_over_dx = 2.0 * k as f64 / PI;
        let omegas: Vec<f64> = (0..2 * k)
            .map(|m| {
                let j = mode_of_slot(m, k).unsigned_abs() as f64;
                two_over_dx * (j * PI / (2.0 * k as f64)).sin().abs()
            })
            .collect();
        let omega_min = omegas
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            k,
            omegas,
            rule: WeightRule::FiniteDifference { omega_min },
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rule(&self) -> WeightRule {
        self.rule
    }

    /// Frequencies in storage order.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega(&self, j: i64) -> f64 {
        self.omegas[slot(j, self.k)]
    }

    /// Smallest nonzero frequency.
    pub fn omega_min(&self) -> f64 {
        match self.rule {
            WeightRule::FiniteDifference { omega_min } => omega_min,
            WeightRule::SpectralAngle => 1.0,
        }
    }

    /// Norm weight of the mode stored in `slot`.
    pub fn weight(&self, slot: usize) -> f64 {
        match self.rule {
            WeightRule::SpectralAngle => angle_bracket(mode_of_slot(slot, self.k)),
            WeightRule::FiniteDifference { omega_min } => self.omegas[slot].max(omega_min),
        }
    }
}

/// `‖v‖_s = (Σ_j w_j^{2s} |v_j|²)^{1/2}` with weights from `fs`.
pub fn sobolev_norm(v: &[Complex64], s: f64, fs: &FrequencySet) -> Result<f64> {
    check_same(fs.k, half_len(v)?)?;
    let sum: f64 = v
        .iter()
        .enumerate()
        .map(|(m, c)| fs.weight(m).powf(2.0 * s) * c.norm_sqr())
        .sum();
    Ok(sum.sqrt())
}

/// [`sobolev_norm`] with the weights `w_j^{2s}` computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNorm {
    s: f64,
    weights: Vec<f64>,
}

impl WeightedNorm {
    pub fn new(fs: &FrequencySet, s: f64) -> Self {
        let weights = (0..2 * fs.k).map(|m| fs.weight(m).powf(2.0 * s)).collect();
        Self { s, weights }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, v: &[Complex64]) -> Result<f64> {
        check_same(self.weights.len() / 2, half_len(v)?)?;
        Ok(self.eval_unchecked(v))
    }

    pub(crate) fn eval_unchecked(&self, v: &[Complex64]) -> f64 {
        self.weights
            .iter()
            .zip(v)
            .map(|(w, c)| w * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// [`pair_norm`] with precomputed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNorm {
    y: WeightedNorm,
    ydot: WeightedNorm,
}

impl PairNorm {
    pub fn new(fs: &FrequencySet, sigma: f64) -> Self {
        Self {
            y: WeightedNorm::new(fs, sigma + 1.0),
            ydot: WeightedNorm::new(fs, sigma),
        }
    }

    pub fn eval(&self, st: &FourierState) -> Result<f64> {
        Ok(self.y.eval(&st.y)?.hypot(self.ydot.eval(&st.ydot)?))
    }
}

/// Norm on `H^{σ+1} × H^σ`: `(‖y‖²_{σ+1} + ‖ẏ‖²_σ)^{1/2}`.
pub fn pair_norm(st: &FourierState, sigma: f64, fs: &FrequencySet) -> Result<f64> {
    let a = sobolev_norm(&st.y, sigma + 1.0, fs)?;
    let b = sobolev_norm(&st.ydot, sigma, fs)?;
    Ok(a.hypot(b))
}

/// Aliased convolution `(a*b)_j = Σ_{k+l ≡ j mod 2K} a_k b_l` by direct summation.
pub fn discrete_convolution(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = half_len(a)?;
    check_same(k, half_len(b)?)?;
    let n = 2 * k;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, &ai) in a.iter().enumerate() {
        for (l, &bl) in b.iter().enumerate() {
            out[(i + l) % n] += ai * bl;
        }
    }
    Ok(out)
}

/// Transform pair between coefficients and values at `x_k = πk/K`.
///
/// Holds planned FFTs for one `K`; cheap to clone and safe to share.
#[derive(Clone)]
pub struct Collocation {
    k: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Collocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Collocation").field("k", &self.k).finish()
    }
}

impl Collocation {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("K must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            k,
            forward: planner.plan_fft_forward(2 * k),
            inverse: planner.plan_fft_inverse(2 * k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `values_k = Σ_j v_j e^{i j x_k}`, values stored with the same slot convention.
    pub fn to_values(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_same(self.k, half_len(v)?)?;
        let mut buf = v.to_vec();
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    pub fn from_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        check_same(self.k, half_len(values)?)?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / (2 * self.k) as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(buf)
    }

    /// `p`-fold aliased self-convolution via pointwise powers on the grid.
    pub fn power(&self, y: &[Complex64], p: u32) -> Result<Vec<Complex64>> {
        if p < 2 {
            return Err(Error::Domain(format!(
                "nonlinearity power must be >= 2, got {p}"
            )));
        }
        let mut values = self.to_values(y)?;
        values.iter_mut().for_each(|u| *u = u.powu(p));
        self.from_values(&values)
    }
}

pub fn to_collocation(v: &[Complex64]) -> Result<Vec<Complex64>> {
    Collocation::new(half_len(v)?)?.to_values(v)
}

pub fn from_collocation(values: &[Complex64]) -> Result<Vec<Complex64>> {
    Collocation::new(half_len(values)?)?.from_values(values)
}

/// `f(y) = y * ... * y` (`p` factors).
pub fn nonlinearity(y: &[Complex64], p: u32) -> Result<Vec<Complex64>> {
    Collocation::new(half_len(y)?)?.power(y, p)
}
