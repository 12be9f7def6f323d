//! One-stage explicit ERKN integrators for `ÿ = -Ω²y + f(y)`.
//!
//! A step with stepsize `h` reads, per mode with `ξ = hω_j`,
//!
//! ```text
//! y_c   = φ0(c²ξ²) y + h c φ1(c²ξ²) ẏ
//! y'    = φ0(ξ²) y + h φ1(ξ²) ẏ + h² b̄(ξ) f(y_c)
//! ẏ'    = -h ω² φ1(ξ²) y + φ0(ξ²) ẏ + h b(ξ) f(y_c)
//! ```
//!
//! The φ-functions are written here as functions of `ξ` rather than of
//! `V = ξ²`: `phi(0, ξ) = cos ξ`, `phi(1, ξ) = sin ξ / ξ`,
//! `phi(2, ξ) = (1 - cos ξ) / ξ²`.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Collocation, FourierState, FrequencySet};

const SERIES_CUTOFF: f64 = 1e-4;
const SERIES_TERMS: usize = 6;

fn phi_series(j: usize, xi: f64) -> f64 {
    let v = xi * xi;
    // (2k+j)! built incrementally
    let mut fact: f64 = (1..=j).map(|i| i as f64).product();
    let mut term_pow = 1.0;
    let mut sum = 0.0;
    for k in 0..SERIES_TERMS {
        if k > 0 {
            let n = (2 * k + j) as f64;
            fact *= (n - 1.0) * n;
            term_pow *= -v;
        }
        sum += term_pow / fact;
    }
    sum
}

/// `cos ξ`.
pub fn phi0(xi: f64) -> f64 {
    xi.cos()
}

/// `sin ξ / ξ`, equal to 1 at 0.
pub fn phi1(xi: f64) -> f64 {
    let a = xi.abs();
    if a < SERIES_CUTOFF {
        phi_series(1, a)
    } else {
        a.sin() / a
    }
}

/// `(1 - cos ξ) / ξ²`, equal to 1/2 at 0.
///
/// Evaluated as `½ φ1(ξ/2)²`, which avoids the cancellation in `1 - cos ξ`.
pub fn phi2(xi: f64) -> f64 {
    let s = phi1(0.5 * xi);
    0.5 * s * s
}

/// `φ_j` evaluated at `V = ξ²`. The functions are even in `ξ`.
pub fn phi(j: u32, xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(Error::Domain(format!(
            "phi argument must be finite, got {xi}"
        )));
    }
    match j {
        0 => Ok(phi0(xi)),
        1 => Ok(phi1(xi)),
        2 => Ok(phi2(xi)),
        _ => Err(Error::Domain(format!(
            "phi_{j} is not supported (j must be 0, 1 or 2)"
        ))),
    }
}

/// A scalar coefficient function `ξ ↦ b(ξ²)`.
pub type FilterFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-stage explicit ERKN scheme.
#[derive(Clone)]
pub struct ErknScheme {
    id: String,
    c1: f64,
    bbar: FilterFn,
    b: FilterFn,
    symmetric: bool,
    symplectic: bool,
}

impl fmt::Debug for ErknScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErknScheme")
            .field("id", &self.id)
            .field("c1", &self.c1)
            .field("symmetric", &self.symmetric)
            .field("symplectic", &self.symplectic)
            .finish()
    }
}

impl ErknScheme {
    /// A user-defined scheme. The coefficient functions receive `ξ = |h ω|`.
    pub fn new(
        id: impl Into<String>,
        c1: f64,
        bbar: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            c1,
            bbar: Arc::new(bbar),
            b: Arc::new(b),
            symmetric: false,
            symplectic: false,
        }
    }

    /// Declares the structural properties the scheme is expected to have.
    pub fn with_flags(mut self, symmetric: bool, symplectic: bool) -> Self {
        self.symmetric = symmetric;
        self.symplectic = symplectic;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn declared_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn declared_symplectic(&self) -> bool {
        self.symplectic
    }

    /// `b̄₁(ξ²)`.
    pub fn bbar(&self, xi: f64) -> f64 {
        (self.bbar)(xi.abs())
    }

    /// `b₁(ξ²)`.
    pub fn b(&self, xi: f64) -> f64 {
        (self.b)(xi.abs())
    }
}

struct TableRow {
    id: &'static str,
    bbar: fn(f64) -> f64,
    b: fn(f64) -> f64,
    symmetric: bool,
    symplectic: bool,
}

// V/4 corresponds to ξ/2.
const TABLE: [TableRow; 5] = [
    TableRow {
        id: "ERKN1",
        bbar: phi2,
        b: |x| phi0(0.5 * x),
        symmetric: false,
        symplectic: false,
    },
    TableRow {
        id: "ERKN2",
        bbar: phi2,
        b: phi1,
        symmetric: true,
        symplectic: false,
    },
    TableRow {
        id: "ERKN3",
        bbar: |x| 0.5 * phi1(0.5 * x),
        b: |x| phi0(0.5 * x),
        symmetric: true,
        symplectic: true,
    },
    TableRow {
        id: "ERKN4",
        bbar: |x| {
            let s = phi1(0.5 * x);
            0.5 * s * s
        },
        b: |x| phi1(0.5 * x) * phi0(0.5 * x),
        symmetric: true,
        symplectic: false,
    },
    TableRow {
        id: "ERKN5",
        bbar: |x| 0.5 * phi1(x) * phi1(0.5 * x),
        b: |x| phi1(x) * phi0(0.5 * x),
        symmetric: true,
        symplectic: false,
    },
];

/// The five shipped schemes, all with `c1 = 1/2`.
pub fn scheme_registry() -> Vec<ErknScheme> {
    TABLE
        .iter()
        .map(|row| {
            ErknScheme::new(row.id, 0.5, row.bbar, row.b).with_flags(row.symmetric, row.symplectic)
        })
        .collect()
}

/// Looks up a registry scheme by id (case-insensitive).
pub fn scheme_by_id(id: &str) -> Result<ErknScheme> {
    scheme_registry()
        .into_iter()
        .find(|s| s.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownScheme(id.to_string()))
}

/// Right-hand side nonlinearity of the semidiscrete system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// `f(y) = y * ... * y` with `p` factors.
    Power(u32),
    /// `f ≡ 0`.
    None,
}

/// Per-mode scalars of one step with fixed `h` and `ω`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeCoefficients {
    stage_y: f64,
    stage_ydot: f64,
    y_y: f64,
    y_ydot: f64,
    ydot_y: f64,
    ydot_ydot: f64,
    force_y: f64,
    force_ydot: f64,
}

impl ModeCoefficients {
    pub(crate) fn new(scheme: &ErknScheme, omega: f64, h: f64) -> Self {
        let xi = (h * omega).abs();
        let c = scheme.c1;
        let cos = phi0(xi);
        let sinc = phi1(xi);
        Self {
            stage_y: phi0(c * xi),
            stage_ydot: h * c * phi1(c * xi),
            y_y: cos,
            y_ydot: h * sinc,
            ydot_y: -h * omega * omega * sinc,
            ydot_ydot: cos,
            force_y: h * h * scheme.bbar(xi),
            force_ydot: h * scheme.b(xi),
        }
    }

    #[inline]
    pub(crate) fn stage<T>(&self, y: T, ydot: T) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        y * self.stage_y + ydot * self.stage_ydot
    }

    #[inline]
    pub(crate) fn advance<T>(&self, y: T, ydot: T, force: T) -> (T, T)
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        (
            y * self.y_y + ydot * self.y_ydot + force * self.force_y,
            y * self.ydot_y + ydot * self.ydot_ydot + force * self.force_ydot,
        )
    }
}

/// A scheme bound to one frequency set, stepsize and nonlinearity.
///
/// Coefficients and FFT plans are computed once, so repeated steps only
/// cost two transforms.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme_id: String,
    h: f64,
    forcing: Forcing,
    coeffs: Vec<ModeCoefficients>,
    colloc: Collocation,
}

impl Stepper {
    pub fn new(scheme: &ErknScheme, fs: &FrequencySet, h: f64, forcing: Forcing) -> Result<Self> {
        if !h.is_finite() || h == 0.0 {
            return Err(Error::Domain(format!(
                "stepsize must be finite and nonzero, got {h}"
            )));
        }
        if let Forcing::Power(p) = forcing {
            if p < 2 {
                return Err(Error::Domain(format!(
                    "nonlinearity power must be >= 2, got {p}"
                )));
            }
        }
        let coeffs = fs
            .omegas()
            .iter()
            .map(|&w| ModeCoefficients::new(scheme, w, h))
            .collect();
        Ok(Self {
            scheme_id: scheme.id.clone(),
            h,
            forcing,
            coeffs,
            colloc: Collocation::new(fs.k())?,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn scheme_id(&self) -> &str {
        &self.scheme_id
    }

    pub fn k(&self) -> usize {
        self.colloc.k()
    }

    /// Advances `st` by one step in place.
    pub fn step_in_place(&self, st: &mut FourierState) -> Result<()> {
        if st.k() != self.k() {
            return Err(Error::SizeMismatch {
                expected: self.k(),
                found: st.k(),
            });
        }
        let (y, ydot) = st.parts_mut();
        let force = match self.forcing {
            Forcing::Power(p) => {
                let stage: Vec<Complex64> = self
                    .coeffs
                    .iter()
                    .zip(y.iter().zip(ydot.iter()))
                    .map(|(c, (&a, &b))| c.stage(a, b))
                    .collect();
                self.colloc.power(&stage, p)?
            }
            Forcing::None => vec![Complex64::new(0.0, 0.0); y.len()],
        };
        for (m, c) in self.coeffs.iter().enumerate() {
            let (ny, nd) = c.advance(y[m], ydot[m], force[m]);
            y[m] = ny;
            ydot[m] = nd;
        }
        if st.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { step: 1 })
        }
    }

    pub fn step(&self, st: &FourierState) -> Result<FourierState> {
        let mut next = st.clone();
        self.step_in_place(&mut next)?;
        Ok(next)
    }
}

/// One ERKN step of `scheme` with `f(y) = y^{*p}`.
pub fn erkn_step(
    scheme: &ErknScheme,
    st: &FourierState,
    fs: &FrequencySet,
    h: f64,
    p: u32,
) -> Result<FourierState> {
    if st.k() != fs.k() {
        return Err(Error::SizeMismatch {
            expected: fs.k(),
            found: st.k(),
        });
    }
    Stepper::new(scheme, fs, h, Forcing::Power(p))?.step(st)
}

/// Homogeneous flow `R(t)` of `ÿ = -Ω²y`, applied mode by mode.
pub fn exact_linear_flow(st: &FourierState, fs: &FrequencySet, t: f64) -> Result<FourierState> {
    if st.k() != fs.k() {
        return Err(Error::SizeMismatch {
            expected: fs.k(),
            found: st.k(),
        });
    }
    let mut y = st.y().to_vec();
    let mut ydot = st.ydot().to_vec();
    for (m, &w) in fs.omegas().iter().enumerate() {
        let arg = t * w;
        let (sin, cos) = arg.sin_cos();
        let (a, b) = (y[m], ydot[m]);
        y[m] = a * cos + b * (t * phi1(arg));
        ydot[m] = a * (-w * sin) + b * cos;
    }
    Ok(FourierState::from_parts_unchecked(st.k(), y, ydot))
}

/// One step of `scheme` on the scalar oscillator `q̈ = -ω²q + force(q)`.
pub fn oscillator_step(
    scheme: &ErknScheme,
    omega: f64,
    h: f64,
    q: f64,
    p: f64,
    force: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let c = ModeCoefficients::new(scheme, omega, h);
    let stage = c.stage(q, p);
    c.advance(q, p, force(stage))
}

/// One step on the real system `q̈_i = -ω_i² q_i + force(q)_i`.
pub fn canonical_step(
    scheme: &ErknScheme,
    omegas: &[f64],
    h: f64,
    q: &[f64],
    p: &[f64],
    force: impl Fn(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, Vec<f64>) {
    assert!(q.len() == omegas.len() && p.len() == omegas.len());
    let coeffs: Vec<ModeCoefficients> = omegas
        .iter()
        .map(|&w| ModeCoefficients::new(scheme, w, h))
        .collect();
    let stage: Vec<f64> = coeffs
        .iter()
        .zip(q.iter().zip(p))
        .map(|(c, (&a, &b))| c.stage(a, b))
        .collect();
    let g = force(&stage);
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.advance(q[i], p[i], g[i]))
        .unzip()
}
