//! Trajectories, reference solutions, error measurement and order fits.

use rayon::prelude::*;

use crate::config::{ErrorTime, ExperimentConfig};
use crate::error::{Error, Result};
use crate::field::{FourierState, PairNorm, WeightedNorm};
use crate::integrators::{phi1, scheme_by_id, ErknScheme, Stepper};
use crate::problem::{make_initial_state, make_problem, SemidiscreteProblem};

/// Scheme used for reference trajectories.
pub const REFERENCE_SCHEME: &str = "ERKN3";
/// Default reference stepsize exponent, `h_ref = 2^-13 · T/10`.
pub const DEFAULT_REFERENCE_EXPONENT: i32 = 13;

/// Applies `stepper` `n_steps` times, reporting `(step, |||·|||_0)` after each step.
///
/// The first non-finite step aborts with [`Error::NonFinite`] carrying its index.
pub fn integrate_with(
    stepper: &Stepper,
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    n_steps: usize,
    mut monitor: impl FnMut(usize, f64),
) -> Result<FourierState> {
    let norm = PairNorm::new(prob.frequencies(), 0.0);
    let mut st = st0.clone();
    for n in 1..=n_steps {
        stepper.step_in_place(&mut st).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step: n },
            other => other,
        })?;
        monitor(n, norm.eval(&st)?);
    }
    Ok(st)
}

pub fn integrate(
    scheme: &ErknScheme,
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    h: f64,
    n_steps: usize,
) -> Result<FourierState> {
    if n_steps == 0 {
        return Ok(st0.clone());
    }
    let stepper = Stepper::new(scheme, prob.frequencies(), h, prob.forcing())?;
    integrate_with(&stepper, prob, st0, n_steps, |_, _| {})
}

/// Number of steps `T/h`, rejecting stepsizes that do not divide `T`.
pub fn commensurate_steps(t_end: f64, h: f64) -> Result<usize> {
    if h.is_nan() || h <= 0.0 || !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::Domain(format!(
            "need h > 0 and finite T >= 0, got h = {h}, T = {t_end}"
        )));
    }
    let n = (t_end / h).round();
    if (n * h - t_end).abs() > 1e-12 * t_end.max(1.0) {
        return Err(Error::Incommensurate { t_end, h });
    }
    Ok(n as usize)
}

/// How the reference trajectory is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferencePolicy {
    /// `h_ref = 2^{-exponent} · T/10`.
    pub exponent: i32,
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        Self {
            exponent: DEFAULT_REFERENCE_EXPONENT,
        }
    }
}

impl ReferencePolicy {
    pub fn steps(&self, t_end: f64) -> usize {
        let n = 10.0 * 2f64.powi(self.exponent);
        // T/10 normalisation keeps the step count independent of T.
        if t_end == 0.0 {
            0
        } else {
            n as usize
        }
    }

    pub fn halved(self) -> Self {
        Self {
            exponent: self.exponent + 1,
        }
    }
}

/// ERKN3 trajectory at time `t_end` with the fine stepsize of `policy`.
pub fn reference_solution_with(
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    t_end: f64,
    policy: ReferencePolicy,
) -> Result<FourierState> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::Domain(format!(
            "reference time must be finite and >= 0, got {t_end}"
        )));
    }
    let n = policy.steps(t_end);
    if n == 0 {
        return Ok(st0.clone());
    }
    let scheme = scheme_by_id(REFERENCE_SCHEME)?;
    integrate(&scheme, prob, st0, t_end / n as f64, n)
}

pub fn reference_solution(
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    t_end: f64,
) -> Result<FourierState> {
    reference_solution_with(prob, st0, t_end, ReferencePolicy::default())
}

/// Errors of a numerical state against a reference in the shifted norms
/// `‖·‖_{s+1-α}` (positions) and `‖·‖_{s-α}` (velocities).
#[derive(Debug, Clone)]
pub struct ErrorNorms {
    pub alpha: f64,
    y: WeightedNorm,
    ydot: WeightedNorm,
}

impl ErrorNorms {
    pub fn new(prob: &SemidiscreteProblem, alpha: f64, s: f64) -> Self {
        let fs = prob.frequencies();
        Self {
            alpha,
            y: WeightedNorm::new(fs, s + 1.0 - alpha),
            ydot: WeightedNorm::new(fs, s - alpha),
        }
    }

    /// `(‖y_a - y_b‖, ‖ẏ_a - ẏ_b‖)`.
    pub fn between(&self, a: &FourierState, b: &FourierState) -> Result<(f64, f64)> {
        let d = a.difference(b)?;
        Ok((self.y.eval(d.y())?, self.ydot.eval(d.ydot())?))
    }

    pub fn of(&self, st: &FourierState) -> Result<(f64, f64)> {
        Ok((self.y.eval(st.y())?, self.ydot.eval(st.ydot())?))
    }
}

/// Final-time errors of `scheme` with stepsize `h` against the reference.
pub fn error_at(
    scheme: &ErknScheme,
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    h: f64,
    t_end: f64,
    alpha: f64,
    s: f64,
) -> Result<(f64, f64)> {
    let n = commensurate_steps(t_end, h)?;
    let reference = reference_solution(prob, st0, t_end)?;
    let numerical = integrate(scheme, prob, st0, h, n)?;
    ErrorNorms::new(prob, alpha, s).between(&numerical, &reference)
}

/// Least-squares slope of `log2(err)` against `log2(h)`.
pub fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(h, e)| (h.log2(), e.log2())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Minimum number of stepsizes a fit needs.
pub const MIN_FIT_POINTS: usize = 4;
/// Errors above this fraction of the initial-data norm count as preasymptotic.
pub const PREASYMPTOTIC_FRACTION: f64 = 0.1;
/// Errors below this multiple of the reference self-consistency error are floored.
pub const REFERENCE_FLOOR_FACTOR: f64 = 100.0;

/// Bounds of the asymptotic fit window for one error component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub max_err: f64,
    pub min_err: f64,
}

impl FitWindow {
    pub fn contains(&self, err: f64) -> bool {
        err.is_finite() && err > 0.0 && err <= self.max_err && err >= self.min_err
    }

    /// Order over the in-window points, or `None` with fewer than [`MIN_FIT_POINTS`].
    pub fn fit(&self, points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
        let kept: Vec<_> = points
            .into_iter()
            .filter(|&(_, e)| self.contains(e))
            .collect();
        if kept.len() < MIN_FIT_POINTS {
            return None;
        }
        fit_order(&kept)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub h: f64,
    pub n_steps: usize,
    pub err_y: f64,
    pub err_ydot: f64,
}

/// Errors of one scheme at one `α` over the stepsize ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub scheme: String,
    pub alpha: f64,
    /// Sorted by decreasing `h`; blown-up cells carry infinite errors.
    pub samples: Vec<ErrorSample>,
    /// `NaN` when the window holds too few points.
    pub fitted_order_y: f64,
    pub fitted_order_ydot: f64,
    pub window_y: FitWindow,
    pub window_ydot: FitWindow,
}

impl ErrorCurve {
    /// Stepsizes that entered the `y` fit.
    pub fn fitted_h_y(&self) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| self.window_y.contains(s.err_y))
            .map(|s| s.h)
            .collect()
    }

    pub fn fitted_h_ydot(&self) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| self.window_ydot.contains(s.err_ydot))
            .map(|s| s.h)
            .collect()
    }
}

/// Outcome of one `(scheme, h)` trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub scheme: String,
    pub h: f64,
    pub n_steps: usize,
    pub initial_norm: f64,
    /// Largest `|||(yⁿ, ẏⁿ)|||_0` seen, including the initial state.
    pub max_norm: f64,
    /// First non-finite step, if the run blew up.
    pub blow_up_step: Option<usize>,
}

impl TrajectoryRecord {
    pub fn accepted(&self) -> bool {
        self.blow_up_step.is_none()
    }

    pub fn growth(&self) -> f64 {
        self.max_norm / self.initial_norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub curves: Vec<ErrorCurve>,
    pub trajectories: Vec<TrajectoryRecord>,
    /// Reference self-consistency error per `α`: `(α, err_y, err_ydot)`.
    pub reference_floor: Vec<(f64, f64, f64)>,
}

impl StudyReport {
    pub fn curve(&self, scheme: &str, alpha: f64) -> Option<&ErrorCurve> {
        self.curves
            .iter()
            .find(|c| c.scheme == scheme && c.alpha == alpha)
    }
}

struct Cell {
    errors: Vec<(f64, f64)>,
    record: TrajectoryRecord,
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    scheme: &ErknScheme,
    prob: &SemidiscreteProblem,
    st0: &FourierState,
    h: f64,
    n_steps: usize,
    norms: &[ErrorNorms],
    error_time: ErrorTime,
    reference: &FourierState,
    ref_policy: ReferencePolicy,
    t_end: f64,
) -> Result<Cell> {
    let stepper = Stepper::new(scheme, prob.frequencies(), h, prob.forcing())?;
    let pair = PairNorm::new(prob.frequencies(), 0.0);
    let initial_norm = pair.eval(st0)?;
    let mut record = TrajectoryRecord {
        scheme: scheme.id().to_string(),
        h,
        n_steps,
        initial_norm,
        max_norm: initial_norm,
        blow_up_step: None,
    };
    let blown = |record: TrajectoryRecord| Cell {
        errors: vec![(f64::INFINITY, f64::INFINITY); norms.len()],
        record,
    };

    match error_time {
        ErrorTime::Final => {
            let result = integrate_with(&stepper, prob, st0, n_steps, |_, v| {
                record.max_norm = record.max_norm.max(v);
            });
            match result {
                Ok(st) => {
                    let errors = norms
                        .iter()
                        .map(|n| n.between(&st, reference))
                        .collect::<Result<_>>()?;
                    Ok(Cell { errors, record })
                }
                Err(Error::NonFinite { step }) => {
                    record.blow_up_step = Some(step);
                    Ok(blown(record))
                }
                Err(e) => Err(e),
            }
        }
        ErrorTime::MaxOverSteps => {
            // The reference advances in lockstep, `ratio` fine steps per coarse step.
            let ref_steps = ref_policy.steps(t_end);
            let ratio = ref_steps / n_steps.max(1);
            if ratio * n_steps != ref_steps {
                return Err(Error::Incommensurate {
                    t_end: t_end / ref_steps as f64,
                    h,
                });
            }
            let ref_stepper = Stepper::new(
                &scheme_by_id(REFERENCE_SCHEME)?,
                prob.frequencies(),
                t_end / ref_steps as f64,
                prob.forcing(),
            )?;
            let mut st = st0.clone();
            let mut exact = st0.clone();
            let mut errors = vec![(0.0f64, 0.0f64); norms.len()];
            for n in 1..=n_steps {
                if stepper.step_in_place(&mut st).is_err() {
                    record.blow_up_step = Some(n);
                    return Ok(blown(record));
                }
                for _ in 0..ratio {
                    ref_stepper.step_in_place(&mut exact)?;
                }
                record.max_norm = record.max_norm.max(pair.eval(&st)?);
                for (acc, norm) in errors.iter_mut().zip(norms) {
                    let (ey, ed) = norm.between(&st, &exact)?;
                    acc.0 = acc.0.max(ey);
                    acc.1 = acc.1.max(ed);
                }
            }
            Ok(Cell { errors, record })
        }
    }
}

/// Runs every `(scheme, h)` trajectory of `cfg` and fits orders per `(scheme, α)`.
///
/// Cells run in parallel on the current rayon pool; results are merged in
/// config order. A blown-up cell yields infinite errors and does not stop
/// the study.
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<StudyReport> {
    cfg.validate().map_err(|e| Error::Domain(e.to_string()))?;
    let prob = make_problem(cfg.discretization, cfg.k, cfg.p)?;
    let st0 = make_initial_state(&prob, &cfg.initial_data())?;
    let schemes: Vec<ErknScheme> = cfg
        .schemes
        .iter()
        .map(|id| scheme_by_id(id))
        .collect::<Result<_>>()?;
    let norms: Vec<ErrorNorms> = cfg
        .alphas
        .iter()
        .map(|&a| ErrorNorms::new(&prob, a, cfg.s))
        .collect();
    let policy = ReferencePolicy {
        exponent: cfg.h_ref_exponent,
    };

    let (reference, reference_fine) = rayon::join(
        || reference_solution_with(&prob, &st0, cfg.t_end, policy),
        || reference_solution_with(&prob, &st0, cfg.t_end, policy.halved()),
    );
    let (reference, reference_fine) = (reference?, reference_fine?);
    let floors: Vec<(f64, f64)> = norms
        .iter()
        .map(|n| n.between(&reference, &reference_fine))
        .collect::<Result<_>>()?;

    let mut exps = cfg.h_exponents.clone();
    exps.sort_unstable();
    exps.dedup();
    let cells: Vec<(usize, i32)> = (0..schemes.len())
        .flat_map(|i| exps.iter().map(move |&j| (i, j)))
        .collect();

    let results: Vec<Cell> = cells
        .par_iter()
        .map(|&(i, j)| {
            let h = 2f64.powi(-j);
            let n = commensurate_steps(cfg.t_end, h)?;
            run_cell(
                &schemes[i],
                &prob,
                &st0,
                h,
                n,
                &norms,
                cfg.error_time,
                &reference,
                policy,
                cfg.t_end,
            )
        })
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for (i, scheme) in schemes.iter().enumerate() {
        let scheme_cells: Vec<&Cell> = cells
            .iter()
            .zip(&results)
            .filter(|((ci, _), _)| *ci == i)
            .map(|(_, c)| c)
            .collect();
        for (a, norm) in norms.iter().enumerate() {
            let samples: Vec<ErrorSample> = scheme_cells
                .iter()
                .map(|c| ErrorSample {
                    h: c.record.h,
                    n_steps: c.record.n_steps,
                    err_y: c.errors[a].0,
                    err_ydot: c.errors[a].1,
                })
                .collect();
            let (init_y, init_ydot) = norm.of(&st0)?;
            let window_y = FitWindow {
                max_err: PREASYMPTOTIC_FRACTION * init_y,
                min_err: REFERENCE_FLOOR_FACTOR * floors[a].0,
            };
            let window_ydot = FitWindow {
                max_err: PREASYMPTOTIC_FRACTION * init_ydot,
                min_err: REFERENCE_FLOOR_FACTOR * floors[a].1,
            };
            let fitted_order_y = window_y
                .fit(samples.iter().map(|s| (s.h, s.err_y)))
                .unwrap_or(f64::NAN);
            let fitted_order_ydot = window_ydot
                .fit(samples.iter().map(|s| (s.h, s.err_ydot)))
                .unwrap_or(f64::NAN);
            curves.push(ErrorCurve {
                scheme: scheme.id().to_string(),
                alpha: norm.alpha,
                samples,
                fitted_order_y,
                fitted_order_ydot,
                window_y,
                window_ydot,
            });
        }
    }

    Ok(StudyReport {
        curves,
        trajectories: results.into_iter().map(|c| c.record).collect(),
        reference_floor: norms
            .iter()
            .zip(&floors)
            .map(|(n, f)| (n.alpha, f.0, f.1))
            .collect(),
    })
}

/// Log-spaced grid of `ξ = hω` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for XiGrid {
    fn default() -> Self {
        Self {
            min: 1e-6,
            max: 1e3,
            points: 10_000,
        }
    }
}

impl XiGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        let step = (b - a) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (a + step * i as f64).exp())
            .collect()
    }
}

/// Which filter inequality a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterBound {
    /// `|b̄(ξ²)| ≤ c ξ^β` for `-1 ≤ β ≤ 0`.
    Bbar,
    /// `|½ sinc²(ξ/2) - b̄(ξ²)| ≤ c ξ^β` for `0 < β ≤ 1`.
    BbarDefect,
    /// `|1 - b(ξ²)| ≤ c ξ^{1+β}`.
    BDefect,
}

impl FilterBound {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterBound::Bbar => "bbar",
            FilterBound::BbarDefect => "half_sinc2_minus_bbar",
            FilterBound::BDefect => "one_minus_b",
        }
    }

    fn ratio(self, scheme: &ErknScheme, beta: f64, xi: f64) -> f64 {
        match self {
            FilterBound::Bbar => scheme.bbar(xi).abs() / xi.powf(beta),
            FilterBound::BbarDefect => {
                let s = phi1(0.5 * xi);
                (0.5 * s * s - scheme.bbar(xi)).abs() / xi.powf(beta)
            }
            FilterBound::BDefect => (1.0 - scheme.b(xi)).abs() / xi.powf(1.0 + beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBoundReport {
    pub scheme: String,
    pub beta: f64,
    pub bound: FilterBound,
    /// Supremum of the bound's ratio over the grid; `NaN`/`inf` mark a failure.
    pub measured_c: f64,
    pub grid: XiGrid,
}

impl FilterBoundReport {
    pub fn holds(&self) -> bool {
        self.measured_c.is_finite()
    }
}

/// Measures the filter-function constants of `scheme` for each `β`.
///
/// Every `β` yields a [`FilterBound::BDefect`] report plus either
/// [`FilterBound::Bbar`] (`β ≤ 0`) or [`FilterBound::BbarDefect`] (`β > 0`).
pub fn check_filter_bounds(
    scheme: &ErknScheme,
    betas: &[f64],
    grid: &XiGrid,
) -> Vec<FilterBoundReport> {
    let xs = grid.values();
    let sup = |bound: FilterBound, beta: f64| {
        xs.iter().fold(0.0f64, |acc, &x| {
            let r = bound.ratio(scheme, beta, x);
            if r.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(r)
            }
        })
    };
    let mut out = Vec::new();
    for &beta in betas {
        let first = if beta <= 0.0 {
            FilterBound::Bbar
        } else {
            FilterBound::BbarDefect
        };
        for bound in [first, FilterBound::BDefect] {
            out.push(FilterBoundReport {
                scheme: scheme.id().to_string(),
                beta,
                bound,
                measured_c: sup(bound, beta),
                grid: *grid,
            });
        }
    }
    out
}
