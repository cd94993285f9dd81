//! Orbit arcs between consecutive hits of Σ, the half-return maps φ±, the
//! displacement function and a power-law estimate of its leading term.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{PiecewiseField, Side, SmoothField};
use crate::format::g17;
use crate::ode::{initial_step, State, TrialStep};
use crate::roots::brent;

/// Dense-output samples inspected per accepted step, so that a pair of
/// crossings inside one step is not missed.
const EVENT_SAMPLES: usize = 8;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Target accuracy of `|y|` at a located return.
    pub event_tol: f64,
    /// Events are ignored until the orbit has risen this far from Σ ...
    pub departure_band: f64,
    /// ... or this much time has elapsed.
    pub departure_time: f64,
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.05,
            event_tol: 1e-12,
            departure_band: 1e-8,
            departure_time: 1e-6,
            max_time: 100.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let named = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("event_tol", self.event_tol),
            ("departure_band", self.departure_band),
            ("departure_time", self.departure_time),
            ("max_time", self.max_time),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FlowError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Tightens the absolute tolerances for an arc of height about `height`,
    /// keeping them relative to the geometry of tiny arcs.
    pub fn scaled_for_arc(&self, height: f64) -> Self {
        let h = height.abs().max(f64::MIN_POSITIVE);
        Self {
            abs_tol: self.abs_tol.min(self.rel_tol * h).max(1e-300),
            event_tol: self.event_tol.min(self.rel_tol * h).max(1e-300),
            departure_band: self.departure_band.min(1e-3 * h),
            ..*self
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("no return to Σ within time {max_time}")]
    NoReturn { max_time: f64 },
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },
    #[error("arc left the window at x = {x}")]
    NotInWindow { x: f64 },
    #[error("horizontal component vanishes at the window base {0}")]
    SingularBase(f64),
    #[error("Lyapunov estimate inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// An orbit piece from a start point to its next hit of Σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub x_return: f64,
    /// Elapsed time, always positive (backward arcs count reversed time).
    pub t_return: f64,
    /// Sampled states, start and end included; empty unless recording.
    pub states: Vec<State>,
}

#[derive(Debug, Clone, Copy, Default)]
struct ArcOptions {
    /// Half-plane the arc lives in, `+1` or `-1`; inferred when `None`.
    side: Option<f64>,
    x_window: Option<(f64, f64)>,
    record: bool,
}

/// Integrates `f` from `start` until the orbit comes back to Σ.
pub fn integrate_to_sigma(
    f: &SmoothField,
    start: State,
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<Arc, FlowError> {
    integrate_arc(
        f,
        start,
        direction,
        cfg,
        ArcOptions {
            record: true,
            ..ArcOptions::default()
        },
    )
}

fn integrate_arc(
    field: &SmoothField,
    start: State,
    direction: Direction,
    cfg: &IntegratorConfig,
    opts: ArcOptions,
) -> Result<Arc, FlowError> {
    cfg.validate()?;
    let dir = direction.sign();
    let f = |s: &State| {
        let v = field.eval(s[0], s[1]);
        [dir * v[0], dir * v[1]]
    };
    let mut y = start;
    let mut k1 = f(&y);
    let side = opts.side.unwrap_or_else(|| {
        if y[1] != 0.0 {
            y[1].signum()
        } else if k1[1] != 0.0 {
            k1[1].signum()
        } else {
            1.0
        }
    });
    let in_window = |x: f64| opts.x_window.is_none_or(|(lo, hi)| x >= lo && x <= hi);

    let mut states = Vec::new();
    if opts.record {
        states.push(y);
    }
    let mut departed = side * y[1] > cfg.departure_band;
    let mut t = 0.0;
    let mut h = initial_step(&f, &y, &k1, cfg.rel_tol, cfg.abs_tol, cfg.max_step);

    for _ in 0..MAX_STEPS {
        if t >= cfg.max_time {
            break;
        }
        h = h.min(cfg.max_step).min(cfg.max_time - t + f64::EPSILON * t);
        let step = TrialStep::new(&f, y, k1, h);
        let err = if step.is_finite() {
            step.error_norm(cfg.rel_tol, cfg.abs_tol)
        } else {
            f64::INFINITY
        };
        if err > 1.0 {
            h *= if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.1 };
            if h <= 16.0 * f64::EPSILON * t || h < 1e-300 {
                return Err(FlowError::StepFailure { t, h });
            }
            continue;
        }

        let dense = step.dense();
        let mut prev_theta = 0.0;
        let mut prev_val = side * y[1];
        for j in 1..=EVENT_SAMPLES {
            let theta = j as f64 / EVENT_SAMPLES as f64;
            let s = if j == EVENT_SAMPLES { step.y1 } else { dense.at(theta) };
            let val = side * s[1];
            if !departed {
                if val > cfg.departure_band || (t + theta * h > cfg.departure_time && val > 0.0) {
                    departed = true;
                } else if val < 0.0 && t + theta * h > cfg.departure_time {
                    // the orbit never entered its half-plane
                    return Err(FlowError::NoReturn { max_time: t + theta * h });
                }
            } else if val <= 0.0 {
                let (x_ret, theta_ret) =
                    locate_event(&f, &step, &dense, side, (prev_theta, prev_val), (theta, val));
                if !in_window(x_ret) {
                    return Err(FlowError::NotInWindow { x: x_ret });
                }
                if opts.record {
                    states.push([x_ret, 0.0]);
                }
                return Ok(Arc {
                    x_return: x_ret,
                    t_return: t + theta_ret * h,
                    states,
                });
            }
            if !in_window(s[0]) {
                return Err(FlowError::NotInWindow { x: s[0] });
            }
            if opts.record {
                states.push(s);
            }
            prev_theta = theta;
            prev_val = val;
        }

        t += h;
        y = step.y1;
        k1 = step.k[6];
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(FlowError::NoReturn { max_time: cfg.max_time })
}

/// Pins down the crossing inside an accepted step. The event function is the
/// height reached by a fresh step of length `θh` from the step's start, which
/// agrees with the accepted solution at `θ = 1` and is smooth in `θ`.
fn locate_event<F: Fn(&State) -> State>(
    f: &F,
    step: &TrialStep,
    dense: &crate::ode::Dense,
    side: f64,
    lo: (f64, f64),
    hi: (f64, f64),
) -> (f64, f64) {
    let k1 = step.k[0];
    let g = |theta: f64| side * TrialStep::new(f, step.y0, k1, theta * step.h).y1[1];
    let (a, mut b) = (lo.0, hi.0);
    let (ga, mut gb) = (if a == 0.0 { side * step.y0[1] } else { g(a) }, g(b));
    if !(ga > 0.0 && gb <= 0.0) {
        // fall back to the widest bracket the step offers
        let g1 = side * step.y1[1];
        if ga > 0.0 && g1 <= 0.0 {
            b = 1.0;
            gb = g1;
        } else {
            return refine_on_dense(dense, side, lo, hi);
        }
    }
    if ga <= 0.0 {
        return refine_on_dense(dense, side, lo, hi);
    }
    let theta = if gb == 0.0 {
        b
    } else {
        brent(|th| Ok::<_, std::convert::Infallible>(g(th)), a, b, ga, gb, 0.0, 0.0).unwrap_or(b)
    };
    let s = TrialStep::new(f, step.y0, k1, theta * step.h).y1;
    (project_to_sigma(f, s), theta)
}

fn refine_on_dense(
    dense: &crate::ode::Dense,
    side: f64,
    lo: (f64, f64),
    hi: (f64, f64),
) -> (f64, f64) {
    let g = |th: f64| Ok::<_, std::convert::Infallible>(side * dense.at(th)[1]);
    let theta = brent(g, lo.0, hi.0, lo.1, hi.1, 0.0, 0.0).unwrap_or(hi.0);
    (dense.at(theta)[0], theta)
}

/// One flow-aligned correction from a point within rounding of Σ.
fn project_to_sigma<F: Fn(&State) -> State>(f: &F, s: State) -> f64 {
    let v = f(&s);
    if v[1] == 0.0 {
        return s[0];
    }
    s[0] - s[1] * v[0] / v[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub x: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub delta_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Fitted leading order; zero when a center is declared.
    pub order: u32,
    pub coefficient: f64,
    pub fit_r2: f64,
    pub window: (f64, f64),
    /// Every sampled displacement was below `10·event_tol`.
    pub center: bool,
}

/// Half-return maps of a piecewise field around a base point of Σ.
#[derive(Debug, Clone)]
pub struct ReturnMap {
    field: PiecewiseField,
    base: f64,
    window: Option<(f64, f64)>,
    cfg: IntegratorConfig,
    delta: f64,
}

impl ReturnMap {
    pub fn new(field: PiecewiseField, base: f64, cfg: IntegratorConfig) -> Result<Self, FlowError> {
        cfg.validate()?;
        let xp = field.upper.x.eval(base, 0.0);
        if xp == 0.0 {
            return Err(FlowError::SingularBase(base));
        }
        Ok(Self {
            field,
            base,
            window: None,
            cfg,
            delta: xp.signum(),
        })
    }

    /// Arcs leaving `lo ≤ x ≤ hi` fail with `NotInWindow`.
    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn field(&self) -> &PiecewiseField {
        &self.field
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn arc_impl(&self, side: Side, x: f64, record: bool) -> Result<Arc, FlowError> {
        let f = self.field.side(side);
        let [xv, yv] = f.eval(x, 0.0);
        if yv == 0.0 {
            return Ok(Arc {
                x_return: x,
                t_return: 0.0,
                states: if record { vec![[x, 0.0]] } else { Vec::new() },
            });
        }
        let direction = if yv * side.sign() > 0.0 {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let height = if xv == 0.0 {
            f64::MIN_POSITIVE
        } else {
            (yv * (x - self.base) / xv).abs() / 4.0
        };
        let cfg = self.cfg.scaled_for_arc(height);
        integrate_arc(
            f,
            [x, 0.0],
            direction,
            &cfg,
            ArcOptions {
                side: Some(side.sign()),
                x_window: self.window,
                record,
            },
        )
    }

    /// `φ_side(x)`.
    pub fn half_return(&self, side: Side, x: f64) -> Result<f64, FlowError> {
        self.arc_impl(side, x, false).map(|a| a.x_return)
    }

    /// The arc behind `φ_side(x)` with sampled states.
    pub fn arc(&self, side: Side, x: f64) -> Result<Arc, FlowError> {
        self.arc_impl(side, x, true)
    }

    pub fn displacement(&self, x: f64) -> Result<ReturnSample, FlowError> {
        let phi_plus = self.half_return(Side::Upper, x)?;
        let phi_minus = self.half_return(Side::Lower, x)?;
        Ok(ReturnSample {
            x,
            phi_plus,
            phi_minus,
            delta_value: self.delta * (phi_plus - phi_minus),
        })
    }

    /// Displacements at many abscissas, evaluated in parallel, order kept.
    pub fn sample(&self, xs: &[f64]) -> Vec<Result<ReturnSample, FlowError>> {
        xs.par_iter().map(|&x| self.displacement(x)).collect()
    }

    /// Fits `Δ(base + s) ≈ V·s^n` for `s` on a geometric grid in `(s_min, s_max)`.
    pub fn estimate_lyapunov(&self, s_min: f64, s_max: f64) -> Result<LyapunovEstimate, FlowError> {
        if !(s_min > 0.0 && s_max > s_min) {
            return Err(FlowError::Inconclusive(format!(
                "window ({s_min}, {s_max}) must satisfy 0 < min < max"
            )));
        }
        let grid = geometric_grid(s_min, s_max, 20);
        let xs: Vec<f64> = grid.iter().map(|s| self.base + s).collect();
        let samples = self
            .sample(&xs)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let deltas: Vec<f64> = samples.iter().map(|s| s.delta_value).collect();
        let noise = 10.0 * self.cfg.event_tol;
        if deltas.iter().all(|d| d.abs() < noise) {
            return Ok(LyapunovEstimate {
                order: 0,
                coefficient: 0.0,
                fit_r2: 1.0,
                window: (s_min, s_max),
                center: true,
            });
        }
        let sign = deltas[0].signum();
        if deltas.iter().any(|d| *d == 0.0 || d.signum() != sign) {
            return Err(FlowError::Inconclusive(
                "displacement changes sign inside the window".into(),
            ));
        }
        let lx: Vec<f64> = grid.iter().map(|s| s.ln()).collect();
        let ly: Vec<f64> = deltas.iter().map(|d| d.abs().ln()).collect();
        let (slope, _, r2) = linear_fit(&lx, &ly);
        let order = slope.round();
        if (slope - order).abs() > 0.15 || r2 < 0.999 || order < 1.0 {
            return Err(FlowError::Inconclusive(format!(
                "slope {slope:.4}, r² {r2:.6}"
            )));
        }
        let log_prefactor =
            lx.iter().zip(&ly).map(|(x, y)| y - order * x).sum::<f64>() / lx.len() as f64;
        Ok(LyapunovEstimate {
            order: order as u32,
            coefficient: sign * log_prefactor.exp(),
            fit_r2: r2,
            window: (s_min, s_max),
            center: false,
        })
    }
}

pub fn half_return(
    z: &PiecewiseField,
    side: Side,
    x: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, FlowError> {
    ReturnMap::new(z.clone(), 0.0, *cfg)?.half_return(side, x)
}

pub fn displacement(
    z: &PiecewiseField,
    x: f64,
    cfg: &IntegratorConfig,
) -> Result<ReturnSample, FlowError> {
    ReturnMap::new(z.clone(), 0.0, *cfg)?.displacement(x)
}

pub fn estimate_lyapunov(
    z: &PiecewiseField,
    window: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<LyapunovEstimate, FlowError> {
    ReturnMap::new(z.clone(), 0.0, *cfg)?.estimate_lyapunov(window.0, window.1)
}

/// `n` points from `lo` to `hi` (both included) with constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo * (r * i as f64).exp() })
        .collect()
}

/// Least squares `y ≈ slope·x + intercept`; returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Writes samples as CSV with header `x,delta`.
pub fn write_delta_csv<W: Write>(samples: &[ReturnSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,delta")?;
    for s in samples {
        writeln!(w, "{},{}", g17(s.x), g17(s.delta_value))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly2;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn fold_up() -> SmoothField {
        SmoothField::new(Poly2::constant(1.0), Poly2::monomial(1, 0, -1.0))
    }

    #[test]
    fn linear_fold_level_sets() {
        let a = integrate_to_sigma(&fold_up(), [0.1, 0.0], Direction::Backward, &cfg()).unwrap();
        assert!((a.x_return + 0.1).abs() < 1e-9, "{}", a.x_return);
        let b = integrate_to_sigma(&fold_up(), [-0.2, 0.0], Direction::Forward, &cfg()).unwrap();
        assert!((b.x_return - 0.2).abs() < 1e-9);
        assert!(a.states.len() > 2);
    }

    #[test]
    fn mirrored_start_returns_symmetrically() {
        let f = fold_up();
        let a = integrate_to_sigma(&f, [-0.2, 0.0], Direction::Forward, &cfg()).unwrap();
        assert!((a.x_return - 0.2).abs() < 1e-9);
        assert!(a.t_return > 0.39 && a.t_return < 0.41);
    }

    #[test]
    fn monotone_height_never_returns() {
        let f = SmoothField::new(Poly2::constant(1.0), Poly2::constant(1.0));
        let c = IntegratorConfig {
            max_time: 5.0,
            ..cfg()
        };
        assert!(matches!(
            integrate_to_sigma(&f, [0.0, 0.0], Direction::Forward, &c),
            Err(FlowError::NoReturn { .. })
        ));
    }

    #[test]
    fn reversible_half_returns() {
        let z = PiecewiseField::sys_a(1, 0.0);
        for x in [0.05, 0.1, 0.2] {
            let p = half_return(&z, Side::Upper, x, &cfg()).unwrap();
            assert!((p + x).abs() < 1e-9);
        }
        let z2 = PiecewiseField::sys_a(2, 1.0);
        for x in [0.05, 0.1, 0.2] {
            let p = half_return(&z2, Side::Lower, x, &cfg()).unwrap();
            assert!((p + x).abs() < 1e-9, "{x}: {p}");
        }
    }

    #[test]
    fn cubic_level_set_oracle() {
        // x̄²/2 − x̄³/3 = x²/2 − x³/3
        let z = PiecewiseField::sys_a(1, 1.0);
        let x = 0.1;
        let h = |v: f64| v * v / 2.0 - v * v * v / 3.0;
        let target = h(x);
        let exact = crate::roots::brent_bracket(
            |v| Ok::<_, std::convert::Infallible>(h(v) - target),
            -0.2,
            -0.05,
            0.0,
            0.0,
        )
        .unwrap();
        let p = half_return(&z, Side::Upper, x, &cfg()).unwrap();
        assert!((p - exact).abs() < 1e-10, "{p} vs {exact}");
        assert!((p + 0.0937).abs() < 1e-3);
        let d = displacement(&z, x, &cfg()).unwrap();
        assert!((d.delta_value - 6.3e-3).abs() < 5e-4);
    }

    #[test]
    fn involution() {
        for z in [PiecewiseField::sys_a(1, 1.0), PiecewiseField::sys_a(2, 1.0)] {
            for i in 1..=10 {
                let x = 0.02 * i as f64;
                for side in [Side::Upper, Side::Lower] {
                    let p = half_return(&z, side, x, &cfg()).unwrap();
                    let back = half_return(&z, side, p, &cfg()).unwrap();
                    assert!((back - x).abs() < 1e-7, "{side:?} {x}: {back}");
                }
            }
        }
    }

    #[test]
    fn quadratic_ratio_matches_v2() {
        let d = displacement(&PiecewiseField::sys_a(2, 1.0), 0.02, &cfg()).unwrap();
        let ratio = d.delta_value / 0.02_f64.powi(2);
        assert!((ratio - 0.4).abs() < 0.02 * 0.4, "{ratio}");
        let d1 = displacement(&PiecewiseField::sys_a(1, 1.0), 0.02, &cfg()).unwrap();
        let r1 = d1.delta_value / 0.02_f64.powi(2);
        assert!((r1 - 2.0 / 3.0).abs() < 0.02 * 2.0 / 3.0, "{r1}");
    }

    #[test]
    fn centers_have_zero_displacement() {
        for k in [1, 2] {
            let z = PiecewiseField::sys_a(k, 0.0);
            for i in 1..=6 {
                let d = displacement(&z, 0.05 * i as f64, &cfg()).unwrap();
                assert!(d.delta_value.abs() <= 1e-8);
            }
            let est = estimate_lyapunov(&z, (1e-3, 0.2), &cfg()).unwrap();
            assert!(est.center);
        }
    }

    #[test]
    fn lyapunov_estimates() {
        let e1 = estimate_lyapunov(&PiecewiseField::sys_a(1, 1.0), (1e-3, 2e-2), &cfg()).unwrap();
        assert_eq!(e1.order, 2);
        assert!((e1.coefficient / (2.0 / 3.0) - 1.0).abs() < 0.02, "{e1:?}");
        let e2 = estimate_lyapunov(&PiecewiseField::sys_a(2, 1.0), (1e-3, 2e-2), &cfg()).unwrap();
        assert_eq!(e2.order, 2);
        assert!((e2.coefficient / 0.4 - 1.0).abs() < 0.02, "{e2:?}");
        assert!(e2.fit_r2 >= 0.999);
    }

    #[test]
    fn tolerance_convergence() {
        let z = PiecewiseField::sys_a(1, 1.0);
        let a = half_return(&z, Side::Upper, 0.1, &cfg()).unwrap();
        let tighter = IntegratorConfig {
            rel_tol: 0.5e-10,
            ..cfg()
        };
        let b = half_return(&z, Side::Upper, 0.1, &tighter).unwrap();
        assert!((a - b).abs() < 5e-9);
    }

    #[test]
    fn window_violation_is_reported() {
        let z = PiecewiseField::sys_a(1, 1.0);
        let rm = ReturnMap::new(z, 0.0, cfg()).unwrap().with_window(-0.05, 0.2);
        assert!(matches!(
            rm.half_return(Side::Upper, 0.1),
            Err(FlowError::NotInWindow { .. })
        ));
    }

    #[test]
    fn tiny_arcs_keep_relative_accuracy() {
        let z = PiecewiseField::sys_a(1, 0.0);
        for x in [1e-4, 1e-6] {
            let p = half_return(&z, Side::Upper, x, &cfg()).unwrap();
            assert!((p + x).abs() < 1e-9 * x, "{x}: {p}");
        }
    }

    #[test]
    fn csv_layout() {
        let s = ReturnSample {
            x: 0.1,
            phi_plus: -0.09,
            phi_minus: -0.1,
            delta_value: 0.01,
        };
        let mut out = Vec::new();
        write_delta_csv(&[s], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "x,delta\n0.10000000000000001,0.01\n"
        );
    }
}
