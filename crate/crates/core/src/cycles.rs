//! Crossing limit cycles near split two-folds: local root search of the
//! displacement map, pseudo-Hopf predictions and the end-to-end census.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{classify_mts, local_v2, sigma_kind_at, sigma_regions, FieldError, PiecewiseField, SegmentKind, SigmaSegment, Side};
use crate::flow::{geometric_grid, FlowError, IntegratorConfig, ReturnMap};
use crate::format::g17;
use crate::roots::{brent, RootError};
use crate::unfold::{apply_shift, build_perturbation, build_unfolded, ShiftConvention, UnfoldError, UnfoldingParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("no amplitude for μ·b = {0:e} ≤ 0")]
    WrongSign(f64),
    #[error("window {index}: predicted amplitude {amplitude:e} is not below half the radius {radius:e}")]
    ScaleSeparationViolated { index: usize, amplitude: f64, radius: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleConfig {
    pub integrator: IntegratorConfig,
    /// Upper bound on the search radius around a two-fold.
    pub u_radius: f64,
    pub scan_points: usize,
    /// Grid size of the cycle-free check at visible folds.
    pub visible_scan_points: usize,
    pub hyperbolicity_threshold: f64,
    pub root_residual: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            u_radius: 0.2,
            scan_points: 50,
            visible_scan_points: 8,
            hyperbolicity_threshold: 1e-8,
            root_residual: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }

    /// Stability predicted by the sign of the leading Lyapunov coefficient.
    pub fn from_lyapunov(v: f64) -> Self {
        if v < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    /// Right endpoint on Σ, a root of the displacement map.
    pub x_star: f64,
    pub b: f64,
    pub window_center: f64,
    pub amplitude: f64,
    pub stability: Stability,
    pub derivative: f64,
    pub residual: f64,
    /// `(φ⁺(x*), x*)`, the cycle's trace on Σ.
    pub chord: (f64, f64),
    /// The unique sliding segment strictly inside the chord, if any.
    pub enclosed_segment: Option<SigmaSegment>,
}

impl LimitCycle {
    /// Violated invariants, empty when the cycle is sound.
    pub fn check(&self, cfg: &CycleConfig) -> Vec<String> {
        let mut bad = Vec::new();
        if !(self.residual < cfg.root_residual) {
            bad.push(format!("residual {:e} at x* = {}", self.residual, self.x_star));
        }
        if !(self.derivative.abs() > cfg.hyperbolicity_threshold) {
            bad.push(format!("Δ′ = {:e} below the hyperbolicity threshold", self.derivative));
        }
        if !(self.amplitude > self.b.abs()) {
            bad.push(format!("amplitude {} does not exceed |b|", self.amplitude));
        }
        match &self.enclosed_segment {
            Some(s) if s.kind.is_sliding() && s.lo > self.chord.0 && s.hi < self.chord.1 => {}
            Some(s) => bad.push(format!("segment ({}, {}) is not a sliding segment inside the chord", s.lo, s.hi)),
            None => bad.push(format!("cycle at x* = {} encloses no single sliding segment", self.x_star)),
        }
        bad
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCycles {
    pub window_center: f64,
    pub radius: f64,
    pub b: f64,
    pub samples: usize,
    pub failed_samples: usize,
    /// `Δ` vanished on the whole grid.
    pub center: bool,
    pub cycles: Vec<LimitCycle>,
    /// Roots rejected because `|Δ′|` was below the threshold.
    pub non_hyperbolic: Vec<f64>,
}

/// Sliding segment strictly inside `(lo, hi)`, provided there is exactly one.
fn single_sliding(z: &PiecewiseField, lo: f64, hi: f64) -> Option<SigmaSegment> {
    let sliding: Vec<SigmaSegment> = sigma_regions(z, (lo, hi))
        .into_iter()
        .filter(|s| s.kind.is_sliding())
        .collect();
    match sliding.as_slice() {
        [s] if s.lo_is_contact && s.hi_is_contact => Some(*s),
        _ => None,
    }
}

/// Roots of `Δ(·; b)` with `x − window_center ∈ (|b|(1+10⁻³), radius)`.
pub fn find_cycles_local(
    z_b: &PiecewiseField,
    window_center: f64,
    radius: f64,
    b: f64,
    cfg: &CycleConfig,
) -> Result<LocalCycles, CycleError> {
    if !(radius > 0.0) || cfg.scan_points < 2 {
        return Err(CycleError::Precondition("radius and scan size must be positive".into()));
    }
    let lo = if b == 0.0 { radius * 1e-6 } else { b.abs() * (1.0 + 1e-3) };
    let mut out = LocalCycles {
        window_center,
        radius,
        b,
        samples: 0,
        failed_samples: 0,
        center: false,
        cycles: Vec::new(),
        non_hyperbolic: Vec::new(),
    };
    if lo >= radius {
        return Ok(out);
    }
    let map = ReturnMap::new(z_b.clone(), window_center, cfg.integrator)?
        .with_window(window_center - 1.5 * radius, window_center + 1.5 * radius);
    let xs: Vec<f64> = geometric_grid(lo, radius, cfg.scan_points)
        .into_iter()
        .map(|s| window_center + s)
        .collect();
    let values: Vec<Option<f64>> = map
        .sample(&xs)
        .into_iter()
        .map(|r| r.ok().map(|s| s.delta_value))
        .collect();
    out.samples = xs.len();
    out.failed_samples = values.iter().filter(|v| v.is_none()).count();
    if b == 0.0 && out.failed_samples == 0 && values.iter().flatten().all(|v| v.abs() < 1e-11) {
        out.center = true;
        return Ok(out);
    }

    let delta = |x: f64| map.displacement(x).map(|s| s.delta_value);
    let h = 1e-6 * radius;
    for i in 0..xs.len() - 1 {
        let (Some(fa), Some(fb)) = (values[i], values[i + 1]) else {
            continue;
        };
        if fa * fb >= 0.0 && fb != 0.0 {
            continue;
        }
        let x_star = brent(delta, xs[i], xs[i + 1], fa, fb, 1e-15 * radius, 0.0)?;
        let residual = delta(x_star)?.abs();
        let derivative = (delta(x_star + h)? - delta(x_star - h)?) / (2.0 * h);
        if derivative.abs() < cfg.hyperbolicity_threshold {
            out.non_hyperbolic.push(x_star);
            continue;
        }
        let left = map.half_return(Side::Upper, x_star)?;
        out.cycles.push(LimitCycle {
            x_star,
            b,
            window_center,
            amplitude: x_star - window_center,
            stability: if derivative < 0.0 { Stability::Stable } else { Stability::Unstable },
            derivative,
            residual,
            chord: (left, x_star),
            enclosed_segment: single_sliding(z_b, left, x_star),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoHopfPrediction {
    pub ell: u32,
    pub v2ell: f64,
    pub delta: f64,
    /// Sign of `b` that produces a cycle.
    pub mu: f64,
    pub y0: f64,
}

/// Sign of `b` for which a cycle bifurcates. Under [`ShiftConvention::Minus`]
/// this is `−sign(δ·V)`; the other convention flips it.
pub fn cycle_producing_sign(v: f64, delta: f64, convention: ShiftConvention) -> f64 {
    let s = -(delta * v).signum();
    match convention {
        ShiftConvention::Minus => s,
        ShiftConvention::Plus => -s,
    }
}

impl PseudoHopfPrediction {
    pub fn new(ell: u32, v2ell: f64, delta: f64, convention: ShiftConvention) -> Result<Self, CycleError> {
        if ell == 0 || v2ell == 0.0 || !v2ell.is_finite() {
            return Err(CycleError::Precondition(format!(
                "need ℓ ≥ 1 and a nonzero coefficient, got ℓ = {ell}, V = {v2ell}"
            )));
        }
        Ok(Self {
            ell,
            v2ell,
            delta,
            mu: cycle_producing_sign(v2ell, delta, convention),
            y0: (2.0 * delta / v2ell).abs().powf(1.0 / (2 * ell) as f64),
        })
    }
}

/// `(μb)^{1/2ℓ}·y₀`.
pub fn amplitude_prediction(p: &PseudoHopfPrediction, b: f64) -> Result<f64, CycleError> {
    let mb = p.mu * b;
    if !(mb > 0.0) {
        return Err(CycleError::WrongSign(mb));
    }
    Ok(mb.powf(1.0 / (2 * p.ell) as f64) * p.y0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleCheck {
    pub index: usize,
    pub center: f64,
    pub returned_samples: usize,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub k: u32,
    pub b: f64,
    pub convention: ShiftConvention,
    pub epsilon: f64,
    pub radius: f64,
    pub v2: f64,
    pub expected_count: usize,
    pub expected_stability: Stability,
    pub windows: Vec<LocalCycles>,
    pub visible_checks: Vec<VisibleCheck>,
    pub cycles: Vec<LimitCycle>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Unfolds `z`, shifts by `params.b`, and counts the cycles born at the
/// invisible two-folds.
pub fn cycle_census(
    z: &PiecewiseField,
    params: &UnfoldingParams,
    cfg: &CycleConfig,
) -> Result<CensusReport, CycleError> {
    params.validate()?;
    if !params.is_ordered() {
        return Err(UnfoldError::Precondition("Λ must be ordered".into()).into());
    }
    let d = classify_mts(z)?;
    if d.V2.abs() < 1e-12 {
        return Err(CycleError::Precondition("V₂ vanishes".into()));
    }
    let unfolded = build_unfolded(z, &build_perturbation(z, params)?)?;
    let z_b = apply_shift(&unfolded, params.b, params.shift);
    let radius = (params.epsilon * params.min_gap() / 3.0).min(cfg.u_radius);
    let centers = params.contact_abscissas();
    let invisible = params.invisible_indices();

    for &i in &invisible {
        let v = local_v2(&unfolded, centers[i])?;
        let amplitude = (2.0 * params.b.abs() / v.abs()).sqrt();
        if !(amplitude < radius / 2.0) {
            return Err(CycleError::ScaleSeparationViolated {
                index: i,
                amplitude,
                radius,
            });
        }
    }

    let windows = invisible
        .par_iter()
        .map(|&i| find_cycles_local(&z_b, centers[i], radius, params.b, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let visible: Vec<usize> = (0..centers.len()).filter(|i| !invisible.contains(i)).collect();
    let visible_checks = visible
        .par_iter()
        .map(|&i| visible_scan(&z_b, i, centers[i], radius, params.b, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let cycles: Vec<LimitCycle> = windows.iter().flat_map(|w| w.cycles.iter().cloned()).collect();
    let expected_count = params.k as usize;
    let expected_stability = Stability::from_lyapunov(d.V2);
    let mut failures = Vec::new();
    if cycles.len() != expected_count {
        failures.push(format!("found {} cycles, expected {expected_count}", cycles.len()));
    }
    for w in &windows {
        for x in &w.non_hyperbolic {
            failures.push(format!("non-hyperbolic root at x = {x}"));
        }
    }
    for c in &cycles {
        failures.extend(c.check(cfg));
        if c.stability != expected_stability {
            failures.push(format!("cycle at x* = {} is {}", c.x_star, c.stability.as_str()));
        }
    }
    let mut chords: Vec<(f64, f64)> = cycles.iter().map(|c| c.chord).collect();
    chords.sort_by(|a, b| a.0.total_cmp(&b.0));
    if chords.windows(2).any(|w| w[0].1 >= w[1].0) {
        failures.push("cycles overlap on Σ".into());
    }
    for v in &visible_checks {
        if v.sign_changes > 0 {
            failures.push(format!("displacement changes sign near visible fold {}", v.index));
        }
    }
    Ok(CensusReport {
        k: params.k,
        b: params.b,
        convention: params.shift,
        epsilon: params.epsilon,
        radius,
        v2: d.V2,
        expected_count,
        expected_stability,
        windows,
        visible_checks,
        cycles,
        pass: failures.is_empty(),
        failures,
    })
}

fn visible_scan(
    z_b: &PiecewiseField,
    index: usize,
    center: f64,
    radius: f64,
    b: f64,
    cfg: &CycleConfig,
) -> Result<VisibleCheck, CycleError> {
    let lo = (b.abs() * (1.0 + 1e-3)).max(radius * 1e-3);
    let map = ReturnMap::new(z_b.clone(), center, cfg.integrator)?
        .with_window(center - 1.5 * radius, center + 1.5 * radius);
    let xs: Vec<f64> = geometric_grid(lo, radius, cfg.visible_scan_points.max(2))
        .into_iter()
        .map(|s| center + s)
        .collect();
    let values: Vec<Option<f64>> = map.sample(&xs).into_iter().map(|r| r.ok().map(|s| s.delta_value)).collect();
    let sign_changes = values
        .windows(2)
        .filter(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a * b < 0.0))
        .count();
    Ok(VisibleCheck {
        index,
        center,
        returned_samples: values.iter().flatten().count(),
        sign_changes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub b: f64,
    pub n_cycles: usize,
    pub stability: Option<Stability>,
    pub sliding_kind: Option<SegmentKind>,
    pub amplitude: Option<f64>,
    pub predicted_amplitude: Option<f64>,
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub convention: ShiftConvention,
    pub v2: f64,
    pub rows: Vec<ScanRow>,
}

/// Shifts `z` by each `b` and searches the window of radius
/// `cfg.u_radius` around the origin.
pub fn pseudo_hopf_scan(
    z: &PiecewiseField,
    b_values: &[f64],
    convention: ShiftConvention,
    cfg: &CycleConfig,
) -> Result<ScanTable, CycleError> {
    let d = classify_mts(z)?;
    let prediction = PseudoHopfPrediction::new(1, d.V2, d.delta(), convention).ok();
    let rows = b_values
        .par_iter()
        .map(|&b| {
            let z_b = apply_shift(z, b, convention);
            let local = find_cycles_local(&z_b, 0.0, cfg.u_radius, b, cfg)?;
            let fold = -convention.offset(b);
            let sliding_kind = Some(sigma_kind_at(&z_b, 0.5 * fold)).filter(|k| b != 0.0 && k.is_sliding());
            Ok(ScanRow {
                b,
                n_cycles: local.cycles.len(),
                stability: local.cycles.first().map(|c| c.stability),
                sliding_kind,
                amplitude: local.cycles.first().map(|c| c.amplitude),
                predicted_amplitude: prediction.as_ref().and_then(|p| amplitude_prediction(p, b).ok()),
                center: local.center,
            })
        })
        .collect::<Result<Vec<_>, CycleError>>()?;
    Ok(ScanTable {
        convention,
        v2: d.V2,
        rows,
    })
}

/// CSV with header `b,n_cycles,stability,sliding_kind,amplitude,predicted_amplitude`;
/// missing values are left empty.
pub fn write_scan_csv<W: Write>(table: &ScanTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "b,n_cycles,stability,sliding_kind,amplitude,predicted_amplitude")?;
    let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            g17(r.b),
            r.n_cycles,
            r.stability.map(|s| s.as_str()).unwrap_or(""),
            r.sliding_kind.map(|s| s.as_str()).unwrap_or(""),
            opt(r.amplitude),
            opt(r.predicted_amplitude),
        )?;
    }
    Ok(())
}
