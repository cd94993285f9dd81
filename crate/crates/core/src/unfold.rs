//! Perturbation polynomials that split a `(2k,2k)` singularity into `2k−1`
//! two-folds, the shifted unfolded field, and verifiers for the contact
//! ladder, the local `V₂` limit and the coefficient identities.

use nalgebra::{DMatrix, DVector};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{
    classify_mts, contact_multiplicity, local_v2, visibility, FieldError, MonodromyData,
    PiecewiseField, Side, SmoothField, Visibility, DIVISION_TOL,
};
use crate::flow::linear_fit;
use crate::poly::exact::{q, QPoly1, Q};
use crate::poly::{Poly1, Poly2, PolyError};

/// Smallest admissible `|aᵢ|` and `|aᵢ − aⱼ|`.
pub const LAMBDA_MIN_GAP: f64 = 1e-6;
/// Largest tolerated disagreement between the two interpolation methods.
pub const METHOD_AGREEMENT_TOL: f64 = 1e-7;
/// Relative bound on `|Y(x0,0)|` at a predicted contact.
pub const LADDER_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnfoldError {
    #[error("invalid Λ: {0}")]
    InvalidLambda(String),
    #[error("interpolation methods disagree by {disagreement:e}")]
    IllConditioned { disagreement: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("verification failed: {}", .0.join("; "))]
    VerificationMismatch(Vec<String>),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// How the upper field is translated by `b`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftConvention {
    /// `Z⁺(x − b, y)`
    #[default]
    Minus,
    /// `Z⁺(x + b, y)`
    Plus,
}

impl ShiftConvention {
    /// Argument of `shift_x` applied to the upper field.
    pub fn offset(self, b: f64) -> f64 {
        match self {
            ShiftConvention::Minus => -b,
            ShiftConvention::Plus => b,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShiftConvention::Minus => "minus",
            ShiftConvention::Plus => "plus",
        }
    }
}

impl std::str::FromStr for ShiftConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minus" => Ok(Self::Minus),
            "plus" => Ok(Self::Plus),
            other => Err(format!("unknown shift convention '{other}' (expected minus or plus)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingParams {
    pub k: u32,
    pub lambda: Vec<f64>,
    pub epsilon: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub shift: ShiftConvention,
}

impl UnfoldingParams {
    pub fn new(k: u32, lambda: Vec<f64>, epsilon: f64) -> Self {
        Self {
            k,
            lambda,
            epsilon,
            b: 0.0,
            shift: ShiftConvention::Minus,
        }
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_shift(mut self, shift: ShiftConvention) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), UnfoldError> {
        if self.k == 0 {
            return Err(UnfoldError::InvalidLambda("k must be positive".into()));
        }
        let n = 2 * self.k as usize - 2;
        if self.lambda.len() != n {
            return Err(UnfoldError::InvalidLambda(format!(
                "expected {n} entries for k = {}, got {}",
                self.k,
                self.lambda.len()
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(UnfoldError::InvalidLambda(format!(
                "ε must be positive, got {}",
                self.epsilon
            )));
        }
        for (i, &a) in self.lambda.iter().enumerate() {
            if !a.is_finite() || a.abs() < LAMBDA_MIN_GAP {
                return Err(UnfoldError::InvalidLambda(format!("a{} = {a} is too close to 0", i + 1)));
            }
            for (j, &c) in self.lambda.iter().enumerate().skip(i + 1) {
                if (a - c).abs() < LAMBDA_MIN_GAP {
                    return Err(UnfoldError::InvalidLambda(format!(
                        "a{} and a{} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `a₁ < 0 < a₂ < … < a_{2k−2}` (vacuous for `k = 1`).
    pub fn is_ordered(&self) -> bool {
        match self.lambda.as_slice() {
            [] => true,
            [a1, rest @ ..] => {
                *a1 < 0.0
                    && rest.first().is_none_or(|a2| *a2 > 0.0)
                    && rest.windows(2).all(|w| w[0] < w[1])
            }
        }
    }

    /// `εaᵢ` for `i = 0, …, 2k−2`, with `a₀ = 0`.
    pub fn contact_abscissas(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.lambda.iter().map(|a| self.epsilon * a))
            .collect()
    }

    /// Indices of the invisible two-folds: `{1} ∪ {2, 4, …, 2k−2}`, or the
    /// origin alone when `k = 1`.
    pub fn invisible_indices(&self) -> Vec<usize> {
        if self.k == 1 {
            return vec![0];
        }
        let n = 2 * self.k as usize - 2;
        std::iter::once(1).chain((2..=n).step_by(2)).collect()
    }

    /// Smallest pairwise distance among `{0} ∪ Λ`.
    pub fn min_gap(&self) -> f64 {
        let nodes: Vec<f64> = std::iter::once(0.0).chain(self.lambda.iter().copied()).collect();
        let mut gap = f64::INFINITY;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                gap = gap.min((nodes[i] - nodes[j]).abs());
            }
        }
        gap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPolys {
    pub p_plus: Poly1,
    pub p_minus: Poly1,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// Coefficient-norm gap between the direct solve and the interpolant.
    pub method_gap: f64,
}

impl PerturbationPolys {
    pub fn zero() -> Self {
        Self {
            p_plus: Poly1::zero(),
            p_minus: Poly1::zero(),
            norm_plus: 0.0,
            norm_minus: 0.0,
            method_gap: 0.0,
        }
    }

    pub fn side(&self, side: Side) -> &Poly1 {
        match side {
            Side::Upper => &self.p_plus,
            Side::Lower => &self.p_minus,
        }
    }
}

fn classify_k(z: &PiecewiseField, k: u32) -> Result<MonodromyData, UnfoldError> {
    let d = classify_mts(z)?;
    if d.k_plus != k || d.k_minus != k {
        return Err(UnfoldError::Precondition(format!(
            "expected a ({0},{0}) singularity, found ({1},{2})",
            2 * k,
            2 * d.k_plus,
            2 * d.k_minus
        )));
    }
    Ok(d)
}

/// Numerator quotient `q` and `X(x,0)` with `f(x) = q(x)/X(x,0)`.
fn f_parts(f: &SmoothField, side: Side, d: &MonodromyData) -> Result<(Poly1, Poly1), UnfoldError> {
    let k = d.k(side) as usize;
    let xr = f.x.restrict_sigma();
    let yr = f.y.restrict_sigma();
    let numer = yr
        .scale(side.sign() * d.delta())
        .sub(&Poly1::monomial(2 * k - 1, d.a(side)).mul(&xr));
    let (quot, rem) = numer.div_x_pow(2 * k);
    if rem >= DIVISION_TOL {
        return Err(FieldError::DivisionResidual {
            what: "numerator of f",
            residual: rem,
        }
        .into());
    }
    Ok((quot, xr))
}

/// `ξᵢ± = ∓δε^{2k−1}(a± aᵢ^{2k−1} + ε aᵢ^{2k} f±(εaᵢ))`, upper list first.
pub fn xi_values(
    z: &PiecewiseField,
    d: &MonodromyData,
    lambda: &[f64],
    epsilon: f64,
) -> Result<(Vec<f64>, Vec<f64>), UnfoldError> {
    if d.k_plus != d.k_minus {
        return Err(UnfoldError::Precondition("k⁺ ≠ k⁻".into()));
    }
    let k = d.k_plus as i32;
    let mut out = [Vec::new(), Vec::new()];
    for (slot, side) in [Side::Upper, Side::Lower].into_iter().enumerate() {
        let (quot, xr) = f_parts(z.side(side), side, d)?;
        out[slot] = lambda
            .iter()
            .map(|&ai| {
                let x = epsilon * ai;
                let f = quot.eval(x) / xr.eval(x);
                -side.sign()
                    * d.delta()
                    * epsilon.powi(2 * k - 1)
                    * (d.a(side) * ai.powi(2 * k - 1) + epsilon * ai.powi(2 * k) * f)
            })
            .collect();
    }
    let [plus, minus] = out;
    Ok((plus, minus))
}

/// Newton divided-difference interpolant.
fn newton_interpolate(nodes: &[f64], values: &[f64]) -> Poly1 {
    let n = nodes.len();
    let mut table = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    let mut p = Poly1::zero();
    for i in (0..n).rev() {
        p = p
            .mul(&Poly1::new(vec![-nodes[i], 1.0]))
            .add(&Poly1::new(vec![table[i]]));
    }
    p
}

/// Coefficients `c₁..c_n` of the polynomial with zero constant term taking
/// values `xi` at `ε·lambda`, built in the rescaled variable `u = x/ε`.
fn interpolate_coeffs(lambda: &[f64], xi: &[f64], epsilon: f64) -> Vec<f64> {
    let nodes: Vec<f64> = std::iter::once(0.0).chain(lambda.iter().copied()).collect();
    let values: Vec<f64> = std::iter::once(0.0).chain(xi.iter().copied()).collect();
    let qpoly = newton_interpolate(&nodes, &values);
    (1..=lambda.len())
        .map(|j| qpoly.coeff(j) / epsilon.powi(j as i32))
        .collect()
}

/// Direct solve of `H(Λ,ε)c = ξ` with `H_{ij} = (εaᵢ)^j`.
fn vandermonde_solve(lambda: &[f64], xi: &[f64], epsilon: f64) -> Option<Vec<f64>> {
    let n = lambda.len();
    let h = DMatrix::from_fn(n, n, |i, j| (epsilon * lambda[i]).powi(j as i32 + 1));
    let rhs = DVector::from_column_slice(xi);
    h.lu().solve(&rhs).map(|c| c.iter().copied().collect())
}

fn poly_from_coeffs(c: &[f64]) -> Poly1 {
    Poly1::new(std::iter::once(0.0).chain(c.iter().copied()).collect())
}

/// `P±` with `P(0) = 0` and `P(εaᵢ) = ξᵢ±`, cross-checked against a direct
/// Vandermonde solve.
pub fn build_perturbation(
    z: &PiecewiseField,
    params: &UnfoldingParams,
) -> Result<PerturbationPolys, UnfoldError> {
    params.validate()?;
    let d = classify_k(z, params.k)?;
    if params.lambda.is_empty() {
        return Ok(PerturbationPolys::zero());
    }
    let (xp, xm) = xi_values(z, &d, &params.lambda, params.epsilon)?;
    let mut gap: f64 = 0.0;
    let mut polys = Vec::with_capacity(2);
    for xi in [&xp, &xm] {
        let newton = interpolate_coeffs(&params.lambda, xi, params.epsilon);
        let direct = vandermonde_solve(&params.lambda, xi, params.epsilon)
            .ok_or(UnfoldError::IllConditioned {
                disagreement: f64::INFINITY,
            })?;
        let diff = newton
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(diff <= METHOD_AGREEMENT_TOL) {
            return Err(UnfoldError::IllConditioned { disagreement: diff });
        }
        gap = gap.max(diff);
        polys.push(poly_from_coeffs(&newton));
    }
    let p_minus = polys.pop().expect("two sides");
    let p_plus = polys.pop().expect("two sides");
    Ok(PerturbationPolys {
        norm_plus: p_plus.norm(),
        norm_minus: p_minus.norm(),
        p_plus,
        p_minus,
        method_gap: gap,
    })
}

/// `Y± ↦ Y± + X±·P±(x)`.
pub fn build_unfolded(
    z: &PiecewiseField,
    polys: &PerturbationPolys,
) -> Result<PiecewiseField, UnfoldError> {
    let lift = |f: &SmoothField, p: &Poly1| -> Result<SmoothField, UnfoldError> {
        let extra = f.x.mul(&Poly2::from_x(p))?;
        Ok(SmoothField::new(f.x.clone(), f.y.add(&extra)))
    };
    Ok(PiecewiseField::new(
        lift(&z.upper, &polys.p_plus)?,
        lift(&z.lower, &polys.p_minus)?,
    ))
}

/// Translates the upper field by `b` per `convention`; the lower is kept.
pub fn apply_shift(z: &PiecewiseField, b: f64, convention: ShiftConvention) -> PiecewiseField {
    if b == 0.0 {
        return z.clone();
    }
    PiecewiseField::new(z.upper.shift_x(convention.offset(b)), z.lower.clone())
}

/// Unfolded field translated by `params.b`, with its polynomials.
pub fn unfold(
    z: &PiecewiseField,
    params: &UnfoldingParams,
) -> Result<(PiecewiseField, PerturbationPolys), UnfoldError> {
    let polys = build_perturbation(z, params)?;
    let unfolded = build_unfolded(z, &polys)?;
    Ok((apply_shift(&unfolded, params.b, params.shift), polys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEntry {
    pub side: Side,
    pub j: usize,
    pub expected: f64,
    pub slope: f64,
    /// `C_j(Λ,0) = 0`, so only `slope ≥ expected` is meaningful.
    pub leading_vanishes: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub epsilons: Vec<f64>,
    pub entries: Vec<ScalingEntry>,
    pub norm_slope_plus: f64,
    pub norm_slope_minus: f64,
    pub pass: bool,
}

/// Log-log slopes of the coefficients of `P±` against `ε`, compared with
/// the exponents `2k−1−j`.
pub fn coefficient_scaling(
    z: &PiecewiseField,
    params: &UnfoldingParams,
    epsilons: &[f64],
    slope_tol: f64,
) -> Result<ScalingReport, UnfoldError> {
    let k = params.k as usize;
    let polys = epsilons
        .par_iter()
        .map(|&e| build_perturbation(z, &params.with_epsilon(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let d = classify_k(z, params.k)?;
    let (c0_plus, _) = leading_coeffs(&d, Side::Upper, &params.lambda);
    let (c0_minus, _) = leading_coeffs(&d, Side::Lower, &params.lambda);
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let mut entries = Vec::new();
    for (side, c0) in [(Side::Upper, &c0_plus), (Side::Lower, &c0_minus)] {
        let scale = c0.iter().fold(0.0_f64, |m, c| m.max(c.abs())).max(1.0);
        for j in 1..=params.lambda.len() {
            let expected = (2 * k - 1 - j) as f64;
            let leading_vanishes = c0[j - 1].abs() < 1e-12 * scale;
            let values: Vec<f64> = polys.iter().map(|p| p.side(side).coeff(j)).collect();
            let slope = if values.iter().all(|v| *v != 0.0) {
                let ly: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
                linear_fit(&lx, &ly).0
            } else {
                f64::INFINITY
            };
            let ok = if leading_vanishes {
                slope >= expected - slope_tol
            } else {
                (slope - expected).abs() <= slope_tol
            };
            entries.push(ScalingEntry {
                side,
                j,
                expected,
                slope,
                leading_vanishes,
                ok,
            });
        }
    }
    let norm_slope = |side: Side| {
        let ly: Vec<f64> = polys.iter().map(|p| p.side(side).norm().ln()).collect();
        if ly.iter().all(|v| v.is_finite()) {
            linear_fit(&lx, &ly).0
        } else {
            f64::INFINITY
        }
    };
    Ok(ScalingReport {
        epsilons: epsilons.to_vec(),
        pass: entries.iter().all(|e| e.ok),
        entries,
        norm_slope_plus: norm_slope(Side::Upper),
        norm_slope_minus: norm_slope(Side::Lower),
    })
}

/// `C_j(Λ,0)` and `∂C_j/∂ε(Λ,0)` in closed form: interpolants of
/// `∓δa aᵢ^{2k−1}` and `∓δf₀ aᵢ^{2k}` through `{0} ∪ Λ`.
fn leading_coeffs(d: &MonodromyData, side: Side, lambda: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = d.k(side) as i32;
    let s = -side.sign() * d.delta();
    let eta0: Vec<f64> = lambda.iter().map(|a| s * d.a(side) * a.powi(2 * k - 1)).collect();
    let eta1: Vec<f64> = lambda.iter().map(|a| s * d.f0(side) * a.powi(2 * k)).collect();
    (
        interpolate_coeffs(lambda, &eta0, 1.0),
        interpolate_coeffs(lambda, &eta1, 1.0),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub index: usize,
    pub x0: f64,
    pub side: Side,
    pub residual: f64,
    pub multiplicity: u32,
    pub visibility: Visibility,
    pub expected: Visibility,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub k: u32,
    pub epsilon: f64,
    pub contacts: Vec<LadderEntry>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl LadderReport {
    pub fn ensure(&self) -> Result<(), UnfoldError> {
        if self.pass {
            Ok(())
        } else {
            Err(UnfoldError::VerificationMismatch(self.failures.clone()))
        }
    }
}

/// Checks that every `εaᵢ` is a multiplicity-2 contact on both sides with
/// the predicted visibility pattern.
pub fn verify_contact_ladder(
    z_unfolded: &PiecewiseField,
    params: &UnfoldingParams,
) -> Result<LadderReport, UnfoldError> {
    params.validate()?;
    if !params.is_ordered() {
        return Err(UnfoldError::Precondition(
            "the visibility pattern needs a₁ < 0 < a₂ < … < a_{2k−2}".into(),
        ));
    }
    let invisible = params.invisible_indices();
    let mut contacts = Vec::new();
    let mut failures = Vec::new();
    for (index, x0) in params.contact_abscissas().into_iter().enumerate() {
        for side in [Side::Upper, Side::Lower] {
            let f = z_unfolded.side(side);
            let yr = f.y.restrict_sigma();
            let scale = yr.max_abs_coeff().max(f64::MIN_POSITIVE);
            let residual = yr.eval(x0).abs();
            let multiplicity = contact_multiplicity(f, x0).unwrap_or(0);
            let vis = if multiplicity == 2 {
                visibility(f, side, x0, 2)?
            } else {
                Visibility::NotApplicable
            };
            let expected = if invisible.contains(&index) {
                Visibility::Invisible
            } else {
                Visibility::Visible
            };
            let ok = residual < LADDER_RESIDUAL_TOL * scale && multiplicity == 2 && vis == expected;
            if !ok {
                failures.push(format!(
                    "{side:?} contact {index} at x = {x0}: residual {residual:e}, multiplicity {multiplicity}, {vis:?} (expected {expected:?})"
                ));
            }
            contacts.push(LadderEntry {
                index,
                x0,
                side,
                residual,
                multiplicity,
                visibility: vis,
                expected,
                ok,
            });
        }
    }
    Ok(LadderReport {
        k: params.k,
        epsilon: params.epsilon,
        pass: failures.is_empty(),
        contacts,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResiduals {
    pub t_plus: f64,
    pub t_minus: f64,
    pub u_plus: f64,
    pub u_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSideResiduals {
    pub s1: f64,
    pub s3: f64,
    /// Absent when `f₀⁺ = 0`.
    pub s2: Option<f64>,
    pub s4: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Entry {
    pub index: usize,
    pub a_i: f64,
    /// `[s₁, s₂, s₃, s₄]` for the upper side.
    pub s_plus: [f64; 4],
    pub s_minus: [f64; 4],
    /// `|s₂ − rhs|` and `|s₄ − rhs|`, upper then lower.
    pub residuals: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub k: u32,
    pub lambda: Vec<f64>,
    pub alpha: f64,
    pub exact: bool,
    pub c_plus: Vec<f64>,
    pub dc_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub dc_minus: Vec<f64>,
    pub entries: Vec<Lemma1Entry>,
    pub factorization_residuals: FactorizationResiduals,
    pub cross_side_residuals: CrossSideResiduals,
    pub max_residual: f64,
}

struct LemmaSide<T> {
    sign: T,
    a: T,
    f0: T,
    c: Vec<T>,
    dc: Vec<T>,
}

fn to_f(x: &impl ToPrimitive) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn from_roots<T: Num + Clone>(roots: &[T]) -> Vec<T> {
    let mut p = vec![T::one()];
    for r in roots {
        let mut next = vec![T::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + c.clone();
            next[i] = next[i].clone() - c.clone() * r.clone();
        }
        p = next;
    }
    p
}

fn max_coeff_gap<T: Num + Signed + Clone + ToPrimitive>(a: &[T], b: &[T]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(T::zero);
            let y = b.get(i).cloned().unwrap_or_else(T::zero);
            to_f(&(x - y).abs())
        })
        .fold(0.0, f64::max)
}

fn powi<T: Num + Clone>(x: &T, n: usize) -> T {
    (0..n).fold(T::one(), |acc, _| acc * x.clone())
}

/// Evaluates every coefficient identity; works for floats and exact rationals.
fn lemma_core<T>(k: u32, lambda: &[T], delta: T, sides: [LemmaSide<T>; 2], exact: bool) -> Lemma1Report
where
    T: Num + Signed + Clone + ToPrimitive + FromPrimitive,
{
    let n = lambda.len();
    let ku = k as usize;
    let int = |v: usize| T::from_usize(v).expect("small integer");
    let alpha = lambda.iter().fold(T::zero(), |acc, a| acc - a.clone());

    // T(x) = Σ C_j x^j ± δa x^{2k−1},  U(x) = Σ ∂C_j x^j ± δf₀ x^{2k}
    let mut fact = [0.0; 4];
    let base = from_roots(&std::iter::once(T::zero()).chain(lambda.iter().cloned()).collect::<Vec<_>>());
    for (slot, side) in sides.iter().enumerate() {
        let sd = side.sign.clone() * delta.clone();
        let mut t = vec![T::zero(); 2 * ku];
        let mut u = vec![T::zero(); 2 * ku + 1];
        t[1..=n].clone_from_slice(&side.c[..n]);
        u[1..=n].clone_from_slice(&side.dc[..n]);
        t[2 * ku - 1] = t[2 * ku - 1].clone() + sd.clone() * side.a.clone();
        u[2 * ku] = u[2 * ku].clone() + sd.clone() * side.f0.clone();
        let t_target: Vec<T> = base.iter().map(|c| c.clone() * sd.clone() * side.a.clone()).collect();
        let with_alpha = {
            let mut r: Vec<T> = std::iter::once(alpha.clone()).chain(lambda.iter().cloned()).collect();
            r.push(T::zero());
            from_roots(&r)
        };
        let u_target: Vec<T> = with_alpha
            .iter()
            .map(|c| c.clone() * sd.clone() * side.f0.clone())
            .collect();
        fact[slot] = max_coeff_gap(&t, &t_target);
        fact[2 + slot] = max_coeff_gap(&u, &u_target);
    }

    let sums = |side: &LemmaSide<T>, ai: &T| -> [T; 4] {
        let mut s = [T::zero(), T::zero(), T::zero(), T::zero()];
        for j in 1..=n {
            let w1 = int(j) * powi(ai, j - 1);
            s[0] = s[0].clone() + w1.clone() * side.c[j - 1].clone();
            s[1] = s[1].clone() + w1 * side.dc[j - 1].clone();
            if j >= 2 {
                let w2 = int(j * (j - 1)) * powi(ai, j - 2);
                s[2] = s[2].clone() + w2.clone() * side.c[j - 1].clone();
                s[3] = s[3].clone() + w2 * side.dc[j - 1].clone();
            }
        }
        s
    };

    let mut entries = Vec::with_capacity(n);
    let mut cross = [0.0_f64; 4];
    let f0_plus_zero = sides[0].f0.is_zero();
    for (idx, ai) in lambda.iter().enumerate() {
        let mut s_all: Vec<[T; 4]> = Vec::with_capacity(2);
        let mut residuals = [0.0; 4];
        for (slot, side) in sides.iter().enumerate() {
            let s = sums(side, ai);
            let sd = side.sign.clone() * delta.clone();
            let ratio = side.f0.clone() / side.a.clone();
            let rhs2 = ratio.clone()
                * ((ai.clone() - alpha.clone()) * s[0].clone()
                    - sd.clone() * side.a.clone() * powi(ai, 2 * ku - 1)
                    - sd.clone() * int(2 * ku - 1) * side.a.clone() * alpha.clone() * powi(ai, 2 * ku - 2));
            let rhs4 = ratio
                * ((ai.clone() - alpha.clone()) * s[2].clone() + int(2) * s[0].clone()
                    - sd * int((2 * ku - 2) * (2 * ku - 1)) * side.a.clone() * alpha.clone()
                        * powi(ai, 2 * ku - 3));
            residuals[2 * slot] = to_f(&(s[1].clone() - rhs2).abs());
            residuals[2 * slot + 1] = to_f(&(s[3].clone() - rhs4).abs());
            s_all.push(s);
        }
        let (sp, sm) = (&s_all[0], &s_all[1]);
        let ra = sides[1].a.clone() / sides[0].a.clone();
        cross[0] = cross[0].max(to_f(&(sm[0].clone() + ra.clone() * sp[0].clone()).abs()));
        cross[2] = cross[2].max(to_f(&(sm[2].clone() + ra * sp[2].clone()).abs()));
        if !f0_plus_zero {
            let rf = sides[1].f0.clone() / sides[0].f0.clone();
            cross[1] = cross[1].max(to_f(&(sm[1].clone() + rf.clone() * sp[1].clone()).abs()));
            cross[3] = cross[3].max(to_f(&(sm[3].clone() + rf * sp[3].clone()).abs()));
        }
        let conv = |s: &[T; 4]| [to_f(&s[0]), to_f(&s[1]), to_f(&s[2]), to_f(&s[3])];
        entries.push(Lemma1Entry {
            index: idx + 1,
            a_i: to_f(ai),
            s_plus: conv(sp),
            s_minus: conv(sm),
            residuals,
        });
    }

    let factorization_residuals = FactorizationResiduals {
        t_plus: fact[0],
        t_minus: fact[1],
        u_plus: fact[2],
        u_minus: fact[3],
    };
    let cross_side_residuals = CrossSideResiduals {
        s1: cross[0],
        s3: cross[2],
        s2: (!f0_plus_zero).then_some(cross[1]),
        s4: (!f0_plus_zero).then_some(cross[3]),
    };
    let max_residual = entries
        .iter()
        .flat_map(|e| e.residuals)
        .chain(fact)
        .chain([cross[0], cross[2]])
        .chain(cross_side_residuals.s2)
        .chain(cross_side_residuals.s4)
        .fold(0.0, f64::max);
    let vecf = |v: &[T]| v.iter().map(to_f).collect::<Vec<_>>();
    let [up, lo] = sides;
    Lemma1Report {
        k,
        lambda: vecf(lambda),
        alpha: to_f(&alpha),
        exact,
        c_plus: vecf(&up.c),
        dc_plus: vecf(&up.dc),
        c_minus: vecf(&lo.c),
        dc_minus: vecf(&lo.dc),
        entries,
        factorization_residuals,
        cross_side_residuals,
        max_residual,
    }
}

/// Step of the ε-grid used to extrapolate `C_j` and `∂C_j/∂ε` to `ε = 0`.
pub const LEMMA1_STEP: f64 = 1e-2;

/// Value and slope at 0 of the quadratic through `(eᵢ, vᵢ)`.
fn extrapolate(e: [f64; 3], v: [f64; 3]) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for i in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&j| j != i).collect();
        let den: f64 = others.iter().map(|&j| e[i] - e[j]).product();
        let num0: f64 = others.iter().map(|&j| -e[j]).product();
        let num1: f64 = others.iter().map(|&m| others.iter().filter(|&&j| j != m).map(|&j| -e[j]).product::<f64>()).sum();
        value += v[i] * num0 / den;
        slope += v[i] * num1 / den;
    }
    (value, slope)
}

/// Coefficient identities with `C_j(Λ,0)` and `∂C_j/∂ε(Λ,0)` extrapolated from
/// perturbation polynomials at `ε ∈ {h, h/2, h/4}`.
pub fn lemma1_check(z: &PiecewiseField, k: u32, lambda: &[f64]) -> Result<Lemma1Report, UnfoldError> {
    let params = UnfoldingParams::new(k, lambda.to_vec(), LEMMA1_STEP);
    params.validate()?;
    let d = classify_k(z, k)?;
    let grid = [LEMMA1_STEP, LEMMA1_STEP / 2.0, LEMMA1_STEP / 4.0];
    let polys = grid
        .iter()
        .map(|&e| build_perturbation(z, &params.with_epsilon(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let n = lambda.len();
    let side_data = |side: Side| {
        let mut c = Vec::with_capacity(n);
        let mut dc = Vec::with_capacity(n);
        for j in 1..=n {
            let scaled = |idx: usize| {
                polys[idx].side(side).coeff(j) / grid[idx].powi((2 * k as usize - 1 - j) as i32)
            };
            let (v, s) = extrapolate(grid, [scaled(0), scaled(1), scaled(2)]);
            c.push(v);
            dc.push(s);
        }
        LemmaSide {
            sign: side.sign(),
            a: d.a(side),
            f0: d.f0(side),
            c,
            dc,
        }
    };
    Ok(lemma_core(
        k,
        lambda,
        d.delta(),
        [side_data(Side::Upper), side_data(Side::Lower)],
        false,
    ))
}

/// Coefficient identities in exact rational arithmetic: the classification
/// data are taken as the rationals their floats denote, and `C_j(Λ,0)`,
/// `∂C_j/∂ε(Λ,0)` come from exact interpolation.
pub fn lemma1_exact(z: &PiecewiseField, k: u32, lambda: &[f64]) -> Result<Lemma1Report, UnfoldError> {
    UnfoldingParams::new(k, lambda.to_vec(), 1.0).validate()?;
    let d = classify_k(z, k)?;
    let lam: Vec<Q> = lambda.iter().map(|&a| q(a)).collect();
    let nodes: Vec<Q> = std::iter::once(Q::zero()).chain(lam.iter().cloned()).collect();
    let delta = q(d.delta());
    let side_data = |side: Side| {
        let s = q(side.sign());
        let a = q(d.a(side));
        let f0 = q(d.f0(side));
        let sd = -(s.clone() * delta.clone());
        let interp = |coef: &Q, pow: usize| -> Vec<Q> {
            let values: Vec<Q> = std::iter::once(Q::zero())
                .chain(lam.iter().map(|ai| sd.clone() * coef.clone() * powi(ai, pow)))
                .collect();
            let p = QPoly1::interpolate(&nodes, &values);
            (1..=lam.len()).map(|j| p.coeff(j)).collect()
        };
        LemmaSide {
            c: interp(&a, 2 * k as usize - 1),
            dc: interp(&f0, 2 * k as usize),
            sign: s,
            a,
            f0,
        }
    };
    Ok(lemma_core(
        k,
        &lam,
        delta.clone(),
        [side_data(Side::Upper), side_data(Side::Lower)],
        true,
    ))
}

/// Random `Λ` with entries in `[−3, 3]` at mutual distance (and distance to
/// 0) at least `0.2`.
pub fn draw_lambda<R: Rng>(rng: &mut R, k: u32) -> Vec<f64> {
    let n = 2 * k as usize - 2;
    loop {
        let cand: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let p = UnfoldingParams::new(k, cand.clone(), 1.0);
        if p.min_gap() >= 0.2 {
            return cand;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Draw {
    pub k: u32,
    pub lambda: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Batch {
    pub seed: u64,
    pub draws: Vec<Lemma1Draw>,
    pub max_residual: f64,
}

/// Coefficient identities on `count` seeded draws of `k ∈ {2, 3}` and `Λ`, for the
/// canonical family with `c = 1`.
pub fn lemma1_random(seed: u64, count: usize) -> Result<Lemma1Batch, UnfoldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(u32, Vec<f64>)> = (0..count)
        .map(|_| {
            let k = rng.gen_range(2..=3);
            (k, draw_lambda(&mut rng, k))
        })
        .collect();
    let draws = cases
        .into_par_iter()
        .map(|(k, lambda)| {
            let r = lemma1_check(&PiecewiseField::sys_a(k, 1.0), k, &lambda)?;
            Ok(Lemma1Draw {
                k,
                lambda,
                max_residual: r.max_residual,
            })
        })
        .collect::<Result<Vec<_>, UnfoldError>>()?;
    Ok(Lemma1Batch {
        seed,
        max_residual: draws.iter().map(|d| d.max_residual).fold(0.0, f64::max),
        draws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct V2LimitEntry {
    pub index: usize,
    pub a_i: f64,
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted exponent of `error ~ K·ε^order`.
    pub order: f64,
    /// `max error/ε` over the grid.
    pub constant: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct V2LimitReport {
    pub k: u32,
    pub v2: f64,
    pub target: f64,
    pub entries: Vec<V2LimitEntry>,
    pub pass: bool,
}

impl V2LimitReport {
    pub fn ensure(&self) -> Result<(), UnfoldError> {
        let bad: Vec<String> = self
            .entries
            .iter()
            .filter(|e| !e.ok)
            .map(|e| format!("index {} converges with order {:.3}", e.index, e.order))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(UnfoldError::VerificationMismatch(bad))
        }
    }
}

/// Smallest accepted convergence order of `V₂,ᵢ(ε)`.
pub const V2_LIMIT_MIN_ORDER: f64 = 0.9;

/// `V₂` of each invisible two-fold of the unfolded field against the limit
/// `(2k+1)V₂/3`, over `ε ∈ {ε₀, ε₀/2, ε₀/4}`.
pub fn local_v2_limit_check(
    z: &PiecewiseField,
    params: &UnfoldingParams,
) -> Result<V2LimitReport, UnfoldError> {
    params.validate()?;
    if !params.is_ordered() {
        return Err(UnfoldError::Precondition("Λ must be ordered".into()));
    }
    let d = classify_k(z, params.k)?;
    if d.V2.abs() < 1e-12 {
        return Err(UnfoldError::Precondition("V₂ vanishes".into()));
    }
    let target = (2 * params.k + 1) as f64 * d.V2 / 3.0;
    let eps = [params.epsilon, params.epsilon / 2.0, params.epsilon / 4.0];
    let fields = eps
        .par_iter()
        .map(|&e| {
            let p = params.with_epsilon(e).with_b(0.0);
            let polys = build_perturbation(z, &p)?;
            build_unfolded(z, &polys)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut entries = Vec::new();
    for index in params.invisible_indices() {
        let a_i = if index == 0 { 0.0 } else { params.lambda[index - 1] };
        let values = fields
            .iter()
            .zip(&eps)
            .map(|(f, e)| local_v2(f, e * a_i))
            .collect::<Result<Vec<_>, _>>()?;
        let errors: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
        let exact = errors.iter().all(|e| *e < 1e-13 * target.abs().max(1.0));
        let order = if exact || errors.contains(&0.0) {
            f64::INFINITY
        } else {
            let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
            let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
            linear_fit(&lx, &ly).0
        };
        let constant = errors.iter().zip(&eps).map(|(r, e)| r / e).fold(0.0, f64::max);
        entries.push(V2LimitEntry {
            index,
            a_i,
            epsilons: eps.to_vec(),
            values,
            errors,
            order,
            constant,
            ok: order >= V2_LIMIT_MIN_ORDER,
        });
    }
    Ok(V2LimitReport {
        k: params.k,
        v2: d.V2,
        target,
        pass: entries.iter().all(|e| e.ok),
        entries,
    })
}
