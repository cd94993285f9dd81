//! Piecewise planar fields with switching line `Σ = {y = 0}`: contact
//! classification, monodromic tangential singularities and the closed-form
//! second Lyapunov coefficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly1, Poly2, PolyError};

/// Relative threshold under which a derivative on Σ counts as zero.
pub const ZERO_DERIVATIVE_RTOL: f64 = 1e-11;

/// Absolute bound on the remainder of the divisions defining `f` and `g`.
pub const DIVISION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("horizontal component vanishes at ({x0}, 0)")]
    SingularX { x0: f64 },
    #[error("every derivative of Y(x, 0) vanishes at x = {x0}")]
    DegenerateContact { x0: f64 },
    #[error("not a monodromic tangential singularity: condition {condition} fails ({detail})")]
    NotMonodromic { condition: Condition, detail: String },
    #[error("{what} is not divisible (remainder {residual:e})")]
    DivisionResidual { what: &'static str, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The three defining conditions of a monodromic tangential singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    /// `+1` above Σ, `-1` below.
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    Visible,
    Invisible,
    NotApplicable,
}

/// One smooth planar field `(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothField {
    #[serde(rename = "X")]
    pub x: Poly2,
    #[serde(rename = "Y")]
    pub y: Poly2,
}

impl SmoothField {
    pub fn new(x: Poly2, y: Poly2) -> Self {
        Self { x, y }
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.x.eval(x, y), self.y.eval(x, y)]
    }

    /// The field composed with `x ↦ x + h`.
    pub fn shift_x(&self, h: f64) -> Self {
        Self::new(self.x.shift_x(h), self.y.shift_x(h))
    }

    /// Both components multiplied by `s` (a time rescaling when `s > 0`).
    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x.scale(s), self.y.scale(s))
    }
}

/// `Z⁺` on `y > 0`, `Z⁻` on `y < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseField {
    pub upper: SmoothField,
    pub lower: SmoothField,
}

impl PiecewiseField {
    pub fn new(upper: SmoothField, lower: SmoothField) -> Self {
        Self { upper, lower }
    }

    pub fn side(&self, side: Side) -> &SmoothField {
        match side {
            Side::Upper => &self.upper,
            Side::Lower => &self.lower,
        }
    }

    pub fn shift_x(&self, h: f64) -> Self {
        Self::new(self.upper.shift_x(h), self.lower.shift_x(h))
    }

    /// Canonical test family: upper `(1, −x^{2k−1} + c x^{2k})`, lower
    /// `(−1, −x^{2k−1})`. A `(2k,2k)` singularity with `V₂ = 2c/(2k+1)`.
    pub fn sys_a(k: u32, c: f64) -> Self {
        assert!(k >= 1, "k must be positive");
        let n = 2 * k - 1;
        let upper = SmoothField::new(
            Poly2::constant(1.0),
            Poly2::monomial(n, 0, -1.0).add(&Poly2::monomial(n + 1, 0, c)),
        );
        let lower = SmoothField::new(Poly2::constant(-1.0), Poly2::monomial(n, 0, -1.0));
        Self::new(upper, lower)
    }

    /// Upper `(1, −x + y)`, lower `(−1, −x)`: a two-fold whose `V₂` comes
    /// entirely from the `g` term.
    pub fn sys_g() -> Self {
        let upper = SmoothField::new(
            Poly2::constant(1.0),
            Poly2::monomial(1, 0, -1.0).add(&Poly2::monomial(0, 1, 1.0)),
        );
        let lower = SmoothField::new(Poly2::constant(-1.0), Poly2::monomial(1, 0, -1.0));
        Self::new(upper, lower)
    }
}

/// Contact between one side's field and Σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactInfo {
    pub x0: f64,
    pub side: Side,
    pub multiplicity: u32,
    pub visibility: Visibility,
}

/// Classification record of a `(2k⁺,2k⁻)`-monodromic tangential singularity.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyData {
    pub k_plus: u32,
    pub k_minus: u32,
    pub delta: i8,
    pub a_plus: f64,
    pub a_minus: f64,
    pub f0_plus: f64,
    pub f0_minus: f64,
    pub g00_plus: f64,
    pub g00_minus: f64,
    pub alpha2_plus: f64,
    pub alpha2_minus: f64,
    pub V2: f64,
}

impl MonodromyData {
    pub fn delta(&self) -> f64 {
        self.delta as f64
    }

    pub fn a(&self, side: Side) -> f64 {
        match side {
            Side::Upper => self.a_plus,
            Side::Lower => self.a_minus,
        }
    }

    pub fn f0(&self, side: Side) -> f64 {
        match side {
            Side::Upper => self.f0_plus,
            Side::Lower => self.f0_minus,
        }
    }

    pub fn k(&self, side: Side) -> u32 {
        match side {
            Side::Upper => self.k_plus,
            Side::Lower => self.k_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Crossing,
    AttractingSliding,
    RepellingSliding,
    /// One of the vertical components vanishes identically on the piece.
    Degenerate,
}

impl SegmentKind {
    pub fn is_sliding(self) -> bool {
        matches!(self, SegmentKind::AttractingSliding | SegmentKind::RepellingSliding)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Crossing => "crossing",
            SegmentKind::AttractingSliding => "attracting-sliding",
            SegmentKind::RepellingSliding => "repelling-sliding",
            SegmentKind::Degenerate => "degenerate",
        }
    }
}

/// An open piece of Σ with uniform dynamics. The `*_is_contact` flags tell
/// whether an endpoint is a root of `Y⁺(x,0)·Y⁻(x,0)` rather than a bound of
/// the query interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSegment {
    pub lo: f64,
    pub hi: f64,
    pub kind: SegmentKind,
    pub lo_is_contact: bool,
    pub hi_is_contact: bool,
}

fn zero_tol(scale: f64) -> f64 {
    ZERO_DERIVATIVE_RTOL * scale.max(1.0)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Taylor data of `Y(x, 0)` at `x0` together with the zero tolerance.
fn sigma_taylor(f: &SmoothField, x0: f64) -> (Poly1, f64) {
    let restricted = f.y.restrict_sigma();
    let tol = zero_tol(restricted.max_abs_coeff());
    (restricted.shift(x0), tol)
}

fn check_x(f: &SmoothField, x0: f64) -> Result<f64, FieldError> {
    let x_val = f.x.eval(x0, 0.0);
    if x_val.abs() < zero_tol(f.x.max_abs_coeff()) {
        return Err(FieldError::SingularX { x0 });
    }
    Ok(x_val)
}

/// `1` at a regular point of Σ, otherwise `n` such that `x0` is a root of
/// order `n − 1` of `x ↦ Y(x, 0)`.
pub fn contact_multiplicity(f: &SmoothField, x0: f64) -> Result<u32, FieldError> {
    check_x(f, x0)?;
    let (q, tol) = sigma_taylor(f, x0);
    if q.coeff(0).abs() >= tol {
        return Ok(1);
    }
    for m in 1..=q.degree().max(0) as u32 {
        if (factorial(m) * q.coeff(m as usize)).abs() >= tol {
            return Ok(m + 1);
        }
    }
    Err(FieldError::DegenerateContact { x0 })
}

/// `∂^{n}Y/∂x^{n}(x0, 0)`.
fn sigma_derivative(f: &SmoothField, x0: f64, n: u32) -> f64 {
    let (q, _) = sigma_taylor(f, x0);
    factorial(n) * q.coeff(n as usize)
}

/// Visibility of an even contact: invisible when the tangent orbit locally
/// leaves the side's own half-plane, i.e. `X·∂^{n−1}Y < 0` above Σ and
/// `X·∂^{n−1}Y > 0` below.
pub fn visibility(f: &SmoothField, side: Side, x0: f64, n: u32) -> Result<Visibility, FieldError> {
    let m = contact_multiplicity(f, x0)?;
    if m != n || !n.is_multiple_of(2) {
        return Err(FieldError::Precondition(format!(
            "visibility needs an even contact of multiplicity {n} at x = {x0}, found {m}"
        )));
    }
    let curvature = f.x.eval(x0, 0.0) * sigma_derivative(f, x0, n - 1) * side.sign();
    Ok(if curvature < 0.0 {
        Visibility::Invisible
    } else {
        Visibility::Visible
    })
}

/// Multiplicity plus visibility (when even) at `x0`.
pub fn contact_info(f: &SmoothField, side: Side, x0: f64) -> Result<ContactInfo, FieldError> {
    let multiplicity = contact_multiplicity(f, x0)?;
    let visibility = if multiplicity >= 2 && multiplicity % 2 == 0 {
        visibility(f, side, x0, multiplicity)?
    } else {
        Visibility::NotApplicable
    };
    Ok(ContactInfo {
        x0,
        side,
        multiplicity,
        visibility,
    })
}

fn not_monodromic(condition: Condition, detail: impl Into<String>) -> FieldError {
    FieldError::NotMonodromic {
        condition,
        detail: detail.into(),
    }
}

struct SideData {
    k: u32,
    a: f64,
    f0: f64,
    g00: f64,
}

fn side_multiplicity(f: &SmoothField, side: Side) -> Result<(u32, f64, f64), FieldError> {
    let name = match side {
        Side::Upper => "upper",
        Side::Lower => "lower",
    };
    let n = match contact_multiplicity(f, 0.0) {
        Ok(n) => n,
        Err(FieldError::SingularX { .. }) => {
            return Err(not_monodromic(Condition::C1, format!("{name} X(0,0) = 0")))
        }
        Err(FieldError::DegenerateContact { .. }) => {
            return Err(not_monodromic(Condition::C1, format!("{name} Y(x,0) is flat at 0")))
        }
        Err(e) => return Err(e),
    };
    if n == 1 {
        return Err(not_monodromic(Condition::C1, format!("{name} Y(0,0) ≠ 0")));
    }
    if n % 2 == 1 {
        return Err(not_monodromic(
            Condition::C1,
            format!("{name} contact has odd multiplicity {n}"),
        ));
    }
    let x0 = f.x.eval(0.0, 0.0);
    let d = sigma_derivative(f, 0.0, n - 1);
    Ok((n / 2, x0, d))
}

fn side_data(f: &SmoothField, side: Side, k: u32, x0: f64, d: f64, delta: f64) -> Result<SideData, FieldError> {
    let s = side.sign();
    let a = d / (factorial(2 * k - 1) * x0.abs());

    let xr = f.x.restrict_sigma();
    let yr = f.y.restrict_sigma();
    let numer = yr
        .scale(s * delta)
        .sub(&Poly1::monomial(2 * k as usize - 1, a).mul(&xr));
    let (quot, rem) = numer.div_x_pow(2 * k as usize);
    if rem >= DIVISION_TOL {
        return Err(FieldError::DivisionResidual {
            what: "numerator of f",
            residual: rem,
        });
    }
    let f0 = quot.coeff(0) / x0;

    let xr2 = Poly2::from_x(&xr);
    let yr2 = Poly2::from_x(&yr);
    let numer_g = xr2.mul(&f.y)?.sub(&f.x.mul(&yr2)?).scale(s);
    let rem_g = numer_g
        .terms()
        .filter(|(_, j, _)| *j == 0)
        .fold(0.0_f64, |m, (_, _, c)| m.max(c.abs()));
    if rem_g >= DIVISION_TOL {
        return Err(FieldError::DivisionResidual {
            what: "numerator of g",
            residual: rem_g,
        });
    }
    let g00 = numer_g.taylor_coeff(0, 1) / (delta * x0 * x0);
    Ok(SideData { k, a, f0, g00 })
}

fn alpha2(side: Side, d: &SideData, delta: f64) -> f64 {
    (-2.0 * d.f0 + side.sign() * 2.0 * delta * d.a * d.g00) / (d.a * (2 * d.k + 1) as f64)
}

/// Classifies the origin as a `(2k⁺,2k⁻)`-monodromic tangential singularity.
pub fn classify_mts(z: &PiecewiseField) -> Result<MonodromyData, FieldError> {
    let (k_plus, xp, dp) = side_multiplicity(&z.upper, Side::Upper)?;
    let (k_minus, xm, dm) = side_multiplicity(&z.lower, Side::Lower)?;
    if xp * dp >= 0.0 {
        return Err(not_monodromic(Condition::C2, "upper contact is visible"));
    }
    if xm * dm <= 0.0 {
        return Err(not_monodromic(Condition::C2, "lower contact is visible"));
    }
    if xp * xm >= 0.0 {
        return Err(not_monodromic(
            Condition::C3,
            "X⁺(0,0) and X⁻(0,0) have the same sign",
        ));
    }
    let delta = xp.signum();
    let up = side_data(&z.upper, Side::Upper, k_plus, xp, dp, delta)?;
    let lo = side_data(&z.lower, Side::Lower, k_minus, xm, dm, delta)?;
    let alpha2_plus = alpha2(Side::Upper, &up, delta);
    let alpha2_minus = alpha2(Side::Lower, &lo, delta);
    let mut data = MonodromyData {
        k_plus,
        k_minus,
        delta: delta as i8,
        a_plus: up.a,
        a_minus: lo.a,
        f0_plus: up.f0,
        f0_minus: lo.f0,
        g00_plus: up.g00,
        g00_minus: lo.g00,
        alpha2_plus,
        alpha2_minus,
        V2: 0.0,
    };
    data.V2 = lyapunov_v2(&data);
    Ok(data)
}

/// Second Lyapunov coefficient `V₂ = δ(α₂⁺ − α₂⁻)`.
pub fn lyapunov_v2(d: &MonodromyData) -> f64 {
    d.delta() * (d.alpha2_plus - d.alpha2_minus)
}

/// `V₂` of the singularity at `(x0, 0)` after translating it to the origin.
pub fn local_v2(z: &PiecewiseField, x0: f64) -> Result<f64, FieldError> {
    classify_mts(&z.shift_x(x0)).map(|d| lyapunov_v2(&d))
}

fn kind_from_signs(yp: &Poly1, ym: &Poly1, x: f64) -> SegmentKind {
    let (u, l) = (yp.eval(x), ym.eval(x));
    if u == 0.0 || l == 0.0 {
        SegmentKind::Degenerate
    } else if u * l > 0.0 {
        SegmentKind::Crossing
    } else if u < 0.0 {
        SegmentKind::AttractingSliding
    } else {
        SegmentKind::RepellingSliding
    }
}

/// Filippov type of Σ at `(x, 0)`.
pub fn sigma_kind_at(z: &PiecewiseField, x: f64) -> SegmentKind {
    kind_from_signs(&z.upper.y.restrict_sigma(), &z.lower.y.restrict_sigma(), x)
}

/// Partition of `(lo, hi)` by the real roots of `Y⁺(x,0)·Y⁻(x,0)`, each piece
/// labelled by the Filippov sign rule.
pub fn sigma_regions(z: &PiecewiseField, interval: (f64, f64)) -> Vec<SigmaSegment> {
    let (lo, hi) = interval;
    let yp = z.upper.y.restrict_sigma();
    let ym = z.lower.y.restrict_sigma();
    let mut cuts: Vec<f64> = yp
        .real_roots(lo, hi)
        .into_iter()
        .chain(ym.real_roots(lo, hi))
        .filter(|r| *r > lo && *r < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + a.abs()));

    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend(cuts);
    bounds.push(hi);
    let n = bounds.len();
    bounds
        .windows(2)
        .enumerate()
        .map(|(idx, w)| {
            let kind = kind_from_signs(&yp, &ym, 0.5 * (w[0] + w[1]));
            SigmaSegment {
                lo: w[0],
                hi: w[1],
                kind,
                lo_is_contact: idx > 0,
                hi_is_contact: idx + 2 < n,
            }
        })
        .collect()
}
