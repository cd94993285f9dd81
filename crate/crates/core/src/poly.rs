//! Bivariate and univariate real polynomials.
//!
//! Every component of a planar field is a [`Poly2`]; restrictions to the
//! switching line and the unfolding polynomials are [`Poly1`]. Coefficients
//! are `f64`; the [`exact`] submodule carries a rational univariate type used
//! by the interpolation identity checks.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod exact;

/// Largest total degree accepted by [`Poly2`].
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("duplicate monomial x^{0} y^{1}")]
    DuplicateTerm(u32, u32),
    #[error("total degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeOverflow(usize),
    #[error("non-finite coefficient for x^{0} y^{1}")]
    NonFinite(u32, u32),
}

/// Which variable to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sparse bivariate polynomial `Σ c_ij x^i y^j`.
///
/// Serializes as a list of `[i, j, coefficient]` triples.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, u32, f64)>", into = "Vec<(u32, u32, f64)>")]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl TryFrom<Vec<(u32, u32, f64)>> for Poly2 {
    type Error = PolyError;

    fn try_from(terms: Vec<(u32, u32, f64)>) -> Result<Self, Self::Error> {
        Poly2::from_terms(terms)
    }
}

impl From<Poly2> for Vec<(u32, u32, f64)> {
    fn from(p: Poly2) -> Self {
        p.terms().collect()
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            match i {
                0 => {}
                1 => write!(f, "·x")?,
                _ => write!(f, "·x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·y")?,
                _ => write!(f, "·y^{j}")?,
            }
        }
        Ok(())
    }
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((i, j), c);
        }
        Self { terms }
    }

    /// Builds a polynomial from `(i, j, c)` triples. Exact zeros are dropped;
    /// repeated exponent pairs are rejected.
    pub fn from_terms<I>(terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut map = BTreeMap::new();
        for (i, j, c) in terms {
            if !c.is_finite() {
                return Err(PolyError::NonFinite(i, j));
            }
            if (i + j) as usize > MAX_DEGREE {
                return Err(PolyError::DegreeOverflow((i + j) as usize));
            }
            if map.insert((i, j), c).is_some() {
                return Err(PolyError::DuplicateTerm(i, j));
            }
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { terms: map })
    }

    /// Univariate polynomial in `x` lifted to two variables.
    pub fn from_x(p: &Poly1) -> Self {
        let terms = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| ((i as u32, 0), *c))
            .collect();
        Self { terms }
    }

    fn from_map(mut terms: BTreeMap<(u32, u32), f64>) -> Self {
        terms.retain(|_, c| *c != 0.0);
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|(i, j)| (i + j) as i32)
            .max()
            .unwrap_or(-1)
    }

    /// Highest power of `x` present; `-1` for zero.
    pub fn degree_x(&self) -> i32 {
        self.terms.keys().map(|(i, _)| *i as i32).max().unwrap_or(-1)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending `(i, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|((i, j), c)| (*i, *j, *c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in y over Horner-in-x rows would need dense storage; the
        // term maps here are tiny, so direct powers are fine.
        self.terms
            .iter()
            .map(|((i, j), c)| c * x.powi(*i as i32) * y.powi(*j as i32))
            .sum()
    }

    /// Coefficient of `x^i y^j`, zero when absent.
    pub fn taylor_coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// `n`-th partial derivative with respect to `var`.
    pub fn partial(&self, var: Var, n: u32) -> Self {
        if n == 0 {
            return self.clone();
        }
        let mut out = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            let (p, q) = match var {
                Var::X if i >= n => (i - n, j),
                Var::Y if j >= n => (i, j - n),
                _ => continue,
            };
            let e = if var == Var::X { i } else { j };
            let f = factorial(e) / factorial(e - n);
            out.insert((p, q), c * f);
        }
        Self::from_map(out)
    }

    /// `q(x, y) = p(x + h, y)` by binomial expansion.
    pub fn shift_x(&self, h: f64) -> Self {
        if h == 0.0 {
            return self.clone();
        }
        let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            for m in 0..=i {
                let v = c * binomial(i, m) * h.powi((i - m) as i32);
                *out.entry((m, j)).or_insert(0.0) += v;
            }
        }
        Self::from_map(out)
    }

    /// The univariate polynomial `x ↦ p(x, 0)`.
    pub fn restrict_sigma(&self) -> Poly1 {
        let deg = self.degree_x().max(0) as usize;
        let mut coeffs = vec![0.0; deg + 1];
        for (&(i, j), &c) in &self.terms {
            if j == 0 {
                coeffs[i as usize] = c;
            }
        }
        Poly1::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_map(self.terms.iter().map(|(k, c)| (*k, c * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.terms.clone();
        for (k, c) in &other.terms {
            *out.entry(*k).or_insert(0.0) += c;
        }
        Self::from_map(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        let deg = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && deg as usize > MAX_DEGREE {
            return Err(PolyError::DegreeOverflow(deg as usize));
        }
        let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            for (&(p, q), &d) in &other.terms {
                *out.entry((i + p, j + q)).or_insert(0.0) += c * d;
            }
        }
        Ok(Self::from_map(out))
    }

    /// Largest coefficient deviation between two polynomials.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<_> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| (self.taylor_coeff(k.0, k.1) - other.taylor_coeff(k.0, k.1)).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense univariate polynomial, coefficients by ascending power.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Poly1 {
    fn from(c: Vec<f64>) -> Self {
        Poly1::new(c)
    }
}

impl From<Poly1> for Vec<f64> {
    fn from(p: Poly1) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for Poly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly1{:?}", self.coeffs)
    }
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn monomial(n: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Poly1::new(vec![1.0]), |acc, r| {
            acc.mul(&Poly1::new(vec![-r, 1.0]))
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^n`, zero beyond the degree.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> i32 {
        self.coeffs.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// `n`-th derivative evaluated at `x`.
    pub fn derivative_at(&self, n: u32, x: f64) -> f64 {
        (0..n).fold(self.clone(), |p, _| p.derivative()).eval(x)
    }

    pub fn shift(&self, h: f64) -> Self {
        Poly2::from_x(self).shift_x(h).restrict_sigma()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Divides by `x^n`, returning the quotient and the largest dropped
    /// low-order coefficient magnitude.
    pub fn div_x_pow(&self, n: usize) -> (Self, f64) {
        let rem = self.coeffs.iter().take(n).fold(0.0_f64, |m, c| m.max(c.abs()));
        let quot = self.coeffs.iter().skip(n).copied().collect();
        (Self::new(quot), rem)
    }

    /// Real roots in the closed interval `[lo, hi]`, ascending.
    ///
    /// Roots of the derivative split the interval into monotone pieces; each
    /// piece with a sign change is bisected, and critical points where the
    /// polynomial vanishes (within rounding) are reported as multiple roots.
    /// The zero polynomial yields no roots.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = self.roots_rec(lo, hi);
        roots.sort_by(f64::total_cmp);
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
        roots
    }

    fn zero_tol(&self, x: f64) -> f64 {
        let s = x.abs().max(1.0);
        let scale: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * s.powi(i as i32))
            .sum();
        1e-13 * scale
    }

    fn roots_rec(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.degree() {
            d if d <= 0 => return vec![],
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                return if (lo..=hi).contains(&r) { vec![r] } else { vec![] };
            }
            _ => {}
        }
        let crit = self.derivative().roots_rec(lo, hi);
        let mut pts = Vec::with_capacity(crit.len() + 2);
        pts.push(lo);
        pts.extend(crit.iter().copied().filter(|c| *c > lo && *c < hi));
        pts.push(hi);
        pts.dedup();

        let mut roots = Vec::new();
        for &p in &pts {
            if self.eval(p).abs() <= self.zero_tol(p) {
                roots.push(p);
            }
        }
        for w in pts.windows(2) {
            let (u, v) = (w[0], w[1]);
            let (fu, fv) = (self.eval(u), self.eval(v));
            if fu.abs() <= self.zero_tol(u) || fv.abs() <= self.zero_tol(v) {
                continue;
            }
            if fu.signum() != fv.signum() {
                roots.push(bisect_sign_change(|x| self.eval(x), u, v, fu));
            }
        }
        roots
    }
}

/// Bisection to machine resolution on a bracket with `f(lo) = f_lo` and a sign
/// change inside.
pub(crate) fn bisect_sign_change<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(u32, u32, f64)]) -> Poly2 {
        Poly2::from_terms(terms.iter().copied()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(&[(2, 1, 1.0), (0, 0, 1.0)]).eval(2.0, 3.0), 13.0);
        assert_eq!(Poly2::zero().eval(5.0, 7.0), 0.0);
        assert_eq!(p(&[(3, 0, -1.0), (4, 0, 1.0)]).eval(0.5, 0.0), -0.0625);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(p(&[(3, 0, -1.0)]).partial(Var::X, 3), Poly2::constant(-6.0));
        assert_eq!(p(&[(2, 1, 1.0)]).partial(Var::Y, 1), p(&[(2, 0, 1.0)]));
        let c = 0.7;
        let q = p(&[(3, 0, -1.0), (4, 0, c)]).partial(Var::X, 4);
        assert!((q.eval(0.0, 0.0) - 24.0 * c).abs() < 1e-12);
        let r = p(&[(2, 1, 1.0)]);
        assert_eq!(r.partial(Var::X, 0), r);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(p(&[(2, 0, 1.0)]).shift_x(1.0), p(&[(2, 0, 1.0), (1, 0, 2.0), (0, 0, 1.0)]));
        let q = p(&[(1, 2, 3.0), (5, 0, -2.0)]);
        assert_eq!(q.shift_x(0.0), q);
        let eps = 0.3;
        assert!((p(&[(3, 0, -1.0)]).shift_x(eps).eval(0.0, 0.0) + eps.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(p(&[(2, 1, 1.0), (1, 0, 1.0)]).restrict_sigma(), Poly1::new(vec![0.0, 1.0]));
        assert!(p(&[(0, 3, 1.0)]).restrict_sigma().is_zero());
        let c = 2.5;
        let q = p(&[(3, 0, -1.0), (4, 0, c), (0, 1, 4.0), (3, 2, -1.0)]);
        assert_eq!(q.restrict_sigma(), Poly1::new(vec![0.0, 0.0, 0.0, -1.0, c]));
    }

    #[test]
    fn taylor_examples() {
        let q = p(&[(2, 1, 3.0)]);
        assert_eq!(q.taylor_coeff(2, 1), 3.0);
        assert_eq!(q.taylor_coeff(0, 0), 0.0);
        let c = 1.3;
        let prod = p(&[(3, 0, -1.0), (4, 0, c)]).mul(&p(&[(0, 0, 1.0), (1, 0, 2.0)])).unwrap();
        assert!((prod.taylor_coeff(4, 0) - (c - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_degree_is_minus_one() {
        assert_eq!(Poly2::zero().degree(), -1);
        assert_eq!(Poly1::zero().degree(), -1);
        assert_eq!(p(&[(3, 2, 1.0), (1, 0, 1.0)]).degree(), 5);
    }

    #[test]
    fn duplicate_and_degree_errors() {
        assert_eq!(
            Poly2::from_terms(vec![(1, 0, 1.0), (1, 0, 2.0)]),
            Err(PolyError::DuplicateTerm(1, 0))
        );
        assert!(matches!(
            Poly2::from_terms(vec![(60, 5, 1.0)]),
            Err(PolyError::DegreeOverflow(65))
        ));
        let big = p(&[(40, 0, 1.0)]);
        assert!(matches!(big.mul(&big), Err(PolyError::DegreeOverflow(80))));
    }

    #[test]
    fn serde_triples() {
        let q: Poly2 = serde_json::from_str("[[2,1,3.0],[0,0,-1.5]]").unwrap();
        assert_eq!(q, p(&[(2, 1, 3.0), (0, 0, -1.5)]));
        assert!(serde_json::from_str::<Poly2>("[[1,1,1.0],[1,1,2.0]]").is_err());
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[[0,0,-1.5],[2,1,3.0]]");
    }

    #[test]
    fn real_roots_simple_and_multiple() {
        let q = Poly1::from_roots(&[-0.1, 0.0, 0.1]);
        let r = q.real_roots(-1.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-0.1, 0.0, 0.1]) {
            assert!((a - b).abs() < 1e-14);
        }
        // triple root
        let cube = Poly1::new(vec![0.0, 0.0, 0.0, -1.0, 0.5]);
        let r = cube.real_roots(-1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-14);
        assert!(Poly1::new(vec![1.0, 0.0, 1.0]).real_roots(-5.0, 5.0).is_empty());
    }

    #[test]
    fn div_x_pow_reports_remainder() {
        let q = Poly1::new(vec![1e-3, 0.0, 2.0, 3.0]);
        let (quot, rem) = q.div_x_pow(2);
        assert_eq!(quot, Poly1::new(vec![2.0, 3.0]));
        assert_eq!(rem, 1e-3);
    }
}
