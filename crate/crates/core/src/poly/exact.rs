//! Exact rational univariate polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

/// Exact rational value of a finite `f64` (every binary float is rational).
pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite float")
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients by ascending power; trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QPoly1 {
    coeffs: Vec<Q>,
}

impl QPoly1 {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Q {
        self.coeffs.get(n).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> i32 {
        self.coeffs.len() as i32 - 1
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::default();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `Π (x − r)`.
    pub fn from_roots(roots: &[Q]) -> Self {
        roots.iter().fold(Self::new(vec![Q::one()]), |acc, r| {
            acc.mul(&Self::new(vec![-r.clone(), Q::one()]))
        })
    }

    /// Newton divided-difference interpolant through `(nodes[i], values[i])`.
    ///
    /// # Panics
    /// If two nodes coincide or the slices differ in length.
    pub fn interpolate(nodes: &[Q], values: &[Q]) -> Self {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let mut table: Vec<Q> = values.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                let den = &nodes[i] - &nodes[i - level];
                assert!(!den.is_zero(), "repeated interpolation node");
                table[i] = (&table[i] - &table[i - 1]) / den;
            }
        }
        let mut poly = Self::default();
        for i in (0..n).rev() {
            poly = poly
                .mul(&Self::new(vec![-nodes[i].clone(), Q::one()]))
                .add(&Self::new(vec![table[i].clone()]));
        }
        poly
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }

    pub fn max_abs_coeff(&self) -> Q {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .fold(Q::zero(), |m, c| if c > m { c } else { m })
    }
}

/// `n!` as a rational.
pub fn qfact(n: u32) -> Q {
    (1..=n).fold(Q::one(), |acc, k| acc * Q::from_u32(k).unwrap())
}
