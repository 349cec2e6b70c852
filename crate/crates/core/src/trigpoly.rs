//! Finite bivariate trigonometric (Laurent) polynomials
//! `p(ξ) = Σ c_{j,k} e^{i(jξ₁ + kξ₂)}`.
//!
//! Filters are written in the `e^{-i⟨ξ,k⟩}` convention: a filter with
//! coefficients `c_f(k)` for a dilation of determinant `t`,
//! `m_f(ξ) = (1/t) Σ c_f(k) e^{-i⟨ξ,k⟩}`, is stored with key `-k` and value
//! `c_f(k)/t`, so the stored polynomial evaluates to `m_f` directly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Default tolerance for coefficientwise equality.
pub const EQ_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Default, PartialEq)]
pub struct TrigPoly2 {
    coeffs: BTreeMap<(i64, i64), Complex64>,
}

impl TrigPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c · e^{i(jξ₁ + kξ₂)}`
    pub fn monomial(j: i64, k: i64, c: impl Into<Complex64>) -> Self {
        Self::from_terms([((j, k), c.into())])
    }

    /// Sums the given terms (repeated keys accumulate) and prunes.
    pub fn from_terms(terms: impl IntoIterator<Item = ((i64, i64), Complex64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (key, c) in terms {
            *coeffs.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = Self { coeffs };
        p.prune();
        p
    }

    /// The filter `m_f(ξ) = (1/t) Σ c_f(k) e^{-i⟨ξ,k⟩}`.
    pub fn from_filter_coeffs(
        t: u64,
        coeffs: impl IntoIterator<Item = ((i64, i64), Complex64)>,
    ) -> Self {
        let scale = 1.0 / t as f64;
        Self::from_terms(
            coeffs
                .into_iter()
                .map(|((k1, k2), c)| ((-k1, -k2), c * scale)),
        )
    }

    /// Filter coefficient `c_f(k)` for a dilation of determinant `t`.
    pub fn filter_coeff(&self, t: u64, k: (i64, i64)) -> Complex64 {
        self.coeff((-k.0, -k.1)) * t as f64
    }

    /// Univariate polynomial in ξ₁ from `Σ h_n e^{-inξ₁}` (filter-tap order).
    pub fn from_taps_x(taps: &[f64]) -> Self {
        Self::from_terms(
            taps.iter()
                .enumerate()
                .map(|(n, &h)| ((-(n as i64), 0), Complex64::new(h, 0.0))),
        )
    }

    /// Univariate polynomial in ξ₂ from `Σ h_n e^{-inξ₂}`.
    pub fn from_taps_y(taps: &[f64]) -> Self {
        Self::from_terms(
            taps.iter()
                .enumerate()
                .map(|(n, &h)| ((0, -(n as i64)), Complex64::new(h, 0.0))),
        )
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
    }

    pub fn coeff(&self, key: (i64, i64)) -> Complex64 {
        self.coeffs
            .get(&key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Stored `(key, coefficient)` pairs in lexicographic key order.
    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ |c|`, an upper bound for `sup |p|`.
    pub fn coefficient_mass(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, c| acc + c.norm())
    }

    /// `(Σ |c|²)^{1/2}`
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, c| acc + c.norm_sqr()).sqrt()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.norm() <= tol)
    }

    /// Coefficientwise equality within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).is_zero(tol)
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(j, k), c)| c * Complex64::from_polar(1.0, j as f64 * xi[0] + k as f64 * xi[1]))
            .sum()
    }

    /// `q(ξ) = p(s₁ξ₁, s₂ξ₂)`.
    pub fn substitute_scale(&self, s1: u32, s2: u32) -> Self {
        assert!(s1 >= 1 && s2 >= 1, "scale factors must be positive");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(j, k), &c)| ((j * s1 as i64, k * s2 as i64), c))
                .collect(),
        }
    }

    /// `q(ξ) = p(ξ + shift)`.
    pub fn translate(&self, shift: [f64; 2]) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&(j, k), &c)| {
            let phase = Complex64::from_polar(1.0, j as f64 * shift[0] + k as f64 * shift[1]);
            ((j, k), c * phase)
        }))
    }

    /// `conj(p(ξ))` as a polynomial: conjugate values, negate keys.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(j, k), c)| ((-j, -k), c.conj()))
                .collect(),
        }
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self::from_terms(self.coeffs.iter().map(|(&k, &c)| (k, c * s)))
    }

    /// True when the polynomial has a nonzero term with a nonzero exponent in
    /// `axis` (0 for ξ₁, 1 for ξ₂).
    pub fn depends_on(&self, axis: usize) -> bool {
        self.coeffs
            .keys()
            .any(|&(j, k)| if axis == 0 { j != 0 } else { k != 0 })
    }

    /// One term per line: `j k re im`, keys in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&(j, k), c) in &self.coeffs {
            out.push_str(&format!("{j} {k} {:e} {:e}\n", c.re, c.im));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected `j k re im`, got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            let j: i64 = fields[0].parse().map_err(|_| bad("j"))?;
            let k: i64 = fields[1].parse().map_err(|_| bad("k"))?;
            let re: f64 = fields[2].parse().map_err(|_| bad("re"))?;
            let im: f64 = fields[3].parse().map_err(|_| bad("im"))?;
            terms.push(((j, k), Complex64::new(re, im)));
        }
        Ok(Self::from_terms(terms))
    }
}

impl FromStr for TrigPoly2 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

impl fmt::Debug for TrigPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "TrigPoly2(0)");
        }
        write!(f, "TrigPoly2(")?;
        for (i, (&(j, k), c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)e^{{i({j},{k})}}", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl Add for &TrigPoly2 {
    type Output = TrigPoly2;
    fn add(self, rhs: &TrigPoly2) -> TrigPoly2 {
        TrigPoly2::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &TrigPoly2 {
    type Output = TrigPoly2;
    fn sub(self, rhs: &TrigPoly2) -> TrigPoly2 {
        TrigPoly2::from_terms(self.terms().chain(rhs.terms().map(|(k, c)| (k, -c))))
    }
}

impl Neg for &TrigPoly2 {
    type Output = TrigPoly2;
    fn neg(self) -> TrigPoly2 {
        self.scale(-1.0)
    }
}

impl Mul for &TrigPoly2 {
    type Output = TrigPoly2;
    fn mul(self, rhs: &TrigPoly2) -> TrigPoly2 {
        let mut acc: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for (&(j1, k1), a) in &self.coeffs {
            for (&(j2, k2), b) in &rhs.coeffs {
                *acc.entry((j1 + j2, k1 + k2)).or_default() += a * b;
            }
        }
        let mut p = TrigPoly2 { coeffs: acc };
        p.prune();
        p
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TrigPoly2 {
            type Output = TrigPoly2;
            fn $m(self, rhs: TrigPoly2) -> TrigPoly2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
