//! Complex polynomials in the monomial basis, the normalization classes used
//! by the rate analysis, and Chebyshev polynomials on real intervals.
//!
//! The monomial basis is used up to degree 32. The extremal solver keeps its
//! own orthogonal basis on the mesh and converts to this representation only
//! for export.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polynomial with complex coefficients; `coeffs[t]` multiplies `λ^t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
    degree_bound: usize,
}

/// Normalization classes for the residual polynomial of an iterative method.
///
/// `P(T)`: degree at most `T` with `p(0) = 1`.
/// `Q(n)`: degree at most `n` with `q(0) = 0` and `q'(0) = 1`. The rate
/// analysis of `T` iterations uses `Q(T + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizationClass {
    P(usize),
    Q(usize),
}

impl NormalizationClass {
    pub fn degree_bound(self) -> usize {
        match self {
            NormalizationClass::P(t) | NormalizationClass::Q(t) => t,
        }
    }

    /// Largest number of free (nonzero) roots a member may carry.
    pub fn root_budget(self) -> usize {
        match self {
            NormalizationClass::P(t) => t,
            NormalizationClass::Q(n) => n.saturating_sub(1),
        }
    }
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>, degree_bound: usize) -> Result<Self> {
        if coeffs.len() > degree_bound + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients exceed degree bound {}",
                coeffs.len(),
                degree_bound
            )));
        }
        Ok(Polynomial {
            coeffs,
            degree_bound,
        })
    }

    /// Polynomial whose degree bound equals its coefficient count minus one.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let degree_bound = coeffs.len().saturating_sub(1);
        Polynomial {
            coeffs,
            degree_bound,
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Index of the highest nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > 0.0)
            .unwrap_or(0)
    }

    /// Coefficient of `λ^t`, zero beyond the stored length.
    pub fn coeff(&self, t: usize) -> Complex64 {
        self.coeffs.get(t).copied().unwrap_or_default()
    }

    /// Horner evaluation.
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * lambda + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(t, &c)| c * t as f64)
            .collect();
        let coeffs = if coeffs.is_empty() {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            coeffs
        };
        Polynomial {
            coeffs,
            degree_bound: self.degree_bound.saturating_sub(1),
        }
    }

    /// True when every imaginary part is at most `tol` times the largest
    /// coefficient modulus.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    /// Whether the polynomial belongs to `class` up to `tol`.
    pub fn satisfies(&self, class: NormalizationClass, tol: f64) -> bool {
        if self.degree() > class.degree_bound() {
            return false;
        }
        match class {
            NormalizationClass::P(_) => (self.coeff(0) - 1.0).norm() <= tol,
            NormalizationClass::Q(_) => {
                self.coeff(0).norm() <= tol && (self.coeff(1) - 1.0).norm() <= tol
            }
        }
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            degree_bound: self.degree_bound,
        }
    }

    /// Multiplies by `λ`.
    pub fn shift(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial {
            coeffs,
            degree_bound: self.degree_bound + 1,
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|t| self.coeff(t) + rhs.coeff(t)).collect();
        Polynomial {
            coeffs,
            degree_bound: self.degree_bound.max(rhs.degree_bound),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|t| self.coeff(t) - rhs.coeff(t)).collect();
        Polynomial {
            coeffs,
            degree_bound: self.degree_bound.max(rhs.degree_bound),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial {
            coeffs,
            degree_bound: self.degree_bound + rhs.degree_bound,
        }
    }
}

/// Builds the member of `class` with the given nonzero roots.
///
/// `P(T)` gives `Π (1 − λ/r_k)`; `Q(n)` gives `λ · Π (1 − λ/r_k)`, so the
/// root at zero and `q'(0) = 1` come for free.
pub fn from_roots(roots: &[Complex64], class: NormalizationClass) -> Result<Polynomial> {
    if roots.len() > class.root_budget() {
        return Err(Error::TooManyRoots {
            count: roots.len(),
            budget: class.root_budget(),
        });
    }
    if roots.iter().any(|r| r.norm() == 0.0) {
        return Err(Error::ZeroRoot);
    }
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let inv = -1.0 / r;
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (t, &c) in coeffs.iter().enumerate() {
            next[t] += c;
            next[t + 1] += c * inv;
        }
        coeffs = next;
    }
    let p = Polynomial::new(coeffs, class.root_budget())?;
    Ok(match class {
        NormalizationClass::P(t) => Polynomial {
            degree_bound: t,
            ..p
        },
        NormalizationClass::Q(n) => Polynomial {
            degree_bound: n,
            ..p.shift()
        },
    })
}

/// Chebyshev polynomial of the first kind of degree `N`, affinely mapped to
/// `[a, b]` so that it equioscillates between ±1 there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevSpec {
    degree: usize,
    a: f64,
    b: f64,
}

impl ChebyshevSpec {
    pub fn new(degree: usize, a: f64, b: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("Chebyshev degree must be >= 1".into()));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval [{a}, {b}] must satisfy a < b"
            )));
        }
        Ok(ChebyshevSpec { degree, a, b })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Roots in descending order.
    pub fn roots(&self) -> Vec<f64> {
        let mid = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.b - self.a);
        let n = self.degree as f64;
        (0..self.degree)
            .map(|t| mid + half * ((2 * t + 1) as f64 * PI / (2.0 * n)).cos())
            .collect()
    }

    /// Value at `x`: the cos/arccos form inside `[a, b]`, cosh/arccosh outside.
    pub fn eval(&self, x: f64) -> f64 {
        let y = self.to_reference(x);
        let n = self.degree as f64;
        if y.abs() <= 1.0 {
            (n * y.acos()).cos()
        } else {
            let magnitude = (n * y.abs().acosh()).cosh();
            if y < 0.0 && self.degree % 2 == 1 {
                -magnitude
            } else {
                magnitude
            }
        }
    }
}

pub fn cheb_roots(spec: &ChebyshevSpec) -> Vec<f64> {
    spec.roots()
}

fn check_scsc_params(n: usize, mu: f64, l: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    if !(mu > 0.0 && mu <= l && l.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < mu <= L, got mu = {mu}, L = {l}"
        )));
    }
    Ok(())
}

/// Natural log of `|T_N^{[μ², L²]}(0)|`.
///
/// With `κ = L/μ` this is `ln cosh(N · ln((κ+1)/(κ−1)))`, evaluated without
/// forming the powers `(κ ± 1)^{2N}`. Returns `+∞` when `μ = L`.
pub fn ln_cheb_at_zero_scsc(n: usize, mu: f64, l: f64) -> Result<f64> {
    check_scsc_params(n, mu, l)?;
    let kappa = l / mu;
    if kappa == 1.0 {
        return Ok(f64::INFINITY);
    }
    let a = n as f64 * ((kappa + 1.0) / (kappa - 1.0)).ln();
    Ok(a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2)
}

/// `|T_N^{[μ², L²]}(0)| = ((κ+1)^{2N} + (κ−1)^{2N}) / (2 (κ+1)^N (κ−1)^N)`.
///
/// Only the magnitude is returned; the signed value is `(−1)^N` times it,
/// because 0 lies to the left of `[μ², L²]`. `μ = L` returns `+∞`, meaning
/// the slingshot schedule converges exactly in finitely many steps.
pub fn cheb_at_zero_scsc(n: usize, mu: f64, l: f64) -> Result<f64> {
    Ok(ln_cheb_at_zero_scsc(n, mu, l)?.exp())
}
