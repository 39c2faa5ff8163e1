//! Discrete orthonormal polynomial basis on a point set (Vandermonde with
//! Arnoldi). Keeps the least-squares problems well conditioned at degrees
//! where the monomial Vandermonde matrix is hopeless.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `q_0 = 1` and `q_{k+1} = (λ q_k − Σ_{j≤k} h_{jk} q_j) / h_{k+1,k}`, with
/// the `q_k` orthonormal under the uniform mean over the points.
#[derive(Clone, Debug)]
pub struct ArnoldiBasis {
    /// `m × (n+1)` values of `q_k` at the points.
    values: DMatrix<Complex64>,
    /// `(n+1) × n` recurrence coefficients.
    h: DMatrix<Complex64>,
    real: bool,
}

impl ArnoldiBasis {
    /// Builds the basis up to degree `n`. With `real`, the recurrence
    /// coefficients are projected to real numbers, which is exact when the
    /// points are closed under conjugation, and the basis polynomials then
    /// have real coefficients.
    pub fn new(points: &[Complex64], n: usize, real: bool) -> Result<Self> {
        let m = points.len();
        if m < n + 1 {
            return Err(Error::MeshTooSmall { points: m, degree: n });
        }
        let mf = m as f64;
        let mut q = DMatrix::<Complex64>::zeros(m, n + 1);
        let mut h = DMatrix::<Complex64>::zeros(n + 1, n);
        q.column_mut(0).fill(Complex64::new(1.0, 0.0));
        for k in 0..n {
            let mut v: Vec<Complex64> = (0..m).map(|i| points[i] * q[(i, k)]).collect();
            // Two passes of classical Gram-Schmidt.
            for _ in 0..2 {
                for j in 0..=k {
                    let mut dot = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        dot += q[(i, j)].conj() * v[i];
                    }
                    let mut coef = dot / mf;
                    if real {
                        coef.im = 0.0;
                    }
                    h[(j, k)] += coef;
                    for i in 0..m {
                        v[i] -= coef * q[(i, j)];
                    }
                }
            }
            let norm = (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / mf).sqrt();
            if !(norm > 1e-13 * (1.0 + h.column(k).norm())) {
                return Err(Error::MeshTooSmall { points: m, degree: n });
            }
            h[(k + 1, k)] = Complex64::new(norm, 0.0);
            for i in 0..m {
                q[(i, k + 1)] = v[i] / norm;
            }
        }
        Ok(ArnoldiBasis { values: q, h, real })
    }

    pub fn degree(&self) -> usize {
        self.h.ncols()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `m × (n+1)` matrix of basis values at the construction points.
    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    /// Basis values and derivatives at an arbitrary point.
    pub fn eval(&self, x: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.degree();
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
        v[0] = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let mut s = x * v[k];
            let mut ds = v[k] + x * d[k];
            for j in 0..=k {
                s -= self.h[(j, k)] * v[j];
                ds -= self.h[(j, k)] * d[j];
            }
            v[k + 1] = s / self.h[(k + 1, k)];
            d[k + 1] = ds / self.h[(k + 1, k)];
        }
        (v, d)
    }

    /// Value of `Σ c_k q_k` at `x`.
    pub fn eval_combination(&self, c: &[Complex64], x: Complex64) -> Complex64 {
        let (v, _) = self.eval(x);
        v.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    /// Monomial coefficients of `Σ c_k q_k`.
    pub fn to_monomial(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.degree();
        let zero = Complex64::new(0.0, 0.0);
        let mut basis: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
        for k in 0..n {
            let mut s = vec![zero; k + 2];
            for (t, &a) in basis[k].iter().enumerate() {
                s[t + 1] += a;
            }
            for j in 0..=k {
                for (t, &a) in basis[j].iter().enumerate() {
                    s[t] -= self.h[(j, k)] * a;
                }
            }
            let hk = self.h[(k + 1, k)];
            basis.push(s.into_iter().map(|a| a / hk).collect());
        }
        let mut out = vec![zero; n + 1];
        for (k, poly) in basis.iter().enumerate() {
            for (t, &a) in poly.iter().enumerate() {
                out[t] += c[k] * a;
            }
        }
        if self.real {
            for a in &mut out {
                a.im = 0.0;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect()
    }

    #[test]
    fn orthonormal_on_points() {
        let pts: Vec<Complex64> = (0..200).map(|k| c(-1.0 + 2.0 * k as f64 / 199.0, 0.0)).collect();
        let b = ArnoldiBasis::new(&pts, 20, true).unwrap();
        let g = (b.values().adjoint() * b.values()).map(|z| z / 200.0);
        assert!((g - DMatrix::identity(21, 21)).norm() < 1e-10);
    }

    #[test]
    fn roots_of_unity_give_monomials() {
        // On the m-th roots of unity the monomials are already orthonormal.
        let b = ArnoldiBasis::new(&circle(64), 6, false).unwrap();
        let mono = b.to_monomial(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        for (t, a) in mono.iter().enumerate() {
            let expected = if t == 3 { 1.0 } else { 0.0 };
            assert!((a.norm() - expected).abs() < 1e-12, "t={t}: {a}");
        }
    }

    #[test]
    fn eval_matches_stored_values_and_monomials() {
        let pts: Vec<Complex64> = circle(40).into_iter().map(|z| z * 0.7 + 0.4).collect();
        let b = ArnoldiBasis::new(&pts, 9, false).unwrap();
        let coeffs: Vec<Complex64> = (0..10).map(|k| c(1.0 / (k + 1) as f64, 0.3 * k as f64)).collect();
        let mono = b.to_monomial(&coeffs);
        for (i, &z) in pts.iter().enumerate().step_by(7) {
            let (v, _) = b.eval(z);
            for k in 0..10 {
                assert!((v[k] - b.values()[(i, k)]).norm() < 1e-10);
            }
            let direct = b.eval_combination(&coeffs, z);
            let horner = mono.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
            assert!((direct - horner).norm() < 1e-9 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let pts = circle(50);
        let b = ArnoldiBasis::new(&pts, 8, true).unwrap();
        let x = c(0.2, 0.1);
        let h = 1e-6;
        let (_, d) = b.eval(x);
        let (vp, _) = b.eval(x + h);
        let (vm, _) = b.eval(x - h);
        for k in 0..=8 {
            let fd = (vp[k] - vm[k]) / (2.0 * h);
            assert!((fd - d[k]).norm() < 1e-6 * d[k].norm().max(1.0));
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            ArnoldiBasis::new(&[c(1.0, 0.0), c(2.0, 0.0)], 2, true),
            Err(Error::MeshTooSmall { .. })
        ));
    }
}
