//! Weighted discrete minimax: `min max_i ω_i |r(z_i)|` over polynomials of
//! degree at most `d` with `r(0) = 1`.
//!
//! A few Lawson reweighting sweeps give a starting point, then a log-barrier
//! Newton method solves the equivalent second-order cone program
//! `min t s.t. ω_i |r(z_i)| ≤ t` to high accuracy. The barrier's dual
//! weights give a weak-duality lower bound: for any probability weights
//! `w`, `min_r Σ w_i ω_i² |r(z_i)|²` is at most the squared optimum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::ArnoldiBasis;
use crate::error::{Error, Result};

/// Newton steps allowed across all barrier stages.
pub const MAX_NEWTON_STEPS: usize = 500;
/// Barrier stages (each multiplies the barrier weight by 20).
pub const MAX_STAGES: usize = 200;
const LAWSON_SWEEPS: usize = 40;
const STAGE_FACTOR: f64 = 20.0;

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub basis: ArnoldiBasis,
    /// Coefficients of `r` in the Arnoldi basis.
    pub coeffs: Vec<Complex64>,
    /// `max_i ω_i |r(z_i)|`.
    pub value: f64,
    /// Weak-duality lower bound on the optimum.
    pub lower: f64,
    /// Probability weights on the points that certify `lower`.
    pub dual_weights: Vec<f64>,
    pub newton_steps: usize,
    pub converged: bool,
}

/// Real stacked form of the residual `ρ(x) = ω ⊙ (Q (c0 + N y(x)))`, with
/// `Re ρ = b_re + M_re x` and `Im ρ = b_im + M_im x`.
struct Stacked {
    mre: DMatrix<f64>,
    mim: DMatrix<f64>,
    bre: DVector<f64>,
    bim: DVector<f64>,
    null: DMatrix<Complex64>,
    c0: DVector<Complex64>,
    real: bool,
}

/// Orthonormal basis of `{c : Σ e_k c_k = 0}` and the minimum-norm solution
/// of `Σ e_k c_k = 1`.
fn constraint_space(e: &[Complex64], real: bool) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let n = e.len();
    let norm2: f64 = e.iter().map(|v| v.norm_sqr()).sum();
    let u = DVector::from_iterator(n, e.iter().map(|v| v.conj() / norm2.sqrt()));
    let c0 = &u / Complex64::new(norm2.sqrt(), 0.0);
    let mut frame: Vec<DVector<Complex64>> = vec![u];
    for j in 0..n {
        if frame.len() == n {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(n);
        v[j] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for f in &frame {
                let dot = f.dotc(&v);
                v -= f * dot;
            }
        }
        let nv = v.norm();
        if nv > 0.5 {
            frame.push(v / Complex64::new(nv, 0.0));
        }
    }
    let mut null = DMatrix::<Complex64>::zeros(n, n - 1);
    for (k, f) in frame.iter().skip(1).enumerate() {
        null.set_column(k, f);
    }
    if real {
        null.apply(|z| z.im = 0.0);
    }
    (null, c0)
}

impl Stacked {
    fn new(basis: &ArnoldiBasis, omega: &[f64]) -> Self {
        let real = basis.is_real();
        let (v0, _) = basis.eval(Complex64::new(0.0, 0.0));
        let (null, c0) = constraint_space(&v0, real);
        let q = basis.values();
        let mut g = q * &null;
        let mut b = q * &c0;
        for (i, &w) in omega.iter().enumerate() {
            g.row_mut(i).scale_mut(w);
            b[i] *= w;
        }
        let (m, d) = g.shape();
        let (mre, mim) = if real {
            (g.map(|z| z.re), g.map(|z| z.im))
        } else {
            let mut mre = DMatrix::zeros(m, 2 * d);
            let mut mim = DMatrix::zeros(m, 2 * d);
            for i in 0..m {
                for k in 0..d {
                    let z = g[(i, k)];
                    mre[(i, k)] = z.re;
                    mre[(i, k + d)] = -z.im;
                    mim[(i, k)] = z.im;
                    mim[(i, k + d)] = z.re;
                }
            }
            (mre, mim)
        };
        Stacked { mre, mim, bre: b.map(|z| z.re), bim: b.map(|z| z.im), null, c0, real }
    }

    fn m(&self) -> usize {
        self.bre.len()
    }

    fn k(&self) -> usize {
        self.mre.ncols()
    }

    fn residual(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (&self.bre + &self.mre * x, &self.bim + &self.mim * x)
    }

    fn max_abs(&self, x: &DVector<f64>) -> f64 {
        let (rr, ri) = self.residual(x);
        rr.iter().zip(ri.iter()).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
    }

    /// Minimizer of `Σ w_i |ρ_i(x)|²` and the minimum.
    fn weighted_lsq(&self, w: &[f64]) -> Result<(DVector<f64>, f64)> {
        let (m, k) = (self.m(), self.k());
        let active: Vec<usize> = (0..m).filter(|&i| w[i] > 0.0).collect();
        let rows = 2 * active.len();
        let mut a = DMatrix::zeros(rows, k);
        let mut rhs = DVector::zeros(rows);
        for (r, &i) in active.iter().enumerate() {
            let s = w[i].sqrt();
            for j in 0..k {
                a[(2 * r, j)] = s * self.mre[(i, j)];
                a[(2 * r + 1, j)] = s * self.mim[(i, j)];
            }
            rhs[2 * r] = -s * self.bre[i];
            rhs[2 * r + 1] = -s * self.bim[i];
        }
        let x = if k == 0 {
            DVector::zeros(0)
        } else {
            a.svd(true, true)
                .solve(&rhs, 1e-14)
                .map_err(|e| Error::Numerical(e.to_string()))?
        };
        let (rr, ri) = self.residual(&x);
        let val: f64 = (0..m).map(|i| w[i] * (rr[i] * rr[i] + ri[i] * ri[i])).sum();
        Ok((x, val.max(0.0)))
    }

    fn coefficients(&self, x: &DVector<f64>) -> Vec<Complex64> {
        let d = self.null.ncols();
        let y = if self.real {
            DVector::from_iterator(d, x.iter().map(|&v| Complex64::new(v, 0.0)))
        } else {
            DVector::from_iterator(d, (0..d).map(|k| Complex64::new(x[k], x[k + d])))
        };
        (&self.c0 + &self.null * y).iter().copied().collect()
    }
}

fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|v| *v /= total);
    }
}

/// Barrier objective `τ t − Σ log(t² − |ρ_i|²)`, or `None` outside the domain.
fn barrier(st: &Stacked, x: &DVector<f64>, t: f64, tau: f64) -> Option<f64> {
    if !(t > 0.0) {
        return None;
    }
    let (rr, ri) = st.residual(x);
    let mut acc = tau * t;
    for i in 0..st.m() {
        let s = t * t - rr[i] * rr[i] - ri[i] * ri[i];
        if !(s > 0.0) {
            return None;
        }
        acc -= s.ln();
    }
    Some(acc)
}

fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    if let Some(ch) = h.clone().cholesky() {
        return Ok(-ch.solve(g));
    }
    let mut ridged = h.clone();
    for i in 0..ridged.nrows() {
        ridged[(i, i)] += 1e-12 * scale;
    }
    if let Some(ch) = ridged.cholesky() {
        return Ok(-ch.solve(g));
    }
    let x = h
        .svd(true, true)
        .solve(g, 1e-14 * scale)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(-x)
}

/// Solves the weighted problem on `points` (all nonzero).
pub(crate) fn solve_weighted(
    points: &[Complex64],
    omega: &[f64],
    degree: usize,
    real: bool,
    tol: f64,
) -> Result<Solution> {
    let basis = ArnoldiBasis::new(points, degree, real)?;
    let st = Stacked::new(&basis, omega);
    let m = st.m();
    let k = st.k();

    // Lawson sweeps.
    let mut w = vec![1.0 / m as f64; m];
    let mut best_x = DVector::zeros(k);
    let mut best_val = st.max_abs(&best_x);
    let mut best_lower = 0.0f64;
    let mut best_w = w.clone();
    for _ in 0..LAWSON_SWEEPS {
        let (x, lsq) = st.weighted_lsq(&w)?;
        if lsq.sqrt() > best_lower {
            best_lower = lsq.sqrt();
            best_w = w.clone();
        }
        let (rr, ri) = st.residual(&x);
        let abs: Vec<f64> = (0..m).map(|i| rr[i].hypot(ri[i])).collect();
        let val = abs.iter().copied().fold(0.0, f64::max);
        if val < best_val {
            best_val = val;
            best_x = x;
        }
        if val <= f64::MIN_POSITIVE || best_val - best_lower <= tol * best_val {
            break;
        }
        for i in 0..m {
            w[i] *= abs[i];
        }
        normalize(&mut w);
    }

    let mut newton_steps = 0;
    if best_val > f64::MIN_POSITIVE && best_val - best_lower > tol * best_val && k > 0 {
        let mut x = best_x.clone();
        let mut t = 1.01 * best_val;
        let mut tau = 2.0 * m as f64 / t;
        'stages: for _ in 0..MAX_STAGES {
            loop {
                if newton_steps >= MAX_NEWTON_STEPS {
                    break 'stages;
                }
                let (rr, ri) = st.residual(&x);
                let s: Vec<f64> = (0..m).map(|i| t * t - rr[i] * rr[i] - ri[i] * ri[i]).collect();
                // Gradient and Hessian in (x, t).
                let mut grad = DVector::zeros(k + 1);
                let mut a = DMatrix::zeros(m, k + 1);
                let mut pre = st.mre.clone();
                let mut pim = st.mim.clone();
                let mut htt = 0.0;
                grad[k] = tau;
                for i in 0..m {
                    let inv = 1.0 / s[i];
                    for j in 0..k {
                        let dq = 2.0 * (rr[i] * st.mre[(i, j)] + ri[i] * st.mim[(i, j)]);
                        grad[j] += dq * inv;
                        a[(i, j)] = -dq * inv;
                    }
                    a[(i, k)] = 2.0 * t * inv;
                    grad[k] -= 2.0 * t * inv;
                    htt -= 2.0 * inv;
                    let root = (2.0 * inv).sqrt();
                    pre.row_mut(i).scale_mut(root);
                    pim.row_mut(i).scale_mut(root);
                }
                let mut h = a.tr_mul(&a);
                let hxx = pre.tr_mul(&pre) + pim.tr_mul(&pim);
                let mut top = h.view_mut((0, 0), (k, k));
                top += &hxx;
                h[(k, k)] += htt;
                let step = newton_direction(h, &grad)?;
                newton_steps += 1;
                let decrement = -grad.dot(&step);
                if !(decrement > 1e-6) {
                    break;
                }
                let f0 = barrier(&st, &x, t, tau).ok_or_else(|| {
                    Error::Numerical("barrier iterate left the domain".into())
                })?;
                let mut alpha = 1.0;
                let accepted = loop {
                    let xn = &x + step.rows(0, k) * alpha;
                    let tn = t + alpha * step[k];
                    if let Some(f) = barrier(&st, &xn, tn, tau) {
                        if f <= f0 - 0.25 * alpha * decrement {
                            break Some((xn, tn));
                        }
                    }
                    alpha *= 0.5;
                    if alpha < 1e-20 {
                        break None;
                    }
                };
                let Some((xn, tn)) = accepted else {
                    break;
                };
                let stalled = alpha < 1e-6;
                x = xn;
                t = tn;
                let val = st.max_abs(&x);
                if val < best_val {
                    best_val = val;
                    best_x = x.clone();
                }
                if stalled {
                    break;
                }
            }
            // Dual weights from the current centre.
            let (rr, ri) = st.residual(&x);
            let mut wd: Vec<f64> =
                (0..m).map(|i| 1.0 / (t * t - rr[i] * rr[i] - ri[i] * ri[i])).collect();
            normalize(&mut wd);
            let (_, lsq) = st.weighted_lsq(&wd)?;
            if lsq.sqrt() > best_lower {
                best_lower = lsq.sqrt();
                best_w = wd;
            }
            if best_val - best_lower <= tol * best_val || 2.0 * m as f64 / tau < 0.1 * tol * t {
                break;
            }
            tau *= STAGE_FACTOR;
        }
    }

    let coeffs = st.coefficients(&best_x);
    let best_lower = best_lower.min(best_val);
    Ok(Solution {
        basis,
        coeffs,
        value: best_val,
        lower: best_lower,
        dual_weights: best_w,
        newton_steps,
        converged: best_val - best_lower <= tol * best_val,
    })
}

/// Minimum of `Σ w_i ω_i² |r(z_i)|²` over `r(0) = 1`, `deg r ≤ d`.
pub(crate) fn weighted_least_squares(
    points: &[Complex64],
    omega: &[f64],
    weights: &[f64],
    degree: usize,
    real: bool,
) -> Result<f64> {
    let basis = ArnoldiBasis::new(points, degree, real)?;
    let st = Stacked::new(&basis, omega);
    Ok(st.weighted_lsq(weights)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn interval(a: f64, b: f64, m: usize) -> Vec<Complex64> {
        (0..m).map(|k| c(a + (b - a) * k as f64 / (m - 1) as f64, 0.0)).collect()
    }

    #[test]
    fn constraint_space_is_orthonormal() {
        let e = vec![c(1.0, 0.0), c(0.3, -0.2), c(-2.0, 0.5)];
        let (null, c0) = constraint_space(&e, false);
        let ev = DVector::from_vec(e.clone());
        assert!((ev.transpose() * &c0)[0].re - 1.0 < 1e-14);
        assert!((ev.transpose() * &null).norm() < 1e-14);
        assert!((null.adjoint() * &null - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn single_interval_matches_chebyshev() {
        // min max_{[1,2]} |r| with r(0) = 1, deg 2: 1/|T_2(−3)| = 1/17.
        let pts = interval(1.0, 2.0, 801);
        let omega = vec![1.0; pts.len()];
        let sol = solve_weighted(&pts, &omega, 2, true, 1e-8).unwrap();
        assert!((sol.value - 1.0 / 17.0).abs() < 1e-6, "{}", sol.value);
        assert!(sol.lower <= sol.value && sol.converged);
        let wsum: f64 = sol.dual_weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_mode_agrees_with_real_mode_on_symmetric_points() {
        let pts: Vec<Complex64> = (0..200)
            .map(|k| Complex64::from_polar(1.0, -1.2 + 2.4 * k as f64 / 199.0) + 0.5)
            .collect();
        let omega = vec![1.0; pts.len()];
        let a = solve_weighted(&pts, &omega, 4, true, 1e-8).unwrap();
        let b = solve_weighted(&pts, &omega, 4, false, 1e-8).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * a.value);
    }

    #[test]
    fn lower_bound_never_exceeds_value() {
        for deg in 1..6 {
            let pts = interval(0.5, 3.0, 300);
            let omega: Vec<f64> = pts.iter().map(|z| z.norm()).collect();
            let sol = solve_weighted(&pts, &omega, deg, true, 1e-7).unwrap();
            assert!(sol.lower <= sol.value);
            let check = weighted_least_squares(&pts, &omega, &sol.dual_weights, deg, true).unwrap();
            assert!(check.sqrt() <= sol.value * (1.0 + 1e-9));
        }
    }
}
