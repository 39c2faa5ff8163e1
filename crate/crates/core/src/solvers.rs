//! Gradient descent-ascent with arbitrary stepsize schedules, the slingshot
//! schedules, symmetric baselines, and direct matrix-polynomial application.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{cheb_roots, ChebyshevSpec, Polynomial};
use crate::problems::{apply_matrix_polynomial, QuadraticSaddleProblem};

/// Iterate norm above which a run is flagged as divergent and truncated.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Per-step stepsizes `(α_t, β_t)` for
/// `x_{t+1} = x_t − α_t ∇ₓf(z_t)`, `y_{t+1} = y_t + β_t ∇ᵧf(z_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSchedule {
    pairs: Vec<(f64, f64)>,
}

impl StepSchedule {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        StepSchedule { pairs }
    }

    pub fn empty() -> Self {
        StepSchedule { pairs: Vec::new() }
    }

    /// `α_t = β_t = s` for `T` steps: simultaneous GDA on `F`.
    pub fn constant_symmetric(s: f64, t: usize) -> Self {
        StepSchedule { pairs: vec![(s, s); t] }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True iff `α_t = β_t` for every step, i.e. the run is a polynomial in `JH`.
    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|(a, b)| a == b)
    }

    /// `Π (1 − α_t λ)` when every step has `β_t = −α_t`; each such step is
    /// `z ← z − α_t ∇f(z)`, so the run applies this polynomial of `H`.
    pub fn hessian_polynomial(&self) -> Option<Polynomial> {
        if !self.pairs.iter().all(|(a, b)| *b == -*a) {
            return None;
        }
        let mut p = Polynomial::one();
        for &(a, _) in &self.pairs {
            p = &p * &Polynomial::from_real(&[1.0, -a]);
        }
        Some(p)
    }

    /// `Π (1 − s λ)` when the schedule is symmetric with steps `s`; the run
    /// applies this polynomial of `JH`.
    pub fn saddle_polynomial(&self) -> Option<Polynomial> {
        if !self.is_symmetric() {
            return None;
        }
        let mut p = Polynomial::one();
        for &(a, _) in &self.pairs {
            p = &p * &Polynomial::from_real(&[1.0, -a]);
        }
        Some(p)
    }

    /// Reorders the `(h, −h)` / `(−h, h)` step pairs of a slingshot schedule.
    /// `order[k]` names the pair placed in slot `k`.
    pub fn permute_pairs(&self, order: &[usize]) -> Result<StepSchedule> {
        let n = self.pairs.len() / 2;
        if self.pairs.len() % 2 != 0 || order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: order.len() });
        }
        let mut seen = vec![false; n];
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &k in order {
            if k >= n || seen[k] {
                return Err(Error::InvalidParameter(format!("{order:?} is not a permutation")));
            }
            seen[k] = true;
            pairs.push(self.pairs[2 * k]);
            pairs.push(self.pairs[2 * k + 1]);
        }
        Ok(StepSchedule { pairs })
    }
}

/// Largest first, then alternately the smallest remaining and the largest
/// remaining, ending at the median.
fn inside_out(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(values.len());
    let (mut lo, mut hi) = (0usize, values.len());
    let mut take_large = true;
    while lo < hi {
        if take_large {
            out.push(values[lo]);
            lo += 1;
        } else {
            hi -= 1;
            out.push(values[hi]);
        }
        take_large = !take_large;
    }
    out
}

/// Slingshot schedule for strongly-convex-strongly-concave problems.
///
/// `h_t = r_t^{−1/2}` for the `N = T/2` roots `r_t` of the Chebyshev
/// polynomial on `[μ², L²]`; steps come as `(h, −h), (−h, h)`, so each
/// pair applies `I − h²H²`.
pub fn slingshot_scsc_schedule(t: usize, mu: f64, l: f64) -> Result<StepSchedule> {
    if t % 2 != 0 {
        return Err(Error::OddHorizon(t));
    }
    if !(mu > 0.0 && mu <= l && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    if t == 0 {
        return Ok(StepSchedule::empty());
    }
    let n = t / 2;
    let roots = if mu == l {
        vec![l * l; n]
    } else {
        cheb_roots(&ChebyshevSpec::new(n, mu * mu, l * l)?)
    };
    let hs = inside_out(roots.iter().map(|r| 1.0 / r.sqrt()).collect());
    Ok(StepSchedule {
        pairs: hs.iter().flat_map(|&h| [(h, -h), (-h, h)]).collect(),
    })
}

/// Slingshot schedule for convex-concave problems.
///
/// `α_t = −β_t = h_t` where `1/h_t` runs over the `T` nonzero roots
/// `L cos((2t+1)π/(2T+2))` of the degree-`T+1` Chebyshev polynomial on
/// `[−L, L]`, with each `±` pair adjacent.
pub fn slingshot_cc_schedule(t: usize, l: f64) -> Result<StepSchedule> {
    if t % 2 != 0 {
        return Err(Error::OddHorizon(t));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    let rhos: Vec<f64> = (0..t / 2)
        .map(|k| l * ((2 * k + 1) as f64 * PI / (2 * t + 2) as f64).cos())
        .collect();
    let hs = inside_out(rhos.iter().map(|r| 1.0 / r).collect());
    Ok(StepSchedule {
        pairs: hs.iter().flat_map(|&h| [(h, -h), (-h, h)]).collect(),
    })
}

/// Iterates and diagnostics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<DVector<f64>>,
    pub dist_to_opt: Vec<f64>,
    pub grad_norm: Vec<f64>,
    /// Set when an iterate left the finite range or exceeded
    /// [`DIVERGENCE_THRESHOLD`]; the run stops at that iterate.
    pub diverged: bool,
}

impl Trajectory {
    fn start(problem: &QuadraticSaddleProblem, z0: DVector<f64>) -> Result<Self> {
        let mut tr = Trajectory {
            iterates: Vec::new(),
            dist_to_opt: Vec::new(),
            grad_norm: Vec::new(),
            diverged: false,
        };
        tr.push(problem, z0)?;
        Ok(tr)
    }

    /// Records `z`; returns false once the run must stop.
    fn push(&mut self, problem: &QuadraticSaddleProblem, z: DVector<f64>) -> Result<bool> {
        let g = problem.gradient(&z)?;
        let d = (&z - problem.z_star()).norm();
        let ok = z.iter().all(|v| v.is_finite()) && z.norm() <= DIVERGENCE_THRESHOLD;
        self.dist_to_opt.push(d);
        self.grad_norm.push(g.norm());
        self.iterates.push(z);
        if !ok {
            self.diverged = true;
        }
        Ok(ok)
    }

    pub fn last(&self) -> &DVector<f64> {
        self.iterates.last().expect("trajectory holds z_0")
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    /// `(t, ‖z_t − z*‖, ‖∇f(z_t)‖)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.dist_to_opt
            .iter()
            .zip(&self.grad_norm)
            .enumerate()
            .map(|(t, (&d, &g))| (t, d, g))
    }
}

fn check_start(problem: &QuadraticSaddleProblem, z0: &DVector<f64>) -> Result<()> {
    if z0.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: z0.len() });
    }
    Ok(())
}

/// Runs GDA with the given schedule from `z0`.
pub fn run_gda(
    problem: &QuadraticSaddleProblem,
    schedule: &StepSchedule,
    z0: &DVector<f64>,
) -> Result<Trajectory> {
    check_start(problem, z0)?;
    let dx = problem.dx();
    let dy = problem.dy();
    let mut tr = Trajectory::start(problem, z0.clone())?;
    if tr.diverged {
        return Ok(tr);
    }
    for &(alpha, beta) in schedule.pairs() {
        let z = tr.last();
        let g = problem.gradient(z)?;
        let mut next = z.clone();
        next.rows_mut(0, dx).axpy(-alpha, &g.rows(0, dx), 1.0);
        next.rows_mut(dx, dy).axpy(beta, &g.rows(dx, dy), 1.0);
        if !tr.push(problem, next)? {
            break;
        }
    }
    Ok(tr)
}

/// Symmetric first-order baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetricBaseline {
    GdaConst,
    Extragradient,
    Ogda,
}

impl SymmetricBaseline {
    pub const ALL: [SymmetricBaseline; 3] = [
        SymmetricBaseline::GdaConst,
        SymmetricBaseline::Extragradient,
        SymmetricBaseline::Ogda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SymmetricBaseline::GdaConst => "gda_const",
            SymmetricBaseline::Extragradient => "extragradient",
            SymmetricBaseline::Ogda => "ogda",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// `μ/L²` for constant-step GDA, `1/(2L)` for the other two.
    pub fn default_step(self, mu: f64, l: f64) -> f64 {
        match self {
            SymmetricBaseline::GdaConst => mu / (l * l),
            SymmetricBaseline::Extragradient | SymmetricBaseline::Ogda => 0.5 / l,
        }
    }

    /// Operator evaluations per iteration.
    pub fn oracle_calls_per_step(self) -> usize {
        match self {
            SymmetricBaseline::Extragradient => 2,
            _ => 1,
        }
    }

    /// Residual polynomial `p_T` with `z_T − z* = p_T(JH)(z_0 − z*)`.
    pub fn polynomial(self, step: f64, t: usize) -> Polynomial {
        let s = step;
        match self {
            SymmetricBaseline::GdaConst => {
                let factor = Polynomial::from_real(&[1.0, -s]);
                (0..t).fold(Polynomial::one(), |p, _| &p * &factor)
            }
            SymmetricBaseline::Extragradient => {
                let factor = Polynomial::from_real(&[1.0, -s, s * s]);
                (0..t).fold(Polynomial::one(), |p, _| &p * &factor)
            }
            SymmetricBaseline::Ogda => {
                let lam = Polynomial::from_real(&[0.0, 1.0]);
                let mut prev = Polynomial::one();
                let mut cur = Polynomial::one();
                for _ in 0..t {
                    let lp = &lam * &cur;
                    let lq = &lam * &prev;
                    let next = &(&cur - &lp.scale(Complex64::new(2.0 * s, 0.0)))
                        + &lq.scale(Complex64::new(s, 0.0));
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }
}

/// Runs `T` iterations of a symmetric baseline with stepsize `step`.
pub fn run_symmetric_baseline(
    method: SymmetricBaseline,
    problem: &QuadraticSaddleProblem,
    step: f64,
    z0: &DVector<f64>,
    t: usize,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    check_start(problem, z0)?;
    let mut tr = Trajectory::start(problem, z0.clone())?;
    if tr.diverged {
        return Ok(tr);
    }
    let mut f_prev = problem.saddle_operator(z0)?;
    for _ in 0..t {
        let z = tr.last().clone();
        let f = problem.saddle_operator(&z)?;
        let next = match method {
            SymmetricBaseline::GdaConst => &z - &f * step,
            SymmetricBaseline::Extragradient => {
                let half = &z - &f * step;
                &z - problem.saddle_operator(&half)? * step
            }
            SymmetricBaseline::Ogda => &z - &f * (2.0 * step) + &f_prev * step,
        };
        f_prev = f;
        if !tr.push(problem, next)? {
            break;
        }
    }
    Ok(tr)
}

fn check_normalized(p: &Polynomial) -> Result<()> {
    let p0 = p.coeff(0);
    if (p0 - 1.0).norm() > 1e-12 {
        return Err(Error::NormalizationViolated(format!("p(0) = {p0}, expected 1")));
    }
    Ok(())
}

/// `z* + p(JH)(z0 − z*)`, the output of the symmetric method with residual
/// polynomial `p`.
pub fn apply_symmetric_polynomial(
    p: &Polynomial,
    problem: &QuadraticSaddleProblem,
    z0: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_normalized(p)?;
    check_start(problem, z0)?;
    let d = z0 - problem.z_star();
    Ok(problem.z_star() + apply_matrix_polynomial(p, &problem.saddle_matrix(), &d)?)
}

/// `z* + p(H)(z0 − z*)` by direct matrix arithmetic; the reference the
/// asymmetric runs are checked against.
pub fn hessian_polynomial_action(
    p: &Polynomial,
    problem: &QuadraticSaddleProblem,
    z0: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_start(problem, z0)?;
    let d = z0 - problem.z_star();
    Ok(problem.z_star() + apply_matrix_polynomial(p, &problem.hessian(), &d)?)
}

/// Roots of `p` from the eigenvalues of its companion matrix.
pub fn polynomial_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    if !p.is_real(1e-12) {
        return Err(Error::ComplexCoefficients);
    }
    let d = p.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = p.coeff(d).re;
    let mut companion = DMatrix::zeros(d, d);
    for k in 0..d {
        companion[(0, k)] = -p.coeff(d - 1 - k).re / lead;
    }
    for k in 1..d {
        companion[(k, k - 1)] = 1.0;
    }
    Ok(companion.complex_eigenvalues().iter().copied().collect())
}

/// A real step or a fused conjugate pair of the asymmetric realization.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    /// `1 − λ/r`
    Real(f64),
    /// `1 − aλ + bλ²`
    Pair { a: f64, b: f64 },
}

fn pair_roots(roots: &[Complex64]) -> Result<Vec<Factor>> {
    let mut used = vec![false; roots.len()];
    let mut factors = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let r = roots[i];
        if r.norm() == 0.0 {
            return Err(Error::ZeroRoot);
        }
        used[i] = true;
        let tol = 1e-9 * r.norm();
        if r.im.abs() <= tol {
            factors.push(Factor::Real(r.re));
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j])
            .min_by(|&j, &k| {
                (roots[j] - r.conj()).norm().total_cmp(&(roots[k] - r.conj()).norm())
            })
            .filter(|&j| (roots[j] - r.conj()).norm() <= 1e-6 * r.norm());
        let Some(j) = partner else {
            return Err(Error::UnpairedRoot { re: r.re, im: r.im });
        };
        used[j] = true;
        factors.push(Factor::Pair { a: 2.0 * r.re / r.norm_sqr(), b: 1.0 / r.norm_sqr() });
    }
    Ok(factors)
}

/// Runs the GDA realization of `Π (1 − λ/r_k)` in `H`: each real root is the
/// step `z ← z − ∇f(z)/r`, and each conjugate pair is fused into the real
/// factor `1 − aλ + bλ²`, computed from `∇f(z)` and `∇f(z + ∇f(z))`.
pub fn apply_asymmetric_roots(
    roots: &[Complex64],
    problem: &QuadraticSaddleProblem,
    z0: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_start(problem, z0)?;
    let factors = pair_roots(roots)?;
    let mut z = z0.clone();
    for factor in factors {
        let g = problem.gradient(&z)?;
        z = match factor {
            Factor::Real(r) => &z - &g / r,
            Factor::Pair { a, b } => {
                let hg = problem.gradient(&(&z + &g))? - &g;
                &z - &g * a + hg * b
            }
        };
    }
    Ok(z)
}

/// [`apply_asymmetric_roots`] with the roots of `p`, taken in inside-out
/// order of modulus.
pub fn apply_asymmetric_polynomial(
    p: &Polynomial,
    problem: &QuadraticSaddleProblem,
    z0: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_normalized(p)?;
    let mut roots = polynomial_roots(p)?;
    roots.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    let n = roots.len();
    let mut ordered = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0, n);
    let mut front = true;
    while lo < hi {
        if front {
            ordered.push(roots[lo]);
            lo += 1;
        } else {
            hi -= 1;
            ordered.push(roots[hi]);
        }
        front = !front;
    }
    apply_asymmetric_roots(&ordered, problem, z0)
}
