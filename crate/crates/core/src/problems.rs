//! Quadratic saddle problems `f(z) = ½ (z − z*)ᵀ H (z − z*)` with
//! `H = [[A, B], [Bᵀ, −C]]`, their spectral sets, and instance generators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Tolerance used for spectral containment checks.
pub const EIGEN_TOL: f64 = 1e-8;

/// Unconstrained quadratic min-max problem with certified `μ` and `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSaddleProblem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    z_star: DVector<f64>,
    mu: f64,
    l: f64,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().min()
}

/// Builds and certifies a problem. `A` and `C` are replaced by their
/// symmetric parts.
pub fn make_problem(
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    z_star: DVector<f64>,
) -> Result<QuadraticSaddleProblem> {
    let dx = a.nrows();
    let dy = c.nrows();
    if a.ncols() != dx {
        return Err(Error::DimensionMismatch { expected: dx, found: a.ncols() });
    }
    if c.ncols() != dy {
        return Err(Error::DimensionMismatch { expected: dy, found: c.ncols() });
    }
    if b.nrows() != dx {
        return Err(Error::DimensionMismatch { expected: dx, found: b.nrows() });
    }
    if b.ncols() != dy {
        return Err(Error::DimensionMismatch { expected: dy, found: b.ncols() });
    }
    if z_star.len() != dx + dy {
        return Err(Error::DimensionMismatch { expected: dx + dy, found: z_star.len() });
    }
    if dx + dy == 0 {
        return Err(Error::InvalidParameter("empty problem".into()));
    }
    let a = symmetrize(&a);
    let c = symmetrize(&c);
    let min_a = min_eigenvalue(&a);
    let min_c = min_eigenvalue(&c);
    let scale = a.amax().max(c.amax()).max(1.0);
    if min_a < -1e-12 * scale {
        return Err(Error::NotConvexConcave { block: "A", min_eigenvalue: min_a });
    }
    if min_c < -1e-12 * scale {
        return Err(Error::NotConvexConcave { block: "C", min_eigenvalue: min_c });
    }
    let mu = min_a.min(min_c).max(0.0);
    let h = assemble_hessian(&a, &b, &c);
    let l = h.symmetric_eigenvalues().amax();
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("H vanishes; L must be positive".into()));
    }
    Ok(QuadraticSaddleProblem { a, b, c, z_star, mu, l })
}

fn assemble_hessian(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let dx = a.nrows();
    let dy = c.nrows();
    let mut h = DMatrix::zeros(dx + dy, dx + dy);
    h.view_mut((0, 0), (dx, dx)).copy_from(a);
    h.view_mut((0, dx), (dx, dy)).copy_from(b);
    h.view_mut((dx, 0), (dy, dx)).copy_from(&b.transpose());
    h.view_mut((dx, dx), (dy, dy)).copy_from(&(-c));
    h
}

impl QuadraticSaddleProblem {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn z_star(&self) -> &DVector<f64> {
        &self.z_star
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `L/μ`; infinite when `μ = 0`.
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }

    pub fn dx(&self) -> usize {
        self.a.nrows()
    }

    pub fn dy(&self) -> usize {
        self.c.nrows()
    }

    pub fn dim(&self) -> usize {
        self.dx() + self.dy()
    }

    /// `H = [[A, B], [Bᵀ, −C]]`.
    pub fn hessian(&self) -> DMatrix<f64> {
        assemble_hessian(&self.a, &self.b, &self.c)
    }

    /// `JH = [[A, B], [−Bᵀ, C]]` with `J = diag(I, −I)`.
    pub fn saddle_matrix(&self) -> DMatrix<f64> {
        let mut m = self.hessian();
        let dx = self.dx();
        let n = self.dim();
        m.view_mut((dx, 0), (n - dx, n)).neg_mut();
        m
    }

    fn check_dim(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: z.len() });
        }
        Ok(())
    }

    /// `∇f(z) = H (z − z*)`.
    pub fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(z)?;
        let d = z - &self.z_star;
        let dx = self.dx();
        let (dx_part, dy_part) = (d.rows(0, dx), d.rows(dx, self.dy()));
        let gx = &self.a * dx_part + &self.b * dy_part;
        let gy = self.b.transpose() * dx_part - &self.c * dy_part;
        let mut g = DVector::zeros(self.dim());
        g.rows_mut(0, dx).copy_from(&gx);
        g.rows_mut(dx, self.dy()).copy_from(&gy);
        Ok(g)
    }

    /// `F(z) = J H (z − z*) = (∇ₓf, −∇ᵧf)`.
    pub fn saddle_operator(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let mut g = self.gradient(z)?;
        let dx = self.dx();
        g.rows_mut(dx, self.dy()).neg_mut();
        Ok(g)
    }

    /// Eigenvalues of `JH`; they lie in `HalfDisc(μ, L)`.
    pub fn eigenvalues_saddle_operator(&self) -> Vec<Complex64> {
        self.saddle_matrix()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    /// Eigenvalues of the symmetric `H`; they lie in `[−L, −μ] ∪ [μ, L]`.
    pub fn eigenvalues_hessian(&self) -> Vec<f64> {
        self.hessian().symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            a: rows(&self.a),
            b: rows(&self.b),
            c: rows(&self.c),
            z_star: self.z_star.iter().copied().collect(),
            mu: self.mu,
            l: self.l,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ProblemDocument>(s)?.into_problem()
    }
}

/// `(∇f(z), F(z))`.
pub fn saddle_gradient(
    problem: &QuadraticSaddleProblem,
    z: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    Ok((problem.gradient(z)?, problem.saddle_operator(z)?))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], ncols_if_empty: usize) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(ncols_if_empty, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { expected: ncols, found: bad.len() });
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

/// JSON form of a problem: blocks as row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub z_star: Vec<f64>,
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ProblemDocument {
    /// Rebuilds the problem with the stored certificates, bit for bit.
    pub fn into_problem(self) -> Result<QuadraticSaddleProblem> {
        let dx = self.a.len();
        let dy = self.c.len();
        let a = from_rows(&self.a, dx)?;
        let c = from_rows(&self.c, dy)?;
        let b = from_rows(&self.b, dy)?;
        if a.ncols() != dx || c.ncols() != dy || b.nrows() != dx || b.ncols() != dy {
            return Err(Error::InvalidParameter("inconsistent block shapes".into()));
        }
        if self.z_star.len() != dx + dy {
            return Err(Error::DimensionMismatch { expected: dx + dy, found: self.z_star.len() });
        }
        Ok(QuadraticSaddleProblem {
            a,
            b,
            c,
            z_star: DVector::from_vec(self.z_star),
            mu: self.mu,
            l: self.l,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralSetKind {
    /// `{z : |z| ≤ L, Re z ≥ μ}`, the spectral range of `JH`.
    HalfDisc,
    /// `[−L, −μ] ∪ [μ, L]`, the spectral range of `H`.
    SymmetricIntervals,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSetDescriptor {
    kind: SpectralSetKind,
    mu: f64,
    l: f64,
}

impl SpectralSetDescriptor {
    pub fn new(kind: SpectralSetKind, mu: f64, l: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu <= l && l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spectral set needs 0 <= mu <= L, L > 0; got mu = {mu}, L = {l}"
            )));
        }
        Ok(SpectralSetDescriptor { kind, mu, l })
    }

    pub fn half_disc(mu: f64, l: f64) -> Result<Self> {
        Self::new(SpectralSetKind::HalfDisc, mu, l)
    }

    pub fn intervals(mu: f64, l: f64) -> Result<Self> {
        Self::new(SpectralSetKind::SymmetricIntervals, mu, l)
    }

    pub fn kind(&self) -> SpectralSetKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        match self.kind {
            SpectralSetKind::HalfDisc => z.norm() <= self.l + tol && z.re >= self.mu - tol,
            SpectralSetKind::SymmetricIntervals => {
                z.im.abs() <= tol && z.re.abs() >= self.mu - tol && z.re.abs() <= self.l + tol
            }
        }
    }

    pub fn contains_origin(&self) -> bool {
        self.mu == 0.0
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpectralSetKind::HalfDisc => {
                let h = (self.l * self.l - self.mu * self.mu).sqrt();
                let chord = 2.0 * h;
                let corner_to_tip = ((self.l - self.mu).powi(2) + h * h).sqrt();
                chord.max(corner_to_tip)
            }
            SpectralSetKind::SymmetricIntervals => 2.0 * self.l,
        }
    }
}

/// Finitely supported, conjugation-invariant probability measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<(Complex64, f64)>,
    set: SpectralSetDescriptor,
}

fn find_conjugate(atoms: &[(Complex64, f64)], z: Complex64, scale: f64) -> Option<f64> {
    atoms
        .iter()
        .find(|(w, _)| (*w - z.conj()).norm() <= 1e-12 * scale)
        .map(|&(_, wt)| wt)
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<(Complex64, f64)>, set: SpectralSetDescriptor) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some((z, w)) = atoms.iter().find(|(_, w)| !(*w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("atom {z} has weight {w}")));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        if let Some((z, _)) = atoms.iter().find(|(z, _)| !set.contains(*z, 1e-10)) {
            return Err(Error::InvalidMeasure(format!("atom {z} lies outside the spectral set")));
        }
        let scale = set.l().max(1.0);
        for &(z, w) in &atoms {
            if z.im == 0.0 {
                continue;
            }
            match find_conjugate(&atoms, z, scale) {
                Some(wc) if (wc - w).abs() <= 1e-12 * w.max(wc) => {}
                Some(wc) => {
                    return Err(Error::InvalidMeasure(format!(
                        "atom {z} has weight {w} but its conjugate has {wc}"
                    )))
                }
                None => {
                    return Err(Error::InvalidMeasure(format!("atom {z} has no conjugate atom")))
                }
            }
        }
        Ok(SpectralMeasure { atoms, set })
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn set(&self) -> &SpectralSetDescriptor {
        &self.set
    }

    /// `E_{λ∼ν} |p(λ)|²`.
    pub fn expected_square(&self, p: &Polynomial) -> f64 {
        self.atoms.iter().map(|&(z, w)| w * p.eval(z).norm_sqr()).sum()
    }
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn conjugate_blocks(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    ux: &DMatrix<f64>,
    uy: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    (
        ux * a * ux.transpose(),
        ux * b * uy.transpose(),
        uy * c * uy.transpose(),
    )
}

/// Maximum attempts before `random_instance` gives up.
pub const MAX_RESAMPLES: usize = 100;

/// Deterministic random instance whose certified `μ'` lies in `[μ, L]` and
/// whose `L' ≤ L`.
///
/// Coordinates `(x_j, y_j)` are paired into 2×2 Hessian blocks
/// `[[a, b], [b, −c]]` with `a, c ∈ [μ, L]` and `b` bounded so the block
/// norm stays at most `L`; unpaired coordinates get a diagonal entry in
/// `[μ, L]`. The x and y spaces are then rotated by independent random
/// orthogonal matrices, which preserves the block structure, the spectra of
/// `A` and `C`, and `‖H‖`.
pub fn random_instance(
    mu: f64,
    l: f64,
    dx: usize,
    dy: usize,
    seed: u64,
) -> Result<QuadraticSaddleProblem> {
    if !(mu >= 0.0 && mu <= l && l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 <= mu <= L, got {mu}, {l}")));
    }
    if dx == 0 || dy == 0 {
        return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let pairs = dx.min(dy);
        let mut a0 = DMatrix::zeros(dx, dx);
        let mut c0 = DMatrix::zeros(dy, dy);
        let mut b0 = DMatrix::zeros(dx, dy);
        let diag = |rng: &mut ChaCha8Rng| -> f64 {
            // Push a share of the mass onto the ends of [μ, L].
            match rng.random_range(0..6) {
                0 => mu,
                1 => l,
                _ => rng.random_range(mu..=l),
            }
        };
        for j in 0..pairs {
            let a = diag(&mut rng);
            let c = diag(&mut rng);
            let b_max = (((2.0 * l - (a - c).abs()).powi(2) - (a + c).powi(2)) / 4.0)
                .max(0.0)
                .sqrt();
            let b = match rng.random_range(0..4) {
                0 => b_max,
                1 => -b_max,
                _ => rng.random_range(-1.0..=1.0) * b_max,
            };
            a0[(j, j)] = a;
            c0[(j, j)] = c;
            b0[(j, j)] = b;
        }
        for j in pairs..dx {
            a0[(j, j)] = diag(&mut rng);
        }
        for j in pairs..dy {
            c0[(j, j)] = diag(&mut rng);
        }
        let ux = random_orthogonal(dx, &mut rng);
        let uy = random_orthogonal(dy, &mut rng);
        let (a, b, c) = conjugate_blocks(&a0, &b0, &c0, &ux, &uy);
        let z_star = DVector::from_fn(dx + dy, |_, _| rng.sample::<f64, _>(StandardNormal));
        let Ok(mut problem) = make_problem(a, b, c, z_star) else {
            continue;
        };
        let min_a = min_eigenvalue(&problem.a);
        let min_c = min_eigenvalue(&problem.c);
        if min_a < mu - 1e-10 || min_c < mu - 1e-10 || problem.l > l + 1e-10 {
            continue;
        }
        // Certificates are clamped so the stated ranges hold exactly.
        problem.mu = problem.mu.clamp(mu, l);
        problem.l = problem.l.min(l).max(problem.mu);
        return Ok(problem);
    }
    Err(Error::ConstructionFailed { attempts: MAX_RESAMPLES })
}

/// Block-diagonal instance on which every symmetric Krylov method started
/// at the returned `z0` has `‖z_T − z*‖² = E_ν |p_T|²`.
///
/// Each atom with `Im λ ≥ 0` gets a 2×2 block of `JH` equal to
/// `[[Re λ, Im λ], [−Im λ, Re λ]]` (diagonal for real atoms).
/// `z0` is the origin and `z* = −Σ c_j (e_j + e_{j+m})` with
/// `c_j = √(ν(λ_j)/2)` for real atoms and `√ν(λ_j)` otherwise.
/// With `rotation_seed` the whole instance is rotated by block-orthogonal
/// matrices, leaving `JH`'s spectrum and the identity unchanged.
pub fn hard_instance(
    measure: &SpectralMeasure,
    rotation_seed: Option<u64>,
) -> Result<(QuadraticSaddleProblem, DVector<f64>)> {
    let upper: Vec<(Complex64, f64)> = measure
        .atoms()
        .iter()
        .copied()
        .filter(|(z, _)| z.im >= 0.0)
        .collect();
    let m = upper.len();
    if m == 0 {
        return Err(Error::InvalidMeasure("no atoms with Im >= 0".into()));
    }
    let re = DVector::from_iterator(m, upper.iter().map(|(z, _)| z.re));
    let im = DVector::from_iterator(m, upper.iter().map(|(z, _)| z.im));
    let mut a = DMatrix::from_diagonal(&re);
    let mut b = DMatrix::from_diagonal(&im);
    let mut c = a.clone();
    let mut z_star = DVector::zeros(2 * m);
    for (j, &(z, w)) in upper.iter().enumerate() {
        let cj = if z.im == 0.0 { (w / 2.0).sqrt() } else { w.sqrt() };
        z_star[j] = -cj;
        z_star[j + m] = -cj;
    }
    if let Some(seed) = rotation_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ux = random_orthogonal(m, &mut rng);
        let uy = random_orthogonal(m, &mut rng);
        let rotated = conjugate_blocks(&a, &b, &c, &ux, &uy);
        a = rotated.0;
        b = rotated.1;
        c = rotated.2;
        let xs = &ux * z_star.rows(0, m);
        let ys = &uy * z_star.rows(m, m);
        z_star.rows_mut(0, m).copy_from(&xs);
        z_star.rows_mut(m, m).copy_from(&ys);
    }
    let problem = make_problem(a, b, c, z_star)?;
    Ok((problem, DVector::zeros(2 * m)))
}

/// `p(M) v` by Horner's rule on the matrix action. Coefficients must be real.
pub(crate) fn apply_matrix_polynomial(
    p: &Polynomial,
    m: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    if !p.is_real(1e-12) {
        return Err(Error::ComplexCoefficients);
    }
    let coeffs = p.coeffs();
    let mut acc = v * coeffs.last().map_or(0.0, |c| c.re);
    for c in coeffs.iter().rev().skip(1) {
        acc = m * acc + v * c.re;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;
    use nalgebra::dvector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_problem(a: f64, b: f64, cc: f64) -> Result<QuadraticSaddleProblem> {
        make_problem(dmatrix![a], dmatrix![b], dmatrix![cc], dvector![0.0, 0.0])
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    }

    #[test]
    fn make_problem_examples() {
        let p = scalar_problem(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.mu(), 1.0);
        assert_relative_eq!(p.l(), 2f64.sqrt(), epsilon = 1e-14);
        let p = scalar_problem(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.mu(), 1.0);
        assert_relative_eq!(p.l(), 1.0);
        assert!(matches!(
            scalar_problem(-1.0, 0.0, 1.0),
            Err(Error::NotConvexConcave { block: "A", .. })
        ));
    }

    #[test]
    fn make_problem_symmetrizes_and_checks_shapes() {
        let p = make_problem(
            dmatrix![2.0, 1.0; 0.0, 2.0],
            dmatrix![0.0; 0.0],
            dmatrix![1.0],
            dvector![0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(p.a(), &dmatrix![2.0, 0.5; 0.5, 2.0]);
        assert!(matches!(
            make_problem(dmatrix![1.0], dmatrix![1.0, 1.0], dmatrix![1.0], dvector![0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn saddle_gradient_examples() {
        let p = scalar_problem(1.0, 1.0, 1.0).unwrap();
        let (g, f) = saddle_gradient(&p, p.z_star()).unwrap();
        assert_eq!(g.norm(), 0.0);
        assert_eq!(f.norm(), 0.0);

        let p = scalar_problem(0.0, 1.0, 0.0);
        // A = C = 0 is convex-concave (μ = 0).
        let p = p.unwrap();
        let (g, f) = saddle_gradient(&p, &dvector![1.0, 0.0]).unwrap();
        assert_eq!(g, dvector![0.0, 1.0]);
        assert_eq!(f, dvector![0.0, -1.0]);

        let p = scalar_problem(1.0, 0.0, 1.0).unwrap();
        let (g, f) = saddle_gradient(&p, &dvector![1.0, 1.0]).unwrap();
        assert_eq!(g, dvector![1.0, -1.0]);
        assert_eq!(f, dvector![1.0, 1.0]);

        assert!(matches!(
            saddle_gradient(&p, &dvector![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn saddle_eigenvalue_examples() {
        let ev = sorted(scalar_problem(1.0, 0.0, 1.0).unwrap().eigenvalues_saddle_operator());
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-12 && (ev[1] - c(1.0, 0.0)).norm() < 1e-12);
        let ev = sorted(scalar_problem(0.0, 1.0, 0.0).unwrap().eigenvalues_saddle_operator());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12 && (ev[1] - c(0.0, 1.0)).norm() < 1e-12);
        let ev = sorted(scalar_problem(1.0, 1.0, 1.0).unwrap().eigenvalues_saddle_operator());
        assert!((ev[0] - c(1.0, -1.0)).norm() < 1e-12 && (ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn random_instance_is_deterministic() {
        let p = random_instance(0.1, 1.0, 4, 3, 99).unwrap();
        let q = random_instance(0.1, 1.0, 4, 3, 99).unwrap();
        assert_eq!(p, q);
        assert_ne!(p, random_instance(0.1, 1.0, 4, 3, 100).unwrap());
    }

    #[test]
    fn random_instances_respect_spectral_ranges() {
        let grid = [(0.0, 1.0), (0.1, 1.0), (0.5, 2.0), (1.0, 10.0), (1.0, 1.0)];
        for seed in 0..200u64 {
            let (mu, l) = grid[seed as usize % grid.len()];
            let dx = 1 + (seed as usize % 4);
            let dy = 1 + (seed as usize / 4 % 3);
            let p = random_instance(mu, l, dx, dy, seed).unwrap();
            assert!(p.mu() >= mu && p.mu() <= l);
            assert!(p.l() <= l);
            assert!(min_eigenvalue(p.a()) >= mu - 1e-10);
            assert!(min_eigenvalue(p.c()) >= mu - 1e-10);
            let half_disc = SpectralSetDescriptor::half_disc(mu, l).unwrap();
            for z in p.eigenvalues_saddle_operator() {
                assert!(half_disc.contains(z, EIGEN_TOL), "seed {seed}: {z}");
            }
            let intervals = SpectralSetDescriptor::intervals(mu, l).unwrap();
            for x in p.eigenvalues_hessian() {
                assert!(intervals.contains(c(x, 0.0), EIGEN_TOL), "seed {seed}: {x}");
            }
        }
    }

    #[test]
    fn random_instances_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..100u64 {
            let mu = [0.0, 0.2, 1.0][seed as usize % 3];
            let p = random_instance(mu, 2.0, 3, 2, seed).unwrap();
            let z = DVector::from_fn(5, |_, _| rng.random_range(-2.0..2.0));
            let w = DVector::from_fn(5, |_, _| rng.random_range(-2.0..2.0));
            let lhs = (p.saddle_operator(&z).unwrap() - p.saddle_operator(&w).unwrap()).dot(&(&z - &w));
            assert!(lhs >= p.mu() * (&z - &w).norm_squared() - 1e-10);
        }
    }

    #[test]
    fn random_instance_rejects_bad_ranges() {
        assert!(random_instance(2.0, 1.0, 2, 2, 0).is_err());
        assert!(random_instance(0.0, 1.0, 0, 2, 0).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let p = random_instance(0.3, 1.7, 3, 2, 12).unwrap();
        let s = p.to_json().unwrap();
        let q = QuadraticSaddleProblem::from_json(&s).unwrap();
        assert_eq!(p, q);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for key in ["A", "B", "C", "z_star", "mu", "L"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn measure_validation() {
        let set = SpectralSetDescriptor::half_disc(0.0, 1.0).unwrap();
        assert!(SpectralMeasure::new(vec![(c(0.0, 0.5), 0.5), (c(0.0, -0.5), 0.5)], set).is_ok());
        assert!(SpectralMeasure::new(vec![(c(0.0, 0.5), 1.0)], set).is_err());
        assert!(SpectralMeasure::new(vec![(c(0.0, 0.5), 0.6), (c(0.0, -0.5), 0.4)], set).is_err());
        assert!(SpectralMeasure::new(vec![(c(0.5, 0.0), 0.7)], set).is_err());
        assert!(SpectralMeasure::new(vec![(c(-0.5, 0.0), 1.0)], set).is_err());
        assert!(SpectralMeasure::new(vec![], set).is_err());
    }

    fn expected_identity(measure: &SpectralMeasure, p: &Polynomial, seed: Option<u64>) -> (f64, f64) {
        let (problem, z0) = hard_instance(measure, seed).unwrap();
        let d = &z0 - problem.z_star();
        let v = apply_matrix_polynomial(p, &problem.saddle_matrix(), &d).unwrap();
        (v.norm_squared(), measure.expected_square(p))
    }

    #[test]
    fn hard_instance_examples() {
        let set = SpectralSetDescriptor::half_disc(1.0, 2.0).unwrap();
        let nu = SpectralMeasure::new(vec![(c(2.0, 0.0), 1.0)], set).unwrap();
        let (problem, z0) = hard_instance(&nu, None).unwrap();
        assert_eq!(problem.saddle_matrix(), dmatrix![2.0, 0.0; 0.0, 2.0]);
        let d = &z0 - problem.z_star();
        assert_relative_eq!(d[0], 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(d[1], 0.5f64.sqrt(), epsilon = 1e-15);
        let (lhs, rhs) = expected_identity(&nu, &Polynomial::from_real(&[1.0, -0.5]), None);
        assert!(lhs.abs() < 1e-30 && rhs.abs() < 1e-30);

        let set = SpectralSetDescriptor::half_disc(0.0, 1.0).unwrap();
        let nu = SpectralMeasure::new(vec![(c(0.0, 0.5), 0.5), (c(0.0, -0.5), 0.5)], set).unwrap();
        let (problem, z0) = hard_instance(&nu, None).unwrap();
        assert_eq!(problem.saddle_matrix(), dmatrix![0.0, 0.5; -0.5, 0.0]);
        assert_relative_eq!((&z0 - problem.z_star()).norm(), 1.0, epsilon = 1e-12);
        let (lhs, rhs) = expected_identity(&nu, &Polynomial::one(), None);
        assert_relative_eq!(lhs, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rhs, 1.0, epsilon = 1e-12);

        let set = SpectralSetDescriptor::half_disc(1.0, 2.0).unwrap();
        let nu = SpectralMeasure::new(vec![(c(1.0, 0.0), 0.5), (c(2.0, 0.0), 0.5)], set).unwrap();
        let (lhs, rhs) = expected_identity(&nu, &Polynomial::from_real(&[1.0, -1.0]), None);
        assert_relative_eq!(lhs, 0.5, epsilon = 1e-12);
        assert_relative_eq!(rhs, 0.5, epsilon = 1e-12);
    }

    fn random_measure(rng: &mut ChaCha8Rng, set: SpectralSetDescriptor) -> SpectralMeasure {
        let mut atoms = Vec::new();
        let n = rng.random_range(1..6);
        for _ in 0..n {
            let r = rng.random_range(0.0..set.l());
            let th = rng.random_range(-1.5..1.5f64);
            let z = Complex64::from_polar(r, th);
            let z = c(z.re.max(set.mu()), z.im);
            if !set.contains(z, 0.0) {
                continue;
            }
            let w = rng.random_range(0.1..1.0);
            if rng.random_bool(0.3) {
                atoms.push((c(z.re, 0.0), w));
            } else {
                atoms.push((z, w));
                atoms.push((z.conj(), w));
            }
        }
        if atoms.is_empty() {
            atoms.push((c(set.l(), 0.0), 1.0));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in &mut atoms {
            a.1 /= total;
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        atoms[0].1 += 1.0 - total;
        // Keep conjugate weights identical after the correction.
        if atoms[0].0.im != 0.0 {
            atoms[1].1 = atoms[0].1;
            let t: f64 = atoms.iter().map(|a| a.1).sum();
            assert!((t - 1.0).abs() < 1e-12);
        }
        SpectralMeasure::new(atoms, set).unwrap()
    }

    #[test]
    fn hard_instance_moment_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = SpectralSetDescriptor::half_disc(0.2, 1.0).unwrap();
        for m in 0..10 {
            let nu = random_measure(&mut rng, set);
            let seed = if m % 2 == 0 { None } else { Some(m as u64) };
            let (problem, z0) = hard_instance(&nu, seed).unwrap();
            assert_relative_eq!((&z0 - problem.z_star()).norm(), 1.0, epsilon = 1e-12);
            assert!(problem.mu() >= 0.2 - 1e-12 && problem.l() <= 1.0 + 1e-12);
            for _ in 0..100 {
                let deg = rng.random_range(0..=8);
                let coeffs: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
                let p = Polynomial::from_real(&coeffs);
                let (lhs, rhs) = expected_identity(&nu, &p, seed);
                assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300), "{lhs} vs {rhs}");
            }
        }
    }
}
