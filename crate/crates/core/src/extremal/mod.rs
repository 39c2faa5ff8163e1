//! Extremal polynomial problems on spectral sets: boundary meshes, discrete
//! minimax solvers for the classes `P(T)` and `Q(T+1)`, dual measures, and
//! Bernstein-type margins.

mod basis;
mod mesh;
mod solver;

pub use basis::ArnoldiBasis;
pub use mesh::{
    build_mesh, green_collar_max, green_upper_bound, BoundaryMesh, MeshOptions, MeshPolicy,
    DEFAULT_MAX_POINTS,
};
pub use solver::{MAX_NEWTON_STEPS, MAX_STAGES};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::NORMAL_DERIVATIVE_UNIT;
use crate::error::{Error, Result};
use crate::poly::{from_roots, NormalizationClass, Polynomial};
use crate::problems::{SpectralMeasure, SpectralSetDescriptor, SpectralSetKind};

/// Default relative tolerance on the mesh optimum.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Result of a discrete minimax solve.
#[derive(Clone, Debug)]
pub struct MinimaxCertificate {
    /// Maximum of `|polynomial|` over the mesh.
    pub value: f64,
    pub polynomial: Polynomial,
    pub class: NormalizationClass,
    pub mesh: BoundaryMesh,
    /// Bound on `|max_mesh |polynomial| − value|` for the exported
    /// monomial coefficients.
    pub inner_tolerance: f64,
    /// Weak-duality lower bound on the mesh optimum; never above `value`.
    pub lower_witness: f64,
    /// Lower bound on the optimum over the whole parent set, where one is
    /// known in closed form (Bernstein–Walsh for `P`).
    pub continuum_floor: Option<f64>,
    pub converged: bool,
    pub newton_steps: usize,
    /// Probability weights on the mesh points certifying `lower_witness`.
    pub dual_weights: Vec<f64>,
}

/// JSON form of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub class: String,
    pub value: f64,
    pub lower_witness: f64,
    pub gap: f64,
    pub degree: usize,
    pub mesh_size: usize,
    pub mesh_spacing: f64,
    pub continuum_floor: Option<f64>,
    pub converged: bool,
    pub coefficients: Vec<[f64; 2]>,
}

impl MinimaxCertificate {
    /// `1 − lower_witness / value`, zero when the value vanishes.
    pub fn gap(&self) -> f64 {
        if self.value > 0.0 {
            1.0 - self.lower_witness / self.value
        } else {
            0.0
        }
    }

    pub fn degree(&self) -> usize {
        self.class.degree_bound()
    }

    pub fn to_document(&self) -> CertificateDocument {
        CertificateDocument {
            class: match self.class {
                NormalizationClass::P(_) => "P".into(),
                NormalizationClass::Q(_) => "Q".into(),
            },
            value: self.value,
            lower_witness: self.lower_witness,
            gap: self.gap(),
            degree: self.degree(),
            mesh_size: self.mesh.len(),
            mesh_spacing: self.mesh.spacing(),
            continuum_floor: self.continuum_floor,
            converged: self.converged,
            coefficients: self.polynomial.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }
}

fn continuum_floor(set: &SpectralSetDescriptor, class: NormalizationClass) -> Option<f64> {
    let NormalizationClass::P(t) = class else {
        return None;
    };
    if set.contains_origin() {
        return Some(1.0);
    }
    if set.mu() == set.l() {
        return None;
    }
    let g0 = green_upper_bound(set, Complex64::new(0.0, 0.0)).ok()?;
    Some((-(t as f64) * g0).exp())
}

fn solve(mesh: &BoundaryMesh, class: NormalizationClass, tol: f64) -> Result<MinimaxCertificate> {
    let t = match class {
        NormalizationClass::P(t) => t,
        NormalizationClass::Q(n) => n.saturating_sub(1),
    };
    if t == 0 {
        return Err(Error::InvalidParameter("T must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let points = mesh.points();
    let zero = points.iter().position(|z| z.norm() == 0.0);
    let nonzero: Vec<usize> = (0..points.len()).filter(|&i| Some(i) != zero).collect();
    let floor = continuum_floor(mesh.parent(), class);
    let finish = |polynomial: Polynomial, value: f64, lower: f64, weights: Vec<f64>, steps, converged| {
        let exported = mesh.max_abs(|z| polynomial.eval(z));
        MinimaxCertificate {
            value,
            inner_tolerance: (exported - value).abs() + tol * value,
            polynomial,
            class,
            mesh: mesh.clone(),
            lower_witness: lower.min(value),
            continuum_floor: floor,
            converged,
            newton_steps: steps,
            dual_weights: weights,
        }
    };

    if let (NormalizationClass::P(t), Some(z0)) = (class, zero) {
        // p(0) = 1 at a mesh point, so p ≡ 1 is optimal.
        let mut w = vec![0.0; points.len()];
        w[z0] = 1.0;
        let mut p = Polynomial::new(vec![Complex64::new(1.0, 0.0)], t)?;
        p = Polynomial::new(p.coeffs().to_vec(), t)?;
        return Ok(finish(p, 1.0, 1.0, w, 0, true));
    }
    if nonzero.len() <= t {
        // Interpolate zero at every nonzero mesh point.
        let roots: Vec<Complex64> = nonzero.iter().map(|&i| points[i]).collect();
        let p = from_roots(&roots, class)?;
        let value = mesh.max_abs(|z| p.eval(z));
        let w = vec![1.0 / points.len() as f64; points.len()];
        return Ok(finish(p, value, 0.0, w, 0, true));
    }

    let z: Vec<Complex64> = nonzero.iter().map(|&i| points[i]).collect();
    let omega: Vec<f64> = match class {
        NormalizationClass::P(_) => vec![1.0; z.len()],
        NormalizationClass::Q(_) => z.iter().map(|p| p.norm()).collect(),
    };
    let real = mesh.is_conjugation_closed();
    let sol = solver::solve_weighted(&z, &omega, t, real, tol)?;
    let r = Polynomial::new(sol.basis.to_monomial(&sol.coeffs), t)?;
    let polynomial = match class {
        NormalizationClass::P(_) => r,
        NormalizationClass::Q(_) => r.shift(),
    };
    let mut weights = vec![0.0; points.len()];
    for (k, &i) in nonzero.iter().enumerate() {
        weights[i] = sol.dual_weights[k];
    }
    Ok(finish(polynomial, sol.value, sol.lower, weights, sol.newton_steps, sol.converged))
}

/// `min max_mesh |p|` over `p ∈ P(T)`.
pub fn minimax_p(mesh: &BoundaryMesh, t: usize, tol: f64) -> Result<MinimaxCertificate> {
    solve(mesh, NormalizationClass::P(t), tol)
}

/// `min max_mesh |q|` over `q ∈ Q(T+1)`.
///
/// Every such `q` is `λ r(λ)` with `r ∈ P(T)`, so this is the `P(T)`
/// problem with weight `|λ|` on each mesh point.
pub fn minimax_q(mesh: &BoundaryMesh, t: usize, tol: f64) -> Result<MinimaxCertificate> {
    solve(mesh, NormalizationClass::Q(t + 1), tol)
}

/// A conjugation-invariant measure on mesh points with its lower bound.
#[derive(Clone, Debug)]
pub struct DualMeasure {
    pub measure: SpectralMeasure,
    /// `1 − sqrt(inner_minimum) / minimax_value`.
    pub duality_gap: f64,
    /// `min over real p ∈ P(T)` of `E_ν |p|²`.
    pub inner_minimum: f64,
    pub minimax: MinimaxCertificate,
}

/// Relative weight below which atoms are dropped.
pub const ATOM_PRUNE: f64 = 1e-6;

/// Maximizes (approximately) `min_{p ∈ P(T), real} E_ν |p|²` over
/// conjugation-invariant probability measures `ν` on the mesh, starting from
/// the dual weights of the minimax solve.
pub fn dual_measure(mesh: &BoundaryMesh, t: usize, tol: f64) -> Result<DualMeasure> {
    let conj = mesh
        .conjugate_map()
        .ok_or_else(|| Error::InvalidMeasure("mesh is not closed under conjugation".into()))?;
    let cert = minimax_p(mesh, t, tol)?;
    let points = mesh.points();
    let n = points.len();
    let mut w: Vec<f64> = (0..n).map(|i| 0.5 * (cert.dual_weights[i] + cert.dual_weights[conj[i]])).collect();
    let wmax = w.iter().copied().fold(0.0, f64::max);
    for v in &mut w {
        if *v < ATOM_PRUNE * wmax {
            *v = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);

    let zero = points.iter().position(|z| z.norm() == 0.0);
    let inner = if cert.value == 0.0 {
        0.0
    } else if let Some(z0) = zero.filter(|&z0| w[z0] > 0.0 && w[z0] == 1.0) {
        let _ = z0;
        1.0
    } else {
        let nonzero: Vec<usize> = (0..n).filter(|&i| Some(i) != zero).collect();
        let z: Vec<Complex64> = nonzero.iter().map(|&i| points[i]).collect();
        let wz: Vec<f64> = nonzero.iter().map(|&i| w[i]).collect();
        let mass_at_zero = zero.map_or(0.0, |i| w[i]);
        if z.len() <= t {
            mass_at_zero
        } else {
            let omega = vec![1.0; z.len()];
            // The mass at 0 contributes |p(0)|² = 1 for every p.
            solver::weighted_least_squares(&z, &omega, &wz, t, true)? + mass_at_zero
        }
    };
    let duality_gap = if cert.value > 0.0 { 1.0 - inner.sqrt() / cert.value } else { 0.0 };
    let atoms: Vec<(Complex64, f64)> =
        (0..n).filter(|&i| w[i] > 0.0).map(|i| (points[i], w[i])).collect();
    let measure = SpectralMeasure::new(atoms, *mesh.parent())?;
    Ok(DualMeasure { measure, duality_gap, inner_minimum: inner, minimax: cert })
}

/// `½ (p + p̃)` with `p̃(λ) = conj(p(conj λ))`: the coefficients' real parts.
pub fn symmetrize_polynomial(p: &Polynomial) -> Polynomial {
    Polynomial::new(
        p.coeffs().iter().map(|c| Complex64::new(c.re, 0.0)).collect(),
        p.degree_bound(),
    )
    .expect("same length as the input")
}

/// Outward normal derivative at 0 of the set's Green's function, for sets
/// with 0 on the boundary.
pub fn green_normal_derivative(set: &SpectralSetDescriptor) -> Result<f64> {
    if !set.contains_origin() {
        return Err(Error::InvalidParameter("0 is not on the boundary of the set".into()));
    }
    Ok(match set.kind() {
        SpectralSetKind::HalfDisc => NORMAL_DERIVATIVE_UNIT / set.l(),
        SpectralSetKind::SymmetricIntervals => 1.0 / set.l(),
    })
}

/// `|q'(0)| / ((T/2) · ∂g/∂n(0) · max_mesh |q|)` with `T = deg bound − 1`.
pub fn bernstein_margin(
    q: &Polynomial,
    set: &SpectralSetDescriptor,
    fine_mesh: &BoundaryMesh,
) -> Result<f64> {
    let q0 = q.coeff(0).norm();
    if q0 > 1e-12 {
        return Err(Error::NormalizationViolated(format!("|q(0)| = {q0}")));
    }
    let n = q.degree_bound();
    if n < 2 {
        return Err(Error::DegreeGuard(n.saturating_sub(1)));
    }
    let t = (n - 1) as f64;
    let dn = green_normal_derivative(set)?;
    let sup = fine_mesh.max_abs(|z| q.eval(z));
    Ok(q.coeff(1).norm() / (0.5 * t * dn * sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{scsc_lower_rate, CC_GAP_CONSTANT};
    use crate::poly::cheb_at_zero_scsc;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn intervals(mu: f64, l: f64) -> SpectralSetDescriptor {
        SpectralSetDescriptor::intervals(mu, l).unwrap()
    }

    fn half_disc(mu: f64, l: f64) -> SpectralSetDescriptor {
        SpectralSetDescriptor::half_disc(mu, l).unwrap()
    }

    #[test]
    fn single_point_mesh() {
        let mesh = BoundaryMesh::from_points(vec![c(1.0, 0.0)], half_disc(0.0, 1.0)).unwrap();
        let cert = minimax_p(&mesh, 1, DEFAULT_TOL).unwrap();
        assert_eq!(cert.value, 0.0);
        assert_eq!(cert.polynomial.coeffs(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
        let cert = minimax_q(&mesh, 1, DEFAULT_TOL).unwrap();
        assert_eq!(cert.value, 0.0);
        assert!(cert.polynomial.satisfies(NormalizationClass::Q(2), 1e-15));
        assert!((cert.polynomial.eval(c(1.0, 0.0))).norm() < 1e-15);

        let d = dual_measure(&mesh, 1, DEFAULT_TOL).unwrap();
        assert_eq!(d.measure.atoms(), &[(c(1.0, 0.0), 1.0)]);
        assert_eq!(d.duality_gap, 0.0);
    }

    #[test]
    fn origin_in_mesh_forces_one() {
        let set = half_disc(0.0, 1.0);
        for t in [1, 3, 8] {
            let mesh = BoundaryMesh::build(&set, t, 0.1).unwrap();
            let cert = minimax_p(&mesh, t, DEFAULT_TOL).unwrap();
            assert_eq!(cert.value, 1.0);
            assert_eq!(cert.polynomial.coeffs(), &[c(1.0, 0.0)]);
            assert_eq!(cert.continuum_floor, Some(1.0));
        }
    }

    #[test]
    fn intervals_match_chebyshev() {
        let set = intervals(1.0, 2.0);
        for (t, expected) in [(2, 0.6), (4, 0.219_512_195), (6, 1.0 / cheb_at_zero_scsc(3, 1.0, 2.0).unwrap())] {
            let mesh = BoundaryMesh::build(&set, t, 0.01).unwrap();
            let cert = minimax_p(&mesh, t, DEFAULT_TOL).unwrap();
            assert_relative_eq!(cert.value, expected, max_relative = 1e-3);
            assert!(cert.converged);
            assert!(cert.lower_witness <= cert.value);
            assert!(cert.polynomial.is_real(1e-9));
            let floor = cert.continuum_floor.unwrap();
            assert!(floor <= expected);
        }
    }

    #[test]
    fn odd_degree_does_not_help_on_symmetric_intervals() {
        let set = intervals(1.0, 2.0);
        let mesh = BoundaryMesh::build(&set, 3, 0.01).unwrap();
        let cert = minimax_p(&mesh, 3, DEFAULT_TOL).unwrap();
        assert_relative_eq!(cert.value, 0.6, max_relative = 1e-3);
    }

    #[test]
    fn q_class_on_interval_matches_scaled_chebyshev() {
        // On [−1, 1], q = λ − (4/3)λ³ = −T_3/3 attains 1/3.
        let mesh = BoundaryMesh::build(&intervals(0.0, 1.0), 3, 0.01).unwrap();
        let cert = minimax_q(&mesh, 2, DEFAULT_TOL).unwrap();
        assert_relative_eq!(cert.value, 1.0 / 3.0, max_relative = 1e-4);
        let p = &cert.polynomial;
        assert!(p.satisfies(NormalizationClass::Q(3), 1e-9));
        assert_relative_eq!(p.coeff(3).re, -4.0 / 3.0, max_relative = 1e-3);
        assert!(p.coeff(2).norm() < 1e-6);
    }

    #[test]
    fn degenerate_interval_pair() {
        let mesh = BoundaryMesh::build(&intervals(2.0, 2.0), 2, 0.1).unwrap();
        let cert = minimax_p(&mesh, 2, DEFAULT_TOL).unwrap();
        assert!(cert.value < 1e-15);
        assert_relative_eq!(cert.polynomial.coeff(2).re, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn certificate_invariants_and_json() {
        let mesh = BoundaryMesh::build(&half_disc(0.2, 1.0), 6, 0.05).unwrap();
        let cert = minimax_p(&mesh, 6, DEFAULT_TOL).unwrap();
        let exported = mesh.max_abs(|z| cert.polynomial.eval(z));
        assert!((exported - cert.value).abs() <= cert.inner_tolerance);
        assert!(cert.lower_witness <= cert.value);
        assert!(cert.gap() <= DEFAULT_TOL);
        let doc: serde_json::Value = serde_json::from_str(&cert.to_json().unwrap()).unwrap();
        for key in ["value", "lower_witness", "gap", "degree", "mesh_size", "coefficients"] {
            assert!(doc.get(key).is_some(), "missing {key}");
        }
        assert_eq!(doc["degree"], 6);
        assert_eq!(doc["coefficients"].as_array().unwrap().len(), 7);
    }

    #[test]
    fn halfdisc_lower_bound_soundness() {
        let eps = 0.05;
        for kappa in [2.0, 10.0] {
            for t in [2, 4, 8] {
                let set = half_disc(1.0 / kappa, 1.0);
                let mesh = BoundaryMesh::build(&set, t, eps).unwrap();
                let cert = minimax_p(&mesh, t, DEFAULT_TOL).unwrap();
                let floor = scsc_lower_rate(kappa, t).unwrap();
                assert!(cert.value >= (1.0 - eps) * floor, "κ={kappa} T={t}: {} vs {floor}", cert.value);
                assert_relative_eq!(cert.continuum_floor.unwrap(), floor, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn q_class_on_halfdisc_small_t() {
        let mesh = BoundaryMesh::build(&half_disc(0.0, 1.0), 8, 0.02).unwrap();
        let cert = minimax_q(&mesh, 8, DEFAULT_TOL).unwrap();
        let scaled = cert.value * 9.0;
        assert!(scaled > 2.3 && scaled < CC_GAP_CONSTANT, "{scaled}");
        assert!(cert.polynomial.satisfies(NormalizationClass::Q(9), 1e-8));
    }

    #[test]
    fn dual_measure_on_intervals() {
        let mesh = BoundaryMesh::build(&intervals(1.0, 2.0), 2, 0.01).unwrap();
        let d = dual_measure(&mesh, 2, DEFAULT_TOL).unwrap();
        assert!(d.inner_minimum.sqrt() >= 0.95 * 0.6);
        assert!(d.duality_gap >= -DEFAULT_TOL);
        let total: f64 = d.measure.atoms().iter().map(|a| a.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_measure_on_halfdisc() {
        let mesh = BoundaryMesh::build(&half_disc(0.1, 1.0), 8, 0.05).unwrap();
        let d = dual_measure(&mesh, 8, DEFAULT_TOL).unwrap();
        assert!(d.duality_gap >= -DEFAULT_TOL && d.duality_gap <= 0.05, "{}", d.duality_gap);
        assert!(d.inner_minimum.sqrt() <= d.minimax.value + DEFAULT_TOL);
        for &(z, w) in d.measure.atoms() {
            let partner = d.measure.atoms().iter().find(|(y, _)| *y == z.conj()).unwrap();
            assert_eq!(partner.1, w);
        }
    }

    #[test]
    fn dual_measure_requires_symmetric_mesh() {
        let mesh = BoundaryMesh::from_points(vec![c(0.5, 0.5)], half_disc(0.0, 1.0)).unwrap();
        assert!(dual_measure(&mesh, 1, DEFAULT_TOL).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let p = Polynomial::from_real(&[1.0, -2.0, 0.5]);
        assert_eq!(symmetrize_polynomial(&p), p);
        let p = Polynomial::from_coeffs(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(symmetrize_polynomial(&p).coeffs(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let p = Polynomial::from_coeffs(vec![c(1.0, 0.0), c(2.0, 3.0)]);
        assert_eq!(symmetrize_polynomial(&p).coeffs(), &[c(1.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn bernstein_examples() {
        let set = half_disc(0.0, 1.0);
        let fine = BoundaryMesh::with_spacing(&set, 1e-3).unwrap();
        let q = Polynomial::from_real(&[0.0, 1.0, -1.0]);
        let ratio = bernstein_margin(&q, &set, &fine).unwrap();
        assert_relative_eq!(ratio, 1.0 / (0.5 * NORMAL_DERIVATIVE_UNIT * 2f64.sqrt()), max_relative = 1e-9);
        assert_relative_eq!(ratio, 1.837, epsilon = 1e-3);
        assert!(matches!(
            bernstein_margin(&Polynomial::from_real(&[0.0, 1.0]), &set, &fine),
            Err(Error::DegreeGuard(0))
        ));
        assert!(matches!(
            bernstein_margin(&Polynomial::from_real(&[0.1, 1.0, 1.0]), &set, &fine),
            Err(Error::NormalizationViolated(_))
        ));
        assert!(bernstein_margin(&q, &half_disc(0.5, 1.0), &fine).is_err());
    }

    fn random_complex_poly(rng: &mut ChaCha8Rng, deg: usize) -> Polynomial {
        Polynomial::from_coeffs(
            (0..=deg).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        )
    }

    #[test]
    fn symmetrization_never_increases_sup_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mesh = BoundaryMesh::build(&half_disc(0.1, 1.0), 8, 0.05).unwrap();
        for _ in 0..100 {
            let p = random_complex_poly(&mut rng, 8);
            let r = symmetrize_polynomial(&p);
            assert!(mesh.max_abs(|z| r.eval(z)) <= mesh.max_abs(|z| p.eval(z)) + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn symmetrization_pair_inequality(
            coeffs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8),
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
        ) {
            let p = Polynomial::from_coeffs(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let r = symmetrize_polynomial(&p);
            let z = c(re, im);
            let lhs = r.eval(z).norm_sqr() + r.eval(z.conj()).norm_sqr();
            let rhs = p.eval(z).norm_sqr() + p.eval(z.conj()).norm_sqr();
            prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn weak_duality_on_random_intervals(mu in 0.1f64..1.0, t in 1usize..6) {
            let mesh = BoundaryMesh::build(&intervals(mu, 1.0), t, 0.05).unwrap();
            let d = dual_measure(&mesh, t, 1e-6).unwrap();
            prop_assert!(d.inner_minimum.sqrt() <= d.minimax.value + 1e-6);
        }
    }
}
