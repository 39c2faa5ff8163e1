//! Conjugation-closed boundary meshes of spectral sets.

use num_complex::Complex64;

use crate::conformal::{green_halfdisc, HalfDiscRegion};
use crate::error::{Error, Result};
use crate::problems::{SpectralSetDescriptor, SpectralSetKind};

/// Default ceiling on the number of mesh points.
pub const DEFAULT_MAX_POINTS: usize = 200_000;

/// How the mesh spacing is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MeshPolicy {
    /// `δ = min(ε e^{−T g_max}, diam/8)`, the spacing that makes every
    /// degree-`T` polynomial lose at most a factor `1 − ε` on the mesh.
    /// Exponentially fine in `T`; fails with [`Error::MeshTooLarge`] when the
    /// point count would exceed the cap.
    Strict,
    /// `δ = min(diam/8, max(δ_strict, diam √ε / (8T)))` plus geometric
    /// grading toward corners and interval endpoints. Adequacy is checked by
    /// the sampling property against a finer reference mesh.
    #[default]
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshOptions {
    pub policy: MeshPolicy,
    pub max_points: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { policy: MeshPolicy::Practical, max_points: DEFAULT_MAX_POINTS }
    }
}

/// Finite subset of the boundary of a spectral set.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    points: Vec<Complex64>,
    spacing: f64,
    parent: SpectralSetDescriptor,
}

/// A straight or circular boundary piece in the closed upper half-plane,
/// parametrized by arc length.
#[derive(Clone, Copy, Debug)]
enum Piece {
    Segment { from: Complex64, to: Complex64 },
    /// Arc of radius `r` about the origin from angle `a0` to `a1`.
    Arc { r: f64, a0: f64, a1: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => (to - from).norm(),
            Piece::Arc { r, a0, a1 } => r * (a1 - a0).abs(),
        }
    }

    fn at(&self, s: f64) -> Complex64 {
        let len = self.length();
        let u = if len > 0.0 { (s / len).clamp(0.0, 1.0) } else { 0.0 };
        match *self {
            Piece::Segment { from, to } => from + (to - from) * u,
            Piece::Arc { r, a0, a1 } => Complex64::from_polar(r, a0 + (a1 - a0) * u),
        }
    }

    /// Uniform samples at spacing at most `delta`, endpoints included, plus
    /// `levels` geometrically graded points toward each graded end.
    fn sample(&self, delta: f64, levels: usize, grade_start: bool, grade_end: bool) -> Vec<Complex64> {
        let len = self.length();
        let n = (len / delta).ceil().max(1.0) as usize;
        let mut out: Vec<Complex64> = (0..=n).map(|k| self.at(len * k as f64 / n as f64)).collect();
        let step = len / n as f64;
        for k in 1..=levels {
            let d = step * 0.5f64.powi(k as i32);
            if grade_start {
                out.push(self.at(d));
            }
            if grade_end {
                out.push(self.at(len - d));
            }
        }
        out
    }
}

fn upper_pieces(set: &SpectralSetDescriptor) -> Vec<(Piece, bool, bool)> {
    let (mu, l) = (set.mu(), set.l());
    match set.kind() {
        SpectralSetKind::HalfDisc => {
            let h = (l * l - mu * mu).sqrt();
            let theta0 = (mu / l).acos();
            vec![
                (
                    Piece::Segment { from: Complex64::new(mu, 0.0), to: Complex64::new(mu, h) },
                    false,
                    true,
                ),
                (Piece::Arc { r: l, a0: 0.0, a1: theta0 }, false, true),
            ]
        }
        SpectralSetKind::SymmetricIntervals => vec![(
            Piece::Segment { from: Complex64::new(mu, 0.0), to: Complex64::new(l, 0.0) },
            true,
            true,
        )],
    }
}

fn boundary_length(set: &SpectralSetDescriptor) -> f64 {
    2.0 * upper_pieces(set).iter().map(|(p, _, _)| p.length()).sum::<f64>()
}

fn grading_levels(t: usize) -> usize {
    (t.max(1) as f64).log2().ceil() as usize + 2
}

/// Green's function of `[a, b]` with pole at infinity.
fn green_interval(w: Complex64, a: f64, b: f64) -> f64 {
    let u = (w * 2.0 - (a + b)) / (b - a);
    let root = (u * u - 1.0).sqrt();
    (u + root).norm().max((u - root).norm()).ln().max(0.0)
}

/// Green's function of the set, or a guaranteed upper bound on it.
///
/// Intervals use the exact formula `g(z) = ½ g_{[μ², L²]}(z²)`. A
/// half-disc `{|z| ≤ L, Re z ≥ μ}` contains the half-disc of radius
/// `L − μ` centred at `μ`, whose Green's function is larger and is used
/// in its place.
pub fn green_upper_bound(set: &SpectralSetDescriptor, z: Complex64) -> Result<f64> {
    let (mu, l) = (set.mu(), set.l());
    if mu == l {
        return Err(Error::InvalidParameter("degenerate set has no Green's function".into()));
    }
    match set.kind() {
        SpectralSetKind::HalfDisc => {
            if set.contains(z, 0.0) {
                return Ok(0.0);
            }
            green_halfdisc(z, &HalfDiscRegion::new(mu, l)?)
        }
        SpectralSetKind::SymmetricIntervals => Ok(0.5 * green_interval(z * z, mu * mu, l * l)),
    }
}

/// Samples the curve at distance exactly 1 from a convex set given by its
/// boundary samples and outward normals.
fn unit_collar(set: &SpectralSetDescriptor, n: usize) -> Vec<Complex64> {
    let (mu, l) = (set.mu(), set.l());
    let mut out = Vec::new();
    match set.kind() {
        SpectralSetKind::HalfDisc => {
            let theta0 = (mu / l).acos();
            let h = (l * l - mu * mu).sqrt();
            for k in 0..=n {
                let th = -theta0 + 2.0 * theta0 * k as f64 / n as f64;
                out.push(Complex64::from_polar(l + 1.0, th));
                let y = -h + 2.0 * h * k as f64 / n as f64;
                out.push(Complex64::new(mu - 1.0, y));
                // Fans around the two corners, between the segment normal
                // (−1) and the arc normal.
                let phi = theta0 + (std::f64::consts::PI - theta0) * k as f64 / n as f64;
                out.push(Complex64::new(mu, h) + Complex64::from_polar(1.0, phi));
                out.push(Complex64::new(mu, -h) + Complex64::from_polar(1.0, -phi));
            }
        }
        SpectralSetKind::SymmetricIntervals => {
            // Stadium around [μ, L] and its mirror image.
            for k in 0..=n {
                let x = mu + (l - mu) * k as f64 / n as f64;
                for s in [1.0, -1.0] {
                    out.push(Complex64::new(s * x, 1.0));
                    out.push(Complex64::new(s * x, -1.0));
                }
                let phi = std::f64::consts::PI * k as f64 / n as f64;
                let arc = Complex64::from_polar(1.0, phi - std::f64::consts::FRAC_PI_2);
                out.push(Complex64::new(l, 0.0) + arc);
                out.push(Complex64::new(-l, 0.0) - arc);
                out.push(Complex64::new(mu, 0.0) - arc);
                out.push(Complex64::new(-mu, 0.0) + arc);
            }
        }
    }
    out
}

/// Maximum of the set's Green's function (or its upper bound) over the
/// collar of width 1 around the set, sampled on the outer edge of the
/// collar, where the maximum is attained.
pub fn green_collar_max(set: &SpectralSetDescriptor) -> Result<f64> {
    let mut best = 0.0f64;
    for z in unit_collar(set, 400) {
        // The interval collar's fans around ±μ may dip into the gap; the
        // Green's function there is still well defined.
        best = best.max(green_upper_bound(set, z)?);
    }
    Ok(best)
}

impl BoundaryMesh {
    /// Mesh whose spacing guarantees the sampling property for degree `T`
    /// at loss `ε`, under the default options.
    pub fn build(set: &SpectralSetDescriptor, t: usize, eps: f64) -> Result<Self> {
        Self::build_with(set, t, eps, MeshOptions::default())
    }

    pub fn build_with(
        set: &SpectralSetDescriptor,
        t: usize,
        eps: f64,
        options: MeshOptions,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        if t == 0 {
            return Err(Error::InvalidParameter("T must be >= 1".into()));
        }
        if set.mu() == set.l() {
            return Self::degenerate(set);
        }
        let diam = set.diameter();
        let cap = diam / 8.0;
        let strict = eps * (-(t as f64) * green_collar_max(set)?).exp();
        let (delta, levels) = match options.policy {
            MeshPolicy::Strict => (strict.min(cap), 0),
            MeshPolicy::Practical => {
                let practical = diam * eps.sqrt() / (8.0 * t as f64);
                (cap.min(strict.max(practical)), grading_levels(t))
            }
        };
        let estimate = (boundary_length(set) / delta).ceil() + 4.0 * (levels + 2) as f64;
        if estimate > options.max_points as f64 {
            return Err(Error::MeshTooLarge {
                points: estimate.min(usize::MAX as f64) as usize,
                required_delta: delta,
            });
        }
        Ok(Self::assemble(set, delta, levels))
    }

    /// Uniform mesh at spacing `delta` with the anchor points.
    pub fn with_spacing(set: &SpectralSetDescriptor, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {delta}")));
        }
        if set.mu() == set.l() {
            return Self::degenerate(set);
        }
        let estimate = boundary_length(set) / delta;
        if estimate > DEFAULT_MAX_POINTS as f64 {
            return Err(Error::MeshTooLarge { points: estimate as usize, required_delta: delta });
        }
        Ok(Self::assemble(set, delta, 0))
    }

    /// Arbitrary points of the parent set (not necessarily its boundary),
    /// e.g. for tiny hand-built instances. The spacing is reported as the
    /// set diameter, which is always a valid covering radius.
    pub fn from_points(points: Vec<Complex64>, parent: SpectralSetDescriptor) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("mesh needs at least one point".into()));
        }
        if let Some(z) = points.iter().find(|z| !parent.contains(**z, 1e-10)) {
            return Err(Error::InvalidParameter(format!("{z} lies outside the parent set")));
        }
        let spacing = parent.diameter().max(f64::MIN_POSITIVE);
        Ok(BoundaryMesh { points: dedup(points), spacing, parent })
    }

    /// The mesh of the same set at a tenth of the spacing, with extra grading.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if self.parent.mu() == self.parent.l() {
            return Ok(self.clone());
        }
        let delta = self.spacing / factor.max(1) as f64;
        let levels = grading_levels(64) + factor.max(1).ilog2() as usize;
        Ok(Self::assemble(&self.parent, delta, levels))
    }

    fn degenerate(set: &SpectralSetDescriptor) -> Result<Self> {
        let l = set.l();
        let points = match set.kind() {
            SpectralSetKind::HalfDisc => vec![Complex64::new(l, 0.0)],
            SpectralSetKind::SymmetricIntervals => {
                vec![Complex64::new(-l, 0.0), Complex64::new(l, 0.0)]
            }
        };
        Ok(BoundaryMesh { points, spacing: l.max(f64::MIN_POSITIVE), parent: *set })
    }

    fn assemble(set: &SpectralSetDescriptor, delta: f64, levels: usize) -> Self {
        let mut upper = Vec::new();
        for (piece, gs, ge) in upper_pieces(set) {
            upper.extend(piece.sample(delta, levels, gs, ge));
        }
        let mut points = Vec::with_capacity(2 * upper.len());
        for z in upper {
            let z = Complex64::new(z.re, z.im.max(0.0));
            points.push(z);
            match set.kind() {
                SpectralSetKind::HalfDisc => points.push(z.conj()),
                SpectralSetKind::SymmetricIntervals => points.push(Complex64::new(-z.re, 0.0)),
            }
        }
        BoundaryMesh { points: dedup(points), spacing: delta, parent: *set }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn parent(&self) -> &SpectralSetDescriptor {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of each point's complex conjugate, if every point has one.
    pub fn conjugate_map(&self) -> Option<Vec<usize>> {
        let scale = self.parent.l().max(1.0);
        self.points
            .iter()
            .map(|z| {
                let target = z.conj();
                let k = self.points.partition_point(|w| cmp_points(w, &target).is_lt());
                [k.saturating_sub(1), k, k + 1]
                    .into_iter()
                    .filter(|&j| j < self.points.len())
                    .find(|&j| (self.points[j] - target).norm() <= 1e-14 * scale)
            })
            .collect()
    }

    pub fn is_conjugation_closed(&self) -> bool {
        self.conjugate_map().is_some()
    }

    pub fn max_abs(&self, f: impl Fn(Complex64) -> Complex64) -> f64 {
        self.points.iter().map(|&z| f(z).norm()).fold(0.0, f64::max)
    }
}

fn cmp_points(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn dedup(mut points: Vec<Complex64>) -> Vec<Complex64> {
    for z in &mut points {
        // Fold −0.0 into +0.0 so conjugate pairs compare equal.
        *z = Complex64::new(z.re + 0.0, z.im + 0.0);
    }
    points.sort_by(cmp_points);
    points.dedup();
    points
}

/// Free-function form of [`BoundaryMesh::build`].
pub fn build_mesh(set: &SpectralSetDescriptor, t: usize, eps: f64) -> Result<BoundaryMesh> {
    BoundaryMesh::build(set, t, eps)
}
