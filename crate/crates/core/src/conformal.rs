//! Exterior conformal map of the unit half-disc, Green's functions of
//! half-discs, and the closed-form rate formulas built on them.
//!
//! The map is
//!
//! ```text
//!            (1 − w) − √3 i (1 + w)                 ⎛ λ − i ⎞ 2/3
//! Φ(λ) = ─────────────────────────,   w = ⎜ ───── ⎟
//!               2 (w − 1)                           ⎝ λ + i ⎠
//! ```
//!
//! with the principal branch of the logarithm inside `w`. The Möbius factor
//! sends the diameter `[−i, i]` onto the negative real axis, so the branch
//! cut sits on the boundary of the half-disc and the map is continuous on
//! the closed exterior (approached from `Re λ < 0` along the cut). Near
//! infinity `Φ(λ) ≈ (3√3/4) λ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Slack used when deciding whether a point is strictly inside a region.
const INTERIOR_TOL: f64 = 1e-12;

/// `4/(3√3)`, the outward normal derivative of the unit half-disc Green's
/// function at the origin.
pub const NORMAL_DERIVATIVE_UNIT: f64 = 4.0 / (3.0 * SQRT3);

/// `3√3/2`, the limiting constant of `(T+1) · min_q max |q|` over the unit half-disc.
pub const CC_GAP_CONSTANT: f64 = 3.0 * SQRT3 / 2.0;

/// Half-disc `{λ : |λ − μ| ≤ L − μ, Re λ ≥ μ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfDiscRegion {
    mu: f64,
    l: f64,
}

impl HalfDiscRegion {
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        if !(mu >= 0.0 && l > mu && l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half-disc needs 0 <= mu < L, got mu = {mu}, L = {l}"
            )));
        }
        Ok(HalfDiscRegion { mu, l })
    }

    /// The unit half-disc Ω.
    pub fn unit() -> Self {
        HalfDiscRegion { mu: 0.0, l: 1.0 }
    }

    pub fn center(&self) -> f64 {
        self.mu
    }

    pub fn radius(&self) -> f64 {
        self.l - self.mu
    }

    /// Maps the region onto Ω.
    pub fn to_unit(&self, lambda: Complex64) -> Complex64 {
        (lambda - self.mu) / self.radius()
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        let u = self.to_unit(lambda);
        u.norm() <= 1.0 && u.re >= 0.0
    }
}

fn strictly_inside_unit(lambda: Complex64) -> bool {
    lambda.norm() < 1.0 - INTERIOR_TOL && lambda.re > INTERIOR_TOL
}

/// Conformal map from the exterior of the unit half-disc onto the exterior
/// of the unit disc.
///
/// The corners `±i` are handled as limits (`w = 0` and `w = ∞`).
pub fn phi_omega(lambda: Complex64) -> Result<Complex64> {
    if strictly_inside_unit(lambda) {
        return Err(Error::InsideRegion {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let i = Complex64::i();
    let den = lambda + i;
    if den.norm() == 0.0 {
        // w → ∞
        return Ok(Complex64::new(-0.5, -0.5 * SQRT3));
    }
    let mut m = (lambda - i) / den;
    if lambda.re <= 0.0 && m.re < 0.0 && m.im.abs() <= 1e-15 * m.re.abs() {
        // On the diameter: take the limit from Re λ < 0, where Im m > 0.
        m.im = 0.0;
    }
    if m.norm() == 0.0 {
        return Ok(Complex64::new(-0.5, 0.5 * SQRT3));
    }
    let w = (m.ln() * (2.0 / 3.0)).exp();
    let num = (1.0 - w) - i * SQRT3 * (1.0 + w);
    Ok(num / (2.0 * (w - 1.0)))
}

/// Green's function of `region` with pole at infinity, `log |Φ(·)|` after
/// mapping the region onto Ω.
pub fn green_halfdisc(lambda: Complex64, region: &HalfDiscRegion) -> Result<f64> {
    let u = region.to_unit(lambda);
    if strictly_inside_unit(u) {
        return Err(Error::InsideRegion {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(phi_omega(u)?.norm().ln().max(0.0))
}

/// `∂g/∂n` at the origin for the half-disc of radius `L` centred at 0.
pub fn green_normal_derivative_at_zero(l: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    Ok(NORMAL_DERIVATIVE_UNIT / l)
}

/// Closed form of the normal derivative next to its finite-difference check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalDerivativeCheck {
    pub closed_form: f64,
    pub finite_difference: f64,
}

impl NormalDerivativeCheck {
    pub fn relative_error(&self) -> f64 {
        (self.finite_difference - self.closed_form).abs() / self.closed_form
    }
}

/// Step for the one-sided difference quotient.
pub const NORMAL_DERIVATIVE_STEP: f64 = 1e-4;

/// One-sided difference of the Green's function along the negative real
/// axis with one Richardson level: `2 D(h/2) − D(h)`, `D(h) = g(−h)/h`.
pub fn normal_derivative_self_check(l: f64) -> Result<NormalDerivativeCheck> {
    let closed_form = green_normal_derivative_at_zero(l)?;
    let region = HalfDiscRegion::new(0.0, l)?;
    let h = NORMAL_DERIVATIVE_STEP * l;
    let quotient = |step: f64| -> Result<f64> {
        Ok(green_halfdisc(Complex64::new(-step, 0.0), &region)? / step)
    };
    let finite_difference = 2.0 * quotient(0.5 * h)? - quotient(h)?;
    Ok(NormalDerivativeCheck {
        closed_form,
        finite_difference,
    })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must exceed 1, got {kappa}")));
    }
    Ok(())
}

/// `g_Ω(−1/(κ−1))`, the Green's function of the shifted half-disc at 0.
pub fn scsc_lower_exponent(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    green_halfdisc(Complex64::new(-1.0 / (kappa - 1.0), 0.0), &HalfDiscRegion::unit())
}

/// Natural log of the symmetric-algorithm floor `|Φ(−1/(κ−1))|^{−T}`.
pub fn ln_scsc_lower_rate(kappa: f64, t: usize) -> Result<f64> {
    Ok(-(t as f64) * scsc_lower_exponent(kappa)?)
}

/// `|Φ(−1/(κ−1))|^{−T}`: no symmetric method contracts faster on
/// κ-conditioned quadratics.
pub fn scsc_lower_rate(kappa: f64, t: usize) -> Result<f64> {
    Ok(ln_scsc_lower_rate(kappa, t)?.exp())
}

/// Natural log of the slingshot rate `2(κ+1)^{T/2}(κ−1)^{T/2} / ((κ+1)^T + (κ−1)^T)`.
///
/// Writing `a = (T/2) ln((κ+1)/(κ−1))` the rate is `1/cosh a`.
pub fn ln_scsc_upper_rate(kappa: f64, t: usize) -> Result<f64> {
    if t % 2 == 1 {
        return Err(Error::OddHorizon(t));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be >= 1, got {kappa}")));
    }
    if t == 0 {
        return Ok(0.0);
    }
    if kappa == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let a = (t / 2) as f64 * ((kappa + 1.0) / (kappa - 1.0)).ln();
    Ok(-(a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2))
}

/// Slingshot GDA contraction after `T` steps on κ-conditioned quadratics.
pub fn scsc_upper_rate(kappa: f64, t: usize) -> Result<f64> {
    Ok(ln_scsc_upper_rate(kappa, t)?.exp())
}

/// Points on the boundary of Ω: `n_arc` on the arc and `n_seg` on the
/// diameter, endpoints included.
pub fn unit_boundary_samples(n_arc: usize, n_seg: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_arc + n_seg);
    for k in 0..n_arc {
        let th = -0.5 * PI + PI * k as f64 / (n_arc.max(2) - 1) as f64;
        out.push(Complex64::from_polar(1.0, th));
    }
    for k in 0..n_seg {
        let y = -1.0 + 2.0 * k as f64 / (n_seg.max(2) - 1) as f64;
        out.push(Complex64::new(0.0, y));
    }
    out
}
