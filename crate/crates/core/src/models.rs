//! Triply periodic test Fermi functions.
//!
//! Both models are separable, `f(x, y, z) = F(x) + F(y) + F(z)` with a
//! 1-periodic profile `F`, so values, gradients and (diagonal) Hessians are
//! assembled from a per-axis profile evaluation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::error::NtcError;

pub type Point3 = Vector3<f64>;

const TWO_PI: f64 = 2.0 * PI;

/// Which periodic profile a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    /// `cos(2πx) + cos(2πy) + cos(2πz)`
    Cos,
    /// Piecewise quadratic, globally C¹.
    Pwq,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Cos => "cos",
            ModelTag::Pwq => "pwq",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = NtcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cos" => Ok(ModelTag::Cos),
            "pwq" => Ok(ModelTag::Pwq),
            other => Err(NtcError::UnknownModel(other.to_string())),
        }
    }
}

/// A 3-periodic Fermi function together with its level-set metadata.
///
/// New separable models are added by extending [`ModelTag`] and
/// [`FermiModel::profile`]; everything downstream only uses
/// [`FermiModel::evaluate_with_gradient`], [`FermiModel::hessian`] and
/// [`FermiModel::hessian_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct FermiModel {
    pub tag: ModelTag,
    /// Open energy interval whose level sets are genus-3 surfaces.
    pub genus_window: (f64, f64),
    pub critical_values: Vec<f64>,
}

impl FermiModel {
    pub fn cosine() -> Self {
        FermiModel {
            tag: ModelTag::Cos,
            genus_window: (-1.0, 1.0),
            critical_values: vec![-3.0, -1.0, 1.0, 3.0],
        }
    }

    pub fn piecewise_quadratic() -> Self {
        FermiModel {
            tag: ModelTag::Pwq,
            genus_window: (-1.0, 1.0),
            critical_values: vec![-3.0, -1.0, 1.0, 3.0],
        }
    }

    pub fn from_tag(tag: ModelTag) -> Self {
        match tag {
            ModelTag::Cos => Self::cosine(),
            ModelTag::Pwq => Self::piecewise_quadratic(),
        }
    }

    /// Profile value and its first two derivatives at `u`.
    #[inline]
    pub fn profile(&self, u: f64) -> (f64, f64, f64) {
        match self.tag {
            ModelTag::Cos => {
                let (s, c) = (TWO_PI * u).sin_cos();
                (c, -TWO_PI * s, -TWO_PI * TWO_PI * c)
            }
            ModelTag::Pwq => {
                let w = u - u.floor();
                // crease points take the left (first) branch
                if w <= 0.5 {
                    (8.0 * (2.0 * w - 1.0) * w, 8.0 * (4.0 * w - 1.0), 32.0)
                } else {
                    (-8.0 * (2.0 * w - 1.0) * (w - 1.0), -8.0 * (4.0 * w - 3.0), -32.0)
                }
            }
        }
    }

    #[inline]
    pub fn evaluate(&self, p: &Point3) -> f64 {
        self.profile(p.x).0 + self.profile(p.y).0 + self.profile(p.z).0
    }

    /// Value and exact gradient at any cover point.
    #[inline]
    pub fn evaluate_with_gradient(&self, p: &Point3) -> (f64, Point3) {
        let (fx, dx, _) = self.profile(p.x);
        let (fy, dy, _) = self.profile(p.y);
        let (fz, dz, _) = self.profile(p.z);
        (fx + fy + fz, Point3::new(dx, dy, dz))
    }

    #[inline]
    pub fn hessian(&self, p: &Point3) -> Matrix3<f64> {
        let (_, _, hx) = self.profile(p.x);
        let (_, _, hy) = self.profile(p.y);
        let (_, _, hz) = self.profile(p.z);
        Matrix3::from_diagonal(&Vector3::new(hx, hy, hz))
    }

    /// Upper bound on the spectral norm of the Hessian, used for step control.
    pub fn hessian_bound(&self) -> f64 {
        match self.tag {
            ModelTag::Cos => TWO_PI * TWO_PI,
            ModelTag::Pwq => 32.0,
        }
    }

    /// `max |F'|`.
    pub fn derivative_bound(&self) -> f64 {
        match self.tag {
            ModelTag::Cos => TWO_PI,
            ModelTag::Pwq => 8.0,
        }
    }

    /// The two solutions in `[0, 1)` of `F'(u) = s`, for `|s| ≤ derivative_bound()`.
    ///
    /// The first lies on the branch where `F'' ≥ 0`. Out-of-range `s` is clamped.
    pub fn derivative_preimages(&self, s: f64) -> [f64; 2] {
        let wrap = |u: f64| {
            let r = u - u.floor();
            if r >= 1.0 {
                0.0
            } else {
                r
            }
        };
        match self.tag {
            ModelTag::Cos => {
                let t = (-s / TWO_PI).clamp(-1.0, 1.0).asin() / TWO_PI;
                // t ∈ [-1/4, 1/4] has cos ≥ 0, i.e. F'' ≤ 0
                [wrap(0.5 - t), wrap(t)]
            }
            ModelTag::Pwq => {
                let s = s.clamp(-8.0, 8.0);
                [wrap(0.25 + s / 32.0), wrap(0.75 - s / 32.0)]
            }
        }
    }

    pub fn is_critical_value(&self, c: f64, tol: f64) -> bool {
        self.critical_values.iter().any(|v| (v - c).abs() <= tol)
    }

    pub fn in_genus_window(&self, c: f64) -> bool {
        c > self.genus_window.0 && c < self.genus_window.1
    }
}

/// A regular level `f = c` of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySlice {
    pub model: FermiModel,
    pub energy: f64,
}

impl EnergySlice {
    pub fn new(model: FermiModel, energy: f64) -> Result<Self, NtcError> {
        if !energy.is_finite() || model.is_critical_value(energy, 1e-12) {
            return Err(NtcError::CriticalEnergy(energy));
        }
        Ok(EnergySlice { model, energy })
    }

    /// Residual `f(p) - c` and gradient.
    #[inline]
    pub fn residual(&self, p: &Point3) -> (f64, Point3) {
        let (v, g) = self.model.evaluate_with_gradient(p);
        (v - self.energy, g)
    }
}

/// The `α(a, b)` radical of the zero-energy cosine critical points.
pub fn cos0_alpha(a: f64, b: f64) -> Result<f64, NtcError> {
    let (a2, b2) = (a * a, b * b);
    let den = a2 * a2 + b2 * b2 + 1.0 - 2.0 * a2 * b2 - 2.0 * a2 - 2.0 * b2;
    if den.abs() < 1e-12 {
        return Err(NtcError::DegenerateDirection(format!(
            "alpha denominator vanishes at chart ({a}, {b})"
        )));
    }
    let inner = a2 * a2 + b2 * b2 + 1.0 - a2 * b2 - a2 - b2;
    let ratio = (2.0 * inner.sqrt() - (a2 + b2 + 1.0)) / den;
    if ratio < 0.0 {
        return Err(NtcError::DegenerateDirection(format!(
            "alpha radicand negative at chart ({a}, {b})"
        )));
    }
    Ok(ratio.sqrt())
}

/// Analytic critical points `p1..p4` of the zero level of the cosine model
/// for the direction `(a, b, 1)`.
///
/// `p1` takes `sin(2πx_i) = (a, b, 1)_i α` and the cosine signs that make
/// `f(p1) = 0`, with `cos(2πx) > 0`. The remaining points are the images
/// `(½,½,½) − p1`, `(½,½,½) + p1` and `(1,1,1) − p1`.
pub fn analytic_critical_points_cos0(a: f64, b: f64) -> Result<[Point3; 4], NtcError> {
    let alpha = cos0_alpha(a, b)?;
    let sines = [a * alpha, b * alpha, alpha];
    let mags: Vec<f64> = sines.iter().map(|s| (1.0 - s * s).max(0.0).sqrt()).collect();

    let mut best: Option<([f64; 3], f64)> = None;
    for mask in 0..8u8 {
        let signs = [
            if mask & 1 == 0 { 1.0 } else { -1.0 },
            if mask & 2 == 0 { 1.0 } else { -1.0 },
            if mask & 4 == 0 { 1.0 } else { -1.0 },
        ];
        if signs[0] < 0.0 {
            continue;
        }
        let sum: f64 = (0..3).map(|i| signs[i] * mags[i]).sum();
        if sum.abs() <= 1e-9 && best.is_none_or(|(_, s)| sum.abs() < s) {
            best = Some((signs, sum.abs()));
        }
    }
    let (signs, _) =
        best.ok_or_else(|| NtcError::DegenerateDirection(format!("no cosine branch sums to zero at ({a}, {b})")))?;

    let coord = |i: usize| {
        let theta = sines[i].clamp(-1.0, 1.0).asin() / TWO_PI;
        if signs[i] > 0.0 {
            theta
        } else {
            0.5 - theta
        }
    };
    let p1 = Point3::new(coord(0), coord(1), coord(2));
    let half = Point3::repeat(0.5);
    Ok([p1, half - p1, half + p1, Point3::repeat(1.0) - p1])
}

/// Result of substituting into the printed piecewise-quadratic formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct PwqAnalyticPoints {
    pub points: [Point3; 4],
    /// `max_i |f(p_i) − E|`; anything above `1e-6` means the formulas do not
    /// land on the surface and the numerical solver must be used.
    pub residual: f64,
}

/// Verbatim evaluation of the printed critical-point formulas of the
/// piecewise quadratic model for `E ∈ [−1, 0]`.
pub fn analytic_critical_points_pwq(a: f64, b: f64, energy: f64) -> PwqAnalyticPoints {
    let (a2, b2) = (a * a, b * b);
    let sp = (1.0 + energy).sqrt();
    let sm = (1.0 - energy).sqrt();
    let d1 = 4.0 * (1.0 - a2 + b2).sqrt();
    let d2 = 4.0 * (1.0 + a2 - b2).sqrt();

    let upper1 = b2 - a2 >= energy;
    let x1 = if upper1 { a * sp / d1 } else { a * sm / d2 };
    let y1 = if upper1 { 0.5 - b * sp / d1 } else { 0.5 - b * sm / d2 };
    let z1 = if upper1 { 0.5 - sp / d1 } else { 0.5 - sm / d2 };

    let lower2 = a2 - b2 <= energy;
    let x2 = if lower2 { 0.5 - a * sm / d1 } else { 0.5 - a * sp / d2 };
    let y2 = if lower2 { b * sm / d1 } else { b * sp / d2 };
    let z2 = if lower2 { sm / d1 } else { 0.5 - sp / d2 };

    let p1 = Point3::new(x1, y1, z1);
    let p2 = Point3::new(x2, y2, z2);
    let p3 = Point3::repeat(1.0) - p2;
    let p4 = Point3::repeat(1.0) - p1;
    let model = FermiModel::piecewise_quadratic();
    let residual = [p1, p2, p3, p4]
        .iter()
        .map(|p| (model.evaluate(p) - energy).abs())
        .fold(0.0, f64::max);
    PwqAnalyticPoints {
        points: [p1, p2, p3, p4],
        residual,
    }
}
