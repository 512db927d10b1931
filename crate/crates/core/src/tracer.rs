//! Critical points of the plane foliation `⟨x, H⟩ = const` on a level set,
//! and tracing of its leaves.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix3;

use crate::error::NtcError;
use crate::models::{EnergySlice, ModelTag, Point3};
use crate::torus::{
    canonical_rep, dot_i, perp_lattice_basis, round_point, to_point, CoverPath, IVec3, RationalDirection,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TracerConfig {
    /// Largest arclength step.
    pub max_step: f64,
    /// Steps are halved at most down to this before giving up.
    pub min_step: f64,
    /// Fraction of the local curvature scale `|∇ₚf| / L` used as step.
    pub step_fraction: f64,
    /// Distance from a saddle at which separatrix traces start.
    pub offset: f64,
    /// Radius within which a separatrix trace is captured by a saddle.
    pub capture_radius: f64,
    /// Closed-orbit traces fail when passing this close to a critical point.
    pub near_saddle_radius: f64,
    pub step_cap: usize,
    /// Saddle connections crossed per loop before giving up.
    pub max_junctions: usize,
    /// Side (sign of `f - c`) taken at saddle connections.
    pub junction_side: f64,
    /// Samples per branch in the critical point search.
    pub root_samples: usize,
    /// Fail unless exactly four critical points are found.
    pub strict: bool,
    /// Join a saddle's two loops when their windings cancel (see [`join_opposite_loops`]).
    pub resolve_self_connections: bool,
}

impl Default for TracerConfig {
    fn default() -> Self {
        TracerConfig {
            max_step: 1e-2,
            min_step: 1e-11,
            step_fraction: 0.2,
            offset: 1e-4,
            capture_radius: 5e-3,
            near_saddle_radius: 2e-3,
            step_cap: 2_000_000,
            max_junctions: 16,
            junction_side: 1.0,
            root_samples: 512,
            strict: false,
            resolve_self_connections: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Saddle,
    Extremum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Canonical position in `[0, 1)³`.
    pub position: Point3,
    pub kind: CriticalKind,
    /// Outgoing unit directions `±v` of the leaf field (saddles only).
    pub separatrix_dirs: Option<[Point3; 2]>,
    /// Sign of `⟨∇f, H⟩`.
    pub grad_sign: i8,
    /// `∇f = λ H` at the point.
    pub lambda: f64,
    pub hessian: Matrix3<f64>,
}

impl CriticalPoint {
    pub fn is_saddle(&self) -> bool {
        self.kind == CriticalKind::Saddle
    }

    /// Quadratic form of the Hessian.
    pub fn quad(&self, y: &Point3) -> f64 {
        y.dot(&(self.hessian * y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitSign {
    Electron,
    Hole,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedLoop {
    pub path: CoverPath,
    pub start: Point3,
    pub winding: IVec3,
    pub sign: OrbitSign,
    pub arclength: f64,
    /// Saddle connections passed through.
    pub junctions: usize,
}

impl TracedLoop {
    pub fn is_trivial(&self) -> bool {
        self.winding == [0, 0, 0]
    }
}

/// Orthonormal frame `(e1, e2, Ĥ)` with `e2 = Ĥ × e1`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneFrame {
    pub e1: Point3,
    pub e2: Point3,
    pub normal: Point3,
}

impl PlaneFrame {
    pub fn new(dir: &RationalDirection) -> Self {
        let (u, _) = perp_lattice_basis(dir);
        let normal = dir.unit();
        let e1 = to_point(&u).normalize();
        PlaneFrame {
            e1,
            e2: normal.cross(&e1),
            normal,
        }
    }

    pub fn coords(&self, y: &Point3) -> [f64; 2] {
        [y.dot(&self.e1), y.dot(&self.e2)]
    }
}

/// Signed area of a closed polyline in frame coordinates.
pub fn signed_area(points: &[Point3], frame: &PlaneFrame) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let o = points[0];
    let mut area = 0.0;
    for i in 0..n {
        let a = frame.coords(&(points[i] - o));
        let b = frame.coords(&(points[(i + 1) % n] - o));
        area += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * area
}

fn orbit_sign(points: &[Point3], frame: &PlaneFrame) -> OrbitSign {
    // the leaf field runs counter-clockwise around regions where f > c
    let a = signed_area(points, frame);
    if a > 0.0 {
        OrbitSign::Hole
    } else if a < 0.0 {
        OrbitSign::Electron
    } else {
        OrbitSign::Unknown
    }
}

/// All critical points of the foliation on the slice: solutions of
/// `∇f ∥ H`, `f = c` in `[0, 1)³`.
///
/// For separable models `∂ᵢF(xᵢ) = λHᵢ`, so each point sits on one of eight
/// sign branches of the inverse derivative, parameterised by `λ`; `f = c`
/// becomes a scalar equation on each branch.
pub fn find_critical_points(
    slice: &EnergySlice,
    dir: &RationalDirection,
    cfg: &TracerConfig,
) -> Result<Vec<CriticalPoint>, NtcError> {
    let model = &slice.model;
    let h = dir.as_point();
    if model.tag == ModelTag::Cos && slice.energy.abs() < 1e-12 && h.x.abs() == h.y.abs() && h.y.abs() == h.z.abs() {
        return Err(NtcError::DegenerateDirection(format!("{dir} has flat critical points")));
    }
    let lambda_max = model.derivative_bound() / h.amax();
    let point_at = |branch: usize, theta: f64| -> (Point3, f64) {
        let lambda = lambda_max * theta.sin();
        let mut p = Point3::zeros();
        for i in 0..3 {
            let pre = model.derivative_preimages(lambda * h[i]);
            p[i] = pre[(branch >> i) & 1];
        }
        (p, lambda)
    };
    let g = |branch: usize, theta: f64| model.evaluate(&point_at(branch, theta).0) - slice.energy;

    let samples = cfg.root_samples.max(16);
    let mut found: Vec<(Point3, f64)> = Vec::new();
    for branch in 0..8 {
        let theta_at = |j: usize| -FRAC_PI_2 + std::f64::consts::PI * j as f64 / samples as f64;
        let mut prev = g(branch, theta_at(0));
        if prev == 0.0 {
            let (p, lambda) = point_at(branch, theta_at(0));
            found.push((canonical_rep(&p), lambda));
        }
        for j in 1..=samples {
            let cur = g(branch, theta_at(j));
            // roots landing exactly on a sample are taken as they are
            let root = if cur == 0.0 {
                Some(theta_at(j))
            } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
                let (mut lo, mut hi) = (theta_at(j - 1), theta_at(j));
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let gm = g(branch, mid);
                    if gm == 0.0 {
                        (lo, hi) = (mid, mid);
                        break;
                    }
                    if (gm < 0.0) == (prev < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(0.5 * (lo + hi))
            } else {
                None
            };
            if let Some(theta) = root {
                let (p, lambda) = point_at(branch, theta);
                found.push((canonical_rep(&p), lambda));
            }
            prev = cur;
        }
    }

    let mut unique: Vec<(Point3, f64)> = Vec::new();
    for (p, lambda) in found {
        let dup = unique.iter().any(|(q, _)| {
            let d = p - q;
            (d - to_point(&round_point(&d))).amax() < 1e-6
        });
        if !dup {
            unique.push((p, lambda));
        }
    }

    let frame = PlaneFrame::new(dir);
    let hn = dir.norm();
    let mut points = Vec::with_capacity(unique.len());
    for (position, lambda) in unique {
        let hessian = model.hessian(&position);
        let q11 = frame.e1.dot(&(hessian * frame.e1));
        let q12 = frame.e1.dot(&(hessian * frame.e2));
        let q22 = frame.e2.dot(&(hessian * frame.e2));
        let det = q11 * q22 - q12 * q12;
        let scale = model.hessian_bound().powi(2);
        if det.abs() < 1e-12 * scale {
            return Err(NtcError::DegenerateDirection(format!(
                "{dir} has a degenerate critical point"
            )));
        }
        let (kind, separatrix_dirs) = if det < 0.0 {
            let mu = (-det).sqrt();
            let a = [q22, mu - q12];
            let b = [mu + q12, -q11];
            let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
            let v3 = (frame.e1 * v[0] + frame.e2 * v[1]).normalize();
            (CriticalKind::Saddle, Some([v3, -v3]))
        } else {
            (CriticalKind::Extremum, None)
        };
        points.push(CriticalPoint {
            position,
            kind,
            separatrix_dirs,
            grad_sign: if lambda * hn > 0.0 { 1 } else { -1 },
            lambda,
            hessian,
        });
    }
    // deterministic order
    points.sort_by(|a, b| {
        let ka = [a.position.x, a.position.y, a.position.z];
        let kb = [b.position.x, b.position.y, b.position.z];
        ka.partial_cmp(&kb).unwrap()
    });
    if cfg.strict && points.len() != 4 {
        return Err(NtcError::UnexpectedCount(points.len()));
    }
    Ok(points)
}

/// Newton corrector and predictor for one plane of the foliation.
struct Leaf<'a> {
    slice: &'a EnergySlice,
    h: Point3,
    hhat: Point3,
    /// `⟨x, Ĥ⟩` on the plane.
    level: f64,
    bound: f64,
    cfg: &'a TracerConfig,
}

impl<'a> Leaf<'a> {
    fn new(slice: &'a EnergySlice, dir: &RationalDirection, through: &Point3, cfg: &'a TracerConfig) -> Self {
        let h = dir.as_point();
        let hhat = h.normalize();
        Leaf {
            slice,
            h,
            hhat,
            level: through.dot(&hhat),
            bound: slice.model.hessian_bound(),
            cfg,
        }
    }

    fn project_plane(&self, x: &Point3) -> Point3 {
        x - self.hhat * (x.dot(&self.hhat) - self.level)
    }

    /// Unit tangent of the leaf field and in-plane gradient norm.
    fn tangent(&self, x: &Point3) -> Option<(Point3, f64)> {
        let (_, g) = self.slice.residual(x);
        let w = g.cross(&self.h);
        let n = w.norm();
        if n < 1e-300 {
            return None;
        }
        Some((w / n, n / self.h.norm()))
    }

    /// Newton projection onto `{f = c}` within the plane.
    fn correct(&self, x: &Point3) -> Option<Point3> {
        let mut x = self.project_plane(x);
        for _ in 0..16 {
            let (r, g) = self.slice.residual(&x);
            if r.abs() <= 1e-12 {
                return Some(self.project_plane(&x));
            }
            let gp = g - self.hhat * g.dot(&self.hhat);
            let gp2 = gp.norm_squared();
            if gp2 < 1e-24 {
                return None;
            }
            x -= gp * (r / gp2);
        }
        None
    }

    fn natural_step(&self, gp: f64) -> f64 {
        (self.cfg.step_fraction * gp / self.bound).min(self.cfg.max_step)
    }

    /// One accepted step along the leaf from `x` with tangent `t`.
    fn step(&self, x: &Point3, t: &Point3, gp: f64) -> Result<(Point3, Point3, f64), NtcError> {
        let mut h = self.natural_step(gp);
        while h >= self.cfg.min_step {
            if let Some(y) = self.correct(&(x + t * h)) {
                if (y - x).norm() <= 1.5 * h {
                    if let Some((t2, gp2)) = self.tangent(&y) {
                        if t2.dot(t) >= 0.8 {
                            return Ok((y, t2, gp2));
                        }
                    }
                }
            }
            h *= 0.5;
        }
        Err(NtcError::LostSurface(format!("step underflow at {x:?}")))
    }
}

/// Saddle lifts `q + k` lying on the plane of `p`: pairs `(index, ⟨k, H⟩)`.
fn coplanar_saddles(points: &[CriticalPoint], p: &Point3, dir: &RationalDirection) -> Vec<(usize, i64)> {
    let h = dir.as_point();
    points
        .iter()
        .enumerate()
        .filter(|(_, q)| q.is_saddle())
        .filter_map(|(i, q)| {
            let s = (p - q.position).dot(&h);
            let n = s.round();
            ((s - n).abs() < 1e-7).then_some((i, n as i64))
        })
        .collect()
}

/// The two loops of the figure-eight through `points[index]`.
///
/// Each trace leaves the saddle along one outgoing direction and ends when it
/// is captured by a lift of the same saddle. Passing through a lift of another
/// coplanar saddle continues along that saddle's outgoing branch on the
/// configured side.
pub fn trace_separatrix_loops(
    slice: &EnergySlice,
    dir: &RationalDirection,
    points: &[CriticalPoint],
    index: usize,
    cfg: &TracerConfig,
) -> Result<[TracedLoop; 2], NtcError> {
    let saddle = &points[index];
    let dirs = saddle
        .separatrix_dirs
        .ok_or_else(|| NtcError::DegenerateDirection("not a saddle".into()))?;
    let a = trace_one_separatrix(slice, dir, points, index, &dirs[0], cfg)?;
    let b = trace_one_separatrix(slice, dir, points, index, &dirs[1], cfg)?;
    Ok([a, b])
}

fn trace_one_separatrix(
    slice: &EnergySlice,
    dir: &RationalDirection,
    points: &[CriticalPoint],
    index: usize,
    out: &Point3,
    cfg: &TracerConfig,
) -> Result<TracedLoop, NtcError> {
    let p = points[index].position;
    let leaf = Leaf::new(slice, dir, &p, cfg);
    let hi = dir.components();
    let coplanar = coplanar_saddles(points, &p, dir);
    let r = cfg.capture_radius;

    let leave = |from: &Point3, v: &Point3| -> Result<(Point3, Point3, f64), NtcError> {
        let x = leaf
            .correct(&(from + v * cfg.offset))
            .ok_or_else(|| NtcError::LostSurface("cannot leave saddle".into()))?;
        let (t, gp) = leaf
            .tangent(&x)
            .ok_or_else(|| NtcError::LostSurface("zero field".into()))?;
        Ok((x, t, gp))
    };

    let (mut x, mut t, mut gp) = leave(&p, out)?;
    let mut pts = vec![p, x];
    let mut arclength = (x - p).norm();
    let mut ignore: Option<(usize, IVec3)> = Some((index, [0, 0, 0]));
    let mut junctions = 0;
    let mut steps = 0usize;

    loop {
        steps += 1;
        if steps > cfg.step_cap {
            return Err(NtcError::StepLimit { steps, arclength });
        }
        let (y, t2, gp2) = leaf.step(&x, &t, gp)?;
        arclength += (y - x).norm();
        pts.push(y);
        (x, t, gp) = (y, t2, gp2);

        if let Some((qi, k)) = ignore {
            let d = x - points[qi].position - to_point(&k);
            if d.norm() >= r {
                ignore = None;
            }
        }

        let mut hit = None;
        for &(qi, n_q) in &coplanar {
            let q = points[qi].position;
            let k = round_point(&(x - q));
            if dot_i(&k, &hi) != n_q || ignore == Some((qi, k)) {
                continue;
            }
            if (x - q - to_point(&k)).norm() < r {
                hit = Some((qi, k));
                break;
            }
        }
        let Some((qi, k)) = hit else { continue };
        let lift = points[qi].position + to_point(&k);
        arclength += (lift - x).norm();
        pts.push(lift);
        if qi == index {
            let frame = PlaneFrame::new(dir);
            let sign = if k == [0, 0, 0] {
                orbit_sign(&pts[..pts.len() - 1], &frame)
            } else {
                OrbitSign::Unknown
            };
            return Ok(TracedLoop {
                path: CoverPath::new(pts),
                start: p,
                winding: k,
                sign,
                arclength,
                junctions,
            });
        }
        junctions += 1;
        if junctions > cfg.max_junctions {
            return Err(NtcError::StepLimit { steps, arclength });
        }
        let q = &points[qi];
        let d_in = (x - lift).normalize();
        let [v0, v1] = q.separatrix_dirs.expect("coplanar points are saddles");
        let side = cfg.junction_side;
        let v_out = if side * q.quad(&(d_in + v0)) >= side * q.quad(&(d_in + v1)) {
            v0
        } else {
            v1
        };
        let (x2, t2, gp2) = leave(&lift, &v_out)?;
        arclength += (x2 - lift).norm();
        pts.push(x2);
        (x, t, gp) = (x2, t2, gp2);
        ignore = Some((qi, k));
    }
}

/// The closed leaf through `seed` on its plane, lifted to the cover.
///
/// The trace stops when it crosses the normal section through a translate
/// `seed + k` with `k ∈ Z³ ∩ H⊥`; the path then ends exactly at that translate.
pub fn trace_closed_orbit(
    slice: &EnergySlice,
    dir: &RationalDirection,
    seed: &Point3,
    points: &[CriticalPoint],
    max_arclength: f64,
    cfg: &TracerConfig,
) -> Result<TracedLoop, NtcError> {
    let leaf = Leaf::new(slice, dir, seed, cfg);
    let hi = dir.components();
    let x0 = leaf
        .correct(seed)
        .ok_or_else(|| NtcError::LostSurface("seed does not project".into()))?;
    let near_critical = |x: &Point3| {
        points.iter().any(|q| {
            let d = x - q.position;
            (d - to_point(&round_point(&d))).norm() < cfg.near_saddle_radius
        })
    };
    if near_critical(&x0) {
        return Err(NtcError::NearSaddle);
    }
    let (t0, gp0) = leaf.tangent(&x0).ok_or(NtcError::NearSaddle)?;
    let section_tol = (0.5 * gp0 / leaf.bound).min(0.05);

    let (mut x, mut t, mut gp) = (x0, t0, gp0);
    let mut pts = vec![x0];
    let mut arclength = 0.0;
    let mut left = false;
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > cfg.step_cap || arclength > max_arclength {
            return Err(NtcError::StepLimit { steps, arclength });
        }
        let (y, t2, gp2) = leaf.step(&x, &t, gp)?;
        if near_critical(&y) {
            return Err(NtcError::NearSaddle);
        }
        arclength += (y - x).norm();
        let k = round_point(&(y - x0));
        if !left && (y - x0).norm() > section_tol {
            left = true;
        }
        if (left || k != [0, 0, 0]) && dot_i(&k, &hi) == 0 {
            let target = x0 + to_point(&k);
            let phi_x = (x - target).dot(&t0);
            let phi_y = (y - target).dot(&t0);
            if phi_x < 0.0 && phi_y >= 0.0 {
                let s = phi_x / (phi_x - phi_y);
                let cross = x + (y - x) * s;
                if (cross - target).norm() < section_tol {
                    arclength += (target - x).norm() - (y - x).norm();
                    pts.push(target);
                    let frame = PlaneFrame::new(dir);
                    let sign = if k == [0, 0, 0] {
                        orbit_sign(&pts[..pts.len() - 1], &frame)
                    } else {
                        OrbitSign::Unknown
                    };
                    return Ok(TracedLoop {
                        path: CoverPath::new(pts),
                        start: x0,
                        winding: k,
                        sign,
                        arclength,
                        junctions: 0,
                    });
                }
            }
        }
        pts.push(y);
        (x, t, gp) = (y, t2, gp2);
    }
}

/// For a saddle connected to its own translate `p + k`, the loops have
/// windings `k` and `−k`. Any nearby irrational direction breaks the
/// connection and leaves the trivial loop `a ⊕ (b + k)`, returned here.
pub fn join_opposite_loops(a: &TracedLoop, b: &TracedLoop) -> Option<TracedLoop> {
    let k = a.winding;
    if k == [0, 0, 0] || b.winding != [-k[0], -k[1], -k[2]] {
        return None;
    }
    let shift = to_point(&k);
    let shifted = CoverPath::new(b.path.points.iter().map(|p| p + shift).collect());
    let path = a.path.concat(&shifted);
    Some(TracedLoop {
        path,
        start: a.start,
        winding: [0, 0, 0],
        sign: OrbitSign::Unknown,
        arclength: a.arclength + b.arclength,
        junctions: a.junctions + b.junctions + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleClass {
    FullyOpen,
    HalfClosed,
    FullyClosed,
}

pub fn classify_saddle(loops: &[TracedLoop; 2]) -> SaddleClass {
    match loops.iter().filter(|l| l.is_trivial()).count() {
        0 => SaddleClass::FullyOpen,
        1 => SaddleClass::HalfClosed,
        _ => SaddleClass::FullyClosed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{analytic_critical_points_cos0, FermiModel};

    fn cos0() -> EnergySlice {
        EnergySlice::new(FermiModel::cosine(), 0.0).unwrap()
    }

    fn dist_mod1(a: &Point3, b: &Point3) -> f64 {
        let d = a - b;
        (d - to_point(&round_point(&d))).amax()
    }

    #[test]
    fn four_saddles_reference_direction() {
        let dir = RationalDirection::new(22, 23, 100).unwrap();
        let pts = find_critical_points(&cos0(), &dir, &TracerConfig::default()).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| p.is_saddle()));
        let target = Point3::new(0.035, 0.463, 0.25);
        assert!(pts.iter().any(|p| dist_mod1(&p.position, &target) < 2e-3));
        let model = FermiModel::cosine();
        for p in &pts {
            assert!(model.evaluate(&p.position).abs() < 1e-10);
            let (_, g) = model.evaluate_with_gradient(&p.position);
            let h = dir.as_point();
            assert!(g.cross(&h).norm() / (g.norm() * h.norm()) < 1e-9);
        }
    }

    #[test]
    fn root_on_a_sample_point() {
        // on H = (1, 1, 10) at E = −1/2 the roots sit at λ = ±0.8·sin(π/4), a sample
        let slice = EnergySlice::new(FermiModel::piecewise_quadratic(), -0.5).unwrap();
        let dir = RationalDirection::new(1, 1, 10).unwrap();
        let pts = find_critical_points(&slice, &dir, &TracerConfig::default()).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!(slice.residual(&p.position).0.abs() < 1e-10);
            // the z coordinate solves 16 (z − ¼)² = ½
            let d = p.position.z - 0.25;
            let d = d - d.round();
            assert!((16.0 * d * d - 0.5).abs() < 1e-9 || (16.0 * (p.position.z - 0.75).powi(2) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_analytic_points() {
        let dir = RationalDirection::new(53, 268 / 2, 500).unwrap();
        let pts = find_critical_points(&cos0(), &dir, &TracerConfig::default()).unwrap();
        let (a, b) = dir.chart().unwrap();
        let analytic = analytic_critical_points_cos0(a, b).unwrap();
        for q in &analytic {
            let best = pts
                .iter()
                .map(|p| dist_mod1(&p.position, q))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "{best}");
        }
    }

    #[test]
    fn sphere_level_has_no_saddles() {
        let slice = EnergySlice::new(FermiModel::cosine(), 2.5).unwrap();
        let dir = RationalDirection::new(1, 2, 5).unwrap();
        let pts = find_critical_points(&slice, &dir, &TracerConfig::default()).unwrap();
        assert!(pts.iter().all(|p| !p.is_saddle()));
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn flat_direction_is_degenerate() {
        let dir = RationalDirection::new(1, -1, 1).unwrap();
        let err = find_critical_points(&cos0(), &dir, &TracerConfig::default()).unwrap_err();
        assert!(matches!(err, NtcError::DegenerateDirection(_)));
    }

    #[test]
    fn strict_mode_counts() {
        let slice = EnergySlice::new(FermiModel::cosine(), 2.5).unwrap();
        let dir = RationalDirection::new(1, 2, 5).unwrap();
        let cfg = TracerConfig {
            strict: true,
            ..TracerConfig::default()
        };
        assert_eq!(
            find_critical_points(&slice, &dir, &cfg).unwrap_err(),
            NtcError::UnexpectedCount(2)
        );
    }

    #[test]
    fn reference_saddle_has_one_trivial_loop() {
        let slice = cos0();
        let dir = RationalDirection::new(22, 23, 100).unwrap();
        let cfg = TracerConfig::default();
        let pts = find_critical_points(&slice, &dir, &cfg).unwrap();
        let target = Point3::new(0.035, 0.463, 0.25);
        let i = pts.iter().position(|p| dist_mod1(&p.position, &target) < 2e-3).unwrap();
        let loops = trace_separatrix_loops(&slice, &dir, &pts, i, &cfg).unwrap();
        assert_eq!(loops.iter().filter(|l| l.is_trivial()).count(), 1);
        for l in &loops {
            assert!(l.path.closed_residual < 1e-6);
        }
    }

    #[test]
    fn half_closed_everywhere_in_zone_interior() {
        let slice = cos0();
        let dir = RationalDirection::from_chart(0.53, 0.268, 1000).unwrap();
        let cfg = TracerConfig::default();
        let pts = find_critical_points(&slice, &dir, &cfg).unwrap();
        for i in 0..4 {
            let loops = trace_separatrix_loops(&slice, &dir, &pts, i, &cfg).unwrap();
            assert_eq!(classify_saddle(&loops), SaddleClass::HalfClosed);
        }
    }

    #[test]
    fn closed_orbit_inside_trivial_loop() {
        let slice = cos0();
        let dir = RationalDirection::from_chart(0.22, 0.23, 1000).unwrap();
        let cfg = TracerConfig::default();
        let pts = find_critical_points(&slice, &dir, &cfg).unwrap();
        let analytic = analytic_critical_points_cos0(0.22, 0.23).unwrap();
        let i = pts
            .iter()
            .position(|p| dist_mod1(&p.position, &analytic[0]) < 1e-8)
            .unwrap();
        let loops = trace_separatrix_loops(&slice, &dir, &pts, i, &cfg).unwrap();
        let trivial = loops.iter().find(|l| l.is_trivial()).unwrap();
        let frame = PlaneFrame::new(&dir);
        let path = &trivial.path.points;
        let mid = path[path.len() / 2];
        // one side of the critical plane carries closed orbits near the loop
        let mut found = 0;
        for side in [1.0, -1.0] {
            let seed = mid + frame.normal * (side * 1e-4);
            let Ok(orbit) = trace_closed_orbit(&slice, &dir, &seed, &pts, 100.0, &cfg) else {
                continue;
            };
            if orbit.winding != [0, 0, 0] {
                continue;
            }
            assert!(orbit.path.closed_residual < 1e-6);
            // the orbit lies inside the trivial loop (seen along H)
            let poly: Vec<[f64; 2]> = path.iter().map(|p| frame.coords(p)).collect();
            let c = orbit.path.points.iter().sum::<Point3>() / orbit.path.points.len() as f64;
            let w = crate::torus::planar_winding_number(&poly, frame.coords(&c)).unwrap();
            assert_eq!(w.abs(), 1);
            found += 1;
        }
        assert_eq!(found, 1);
    }
}
