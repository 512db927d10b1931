//! Cylinders of closed orbits, zone boundary curves and the averaged Euler
//! characteristic.

use crate::error::NtcError;
use crate::models::{analytic_critical_points_cos0, EnergySlice, FermiModel, Point3};
use crate::topology::{Classifier, Outcome};
use crate::torus::{round_point, to_point, IVec3, RationalDirection};
use crate::tracer::{
    find_critical_points, join_opposite_loops, trace_closed_orbit, trace_separatrix_loops, CriticalPoint, OrbitSign,
    TracedLoop, TracerConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub base: CriticalPoint,
    pub base_id: usize,
    /// Index of the critical point at the far end.
    pub opposite_id: usize,
    /// The far end is `points[opposite_id].position + translation`.
    pub translation: IVec3,
    /// Distance between the planes of the two ends.
    pub height: f64,
    pub sign: OrbitSign,
    /// `+1` when the cylinder extends along `+H` from its base.
    pub side: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderConfig {
    pub tracer: TracerConfig,
    /// Distance between successive planes of the march.
    pub march_step: f64,
    /// Width below which the end of the cylinder is considered located.
    pub end_tol: f64,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        CylinderConfig {
            tracer: TracerConfig::default(),
            march_step: 0.01,
            end_tol: 1e-9,
        }
    }
}

fn trivial_loop(
    slice: &EnergySlice,
    dir: &RationalDirection,
    points: &[CriticalPoint],
    index: usize,
    cfg: &TracerConfig,
) -> Result<TracedLoop, NtcError> {
    let loops = trace_separatrix_loops(slice, dir, points, index, cfg)?;
    let trivial: Vec<_> = loops.iter().filter(|l| l.is_trivial()).collect();
    match trivial.len() {
        1 => Ok(trivial[0].clone()),
        0 if cfg.resolve_self_connections => join_opposite_loops(&loops[0], &loops[1]).ok_or(NtcError::NoCylinder),
        _ => Err(NtcError::NoCylinder),
    }
}

/// A point of the loop far from critical points, where seeds are stable.
fn regular_point(slice: &EnergySlice, dir: &RationalDirection, path: &[Point3]) -> Point3 {
    let h = dir.as_point();
    let mut best = (f64::NEG_INFINITY, path[0]);
    for p in path {
        let (_, g) = slice.residual(p);
        let w = g.cross(&h).norm();
        if w > best.0 {
            best = (w, *p);
        }
    }
    best.1
}

/// Follows the closed orbits from the base saddle's trivial loop through
/// successive planes until they collapse onto another critical leaf.
pub fn trace_cylinder(
    slice: &EnergySlice,
    dir: &RationalDirection,
    points: &[CriticalPoint],
    base_id: usize,
    cfg: &CylinderConfig,
) -> Result<Cylinder, NtcError> {
    // the march stops on topology changes, so orbits may pass arbitrarily close to saddles
    let tcfg = &TracerConfig {
        near_saddle_radius: 1e-9,
        ..cfg.tracer.clone()
    };
    let base = &points[base_id];
    let hhat = dir.unit();
    let step = cfg.march_step;
    let lp = trivial_loop(slice, dir, points, base_id, tcfg)?;
    let start = regular_point(slice, dir, &lp.path.points);
    let cap = |prev: f64| 3.0 * prev + 1.0;

    // past the far end the seeds can land on the adjacent cylinder, whose
    // orbits have the opposite sign
    let attempt = |from: &Point3, t_from: f64, t: f64, side: f64, prev_len: f64, sign: Option<OrbitSign>| {
        let seed = from + hhat * (side * (t - t_from));
        match trace_closed_orbit(slice, dir, &seed, points, cap(prev_len), tcfg) {
            Ok(orbit) if orbit.is_trivial() && sign.is_none_or(|s| s == orbit.sign) => Some(orbit),
            _ => None,
        }
    };

    // find the side carrying closed orbits
    let mut probe = step / 4.0;
    let mut chosen = None;
    for _ in 0..4 {
        for side in [1.0, -1.0] {
            if let Some(o) = attempt(&start, 0.0, probe, side, lp.arclength, None) {
                chosen = Some((side, o));
                break;
            }
        }
        if chosen.is_some() {
            break;
        }
        probe /= 8.0;
    }
    let (side, mut orbit) = chosen.ok_or(NtcError::NoCylinder)?;
    let sign = orbit.sign;
    let mut t_good = probe;

    // march, then bisect the first failure
    let mut t_bad = None;
    while t_bad.is_none() {
        let t = t_good + step;
        let from = regular_point(slice, dir, &orbit.path.points);
        match attempt(&from, t_good, t, side, orbit.arclength, Some(sign)) {
            Some(o) => {
                orbit = o;
                t_good = t;
            }
            None => t_bad = Some(t),
        }
        // no cylinder is taller than the period diagonal
        if t_good > 3f64.sqrt() {
            return Err(NtcError::NoCylinder);
        }
    }
    let mut t_bad = t_bad.unwrap();
    while t_bad - t_good > cfg.end_tol {
        let t = 0.5 * (t_good + t_bad);
        let from = regular_point(slice, dir, &orbit.path.points);
        match attempt(&from, t_good, t, side, orbit.arclength, Some(sign)) {
            Some(o) => {
                orbit = o;
                t_good = t;
            }
            None => t_bad = t,
        }
    }

    // the far base: the critical lift nearest the last orbit, near its plane
    let p = base.position;
    let plane_tol = (1e3 * cfg.end_tol).max(1e-6) + 0.05 * step;
    let mut best: Option<(f64, usize, IVec3)> = None;
    for (qi, q) in points.iter().enumerate() {
        if !q.is_saddle() {
            continue;
        }
        for x in &orbit.path.points {
            let k = round_point(&(x - q.position));
            let lift = q.position + to_point(&k);
            let t_lift = side * (lift - p).dot(&hhat);
            if (t_lift - t_good).abs() > plane_tol {
                continue;
            }
            let d = (x - lift).norm();
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, qi, k));
            }
        }
    }
    let (_, opposite_id, translation) = best.ok_or(NtcError::NoCylinder)?;
    let far = points[opposite_id].position + to_point(&translation);
    Ok(Cylinder {
        base: base.clone(),
        base_id,
        opposite_id,
        translation,
        height: (far - p).dot(&hhat).abs(),
        sign,
        side: side as i8,
    })
}

/// `⟨(a, b, 1), p₁ − p₄ − (l, m, n)⟩` for the zero-level cosine model.
///
/// Up to the factor `|(a, b, 1)|` this is the height of a cylinder from `p₁`
/// to `p₄ + (l, m, n)`; its zeros are candidate zone boundaries.
pub fn zone_boundary_residual(a: f64, b: f64, lmn: IVec3) -> Result<f64, NtcError> {
    let [p1, _, _, p4] = analytic_critical_points_cos0(a, b)?;
    let d = p1 - p4 - to_point(&lmn);
    Ok(d.dot(&Point3::new(a, b, 1.0)))
}

/// All distinct cylinders of a labeled direction.
pub fn cylinders(
    slice: &EnergySlice,
    dir: &RationalDirection,
    cfg: &CylinderConfig,
) -> Result<Vec<Cylinder>, NtcError> {
    let points = find_critical_points(slice, dir, &cfg.tracer)?;
    let mut found: Vec<Cylinder> = Vec::new();
    for i in 0..points.len() {
        if !points[i].is_saddle() || found.iter().any(|c| c.base_id == i || c.opposite_id == i) {
            continue;
        }
        found.push(trace_cylinder(slice, dir, &points, i, cfg)?);
    }
    Ok(found)
}

/// `Σ h(electron) − Σ h(hole)` over the cylinders of the direction.
pub fn averaged_euler_characteristic(
    slice: &EnergySlice,
    dir: &RationalDirection,
    cfg: &CylinderConfig,
) -> Result<f64, NtcError> {
    let cyl = cylinders(slice, dir, cfg)?;
    if cyl.len() != 2 {
        return Err(NtcError::NoCylinder);
    }
    Ok(cyl
        .iter()
        .map(|c| match c.sign {
            OrbitSign::Electron => c.height,
            OrbitSign::Hole => -c.height,
            OrbitSign::Unknown => 0.0,
        })
        .sum())
}

/// Largest `e` such that the direction stays labeled on `(−e, 0]`, by
/// bisection. Intervals of open orbits are symmetric, so this is also the
/// upper end.
pub fn open_orbit_energy_interval(model: &FermiModel, dir: &RationalDirection, tol: f64, cfg: &TracerConfig) -> f64 {
    let labeled = |c: f64| match EnergySlice::new(model.clone(), c) {
        Ok(slice) => matches!(
            Classifier::new(slice, cfg.clone()).classify(dir).outcome,
            Outcome::Labeled(_)
        ),
        Err(_) => false,
    };
    if !labeled(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, -model.genus_window.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if labeled(-mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
