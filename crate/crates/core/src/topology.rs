//! Saddle taxonomy and Miller indices of stability zones.

use std::fmt;

use crate::error::NtcError;
use crate::models::{EnergySlice, Point3};
use crate::torus::{dot_i, gcd, lattice_winding_sum, round_point, to_point, IVec3, RationalDirection};
use crate::tracer::{
    classify_saddle, find_critical_points, join_opposite_loops, trace_separatrix_loops, CriticalPoint, SaddleClass,
    TracedLoop, TracerConfig,
};

/// Coordinates `(j, k)` orthogonal to axis `i`, ordered so that `(j, k, i)` is right-handed.
pub const AXIS_PAIRS: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

/// Core lines `{o + t·eᵢ} + Z³` of the handles on both sides of the slice.
#[derive(Debug, Clone, PartialEq)]
pub struct HandleCores {
    /// Offset of the core in `{f > c}` along axis `i`, in the `AXIS_PAIRS[i]` coordinates.
    pub offsets: [[f64; 2]; 3],
    /// `min f − c` along each positive core.
    pub margins: [f64; 3],
    /// Cores in `{f < c}`.
    pub negative_offsets: [[f64; 2]; 3],
    /// `c − max f` along each negative core.
    pub negative_margins: [f64; 3],
}

/// Sign-normalized integer label of a stability zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MillerIndex(pub IVec3);

impl MillerIndex {
    /// Normalizes the sign so that `⟨l, H⟩ > 0`, or the first nonzero
    /// component is positive when `⟨l, H⟩ = 0`.
    pub fn normalized(l: IVec3, dir: &RationalDirection) -> Self {
        let s = dot_i(&l, &dir.components());
        let flip = if s != 0 {
            s < 0
        } else {
            l.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0)
        };
        if flip {
            MillerIndex([-l[0], -l[1], -l[2]])
        } else {
            MillerIndex(l)
        }
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.0[0], self.0[1]), self.0[2]) == 1
    }

    /// The label of the mirror direction `(b, a)`.
    pub fn swapped(&self) -> Self {
        MillerIndex([self.0[1], self.0[0], self.0[2]])
    }
}

impl fmt::Display for MillerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.0[0], self.0[1], self.0[2])
    }
}

fn line_extremes(slice: &EnergySlice, axis: usize, offset: [f64; 2], samples: usize) -> (f64, f64) {
    let [j, k] = AXIS_PAIRS[axis];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in 0..samples {
        let mut p = Point3::zeros();
        p[axis] = s as f64 / samples as f64;
        p[j] = offset[0];
        p[k] = offset[1];
        let v = slice.model.evaluate(&p);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Per axis, the line offset maximizing the minimum of `f` along the line.
///
/// Fails unless every axis has a line inside `{f > c}` and another inside
/// `{f < c}`, which is the case exactly when the slice has handles along all
/// three axes.
pub fn find_handle_cores(slice: &EnergySlice, scan_res: usize) -> Result<HandleCores, NtcError> {
    let c = slice.energy;
    let res = scan_res.max(2);
    let samples = 128;
    let mut cores = HandleCores {
        offsets: [[0.0; 2]; 3],
        margins: [0.0; 3],
        negative_offsets: [[0.0; 2]; 3],
        negative_margins: [0.0; 3],
    };
    for axis in 0..3 {
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        let mut worst = (f64::INFINITY, [0.0, 0.0]);
        for a in 0..res {
            for b in 0..res {
                let o = [a as f64 / res as f64, b as f64 / res as f64];
                let (lo, hi) = line_extremes(slice, axis, o, samples);
                if lo > best.0 {
                    best = (lo, o);
                }
                if hi < worst.0 {
                    worst = (hi, o);
                }
            }
        }
        if best.0 <= c || worst.0 >= c {
            return Err(NtcError::NoCore(c));
        }
        cores.offsets[axis] = best.1;
        cores.margins[axis] = best.0 - c;
        cores.negative_offsets[axis] = worst.1;
        cores.negative_margins[axis] = c - worst.0;
    }
    Ok(cores)
}

fn project(points: &[Point3], pair: [usize; 2]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p[pair[0]], p[pair[1]]]).collect()
}

/// Linking numbers of a loop closed in the cover with the line families
/// `{o + t·eᵢ} + Z³`, one offset per axis.
pub fn core_linking(points: &[Point3], offsets: &[[f64; 2]; 3]) -> Result<IVec3, NtcError> {
    // drop the repeated endpoint
    let body = match (points.first(), points.last()) {
        (Some(a), Some(b)) if points.len() > 1 && (a - b).norm() < 1e-12 => &points[..points.len() - 1],
        _ => points,
    };
    let mut l = [0i64; 3];
    for axis in 0..3 {
        let poly = project(body, AXIS_PAIRS[axis]);
        let o = offsets[axis];
        l[axis] = match lattice_winding_sum(&poly, o) {
            Ok(s) => s,
            Err(NtcError::CoreOnLoop) => lattice_winding_sum(&poly, [o[0] + 1e-6, o[1] + 1e-6])?,
            Err(e) => return Err(e),
        };
    }
    Ok(l)
}

/// The Miller index carried by the trivial loop of a half-closed saddle.
///
/// A trivial loop bounds on one side of the slice only, so it links the cores
/// of that side and none of the other; whichever linking triple is nonzero is
/// the label.
pub fn miller_index_of_trivial_loop(
    lp: &TracedLoop,
    cores: &HandleCores,
    dir: &RationalDirection,
) -> Result<MillerIndex, NtcError> {
    if !lp.is_trivial() {
        return Err(NtcError::NotClosed(lp.path.closed_residual));
    }
    let pos = core_linking(&lp.path.points, &cores.offsets)?;
    let neg = core_linking(&lp.path.points, &cores.negative_offsets)?;
    let l = match (pos == [0, 0, 0], neg == [0, 0, 0]) {
        (false, true) => pos,
        (true, false) => neg,
        (true, true) => return Err(NtcError::NoCore(0.0)),
        (false, false) => {
            let (a, b) = (MillerIndex::normalized(pos, dir), MillerIndex::normalized(neg, dir));
            if a != b {
                return Err(NtcError::Malformed(format!("loop links both sides: {a} / {b}")));
            }
            pos
        }
    };
    Ok(MillerIndex::normalized(l, dir))
}

fn dist_mod1(a: &Point3, b: &Point3) -> f64 {
    let d = a - b;
    (d - to_point(&round_point(&d))).amax()
}

/// Drops each extremum together with the nearest saddle when they are closer
/// than `radius`. Such pairs sit at the creases of a C¹ profile; the disk
/// between them is below tracing resolution and carries no topology.
pub fn cancel_close_pairs(mut points: Vec<CriticalPoint>, radius: f64) -> Vec<CriticalPoint> {
    let mut i = 0;
    while i < points.len() {
        if points[i].is_saddle() {
            i += 1;
            continue;
        }
        let nearest = (0..points.len())
            .filter(|&j| points[j].is_saddle())
            .map(|j| (dist_mod1(&points[i].position, &points[j].position), j))
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match nearest {
            Some((d, j)) if d < radius => {
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                points.remove(hi);
                points.remove(lo);
                i = lo;
            }
            _ => i += 1,
        }
    }
    points
}

/// True when the loop links no handle core, i.e. it bounds a disk on the slice.
pub fn bounds_disk(lp: &TracedLoop, cores: &HandleCores) -> bool {
    matches!(
        (
            core_linking(&lp.path.points, &cores.offsets),
            core_linking(&lp.path.points, &cores.negative_offsets)
        ),
        (Ok([0, 0, 0]), Ok([0, 0, 0]))
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Labeled(MillerIndex),
    /// A saddle is fully open or fully closed: no rank-2 tori.
    Topological,
    /// The numerics failed; the direction is left undecided.
    Numerical(String),
}

impl Outcome {
    pub fn label(&self) -> Option<MillerIndex> {
        match self {
            Outcome::Labeled(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport {
    pub outcome: Outcome,
    pub classes: Vec<SaddleClass>,
    /// Labels computed from each half-closed saddle, in order.
    pub labels: Vec<MillerIndex>,
    pub total_arclength: f64,
    /// Connections between distinct coplanar saddles crossed while tracing.
    pub junctions: usize,
    /// Saddles whose loops were joined across a connection with their own translate.
    pub self_connections: usize,
}

/// Chart resolution of the neighbours probed off a connection line, unless
/// set with [`Classifier::with_probe_resolution`].
pub const DEFAULT_PROBE_RESOLUTION: i64 = 1000;

/// Classifies directions on one slice; the handle cores are found once.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub slice: EnergySlice,
    pub cores: Option<HandleCores>,
    pub cfg: TracerConfig,
    pub probe_resolution: i64,
}

impl Classifier {
    pub fn new(slice: EnergySlice, cfg: TracerConfig) -> Self {
        let cores = find_handle_cores(&slice, 24).ok();
        Classifier {
            slice,
            cores,
            cfg,
            probe_resolution: DEFAULT_PROBE_RESOLUTION,
        }
    }

    /// Grid resolution whose cells are probed around directions on a
    /// connection line; a sweep of `N × N` directions uses `N`.
    pub fn with_probe_resolution(mut self, resolution: i64) -> Self {
        self.probe_resolution = resolution.max(1);
        self
    }

    pub fn classify(&self, dir: &RationalDirection) -> DirectionReport {
        let mut report = self.classify_with(dir, true);
        if report.outcome == Outcome::Topological {
            if let Some(first) = report.labels.first().copied() {
                if report.labels.iter().all(|l| *l == first) && self.mirror_label_is(dir, &first) {
                    report.outcome = Outcome::Labeled(first);
                }
            }
        }
        report
    }

    /// Directions fixed by a swap of two coordinates carry saddle connections
    /// between mirror saddles. The zones on the two sides of the mirror are
    /// images of each other, so such a direction is inside a zone when the
    /// label is swap invariant and the chart neighbour one cell off the
    /// mirror has it.
    fn mirror_label_is(&self, dir: &RationalDirection, label: &MillerIndex) -> bool {
        let h = dir.components();
        let planes: Vec<(usize, usize)> = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .filter(|&(i, j)| h[i] == h[j])
            .collect();
        let [(i, j)] = planes[..] else {
            return false;
        };
        if h[2] == 0 || label.0[i] != label.0[j] {
            return false;
        }
        let r = self.probe_resolution;
        let mut p = h.map(|c| c * r);
        // step into the chart: a for a = b and a = 1, b for b = 1
        let step = if (i, j) == (1, 2) { 1 } else { 0 };
        p[step] -= h[2];
        RationalDirection::new(p[0], p[1], p[2])
            .is_ok_and(|d| self.classify_with(&d, false).outcome == Outcome::Labeled(*label))
    }

    /// True when the chart neighbours of `dir` one cell away across the
    /// connection line `⟨H, k⟩ = 0`, on both sides, are labeled `label`.
    fn off_line_label_is(&self, dir: &RationalDirection, k: &IVec3, label: &MillerIndex) -> bool {
        let h = dir.components();
        if h[2] == 0 {
            return false;
        }
        let r = self.probe_resolution;
        let i = if k[0].abs() >= k[1].abs() { 0 } else { 1 };
        [-1, 1].iter().all(|&s| {
            // chart coordinate i moves by s / r
            let mut p = h.map(|c| c * r);
            p[i] += s * h[2];
            RationalDirection::new(p[0], p[1], p[2])
                .is_ok_and(|d| self.classify_with(&d, false).outcome == Outcome::Labeled(*label))
        })
    }

    fn classify_with(&self, dir: &RationalDirection, probe: bool) -> DirectionReport {
        let mut report = DirectionReport {
            outcome: Outcome::Topological,
            classes: Vec::new(),
            labels: Vec::new(),
            total_arclength: 0.0,
            junctions: 0,
            self_connections: 0,
        };
        let Some(cores) = &self.cores else {
            return report;
        };
        let points = match find_critical_points(&self.slice, dir, &self.cfg) {
            Ok(p) => cancel_close_pairs(p, self.cfg.capture_radius),
            Err(e) => {
                report.outcome = Outcome::Numerical(e.to_string());
                return report;
            }
        };
        let extrema = points.iter().filter(|p| !p.is_saddle()).count();
        if points.len() != 4 + 2 * extrema {
            report.outcome = Outcome::Numerical(format!("{} critical points", points.len()));
            return report;
        }
        let mut from_join = Vec::new();
        let mut connection = None;
        let mut capped = 0;
        let mut topological = false;
        for i in (0..points.len()).filter(|&i| points[i].is_saddle()) {
            let loops = match trace_separatrix_loops(&self.slice, dir, &points, i, &self.cfg) {
                Ok(l) => l,
                Err(e) => {
                    report.outcome = Outcome::Numerical(e.to_string());
                    return report;
                }
            };
            report.total_arclength += loops.iter().map(|l| l.arclength).sum::<f64>();
            report.junctions += loops.iter().map(|l| l.junctions).sum::<usize>();
            let class = classify_saddle(&loops);
            // saddles paired with a center: a trivial loop bounds a disk on the surface
            if extrema > 0 && loops.iter().any(|l| l.is_trivial() && bounds_disk(l, cores)) {
                capped += 1;
                continue;
            }
            report.classes.push(class);
            let joined = match class {
                SaddleClass::FullyOpen if self.cfg.resolve_self_connections => {
                    join_opposite_loops(&loops[0], &loops[1])
                }
                _ => None,
            };
            if joined.is_some() {
                report.self_connections += 1;
                connection = Some(loops[0].winding);
            } else if class != SaddleClass::HalfClosed {
                // keep going when centers are present: a later saddle may still be miscounted
                topological = true;
                if extrema == 0 {
                    break;
                }
                continue;
            }
            let trivial = joined
                .as_ref()
                .unwrap_or_else(|| loops.iter().find(|l| l.is_trivial()).unwrap());
            match miller_index_of_trivial_loop(trivial, cores, dir) {
                Ok(l) => {
                    report.labels.push(l);
                    from_join.push(joined.is_some());
                }
                Err(_) if joined.is_some() => topological = true,
                Err(e) => {
                    report.outcome = Outcome::Numerical(e.to_string());
                    return report;
                }
            }
        }
        if capped != extrema && report.junctions > 0 {
            // the center is enclosed by a chain of connected saddles (symmetric directions)
            report.outcome = Outcome::Topological;
            return report;
        }
        if capped != extrema {
            report.outcome = Outcome::Numerical(format!("{extrema} centers but {capped} capping saddles"));
            return report;
        }
        if topological {
            report.outcome = Outcome::Topological;
            return report;
        }
        // A joined pair is a connection of a saddle with its own translate. On
        // an isolated line of such connections it reproduces the label of the
        // neighbouring zone; elsewhere the saddle bounds rank-1 open orbits.
        let half: Vec<MillerIndex> = report
            .labels
            .iter()
            .zip(&from_join)
            .filter(|(_, j)| !**j)
            .map(|(l, _)| *l)
            .collect();
        report.outcome = match half.first() {
            // Every saddle is on a connection line. Inside a zone the joined
            // loops agree with the zone on both sides of the line; on a line of
            // rank-1 open orbits the neighbours are unlabeled.
            None => match (report.labels.first(), connection) {
                (Some(first), Some(k))
                    if probe && report.labels.iter().all(|l| l == first) && self.off_line_label_is(dir, &k, first) =>
                {
                    Outcome::Labeled(*first)
                }
                _ => Outcome::Topological,
            },
            Some(first) if half.iter().any(|l| l != first) => Outcome::Numerical("saddle labels disagree".into()),
            Some(first) if report.labels.iter().all(|l| l == first) => Outcome::Labeled(*first),
            Some(_) => Outcome::Topological,
        };
        report
    }
}

/// One-shot classification of a direction.
pub fn classify_direction(slice: &EnergySlice, dir: &RationalDirection, cfg: &TracerConfig) -> DirectionReport {
    Classifier::new(slice.clone(), cfg.clone()).classify(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FermiModel;
    use crate::torus::{planar_winding_number, CoverPath};
    use crate::tracer::OrbitSign;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn slice(model: FermiModel, e: f64) -> EnergySlice {
        EnergySlice::new(model, e).unwrap()
    }

    fn lp(points: Vec<Point3>) -> TracedLoop {
        let start = points[0];
        TracedLoop {
            path: CoverPath::new(points),
            start,
            winding: [0, 0, 0],
            sign: OrbitSign::Unknown,
            arclength: 0.0,
            junctions: 0,
        }
    }

    #[test]
    fn cores_cos_and_pwq() {
        let cores = find_handle_cores(&slice(FermiModel::cosine(), 0.0), 24).unwrap();
        for axis in 0..3 {
            assert_eq!(cores.offsets[axis], [0.0, 0.0]);
            assert!((cores.margins[axis] - 1.0).abs() < 1e-12);
            assert_eq!(cores.negative_offsets[axis], [0.5, 0.5]);
            assert!((cores.negative_margins[axis] - 1.0).abs() < 1e-12);
        }
        let cores = find_handle_cores(&slice(FermiModel::piecewise_quadratic(), 0.0), 24).unwrap();
        for axis in 0..3 {
            assert_eq!(cores.offsets[axis], [0.75, 0.75]);
            assert!((cores.margins[axis] - 1.0).abs() < 1e-12);
            assert_eq!(cores.negative_offsets[axis], [0.25, 0.25]);
        }
        let cores = find_handle_cores(&slice(FermiModel::cosine(), 0.99), 24).unwrap();
        assert!(cores.margins.iter().all(|&m| m > 0.0));
        for e in [-1.5, 1.5, 2.5] {
            assert_eq!(
                find_handle_cores(&slice(FermiModel::cosine(), e), 24),
                Err(NtcError::NoCore(e))
            );
        }
    }

    #[test]
    fn saddle_classes() {
        let mk = |w: IVec3| TracedLoop {
            winding: w,
            ..lp(vec![Point3::zeros(), Point3::zeros()])
        };
        assert_eq!(
            classify_saddle(&[mk([0, 0, 0]), mk([1, 0, -1])]),
            SaddleClass::HalfClosed
        );
        assert_eq!(classify_saddle(&[mk([1, 0, 0]), mk([0, 1, 0])]), SaddleClass::FullyOpen);
        assert_eq!(
            classify_saddle(&[mk([0, 0, 0]), mk([0, 0, 0])]),
            SaddleClass::FullyClosed
        );
    }

    fn circle(center: Point3, axis: usize, radius: f64, n: usize) -> Vec<Point3> {
        let [j, k] = AXIS_PAIRS[axis];
        let mut pts: Vec<Point3> = (0..n)
            .map(|s| {
                let t = 2.0 * PI * s as f64 / n as f64;
                let mut p = center;
                p[j] += radius * t.cos();
                p[k] += radius * t.sin();
                p
            })
            .collect();
        pts.push(pts[0]);
        pts
    }

    #[test]
    fn meridian_of_one_handle() {
        let cores = find_handle_cores(&slice(FermiModel::cosine(), 0.0), 24).unwrap();
        let dir = RationalDirection::new(1, 0, 0).unwrap();
        let l =
            miller_index_of_trivial_loop(&lp(circle(Point3::new(0.3, 0.0, 0.0), 0, 0.2, 64)), &cores, &dir).unwrap();
        assert_eq!(l, MillerIndex([1, 0, 0]));
    }

    #[test]
    fn normalization() {
        let dir = RationalDirection::new(1, 2, 5).unwrap();
        assert_eq!(MillerIndex::normalized([0, 0, -1], &dir), MillerIndex([0, 0, 1]));
        assert_eq!(MillerIndex::normalized([2, -1, 0], &dir), MillerIndex([2, -1, 0]));
        assert_eq!(MillerIndex::normalized([-2, 1, 0], &dir), MillerIndex([2, -1, 0]));
    }

    proptest! {
        #[test]
        fn lattice_sum_equals_translate_sum(cx in -2.0f64..2.0, cy in -2.0f64..2.0, cz in -2.0f64..2.0,
                                            r in 0.05f64..1.6, axis in 0usize..3) {
            let pts = circle(Point3::new(cx, cy, cz), axis, r, 97);
            let fast = core_linking(&pts, &[[0.0, 0.0]; 3]);
            prop_assume!(fast.is_ok());
            let fast = fast.unwrap();
            // per-point angle accumulation over every translate in the bounding box
            let [j, k] = AXIS_PAIRS[axis];
            let poly: Vec<[f64; 2]> = pts[..pts.len() - 1].iter().map(|p| [p[j], p[k]]).collect();
            let mut slow = 0;
            for a in -5..=5 {
                for b in -5..=5 {
                    slow += planar_winding_number(&poly, [a as f64, b as f64]).unwrap_or(0);
                }
            }
            prop_assert_eq!(fast[axis], slow);
            for (other, &count) in fast.iter().enumerate() {
                if other != axis {
                    prop_assert_eq!(count, 0);
                }
            }
        }
    }

    #[test]
    fn zone_interior_label() {
        let s = slice(FermiModel::cosine(), 0.0);
        let dir = RationalDirection::from_chart(0.53, 0.268, 1000).unwrap();
        let r = classify_direction(&s, &dir, &TracerConfig::default());
        assert_eq!(r.outcome, Outcome::Labeled(MillerIndex([0, 0, 1])), "{r:?}");
        assert_eq!(r.labels.len(), 4);
    }

    #[test]
    fn pwq_body_diagonal_zone() {
        let s = slice(FermiModel::piecewise_quadratic(), 0.0);
        let dir = RationalDirection::from_chart(0.8, 0.8, 1000).unwrap();
        let r = classify_direction(&s, &dir, &TracerConfig::default());
        assert_eq!(r.outcome, Outcome::Labeled(MillerIndex([1, 1, 1])), "{r:?}");
    }

    #[test]
    fn crease_pair_is_cancelled() {
        // center/saddle pairs 3e-4 apart straddle the creases z = 0 and z = 1/2
        let s = slice(FermiModel::piecewise_quadratic(), -0.9);
        let dir = RationalDirection::from_grid(69, 79, 100).unwrap();
        let cfg = TracerConfig::default();
        let raw = find_critical_points(&s, &dir, &cfg).unwrap();
        assert_eq!(raw.len(), 8);
        let kept = cancel_close_pairs(raw, cfg.capture_radius);
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().all(|p| p.is_saddle()));
        let r = classify_direction(&s, &dir, &cfg);
        assert!(!matches!(r.outcome, Outcome::Numerical(_)), "{r:?}");
    }

    #[test]
    fn symmetric_edge_direction_is_not_a_failure() {
        let s = slice(FermiModel::piecewise_quadratic(), -0.9);
        let dir = RationalDirection::from_grid(35, 100, 100).unwrap();
        let r = classify_direction(&s, &dir, &TracerConfig::default());
        assert_eq!(r.outcome, Outcome::Topological, "{r:?}");
        assert!(r.junctions > 0);
    }

    #[test]
    fn connection_line_inside_zone_is_labeled() {
        // b = 2a: every saddle connects to its own translate by ±(2, -1, 0)
        let s = slice(FermiModel::cosine(), 0.0);
        let dir = RationalDirection::from_chart(0.385, 0.77, 1000).unwrap();
        let r = classify_direction(&s, &dir, &TracerConfig::default());
        assert_eq!(r.self_connections, 4);
        assert_eq!(r.outcome, Outcome::Labeled(MillerIndex([2, 4, 5])), "{r:?}");
    }

    #[test]
    fn connection_line_at_zone_edge_is_not_labeled() {
        let s = slice(FermiModel::cosine(), -0.1);
        let dir = RationalDirection::from_grid(39, 78, 100).unwrap();
        let r = classify_direction(&s, &dir, &TracerConfig::default());
        assert_eq!(r.self_connections, 4);
        assert!(r.labels.iter().all(|l| *l == MillerIndex([2, 4, 5])));
        assert_eq!(r.outcome, Outcome::Topological, "{r:?}");
    }
}
