//! Arithmetic on the 3-torus and its universal cover.

use std::f64::consts::PI;
use std::fmt;

use crate::error::NtcError;
use crate::models::Point3;

/// Residual below which a cover path is considered closed modulo `Z³`.
pub const CLOSURE_TOL: f64 = 1e-6;

pub type IVec3 = [i64; 3];

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn dot_i(a: &IVec3, b: &IVec3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross_i(a: &IVec3, b: &IVec3) -> IVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn to_point(v: &IVec3) -> Point3 {
    Point3::new(v[0] as f64, v[1] as f64, v[2] as f64)
}

/// Componentwise nearest integer vector.
pub fn round_point(p: &Point3) -> IVec3 {
    [p.x.round() as i64, p.y.round() as i64, p.z.round() as i64]
}

/// A primitive integer direction `H = (p, q, r)`.
///
/// Always stored reduced (gcd 1) with its last nonzero component positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalDirection {
    h: IVec3,
}

impl RationalDirection {
    pub fn new(p: i64, q: i64, r: i64) -> Result<Self, NtcError> {
        let g = gcd(gcd(p, q), r);
        if g == 0 {
            return Err(NtcError::InvalidDirection("zero vector".into()));
        }
        let mut h = [p / g, q / g, r / g];
        let last = *h.iter().rev().find(|&&c| c != 0).unwrap();
        if last < 0 {
            h.iter_mut().for_each(|c| *c = -*c);
        }
        Ok(RationalDirection { h })
    }

    /// Grid point `(m, n)` at resolution `N`, i.e. the chart point `(m/N, n/N)`.
    pub fn from_grid(m: i64, n: i64, resolution: i64) -> Result<Self, NtcError> {
        Self::new(m, n, resolution)
    }

    /// Decimal chart coordinates snapped to the rational `(round(aN), round(bN), N)`.
    pub fn from_chart(a: f64, b: f64, resolution: i64) -> Result<Self, NtcError> {
        if !(a.is_finite() && b.is_finite()) || resolution <= 0 {
            return Err(NtcError::InvalidDirection(format!("chart ({a}, {b})")));
        }
        let n = resolution as f64;
        Self::new((a * n).round() as i64, (b * n).round() as i64, resolution)
    }

    pub fn components(&self) -> IVec3 {
        self.h
    }

    pub fn as_point(&self) -> Point3 {
        to_point(&self.h)
    }

    pub fn norm(&self) -> f64 {
        self.as_point().norm()
    }

    pub fn unit(&self) -> Point3 {
        self.as_point().normalize()
    }

    /// `(p/r, q/r)` when `r > 0`.
    pub fn chart(&self) -> Option<(f64, f64)> {
        let [p, q, r] = self.h;
        (r > 0).then(|| (p as f64 / r as f64, q as f64 / r as f64))
    }

    /// `⟨x, H⟩`.
    pub fn height(&self, x: &Point3) -> f64 {
        x.dot(&self.as_point())
    }
}

impl fmt::Display for RationalDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.h[0], self.h[1], self.h[2])
    }
}

/// Representative in `[0, 1)³`.
pub fn canonical_rep(p: &Point3) -> Point3 {
    p.map(|c| {
        let r = c - c.floor();
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    })
}

/// A polyline in the universal cover.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverPath {
    pub points: Vec<Point3>,
    /// Distance between the endpoints after the best integer shift.
    pub closed_residual: f64,
}

impl CoverPath {
    pub fn new(points: Vec<Point3>) -> Self {
        let closed_residual = match (points.first(), points.last()) {
            (Some(a), Some(b)) => {
                let d = b - a;
                (d - to_point(&round_point(&d))).norm()
            }
            _ => 0.0,
        };
        CoverPath {
            points,
            closed_residual,
        }
    }

    pub fn arclength(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Appends `other` (which must start where `self` ends).
    pub fn concat(&self, other: &CoverPath) -> CoverPath {
        let mut points = self.points.clone();
        points.extend(other.points.iter().skip(1));
        CoverPath::new(points)
    }
}

/// Homotopy class in `π₁(T³)` of a path closed modulo `Z³`.
pub fn winding_vector(path: &CoverPath) -> Result<IVec3, NtcError> {
    let (Some(a), Some(b)) = (path.points.first(), path.points.last()) else {
        return Ok([0, 0, 0]);
    };
    let d = b - a;
    let k = round_point(&d);
    let residual = (d - to_point(&k)).norm();
    if residual >= CLOSURE_TOL {
        return Err(NtcError::NotClosed(residual));
    }
    Ok(k)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let (px, py) = (p[0] - a[0], p[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (ex, ey) = (px - t * dx, py - t * dy);
    (ex * ex + ey * ey).sqrt()
}

/// Signed winding number of a closed polyline around `center`, by angle
/// accumulation. The last vertex is joined back to the first.
pub fn planar_winding_number(polyline: &[[f64; 2]], center: [f64; 2]) -> Result<i64, NtcError> {
    if polyline.len() < 2 {
        return Ok(0);
    }
    let n = polyline.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = polyline[i];
        let b = polyline[(i + 1) % n];
        let d = segment_distance(center, a, b);
        if d <= 1e-9 {
            return Err(NtcError::OnBoundary(d));
        }
        let (ax, ay) = (a[0] - center[0], a[1] - center[1]);
        let (bx, by) = (b[0] - center[0], b[1] - center[1]);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Sum of winding numbers of a closed polyline around every point of the
/// lattice `offset + Z²`.
///
/// Counts signed crossings with the vertical lines `x = offset.x + j`: a
/// crossing at height `y` contributes to every lattice point below it.
pub fn lattice_winding_sum(polyline: &[[f64; 2]], offset: [f64; 2]) -> Result<i64, NtcError> {
    let n = polyline.len();
    if n < 2 {
        return Ok(0);
    }
    let mut total = 0i64;
    for i in 0..n {
        let a = polyline[i];
        let b = polyline[(i + 1) % n];
        let (xa, xb) = (a[0] - offset[0], b[0] - offset[0]);
        let (lo, hi) = if xa <= xb { (xa, xb) } else { (xb, xa) };
        // integer columns j with lo <= j < hi (half-open so vertices count once)
        let j0 = lo.ceil() as i64;
        let j1 = hi.ceil() as i64;
        if j0 >= j1 {
            continue;
        }
        // leftward motion winds counter-clockwise around points below
        let sign = if xb < xa { 1 } else { -1 };
        for j in j0..j1 {
            let t = (j as f64 - xa) / (xb - xa);
            let y = a[1] + t * (b[1] - a[1]) - offset[1];
            let nearest = y.round();
            if (y - nearest).abs() <= 1e-9 {
                return Err(NtcError::CoreOnLoop);
            }
            total += sign * (y.ceil() as i64);
        }
    }
    Ok(total)
}

/// Integer basis `(u, v)` of the plane lattice `Z³ ∩ H⊥`, Gauss-reduced.
pub fn perp_lattice_basis(h: &RationalDirection) -> (IVec3, IVec3) {
    let [p, q, r] = h.components();
    let (u, v) = if p == 0 && q == 0 {
        ([1, 0, 0], [0, 1, 0])
    } else {
        let (g, alpha, beta) = ext_gcd(p, q);
        // u × v = −H, so the pair spans the whole plane lattice
        ([q / g, -p / g, 0], [-r * alpha, -r * beta, g])
    };
    gauss_reduce(u, v)
}

fn gauss_reduce(mut u: IVec3, mut v: IVec3) -> (IVec3, IVec3) {
    let norm2 = |w: &IVec3| dot_i(w, w);
    if norm2(&u) > norm2(&v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let uu = norm2(&u);
        let uv = dot_i(&u, &v);
        // nearest integer to uv/uu
        let m = (2 * uv + uu).div_euclid(2 * uu);
        if m != 0 {
            v = [v[0] - m * u[0], v[1] - m * u[1], v[2] - m * u[2]];
        }
        if norm2(&v) >= uu {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_rep_examples() {
        let r = canonical_rep(&Point3::new(1.25, -0.5, 3.0));
        assert_eq!(r, Point3::new(0.25, 0.5, 0.0));
        let r = canonical_rep(&Point3::new(0.999999999, 0.0, 0.0));
        assert_eq!(r, Point3::new(0.999999999, 0.0, 0.0));
        let r = canonical_rep(&Point3::new(-1e-18, 0.0, 0.0));
        assert!(r.x < 1.0);
    }

    proptest! {
        #[test]
        fn canonical_rep_idempotent(x in -1e3f64..1e3, y in -1e3f64..1e3, z in -1e3f64..1e3) {
            let once = canonical_rep(&Point3::new(x, y, z));
            prop_assert_eq!(canonical_rep(&once), once);
            prop_assert!(once.iter().all(|c| (0.0..1.0).contains(c)));
        }

        #[test]
        fn winding_additive(a in prop::array::uniform3(-5i64..5), b in prop::array::uniform3(-5i64..5),
                            s in prop::array::uniform3(-1.0f64..1.0)) {
            let start = Point3::new(s[0], s[1], s[2]);
            let mid = start + to_point(&a);
            let end = mid + to_point(&b);
            let p1 = CoverPath::new(vec![start, start + Point3::new(0.3, 0.1, 0.0), mid]);
            let p2 = CoverPath::new(vec![mid, mid + Point3::new(-0.2, 0.4, 0.7), end]);
            let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            prop_assert_eq!(winding_vector(&p1.concat(&p2)).unwrap(), sum);
        }

        #[test]
        fn perp_basis_determinant(p in -40i64..40, q in -40i64..40, r in 1i64..60) {
            let h = RationalDirection::new(p, q, r).unwrap();
            let (u, v) = perp_lattice_basis(&h);
            prop_assert_eq!(dot_i(&u, &h.components()), 0);
            prop_assert_eq!(dot_i(&v, &h.components()), 0);
            let c = cross_i(&u, &v);
            let hc = h.components();
            prop_assert!(c == hc || c == [-hc[0], -hc[1], -hc[2]]);
        }

        #[test]
        fn winding_invariant_under_refinement(cx in -0.9f64..0.9, cy in -0.9f64..0.9) {
            let square = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
            let mut refined = Vec::new();
            for i in 0..4 {
                let a: [f64; 2] = square[i];
                let b: [f64; 2] = square[(i + 1) % 4];
                refined.push(a);
                refined.push([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
            }
            let w1 = planar_winding_number(&square, [cx, cy]).unwrap();
            let w2 = planar_winding_number(&refined, [cx, cy]).unwrap();
            prop_assert_eq!(w1, w2);
            prop_assert_eq!(w1, 1);
        }
    }

    #[test]
    fn direction_normalization() {
        let h = RationalDirection::new(-4, 2, -6).unwrap();
        assert_eq!(h.components(), [2, -1, 3]);
        let h = RationalDirection::new(3, -6, 0).unwrap();
        assert_eq!(h.components(), [-1, 2, 0]);
        assert!(RationalDirection::new(0, 0, 0).is_err());
        let h = RationalDirection::from_chart(0.53, 0.268, 1000).unwrap();
        assert_eq!(h.components(), [265, 134, 500]);
        assert_eq!(h.chart(), Some((0.53, 0.268)));
    }

    #[test]
    fn winding_examples() {
        let seg = CoverPath::new(vec![Point3::zeros(), Point3::new(1.0, 0.0, 0.0)]);
        assert_eq!(winding_vector(&seg).unwrap(), [1, 0, 0]);
        let start = Point3::new(0.3, 0.2, 0.1);
        let lp = CoverPath::new(vec![start, start + Point3::new(0.5, 0.5, 0.0), start]);
        assert_eq!(winding_vector(&lp).unwrap(), [0, 0, 0]);
        let open = CoverPath::new(vec![start, start + Point3::new(0.5, 0.0, 0.0)]);
        assert!(matches!(winding_vector(&open), Err(NtcError::NotClosed(_))));
    }

    #[test]
    fn planar_winding_examples() {
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(planar_winding_number(&square, [0.5, 0.5]).unwrap(), 1);
        assert_eq!(planar_winding_number(&square, [2.0, 2.0]).unwrap(), 0);
        assert!(matches!(
            planar_winding_number(&square, [0.5, 0.0]),
            Err(NtcError::OnBoundary(_))
        ));
        // figure eight: CCW lobe around (0,0), CW lobe around (2,0)
        let mut full = Vec::new();
        for i in 0..64 {
            let t = 2.0 * PI * i as f64 / 64.0;
            full.push([t.cos(), t.sin()]);
        }
        for i in 0..64 {
            let t = 2.0 * PI * i as f64 / 64.0;
            full.push([2.0 - t.cos(), t.sin()]);
        }
        assert_eq!(planar_winding_number(&full, [0.0, 0.0]).unwrap(), 1);
        assert_eq!(planar_winding_number(&full, [2.0, 0.0]).unwrap(), -1);
    }

    #[test]
    fn lattice_sum_matches_per_point_angles() {
        // a wobbly loop spanning several lattice cells, traversed twice around one region
        let mut poly = Vec::new();
        for i in 0..400 {
            let t = 2.0 * PI * i as f64 / 400.0;
            let r = 1.7 + 0.6 * (3.0 * t).sin();
            poly.push([0.31 + r * t.cos(), -0.17 + 1.3 * r * t.sin()]);
        }
        let offset = [0.5, 0.25];
        let mut brute = 0;
        for j in -5..6 {
            for k in -5..6 {
                let c = [offset[0] + j as f64, offset[1] + k as f64];
                brute += planar_winding_number(&poly, c).unwrap();
            }
        }
        assert_eq!(lattice_winding_sum(&poly, offset).unwrap(), brute);
        let reversed: Vec<_> = poly.iter().rev().cloned().collect();
        assert_eq!(lattice_winding_sum(&reversed, offset).unwrap(), -brute);
    }

    #[test]
    fn perp_basis_examples() {
        let (u, v) = perp_lattice_basis(&RationalDirection::new(0, 0, 1).unwrap());
        assert_eq!(cross_i(&u, &v)[2].abs(), 1);
        assert_eq!(u[2], 0);
        assert_eq!(v[2], 0);
        let h111 = RationalDirection::new(1, 1, 1).unwrap();
        let (u, v) = perp_lattice_basis(&h111);
        assert_eq!(dot_i(&u, &[1, 1, 1]), 0);
        assert_eq!(dot_i(&v, &[1, 1, 1]), 0);
    }

    #[test]
    fn perp_basis_spans_lattice_brute_force() {
        let h = RationalDirection::new(22, 23, 100).unwrap();
        let (u, v) = perp_lattice_basis(&h);
        let hc = h.components();
        // every w ⊥ H in the box must be an integer combination of u, v
        let c = cross_i(&u, &v);
        let mut found = 0;
        for x in -25..=25i64 {
            for y in -25..=25i64 {
                for z in -25..=25i64 {
                    let w = [x, y, z];
                    if dot_i(&w, &hc) != 0 {
                        continue;
                    }
                    found += 1;
                    // coefficients by Cramer's rule against u × v
                    let cc = dot_i(&c, &c);
                    let a = dot_i(&cross_i(&w, &v), &c);
                    let b = dot_i(&cross_i(&u, &w), &c);
                    assert_eq!(a % cc, 0, "{w:?}");
                    assert_eq!(b % cc, 0, "{w:?}");
                }
            }
        }
        assert!(found > 1);
    }
}
