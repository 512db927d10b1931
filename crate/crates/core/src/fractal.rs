//! Dimension estimates for the set of unlabeled directions.

use crate::error::NtcError;
use crate::sweep::{extract_zones, Zone, ZoneMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BoxCount,
    ZoneSize,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BoxCount => "box",
            Method::ZoneSize => "zonesize",
        }
    }

    pub fn default_discards(self) -> (usize, usize) {
        match self {
            Method::BoxCount => (0, 2),
            Method::ZoneSize => (3, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub method: Method,
    /// Logarithm base of the scale index.
    pub base: f64,
    /// `(n, N_n)`.
    pub points: Vec<(i32, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    pub method: Method,
    /// `(n, log_base N_n)` for the nonzero counts.
    pub series: Vec<(i32, f64)>,
    /// Inclusive range of `n` used by the fit.
    pub used_range: (i32, i32),
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub dimension: f64,
}

/// Number of dyadic boxes of side `2⁻ⁿ` meeting cells that are unlabeled or
/// belong to zones of fewer than `threshold` cells, for `n = 1..=n_max`.
///
/// Cell `(m, k)` is the square `[(m−1)/N, m/N] × [(k−1)/N, k/N]`.
pub fn box_count_series(map: &ZoneMap, threshold: usize, n_max: u32) -> Series {
    let n = map.n;
    let small: Vec<_> = extract_zones(map)
        .into_iter()
        .filter(|z| z.cell_count < threshold)
        .map(|z| z.label)
        .collect();
    let mut target = Vec::new();
    for k in 1..=n {
        for m in 1..=n {
            if map.get(m, k).is_none_or(|l| small.contains(&l)) {
                target.push((m, k));
            }
        }
    }
    let mut points = Vec::new();
    for level in 1..=n_max {
        let side = 1usize << level;
        let mut hit = vec![false; side * side];
        // boxes whose interior meets the cell's interior
        let range = |c: usize| {
            let lo = (c - 1) * side / n;
            let hi = (c * side).div_ceil(n) - 1;
            lo..=hi.min(side - 1)
        };
        for &(m, k) in &target {
            for bx in range(m) {
                for by in range(k) {
                    hit[by * side + bx] = true;
                }
            }
        }
        points.push((level as i32, hit.iter().filter(|&&h| h).count() as u64));
    }
    Series {
        method: Method::BoxCount,
        base: 2.0,
        points,
    }
}

/// Histogram of zone areas over the bins `r^{−n−1} < A ≤ r^{−n}`.
pub fn zone_size_series(zones: &[Zone], r: f64) -> Series {
    let bins: Vec<i32> = zones
        .iter()
        .filter(|z| z.area > 0.0)
        .map(|z| (-z.area.ln() / r.ln()).floor() as i32)
        .collect();
    let mut points = Vec::new();
    if let (Some(&lo), Some(&hi)) = (bins.iter().min(), bins.iter().max()) {
        for n in lo..=hi {
            points.push((n, bins.iter().filter(|&&b| b == n).count() as u64));
        }
    }
    Series {
        method: Method::ZoneSize,
        base: r,
        points,
    }
}

/// Least-squares line through `(n, log N_n)` after dropping zero counts and
/// the requested number of points at each end.
pub fn fit_dimension(series: &Series, discard_low: usize, discard_high: usize) -> Result<DimensionEstimate, NtcError> {
    let logs: Vec<(i32, f64)> = series
        .points
        .iter()
        .filter(|&&(_, c)| c > 0)
        .map(|&(n, c)| (n, (c as f64).ln() / series.base.ln()))
        .collect();
    if logs.len() < discard_low + discard_high + 3 {
        return Err(NtcError::TooFewPoints(
            logs.len().saturating_sub(discard_low + discard_high),
        ));
    }
    let used = &logs[discard_low..logs.len() - discard_high];
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (used
        .iter()
        .map(|p| (p.1 - slope * p.0 as f64 - intercept).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let dimension = match series.method {
        Method::BoxCount => slope,
        Method::ZoneSize => 2.0 * slope,
    };
    Ok(DimensionEstimate {
        method: series.method,
        series: logs.clone(),
        used_range: (used[0].0, used[used.len() - 1].0),
        slope,
        intercept,
        rms,
        dimension,
    })
}
