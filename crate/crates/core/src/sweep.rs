//! Grid sweeps over the chart square, zone maps and their persistence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::NtcError;
use crate::models::{EnergySlice, FermiModel, ModelTag};
use crate::topology::{Classifier, MillerIndex, Outcome};
use crate::torus::RationalDirection;
use crate::tracer::TracerConfig;

/// Rows swept between checkpoints.
pub const CHECKPOINT_ROWS: usize = 4;

/// Zones below this many cells are drawn white and count as ergodic candidates.
pub const SMALL_ZONE_CELLS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Cells with `n ≥ m` only.
    Triangle,
    Square,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Triangle => "triangle",
            Region::Square => "square",
        }
    }

    pub fn contains(self, m: usize, n: usize) -> bool {
        self == Region::Square || n >= m
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = NtcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangle" => Ok(Region::Triangle),
            "square" => Ok(Region::Square),
            other => Err(NtcError::Malformed(format!("unknown region {other}"))),
        }
    }
}

/// Labels on the grid `(m, n)`, `1 ≤ m, n ≤ N`, i.e. directions `(m, n, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneMap {
    pub model: ModelTag,
    pub energy: f64,
    pub n: usize,
    pub region: Region,
    pub rows_complete: usize,
    pub unlabeled_numerical: usize,
    pub unlabeled_topological: usize,
    cells: Vec<Option<MillerIndex>>,
}

impl ZoneMap {
    pub fn empty(model: ModelTag, energy: f64, n: usize, region: Region) -> Self {
        ZoneMap {
            model,
            energy,
            n,
            region,
            rows_complete: 0,
            unlabeled_numerical: 0,
            unlabeled_topological: 0,
            cells: vec![None; n * n],
        }
    }

    fn index(&self, m: usize, n: usize) -> usize {
        assert!((1..=self.n).contains(&m) && (1..=self.n).contains(&n));
        (n - 1) * self.n + (m - 1)
    }

    pub fn get(&self, m: usize, n: usize) -> Option<MillerIndex> {
        self.cells[self.index(m, n)]
    }

    pub fn set(&mut self, m: usize, n: usize, label: Option<MillerIndex>) {
        let i = self.index(m, n);
        self.cells[i] = label;
    }

    /// Labeled cells in `(n, m)` order.
    pub fn labeled(&self) -> impl Iterator<Item = (usize, usize, MillerIndex)> + '_ {
        let n = self.n;
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, c)| c.map(|l| (i % n + 1, i / n + 1, l)))
    }

    pub fn same_header(&self, other: &ZoneMap) -> bool {
        self.model == other.model
            && self.energy.to_bits() == other.energy.to_bits()
            && self.n == other.n
            && self.region == other.region
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# ntc-zonemap v1\n");
        s.push_str(&format!("# model {}\n", self.model));
        s.push_str(&format!("# energy {}\n", self.energy));
        s.push_str(&format!("# N {}\n", self.n));
        s.push_str(&format!("# region {}\n", self.region));
        s.push_str(&format!("# rows-complete {}\n", self.rows_complete));
        s.push_str(&format!("# unlabeled-numerical {}\n", self.unlabeled_numerical));
        s.push_str(&format!("# unlabeled-topological {}\n", self.unlabeled_topological));
        for (m, n, l) in self.labeled() {
            s.push_str(&format!("{m} {n} {l}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, NtcError> {
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut lines = text.lines().peekable();
        match lines.next() {
            Some("# ntc-zonemap v1") => {}
            other => return Err(NtcError::Malformed(format!("bad magic line {other:?}"))),
        }
        while let Some(line) = lines.peek() {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let (key, value) = rest
                .split_once(' ')
                .ok_or_else(|| NtcError::Malformed(format!("header line {line:?}")))?;
            header.insert(key, value);
            lines.next();
        }
        let field = |key: &str| {
            header
                .get(key)
                .copied()
                .ok_or_else(|| NtcError::Malformed(format!("missing header {key}")))
        };
        let num = |key: &str| -> Result<usize, NtcError> {
            field(key)?
                .parse()
                .map_err(|_| NtcError::Malformed(format!("bad {key}")))
        };
        let model: ModelTag = field("model")?.parse()?;
        let energy: f64 = field("energy")?
            .parse()
            .map_err(|_| NtcError::Malformed("bad energy".into()))?;
        let n = num("N")?;
        if n < 2 {
            return Err(NtcError::Malformed("N < 2".into()));
        }
        let region: Region = field("region")?.parse()?;
        let mut map = ZoneMap::empty(model, energy, n, region);
        map.rows_complete = num("rows-complete")?;
        map.unlabeled_numerical = header
            .get("unlabeled-numerical")
            .map_or(Ok(0), |_| num("unlabeled-numerical"))?;
        map.unlabeled_topological = header
            .get("unlabeled-topological")
            .map_or(Ok(0), |_| num("unlabeled-topological"))?;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| NtcError::Malformed(format!("cell line {line:?}")))?;
            if v.len() != 5 {
                return Err(NtcError::Malformed(format!("cell line {line:?}")));
            }
            let (m, k) = (v[0], v[1]);
            if m < 1 || k < 1 || m as usize > n || k as usize > n {
                return Err(NtcError::Malformed(format!("cell out of range {line:?}")));
            }
            map.set(m as usize, k as usize, Some(MillerIndex([v[2], v[3], v[4]])));
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, NtcError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Atomic write: a sibling temporary file is renamed over `path`.
    pub fn save(&self, path: &Path) -> Result<(), NtcError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = Path::new(&tmp);
        {
            let mut f = fs::File::create(tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Fraction of cells that are unlabeled or in zones smaller than `threshold`.
    pub fn white_fraction(&self, threshold: usize) -> f64 {
        let small = small_zone_labels(self, threshold);
        let white = self
            .cells
            .iter()
            .filter(|c| c.is_none_or(|l| small.contains(&l)))
            .count();
        white as f64 / self.cells.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub model: ModelTag,
    pub energy: f64,
    pub n: usize,
    pub region: Region,
    pub workers: usize,
    pub tracer: TracerConfig,
}

/// Classifies every grid direction of the region.
///
/// Rows are processed in batches of [`CHECKPOINT_ROWS`]; each batch is
/// classified in parallel and merged in grid order, so the result does not
/// depend on the worker count. With a checkpoint path the partial map is
/// saved after each batch and an existing checkpoint is resumed.
pub fn sweep(cfg: &SweepConfig, checkpoint: Option<&Path>) -> Result<ZoneMap, NtcError> {
    if cfg.n < 2 {
        return Err(NtcError::Malformed("N must be at least 2".into()));
    }
    let slice = EnergySlice::new(FermiModel::from_tag(cfg.model), cfg.energy)?;
    let classifier = Classifier::new(slice, cfg.tracer.clone()).with_probe_resolution(cfg.n as i64);
    let mut map = ZoneMap::empty(cfg.model, cfg.energy, cfg.n, cfg.region);
    if let Some(path) = checkpoint {
        if path.exists() {
            let saved = ZoneMap::load(path)?;
            if !saved.same_header(&map) {
                return Err(NtcError::ResumeMismatch(format!(
                    "{} has model {} energy {} N {} region {}",
                    path.display(),
                    saved.model,
                    saved.energy,
                    saved.n,
                    saved.region
                )));
            }
            map = saved;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| NtcError::Io(e.to_string()))?;

    while map.rows_complete < cfg.n {
        let first = map.rows_complete + 1;
        let last = (first + CHECKPOINT_ROWS - 1).min(cfg.n);
        let cells: Vec<(usize, usize)> = (first..=last)
            .flat_map(|n| {
                (1..=cfg.n)
                    .filter(move |&m| cfg.region.contains(m, n))
                    .map(move |m| (m, n))
            })
            .collect();
        let outcomes: Vec<Outcome> = pool.install(|| {
            cells
                .par_iter()
                .map(
                    |&(m, n)| match RationalDirection::from_grid(m as i64, n as i64, cfg.n as i64) {
                        Ok(dir) => classifier.classify(&dir).outcome,
                        Err(e) => Outcome::Numerical(e.to_string()),
                    },
                )
                .collect()
        });
        for (&(m, n), outcome) in cells.iter().zip(outcomes) {
            match outcome {
                Outcome::Labeled(l) => map.set(m, n, Some(l)),
                Outcome::Topological => map.unlabeled_topological += 1,
                Outcome::Numerical(_) => map.unlabeled_numerical += 1,
            }
        }
        map.rows_complete = last;
        if let Some(path) = checkpoint {
            map.save(path)?;
        }
    }
    Ok(map)
}

/// Completes a triangle map by the diagonal mirror `(a, b) ↦ (b, a)`.
pub fn symmetrize(map: &ZoneMap) -> ZoneMap {
    let mut out = map.clone();
    out.region = Region::Square;
    for n in 1..=map.n {
        for m in 1..n {
            out.set(n, m, map.get(m, n).map(|l| l.swapped()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub label: MillerIndex,
    pub cell_count: usize,
    pub area: f64,
    /// Cells with a 4-neighbor carrying a different label (or none).
    pub boundary_cells: usize,
    /// 4-connected components with this label.
    pub components: usize,
}

/// Zones merged by label, largest first.
pub fn extract_zones(map: &ZoneMap) -> Vec<Zone> {
    let n = map.n;
    let mut by_label: BTreeMap<MillerIndex, Vec<(usize, usize)>> = BTreeMap::new();
    for (m, k, l) in map.labeled() {
        by_label.entry(l).or_default().push((m, k));
    }
    let mut zones: Vec<Zone> = by_label
        .into_iter()
        .map(|(label, cells)| {
            let neighbors = |m: usize, k: usize| {
                let mut v = Vec::with_capacity(4);
                if m > 1 {
                    v.push((m - 1, k));
                }
                if m < n {
                    v.push((m + 1, k));
                }
                if k > 1 {
                    v.push((m, k - 1));
                }
                if k < n {
                    v.push((m, k + 1));
                }
                v
            };
            let boundary_cells = cells
                .iter()
                .filter(|&&(m, k)| neighbors(m, k).iter().any(|&(a, b)| map.get(a, b) != Some(label)))
                .count();
            let mut seen = vec![false; n * n];
            let mut components = 0;
            for &(m, k) in &cells {
                if seen[(k - 1) * n + m - 1] {
                    continue;
                }
                components += 1;
                let mut stack = vec![(m, k)];
                seen[(k - 1) * n + m - 1] = true;
                while let Some((a, b)) = stack.pop() {
                    for (c, d) in neighbors(a, b) {
                        let i = (d - 1) * n + c - 1;
                        if !seen[i] && map.get(c, d) == Some(label) {
                            seen[i] = true;
                            stack.push((c, d));
                        }
                    }
                }
            }
            Zone {
                label,
                cell_count: cells.len(),
                area: cells.len() as f64 / (n * n) as f64,
                boundary_cells,
                components,
            }
        })
        .collect();
    zones.sort_by(|a, b| b.cell_count.cmp(&a.cell_count).then(a.label.cmp(&b.label)));
    zones
}

pub fn zones_csv(zones: &[Zone]) -> String {
    let mut s = String::from("l1,l2,l3,cells,area,boundary_cells\n");
    for z in zones {
        let [a, b, c] = z.label.0;
        s.push_str(&format!(
            "{a},{b},{c},{},{},{}\n",
            z.cell_count, z.area, z.boundary_cells
        ));
    }
    s
}

fn small_zone_labels(map: &ZoneMap, threshold: usize) -> Vec<MillerIndex> {
    extract_zones(map)
        .into_iter()
        .filter(|z| z.cell_count < threshold)
        .map(|z| z.label)
        .collect()
}

/// Color of a label: low 24 bits of a hash of the shifted label.
pub fn label_color(label: &MillerIndex) -> [u8; 3] {
    let [u, v, w] = label.0.map(|c| (c + 512) as u64);
    let x = 1_000_003u64.wrapping_mul(u) ^ 999_979u64.wrapping_mul(v) ^ 999_961u64.wrapping_mul(w);
    [(x >> 16) as u8, (x >> 8) as u8, x as u8]
}

/// Binary PPM of the map: pixel `(m, n)` at column `m − 1`, row `N − n`,
/// so `b` grows upwards. Unlabeled cells and zones below `threshold` cells
/// are white.
pub fn render_ppm(map: &ZoneMap, threshold: usize) -> Vec<u8> {
    let n = map.n;
    let small = small_zone_labels(map, threshold);
    let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
    for row in 0..n {
        let k = n - row;
        for m in 1..=n {
            let px = match map.get(m, k) {
                Some(l) if !small.contains(&l) => label_color(&l),
                _ => [255, 255, 255],
            };
            out.extend_from_slice(&px);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny_map() -> ZoneMap {
        let mut map = ZoneMap::empty(ModelTag::Cos, -0.25, 4, Region::Triangle);
        map.set(1, 1, Some(MillerIndex([0, 0, 1])));
        map.set(1, 2, Some(MillerIndex([0, 0, 1])));
        map.set(2, 3, Some(MillerIndex([1, 2, 2])));
        map.set(4, 4, Some(MillerIndex([1, 1, 1])));
        map.rows_complete = 4;
        map.unlabeled_topological = 6;
        map
    }

    #[test]
    fn text_round_trip() {
        let map = tiny_map();
        let text = map.to_text();
        let back = ZoneMap::parse(&text).unwrap();
        assert_eq!(back, map);
        assert_eq!(back.to_text(), text);
        assert!(text.starts_with("# ntc-zonemap v1\n# model cos\n# energy -0.25\n# N 4\n# region triangle\n"));
        assert!(text.ends_with("1 1 0 0 1\n1 2 0 0 1\n2 3 1 2 2\n4 4 1 1 1\n"));
    }

    #[test]
    fn malformed_files() {
        assert!(ZoneMap::parse("hello").is_err());
        let text = tiny_map().to_text().replace("# N 4", "# N x");
        assert!(ZoneMap::parse(&text).is_err());
        let text = tiny_map().to_text() + "9 9 1 1 1\n";
        assert!(ZoneMap::parse(&text).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let sq = symmetrize(&tiny_map());
        assert_eq!(sq.region, Region::Square);
        assert_eq!(sq.get(3, 2), Some(MillerIndex([2, 1, 2])));
        assert_eq!(sq.get(1, 1), Some(MillerIndex([0, 0, 1])));
        assert_eq!(sq.get(2, 1), Some(MillerIndex([0, 0, 1])));
        assert_eq!(symmetrize(&sq), sq);
    }

    #[test]
    fn zones_of_maps() {
        let empty = ZoneMap::empty(ModelTag::Cos, 0.0, 5, Region::Square);
        assert!(extract_zones(&empty).is_empty());
        let zones = extract_zones(&symmetrize(&tiny_map()));
        assert_eq!(zones[0].label, MillerIndex([0, 0, 1]));
        assert_eq!(zones[0].cell_count, 3);
        assert_eq!(zones[0].components, 1);
        assert!((zones[0].area - 3.0 / 16.0).abs() < 1e-15);
        let total: f64 = zones.iter().map(|z| z.area).sum();
        assert!(total <= 1.0);
        let csv = zones_csv(&zones);
        // (1, 1) has only same-label neighbours
        assert!(
            csv.starts_with("l1,l2,l3,cells,area,boundary_cells\n0,0,1,3,0.1875,2\n"),
            "{csv}"
        );
    }

    #[test]
    fn colors() {
        let a = label_color(&MillerIndex([0, 0, 1]));
        let b = label_color(&MillerIndex([1, 0, 0]));
        assert_ne!(a, b);
        // (512, 512, 513) by hand
        let x: u64 = (1_000_003u64 * 512) ^ (999_979u64 * 512) ^ (999_961u64 * 513);
        assert_eq!(a, [(x >> 16 & 255) as u8, (x >> 8 & 255) as u8, (x & 255) as u8]);
    }

    #[test]
    fn render_layout() {
        let mut map = ZoneMap::empty(ModelTag::Cos, 0.0, 4, Region::Square);
        let ppm = render_ppm(&map, 1);
        let header = b"P6\n4 4\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert!(ppm[header.len()..].iter().all(|&b| b == 255));
        map.set(1, 4, Some(MillerIndex([0, 0, 1])));
        let ppm = render_ppm(&map, 1);
        // top-left pixel is (m, n) = (1, N)
        assert_eq!(
            ppm[header.len()..header.len() + 3],
            label_color(&MillerIndex([0, 0, 1]))
        );
        assert_eq!(render_ppm(&map, 2)[header.len()], 255);
    }

    proptest! {
        #[test]
        fn symmetrize_idempotent(cells in prop::collection::vec((1usize..7, 1usize..7, -3i64..4, -3i64..4, 1i64..5), 0..20)) {
            let mut map = ZoneMap::empty(ModelTag::Pwq, 0.0, 6, Region::Triangle);
            for (m, n, a, b, c) in cells {
                if n >= m {
                    map.set(m, n, Some(MillerIndex([a, b, c])));
                }
            }
            let once = symmetrize(&map);
            prop_assert_eq!(symmetrize(&once), once.clone());
            for (m, n, l) in once.labeled() {
                if m != n {
                    prop_assert_eq!(once.get(n, m), Some(l.swapped()));
                }
            }
        }
    }
}
