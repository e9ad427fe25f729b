//! Constellations: standard PSK/QAM/APSK sets, bit labeling, the two
//! geometric terms of the shaping objective, and JSON/CSV export.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit-amplitude constraint `|c_m|^2 <= 1`.
pub const AMPLITUDE_TOL: f64 = 1e-9;

/// `Q` labeled complex symbols inside the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationFile", into = "ConstellationFile")]
pub struct Constellation {
    points: Vec<Complex64>,
    labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstellationFile {
    order: usize,
    points: Vec<[f64; 2]>,
    labels: Vec<usize>,
}

impl TryFrom<ConstellationFile> for Constellation {
    type Error = Error;

    fn try_from(f: ConstellationFile) -> Result<Self> {
        if f.points.len() != f.order {
            return Err(Error::DimensionMismatch { expected: f.order, got: f.points.len() });
        }
        let points = f.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Constellation::new_unchecked_amplitude(points, f.labels)
    }
}

impl From<Constellation> for ConstellationFile {
    fn from(c: Constellation) -> Self {
        Self {
            order: c.order(),
            points: c.points.iter().map(|z| [z.re, z.im]).collect(),
            labels: c.labels,
        }
    }
}

impl Constellation {
    /// Builds a constellation, enforcing the amplitude constraint and that
    /// `labels` is a permutation of `0..Q`.
    pub fn new(points: Vec<Complex64>, labels: Vec<usize>) -> Result<Self> {
        let c = Self::new_unchecked_amplitude(points, labels)?;
        if let Some(bad) = c.points.iter().find(|z| z.norm() > 1.0 + AMPLITUDE_TOL) {
            return Err(Error::InvalidParameter(format!(
                "point {bad} violates the unit-amplitude constraint"
            )));
        }
        Ok(c)
    }

    /// Like [`Constellation::new`] but admits points outside the unit disk.
    /// Used when loading files so the amplitude check can be reported
    /// separately.
    pub fn new_unchecked_amplitude(points: Vec<Complex64>, labels: Vec<usize>) -> Result<Self> {
        let q = points.len();
        if q < 2 {
            return Err(Error::DegenerateConstellation(q));
        }
        if labels.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: labels.len() });
        }
        let mut seen = vec![false; q];
        for &l in &labels {
            if l >= q || std::mem::replace(&mut seen[l], true) {
                return Err(Error::InvalidParameter("labels must be a permutation of 0..Q".into()));
            }
        }
        Ok(Self { points, labels })
    }

    /// Points labeled with [`assign_labels`] when `Q` is a power of two,
    /// otherwise with their index.
    pub fn auto_labeled(points: Vec<Complex64>) -> Result<Self> {
        let labels = if points.len().is_power_of_two() {
            assign_labels(&points)?
        } else {
            (0..points.len()).collect()
        };
        Self::new(points, labels)
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order().trailing_zeros()
    }

    /// Largest `|c_m|`.
    pub fn max_amplitude(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn satisfies_amplitude(&self) -> bool {
        self.max_amplitude() <= 1.0 + AMPLITUDE_TOL
    }

    pub fn min_pair_distance(&self) -> f64 {
        min_pair_distance(&self.points)
    }

    pub fn avg_power(&self) -> f64 {
        avg_power(&self.points)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { points: self.points.iter().map(|z| z * t).collect(), labels: self.labels.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV with columns `m, re, im, label`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(["m", "re", "im", "label"])?;
        for (m, (z, l)) in self.points.iter().zip(&self.labels).enumerate() {
            wr.write_record([m.to_string(), z.re.to_string(), z.im.to_string(), l.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Minimum squared distance `min_{m≠n} |c_m - c_n|^2`.
pub fn min_pair_distance(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min((a - b).norm_sqr());
        }
    }
    best
}

/// Average symbol energy `(1/Q) Σ |c_m|^2` under equiprobable symbols.
pub fn avg_power(points: &[Complex64]) -> f64 {
    points.iter().map(|z| z.norm_sqr()).sum::<f64>() / points.len() as f64
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

pub fn make_psk(q: usize) -> Result<Constellation> {
    if q < 2 {
        return Err(Error::InvalidOrder(q, "PSK needs at least 2 points"));
    }
    let points = (0..q)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / q as f64))
        .collect();
    let labels = if q.is_power_of_two() { (0..q).map(gray).collect() } else { (0..q).collect() };
    Constellation::new(points, labels)
}

/// Square QAM scaled so the corner points sit on the unit circle.
pub fn make_qam(q: usize) -> Result<Constellation> {
    if q < 4 || !q.is_power_of_two() || !q.trailing_zeros().is_multiple_of(2) {
        return Err(Error::InvalidOrder(q, "QAM needs a perfect-square power of two"));
    }
    let k = q.trailing_zeros() / 2;
    let side = 1usize << k;
    let scale = 1.0 / ((side - 1) as f64 * 2f64.sqrt());
    let level = |i: usize| (2 * i) as f64 - (side - 1) as f64;
    let mut points = Vec::with_capacity(q);
    let mut labels = Vec::with_capacity(q);
    for i in 0..side {
        for j in 0..side {
            points.push(Complex64::new(level(i), level(j)) * scale);
            labels.push((gray(i) << k) | gray(j));
        }
    }
    Constellation::new(points, labels)
}

/// Concentric PSK rings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApskRings {
    pub sizes: Vec<usize>,
    pub radii: Vec<f64>,
    /// Per-ring phase offset in radians; all zero when omitted.
    #[serde(default)]
    pub phase_offsets: Vec<f64>,
}

impl ApskRings {
    /// 16-APSK (4+12) and 32-APSK (4+12+16) with DVB-S2 style ring ratios,
    /// normalized to an outer radius of one.
    pub fn standard(q: usize) -> Result<Self> {
        match q {
            16 => Ok(Self {
                sizes: vec![4, 12],
                radii: vec![1.0 / 2.57, 1.0],
                phase_offsets: vec![PI / 4.0, PI / 12.0],
            }),
            32 => Ok(Self {
                sizes: vec![4, 12, 16],
                radii: vec![1.0 / 5.27, 2.84 / 5.27, 1.0],
                phase_offsets: vec![PI / 4.0, PI / 12.0, 0.0],
            }),
            _ => Err(Error::InvalidOrder(q, "no standard APSK ring layout")),
        }
    }
}

pub fn make_apsk(q: usize, rings: &ApskRings) -> Result<Constellation> {
    if rings.sizes.len() != rings.radii.len()
        || (!rings.phase_offsets.is_empty() && rings.phase_offsets.len() != rings.sizes.len())
    {
        return Err(Error::InvalidParameter("ring spec lengths disagree".into()));
    }
    if rings.sizes.iter().sum::<usize>() != q || rings.sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!("ring sizes do not sum to {q}")));
    }
    if rings.radii.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::InvalidParameter("ring radii must lie in [0, 1]".into()));
    }
    let mut points = Vec::with_capacity(q);
    for (i, (&n, &r)) in rings.sizes.iter().zip(&rings.radii).enumerate() {
        let offset = rings.phase_offsets.get(i).copied().unwrap_or(0.0);
        points.extend(
            (0..n).map(|k| Complex64::from_polar(r, offset + 2.0 * PI * k as f64 / n as f64)),
        );
    }
    Constellation::auto_labeled(points)
}

/// Greedy nearest-neighbour Gray-style labeling.
///
/// Points are visited breadth-first over the geometric neighbour graph,
/// starting from point 0. Each visited point takes the unused label with the
/// smallest total Hamming distance to its already-labeled neighbours (ties go
/// to the smaller label).
pub fn assign_labels(points: &[Complex64]) -> Result<Vec<usize>> {
    let q = points.len();
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::InvalidOrder(q, "bit labeling needs a power of two"));
    }
    let neighbors = neighbor_graph(points);

    let mut order = Vec::with_capacity(q);
    let mut queued = vec![false; q];
    for start in 0..q {
        if queued[start] {
            continue;
        }
        queued[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let i = order[head];
            head += 1;
            for &j in &neighbors[i] {
                if !queued[j] {
                    queued[j] = true;
                    order.push(j);
                }
            }
        }
    }

    let mut labels: Vec<Option<usize>> = vec![None; q];
    let mut used = vec![false; q];
    for &i in &order {
        let cost = |l: usize| -> u32 {
            neighbors[i]
                .iter()
                .filter_map(|&j| labels[j])
                .map(|lj| (l ^ lj).count_ones())
                .sum()
        };
        let best = (0..q)
            .filter(|&l| !used[l])
            .min_by_key(|&l| (cost(l), l))
            .expect("labels remain while points remain");
        used[best] = true;
        labels[i] = Some(best);
    }
    Ok(labels.into_iter().map(|l| l.unwrap()).collect())
}

/// Symmetric neighbour lists: for each point the others within 1.25x of its
/// nearest distance (at most six), sorted by distance then index.
fn neighbor_graph(points: &[Complex64]) -> Vec<Vec<usize>> {
    let q = points.len();
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); q];
    for i in 0..q {
        let mut by_dist: Vec<(f64, usize)> = (0..q)
            .filter(|&j| j != i)
            .map(|j| ((points[i] - points[j]).norm(), j))
            .collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = by_dist[0].0;
        for &(d, j) in by_dist.iter().take(6) {
            if d <= 1.25 * nearest + 1e-12 {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
    }
    for (i, l) in lists.iter_mut().enumerate() {
        let pi = points[i];
        l.sort_by(|&a, &b| {
            (pi - points[a]).norm().total_cmp(&(pi - points[b]).norm()).then(a.cmp(&b))
        });
        l.dedup();
    }
    lists
}
