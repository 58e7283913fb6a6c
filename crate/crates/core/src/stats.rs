//! Aggregates over solution sets: counts in partial domains and the vector
//! multiplicity histogram.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::lattice::WaveVector;
use crate::quad::ResonantQuad;

/// A partial domain. A quad lies in a shape iff all four of its vectors do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainShape {
    /// `|m|, |n| ≤ D`.
    Square(u32),
    /// `m² + n² ≤ D²`.
    Circle(u32),
    /// `inner² < m² + n² ≤ outer²`.
    Ring { inner: u32, outer: u32 },
}

impl DomainShape {
    pub fn contains(self, k: WaveVector) -> bool {
        let sq = |r: u32| r as u64 * r as u64;
        match self {
            DomainShape::Square(d) => k.within_square(d),
            DomainShape::Circle(d) => k.norm() <= sq(d),
            DomainShape::Ring { inner, outer } => {
                let n = k.norm();
                sq(inner) < n && n <= sq(outer)
            }
        }
    }

    pub fn contains_quad(self, q: &ResonantQuad) -> bool {
        q.vectors().iter().all(|&k| self.contains(k))
    }
}

impl fmt::Display for DomainShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainShape::Square(d) => write!(f, "square({d})"),
            DomainShape::Circle(d) => write!(f, "circle({d})"),
            DomainShape::Ring { inner, outer } => write!(f, "ring({inner}, {outer})"),
        }
    }
}

/// Family of shapes indexed by `D` for a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Square,
    Circle,
    /// `ring(D − width, D)`, with the inner radius clamped at zero.
    Ring {
        width: u32,
    },
}

impl ShapeKind {
    pub fn at(self, d: u32) -> DomainShape {
        match self {
            ShapeKind::Square => DomainShape::Square(d),
            ShapeKind::Circle => DomainShape::Circle(d),
            ShapeKind::Ring { width } => DomainShape::Ring {
                inner: d.saturating_sub(width),
                outer: d,
            },
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Circle => "circle",
            ShapeKind::Ring { .. } => "ring",
        }
    }
}

pub fn filter_domain(solutions: &[ResonantQuad], shape: DomainShape) -> Vec<ResonantQuad> {
    solutions
        .iter()
        .filter(|q| shape.contains_quad(q))
        .copied()
        .collect()
}

/// `(D, count)` for each requested `D`.
pub fn domain_series(
    solutions: &[ResonantQuad],
    limits: &[u32],
    kind: ShapeKind,
) -> Vec<(u32, usize)> {
    limits
        .iter()
        .map(|&d| {
            let shape = kind.at(d);
            (
                d,
                solutions.iter().filter(|q| shape.contains_quad(q)).count(),
            )
        })
        .collect()
}

/// `start, start + step, …` up to and including `end`.
pub fn series_limits(start: u32, end: u32, step: u32) -> Vec<u32> {
    (start..=end).step_by(step.max(1) as usize).collect()
}

/// Occurrences of each vector across all slots of all solutions. A vector
/// appearing in two slots of one quad counts twice.
pub fn vector_multiplicities(solutions: &[ResonantQuad]) -> HashMap<WaveVector, usize> {
    let mut counts = HashMap::new();
    for q in solutions {
        for k in q.vectors() {
            *counts.entry(k).or_insert(0) += 1;
        }
    }
    counts
}

/// Multiplicity → number of distinct vectors with that multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiplicityHistogram {
    pub bins: BTreeMap<usize, usize>,
}

impl MultiplicityHistogram {
    /// `Σ multiplicity × vectors`; equals four times the solution count.
    pub fn mass(&self) -> usize {
        self.bins.iter().map(|(m, c)| m * c).sum()
    }

    pub fn get(&self, multiplicity: usize) -> usize {
        self.bins.get(&multiplicity).copied().unwrap_or(0)
    }

    pub fn vector_count(&self) -> usize {
        self.bins.values().sum()
    }
}

pub fn multiplicity_histogram(solutions: &[ResonantQuad]) -> MultiplicityHistogram {
    let mut bins = BTreeMap::new();
    for (_, m) in vector_multiplicities(solutions) {
        *bins.entry(m).or_insert(0) += 1;
    }
    MultiplicityHistogram { bins }
}

/// Ordinary least squares fit `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Exponent of a power law through a count series (log-log fit), skipping
/// zero counts.
pub fn power_law_exponent(series: &[(u32, usize)]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(d, c)| d > 0 && c > 0)
        .map(|&(d, c)| ((d as f64).ln(), (c as f64).ln()))
        .collect();
    linear_fit(&pts)
}

pub fn series_fit(series: &[(u32, usize)]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = series.iter().map(|&(d, c)| (d as f64, c as f64)).collect();
    linear_fit(&pts)
}

pub fn is_nondecreasing(series: &[(u32, usize)]) -> bool {
    series.windows(2).all(|w| w[0].1 <= w[1].1)
}

/// Single-pass aggregates over a solution stream whose vectors lie in
/// `|m|, |n| ≤ limit`, for sets too large to hold in memory.
///
/// Square and circle counts are kept per smallest enclosing `D`. The `D`
/// for which a quad lies in `ring(D − width, D)` form an interval, so ring
/// counts are kept as a difference array.
#[derive(Debug, Clone)]
pub struct SolutionTally {
    limit: u32,
    ring_width: u32,
    total: u64,
    square: Vec<u64>,
    circle: Vec<u64>,
    ring_delta: Vec<i64>,
    multiplicity: Vec<u64>,
}

fn ceil_sqrt(x: u64) -> u64 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

impl SolutionTally {
    pub fn new(limit: u32, ring_width: u32) -> Self {
        let max_radius = ceil_sqrt(2 * limit as u64 * limit as u64) as usize;
        let side = 2 * limit as usize + 1;
        Self {
            limit,
            ring_width,
            total: 0,
            square: vec![0; limit as usize + 1],
            circle: vec![0; max_radius + 1],
            ring_delta: vec![0; max_radius + ring_width as usize + 2],
            multiplicity: vec![0; side * side],
        }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn ring_width(&self) -> u32 {
        self.ring_width
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn cell(&self, k: WaveVector) -> usize {
        let side = 2 * self.limit as i64 + 1;
        ((k.m as i64 + self.limit as i64) * side + k.n as i64 + self.limit as i64) as usize
    }

    /// Panics if a vector lies outside the tally's square.
    pub fn observe(&mut self, q: &ResonantQuad) {
        let vs = q.vectors();
        assert!(
            vs.iter().all(|k| k.within_square(self.limit)),
            "{q} lies outside |m|, |n| <= {}",
            self.limit
        );
        let mut reach = 0;
        let mut max_norm = 0;
        let mut min_norm = u64::MAX;
        for k in vs {
            reach = reach.max(k.m.unsigned_abs()).max(k.n.unsigned_abs());
            max_norm = max_norm.max(k.norm());
            min_norm = min_norm.min(k.norm());
            let c = self.cell(k);
            self.multiplicity[c] += 1;
        }
        self.total += 1;
        self.square[reach as usize] += 1;
        let lo = ceil_sqrt(max_norm) as usize;
        self.circle[lo] += 1;
        let hi = self.ring_width as usize + (min_norm - 1).isqrt() as usize;
        if lo <= hi {
            self.ring_delta[lo] += 1;
            self.ring_delta[hi + 1] -= 1;
        }
    }

    /// Counts per `D`, agreeing with [`domain_series`] on the same set. A
    /// ring series uses the tally's own width.
    pub fn series(&self, kind: ShapeKind, limits: &[u32]) -> Vec<(u32, usize)> {
        let cumulative = |hist: &[u64]| {
            hist.iter()
                .scan(0u64, |acc, &c| {
                    *acc += c;
                    Some(*acc)
                })
                .collect::<Vec<u64>>()
        };
        let table: Vec<u64> = match kind {
            ShapeKind::Square => cumulative(&self.square),
            ShapeKind::Circle => cumulative(&self.circle),
            ShapeKind::Ring { .. } => self
                .ring_delta
                .iter()
                .scan(0i64, |acc, &c| {
                    *acc += c;
                    Some(*acc as u64)
                })
                .collect(),
        };
        limits
            .iter()
            .map(|&d| {
                let count = match table.get(d as usize) {
                    Some(&c) => c,
                    // beyond every ring; squares and circles hold everything
                    None if matches!(kind, ShapeKind::Ring { .. }) => 0,
                    None => self.total,
                };
                (d, count as usize)
            })
            .collect()
    }

    pub fn multiplicity(&self, k: WaveVector) -> usize {
        if k.within_square(self.limit) {
            self.multiplicity[self.cell(k)] as usize
        } else {
            0
        }
    }

    pub fn histogram(&self) -> MultiplicityHistogram {
        let mut bins = BTreeMap::new();
        for &m in self.multiplicity.iter().filter(|&&m| m > 0) {
            *bins.entry(m as usize).or_insert(0) += 1;
        }
        MultiplicityHistogram { bins }
    }
}
