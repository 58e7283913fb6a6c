//! Deficiency points, γ-deficiency sets and solution halves.
//!
//! For two vectors `u ≠ v` of the same norm the deficiency is `u − v`. Two
//! classes interlock through a quadruple `(u1, v2, v1, u2)` exactly when
//! `u1 − v1 = u2 − v2`, so all the matching happens on deficiency points.
//! Only points in the closed nonnegative quadrant are kept; every other
//! point is an axis reflection of one of them, and reflections map
//! solutions to solutions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{sign_variants, signed_representations};
use crate::catalog::{ClassRecord, WeightGroup};
use crate::error::{Error, Result};
use crate::lattice::{Reflection, WaveVector};

/// A deficiency point with both coordinates nonnegative, never the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DeficiencyPoint {
    pub dm: u32,
    pub dn: u32,
}

impl DeficiencyPoint {
    pub const fn new(dm: u32, dn: u32) -> Self {
        Self { dm, dn }
    }

    /// Row-major cell index in a grid of the given side.
    pub fn cell(self, side: usize) -> usize {
        self.dm as usize * side + self.dn as usize
    }

    pub fn from_cell(cell: usize, side: usize) -> Self {
        Self::new((cell / side) as u32, (cell % side) as u32)
    }

    fn from_nonnegative(d: WaveVector) -> Self {
        debug_assert!(d.is_nonnegative());
        Self::new(d.m as u32, d.n as u32)
    }
}

impl fmt::Display for DeficiencyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dm, self.dn)
    }
}

/// Which same-norm vector pairs generate deficiency points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficiencyMode {
    /// Only pairs of distinct ordered unsigned decompositions, one half per
    /// unsigned pair and point, as in the published tables.
    PaperCompat,
    /// Every pair of distinct signed representations, including sign
    /// variants of a single decomposition.
    #[default]
    Complete,
}

impl DeficiencyMode {
    /// Whether the ordered pair `(u, v)` of same-norm vectors is stored as a
    /// solution half under this mode. Admitted pairs always have
    /// `u − v` in the nonnegative quadrant and nonzero.
    ///
    /// Under `PaperCompat` the pairs `(u, v)` and `(−v, −u)` share a point;
    /// only the one with `u + v ≤ 0` (lexicographically) is kept.
    pub fn admits(self, u: WaveVector, v: WaveVector) -> bool {
        let d = u - v;
        if !d.is_nonnegative() || d.is_zero() {
            return false;
        }
        match self {
            DeficiencyMode::Complete => true,
            DeficiencyMode::PaperCompat => {
                let s = u + v;
                u.abs() != v.abs() && (s.m, s.n) <= (0, 0)
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DeficiencyMode::PaperCompat => "paper-compat",
            DeficiencyMode::Complete => "complete",
        }
    }
}

impl fmt::Display for DeficiencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DeficiencyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "complete" => Ok(DeficiencyMode::Complete),
            "paper-compat" | "paper_compat" => Ok(DeficiencyMode::PaperCompat),
            other => Err(format!(
                "unknown mode `{other}` (expected complete or paper-compat)"
            )),
        }
    }
}

/// One class's ordered pair `(u, v)` of same-norm vectors attached to its
/// deficiency point `delta = u − v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfPair {
    pub q: u64,
    pub gamma: u64,
    pub u: WaveVector,
    pub v: WaveVector,
    pub delta: DeficiencyPoint,
}

/// Reflects `(u, v)` on the axes where `u − v` is negative and returns the
/// resulting nonnegative deficiency with the oriented pair.
pub fn normalize_delta(
    u: WaveVector,
    v: WaveVector,
) -> Result<(DeficiencyPoint, WaveVector, WaveVector)> {
    if u.norm() != v.norm() {
        return Err(Error::NormMismatch { u, v });
    }
    if u == v {
        return Err(Error::IdenticalPair(u));
    }
    let r = Reflection::making_nonnegative(u - v);
    let (u, v) = (u.reflect(r), v.reflect(r));
    Ok((DeficiencyPoint::from_nonnegative(u - v), u, v))
}

/// All sign variants of a weight group's first-quadrant vectors.
pub fn signed_vectors(group: &WeightGroup) -> Vec<WaveVector> {
    group
        .vectors
        .iter()
        .flat_map(|&k| sign_variants(k))
        .collect()
}

/// Calls `f` for every admitted half of one norm, given all its signed
/// vectors inside the domain.
pub fn for_each_half_of_norm(
    q: u64,
    gamma: u64,
    signed: &[WaveVector],
    mode: DeficiencyMode,
    mut f: impl FnMut(HalfPair),
) {
    for &u in signed {
        for &v in signed {
            if mode.admits(u, v) {
                f(HalfPair {
                    q,
                    gamma,
                    u,
                    v,
                    delta: DeficiencyPoint::from_nonnegative(u - v),
                });
            }
        }
    }
}

/// Calls `f` for every admitted half of a class, weight by weight.
pub fn for_each_half(record: &ClassRecord, mode: DeficiencyMode, mut f: impl FnMut(HalfPair)) {
    let mut signed = Vec::new();
    for group in &record.weights {
        signed.clear();
        signed.extend(group.vectors.iter().flat_map(|&k| sign_variants(k)));
        for_each_half_of_norm(record.q, group.gamma, &signed, mode, &mut f);
    }
}

/// The γ-deficiency set of class `q` inside `|m|, |n| ≤ limit`, sorted.
pub fn gamma_deficiency_set(
    q: u64,
    gamma: u64,
    limit: u32,
    mode: DeficiencyMode,
) -> Vec<DeficiencyPoint> {
    let signed: Vec<WaveVector> = signed_representations(gamma.pow(4) * q)
        .into_iter()
        .filter(|k| k.within_square(limit))
        .collect();
    let mut points = Vec::new();
    for_each_half_of_norm(q, gamma, &signed, mode, |h| points.push(h.delta));
    points.sort_unstable();
    points.dedup();
    points
}

/// The deficiency set of a class over all its weights, sorted and free of
/// doubles.
pub fn deficiency_set(record: &ClassRecord, mode: DeficiencyMode) -> Vec<DeficiencyPoint> {
    let mut points = Vec::new();
    for_each_half(record, mode, |h| points.push(h.delta));
    points.sort_unstable();
    points.dedup();
    points
}

/// Grid cells of a class's deficiency set, sorted and deduplicated, reusing
/// `buf`.
pub(crate) fn deficiency_cells(
    record: &ClassRecord,
    mode: DeficiencyMode,
    side: usize,
    buf: &mut Vec<u32>,
) {
    buf.clear();
    for_each_half(record, mode, |h| buf.push(h.delta.cell(side) as u32));
    buf.sort_unstable();
    buf.dedup();
}

/// Every half of the class. Halves sharing a point are all kept.
pub fn half_pairs(record: &ClassRecord, mode: DeficiencyMode) -> Vec<HalfPair> {
    let mut out = Vec::new();
    for_each_half(record, mode, |h| out.push(h));
    out
}
