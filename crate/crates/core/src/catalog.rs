//! Catalog of the classes realized inside the domain `|m|, |n| ≤ D`.
//!
//! The catalog is built from a single scan of the closed first quadrant
//! `[0, D]²`. A class whose norms `γ⁴q` never decompose inside the square
//! simply never shows up, which is exactly the purge of non-representable
//! classes.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{split_fourth_power, unsigned_decompositions, NormSplit};
use crate::error::{Error, Result};
use crate::lattice::WaveVector;

/// Largest supported domain limit. Coordinate differences stay well inside
/// `i32` and the `(2D+1)²` deficiency grid stays addressable with `u32`
/// cell indices.
pub const MAX_DOMAIN: u32 = 20_000;

/// The vectors of one class sharing a weight, i.e. a single norm `γ⁴q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightGroup {
    pub gamma: u64,
    /// First-quadrant vectors `0 ≤ m, n ≤ D`, sorted.
    pub vectors: Vec<WaveVector>,
}

impl WeightGroup {
    pub fn norm(&self, q: u64) -> u64 {
        self.gamma.pow(4) * q
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    pub q: u64,
    /// Ascending in `gamma`; every group is nonempty.
    pub weights: Vec<WeightGroup>,
}

impl ClassRecord {
    pub fn vector_count(&self) -> usize {
        self.weights.iter().map(|w| w.vectors.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCatalog {
    domain_limit: u32,
    records: Vec<ClassRecord>,
}

impl ClassCatalog {
    /// Assembles a catalog from already grouped records, e.g. a subset of
    /// another catalog. Records are re-sorted by class index.
    pub fn from_records(domain_limit: u32, mut records: Vec<ClassRecord>) -> Self {
        records.sort_by_key(|r| r.q);
        Self {
            domain_limit,
            records,
        }
    }

    pub fn domain_limit(&self) -> u32 {
        self.domain_limit
    }

    /// Records sorted by class index.
    pub fn records(&self) -> &[ClassRecord] {
        &self.records
    }

    pub fn get(&self, q: u64) -> Option<&ClassRecord> {
        self.records
            .binary_search_by_key(&q, |r| r.q)
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn class_count(&self) -> usize {
        self.records.len()
    }

    pub fn weight_count(&self) -> usize {
        self.records.iter().map(|r| r.weights.len()).sum()
    }

    pub fn vector_count(&self) -> usize {
        self.records.iter().map(ClassRecord::vector_count).sum()
    }
}

pub(crate) fn check_domain(limit: u32) -> Result<()> {
    if limit == 0 {
        return Err(Error::DomainTooSmall(limit));
    }
    if limit > MAX_DOMAIN {
        return Err(Error::DomainTooLarge {
            limit,
            max: MAX_DOMAIN,
        });
    }
    Ok(())
}

pub fn build_class_catalog(limit: u32) -> Result<ClassCatalog> {
    check_domain(limit)?;
    let side = limit as i32;

    let mut nodes: Vec<(NormSplit, WaveVector)> = (0..=side)
        .into_par_iter()
        .flat_map_iter(|m| {
            (0..=side).filter_map(move |n| {
                let k = WaveVector::new(m, n);
                class_of(k).ok().map(|split| (split, k))
            })
        })
        .collect();
    nodes.par_sort_unstable_by_key(|&(s, k)| (s.q, s.gamma, k));

    let mut records: Vec<ClassRecord> = Vec::new();
    for (split, k) in nodes {
        match records.last_mut() {
            Some(rec) if rec.q == split.q => match rec.weights.last_mut() {
                Some(w) if w.gamma == split.gamma => w.vectors.push(k),
                _ => rec.weights.push(WeightGroup {
                    gamma: split.gamma,
                    vectors: vec![k],
                }),
            },
            _ => records.push(ClassRecord {
                q: split.q,
                weights: vec![WeightGroup {
                    gamma: split.gamma,
                    vectors: vec![k],
                }],
            }),
        }
    }

    Ok(ClassCatalog {
        domain_limit: limit,
        records,
    })
}

/// Class index and weight of a nonzero wave vector.
pub fn class_of(k: WaveVector) -> Result<NormSplit> {
    if k.is_zero() {
        return Err(Error::ZeroVector);
    }
    split_fourth_power(k.norm())
}

/// Every `γ` for which `γ⁴q = m² + n²` has a solution with `0 ≤ m, n ≤ D`.
pub fn admissible_weights(q: u64, limit: u32) -> Vec<u64> {
    let limit = limit as u64;
    let max_norm = 2 * limit * limit;
    let mut out = Vec::new();
    let mut gamma = 1u64;
    while gamma.pow(4) * q <= max_norm {
        let norm = gamma.pow(4) * q;
        if unsigned_decompositions(norm).iter().any(|d| d.b <= limit) {
            out.push(gamma);
        }
        gamma += 1;
    }
    out
}
