//! Brute-force ground truth for small domains.
//!
//! Enumerates every `(k1, k2, k3)` in the box, sets `k4 = k1 + k2 − k3`, and
//! keeps the nontrivial two-class quadruples whose frequencies balance
//! exactly. It shares nothing with the solver beyond the norm splitting and
//! the canonical form.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::arith::NormSplit;
use crate::catalog::class_of;
use crate::error::{Error, Result};
use crate::lattice::WaveVector;
use crate::quad::{canonicalize, ResonantQuad, Symmetry};

/// Safety bound on the `O((2D+1)⁶)` enumeration.
pub const ORACLE_MAX_DOMAIN: u32 = 12;

pub fn brute_force(limit: u32, symmetry: Symmetry) -> Result<Vec<ResonantQuad>> {
    if limit == 0 {
        return Err(Error::DomainTooSmall(0));
    }
    if limit > ORACLE_MAX_DOMAIN {
        return Err(Error::OracleLimit {
            limit,
            max: ORACLE_MAX_DOMAIN,
        });
    }
    let d = limit as i32;
    let side = (2 * d + 1) as usize;
    let index = |k: WaveVector| (k.m + d) as usize * side + (k.n + d) as usize;
    let nodes: Vec<WaveVector> = (-d..=d)
        .flat_map(|m| (-d..=d).map(move |n| WaveVector::new(m, n)))
        .collect();
    let splits: Vec<Option<NormSplit>> = nodes.iter().map(|&k| class_of(k).ok()).collect();

    let found: BTreeSet<ResonantQuad> = nodes
        .par_iter()
        .filter(|k| !k.is_zero())
        .map(|&k1| {
            let mut local = BTreeSet::new();
            let s1 = splits[index(k1)].unwrap();
            for &k2 in &nodes {
                let Some(s2) = splits[index(k2)] else {
                    continue;
                };
                for &k3 in &nodes {
                    let Some(s3) = splits[index(k3)] else {
                        continue;
                    };
                    let k4 = k1 + k2 - k3;
                    if !k4.within_square(limit) {
                        continue;
                    }
                    let Some(s4) = splits[index(k4)] else {
                        continue;
                    };
                    let s = [s1, s2, s3, s4];
                    if distinct_classes(&s) != 2 || !weights_balance(&s) {
                        continue;
                    }
                    if (k1 == k3 && k2 == k4) || (k1 == k4 && k2 == k3) {
                        continue;
                    }
                    let quad = canonicalize([k1, k2, k3, k4], symmetry)
                        .expect("balanced two-class quad is canonicalizable");
                    local.insert(quad);
                }
            }
            local
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(found.into_iter().collect())
}

fn distinct_classes(s: &[NormSplit; 4]) -> usize {
    let mut qs: Vec<u64> = s.iter().map(|x| x.q).collect();
    qs.sort_unstable();
    qs.dedup();
    qs.len()
}

/// For each class index, left weights minus right weights vanish.
fn weights_balance(s: &[NormSplit; 4]) -> bool {
    s.iter().all(|x| {
        let net: i64 = s
            .iter()
            .enumerate()
            .filter(|(_, y)| y.q == x.q)
            .map(|(i, y)| {
                if i < 2 {
                    y.gamma as i64
                } else {
                    -(y.gamma as i64)
                }
            })
            .sum();
        net == 0
    })
}

/// Symmetric difference between a solver run and the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub domain_limit: u32,
    pub oracle_count: usize,
    pub solver_count: usize,
    /// In the oracle, absent from the solver output.
    pub missing: Vec<ResonantQuad>,
    /// In the solver output, absent from the oracle.
    pub extra: Vec<ResonantQuad>,
}

impl OracleReport {
    pub fn is_match(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "D={}: oracle {} quads, solver {} quads, {} missing, {} extra -> {}",
            self.domain_limit,
            self.oracle_count,
            self.solver_count,
            self.missing.len(),
            self.extra.len(),
            if self.is_match() { "MATCH" } else { "MISMATCH" }
        )?;
        for q in &self.missing {
            writeln!(f, "  missing: {q}")?;
        }
        for q in &self.extra {
            writeln!(f, "  extra:   {q}")?;
        }
        Ok(())
    }
}

pub fn compare(
    domain_limit: u32,
    solver: &[ResonantQuad],
    oracle: &[ResonantQuad],
) -> OracleReport {
    let s: BTreeSet<_> = solver.iter().copied().collect();
    let o: BTreeSet<_> = oracle.iter().copied().collect();
    OracleReport {
        domain_limit,
        oracle_count: o.len(),
        solver_count: s.len(),
        missing: o.difference(&s).copied().collect(),
        extra: s.difference(&o).copied().collect(),
    }
}
