//! Resonant quadruples and their canonical representatives.
//!
//! Slots follow the class pattern: `k1, k3` lie in class `q1` and `k2, k4`
//! in class `q2`, with `q1 < q2`. The remaining symmetries of the resonance
//! system are the side swap `(k1, k2, k3, k4) ↦ (k3, k4, k1, k2)` and the four
//! axis reflections applied to all vectors at once.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::arith::NormSplit;
use crate::catalog::class_of;
use crate::error::{Error, Result};
use crate::lattice::{Reflection, WaveVector};

/// Which symmetry orbit a canonical representative stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    /// One representative per orbit of side swap and axis reflections.
    #[default]
    Canonical,
    /// Reflected images are kept apart; only the side swap is folded.
    SignExpanded,
}

impl Symmetry {
    pub fn from_expand_signs(expand: bool) -> Self {
        if expand {
            Symmetry::SignExpanded
        } else {
            Symmetry::Canonical
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Symmetry::Canonical => "canonical",
            Symmetry::SignExpanded => "sign-expanded",
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A two-class solution `(k1, k2, k3, k4)` of the resonance system.
///
/// Ordering compares `k1, k2, k3, k4` lexicographically; the class fields are
/// functions of the vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResonantQuad {
    pub k1: WaveVector,
    pub k2: WaveVector,
    pub k3: WaveVector,
    pub k4: WaveVector,
    pub q1: u64,
    pub g1: u64,
    pub q2: u64,
    pub g2: u64,
}

impl ResonantQuad {
    pub fn vectors(&self) -> [WaveVector; 4] {
        [self.k1, self.k2, self.k3, self.k4]
    }

    /// Builds a quad whose slots are already known to follow the class
    /// pattern. Only checked in debug builds.
    pub(crate) fn from_pattern(k: [WaveVector; 4], first: NormSplit, second: NormSplit) -> Self {
        debug_assert!(validate_pattern(k).is_ok());
        Self {
            k1: k[0],
            k2: k[1],
            k3: k[2],
            k4: k[3],
            q1: first.q,
            g1: first.gamma,
            q2: second.q,
            g2: second.gamma,
        }
    }

    /// Re-checks every structural invariant from scratch.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = validate_pattern(self.vectors())?;
        if (a.q, a.gamma, b.q, b.gamma) != (self.q1, self.g1, self.q2, self.g2) {
            return Err(Error::InvalidQuad(format!(
                "class fields ({}, {}, {}, {}) do not match the vectors",
                self.q1, self.g1, self.q2, self.g2
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ResonantQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {} = {} + {}  [q1={} g1={} q2={} g2={}]",
            self.k1, self.k2, self.k3, self.k4, self.q1, self.g1, self.q2, self.g2
        )
    }
}

/// Momentum `k1 + k2 = k3 + k4`, nonzero vectors, `k1, k3` of one class and
/// weight, `k2, k4` of another class, `q1 < q2`, and `k1 ≠ k3`.
fn validate_pattern(k: [WaveVector; 4]) -> Result<(NormSplit, NormSplit)> {
    if k[0] + k[1] != k[2] + k[3] {
        return Err(Error::InvalidQuad("momentum does not balance".into()));
    }
    let s: Vec<NormSplit> = k.iter().map(|&v| class_of(v)).collect::<Result<_>>()?;
    if s[0] != s[2] || s[1] != s[3] {
        return Err(Error::InvalidQuad(
            "slots do not follow the class pattern".into(),
        ));
    }
    if s[0].q >= s[1].q {
        return Err(Error::InvalidQuad(format!(
            "class indexes must satisfy q1 < q2, got {} and {}",
            s[0].q, s[1].q
        )));
    }
    if k[0] == k[2] {
        return Err(Error::InvalidQuad("trivial quadruple".into()));
    }
    Ok((s[0], s[1]))
}

pub(crate) fn side_swap(k: [WaveVector; 4]) -> [WaveVector; 4] {
    [k[2], k[3], k[0], k[1]]
}

pub(crate) fn reflect_all(k: [WaveVector; 4], r: Reflection) -> [WaveVector; 4] {
    k.map(|v| v.reflect(r))
}

/// Lexicographic minimum over the orbit of `k` under `symmetry`.
pub(crate) fn orbit_min(k: [WaveVector; 4], symmetry: Symmetry) -> [WaveVector; 4] {
    let swapped = side_swap(k);
    if symmetry == Symmetry::SignExpanded {
        return swapped.min(k);
    }
    // The smallest image starts with a vector whose coordinates are both
    // nonpositive; only the reflections producing that leading vector compete.
    let lead = |x: WaveVector| WaveVector::new(-x.m.abs(), -x.n.abs());
    let best_lead = lead(k[0]).min(lead(k[2]));
    // images compared as order-preserving integer keys
    let key = |v: WaveVector| ((v.m as u32 ^ 1 << 31) as u64) << 32 | (v.n as u32 ^ 1 << 31) as u64;
    let mut best = [u64::MAX; 4];
    let mut best_img = k;
    let mut consider = |src: [WaveVector; 4], sm: i32, sn: i32| {
        let img = src.map(|v| WaveVector::new(v.m * sm, v.n * sn));
        let keys = img.map(key);
        if keys < best {
            best = keys;
            best_img = img;
        }
    };
    for src in [k, swapped] {
        let x = src[0];
        if lead(x) != best_lead {
            continue;
        }
        let sm = if x.m > 0 { -1 } else { 1 };
        let sn = if x.n > 0 { -1 } else { 1 };
        consider(src, sm, sn);
        // a zero coordinate leaves that axis flip free
        if x.m == 0 {
            consider(src, -sm, sn);
        }
        if x.n == 0 {
            consider(src, sm, -sn);
            if x.m == 0 {
                consider(src, -sm, -sn);
            }
        }
    }
    best_img
}

/// Puts an arbitrary solution `(k1, k2, k3, k4)` of the resonance system into
/// the slot pattern, then returns the smallest member of its orbit.
///
/// Accepts either pairing of the right-hand side (`k1 ~ k3` or `k1 ~ k4`)
/// and either order of the classes.
pub fn canonicalize(k: [WaveVector; 4], symmetry: Symmetry) -> Result<ResonantQuad> {
    if k[0] + k[1] != k[2] + k[3] {
        return Err(Error::InvalidQuad("momentum does not balance".into()));
    }
    let s: Vec<NormSplit> = k.iter().map(|&v| class_of(v)).collect::<Result<_>>()?;
    let [a, b, c, d] = k;
    let pattern = if s[0] == s[2] && s[1] == s[3] {
        [a, b, c, d]
    } else if s[0] == s[3] && s[1] == s[2] {
        [a, b, d, c]
    } else {
        return Err(Error::InvalidQuad(
            "vectors do not pair into two classes across the sides".into(),
        ));
    };
    let (first, second) = (class_of(pattern[0])?, class_of(pattern[1])?);
    let (pattern, first, second) = match first.q.cmp(&second.q) {
        std::cmp::Ordering::Less => (pattern, first, second),
        std::cmp::Ordering::Greater => {
            let [a, b, c, d] = pattern;
            ([b, a, d, c], second, first)
        }
        std::cmp::Ordering::Equal => {
            return Err(Error::InvalidQuad(format!(
                "one-class quadruple (q = {})",
                first.q
            )))
        }
    };
    if pattern[0] == pattern[2] {
        return Err(Error::InvalidQuad("trivial quadruple".into()));
    }
    Ok(ResonantQuad::from_pattern(
        orbit_min(pattern, symmetry),
        first,
        second,
    ))
}

/// Exact frequency balance `ω(k1) + ω(k2) = ω(k3) + ω(k4)`.
///
/// Fourth roots of distinct fourth-power-free integers are linearly
/// independent over the rationals, so the equation holds iff, for every
/// class index, the weights on the left sum to the weights on the right.
pub fn omega_balance(k: [WaveVector; 4]) -> Result<bool> {
    let mut net: BTreeMap<u64, i64> = BTreeMap::new();
    for (i, &v) in k.iter().enumerate() {
        let NormSplit { gamma, q } = class_of(v)?;
        let sign = if i < 2 { 1 } else { -1 };
        *net.entry(q).or_default() += sign * gamma as i64;
    }
    Ok(net.values().all(|&w| w == 0))
}
