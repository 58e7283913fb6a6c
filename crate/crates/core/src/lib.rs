//! Exhaustive enumeration of two-class four-wave resonances for gravity
//! water waves, `ω(m, n) = (m² + n²)^(1/4)`, on the lattice `|m|, |n| ≤ D`.
//!
//! A resonant quadruple satisfies
//!
//! ```text
//! ω(k1) + ω(k2) = ω(k3) + ω(k4),    k1 + k2 = k3 + k4.
//! ```
//!
//! Every norm splits uniquely as `γ⁴·q` with `q` fourth-power free, so
//! `ω = γ·q^(1/4)`. Outside the one-class case the only solutions pair two
//! vectors of class `q1` (same weight) with two vectors of class `q2`. Two
//! classes interact exactly when their sets of *deficiency points*
//! (differences of same-norm vectors) intersect, which the solver detects
//! with a saturating counter grid in five passes:
//!
//! 1. mark every class's deficiency set on the grid,
//! 2. discard classes whose points are all touched once,
//! 3. link every solution half to its deficiency point,
//! 4. gather points touched by two or more classes,
//! 5. combine halves of distinct classes at each gathered point.
//!
//! [`oracle`] brute-forces the same set at small `D` for cross-checking, and
//! [`stats`] aggregates solution sets by domain and vector multiplicity.

pub mod arith;
pub mod catalog;
pub mod cli;
pub mod deficiency;
pub mod error;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod quad;
pub mod solver;
pub mod stats;

pub use catalog::{build_class_catalog, ClassCatalog, ClassRecord, WeightGroup};
pub use deficiency::{DeficiencyMode, DeficiencyPoint, HalfPair};
pub use error::{Error, Result};
pub use lattice::WaveVector;
pub use quad::{canonicalize, ResonantQuad, Symmetry};
pub use solver::{solve, solve_streaming, OutputSink, RunReport, SolveOutput, SolverConfig};
