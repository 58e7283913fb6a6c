//! The five-pass two-class solver.
//!
//! ```text
//! pass 1  mark      every class's deficiency set on a saturating u8 grid
//! pass 2  discard   classes whose every point reads 1
//! pass 3  link      all halves of the survivors into per-point chains
//! pass 4  gather    points read ≥ 2, with their chain heads
//! pass 5  extract   pairs of halves of distinct classes at each point
//! ```
//!
//! Pass 5 meets each symmetry orbit of solutions at most a few times (once
//! per orbit member whose deficiency `k1 − k3` is nonnegative). An orbit is
//! emitted only from its smallest such member, so the output needs no global
//! deduplication and can be streamed in bounded memory.

use std::fmt;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU8, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::NormSplit;
use crate::catalog::{build_class_catalog, check_domain, ClassCatalog, ClassRecord};
use crate::deficiency::{deficiency_cells, for_each_half, DeficiencyMode, DeficiencyPoint};
use crate::error::{Error, Result};
use crate::io::{OutputFormat, SolutionWriter};
use crate::lattice::{Reflection, WaveVector};
use crate::quad::{orbit_min, reflect_all, side_swap, ResonantQuad, Symmetry};

/// Where `solve` writes its solutions, if anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSink {
    pub format: OutputFormat,
    /// `None` writes to standard output.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub domain_limit: u32,
    pub mode: DeficiencyMode,
    pub expand_signs: bool,
    pub sink: Option<OutputSink>,
}

impl SolverConfig {
    pub fn new(domain_limit: u32) -> Self {
        Self {
            domain_limit,
            mode: DeficiencyMode::Complete,
            expand_signs: false,
            sink: None,
        }
    }

    pub fn with_mode(mut self, mode: DeficiencyMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_expand_signs(mut self, expand: bool) -> Self {
        self.expand_signs = expand;
        self
    }

    pub fn with_sink(mut self, sink: OutputSink) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn symmetry(&self) -> Symmetry {
        Symmetry::from_expand_signs(self.expand_signs)
    }
}

/// Wall time of each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PassTimings {
    pub catalog: Duration,
    pub mark: Duration,
    pub discard: Duration,
    pub link: Duration,
    pub gather: Duration,
    pub extract: Duration,
    pub output: Duration,
}

impl PassTimings {
    pub fn total(&self) -> Duration {
        self.catalog
            + self.mark
            + self.discard
            + self.link
            + self.gather
            + self.extract
            + self.output
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub domain_limit: u32,
    pub mode: DeficiencyMode,
    pub symmetry: Symmetry,
    pub classes_built: usize,
    pub classes_discarded: usize,
    /// Halves stored by pass 3 (all halves of the surviving classes).
    pub halves: usize,
    /// Halves chained to gathered points, i.e. points of two or more classes.
    pub linked_halves: usize,
    pub gathered_points: usize,
    /// Grid cells that reached the saturation value.
    pub saturated_cells: usize,
    pub solutions: usize,
    pub workers: usize,
    pub timings: PassTimings,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.timings;
        writeln!(
            f,
            "run report: D={} mode={} symmetry={} workers={}",
            self.domain_limit, self.mode, self.symmetry, self.workers
        )?;
        writeln!(f, "  classes built      {:>12}", self.classes_built)?;
        writeln!(f, "  classes discarded  {:>12}", self.classes_discarded)?;
        writeln!(f, "  halves stored      {:>12}", self.halves)?;
        writeln!(f, "  halves linked      {:>12}", self.linked_halves)?;
        writeln!(f, "  gathered points    {:>12}", self.gathered_points)?;
        writeln!(f, "  saturated cells    {:>12}", self.saturated_cells)?;
        writeln!(f, "  solutions          {:>12}", self.solutions)?;
        writeln!(
            f,
            "  time: catalog {:.3}s, pass1 {:.3}s, pass2 {:.3}s, pass3 {:.3}s, pass4 {:.3}s, pass5 {:.3}s, output {:.3}s, total {:.3}s",
            t.catalog.as_secs_f64(),
            t.mark.as_secs_f64(),
            t.discard.as_secs_f64(),
            t.link.as_secs_f64(),
            t.gather.as_secs_f64(),
            t.extract.as_secs_f64(),
            t.output.as_secs_f64(),
            t.total().as_secs_f64()
        )
    }
}

/// Saturating per-point class counters over `[0, 2D]²`, one octet each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeficiencyGrid {
    side: usize,
    cells: Vec<u8>,
}

impl DeficiencyGrid {
    pub const SATURATION: u8 = u8::MAX;

    pub fn new(domain_limit: u32) -> Self {
        let side = 2 * domain_limit as usize + 1;
        Self {
            side,
            cells: vec![0; side * side],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, p: DeficiencyPoint) -> u8 {
        self.cells[p.cell(self.side)]
    }

    pub fn increment(&mut self, p: DeficiencyPoint) {
        let c = &mut self.cells[p.cell(self.side)];
        *c = c.saturating_add(1);
    }
}

/// Append-only store of solution halves with one chain per deficiency
/// point. Index 0 is a sentinel, so a zero link ends a chain.
#[derive(Debug, Clone)]
pub struct HalfStore {
    side: usize,
    entries: Vec<StoredHalf>,
    next: Vec<u32>,
    heads: Vec<u32>,
    tails: Vec<u32>,
}

/// Compact half record; the deficiency point is `u − v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoredHalf {
    pub q: u64,
    pub gamma: u64,
    pub u: WaveVector,
    pub v: WaveVector,
}

impl StoredHalf {
    pub fn delta(&self) -> DeficiencyPoint {
        let d = self.u - self.v;
        DeficiencyPoint::new(d.m as u32, d.n as u32)
    }

    fn split(&self) -> NormSplit {
        NormSplit {
            gamma: self.gamma,
            q: self.q,
        }
    }
}

const SENTINEL: StoredHalf = StoredHalf {
    q: 0,
    gamma: 0,
    u: WaveVector::new(0, 0),
    v: WaveVector::new(0, 0),
};

impl HalfStore {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            entries: vec![SENTINEL],
            next: vec![0],
            heads: vec![0; side * side],
            tails: vec![0; side * side],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, half: StoredHalf) {
        let idx = self.entries.len() as u32;
        let cell = half.delta().cell(self.side);
        self.entries.push(half);
        self.next.push(0);
        match self.tails[cell] {
            0 => self.heads[cell] = idx,
            prev => self.next[prev as usize] = idx,
        }
        self.tails[cell] = idx;
    }

    pub fn head(&self, p: DeficiencyPoint) -> u32 {
        self.heads[p.cell(self.side)]
    }

    pub fn entry(&self, idx: u32) -> &StoredHalf {
        &self.entries[idx as usize]
    }

    pub fn next_index(&self, idx: u32) -> u32 {
        self.next[idx as usize]
    }

    /// Follows the chain starting at `head` in insertion order.
    pub fn chain(&self, head: u32) -> impl Iterator<Item = &StoredHalf> + '_ {
        std::iter::successors((head != 0).then_some(head), move |&i| {
            let n = self.next[i as usize];
            (n != 0).then_some(n)
        })
        .map(move |i| &self.entries[i as usize])
    }

    pub fn chain_at(&self, p: DeficiencyPoint) -> impl Iterator<Item = &StoredHalf> + '_ {
        self.chain(self.head(p))
    }
}

pub fn pass1_mark(catalog: &ClassCatalog, mode: DeficiencyMode) -> DeficiencyGrid {
    let mut grid = DeficiencyGrid::new(catalog.domain_limit());
    let side = grid.side;
    let atomic: Vec<AtomicU8> = std::mem::take(&mut grid.cells)
        .into_iter()
        .map(AtomicU8::new)
        .collect();
    catalog
        .records()
        .par_iter()
        .for_each_init(Vec::new, |buf, rec| {
            deficiency_cells(rec, mode, side, buf);
            for &cell in buf.iter() {
                let _ =
                    atomic[cell as usize]
                        .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |c| c.checked_add(1));
            }
        });
    grid.cells = atomic.into_iter().map(AtomicU8::into_inner).collect();
    grid
}

/// Classes with at least one deficiency point read ≥ 2, in catalog order.
pub fn pass2_discard<'c>(
    grid: &DeficiencyGrid,
    catalog: &'c ClassCatalog,
    mode: DeficiencyMode,
) -> Vec<&'c ClassRecord> {
    catalog
        .records()
        .par_iter()
        .map_init(Vec::new, |buf, rec| {
            deficiency_cells(rec, mode, grid.side, buf);
            buf.iter()
                .any(|&c| grid.cells[c as usize] >= 2)
                .then_some(rec)
        })
        .flatten()
        .collect()
}

/// Classes are generated in parallel chunks and appended in catalog order,
/// so chains are identical to a single-threaded run.
pub fn pass3_link(
    survivors: &[&ClassRecord],
    domain_limit: u32,
    mode: DeficiencyMode,
) -> HalfStore {
    const CHUNK: usize = 4096;
    let side = 2 * domain_limit as usize + 1;
    let mut store = HalfStore::new(side);
    for chunk in survivors.chunks(CHUNK) {
        let generated: Vec<Vec<StoredHalf>> = chunk
            .par_iter()
            .map(|rec| {
                let mut out = Vec::new();
                for_each_half(rec, mode, |h| {
                    out.push(StoredHalf {
                        q: h.q,
                        gamma: h.gamma,
                        u: h.u,
                        v: h.v,
                    })
                });
                out
            })
            .collect();
        for half in generated.into_iter().flatten() {
            store.push(half);
        }
    }
    store
}

/// A point of two or more classes, the head of its chain and the chain
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GatheredPoint {
    pub point: DeficiencyPoint,
    pub head: u32,
    pub len: u32,
}

pub fn pass4_gather(grid: &DeficiencyGrid, store: &HalfStore) -> Vec<GatheredPoint> {
    grid.cells
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c >= 2)
        .map(|(cell, _)| {
            let point = DeficiencyPoint::from_cell(cell, grid.side);
            let head = store.head(point);
            GatheredPoint {
                point,
                head,
                len: store.chain(head).count() as u32,
            }
        })
        .collect()
}

/// Upper bound on half pairs examined by one pass-5 work unit.
const UNIT_PAIRS: usize = 1 << 18;

/// Rows `first..last` of the pair triangle of one gathered point. Row `i`
/// pairs half `i` with every later half of the chain.
#[derive(Debug, Clone, Copy)]
struct WorkUnit {
    point: usize,
    first: u32,
    last: u32,
    pairs: usize,
}

fn plan_units(gathered: &[GatheredPoint], unit_pairs: usize) -> Vec<WorkUnit> {
    let mut units = Vec::new();
    for (point, g) in gathered.iter().enumerate() {
        let n = g.len as usize;
        let mut first = 0;
        let mut pairs = 0;
        for i in 0..n {
            pairs += n - 1 - i;
            if pairs >= unit_pairs || i + 1 == n {
                units.push(WorkUnit {
                    point,
                    first: first as u32,
                    last: (i + 1) as u32,
                    pairs,
                });
                first = i + 1;
                pairs = 0;
            }
        }
    }
    units
}

/// Whether pass 5 produces `k` itself: both of its halves are admitted.
fn extracted_by(k: [WaveVector; 4], mode: DeficiencyMode) -> bool {
    mode.admits(k[0], k[2]) && mode.admits(k[3], k[1])
}

/// Whether `k` is the smallest member of its orbit that pass 5 produces.
///
/// A reflection keeps the deficiency nonnegative only if it fixes it, and a
/// side swap negates it, so every produced member of the orbit sits at the
/// same point: `k`, its double-flip swap, and their flips along an axis the
/// deficiency lies on.
fn is_designated(k: [WaveVector; 4], delta: DeficiencyPoint, mode: DeficiencyMode) -> bool {
    // members at the same point are all produced in complete mode
    let beats =
        |c: [WaveVector; 4]| c < k && (mode == DeficiencyMode::Complete || extracted_by(c, mode));
    let twin = side_swap(reflect_all(k, Reflection::FlipBoth));
    if beats(twin) {
        return false;
    }
    let fixing = if delta.dm == 0 {
        Reflection::FlipM
    } else if delta.dn == 0 {
        Reflection::FlipN
    } else {
        return true;
    };
    !beats(reflect_all(k, fixing)) && !beats(reflect_all(twin, fixing))
}

fn emit_orbit(
    k: [WaveVector; 4],
    first: NormSplit,
    second: NormSplit,
    symmetry: Symmetry,
    out: &mut Vec<ResonantQuad>,
) {
    match symmetry {
        Symmetry::Canonical => {
            out.push(ResonantQuad::from_pattern(
                orbit_min(k, Symmetry::Canonical),
                first,
                second,
            ));
        }
        Symmetry::SignExpanded => {
            let mut images = Reflection::ALL.map(|r| orbit_min(reflect_all(k, r), symmetry));
            images.sort_unstable();
            let mut last = None;
            for img in images {
                if last != Some(img) {
                    out.push(ResonantQuad::from_pattern(img, first, second));
                    last = Some(img);
                }
            }
        }
    }
}

fn extract_unit(
    unit: &WorkUnit,
    gathered: &[GatheredPoint],
    store: &HalfStore,
    mode: DeficiencyMode,
    symmetry: Symmetry,
) -> Vec<ResonantQuad> {
    let g = &gathered[unit.point];
    let halves: Vec<StoredHalf> = store.chain(g.head).copied().collect();
    // end of the run of same-class halves starting at each index
    let mut run_end = vec![halves.len(); halves.len()];
    for i in (0..halves.len().saturating_sub(1)).rev() {
        if halves[i].q == halves[i + 1].q {
            run_end[i] = run_end[i + 1];
        } else {
            run_end[i] = i + 1;
        }
    }
    // Chains list classes in ascending order, so the row half is the lower
    // class of each of its pairs. In complete mode its double-flip twin
    // (−v, −u) then leads a smaller member whenever −v < u.
    let skip_reversed =
        mode == DeficiencyMode::Complete && halves.windows(2).all(|w| w[0].q <= w[1].q);
    let mut out = Vec::new();
    for i in unit.first as usize..unit.last as usize {
        let a = &halves[i];
        if skip_reversed && -a.v < a.u {
            continue;
        }
        for b in &halves[run_end[i]..] {
            if a.q == b.q {
                continue;
            }
            let (first, second) = if a.q < b.q { (a, b) } else { (b, a) };
            // u1 − v1 = u2 − v2 gives u1 + v2 = v1 + u2
            let k = [first.u, second.v, first.v, second.u];
            if is_designated(k, g.point, mode) {
                emit_orbit(k, first.split(), second.split(), symmetry, &mut out);
            }
        }
    }
    out
}

/// Combines halves of distinct classes at every gathered point and hands
/// the solutions to `emit` in batches.
///
/// Each symmetry orbit is emitted exactly once. Batches arrive in gathered
/// point order, then chain order, whatever the worker count. Returns the
/// number of solutions emitted.
pub fn pass5_stream(
    gathered: &[GatheredPoint],
    store: &HalfStore,
    mode: DeficiencyMode,
    symmetry: Symmetry,
    emit: impl FnMut(&[ResonantQuad]) -> Result<()>,
) -> Result<usize> {
    stream_units(gathered, store, mode, symmetry, UNIT_PAIRS, emit)
}

fn stream_units(
    gathered: &[GatheredPoint],
    store: &HalfStore,
    mode: DeficiencyMode,
    symmetry: Symmetry,
    unit_pairs: usize,
    mut emit: impl FnMut(&[ResonantQuad]) -> Result<()>,
) -> Result<usize> {
    let units = plan_units(gathered, unit_pairs);
    let batch_pairs = 4 * rayon::current_num_threads().max(1) * unit_pairs;
    let mut total = 0;
    let mut start = 0;
    while start < units.len() {
        let mut end = start;
        let mut pairs = 0;
        while end < units.len() && (end == start || pairs + units[end].pairs <= batch_pairs) {
            pairs += units[end].pairs;
            end += 1;
        }
        let results: Vec<Vec<ResonantQuad>> = units[start..end]
            .par_iter()
            .map(|u| extract_unit(u, gathered, store, mode, symmetry))
            .collect();
        for batch in &results {
            if !batch.is_empty() {
                total += batch.len();
                emit(batch)?;
            }
        }
        start = end;
    }
    Ok(total)
}

/// [`pass5_stream`] collected into one vector, in emission order.
pub fn pass5_extract(
    gathered: &[GatheredPoint],
    store: &HalfStore,
    mode: DeficiencyMode,
    symmetry: Symmetry,
) -> Vec<ResonantQuad> {
    let mut all = Vec::new();
    pass5_stream(gathered, store, mode, symmetry, |batch| {
        all.extend_from_slice(batch);
        Ok(())
    })
    .expect("collecting never fails");
    all
}

#[derive(Debug)]
pub struct SolveOutput {
    /// Sorted ascending, no duplicates.
    pub solutions: Vec<ResonantQuad>,
    pub report: RunReport,
}

/// Builds the catalog for the configured domain and runs all five passes,
/// returning the sorted solution set.
pub fn solve(config: &SolverConfig) -> Result<SolveOutput> {
    solve_with_progress(config, |_| {})
}

/// Like [`solve`], calling `progress` with a one-line message after each
/// stage.
pub fn solve_with_progress(
    config: &SolverConfig,
    progress: impl FnMut(&str),
) -> Result<SolveOutput> {
    let mut solutions = Vec::new();
    let report = solve_streaming(config, progress, |batch| {
        solutions.extend_from_slice(batch);
        Ok(())
    })?;
    solutions.par_sort_unstable();
    Ok(SolveOutput { solutions, report })
}

/// Runs all five passes without holding the solution set. Each batch is
/// written to the configured sink, if any, and then passed to `consume`.
///
/// Output files list solutions in emission order, which depends only on the
/// domain, the mode and the symmetry.
pub fn solve_streaming(
    config: &SolverConfig,
    mut progress: impl FnMut(&str),
    mut consume: impl FnMut(&[ResonantQuad]) -> Result<()>,
) -> Result<RunReport> {
    check_domain(config.domain_limit)?;

    let t = Instant::now();
    let catalog = build_class_catalog(config.domain_limit)?;
    let catalog_time = t.elapsed();
    progress(&format!(
        "catalog: {} classes, {} weights, {} vectors",
        catalog.class_count(),
        catalog.weight_count(),
        catalog.vector_count()
    ));

    let mut writer = match &config.sink {
        Some(sink) => Some(SinkWriter::open(sink)?),
        None => None,
    };
    let mut report = solve_catalog_streaming(
        &catalog,
        config.mode,
        config.symmetry(),
        &mut progress,
        |batch| {
            if let Some(w) = writer.as_mut() {
                w.write(batch)?;
            }
            consume(batch)
        },
    )?;
    if let Some(w) = writer {
        let t = Instant::now();
        w.finish()?;
        report.timings.output += t.elapsed();
        progress(&format!("output: {} solutions written", report.solutions));
    }
    report.timings.catalog = catalog_time;
    Ok(report)
}

/// Runs passes 1–5 over an existing catalog and returns the sorted set.
pub fn solve_catalog(
    catalog: &ClassCatalog,
    mode: DeficiencyMode,
    symmetry: Symmetry,
    progress: impl FnMut(&str),
) -> SolveOutput {
    let mut solutions = Vec::new();
    let report = solve_catalog_streaming(catalog, mode, symmetry, progress, |batch| {
        solutions.extend_from_slice(batch);
        Ok(())
    })
    .expect("collecting never fails");
    solutions.par_sort_unstable();
    SolveOutput { solutions, report }
}

/// Passes 1–5 over an existing catalog, streaming pass-5 output into
/// `consume`. Time spent inside `consume` is reported as output time.
pub fn solve_catalog_streaming(
    catalog: &ClassCatalog,
    mode: DeficiencyMode,
    symmetry: Symmetry,
    mut progress: impl FnMut(&str),
    mut consume: impl FnMut(&[ResonantQuad]) -> Result<()>,
) -> Result<RunReport> {
    let mut timings = PassTimings::default();

    let t = Instant::now();
    let grid = pass1_mark(catalog, mode);
    timings.mark = t.elapsed();
    let saturated_cells = grid
        .cells
        .iter()
        .filter(|&&c| c == DeficiencyGrid::SATURATION)
        .count();
    progress(&format!("pass 1: marked {} classes", catalog.class_count()));

    let t = Instant::now();
    let survivors = pass2_discard(&grid, catalog, mode);
    timings.discard = t.elapsed();
    let discarded = catalog.class_count() - survivors.len();
    progress(&format!(
        "pass 2: {} classes kept, {} discarded",
        survivors.len(),
        discarded
    ));

    let t = Instant::now();
    let store = pass3_link(&survivors, catalog.domain_limit(), mode);
    timings.link = t.elapsed();
    progress(&format!("pass 3: {} halves linked", store.len()));

    let t = Instant::now();
    let gathered = pass4_gather(&grid, &store);
    let linked_halves: usize = gathered.iter().map(|g| g.len as usize).sum();
    timings.gather = t.elapsed();
    progress(&format!(
        "pass 4: {} interaction points, {} halves on them",
        gathered.len(),
        linked_halves
    ));

    let t = Instant::now();
    let mut consuming = Duration::ZERO;
    let solutions = pass5_stream(&gathered, &store, mode, symmetry, |batch| {
        let c = Instant::now();
        let r = consume(batch);
        consuming += c.elapsed();
        r
    })?;
    timings.extract = t.elapsed().saturating_sub(consuming);
    timings.output = consuming;
    progress(&format!("pass 5: {solutions} solutions"));

    Ok(RunReport {
        domain_limit: catalog.domain_limit(),
        mode,
        symmetry,
        classes_built: catalog.class_count(),
        classes_discarded: discarded,
        halves: store.len(),
        linked_halves,
        gathered_points: gathered.len(),
        saturated_cells,
        solutions,
        workers: rayon::current_num_threads(),
        timings,
    })
}

/// Buffered solution writer bound to an [`OutputSink`].
struct SinkWriter {
    path: PathBuf,
    inner: SolutionWriter<BufWriter<Box<dyn Write>>>,
}

impl SinkWriter {
    fn open(sink: &OutputSink) -> Result<Self> {
        let (path, raw): (PathBuf, Box<dyn Write>) = match &sink.path {
            Some(p) => {
                let file = std::fs::File::create(p).map_err(|source| Error::Sink {
                    path: p.clone(),
                    source,
                })?;
                (p.clone(), Box::new(file))
            }
            None => (PathBuf::from("<stdout>"), Box::new(std::io::stdout())),
        };
        let inner = SolutionWriter::new(BufWriter::with_capacity(1 << 20, raw), sink.format)
            .map_err(|source| Error::Sink {
                path: path.clone(),
                source,
            })?;
        Ok(Self { path, inner })
    }

    fn write(&mut self, batch: &[ResonantQuad]) -> Result<()> {
        self.inner.write_all(batch).map_err(|source| Error::Sink {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(self) -> Result<()> {
        let path = self.path;
        self.inner
            .finish()
            .and_then(|mut w| w.flush())
            .map_err(|source| Error::Sink { path, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::canonicalize;

    fn v(m: i32, n: i32) -> WaveVector {
        WaveVector::new(m, n)
    }

    fn p(dm: u32, dn: u32) -> DeficiencyPoint {
        DeficiencyPoint::new(dm, dn)
    }

    fn catalog(limit: u32) -> ClassCatalog {
        build_class_catalog(limit).unwrap()
    }

    fn single_class(limit: u32, q: u64) -> ClassCatalog {
        let full = catalog(limit);
        ClassCatalog::from_records(limit, vec![full.get(q).unwrap().clone()])
    }

    #[test]
    fn grid_saturates() {
        let mut g = DeficiencyGrid::new(2);
        assert_eq!(g.cells().len(), 25);
        for _ in 0..300 {
            g.increment(p(1, 3));
        }
        assert_eq!(g.get(p(1, 3)), 255);
        assert_eq!(g.get(p(3, 1)), 0);
    }

    #[test]
    fn pass1_examples() {
        let empty = ClassCatalog::from_records(7, vec![]);
        assert!(pass1_mark(&empty, DeficiencyMode::Complete)
            .cells()
            .iter()
            .all(|&c| c == 0));

        let g = pass1_mark(&catalog(7), DeficiencyMode::Complete);
        assert!(g.get(p(0, 10)) >= 2);

        let single = single_class(7, 50);
        let g = pass1_mark(&single, DeficiencyMode::Complete);
        assert!(g.cells().iter().all(|&c| c <= 1));
        assert_eq!(g.cells().iter().filter(|&&c| c == 1).count(), 21);
    }

    #[test]
    fn pass1_is_order_independent() {
        let cat = catalog(20);
        let mut reversed: Vec<ClassRecord> = cat.records().to_vec();
        reversed.reverse();
        // from_records re-sorts, so build the grid by hand in reverse
        let mut manual = DeficiencyGrid::new(20);
        for rec in &reversed {
            for pt in crate::deficiency::deficiency_set(rec, DeficiencyMode::Complete) {
                manual.increment(pt);
            }
        }
        assert_eq!(manual, pass1_mark(&cat, DeficiencyMode::Complete));
    }

    #[test]
    fn pass2_examples() {
        let single = single_class(7, 50);
        let g = pass1_mark(&single, DeficiencyMode::Complete);
        assert!(pass2_discard(&g, &single, DeficiencyMode::Complete).is_empty());

        let cat = catalog(7);
        let g = pass1_mark(&cat, DeficiencyMode::Complete);
        let kept: Vec<u64> = pass2_discard(&g, &cat, DeficiencyMode::Complete)
            .iter()
            .map(|r| r.q)
            .collect();
        assert!(kept.contains(&50) && kept.contains(&26));
    }

    #[test]
    fn store_chains_in_insertion_order() {
        let mut store = HalfStore::new(5);
        let h = |q, u: (i32, i32), w: (i32, i32)| StoredHalf {
            q,
            gamma: 1,
            u: u.into(),
            v: w.into(),
        };
        store.push(h(1, (0, 1), (-1, 0)));
        store.push(h(5, (1, 2), (-1, 2)));
        store.push(h(5, (-1, 2), (-2, 1)));
        store.push(h(2, (1, 1), (-1, 1)));
        assert_eq!(store.len(), 4);
        let at_11: Vec<u64> = store.chain_at(p(1, 1)).map(|h| h.q).collect();
        assert_eq!(at_11, vec![1, 5]);
        let at_20: Vec<u64> = store.chain_at(p(2, 0)).map(|h| h.q).collect();
        assert_eq!(at_20, vec![5, 2]);
        assert_eq!(store.chain_at(p(0, 1)).count(), 0);
        assert_eq!(store.next_index(store.head(p(1, 1))), 3);
        assert_eq!(store.next_index(3), 0);
    }

    #[test]
    fn pass3_and_pass4_examples() {
        assert!(pass3_link(&[], 7, DeficiencyMode::Complete).is_empty());

        let cat = catalog(7);
        let g = pass1_mark(&cat, DeficiencyMode::Complete);
        let survivors = pass2_discard(&g, &cat, DeficiencyMode::Complete);
        let store = pass3_link(&survivors, 7, DeficiencyMode::Complete);
        let expected: usize = survivors
            .iter()
            .map(|r| crate::deficiency::half_pairs(r, DeficiencyMode::Complete).len())
            .sum();
        assert_eq!(store.len(), expected);

        let gathered = pass4_gather(&g, &store);
        assert!(gathered.iter().any(|gp| gp.point == p(0, 10)));
        for gp in &gathered {
            let chain: Vec<_> = store.chain(gp.head).collect();
            assert!(chain.len() >= 2);
            assert!(chain.iter().all(|h| h.delta() == gp.point));
            let mut qs: Vec<u64> = chain.iter().map(|h| h.q).collect();
            qs.dedup();
            assert!(qs.len() >= 2);
        }

        let zero = DeficiencyGrid::new(7);
        assert!(pass4_gather(&zero, &store).is_empty());
    }

    #[test]
    fn pass5_example_quad() {
        let cat = catalog(7);
        let out = solve_catalog(&cat, DeficiencyMode::Complete, Symmetry::Canonical, |_| {});
        let expected =
            canonicalize([v(5, 5), v(1, -5), v(5, -5), v(1, 5)], Symmetry::Canonical).unwrap();
        assert!(out.solutions.contains(&expected));
    }

    #[test]
    fn pass5_same_class_pairs_are_ignored() {
        let mut store = HalfStore::new(15);
        store.push(StoredHalf {
            q: 50,
            gamma: 1,
            u: v(5, 5),
            v: v(5, -5),
        });
        store.push(StoredHalf {
            q: 50,
            gamma: 1,
            u: v(-5, 5),
            v: v(-5, -5),
        });
        let gathered = [GatheredPoint {
            point: p(0, 10),
            head: store.head(p(0, 10)),
            len: 2,
        }];
        assert!(pass5_extract(
            &gathered,
            &store,
            DeficiencyMode::Complete,
            Symmetry::Canonical
        )
        .is_empty());
    }

    fn prepared(limit: u32, mode: DeficiencyMode) -> (HalfStore, Vec<GatheredPoint>) {
        let cat = catalog(limit);
        let g = pass1_mark(&cat, mode);
        let survivors = pass2_discard(&g, &cat, mode);
        let store = pass3_link(&survivors, limit, mode);
        let gathered = pass4_gather(&g, &store);
        (store, gathered)
    }

    /// Designation by brute force over all eight orbit members.
    fn designated_by_full_orbit(k: [WaveVector; 4], mode: DeficiencyMode) -> bool {
        Reflection::ALL
            .iter()
            .flat_map(|&r| {
                let img = reflect_all(k, r);
                [img, side_swap(img)]
            })
            .filter(|&img| extracted_by(img, mode))
            .min()
            == Some(k)
    }

    #[test]
    fn designation_matches_full_orbit_scan() {
        for mode in [DeficiencyMode::Complete, DeficiencyMode::PaperCompat] {
            let (store, gathered) = prepared(15, mode);
            let mut checked = 0;
            for g in &gathered {
                let chain: Vec<_> = store.chain(g.head).collect();
                for (i, a) in chain.iter().enumerate() {
                    for b in &chain[i + 1..] {
                        if a.q == b.q {
                            continue;
                        }
                        let (f, s) = if a.q < b.q { (a, b) } else { (b, a) };
                        let k = [f.u, s.v, f.v, s.u];
                        assert_eq!(
                            is_designated(k, g.point, mode),
                            designated_by_full_orbit(k, mode),
                            "{k:?}"
                        );
                        checked += 1;
                    }
                }
            }
            assert!(checked > 1000);
        }
    }

    #[test]
    fn unit_splitting_preserves_emission_order() {
        for symmetry in [Symmetry::Canonical, Symmetry::SignExpanded] {
            let (store, gathered) = prepared(15, DeficiencyMode::Complete);
            let whole = pass5_extract(&gathered, &store, DeficiencyMode::Complete, symmetry);
            let mut split = Vec::new();
            let n = stream_units(
                &gathered,
                &store,
                DeficiencyMode::Complete,
                symmetry,
                3,
                |b| {
                    split.extend_from_slice(b);
                    Ok(())
                },
            )
            .unwrap();
            assert_eq!(n, whole.len());
            assert_eq!(split, whole);
            let mut sorted = whole.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), whole.len());
        }
    }

    #[test]
    fn units_cover_every_row_once() {
        let (_, gathered) = prepared(15, DeficiencyMode::Complete);
        for budget in [1, 7, 1000] {
            let units = plan_units(&gathered, budget);
            let mut next_row = vec![0u32; gathered.len()];
            for u in &units {
                assert_eq!(u.first, next_row[u.point]);
                assert!(u.last > u.first);
                next_row[u.point] = u.last;
            }
            for (g, r) in gathered.iter().zip(&next_row) {
                assert_eq!(g.len, *r);
            }
        }
    }

    #[test]
    fn emit_errors_stop_the_stream() {
        let (store, gathered) = prepared(10, DeficiencyMode::Complete);
        let mut calls = 0;
        let r = pass5_stream(
            &gathered,
            &store,
            DeficiencyMode::Complete,
            Symmetry::Canonical,
            |_| {
                calls += 1;
                Err(Error::DomainTooSmall(0))
            },
        );
        assert!(matches!(r, Err(Error::DomainTooSmall(0))));
        assert_eq!(calls, 1);
    }

    #[test]
    fn streamed_file_matches_collected_set() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let cfg = SolverConfig::new(9).with_sink(OutputSink {
            format: OutputFormat::Jsonl,
            path: Some(path.clone()),
        });
        let mut seen = 0;
        let report = solve_streaming(
            &cfg,
            |_| {},
            |b| {
                seen += b.len();
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(report.solutions, seen);
        let file = std::io::BufReader::new(std::fs::File::open(&path).unwrap());
        let mut read = crate::io::read_solutions(file, OutputFormat::Jsonl).unwrap();
        assert_eq!(read.len(), seen);
        read.sort_unstable();
        assert_eq!(read, solve(&SolverConfig::new(9)).unwrap().solutions);
    }

    #[test]
    fn expand_signs_gives_four_images_for_generic_quads() {
        let cat = catalog(12);
        let canon = solve_catalog(&cat, DeficiencyMode::Complete, Symmetry::Canonical, |_| {});
        let expanded = solve_catalog(
            &cat,
            DeficiencyMode::Complete,
            Symmetry::SignExpanded,
            |_| {},
        );
        let images_of = |c: &ResonantQuad| {
            expanded
                .solutions
                .iter()
                .filter(|e| canonicalize(e.vectors(), Symmetry::Canonical).unwrap() == *c)
                .count()
        };
        let distinct_reflections = |c: &ResonantQuad| {
            let mut imgs: Vec<_> = Reflection::ALL
                .iter()
                .map(|&r| orbit_min(reflect_all(c.vectors(), r), Symmetry::SignExpanded))
                .collect();
            imgs.sort_unstable();
            imgs.dedup();
            imgs.len()
        };
        let generic = canon
            .solutions
            .iter()
            .find(|s| {
                s.vectors().iter().all(|k| k.m != 0 && k.n != 0) && distinct_reflections(s) == 4
            })
            .expect("a quad with all coordinates nonzero");
        assert_eq!(images_of(generic), 4);
        // the n-flip of this one is its side swap
        let fifty =
            canonicalize([v(5, 5), v(1, -5), v(5, -5), v(1, 5)], Symmetry::Canonical).unwrap();
        assert_eq!(images_of(&fifty), 2);
        for c in &canon.solutions {
            assert_eq!(images_of(c), distinct_reflections(c));
        }
        assert_eq!(
            expanded.solutions.len(),
            canon
                .solutions
                .iter()
                .map(distinct_reflections)
                .sum::<usize>()
        );
        // every expanded quad folds back to a canonical one
        for e in &expanded.solutions {
            let c = canonicalize(e.vectors(), Symmetry::Canonical).unwrap();
            assert!(canon.solutions.binary_search(&c).is_ok());
        }
    }

    #[test]
    fn unit_domain() {
        let out = solve(&SolverConfig::new(1)).unwrap();
        let expected =
            canonicalize([v(1, 0), v(-1, 1), v(-1, 0), v(1, 1)], Symmetry::Canonical).unwrap();
        assert_eq!(out.solutions.len(), 2);
        assert!(out.solutions.contains(&expected));
        assert_eq!(out.report.classes_built, 2);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(matches!(
            solve(&SolverConfig::new(0)),
            Err(Error::DomainTooSmall(0))
        ));
    }

    #[test]
    fn sink_failure_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig::new(4).with_sink(OutputSink {
            format: OutputFormat::Csv,
            path: Some(dir.path().join("missing").join("out.csv")),
        });
        assert!(matches!(solve(&cfg), Err(Error::Sink { .. })));
    }

    #[test]
    fn output_is_sorted_and_unique() {
        for symmetry in [Symmetry::Canonical, Symmetry::SignExpanded] {
            for mode in [DeficiencyMode::Complete, DeficiencyMode::PaperCompat] {
                let out = solve_catalog(&catalog(15), mode, symmetry, |_| {});
                assert!(out.solutions.windows(2).all(|w| w[0] < w[1]));
                for s in &out.solutions {
                    assert_eq!(canonicalize(s.vectors(), symmetry).unwrap(), *s);
                }
            }
        }
    }

    #[test]
    fn paper_compat_is_a_subset() {
        let cat = catalog(15);
        let full = solve_catalog(&cat, DeficiencyMode::Complete, Symmetry::Canonical, |_| {});
        let compat = solve_catalog(
            &cat,
            DeficiencyMode::PaperCompat,
            Symmetry::Canonical,
            |_| {},
        );
        assert!(compat.solutions.len() < full.solutions.len());
        for s in &compat.solutions {
            assert!(full.solutions.binary_search(s).is_ok());
        }
    }
}
