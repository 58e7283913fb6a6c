//! Solution file formats.
//!
//! CSV carries the header `m1,n1,m2,n2,m3,n3,m4,n4,q1,g1,q2,g2`. JSON lines
//! carry one object per quad with `k1..k4` as `[m, n]` arrays plus
//! `q1, g1, q2, g2`. Writers emit records in the order given; the solver
//! always hands them over sorted.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::WaveVector;
use crate::quad::ResonantQuad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutputFormat {
    Csv,
    #[default]
    Jsonl,
}

impl OutputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(OutputFormat::Csv),
            "jsonl" | "ndjson" | "json" => Some(OutputFormat::Jsonl),
            _ => None,
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    m1: i32,
    n1: i32,
    m2: i32,
    n2: i32,
    m3: i32,
    n3: i32,
    m4: i32,
    n4: i32,
    q1: u64,
    g1: u64,
    q2: u64,
    g2: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRow {
    k1: [i32; 2],
    k2: [i32; 2],
    k3: [i32; 2],
    k4: [i32; 2],
    q1: u64,
    g1: u64,
    q2: u64,
    g2: u64,
}

impl From<&ResonantQuad> for CsvRow {
    fn from(s: &ResonantQuad) -> Self {
        CsvRow {
            m1: s.k1.m,
            n1: s.k1.n,
            m2: s.k2.m,
            n2: s.k2.n,
            m3: s.k3.m,
            n3: s.k3.n,
            m4: s.k4.m,
            n4: s.k4.n,
            q1: s.q1,
            g1: s.g1,
            q2: s.q2,
            g2: s.g2,
        }
    }
}

impl From<CsvRow> for ResonantQuad {
    fn from(r: CsvRow) -> Self {
        ResonantQuad {
            k1: WaveVector::new(r.m1, r.n1),
            k2: WaveVector::new(r.m2, r.n2),
            k3: WaveVector::new(r.m3, r.n3),
            k4: WaveVector::new(r.m4, r.n4),
            q1: r.q1,
            g1: r.g1,
            q2: r.q2,
            g2: r.g2,
        }
    }
}

impl From<&ResonantQuad> for JsonRow {
    fn from(s: &ResonantQuad) -> Self {
        let pair = |k: WaveVector| [k.m, k.n];
        JsonRow {
            k1: pair(s.k1),
            k2: pair(s.k2),
            k3: pair(s.k3),
            k4: pair(s.k4),
            q1: s.q1,
            g1: s.g1,
            q2: s.q2,
            g2: s.g2,
        }
    }
}

impl From<JsonRow> for ResonantQuad {
    fn from(r: JsonRow) -> Self {
        let vec = |[m, n]: [i32; 2]| WaveVector::new(m, n);
        ResonantQuad {
            k1: vec(r.k1),
            k2: vec(r.k2),
            k3: vec(r.k3),
            k4: vec(r.k4),
            q1: r.q1,
            g1: r.g1,
            q2: r.q2,
            g2: r.g2,
        }
    }
}

const CSV_HEADER: &[u8; 36] = b"m1,n1,m2,n2,m3,n3,m4,n4,q1,g1,q2,g2\n";

/// Incremental writer. The CSV header is written on creation, so an empty
/// run still yields a well-formed file. Records are formatted by hand into a
/// chunk buffer; the bytes match what the serde row types produce.
pub struct SolutionWriter<W: Write> {
    w: W,
    format: OutputFormat,
    chunk: Box<[u8; CHUNK]>,
    len: usize,
}

const CHUNK: usize = 1 << 16;
/// Bound on one formatted record.
const MAX_LINE: usize = 256;

impl<W: Write> SolutionWriter<W> {
    pub fn new(w: W, format: OutputFormat) -> std::io::Result<Self> {
        let mut out = Self {
            w,
            format,
            chunk: Box::new([0; CHUNK]),
            len: 0,
        };
        if format == OutputFormat::Csv {
            out.lit(CSV_HEADER);
        }
        Ok(out)
    }

    pub fn write(&mut self, s: &ResonantQuad) -> std::io::Result<()> {
        if self.len + MAX_LINE > CHUNK {
            self.drain()?;
        }
        match self.format {
            OutputFormat::Csv => {
                for k in s.vectors() {
                    self.int(k.m);
                    self.lit(b",");
                    self.int(k.n);
                    self.lit(b",");
                }
                self.uint(s.q1);
                self.lit(b",");
                self.uint(s.g1);
                self.lit(b",");
                self.uint(s.q2);
                self.lit(b",");
                self.uint(s.g2);
                self.lit(b"\n");
            }
            OutputFormat::Jsonl => {
                self.lit(b"{\"k1\":");
                self.pair(s.k1);
                self.lit(b",\"k2\":");
                self.pair(s.k2);
                self.lit(b",\"k3\":");
                self.pair(s.k3);
                self.lit(b",\"k4\":");
                self.pair(s.k4);
                self.lit(b",\"q1\":");
                self.uint(s.q1);
                self.lit(b",\"g1\":");
                self.uint(s.g1);
                self.lit(b",\"q2\":");
                self.uint(s.q2);
                self.lit(b",\"g2\":");
                self.uint(s.g2);
                self.lit(b"}\n");
            }
        }
        Ok(())
    }

    pub fn write_all(&mut self, solutions: &[ResonantQuad]) -> std::io::Result<()> {
        solutions.iter().try_for_each(|s| self.write(s))
    }

    /// Flushes and returns the underlying writer.
    pub fn finish(mut self) -> std::io::Result<W> {
        self.drain()?;
        self.w.flush()?;
        Ok(self.w)
    }

    fn drain(&mut self) -> std::io::Result<()> {
        self.w.write_all(&self.chunk[..self.len])?;
        self.len = 0;
        Ok(())
    }

    #[inline(always)]
    fn lit<const N: usize>(&mut self, s: &[u8; N]) {
        self.chunk[self.len..self.len + N].copy_from_slice(s);
        self.len += N;
    }

    #[inline(always)]
    fn pair(&mut self, k: WaveVector) {
        self.lit(b"[");
        self.int(k.m);
        self.lit(b",");
        self.int(k.n);
        self.lit(b"]");
    }

    #[inline(always)]
    fn uint(&mut self, x: u64) {
        if x < 10_000 {
            self.small(x as usize);
        } else {
            self.wide(x);
        }
    }

    #[inline(always)]
    fn small(&mut self, x: usize) {
        let at = self.len;
        let buf: &mut [u8; 4] = (&mut self.chunk[at..at + 4]).try_into().unwrap();
        let (hi, lo) = (x / 100 * 2, x % 100 * 2);
        let digits = u32::from_le_bytes([
            DIGIT_PAIRS[hi],
            DIGIT_PAIRS[hi + 1],
            DIGIT_PAIRS[lo],
            DIGIT_PAIRS[lo + 1],
        ]);
        let skip = (x < 1000) as usize + (x < 100) as usize + (x < 10) as usize;
        *buf = (digits >> (8 * skip)).to_le_bytes();
        self.len = at + 4 - skip;
    }

    #[inline(never)]
    fn wide(&mut self, mut x: u64) {
        let digits = x.checked_ilog10().unwrap_or(0) as usize + 1;
        let mut end = self.len + digits;
        self.len = end;
        let buf = &mut self.chunk[..];
        while x >= 100 {
            let r = (x % 100) as usize * 2;
            x /= 100;
            buf[end - 2] = DIGIT_PAIRS[r];
            buf[end - 1] = DIGIT_PAIRS[r + 1];
            end -= 2;
        }
        if x >= 10 {
            let r = x as usize * 2;
            buf[end - 2] = DIGIT_PAIRS[r];
            buf[end - 1] = DIGIT_PAIRS[r + 1];
        } else {
            buf[end - 1] = b'0' + x as u8;
        }
    }

    #[inline(always)]
    fn int(&mut self, x: i32) {
        if x < 0 {
            self.lit(b"-");
        }
        self.uint(x.unsigned_abs() as u64);
    }
}

const DIGIT_PAIRS: &[u8; 200] = b"\
0001020304050607080910111213141516171819\
2021222324252627282930313233343536373839\
4041424344454647484950515253545556575859\
6061626364656667686970717273747576777879\
8081828384858687888990919293949596979899";

pub fn write_solutions<W: Write>(
    w: &mut W,
    solutions: &[ResonantQuad],
    format: OutputFormat,
) -> std::io::Result<()> {
    let mut out = SolutionWriter::new(w, format)?;
    out.write_all(solutions)?;
    out.finish()?.flush()
}

/// Parses a solution file and checks every record against the quad
/// invariants.
pub fn read_solutions<R: BufRead>(r: R, format: OutputFormat) -> Result<Vec<ResonantQuad>> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
                let line = i + 2;
                let row = row.map_err(|e| Error::Parse {
                    line,
                    reason: e.to_string(),
                })?;
                out.push(checked(row.into(), line)?);
            }
        }
        OutputFormat::Jsonl => {
            for (i, line) in r.lines().enumerate() {
                let line_no = i + 1;
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let row: JsonRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: line_no,
                    reason: e.to_string(),
                })?;
                out.push(checked(row.into(), line_no)?);
            }
        }
    }
    Ok(out)
}

fn checked(quad: ResonantQuad, line: usize) -> Result<ResonantQuad> {
    quad.validate().map_err(|e| Error::Parse {
        line,
        reason: e.to_string(),
    })?;
    Ok(quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{canonicalize, Symmetry};

    fn sample() -> Vec<ResonantQuad> {
        let v = WaveVector::new;
        vec![
            canonicalize([v(5, 5), v(1, -5), v(5, -5), v(1, 5)], Symmetry::Canonical).unwrap(),
            canonicalize(
                [v(5, 5), v(1, -5), v(5, -5), v(1, 5)],
                Symmetry::SignExpanded,
            )
            .unwrap(),
        ]
    }

    #[test]
    fn csv_header_and_round_trip() {
        let mut buf = Vec::new();
        write_solutions(&mut buf, &sample(), OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "m1,n1,m2,n2,m3,n3,m4,n4,q1,g1,q2,g2"
        );
        assert_eq!(
            read_solutions(&buf[..], OutputFormat::Csv).unwrap(),
            sample()
        );

        let mut empty = Vec::new();
        write_solutions(&mut empty, &[], OutputFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(empty).unwrap(),
            "m1,n1,m2,n2,m3,n3,m4,n4,q1,g1,q2,g2\n"
        );
    }

    #[test]
    fn jsonl_shape_and_round_trip() {
        let mut buf = Vec::new();
        write_solutions(&mut buf, &sample(), OutputFormat::Jsonl).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["k1"].as_array().unwrap().len(), 2);
        assert_eq!(first["q1"], 26);
        assert_eq!(first["q2"], 50);
        assert_eq!(
            read_solutions(&buf[..], OutputFormat::Jsonl).unwrap(),
            sample()
        );
    }

    #[test]
    fn hand_formatting_matches_serde() {
        let mut rows = sample();
        rows.push(ResonantQuad {
            k1: WaveVector::new(-1000, 0),
            k2: WaveVector::new(i32::MIN, i32::MAX),
            k3: WaveVector::new(7, -7),
            k4: WaveVector::new(0, 1),
            q1: u64::MAX,
            g1: 0,
            q2: 12,
            g2: 3,
        });
        let mut csv_bytes = Vec::new();
        write_solutions(&mut csv_bytes, &rows, OutputFormat::Csv).unwrap();
        let mut expected = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut expected);
            for r in &rows {
                w.serialize(CsvRow::from(r)).unwrap();
            }
        }
        assert_eq!(
            String::from_utf8(csv_bytes).unwrap(),
            String::from_utf8(expected).unwrap()
        );

        let mut json_bytes = Vec::new();
        write_solutions(&mut json_bytes, &rows, OutputFormat::Jsonl).unwrap();
        let mut expected = String::new();
        for r in &rows {
            expected.push_str(&serde_json::to_string(&JsonRow::from(r)).unwrap());
            expected.push('\n');
        }
        assert_eq!(String::from_utf8(json_bytes).unwrap(), expected);
    }

    #[test]
    fn integers_format_like_display() {
        let mut w = SolutionWriter::new(Vec::new(), OutputFormat::Jsonl).unwrap();
        let mut expected = String::new();
        let values = (0..=20_000u64).chain([99_999, 100_000, u32::MAX as u64, u64::MAX]);
        for x in values {
            if w.len + MAX_LINE > CHUNK {
                w.drain().unwrap();
            }
            w.uint(x);
            w.lit(b" ");
            expected.push_str(&format!("{x} "));
        }
        for x in [-1i32, -9, -10, -9999, -10_000, i32::MIN, i32::MAX] {
            w.int(x);
            w.lit(b" ");
            expected.push_str(&format!("{x} "));
        }
        assert_eq!(String::from_utf8(w.finish().unwrap()).unwrap(), expected);
    }

    #[test]
    fn long_output_spans_chunks() {
        let rows: Vec<ResonantQuad> = sample().into_iter().cycle().take(10_000).collect();
        for format in [OutputFormat::Csv, OutputFormat::Jsonl] {
            let mut buf = Vec::new();
            write_solutions(&mut buf, &rows, format).unwrap();
            assert!(buf.len() > 2 * CHUNK);
            assert_eq!(read_solutions(&buf[..], format).unwrap(), rows);
        }
    }

    #[test]
    fn rejects_invalid_records() {
        let bad = "m1,n1,m2,n2,m3,n3,m4,n4,q1,g1,q2,g2\n5,5,1,5,5,-5,1,6,50,1,26,1\n";
        assert!(matches!(
            read_solutions(bad.as_bytes(), OutputFormat::Csv),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = "{\"k1\":[1,2]}\n";
        assert!(matches!(
            read_solutions(bad.as_bytes(), OutputFormat::Jsonl),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn format_from_path() {
        assert_eq!(
            OutputFormat::from_path(Path::new("a.csv")),
            Some(OutputFormat::Csv)
        );
        assert_eq!(
            OutputFormat::from_path(Path::new("a.jsonl")),
            Some(OutputFormat::Jsonl)
        );
        assert_eq!(OutputFormat::from_path(Path::new("a.txt")), None);
    }
}
