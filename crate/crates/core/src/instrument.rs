//! Analytic flop accounting and per-iteration traces.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::ProblemKind;

/// How screening is applied during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    None,
    Static,
    Dynamic,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::None, Strategy::Static, Strategy::Dynamic];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Static => "static",
            Strategy::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "plain" => Ok(Strategy::None),
            "static" => Ok(Strategy::Static),
            "dynamic" => Ok(Strategy::Dynamic),
            _ => Err(Error::InvalidArgument(format!("unknown strategy '{s}'"))),
        }
    }
}

/// Estimated flops of one iteration.
///
/// `kept` is the number of active atoms (ignored for `None`, where the
/// full `k` is used), `sparsity` is `‖x_t‖₀` and `group_count` is `|G|`
/// (ignored for the Lasso).
pub fn flops_iteration(
    kind: ProblemKind,
    strategy: Strategy,
    k: usize,
    n: usize,
    kept: usize,
    sparsity: usize,
    group_count: usize,
) -> u64 {
    let (k, n, kept, s) = (k as u64, n as u64, kept as u64, sparsity as u64);
    let g = match kind {
        ProblemKind::Lasso => 0,
        ProblemKind::GroupLasso => group_count as u64,
    };
    match (kind, strategy) {
        (_, Strategy::None) => (k + s) * n + 4 * k + n + 3 * g,
        (_, Strategy::Static) => (kept + s) * n + 4 * kept + n + 3 * g,
        (ProblemKind::Lasso, Strategy::Dynamic) => (kept + s) * n + 6 * kept + 5 * n,
        (ProblemKind::GroupLasso, Strategy::Dynamic) => (kept + s) * n + 7 * kept + 5 * n + 5 * g,
    }
}

/// Cost of the one-off correlation pass of static screening.
pub fn flops_static_init(k: usize, n: usize) -> u64 {
    k as u64 * n as u64
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub kept: usize,
    pub sparsity: usize,
    pub objective: f64,
    pub flops_cum: u64,
    pub seconds: f64,
}

/// Per-iteration record of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveTrace {
    pub kind: ProblemKind,
    pub strategy: Strategy,
    pub n_atoms: usize,
    pub dim: usize,
    pub group_count: usize,
    pub init_flops: u64,
    pub total_seconds: f64,
    pub records: Vec<TraceRecord>,
}

impl SolveTrace {
    pub fn new(kind: ProblemKind, strategy: Strategy, n_atoms: usize, dim: usize, group_count: usize) -> Self {
        let init_flops = match strategy {
            Strategy::Static => flops_static_init(n_atoms, dim),
            _ => 0,
        };
        SolveTrace {
            kind,
            strategy,
            n_atoms,
            dim,
            group_count,
            init_flops,
            total_seconds: 0.0,
            records: Vec::new(),
        }
    }

    pub fn iteration_flops(&self, kept: usize, sparsity: usize) -> u64 {
        flops_iteration(
            self.kind,
            self.strategy,
            self.n_atoms,
            self.dim,
            kept,
            sparsity,
            self.group_count,
        )
    }

    /// Appends iteration `t` and returns its cumulative flop count.
    pub fn push(&mut self, t: usize, kept: usize, sparsity: usize, objective: f64, seconds: f64) -> u64 {
        let flops_cum = self.total_flops() + self.iteration_flops(kept, sparsity);
        self.records.push(TraceRecord {
            t,
            kept,
            sparsity,
            objective,
            flops_cum,
            seconds,
        });
        flops_cum
    }

    pub fn total_flops(&self) -> u64 {
        self.records.last().map_or(self.init_flops, |r| r.flops_cum)
    }

    /// Cumulative flops recomputed from the `kept` and `sparsity` columns.
    pub fn recompute_flops(&self) -> Vec<u64> {
        let mut acc = self.init_flops;
        self.records
            .iter()
            .map(|r| {
                acc += self.iteration_flops(r.kept, r.sparsity);
                acc
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        let mut w = w;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["t", "kept", "sparsity", "objective", "flops_cum", "seconds"])?;
        for r in &self.records {
            cw.write_record(&[
                r.t.to_string(),
                r.kept.to_string(),
                r.sparsity.to_string(),
                format!("{:e}", r.objective),
                r.flops_cum.to_string(),
                format!("{:e}", r.seconds),
            ])?;
        }
        cw.flush()?;
        Ok(())
    }
}

/// Reads the rows of a trace CSV (comment lines starting with `#` are skipped).
pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let headers = rdr.headers()?.clone();
    let expected = ["t", "kept", "sparsity", "objective", "flops_cum", "seconds"];
    if headers.iter().ne(expected) {
        return Err(Error::Format(format!("unexpected trace header {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let bad = |i: usize| Error::Format(format!("bad trace field '{}'", field(i)));
        out.push(TraceRecord {
            t: field(0).parse().map_err(|_| bad(0))?,
            kept: field(1).parse().map_err(|_| bad(1))?,
            sparsity: field(2).parse().map_err(|_| bad(2))?,
            objective: field(3).parse().map_err(|_| bad(3))?,
            flops_cum: field(4).parse().map_err(|_| bad(4))?,
            seconds: field(5).parse().map_err(|_| bad(5))?,
        });
    }
    Ok(out)
}

/// `(flops_S/flops_N, flops_D/flops_N, t_S/t_N, t_D/t_N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedMetrics {
    pub flops_static: f64,
    pub flops_dynamic: f64,
    pub time_static: f64,
    pub time_dynamic: f64,
}

pub fn normalized_metrics(
    none: &SolveTrace,
    stat: &SolveTrace,
    dynamic: &SolveTrace,
) -> Result<NormalizedMetrics> {
    for t in [stat, dynamic] {
        if t.kind != none.kind
            || t.n_atoms != none.n_atoms
            || t.dim != none.dim
            || t.group_count != none.group_count
        {
            return Err(Error::Incompatible("traces come from different instances".into()));
        }
    }
    let base_flops = none.total_flops() as f64;
    if base_flops == 0.0 || none.total_seconds <= 0.0 {
        return Err(Error::InvalidArgument("baseline trace is empty".into()));
    }
    Ok(NormalizedMetrics {
        flops_static: stat.total_flops() as f64 / base_flops,
        flops_dynamic: dynamic.total_flops() as f64 / base_flops,
        time_static: stat.total_seconds / none.total_seconds,
        time_dynamic: dynamic.total_seconds / none.total_seconds,
    })
}
