//! λ-sweep benchmarks and their aggregation.
//!
//! A [`BenchPlan`] runs every (seed, algorithm, λ ratio) cell without
//! screening and with each requested strategy/test pair on the same data.
//! [`aggregate`] then normalizes each screened run by its matching
//! unscreened run and summarizes the ratios by median and quartiles.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::datagen::{generate, GenSpec};
use crate::error::{Error, Result};
use crate::instrument::Strategy;
use crate::parallel;
use crate::problem::{Problem, ProblemKind};
use crate::screening::TestKind;
use crate::solvers::{run, Algorithm, SolverConfig};

pub const BENCH_HEADER: [&str; 10] = [
    "seed",
    "algo",
    "strategy",
    "test",
    "lambda_ratio",
    "iters",
    "flops",
    "time_s",
    "final_obj",
    "screened_frac",
];

pub const REPORT_HEADER: [&str; 12] = [
    "algo",
    "strategy",
    "test",
    "lambda_ratio",
    "count",
    "flops_median",
    "flops_p25",
    "flops_p75",
    "time_median",
    "time_p25",
    "time_p75",
    "screened_median",
];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchPlan {
    pub kind: ProblemKind,
    /// Data generator; its seed is replaced by each entry of `seeds`.
    pub gen: GenSpec,
    pub lambda_ratios: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub strategies: Vec<Strategy>,
    pub tests: Vec<TestKind>,
    pub repeats: usize,
    pub seeds: Vec<u64>,
    /// Stopping rule and algorithm constants shared by all runs.
    pub solver: SolverConfig,
    /// Run cells concurrently. Off by default so timings are uncontended.
    pub parallel: bool,
}

impl BenchPlan {
    pub fn new(kind: ProblemKind, gen: GenSpec) -> Self {
        let tests = match kind {
            ProblemKind::Lasso => vec![TestKind::Dst3],
            ProblemKind::GroupLasso => vec![TestKind::GroupSt3],
        };
        BenchPlan {
            kind,
            gen,
            lambda_ratios: (1..10).map(|i| i as f64 / 10.0).collect(),
            algorithms: vec![Algorithm::Fista],
            strategies: Strategy::ALL.to_vec(),
            tests,
            repeats: 1,
            seeds: vec![0],
            solver: SolverConfig::default(),
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.repeats == 0 {
            return bad("repeats must be >= 1".into());
        }
        if self.lambda_ratios.is_empty() || self.algorithms.is_empty() || self.seeds.is_empty() {
            return bad("plan needs at least one ratio, algorithm and seed".into());
        }
        if self.strategies.is_empty() {
            return bad("plan needs at least one strategy".into());
        }
        if self
            .lambda_ratios
            .iter()
            .any(|&r| !(r > 0.0 && r <= 1.0))
        {
            return bad("lambda ratios must lie in (0, 1]".into());
        }
        if self.lambda_ratios.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambda ratios must be strictly ascending".into());
        }
        let screened = self.strategies.iter().any(|&s| s != Strategy::None);
        if screened && self.tests.is_empty() {
            return bad("screened strategies need at least one test".into());
        }
        if let Some(t) = self.tests.iter().find(|t| t.problem_kind() != self.kind) {
            return bad(format!("test '{t}' does not apply to {}", self.kind.as_str()));
        }
        if self.kind == ProblemKind::GroupLasso && self.gen.group_size == 0 {
            return bad("group-lasso plans need a group size".into());
        }
        self.solver.validate()?;
        self.gen.validate()
    }

    /// Configuration line embedded in output files.
    pub fn describe(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        format!(
            "kind={} {} ratios={} algos={} strategies={} tests={} repeats={} seeds={} max_iters={} rel_tol={}",
            self.kind.as_str(),
            self.gen.describe(),
            join(self.lambda_ratios.iter().map(|r| r.to_string()).collect()),
            join(self.algorithms.iter().map(|a| a.to_string()).collect()),
            join(self.strategies.iter().map(|s| s.to_string()).collect()),
            join(self.tests.iter().map(|t| t.to_string()).collect()),
            self.repeats,
            join(self.seeds.iter().map(|s| s.to_string()).collect()),
            self.solver.max_iters,
            self.solver.rel_tol,
        )
    }

    /// The desk-scale preset: Pnoise N=200, K=1000, 30 seeds, ratios
    /// 0.1..0.9, FISTA with DST3.
    pub fn paper_desk() -> Self {
        let gen = GenSpec::new(crate::datagen::DictionaryKind::Pnoise, 200, 1000, 0);
        BenchPlan {
            seeds: (0..30).collect(),
            ..BenchPlan::new(ProblemKind::Lasso, gen)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub algo: Algorithm,
    pub strategy: Strategy,
    /// `None` for unscreened runs.
    pub test: Option<TestKind>,
    pub lambda_ratio: f64,
    pub iters: usize,
    pub flops: u64,
    pub time_s: f64,
    pub final_obj: f64,
    pub screened_frac: f64,
}

#[derive(Clone, Copy, Debug)]
struct Job {
    inst: usize,
    ratio: f64,
    algo: Algorithm,
    strategy: Strategy,
    test: Option<TestKind>,
}

fn build_problem(plan: &BenchPlan, seed: u64) -> Result<Problem> {
    let inst = generate(&plan.gen.clone().with_seed(seed))?;
    let dict = Arc::new(inst.dict);
    let y = inst.observation.y;
    match plan.kind {
        ProblemKind::Lasso => Problem::lasso(dict, y, 1.0),
        ProblemKind::GroupLasso => {
            let part = inst
                .partition
                .ok_or_else(|| Error::InvalidArgument("missing partition".into()))?;
            Problem::group_lasso(dict, Arc::new(part), y, 1.0)
        }
    }
}

/// Runs every cell of the plan. Rows come out ordered by seed, algorithm,
/// ratio, strategy, test and repeat.
pub fn run_plan(plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let problems = parallel::try_map(&plan.seeds, plan.parallel, |&s| {
        let p = build_problem(plan, s)?;
        let ls = p.extreme_dual().lambda_star;
        Ok((p, ls))
    })?;

    let mut jobs = Vec::new();
    for inst in 0..plan.seeds.len() {
        for &algo in &plan.algorithms {
            for &ratio in &plan.lambda_ratios {
                for &strategy in &plan.strategies {
                    let tests: Vec<Option<TestKind>> = match strategy {
                        Strategy::None => vec![None],
                        _ => plan.tests.iter().map(|&t| Some(t)).collect(),
                    };
                    for test in tests {
                        for _ in 0..plan.repeats {
                            jobs.push(Job {
                                inst,
                                ratio,
                                algo,
                                strategy,
                                test,
                            });
                        }
                    }
                }
            }
        }
    }

    parallel::try_map(&jobs, plan.parallel, |job| {
        let (base, lambda_star) = &problems[job.inst];
        let p = base.with_lambda(job.ratio * lambda_star)?;
        let mut cfg = plan.solver.clone();
        cfg.algorithm = job.algo;
        cfg.strategy = job.strategy;
        if let Some(t) = job.test {
            cfg.test_kind = t;
        }
        let seed = plan.seeds[job.inst];
        let r = run(&p, &cfg).map_err(|e| {
            Error::Numerical(format!(
                "seed {seed} {} {} ratio {}: {e}",
                job.algo, job.strategy, job.ratio
            ))
        })?;
        Ok(BenchRow {
            seed,
            algo: job.algo,
            strategy: job.strategy,
            test: job.test,
            lambda_ratio: job.ratio,
            iters: r.iterations,
            flops: r.trace.total_flops(),
            time_s: r.trace.total_seconds,
            final_obj: r.final_objective,
            screened_frac: r.eliminated.len() as f64 / p.n_atoms() as f64,
        })
    })
}

fn test_name(t: Option<TestKind>) -> &'static str {
    t.map_or("none", |t| t.as_str())
}

fn write_comment<W: Write>(w: &mut W, comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

pub fn write_bench_csv<W: Write>(mut w: W, rows: &[BenchRow], comment: Option<&str>) -> Result<()> {
    write_comment(&mut w, comment)?;
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(BENCH_HEADER)?;
    for r in rows {
        cw.write_record(&[
            r.seed.to_string(),
            r.algo.to_string(),
            r.strategy.to_string(),
            test_name(r.test).to_string(),
            r.lambda_ratio.to_string(),
            r.iters.to_string(),
            r.flops.to_string(),
            format!("{:e}", r.time_s),
            format!("{:e}", r.final_obj),
            r.screened_frac.to_string(),
        ])?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: Read>(r: R) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    if rdr.headers()?.iter().ne(BENCH_HEADER) {
        return Err(Error::Format("unexpected bench CSV header".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let bad = |i: usize| {
            Error::Format(format!(
                "row {}: bad {} '{}'",
                line + 1,
                BENCH_HEADER[i],
                field(i)
            ))
        };
        let test = match field(3) {
            "none" => None,
            s => Some(s.parse().map_err(|_| bad(3))?),
        };
        out.push(BenchRow {
            seed: field(0).parse().map_err(|_| bad(0))?,
            algo: field(1).parse().map_err(|_| bad(1))?,
            strategy: field(2).parse().map_err(|_| bad(2))?,
            test,
            lambda_ratio: field(4).parse().map_err(|_| bad(4))?,
            iters: field(5).parse().map_err(|_| bad(5))?,
            flops: field(6).parse().map_err(|_| bad(6))?,
            time_s: field(7).parse().map_err(|_| bad(7))?,
            final_obj: field(8).parse().map_err(|_| bad(8))?,
            screened_frac: field(9).parse().map_err(|_| bad(9))?,
        });
    }
    Ok(out)
}

/// Percentile `q ∈ [0, 1]` of sorted data with linear interpolation
/// between closest ranks.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Summary {
            median: percentile(&v, 0.5),
            p25: percentile(&v, 0.25),
            p75: percentile(&v, 0.75),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub algo: Algorithm,
    pub strategy: Strategy,
    pub test: Option<TestKind>,
    pub lambda_ratio: f64,
    pub count: usize,
    pub flops: Summary,
    pub time: Summary,
    pub screened_median: f64,
}

type CellKey = (Algorithm, Strategy, Option<TestKind>, u64);

fn ratio_key(r: f64) -> u64 {
    r.to_bits()
}

/// Normalizes screened runs by their matching unscreened run (same seed,
/// algorithm and ratio; repeats paired in order) and summarizes per
/// (algorithm, strategy, test, ratio).
pub fn aggregate(rows: &[BenchRow]) -> Result<Vec<ReportRow>> {
    let mut baseline: HashMap<(u64, Algorithm, u64), Vec<&BenchRow>> = HashMap::new();
    for r in rows.iter().filter(|r| r.strategy == Strategy::None) {
        baseline
            .entry((r.seed, r.algo, ratio_key(r.lambda_ratio)))
            .or_default()
            .push(r);
    }
    let mut seen: HashMap<(u64, CellKey), usize> = HashMap::new();
    let mut cells: Vec<(CellKey, f64, Vec<(f64, f64, f64)>)> = Vec::new();
    let mut index: HashMap<CellKey, usize> = HashMap::new();
    for r in rows {
        let key = (r.algo, r.strategy, r.test, ratio_key(r.lambda_ratio));
        let rep = seen.entry((r.seed, key)).or_insert(0);
        let base = baseline
            .get(&(r.seed, r.algo, ratio_key(r.lambda_ratio)))
            .and_then(|b| b.get(*rep).or_else(|| b.first()))
            .ok_or_else(|| {
                Error::Format(format!(
                    "no unscreened run for seed {} {} ratio {}",
                    r.seed, r.algo, r.lambda_ratio
                ))
            })?;
        *rep += 1;
        if base.flops == 0 || !(base.time_s > 0.0) {
            return Err(Error::Format(format!(
                "unscreened run for seed {} ratio {} has no cost",
                r.seed, r.lambda_ratio
            )));
        }
        let slot = *index.entry(key).or_insert_with(|| {
            cells.push((key, r.lambda_ratio, Vec::new()));
            cells.len() - 1
        });
        cells[slot].2.push((
            r.flops as f64 / base.flops as f64,
            r.time_s / base.time_s,
            r.screened_frac,
        ));
    }
    let mut out: Vec<ReportRow> = cells
        .into_iter()
        .map(|((algo, strategy, test, _), ratio, v)| {
            let f: Vec<f64> = v.iter().map(|x| x.0).collect();
            let t: Vec<f64> = v.iter().map(|x| x.1).collect();
            let s: Vec<f64> = v.iter().map(|x| x.2).collect();
            ReportRow {
                algo,
                strategy,
                test,
                lambda_ratio: ratio,
                count: v.len(),
                flops: Summary::of(&f),
                time: Summary::of(&t),
                screened_median: Summary::of(&s).median,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.algo, a.strategy, a.test)
            .cmp(&(b.algo, b.strategy, b.test))
            .then(a.lambda_ratio.total_cmp(&b.lambda_ratio))
    });
    Ok(out)
}

pub fn write_report_csv<W: Write>(mut w: W, rows: &[ReportRow], comment: Option<&str>) -> Result<()> {
    write_comment(&mut w, comment)?;
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(REPORT_HEADER)?;
    for r in rows {
        let mut rec = vec![
            r.algo.to_string(),
            r.strategy.to_string(),
            test_name(r.test).to_string(),
            r.lambda_ratio.to_string(),
            r.count.to_string(),
        ];
        for s in [r.flops, r.time] {
            rec.extend([s.median, s.p25, s.p75].iter().map(|v| format!("{v:.6}")));
        }
        rec.push(format!("{:.6}", r.screened_median));
        cw.write_record(&rec)?;
    }
    cw.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Flops,
    Time,
}

/// Line chart of the median normalized metric against `λ/λ*`, one line
/// per (algorithm, strategy, test), with the quartile band shaded.
pub fn render_svg(rows: &[ReportRow], metric: Metric, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 60.0;
    const MR: f64 = 170.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;
    const COLORS: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    ];
    let pick = |r: &ReportRow| match metric {
        Metric::Flops => r.flops,
        Metric::Time => r.time,
    };
    let y_max = rows
        .iter()
        .map(|r| pick(r).p75)
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max)
        * 1.05;
    let sx = |x: f64| ML + x * (W - ML - MR);
    let sy = |y: f64| H - MB - (y / y_max) * (H - MT - MB);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (W - MR + ML) / 2.0, escape(title));
    // axes and ticks
    let _ = writeln!(
        s,
        r#"<path d="M{ML},{MT} V{} H{}" fill="none" stroke="black"/>"#,
        H - MB,
        W - MR
    );
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.1}</text>"#,
            sx(x),
            H - MB + 16.0
        );
    }
    for i in 0..=5 {
        let y = y_max * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{:.1}" text-anchor="end">{y:.2}</text><path d="M{ML},{:.1} H{}" stroke="#ddd"/>"##,
            ML - 6.0,
            sy(y) + 4.0,
            sy(y),
            W - MR
        );
    }
    let ylabel = match metric {
        Metric::Flops => "normalized flops",
        Metric::Time => "normalized time",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">λ/λ*</text><text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        (W - MR + ML) / 2.0,
        H - 12.0,
        H / 2.0,
        H / 2.0
    );

    let mut series: Vec<(Algorithm, Strategy, Option<TestKind>)> =
        rows.iter().map(|r| (r.algo, r.strategy, r.test)).collect();
    series.dedup();
    for (i, key) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<&ReportRow> = rows
            .iter()
            .filter(|r| (r.algo, r.strategy, r.test) == *key)
            .collect();
        let band: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.1},{:.1}", sx(r.lambda_ratio), sy(pick(r).p75)))
            .chain(
                pts.iter()
                    .rev()
                    .map(|r| format!("{:.1},{:.1}", sx(r.lambda_ratio), sy(pick(r).p25))),
            )
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.1},{:.1}", sx(r.lambda_ratio), sy(pick(r).median)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = MT + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<path d="M{},{ly} h20" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{} {} {}</text>"#,
            W - MR + 10.0,
            W - MR + 34.0,
            ly + 4.0,
            key.0,
            key.1,
            test_name(key.2)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
