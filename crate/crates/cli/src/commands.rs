use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use screenlab::bench::{self, aggregate, read_bench_csv, render_svg, run_plan, BenchPlan, Metric};
use screenlab::datagen::{generate, GenSpec};
use screenlab::io::{read_matrix, read_partition, write_groups, write_matrix, Matrix};
use screenlab::linalg::norm;
use screenlab::{run, Dictionary, Problem, ProblemKind, SolverConfig, TestKind};

use crate::{BenchArgs, GenArgs, MetricArg, Preset, ReportArgs, SolveArgs};

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Opens `path`, or stdout when absent.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn gen(a: GenArgs) -> Result<()> {
    let spec = GenSpec {
        observation: a.obs,
        bernoulli_p: a.bernoulli_p,
        snr_db: a.snr_db,
        group_size: a.group_size,
        ..GenSpec::new(a.kind, a.n, a.k, a.seed)
    };
    let inst = generate(&spec).context("generating instance")?;
    let obs_path = sibling(&a.out, ".y.dsmx");
    let manifest_path = sibling(&a.out, ".manifest");
    write_matrix(&a.out, &Matrix::from_dictionary(&inst.dict))
        .with_context(|| format!("writing {}", a.out.display()))?;
    write_matrix(&obs_path, &Matrix::column_vector(&inst.observation.y))
        .with_context(|| format!("writing {}", obs_path.display()))?;

    let mut manifest = format!(
        "# screenlab gen\n{}\ndictionary_file={}\nobservation_file={}\n",
        spec.describe(),
        a.out.display(),
        obs_path.display()
    );
    if let Some(part) = &inst.partition {
        let groups_path = sibling(&a.out, ".groups");
        let mut w = BufWriter::new(File::create(&groups_path)?);
        write_groups(&mut w, part)?;
        w.flush()?;
        manifest.push_str(&format!("groups_file={}\n", groups_path.display()));
    }
    fs::write(&manifest_path, manifest)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    println!(
        "wrote {} ({}x{}) and {}",
        a.out.display(),
        inst.dict.rows(),
        inst.dict.cols(),
        obs_path.display()
    );
    Ok(())
}

fn load_problem(a: &SolveArgs) -> Result<Problem> {
    let m = read_matrix(&a.dict).with_context(|| format!("reading {}", a.dict.display()))?;
    let mut dict = m.to_dictionary(false)?;
    if a.normalize {
        dict.normalize_columns()?;
    }
    let dict = Dictionary::from_col_major(dict.rows(), dict.cols(), dict.col_major().to_vec(), true)
        .context("atoms must have unit norm (pass --normalize to rescale them)")?;
    let mut y = read_matrix(&a.obs)
        .with_context(|| format!("reading {}", a.obs.display()))?
        .into_vector()?;
    if a.normalize {
        let n = norm(&y);
        if n == 0.0 {
            bail!("observation is zero");
        }
        y.iter_mut().for_each(|v| *v /= n);
    }
    let dict = Arc::new(dict);
    let p = match &a.groups {
        Some(g) => {
            let part = read_partition(g, &dict).with_context(|| format!("reading {}", g.display()))?;
            Problem::group_lasso(dict, Arc::new(part), y, 1.0)
        }
        None => Problem::lasso(dict, y, 1.0),
    }
    .context("observation must have unit norm (pass --normalize to rescale it)")?;
    let lambda = match (a.lambda, a.lambda_ratio) {
        (Some(l), _) => l,
        (None, Some(r)) => r * p.extreme_dual().lambda_star,
        (None, None) => bail!("give --lambda or --lambda-ratio"),
    };
    Ok(p.with_lambda(lambda)?)
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let p = load_problem(&a)?;
    let test = a.test.unwrap_or(match p.kind() {
        ProblemKind::Lasso => TestKind::Dst3,
        ProblemKind::GroupLasso => TestKind::GroupSt3,
    });
    let cfg = SolverConfig {
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        gap_tol: a.gap_tol,
        ..SolverConfig::new(a.algo, a.strategy, test)
    };
    let res = run(&p, &cfg)?;
    let config_line = format!(
        "kind={} dict={} obs={} lambda={} lambda_star={} algo={} strategy={} test={} max_iters={} rel_tol={} gap_tol={}",
        p.kind().as_str(),
        a.dict.display(),
        a.obs.display(),
        p.lambda(),
        res.lambda_star,
        cfg.algorithm,
        cfg.strategy,
        cfg.test_kind,
        cfg.max_iters,
        cfg.rel_tol,
        cfg.gap_tol.map_or("none".to_string(), |g| g.to_string()),
    );
    if let Some(path) = &a.trace {
        let w = output(Some(path))?;
        res.trace.write_csv(w, Some(&config_line))?;
    }
    let nnz = res.x_star.iter().filter(|v| **v != 0.0).count();
    println!("{config_line}");
    println!("objective={:.12e}", res.final_objective);
    println!("iterations={} converged={}", res.iterations, res.converged);
    println!("flops={}", res.trace.total_flops());
    println!("time_s={:.6}", res.trace.total_seconds);
    println!(
        "screened={}/{} nonzeros={nnz}",
        res.eliminated.len(),
        p.n_atoms()
    );
    Ok(())
}

fn build_plan(a: &BenchArgs) -> Result<BenchPlan> {
    let mut plan = match a.preset {
        Preset::PaperDesk => BenchPlan::paper_desk(),
    };
    let gen = &mut plan.gen;
    if let Some(k) = a.kind {
        gen.dictionary = k;
    }
    if let Some(o) = a.obs {
        gen.observation = o;
    }
    if let Some(n) = a.n {
        gen.n = n;
    }
    if let Some(k) = a.k {
        gen.k = k;
    }
    if let Some(g) = a.group_size {
        gen.group_size = g;
        if g > 0 {
            plan.kind = ProblemKind::GroupLasso;
            if a.tests.is_none() {
                plan.tests = vec![TestKind::GroupSt3];
            }
        }
    }
    let count = a.seeds.unwrap_or(plan.seeds.len()) as u64;
    plan.seeds = (a.seed..a.seed + count).collect();
    if let Some(r) = &a.ratios {
        plan.lambda_ratios = r.clone();
    }
    if let Some(v) = &a.algos {
        plan.algorithms = v.clone();
    }
    if let Some(v) = &a.strategies {
        plan.strategies = v.clone();
    }
    if let Some(v) = &a.tests {
        plan.tests = v.clone();
    }
    if let Some(r) = a.repeats {
        plan.repeats = r;
    }
    if let Some(m) = a.max_iters {
        plan.solver.max_iters = m;
    }
    if let Some(t) = a.rel_tol {
        plan.solver.rel_tol = t;
    }
    plan.parallel = a.parallel;
    plan.validate()?;
    Ok(plan)
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let plan = build_plan(&a)?;
    let rows = run_plan(&plan).context("benchmark run failed")?;
    let w = output(a.out.as_deref())?;
    bench::write_bench_csv(w, &rows, Some(&plan.describe()))?;
    if let Some(p) = &a.out {
        eprintln!("wrote {} rows to {}", rows.len(), p.display());
    }
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let rows = read_bench_csv(text.as_bytes())
        .with_context(|| format!("parsing {}", a.input.display()))?;
    if rows.is_empty() {
        bail!("{} has no rows", a.input.display());
    }
    let report = aggregate(&rows)?;
    let mut comment: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix('#').map(str::trim))
        .collect();
    let source = format!("source={}", a.input.display());
    comment.push(&source);
    let comment = comment.join("\n");
    let w = output(a.out.as_deref())?;
    bench::write_report_csv(w, &report, Some(&comment))?;
    if let Some(svg) = &a.svg {
        let metric = match a.metric {
            MetricArg::Flops => Metric::Flops,
            MetricArg::Time => Metric::Time,
        };
        let title = a.title.clone().unwrap_or_else(|| match metric {
            Metric::Flops => "normalized flops".into(),
            Metric::Time => "normalized time".into(),
        });
        fs::write(svg, render_svg(&report, metric, &title))
            .with_context(|| format!("writing {}", svg.display()))?;
    }
    Ok(())
}
