use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use klnmf::data::{
    derive_init_seed, format_value, generate_synthetic, initial_point, load_movielens, read_matrix_csv,
    write_matrix_csv, SynthSpec,
};
use klnmf::matrix::matmul_nt;
use klnmf::report::{self, Manifest, RunSummary};
use klnmf::solvers::{LambdaRule, SolverConfig, StepMode};
use klnmf::{
    AlgorithmSettings, DenseMatrix, Error, KlProblem, Registry, RegKind, Regularizer, RunOptions,
    RunOutput,
};

use crate::cli::{
    AlgoArgs, BenchArgs, PlotArgs, RegArg, ReplayArgs, SolveArgs, StepArg, SynthArgs,
};

/// Bad flags or flag combinations detected by the harness itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const BUILD_ID: &str = match option_env!("KLNMF_BUILD_ID") {
    Some(id) => id,
    None => "unknown",
};

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn stamp(manifest: &mut Manifest) {
    manifest
        .set("version", env!("CARGO_PKG_VERSION"))
        .set("build", BUILD_ID)
        .set("started_at", timestamp());
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        m: args.m,
        n: args.n,
        r: args.r,
        sparsity: args.sparsity,
        seed: args.seed,
        dirichlet_alpha: args.dirichlet_alpha,
    };
    let (problem, truth) = generate_synthetic(&spec)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let hht = matmul_nt(&truth.h, &truth.h)?;
    for (name, m) in [
        ("X.csv", problem.x()),
        ("W_star.csv", &truth.w),
        ("H_star.csv", &truth.h),
        ("HHt.csv", &hht),
    ] {
        let path = args.out.join(name);
        write_matrix_csv(m, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut manifest = Manifest::new();
    manifest
        .set("command", "synth")
        .set("m", spec.m)
        .set("n", spec.n)
        .set("r", spec.r)
        .set("sparsity", format_value(spec.sparsity))
        .set("seed", spec.seed)
        .set("dirichlet_alpha", format_value(spec.dirichlet_alpha));
    stamp(&mut manifest);
    manifest.write(args.out.join("manifest.txt"))?;
    println!(
        "wrote X ({}x{}), W* ({}x{}), H* ({}x{}) to {}",
        spec.m,
        spec.n,
        spec.m,
        spec.r,
        spec.r,
        spec.n,
        args.out.display()
    );
    Ok(())
}

fn parse_lambda_scale(s: &str) -> Result<LambdaRule> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| -> Result<f64> {
        // Accept fractions such as `10/3`.
        match p.split_once('/') {
            Some((a, b)) => Ok(a.trim().parse::<f64>()? / b.trim().parse::<f64>()?),
            None => Ok(p.parse::<f64>()?),
        }
    };
    let (c_w, c_h) = match parts.as_slice() {
        [c] => {
            let c = parse(c).map_err(|_| usage(format!("invalid --lambda-scale `{s}`")))?;
            (c, c)
        }
        [a, b] => (
            parse(a).map_err(|_| usage(format!("invalid --lambda-scale `{s}`")))?,
            parse(b).map_err(|_| usage(format!("invalid --lambda-scale `{s}`")))?,
        ),
        _ => return Err(usage("--lambda-scale takes `c` or `cw,ch`")),
    };
    Ok(LambdaRule::Scaled { c_w, c_h })
}

fn regularizer(a: &AlgoArgs) -> Result<Regularizer> {
    let kind = match a.reg {
        RegArg::None => RegKind::None,
        RegArg::L1 => RegKind::L1,
        RegArg::Fro => RegKind::SquaredFrobenius,
    };
    Ok(Regularizer::new(kind, a.mu_w, a.mu_h)?)
}

fn settings(a: &AlgoArgs, seed: u64) -> Result<AlgorithmSettings> {
    let run = RunOptions {
        max_iter: a.max_iter,
        tol: a.tol,
        trace_every: a.trace_every,
    };
    let solver = SolverConfig {
        step_mode: match a.step {
            StepArg::Joint => StepMode::Joint,
            StepArg::Split => StepMode::Split,
        },
        lambda_rule: match &a.lambda_scale {
            Some(s) => parse_lambda_scale(s)?,
            None => LambdaRule::Reciprocal,
        },
        strict_step: a.strict_step,
        rho: a.rho,
        extrapolate: !a.no_extrapolate,
        run,
        seed,
        ..SolverConfig::default()
    };
    let mut s = AlgorithmSettings {
        solver,
        ..AlgorithmSettings::default()
    };
    s.baseline.rho = a.rho;
    s.baseline.extrapolate = !a.no_extrapolate;
    s.baseline.ccd_inner_iters = a.ccd_inner_iters;
    s.baseline.agd_c = a.agd_c;
    s.baseline.run = run;
    s.solver.validate()?;
    s.baseline.validate()?;
    Ok(s)
}

/// Builds the algorithm against a 1×1 stand-in problem so configuration
/// errors surface before any data is read.
fn precheck(registry: &Registry, algo: &str, s: &AlgorithmSettings, reg: Regularizer) -> Result<()> {
    let probe = KlProblem::new(DenseMatrix::filled(1, 1, 1.0), 1, reg)?;
    registry.create(algo, s, &probe)?;
    Ok(())
}

fn parse_synth(s: &str, seed: u64) -> Result<SynthSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(usage(format!("--synth expects m,n,r[,sparsity], got `{s}`")));
    }
    let dim = |p: &str| -> Result<usize> {
        p.parse().map_err(|_| usage(format!("invalid dimension `{p}` in --synth")))
    };
    let mut spec = SynthSpec::new(dim(parts[0])?, dim(parts[1])?, dim(parts[2])?, seed);
    if let Some(sp) = parts.get(3) {
        spec.sparsity = sp
            .parse()
            .map_err(|_| usage(format!("invalid sparsity `{sp}` in --synth")))?;
    }
    Ok(spec)
}

fn load_problem(args: &SolveArgs, reg: Regularizer, manifest: &mut Manifest) -> Result<KlProblem> {
    let need_rank = || {
        args.rank
            .ok_or_else(|| usage("--rank is required with --x and --ratings"))
    };
    if let Some(path) = &args.x {
        let rank = need_rank()?;
        let x = read_matrix_csv(path).with_context(|| format!("reading {}", path.display()))?;
        manifest.set("source", "x").set("x", path.display()).set("rank", rank);
        Ok(KlProblem::new(x, rank, reg)?)
    } else if let Some(path) = &args.ratings {
        let rank = need_rank()?;
        let ratings = load_movielens(path).with_context(|| format!("reading {}", path.display()))?;
        info!("ratings matrix {}x{}", ratings.x.rows(), ratings.x.cols());
        manifest.set("source", "ratings").set("ratings", path.display()).set("rank", rank);
        Ok(KlProblem::new(ratings.x, rank, reg)?)
    } else if let Some(s) = &args.synth {
        let spec = parse_synth(s, args.seed)?;
        if args.rank.is_some_and(|r| r != spec.r) {
            return Err(usage("--rank conflicts with the r in --synth"));
        }
        manifest.set("source", "synth").set("synth", s);
        let (p, _) = generate_synthetic(&spec)?;
        Ok(p.with_regularizer(reg))
    } else {
        Err(usage("one of --x, --synth or --ratings is required"))
    }
}

fn record_algo_args(m: &mut Manifest, a: &AlgoArgs) {
    m.set("reg", a.reg.as_str())
        .set("mu_w", format_value(a.mu_w))
        .set("mu_h", format_value(a.mu_h))
        .set("rho", format_value(a.rho))
        .set("step", a.step.as_str())
        .set("lambda_scale", a.lambda_scale.clone().unwrap_or_default())
        .set("strict_step", a.strict_step)
        .set("extrapolate", !a.no_extrapolate)
        .set("max_iter", a.max_iter)
        .set("tol", format_value(a.tol))
        .set("trace_every", a.trace_every)
        .set("ccd_inner_iters", a.ccd_inner_iters)
        .set("agd_c", format_value(a.agd_c))
        .set("scaled_init", a.scaled_init);
}

fn manifest_path(trace: &Path) -> PathBuf {
    let mut s = trace.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn summary_line(out: &RunOutput) -> String {
    let t = &out.trace;
    let last = t.last();
    format!(
        "algorithm={} iterations={} stop={} objective={} rel_error={} kkt_w={} kkt_h={} \
         restarts_nonpositive={} restarts_distance={} time_s={}",
        t.algorithm,
        t.iterations,
        t.stop.as_str(),
        format_value(last.objective),
        last.rel_error.map(format_value).unwrap_or_else(|| "n/a".into()),
        format_value(last.kkt_w),
        format_value(last.kkt_h),
        t.restarts_nonpositive,
        t.restarts_distance,
        format_value(t.solve_seconds),
    )
}

pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let registry = Registry::with_builtins();
    let algo = args.algo.to_ascii_lowercase();
    if !registry.contains(&algo) {
        return Err(usage(format!(
            "unknown algorithm `{}` (known: {})",
            args.algo,
            registry.names().join(", ")
        )));
    }
    let init_seed = args.init_seed.unwrap_or_else(|| derive_init_seed(args.seed));
    let s = settings(&args.algo_args, args.seed)?;
    let reg = regularizer(&args.algo_args)?;
    precheck(&registry, &algo, &s, reg)?;

    let mut manifest = Manifest::new();
    manifest.set("command", "solve");
    let problem = load_problem(args, reg, &mut manifest)?;
    manifest
        .set("algo", &algo)
        .set("seed", args.seed)
        .set("init_seed", init_seed);
    record_algo_args(&mut manifest, &args.algo_args);
    if let Some(t) = &args.trace {
        manifest.set("trace", t.display());
    }
    if let Some(f) = &args.factors_out {
        manifest.set("factors_out", f);
    }
    stamp(&mut manifest);

    let z0 = initial_point(&problem, init_seed, args.algo_args.scaled_init)?;
    let mut alg = registry.create(&algo, &s, &problem)?;
    if let Some(t) = &args.trace {
        if let Some(dir) = t.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        manifest.write(manifest_path(t))?;
    }

    let out = match klnmf::run(&problem, &z0, alg.as_mut(), &s.solver.run) {
        Ok(out) => out,
        Err(Error::Divergence {
            iteration,
            reason,
            trace,
        }) => {
            if let Some(t) = &args.trace {
                report::write_trace_csv(&trace, t)?;
            }
            bail!("{algo} diverged at iteration {iteration}: {reason}");
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(t) = &args.trace {
        report::write_trace_csv(&out.trace, t)?;
    }
    if let Some(prefix) = &args.factors_out {
        write_matrix_csv(&out.z.w, format!("{prefix}W.csv"))?;
        write_matrix_csv(&out.z.h, format!("{prefix}H.csv"))?;
    }
    println!("{}", summary_line(&out));
    Ok(())
}

fn get<'a>(m: &'a Manifest, key: &str) -> Result<&'a str> {
    m.get(key)
        .ok_or_else(|| usage(format!("manifest is missing `{key}`")))
}

fn get_parsed<T: std::str::FromStr>(m: &Manifest, key: &str) -> Result<T> {
    let v = get(m, key)?;
    v.parse()
        .map_err(|_| usage(format!("manifest value `{key}={v}` is invalid")))
}

pub fn solve_args_from_manifest(m: &Manifest) -> Result<SolveArgs> {
    if get(m, "command")? != "solve" {
        return Err(usage("manifest does not describe a solve run"));
    }
    let source = get(m, "source")?;
    let reg = match get(m, "reg")? {
        "none" => RegArg::None,
        "l1" => RegArg::L1,
        "fro" => RegArg::Fro,
        other => return Err(usage(format!("unknown reg `{other}` in manifest"))),
    };
    let step = match get(m, "step")? {
        "joint" => StepArg::Joint,
        "split" => StepArg::Split,
        other => return Err(usage(format!("unknown step `{other}` in manifest"))),
    };
    let lambda_scale = get(m, "lambda_scale")?;
    Ok(SolveArgs {
        x: (source == "x").then(|| get(m, "x").map(PathBuf::from)).transpose()?,
        synth: (source == "synth").then(|| get(m, "synth").map(String::from)).transpose()?,
        ratings: (source == "ratings")
            .then(|| get(m, "ratings").map(PathBuf::from))
            .transpose()?,
        rank: m.get("rank").map(|_| get_parsed(m, "rank")).transpose()?,
        algo: get(m, "algo")?.to_string(),
        seed: get_parsed(m, "seed")?,
        init_seed: Some(get_parsed(m, "init_seed")?),
        algo_args: AlgoArgs {
            reg,
            mu_w: get_parsed(m, "mu_w")?,
            mu_h: get_parsed(m, "mu_h")?,
            rho: get_parsed(m, "rho")?,
            step,
            lambda_scale: (!lambda_scale.is_empty()).then(|| lambda_scale.to_string()),
            strict_step: get_parsed(m, "strict_step")?,
            no_extrapolate: !get_parsed::<bool>(m, "extrapolate")?,
            max_iter: get_parsed(m, "max_iter")?,
            tol: get_parsed(m, "tol")?,
            trace_every: get_parsed(m, "trace_every")?,
            ccd_inner_iters: get_parsed(m, "ccd_inner_iters")?,
            agd_c: get_parsed(m, "agd_c")?,
            scaled_init: get_parsed(m, "scaled_init")?,
        },
        trace: m.get("trace").map(PathBuf::from),
        factors_out: m.get("factors_out").map(String::from),
    })
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<()> {
    let manifest = Manifest::read(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let mut solve = solve_args_from_manifest(&manifest)?;
    if args.trace.is_some() {
        solve.trace = args.trace.clone();
    }
    if args.factors_out.is_some() {
        solve.factors_out = args.factors_out.clone();
    }
    cmd_solve(&solve)
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize, usize)>> {
    s.split(',')
        .map(|part| {
            let dims: Vec<usize> = part
                .trim()
                .split('x')
                .map(|d| d.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| usage(format!("invalid size `{part}` (expected MxNxR)")))?;
            match dims.as_slice() {
                &[m, n, r] => Ok((m, n, r)),
                _ => Err(usage(format!("invalid size `{part}` (expected MxNxR)"))),
            }
        })
        .collect()
}

struct BenchJob {
    size: (usize, usize, usize),
    seed: u64,
    algo: String,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.instances == 0 {
        return Err(usage("--instances must be positive"));
    }
    let registry = Registry::with_builtins();
    let sizes = parse_sizes(&args.sizes)?;
    let algos: Vec<String> = args
        .algos
        .split(',')
        .map(|a| a.trim().to_ascii_lowercase())
        .filter(|a| !a.is_empty())
        .collect();
    for a in &algos {
        if !registry.contains(a) {
            return Err(usage(format!("unknown algorithm `{a}`")));
        }
    }
    let base = settings(&args.algo_args, args.seed_base)?;
    let reg = regularizer(&args.algo_args)?;
    fs::create_dir_all(args.out.join("traces"))?;

    let mut manifest = Manifest::new();
    manifest
        .set("command", "bench")
        .set("instances", args.instances)
        .set("sizes", &args.sizes)
        .set("algos", algos.join(","))
        .set("sparsity", format_value(args.sparsity))
        .set("seed_base", args.seed_base)
        .set(
            "ccd_max_iter",
            args.ccd_max_iter.unwrap_or(args.algo_args.max_iter),
        );
    record_algo_args(&mut manifest, &args.algo_args);
    stamp(&mut manifest);
    manifest.write(args.out.join("manifest.txt"))?;

    let mut jobs = Vec::new();
    for &size in &sizes {
        for i in 0..args.instances as u64 {
            for a in &algos {
                jobs.push(BenchJob {
                    size,
                    seed: args.seed_base + i,
                    algo: a.clone(),
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()?;
    let results: Mutex<Vec<(usize, String, Option<RunSummary>)>> = Mutex::new(Vec::new());
    pool.install(|| {
        jobs.par_iter().enumerate().for_each(|(idx, job)| {
            let outcome = bench_one(args, &registry, &base, reg, job);
            let summary = match outcome {
                Ok(s) => Some(s),
                Err(e) => {
                    warn!(
                        "{} on {:?} seed {} failed: {e:#}",
                        job.algo, job.size, job.seed
                    );
                    None
                }
            };
            results
                .lock()
                .expect("result lock poisoned")
                .push((idx, job.algo.clone(), summary));
        })
    });
    let mut results = results.into_inner().expect("result lock poisoned");
    results.sort_by_key(|(idx, _, _)| *idx);

    for &(m, n, r) in &sizes {
        let runs: Vec<(String, Option<RunSummary>)> = results
            .iter()
            .filter(|(idx, _, _)| jobs[*idx].size == (m, n, r))
            .map(|(_, a, s)| (a.clone(), s.clone()))
            .collect();
        let rows = report::aggregate(&runs);
        let path = args.out.join(format!("aggregate_{m}x{n}x{r}.csv"));
        report::write_aggregate_csv(&rows, &path)?;
        println!("({m}, {n}, {r}) over {} instances", args.instances);
        println!(
            "{:<8} {:>8} {:>11} {:>11} {:>11} {:>10} {:>6}",
            "algo", "iter", "rel", "kkt_w", "kkt_h", "time", "failed"
        );
        for row in rows {
            println!(
                "{:<8} {:>8.1} {:>11.3e} {:>11.3e} {:>11.3e} {:>10.3e} {:>6}",
                row.algorithm, row.iter, row.rel, row.kkt_w, row.kkt_h, row.time, row.failed
            );
        }
    }
    Ok(())
}

fn bench_one(
    args: &BenchArgs,
    registry: &Registry,
    base: &AlgorithmSettings,
    reg: Regularizer,
    job: &BenchJob,
) -> Result<RunSummary> {
    let (m, n, r) = job.size;
    let spec = SynthSpec::new(m, n, r, job.seed).with_sparsity(args.sparsity);
    let (problem, _) = generate_synthetic(&spec)?;
    let problem = problem.with_regularizer(reg);
    let z0 = initial_point(&problem, derive_init_seed(job.seed), args.algo_args.scaled_init)?;
    let mut opts = base.solver.run;
    if job.algo == "ccd" {
        if let Some(cap) = args.ccd_max_iter {
            opts.max_iter = cap;
        }
    }
    let mut alg = registry.create(&job.algo, base, &problem)?;
    let out = klnmf::run(&problem, &z0, alg.as_mut(), &opts)?;
    let dir = args.out.join("traces").join(format!("{m}x{n}x{r}"));
    fs::create_dir_all(&dir)?;
    report::write_trace_csv(&out.trace, dir.join(format!("{}_seed{}.csv", job.algo, job.seed)))?;
    Ok(RunSummary::from_trace(&out.trace))
}

/// Reads `(iter, time_s, value)` triples for one column of a trace CSV,
/// skipping empty cells.
pub fn read_trace_column(path: &Path, column: &str) -> Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| usage(format!("{} is empty", path.display())))?
        .split(',')
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| usage(format!("{} has no `{name}` column", path.display())))
    };
    let (ci, ct, cv) = (find("iter")?, find("time_s")?, find(column)?);
    let mut out = Vec::new();
    for (no, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            bail!("{}:{}: expected {} fields", path.display(), no + 2, header.len());
        }
        if fields[cv].is_empty() {
            continue;
        }
        out.push((fields[ci].parse()?, fields[ct].parse()?, fields[cv].parse()?));
    }
    Ok(out)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    if args.traces.is_empty() {
        return Err(usage("plot needs at least one trace file"));
    }
    fs::create_dir_all(&args.out)?;
    let mut script = String::new();
    let mut series = Vec::new();
    for path in &args.traces {
        let rows = read_trace_column(path, &args.column)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".into());
        let dat = args.out.join(format!("{stem}.dat"));
        let mut body = format!("# iter time_s {}\n", args.column);
        for (i, t, v) in rows {
            body.push_str(&format!("{i} {} {}\n", format_value(t), format_value(v)));
        }
        fs::write(&dat, body)?;
        series.push((stem, dat));
    }
    let col = &args.column;
    script.push_str("set terminal pngcairo size 900,600\nset logscale y\nset key outside\n");
    for (xcol, xlabel, file) in [(1, "iteration", "iter"), (2, "time (s)", "time")] {
        script.push_str(&format!(
            "set output '{col}_{file}.png'\nset xlabel '{xlabel}'\nset ylabel '{col}'\nplot "
        ));
        let parts: Vec<String> = series
            .iter()
            .map(|(name, dat)| {
                let f = dat.file_name().unwrap_or_default().to_string_lossy();
                format!("'{f}' using {xcol}:3 with lines title '{name}'")
            })
            .collect();
        script.push_str(&parts.join(", \\\n     "));
        script.push('\n');
    }
    let gp = args.out.join("plot.gp");
    fs::write(&gp, script)?;
    println!("wrote {} (run gnuplot from {})", gp.display(), args.out.display());
    Ok(())
}

pub fn cmd_list() {
    for (name, desc) in Registry::with_builtins().describe() {
        println!("{name:<8} {desc}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_scale_forms() {
        assert_eq!(
            parse_lambda_scale("0.5").unwrap(),
            LambdaRule::Scaled { c_w: 0.5, c_h: 0.5 }
        );
        match parse_lambda_scale("10/3,10").unwrap() {
            LambdaRule::Scaled { c_w, c_h } => {
                assert!((c_w - 10.0 / 3.0).abs() < 1e-15);
                assert_eq!(c_h, 10.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_lambda_scale("a").is_err());
        assert!(parse_lambda_scale("1,2,3").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(
            parse_sizes("200x200x30, 500x500x80").unwrap(),
            vec![(200, 200, 30), (500, 500, 80)]
        );
        assert!(parse_sizes("200x200").is_err());
    }

    #[test]
    fn synth_spec() {
        let s = parse_synth("20,10,3,0.5", 4).unwrap();
        assert_eq!((s.m, s.n, s.r, s.seed), (20, 10, 3, 4));
        assert_eq!(s.sparsity, 0.5);
        assert!(parse_synth("20,10", 0).is_err());
    }
}
