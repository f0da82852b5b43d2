mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use psidensity::counterexamples::{self as cx, GrowthDiagnostics};
use psidensity::density::{partial_sums, DensityEstimate, DensitySeries, EstimateOptions};
use psidensity::grid;
use psidensity::series::{self, AnalyticOptions, Method, Normalization, SeriesDensityEstimate};
use psidensity::sets::parse_count;
use psidensity::theorems::{self, Suite, Verdict};
use psidensity::{IntegerSet, Weight};

use config::Config;
use output::{Format, Output, Trace};

/// Weighted (psi-) densities of integer sets.
///
/// Exit status: 0 on success, 1 when `verify` reports fail verdicts, 2 on
/// usage, validation or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "psidensity", version, about)]
struct Cli {
    /// `key = value` file; its values override built-in defaults and
    /// PSIDENSITY_THREADS, flags override it [default: none]
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads [default: PSIDENSITY_THREADS, else available parallelism]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output format csv|json|plotpoints [default: from the --out extension,
    /// else the command's native format]; plotpoints writes one
    /// `<trace>.dat` per trace into the --out directory
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<Format>,

    /// Output path, `-` for stdout [default: stdout]
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Streaming psi-density of one set: checkpoint table and tail bracket
    Density(DensityArgs),
    /// Analytic (Dirichlet) or Abel density over a parameter grid
    Series(SeriesArgs),
    /// Run a verification suite and write the theorem reports
    Verify(VerifyArgs),
    /// Growth diagnostics and counterexample traces
    Counterexample(CounterexampleArgs),
    /// Tail brackets for several sets under several weights
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// Set spec, e.g. `evens`, `ap:3,1`, `primes:1000000`, `compl(evens)` [required]
    #[arg(long)]
    set: Option<String>,
    /// Weight spec: pow:q, id, log, xlogx, expsqrt, exppow:s, pwl:p [required]
    #[arg(long)]
    weight: Option<String>,
    /// Truncation N, accepts 1000000, 1e6 or 2^20 [default: 1000000]
    #[arg(long)]
    n: Option<String>,
    /// Tail window [window*N, N] [default: 0.5]
    #[arg(long)]
    window: Option<f64>,
    /// Bracket width counted as converged [default: 0.02]
    #[arg(long)]
    tol: Option<f64>,
    /// Checkpoints per doubling of n [default: 2]
    #[arg(long)]
    per_octave: Option<u32>,
    /// Write ln(numerator), ln(denominator) columns [default: off; always on
    /// for weights summed in log space]
    #[arg(long)]
    log_columns: bool,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    /// analytic|abel [default: analytic]
    #[arg(long)]
    method: Option<String>,
    /// Set spec [required]
    #[arg(long)]
    set: Option<String>,
    /// Comma-separated grid of p (analytic) or x (abel)
    /// [default: 1.2,1.1,1.05,1.02,1.01 | 0.9,0.99,0.999,0.9999]
    #[arg(long)]
    grid: Option<String>,
    /// Analytic: target tail bound per grid point [default: 1e-4]
    #[arg(long)]
    tol: Option<f64>,
    /// Analytic: largest truncation N [default: 2^26]
    #[arg(long)]
    max_n: Option<String>,
    /// Analytic: p-minus-one|inverse-zeta [default: p-minus-one]
    #[arg(long)]
    normalization: Option<String>,
    /// Abel: relative size of the dropped tail x^N [default: 1e-14]
    #[arg(long)]
    rel_tail: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// all|th1|chains|regularity|rajagopal [default: all]
    #[arg(long)]
    suite: Option<String>,
    /// Truncation N [default: 4194304]
    #[arg(long)]
    n: Option<String>,
    /// Allowed violation of each inequality [default: 0.03]
    #[arg(long)]
    slack: Option<f64>,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    /// pwl:p | cond2:<weight> | ratio:<weight>,a,b | eset:<weight>,eps [required]
    #[arg(long)]
    which: Option<String>,
    /// Sampling range X [default: 1e6; pwl: the largest feasible breakpoint]
    #[arg(long)]
    x: Option<f64>,
    /// cond2: geometric grid size [default: 200]
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Set spec, repeatable; in a config file separate specs with `;`
    /// [required]
    #[arg(long)]
    set: Vec<String>,
    /// Weight spec, repeatable; in a config file separate specs with `;`
    /// [default: log, pow:0.5, id, pow:2]
    #[arg(long)]
    weight: Vec<String>,
    /// Truncation N [default: 1000000]
    #[arg(long)]
    n: Option<String>,
    /// Tail window [window*N, N] [default: 0.5]
    #[arg(long)]
    window: Option<f64>,
    /// Bracket width counted as converged [default: 0.02]
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let env = std::env::var("PSIDENSITY_THREADS").ok();
    let threads = config::threads(&cfg, cli.threads, env.as_deref())?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting the worker pool")?;
    let format = cfg.resolve_with("format", cli.format.map(Some), None, |s| s.parse().map(Some))?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Density(a) => density(&cfg, a, out, format),
        Command::Series(a) => series_cmd(&cfg, a, out, format),
        Command::Verify(a) => verify(&cfg, a, out, format),
        Command::Counterexample(a) => counterexample(&cfg, a, out, format),
        Command::Compare(a) => compare(&cfg, a, out, format),
    }
}

fn parse_set(spec: &str) -> Result<IntegerSet> {
    IntegerSet::parse(spec).with_context(|| format!("invalid set `{spec}`"))
}

fn parse_weight(spec: &str) -> Result<Weight> {
    Weight::parse(spec).with_context(|| format!("invalid weight `{spec}`"))
}

fn count(s: &str) -> Result<u64> {
    let n = parse_count(s).with_context(|| format!("invalid count `{s}`"))?;
    ensure!(n >= 1, "truncation must be >= 1, got `{s}`");
    Ok(n)
}

fn estimate_options(
    cfg: &Config,
    window: Option<f64>,
    tol: Option<f64>,
    per_octave: Option<u32>,
) -> Result<EstimateOptions> {
    let d = EstimateOptions::default();
    let opts = EstimateOptions {
        window: cfg.resolve("window", window, d.window)?,
        tol: cfg.resolve("tol", tol, d.tol)?,
        per_octave: cfg.resolve("per_octave", per_octave, d.per_octave)?,
    };
    ensure!(
        opts.window > 0.0 && opts.window < 1.0,
        "--window must lie in (0, 1), got {}",
        opts.window
    );
    ensure!(opts.tol >= 0.0, "--tol must be >= 0, got {}", opts.tol);
    ensure!(opts.per_octave >= 1, "--per-octave must be >= 1");
    Ok(opts)
}

fn check_reach(set: &IntegerSet, n: u64) -> Result<()> {
    let limit = set.query_limit();
    ensure!(
        n <= limit,
        "set `{}` can only be queried up to {limit}, N = {n} requested",
        set.label()
    );
    Ok(())
}

#[derive(Serialize)]
struct DensityOutput<'a> {
    series: &'a DensitySeries,
    estimate: &'a DensityEstimate,
}

fn density(cfg: &Config, a: DensityArgs, out: Option<&Path>, format: Option<Format>) -> Result<ExitCode> {
    let set = parse_set(&cfg.require("set", a.set, |s| Ok(s.to_string()))?)?;
    let weight = parse_weight(&cfg.require("weight", a.weight, |s| Ok(s.to_string()))?)?;
    let n = cfg.resolve_with("n", a.n.as_deref().map(count).transpose()?, 1_000_000, count)?;
    let opts = estimate_options(cfg, a.window, a.tol, a.per_octave)?;
    let log_columns = a.log_columns || cfg.resolve("log_columns", None, false)?;
    check_reach(&set, n)?;
    let out = Output::new(out, format, Format::Csv)?;

    let schedule = grid::schedule(n, opts.per_octave);
    let series = partial_sums(&set, &weight, n, Some(&schedule))?;
    let est = DensityEstimate::from_series(&series, &opts)?;
    eprintln!(
        "{} under {}: ratio {} at N = {}, tail bracket [{}, {}]{}",
        est.set,
        est.weight,
        est.point,
        est.n,
        est.lower,
        est.upper,
        if est.converged { "" } else { " (not converged)" }
    );
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }

    match out.format {
        Format::Json => out.json(&DensityOutput {
            series: &series,
            estimate: &est,
        }),
        Format::Csv => {
            let logs = series.log_space || log_columns;
            let header: &[&str] = if logs {
                &["n", "log_numerator", "log_denominator", "ratio"]
            } else {
                &["n", "numerator", "denominator", "ratio"]
            };
            let convert = |v: f64| if logs && !series.log_space { v.ln() } else { v };
            out.csv(
                header,
                series.checkpoints.iter().map(|c| {
                    vec![
                        c.n.to_string(),
                        convert(c.numerator).to_string(),
                        convert(c.denominator).to_string(),
                        c.ratio.to_string(),
                    ]
                }),
            )
        }
        Format::Plotpoints => {
            let params = [
                ("set", series.set.clone()),
                ("weight", series.weight.clone()),
                ("N", n.to_string()),
            ];
            let pts = series.checkpoints.iter().map(|c| (c.n as f64, c.ratio)).collect();
            out.plotpoints(&[Trace::new("ratio", ("n", "ratio"), &params, pts)])
        }
    }?;
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid grid value `{v}` in `{s}`"))
        })
        .collect()
}

fn series_cmd(cfg: &Config, a: SeriesArgs, out: Option<&Path>, format: Option<Format>) -> Result<ExitCode> {
    let method = match cfg.resolve("method", a.method, "analytic".to_string())?.as_str() {
        "analytic" => Method::Analytic,
        "abel" => Method::Abel,
        other => bail!("unknown method `{other}` (expected analytic or abel)"),
    };
    let set = parse_set(&cfg.require("set", a.set, |s| Ok(s.to_string()))?)?;
    let default_grid = match method {
        Method::Analytic => series::DEFAULT_P_GRID.to_vec(),
        Method::Abel => series::DEFAULT_X_GRID.to_vec(),
    };
    let grid = cfg.resolve_with(
        "grid",
        a.grid.as_deref().map(parse_grid).transpose()?,
        default_grid,
        parse_grid,
    )?;
    let out = Output::new(out, format, Format::Json)?;

    let est = match method {
        Method::Analytic => {
            let d = AnalyticOptions::default();
            let normalization = match cfg
                .resolve("normalization", a.normalization, "p-minus-one".to_string())?
                .as_str()
            {
                "p-minus-one" => Normalization::PMinusOne,
                "inverse-zeta" => Normalization::InverseZeta,
                other => bail!("unknown normalization `{other}` (expected p-minus-one or inverse-zeta)"),
            };
            let opts = AnalyticOptions {
                grid,
                tol: cfg.resolve("tol", a.tol, d.tol)?,
                normalization,
                max_n: cfg.resolve_with("max_n", a.max_n.as_deref().map(count).transpose()?, d.max_n, count)?,
            };
            ensure!(opts.tol > 0.0, "--tol must be positive, got {}", opts.tol);
            series::analytic_density(&set, &opts)?
        }
        Method::Abel => {
            let rel_tail = cfg.resolve("rel_tail", a.rel_tail, 1e-14)?;
            ensure!(
                rel_tail > 0.0 && rel_tail < 1.0,
                "--rel-tail must lie in (0, 1), got {rel_tail}"
            );
            series::abel_density(&set, &grid, rel_tail)?
        }
    };
    eprintln!(
        "{}: extrapolated {} (± {:.1e})",
        est.set, est.extrapolated, est.extrapolated_bound
    );
    for f in &est.flags {
        eprintln!("warning: {f}");
    }
    write_series(&out, &est)?;
    Ok(ExitCode::SUCCESS)
}

fn write_series(out: &Output, est: &SeriesDensityEstimate) -> Result<()> {
    match out.format {
        Format::Json => out.json(est),
        Format::Csv => out.csv(
            &["param", "N", "value", "tail_bound"],
            est.grid.iter().map(|g| {
                vec![
                    g.param.to_string(),
                    g.n.to_string(),
                    g.value.to_string(),
                    g.tail_bound.to_string(),
                ]
            }),
        ),
        Format::Plotpoints => {
            let method = match est.method {
                Method::Analytic => "analytic",
                Method::Abel => "abel",
            };
            let params = [("set", est.set.clone()), ("method", method.to_string())];
            let pts = est.grid.iter().map(|g| (g.param, g.value)).collect();
            out.plotpoints(&[Trace::new("value", ("param", "value"), &params, pts)])
        }
    }
}

fn verify(cfg: &Config, a: VerifyArgs, out: Option<&Path>, format: Option<Format>) -> Result<ExitCode> {
    let suite: Suite = cfg
        .resolve("suite", a.suite, "all".to_string())?
        .parse()
        .context("invalid --suite")?;
    let n = cfg.resolve_with("n", a.n.as_deref().map(count).transpose()?, 4_194_304, count)?;
    let slack = cfg.resolve("slack", a.slack, 0.03)?;
    ensure!(
        slack >= 0.0 && slack.is_finite(),
        "--slack must be a finite number >= 0, got {slack}"
    );
    let out = Output::new(out, format, Format::Json)?;
    ensure!(
        out.format != Format::Plotpoints,
        "verify writes csv or json, not plotpoints"
    );

    let report = theorems::run_suite(suite, n, slack)?;
    let c = report.counts;
    eprintln!(
        "{} reports: {} pass, {} fail, {} inconclusive, {} precondition-failed",
        report.reports.len(),
        c.pass,
        c.fail,
        c.inconclusive,
        c.precondition_failed
    );
    for r in report.reports.iter().filter(|r| r.verdict == Verdict::Fail) {
        eprintln!("fail: {:?} {}", r.theorem_id, inputs_str(&r.inputs));
    }
    match out.format {
        Format::Csv => out.csv(
            &["theorem_id", "verdict", "inputs", "checks", "notes"],
            report.reports.iter().map(|r| {
                vec![
                    json_str(&r.theorem_id),
                    json_str(&r.verdict),
                    inputs_str(&r.inputs),
                    r.checks.len().to_string(),
                    r.notes.join("; "),
                ]
            }),
        ),
        _ => out.json(&report),
    }?;
    Ok(if c.fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn json_str<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn inputs_str(inputs: &std::collections::BTreeMap<String, String>) -> String {
    inputs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

enum Which {
    Pwl(f64),
    Cond2(Weight),
    Ratio(Weight, u64, u64),
    Eset(Weight, f64),
}

fn parse_which(spec: &str) -> Result<Which> {
    let ctx = || format!("invalid --which `{spec}`");
    let (kind, rest) = spec
        .split_once(':')
        .with_context(|| format!("`{spec}`: expected pwl:p, cond2:<weight>, ratio:<weight>,a,b or eset:<weight>,eps"))
        .with_context(ctx)?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("`{s}` is not a number"))
    };
    let int = |s: &str| {
        s.trim()
            .parse::<u64>()
            .with_context(|| format!("`{s}` is not a non-negative integer"))
    };
    let parts: Vec<&str> = rest.split(',').collect();
    let which = match (kind, parts.as_slice()) {
        ("pwl", [p]) => Which::Pwl(num(p).with_context(ctx)?),
        ("cond2", [w]) => Which::Cond2(parse_weight(w).with_context(ctx)?),
        ("ratio", [w, a, b]) => Which::Ratio(
            parse_weight(w).with_context(ctx)?,
            int(a).with_context(ctx)?,
            int(b).with_context(ctx)?,
        ),
        ("eset", [w, eps]) => Which::Eset(parse_weight(w).with_context(ctx)?, num(eps).with_context(ctx)?),
        _ => bail!("invalid --which `{spec}`: expected pwl:p, cond2:<weight>, ratio:<weight>,a,b or eset:<weight>,eps"),
    };
    Ok(which)
}

fn trace_rows(x_col: &str, cols: &[(&str, &[(f64, f64)])]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec![x_col.to_string()];
    header.extend(cols.iter().map(|(n, _)| n.to_string()));
    let len = cols.first().map_or(0, |(_, t)| t.len());
    let rows = (0..len)
        .map(|i| {
            let mut row = vec![cols[0].1[i].0.to_string()];
            row.extend(cols.iter().map(|(_, t)| t[i].1.to_string()));
            row
        })
        .collect();
    (header, rows)
}

fn write_traces(
    out: &Output,
    json: &impl Serialize,
    x_col: &str,
    params: &[(&str, String)],
    cols: &[(&str, &[(f64, f64)])],
) -> Result<()> {
    match out.format {
        Format::Json => out.json(json),
        Format::Csv => {
            let (header, rows) = trace_rows(x_col, cols);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            out.csv(&header, rows)
        }
        Format::Plotpoints => {
            let traces: Vec<Trace> = cols
                .iter()
                .map(|(name, t)| Trace::new(name, (x_col, name), params, t.to_vec()))
                .collect();
            out.plotpoints(&traces)
        }
    }
}

fn counterexample(cfg: &Config, a: CounterexampleArgs, out: Option<&Path>, format: Option<Format>) -> Result<ExitCode> {
    let which = parse_which(&cfg.require("which", a.which, |s| Ok(s.to_string()))?)?;
    let x = cfg.resolve_with("x", a.x.map(Some), None, |s| Ok(Some(s.parse::<f64>()?)))?;
    let points = cfg.resolve("points", a.points, 200)?;
    if let Some(x) = x {
        ensure!(x.is_finite() && x >= 1e3, "--x must be at least 1000, got {x}");
    }
    ensure!(points >= 100, "--points must be at least 100, got {points}");
    let out = Output::new(out, format, Format::Csv)?;
    let x_or_default = x.unwrap_or(1e6);

    match which {
        Which::Pwl(p) => {
            let w = Weight::piecewise_linear(p).context("invalid pwl exponent")?;
            let n_max = x.map(|x| w.as_piecewise_linear().expect("pwl weight").segment(x));
            let t = cx::pwl_limit_check(p, n_max)?;
            eprintln!(
                "pwl:{p}: limit case {:?}, ratio matches {}, order matches {}",
                t.case, t.ratio_matches_case, t.order_matches_p
            );
            let asv: Vec<(f64, f64)> = t.ratio_trace.iter().map(|&(n, r)| (n as f64, r)).collect();
            let order: Vec<(f64, f64)> = t.order_trace.iter().map(|&(n, r)| (n as f64, r)).collect();
            let params = [("p", p.to_string())];
            write_traces(&out, &t, "n", &params, &[("asv_trace", &asv), ("order_trace", &order)])?;
        }
        Which::Cond2(w) => {
            let d: GrowthDiagnostics = cx::growth_diagnostics(&w, x_or_default, points)?;
            eprintln!("{}: {:?}", d.weight, d.verdicts);
            let params = [("weight", d.weight.clone()), ("X", x_or_default.to_string())];
            write_traces(
                &out,
                &d,
                "x",
                &params,
                &[
                    ("order_trace", &d.order_trace),
                    ("asv_trace", &d.asv_trace),
                    ("cond2_trace", &d.cond2_trace),
                    ("logconcavity_trace", &d.logconcavity_trace),
                    ("hyper_trace", &d.hyper_trace),
                ],
            )?;
        }
        Which::Ratio(w, ra, rb) => {
            let r = cx::ratio_boundedness_check(&w, ra, rb, x_or_default)?;
            eprintln!(
                "{} a={ra} b={rb}: sup ratio {}, order bound {}, measured order {}, bounded {}",
                r.weight, r.c_hat, r.order_bound, r.measured_order, r.bounded
            );
            let params = [
                ("weight", r.weight.clone()),
                ("a", ra.to_string()),
                ("b", rb.to_string()),
            ];
            write_traces(&out, &r, "n", &params, &[("ratio_trace", &r.trace)])?;
        }
        Which::Eset(w, eps) => {
            let e = cx::exceptional_set_density(&w, eps, x_or_default)?;
            eprintln!(
                "{} eps={eps}: measure {} over {} panels, {:?}",
                e.weight, e.measure, e.panels, e.verdict
            );
            let params = [("weight", e.weight.clone()), ("eps", eps.to_string())];
            write_traces(&out, &e, "x", &params, &[("density_trace", &e.trace)])?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn split_specs(s: &str) -> Result<Vec<String>> {
    Ok(s.split(';')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect())
}

fn compare(cfg: &Config, a: CompareArgs, out: Option<&Path>, format: Option<Format>) -> Result<ExitCode> {
    let flag = |v: Vec<String>| if v.is_empty() { None } else { Some(v) };
    let set_specs = cfg.require("set", flag(a.set), split_specs)?;
    let default_weights = ["log", "pow:0.5", "id", "pow:2"].map(String::from).to_vec();
    let weight_specs = cfg.resolve_with("weight", flag(a.weight), default_weights, split_specs)?;
    let sets = set_specs.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>>>()?;
    let weights = weight_specs
        .iter()
        .map(|s| parse_weight(s))
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.resolve_with("n", a.n.as_deref().map(count).transpose()?, 1_000_000, count)?;
    let opts = estimate_options(cfg, a.window, a.tol, None)?;
    for s in &sets {
        check_reach(s, n)?;
    }
    let out = Output::new(out, format, Format::Csv)?;
    ensure!(
        out.format != Format::Plotpoints,
        "compare writes csv or json, not plotpoints"
    );

    let jobs: Vec<(&IntegerSet, &Weight)> = sets.iter().flat_map(|s| weights.iter().map(move |w| (s, w))).collect();
    let estimates = jobs
        .par_iter()
        .map(|(s, w)| psidensity::density_estimate(s, w, n, &opts))
        .collect::<psidensity::Result<Vec<_>>>()?;
    match out.format {
        Format::Csv => out.csv(
            &["set", "weight", "N", "lower", "upper", "point", "converged"],
            estimates.iter().map(|e| {
                vec![
                    e.set.clone(),
                    e.weight.clone(),
                    e.n.to_string(),
                    e.lower.to_string(),
                    e.upper.to_string(),
                    e.point.to_string(),
                    e.converged.to_string(),
                ]
            }),
        ),
        _ => out.json(&estimates),
    }?;
    Ok(ExitCode::SUCCESS)
}
