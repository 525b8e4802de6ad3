//! `ergokit`: batch front end over ergokit-core.
//!
//! Exit codes: 0 ok, 1 a mathematical check failed, 2 usage, 3 budget.

mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergokit_core::construction::{construct, Constraint, ConstructionInputs};
use ergokit_core::entropy::{
    entropy_estimate, q_count_and_bound, separated_count, spanning_count, write_series_csv, Method,
};
use ergokit_core::measures::{
    block_entropy, katok_entropy_estimate, weak_metric, MarkovMeasure, MeasureMetricConfig, MeasureSpec,
};
use ergokit_core::pressure::{pinf_report, pressure_estimate, spectrum_solve, Family, Potential, Target};
use ergokit_core::shift::word::render;
use ergokit_core::suites::run_suites;
use ergokit_core::tracing::{
    estimate_gap, find_gluing_tracer, find_tracer, verify_trace, GapProperty, OrbitTask, Sampling,
};
use ergokit_core::{EpsScale, Error, ShiftSpace, SpaceSpec, Word};
use serde::Serialize;
use serde_json::{json, Value};

use output::{to_json, Budgets, Format, Report, RunConfig, Status};

#[derive(Parser, Debug)]
#[command(name = "ergokit", version, about = "Symbolic dynamics workbench")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on the number of words any enumeration may hold.
    #[arg(long, global = true)]
    max_words: Option<u64>,
    /// Cap on lengths n accepted by any command.
    #[arg(long, global = true, default_value_t = 64)]
    max_n: usize,
    /// Node budget for tracer and clique searches.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    node_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count (and optionally list) the words of length n.
    Language {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
    },
    /// Entropy estimate from separated-set counts up to n.
    Entropy {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        scale: u32,
    },
    /// Maximal (n, 2^-m)-separated and minimal spanning cardinalities.
    Separated {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        #[arg(long, value_parser = parse_method, default_value = "cylinder-shortcut")]
        method: Method,
        #[arg(long)]
        spanning: bool,
    },
    /// Q(n, delta) and its binary-entropy bound.
    Qbound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        delta: f64,
        /// Tabulate every length 1..=n.
        #[arg(long)]
        series: bool,
    },
    /// Verify a tracing point, or search for one.
    Trace {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        /// Candidate tracing point to verify.
        #[arg(long)]
        z: Option<String>,
        /// Search all gap sequences with gaps at most this (exact tasks without gaps).
        #[arg(long)]
        max_gap: Option<usize>,
    },
    /// Estimate a gluing or approximate-product gap constant.
    Gap(GapArgs),
    /// Run the intermediate-entropy construction at finite depth.
    Construct {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        h0: f64,
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        eta0: f64,
        /// Number of blocks n.
        #[arg(long)]
        depth: usize,
        /// Block length M (searched when absent).
        #[arg(long)]
        block_len: Option<usize>,
        #[arg(long)]
        delta0: Option<f64>,
        /// Reference measure (maximal entropy when absent).
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Write the Lambda word list here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Entropy, stationary vector and estimates for a Markov measure.
    Measure {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Katok estimate at this n.
        #[arg(long)]
        katok_n: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        /// Block entropy at this length.
        #[arg(long)]
        block_n: Option<usize>,
        /// Second measure for the weak-* distance.
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Topological pressure estimate and reference value.
    Pressure {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        /// Also report h(mu) + chi(mu) for this measure.
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Solve for a measure with prescribed entropy, exponent or pressure.
    Spectrum {
        /// Space (full 2-shift when absent).
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        potential: Option<PathBuf>,
        /// bernoulli, or a JSON family file.
        #[arg(long, default_value = "bernoulli")]
        family: String,
        /// kind=value with kind in entropy, exponent, pressure.
        #[arg(long, required_unless_present = "pinf")]
        target: Option<String>,
        /// Report the boundary-approaching family with this many steps instead.
        #[arg(long)]
        pinf: Option<u32>,
    },
    /// Run invariant suites.
    Verify {
        /// all, or one module suite.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args, Debug)]
struct GapArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 1)]
    scale: u32,
    /// JSON property file; otherwise built from the flags below.
    #[arg(long)]
    property: Option<PathBuf>,
    #[arg(long)]
    max_gap: Option<usize>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 200)]
    tasks: usize,
    #[arg(long, default_value_t = 5)]
    max_segments: usize,
    #[arg(long, default_value_t = 8)]
    max_segment_len: usize,
    #[arg(long)]
    exhaustive_len: Option<usize>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(Value::String(s.into()))
        .map_err(|_| format!("unknown method {s:?}; expected cylinder-shortcut or brute-force"))
}

/// A command's output before it is wrapped in a [`Report`].
struct Outcome {
    status: Status,
    ledger: Value,
    result: Value,
    csv: Option<Vec<u8>>,
}

impl Outcome {
    fn ok(result: impl Serialize) -> Result<Outcome, Error> {
        Ok(Outcome {
            status: Status::Ok,
            ledger: json!([]),
            result: serde_json::to_value(result)?,
            csv: None,
        })
    }

    fn check(mut self, pass: bool) -> Outcome {
        if !pass {
            self.status = Status::CheckFailed;
        }
        self
    }

    fn ledger(mut self, ledger: &[Constraint]) -> Result<Outcome, Error> {
        self.ledger = serde_json::to_value(ledger)?;
        if ledger.iter().any(|c| !c.holds) {
            self.status = Status::CheckFailed;
        }
        Ok(self)
    }
}

/// Collects everything that identifies a run while the command is parsed.
struct Ctx {
    global: Global,
    inputs: BTreeMap<&'static str, String>,
    params: BTreeMap<&'static str, Value>,
}

impl Ctx {
    fn param(&mut self, key: &'static str, value: impl Serialize) {
        self.params
            .insert(key, serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn read(&mut self, key: &'static str, path: &Path) -> Result<String, Error> {
        self.inputs.insert(key, path.display().to_string());
        fs::read_to_string(path).map_err(|e| Error::Invalid(format!("--{key} {}: {e}", path.display())))
    }

    fn space(&mut self, path: &Path) -> Result<ShiftSpace, Error> {
        let text = self.read("space", path)?;
        let spec = SpaceSpec::from_json(&text)
            .map_err(|e| Error::Invalid(format!("--space {}: {e}", path.display())))?;
        let space = ShiftSpace::from_spec(&spec)?;
        Ok(match self.global.max_words {
            Some(b) => space.with_budget(b),
            None => space,
        })
    }

    fn measure(
        &mut self,
        key: &'static str,
        path: &Path,
        space: &ShiftSpace,
    ) -> Result<MarkovMeasure, Error> {
        let text = self.read(key, path)?;
        MeasureSpec::from_json(&text)
            .map_err(|e| Error::Invalid(format!("--{key} {}: {e}", path.display())))?
            .build(space)
    }

    fn potential(&mut self, path: &Path) -> Result<Potential, Error> {
        let text = self.read("potential", path)?;
        Potential::from_json(&text)
            .map_err(|e| Error::Invalid(format!("--potential {}: {e}", path.display())))
    }

    fn length(&mut self, key: &'static str, n: usize) -> Result<usize, Error> {
        self.param(key, n);
        if n == 0 {
            return Err(Error::Invalid(format!("--{key} must be positive")));
        }
        if n > self.global.max_n {
            return Err(Error::Budget(format!(
                "--{key} {n} exceeds --max-n {}",
                self.global.max_n
            )));
        }
        Ok(n)
    }

    fn scale(&mut self, m: u32) -> Result<EpsScale, Error> {
        self.param("scale", m);
        EpsScale::new(m)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("ergokit: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(status) => ExitCode::from(if status == Status::Ok { 0 } else { 1 }),
        Err(e) => {
            eprintln!("ergokit: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) => 3,
        Error::CheckFailed(_) => 1,
        _ => 2,
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ERGOKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ERGOKIT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Status, Error> {
    let mut ctx = Ctx {
        global: cli.global,
        inputs: BTreeMap::new(),
        params: BTreeMap::new(),
    };
    let (name, outcome) = dispatch(cli.command, &mut ctx)?;
    let format = ctx.global.format;
    let bytes = match (format, outcome.csv) {
        (Format::Csv, Some(csv)) => csv,
        (Format::Csv, None) => {
            return Err(Error::Invalid(format!(
                "--format csv is only available for n-series, not {name}"
            )))
        }
        (Format::Json, _) => {
            let report = Report {
                tool: "ergokit",
                version: env!("CARGO_PKG_VERSION"),
                config: RunConfig {
                    command: name,
                    inputs: ctx.inputs,
                    params: ctx.params,
                    seed: ctx.global.seed,
                    budgets: Budgets {
                        max_words: ctx
                            .global
                            .max_words
                            .unwrap_or(ergokit_core::shift::DEFAULT_BUDGET),
                        max_n: ctx.global.max_n,
                        node_budget: ctx.global.node_budget,
                    },
                    format,
                    output: ctx.global.output.as_ref().map(|p| p.display().to_string()),
                },
                status: outcome.status,
                ledger: outcome.ledger,
                result: outcome.result,
            };
            to_json(&report)?
        }
    };
    match &ctx.global.output {
        Some(path) => fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    if outcome.status == Status::CheckFailed {
        eprintln!("ergokit: {name}: a check failed; see the report");
    }
    Ok(outcome.status)
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<(&'static str, Outcome), Error> {
    Ok(match command {
        Command::Language { space, n, list } => ("language", language(ctx, &space, n, list)?),
        Command::Entropy { space, n, scale } => ("entropy", entropy(ctx, &space, n, scale)?),
        Command::Separated {
            space,
            n,
            scale,
            method,
            spanning,
        } => ("separated", separated(ctx, &space, n, scale, method, spanning)?),
        Command::Qbound { n, delta, series } => ("qbound", qbound(ctx, n, delta, series)?),
        Command::Trace {
            space,
            task,
            scale,
            z,
            max_gap,
        } => ("trace", trace(ctx, &space, &task, scale, z, max_gap)?),
        Command::Gap(args) => ("gap", gap(ctx, args)?),
        Command::Construct {
            space,
            h0,
            beta0,
            eta0,
            depth,
            block_len,
            delta0,
            measure,
            export,
        } => {
            let mut inputs = ConstructionInputs::new(h0, beta0, eta0);
            inputs.m_len = block_len;
            if let Some(d) = delta0 {
                inputs.delta0 = d;
            }
            (
                "construct",
                construction(ctx, &space, inputs, depth, measure, export)?,
            )
        }
        Command::Measure {
            space,
            measure,
            katok_n,
            delta,
            scale,
            block_n,
            other,
            depth,
        } => {
            let opts = MeasureOpts {
                katok_n,
                delta,
                scale,
                block_n,
                other,
                depth,
            };
            ("measure", measure_cmd(ctx, &space, &measure, opts)?)
        }
        Command::Pressure {
            space,
            potential,
            n,
            scale,
            measure,
        } => ("pressure", pressure(ctx, &space, &potential, n, scale, measure)?),
        Command::Spectrum {
            space,
            potential,
            family,
            target,
            pinf,
        } => (
            "spectrum",
            spectrum(ctx, space, potential, &family, target, pinf)?,
        ),
        Command::Verify { suite } => {
            ctx.param("suite", &suite);
            let report = run_suites(&suite)?;
            let pass = report.pass;
            ("verify", Outcome::ok(report)?.check(pass))
        }
    })
}

fn language(ctx: &mut Ctx, path: &Path, n: usize, list: bool) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let n = ctx.length("n", n)?;
    ctx.param("list", list);
    let count = space.count_language(n)?;
    let words = if list {
        Some(space.language(n)?.iter().map(|w| render(w)).collect::<Vec<_>>())
    } else {
        None
    };
    Outcome::ok(json!({ "n": n, "backend": space.backend_name(), "count": count as u64, "words": words }))
}

fn entropy(ctx: &mut Ctx, path: &Path, n: usize, m: u32) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let n = ctx.length("n", n)?;
    let scale = ctx.scale(m)?;
    let e = entropy_estimate(&space, n, scale)?;
    let mut csv = Vec::new();
    write_series_csv(&e.series, &mut csv)?;
    let mut out = Outcome::ok(&e)?;
    out.csv = Some(csv);
    Ok(out)
}

fn separated(
    ctx: &mut Ctx,
    path: &Path,
    n: usize,
    m: u32,
    method: Method,
    spanning: bool,
) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let n = ctx.length("n", n)?;
    let scale = ctx.scale(m)?;
    ctx.param("method", method);
    ctx.param("spanning", spanning);
    let sep = separated_count(&space, n, scale, method)?;
    let cylinders = space.count_language(scale.window(n))?;
    let span = if spanning {
        Some(spanning_count(&space, n, scale)? as u64)
    } else {
        None
    };
    let pass = sep.count == cylinders && span.is_none_or(|s| s as u128 == cylinders);
    Ok(Outcome::ok(json!({
        "separated": sep.count as u64,
        "method": sep.method,
        "spanning": span,
        "cylinders": cylinders as u64,
        "window": scale.window(n),
        "agree": pass,
    }))?
    .check(pass))
}

fn qbound(ctx: &mut Ctx, n: u64, delta: f64, series: bool) -> Result<Outcome, Error> {
    ctx.param("n", n);
    ctx.param("delta", delta);
    ctx.param("series", series);
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Invalid(format!(
            "--delta {delta} out of range: need 0 < delta < 1/2"
        )));
    }
    let n = ctx.length("n", n as usize)? as u64;
    let rows = if series {
        (1..=n)
            .map(|k| q_count_and_bound(k, delta))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![q_count_and_bound(n, delta)?]
    };
    let holds = rows.iter().all(|r| r.holds);
    let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n, "q": r.q as u64, "ln_q_over_n": r.ln_q_over_n,
                "bound": r.bound, "gap": r.gap, "holds": r.holds,
            })
        })
        .collect();
    Outcome::ok(json!({ "delta": delta, "holds": holds, "min_gap": min_gap, "rows": rows }))?.ledger(&[
        Constraint::new("0 < delta", 0.0, delta, true),
        Constraint::new("delta < 1/2", delta, 0.5, true),
    ])
}

fn trace(
    ctx: &mut Ctx,
    path: &Path,
    task_path: &Path,
    m: u32,
    z: Option<String>,
    max_gap: Option<usize>,
) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let scale = ctx.scale(m)?;
    let text = ctx.read("task", task_path)?;
    let task = OrbitTask::from_json(&text)
        .map_err(|e| Error::Invalid(format!("--task {}: {e}", task_path.display())))?;
    ctx.param("max_gap", max_gap);
    ctx.param("node_budget", ctx.global.node_budget);
    if let Some(z) = z {
        ctx.param("z", &z);
        let z: Word = z.parse()?;
        let report = verify_trace(&space, &z, &task, scale)?;
        let ok = report.ok;
        return Ok(Outcome::ok(json!({ "z": render(&z), "report": report }))?.check(ok));
    }
    let tracer = match max_gap {
        Some(g) => find_gluing_tracer(&space, &task, g, scale, ctx.global.node_budget)?,
        None => find_tracer(&space, &task, scale, ctx.global.node_budget)?,
    };
    let Some(t) = tracer else {
        return Outcome::ok(json!({ "found": false }));
    };
    let report = match &t.gaps {
        Some(g) => {
            let fixed = OrbitTask::exact(task.points.clone(), task.lengths.clone(), Some(g.clone()));
            verify_trace(&space, &t.z, &fixed, scale)?
        }
        None => {
            let mut fixed = task.clone();
            fixed.starts = Some(t.starts.clone());
            verify_trace(&space, &t.z, &fixed, scale)?
        }
    };
    let ok = report.ok;
    Ok(Outcome::ok(json!({
        "found": true,
        "z": render(&t.z),
        "starts": t.starts,
        "gaps": t.gaps,
        "report": report,
    }))?
    .check(ok))
}

fn gap(ctx: &mut Ctx, a: GapArgs) -> Result<Outcome, Error> {
    let space = ctx.space(&a.space)?;
    let scale = ctx.scale(a.scale)?;
    let property = match (&a.property, a.max_gap, a.delta1, a.delta2, a.n_min, a.n_max) {
        (Some(p), None, None, None, None, None) => {
            let text = ctx.read("property", p)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Invalid(format!("--property {}: {e}", p.display())))?
        }
        (None, Some(max_gap), None, None, None, None) => GapProperty::Gluing { max_gap },
        (None, None, Some(delta1), Some(delta2), Some(n_min), Some(n_max)) => {
            GapProperty::ApproximateProduct {
                delta1,
                delta2,
                n_min,
                n_max,
            }
        }
        _ => {
            return Err(Error::Invalid(
                "give --property, or --max-gap, or all of --delta1 --delta2 --n-min --n-max".into(),
            ))
        }
    };
    ctx.param("property", &property);
    let sampling = Sampling {
        seed: ctx.global.seed,
        tasks: a.tasks,
        max_segments: a.max_segments,
        max_segment_len: a.max_segment_len,
        exhaustive_len: a.exhaustive_len,
        node_budget: ctx.global.node_budget,
    };
    ctx.param("sampling", &sampling);
    Outcome::ok(estimate_gap(&space, scale, &property, &sampling)?)
}

fn construction(
    ctx: &mut Ctx,
    path: &Path,
    inputs: ConstructionInputs,
    depth: usize,
    measure: Option<PathBuf>,
    export: Option<PathBuf>,
) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let depth = ctx.length("depth", depth)?;
    ctx.param("inputs", &inputs);
    let mu = match &measure {
        Some(p) => ctx.measure("measure", p, &space)?,
        None => MarkovMeasure::max_entropy(&space)?,
    };
    let (report, lambda) = construct(&space, &mu, &inputs, depth)?;
    if let Some(p) = &export {
        ctx.param("export", p.display().to_string());
        fs::write(p, to_json(&lambda.export(space.alphabet()))?)?;
    }
    let pass = report.pass;
    let ledger = report.params.ledger.clone();
    let mut out = Outcome::ok(&report)?.ledger(&ledger)?;
    out = out.check(pass);
    Ok(out)
}

struct MeasureOpts {
    katok_n: Option<usize>,
    delta: f64,
    scale: u32,
    block_n: Option<usize>,
    other: Option<PathBuf>,
    depth: usize,
}

fn measure_cmd(ctx: &mut Ctx, path: &Path, measure: &Path, o: MeasureOpts) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let mu = ctx.measure("measure", measure, &space)?;
    let budget = ctx
        .global
        .max_words
        .unwrap_or(ergokit_core::shift::DEFAULT_BUDGET);
    let katok = match o.katok_n {
        Some(n) => {
            let n = ctx.length("katok_n", n)?;
            let scale = ctx.scale(o.scale)?;
            ctx.param("delta", o.delta);
            Some(katok_entropy_estimate(&mu, n, scale, o.delta, budget)?)
        }
        None => None,
    };
    let block = match o.block_n {
        Some(n) => Some(block_entropy(&mu, ctx.length("block_n", n)?, budget)?),
        None => None,
    };
    let distance = match &o.other {
        Some(p) => {
            let nu = ctx.measure("other", p, &space)?;
            ctx.param("depth", o.depth);
            let cfg = MeasureMetricConfig::new(o.depth, space.alphabet())?;
            Some(weak_metric(&mu, &nu, &cfg)?)
        }
        None => None,
    };
    Outcome::ok(json!({
        "matrix": mu.matrix(),
        "stationary": mu.stationary(),
        "entropy": mu.entropy(),
        "ergodic": mu.is_ergodic(),
        "stationarity_error": mu.stationarity_error(),
        "katok": katok,
        "block_entropy": block,
        "distance": distance,
    }))
}

#[derive(Serialize)]
struct PressureRow {
    n: usize,
    ln_sum: String,
    value: String,
    lower: Option<String>,
    upper: Option<String>,
}

fn fixed(x: f64) -> String {
    format!("{x:.16e}")
}

fn pressure(
    ctx: &mut Ctx,
    path: &Path,
    potential: &Path,
    n: usize,
    m: u32,
    measure: Option<PathBuf>,
) -> Result<Outcome, Error> {
    let space = ctx.space(path)?;
    let phi = ctx.potential(potential)?;
    let n = ctx.length("n", n)?;
    let scale = ctx.scale(m)?;
    let mut report = pressure_estimate(&space, &phi, n, scale)?;
    if let Some(p) = &measure {
        let mu = ctx.measure("measure", p, &space)?;
        report = report.with_measure(&mu, &phi)?;
    }
    let mut ledger = vec![Constraint::new("range <= m", phi.range() as f64, m as f64, false)];
    if let (Some(side), Some(reference)) = (report.measure_side, report.reference) {
        ledger.push(Constraint::new(
            "P_phi(mu) <= P(f, phi)",
            side,
            reference + 1e-12,
            false,
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &report.series {
        w.serialize(PressureRow {
            n: p.n,
            ln_sum: fixed(p.ln_sum),
            value: fixed(p.value),
            lower: p.interval.map(|i| fixed(i[0])),
            upper: p.interval.map(|i| fixed(i[1])),
        })
        .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let csv = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    let mut out = Outcome::ok(&report)?.ledger(&ledger)?;
    out.csv = Some(csv);
    Ok(out)
}

fn spectrum(
    ctx: &mut Ctx,
    space: Option<PathBuf>,
    potential: Option<PathBuf>,
    family: &str,
    target: Option<String>,
    pinf: Option<u32>,
) -> Result<Outcome, Error> {
    let space = match &space {
        Some(p) => ctx.space(p)?,
        None => ShiftSpace::full(2),
    };
    let phi = match &potential {
        Some(p) => Some(ctx.potential(p)?),
        None => None,
    };
    if let Some(k) = pinf {
        ctx.param("pinf", k);
        let phi = phi.ok_or_else(|| Error::Invalid("--pinf needs --potential".into()))?;
        let r = pinf_report(&space, &phi, k)?;
        let ledger = [Constraint::new(
            "chi_min <= P_inf estimate",
            r.chi_min,
            r.best_value,
            false,
        )];
        return Outcome::ok(&r)?.ledger(&ledger);
    }
    let family = if family == "bernoulli" {
        Family::bernoulli()
    } else {
        let text = ctx.read("family", Path::new(family))?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("--family {family}: {e}")))?
    };
    ctx.param("family", &family);
    let target: Target = target.unwrap_or_default().parse()?;
    ctx.param("target", target.to_string());
    let s = spectrum_solve(&space, phi.as_ref(), &family, target)?;
    let ledger = [
        Constraint::new("range low <= target", s.range[0], target.value(), false),
        Constraint::new("target <= range high", target.value(), s.range[1], false),
    ];
    Outcome::ok(&s)?.ledger(&ledger)
}
