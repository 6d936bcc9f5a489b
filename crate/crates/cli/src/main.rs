// SPDX-License-Identifier: MIT OR Apache-2.0

//! `knncp`: change-point detection on directed k-NN graphs.
//!
//! Exit codes: 0 on success (whether or not a change is found), 2 for
//! usage errors, 3 for data errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knncp::analytic::AnalyticContext;
use knncp::detector::{
    detect_multiple, detect_on_graph, DetectOptions, PValueMode,
    SegmentationOptions,
};
use knncp::edge_stats::Window;
use knncp::knn::build_graph;
use knncp::matrix_io::{load_matrix, write_report, Format};
use knncp::permutation::{permutation_critical_value, PermutationPlan};
use knncp::report::{format_p, ScanReport, SCHEMA_VERSION};
use knncp::simlab::{self, Marginal, Model, Scenario, StudyConfig, StudyOutput};
use knncp::{DataMatrix, DirectedKnnGraph, Error};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "knncp", version, about = "Change-point detection on directed k-NN graphs")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "KNNCP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test for a change-point, or estimate several with --multiple.
    Detect(DetectArgs),
    /// Critical value of the scan maximum at level alpha.
    Critval(CritvalArgs),
    /// Graph utilities.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Run a simulation study from a config file or preset.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Write the k-NN graph of a data file as a 1-based `source,target` CSV.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Raw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Analytic,
    Permutation,
    Both,
}

impl ModeArg {
    fn resolve(self) -> Option<PValueMode> {
        match self {
            ModeArg::Auto => None,
            ModeArg::Analytic => Some(PValueMode::Analytic),
            ModeArg::Permutation => Some(PValueMode::Permutation),
            ModeArg::Both => Some(PValueMode::Both),
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Observation matrix, one row per time point.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Input format; inferred from the extension (`.bin`/`.raw` are raw).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl InputArgs {
    fn load(&self) -> knncp::Result<DataMatrix> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--input is required".into()))?;
        let format = match self.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Raw) => Format::Raw,
            None => Format::from_path(path),
        };
        load_matrix(path, format)
    }
}

#[derive(Args)]
struct GraphArgs {
    /// Neighbors per observation.
    #[arg(long, default_value_t = 5, value_parser = positive)]
    k: u64,

    /// Approximation factor of the neighbor search; 0 is exact.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

#[derive(Args)]
struct WindowArgs {
    /// First candidate split (default ceil(0.05 n)).
    #[arg(long)]
    n0: Option<usize>,

    /// Last candidate split (default n - n0).
    #[arg(long)]
    n1: Option<usize>,
}

impl WindowArgs {
    fn window(&self, n: usize) -> Window {
        let base = match self.n0 {
            Some(n0) => Window::symmetric(n, n0),
            None => Window::default_for(n),
        };
        Window::new(self.n0.unwrap_or(base.n0), self.n1.unwrap_or(base.n1))
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Use a precomputed 1-based `source,target` edge CSV instead of
    /// building the graph.
    #[arg(long)]
    graph_in: Option<PathBuf>,

    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    window: WindowArgs,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,

    /// Permutation replicates.
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    permutations: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Print the JSON report on stdout instead of the summary.
    #[arg(long)]
    json: bool,

    /// Write per-t values (t, r1, r2, z_w, z_diff, m) as CSV.
    #[arg(long)]
    traces: Option<PathBuf>,

    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long)]
    timing: bool,

    /// Estimate multiple change-points by seeded binary segmentation.
    #[arg(long)]
    multiple: bool,

    /// Minimum segment length for --multiple (default max(10, ceil(0.1 n))).
    #[arg(long)]
    min_seg: Option<usize>,

    #[arg(long, default_value_t = 8)]
    max_depth: usize,

    /// Divide alpha by the number of seeded intervals.
    #[arg(long)]
    bonferroni: bool,
}

#[derive(Args)]
struct CritvalArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Generate the data instead: `table3` draws n = 1000 observations of
    /// dimension --dim from --family.
    #[arg(long)]
    preset: Option<String>,

    #[arg(long, default_value_t = 10)]
    dim: usize,

    /// Innovation family for --preset, e.g. normal, t(5), lognormal(0,1).
    #[arg(long, default_value = "normal")]
    family: String,

    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    window: WindowArgs,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    mode: ModeArg,

    #[arg(long, default_value_t = 10_000, value_parser = positive)]
    permutations: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    graph: GraphArgs,

    /// Destination CSV (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study configuration file (`key = value` lines).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named study design.
    #[arg(long)]
    preset: Option<String>,

    /// Override a configuration key, e.g. `--set replicates=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Destination CSV (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::UnknownFamily(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn check_params(alpha: f64, eps: f64) -> knncp::Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("--alpha {alpha} must lie in (0, 1)")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("--eps {eps} must be >= 0")));
    }
    Ok(())
}

fn out_writer(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn summary(report: &ScanReport) -> String {
    let r = &report.result;
    if !r.tested {
        return format!("not tested: {}", r.reason.as_deref().unwrap_or("unknown"));
    }
    let offset = report.params.offset.unwrap_or(0);
    let mut s = format!(
        "tau_hat = {}  max_stat = {:.4}",
        offset + r.tau_hat.unwrap_or(0),
        r.max_stat.unwrap_or(f64::NAN)
    );
    if let Some(p) = r.p_analytic {
        s += &format!("  p_analytic = {}", format_p(p));
    }
    if let Some(p) = r.p_perm {
        s += &format!("  p_perm = {}", format_p(p));
    }
    s += if report.rejected() {
        "  -> change detected"
    } else {
        "  -> no change"
    };
    s
}

fn cmd_detect(a: &DetectArgs) -> knncp::Result<()> {
    check_params(a.alpha, a.graph.eps)?;
    let started = Instant::now();
    let mut opts = DetectOptions {
        k: a.graph.k as usize,
        eps: a.graph.eps,
        window: None,
        alpha: a.alpha,
        mode: a.mode.resolve(),
        replicates: a.permutations as usize,
        seed: a.seed,
        traces: a.traces.is_some(),
        graph: Default::default(),
    };

    if a.multiple {
        if a.graph_in.is_some() {
            return Err(Error::InvalidParameter(
                "--multiple rebuilds graphs per interval and cannot use --graph-in".into(),
            ));
        }
        let data = a.input.load()?;
        let seg = SegmentationOptions {
            detect: opts,
            min_seg: a.min_seg,
            max_depth: a.max_depth,
            bonferroni: a.bonferroni,
        };
        let res = detect_multiple(&data, &seg)?;
        let reports: Vec<serde_json::Value> = res
            .reports
            .iter()
            .map(serde_json::to_value)
            .collect::<Result<_, _>>()?;
        let skipped = res.schedule.iter().filter(|t| t.skipped.is_some()).count();
        let mut diagnostics = serde_json::json!({ "skipped_intervals": skipped });
        if a.timing {
            diagnostics["runtime_ms"] = (started.elapsed().as_millis() as u64).into();
        }
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "input": { "n": data.n(), "d": data.d() },
            "params": {
                "k": a.graph.k,
                "eps": a.graph.eps,
                "alpha": a.alpha,
                "alpha_per_test": res.alpha_per_test,
                "min_seg": res.min_seg,
                "max_depth": a.max_depth,
                "bonferroni": a.bonferroni,
                "intervals": res.schedule.len(),
                "seed": a.seed,
            },
            "result": { "change_points": res.change_points, "reports": reports },
            "diagnostics": diagnostics,
        });
        let text = serde_json::to_string(&doc)?;
        if let Some(path) = &a.output {
            std::fs::write(path, text.clone() + "\n")?;
        }
        if a.json {
            println!("{text}");
        } else if res.change_points.is_empty() {
            println!("no change-points detected");
        } else {
            for r in &res.reports {
                println!("{}", summary(r));
            }
        }
        return Ok(());
    }

    let (g, d) = match &a.graph_in {
        Some(path) => {
            let g = DirectedKnnGraph::read_edge_csv(BufReader::new(File::open(path)?))?;
            (g, None)
        }
        None => {
            let data = a.input.load()?;
            let d = data.d();
            (build_graph(&data, opts.k, opts.eps)?, Some(d))
        }
    };
    opts.window = Some(a.window.window(g.n()));
    if a.graph_in.is_some() {
        opts.k = g.k();
    }
    let mut report = detect_on_graph(&g, d, &opts)?;
    if a.timing {
        report.diagnostics.runtime_ms = Some(started.elapsed().as_millis() as u64);
    }
    if let Some(path) = &a.output {
        write_report(&report, path, a.traces.as_deref())?;
    } else if let Some(tr) = &a.traces {
        let tmp = tr.with_extension("json.tmp");
        write_report(&report, &tmp, Some(tr))?;
        std::fs::remove_file(tmp)?;
    }
    if a.json {
        println!("{}", report.to_json_string()?);
    } else {
        println!("{}", summary(&report));
    }
    Ok(())
}

fn cmd_critval(a: &CritvalArgs) -> knncp::Result<()> {
    check_params(a.alpha, a.graph.eps)?;
    let data = match a.preset.as_deref() {
        Some("table3") => {
            let family: Marginal = a.family.parse()?;
            let s = Scenario {
                name: "table3".into(),
                n: 1000,
                d: a.dim,
                tau: None,
                f0: Model::iid(family),
                f1: Model::iid(family),
                seed: a.seed,
            };
            simlab::generate(&s, 0)?
        }
        Some(other) => return Err(Error::UnknownFamily(other.to_string())),
        None => a.input.load()?,
    };
    let g = build_graph(&data, a.graph.k as usize, a.graph.eps)?;
    let window = a.window.window(g.n());
    let mode = a.mode.resolve().unwrap_or_else(|| PValueMode::auto(g.n()));
    if matches!(mode, PValueMode::Analytic | PValueMode::Both) {
        let b = AnalyticContext::from_graph(&g, window)?.critical_value(a.alpha)?;
        println!("analytic {b:.3}");
    }
    if matches!(mode, PValueMode::Permutation | PValueMode::Both) {
        let plan = PermutationPlan::new(a.permutations as usize, a.seed, window)?;
        let b = permutation_critical_value(&g, a.alpha, &plan)?;
        println!("permutation {b:.3}");
    }
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> knncp::Result<()> {
    check_params(0.5, a.graph.eps)?;
    let data = a.input.load()?;
    let g = build_graph(&data, a.graph.k as usize, a.graph.eps)?;
    let mut w = out_writer(a.output.as_deref())?;
    g.write_edge_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> knncp::Result<()> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => StudyConfig::parse(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => simlab::preset(name)?,
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "give --config or --preset (one of {})",
                simlab::preset_names().join(", ")
            )))
        }
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let out = simlab::run_study(&cfg)?;
    let mut w = out_writer(a.output.as_deref())?;
    out.write_csv(&mut w)?;
    w.flush()?;
    if a.output.is_some() {
        let rows = match &out {
            StudyOutput::Size(r) => r.len(),
            StudyOutput::Power(r) | StudyOutput::Type2(r) => r.len(),
            StudyOutput::Sensitivity(r) => r.len(),
        };
        println!("{} study: {rows} rows written", cfg.study);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let res = match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Critval(a) => cmd_critval(a),
        Command::Graph(GraphCommand::Export(a)) => cmd_export(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
