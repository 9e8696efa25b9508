use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use hankelnet::config::{parse_base, parse_r_mode, IntegrandKind, SweepConfig};
use hankelnet::io::{fmt_real, write_points_csv, write_records_csv, write_records_json, RecordJson};
use hankelnet::sweep::{run_sweep, write_summary_csv, write_sweep, SummaryRow};
use hankelnet_core::walshlab::{dual_prob_exact, mc_dual_prob, t_parameter};
use hankelnet_core::wce::omega;
use hankelnet_core::{
    default_precision, draw_design, gen_points_gray, greedy_select, mse_experiment, omega_series, DesignKind,
    EstimatorConfig, IndexVector, NetDesign, PrimeBase, RMode, RngSeed, WeightMode,
};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hankelnet", about = "Randomized digital nets: generation, estimation and probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump the points of one randomized net.
    Gen(GenArgs),
    /// Plain randomized QMC estimates, one net per batch.
    Estimate(EstimateArgs),
    /// Median-of-means estimates over r independent nets per batch.
    Mom(EstimateArgs),
    /// Best-of-r selection by the worst-case error bound.
    Optimize(OptimizeArgs),
    /// t-parameter of a drawn net, optionally averaged over independent draws.
    Tparam(TparamArgs),
    /// Probability that an index vector lies in the dual net.
    Dualprob(DualprobArgs),
    /// The kernel function omega_{alpha+1}(x).
    Omega(OmegaArgs),
    /// Convergence sweep over a range of m.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_design(s: &str) -> Result<DesignKind, String> {
    s.parse().map_err(|e: hankelnet_core::Error| e.to_string())
}

fn parse_weights(s: &str) -> Result<WeightMode, String> {
    s.parse().map_err(|e: hankelnet_core::Error| e.to_string())
}

#[derive(Debug, Args)]
struct NetArgs {
    #[arg(long, default_value = "hrd", value_parser = parse_design)]
    design: DesignKind,
    #[arg(long, default_value = "2", value_parser = parse_base)]
    base: PrimeBase,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Digits per coordinate (default: largest with b^E <= 2^53).
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, overrides_with = "no_shift")]
    shift: bool,
    #[arg(long = "no-shift", overrides_with = "shift")]
    no_shift: bool,
}

impl NetArgs {
    fn precision(&self) -> usize {
        self.precision.unwrap_or_else(|| default_precision(self.base))
    }

    fn with_shift(&self, default: bool) -> bool {
        if self.shift {
            true
        } else if self.no_shift {
            false
        } else {
            default
        }
    }

    fn draw(&self, seed: u64, shift: bool) -> Result<NetDesign> {
        Ok(draw_design(self.design, RngSeed::new(seed), self.base, self.precision(), self.m, self.dim, shift)?)
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutArgs {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Debug, Args)]
struct IntegrandArgs {
    #[arg(long, default_value = "product_power")]
    integrand: IntegrandKind,
    /// Exponent of the product-power integrand; also sets the exponential weight rate ceil(c).
    #[arg(long, default_value_t = 1.5)]
    c: f64,
    #[arg(long, default_value = "exp", value_parser = parse_weights)]
    weights: WeightMode,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    #[arg(long)]
    r: Option<usize>,
    /// fixed or m_log_m
    #[arg(long = "r-mode")]
    r_mode: Option<String>,
    /// Logarithm base for m_log_m (default e).
    #[arg(long = "r-log-base")]
    r_log_base: Option<f64>,
}

impl ReplicateArgs {
    fn mode(&self) -> Result<RMode, String> {
        let mode = match &self.r_mode {
            Some(text) => parse_r_mode(text)?,
            None => RMode::default(),
        };
        Ok(match mode {
            RMode::MLogM { log_base } => RMode::MLogM { log_base: self.r_log_base.unwrap_or(log_base) },
            RMode::Fixed(default) => RMode::Fixed(self.r.unwrap_or(default)),
        })
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    integrand: IntegrandArgs,
    #[command(flatten)]
    replicates: ReplicateArgs,
    #[arg(long, default_value_t = 1)]
    batches: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Smoothness of the bound: 1 uses omega_2, 2 uses omega_3.
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Weight rate: gamma_j = exp(-ceil(c) j) with --weights exp.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value = "exp", value_parser = parse_weights)]
    weights: WeightMode,
    #[arg(long, default_value_t = 15)]
    r: usize,
    /// Also dump the points of the selected net to this file.
    #[arg(long)]
    points: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct TparamArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Independent draws for the averaged t-parameter.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct DualprobArgs {
    #[arg(long, default_value = "hrd", value_parser = parse_design)]
    design: DesignKind,
    #[arg(long, default_value = "2", value_parser = parse_base)]
    base: PrimeBase,
    #[arg(long, default_value_t = 6)]
    m: usize,
    /// Index vector, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct OmegaArgs {
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, default_value = "2", value_parser = parse_base)]
    base: PrimeBase,
    /// Truncation of the series used outside the closed forms.
    #[arg(long = "k-max", default_value_t = 1 << 20)]
    k_max: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Flat key = value sweep configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_design)]
    design: Vec<DesignKind>,
    #[arg(long, value_delimiter = ',', value_parser = parse_base)]
    base: Vec<PrimeBase>,
    #[arg(long = "m-min")]
    m_min: Option<usize>,
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    /// Single m, shorthand for --m-min m --m-max m.
    #[arg(long, conflicts_with_all = ["m_min", "m_max"])]
    m: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    integrand: Option<IntegrandKind>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_parser = parse_weights)]
    weights: Option<WeightMode>,
    #[command(flatten)]
    replicates: ReplicateArgs,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let design = args.net.draw(args.out.seed, args.net.with_shift(false))?;
    let points = gen_points_gray(&design);
    let mut w = args.out.writer()?;
    match args.out.format(Format::Csv) {
        Format::Csv => write_points_csv(&mut w, &points)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Dump<'a> {
                design_kind: &'static str,
                b: u8,
                m: usize,
                s: usize,
                seed: u64,
                points: Vec<&'a [f64]>,
            }
            let dump = Dump {
                design_kind: args.net.design.name(),
                b: design.base().get(),
                m: design.m(),
                s: design.dim(),
                seed: args.out.seed,
                points: points.iter().collect(),
            };
            serde_json::to_writer(&mut w, &dump)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run_estimate(args: &EstimateArgs, r_mode: RMode) -> Result<()> {
    let net = &args.net;
    let f = args.integrand.integrand.build(net.dim, args.integrand.c, args.integrand.weights, net.base)?;
    let weight_mode = (args.integrand.integrand == IntegrandKind::ProductPower).then_some(args.integrand.weights);
    let config = EstimatorConfig {
        design: net.design,
        base: net.base,
        precision: net.precision(),
        m: net.m,
        s: net.dim,
        r_mode,
        shift: net.with_shift(true),
        seed: RngSeed::new(args.out.seed),
    };
    let summary = mse_experiment(&f, weight_mode, &config, args.batches)?;
    let mut w = args.out.writer()?;
    match args.out.format(Format::Csv) {
        Format::Csv => write_records_csv(&mut w, &summary.records)?,
        Format::Json => write_records_json(&mut w, &summary.records)?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizeJson {
    design_kind: &'static str,
    b: u8,
    m: usize,
    s: usize,
    alpha: u32,
    r: usize,
    seed: u64,
    wce_values: Vec<f64>,
    best_index: usize,
    best_wce: f64,
}

fn run_optimize(args: &OptimizeArgs) -> Result<()> {
    let net = &args.net;
    if net.with_shift(false) {
        usage_error(ErrorKind::ArgumentConflict, "optimize evaluates the bound on unshifted nets; drop --shift");
    }
    let gamma = args.weights.weights(net.dim, args.c);
    let best = greedy_select(
        RngSeed::new(args.out.seed),
        args.r,
        net.base,
        net.precision(),
        net.m,
        &gamma,
        args.alpha,
        net.design,
    )?;
    if let Some(path) = &args.points {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut pw = BufWriter::new(file);
        write_points_csv(&mut pw, &gen_points_gray(&best.design))?;
        pw.flush()?;
    }
    let mut w = args.out.writer()?;
    match args.out.format(Format::Json) {
        Format::Json => {
            let record = OptimizeJson {
                design_kind: net.design.name(),
                b: net.base.get(),
                m: net.m,
                s: net.dim,
                alpha: args.alpha,
                r: args.r,
                seed: args.out.seed,
                wce_values: best.values.clone(),
                best_index: best.best_index,
                best_wce: best.best_wce,
            };
            serde_json::to_writer(&mut w, &record)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut cw = csv::Writer::from_writer(&mut w);
            cw.write_record(["index", "wce", "best"])?;
            for (i, v) in best.values.iter().enumerate() {
                cw.write_record([i.to_string(), fmt_real(*v), u8::from(i == best.best_index).to_string()])?;
            }
            cw.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ProbeJson {
    design_kind: &'static str,
    b: u8,
    m: usize,
    s: usize,
    k: Option<Vec<u64>>,
    exact: Option<f64>,
    mc_estimate: Option<f64>,
    mc_stderr: Option<f64>,
    trials: usize,
    seed: u64,
}

fn write_probe(out: &OutArgs, record: &ProbeJson) -> Result<()> {
    let mut w = out.writer()?;
    match out.format(Format::Json) {
        Format::Json => {
            serde_json::to_writer(&mut w, record)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
            let k = record.k.as_ref().map(|k| k.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
            let mut cw = csv::Writer::from_writer(&mut w);
            cw.write_record([
                "design_kind",
                "b",
                "m",
                "s",
                "k",
                "exact",
                "mc_estimate",
                "mc_stderr",
                "trials",
                "seed",
            ])?;
            cw.write_record([
                record.design_kind.to_string(),
                record.b.to_string(),
                record.m.to_string(),
                record.s.to_string(),
                k.unwrap_or_default(),
                opt(record.exact),
                opt(record.mc_estimate),
                opt(record.mc_stderr),
                record.trials.to_string(),
                record.seed.to_string(),
            ])?;
            cw.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run_tparam(args: &TparamArgs) -> Result<()> {
    let net = &args.net;
    let seed = RngSeed::new(args.out.seed);
    let draw = |sd: RngSeed| draw_design(net.design, sd, net.base, net.precision(), net.m, net.dim, false);
    let exact = t_parameter(&draw(seed)?)? as f64;
    let (mc_estimate, mc_stderr) = if args.trials > 0 {
        let ts = (0..args.trials)
            .map(|i| Ok(t_parameter(&draw(seed.derive("trial", i as u64))?)? as f64))
            .collect::<Result<Vec<f64>>>()?;
        let n = ts.len() as f64;
        let mean = ts.iter().sum::<f64>() / n;
        let var = if ts.len() > 1 { ts.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (Some(mean), Some((var / n).sqrt()))
    } else {
        (None, None)
    };
    write_probe(
        &args.out,
        &ProbeJson {
            design_kind: net.design.name(),
            b: net.base.get(),
            m: net.m,
            s: net.dim,
            k: None,
            exact: Some(exact),
            mc_estimate,
            mc_stderr,
            trials: args.trials,
            seed: args.out.seed,
        },
    )
}

fn run_dualprob(args: &DualprobArgs) -> Result<()> {
    let k = IndexVector::new(args.k.clone());
    if k.is_zero() {
        usage_error(ErrorKind::InvalidValue, "--k must have a nonzero component");
    }
    let exact = match args.design {
        DesignKind::LmsSobol => None,
        kind => Some(dual_prob_exact(std::slice::from_ref(&k), args.base, args.m, kind)?),
    };
    let (mc_estimate, mc_stderr) = if args.trials > 0 {
        let est = mc_dual_prob(RngSeed::new(args.out.seed), &k, args.base, args.m, args.design, None, args.trials)?;
        (Some(est.estimate), Some(est.stderr))
    } else {
        (None, None)
    };
    write_probe(
        &args.out,
        &ProbeJson {
            design_kind: args.design.name(),
            b: args.base.get(),
            m: args.m,
            s: k.dim(),
            k: Some(args.k.clone()),
            exact,
            mc_estimate,
            mc_stderr,
            trials: args.trials,
            seed: args.out.seed,
        },
    )
}

fn run_omega(args: &OmegaArgs) -> Result<()> {
    if !(0.0..1.0).contains(&args.x) {
        usage_error(ErrorKind::InvalidValue, "--x must lie in [0, 1)");
    }
    let (value, tail) = if args.base.get() == 2 && matches!(args.alpha, 1 | 2) {
        (omega(args.x, args.alpha)?, 0.0)
    } else {
        omega_series(args.x, args.alpha, args.base, args.k_max)
    };
    let mut w = args.out.writer()?;
    match args.out.format {
        None => writeln!(w, "{value}")?,
        Some(Format::Json) => {
            #[derive(Serialize)]
            struct OmegaJson {
                alpha: u32,
                b: u8,
                x: f64,
                value: f64,
                tail_bound: f64,
            }
            let record = OmegaJson { alpha: args.alpha, b: args.base.get(), x: args.x, value, tail_bound: tail };
            serde_json::to_writer(&mut w, &record)?;
            writeln!(w)?;
        }
        Some(Format::Csv) => {
            writeln!(w, "alpha,b,x,value,tail_bound")?;
            writeln!(
                w,
                "{},{},{},{},{}",
                args.alpha,
                args.base.get(),
                fmt_real(args.x),
                fmt_real(value),
                fmt_real(tail)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bench_config(args: &BenchArgs) -> Result<SweepConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            SweepConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SweepConfig::default(),
    };
    if !args.design.is_empty() {
        cfg.designs = args.design.clone();
    }
    if !args.base.is_empty() {
        cfg.bases = args.base.clone();
    }
    if let Some(m) = args.m {
        cfg.m_min = m;
        cfg.m_max = m;
    }
    cfg.m_min = args.m_min.unwrap_or(cfg.m_min);
    cfg.m_max = args.m_max.unwrap_or(cfg.m_max);
    cfg.s = args.dim.unwrap_or(cfg.s);
    cfg.integrand = args.integrand.unwrap_or(cfg.integrand);
    cfg.c = args.c.unwrap_or(cfg.c);
    cfg.weight_mode = args.weights.unwrap_or(cfg.weight_mode);
    let rep = &args.replicates;
    if rep.r.is_some() || rep.r_mode.is_some() || rep.r_log_base.is_some() {
        cfg.r_mode = rep.mode().unwrap_or_else(|e| usage_error(ErrorKind::InvalidValue, e));
    }
    cfg.batches = args.batches.unwrap_or(cfg.batches);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    Ok(cfg)
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let cfg = bench_config(args)?;
    if let Err(e) = cfg.validate() {
        usage_error(ErrorKind::InvalidValue, e);
    }
    let result = run_sweep(&cfg)?;
    match (args.format.unwrap_or(Format::Csv), &cfg.out) {
        (Format::Csv, Some(out)) => {
            let summary = write_sweep(&result, out)?;
            eprintln!("wrote {} and {}", out.display(), summary.display());
        }
        (Format::Csv, None) => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_records_csv(&mut w, &result.records)?;
            w.flush()?;
            write_summary_csv(io::stderr().lock(), &result.summary)?;
        }
        (Format::Json, out) => {
            #[derive(Serialize)]
            struct SummaryJson {
                design: &'static str,
                b: u8,
                m: usize,
                median_sq_error: f64,
                mean_sq_error: f64,
                q1: f64,
                q3: f64,
                log2_slope: Option<f64>,
            }
            impl From<&SummaryRow> for SummaryJson {
                fn from(r: &SummaryRow) -> Self {
                    SummaryJson {
                        design: r.design,
                        b: r.b,
                        m: r.m,
                        median_sq_error: r.median_sq_error,
                        mean_sq_error: r.mean_sq_error,
                        q1: r.q1,
                        q3: r.q3,
                        log2_slope: r.log2_slope,
                    }
                }
            }
            #[derive(Serialize)]
            struct SweepJson {
                records: Vec<RecordJson>,
                summary: Vec<SummaryJson>,
            }
            let doc = SweepJson {
                records: result.records.iter().map(RecordJson::from).collect(),
                summary: result.summary.iter().map(SummaryJson::from).collect(),
            };
            let mut w: Box<dyn Write> = match out {
                Some(path) => Box::new(BufWriter::new(
                    File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
                )),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => run_gen(&args),
        Command::Estimate(args) => {
            if args.replicates.r.is_some_and(|r| r != 1) || args.replicates.r_mode.is_some() {
                usage_error(ErrorKind::ArgumentConflict, "estimate uses one net per batch; use mom for r > 1");
            }
            run_estimate(&args, RMode::Fixed(1))
        }
        Command::Mom(args) => {
            let mode = args.replicates.mode().unwrap_or_else(|e| usage_error(ErrorKind::InvalidValue, e));
            run_estimate(&args, mode)
        }
        Command::Optimize(args) => run_optimize(&args),
        Command::Tparam(args) => run_tparam(&args),
        Command::Dualprob(args) => run_dualprob(&args),
        Command::Omega(args) => run_omega(&args),
        Command::Bench(args) => run_bench(&args),
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().version(hankelnet::version_string()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
