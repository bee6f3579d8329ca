//! Command-line front end: certification, bound inspection, relaxation
//! visualization, and fixture generation.
//!
//! Exit codes of `certify`: 0 certified, 1 unknown, 2 falsified; any error
//! (bad files, bad flags, method failures) exits with 3.

mod gen;
mod report;
mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use relucert::{
    certify_greedy, certify_krelu, certify_lp, exact_certify, ibp_bounds, krelu_layer_bounds,
    linear_bounds, lp_layer_bounds, BoundSource, CertificationResult, GreedyMethod, LayerBounds,
    Network, NormOrder, RelaxationMode, UncertaintySet,
};
use report::{BoundsEntry, BoundsReport, RunReport, SetSpec, Timings};

#[derive(Parser)]
#[command(
    name = "relucert",
    version,
    about = "Robustness certification for ReLU feedforward networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify robustness of a network at an input point.
    Certify(CertifyArgs),
    /// Emit per-layer pre-activation bounds for one or more methods.
    Bounds(BoundsArgs),
    /// Render the relaxation geometry of a two-neuron first layer as SVG.
    Visualize(VisualizeArgs),
    /// Generate a seeded random network fixture.
    Generate(GenerateArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Method {
    Ibp,
    Fastlin,
    Crown,
    Lp,
    #[value(name = "lp-recursive")]
    LpRecursive,
    Krelu,
    Exact,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Mode {
    Fastlin,
    Crown,
}

impl Mode {
    fn relaxation(self) -> RelaxationMode {
        match self {
            Mode::Fastlin => RelaxationMode::SameSlope,
            Mode::Crown => RelaxationMode::Adaptive,
        }
    }

    fn greedy(self) -> GreedyMethod {
        match self {
            Mode::Fastlin => GreedyMethod::FastLin,
            Mode::Crown => GreedyMethod::Crown,
        }
    }
}

/// Flags shared by every command that reads a network and an input region.
#[derive(Args)]
struct ProblemArgs {
    /// Network file (JSON).
    #[arg(long)]
    network: PathBuf,
    /// Input point file (JSON array of reals).
    #[arg(long, conflicts_with = "input_vec")]
    input: Option<PathBuf>,
    /// Input point as comma-separated values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    input_vec: Option<Vec<f64>>,
    /// Perturbation radius of the lp-ball.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Ball norm: 1, 2, or inf.
    #[arg(long, default_value = "inf")]
    norm: String,
    /// Per-coordinate box margins file (JSON {"eps_lo": [...], "eps_hi": [...]}),
    /// used instead of a ball.
    #[arg(long = "box", conflicts_with_all = ["epsilon", "norm"])]
    box_file: Option<PathBuf>,
}

impl ProblemArgs {
    fn load(&self) -> Result<(Network, Array1<f64>, UncertaintySet)> {
        let net = Network::load(&self.network)
            .with_context(|| format!("reading network {}", self.network.display()))?;
        let input: Vec<f64> = match (&self.input, &self.input_vec) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading input {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing input {}", path.display()))?
            }
            (None, Some(vec)) => vec.clone(),
            (None, None) => bail!("one of --input or --input-vec is required"),
            (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
        };
        if input.len() != net.input_dim() {
            bail!(
                "input has {} coordinates but the network expects {}",
                input.len(),
                net.input_dim()
            );
        }
        let set = match &self.box_file {
            Some(path) => {
                #[derive(serde::Deserialize)]
                struct BoxSpec {
                    eps_lo: Vec<f64>,
                    eps_hi: Vec<f64>,
                }
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading box {}", path.display()))?;
                let spec: BoxSpec = serde_json::from_str(&text)
                    .with_context(|| format!("parsing box {}", path.display()))?;
                UncertaintySet::Box {
                    center: input.clone(),
                    eps_lo: spec.eps_lo,
                    eps_hi: spec.eps_hi,
                }
            }
            None => UncertaintySet::Ball {
                center: input.clone(),
                radius: self.epsilon,
                p: parse_norm(&self.norm)?,
            },
        };
        set.validate()?;
        Ok((net, Array1::from_vec(input), set))
    }
}

fn parse_norm(s: &str) -> Result<NormOrder> {
    match s {
        "1" => Ok(NormOrder::One),
        "2" => Ok(NormOrder::Two),
        "inf" | "Inf" | "INF" => Ok(NormOrder::Inf),
        other => bail!("unsupported norm {other:?}; expected 1, 2, or inf"),
    }
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Certification method.
    #[arg(long, value_enum)]
    method: Method,
    /// Group size for the multi-neuron method.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Baseline relaxation slope selection.
    #[arg(long, value_enum, default_value_t = Mode::Crown)]
    mode: Mode,
    /// Unstable-neuron budget of the exact method.
    #[arg(long, default_value_t = relucert::certify::DEFAULT_EXACT_BUDGET)]
    budget: usize,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated bound methods (ibp, fastlin, crown, lp-recursive, krelu).
    #[arg(long, value_delimiter = ',', default_value = "ibp,fastlin")]
    method: Vec<String>,
    /// Group size for the multi-neuron method.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Baseline relaxation slope selection.
    #[arg(long, value_enum, default_value_t = Mode::Crown)]
    mode: Mode,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VisualizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output SVG path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated layer widths, input first (e.g. 2,2,1).
    #[arg(long, value_delimiter = ',')]
    widths: Vec<usize>,
    /// Output network path.
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Certify(args) => cmd_certify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Visualize(args) => cmd_visualize(args),
        Command::Generate(args) => cmd_generate(args),
    }
}

fn cmd_certify(args: CertifyArgs) -> Result<u8> {
    let (net, x, set) = args.problem.load()?;
    let mode = args.mode;
    let result: CertificationResult = match args.method {
        Method::Ibp => certify_greedy(&net, &x, &set, GreedyMethod::Ibp)?,
        Method::Fastlin => certify_greedy(&net, &x, &set, GreedyMethod::FastLin)?,
        Method::Crown => certify_greedy(&net, &x, &set, GreedyMethod::Crown)?,
        Method::Lp => certify_lp(&net, &x, &set, BoundSource::Greedy(mode.greedy()))?,
        Method::LpRecursive => certify_lp(&net, &x, &set, BoundSource::LpRecursive)?,
        Method::Krelu => certify_krelu(&net, &x, &set, args.k, mode.relaxation())?,
        Method::Exact => exact_certify(&net, &x, &set, args.budget)?,
    };
    let (k, mode_tag) = match args.method {
        Method::Krelu => (Some(args.k), Some(mode_name(mode).to_string())),
        Method::Lp => (None, Some(mode_name(mode).to_string())),
        _ => (None, None),
    };
    let report = RunReport::new(
        args.problem.network.display().to_string(),
        x.to_vec(),
        &set,
        k,
        mode_tag,
        &result,
    );
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = &args.output {
        write_file(path, &text)?;
    }
    Ok(report.exit_code())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Fastlin => "fastlin",
        Mode::Crown => "crown",
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<u8> {
    let started = Instant::now();
    let (net, x, set) = args.problem.load()?;
    let mut entries: BTreeMap<String, BoundsEntry> = BTreeMap::new();
    for name in &args.method {
        let bounds: LayerBounds = match name.as_str() {
            "ibp" => ibp_bounds(&net, &set)?,
            "fastlin" => linear_bounds(&net, &set, RelaxationMode::SameSlope)?,
            "crown" => linear_bounds(&net, &set, RelaxationMode::Adaptive)?,
            "lp-recursive" => lp_layer_bounds(&net, &set, BoundSource::LpRecursive)?,
            "krelu" => krelu_layer_bounds(&net, &set, args.k, args.mode.relaxation())?,
            other => bail!("unsupported bounds method {other:?}"),
        };
        entries.insert(name.clone(), BoundsEntry::from_bounds(&bounds));
    }
    let report = BoundsReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        network: args.problem.network.display().to_string(),
        input: x.to_vec(),
        set: SetSpec::from_set(&set),
        bounds: entries,
        timings: Timings {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
        },
    };
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = &args.output {
        write_file(path, &text)?;
    }
    Ok(0)
}

fn cmd_visualize(args: VisualizeArgs) -> Result<u8> {
    let (net, _x, set) = args.problem.load()?;
    let svg = svg::render_layer_one(&net, &set)?;
    write_file(&args.output, &svg)?;
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let net = gen::generate(args.seed, &args.widths)?;
    net.save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
