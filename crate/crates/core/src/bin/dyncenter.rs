use std::fs;
use std::io::{self, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dyncenter::analysis::analyze;
use dyncenter::engine::{evaluate, ProductionPlan};
use dyncenter::io_core::{load_io_table, TableFormat};
use dyncenter::linkage::VThresholdRule;
use dyncenter::merger::{hhi, screen, MergerScenario};
use dyncenter::store::{Kind, Store};
use dyncenter::structure::{Basis, EntropyVariant, GiOrientation, StructureOptions, DEFAULT_ALPHA_RANK_WEIGHT};
use dyncenter::tech::{assess, validate_scaling_property, TccReport, TechnologyProfile};

const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "dyncenter", version, about = "Input-output analysis, technology scoring, merger screening and plan evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Input-output table analysis
    Io {
        #[command(subcommand)]
        command: IoCommand,
    },
    /// Concentration G, entropy H and the general index per sector
    Entropy(EntropyArgs),
    /// Herfindahl-Hirschman index, optionally screening a merger
    Hhi(HhiArgs),
    /// Technology content coefficient and added value from a profile
    Tcc(TccArgs),
    /// Production-plan evaluation
    Plan {
        #[command(subcommand)]
        command: PlanCommand,
    },
    /// Run the HTTP API
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum IoCommand {
    /// Dispersion indices and key sectors, then G, H and the general index
    Analyze(AnalyzeArgs),
}

#[derive(Subcommand)]
enum PlanCommand {
    /// Classify and evaluate a plan given as JSON
    Evaluate(PlanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Csv,
    Json,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Table CSV: sector,<labels...>,final_demand,gross_output
    table: PathBuf,
    /// Fixed V cut-off for backward linkage (median when omitted)
    #[arg(long, requires = "v_forward")]
    v_backward: Option<f64>,
    /// Fixed V cut-off for forward linkage
    #[arg(long, requires = "v_backward")]
    v_forward: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Output,
    /// Also write linkage.csv and structure.csv into this directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    table: PathBuf,
    /// Include final demand in the row shares
    #[arg(long)]
    with_final_demand: bool,
    /// Take shares from the Leontief inverse instead of A
    #[arg(long)]
    total_requirements: bool,
    /// Weight of the concentration rank in the general index
    #[arg(long, default_value_t = DEFAULT_ALPHA_RANK_WEIGHT)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "backward")]
    gi: GiArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum GiArg {
    Backward,
    Forward,
}

#[derive(Args)]
struct HhiArgs {
    /// Market shares in percent, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    shares: Vec<f64>,
    /// Zero-based indices of the two merging firms, e.g. 0,1
    #[arg(long, value_delimiter = ',', num_args = 1)]
    merge: Option<Vec<usize>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TccArgs {
    /// Profile JSON with T, I, H, O, beta, alpha and eva
    #[arg(long)]
    profile: PathBuf,
    /// Also check the scaling property for scores multiplied by 1 + k
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlanArgs {
    plan: PathBuf,
    /// Record the plan and its evaluation in this store
    #[arg(long, env = "DC_STORE_DIR")]
    store: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "DC_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "DC_STORE_DIR", default_value = "./dc-store")]
    store: PathBuf,
    #[arg(long, default_value_t = Ipv4Addr::LOCALHOST)]
    bind: Ipv4Addr,
}

enum Failure {
    Invalid(String),
    Internal(String),
}

impl Failure {
    fn invalid(e: impl ToString) -> Self {
        Failure::Invalid(e.to_string())
    }

    fn internal(e: impl ToString) -> Self {
        Failure::Internal(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(out: &mut impl Write, value: &T) -> CliResult {
    serde_json::to_writer_pretty(&mut *out, value).map_err(Failure::internal)?;
    writeln!(out).map_err(Failure::internal)
}

fn io_analyze(args: AnalyzeArgs, out: &mut impl Write) -> CliResult {
    let table = load_io_table(&args.table, TableFormat::Csv).map_err(Failure::invalid)?;
    let rule = match (args.v_backward, args.v_forward) {
        (Some(backward), Some(forward)) => VThresholdRule::Fixed { backward, forward },
        _ => VThresholdRule::Median,
    };
    let analysis = analyze(&table, rule, StructureOptions::default()).map_err(Failure::invalid)?;
    if let Output::Json = args.format {
        return print_json(out, &serde_json::json!({
            "linkage": analysis.linkage,
            "structure": analysis.structure,
        }));
    }
    let mut linkage = Vec::new();
    analysis.linkage.write_csv(&mut linkage).map_err(Failure::internal)?;
    let mut structure = Vec::new();
    analysis
        .structure
        .write_csv(&mut structure, GiOrientation::Backward)
        .map_err(Failure::internal)?;
    if let Some(dir) = args.out_dir {
        fs::create_dir_all(&dir).map_err(Failure::internal)?;
        fs::write(dir.join("linkage.csv"), &linkage).map_err(Failure::internal)?;
        fs::write(dir.join("structure.csv"), &structure).map_err(Failure::internal)?;
    }
    // two CSV blocks separated by one empty line
    out.write_all(&linkage).map_err(Failure::internal)?;
    writeln!(out).map_err(Failure::internal)?;
    out.write_all(&structure).map_err(Failure::internal)
}

fn entropy(args: EntropyArgs, out: &mut impl Write) -> CliResult {
    let table = load_io_table(&args.table, TableFormat::Csv).map_err(Failure::invalid)?;
    let opts = StructureOptions {
        basis: if args.total_requirements {
            Basis::TotalRequirements
        } else {
            Basis::Coefficients
        },
        entropy_variant: if args.with_final_demand {
            EntropyVariant::WithFinalDemand
        } else {
            EntropyVariant::IntermediateOnly
        },
        alpha_rank_weight: args.alpha,
    };
    let report = analyze(&table, VThresholdRule::Median, opts)
        .map_err(Failure::invalid)?
        .structure;
    let gi = match args.gi {
        GiArg::Backward => GiOrientation::Backward,
        GiArg::Forward => GiOrientation::Forward,
    };
    match args.format {
        Output::Csv => report.write_csv(out, gi).map_err(Failure::internal),
        Output::Json => print_json(out, &report),
    }
}

fn hhi_cmd(args: HhiArgs, out: &mut impl Write) -> CliResult {
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(Failure::internal);
    let Some(merge) = args.merge else {
        let value = hhi(&args.shares).map_err(Failure::invalid)?;
        return if args.json {
            print_json(out, &serde_json::json!({ "hhi": value }))
        } else {
            w(out, format!("hhi: {value}"))
        };
    };
    let [a, b] = merge[..] else {
        return Err(Failure::invalid("--merge takes exactly two indices, e.g. --merge 0,1"));
    };
    let verdict = screen(&MergerScenario::new(args.shares, a, b).map_err(Failure::invalid)?);
    if args.json {
        return print_json(out, &verdict);
    }
    w(out, format!("pre_hhi: {}", verdict.pre_hhi))?;
    w(out, format!("delta_hhi: {}", verdict.delta_hhi))?;
    w(out, format!("post_hhi: {}", verdict.post_hhi))?;
    w(out, format!("market_class: {:?}", verdict.market_class))?;
    w(out, format!("action: {}", verdict.action))
}

fn tcc_cmd(args: TccArgs, out: &mut impl Write) -> CliResult {
    let profile: TechnologyProfile = read_json(&args.profile)?;
    let a = assess(&profile).map_err(Failure::invalid)?;
    let scaling = args
        .k
        .map(|k| validate_scaling_property(&profile, k))
        .transpose()
        .map_err(Failure::invalid)?;
    if args.json {
        return print_json(out, &TccReport { assessment: a, scaling });
    }
    let e = a.elasticities;
    let mut lines = vec![
        format!("tcc: {}", a.tcc),
        format!("tca: {}", a.tca),
        format!("elasticity_T: {}", e.technoware),
        format!("elasticity_I: {}", e.inforware),
        format!("elasticity_H: {}", e.humanware),
        format!("elasticity_O: {}", e.orgaware),
    ];
    if let Some(s) = scaling {
        lines.push(format!("scaling_relative_change: {}", s.relative_change));
        lines.push(format!("scaling_predicted: {}", s.predicted));
    }
    for l in lines {
        writeln!(out, "{l}").map_err(Failure::internal)?;
    }
    Ok(())
}

fn plan_evaluate(args: PlanArgs, out: &mut impl Write) -> CliResult {
    let plan: ProductionPlan = read_json(&args.plan)?;
    let evaluation = evaluate(&plan).map_err(Failure::invalid)?;
    let Some(dir) = args.store else {
        return print_json(out, &evaluation);
    };
    let store = Store::open(dir).map_err(Failure::internal)?;
    let (plan_id, _) = store
        .append_with(Kind::Plan, None, None, |id| ProductionPlan {
            id: Some(id.to_string()),
            ..plan
        })
        .map_err(Failure::internal)?;
    let (_, stored) = store
        .append_with(Kind::Evaluation, Some(&plan_id), None, |id| dyncenter::Evaluation {
            evaluation_id: Some(id.to_string()),
            plan_id: Some(plan_id.clone()),
            ..evaluation
        })
        .map_err(Failure::internal)?;
    print_json(out, &stored)
}

fn serve(args: ServeArgs) -> CliResult {
    let rt = tokio::runtime::Runtime::new().map_err(Failure::internal)?;
    let addr = SocketAddr::from((args.bind, args.port));
    rt.block_on(dyncenter::service::serve(addr, args.store))
        .map_err(Failure::internal)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Io {
            command: IoCommand::Analyze(a),
        } => io_analyze(a, &mut out),
        Command::Entropy(a) => entropy(a, &mut out),
        Command::Hhi(a) => hhi_cmd(a, &mut out),
        Command::Tcc(a) => tcc_cmd(a, &mut out),
        Command::Plan {
            command: PlanCommand::Evaluate(a),
        } => plan_evaluate(a, &mut out),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::FAILURE
        }
    }
}
