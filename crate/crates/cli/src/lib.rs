//! Argument handling for the `dormant-degree` binary. [`run`] returns the exit
//! code together with the JSON document for stdout and any diagnostics for
//! stderr, so the whole front end can be driven from tests.

pub mod verify;

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dormant_core::enumeration::{
    count_brute, count_dp, CountReport, DpOptions, EliminationOrder, DEFAULT_BRUTE_GUARD,
    DEFAULT_MEMCAP_BYTES,
};
use dormant_core::formulas::{degree, Quantity, MIN_PRECISION_BITS};
use dormant_core::graph::{catalog, generate_trivalent, parse_graph, CATALOG_FIXED};
use dormant_core::quasipoly::{
    fit, fit_auto, format_rational, predicted_leading, Basis, LeadingKind, Rational, Sample,
};
use dormant_core::{LevelParams, TrivalentGraph};
use num_bigint::BigInt;
use serde_json::{json, Value};
use verify::{verify_identities, verify_tables, Scale, VerifyReport};

/// Searches at most this large go to the brute-force counter under `--method auto`.
pub const AUTO_BRUTE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "dormant-degree", version, about = "Counts balanced edge numberings on trivalent graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Memory cap for the frontier tables, in bytes.
    #[arg(long, global = true, default_value_t = DEFAULT_MEMCAP_BYTES)]
    pub memcap: u64,
    /// Report elapsed_ms as 0 so output is byte-stable.
    #[arg(long, global = true)]
    pub stable: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count balanced numberings on one graph.
    Count(CountArgs),
    /// Degree of pi_1, pi_N or the Verschiebung.
    Degree(DegreeArgs),
    /// Fit a quasi-polynomial in p to computed values.
    Fit(FitArgs),
    /// Recompute the published tables or the cross-checks.
    Verify(VerifyArgs),
    /// List catalog graphs or print one as JSON.
    Catalog(CatalogArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Brute,
    Dp,
    Auto,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    Auto,
    Natural,
    Greedy,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Catalog name (theta, dumbbell, k4, chain:g, gen:g:k) or a path to a graph JSON file.
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub p: u64,
    #[arg(long = "level", short = 'N', default_value_t = 1)]
    pub level: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = OrderArg::Auto)]
    pub order: OrderArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum QuantityArg {
    Pi1,
    PiN,
    Ver,
}

#[derive(Debug, Args)]
pub struct DegreeArgs {
    #[arg(value_enum)]
    pub quantity: QuantityArg,
    #[arg(long)]
    pub genus: u32,
    #[arg(long)]
    pub p: u64,
    #[arg(long = "level", short = 'N', default_value_t = 1)]
    pub level: u32,
    #[arg(long, default_value_t = 128)]
    pub precision_bits: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FitQuantity {
    /// The count at level N on chain:g.
    H,
    /// The level-2 over level-1 ratio on chain:g.
    Q,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub quantity: FitQuantity,
    #[arg(long)]
    pub genus: u32,
    #[arg(long = "level", short = 'N', default_value_t = 1)]
    pub level: u32,
    /// Polynomial degree (default: 3g-3 per level for H, 3g-3 for Q).
    #[arg(long)]
    pub degree: Option<usize>,
    /// 1, 2, 4 or auto.
    #[arg(long, default_value = "auto")]
    pub period: String,
    #[arg(long, default_value_t = 0)]
    pub pmin: u64,
    #[arg(long, default_value_t = 40)]
    pub pmax: u64,
    /// Fit only the monomials with the parity of the degree.
    #[arg(long)]
    pub parity_restricted: bool,
    /// Sample odd p only.
    #[arg(long)]
    pub odd_only: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VerifyTarget {
    Tables,
    Identities,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScaleArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub target: VerifyTarget,
    #[arg(long, value_enum, default_value_t = ScaleArg::Full)]
    pub scale: ScaleArg,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Print this graph as JSON instead of listing names.
    #[arg(long)]
    pub name: Option<String>,
    /// List the generated graphs of this genus.
    #[arg(long)]
    pub generate: Option<u32>,
}

/// What one invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome {
            code: 0,
            stdout: pretty(&doc),
            stderr: String::new(),
        }
    }

    fn failure(doc: Value, message: String) -> Self {
        Outcome {
            code: 1,
            stdout: pretty(&doc),
            stderr: message,
        }
    }

    fn error(message: impl ToString) -> Self {
        let message = message.to_string();
        Outcome::failure(json!({ "error": message }), message)
    }
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: rendered,
                }
            };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => return Outcome::error(e),
    };
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> Outcome {
    let opts = DpOptions {
        order: EliminationOrder::Auto,
        memcap_bytes: cli.global.memcap,
    };
    let stable = cli.global.stable;
    match &cli.command {
        Command::Count(args) => run_count(args, opts, stable),
        Command::Degree(args) => run_degree(args, &opts, stable),
        Command::Fit(args) => run_fit(args, &opts),
        Command::Verify(args) => run_verify(args, &opts),
        Command::Catalog(args) => run_catalog(args),
    }
}

/// Resolves a catalog name, or reads a graph JSON file.
pub fn load_graph(name: &str) -> Result<TrivalentGraph, String> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        return parse_graph(&text).map_err(|e| format!("{name}: {e}"));
    }
    if let Some(rest) = name.strip_prefix("gen:") {
        let (g, k) = rest
            .split_once(':')
            .ok_or_else(|| format!("expected gen:<genus>:<index>, got {name}"))?;
        let g: u32 = g.parse().map_err(|_| format!("bad genus in {name}"))?;
        let k: usize = k.parse().map_err(|_| format!("bad index in {name}"))?;
        let graphs = generate_trivalent(g).map_err(|e| e.to_string())?;
        return graphs
            .into_iter()
            .nth(k)
            .ok_or_else(|| format!("{name}: genus {g} has fewer graphs"));
    }
    catalog(name).map_err(|e| e.to_string())
}

fn run_count(args: &CountArgs, mut opts: DpOptions, stable: bool) -> Outcome {
    let graph = match load_graph(&args.graph) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e),
    };
    let lp = match LevelParams::new(args.p, args.level) {
        Ok(lp) => lp,
        Err(e) => return Outcome::error(e),
    };
    opts.order = match args.order {
        OrderArg::Auto => EliminationOrder::Auto,
        OrderArg::Natural => EliminationOrder::Natural,
        OrderArg::Greedy => EliminationOrder::Greedy,
    };
    let brute = match args.method {
        MethodArg::Brute => true,
        MethodArg::Dp => false,
        MethodArg::Auto => (lp.alphabet_size() as u128)
            .checked_pow(graph.edges.len() as u32)
            .is_some_and(|s| s <= AUTO_BRUTE_LIMIT),
    };
    let result: Result<CountReport, _> = if brute {
        count_brute(&graph, &lp, DEFAULT_BRUTE_GUARD)
    } else {
        count_dp(&graph, &lp, &opts)
    };
    match result {
        Ok(report) => Outcome::ok(serde_json::to_value(report.to_json(stable)).expect("json")),
        Err(e) => Outcome::error(e),
    }
}

fn run_degree(args: &DegreeArgs, opts: &DpOptions, stable: bool) -> Outcome {
    let quantity = match args.quantity {
        QuantityArg::Pi1 => Quantity::Pi1,
        QuantityArg::PiN => Quantity::PiN,
        QuantityArg::Ver => Quantity::Ver,
    };
    if args.precision_bits < MIN_PRECISION_BITS {
        return Outcome::error(format!(
            "--precision-bits must be at least {MIN_PRECISION_BITS}"
        ));
    }
    match degree(quantity, args.genus, args.p, args.level, args.precision_bits, opts) {
        Ok(r) => Outcome::ok(serde_json::to_value(r.to_json(stable)).expect("json")),
        Err(e) => Outcome::error(e),
    }
}

/// Samples for `fit`: `(p, value)` over the requested range.
pub fn fit_samples(
    quantity: FitQuantity,
    genus: u32,
    level: u32,
    ps: impl IntoIterator<Item = u64>,
    opts: &DpOptions,
) -> Result<Vec<Sample>, String> {
    let graph = catalog(&format!("chain:{genus}")).map_err(|e| e.to_string())?;
    let count = |p: u64, n: u32| -> Result<BigInt, String> {
        let lp = LevelParams::new(p, n).map_err(|e| e.to_string())?;
        count_dp(&graph, &lp, opts)
            .map(|r| BigInt::from(r.count))
            .map_err(|e| e.to_string())
    };
    let mut samples = Vec::new();
    for p in ps {
        let t = i64::try_from(p).map_err(|_| format!("p = {p} too large"))?;
        match quantity {
            FitQuantity::H => samples.push(Sample::new(t, count(p, level)?)),
            FitQuantity::Q => {
                let low = count(p, 1)?;
                if low == BigInt::from(0) {
                    continue;
                }
                let high = count(p, 2)?;
                samples.push(Sample::rational(t, Rational::new(high, low)));
            }
        }
    }
    Ok(samples)
}

fn run_fit(args: &FitArgs, opts: &DpOptions) -> Outcome {
    if args.genus < 2 {
        return Outcome::error("genus must be at least 2");
    }
    if args.pmin > args.pmax {
        return Outcome::error("--pmin exceeds --pmax");
    }
    let odd_only = args.odd_only || matches!(args.quantity, FitQuantity::Q);
    let ps = (args.pmin..=args.pmax).filter(|p| !odd_only || p % 2 == 1);
    let per_level = 3 * args.genus as usize - 3;
    let degree = args.degree.unwrap_or(match args.quantity {
        FitQuantity::H => per_level * args.level as usize,
        FitQuantity::Q => per_level,
    });
    let basis = if args.parity_restricted {
        Basis::ParityRestricted
    } else {
        Basis::Full
    };
    let samples = match fit_samples(args.quantity, args.genus, args.level, ps, opts) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let fitted = match args.period.as_str() {
        "auto" => fit_auto(&samples, degree, basis).map(|a| (a.quasi, Some(a.held_out))),
        other => match other.parse::<u32>() {
            Ok(m) => fit(&samples, degree, m, basis).map(|q| (q, None)),
            Err(_) => return Outcome::error(format!("--period must be 1, 2, 4 or auto, got {other}")),
        },
    };
    let (quasi, held_out) = match fitted {
        Ok(f) => f,
        Err(e) => return Outcome::error(e),
    };
    let kind = match (args.quantity, args.level) {
        (FitQuantity::H, 1) => Some(LeadingKind::H1),
        (FitQuantity::H, 2) => Some(LeadingKind::H2),
        (FitQuantity::Q, _) => Some(LeadingKind::Q),
        _ => None,
    };
    let leading: Vec<Value> = (0..quasi.period)
        .map(|r| match quasi.constituent(r) {
            Some(c) => json!(format_rational(&c[degree])),
            None => Value::Null,
        })
        .collect();
    let quantity = match args.quantity {
        FitQuantity::H => "H",
        FitQuantity::Q => "Q",
    };
    Outcome::ok(json!({
        "quantity": quantity,
        "genus": args.genus,
        "N": args.level,
        "degree": degree,
        "period": quasi.period,
        "held_out": held_out,
        "samples": samples.len(),
        "quasi_polynomial": quasi.to_json(),
        "formula": quasi.to_string(),
        "leading": leading,
        "predicted_leading": kind.map(|k| format_rational(&predicted_leading(k, args.genus))),
    }))
}

fn run_verify(args: &VerifyArgs, opts: &DpOptions) -> Outcome {
    let scale = match args.scale {
        ScaleArg::Quick => Scale::Quick,
        ScaleArg::Full => Scale::Full,
    };
    let (target, checks) = match args.target {
        VerifyTarget::Tables => ("tables", verify_tables(opts)),
        VerifyTarget::Identities => ("identities", verify_identities(scale, opts)),
        VerifyTarget::All => {
            let mut c = verify_tables(opts);
            c.extend(verify_identities(scale, opts));
            ("all", c)
        }
    };
    let report = VerifyReport::new(target, checks);
    let doc = serde_json::to_value(&report).expect("json");
    if report.passed {
        Outcome::ok(doc)
    } else {
        let message = format!(
            "{} of {} checks failed\n",
            report.mismatches.len(),
            report.total
        );
        Outcome::failure(doc, message)
    }
}

fn run_catalog(args: &CatalogArgs) -> Outcome {
    if let Some(name) = &args.name {
        return match load_graph(name) {
            Ok(g) => match serde_json::to_value(&g) {
                Ok(doc) => Outcome::ok(doc),
                Err(e) => Outcome::error(e),
            },
            Err(e) => Outcome::error(e),
        };
    }
    if let Some(genus) = args.generate {
        return match generate_trivalent(genus) {
            Ok(graphs) => Outcome::ok(json!({
                "genus": genus,
                "graphs": graphs.iter().map(|g| g.name.clone()).collect::<Vec<_>>(),
            })),
            Err(e) => Outcome::error(e),
        };
    }
    Outcome::ok(json!({
        "fixed": CATALOG_FIXED,
        "families": ["chain:<g>", "gen:<g>:<index>"],
    }))
}
