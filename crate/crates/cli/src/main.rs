use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use changemaker::contfrac::{
    eval_neg_cf, eval_pos_cf, neg_cf_expand, parse_coefficients, pos_cf_expand, NegCf, PosCf,
};
use changemaker::graph::{goeritz_matrix, WhiteGraph};
use changemaker::ingest::{parse_pd, pd_to_white_graph, read_table};
use changemaker::lattice::{build_cm_lattice, enumerate_sigma, fractional_basis, is_changemaker, SigmaTail};
use changemaker::pipeline::{run_pipeline, run_pipeline_all, scan, PipelineError, PipelineOptions, ScanInput};
use changemaker::surgery::{montesinos_slope, obstruct, z_count_branch};
use changemaker::Rational;

/// Changemaker lattice recognition for alternating link diagrams.
#[derive(Parser)]
#[command(name = "changemaker", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Clone, Copy)]
struct OutputArgs {
    /// Emit compact JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Emit indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a changemaker labeling and emit a certificate.
    Recognize(RecognizeArgs),
    /// Run recognition over every row of a knot table.
    Scan(ScanArgs),
    /// Continued fraction conversions.
    #[command(subcommand)]
    Cf(CfCommand),
    /// Changemaker tails and lattices.
    #[command(subcommand)]
    Cm(CmCommand),
    /// Count the vanishing d-invariant indices.
    Zcount(ObstructArgs),
    /// Surgery slope produced by a tangle replacement.
    Slope {
        /// Tangle slope a/b >= 0.
        #[arg(long)]
        tangle: Rational,
        #[arg(long)]
        mu0: i64,
        /// Report the slope on the mirror image.
        #[arg(long)]
        mirror: bool,
    },
    /// Evaluate the counting obstructions for a p/q surgery.
    Obstruct(ObstructArgs),
    /// Trace the faces of a PD code and print its white graph.
    IngestPd {
        /// File holding the PD code.
        #[arg(long)]
        pd: PathBuf,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(true).args(["graph", "pd", "planar"])))]
struct RecognizeArgs {
    /// White graph JSON: {"vertices": N, "edges": [[i, j], ...]}.
    #[arg(long, conflicts_with = "pd")]
    graph: Option<PathBuf>,
    /// PD code of a reduced alternating diagram.
    #[arg(long)]
    pd: Option<PathBuf>,
    /// PD code of the diagram; gathers the marker crossings by flypes.
    #[arg(long, conflicts_with = "pd")]
    planar: Option<PathBuf>,
    /// Surgery coefficient p/q with q >= 2; p must equal the determinant.
    #[arg(long)]
    slope: Rational,
    /// Emit a certificate for every labeling found.
    #[arg(long)]
    all: bool,
    /// Maximum number of labelings with --all.
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// Recompute every claim of the certificate before printing it.
    #[arg(long)]
    verify: bool,
    /// Report surgery slopes on the mirror image.
    #[arg(long)]
    mirror: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// CSV with columns name,kind,code,det,signature.
    #[arg(long)]
    table: PathBuf,
    /// Skip rows whose determinant exceeds this.
    #[arg(long, default_value_t = 10_000)]
    pmax: i64,
    /// Try every coprime q in 2..=qmax.
    #[arg(long, default_value_t = 10)]
    qmax: i64,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    mirror: bool,
}

#[derive(Subcommand)]
enum CfCommand {
    /// Expand P/Q in both conventions.
    Expand { value: Rational },
    /// Evaluate a continued fraction.
    Eval(CfInput),
    /// Convert between the two conventions.
    Convert(CfInput),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("convention").required(true).args(["neg", "pos"])))]
struct CfInput {
    /// Minus-convention coefficients "a0,a1,...".
    #[arg(long, allow_hyphen_values = true)]
    neg: Option<String>,
    /// Plus-convention coefficients "c0,c1,...".
    #[arg(long, allow_hyphen_values = true)]
    pos: Option<String>,
}

#[derive(Subcommand)]
enum CmCommand {
    /// Build the p/q-changemaker lattice for a tail.
    Build {
        pq: Rational,
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
    },
    /// List the positive changemaker tails with 1 + Σσ² = N.
    Enum { n: i64 },
    /// Decide the changemaker condition for a sorted tail.
    CheckSigma {
        #[arg(allow_hyphen_values = true)]
        sigma: String,
    },
}

#[derive(Args)]
struct ObstructArgs {
    #[arg(long)]
    p: i64,
    #[arg(long)]
    q: i64,
    #[arg(long)]
    gtilde: i64,
}

/// Exit status: 1 for a clean negative answer, 2 for bad input, 3 for a
/// broken internal invariant.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn from_pipeline(e: PipelineError) -> Failure {
    Failure { code: if e.input { 2 } else { 3 }, error: e.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, code)) => {
            print_json(&value, cli.output);
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(v: &Value, out: OutputArgs) {
    let text = if out.pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    };
    let mut stdout = std::io::stdout().lock();
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(stdout, "{}", text.expect("JSON values always serialize"));
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| Failure { code: 3, error: e.into() })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

fn load_pd_graph(path: &Path) -> Result<WhiteGraph, Failure> {
    let pd = parse_pd(&read(path)?).map_err(input)?;
    pd_to_white_graph(&pd).with_context(|| format!("in {}", path.display())).map_err(input)
}

fn same_graph(a: &WhiteGraph, b: &WhiteGraph) -> bool {
    let det = |g: &WhiteGraph| goeritz_matrix(g, None).map(|m| m.det()).ok();
    let degrees = |g: &WhiteGraph| {
        let mut d: Vec<i64> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
        d.sort_unstable();
        d
    };
    if a.vertex_count() != b.vertex_count() || degrees(a) != degrees(b) || det(a) != det(b) {
        return false;
    }
    // Exact comparison is factorial in the vertex count.
    a.vertex_count() > 8 || a.canonical_form() == b.canonical_form()
}

fn run(cli: &Cli) -> Result<(Value, u8), Failure> {
    match &cli.command {
        Command::Recognize(a) => recognize(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Cf(c) => cf(c).map(|v| (v, 0)).map_err(input),
        Command::Cm(c) => cm(c),
        Command::Zcount(a) => {
            let (z, branch) = z_count_branch(a.gtilde, a.p, a.q).map_err(input)?;
            Ok((json!({"p": a.p, "q": a.q, "gtilde": a.gtilde, "z_count": z, "branch": branch}), 0))
        }
        Command::Slope { tangle, mu0, mirror } => {
            let s = montesinos_slope(tangle, *mu0).map_err(input)?;
            let s = if *mirror { -s } else { s };
            Ok((json!({"tangle": tangle, "mu0": mu0, "mirror": mirror, "slope": s}), 0))
        }
        Command::Obstruct(a) => {
            let verdict = obstruct(a.gtilde, a.p, a.q, None).map_err(input)?;
            let mut v = to_value(&verdict)?;
            v["ok"] = json!(verdict.all_ok());
            Ok((v, 0))
        }
        Command::IngestPd { pd } => {
            let g = load_pd_graph(pd)?;
            let gm = goeritz_matrix(&g, None).map_err(input)?;
            Ok((
                json!({
                    "graph": g,
                    "goeritz": {"deleted": gm.deleted, "matrix": gm.matrix},
                    "det": gm.det().to_string(),
                    "positive_definite": gm.is_positive_definite(),
                }),
                0,
            ))
        }
    }
}

fn recognize(a: &RecognizeArgs) -> Result<(Value, u8), Failure> {
    let graph = match (&a.graph, &a.pd) {
        (Some(path), _) => {
            let g: WhiteGraph = serde_json::from_str(&read(path)?)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(input)?;
            Some(g)
        }
        (None, Some(path)) => Some(load_pd_graph(path)?),
        (None, None) => None,
    };
    let planar = a.planar.as_deref().map(load_pd_graph).transpose()?;
    let g = match (graph, planar) {
        (Some(g), Some(p)) => {
            if !same_graph(&g, &p) {
                return Err(input(anyhow!("the --planar diagram does not have the given white graph")));
            }
            g
        }
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => return Err(input(anyhow!("one of --graph, --pd or --planar is required"))),
    };
    let opts = PipelineOptions { mirror: a.mirror, verify: a.verify, gather: a.planar.is_some() };
    if a.all {
        let certs = run_pipeline_all(&g, &a.slope, a.limit, opts).map_err(from_pipeline)?;
        let code = if certs.is_empty() { 1 } else { 0 };
        return Ok((to_value(&certs)?, code));
    }
    let cert = run_pipeline(&g, &a.slope, opts).map_err(from_pipeline)?;
    let code = if cert.found { 0 } else { 1 };
    Ok((to_value(&cert)?, code))
}

fn scan_cmd(a: &ScanArgs) -> Result<(Value, u8), Failure> {
    let file = fs::File::open(&a.table)
        .with_context(|| format!("opening {}", a.table.display()))
        .map_err(input)?;
    let rows: Vec<ScanInput> = read_table(file)
        .map_err(input)?
        .into_iter()
        .map(|r| r.map_err(|e| e.to_string()))
        .collect();
    if a.qmax < 2 || a.pmax < 2 {
        return Err(input(anyhow!("--qmax and --pmax must be at least 2")));
    }
    let opts = PipelineOptions { mirror: a.mirror, verify: a.verify, gather: false };
    let report = scan(&rows, a.pmax, a.qmax, a.jobs, opts).map_err(|e| Failure { code: 3, error: e.into() })?;
    Ok((to_value(&report)?, 0))
}

fn cf_json(value: &Rational) -> Value {
    let neg = neg_cf_expand(value).ok();
    let pos = pos_cf_expand(value).ok();
    json!({"value": value, "neg": neg, "pos": pos})
}

fn cf(c: &CfCommand) -> Result<Value> {
    match c {
        CfCommand::Expand { value } => {
            if !value.is_zero() && !value.is_positive() {
                bail!("{value} is negative");
            }
            Ok(cf_json(value))
        }
        CfCommand::Eval(inp) | CfCommand::Convert(inp) => {
            let value = match (&inp.neg, &inp.pos) {
                (Some(s), _) => eval_neg_cf(&NegCf::new(parse_coefficients(s)?)?),
                (None, Some(s)) => eval_pos_cf(&PosCf::new(parse_coefficients(s)?)?),
                (None, None) => bail!("one of --neg or --pos is required"),
            };
            Ok(cf_json(&value))
        }
    }
}

fn parse_sigma(s: &str) -> Result<Vec<i64>> {
    s.trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().with_context(|| format!("bad tail entry {t:?}")))
        .collect()
}

fn cm(c: &CmCommand) -> Result<(Value, u8), Failure> {
    match c {
        CmCommand::Build { pq, sigma } => {
            let sigma = SigmaTail::new(parse_sigma(sigma).map_err(input)?).map_err(input)?;
            let spec = build_cm_lattice(pq, &sigma).map_err(input)?;
            let mut v = to_value(&spec)?;
            v["dim"] = json!(spec.dim());
            v["rank"] = json!(spec.rank());
            if spec.q >= 2 {
                v["fractional_basis"] = json!(fractional_basis(&spec).v);
            }
            Ok((v, 0))
        }
        CmCommand::Enum { n } => {
            if *n < 1 {
                return Err(input(anyhow!("N must be at least 1")));
            }
            let tails = enumerate_sigma(*n);
            Ok((json!({"n": n, "count": tails.len(), "tails": tails}), 0))
        }
        CmCommand::CheckSigma { sigma } => {
            let values = parse_sigma(sigma).map_err(input)?;
            let ok = is_changemaker(&values).map_err(input)?;
            Ok((json!({"sigma": values, "changemaker": ok}), if ok { 0 } else { 1 }))
        }
    }
}
