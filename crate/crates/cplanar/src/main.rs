use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cplanar::cgraph::ClusteredGraph;
use cplanar::decomposition::{exact_bond_carving, heuristic_bond_carving, CarvingDecomposition, DecompError};
use cplanar::dp::{test_cplanarity, DecompositionChoice, DpError, TestOptions, Verdict};
use cplanar::gen::{generate_instances, glued_blocks, micro_corpus, with_cutvertices, GenParams};
use cplanar::io::{instance_to_json, read_corpus, read_instance, read_text, IoError, VerdictJson};
use cplanar::oracle::{oracle_cplanar, OracleError, OracleLimits};

const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DISAGREE: u8 = 3;

#[derive(Parser)]
#[command(name = "cplanar", version, about = "C-planarity testing for embedded clustered graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide c-planarity with the dynamic program.
    Test(TestArgs),
    /// Decide c-planarity by brute force.
    Oracle(OracleArgs),
    /// Compute a bond-carving decomposition of the dual and report its width.
    Decompose(DecomposeArgs),
    /// Write seeded instances as JSON lines.
    Generate(GenerateArgs),
    /// Compare the dynamic program with the oracle over a corpus.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args)]
struct SearchArgs {
    /// Fail instead of falling back when the exact search is over budget.
    #[arg(long, conflicts_with = "heuristic")]
    exact_decomposition: bool,
    /// Skip the exact search.
    #[arg(long)]
    heuristic: bool,
    /// Work budget for the exact search; CPLAN_BUDGET takes precedence.
    #[arg(long, default_value_t = 5e7)]
    budget: f64,
}

impl SearchArgs {
    fn budget(&self) -> Result<f64, String> {
        let b = match std::env::var("CPLAN_BUDGET") {
            Ok(s) => s.parse::<f64>().map_err(|_| format!("CPLAN_BUDGET is not a number: {s}"))?,
            Err(_) => self.budget,
        };
        if b.is_nan() || b < 0.0 {
            return Err(format!("budget must be non-negative, got {b}"));
        }
        Ok(b)
    }

    fn choice(&self) -> DecompositionChoice {
        if self.heuristic {
            DecompositionChoice::Heuristic
        } else if self.exact_decomposition {
            DecompositionChoice::Exact
        } else {
            DecompositionChoice::Auto
        }
    }
}

#[derive(Args)]
struct TestArgs {
    input: PathBuf,
    /// Decomposition of the input's dual, e.g. "((0,1),(2,3))".
    #[arg(long)]
    decomposition: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    witness: bool,
    /// Also run the oracle and exit with 3 if the answers differ.
    #[arg(long)]
    oracle_check: bool,
    /// Accepted for uniformity; the test is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    input: PathBuf,
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    input: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the decomposition here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    non_flat: bool,
    #[arg(long)]
    biconnected: bool,
    /// Instances glued at cutvertices.
    #[arg(long, conflicts_with_all = ["non_flat", "biconnected", "micro", "glued"])]
    cutvertices: bool,
    /// 2-connected pieces glued at vertices: cutvertices without bridges.
    #[arg(long, conflicts_with_all = ["non_flat", "biconnected", "micro"])]
    glued: bool,
    /// Exhaustive corpus: all plane graphs up to this many vertices with
    /// every flat clustering of at most --clusters clusters.
    #[arg(long)]
    micro: Option<usize>,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 12)]
    max_faces: usize,
    #[arg(long, default_value_t = 8)]
    max_vertices: usize,
}

#[derive(Args)]
struct CrosscheckArgs {
    /// JSON-lines corpus; without it the corpus is generated.
    corpus: Option<PathBuf>,
    #[command(flatten)]
    gen: GenerateArgs,
    #[arg(long)]
    json: bool,
}

/// Error with a machine-readable code, printed on standard error.
struct Failure {
    code: &'static str,
    message: String,
    exit: u8,
}

impl Failure {
    fn input(message: impl ToString) -> Failure {
        Failure {
            code: "input",
            message: message.to_string(),
            exit: EXIT_INPUT,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        Failure::input(e)
    }
}

impl From<DpError> for Failure {
    fn from(e: DpError) -> Failure {
        let code = match e {
            DpError::Decomposition(DecompError::TooLarge { .. }) => "too-large",
            DpError::Decomposition(_) => "decomposition",
            DpError::TableBound { .. } => "table-bound",
            DpError::LeafTooLarge { .. } | DpError::BoundaryTooLong { .. } => "too-large",
            DpError::Graph(_) | DpError::CGraph(_) => "input",
            _ => "internal",
        };
        Failure {
            code,
            message: e.to_string(),
            exit: EXIT_INPUT,
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        Failure {
            code: "oracle-too-large",
            message: e.to_string(),
            exit: EXIT_INPUT,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(a) => cmd_test(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Crosscheck(a) => cmd_crosscheck(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn print_verdict(j: &VerdictJson, json: bool) {
    if json {
        println!("{}", j.to_json());
        return;
    }
    match (&j.answer, &j.reason, j.bag) {
        (true, _, _) => println!("c-planar"),
        (false, Some(r), Some(b)) => println!("not c-planar ({r} at bag {b})"),
        (false, Some(r), None) => println!("not c-planar ({r})"),
        (false, None, _) => println!("not c-planar"),
    }
    if let Some(s) = &j.stats {
        println!("width {} max_table {} bags {}", s.width, s.max_table, s.bags);
    }
    if let Some(w) = &j.witness {
        for [u, v, f] in w {
            println!("chord {u} {v} face {f}");
        }
    }
}

fn cmd_test(a: &TestArgs) -> Result<u8, Failure> {
    let cg = read_instance(&a.input)?;
    let mut decomposition = a.search.choice();
    if let Some(p) = &a.decomposition {
        let d = load_decomposition(&cg, p)?;
        decomposition = DecompositionChoice::Given(d);
    }
    let opts = TestOptions {
        decomposition,
        witness: a.witness,
        budget: a.search.budget().map_err(Failure::input)?,
        ..TestOptions::default()
    };
    let v = test_cplanarity(&cg, &opts)?;
    print_verdict(&VerdictJson::from_verdict(&v), a.json);
    if a.oracle_check {
        let o = oracle_cplanar(&cg, &OracleLimits::default())?;
        if o.is_c_planar() != v.c_planar {
            eprintln!("error[disagreement]: oracle answers {}", o.is_c_planar());
            return Ok(EXIT_DISAGREE);
        }
    }
    Ok(if v.c_planar { 0 } else { EXIT_NO })
}

/// Parses a decomposition of the input's dual and reports its width and
/// whether it is bond.
fn load_decomposition(cg: &ClusteredGraph, p: &Path) -> Result<CarvingDecomposition, Failure> {
    let dual = cg.graph().dual();
    let text = read_text(p)?;
    let d = CarvingDecomposition::parse(text.trim(), dual.n()).map_err(Failure::input)?;
    let width = d.width(&dual).map_err(Failure::input)?;
    let bond = d.is_bond_carving(&dual).unwrap_or(false);
    eprintln!("decomposition: width {width}, bond {bond}");
    Ok(d)
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8, Failure> {
    let cg = read_instance(&a.input)?;
    let o = oracle_cplanar(&cg, &OracleLimits::default())?;
    print_verdict(&VerdictJson::from_oracle(&cg, &o, a.witness), a.json);
    Ok(if o.is_c_planar() { 0 } else { EXIT_NO })
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<u8, Failure> {
    let cg = read_instance(&a.input)?;
    let dual = cg.graph().dual();
    let budget = a.search.budget().map_err(Failure::input)?;
    let (d, heuristic) = match a.search.choice() {
        DecompositionChoice::Heuristic => (heuristic_bond_carving(&dual), true),
        DecompositionChoice::Exact => (exact_bond_carving(&dual, budget).map_err(DpError::from)?, false),
        _ => match exact_bond_carving(&dual, budget) {
            Ok(d) => (d, false),
            Err(DecompError::TooLarge { needed, .. }) => {
                eprintln!("notice: exact search needs {needed} > budget {budget}; using the heuristic");
                (heuristic_bond_carving(&dual), true)
            }
            Err(e) => return Err(Failure::input(e)),
        },
    };
    let width = d.width(&dual).map_err(Failure::input)?;
    let bond = d.is_bond_carving(&dual).unwrap_or(false);
    let tree = d.to_tree().to_string();
    if let Some(p) = &a.out {
        std::fs::write(p, format!("{tree}\n")).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
    }
    if a.json {
        let j = serde_json::json!({ "decomposition": tree, "width": width, "bond": bond, "heuristic": heuristic });
        println!("{j}");
    } else {
        if a.out.is_none() {
            println!("{tree}");
        }
        println!("width {width}");
        println!("bond {bond}");
    }
    Ok(0)
}

fn corpus(a: &GenerateArgs) -> Vec<ClusteredGraph> {
    if let Some(n) = a.micro {
        micro_corpus(n, a.clusters)
    } else if a.cutvertices {
        with_cutvertices(a.count, a.seed)
    } else if a.glued {
        glued_blocks(a.count, a.seed)
    } else {
        let p = GenParams {
            max_vertices: a.max_vertices,
            max_faces: a.max_faces,
            max_clusters: a.clusters,
            flat: !a.non_flat,
            biconnected: a.biconnected,
            ..GenParams::default()
        };
        generate_instances(&p, a.count, a.seed)
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<u8, Failure> {
    let mut out = std::io::stdout().lock();
    for cg in corpus(a) {
        writeln!(out, "{}", instance_to_json(&cg)).map_err(Failure::input)?;
    }
    Ok(0)
}

fn cmd_crosscheck(a: &CrosscheckArgs) -> Result<u8, Failure> {
    let instances = match &a.corpus {
        Some(p) => read_corpus(p)?,
        None => corpus(&a.gen),
    };
    let (mut disagreements, mut skipped, mut accepted) = (0usize, 0usize, 0usize);
    let opts = TestOptions {
        witness: true,
        ..TestOptions::default()
    };
    for (i, cg) in instances.iter().enumerate() {
        let dp: Result<Verdict, DpError> = test_cplanarity(cg, &opts);
        let oracle = oracle_cplanar(cg, &OracleLimits::default());
        match (dp, oracle) {
            (Ok(v), Ok(o)) => {
                accepted += v.c_planar as usize;
                if v.c_planar != o.is_c_planar() {
                    disagreements += 1;
                    eprintln!("disagreement #{i}: dp {} oracle {}", v.c_planar, o.is_c_planar());
                    eprintln!("{}", instance_to_json(cg));
                }
            }
            (Err(e), _) => {
                disagreements += 1;
                eprintln!("error #{i}: {e}");
                eprintln!("{}", instance_to_json(cg));
            }
            (_, Err(OracleError::TooLarge(_))) => skipped += 1,
            (_, Err(e)) => return Err(e.into()),
        }
    }
    if a.json {
        let j = serde_json::json!({
            "instances": instances.len(), "c_planar": accepted,
            "skipped": skipped, "disagreements": disagreements,
        });
        println!("{j}");
    } else {
        println!("{} instances, {accepted} c-planar, {skipped} skipped", instances.len());
        println!("{disagreements} disagreements");
    }
    Ok(if disagreements == 0 { 0 } else { EXIT_DISAGREE })
}

