use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use twcanon::atoms::atom_decomposition;
use twcanon::bags::{bags_no_cliqueseps, bags_with_atoms, Params};
use twcanon::canon::{canonize, isomorphic, IsoOutcome};
use twcanon::decomp::{is_connectivity_sensitive, validate, TreeDecomposition};
use twcanon::improved::improve;
use twcanon::io::{parse_graph, write_graph};
use twcanon::oracle::gen_partial_ktree;
use twcanon::terms::Term;
use twcanon::{Error, Graph, VertexSet};

const EXIT_USAGE: u8 = 1;
const EXIT_TOO_WIDE: u8 = 2;
const EXIT_NON_ISOMORPHIC: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "twcanon", version, about = "Canonical construction terms for graphs of bounded treewidth")]
struct Cli {
    /// Maximum (L,R) pairs examined per local step.
    #[arg(long, global = true)]
    pair_budget: Option<u64>,
    /// Override a parameter (tau, rho, zeta, k_prime, pair_budget). Output is no longer canonical.
    #[arg(long = "param", value_name = "NAME=VALUE", global = true)]
    params: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical term of a graph, or TOOWIDE if tw >= k.
    Canon {
        #[arg(short)]
        k: usize,
        graph: PathBuf,
        /// Also print `u phi(u)` lines (1-based) after the term.
        #[arg(long)]
        witness: bool,
    },
    /// Decide isomorphism by comparing canonical terms.
    Iso {
        #[arg(short)]
        k: usize,
        first: PathBuf,
        second: PathBuf,
    },
    /// Print the k-improved graph.
    Improve {
        #[arg(short)]
        k: usize,
        graph: PathBuf,
    },
    /// Print the clique-separator decomposition in PACE .td format.
    Atoms { graph: PathBuf },
    /// Print the candidate bag family of the k-improved graph, one bag per line.
    Bags {
        #[arg(short)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Stage::Atoms)]
        stage: Stage,
        graph: PathBuf,
    },
    /// Check a PACE .td file against a graph.
    TdValidate { graph: PathBuf, td: PathBuf },
    /// Evaluate a term file and print the graph it constructs.
    TermEval { term: PathBuf },
    /// Print a random partial k-tree.
    Gen {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        keep_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    /// The routine for graphs without clique separators, on the whole graph.
    Raw,
    /// Per-atom families combined over the atom decomposition.
    Atoms,
}

enum Outcome {
    Ok,
    TooWide,
    NonIsomorphic,
    Budget,
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn params(cli: &Cli, k: usize) -> Result<Params> {
    if k == 0 {
        bail!("k must be positive");
    }
    let mut p = Params::new(k);
    if let Some(b) = cli.pair_budget {
        p.pair_budget = b;
    }
    for spec in &cli.params {
        let (name, value) = spec.split_once('=').with_context(|| format!("--param expects NAME=VALUE, got `{spec}`"))?;
        p.set(name, value).map_err(anyhow::Error::msg)?;
    }
    if p.non_canonical {
        eprintln!("WARNING: parameters overridden; output is NOT canonical");
    }
    Ok(p)
}

/// Maps pipeline failures that carry an exit code; everything else is an error.
fn failure(e: Error) -> Result<Outcome> {
    match e {
        Error::TooWide { .. } => {
            println!("TOOWIDE");
            Ok(Outcome::TooWide)
        }
        Error::BudgetExceeded { required, budget } => {
            println!("BUDGET_EXCEEDED");
            eprintln!("a local step needs {required} (L,R) pairs, budget is {budget}");
            Ok(Outcome::Budget)
        }
        e => Err(e.into()),
    }
}

fn print_set(prefix: &str, s: &VertexSet) {
    let ids: Vec<String> = s.iter().map(|v| (v + 1).to_string()).collect();
    if ids.is_empty() {
        println!("{prefix}");
    } else {
        println!("{prefix} {}", ids.join(" "));
    }
}

fn print_td(g: &Graph, td: &TreeDecomposition) {
    let width = td.bags.iter().map(VertexSet::len).max().unwrap_or(0);
    println!("s td {} {} {}", td.len(), width, g.n());
    for (i, bag) in td.bags.iter().enumerate() {
        print_set(&format!("b {}", i + 1), bag);
    }
    for (i, p) in td.parent.iter().enumerate() {
        if let Some(p) = p {
            println!("{} {}", p + 1, i + 1);
        }
    }
}

/// Reads a PACE .td file; the tree is rooted at bag 1.
fn parse_td(text: &str) -> Result<TreeDecomposition> {
    let mut bags: Option<Vec<Option<VertexSet>>> = None;
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let at = || format!("line {}", idx + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().with_context(|| format!("{}: `{s}` is not a number", at()));
        match fields.as_slice() {
            [] | ["c", ..] => {}
            ["s", "td", nb, _, _] => {
                if bags.is_some() {
                    bail!("{}: duplicate solution line", at());
                }
                bags = Some(vec![None; num(nb)?]);
            }
            ["b", id, vs @ ..] => {
                let bags = bags.as_mut().with_context(|| format!("{}: bag before solution line", at()))?;
                let id = num(id)?;
                if id == 0 || id > bags.len() || bags[id - 1].is_some() {
                    bail!("{}: bad or repeated bag id {id}", at());
                }
                let mut bag = VertexSet::new();
                for v in vs {
                    let v = num(v)?;
                    if v == 0 {
                        bail!("{}: vertex ids are 1-based", at());
                    }
                    bag.insert(v - 1);
                }
                bags[id - 1] = Some(bag);
            }
            [a, b] => edges.push((num(a)?, num(b)?)),
            _ => bail!("{}: unrecognised line `{line}`", at()),
        }
    }
    let bags = bags.context("missing `s td` line")?;
    let n = bags.len();
    let bags: Vec<VertexSet> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.with_context(|| format!("bag {} is missing", i + 1)))
        .collect::<Result<_>>()?;
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        if a == 0 || b == 0 || a > n || b > n || a == b {
            bail!("bad tree edge {a} {b}");
        }
        adj[a - 1].push(b - 1);
        adj[b - 1].push(a - 1);
    }
    if n > 0 && edges.len() != n - 1 {
        bail!("{} bags need {} tree edges, found {}", n, n - 1, edges.len());
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    if n > 0 {
        seen[0] = true;
        queue.push_back(0);
    }
    while let Some(t) = queue.pop_front() {
        for &s in &adj[t] {
            if !seen[s] {
                seen[s] = true;
                parent[s] = Some(t);
                queue.push_back(s);
            }
        }
    }
    if seen.contains(&false) {
        bail!("tree edges do not form a tree");
    }
    Ok(TreeDecomposition { parent, bags })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Canon { k, graph, witness } => {
            let g = read_graph(graph)?;
            let p = params(cli, *k)?;
            match canonize(&g, *k, &p) {
                Ok(r) => {
                    print!("{}", r.term.serialize());
                    if *witness {
                        for (u, x) in r.phi.iter().enumerate() {
                            println!("{} {}", u + 1, x);
                        }
                    }
                    Ok(Outcome::Ok)
                }
                Err(e) => failure(e),
            }
        }
        Command::Iso { k, first, second } => {
            let (g1, g2) = (read_graph(first)?, read_graph(second)?);
            let p = params(cli, *k)?;
            match isomorphic(&g1, &g2, *k, &p) {
                Ok(IsoOutcome::Isomorphic(map)) => {
                    println!("ISOMORPHIC");
                    for (u, v) in map.iter().enumerate() {
                        println!("{} {}", u + 1, v + 1);
                    }
                    Ok(Outcome::Ok)
                }
                Ok(IsoOutcome::NonIsomorphic) => {
                    println!("NONISOMORPHIC");
                    Ok(Outcome::NonIsomorphic)
                }
                Err(e) => failure(e),
            }
        }
        Command::Improve { k, graph } => {
            let g = read_graph(graph)?;
            if *k == 0 {
                bail!("k must be positive");
            }
            match improve(&g, *k) {
                Ok(h) => {
                    print!("{}", write_graph(&h));
                    Ok(Outcome::Ok)
                }
                Err(e) => failure(e),
            }
        }
        Command::Atoms { graph } => {
            let g = read_graph(graph)?;
            let d = atom_decomposition(&g)?;
            print_td(&g, &d.tree_decomposition());
            Ok(Outcome::Ok)
        }
        Command::Bags { k, stage, graph } => {
            let g = read_graph(graph)?;
            let p = params(cli, *k)?;
            let h = match improve(&g, *k) {
                Ok(h) => h,
                Err(e) => return failure(e),
            };
            let run = match stage {
                Stage::Raw => bags_no_cliqueseps(&h, &p),
                Stage::Atoms => bags_with_atoms(&h, &p),
            };
            match run {
                Ok(run) if run.family.is_empty() => failure(Error::TooWide { k: *k }),
                Ok(run) => {
                    for bag in &run.family {
                        print_set("b", bag);
                    }
                    Ok(Outcome::Ok)
                }
                Err(e) => failure(e),
            }
        }
        Command::TdValidate { graph, td } => {
            let g = read_graph(graph)?;
            let text = fs::read_to_string(td).with_context(|| format!("reading {}", td.display()))?;
            let td = parse_td(&text).with_context(|| "parsing tree decomposition")?;
            match validate(&g, &td) {
                Ok(w) => {
                    println!("VALID width {} adhesion {}", w.width, w.adhesion_width);
                    let cs = if is_connectivity_sensitive(&g, &td) { "yes" } else { "no" };
                    println!("connectivity-sensitive {cs}");
                    Ok(Outcome::Ok)
                }
                Err(violations) => {
                    println!("INVALID");
                    for v in violations {
                        println!("{v}");
                    }
                    bail!("tree decomposition is invalid")
                }
            }
        }
        Command::TermEval { term } => {
            let bytes = fs::read(term).with_context(|| format!("reading {}", term.display()))?;
            let t = Term::parse(&bytes).with_context(|| format!("parsing {}", term.display()))?;
            let eval = t.eval();
            for (label, v) in &eval.labelling {
                println!("# label {label} -> vertex {}", v + 1);
            }
            print!("{}", write_graph(&eval.graph));
            Ok(Outcome::Ok)
        }
        Command::Gen { n, k, keep_prob, seed } => {
            if !(0.0..=1.0).contains(keep_prob) {
                bail!("--keep-prob must lie in [0, 1]");
            }
            if *k == 0 || n <= k {
                bail!("need 0 < k < n");
            }
            print!("{}", write_graph(&gen_partial_ktree(*n, *k, *keep_prob, *seed)));
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    // the canonizer and evaluator recurse along the term, so give them room
    let worker = std::thread::Builder::new().stack_size(512 << 20).spawn(move || run(&cli));
    let result = match worker {
        Ok(handle) => handle.join().unwrap_or_else(|_| Err(anyhow::anyhow!("internal error"))),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::TooWide) => ExitCode::from(EXIT_TOO_WIDE),
        Ok(Outcome::NonIsomorphic) => ExitCode::from(EXIT_NON_ISOMORPHIC),
        Ok(Outcome::Budget) => ExitCode::from(EXIT_BUDGET),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
