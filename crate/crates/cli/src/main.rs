//! `latticeloop`: exact large-N Wilson loop series from the command line.

use clap::{Args, Parser, Subcommand, ValueEnum};
use latticeloop::assignments::PlaquetteAssignment;
use latticeloop::enumerator::{EnumError, Enumerator, MapClass};
use latticeloop::loops::Loop;
use latticeloop::solver::{eval_series, read_cache, Beta, CacheError, Solver, CACHE_SCHEMA};
use latticeloop::suites::{self, Instance, SuiteReport};
use latticeloop::weights::Weights;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SERIES_SCHEMA: &str = "latticeloop/series/v1";
const VERIFY_SCHEMA: &str = "latticeloop/verify/v1";
const ENUMERATE_SCHEMA: &str = "latticeloop/enumerate/v1";

#[derive(Parser)]
#[command(name = "latticeloop", version, about = "Exact large-N lattice Wilson loop series")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Lattice dimension.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=6))]
    dim: u8,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on the gluing search size of a single enumeration.
    #[arg(long, global = true, default_value_t = latticeloop::enumerator::DEFAULT_BUDGET as u64)]
    budget: u64,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Memo cache file, loaded before and saved after a series run.
    #[arg(long, global = true, env = "LATTICELOOP_CACHE")]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Oracle,
    Mle,
    Backtrack,
    Pinching,
    Pps,
    Cancellation,
    Rigidity,
    Weights,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    All,
    Pm,
    Npm,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of the β-series of a loop.
    Series {
        /// Loop as signed axis steps, e.g. "+1 +2 -1 -2".
        #[arg(long = "loop")]
        loop_text: String,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        amax: u32,
        /// Evaluate the truncated series at β; "p/q" evaluates exactly.
        #[arg(long)]
        beta: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        max_area: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Number of randomized instances.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, hide = true)]
        inject_weight_bug: bool,
    },
    /// Enumerate the embedded maps of a loop and an assignment.
    Enumerate {
        #[arg(long = "loop")]
        loop_text: String,
        /// JSON file holding the plaquette assignment.
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long, value_enum, default_value_t = Class::Npm)]
        class: Class,
        /// Write one JSON line per map here instead of stdout.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Inspect or maintain cache files.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Inspect { path: PathBuf },
    /// Drop every entry, keeping the header.
    Clear { path: PathBuf },
    /// Union of the inputs written to `output`; conflicting values abort.
    Merge {
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

enum Failure {
    Parse(String),
    Budget(EnumError),
    Verify,
    Cache(CacheError),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Verify => 4,
            Failure::Cache(CacheError::Io(_)) => 1,
            Failure::Cache(_) => 5,
        }
    }
}

impl From<EnumError> for Failure {
    fn from(e: EnumError) -> Self {
        Failure::Budget(e)
    }
}

impl From<CacheError> for Failure {
    fn from(e: CacheError) -> Self {
        Failure::Cache(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new().stack_size(256 << 20);
    if let Some(j) = cli.global.jobs {
        pool = pool.num_threads(j as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Parse(m) | Failure::Other(m) => eprintln!("error: {m}"),
                Failure::Budget(e) => eprintln!("error: {e}"),
                Failure::Cache(e) => eprintln!("error: {e}"),
                Failure::Verify => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let dim = g.dim as usize;
    let enumerator = Enumerator::new(g.budget as u128);
    match &cli.command {
        Command::Series { loop_text, amax, beta } => series(g, parse_loop(loop_text, dim)?, *amax as usize, beta.as_deref()),
        Command::Verify { suite, max_area, max_len, random, inject_weight_bug } => {
            let en = if *inject_weight_bug { enumerator.with_weights(Weights::with_flipped_w2()) } else { enumerator };
            let r = verify(*suite, dim, *max_area, *max_len, *random, g.seed, &en)?;
            emit_verify(g.format, &r);
            if r.passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::Enumerate { loop_text, assignment, class, dump } => {
            let l = parse_loop(loop_text, dim)?;
            let text = std::fs::read_to_string(assignment)?;
            let k = PlaquetteAssignment::from_json(&text).map_err(|e| Failure::Parse(e.to_string()))?;
            enumerate(g.format, &l, &k, *class, dump.as_deref(), &enumerator)
        }
        Command::Cache { action } => cache(g.format, dim, action),
    }
}

fn parse_loop(text: &str, dim: usize) -> Result<Loop, Failure> {
    let l = Loop::parse(text, dim).map_err(|e| Failure::Parse(format!("--loop, line 1: {e}")))?;
    if l.erase_backtracks().is_null() {
        return Err(Failure::Parse("--loop: loop reduces to the null loop".into()));
    }
    Ok(l)
}

fn parse_beta(text: &str) -> Result<Beta, Failure> {
    let bad = || Failure::Parse(format!("--beta: cannot read '{text}'"));
    if text.contains('/') {
        let (n, d) = text.split_once('/').ok_or_else(bad)?;
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(bad());
        }
        Ok(Beta::Exact(BigRational::new(n, d)))
    } else {
        let x: f64 = text.trim().parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(Beta::Float(x))
    }
}

#[derive(Serialize)]
struct CoeffJson {
    area: usize,
    coeff: String,
}

#[derive(Serialize)]
struct EvalJson {
    beta: String,
    value: String,
    exact: bool,
    last_area: usize,
    last_term: f64,
    caveat: &'static str,
}

#[derive(Serialize)]
struct SeriesJson {
    schema: &'static str,
    dim: usize,
    #[serde(rename = "loop")]
    tokens: Vec<String>,
    a_max: usize,
    coefficients: Vec<CoeffJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<EvalJson>,
}

fn series(g: &Global, l: Loop, a_max: usize, beta: Option<&str>) -> Result<(), Failure> {
    let dim = g.dim as usize;
    let beta = beta.map(parse_beta).transpose()?;
    let solver = Solver::new(dim);
    if let Some(path) = &g.cache {
        if path.exists() {
            solver.cache_load(path)?;
        }
    }
    let s = solver.phi_series(&l, a_max);
    if let Some(path) = &g.cache {
        solver.cache_save(path)?;
    }
    let eval = beta.map(|b| {
        let r = eval_series(&s, &b);
        let (value, exact) = match &r.value {
            Beta::Exact(q) => (q.to_string(), true),
            Beta::Float(x) => (x.to_string(), false),
        };
        let beta = match &b {
            Beta::Exact(q) => q.to_string(),
            Beta::Float(x) => x.to_string(),
        };
        EvalJson { beta, value, exact, last_area: r.last_area, last_term: r.last_term, caveat: r.caveat }
    });
    let doc = SeriesJson {
        schema: SERIES_SCHEMA,
        dim,
        tokens: l.tokens(),
        a_max,
        coefficients: s.coefficients.iter().map(|(a, c)| CoeffJson { area: *a, coeff: c.to_string() }).collect(),
        eval,
    };
    match g.format {
        Format::Json => println!("{}", serde_json::to_string(&doc).expect("serializable")),
        Format::Table => {
            println!("loop  {}", doc.tokens.join(" "));
            println!("area  coeff");
            for c in &doc.coefficients {
                println!("{:>4}  {}", c.area, c.coeff);
            }
            if let Some(e) = &doc.eval {
                println!("beta  {}  value  {}  (last area {}, last term {:e})", e.beta, e.value, e.last_area, e.last_term);
                println!("note  {}", e.caveat);
            }
        }
    }
    Ok(())
}

fn verify(
    suite: Suite,
    dim: usize,
    max_area: Option<usize>,
    max_len: Option<usize>,
    random: Option<usize>,
    seed: u64,
    en: &Enumerator,
) -> Result<SuiteReport, Failure> {
    // the direct loop-equation suites are heavier, so they default to smaller bounds
    let heavy = matches!(suite, Suite::Mle | Suite::Pps | Suite::Cancellation);
    let area = max_area.unwrap_or(if heavy { 2 } else { 3 });
    let len = max_len.unwrap_or(if dim == 2 && !heavy { 8 } else { 6 });
    let mut xs: Vec<Instance> = if dim == 2 {
        suites::window_instances(2, len, area)
    } else {
        suites::random_instances(dim, len, area, random.unwrap_or(120), seed)
    };
    let solver = Solver::new(dim);
    let mut extra = |x: Instance| {
        if x.l.dim() == Some(dim) && !xs.contains(&x) {
            xs.push(x);
        }
    };
    match suite {
        Suite::Mle | Suite::Pps | Suite::Cancellation => extra(suites::all_separable_instance()),
        Suite::Pinching => extra(suites::invalid_pinching_instance()),
        _ => {}
    }
    Ok(match suite {
        Suite::Weights => suites::check_weights(&en.weights),
        Suite::Oracle => suites::check_oracle(&xs, &solver, en)?,
        Suite::Mle => suites::check_mle(&xs, &solver, en)?,
        Suite::Backtrack => suites::check_backtrack(&xs, random.unwrap_or(200), 2, seed, &solver, en)?,
        Suite::Pinching => suites::check_pinching(&xs, en)?,
        Suite::Pps => suites::check_pps(&xs, en)?,
        Suite::Cancellation => suites::check_cancellation(&xs, en)?,
        Suite::Rigidity => suites::check_rigidity(&xs, en)?,
    })
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    schema: &'static str,
    passed: bool,
    #[serde(flatten)]
    report: &'a SuiteReport,
}

fn emit_verify(format: Format, r: &SuiteReport) {
    match format {
        Format::Json => {
            let doc = VerifyJson { schema: VERIFY_SCHEMA, passed: r.passed(), report: r };
            println!("{}", serde_json::to_string(&doc).expect("serializable"));
        }
        Format::Table => {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            println!("{status}  {}  instances {}  checks {}  failures {}", r.suite, r.instances, r.checks, r.failures.len());
            for (k, v) in &r.stats {
                println!("  {k}: {v}");
            }
            for f in &r.failures {
                println!("  failure: {f}");
            }
        }
    }
}

#[derive(Serialize)]
struct EnumerateJson {
    schema: &'static str,
    class: &'static str,
    maps: usize,
    labeled_gluings: u64,
    weight_sum: String,
}

fn enumerate(
    format: Format,
    l: &Loop,
    k: &PlaquetteAssignment,
    class: Class,
    dump: Option<&Path>,
    en: &Enumerator,
) -> Result<(), Failure> {
    let (mc, name) = match class {
        Class::All => (MapClass::All, "all"),
        Class::Pm => (MapClass::Pm, "pm"),
        Class::Npm => (MapClass::Npm, "npm"),
    };
    let e = en.enumerate_class(std::slice::from_ref(l), k, mc)?;
    let summary = EnumerateJson {
        schema: ENUMERATE_SCHEMA,
        class: name,
        maps: e.maps.len(),
        labeled_gluings: e.labeled_gluings,
        weight_sum: e.weight_sum(&en.weights).to_string(),
    };
    let mut out = std::io::stdout().lock();
    match dump {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            for m in &e.maps {
                writeln!(f, "{}", m.dump_json())?;
            }
            f.flush()?;
        }
        None if format == Format::Json => {
            for m in &e.maps {
                writeln!(out, "{}", m.dump_json())?;
            }
        }
        None => {}
    }
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&summary).expect("serializable"))?,
        Format::Table => writeln!(
            out,
            "class {}  maps {}  labeled gluings {}  weight sum {}",
            summary.class, summary.maps, summary.labeled_gluings, summary.weight_sum
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CacheJson {
    schema: &'static str,
    path: String,
    dim: usize,
    entries: usize,
}

fn cache(format: Format, dim: usize, action: &CacheAction) -> Result<(), Failure> {
    let (path, dim, entries) = match action {
        CacheAction::Inspect { path } => {
            let (d, e) = read_cache(path)?;
            (path, d, e.len())
        }
        CacheAction::Clear { path } => {
            let d = if path.exists() { read_cache(path)?.0 } else { dim };
            Solver::new(d).cache_save(path)?;
            (path, d, 0)
        }
        CacheAction::Merge { output, inputs } => {
            let d = read_cache(&inputs[0])?.0;
            let solver = Solver::new(d);
            for p in inputs {
                solver.cache_load(p)?;
            }
            solver.cache_save(output)?;
            (output, d, solver.memo_len())
        }
    };
    let doc = CacheJson { schema: CACHE_SCHEMA, path: path.display().to_string(), dim, entries };
    match format {
        Format::Json => println!("{}", serde_json::to_string(&doc).expect("serializable")),
        Format::Table => println!("{}  dim {}  entries {}", doc.path, doc.dim, doc.entries),
    }
    Ok(())
}
