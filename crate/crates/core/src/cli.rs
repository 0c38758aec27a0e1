//! The `swing-lattice` command line: `generate`, `verify`, `simulate`, `serve`.
//!
//! Exit codes: 0 success, 1 a property or invariant failed, 2 bad input.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builder::{self, BuildRecipe, CorpusSpec, GoodnessCriteria};
use crate::diagram::Diagram;
use crate::game::{self, GameConfig};
use crate::properties::{self, Outcome, Property};
use crate::service::{self, ServeOptions};
use crate::swing::{self, Discrepancy, ReachabilityFixture, SwingReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "swing-lattice", version, about = "Planar semimodular lattice toolkit and the Swing Lattice Game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random diagrams and their construction recipes.
    Generate(GenerateArgs),
    /// Check the Swing Lemma and related properties.
    Verify(VerifyArgs),
    /// Play the game headlessly and print the effect log.
    Simulate(SimulateArgs),
    /// Serve the game over HTTP and WebSocket.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Slim,
    Planar,
    Good,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 6)]
    pub length: usize,
    #[arg(long, value_enum, default_value_t = Kind::Good)]
    pub kind: Kind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Diagram or reachability fixture files, or directories of them.
    pub paths: Vec<PathBuf>,
    /// Also check this many seeded random planar semimodular lattices.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub max_length: usize,
    #[arg(long, default_value_t = 60)]
    pub max_size: usize,
    #[arg(long, default_value_t = 4)]
    pub max_eyes: usize,
    /// Comma-separated property names, or `all`.
    #[arg(long, default_value = "swing-lemma", value_delimiter = ',')]
    pub properties: Vec<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Include wall times (which makes the report nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub events: usize,
    #[arg(long, value_enum, default_value_t = Policy::Autoplay)]
    pub policy: Policy,
    /// Game config JSON; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON-lines log here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Autoplay,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory with the browser client.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(cli: Cli) -> ExitCode {
    let code = match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Verify(a) => verify(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Serve(a) => serve(&a),
    };
    ExitCode::from(code)
}

fn input_error(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

fn load_config(path: Option<&Path>) -> Result<GameConfig, String> {
    match path {
        None => Ok(GameConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn generate(a: &GenerateArgs) -> u8 {
    if let Err(e) = fs::create_dir_all(&a.out) {
        return input_error(format!("{}: {e}", a.out.display()));
    }
    let kind = match a.kind {
        Kind::Slim => "slim",
        Kind::Planar => "planar",
        Kind::Good => "good",
    };
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i as u64);
        let made = match a.kind {
            Kind::Good => builder::random_good(a.length, seed),
            Kind::Slim | Kind::Planar => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let max_eyes = if a.kind == Kind::Planar { 3 } else { 0 };
                builder::sample_planar(a.length, max_eyes, &mut rng).map(|(d, mut r)| {
                    r.seed = seed;
                    (d, r)
                })
            }
        };
        let (d, recipe) = match made {
            Ok(x) => x,
            Err(e) => return input_error(e),
        };
        if let Err(msg) = check_kind(&d, a.kind) {
            eprintln!("generated diagram {i} fails its kind check: {msg}");
            return EXIT_FAILURE;
        }
        let stem = a.out.join(format!("{kind}-{i:04}"));
        let diagram = serde_json::to_string_pretty(&d.layout()).expect("diagram serializes");
        let recipe = serde_json::to_string_pretty(&recipe).expect("recipe serializes");
        for (path, text) in [(stem.with_extension("json"), diagram), (stem.with_extension("recipe.json"), recipe)] {
            if let Err(e) = fs::write(&path, text + "\n") {
                return input_error(format!("{}: {e}", path.display()));
            }
        }
    }
    println!("wrote {} {kind} diagrams of length {} to {}", a.count, a.length, a.out.display());
    EXIT_OK
}

fn check_kind(d: &Diagram, kind: Kind) -> Result<(), String> {
    if !d.validate().is_empty() || !d.is_semimodular() {
        return Err("not a planar semimodular diagram".into());
    }
    let slim = d.is_slim().map_err(|e| e.to_string())?;
    match kind {
        Kind::Slim if !slim => Err("not slim".into()),
        Kind::Good if !builder::is_good(d, &GoodnessCriteria::default()).map_err(|e| e.to_string())? => {
            Err("not good".into())
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    properties: Vec<Property>,
    lattices: usize,
    checked: u64,
    failures: usize,
    deviations: usize,
    inputs: Vec<InputReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct InputReport {
    source: String,
    size: usize,
    edges: usize,
    slim: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    swing_lemma: Option<SwingReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outcomes: Vec<Outcome>,
    /// Disagreements between a stored reachability fixture and `con(p)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    fixture_discrepancies: Option<Vec<Discrepancy>>,
}

impl InputReport {
    fn failures(&self) -> usize {
        self.swing_lemma.as_ref().map_or(0, |r| r.discrepancies.len())
            + self.outcomes.iter().map(|o| o.failures.len()).sum::<usize>()
            + self.fixture_discrepancies.as_ref().map_or(0, |d| d.len())
    }
}

enum Input {
    Diagram(Diagram),
    Fixture(ReachabilityFixture),
}

fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| format!("{}: {e}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    let name = f.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.ends_with(".json") && !name.ends_with(".recipe.json")
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_input(path: &Path) -> Result<Input, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if value.get("reachable").is_some() {
        serde_json::from_value(value)
            .map(Input::Fixture)
            .map_err(|e| format!("{}: {e}", path.display()))
    } else {
        serde_json::from_value(value)
            .map(Input::Diagram)
            .map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn parse_properties(names: &[String]) -> Result<Vec<Property>, String> {
    if names.iter().any(|n| n == "all") {
        return Ok(Property::ALL.to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let p: Property = n.trim().parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn verify(a: &VerifyArgs) -> u8 {
    let started = Instant::now();
    let properties = match parse_properties(&a.properties) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let mut inputs: Vec<(String, Input)> = Vec::new();
    let files = match collect_files(&a.paths) {
        Ok(f) => f,
        Err(e) => return input_error(e),
    };
    for f in files {
        match load_input(&f) {
            Ok(i) => inputs.push((f.display().to_string(), i)),
            Err(e) => return input_error(e),
        }
    }
    if let Some(count) = a.random {
        let spec = CorpusSpec {
            count,
            seed: a.seed,
            max_length: a.max_length,
            max_size: a.max_size,
            max_eyes: a.max_eyes,
        };
        for i in 0..count {
            match builder::corpus_member(&spec, i) {
                Ok((d, _)) => inputs.push((format!("random:{}", spec.seed.wrapping_add(i as u64)), Input::Diagram(d))),
                Err(e) => return input_error(e),
            }
        }
    }
    if inputs.is_empty() {
        return input_error("nothing to verify: give paths or --random N");
    }

    let mut reports = Vec::new();
    for (source, input) in inputs {
        let report = match verify_one(source, input, &properties, a.timing) {
            Ok(r) => r,
            Err(e) => return input_error(e),
        };
        let failures = report.failures();
        let status = if failures == 0 { "ok  " } else { "FAIL" };
        println!(
            "{status} {} size={} edges={} slim={} failures={failures}",
            report.source, report.size, report.edges, report.slim
        );
        if let Some(r) = &report.swing_lemma {
            for x in &r.discrepancies {
                println!("     swing-lemma p={} q={} A={} B={} C={}", x.p, x.q, x.collapsed, x.sl, x.ssl);
            }
        }
        for x in report.fixture_discrepancies.iter().flatten() {
            println!("     fixture p={} q={} collapsed={} stored-reachable={}", x.p, x.q, x.collapsed, x.sl);
        }
        for o in &report.outcomes {
            for f in &o.failures {
                println!("     {} {f}", o.property);
            }
        }
        reports.push(report);
    }

    let failures: usize = reports.iter().map(|r| r.failures()).sum();
    let deviations: usize = reports
        .iter()
        .flat_map(|r| &r.outcomes)
        .map(|o| o.deviations.len())
        .sum();
    let checked: u64 = reports
        .iter()
        .map(|r| {
            r.swing_lemma.as_ref().map_or(0, |s| s.pairs as u64) + r.outcomes.iter().map(|o| o.checked).sum::<u64>()
        })
        .sum();
    let report = VerifyReport {
        properties,
        lattices: reports.len(),
        checked,
        failures,
        deviations,
        inputs: reports,
        wall_time_ms: a.timing.then(|| started.elapsed().as_secs_f64() * 1000.0),
    };
    println!(
        "{} lattices, {} facts checked, {} failures{}",
        report.lattices,
        report.checked,
        report.failures,
        if deviations > 0 {
            format!(", {deviations} out-of-scope deviations (see report)")
        } else {
            String::new()
        }
    );
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = fs::write(path, text + "\n") {
            return input_error(format!("{}: {e}", path.display()));
        }
    }
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn verify_one(source: String, input: Input, properties: &[Property], timing: bool) -> Result<InputReport, String> {
    let (d, fixture) = match input {
        Input::Diagram(d) => (d, None),
        Input::Fixture(f) => {
            let found = f.check().map_err(|e| format!("{source}: {e}"))?;
            (f.diagram, Some(found))
        }
    };
    let slim = d.is_slim().map_err(|e| format!("{source}: {e}"))?;
    let mut report = InputReport {
        source,
        size: d.size(),
        edges: d.edge_count(),
        slim,
        swing_lemma: None,
        outcomes: Vec::new(),
        fixture_discrepancies: fixture,
    };
    if report.fixture_discrepancies.is_some() {
        return Ok(report);
    }
    for &p in properties {
        if p == Property::SwingLemma {
            let mut r = swing::verify_swing_lemma(&d).map_err(|e| format!("{}: {e}", report.source))?;
            if !timing {
                r.wall_time_ms = 0.0;
            }
            report.swing_lemma = Some(r);
        } else {
            report
                .outcomes
                .push(properties::check(&d, p).map_err(|e| format!("{}: {e}", report.source))?);
        }
    }
    Ok(report)
}

fn simulate(a: &SimulateArgs) -> u8 {
    let mut config = match load_config(a.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return input_error(e),
    };
    config.rng_seed = a.seed;
    let sim = match game::simulate(&config, a.events) {
        Ok(s) => s,
        Err(game::SimulationError::Game(e)) => return input_error(e),
        Err(e) => {
            eprintln!("{e}");
            return EXIT_FAILURE;
        }
    };
    let text = sim.to_json_lines();
    let written = match &a.out {
        Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return input_error(e);
    }
    log::info!(
        "{} events, {} games, {} log lines, final lives {}",
        sim.events,
        sim.games,
        sim.log.len(),
        sim.final_lives
    );
    EXIT_OK
}

fn serve(a: &ServeArgs) -> u8 {
    let mut config = match load_config(a.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return input_error(e),
    };
    config.rng_seed = a.seed;
    if let Err(e) = config.validate() {
        return input_error(e);
    }
    if let Some(dir) = &a.assets {
        if !dir.is_dir() {
            return input_error(format!("{} is not a directory", dir.display()));
        }
    }
    let opts = ServeOptions {
        addr: SocketAddr::new(a.host, a.port),
        assets: a.assets.clone(),
        config,
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    match runtime.block_on(service::serve(opts)) {
        Ok(()) => EXIT_OK,
        Err(e) => input_error(e),
    }
}

/// Recipes are written next to diagrams; exposed for tests.
pub fn read_recipe(path: &Path) -> Result<BuildRecipe, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
