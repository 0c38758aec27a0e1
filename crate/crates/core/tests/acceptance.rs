//! Acceptance suite. The criteria are computed once; `summary` prints one
//! PASS/FAIL line per criterion and each criterion has its own test.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use swing_lattice::builder::{self, CorpusSpec};
use swing_lattice::diagram::{Diagram, ElementId};
use swing_lattice::fixtures;
use swing_lattice::game::{self, GameConfig};
use swing_lattice::properties::{self, Outcome, Property};

const GOLDEN: &str = include_str!("golden/autoplay_seed1.jsonl");
const SLIM_CORPUS_SEED: u64 = 1_000;

#[derive(Clone)]
struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default, Clone)]
struct Tally {
    lattices: usize,
    checked: u64,
    failures: Vec<String>,
    deviations: usize,
    deviations_on_slim: usize,
}

impl Tally {
    fn add(&mut self, source: &str, d: &Diagram, o: &Outcome) {
        if o.checked > 0 {
            self.lattices += 1;
        }
        self.checked += o.checked;
        self.failures.extend(o.failures.iter().map(|f| format!("{source}: {f}")));
        self.deviations += o.deviations.len();
        if d.is_slim().unwrap() {
            self.deviations_on_slim += o.deviations.len();
        }
    }

    fn merge(&mut self, other: Tally) {
        self.lattices += other.lattices;
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self.deviations += other.deviations;
        self.deviations_on_slim += other.deviations_on_slim;
    }

    fn summary(&self) -> String {
        let mut s = format!("{} lattices, {} checks, {} failures", self.lattices, self.checked, self.failures.len());
        if let Some(f) = self.failures.first() {
            s.push_str(&format!(" (first: {f})"));
        }
        s
    }
}

/// Runs `props` on every diagram, split over the available cores.
fn run_parallel(diagrams: &[(String, Diagram)], props: &[Property]) -> BTreeMap<Property, Tally> {
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let chunk = diagrams.len().div_ceil(threads).max(1);
    let partial: Vec<BTreeMap<Property, Tally>> = std::thread::scope(|s| {
        let handles: Vec<_> = diagrams
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut out: BTreeMap<Property, Tally> = BTreeMap::new();
                    for (source, d) in part {
                        for &p in props {
                            let o = properties::check(d, p).unwrap_or_else(|e| panic!("{source}: {p}: {e}"));
                            out.entry(p).or_default().add(source, d, &o);
                        }
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut total: BTreeMap<Property, Tally> = BTreeMap::new();
    for part in partial {
        for (p, t) in part {
            total.entry(p).or_default().merge(t);
        }
    }
    total
}

fn planar_corpus() -> Vec<(String, Diagram)> {
    let spec = CorpusSpec::default();
    assert!(spec.count >= 200 && spec.max_length <= 8 && spec.max_size <= 60 && spec.max_eyes == 4);
    builder::corpus(&spec)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, (d, _))| (format!("corpus[{i}]"), d))
        .collect()
}

fn slim_corpus() -> Vec<(String, Diagram)> {
    (0..200u64)
        .map(|i| {
            let seed = SLIM_CORPUS_SEED + i;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let length = rng.gen_range(2..=8);
            let (d, _) = builder::sample_slim(length, &mut rng).unwrap();
            (format!("slim[{seed}]"), d)
        })
        .collect()
}

fn construction_suite() -> Line {
    let mut failures = Vec::new();
    let mut forks = 0;
    for (source, d) in slim_corpus().iter().take(100) {
        for cell in d.enumerate_cells().unwrap() {
            forks += 1;
            let f = builder::insert_fork(d, cell).unwrap();
            let ok = f.validate().is_empty()
                && f.is_semimodular()
                && f.is_slim().unwrap()
                && f.length() == d.length() + 1;
            if !ok {
                failures.push(format!("{source}: fork at {cell}"));
            }
        }
    }
    let g = builder::grid(2, 2).unwrap();
    let cell = g.enumerate_cells().unwrap()[0];
    if !builder::insert_fork(&g, cell).unwrap().canonically_eq(&fixtures::s7()) {
        failures.push("fork of grid(2,2) is not S7".into());
    }

    let mut round_trips = 0;
    for (source, d) in slim_corpus().iter().take(100) {
        let cells = d.enumerate_cells().unwrap();
        let Some(&cell) = cells.first() else { continue };
        let (with_eye, eye) = builder::add_eye(d, cell).unwrap();
        round_trips += 1;
        let (back, _) = with_eye.full_slimming().unwrap();
        if with_eye.eyes() != vec![eye] || !back.canonically_eq(d) {
            failures.push(format!("{source}: eye round trip through {cell}"));
        }
    }
    let m4 = fixtures::mn(4);
    if m4.eyes() != vec![ElementId(2), ElementId(3)] {
        failures.push(format!("eyes(M4) = {:?}", m4.eyes()));
    }
    Line {
        name: "construction suite",
        pass: failures.is_empty(),
        detail: format!(
            "{forks} forks, {round_trips} eye round trips, grid(2,2)+fork = S7, eyes(M4) = {{a2,a3}}; {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    }
}

/// Independent replay of a JSON-lines effect log.
fn reconcile_log(text: &str, initial_lives: i64) -> Result<(usize, usize), String> {
    let mut lives = initial_lives;
    let mut last: Option<(Value, Value)> = None;
    let mut games = 0;
    let mut moves = 0;
    for (n, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        match v["effect"].as_str().unwrap_or("") {
            "game_started" => {
                games += 1;
                lives = initial_lives;
                last = None;
            }
            "life_gained" => {
                lives += v["amount"].as_i64().unwrap();
                if lives != v["lives"].as_i64().unwrap() {
                    return Err(format!("line {}: ledger has {lives}", n + 1));
                }
            }
            "life_lost" => {
                lives -= 1;
                if lives != v["lives"].as_i64().unwrap() {
                    return Err(format!("line {}: ledger has {lives}", n + 1));
                }
            }
            "game_over" if lives != 0 => return Err(format!("line {}: game over with {lives} lives", n + 1)),
            "moved" => {
                moves += 1;
                let (from, to) = (v["from"].clone(), v["to"].clone());
                if let Some((before, at)) = &last {
                    if *at == from && *before == to {
                        return Err(format!("line {}: backtrack {from} -> {to}", n + 1));
                    }
                }
                last = Some((from, to));
            }
            "board_replaced" | "eye_changed" | "start_chosen" => last = None,
            _ => {}
        }
    }
    Ok((games, moves))
}

fn game_determinism() -> Line {
    let config = GameConfig::with_seed(1);
    let mut problems = Vec::new();
    let sim = game::simulate(&config, 1000);
    let log = match &sim {
        Ok(s) => s.to_json_lines(),
        Err(e) => {
            problems.push(e.to_string());
            String::new()
        }
    };
    let again = game::simulate(&config, 1000).map(|s| s.to_json_lines()).unwrap_or_default();
    if log != again {
        problems.push("two runs differ".into());
    }
    if log != GOLDEN {
        let line = log.lines().zip(GOLDEN.lines()).position(|(a, b)| a != b);
        problems.push(format!("differs from the golden log at line {:?}", line.map(|l| l + 1)));
    }
    let counts = match reconcile_log(&log, config.initial_lives as i64) {
        Ok(c) => c,
        Err(e) => {
            problems.push(e);
            (0, 0)
        }
    };
    Line {
        name: "game determinism",
        pass: problems.is_empty(),
        detail: format!(
            "1000 autoplay events, {} log lines, {} games, {} moves; golden match, ledger, no-backtrack and \
             invariants{}",
            log.lines().count(),
            counts.0,
            counts.1,
            if problems.is_empty() {
                " ok".to_string()
            } else {
                format!(": {}", problems.join("; "))
            }
        ),
    }
}

struct Report {
    lines: Vec<Line>,
    /// Perspectivity restricted to slim lattices plus the sound direction
    /// everywhere, and the order of up-perspective steps.
    perspectivity_scoped: Result<(), String>,
    elapsed: Duration,
}

fn report() -> &'static Report {
    static REPORT: OnceLock<Report> = OnceLock::new();
    REPORT.get_or_init(build_report)
}

fn build_report() -> Report {
    let started = Instant::now();
    let mut lines = Vec::new();

    let corpus = planar_corpus();
    let corpus_props = [
        Property::SwingLemma,
        Property::Oracle,
        Property::Spanning,
        Property::Beta,
        Property::Perspectivity,
        Property::Order,
    ];
    let t = Instant::now();
    let planar = run_parallel(&corpus, &corpus_props);
    let corpus_time = t.elapsed();
    let slim = run_parallel(&slim_corpus(), &[Property::SlimCoincidence, Property::Order]);

    let swing = &planar[&Property::SwingLemma];
    lines.push(Line {
        name: "swing lemma",
        pass: swing.failures.is_empty() && swing.lattices >= 200 && corpus_time < Duration::from_secs(60),
        detail: format!("{}; all corpus properties in {:.1} s", swing.summary(), corpus_time.as_secs_f64()),
    });

    let co = &slim[&Property::SlimCoincidence];
    lines.push(Line {
        name: "slim coincidence",
        pass: co.failures.is_empty() && co.lattices >= 200,
        detail: co.summary(),
    });

    // Small fixtures join the corpus members of size at most 8.
    let mut small: Vec<(String, Diagram)> = corpus
        .iter()
        .filter(|(_, d)| d.size() <= properties::ORACLE_MAX_SIZE)
        .cloned()
        .collect();
    for (name, d) in [
        ("S7", fixtures::s7()),
        ("M3", fixtures::mn(3)),
        ("M4", fixtures::mn(4)),
        ("M5", fixtures::mn(5)),
        ("M6", fixtures::mn(6)),
        ("grid(2,2)", fixtures::grid(2, 2)),
        ("grid(2,3)", fixtures::grid(2, 3)),
        ("grid(3,2)", fixtures::grid(3, 2)),
        ("stacked squares", fixtures::stacked_squares()),
        ("chain(4)", fixtures::chain(4)),
    ] {
        small.push((name.into(), d));
    }
    let oracle = &run_parallel(&small, &[Property::Oracle])[&Property::Oracle];
    let corpus_oracle = &planar[&Property::Oracle];
    lines.push(Line {
        name: "oracle minimality",
        pass: oracle.failures.is_empty() && corpus_oracle.failures.is_empty() && corpus_oracle.lattices > 0,
        detail: format!("{} ({} from the corpus)", oracle.summary(), corpus_oracle.lattices),
    });

    let sp = &planar[&Property::Spanning];
    lines.push(Line {
        name: "spanning",
        pass: sp.failures.is_empty() && sp.lattices >= 200,
        detail: sp.summary(),
    });

    let beta = &planar[&Property::Beta];
    lines.push(Line {
        name: "beta construction",
        pass: beta.failures.is_empty() && beta.lattices >= 200,
        detail: beta.summary(),
    });

    let mut mn = Tally::default();
    for n in 3..=8 {
        let d = fixtures::mn(n);
        mn.add(&format!("M{n}"), &d, &properties::check_mn(n).unwrap());
    }
    lines.push(Line {
        name: "M_n strongly connected",
        pass: mn.failures.is_empty() && mn.lattices == 6,
        detail: format!("n = 3..8: {}", mn.summary()),
    });

    // Literal reading: the biconditional on every corpus lattice. Lattices
    // with eyes (M3 already) have up-perspective prime intervals that no
    // upward cell step connects, so this line is red.
    let persp = &planar[&Property::Perspectivity];
    let mut order = planar[&Property::Order].clone();
    order.merge(slim[&Property::Order].clone());
    let order_ok = order.failures.is_empty() && order.lattices > 0;
    lines.push(Line {
        name: "perspectivity and step order",
        pass: persp.failures.is_empty() && persp.deviations == 0 && order_ok,
        detail: format!(
            "{} pairs: {} mismatches of the biconditional, {} of them on slim lattices; \
             upward steps imply up-perspectivity on all; order: {} sequences on {} slim lattices, {} failures",
            persp.checked,
            persp.deviations,
            persp.deviations_on_slim,
            order.checked,
            order.lattices,
            order.failures.len()
        ),
    });
    let perspectivity_scoped = if !persp.failures.is_empty() {
        Err(persp.summary())
    } else if persp.deviations_on_slim > 0 {
        Err(format!("{} mismatches on slim lattices", persp.deviations_on_slim))
    } else if !order_ok {
        Err(order.summary())
    } else {
        Ok(())
    };

    lines.push(construction_suite());
    lines.push(game_determinism());

    Report {
        lines,
        perspectivity_scoped,
        elapsed: started.elapsed(),
    }
}

fn criterion(name: &str) {
    let line = report()
        .lines
        .iter()
        .find(|l| l.name == name)
        .unwrap_or_else(|| panic!("no criterion {name}"));
    assert!(line.pass, "{}: {}", line.name, line.detail);
}

#[test]
fn summary() {
    let r = report();
    println!();
    for l in &r.lines {
        println!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    println!("acceptance criteria computed in {:.1} s", r.elapsed.as_secs_f64());
    assert_eq!(r.lines.len(), 9);
}

#[test]
fn swing_lemma() {
    criterion("swing lemma");
}

#[test]
fn slim_coincidence() {
    criterion("slim coincidence");
}

#[test]
fn oracle_minimality() {
    criterion("oracle minimality");
}

#[test]
fn spanning() {
    criterion("spanning");
}

#[test]
fn beta_construction() {
    criterion("beta construction");
}

#[test]
fn mn_strongly_connected() {
    criterion("M_n strongly connected");
}

/// Fails: the biconditional does not hold on lattices with eyes.
#[test]
fn perspectivity_and_step_order() {
    criterion("perspectivity and step order");
}

#[test]
fn perspectivity_on_slim_lattices() {
    if let Err(e) = &report().perspectivity_scoped {
        panic!("{e}");
    }
}

#[test]
fn construction_suite_holds() {
    criterion("construction suite");
}

#[test]
fn game_determinism_matches_golden_log() {
    criterion("game determinism");
}
