use std::path::Path;
use std::process::{Command, Output};

use swing_lattice::builder;
use swing_lattice::diagram::Diagram;
use swing_lattice::fixtures;
use swing_lattice::swing::{ReachabilityFixture, SequenceVariant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swing-lattice"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_loadable_diagrams_and_recipes() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["slim", "planar", "good"] {
        let o = run(&["generate", "--count", "3", "--length", "5", "--kind", kind, "--seed", "9", "--out", path(dir.path())]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for i in 0..3 {
            let text = std::fs::read_to_string(dir.path().join(format!("{kind}-{i:04}.json"))).unwrap();
            let d = Diagram::from_json_str(&text).unwrap();
            assert_eq!(d.length(), 5);
            assert!(d.layout_coords().is_some());
            if kind == "slim" {
                assert!(d.is_slim().unwrap());
            }
            let recipe = swing_lattice::cli::read_recipe(&dir.path().join(format!("{kind}-{i:04}.recipe.json"))).unwrap();
            assert!(builder::replay(&recipe).unwrap().canonically_eq(&d));
        }
    }
    // Same seed, same files.
    let again = tempfile::tempdir().unwrap();
    run(&["generate", "--count", "3", "--length", "5", "--kind", "good", "--seed", "9", "--out", path(again.path())]);
    for i in 0..3 {
        let name = format!("good-{i:04}.json");
        assert_eq!(
            std::fs::read(dir.path().join(&name)).unwrap(),
            std::fs::read(again.path().join(&name)).unwrap()
        );
    }
}

#[test]
fn verify_random_corpus_succeeds_with_a_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&["verify", "--random", "10", "--seed", "3", "--properties", "all", "--json", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains("10 lattices"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["failures"], 0);
    assert_eq!(report["lattices"], 10);
}

#[test]
fn verify_reports_a_tampered_fixture_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut fixture = ReachabilityFixture::compute(&fixtures::s7(), SequenceVariant::Ssl).unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, serde_json::to_string(&fixture).unwrap()).unwrap();
    let o = run(&["verify", path(&good)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // Drop one reachable edge: the stored relation no longer matches con(p).
    let dropped = fixture.reachable[0].edges.pop().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&fixture).unwrap()).unwrap();
    let o = run(&["verify", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL"), "{text}");
    assert!(text.contains(&format!("q={dropped}")), "{text}");
}

#[test]
fn verify_rejects_bad_input_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("n5.json");
    std::fs::write(&bad, r#"{"size":2,"upper_covers":[[1],[0]]}"#).unwrap();
    assert_eq!(run(&["verify", path(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["verify", "/does/not/exist.json"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--random", "1", "--properties", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_matches_the_library() {
    let a = run(&["simulate", "--seed", "4", "--events", "200"]);
    let b = run(&["simulate", "--seed", "4", "--events", "200"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let lib = swing_lattice::game::simulate(&swing_lattice::game::GameConfig::with_seed(4), 200).unwrap();
    assert_eq!(stdout(&a), lib.to_json_lines());

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("log.jsonl");
    let o = run(&["simulate", "--seed", "4", "--events", "200", "--out", path(&out)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn simulate_and_serve_reject_invalid_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"initial_lives":0}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", path(&cfg)]).status.code(), Some(2));
    assert_eq!(run(&["serve", "--config", path(&cfg)]).status.code(), Some(2));
    assert_eq!(run(&["serve", "--assets", "/does/not/exist"]).status.code(), Some(2));
}
