use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn pawncount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pawncount"))
        .args(args)
        .env_remove("CENSUS_CACHE_DIR")
        .output()
        .expect("run pawncount")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn count_prints_the_n4_ledger() {
    let o = pawncount(&["count", "--n", "4", "--verbose"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.contains("sieve: n=4 unreachable=18 total=163 percent=11.04"),
        "{text}"
    );
    let ledger: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| l.trim().split(' ').next().unwrap())
        .collect();
    assert_eq!(ledger, ["+12", "+10", "-4"]);
    assert!(text.contains("combinations of 1:"), "{text}");
}

#[test]
fn both_methods_agree() {
    let o = pawncount(&["--format", "json", "count", "--n", "5", "--method", "both"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["agree"], true);
    assert_eq!(v["sieve"]["unreachable"], 550);
    assert_eq!(v["brute"]["unreachable"], 550);
    assert_eq!(v["brute"]["percent_unreachable"], 11.12);
}

#[test]
fn table_in_every_format() {
    let o = pawncount(&["--format", "csv", "table", "--max-n", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,unreachable,total,percent_unreachable,elapsed_ms"
    );
    let rows: Vec<String> = lines[1..]
        .iter()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect();
    assert_eq!(
        rows,
        [
            "3,0,8,0.00",
            "4,18,163,11.04",
            "5,550,4944,11.12",
            "6,16398,190051,8.63"
        ]
    );

    let v = json(&pawncount(&["--format", "json", "table", "--max-n", "5"]));
    let counts: Vec<u64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["unreachable"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, [0, 18, 550]);

    let text = stdout(&pawncount(&["table", "--max-n", "4"]));
    let widths: Vec<usize> = text.lines().map(str::len).collect();
    assert!(widths.windows(2).all(|w| w[0] == w[1]), "{text}");
}

#[test]
fn reachable_verdicts() {
    let o = pawncount(&["reachable", "--n", "8", "8/P7/PP6/8"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "unreachable");

    let o = pawncount(&["--format", "json", "reachable", "--n", "8", "8/8/PP6/8"]);
    let v = json(&o);
    assert_eq!(v["reachable"], true);
    assert_eq!(v["pawns"], 2);
    assert_eq!(v["assignment"].as_array().unwrap().len(), 2);

    let o = pawncount(&["reachable", "--n", "8", "8/PP6/PP6/8"]);
    assert_eq!(stdout(&o).trim(), "unreachable");
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["count", "--n", "2"][..],
        &["count", "--n", "x"],
        &["reachable", "--n", "8", "8/8/8/P7"],
        &["reachable", "--n", "4", "8/PPPPP3/8"],
        &["count", "--n", "10", "--method", "brute"],
        &["frobnicate"],
        &["--threads", "0", "count", "--n", "4"],
    ] {
        let o = pawncount(args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(pawncount(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_echoes_its_seed() {
    let o = pawncount(&["verify", "--n", "4", "--samples", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("verify n=4 samples=0 seed=1"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");

    let a = json(&pawncount(&[
        "--format",
        "json",
        "verify",
        "--n",
        "5",
        "--samples",
        "200",
        "--seed",
        "77",
    ]));
    let b = json(&pawncount(&[
        "--format",
        "json",
        "verify",
        "--n",
        "5",
        "--samples",
        "200",
        "--seed",
        "77",
    ]));
    assert_eq!(a["seed"], 77);
    assert_eq!(a, b);
}

#[test]
fn core_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let first = pawncount(&["--cores", path, "count", "--n", "6"]);
    assert!(first.status.success());
    let cache = dir.path().join("cores-n6.txt");
    let saved = fs::read_to_string(&cache).unwrap();
    assert!(saved.starts_with("# unsat cores n=6"), "{saved}");

    let second = pawncount(&["--cores", path, "count", "--n", "6"]);
    assert!(second.status.success());
    assert!(second.stderr.is_empty());
    assert_eq!(
        stdout(&first).split(" elapsed").next(),
        stdout(&second).split(" elapsed").next()
    );

    // A cache for another board size is ignored with a warning.
    fs::copy(&cache, dir.path().join("cores-n5.txt")).unwrap();
    let o = pawncount(&["--cores", path, "count", "--n", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("unreachable=550"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
