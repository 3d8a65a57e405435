use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures/blocks")
        .join(name)
}

fn fragplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragplan"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unsolved_run_reports_its_stage() {
    let out = fragplan(&[
        "solve",
        "--incomplete-domain",
        s(&fixture("domain-incomplete.pddl")),
        "--problem",
        s(&fixture("tower.pddl")),
        "--cases",
        s(&fixture("cases")),
        "--delta",
        "3",
        "--no-fallback",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("failure stage=mining"), "{err}");
}

#[test]
fn bad_input_exits_with_3() {
    let out = fragplan(&["solve-classical", "--domain", "/nonexistent.pddl", "--problem", "x"]);
    assert_eq!(out.status.code(), Some(3));
    let out = fragplan(&["solve", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mine_prints_supports() {
    let out = fragplan(&[
        "mine",
        "--incomplete-domain",
        s(&fixture("domain-incomplete.pddl")),
        "--problem",
        s(&fixture("tower.pddl")),
        "--cases",
        s(&fixture("cases")),
        "--delta",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "2 (pickup b) (stack b a) (pickup c) (stack c b)\n"
    );
}

#[test]
fn generated_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let domain = fixture("domain.pddl");
    let mut listings = Vec::new();
    for run in ["a", "b"] {
        let cases = dir.path().join(run).join("cases");
        let problems = dir.path().join(run).join("problems");
        let gen = [
            ["gen-cases", "--count", "5", "--seed", "3", "--out", s(&cases)],
            ["gen-problems", "--count", "4", "--seed", "3", "--out", s(&problems)],
        ];
        for args in gen {
            let mut full = vec![args[0], "--domain", s(&domain)];
            full.extend_from_slice(&args[1..]);
            assert!(fragplan(&full).status.success(), "{full:?}");
        }
        let mut files = Vec::new();
        for d in [&cases, &problems] {
            let mut names: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
            names.sort();
            for n in names {
                files.push((n.file_name().unwrap().to_owned(), std::fs::read(&n).unwrap()));
            }
        }
        listings.push(files);
    }
    assert_eq!(listings[0].len(), 9);
    assert_eq!(listings[0], listings[1]);
}
