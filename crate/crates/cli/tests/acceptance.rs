//! Runs the acceptance matrix through the `symcap suite` binary and prints one
//! PASS/FAIL line per criterion. Harness-free so the lines are never captured.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};
use symcap::capacity::{minimize_capacity, SolverConfig};
use symcap::{ConvexBody, SymplecticMap};

const SEED: &str = "7";
const SUITE_BUDGET: Duration = Duration::from_secs(15 * 60);
const BALL_BUDGET: Duration = Duration::from_secs(30);

fn run_suite(out: &Path) -> (i32, Duration) {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_symcap"))
        .args(["suite", "--seed", SEED, "--out"])
        .arg(out)
        .output()
        .expect("symcap binary runs");
    let elapsed = start.elapsed();
    if !output.stderr.is_empty() {
        eprint!("{}", String::from_utf8_lossy(&output.stderr));
    }
    (output.status.code().unwrap_or(-1), elapsed)
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("under dir").to_path_buf();
                out.insert(rel, std::fs::read(&path).expect("readable artifact"));
            }
        }
    }
    out
}

/// Per-criterion verdicts from `summary.csv`; evidence-only rows never fail.
fn verdicts(summary: &str) -> BTreeMap<u8, (usize, usize)> {
    let mut out: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for line in summary.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let criterion: u8 = cols[1].parse().expect("criterion column");
        let failed = cols[7] != "true" && cols[8] != "true";
        let e = out.entry(criterion).or_default();
        e.0 += 1;
        if failed {
            e.1 += 1;
        }
    }
    out
}

fn ball_timings() -> Vec<(usize, Duration, f64)> {
    [2, 4]
        .into_iter()
        .map(|dim| {
            let start = Instant::now();
            let r = minimize_capacity(&ConvexBody::unit_ball(dim), &SymplecticMap::identity(dim / 2), &SolverConfig::default())
                .expect("ball capacity");
            (dim, start.elapsed(), r.value)
        })
        .collect()
}

fn main() -> ExitCode {
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    let (code_a, time_a) = run_suite(a.path());
    let (code_b, time_b) = run_suite(b.path());

    let files_a = files(a.path());
    let files_b = files(b.path());
    let identical = !files_a.is_empty() && files_a == files_b;
    let summary = String::from_utf8(files_a.get(Path::new("summary.csv")).cloned().unwrap_or_default()).expect("utf8 csv");
    let per_criterion = verdicts(&summary);

    let balls = ball_timings();
    let balls_fast = balls.iter().all(|(_, t, _)| *t < BALL_BUDGET);

    let mut all = true;
    for c in 1..=10u8 {
        let (pass, note) = match c {
            10 => (
                identical && time_a < SUITE_BUDGET && time_b < SUITE_BUDGET,
                format!(
                    "identical outputs: {identical} ({} files), runtimes {:.1}s / {:.1}s",
                    files_a.len(),
                    time_a.as_secs_f64(),
                    time_b.as_secs_f64()
                ),
            ),
            _ => {
                let (n, failed) = per_criterion.get(&c).copied().unwrap_or((0, 0));
                let mut pass = n > 0 && failed == 0;
                let mut note = format!("{n} checks, {failed} failed");
                if c == 1 {
                    pass &= balls_fast;
                    for (dim, t, v) in &balls {
                        note.push_str(&format!("; B{dim} {v:.6} in {:.2}s", t.as_secs_f64()));
                    }
                }
                (pass, note)
            }
        };
        all &= pass;
        println!("criterion {c:>2}: {} ({note})", if pass { "PASS" } else { "FAIL" });
    }
    let exit_ok = (code_a == 0) == all && code_a == code_b;
    if !exit_ok {
        println!("suite exit codes {code_a} / {code_b} disagree with the criteria");
    }
    if all && exit_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
