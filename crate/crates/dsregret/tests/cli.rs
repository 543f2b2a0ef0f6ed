//! End-to-end tests of the command line binary: pinned outputs on the bundled
//! fixtures, exit code conventions, JSON shape, determinism, and environment
//! handling.

mod common;

use std::io::Write;
use std::process::Command;

fn run_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dsregret"));
    c.args(args).env_remove("DSREGRET_HORIZON");
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_env(args, &[])
}

fn fx(name: &str) -> String {
    common::fixture_path(name)
}

// ---------------------------------------------------------------------------
// pinned outputs
// ---------------------------------------------------------------------------

#[test]
fn values_output_is_pinned() {
    let (code, out, _) = run(&["values", &fx("GB.game")]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "v0 3/1 5/1 3/1\n\
         v1 5/1 10/1 10/1\n\
         v2 6/1 6/1 6/1\n\
         v1p 20/1 20/1 20/1\n\
         v1pp 10/1 10/1 10/1\n\
         v2p 12/1 12/1 12/1\n"
    );
}

#[test]
fn regret_output_is_pinned() {
    let (code, out, _) = run(&["regret", &fx("GB.game"), &fx("GB-v2.strat")]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "regret 2/1\nwitness length=0 vertex=v0 switched=true deviate-to=v1\n"
    );
}

#[test]
fn min_regret_output_is_pinned() {
    let (code, out, _) = run(&["min-regret", &fx("GB.game")]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "Regret 1/2\n\
         horizon 144 sufficient\n\
         strategy switching\n\
         sigma1 v0 -> v1\n\
         sigma1 v1p -> v1p\n\
         sigma1 v1pp -> v1pp\n\
         sigma1 v2p -> v2p\n\
         threshold v0 2\n\
         threshold v1p 0\n\
         threshold v1pp 0\n\
         threshold v2p 0\n\
         sigma2 v0 -> v2\n\
         sigma2 v1p -> v1p\n\
         sigma2 v1pp -> v1pp\n\
         sigma2 v2p -> v2p\n"
    );
}

#[test]
fn compress_output_is_pinned() {
    let (code, out, _) = run(&[
        "compress",
        &fx("GC.game"),
        "--history",
        "u,u,u,u,u,u,u,u,u,u,u,u",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "alpha u\nbeta u u\nk 11\ngamma u\ninput-value 2047/1024\noutput-value 2047/1024\n"
    );
}

#[test]
fn product_output_is_pinned() {
    let (code, out, _) = run(&["product", &fx("GB.game"), &fx("GB-v2.strat")]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "states 3\n\
         state 0 vertex=v0 counter=0 switched=true initial\n\
         state 1 vertex=v2 counter=0 switched=true\n\
         state 2 vertex=v2p counter=0 switched=true\n\
         edge 0 -> 1 weight=0\n\
         edge 1 -> 2 weight=0\n\
         edge 2 -> 2 weight=6\n"
    );
}

#[test]
fn admissibility_verdicts_are_pinned() {
    let (code, out, _) = run(&["check-admissible", &fx("GA.game"), &fx("GA-double.strat")]);
    assert_eq!(code, 0);
    assert_eq!(out, "dominated vertex=v2 counter=0 switched=true\n");

    let (code, out, _) = run(&["check-admissible", &fx("GB.game"), &fx("GB-v1.strat")]);
    assert_eq!(code, 0);
    assert_eq!(out, "admissible\n");
}

#[test]
fn admissibilize_reports_the_repaired_machine() {
    let (code, out, _) = run(&["admissibilize", &fx("GA.game"), &fx("GA-double.strat")]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("memory-states 3"));
    assert_eq!(lines.next(), Some("initial c0u"));
    assert!(out.contains("state sbwo"));
    assert!(out.contains("  on v2 -> sbwo"));
    assert!(out.contains("  at v2 -> v2p"));
}

#[test]
fn dominance_verdicts() {
    let (code, out, _) = run(&[
        "dominates",
        &fx("GB.game"),
        &fx("GB-v1.strat"),
        &fx("GB-v2.strat"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "incomparable\n");

    let (code, out, _) = run(&[
        "dominates",
        &fx("GB.game"),
        &fx("GB-v1.strat"),
        &fx("GB-v1.strat"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "equivalent\n");
}

#[test]
fn exists_answers_for_astronomical_lengths() {
    let huge = "340282366920938463463374607431768211456"; // 2^128
    let game = fx("GB.game");
    let strat = fx("GB-v1.strat");
    let ask = |switched: &str| {
        run(&[
            "exists", &game, &strat, "--n", huge, "--switched", switched, "--at", "v1p",
            "--action", "v1p",
        ])
    };
    let (code, out, _) = ask("false");
    assert_eq!((code, out.as_str()), (0, "yes\n"));
    let (code, out, _) = ask("true");
    assert_eq!((code, out.as_str()), (0, "no\n"));
}

// ---------------------------------------------------------------------------
// json
// ---------------------------------------------------------------------------

#[test]
fn json_object_has_the_documented_shape() {
    let (code, out, _) = run(&["values", &fx("GB.game"), "--json", "--decimal", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "values");
    assert_eq!(v["result"], "ok");
    assert_eq!(v["exact"]["v0.aVal"], "3/1");
    assert_eq!(v["exact"]["v1.cVal"], "10/1");
    assert_eq!(v["decimal"]["v0.aVal"], "3.00");

    let (code, out, _) = run(&["regret", &fx("GB.game"), &fx("GB-v2.strat"), "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"], "regret 2/1");
    assert_eq!(v["exact"]["regret"], "2/1");
    assert_eq!(v["witness"]["vertex"], "v0");
    assert_eq!(v["witness"]["length"], 0);
    assert!(v.get("decimal").is_none());
}

// ---------------------------------------------------------------------------
// exit codes and diagnostics
// ---------------------------------------------------------------------------

#[test]
fn exit_codes_follow_the_conventions() {
    let (code, _, err) = run(&["values", "no-such-file.game"]);
    assert_eq!(code, 66, "missing file");
    assert!(err.starts_with("error: "));

    let (code, _, err) = run(&["regret", &fx("GB.game"), &fx("GA-double.strat")]);
    assert_eq!(code, 1, "strategy/game mismatch");
    assert!(err.contains("not owned by Eve"));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "garbage").unwrap();
    let (code, _, err) = run(&["values", bad.path().to_str().unwrap()]);
    assert_eq!(code, 1, "parse error");
    assert!(err.contains("line 1"));

    let (code, _, _) = run(&["--no-such-flag"]);
    assert_eq!(code, 64, "unknown flag");
    let (code, _, _) = run(&["regret", &fx("GB.game")]);
    assert_eq!(code, 64, "missing argument");

    let (code, _, _) = run(&["--help"]);
    assert_eq!(code, 0);
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("dsregret "));

    let (code, out, _) = run(&["check-optimal", &fx("GB.game"), &fx("GB-v1.strat"), "--horizon", "0"]);
    assert_eq!(code, 2, "inconclusive");
    assert!(out.starts_with("inconclusive regret=1/2 horizon=0"));

    let (code, out, _) = run(&["check-optimal", &fx("GB.game"), &fx("GB-v1.strat")]);
    assert_eq!(code, 0);
    assert_eq!(out, "optimal regret=1/2 minimum=1/2\n");

    let (code, out, _) = run(&["check-optimal", &fx("GB.game"), &fx("GB-v2.strat")]);
    assert_eq!(code, 0);
    assert_eq!(out, "suboptimal regret=2/1 minimum=1/2\n");
}

#[test]
fn verification_flag_reports_and_fails_loudly() {
    let (code, out, _) = run(&["values", &fx("GA.game"), "--verify"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("verified against oracle\n"));

    let (code, out, _) = run(&["regret", &fx("GB.game"), &fx("GB-v2.strat"), "--verify"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("verified against oracle\n"));

    let (code, out, _) = run(&["min-regret", &fx("GB.game"), "--verify"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("verified against oracle\n"));
}

// ---------------------------------------------------------------------------
// horizon handling and determinism
// ---------------------------------------------------------------------------

#[test]
fn horizon_flag_beats_environment_which_beats_default() {
    let (code, out, _) = run_env(&["min-regret", &fx("GB.game")], &[("DSREGRET_HORIZON", "0")]);
    assert_eq!(code, 0);
    assert!(out.contains("horizon 0 insufficient"), "{out}");

    let (code, out, _) = run_env(
        &["min-regret", &fx("GB.game"), "--horizon", "144"],
        &[("DSREGRET_HORIZON", "0")],
    );
    assert_eq!(code, 0);
    assert!(out.contains("horizon 144 sufficient"), "{out}");

    let (code, _, err) = run_env(&["min-regret", &fx("GB.game")], &[("DSREGRET_HORIZON", "abc")]);
    assert_eq!(code, 1);
    assert!(err.contains("DSREGRET_HORIZON"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let first = run(&["min-regret", &fx("GB.game"), "--json"]);
    for _ in 0..3 {
        assert_eq!(run(&["min-regret", &fx("GB.game"), "--json"]), first);
    }
    let first = run(&["values", &fx("GA.game"), "--witness", "v0"]);
    for _ in 0..3 {
        assert_eq!(run(&["values", &fx("GA.game"), "--witness", "v0"]), first);
    }
}
