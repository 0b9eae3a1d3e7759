//! Exit codes, grammar errors, data ingestion, and report round-trips of
//! the installed binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cmest-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn estimate_known_values() {
    let out = run(&["estimate", "--model", "normal", "--q", "recip", "--x", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("1.2533141"), "{}", stdout(&out));

    let out = run(&[
        "estimate",
        "--model",
        "gamma:alpha=2",
        "--q",
        "recip",
        "--x",
        "3",
    ]);
    assert!(stdout(&out).contains("estimate=1.5"));

    let out = run(&[
        "estimate",
        "--model",
        "truncnormal:sigma=1,b=0",
        "--q",
        "recip",
        "--x",
        "-1",
    ]);
    assert!(stdout(&out).contains("1.4106861"), "{}", stdout(&out));
}

#[test]
fn estimate_exit_codes_and_grammar_errors() {
    // unknown key named in the message, usage exit code
    let out = run(&[
        "estimate",
        "--model",
        "gamma:alpha=2,bogus=1",
        "--q",
        "recip",
        "--x",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"), "{}", stderr(&out));

    let out = run(&["estimate", "--model", "normal", "--q", "power", "--x", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains('k'), "{}", stderr(&out));

    // per-point domain error: reported, not fatal, exit 2
    let out = run(&[
        "estimate",
        "--model",
        "gamma:alpha=2",
        "--q",
        "recip",
        "--x",
        "1,-1,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("x=1 estimate=0.5"));
    assert!(stdout(&out).contains("x=2 estimate=1"));
    assert!(stderr(&out).contains("outside the support"));

    // --x and --data are mutually exclusive
    let out = run(&[
        "estimate",
        "--model",
        "normal",
        "--q",
        "recip",
        "--x",
        "1",
        "--data",
        "whatever.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_rows_yield_estimates_or_positioned_errors() {
    let dir = tmpdir("csv");
    let path = dir.join("data.csv");
    std::fs::write(&path, "value,weight\n0.5,1\noops,1\n1.5,2\n").unwrap();
    let out = run(&[
        "estimate",
        "--model",
        "normal",
        "--q",
        "recip",
        "--data",
        path.to_str().unwrap(),
        "--column",
        "value",
    ]);
    // 3 data rows -> 2 estimates + 1 positioned error, exit 2
    assert_eq!(out.status.code(), Some(2));
    let so = stdout(&out);
    assert_eq!(so.matches("estimate=").count(), 2, "{so}");
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));

    // headerless single column with an index spec
    let path = dir.join("plain.csv");
    std::fs::write(&path, "0.5\n1.0\n").unwrap();
    let out = run(&[
        "estimate",
        "--model",
        "normal",
        "--q",
        "recip",
        "--data",
        path.to_str().unwrap(),
        "--column",
        "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("estimate=").count(), 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_data_ingestion() {
    let dir = tmpdir("json");
    let path = dir.join("data.json");
    std::fs::write(&path, r#"{"xs": [0.5, 1.0, 2.0]}"#).unwrap();
    let out = run(&[
        "estimate",
        "--model",
        "normal",
        "--q",
        "recip",
        "--data",
        path.to_str().unwrap(),
        "--column",
        "xs",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("estimate=").count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sufficient_statistic_reduction() {
    let out = run(&[
        "estimate",
        "--model",
        "normal",
        "--q",
        "recip",
        "--x",
        "0.5,1.5,1.0,1.0",
        "--sufficient",
    ]);
    assert!(out.status.success());
    let so = stdout(&out);
    // T = 4, reduced family sigma = 2, single estimate 2 * Mills(2)
    assert!(so.contains("T = 4"), "{so}");
    assert!(so.contains("normal:sigma=2"), "{so}");
    assert_eq!(so.matches("estimate=").count(), 1, "{so}");
    assert!(so.contains("0.84273845"), "{so}"); // 2 * Mills(2)

    // not available for truncated families
    let out = run(&[
        "estimate",
        "--model",
        "truncnormal:sigma=1,b=0",
        "--q",
        "recip",
        "--x",
        "-1,-2",
        "--sufficient",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    // passing grid
    let out = run(&[
        "verify",
        "--model",
        "gamma:alpha=2",
        "--q",
        "recip",
        "--thetas",
        "0.5,1,2",
        "--n",
        "20000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("PASS").count(), 3, "{}", stdout(&out));

    // domain error: theta <= 0 for the reciprocal target
    let out = run(&[
        "verify", "--model", "normal", "--q", "recip", "--thetas", "-1", "--n", "10000", "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_report_round_trip() {
    let dir = tmpdir("verify");
    let path = dir.join("campaign.json");
    let out = run(&[
        "verify",
        "--model",
        "gamma:alpha=2",
        "--q",
        "recip",
        "--thetas",
        "0.5,1",
        "--n",
        "10000",
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let report = cmest::CampaignReport::from_json(&text).unwrap();
    assert_eq!(report.reports.len(), 2);
    assert_eq!(report.summary, report.recount());
    assert_eq!(report.summary.pass, 2);
    // printed summary agrees with the persisted one
    assert!(
        stdout(&out).contains("summary: 2 pass, 0 fail"),
        "{}",
        stdout(&out)
    );
    // seeded run: volatile fields are pinned
    assert!(text.contains("\"timestamp\": \"1970-01-01T00:00:00Z\""));
    assert!(report.reports.iter().all(|r| r.wall_time_ms == 0));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn demo_divergence_contract() {
    let out = run(&["demo-divergence", "--theta", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["demo-divergence", "--theta", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("exceeds 1e6"), "{}", stdout(&out));
}

#[test]
fn catalog_lists_families_and_closed_forms() {
    let out = run(&["catalog"]);
    assert!(out.status.success());
    let so = stdout(&out);
    for needle in ["normal", "gamma", "invgauss", "truncnormal"] {
        assert!(so.contains(needle), "missing {needle}");
    }
    assert!(so.contains("normal") && so.contains("recip"));
    // the flagship closed forms are flagged
    assert!(so.contains("closed_form=yes (normal-mills)"), "{so}");
    assert!(so.contains("closed_form=yes (normal-shiftpow-k2)"), "{so}");
    assert!(so.contains("closed_form=no"), "{so}");
}
