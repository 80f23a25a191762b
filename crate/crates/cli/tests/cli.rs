//! End-to-end tests of the `cvss-temporal` binary: exact stdout for the
//! single-item commands, golden-file matches for the bulk ones, and the
//! 0/2 exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_cvss-temporal")
}

fn core_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

fn run(args: &[&str], cwd: Option<&Path>) -> Output {
    let mut command = Command::new(binary());
    command.args(args);
    if let Some(dir) = cwd {
        command.current_dir(dir);
    }
    command.output().expect("binary spawns")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn score_prints_the_classic_triple() {
    let output = run(&["score", "AV:N/AC:M/Au:N/C:P/I:P/A:P"], None);
    assert!(output.status.success());
    assert_eq!(stdout(&output), "impact=6.4 exploitability=8.6 base=6.8\n");
}

#[test]
fn score_accepts_parenthesized_vectors() {
    let output = run(&["score", "(AV:N/AC:L/Au:N/C:C/I:C/A:C)"], None);
    assert!(output.status.success());
    assert_eq!(
        stdout(&output),
        "impact=10.0 exploitability=10.0 base=10.0\n"
    );
}

#[test]
fn score_enhanced_requires_and_uses_scope() {
    let output = run(
        &[
            "score",
            "AV:N/AC:M/Au:N/C:P/I:P/A:P",
            "--enhanced",
            "--scope",
            "os",
        ],
        None,
    );
    assert!(output.status.success());
    assert_eq!(stdout(&output), "impact=9.2 exploitability=8.6 base=8.8\n");

    let output = run(
        &[
            "score",
            "AV:N/AC:M/Au:N/C:P/I:P/A:P",
            "--enhanced",
            "--scope",
            "app",
        ],
        None,
    );
    assert_eq!(stdout(&output), "impact=8.8 exploitability=8.6 base=8.5\n");

    let output = run(&["score", "AV:N/AC:M/Au:N/C:P/I:P/A:P", "--enhanced"], None);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn score_rejects_bad_vector_with_exit_2_and_token() {
    let output = run(&["score", "AV:X/AC:M/Au:N/C:P/I:P/A:P"], None);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("AV:X"), "{}", stderr(&output));
}

#[test]
fn ingest_reproduces_the_golden_corpus_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.txt");
    let data = core_data();
    let output = run(
        &[
            "ingest",
            "--nvd",
            data.join("nvd_android.json").to_str().unwrap(),
            "--nvd",
            data.join("nvd_ios.json").to_str().unwrap(),
            "--edb",
            data.join("edb.csv").to_str().unwrap(),
            "--patches",
            data.join("patches.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(output.status.success(), "{}", stderr(&output));
    assert_eq!(stdout(&output), "kept=1681 skipped=5 unlinked=132\n");
    assert!(stderr(&output).contains("no CVSS v2 metrics"));
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(data.join("golden/corpus.txt")).unwrap()
    );
}

#[test]
fn ingest_missing_file_is_exit_2() {
    let output = run(
        &[
            "ingest",
            "--nvd",
            "/no/such/feed.json",
            "--out",
            "/tmp/unused-corpus.txt",
        ],
        None,
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn ingest_empty_feed_yields_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let feed = dir.path().join("empty.json");
    std::fs::write(&feed, r#"{"CVE_Items": []}"#).unwrap();
    let out = dir.path().join("corpus.txt");
    let output = run(
        &[
            "ingest",
            "--nvd",
            feed.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(output.status.success());
    assert_eq!(stdout(&output), "kept=0 skipped=0 unlinked=0\n");
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "cvss-temporal-corpus v1\n"
    );
}

#[test]
fn analyze_android_matches_golden_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = core_data();
    let output = run(
        &[
            "analyze",
            "--corpus",
            data.join("golden/corpus.txt").to_str().unwrap(),
            "--platform",
            "android",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(output.status.success(), "{}", stderr(&output));
    for name in [
        "cia_incidence.csv",
        "hist_base.csv",
        "hist_impact.csv",
        "hist_exploitability.csv",
        "comparison.csv",
        "forecast.csv",
        "summary.json",
    ] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(data.join("golden/android").join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn analyze_is_idempotent_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let data = core_data();
    let corpus = data.join("golden/corpus.txt");
    for sub in ["one", "two"] {
        let output = run(
            &[
                "analyze",
                "--corpus",
                corpus.to_str().unwrap(),
                "--platform",
                "ios",
                "--out",
                dir.path().join(sub).to_str().unwrap(),
            ],
            None,
        );
        assert!(output.status.success());
    }
    for entry in std::fs::read_dir(dir.path().join("one")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            std::fs::read(dir.path().join("one").join(&name)).unwrap(),
            std::fs::read(dir.path().join("two").join(&name)).unwrap()
        );
    }
}

fn write_small_corpus(path: &Path, scope: &str) {
    let text = format!(
        "cvss-temporal-corpus v1\n\
         R|CVE-2015-1111|android|2015-03-01|AV:N/AC:M/Au:N/C:P/I:P/A:P|6.8|{scope}|cpe:2.3:o:google:android:6.0:*:*:*:*:*:*:*\n\
         T|CVE-2015-1111|2015-03-01|exploit:1\n"
    );
    std::fs::write(path, text).unwrap();
}

#[test]
fn analyze_empty_platform_subset_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_small_corpus(&corpus, "os");
    let output = run(
        &[
            "analyze",
            "--corpus",
            corpus.to_str().unwrap(),
            "--platform",
            "ios",
            "--out",
            dir.path().join("reports").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("empty subset"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn analyze_unresolved_scope_is_exit_2_listing_cves() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_small_corpus(&corpus, "unresolved");
    let output = run(
        &[
            "analyze",
            "--corpus",
            corpus.to_str().unwrap(),
            "--platform",
            "android",
            "--out",
            dir.path().join("reports").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("CVE-2015-1111"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn forecast_prints_a_decaying_series() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_small_corpus(&corpus, "os");
    let output = run(
        &[
            "forecast",
            "--corpus",
            corpus.to_str().unwrap(),
            "--cve",
            "CVE-2015-1111",
        ],
        None,
    );
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 25); // header + 24 months
    assert_eq!(
        lines[0],
        "cve_id,points,month,impact,temporal_exploitability,base"
    );
    assert!(lines[1].starts_with("CVE-2015-1111,1,0,6.4,"));
    // the exploit lands at month 1, full strength there, decayed by month 3
    let field = |line: &str, n: usize| line.split(',').nth(n).unwrap().parse::<f64>().unwrap();
    assert_eq!(field(lines[2], 4), 8.5888);
    assert!(field(lines[4], 4) < 1.0);
}

#[test]
fn forecast_horizon_flag_and_unknown_cve() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    write_small_corpus(&corpus, "os");
    let output = run(
        &[
            "forecast",
            "--corpus",
            corpus.to_str().unwrap(),
            "--cve",
            "CVE-2015-1111",
            "--horizon",
            "1",
        ],
        None,
    );
    assert_eq!(stdout(&output).lines().count(), 2);

    let output = run(
        &[
            "forecast",
            "--corpus",
            corpus.to_str().unwrap(),
            "--cve",
            "CVE-1999-0001",
        ],
        None,
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("unknown CVE"),
        "{}",
        stderr(&output)
    );

    let output = run(
        &[
            "forecast",
            "--corpus",
            corpus.to_str().unwrap(),
            "--cve",
            "CVE-2015-1111",
            "--horizon",
            "0",
        ],
        None,
    );
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("my-corpus.txt");
    write_small_corpus(&corpus, "os");
    std::fs::write(
        dir.path().join("cvss-temporal.conf"),
        "# local settings\ncorpus_path=my-corpus.txt\nhorizon_months=6\nlambda_floor=0.05\n",
    )
    .unwrap();

    // discovered config: corpus path and horizon come from the file
    let output = run(&["forecast", "--cve", "CVE-2015-1111"], Some(dir.path()));
    assert!(output.status.success(), "{}", stderr(&output));
    assert_eq!(stdout(&output).lines().count(), 7);

    // explicit flag wins over the config value
    let output = run(
        &["forecast", "--cve", "CVE-2015-1111", "--horizon", "2"],
        Some(dir.path()),
    );
    assert_eq!(stdout(&output).lines().count(), 3);

    // malformed config line is a user error
    std::fs::write(dir.path().join("cvss-temporal.conf"), "horizon_months\n").unwrap();
    let output = run(&["forecast", "--cve", "CVE-2015-1111"], Some(dir.path()));
    assert_eq!(output.status.code(), Some(2));
}
