use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subconvexity"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("the binary runs")
}

fn read(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_names_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["--list"], dir.path());
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    for name in ["weil-scan", "voronoi-verify", "decompose", "optimize-exponents"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn exponents_report_holds_the_exact_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["optimize-exponents"], dir.path());
    assert_eq!(output.status.code(), Some(0));
    let report = read(dir.path().join("optimize-exponents.report.json"));
    assert_eq!(report["results"]["p_exponent"], "5/18");
    assert_eq!(report["results"]["l_exponent"], "1/9");
    assert_eq!(report["results"]["delta"], "1/18");
    assert_eq!(report["results"]["final_exponent"], "13/18");
    assert_eq!(report["pass"], true);
}

#[test]
fn small_weil_scan_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["weil-scan", "--set", "weil_c_max=60", "--csv"], dir.path());
    assert_eq!(
        output.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(dir.path().join("weil-scan.csv").exists());
    assert!(dir.path().join("weil-scan.header.json").exists());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "spacing",
        "--set",
        "spacing_anchors=[2,4]",
        "--set",
        "spacing_moduli=[5]",
        "--seed",
        "3",
    ];
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    let body = |dir: &Path| std::fs::read(dir.join("spacing.report.json")).unwrap();
    assert_eq!(body(a.path()), body(b.path()));
}

#[test]
fn unannihilated_voronoi_weight_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["voronoi-verify", "--set", "voronoi_log_moments=0"], dir.path());
    assert_eq!(output.status.code(), Some(2));
    let report = read(dir.path().join("voronoi-verify.report.json"));
    assert!(
        report["error"].as_str().unwrap().contains("annihilated_log_moments"),
        "{report}"
    );
}

#[test]
fn unknown_keys_and_bad_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["weil-scan", "--set", "no_such_key=1"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["keylemma", "--set", "keylemma_moduli=[1]"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
