use std::path::Path;
use std::process::{Command, Output};

fn wmsens(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmsens"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WMSENS_OUT")
        .output()
        .expect("binary runs")
}

fn config_path(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = wmsens(&["experiment", "factor", "--threads", "1"], a.path());
    let rb = wmsens(&["experiment", "factor", "--threads", "3"], b.path());
    assert!(ra.status.success(), "{}", stderr(&ra));
    assert!(rb.status.success(), "{}", stderr(&rb));
    for f in ["factor.report.tsv", "factor.summary.tsv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
    let summary = std::fs::read_to_string(a.path().join("factor.summary.tsv")).unwrap();
    assert!(summary.contains("factor\tproduct\tverdict\tsensitive-evidence"));
    assert!(summary.contains("factor\tfactor2\tverdict\tisometry-evidence"));
}

#[test]
fn swapped_product_gives_the_symmetric_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("rotation-x-doubling.toml");
    let o = wmsens(&["experiment", "factor", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("factor.summary.tsv")).unwrap();
    assert!(summary.contains("factor\tproduct\tverdict\tsensitive-evidence"));
    assert!(summary.contains("factor\tfactor1\tverdict\tisometry-evidence"));
    assert!(summary.contains("factor\tfactor2\tverdict\tsensitive-evidence"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("rotation.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_wmsens"))
        .args(["classify", "--config", &cfg])
        .env("WMSENS_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("classify.report.tsv")).unwrap();
    for key in ["\nseed\t", "\nbox_schedule\t50,100\n", "\nanchors\t", "\nprecision_budget\t224\n", "\nquantile\t0.05\n", "[assumptions]"] {
        assert!(report.contains(key), "report lacks {key:?}");
    }
    assert!(report.contains("\nverdict\tisometry-evidence\n"));
}

#[test]
fn schema_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "[systems.r]\nsemigroup = { kind = \"full_lattice\" }\nfactors = [{ space = \"circle\", maps = [{ multipler = 1 }] }]\n",
    )
    .unwrap();
    let o = wmsens(&["classify", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("multipler"), "{}", stderr(&o));

    let o = wmsens(&["classify", "--system", "missing"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = wmsens(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = wmsens(&["experiment", "nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn precision_exhaustion_exits_with_its_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = wmsens(&["dg", "--system", "doubling", "--box", "300"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("precision budget exhausted"));
    let o = wmsens(&["dg", "--system", "doubling", "--precision-bits", "100"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn inconclusive_verdicts_exit_with_code_two_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    std::fs::write(
        &cfg,
        "[sensitivity]\nbox_schedule = [2, 4]\nanchor_depth = 1\nn_x = 10\nn_y = 50\n\
         [systems.doubling]\nsemigroup = { kind = \"full_lattice\" }\nfactors = [{ space = \"circle\", maps = [{ multiplier = 2 }] }]\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = wmsens(&["classify", "--config", cfg], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(stderr(&o).contains("plateau_fraction"));
    let o = wmsens(&["classify", "--config", cfg, "--allow-inconclusive"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn largeness_certificates_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = wmsens(&["subsemigroup", "--kind", "syndetic", "--k", "3", "--box", "1000"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains(": 0 1 2"));
    let o = wmsens(&["subsemigroup", "--kind", "thick", "--cone", "1,0,1,1", "--sizes", "1,30"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("block Box(30) + (30,0)"));
    let o = wmsens(&["subsemigroup", "--kind", "syndetic", "--k", "2", "--translates", "0", "--box", "10"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains(": false"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = wmsens(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
