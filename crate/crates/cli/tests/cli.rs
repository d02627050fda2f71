use std::path::Path;
use std::process::{Command, Output};

fn gbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbeam")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, format!("name = \"{name}\"\n{body}")).unwrap();
    path.to_string_lossy().into_owned()
}

const RADIAL: &str = r#"
example = "radial3d"
k_values = [40.0, 80.0]
times = [0.5]
norms = [{ kind = "point", denominator = "u_gb_at_t" }]
"#;

#[test]
fn show_lists_presets_and_prints_toml() {
    let out = gbeam(&["show"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "table1") && text.lines().any(|l| l == "fig1-qualitative"));
    let out = gbeam(&["show", "table4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("example = \"annulus\"") && text.contains("size = 512"));
    assert_eq!(gbeam(&["show", "table9"]).status.code(), Some(3));
}

#[test]
fn verify_reports_and_rejects_unknown_suites() {
    let out = gbeam(&["verify", "spectral"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS spectral/")));
    assert!(text.contains("energy_conserved"));
    assert_eq!(gbeam(&["verify", "nonsense"]).status.code(), Some(3));
}

#[test]
fn config_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(gbeam(&["run", missing.to_str().unwrap()]).status.code(), Some(3));
    let bad = write_config(dir.path(), "bad", "example = \"radial3d\"\nk_values = [80.0, 40.0]\ntimes = [0.5]\n");
    let out = gbeam(&["run", &bad, "--output-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("strictly ascending"));
    let coarse = write_config(
        dir.path(),
        "coarse",
        "example = \"annulus\"\nk_values = [80.0]\ntimes = [0.3]\nnorms = [{ kind = \"energy\", denominator = \"ugb_energy\" }]\ngrid = { size = 128, side = 4.0 }\n",
    );
    assert_eq!(gbeam(&["run", &coarse]).status.code(), Some(3));
}

#[test]
fn run_writes_tables_and_is_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "radial", RADIAL);
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let first = gbeam(&["run", &cfg, "--output-dir", o]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = std::fs::read_to_string(out_dir.join("errors_point.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,error_k40,error_k80,order_k40_k80");
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["status"], "complete");
    assert_eq!(m["provenance"].as_array().unwrap().len(), 2);
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("records.json")).unwrap()).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 2);

    assert!(gbeam(&["run", &cfg, "--output-dir", o]).status.success());
    assert_eq!(std::fs::read_to_string(out_dir.join("manifest.json")).unwrap(), manifest);
    assert!(gbeam(&["run", &cfg, "--output-dir", o, "--force"]).status.success());
    assert_ne!(std::fs::read_to_string(out_dir.join("manifest.json")).unwrap(), manifest);
}

#[test]
fn single_k_table_has_no_order_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one", &RADIAL.replace("[40.0, 80.0]", "[100.0]"));
    let out_dir = dir.path().join("out");
    assert!(gbeam(&["run", &cfg, "--output-dir", out_dir.to_str().unwrap()]).status.success());
    let csv = std::fs::read_to_string(out_dir.join("errors_point.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,error_k100");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let body = "example = \"spherical\"\nk_values = [40.0, 80.0]\ntimes = [0.5]\nnorms = [{ kind = \"energy\", denominator = \"absolute\" }]\n";
    let cfg = write_config(dir.path(), "sph", body);
    let mut tables = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = gbeam(&["--threads", threads, "run", &cfg, "--output-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success());
        tables.push(std::fs::read(out_dir.join("errors_energy.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn non_convergence_exits_with_two_and_leaves_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{RADIAL}quadrature = {{ panels = [2, 2], order = [2, 2], abs_tol = 1e-14, max_refinements = 1 }}\n");
    let cfg = write_config(dir.path(), "tight", &body);
    let out_dir = dir.path().join("out");
    let out = gbeam(&["run", &cfg, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("FAILED").exists());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "failed");
}
