use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use smoothgreed_core::instances::Instance;
use smoothgreed_core::smoothing::SmoothedScalar;

fn smoothgreed(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_smoothgreed")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn design_writes_csv_json_and_smoothing() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("cap");
    let (code, _, err) = smoothgreed(&["design", "--objective", "cap", "--grid", "200", "--out", s(&prefix)]);
    assert_eq!(code, 0, "{err}");
    let summary = json(&dir.path().join("cap.json"));
    assert!((summary["beta"].as_f64().unwrap() - 1.582).abs() < 2e-3);
    assert_eq!(summary["certified"], true);
    let csv = fs::read_to_string(dir.path().join("cap.csv")).unwrap();
    let mut lines = csv.lines();
    let prov = lines.next().unwrap();
    assert!(prov.starts_with("# smoothgreed ") && prov.contains("schema=v1") && prov.contains("grid=200"), "{prov}");
    assert_eq!(lines.next(), Some("u,y,psi,psiS,beta"));
    assert_eq!(lines.count(), 201);
    let smoothed: SmoothedScalar = serde_json::from_str(&fs::read_to_string(dir.path().join("cap.smoothing.json")).unwrap()).unwrap();
    assert_eq!(smoothed.d(), 200);
}

#[test]
fn design_linear_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("lin");
    let (code, _, _) = smoothgreed(&["design", "--objective", "linear", "--grid", "50", "--out", s(&prefix)]);
    assert_eq!(code, 0);
    assert!((json(&dir.path().join("lin.json"))["beta"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn bad_input_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(smoothgreed(&["design", "--variant", "seq", "--out", s(&out)]).0, 4);
    assert_eq!(smoothgreed(&["design", "--objective", "nonsense", "--out", s(&out)]).0, 4);
    assert_eq!(smoothgreed(&["design", "--grid", "3", "--out", s(&out)]).0, 4);
    assert_eq!(smoothgreed(&["frobnicate"]).0, 4);
    assert_eq!(smoothgreed(&["run", "--instance", s(&dir.path().join("missing.json")), "--out", s(&out)]).0, 1);
    assert_eq!(smoothgreed(&["--help"]).0, 0);
}

#[test]
fn generate_run_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("tri.json");
    let (code, _, err) = smoothgreed(&["generate", "--family", "adwords_triangular", "--n", "6", "--phase-len", "3", "--out", s(&inst)]);
    assert_eq!(code, 0, "{err}");
    let parsed: Instance = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(parsed.steps.len(), 18);

    let prefix = dir.path().join("run");
    let (code, _, err) = smoothgreed(&["run", "--instance", s(&inst), "--smoothing", "design", "--out", s(&prefix)]);
    assert_eq!(code, 0, "{err}");
    let trace = fs::read_to_string(dir.path().join("run.trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 18);
    let summary = json(&dir.path().join("run.summary.json"));
    for key in ["P", "D", "ratio_lb", "alpha_used"] {
        assert!(summary[key].is_number(), "{key}");
    }
    assert!(summary["ratio_lb"].as_f64().unwrap() >= 1.0 - (-1.0f64).exp() - 1e-9);

    let (code, stdout, _) = smoothgreed(&["certify", "--instance", s(&inst), "--algo", "seq"]);
    assert_eq!(code, 0);
    let cert: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(cert["algorithm"], "seq");
    assert_eq!(cert["passed"], true);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("lp.json");
    assert_eq!(smoothgreed(&["generate", "--family", "lp_random", "--n", "3", "--m", "25", "--seed", "9", "--out", s(&inst)]).0, 0);
    let mut traces = Vec::new();
    for k in 0..2 {
        let prefix = dir.path().join(format!("r{k}"));
        assert_eq!(smoothgreed(&["run", "--instance", s(&inst), "--smoothing", "nesterov", "--out", s(&prefix)]).0, 0);
        traces.push(fs::read(dir.path().join(format!("r{k}.trace.jsonl"))).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn logdet_graph_instance_runs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("ld.json");
    let (code, _, err) = smoothgreed(&["generate", "--family", "logdet_stream", "--n", "4", "--m", "10", "--edges", "0-1,1-2,2-3", "--out", s(&inst)]);
    assert_eq!(code, 0, "{err}");
    let prefix = dir.path().join("ld");
    assert_eq!(smoothgreed(&["run", "--instance", s(&inst), "--smoothing", "nesterov", "--out", s(&prefix)]).0, 0);
    let (code, _, _) = smoothgreed(&["generate", "--family", "logdet_stream", "--n", "4", "--edges", "0-1,2-3", "--out", s(&inst)]);
    assert_eq!(code, 4);
}

#[test]
fn sweep_csv_has_provenance_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, _, err) = smoothgreed(&[
        "sweep", "--family", "adwords_triangular", "--n-list", "1,4", "--phase-lens", "1,4", "--algo", "both", "--smoothing", "design",
        "--out", s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let prov = lines.next().unwrap();
    assert!(prov.starts_with("# smoothgreed") && prov.contains("command=sweep") && prov.contains("n_list=1 4"), "{prov}");
    assert!(lines.next().unwrap().starts_with("family,n,size,seed,algo"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    // n = 1: the single advertiser gets everything, up to the inner solver
    // tolerance once smoothed.
    let first: Vec<&str> = rows[0].split(',').collect();
    assert!((first[9].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);

    let (code, _, _) = smoothgreed(&["sweep", "--n-list", "1", "--phase-lens", "3", "--out", s(&out)]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[9].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[design]\nobjective = \"linear\"\ngrid = 40\n").unwrap();
    let a = dir.path().join("a");
    assert_eq!(smoothgreed(&["--config", s(&cfg), "design", "--out", s(&a)]).0, 0);
    let sa = json(&dir.path().join("a.json"));
    assert_eq!(sa["d"], 40);
    assert_eq!(sa["objective"]["kind"], "linear");
    let b = dir.path().join("b");
    assert_eq!(smoothgreed(&["--config", s(&cfg), "design", "--grid", "60", "--out", s(&b)]).0, 0);
    assert_eq!(json(&dir.path().join("b.json"))["d"], 60);
    fs::write(&cfg, "[design]\nbogus = 1\n").unwrap();
    assert_eq!(smoothgreed(&["--config", s(&cfg), "design", "--out", s(&b)]).0, 4);
}

#[test]
fn figures_write_monotone_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = smoothgreed(&["figures", "--which", "2a", "--grid", "100", "--out", s(dir.path())]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(dir.path().join("fig_2a.csv")).unwrap();
    let ratios: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 11);
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
}
