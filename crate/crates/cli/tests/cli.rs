use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tnnsim"));
    cmd.env_remove("TNNSIM_SEED");
    cmd
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn simulate(dir: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out_path = dir.join("trace.csv");
    let config = cfg("clustering_toy.json");
    let out_str = out_path.display().to_string();
    let mut args = vec![
        "simulate", "--config", &config, "--cycles", "20", "--out", &out_str,
    ];
    args.extend(extra);
    (run(&args), out_path)
}

#[test]
fn simulate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = simulate(dir.path(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma_index,neuron,spike_time"));
    for line in lines {
        let f: Vec<u64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[0] < 20 && f[1] < 3 && f[2] < 64);
    }
}

#[test]
fn zero_cycles_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("t.csv");
    let out = run(&[
        "simulate",
        "--config",
        &cfg("clustering_toy.json"),
        "--cycles",
        "0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(out_path).unwrap(),
        "gamma_index,neuron,spike_time\n"
    );
}

#[test]
fn seed_flag_and_env_agree_and_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = simulate(dir.path(), &["--seed", "99"]);
    let a = std::fs::read(a).unwrap();
    let out_path = dir.path().join("trace.csv");
    let out = bin()
        .env("TNNSIM_SEED", "99")
        .args([
            "simulate",
            "--config",
            &cfg("clustering_toy.json"),
            "--cycles",
            "20",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&out_path).unwrap(), a);
    let (_, c) = simulate(dir.path(), &["--seed", "5"]);
    assert_ne!(std::fs::read(c).unwrap(), a);
}

#[test]
fn learn_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run.json");
    let out = run(&[
        "learn",
        "--config",
        &cfg("twolead_ecg_82x2.json"),
        "--cycles",
        "30",
        "--out",
        trace.to_str().unwrap(),
        "--format",
        "json",
        "--snapshot-every",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&trace).unwrap()).unwrap();
    assert_eq!(v["cycles"], 30);
    let snaps: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run.weights.json")).unwrap())
            .unwrap();
    let snaps = snaps.as_array().unwrap();
    assert_eq!(snaps.len(), 3);
    assert_eq!(snaps[2]["gamma_index"], 29);
    assert_eq!(snaps[0]["weights"].as_array().unwrap().len(), 164);
}

#[test]
fn data_file_drives_the_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let rows: String = (0..4)
        .map(|k| {
            let feats: Vec<String> = (0..24)
                .map(|i| format!("{}", ((i + k * 6) % 24) as f64 / 24.0))
                .collect();
            format!("{k},{}\n", feats.join(","))
        })
        .collect();
    std::fs::write(&data, rows).unwrap();
    let (out, _) = simulate(dir.path(), &["--data", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes_partition_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o.csv");
    let o = o.to_str().unwrap();

    let missing = run(&[
        "simulate",
        "--config",
        "/nonexistent.json",
        "--cycles",
        "1",
        "--out",
        o,
    ]);
    assert_eq!(code(&missing), 3);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"p\": 0,\n  \"q\": 2,\n  \"threshold\": 1\n}\n").unwrap();
    let invalid = run(&[
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--cycles",
        "1",
        "--out",
        o,
    ]);
    assert_eq!(code(&invalid), 3);
    let msg = String::from_utf8_lossy(&invalid.stderr);
    assert!(msg.contains(":2:") && msg.contains("p ≥ 1"), "{msg}");

    std::fs::write(
        &bad,
        "{\"p\": 4, \"q\": 2, \"threshold\": 1, \"colour\": 1}",
    )
    .unwrap();
    let schema = run(&[
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--cycles",
        "1",
        "--out",
        o,
    ]);
    assert_eq!(code(&schema), 3);
    assert!(String::from_utf8_lossy(&schema.stderr).contains("schema"));

    let data = dir.path().join("d.csv");
    std::fs::write(&data, "0,0.5,0.5\n").unwrap();
    let dim = run(&[
        "simulate",
        "--config",
        &cfg("twolead_ecg_82x2.json"),
        "--cycles",
        "1",
        "--out",
        o,
        "--data",
        data.to_str().unwrap(),
    ]);
    assert_eq!(code(&dim), 4);

    let io = run(&[
        "simulate",
        "--config",
        &cfg("twolead_ecg_82x2.json"),
        "--cycles",
        "1",
        "--out",
        "/nonexistent/dir/o.csv",
    ]);
    assert_eq!(code(&io), 5);

    assert_eq!(code(&run(&["simulate"])), 2);
    assert_eq!(code(&run(&["bench", "--suite", "nope"])), 2);
}

#[test]
fn ppa_reports_in_both_formats() {
    let csv = run(&["ppa", "--config", &cfg("mnist_3layer.json")]);
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.contains("design,synapse_count,power_mw,computation_time_ns,area_mm2"));
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("mnist_3layer,1310000,"));

    let json = run(&[
        "ppa",
        "--config",
        &cfg("largest_column_6750.json"),
        "--format",
        "json",
    ]);
    assert_eq!(code(&json), 0);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["macros"].as_array().unwrap().len(), 9);
    assert_eq!(v["report"]["synapse_count"], 6750);
    assert_eq!(v["report"]["design"], "largest_column_6750");

    let base: f64 = v["report"]["power_mw"].as_f64().unwrap();
    let fast = run(&[
        "ppa",
        "--config",
        &cfg("largest_column_6750.json"),
        "--format",
        "json",
        "--freq",
        "200000",
    ]);
    let f: serde_json::Value = serde_json::from_slice(&fast.stdout).unwrap();
    assert!(f["report"]["power_mw"].as_f64().unwrap() > base);
    assert_eq!(
        code(&run(&[
            "ppa",
            "--config",
            &cfg("mnist_2layer.json"),
            "--freq",
            "0"
        ])),
        1
    );
}

#[test]
fn bench_prints_metrics() {
    let out = run(&["bench", "--suite", "clustering", "--seed", "2"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "clustering");
    assert!(v["learned"]["purity"].as_f64().unwrap() >= 0.9);
}
