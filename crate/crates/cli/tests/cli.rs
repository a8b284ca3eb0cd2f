use std::process::{Command, Output};

fn sqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_64() {
    let out = sqw(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(64));
    let out = sqw(&["evolve", "--graph", "t3"]);
    assert_eq!(out.status.code(), Some(64), "missing required args");
    let out = sqw(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_input_exits_1() {
    let out = sqw(&["spectrum", "--graph", "nope:5", "--family", "identity"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sqw(&["spectrum", "--graph", "t3", "--family", "grover:bad"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sqw(&[
        "evolve",
        "--graph",
        "t3",
        "--family",
        "identity",
        "--steps",
        "2",
        "--initial-edge",
        "99",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn t3_spectrum_fixture() {
    let out = sqw(&["spectrum", "--graph", "t3", "--family", "hadamard-center"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // sigma(Phi^Diag) = {1, -1, 0 with multiplicity 2}
    assert!(text.contains("\"phi_diag\""));
    assert!(text.contains("\"multiplicity\": 2"), "{text}");
    // valid JSON with the two expected keys
    let v: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    assert_eq!(v["unitary"].as_array().unwrap().len(), 4);
    let diag = v["phi_diag"].as_array().unwrap();
    let mult_sum: i64 = diag.iter().map(|e| e["multiplicity"].as_i64().unwrap()).sum();
    assert_eq!(mult_sum, 4);
}

#[test]
fn asymptotics_fixture_and_csv_shape() {
    let out = sqw(&[
        "asymptotics",
        "--graph",
        "t3",
        "--family",
        "hadamard-center",
        "--channel",
        "edge",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["mode"], "cesaro");
    let q: Vec<f64> =
        v["vertex_limit"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(q, vec![0.25, 0.5, 0.25]);

    let out = sqw(&[
        "evolve",
        "--graph",
        "t3",
        "--family",
        "hadamard-center",
        "--steps",
        "2",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,vertex,probability"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
}

#[test]
fn trajectories_csv_and_determinism() {
    let args = [
        "trajectories",
        "--graph",
        "t3",
        "--family",
        "hadamard-center",
        "--steps",
        "3",
        "--count",
        "20",
        "--traj-seed",
        "5",
        "--format",
        "csv",
    ];
    let a = sqw(&args);
    let b = sqw(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b), "same argv + seed must be byte-identical");
    assert!(stdout(&a).starts_with("trajectory,step,vertex\n"));
    assert_eq!(stdout(&a).lines().count(), 1 + 20 * 3);
}

#[test]
fn graph_and_family_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("sqw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let gpath = dir.join("t3.json");
    std::fs::write(
        &gpath,
        r#"{"vertices":["x","y","z"],"edges":[[0,1],[1,2]]}"#,
    )
    .unwrap();
    let fpath = dir.join("family.json");
    std::fs::write(&fpath, r#"{"kind":"grover","alpha":3.141592653589793}"#).unwrap();
    let out = sqw(&[
        "spectrum",
        "--graph",
        gpath.to_str().unwrap(),
        "--family",
        fpath.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // output files are written completely
    let opath = dir.join("spectrum.json");
    let out = sqw(&[
        "spectrum",
        "--graph",
        gpath.to_str().unwrap(),
        "--family",
        "dft",
        "--out",
        opath.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&opath).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_suites_pass_and_seeded() {
    let out = sqw(&[
        "verify",
        "--suite",
        "spectral-mapping",
        "--alpha",
        "3.14159",
        "--graph",
        "random",
        "--seed",
        "7",
        "--count",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("PASS spectral-mapping"));
    let out = sqw(&["verify", "--suite", "wat", "--graph", "random"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn induced_asymptotics_exports_functional_graph() {
    let out = sqw(&[
        "asymptotics",
        "--graph",
        "path:5",
        "--family",
        "dft",
        "--channel",
        "induced",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fg = &v["functional_graph"];
    assert_eq!(fg["successor"].as_array().unwrap().len(), 5);
    assert!(!fg["cycles"].as_array().unwrap().is_empty());
    // grover chains have several targets per vertex: no functional graph
    let out = sqw(&[
        "asymptotics",
        "--graph",
        "cycle:5",
        "--family",
        "grover:1.0",
        "--channel",
        "induced",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.get("functional_graph").is_none());
    // the diagonal terms make the Grover chain aperiodic
    assert_eq!(v["mode"], "exponential");
}

#[test]
fn induced_series_is_stochastic() {
    let out = sqw(&[
        "induced",
        "--graph",
        "cycle:5",
        "--family",
        "grover:1.3",
        "--steps",
        "4",
        "--initial-vertex",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for entry in v["series"].as_array().unwrap() {
        let q: f64 = entry["q"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((q - 1.0).abs() < 1e-10);
    }
}
