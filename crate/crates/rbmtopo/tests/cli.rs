//! Black-box tests of the `rbmtopo` binary: exit codes, determinism, file
//! formats, and the dense-cap environment override.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rbmtopo"))
}

/// Per-test scratch directory under the system temp dir.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rbmtopo-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout must be UTF-8")
}

fn assert_code(out: &Output, want: i32, ctx: &str) {
    assert_eq!(
        code(out),
        want,
        "{ctx}\nstdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn list_models_covers_every_builder() {
    let out = run(bin().arg("list-models"));
    assert_code(&out, 0, "list-models");
    let text = stdout(&out);
    for name in [
        "graph",
        "hypergraph",
        "toric",
        "haah",
        "double-semion",
        "aklt",
        "czx",
        "ccz",
        "dicke",
    ] {
        assert!(text.contains(name), "registry listing misses {name:?}:\n{text}");
    }
}

#[test]
fn build_output_is_deterministic() {
    let dir = scratch("determinism");
    let args = ["build", "--model", "toric", "--lx", "2", "--ly", "2"];

    let first = run(bin().args(args));
    let second = run(bin().args(args));
    assert_code(&first, 0, "build to stdout");
    assert_eq!(first.stdout, second.stdout, "two builds must be byte-identical");

    let file = dir.join("toric.json");
    let to_file = run(bin().args(args).arg("-o").arg(&file));
    assert_code(&to_file, 0, "build to file");
    assert_eq!(
        fs::read(&file).unwrap(),
        first.stdout,
        "file output must match stdout output"
    );
    assert!(stdout(&first).contains("\"bit_order\": \"big_endian\""));
}

#[test]
fn verify_reports_pass_and_exits_zero() {
    let dir = scratch("verify-pass");
    let file = dir.join("dicke.json");
    let built = run(bin().args([
        "build", "--model", "dicke", "--n", "4", "--k", "2", "-o",
    ]).arg(&file));
    assert_code(&built, 0, "build dicke 4 2");

    let out = run(bin()
        .args(["verify"])
        .arg(&file)
        .args(["--model", "dicke", "--n", "4", "--k", "2", "--json"]));
    assert_code(&out, 0, "verify dicke 4 2");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["mode"], "dense");
    assert!(report["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn verify_detects_a_wrong_state_and_exits_one() {
    let dir = scratch("verify-fail");
    let triple = dir.join("triple.hg");
    let pair = dir.join("pair.hg");
    fs::write(&triple, "n 3\n0 1 2\n").unwrap();
    fs::write(&pair, "n 3\n0 1\n").unwrap();

    let file = dir.join("triple.json");
    let built = run(bin().args(["build", "--hypergraph"]).arg(&triple).arg("-o").arg(&file));
    assert_code(&built, 0, "build from hypergraph file");

    let out = run(bin()
        .arg("verify")
        .arg(&file)
        .arg("--hypergraph")
        .arg(&pair)
        .arg("--json"));
    assert_code(&out, 1, "verification against a different state must fail");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(false));
}

#[test]
fn usage_errors_exit_two() {
    let dir = scratch("usage");
    let out = run(bin().args(["build", "--model", "nonexistent"]));
    assert_code(&out, 2, "unknown model name");

    let out = run(bin().args(["build", "--model", "dicke", "--n", "4"]));
    assert_code(&out, 2, "missing required size flag");

    let rbm = dir.join("d31.json");
    let built = run(bin().args(["build", "--model", "dicke", "--n", "3", "--k", "1", "-o"]).arg(&rbm));
    assert_code(&built, 0, "build dicke 3 1");

    let out = run(bin()
        .arg("verify")
        .arg(&rbm)
        .args(["--model", "dicke", "--n", "4", "--k", "2"]));
    assert_code(&out, 2, "visible-count mismatch between RBM and oracle");

    let out = run(bin().arg("amp").arg(&rbm).args(["--basis", "0a1"]));
    assert_code(&out, 2, "non-binary basis string");

    let out = run(bin().arg("amp").arg(&rbm).args(["--basis", "01"]));
    assert_code(&out, 2, "basis width mismatch");

    let out = run(&mut bin());
    assert_code(&out, 2, "missing subcommand (clap native)");
}

#[test]
fn synthesis_and_cap_errors_exit_three() {
    let dir = scratch("synthesis");
    let out = run(bin().args(["build", "--model", "aklt", "--sites", "4", "--open"]));
    assert_code(&out, 3, "open boundaries are not representable");

    let rbm = dir.join("toric.json");
    let built = run(bin().args(["build", "--model", "toric", "--lx", "2", "--ly", "2", "-o"]).arg(&rbm));
    assert_code(&built, 0, "build toric");
    let out = run(bin()
        .arg("export")
        .arg(&rbm)
        .arg("--dense")
        .env("RBMTOPO_DENSE_CAP", "4"));
    assert_code(&out, 3, "dense export above the cap");
}

#[test]
fn dense_cap_switches_verify_to_spot_mode() {
    let dir = scratch("spot");
    let rbm = dir.join("toric.json");
    let built = run(bin().args(["build", "--model", "toric", "--lx", "2", "--ly", "2", "-o"]).arg(&rbm));
    assert_code(&built, 0, "build toric");

    let out = run(bin()
        .arg("verify")
        .arg(&rbm)
        .args(["--model", "toric", "--lx", "2", "--ly", "2", "--json"])
        .env("RBMTOPO_DENSE_CAP", "4"));
    assert_code(&out, 0, "spot verification of the 8-qubit state");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["mode"], "spot");
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report["samples"].as_u64().unwrap() >= 10_000);
}

#[test]
fn amp_matches_the_hypergraph_sign_structure() {
    let dir = scratch("amp");
    let hg = dir.join("triple.hg");
    fs::write(&hg, "n 3\n0 1 2\n").unwrap();
    let rbm = dir.join("triple.json");
    let built = run(bin().args(["build", "--hypergraph"]).arg(&hg).arg("-o").arg(&rbm));
    assert_code(&built, 0, "build");

    let parse_amp = |basis: &str| -> (f64, f64) {
        let out = run(bin().arg("amp").arg(&rbm).args(["--basis", basis]));
        assert_code(&out, 0, "amp");
        let text = stdout(&out);
        let mut parts = text.split_whitespace();
        let re: f64 = parts.next().unwrap().parse().unwrap();
        let im: f64 = parts.next().unwrap().parse().unwrap();
        (re, im)
    };

    // Gadget factors are normalized so amplitudes land exactly on ±1.
    let (re, im) = parse_amp("000");
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12, "000 -> {re} {im}");
    let (re, im) = parse_amp("111");
    assert!((re + 1.0).abs() < 1e-12 && im.abs() < 1e-12, "111 -> {re} {im}");
}

#[test]
fn export_round_trips_and_dense_lists_the_state() {
    let dir = scratch("export");
    let rbm = dir.join("d31.json");
    let built = run(bin().args(["build", "--model", "dicke", "--n", "3", "--k", "1", "-o"]).arg(&rbm));
    assert_code(&built, 0, "build dicke 3 1");

    let reemitted = run(bin().arg("export").arg(&rbm));
    assert_code(&reemitted, 0, "canonical re-emission");
    assert_eq!(reemitted.stdout, fs::read(&rbm).unwrap());

    let out = run(bin().arg("export").arg(&rbm).arg("--dense"));
    assert_code(&out, 0, "dense export");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["n"], 3);
    let amps = doc["amplitudes"].as_array().unwrap();
    assert_eq!(amps.len(), 8);
    // Big-endian weight-1 strings 001, 010, 100 are indices 1, 2, 4.
    let mags: Vec<f64> = amps
        .iter()
        .map(|a| {
            let re = a[0].as_f64().unwrap();
            let im = a[1].as_f64().unwrap();
            (re * re + im * im).sqrt()
        })
        .collect();
    for (idx, mag) in mags.iter().enumerate() {
        if [1, 2, 4].contains(&idx) {
            assert!((mag - mags[1]).abs() <= 1e-12 * mags[1], "index {idx}: {mag}");
            assert!(*mag > 0.0);
        } else {
            assert!(*mag <= 1e-12 * mags[1], "index {idx} should be empty: {mag}");
        }
    }
}

#[test]
fn fit_recovers_the_three_site_sign_pattern() {
    let dir = scratch("fit");
    let support = dir.join("signs.txt");
    let mut text = String::new();
    for idx in 0..8u32 {
        let bits = format!("{idx:03b}");
        let sign = if idx == 7 { "-1" } else { "+1" };
        text.push_str(&format!("{bits} {sign}\n"));
    }
    fs::write(&support, text).unwrap();

    let out = run(bin().args(["fit", "--support"]).arg(&support).args(["--n", "3"]));
    assert_code(&out, 0, "fit");
    let body = stdout(&out);
    assert!(body.contains("n=3"), "missing width line:\n{body}");
    assert!(body.contains("cub: 0 1 2 1"), "missing cubic term:\n{body}");
}

#[test]
fn stats_reports_the_budget_when_given_a_source() {
    let dir = scratch("stats");
    let rbm = dir.join("toric.json");
    let built = run(bin().args(["build", "--model", "toric", "--lx", "2", "--ly", "2", "-o"]).arg(&rbm));
    assert_code(&built, 0, "build toric");

    let out = run(bin()
        .arg("stats")
        .arg(&rbm)
        .args(["--model", "toric", "--lx", "2", "--ly", "2"]));
    assert_code(&out, 0, "stats with source");
    let text = stdout(&out);
    assert!(text.contains("within bound"), "missing budget row:\n{text}");
    assert!(text.contains("yes"), "budget row should pass:\n{text}");
}

#[test]
fn circuit_and_stabilizer_sources_build_and_verify() {
    let dir = scratch("sources");

    let circuit = dir.join("bell_phase.qc");
    fs::write(&circuit, "wires 2\nCZ 0 1\nH 1\n").unwrap();
    let rbm = dir.join("circuit.json");
    let built = run(bin().args(["build", "--circuit"]).arg(&circuit).arg("-o").arg(&rbm));
    assert_code(&built, 0, "build from circuit");
    let out = run(bin().arg("verify").arg(&rbm).arg("--circuit").arg(&circuit));
    assert_code(&out, 0, "verify against dense simulation");

    let stab = dir.join("bell.stab");
    fs::write(&stab, "+XX\n+ZZ\n").unwrap();
    let rbm = dir.join("stab.json");
    let built = run(bin().args(["build", "--stabilizers"]).arg(&stab).arg("-o").arg(&rbm));
    assert_code(&built, 0, "build from stabilizers");
    let out = run(bin().arg("verify").arg(&rbm).arg("--stabilizers").arg(&stab));
    assert_code(&out, 0, "verify against the projector oracle");
}
