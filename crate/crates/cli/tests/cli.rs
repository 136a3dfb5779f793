use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nearfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearfield")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fails_with(args: &[&str], needle: &str) {
    let out = nearfield(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(needle), "{args:?}: `{needle}` not in {err}");
}

#[test]
fn optimize_m_reports_tie() {
    let text = stdout(&nearfield(&["optimize-m", "--n", "257", "--v", "4", "--k", "8"]));
    assert!(text.contains("M* = 11.3137"), "{text}");
    assert!(text.contains("tie: M in {8, 16} all give F = 192"), "{text}");
    assert!(text.contains("chosen M = 8"), "{text}");
}

#[test]
fn presets_are_listed_and_printable() {
    let text = stdout(&nearfield(&["presets"]));
    for name in ["fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
    let toml = stdout(&nearfield(&["presets", "--show", "fig9"]));
    assert!(toml.contains("variable = \"interval\""), "{toml}");
    fails_with(&["presets", "--show", "fig99"], "unknown preset");
}

#[test]
fn pattern_grid_shows_grating_lobes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pattern.csv");
    let p = path.to_str().unwrap();
    // θ step 0.005 and r step 0.1 m put grid points next to the lobes
    stdout(&nearfield(&[
        "pattern",
        "--n",
        "257",
        "--m",
        "16",
        "--theta",
        "0.2",
        "--r",
        "10",
        "--theta-points",
        "401",
        "--r-min",
        "2",
        "--r-max",
        "20",
        "--r-points",
        "181",
        "-o",
        p,
    ]));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,r,value"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    let near = |t: f64, r: f64| {
        rows.iter().filter(|x| (x[0] - t).abs() < 0.006 && (x[1] - r).abs() < 0.15).map(|x| x[2]).fold(0.0, f64::max)
    };
    assert!(near(0.2, 10.0) > 0.95);
    // neighbouring lobe on the same ring
    assert!(near(0.325, 10.0 * (1.0 - 0.325f64.powi(2)) / 0.96) > 0.9);
    // off the ring, between lobes
    assert!(near(0.26, 10.0) < 0.3);
}

#[test]
fn codebook_dump_lists_multi_beam_codewords() {
    let text = stdout(&nearfield(&["codebook", "dump", "--n", "257", "--m", "16", "--v", "4", "--kind", "multi"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,s,v,theta,r,support");
    assert_eq!(lines.len(), 1 + 17 * 4);
    assert!(lines[1..].iter().all(|l| l.starts_with("multi,") && l.ends_with(",17")));
    let single = stdout(&nearfield(&["codebook", "dump", "--kind", "single", "--v", "2"]));
    assert_eq!(single.lines().count(), 1 + 272 * 2);
    fails_with(&["codebook", "dump", "--m", "5"], "does not divide");
}

#[test]
fn train_emits_per_user_rows() {
    let text = stdout(&nearfield(&[
        "train",
        "--scheme",
        "proposed,exhaustive",
        "--n",
        "257",
        "--m",
        "16",
        "--v",
        "4",
        "--k",
        "2",
        "--snr-db",
        "30",
        "--trials",
        "3",
        "--seed",
        "9",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("trial,user,scheme,pilots,selected_s,selected_v,est_theta,est_r"));
    assert_eq!(lines.len(), 1 + 3 * 2 * 2);
    assert!(lines[1].starts_with("0,0,proposed,84,"));
    assert!(lines[3].starts_with("0,0,exhaustive,1088,"));
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--preset", "fig6", "--trials", "1", "--seed", "42", "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout(&nearfield(&args));
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    simulate_to(&a, &[]);
    simulate_to(&b, &[]);
    let (a, b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "scenario,scheme,sweep_var,sweep_value,mean_rate_bps_hz,mean_eff_rate_bps_hz,success_rate,mean_pilots,trials,seed"
    ));
    // 9 SNR points × 7 schemes
    assert_eq!(text.lines().count(), 1 + 9 * 7);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
name = "from-file"
trials = 2
[training]
schemes = ["proposed", "dft"]
interval = 5
[sweep]
variable = "users"
values = [1, 2]
"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    // M = 5 does not divide 256 until the flag repairs it
    fails_with(&["simulate", "--config", c], "does not divide N-1");
    let text = stdout(&nearfield(&["simulate", "--config", c, "--m", "16"]));
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.lines().nth(1).unwrap().starts_with("from-file,proposed,users,1.0,"));
}

#[test]
fn bad_input_exits_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "trials = \"many\"").unwrap();
    fails_with(&["simulate", "--config", cfg.to_str().unwrap()], "malformed config");
    fs::write(&cfg, "[array]\nantennas = 3").unwrap();
    fails_with(&["simulate", "--config", cfg.to_str().unwrap()], "unknown field");
    fails_with(&["simulate", "--bogus"], "--bogus");
    fails_with(&["simulate", "--m", "7"], "does not divide");
    fails_with(&["simulate", "--preset", "nope"], "unknown preset");
    fails_with(&["optimize-m", "--n", "256"], "odd");
    fails_with(&["pattern", "--theta", "1.5", "--r", "10"], "invalid polar point");
}
