use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nmr-chain"))
}

#[test]
fn resonances_flags_protocol_carriers() {
    let out = bin().arg("resonances").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("|000⟩→|001⟩: 105.2 (spin 0)  <- pulse-1 carrier"), "{text}");
    assert!(text.contains("|001⟩→|101⟩: 404.8 (spin 2)  <- pulse-2 carrier"), "{text}");
    assert!(text.contains("|000⟩: -355.1"));
}

#[test]
fn resonances_export_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["resonances", "--set", "chain.j1=0", "--set", "chain.j2=0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("resonances.csv")).unwrap();
    assert!(csv.starts_with("# resolved configuration"));
    let mut freqs: Vec<&str> = csv
        .lines()
        .filter(|l| l.starts_with("transition,"))
        .map(|l| l.split(',').nth(4).unwrap())
        .collect();
    freqs.sort();
    freqs.dedup();
    assert_eq!(freqs, vec!["100", "200", "400"]);
}

#[test]
fn config_errors_exit_with_one() {
    for args in [
        vec!["evolve", "--set", "chain.bogus=1"],
        vec!["evolve", "--set", "chain.rabi=0"],
        vec!["sweep", "--config", "/definitely/missing.toml"],
        vec!["resonances", "--set", "novalue"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    }
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["evolve", "--strict-norm", "--set", "policy.points_per_period=2", "--set", "policy.max_dt=1.0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm drift"));
}

#[test]
fn lenient_run_warns_instead_of_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["evolve", "--set", "policy.points_per_period=2", "--set", "policy.max_dt=1.0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: norm drifted"));
    let summary = fs::read_to_string(dir.path().join("summary.toml")).unwrap();
    assert!(summary.contains("norm_within_tolerance = false"));
}

#[test]
fn evolve_writes_all_files_with_config_file_and_phase_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[output]\nstride = 5000\n").unwrap();
    let out = bin()
        .args(["evolve", "--phase", "3.141592653589793", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    for name in ["amplitudes.csv", "populations.csv", "spin_z.csv", "spin_xy.csv", "summary.toml", "timing.toml"] {
        assert!(o.join(name).exists(), "{name}");
    }
    let amps = fs::read_to_string(o.join("amplitudes.csv")).unwrap();
    assert!(amps.contains("# stride = 5000"));
    assert!(amps.contains("# phase = 3.141592653589793"));
    assert!(amps.lines().any(|l| l == "t_us,re_d0,im_d0,re_d5,im_d5"));
    let summary: toml::Table = fs::read_to_string(o.join("summary.toml")).unwrap().parse().unwrap();
    let plus = summary["fidelity_plus"]["modulus"].as_float().unwrap();
    assert!(plus > 0.98, "{plus}");
}
