use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spectral_core::InequalityReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn spectral(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

fn listing(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect())
        .unwrap_or_default()
}

const BALLS: &str = "[[experiment]]\nkind = \"ball-limit\"\nname = \"balls\"\nradii = [1.0, 2.0, 4.0]\ngrid = 1024\n";

#[test]
fn canonical_configs_validate_and_cover_every_kind() {
    let mut kinds = BTreeSet::new();
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let o = spectral(&["validate-config", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        let o = spectral(&["list-experiments", path.to_str().unwrap()]);
        for line in String::from_utf8(o.stdout).unwrap().lines() {
            kinds.insert(line.split_whitespace().next().unwrap().to_owned());
        }
    }
    let all: BTreeSet<String> = spectral_cli::KINDS.iter().map(|(k, _)| k.to_string()).collect();
    assert_eq!(kinds, all);
}

#[test]
fn list_experiments_without_config_lists_kinds() {
    let o = spectral(&["list-experiments"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for (k, _) in spectral_cli::KINDS {
        assert!(text.contains(k), "{k}");
    }
}

#[test]
fn run_writes_reproducible_recomputable_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), BALLS);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = spectral(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let files = listing(&a);
    assert_eq!(files, listing(&b));
    for f in ["report.json", "balls.reports.csv", "balls.plot.csv", "balls.a1.eigenvalues.csv", "balls.a4.eigenvalues.csv"] {
        assert!(files.contains(f), "{f} missing from {files:?}");
    }
    for f in &files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }

    let json: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    let reports: Vec<InequalityReport> =
        serde_json::from_value(json["experiments"][0]["reports"].clone()).unwrap();
    assert_eq!(reports.len(), 5);
    for r in &reports {
        assert_eq!(r, &r.recompute().unwrap());
    }
    let csv = fs::read_to_string(a.join("balls.a2.eigenvalues.csv")).unwrap();
    assert!(csv.starts_with("index,eigenvalue,refinement_estimate\n1,"));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "[[experiment]]\nkind = \"ball-limit\"\nname = \"b\"\nradii = [1.0, 2.0\n");
    let o = spectral(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());

    for bad in [
        "[[experiment]]\nkind = \"nope\"\nname = \"b\"\n",
        "[[experiment]]\nkind = \"ball-limit\"\nname = \"b\"\nradii = [2.0, 1.0]\n",
        "[[experiment]]\nkind = \"gap\"\nname = \"g\"\nell = 1.0\ntheta0 = \"pi/3\"\ntheta1 = \"pi/4\"\n",
        "output = \"x\"\n",
    ] {
        let cfg = write_config(tmp.path(), bad);
        let o = spectral(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{bad}");
        assert_eq!(code(&spectral(&["validate-config", cfg.to_str().unwrap()])), 2);
        assert!(!out.exists());
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&spectral(&["run"])), 2);
    assert_eq!(code(&spectral(&["frobnicate"])), 2);
    let cfg = configs().join("ball-limit.toml");
    assert_eq!(code(&spectral(&["run", cfg.to_str().unwrap(), "--grid", "17"])), 2);
    assert_eq!(code(&spectral(&["validate-config", "/nonexistent/config.toml"])), 2);
}

#[test]
fn failed_check_exits_1_and_still_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "[[experiment]]\nkind = \"eta-check\"\nname = \"perturbed\"\nell = 1.0\ntheta0 = \"pi/3\"\ntheta1 = \"2pi/3\"\n\
         drift = { type = \"wedge-angular-perturbed\", amplitude = 0.5 }\nintervals = 64\n",
    );
    let o = spectral(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], false);
    assert_eq!(json["experiments"][0]["failures"], 1);
}

#[test]
fn strict_turns_warnings_into_failures() {
    let tmp = tempfile::tempdir().unwrap();
    // The diameter row is informational on this wedge and fails there.
    let cfg = write_config(
        tmp.path(),
        "[[experiment]]\nkind = \"gap\"\nname = \"w\"\nell = 1.0\ntheta0 = \"pi/3\"\ntheta1 = \"2pi/3\"\ngrid = 512\n",
    );
    let out = tmp.path().join("out");
    let args = ["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(code(&spectral(&args)), 0);
    let o = spectral(&[&args[..], &["--strict"]].concat());
    assert_eq!(code(&o), 1);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["strict"], true);
    assert_eq!(json["experiments"][0]["warnings"], 1);
}

#[test]
fn solver_error_exits_3_and_keeps_previous_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("report.json"), "previous").unwrap();
    // Degree-0 modes alone give far fewer than the eleven eigenvalues needed.
    let cfg = write_config(
        tmp.path(),
        &format!(
            "{BALLS}\n[[experiment]]\nkind = \"universal\"\nname = \"short\"\n\
             domain = {{ type = \"ball\", radius = 1.0, max_mode = 0, grid = 512 }}\nk_max = 10\n"
        ),
    );
    let o = spectral(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`short`"));
    assert_eq!(fs::read_to_string(out.join("report.json")).unwrap(), "previous");
    assert_eq!(listing(&out), BTreeSet::from(["report.json".to_owned()]));
}

#[test]
fn grid_and_refine_overrides_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[[experiment]]\nkind = \"universal\"\nname = \"r\"\n\
         domain = { type = \"half-plane-rectangle\", x = [0.0, 1.0], y = [1.0, 2.0] }\nk_max = 3\nrecursion_k = 2\n",
    );
    let out = tmp.path().join("out");
    let o = spectral(&["run", cfg.to_str().unwrap(), "--grid", "16", "--refine", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let e = &json["experiments"][0];
    assert_eq!(e["settings"]["cells"], 16);
    assert_eq!(e["settings"]["refine"], true);
    let csv = fs::read_to_string(out.join("r.spectrum.eigenvalues.csv")).unwrap();
    // Refined spectra carry an estimate per eigenvalue.
    assert!(csv.lines().skip(1).all(|l| !l.ends_with(',')), "{csv}");
}
