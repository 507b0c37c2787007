use std::path::Path;
use std::process::{Command, Output};

fn solspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solspec")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

#[test]
fn forms_example() {
    let o = solspec(&["forms", "--matrix", "2,1,1,1", "--n", "11"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(value(&s, "N"), "2");
    assert_eq!(value(&s, "m"), "4");
    assert_eq!(value(&s, "D"), "5");
    assert_eq!(value(&s, "h"), "1");
}

#[test]
fn flower_transport_example() {
    let o = solspec(&["flower", "--matrix", "2,1,1,1", "--qmax", "3600", "--transport"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "transport"), "[[2,1],[1,1]]");
    let o = solspec(&["flower", "--qmax", "3600", "--transport", "--clockwise"]);
    assert_eq!(value(&stdout(&o), "transport"), "[[1,-1],[-1,2]]");
}

#[test]
fn weyl_example() {
    let o = solspec(&["weyl", "--matrix", "2,1,1,1", "--metric", "1,0,1", "--energy", "2000", "--points", "4"]);
    assert!(o.status.success());
    let ratio: f64 = value(&stdout(&o), "ratio").parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.1);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["forms", "--matrix", "1,1,0,1"],
        vec!["forms", "--matrix", "2,1,1"],
        vec!["spectrum", "--metric", "1,2,1"],
        vec!["geodesic", "--step", "0"],
        vec!["spacing", "--mode", "extra", "--r1", "1,0,0,1"],
    ] {
        let o = solspec(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "));
    }
    assert_eq!(solspec(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn resource_errors_exit_with_three() {
    let o = solspec(&["spacing", "--qmax", "1000000000000000000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: resource"));
}

#[test]
fn json_config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 121, "matrix": [2, 1, 1, 1]}"#).unwrap();
    let o = solspec(&["forms", "--n", "11", "--json-config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "N"), "3");
    std::fs::write(&cfg, r#"{"no_such_flag": 1}"#).unwrap();
    assert_eq!(solspec(&["forms", "--json-config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "[1, 2]").unwrap();
    assert_eq!(solspec(&["forms", "--json-config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["spectrum", "--metric", "1.1,0.2,0.85", "--energy-cut", "600"];
    let run = |dir: &Path, threads: &str| {
        let mut args = base.to_vec();
        args.extend(["--threads", threads, "--out", dir.to_str().unwrap()]);
        let o = solspec(&args);
        assert!(o.status.success());
        o
    };
    let (oa, ob) = (run(a.path(), "1"), run(b.path(), "4"));
    let summary = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with("wrote ")).collect::<Vec<_>>().join("\n");
    assert_eq!(summary(&oa), summary(&ob));
    assert_eq!(value(&stdout(&oa), "mismatches"), "0");
    assert_eq!(value(&stdout(&oa), "accidental"), "0");
    for f in ["spectrum.csv", "spectrum.json", "groups.csv", "multiplicities.csv"] {
        let (x, y) = (read(a.path(), f), read(b.path(), f));
        assert_eq!(x, y, "{f}");
        assert!(!x.contains('\r'));
    }
    assert!(read(a.path(), "spectrum.csv").starts_with("energy,multiplicity,"));
}

#[test]
fn every_subcommand_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let runs: [(&[&str], &[&str]); 5] = [
        (&["weyl", "--energy", "300"], &["weyl.csv", "weyl.svg"]),
        (&["spacing", "--qmax", "900", "--mode", "extra"], &["spacing.csv", "growth.csv", "spacing.svg"]),
        (&["flower", "--qmax", "900"], &["flower.csv", "flower.svg"]),
        (&["geodesic", "--time", "5"], &["geodesic.csv", "geodesic.svg"]),
        (&["field", "--y", "0,1,5", "--z", "-1,1,7"], &["field.csv"]),
    ];
    for (args, files) in runs {
        let mut a = args.to_vec();
        a.extend(["--out", out]);
        assert!(solspec(&a).status.success(), "{args:?}");
        for f in files {
            let text = read(dir.path(), f);
            if f.ends_with(".svg") {
                assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
            } else {
                assert!(text.lines().count() > 1, "{f}");
            }
        }
    }
    assert_eq!(read(dir.path(), "field.csv").lines().count(), 36);
    assert!(solspec(&["forms", "--out", out]).status.success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "forms.json")).unwrap();
    assert_eq!(v["class_number"], 1);
}

#[test]
fn selftests_pass() {
    for cmd in ["forms", "spacing", "flower", "geodesic", "field"] {
        let o = solspec(&[cmd, "--selftest"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).ends_with(&format!("selftest {cmd}: passed\n")));
    }
}
