//! End-to-end runs of the `edss` binary.

use std::path::Path;
use std::process::{Command, Output};

fn edss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edss"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// `(label, [(x, y)])` for every polyline's `data-points` attribute.
fn polylines(svg: &str) -> Vec<(String, Vec<(String, String)>)> {
    let attr = |tag: &str, name: &str| {
        let start = tag.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].to_string()
    };
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .map(|l| {
            let pts = attr(l, "data-points")
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.to_string(), y.to_string())
                })
                .collect();
            (attr(l, "data-label"), pts)
        })
        .collect()
}

#[test]
fn sweep_writes_csv_and_matching_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = edss(
        &[
            "sweep", "--protocol", "two_qubit", "--mode", "det", "--channel", "depolarizing", "--param", "p",
            "--from", "0", "--to", "1", "--points", "21", "--csv", "out.csv", "--svg", "out.svg",
            "--check", "identity,separability,closed_form",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 22);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header[0], "p");
    let avg = header.iter().position(|h| *h == "avg_negativity").unwrap();
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[avg] - ((2.0 - 3.0 * f[0]) / 6.0).max(0.0)).abs() < 1e-9);
    }

    let svg = std::fs::read_to_string(dir.path().join("out.svg")).unwrap();
    let series = polylines(&svg);
    assert_eq!(series.len(), header.len() - 1);
    for (label, pts) in series {
        let col = header.iter().position(|h| *h == label).unwrap();
        assert_eq!(pts.len(), 21);
        for (row, (x, y)) in lines[1..].iter().zip(pts) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!((fields[0], fields[col]), (x.as_str(), y.as_str()), "{label}");
        }
    }
}

#[test]
fn identical_specs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = edss(
            &["sweep", "--protocol", "ghz", "--channel", "amplitude_damping", "--points", "9", "--csv", name],
            dir.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.conf"),
        "# qudit depolarizing curves\nprotocol = qudit\nchannel = depolarizing\nd = 2..3\npoints = 11\ncsv = from_file.csv\n",
    )
    .unwrap();
    let o = edss(&["sweep", "--config", "sweep.conf", "--points", "5", "--csv", "from_flag.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("from_file.csv").exists());
    let csv = std::fs::read_to_string(dir.path().join("from_flag.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    assert!(csv.starts_with("p,d,"));
}

#[test]
fn exit_codes_for_bad_input_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let invalid = [
        vec!["sweep", "--protocol", "two_qubit", "--channel", "depolarizing", "--from", "0.8", "--to", "0.2", "--csv", "x.csv"],
        vec!["sweep", "--protocol", "two_qubit", "--channel", "depolarizing", "--points", "1", "--csv", "x.csv"],
        vec!["sweep", "--protocol", "ghz", "--mode", "det", "--channel", "depolarizing", "--csv", "x.csv"],
        vec!["sweep", "--protocol", "two_qubit", "--channel", "canonical", "--param", "t3", "--csv", "x.csv"],
        vec!["sweep", "--protocol", "qudit", "--channel", "depolarizing", "--d", "8", "--csv", "x.csv"],
        vec!["check", "everything"],
        vec!["describe", "teleportation"],
        vec!["frobnicate"],
    ];
    for args in invalid {
        assert_eq!(code(&edss(&args, dir.path())), 2, "{args:?}");
    }
    let o = edss(
        &["sweep", "--protocol", "two_qubit", "--channel", "depolarizing", "--csv", "missing/dir/x.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);
    assert_eq!(code(&edss(&["sweep", "--config", "nope.conf"], dir.path())), 3);
}

#[test]
fn larger_dimensions_need_the_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = edss(
        &["sweep", "--protocol", "qudit", "--channel", "depolarizing", "--d", "7", "--max-d", "7", "--points", "2", "--csv", "q.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_reports_one_line_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = edss(&["check", "identity"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 15);
    for line in text.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 4, "{line}");
        assert!(f[0].starts_with("identity/"));
        assert!(f[1].parse::<f64>().unwrap() <= 1e-9);
        assert_eq!(f[3], "PASS");
    }
}

#[test]
fn describe_lists_steps_and_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let two = String::from_utf8(edss(&["describe", "two_qubit"], dir.path()).stdout).unwrap();
    for step in ["I.", "II.", "III.", "IV.", "V."] {
        assert!(two.lines().any(|l| l.trim_start().starts_with(step)), "{step}");
    }
    let ghz = String::from_utf8(edss(&["describe", "ghz"], dir.path()).stdout).unwrap();
    assert!(ghz.contains("4 outcomes"));
    let qudit = String::from_utf8(edss(&["describe", "qudit"], dir.path()).stdout).unwrap();
    assert!(qudit.contains("d outcomes") && qudit.contains("inverse CNOT"));
    assert!(qudit.contains("qudit_dep_critical"));
}
