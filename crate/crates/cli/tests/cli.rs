use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sphere_lt::contour::{ContourParams, ContourPlan};

fn sphere_lt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-lt"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn table(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    read_table(&String::from_utf8(out.stdout.clone()).unwrap())
}

fn read_table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn contour_dump_has_2n_plus_1_rows_on_the_hyperbola() {
    let (header, rows) = table(&sphere_lt(&["contour", "--precise"]));
    assert_eq!(header, ["N", "j", "re_z", "im_z", "re_dz", "im_dz"]);
    assert_eq!(rows.len(), 41);

    let j = column(&header, &rows, "j");
    let re = column(&header, &rows, "re_z");
    let im = column(&header, &rows, "im_z");
    let rightmost = (0..rows.len())
        .max_by(|&a, &b| re[a].total_cmp(&re[b]))
        .unwrap();
    assert_eq!(j[rightmost], 0.0);

    let plan = ContourPlan::new(ContourParams::default()).unwrap();
    for (x, y) in re.iter().zip(&im) {
        let lhs = plan.hyperbola_lhs(sphere_lt::Complex64::new(*x, *y));
        assert!(
            (lhs - 1.0).abs() < 1e-9 * (1.0 + x.abs() + y.abs()),
            "lhs = {lhs}"
        );
    }
}

#[test]
fn scalar_errors_decay_then_plateau() {
    let (header, rows) = table(&sphere_lt(&["scalar", "--precise"]));
    assert_eq!(header, ["N", "t", "value", "error"]);
    let n = column(&header, &rows, "N");
    let err = column(&header, &rows, "error");
    assert_eq!(n, [10.0, 20.0, 30.0, 35.0, 40.0]);
    for w in err[..4].windows(2) {
        assert!(w[1] < w[0], "{err:?}");
    }
    assert!(err[4] >= err[3], "no plateau at N = 40: {err:?}");
}

#[test]
fn default_precision_is_six_significant_digits() {
    let (header, rows) = table(&sphere_lt(&["scalar", "--N", "10"]));
    let e = &rows[0][header.iter().position(|h| h == "error").unwrap()];
    let mantissa = e.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 6, "{e}");
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# scalar run\nN = 10, 15\nt = 1.5\n");
    let (header, rows) = table(&sphere_lt(&["scalar", "--config", &cfg, "--N", "20"]));
    assert_eq!(column(&header, &rows, "N"), [20.0]);
    assert_eq!(column(&header, &rows, "t"), [1.5]);
}

#[test]
fn bad_settings_fail_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap.csv");
    let out_arg = out.to_str().unwrap();

    let cfg = write_config(dir.path(), "theta = 1.5\n");
    let res = sphere_lt(&["cap", "--config", &cfg, "--out", out_arg]);
    assert!(!res.status.success());
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&res.stderr).contains("theta"));

    let cfg = write_config(dir.path(), "Kappa = 3\n");
    assert!(!sphere_lt(&["cap", "--config", &cfg]).status.success());
    assert!(!sphere_lt(&["cap", "--kernel", "gauss"]).status.success());
}

#[test]
fn cap_eoc_matches_emitted_columns_and_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "K = 40, 80\nR = 40\nN = 10\nt = 0.8, 1\n");
    let run = |name: &str| {
        let path = dir.path().join(name);
        let res = sphere_lt(&[
            "cap",
            "--config",
            &cfg,
            "--precise",
            "--workers",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        fs::read_to_string(path).unwrap()
    };
    let first = run("a.csv");
    let (header, rows) = read_table(&first);
    assert_eq!(
        header,
        [
            "t",
            "e_max",
            "e2",
            "N",
            "K",
            "R",
            "kernel",
            "h_X",
            "eoc",
            "wall_time"
        ]
    );
    assert_eq!(rows.len(), 4);
    let h = column(&header, &rows, "h_X");
    let e2 = column(&header, &rows, "e2");
    let eoc_col = header.iter().position(|c| c == "eoc").unwrap();
    for i in 0..2 {
        assert!(rows[i][eoc_col].is_empty());
        let eoc: f64 = rows[i + 2][eoc_col].parse().unwrap();
        let by_hand = (e2[i] / e2[i + 2]).ln() / (h[i] / h[i + 2]).ln();
        assert!((eoc - by_hand).abs() < 1e-12, "{eoc} vs {by_hand}");
    }

    let strip = |text: &str| -> Vec<String> {
        let (_, rows) = read_table(text);
        rows.into_iter()
            .map(|mut r| {
                r.pop();
                r.join(",")
            })
            .collect()
    };
    assert_eq!(strip(&first), strip(&run("b.csv")));
}
