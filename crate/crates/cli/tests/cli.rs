use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gilbert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gilbert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

struct Table {
    meta: Value,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        let (first, body) = text.split_once('\n').unwrap();
        let meta: Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let header = rdr.headers().unwrap().iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        Self { meta, header, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let j = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[j].parse().unwrap()).collect()
    }
}

fn run_table(dir: &TempDir, sub: &str, config: Option<&str>) -> (i32, Table) {
    let out = dir.path().join(format!("{sub}.csv"));
    let mut args = vec![sub.to_string(), "--out".into(), out.display().to_string()];
    if let Some(body) = config {
        let cfg = write_config(dir, &format!("{sub}.json"), body);
        args.extend(["--config".into(), cfg.display().to_string()]);
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = gilbert(&args);
    assert!(out.exists(), "{}", String::from_utf8_lossy(&o.stderr));
    (code(&o), Table::read(&out))
}

#[test]
fn malformed_and_unknown_configs_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, "bad.json", "{\"c\": 0.5,");
    let o = gilbert(&["profile", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("configuration error"));

    let unknown = write_config(&dir, "unknown.json", "{\"c\": 0.5, \"colour\": 1}");
    let o = gilbert(&["profile", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let alpha = write_config(&dir, "alpha.json", "{\"alpha\": 1.5}");
    assert_eq!(
        code(&gilbert(&["profile", "--config", alpha.to_str().unwrap()])),
        2
    );
    assert_eq!(code(&gilbert(&["no-such-command"])), 2);
}

#[test]
fn profile_limit_vectors_of_the_heat_flow() {
    let dir = TempDir::new().unwrap();
    let (c, table) = run_table(&dir, "profile", Some("{\"c\": 0.5, \"alpha\": 1.0}"));
    assert_eq!(c, 0);
    let ap: Vec<f64> = table.meta["metadata"]["a_plus"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let sp = PI.sqrt();
    let expected = [(0.5 * sp).cos(), (0.5 * sp).sin(), 0.0];
    for (a, e) in ap.iter().zip(expected) {
        assert!((a - e).abs() < 1e-9, "{ap:?}");
    }
    let (df, law) = (table.column("df_norm"), table.column("curvature"));
    assert!(df
        .iter()
        .zip(&law)
        .all(|(a, b)| (a - b).abs() <= 1e-8 * b + 1e-13));
}

#[test]
fn small_amplitude_angle_is_linear_in_c() {
    let dir = TempDir::new().unwrap();
    let c = 1e-3;
    let (_, table) = run_table(
        &dir,
        "profile",
        Some(&format!("{{\"c\": {c}, \"alpha\": 1.0}}")),
    );
    let theta = table.meta["metadata"]["theta"].as_f64().unwrap();
    let lead = 2.0 * c * PI.sqrt();
    assert!((theta / lead - 1.0).abs() < 1e-6, "{theta} vs {lead}");
}

#[test]
fn output_is_deterministic_apart_from_the_metadata_timestamp() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "m.json", "{\"alpha\": 1.0, \"k\": 3}");
    let mut tables = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = gilbert(&[
            "multiplicity",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        tables.push(std::fs::read_to_string(out).unwrap());
    }
    let split = |s: &str| {
        let (first, rest) = s.split_once('\n').unwrap();
        let mut meta: Value = serde_json::from_str(&first[2..]).unwrap();
        meta.as_object_mut().unwrap().remove("timestamp_unix");
        (meta, rest.to_string())
    };
    assert_eq!(split(&tables[0]), split(&tables[1]));
}

#[test]
fn json_mirror_matches_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "m.json", "{\"k\": 2}");
    let csv_out = dir.path().join("t.csv");
    let json_out = dir.path().join("t.json");
    for out in [&csv_out, &json_out] {
        assert_eq!(
            code(&gilbert(&[
                "multiplicity",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap()
            ])),
            0
        );
    }
    let csv = Table::read(&csv_out);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(json_out).unwrap()).unwrap();
    assert_eq!(json["run_id"], csv.meta["run_id"]);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), csv.rows.len());
    let order: Vec<&str> = json["column_order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(order, csv.header);
    let j = order.iter().position(|h| *h == "c").unwrap();
    for (row, c) in rows.iter().zip(csv.column("c")) {
        assert_eq!(row[j].as_f64().unwrap(), c);
    }
}

#[test]
fn multiplicity_edge_cases() {
    let dir = TempDir::new().unwrap();
    let (c, table) = run_table(&dir, "multiplicity", Some("{\"k\": 0}"));
    assert_eq!(c, 0);
    assert!(table.rows.is_empty());
    assert_eq!(table.header[0], "j");

    let bad = write_config(&dir, "theta.json", "{\"theta\": 3.5}");
    assert_eq!(
        code(&gilbert(&[
            "multiplicity",
            "--config",
            bad.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn solve_self_similar_and_constant_seeds() {
    let dir = TempDir::new().unwrap();
    let (c, table) = run_table(
        &dir,
        "solve",
        Some("{\"alpha\": 0.8, \"initial\": {\"kind\": \"self_similar\", \"c\": 0.3}}"),
    );
    assert_eq!(c, 0);
    assert!(table
        .column("sqrt_t_grad_m")
        .iter()
        .all(|g| (g - 0.3).abs() < 1e-4));

    let (c, table) = run_table(
        &dir,
        "solve",
        Some("{\"initial\": {\"kind\": \"constant\", \"m\": [0.6, 0.0, 0.8]}}"),
    );
    assert_eq!(c, 0);
    for col in ["sqrt_t_grad_u", "sqrt_t_grad_m", "energy"] {
        assert!(table.column(col).iter().all(|g| *g == 0.0), "{col}");
    }
}

#[test]
fn solve_step_snapshot_matches_the_erf_solution() {
    let dir = TempDir::new().unwrap();
    let body =
        "{\"alpha\": 1.0, \"initial\": {\"kind\": \"step\", \"c\": 0.4}, \"snapshots\": [2.0]}";
    let (c, _) = run_table(&dir, "solve", Some(body));
    assert_eq!(c, 0);
    let snap = Table::read(&dir.path().join("solve_snap_2.csv"));
    let t = snap.meta["metadata"]["t"].as_f64().unwrap();
    let (x, m1, m2) = (snap.column("x"), snap.column("m1"), snap.column("m2"));
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        // 0.4·Erf with Erf(s) = sqrt(pi) erf(s/2)
        let phase = 0.4 * PI.sqrt() * libm::erf(x[i] / (2.0 * t.sqrt()));
        worst = worst
            .max((m1[i] - phase.cos()).abs())
            .max((m2[i] - phase.sin()).abs());
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn solve_reports_pole_data_as_blow_up() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "pole.json",
        "{\"initial\": {\"kind\": \"constant\", \"m\": [0.0, 0.0, -1.0]}}",
    );
    let o = gilbert(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn stability_zero_and_large_perturbations() {
    let dir = TempDir::new().unwrap();
    let body = "{\"etas\": [0.0, 0.5], \"grid_points\": [512], \"steps\": 40}";
    let (c, table) = run_table(&dir, "stability", Some(body));
    assert_eq!(c, 0);
    assert_eq!(table.column("ratio")[0], 0.0);
    let j = table.header.iter().position(|h| h == "hypothesis").unwrap();
    assert_eq!(table.rows[0][j], "ok");
    assert!(table.rows[1][j].starts_with("warning"));
}

#[test]
fn verify_list_default_and_fault_injection() {
    let o = gilbert(&["verify", "--list"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8(o.stdout).unwrap();
    assert!(names.lines().count() >= 20);
    assert!(names.lines().all(|l| !l.contains(',')));

    let dir = TempDir::new().unwrap();
    let (c, table) = run_table(&dir, "verify", None);
    assert_eq!(c, 0);
    assert_eq!(table.rows.len(), names.lines().count());
    assert!(table.rows.iter().all(|r| r[4] == "true"));

    let out = dir.path().join("bad.csv");
    let o = gilbert(&[
        "verify",
        "--perturb-profile",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let table = Table::read(&out);
    assert!(table.rows.iter().any(|r| r[4] == "false"));
}

#[test]
fn hasimoto_rows_per_time() {
    let dir = TempDir::new().unwrap();
    let (c, table) = run_table(&dir, "hasimoto", Some("{\"times\": [0.5, 1.0]}"));
    assert_eq!(c, 0);
    assert_eq!(table.rows.len(), 2);
    assert!(table.column("filament_error").iter().all(|e| *e < 1e-8));
    assert!(table.column("residual_forced").iter().all(|e| *e < 1e-4));
}
