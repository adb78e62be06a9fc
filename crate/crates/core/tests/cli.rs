use std::path::Path;
use std::process::{Command, Output};

fn beurling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beurling")).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const DISK: &str = r#"{"type":"disk","center":[0,0],"radius":1}"#;

#[test]
fn decomp_dumps_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let o = beurling(&["decomp", &disk, "--j-max", "4"]);
    assert!(o.status.success());
    let out = text(&o);
    assert!(out.starts_with("kind,generation,i,j,start,end,size\n"));
    assert!(out.lines().any(|l| l.starts_with("square,")));
    assert!(out.lines().any(|l| l.starts_with("arc,")));
    let o = beurling(&["decomp", &disk, "--j-max", "5", "--check"]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(!text(&o).contains("violation"));
}

#[test]
fn beta_emits_rows_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(dir.path(), "sq.json", r#"{"type":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#);
    let o = beurling(&["beta", &sq, "--alpha", "0.5", "--p", "2", "--j-max", "3"]);
    assert!(o.status.success());
    let out = text(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "arc,generation,length,beta1,contribution");
    // 4 arcs at generation 0, doubling up to generation 3
    assert_eq!(lines.len(), 1 + 4 * (1 + 2 + 4 + 8) + 1);
    let total: f64 = lines.last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    let sum: f64 = lines[1..lines.len() - 1].iter().map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!(total > 0.0 && (total - sum).abs() <= 1e-12 * total);
}

#[test]
fn transform_reads_points_and_writes_values() {
    let dir = tempfile::tempdir().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let pts = write(dir.path(), "pts.csv", "x,y\n2,0\n0.5,0\n");
    let o = beurling(&["transform", &disk, &pts, "--tol", "1e-8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = text(&o);
    let mut rows = out.lines();
    assert_eq!(rows.next(), Some("x,y,Re,Im,est_error,evals"));
    let outside: Vec<f64> = rows.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((outside[2] + 0.25).abs() < 1e-3 * 0.25, "{outside:?}");
    let inside: Vec<f64> = rows.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!(inside[2].abs() < 1e-3 && inside[5] > 0.0);
    let o = beurling(&["transform", &disk, &pts, "--derivative", "--epsilon", "0.1"]);
    assert!(o.status.success());
    let row: Vec<f64> = text(&o).lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((row[2] - 0.25).abs() < 1e-3 * 0.25);
}

#[test]
fn norms_row_and_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let disk = write(dir.path(), "disk.json", DISK);
    let o = beurling(&["norms", &disk, "--alpha", "0.5", "--p", "2", "--kind", "besov-diff-curve"]);
    assert!(o.status.success());
    let out = text(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "besov_diff_curve");
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
    let sq = write(dir.path(), "sq.json", r#"{"type":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#);
    let cache = dir.path().join("cache");
    let args = ["norms", &sq, "--alpha", "0.5", "--p", "2", "--kind", "sobolev-frac", "--j-max", "5", "--cache-dir", cache.to_str().unwrap()];
    let first = beurling(&args);
    assert!(first.status.success());
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 2, "blob and sidecar");
    let second = beurling(&args);
    assert_eq!(text(&first), text(&second));
    assert!(String::from_utf8_lossy(&second.stderr).contains("0 misses"));
}

#[test]
fn verify_writes_fixed_columns_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"seed": 1, "goldens": "g.json", "experiments": [{"id": "lemma_halfplane", "points": 4}]}"#,
    );
    let out = dir.path().join("out/report.csv");
    let o = beurling(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("family_param,alpha,p,lhs,rhs,ratio,err_budget,valid,wall_ms"));
    assert_eq!(csv.lines().count(), 1 + 4);

    // a floor above the frozen constant makes every valid row fail
    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"seed": 1, "experiments": [{"id": "lemma_geomsum", "q_generations": [0, 1], "floor": 2.0,
            "family": {"kind": "domains", "members": [{"label": "flat", "domain":
            {"type": "graph", "samples": [[-1, 0], [1, 0]], "lipschitz_bound": 0, "support_radius": 1}}]}}]}"#,
    );
    let o = beurling(&["verify", "--config", &strict, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let bad = write(dir.path(), "bad.json", r#"{"experiments": [{"id": "thm2", "family": {"kind": "smoothed_square", "radii": [0.1]}, "exponents": [{"alpha": 0.4, "p": 2}]}]}"#);
    let o = beurling(&["verify", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("thm2"));
}
