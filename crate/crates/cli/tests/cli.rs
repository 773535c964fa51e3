use std::process::Command;

fn tisgm() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tisgm"));
    c.env_remove("TISGM_TOL");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = tisgm().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn solve_csv_header_and_rows() {
    let (code, out, _) = run(&["solve", "--theta", "12", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "theta,m,case_tag,branch,u,v,w,residual");
    let rows: Vec<_> = lines.collect();
    assert!(rows.iter().any(|r| r.contains(",sym_wne1,")));
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
}

#[test]
fn solve_json_shape() {
    let (code, out, _) = run(&["solve", "--theta", "9", "--m", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let first = &v;
    assert_eq!(first["k"], 2);
    assert_eq!(first["partial"], false);
    assert!(!first["solutions"].as_array().unwrap().is_empty());
}

#[test]
fn census_totals_over_range() {
    let (code, out, _) =
        run(&["census", "--theta-min", "1.2", "--theta-max", "20", "--steps", "2", "--totals", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out, "theta,total,partial\n1.2,1,false\n20,183,false\n");
}

#[test]
fn census_csv_header() {
    let (code, out, _) = run(&["census", "--theta", "9", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "theta,m,case_tag,branch,u,v,w,multiplicity");
    let sum: usize = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(sum, 93);
}

#[test]
fn critical_csv() {
    let (code, out, _) = run(&["critical", "--theta-min", "8", "--theta-max", "9", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "theta,kind,changes_count,count_below,count_above");
    assert!(lines.any(|l| l.starts_with("8.3588")));
}

#[test]
fn extremality_rows() {
    let (code, out, _) = run(&["extremality", "--measure", "mu-star-star", "--theta", "13", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "theta,measure,status,w,kappa,gamma,product,lambda2,msw_verdict,ks_verdict");
    let row = lines.next().unwrap();
    assert!(row.starts_with("13,mu_star_star,ok,"), "{row}");
    assert!(row.ends_with(",inconclusive,non_extreme"), "{row}");
    let (code, out, _) = run(&["extremality", "--measure", "mu-star", "--theta", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.contains("5,mu_star,absent"));
}

#[test]
fn output_path_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let (code, out, _) = run(&["census", "--theta", "12", "--format", "csv", "--output-path", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["solve"]).0, 2);
    assert_eq!(run(&["bogus"]).0, 2);
    assert_eq!(run(&["solve", "--theta", "-1"]).0, 2);
    assert_eq!(run(&["solve", "--theta", "9", "--m", "3"]).0, 2);
    assert_eq!(run(&["--q", "1", "census", "--theta", "9"]).0, 2);
}

#[test]
fn tolerance_from_environment() {
    let out = tisgm().env("TISGM_TOL", "1e-30").args(["solve", "--theta", "12"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = tisgm().env("TISGM_TOL", "-1").args(["solve", "--theta", "12"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = tisgm().env("TISGM_TOL", "1e-6").args(["solve", "--theta", "12"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn partial_flag_outside_k2() {
    let (code, out, _) = run(&["--k", "3", "--q", "4", "census", "--theta", "9", "--totals", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.lines().nth(1).unwrap().ends_with(",true"));
}
