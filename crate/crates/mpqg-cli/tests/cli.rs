use std::path::PathBuf;
use std::process::{Command, Output};

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mpqg-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn mpqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpqg")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_all_passes_and_is_deterministic() {
    let cfg = write_config("a2.json", r#"{"cartan": "A2", "perturb_p": true, "seed": 11, "words": 40, "triples": 20}"#);
    let cfg = cfg.to_str().unwrap();
    let a = mpqg(&["verify", "all", "--config", cfg]);
    assert!(a.status.success(), "{}", stderr(&a));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["reports"].as_array().unwrap().len(), 12);
    assert_eq!(doc["violations"], 0);
    let b = mpqg(&["verify", "all", "--config", cfg]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn text_report_and_out_file() {
    let out = std::env::temp_dir().join(format!("mpqg-cli-out-{}.txt", std::process::id()));
    let o = mpqg(&["verify", "limit", "--suite", "hopf", "--format", "text", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("semiclassical limit"), "{text}");
    assert!(text.ends_with("2 suites, 0 violations\n"), "{text}");
}

#[test]
fn eval_matches_the_ef_relation() {
    let cfg = write_config("a1.json", r#"{"cartan": "A1", "order": 2}"#);
    let cfg = cfg.to_str().unwrap();
    let lhs = mpqg(&["eval", "E1*F1 - F1*E1", "--config", cfg]);
    let rhs = mpqg(&[
        "eval",
        "1/2*(T+1 + T-1) + hbar*1/4*(T+1^2 - T-1^2) + hbar^2*1/12*(T+1^3 + T-1^3 - T+1 - T-1)",
        "--config",
        cfg,
    ]);
    assert!(lhs.status.success(), "{}", stderr(&lhs));
    assert_eq!(stdout(&lhs), stdout(&rhs));
}

#[test]
fn eval_reports_positions_and_bad_exp() {
    let o = mpqg(&["eval", "E1 * * F1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position"), "{}", stderr(&o));
    let o = mpqg(&["eval", "exp(E1)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exp"), "{}", stderr(&o));
}

#[test]
fn malformed_p_is_diagnosed() {
    let cfg = write_config("bad.json", r#"{"cartan": "A2", "p": [[2, 0], [-1, 2]]}"#);
    let o = mpqg(&["verify", "hopf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not of Cartan type"), "{}", stderr(&o));
}

#[test]
fn syntax_errors_name_the_line() {
    let cfg = write_config("syntax.json", "{\n  \"cartan\": \"A1\",\n  \"order\": 3,,\n}");
    let o = mpqg(&["verify", "hopf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn limit_needs_order_two() {
    let o = mpqg(&["verify", "limit", "--order", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mpqg(&["verify", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn violations_give_exit_one() {
    let cfg = write_config("bound.json", r#"{"cartan": "A2", "degree_bound": 1}"#);
    let o = mpqg(&["verify", "lie", "--config", cfg.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL degree bound reaches every root"), "{}", stdout(&o));
}

#[test]
fn inconsistent_explicit_realization_is_rejected() {
    let cfg = write_config(
        "explicit.json",
        r#"{"cartan": "A1", "realization": {"kind": "explicit", "realization": {
            "t": 1, "labels": ["H1"],
            "tplus": [[{"vmax": 0, "N": 5, "terms": {"0": "1"}}]],
            "tminus": [[{"vmax": 0, "N": 5, "terms": {"0": "1"}}]],
            "amat": [[{"vmax": 0, "N": 5, "terms": {"0": "3"}}]]}}}"#,
    );
    let o = mpqg(&["verify", "realization", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stderr(&o).contains("alpha_1(T+_1)"), "{}", stderr(&o));
}
