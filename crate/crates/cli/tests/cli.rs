use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn modsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modsep")).args(args).env_remove("MODSEP_BUDGET").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines().take_while(|l| *l != "--").find_map(|l| l.strip_prefix(&format!("{key}: ")))
}

#[test]
fn separability_with_witness_separator() {
    let o = modsep(&["decide", "separability", "--class", "all", "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "decision"), Some("SEPARABLE"));
    assert_eq!(field(&out, "separator"), Some("<>true"));
}

#[test]
fn ternary_pair_interpolant_over_ternary_and_binary() {
    let (l, r) = (data("ternary-left.ml"), data("ternary-right.ml"));
    let args = |class| ["decide", "interpolant", "--class", class, "--left", l.as_str(), "--right", r.as_str()];
    let out = stdout(&modsep(&args("dary:3")));
    assert_eq!(field(&out, "decision"), Some("NOT_INTERPOLABLE"));
    assert_eq!(field(&out, "sigma"), Some("{a}"));
    let out = stdout(&modsep(&args("binary")));
    assert_eq!(field(&out, "decision"), Some("INTERPOLABLE"));
    assert!(field(&out, "separator").is_some());
}

#[test]
fn verify_reports_invalid_separator() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().display().to_string();
    let o = modsep(&[
        "verify", "--separator", &data("top.ml"), "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu"), "--class", "all", "--witness-dir", &wd,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "decision"), Some("INVALID"));
    let path = field(&out, "countermodel").expect("countermodel file");
    let model = modsep::kripke::parse_tree(&std::fs::read_to_string(path).unwrap()).unwrap();
    let bot = modsep::formula::parse_formula("[]false").unwrap();
    assert!(modsep::games::model_check(&model, &bot).unwrap());
}

#[test]
fn non_separable_writes_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().display().to_string();
    let o = modsep(&[
        "decide", "separability", "--class", "all", "--left", &data("thetainf.mu"), "--right", &data("wellfounded.mu"), "--witness-dir", &wd,
    ]);
    let out = stdout(&o);
    assert_eq!(field(&out, "decision"), Some("NOT_SEPARABLE"));
    let n: usize = field(&out, "evidence_depth").unwrap().parse().unwrap();
    let left = modsep::kripke::parse_tree(&std::fs::read_to_string(field(&out, "witness_left").unwrap()).unwrap()).unwrap();
    let right = modsep::kripke::parse_tree(&std::fs::read_to_string(field(&out, "witness_right").unwrap()).unwrap()).unwrap();
    assert!(modsep::kripke::check_bisim(&left, &right, &modsep::Signature::new(), n).is_some());
}

#[test]
fn definability_and_construct() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("dia.ml");
    std::fs::write(&f, "<>a").unwrap();
    let fs = f.display().to_string();
    let out = stdout(&modsep(&["decide", "definability", "--class", "words", "--left", &fs]));
    assert_eq!(field(&out, "decision"), Some("DEFINABLE"));
    let out = stdout(&modsep(&["decide", "definability", "--class", "all", "--left", &data("thetainf.mu")]));
    assert_eq!(field(&out, "decision"), Some("NOT_DEFINABLE"));
    let sep = dir.path().join("sep.ml");
    let o = modsep(&["construct", "--class", "binary", "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu"), "--out", &sep.display().to_string()]);
    assert_eq!(field(&stdout(&o), "decision"), Some("SEPARABLE"));
    let o = modsep(&[
        "verify", "--separator", &sep.display().to_string(), "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu"), "--class", "binary",
    ]);
    assert_eq!(field(&stdout(&o), "decision"), Some("VALID"));
}

#[test]
fn graded_and_craig_problems() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.ml");
    std::fs::write(&g, "<2>true").unwrap();
    let out = stdout(&modsep(&["decide", "definability", "--left", &g.display().to_string()]));
    assert_eq!(field(&out, "problem"), Some("mu-definability"));
    assert_eq!(field(&out, "decision"), Some("NOT_DEFINABLE"));
    let out = stdout(&modsep(&["decide", "graded-sep", "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu"), "--graded-separator"]));
    assert_eq!(field(&out, "decision"), Some("SEPARABLE"));
    let out = stdout(&modsep(&["decide", "craig-sep", "--class", "words", "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu")]));
    assert_eq!(field(&out, "decision"), Some("SEPARABLE"));
}

#[test]
fn check_and_gadget() {
    let out = stdout(&modsep(&["check", "--model", &data("small.tree"), "--formula", &data("ternary-left.ml")]));
    assert_eq!(field(&out, "decision"), Some("NOT_SATISFIED"));
    let o = modsep(&["gadget", "--i", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (l, r) = modsep::formula::gadget(1);
    assert_eq!(field(&out, "left"), Some(l.to_string().as_str()));
    assert_eq!(field(&out, "right"), Some(r.to_string().as_str()));
}

#[test]
fn exit_codes() {
    let bad = modsep(&["decide", "separability", "--class", "ternary", "--left", &data("thetainf.mu"), "--right", &data("boxbot.mu")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("ternary"));
    assert_eq!(modsep(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("broken.mu");
    std::fs::write(&f, "<>(a &").unwrap();
    let o = modsep(&["decide", "definability", "--left", &f.display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position"));
    let o = Command::new(env!("CARGO_BIN_EXE_modsep"))
        .args(["decide", "separability", "--left", &data("thetainf.mu"), "--right", &data("wellfounded.mu")])
        .env("MODSEP_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let args = ["decide", "separability", "--class", "binary", "--left", &data("ternary-left.ml"), "--right", &data("ternary-right.ml"), "--sig", "a"];
    let a = modsep(&args);
    let b = modsep(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}
