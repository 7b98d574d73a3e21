use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn d0() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../theories/d0.eitt")
}

fn eitt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitt"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sub_prints_verdict() {
    let o = eitt(&["sub", path(&d0()), "w", "Top -> w"]);
    assert_eq!(stdout(&o), "TRUE\n");
    assert_eq!(o.status.code(), Some(0));
    let o = eitt(&["sub", path(&d0()), "w -> w", "w"]);
    assert_eq!(stdout(&o), "FALSE\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn typecheck_identity() {
    let o = eitt(&["typecheck", path(&d0()), "\\x.x", "(w->w)->(w->w)"]);
    assert_eq!(stdout(&o), "DERIVABLE\n");
    assert_eq!(o.status.code(), Some(0));
    let o = eitt(&[
        "typecheck",
        path(&d0()),
        "\\x y.x",
        "(w->w)->(w->w)",
        "--depth",
        "5",
    ]);
    assert_eq!(stdout(&o), "NOT DERIVABLE\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn typecheck_certificate() {
    let o = eitt(&[
        "typecheck",
        path(&d0()),
        "\\x.x",
        "(w->w)->(w->w)",
        "--cert",
    ]);
    let out = stdout(&o);
    assert!(out.starts_with("DERIVABLE\n"));
    assert!(out.contains("(->I)"));
    assert!(out.contains("(ax) x:w -> w |- x : w -> w"));
}

#[test]
fn theory_check_reports() {
    let o = eitt(&["theory", "check", path(&d0())]);
    assert_eq!(stdout(&o), "PASS\n");
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.eitt");
    std::fs::write(&bad, "theory t { atoms: Top, w, p; arrows: w ~ Top -> w; }").unwrap();
    let o = eitt(&["theory", "check", bad.to_str().unwrap()]);
    assert!(stdout(&o).contains("VIOLATION clause 4"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn errors_exit_two() {
    let o = eitt(&["sub", "/nonexistent.eitt", "w", "w"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = eitt(&["sub", path(&d0()), "w ->", "w"]);
    assert_eq!(o.status.code(), Some(2));
    let o = eitt(&["sub", path(&d0()), "q", "w"]);
    assert_eq!(o.status.code(), Some(2));
    let o = eitt(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interp_prints_generator() {
    let o = eitt(&["interp", path(&d0()), "x", "--env", "x=w"]);
    assert_eq!(stdout(&o), "up(w)\n");
    let o = eitt(&["interp", path(&d0()), "(\\x.x x) (\\x.x x)"]);
    assert_eq!(stdout(&o), "up(Top)\n");
}

#[test]
fn extend_then_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d1.eitt");
    let o = eitt(&[
        "extend",
        path(&d0()),
        "--point",
        "w",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("psi0 ~ psi0 -> w"));
    let o = eitt(&[
        "typecheck",
        out.to_str().unwrap(),
        "(\\x.x x) (\\x.x x)",
        "w",
        "--depth",
        "4",
    ]);
    assert_eq!(stdout(&o), "DERIVABLE\n");
}

#[test]
fn construct_writes_loadable_stages() {
    let dir = tempfile::tempdir().unwrap();
    let o = eitt(&[
        "construct",
        "--stages",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = stdout(&o);
    assert_eq!(manifest.lines().count(), 2);
    assert!(manifest.starts_with("step 0 pair (0,0) witness Top -> Top -> Top\n"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap(),
        manifest
    );
    for n in 0..=2 {
        let f = dir.path().join(format!("d{n}.eitt"));
        let o = eitt(&["theory", "check", f.to_str().unwrap()]);
        assert_eq!(stdout(&o), "PASS\n", "d{n}");
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = [
        "verify-j",
        "--stages",
        "2",
        "--samples",
        "10",
        "--seed",
        "3",
    ];
    let (a, b) = (eitt(&args), eitt(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let file = d0();
    let laws = ["laws", path(&file), "--samples", "10", "--seed", "11"];
    let (a, b) = (eitt(&laws), eitt(&laws));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 70);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn verify_j_verdict_matches_exit_code() {
    let o = eitt(&[
        "verify-j",
        "--stages",
        "4",
        "--samples",
        "10",
        "--seed",
        "7",
    ]);
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    let fails = out.lines().any(|l| l.ends_with(" FAIL"));
    match last {
        "CONSISTENT (evidence)" => assert!(o.status.success() && !fails),
        "NO EVIDENCE" => assert!(o.status.code() == Some(1) && fails),
        other => panic!("unexpected verdict line {other}"),
    }
    assert!(out.contains("NONTRIVIAL PASS"));
    assert!(out.lines().any(|l| l.starts_with("DD up(")));
}
