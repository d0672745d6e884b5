use std::fs;
use std::path::Path;

use probsss_cli::run;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("probsss").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn built_program_classifies_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "structure v1\n1 2\n2 3 4\n");
    let prog = dir.path().join("prog.txt");
    let prog = prog.to_str().unwrap();
    let (code, out, _) = invoke(&[
        "span",
        "build",
        "--prime",
        "2",
        "--generators",
        &g,
        "--out",
        prog,
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let (code, out, _) = invoke(&["scheme", "classify", "--program", prog, "--structure", &g]);
    assert_eq!(code, 0);
    assert!(out.starts_with("label perfect\nc 1\n"), "{out}");
}

#[test]
fn posterior_of_single_observation() {
    let (code, out, _) = invoke(&["tail", "posterior", "--obs", "3=3", "--cap", "6"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(&lines[..3], &["1 1/3", "2 1/3", "3 1/6"]);
    assert!(lines.last().unwrap().starts_with("tail "));
}

#[test]
fn posterior_reads_observation_file() {
    let dir = tempfile::tempdir().unwrap();
    let obs = write(dir.path(), "obs.txt", "# observed\nobs 3 3\n");
    let (_, from_file, _) = invoke(&["tail", "posterior", "--obs-file", &obs, "--cap", "6"]);
    let (_, inline, _) = invoke(&["tail", "posterior", "--obs", "3=3", "--cap", "6"]);
    assert_eq!(from_file, inline);
}

#[test]
fn non_member_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "structure v1\n1 2\n");
    let (code, out, _) = invoke(&["structure", "member", "--generators", &g, "--set", "1 3"]);
    assert_eq!((code, out.as_str()), (1, "false\n"));
    let (code, out, _) = invoke(&["structure", "member", "--generators", &g, "--set", "1 2 3"]);
    assert_eq!((code, out.as_str()), (0, "true\n"));
}

#[test]
fn deal_then_recover() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "structure v1\n1 2\n3 4\n");
    let (_, prog, _) = invoke(&["span", "build", "--prime", "5", "--generators", &g]);
    let prog = write(dir.path(), "prog.txt", &prog);
    let (code, dealing, _) = invoke(&["scheme", "deal", "--program", &prog, "--seed", "9"]);
    assert_eq!(code, 0);
    let secret = dealing
        .lines()
        .find_map(|l| l.strip_prefix("secret "))
        .unwrap()
        .to_owned();
    let dealing = write(dir.path(), "dealing.txt", &dealing);
    for set in ["1 2", "3 4"] {
        let (code, out, _) = invoke(&[
            "scheme",
            "recover",
            "--program",
            &prog,
            "--dealing",
            &dealing,
            "--set",
            set,
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), secret);
    }
    let (code, _, err) = invoke(&[
        "scheme",
        "recover",
        "--program",
        &prog,
        "--dealing",
        &dealing,
        "--set",
        "1 3",
    ]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}

#[test]
fn normalize_and_build_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let layers = write(dir.path(), "w.txt", "gdelta v1\n1 2\n3\n---\n2 3\n");
    let (code, w, _) = invoke(&["structure", "normalize", "--witness", &layers]);
    assert_eq!(code, 0);
    let w = write(dir.path(), "wn.txt", &w);
    let (code, again, _) = invoke(&["structure", "normalize", "--witness", &w]);
    assert_eq!(code, 0);
    assert_eq!(again, fs::read_to_string(&w).unwrap());
    let (code, prog, _) = invoke(&["gauss", "build", "--witness", &w, "--levels", "2"]);
    assert_eq!(code, 0);
    assert!(prog.starts_with("hilbert v1\n"));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "structure v2\n1 2\n");
    assert_eq!(
        invoke(&["structure", "minimize", "--generators", &bad]).0,
        3
    );
    assert_eq!(
        invoke(&["structure", "minimize", "--generators", "/nonexistent/g"]).0,
        3
    );
    assert_eq!(invoke(&["structure", "frobnicate"]).0, 2);
    assert_eq!(invoke(&["tail", "posterior", "--cap"]).0, 2);
    assert_eq!(invoke(&["--help"]).0, 0);
    // share 2 at index 1 cannot happen
    assert_eq!(
        invoke(&["tail", "posterior", "--obs", "1=2", "--cap", "4"]).0,
        1
    );
    assert_eq!(
        invoke(&["tail", "recover", "--shares", "1,2,3", "--run-length", "2"]).0,
        1
    );
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.txt", "gdelta v1\n1 2\n---\n1 2\n");
    let (_, prog, _) = invoke(&["gauss", "build", "--witness", &w, "--levels", "2"]);
    let prog = write(dir.path(), "h.txt", &prog);
    let args = [
        "gauss",
        "simulate",
        "--program",
        &prog,
        "--samples",
        "5000",
        "--seed",
        "3",
    ];
    let (_, one, _) = invoke(&[&["--workers", "1"][..], &args[..]].concat());
    let (_, four, _) = invoke(&[&["--workers", "4"][..], &args[..]].concat());
    assert_eq!(one, four);
    assert_eq!(one.lines().count(), 5000);
}

#[test]
fn pipelines_pass_on_small_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "structure v1\n1 2\n2 3\n");
    let (code, out, _) = invoke(&["pipeline", "perfect", "--generators", &g, "--prime", "3"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.ends_with("verdict pass\n"));
    let w = write(dir.path(), "w.txt", "gdelta v1\n1 2\n3\n---\n3\n");
    let (code, out, _) = invoke(&[
        "pipeline",
        "ramp",
        "--witness",
        &w,
        "--levels",
        "2",
        "--samples",
        "20000",
    ]);
    assert_eq!(code, 0, "{out}");
}
