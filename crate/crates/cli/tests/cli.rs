use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn dcx(args: &[&str], stdin: &str) -> Output {
    dcx_env(args, stdin, &[])
}

fn dcx_env(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dcx"))
        .args(args)
        .env_remove("DCX_ELEMENT_LIMIT")
        .envs(env.iter().copied())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("stdout is one JSON document")
}

fn make(args: &[&str]) -> String {
    let mut full = vec!["make"];
    full.extend(args);
    let o = dcx(&full, "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

const TRIANGLE: &str = r#"{"format":"ogposet/1","faces":[[{},{},{}],[{"-":[0],"+":[1]},{"-":[1],"+":[2]},{"-":[0],"+":[2]}]]}"#;

#[test]
fn oriental_is_hasse_acyclic() {
    let o = dcx(&["check", "hasse-acyclic"], &make(&["oriental", "2"]));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["holds"], true);
}

#[test]
fn atoms_have_empty_subdivision_report() {
    let o = dcx(&["sd", "--report"], &make(&["globe", "2"]));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["empty"], true);
    assert_eq!(v["sd_size"], 0);
}

#[test]
fn triangle_boundary_is_not_a_molecule() {
    let o = dcx(&["check", "molecule"], TRIANGLE);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["holds"], false);
    assert!(v["reason"].as_str().is_some_and(|r| !r.is_empty()));
}

#[test]
fn invalid_inputs_exit_2() {
    assert_eq!(dcx(&["check", "molecule"], "not json").status.code(), Some(2));
    let overlap = r#"{"format":"ogposet/1","faces":[[{}],[{"-":[0],"+":[0]}]]}"#;
    assert_eq!(dcx(&["check", "molecule"], overlap).status.code(), Some(2));
    assert_eq!(dcx(&["check", "molecule", "--frobnicate"], "").status.code(), Some(2));
    assert_eq!(dcx(&["make", "theta", "(()"], "").status.code(), Some(2));
    assert_eq!(dcx(&["flow", "--k", "0", "graph"], TRIANGLE).status.code(), Some(2));
}

#[test]
fn element_limit_is_enforced() {
    let g = make(&["globe", "3"]);
    let o = dcx_env(&["check", "molecule"], &g, &[("DCX_ELEMENT_LIMIT", "4")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DCX_ELEMENT_LIMIT"));
    assert_eq!(dcx(&["check", "molecule"], &g).status.code(), Some(0));
}

#[test]
fn pasting_from_files() {
    let dir = std::env::temp_dir().join(format!("dcx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("globe.json");
    std::fs::write(&g, make(&["globe", "2"])).unwrap();
    let g = g.to_str().unwrap();
    let wide = make(&["paste", g, g, "0"]);
    let counts = dcx(&["make", "paste", g, g, "0", "--output", "text"], "");
    assert!(stdout(&counts).starts_with("counts [3, 4, 2]"));
    let graph = json(&dcx(&["flow", "--k", "0", "graph"], &wide));
    assert_eq!(graph["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(graph["edges"].as_array().unwrap().len(), 1);
    let theory = dcx(&["flow", "--k", "0", "theory"], &wide);
    assert_eq!(theory.status.code(), Some(0));
    assert_eq!(json(&theory)["iso"], true);
    let sd = json(&dcx(&["sd", "--report"], &wide));
    assert_eq!(sd["sd_size"], 3);
    assert_eq!(sd["connected"], true);
    assert_eq!(sd["reduced_betti"], serde_json::json!([0]));
    let o = dir.join("oriental.json");
    std::fs::write(&o, make(&["oriental", "2"])).unwrap();
    let o = o.to_str().unwrap();
    // The output of the triangle is one arrow, its input two.
    assert_eq!(dcx(&["make", "paste", o, o, "1"], "").status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn complexes() {
    let ssset = r#"{"format":"ssset/1","faces":[null,[[1,0],[2,1],[2,0]],[[1,2,0]]]}"#;
    let o = dcx(&["cx", "import-ssset"], ssset);
    assert_eq!(o.status.code(), Some(0));
    let cx = stdout(&o);
    let v = json(&dcx(&["cx", "verify"], &cx));
    assert_eq!(v["cells"], serde_json::json!([3, 3, 1]));
    assert_eq!(v["regular"], true);
    let fa = json(&dcx(&["cx", "frame-acyclic", "--budget", "3"], &cx));
    assert_eq!(fa["verdict"], "proven-by-acyclic-atoms");
    let broken = r#"{"format":"ssset/1","faces":[null,[[1,0],[2,1],[2,0]],[[2,1,0]]]}"#;
    assert_eq!(dcx(&["cx", "import-ssset"], broken).status.code(), Some(2));

    let loops = r#"{"format":"ssset/1","faces":[null,[[1,0],[0,1]]]}"#;
    let m = json(&dcx(&["cx", "molecules", "--max-cells", "5"], loops));
    assert_eq!(m["count"], 12);

    let one_loop = r#"{"format":"dcomplex/1","cells":[[{"shape":"globe:0","attach":{"0.0":"0.0"}}],
        [{"shape":"globe:1","attach":{"0.0":"0.0","0.1":"0.0","1.0":"1.0"}}]]}"#;
    let v = json(&dcx(&["cx", "verify"], one_loop));
    assert_eq!(v["regular"], false);
    let bad = r#"{"format":"dcomplex/1","cells":[[{"shape":"globe:0","attach":{"0.0":"0.0"}}],
        [{"shape":"globe:1","attach":{"0.0":"0.0","0.1":"0.0","1.0":"1.3"}}]]}"#;
    assert_eq!(dcx(&["cx", "verify"], bad).status.code(), Some(1));
}

#[test]
fn dot_export_and_determinism() {
    let o2 = make(&["oriental", "2"]);
    let a = dcx(&["export", "--dot", "hasse"], &o2);
    let b = dcx(&["export", "--dot", "hasse"], &o2);
    assert_eq!(a.stdout, b.stdout);
    let dot = stdout(&a);
    assert!(dot.starts_with("digraph hasse {"));
    // Two faces per arrow and three for the triangle.
    assert_eq!(dot.matches("->").count(), 3 * 2 + 3);
    let sd = stdout(&dcx(&["export", "--dot", "sd"], &make(&["path", "3"])));
    assert_eq!(sd.matches("[label=").count(), 4);
    assert_eq!(dcx(&["check", "atom", "--output", "dot"], &o2).status.code(), Some(2));
}
