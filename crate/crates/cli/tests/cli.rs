use std::io::Write;
use std::process::{Command, Output, Stdio};

const P3: &str = "(fuse 2 (union (join 1 2 (union (vert 1) (vert 2))) (join 3 2 (union (vert 3) (vert 2)))))";

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fwtool"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp(name: &str, content: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fwtool-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn isp_on_p3() {
    let o = run(&["isp"], P3);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 : 3\n2 : 1\n");
}

#[test]
fn isp_labeled_block_then_univariate() {
    let o = run(&["isp", "--labeled"], P3);
    let text = stdout(&o);
    let (labeled, uni) = text.split_once("\n\n").unwrap();
    assert!(labeled.starts_with("1 : 1\n"));
    assert!(labeled.contains("x^2 * x{1,3} : 1"));
    assert_eq!(uni, "1 : 3\n2 : 1\n");
}

#[test]
fn adjacent_merge_needs_fallback() {
    let e = "(fuse 1 (ren 2 1 (join 1 2 (union (vert 1) (vert 2)))))";
    assert_eq!(run(&["isp"], e).status.code(), Some(3));
    let o = run(&["isp", "--fallback-oracle"], e);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 : 1\n");
    let o = run(&["isp", "--fallback-oracle", "--oracle-limit", "1"], "(fuse 1 (ren 2 1 (join 1 2 (union (vert 3) (union (vert 1) (vert 2))))))");
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn to_cw_keeps_clique_width_input() {
    let e = "(ren 2 1 (join 1 2 (union (vert 1) (vert 2))))\n";
    let o = run(&["to-cw"], e);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), e);
}

#[test]
fn to_cw_removes_fuses() {
    let o = run(&["to-cw"], P3);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("fuse"));
    let again = run(&["isp"], &out);
    assert_eq!(stdout(&again), "1 : 3\n2 : 1\n");
    assert_eq!(run(&["check", "--cw"], &out).status.code(), Some(0));
}

#[test]
fn check_reports_missing_vertex() {
    let gr = temp("p.gr", "p tw 3 2\n1 2\n2 3\n");
    let td = temp("bad.td", "s td 2 2 3\nb 1 1 2\nb 2 2\n1 2\n");
    let o = run(&["check", "-i", gr.to_str().unwrap(), "--td", td.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("vertex 3 is in no bag"));
}

#[test]
fn from_td_writes_certificate() {
    let gr = temp("q.gr", "c path\np tw 3 2\n1 2\n2 3\n");
    let td = temp("q.td", "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n");
    let cert = std::env::temp_dir().join(format!("fwtool-cert-{}.txt", std::process::id()));
    let o = run(
        &["from-td", "-i", gr.to_str().unwrap(), "--td", td.to_str().unwrap(), "--certificate", cert.to_str().unwrap()],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&cert).unwrap().lines().count(), 3);
    assert_eq!(stdout(&run(&["isp"], &stdout(&o))), "1 : 3\n2 : 1\n");
}

#[test]
fn oracle_on_gr() {
    let o = run(&["oracle"], "p tw 5 5\n1 2\n2 3\n3 4\n4 5\n5 1\n");
    assert_eq!(stdout(&o), "1 : 5\n2 : 5\n");
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(run(&["stats"], "(vert 0)").status.code(), Some(2));
    assert_eq!(run(&["oracle"], "p tw 2 1\n").status.code(), Some(2));
}

#[test]
fn stats_lines() {
    let o = run(&["stats"], P3);
    let text = stdout(&o);
    assert!(text.contains("node_count: 10\n"));
    assert!(text.contains("distinct_labels: 3\n"));
    assert!(text.contains("has_fuse: true\n"));
}

#[test]
fn normalize_collapses_big_merge() {
    let o = run(&["normalize"], "(fuse 1 (verts 1 1000000))");
    assert_eq!(stdout(&o), "(verts 1 1)\n");
}

#[test]
fn eval_prints_gr_and_dump() {
    let o = run(&["eval"], P3);
    let text = stdout(&o);
    assert!(text.starts_with("p tw 3 2\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("c v ")).count(), 3);
    assert_eq!(run(&["eval"], "(verts 1 100000000)").status.code(), Some(4));
}

#[test]
fn batch_is_deterministic() {
    let a = temp("a.fte", P3);
    let b = temp("b.fte", "(join 1 2 (union (verts 1 2) (verts 2 3)))");
    let args = ["isp", a.to_str().unwrap(), b.to_str().unwrap()];
    let first = stdout(&run(&args, ""));
    assert_eq!(first, stdout(&run(&args, "")));
    assert!(first.contains("1 : 5\n2 : 4\n3 : 1\n"));
}
