use std::fs;
use std::process::{Command, Output};

fn toucher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toucher")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_path_of_eight() {
    let o = toucher(&["solve", "--tree", "8; 0-1,1-2,2-3,3-4,4-5,5-6,6-7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("u = 2"));
    assert!(out.lines().nth(1).unwrap().starts_with("line: T "));
}

#[test]
fn solve_position_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.txt");
    fs::write(&file, "# isolator to move, nothing left\n3; 0-1, 1-2 C:{0} D:{1} X:{} s:T\n").unwrap();
    let o = toucher(&["solve", "--position", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "u = 1\nline: -\n");
}

#[test]
fn bad_tree_exits_with_two() {
    let o = toucher(&["solve", "--tree", "4; 0-1, 2-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disconnected"));
}

#[test]
fn verify_small_trees() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = toucher(&["verify", "--n-max", "6", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("theorem: 12 rows, 0 failed"));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("label,n,tree,value,bound,strategy,pass,note"));
}

#[test]
fn enumerate_counts() {
    let o = toucher(&["enumerate", "--n", "7"]);
    assert_eq!(stdout(&o).lines().count(), 11);
}

#[test]
fn reduce_reaches_a_path() {
    let o = toucher(&["reduce", "--position", "6; 0-1, 1-2, 2-3, 3-4, 4-5 C:{} D:{} X:{0,5} s:I"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("path: solved exactly, value 1"));
}

fn play_star(script: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("star6.txt");
    fs::write(&tree, "6; 0-1, 0-2, 0-3, 0-4, 0-5\n").unwrap();
    let moves = dir.path().join("moves.txt");
    fs::write(&moves, script).unwrap();
    let o = toucher(&[
        "play",
        "--tree",
        tree.to_str().unwrap(),
        "--as",
        "toucher",
        "--opponent",
        "strategy",
        "--script",
        moves.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn play_star_against_strategy() {
    let out = play_star("0-1\n0-2\n0-3\n0-4\n0-5\n");
    assert!(out.ends_with("final isolated = 2\n"), "{out}");
    let out = play_star("0-5\n# comment\n9-9\n0-5\n0-4\n0-3\n0-2\n0-1\n");
    assert!(out.contains("error: \"9-9\" is not an edge of the tree"), "{out}");
    assert!(out.contains("error: edge"), "{out}");
    assert!(out.ends_with("final isolated = 2\n"), "{out}");
}

#[test]
fn play_replay_is_deterministic() {
    let script = "0-3\n0-1\n0-5\n";
    assert_eq!(play_star(script), play_star(script));
    assert!(play_star(script).ends_with("input ended\n"));
}

#[test]
fn strategy_cannot_play_toucher() {
    let o = toucher(&["play", "--tree", "3; 0-1, 1-2", "--as", "isolator", "--opponent", "strategy"]);
    assert_eq!(o.status.code(), Some(2));
}
