use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ffdivisor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffdivisor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_manifest(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn point_command_prints_csv() {
    let out = ffdivisor(&["estermann", "--q", "3,5", "--n", "2..4", "--h", "one"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("experiment,p,e,q,n,k,h,value,main_term,abs_error"));
    assert!(lines[1..].iter().all(|l| l.contains(",0/1,")));
}

#[test]
fn budget_refusal_exits_3() {
    let out = ffdivisor(&["mean", "--q", "2", "--n", "40", "--k", "2", "--budget", "1000"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_manifest_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "experiment = shifted\nq = 6\nn = 2\nk = 2\nh = one\n",
        "experiment = shifted\nq = 3\nn = 2\nk = 2\nh = one\nbogus = 1\n",
        "experiment = nonsense\nq = 3\n",
        "q = 3\n",
    ] {
        let path = write_manifest(dir.path(), "m.txt", text);
        assert_eq!(code(&ffdivisor(&["run", &path])), 4, "{text}");
    }
    assert_eq!(code(&ffdivisor(&["shifted", "--q", "3", "--n", "2", "--k", "2", "--h", "7"])), 4);
}

#[test]
fn io_errors_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&ffdivisor(&["run", missing.to_str().unwrap()])), 5);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("out.csv");
    let run = ffdivisor(&["mean", "--q", "3", "--n", "2", "--k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 5);
}

#[test]
fn manifest_output_is_independent_of_shards() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(
        dir.path(),
        "shifted.txt",
        "experiment = shifted\nq = 3, 4, 5\nn = 2..4\nk = 2, 3\nh = one; t\nformat = json\n",
    );
    let outputs: Vec<Vec<u8>> = ["1", "8", "33"]
        .iter()
        .map(|s| {
            let out = ffdivisor(&["run", &path, "--shards", s]);
            assert_eq!(code(&out), 0);
            out.stdout
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nested").join("rows.csv");
    let args = ["dioph", "--q", "3", "--n", "3", "--a", "1,1", "--b", "t"];
    let stdout = ffdivisor(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", file.to_str().unwrap()]);
    assert_eq!(code(&ffdivisor(&with_out)), 0);
    assert_eq!(fs::read(&file).unwrap(), stdout);
}

#[test]
fn injected_fault_is_caught() {
    let clean = ffdivisor(&["verify-all", "--quick"]);
    assert_eq!(code(&clean), 0, "{}", String::from_utf8_lossy(&clean.stdout));

    let faulty = ffdivisor(&["verify-all", "--quick", "--inject-fault", "dk-square"]);
    assert_eq!(code(&faulty), 2);
    let table = String::from_utf8(faulty.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("criterion  2 FAIL")));

    let row = ffdivisor(&["estermann", "--q", "3", "--n", "2", "--h", "one", "--inject-fault", "dk-square"]);
    assert_eq!(code(&row), 2);
    assert!(String::from_utf8(row.stdout).unwrap().contains("identity-violated"));
}
