use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bseq"))
        .args(args)
        .env_remove("BSEQ_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn gen_practical_to_30() {
    let o = bseq(&["gen", "--rule", "practical", "--x", "30"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n\n1\n2\n4\n6\n8\n12\n16\n18\n20\n24\n28\n30\n");
}

#[test]
fn member_witness() {
    let o = bseq(&["member", "--rule", "squarefree", "--n", "12"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("12,squarefree,false,2 2 3,\"p_2 = 2 ∉ (2, ∞)\""));
}

#[test]
fn cf_sqrt2() {
    let o = bseq(&["cf", "--alpha", "quad:sqrt2", "--terms", "5"]);
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{}/{}", f[2], f[3])
        })
        .collect();
    assert_eq!(rows, ["1/1", "3/2", "7/5", "17/12", "41/29"]);
}

#[test]
fn exit_codes() {
    assert_eq!(bseq(&["gen", "--rule", "practical", "--x", "30"]).status.code(), Some(0));
    assert_eq!(bseq(&["gen", "--rule", "nope", "--x", "30"]).status.code(), Some(1));
    assert_eq!(bseq(&["gen", "--rule", "practical"]).status.code(), Some(1));
    assert_eq!(bseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bseq(&["--help"]).status.code(), Some(0));
    assert_eq!(
        bseq(&["beatty", "--rule", "primes", "--x", "100", "--alpha", "rat:3/2"]).status.code(),
        Some(1)
    );
    let o = bseq(&["classify", "--alpha", "dec:3.14159265358979323846264338327950288", "--x", "1e6"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("precision exhausted"));
    // A = -5 drives B(x)(log x)^A / x below the calibrated floor
    let o = bseq(&["verify", "--suite", "bcond", "--rule", "practical", "--xs", "1000,10000", "--A", "-5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"passed\": false"));
}

#[test]
fn config_file_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# defaults\nrule = practical\nx = 1000\nformat = csv\n").unwrap();
    let o = bseq(&["gen", "--config", cfg.to_str().unwrap(), "--x", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 13);
    fs::write(&cfg, "rule = practical\nbogus = 1\n").unwrap();
    let o = bseq(&["gen", "--config", cfg.to_str().unwrap(), "--x", "30"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let o = bseq(&["gen", "--rule", "primes", "--x", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(out).unwrap(), "n\n1\n2\n3\n5\n7\n");
}

fn cached_gen(dir: &Path, x: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bseq"))
        .args(["gen", "--rule", "practical", "--x", x])
        .env("BSEQ_CACHE_DIR", dir)
        .output()
        .unwrap()
}

#[test]
fn cache_round_trip_and_faults() {
    let dir = tempfile::tempdir().unwrap();
    let first = cached_gen(dir.path(), "100000");
    assert!(stderr(&first).contains("cache miss"), "{}", stderr(&first));
    let second = cached_gen(dir.path(), "100000");
    assert!(stderr(&second).contains("cache hit"), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);

    let file = dir.path().join("practical_x100000.bseq");
    let bytes = fs::read(&file).unwrap();
    fs::write(&file, &bytes[..bytes.len() - 5]).unwrap();
    let third = cached_gen(dir.path(), "100000");
    assert!(third.status.success());
    assert!(stderr(&third).contains("warning: ignoring cache file"), "{}", stderr(&third));
    assert_eq!(third.stdout, first.stdout);
    assert_eq!(fs::read(&file).unwrap(), bytes);

    let other = cached_gen(dir.path(), "50000");
    assert!(stderr(&other).contains("cache miss"));
}

#[test]
fn timestamp_only_without_flag() {
    let args = ["classify", "--alpha", "quad:sqrt2", "--x", "1e6"];
    let o = bseq(&args);
    assert!(stdout(&o).contains("generated_at"));
    let mut quiet = args.to_vec();
    quiet.push("--no-timestamp");
    assert!(!stdout(&bseq(&quiet)).contains("generated_at"));
}
