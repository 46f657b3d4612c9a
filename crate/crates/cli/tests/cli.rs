use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use naef_core::cnf::brute_force_nae_solutions;
use naef_core::dimacs::parse_dimacs;

fn naef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naef"))
        .args(args)
        .env("NAEF_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Writes `m` hex keys derived from `seed` and returns the path.
fn hex_keys(dir: &Path, m: usize, seed: u64) -> PathBuf {
    let mut text = String::new();
    let mut x = seed;
    for _ in 0..m {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        text.push_str(&hex::encode(x.to_le_bytes()));
        text.push('\n');
    }
    let p = dir.join(format!("keys-{seed}.txt"));
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_query_info_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 16384, 1);
    let out = dir.path().join("f.naef");
    let o = naef(&[
        "build",
        "--keys",
        s(&keys),
        "--k",
        "5",
        "--alpha",
        "8.19",
        "--s",
        "22",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout(&o);
    assert!(summary.contains("n          2000"), "{summary}");
    assert!(summary.contains("m          16384"));
    assert!(summary.contains("bits"));
    assert!(summary.contains("bytes"));
    assert_eq!(fs::metadata(&out).unwrap().len(), 16064);

    let o = naef(&["query", "--filter", s(&out), "--keys", s(&keys)]);
    assert_eq!(code(&o), 0);
    let answers = stdout(&o);
    assert_eq!(answers.lines().count(), 16384);
    assert!(answers.lines().all(|l| l == "maybe"));

    let first = fs::read_to_string(&keys)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let o = naef(&["query", "--filter", s(&out), "--key", &first, "--key", "00"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "maybe");
    assert!(lines[1] == "maybe" || lines[1] == "no");

    let o = naef(&["info", "--filter", s(&out)]);
    assert_eq!(code(&o), 0);
    let info = stdout(&o);
    let eff = naef_core::metrics::efficiency(
        naef_core::metrics::fpr_theory_nae(5, 22).unwrap(),
        2000,
        22,
        16384,
    )
    .unwrap();
    assert!(info.contains(&naef_core::metrics::sig6(eff)), "{info}");
    assert!(info.contains("walksat"));
}

#[test]
fn same_seed_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 600, 2);
    let a = dir.path().join("a.naef");
    let b = dir.path().join("b.naef");
    for out in [&a, &b] {
        let o = naef(&[
            "build",
            "--keys",
            s(&keys),
            "--k",
            "4",
            "--n",
            "200",
            "--s",
            "30",
            "--engine",
            "pt",
            "--hash-mode",
            "two",
            "--seed",
            "9",
            "--out",
            s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn raw_keys() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("keys.bin");
    let bytes: Vec<u8> = (0..400u32)
        .flat_map(|i| (i.wrapping_mul(2654435761)).to_le_bytes())
        .collect();
    fs::write(&raw, &bytes).unwrap();
    let out = dir.path().join("f.naef");
    let o = naef(&[
        "build",
        "--keys",
        s(&raw),
        "--raw",
        "--key-bytes",
        "4",
        "--k",
        "4",
        "--n",
        "150",
        "--s",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = naef(&[
        "query",
        "--filter",
        s(&out),
        "--keys",
        s(&raw),
        "--raw",
        "--key-bytes",
        "4",
    ]);
    assert_eq!(stdout(&o).lines().filter(|l| *l == "maybe").count(), 400);
    let o = naef(&[
        "build",
        "--keys",
        s(&raw),
        "--raw",
        "--key-bytes",
        "3",
        "--k",
        "4",
        "--n",
        "150",
        "--s",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.naef");
    let keys = hex_keys(dir.path(), 50, 3);
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "build",
            "--keys",
            "/nonexistent",
            "--k",
            "3",
            "--n",
            "10",
            "--s",
            "1",
            "--out",
            s(&out),
        ],
        vec![
            "build",
            "--keys",
            s(&keys),
            "--k",
            "3",
            "--s",
            "1",
            "--out",
            s(&out),
        ],
        vec![
            "build",
            "--keys",
            s(&keys),
            "--k",
            "3",
            "--n",
            "10",
            "--alpha",
            "2",
            "--s",
            "1",
            "--out",
            s(&out),
        ],
        vec![
            "build",
            "--keys",
            s(&keys),
            "--k",
            "1",
            "--n",
            "10",
            "--s",
            "1",
            "--out",
            s(&out),
        ],
        vec!["bench-fpr", "--k", "4", "--s-range", "5..2"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = naef(&args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn corrupt_or_truncated_filter() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 300, 4);
    let out = dir.path().join("f.naef");
    assert_eq!(
        code(&naef(&[
            "build",
            "--keys",
            s(&keys),
            "--k",
            "4",
            "--n",
            "100",
            "--s",
            "5",
            "--out",
            s(&out)
        ])),
        0
    );
    let bytes = fs::read(&out).unwrap();
    let bad = dir.path().join("bad.naef");
    fs::write(&bad, &bytes[..40]).unwrap();
    assert_eq!(code(&naef(&["info", "--filter", s(&bad)])), 1);
    let mut flipped = bytes.clone();
    flipped[0] ^= 1;
    fs::write(&bad, &flipped).unwrap();
    assert_eq!(
        code(&naef(&["query", "--filter", s(&bad), "--key", "00"])),
        1
    );
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 800, 5);
    let out = dir.path().join("f.naef");
    // alpha = 8 for k = 3 is far above the NAE threshold
    let o = naef(&[
        "build",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--n",
        "100",
        "--s",
        "2",
        "--max-steps",
        "2000",
        "--max-restarts",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0 of 2") && err.contains("alpha = 8"), "{err}");
}

#[test]
fn export_then_import_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 20, 6);
    let cnf = dir.path().join("f.cnf");
    let o = naef(&[
        "export-cnf",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--n",
        "14",
        "--out",
        s(&cnf),
    ]);
    assert_eq!(code(&o), 0);
    let f = parse_dimacs(&fs::read_to_string(&cnf).unwrap()).unwrap();
    assert_eq!(f.num_clauses(), 20);

    let enc = dir.path().join("g.cnf");
    naef(&[
        "export-cnf",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--n",
        "14",
        "--nae-encoded",
        "--out",
        s(&enc),
    ]);
    assert_eq!(
        parse_dimacs(&fs::read_to_string(&enc).unwrap())
            .unwrap()
            .num_clauses(),
        40
    );

    let sols = brute_force_nae_solutions(&f).unwrap();
    assert!(sols.len() >= 8);
    let text: String = sols
        .iter()
        .take(8)
        .map(|a| a.to_bit_string() + "\n")
        .collect();
    let sol_file = dir.path().join("sols.txt");
    fs::write(&sol_file, &text).unwrap();
    let out = dir.path().join("f.naef");
    let o = naef(&[
        "import-solutions",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--solutions",
        s(&sol_file),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&naef(&["info", "--filter", s(&out)])).contains("external"));
    let answers = stdout(&naef(&["query", "--filter", s(&out), "--keys", s(&keys)]));
    assert!(answers.lines().all(|l| l == "maybe"));

    // a flipped bit breaks some clause, a short line is malformed
    let all: Vec<_> = brute_force_nae_solutions(&f).unwrap();
    let bad = (0..1u64 << 14)
        .map(|p| naef_core::Assignment::from_index(p, 14))
        .find(|a| !all.contains(a))
        .unwrap();
    fs::write(&sol_file, format!("{}{}\n", text, bad.to_bit_string())).unwrap();
    let o = naef(&[
        "import-solutions",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--solutions",
        s(&sol_file),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("solution 8"));
    fs::write(&sol_file, format!("{}0101\n", text)).unwrap();
    let o = naef(&[
        "import-solutions",
        "--keys",
        s(&keys),
        "--k",
        "3",
        "--solutions",
        s(&sol_file),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_fpr_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fpr.csv");
    let o = naef(&[
        "bench-fpr",
        "--k",
        "5",
        "--s-range",
        "1..8",
        "--m",
        "1024",
        "--trials",
        "100000",
        "--seed",
        "1",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# bench-fpr"));
    assert_eq!(lines[1], naef_core::metrics::CSV_HEADER);
    assert_eq!(lines.len(), 2 + 8);
    // FPR falls with s
    let fpr: Vec<f64> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert!(fpr.windows(2).all(|w| w[1] <= w[0]));

    let again = dir.path().join("again.csv");
    naef(&[
        "bench-fpr",
        "--k",
        "5",
        "--s-range",
        "1..8",
        "--m",
        "1024",
        "--trials",
        "100000",
        "--seed",
        "1",
        "--csv",
        s(&again),
    ]);
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());

    let o = naef(&[
        "bench-fpr",
        "--k",
        "5",
        "--s-range",
        "4..8",
        "--m",
        "1024",
        "--trials",
        "20000",
        "--compare-hash-modes",
    ]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with(",one")).count(), 5);
    assert_eq!(out.lines().filter(|l| l.ends_with(",two")).count(), 5);
}

#[test]
fn bench_query() {
    let dir = tempfile::tempdir().unwrap();
    let keys = hex_keys(dir.path(), 2000, 7);
    let out = dir.path().join("f.naef");
    assert_eq!(
        code(&naef(&[
            "build",
            "--keys",
            s(&keys),
            "--k",
            "5",
            "--n",
            "250",
            "--s",
            "22",
            "--out",
            s(&out)
        ])),
        0
    );
    let csv = dir.path().join("q.csv");
    let a = naef(&[
        "bench-query",
        "--filter",
        s(&out),
        "--num-keys",
        "50000",
        "--seed",
        "4",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&a), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().nth(1), Some("s,total_t,t_per_query"));
    assert!(text.lines().nth(2).unwrap().starts_with("22,"));
    let b = naef(&[
        "bench-query",
        "--filter",
        s(&out),
        "--num-keys",
        "50000",
        "--seed",
        "4",
    ]);
    let tally = |o: &Output| stdout(o).split(';').next().unwrap().to_string();
    assert_eq!(tally(&a), tally(&b));
    assert_eq!(
        code(&naef(&[
            "bench-query",
            "--filter",
            s(&out),
            "--num-keys",
            "0"
        ])),
        1
    );
}
