use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dlap-debias"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn run_to(args: &[&str], path: &Path) -> Vec<u8> {
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--output", p]);
    let out = run(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["kstars", "--trials", "40", "--seed", "3"][..],
        &["entropy", "--trials", "40", "--seed", "3"],
        &[
            "partition",
            "--trials",
            "40",
            "--seed",
            "3",
            "--epsilon",
            "0.5",
        ],
        &["profile", "--trials", "10", "--seed", "3", "--k-max", "3"],
    ] {
        let one = run_to(
            &[args, &["--parallel", "1"]].concat(),
            &dir.path().join("a.csv"),
        );
        let four = run_to(
            &[args, &["--parallel", "4"]].concat(),
            &dir.path().join("b.csv"),
        );
        assert_eq!(one, four, "{args:?}");
    }
}

#[test]
fn csv_has_metadata_and_header() {
    let out = run(&["entropy", "--trials", "3", "--epsilon", "1", "--seed", "11"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // Entropy uses sensitivity 2, so p = e^{-1/2}.
    let p: f64 = lines[0]
        .strip_prefix("# p=")
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(p, (-0.5f64).exp());
    assert!(lines[0].ends_with(" sensitivity=2 seed=11"));
    assert_eq!(
        lines[1],
        "experiment,epsilon,trial,true_value,naive,unbiased"
    );
    assert_eq!(lines.len(), 5);
    assert!(!text.contains('\r'));
}

#[test]
fn profile_row_count() {
    let out = run(&["profile", "--trials", "7", "--k-max", "4"]);
    assert_eq!(code(&out), 0);
    let rows = String::from_utf8(out.stdout).unwrap().lines().count() - 2;
    assert_eq!(rows, 7 * 5);
}

#[test]
fn input_files() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.txt");
    std::fs::write(&hist, "# counts\n3\n0\n7\n").unwrap();
    let h = hist.to_str().unwrap();

    let out = run(&[
        "entropy",
        "--input",
        h,
        "--public-total",
        "10",
        "--trials",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // Without a public total the entropy experiment is misconfigured.
    assert_eq!(code(&run(&["entropy", "--input", h, "--trials", "2"])), 2);
    // A total that disagrees with the data is invalid input.
    assert_eq!(
        code(&run(&["entropy", "--input", h, "--public-total", "11"])),
        3
    );

    let edges = dir.path().join("e.txt");
    std::fs::write(&edges, "0 1\n1 0\n2 2\n1 2\n").unwrap();
    let out = run(&[
        "kstars",
        "--input",
        edges.to_str().unwrap(),
        "--trials",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    // Node 1 has degree 2, giving a single 2-star.
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("kstars,1,0,1,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["kstars", "--bogus"])), 2);
    assert_eq!(code(&run(&["kstars", "--k", "1"])), 2);
    assert_eq!(code(&run(&["kstars", "--epsilon", "-1"])), 2);
    assert_eq!(
        code(&run(&["partition", "--t", "1.5", "--epsilon", "1"])),
        2
    );
    assert_eq!(code(&run(&["entropy", "--trials", "0"])), 2);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "4\nfive\n").unwrap();
    let out = run(&["profile", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        code(&run(&["profile", "--input", missing.to_str().unwrap()])),
        3
    );
    let negative = dir.path().join("neg.txt");
    std::fs::write(&negative, "4\n-1\n").unwrap();
    assert_eq!(
        code(&run(&["profile", "--input", negative.to_str().unwrap()])),
        3
    );
}

#[test]
fn transform_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("noisy.txt");
    std::fs::write(&input, "3\n-2\n# skipped\n10\n").unwrap();
    let i = input.to_str().unwrap();
    let a = run_to(
        &[
            "transform",
            "laplace",
            "--input",
            i,
            "--epsilon",
            "1",
            "--seed",
            "4",
        ],
        &dir.path().join("a"),
    );
    let b = run_to(
        &[
            "transform",
            "laplace",
            "--input",
            i,
            "--epsilon",
            "1",
            "--seed",
            "4",
        ],
        &dir.path().join("b"),
    );
    assert_eq!(a, b);
    let values: Vec<f64> = String::from_utf8(a)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    for (v, k) in values.iter().zip([3.0, -2.0, 10.0]) {
        assert!((v - k).abs() <= 1.0);
    }

    let s = run_to(
        &[
            "transform",
            "staircase",
            "--input",
            i,
            "--epsilon",
            "1",
            "--gamma",
            "0.2",
        ],
        &dir.path().join("s"),
    );
    assert_eq!(String::from_utf8(s).unwrap().lines().count(), 3);
    assert_eq!(
        code(&run(&[
            "transform",
            "staircase",
            "--input",
            i,
            "--epsilon",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "transform",
            "staircase",
            "--input",
            i,
            "--epsilon",
            "1",
            "--gamma",
            "0.7"
        ])),
        2
    );
}

#[test]
fn verify_passes() {
    let out = run(&["verify", "--trials", "30"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}
