use std::path::Path;
use std::process::{Command, Output};

use seqtest::cli::Designed;
use seqtest::{desk_u_grid, design_fsst_plan, eval_exact, HypothesisModel, Scenario, TruthParam};

fn seqtest(args: &[&str]) -> Output {
    seqtest_env(args, &[])
}

fn seqtest_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_seqtest"));
    cmd.args(args).env_remove("SEQTEST_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = seqtest(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn code(args: &[&str]) -> i32 {
    seqtest(args).status.code().unwrap()
}

fn checkpoint_lines(record: &str) -> Vec<&str> {
    record.lines().filter(|l| l.starts_with("checkpoint")).collect()
}

#[test]
fn design_fsst_prints_sample_size_and_threshold() {
    let out = ok(&["design", "fsst", "--model", "gaussian:0.5", "--alpha", "1e-12", "--beta", "1e-2"]);
    assert!(out.contains("# n=88 c=0.2509"), "{out}");
}

#[test]
fn design_gmt_structure() {
    let sym = ok(&["design", "gmt", "--model", "gaussian:0.5", "--alpha", "1e-6", "--beta", "1e-6"]);
    assert!(sym.contains("# K0=0 K1=0"), "{sym}");
    assert!(sym.contains("opportunities=3"), "{sym}");
    let asym = ok(&["design", "gmt", "--alpha", "1e-12", "--beta", "1e-2"]);
    assert!(asym.contains("# K0=2 K1=0"), "{asym}");
    assert!(asym.contains("checkpoints=5 opportunities=5"), "{asym}");
}

#[test]
fn single_stage_st_is_the_fsst() {
    let st = ok(&["design", "st", "--K", "1", "--alpha", "1e-12", "--beta", "1e-2"]);
    let fsst = ok(&["design", "fsst", "--alpha", "1e-12", "--beta", "1e-2"]);
    assert_eq!(checkpoint_lines(&st), checkpoint_lines(&fsst));
}

#[test]
fn every_family_designs() {
    for family in ["fsst", "3st", "gmt", "st", "modst", "sprt"] {
        let out = ok(&["design", family, "--K", "2", "--alpha", "1e-4", "--beta", "1e-3"]);
        Designed::parse(&out).unwrap();
    }
    let out = ok(&["design", "gmt", "--model", "bernoulli:0.3,0.7", "--alpha", "1e-4", "--beta", "1e-3"]);
    assert!(out.contains("model bernoulli:0.3,0.7"));
}

#[test]
fn design_output_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fsst.plan");
    ok(&["design", "fsst", "--alpha", "1e-6", "--beta", "1e-6", "--out", path.to_str().unwrap()]);
    let Designed::Plan(parsed) = Designed::parse(&std::fs::read_to_string(&path).unwrap()).unwrap() else {
        panic!("expected a plan record");
    };
    let model = HypothesisModel::gaussian(0.5).unwrap();
    let direct = design_fsst_plan(&model, 1e-6, 1e-6, Default::default()).unwrap();
    assert_eq!(parsed, direct);
    let a = eval_exact(&parsed, &model, TruthParam(0.2)).unwrap();
    let b = eval_exact(&direct, &model, TruthParam(0.2)).unwrap();
    assert_eq!(a, b);

    let report = ok(&["eval", "--plan", path.to_str().unwrap(), "--mu", "-0.5,0.5"]);
    assert_eq!(report.lines().filter(|l| l.starts_with("mu=")).count(), 2);
}

#[test]
fn sweep_writes_csv() {
    let out = ok(&["sweep", "--family", "modst", "--K", "2", "--alpha", "1e-6", "--beta", "1e-6", "--grid", "-0.6:0.6:5"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "mu,ess,ess_over_nstar,type1,type2,se_ess,method");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("-6.00000000000e-1,"));
}

#[test]
fn same_seed_same_bytes_across_thread_counts() {
    let args = [
        "sweep", "--family", "sprt", "--alpha", "1e-3", "--beta", "1e-3", "--grid", "-0.5:0.5:4", "--reps", "2000",
        "--seed", "9",
    ];
    let one = seqtest_env(&args, &[("SEQTEST_THREADS", "1")]);
    let four = seqtest_env(&args, &[("SEQTEST_THREADS", "4")]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn calibrate_prints_levels() {
    let out = ok(&["calibrate", "--m", "100", "--u", "10", "--l", "10", "--alpha", "0.05", "--beta", "0.05"]);
    assert!(out.contains("control=fwe"));
    let beta: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("beta_stream="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((beta - (1.0 - 0.95f64.powf(0.1))).abs() < 1e-12);
}

#[test]
fn config_file_supplies_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"gaussian:0.5\"\nalpha = 1e-12\nbeta = 1e-2\nfamily = \"fsst\"\n").unwrap();
    let out = ok(&["design", "--config", cfg.to_str().unwrap()]);
    assert!(out.contains("# n=88 c=0.2509"));
    let flag_wins = ok(&["design", "--config", cfg.to_str().unwrap(), "--beta", "1e-12"]);
    assert!(flag_wins.contains("beta 1e-12"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["design", "fsst", "--alpha", "2", "--beta", "0.1"]), 2);
    assert_eq!(code(&["design", "fsst", "--alpha", "0.1"]), 2);
    assert_eq!(code(&["design", "nope", "--alpha", "0.1", "--beta", "0.1"]), 2);
    assert_eq!(code(&["design", "st", "--alpha", "0.1", "--beta", "0.1"]), 2);
    assert_eq!(code(&["design", "fsst", "--model", "poisson:1", "--alpha", "0.1", "--beta", "0.1"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(
        code(&["sweep", "--family", "fsst", "--alpha", "0.1", "--beta", "0.1", "--grid", "-1:1:0"]),
        2,
        "empty grid"
    );
    assert_eq!(code(&["eval", "--plan", "/definitely/not/here.plan"]), 3);
    assert_eq!(
        seqtest_env(&["design", "fsst", "--alpha", "0.1", "--beta", "0.1"], &[("SEQTEST_THREADS", "zero")])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "alpah = 0.1\n").unwrap();
    assert_eq!(code(&["design", "fsst", "--config", bad.to_str().unwrap()]), 2);

    let strict = dir.path().join("strict.toml");
    std::fs::write(&strict, "[exact]\npoints = 5\ncheck = \"double\"\ntolerance = 1e-300\n").unwrap();
    assert_eq!(
        code(&[
            "eval", "--config", strict.to_str().unwrap(), "--family", "gmt", "--alpha", "1e-6", "--beta", "1e-6",
            "--mu", "0.1",
        ]),
        4
    );

    let file = dir.path().join("a_file");
    std::fs::write(&file, "").unwrap();
    let nested = file.join("sub");
    assert_eq!(code(&["reproduce", "fig2", "--out", nested.to_str().unwrap()]), 3);
}

fn csv_header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn reproduce_curves_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&[
            "reproduce", "fig1", "--grid", "-0.6:0.6:4", "--reps", "500", "--seed", "3", "--out",
            dir.path().to_str().unwrap(),
        ]);
    }
    for name in ["fig1a.csv", "fig1b.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        assert_eq!(
            csv_header(&a.path().join(name)),
            "family,K,mu,ess,ess_over_nstar,type1,type2,se_ess,method"
        );
    }
    let fig1a = std::fs::read_to_string(a.path().join("fig1a.csv")).unwrap();
    assert_eq!(fig1a.lines().count(), 1 + 5 * 4);
}

#[test]
fn reproduce_stage_counts() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["reproduce", "fig3", "--streams", "2000", "--out", dir.path().to_str().unwrap()]);
    for (name, scenario) in [("fig3a.csv", Scenario::KnownCount), ("fig3b.csv", Scenario::UpperBoundOnly)] {
        let path = dir.path().join(name);
        assert_eq!(
            csv_header(&path),
            "u,u_over_m,family,K,alpha_stream,beta_stream,ess_mixture,max_stages,se_ess_mixture"
        );
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let mut gmt_rows = 0;
        for rec in reader.records() {
            let rec = rec.unwrap();
            if &rec[2] == "gmt" {
                gmt_rows += 1;
                let stages: usize = rec[7].parse().unwrap();
                assert!((3..=5).contains(&stages), "{name}: {stages} stages");
            }
        }
        assert_eq!(gmt_rows, desk_u_grid(2000, scenario).len());
    }
}
