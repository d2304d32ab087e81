use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::{CommandFactory, Parser};

use binned_income_cli::args::Cli;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binned-income")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `statistic -> value` from CSV estimate output.
fn values(csv: &str) -> Vec<(String, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].to_string(), f[3].parse().unwrap())
        })
        .collect()
}

fn bins() -> String {
    data("nantucket_bins.csv").to_string_lossy().into_owned()
}

fn refs() -> String {
    data("nantucket_refs.csv").to_string_lossy().into_owned()
}

#[test]
fn midpoint_estimate() {
    let o = cli(&["estimate", "--input", &bins(), "--method", "midpoint", "--stats", "mean,gini"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("dataset_id,method,statistic,value\nnantucket,midpoint,mean,"));
    let v = values(&out);
    assert!((v[0].1 - 121_506.0).abs() < 20.0);
    assert!((v[1].1 - 0.464).abs() < 0.005);
}

#[test]
fn mean_matched_step() {
    let o = cli(&["estimate", "--input", &bins(), "--refs", &refs(), "--method", "step", "--mean-match", "--stats", "gini"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((values(&stdout(&o))[0].1 - 0.537).abs() < 0.01);
}

#[test]
fn explicit_mean_matches_refs() {
    let a = cli(&["estimate", "--input", &bins(), "--refs", &refs(), "--method", "spline", "--mean-match"]);
    let b = cli(&["estimate", "--input", &bins(), "--mean", "137811", "--method", "spline", "--mean-match"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn mean_match_without_a_mean_is_a_config_error() {
    let o = cli(&["estimate", "--input", &bins(), "--method", "step", "--tail", "exponential", "--mean-match"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--refs"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn misplaced_options_are_rejected() {
    for args in [
        vec!["--method", "midpoint", "--tail", "pareto"],
        vec!["--method", "step", "--families", "gamma"],
        vec!["--method", "step", "--eps1", "0.2"],
        vec!["--method", "subdivide", "--eps1", "0.6"],
        vec!["--method", "parametric", "--mean-match", "--mean", "1000"],
        vec!["--method", "parametric", "--select", "aic", "--average", "bic"],
        vec!["--method", "step", "--mean", "1000"],
        vec!["--method", "step", "--threads", "0"],
        vec!["--method", "bogus"],
    ] {
        let mut argv = vec!["estimate", "--input", "/nonexistent.csv"];
        argv.extend(args.iter());
        let o = cli(&argv);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        // Validation happens before the missing input is touched.
        assert!(!stderr(&o).contains("nonexistent"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn missing_input_is_a_config_error() {
    let o = cli(&["estimate", "--input", "/nonexistent.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nonexistent"));
}

#[test]
fn partial_failure_exits_2_and_keeps_good_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bins.csv");
    let mut text = std::fs::read_to_string(data("nantucket_bins.csv")).unwrap();
    text.push_str("other,0,10000,5\nother,10000,,3\n");
    std::fs::write(&input, text).unwrap();
    let o = cli(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--refs",
        &refs(),
        "--method",
        "step",
        "--mean-match",
        "--stats",
        "gini",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stderr(&o).contains("other"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = cli(&[
            "estimate",
            "--input",
            &bins(),
            "--method",
            "parametric",
            "--families",
            "gamma,dagum,lognormal",
            "--average",
            "aic",
            "--stats",
            "mean,median,sd,gini,theil,mld,cv,p10,p99.5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn json_carries_fit_diagnostics() {
    let o = cli(&["estimate", "--input", &bins(), "--method", "parametric", "--families", "gamma,weibull", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let fits = v[0]["diagnostics"]["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    for key in ["family", "theta", "loglik", "g2", "df", "p_value", "aic", "bic", "converged", "moments_valid"] {
        assert!(fits[0].get(key).is_some(), "{key}");
    }
    assert_eq!(v[0]["method"], "parametric");
}

#[test]
fn density_grid() {
    let o = cli(&["density", "--input", &bins(), "--method", "subdivide", "--eps1", "0.2", "--rounds", "2", "--points", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,pdf,cdf"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0] && w[1][2] >= w[0][2]));
    assert!(rows.iter().all(|r| r[1] >= 0.0));
    assert!((rows[49][2] - 0.999).abs() < 1e-9);

    let o = cli(&["density", "--input", &bins(), "--method", "midpoint"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_then_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cli(&["synth", "--counties", "12", "--seed", "3", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (b, r) = (dir.path().join("bins.csv"), dir.path().join("refs.csv"));
    let rows = dir.path().join("rows.csv");
    let o = cli(&[
        "benchmark",
        "--input",
        b.to_str().unwrap(),
        "--refs",
        r.to_str().unwrap(),
        "--method",
        "midpoint,step",
        "--mean-match",
        "--threads",
        "2",
        "--out",
        rows.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("step+mean") && table.contains("RMSE %"), "{table}");
    let csv = std::fs::read_to_string(rows).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 12);
    assert!(csv.starts_with("dataset_id,method,estimate,reference,percent_error,error\n"));

    let o = cli(&["benchmark", "--input", b.to_str().unwrap(), "--refs", r.to_str().unwrap(), "--stats", "mean", "--method", "step"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("avg estimate") && stderr(&o).contains('$'));
}

/// A sample value for each long flag, or `None` for switches.
fn sample(flag: &str) -> Option<&'static str> {
    Some(match flag {
        "input" | "refs" => "/tmp/x.csv",
        "out" => "/tmp/out",
        "mean" => "1234.5",
        "method" => "subdivide",
        "tail" => "exponential",
        "families" => "gamma,dagum",
        "select" => "bic",
        "average" => "bic",
        "eps1" => "0.2",
        "eps2" => "0.6",
        "rounds" => "5",
        "stats" => "mean",
        "dataset" => "nantucket",
        "points" => "17",
        "rescale-counts" => "3",
        "threads" => "3",
        "counties" => "7",
        "seed" => "11",
        "mean-match" | "json" => return None,
        other => panic!("no sample for --{other}"),
    })
}

#[test]
fn every_help_flag_round_trips() {
    let command = Cli::command();
    for sub in command.get_subcommands() {
        let name = sub.get_name();
        let help = sub.clone().render_long_help().to_string();
        let required: Vec<String> = sub
            .get_arguments()
            .filter(|a| a.is_required_set())
            .flat_map(|a| {
                let long = a.get_long().unwrap();
                [format!("--{long}"), "/tmp/req".to_string()]
            })
            .collect();
        let mut base = vec!["binned-income".to_string(), name.to_string()];
        base.extend(required.iter().cloned());
        let baseline = format!("{:?}", Cli::try_parse_from(&base).unwrap());
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            if long == "help" || arg.is_required_set() {
                continue;
            }
            assert!(help.contains(&format!("--{long}")), "{name} --{long} missing from help");
            let mut argv = base.clone();
            argv.push(format!("--{long}"));
            if let Some(v) = sample(long) {
                argv.push(v.to_string());
            }
            let parsed = Cli::try_parse_from(&argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
            assert_ne!(format!("{parsed:?}"), baseline, "{name} --{long} had no effect");
        }
    }
}

#[test]
fn spec_flag_surface_is_present() {
    let command = Cli::command();
    let estimate = command.find_subcommand("estimate").unwrap();
    let density = command.find_subcommand("density").unwrap();
    let benchmark = command.find_subcommand("benchmark").unwrap();
    let has = |c: &clap::Command, f: &str| c.get_arguments().any(|a| a.get_long() == Some(f));
    for f in [
        "input", "refs", "mean", "mean-match", "method", "tail", "families", "select", "average", "stats", "eps1", "eps2",
        "rounds", "rescale-counts", "threads", "json", "out",
    ] {
        assert!(has(estimate, f) && has(benchmark, f), "--{f}");
    }
    assert!(has(density, "points"));
}
