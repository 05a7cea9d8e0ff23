use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relu_fim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relu-fim")).args(args).output().expect("spawn relu-fim")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

fn floats(text: &str, name: &str) -> Vec<f64> {
    column(text, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn mae_csv_header_and_rows() {
    let o = relu_fim(&["mae", "--d", "6", "--m", "300,600", "--n", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "d,m,group,index,mae,seed,mae_bootstrap_se");
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(column(&text, "seed").iter().all(|s| s == "1"));
}

#[test]
fn scatter_cardinality_and_coordinate_limit() {
    let o = relu_fim(&["scatter", "--d", "5", "--m", "400", "--n", "17", "--groups", "G1,G2,G3offdiag", "--l", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "d,m,group,theoretical,realized");
    assert_eq!(text.lines().count(), 1 + 17 * 3);

    let inputs = relu_fim_inputs(5, 17, 1);
    let groups = column(&text, "group");
    let theory = floats(&text, "theoretical");
    let g2: Vec<f64> = groups.iter().zip(&theory).filter(|(g, _)| *g == "G2").map(|(_, t)| *t).collect();
    for (t, x) in g2.iter().zip(&inputs) {
        assert_eq!(*t, x[2] / 2.0);
    }
}

fn relu_fim_inputs(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    relu_fim::experiment::experiment_inputs(d, n, seed)
}

#[test]
fn scatter_correlation_at_large_width() {
    let o = relu_fim(&["scatter", "--d", "10", "--m", "100000", "--n", "100"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let groups = column(&text, "group");
    let (t, r) = (floats(&text, "theoretical"), floats(&text, "realized"));
    for g in ["G1", "G2", "G3diag", "G3offdiag"] {
        let idx: Vec<usize> = (0..groups.len()).filter(|&i| groups[i] == g).collect();
        let a: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        let b: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
        let rho = pearson(&a, &b);
        assert!(rho > 0.99, "{g}: correlation {rho}");
    }
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["mae", "--groups", ""],
        vec!["mae", "--groups", "G5"],
        vec!["mae", "--d", "1", "--groups", "G3diag"],
        vec!["mae", "--m", "0"],
        vec!["mae", "--bogus"],
        vec!["spectrum", "--m", "5000"],
        vec!["spectrum", "--report", "eigen", "--m", "64", "--n", "1000"],
        vec!["dynamics", "--mode", "sideways"],
        vec!["oracle", "--d", "4"],
        vec!["oracle", "--format", "csv"],
    ] {
        let o = relu_fim(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn missing_or_unknown_config_is_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "d = 6\nwidth = 7\n").unwrap();
    let o = relu_fim(&["mae", "--config", conf.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));
    let o = relu_fim(&["mae", "--config", "/nonexistent/x.conf"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("mae.conf");
    fs::write(&conf, "d = 6\nm = 200\nn = 3\ngroups = G1\n").unwrap();
    let c = conf.to_str().unwrap();
    let from_file = stdout(&relu_fim(&["mae", "--config", c]));
    assert_eq!(column(&from_file, "d"), vec!["6"]);
    let o = relu_fim(&["mae", "--config", c, "--d", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], 7);
    assert_eq!(v["n_inputs"], 3);
}

#[test]
fn injected_oracle_error_exits_two() {
    let args = ["oracle", "--d", "6", "--n", "10000", "--n-limit", "10000", "--n-relu", "10000", "--inject-error", "0:0.5"];
    let o = relu_fim(&args);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let special: Vec<&str> =
        v["failures"].as_array().unwrap().iter().filter_map(|f| f.as_str()).filter(|f| f.starts_with("special case")).collect();
    assert_eq!(special.len(), 1, "{special:?}");
}

#[test]
fn spectrum_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = relu_fim(&["spectrum", "--d", "4", "--m", "96", "--n", "4000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let eig: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(eig.len(), 96);
    assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(v["expected_counts"]["second"], 4);
    assert_eq!(v["expected_counts"]["third"], 9);
}

#[test]
fn spectrum_csv_and_gram_report() {
    let o = relu_fim(&["spectrum", "--d", "4", "--m", "64", "--n", "2000", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "rank,eigenvalue,band");
    assert_eq!(text.lines().count(), 65);

    let o = relu_fim(&["spectrum", "--report", "gram", "--d", "4", "--m", "3000", "--n", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // V0, 4 rows, 3 diagonal contrasts, 6 pairs.
    assert_eq!(v["summary"]["labels"].as_array().unwrap().len(), 14);
}

#[test]
fn dynamics_trajectory_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.csv");
    let o = relu_fim(&["dynamics", "--d", "4", "--m", "128", "--n", "4000", "--iters", "30", "--rates-out", rates.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("iter,loss,v0,vl_1,"));
    assert_eq!(text.lines().count(), 1 + 31);
    let rates = fs::read_to_string(&rates).unwrap();
    assert!(rates.starts_with("group,label,nominal,rayleigh,fitted_rate"));
    assert_eq!(rates.lines().count(), 5);
}

#[test]
fn empirical_dynamics_runs() {
    let o = relu_fim(&["dynamics", "--mode", "empirical", "--d", "3", "--m", "64", "--n", "300", "--iters", "10", "--step", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 12);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = relu_fim(&["scatter", "--d", "6", "--m", "500", "--n", "30", "--seed", "9", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        fs::read(&p).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let other = relu_fim(&["scatter", "--d", "6", "--m", "500", "--n", "30", "--seed", "10"]);
    assert_ne!(other.stdout, run("c.csv"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(text.lines().any(|l| l.trim_start().starts_with("seed")));
        seen += 1;
    }
    assert!(seen >= 7);
}

#[test]
fn version_and_help_exit_zero() {
    assert_eq!(code(&relu_fim(&["--version"])), 0);
    assert_eq!(code(&relu_fim(&["mae", "--help"])), 0);
}
