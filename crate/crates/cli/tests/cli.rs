use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_taylor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn panel() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/usmacro_panel.csv").to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_documents_every_flag() {
    let expected: &[(&str, &[&str])] = &[
        ("ingest", &["--fedfunds", "--inflation", "--gdp", "--potential-gdp", "--inflation-measure", "--out"]),
        ("fit-ols", &["--panel", "--target-rule", "--out"]),
        ("check-model", &["--panel", "--preset"]),
        ("train-ml", &["--panel", "--mu", "--epochs", "--seed", "--scale", "--hidden", "--epsilon", "--biases"]),
        ("ml-estimate", &["--network", "--panel", "--output"]),
        ("evaluate", &["--panel", "--network", "--out", "--threshold"]),
        ("simulate", &["--rule", "--pi", "--gap", "--beta1", "--betapi", "--betay", "--rstar", "--pistar"]),
        ("plot", &["--comparison", "--models", "--title", "--out"]),
        ("run", &["--config", "--out"]),
    ];
    for (cmd, flags) in expected {
        let o = run(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd} --help");
        let text = stdout(&o);
        for flag in *flags {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
        assert!(text.contains("--config"), "{cmd} --help lacks --config");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--rule", "taylor1993", "--pi", "x", "--gap", "0"]).status.code(), Some(1));
    let o = run(&["simulate", "--rule", "taylor2000", "--pi", "1", "--gap", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown rule preset"));
    assert_eq!(run(&["simulate", "--rule", "custom", "--pi", "1", "--gap", "0"]).status.code(), Some(1));
    assert_eq!(run(&["fit-ols"]).status.code(), Some(1));
    assert_eq!(run(&["run"]).status.code(), Some(1));
}

#[test]
fn simulate_prints_rates() {
    let o = run(&["simulate", "--rule", "ols_fitted", "--pi", "4", "--gap", "0"]);
    assert_eq!(stdout(&o).trim(), "5.87000");
    let o = run(&["simulate", "--rule", "taylor1993", "--pi", "2", "--gap", "0"]);
    assert_eq!(stdout(&o).trim(), "4.00000");
    let o = run(&["simulate", "--rule", "taylor1993", "--pi", "4", "--gap", "-2"]);
    assert_eq!(stdout(&o).trim(), "6.00000");
    let o = run(&[
        "simulate", "--rule", "custom", "--pi", "3", "--gap", "1", "--beta1", "1", "--betapi", "0.5", "--betay", "0.5",
        "--rstar", "1", "--pistar", "2",
    ]);
    assert_eq!(stdout(&o).trim(), "5.00000");
}

#[test]
fn missing_series_file_names_ingest_stage() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let m = path_str(&missing);
    let o = run(&[
        "ingest",
        "--fedfunds",
        m,
        "--inflation",
        m,
        "--gdp",
        m,
        "--potential-gdp",
        m,
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ingest stage"), "{}", stderr(&o));

    let o = run(&["fit-ols", "--panel", m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ingest stage"));
}

#[test]
fn divergent_step_names_train_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["train-ml", "--panel", &panel(), "--mu", "50", "--epochs", "50", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("train stage") && err.contains("diverged"), "{err}");
}

#[test]
fn singular_panel_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let mut text = String::from("date,fedfunds,inflation,inflation_gap,output_gap\n");
    for (k, q) in ["2000Q1", "2000Q2", "2000Q3", "2000Q4", "2001Q1"].iter().enumerate() {
        text.push_str(&format!("{q},{},3,1,{}\n", 4.0 + k as f64, k as f64 - 2.0));
    }
    fs::write(&csv, text).unwrap();
    let o = run(&["fit-ols", "--panel", path_str(&csv), "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("singular"));
    let o = run(&["check-model", "--panel", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_panel_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "date,fedfunds,inflation,inflation_gap,output_gap\n2000Q1,1,2,0,0\n2000Q2,abc,2,0,0\n").unwrap();
    let o = run(&["fit-ols", "--panel", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn fit_ols_writes_table_and_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fit-ols", "--panel", &panel(), "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["Intercept (alpha)", "Obs.", "222", "R^2", "data vintage caveat", "taylor1993 residuals"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let reg = fs::read_to_string(dir.path().join("regression.csv")).unwrap();
    assert!(reg.starts_with("term,estimate,std_error,t_stat,p_value,stars"));
    let res = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert_eq!(res.lines().count(), 223);

    let o = run(&["fit-ols", "--panel", &panel(), "--target-rule", "taylor1993", "--out", path_str(dir.path())]);
    assert!(stdout(&o).contains("1.00000***"));
}

#[test]
fn check_model_passes_for_both_presets() {
    for preset in ["taylor1993", "ols_fitted"] {
        let o = run(&["check-model", "--panel", &panel(), "--preset", preset]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("result: PASS"));
    }
}

#[test]
fn train_estimate_evaluate_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    let o = run(&[
        "train-ml",
        "--panel",
        &panel(),
        "--epochs",
        "200",
        "--seed",
        "4",
        "--hidden",
        "4",
        "--scale",
        "--out",
        d,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dump = fs::read_to_string(dir.path().join("network.txt")).unwrap();
    for key in ["w[0][3]=", "w[1][0]=", "v[3]=", "b[0]=", "c=", "mu=0.001", "seed=4", "input_scaling=standardize"] {
        assert!(dump.contains(key), "dump lacks {key}");
    }
    assert_eq!(fs::read_to_string(dir.path().join("train_trace.csv")).unwrap().lines().count(), 201);

    let network = dir.path().join("network.txt");
    let est = dir.path().join("ml.csv");
    let o = run(&["ml-estimate", "--network", path_str(&network), "--panel", &panel(), "--output", path_str(&est)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let est_text = fs::read_to_string(&est).unwrap();
    assert!(est_text.starts_with("date,actual,estimated,error\n1955Q3,"));
    assert_eq!(est_text.lines().count(), 223);

    let o = run(&["evaluate", "--panel", &panel(), "--network", path_str(&network), "--threshold", "3", "--out", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["comparison.csv", "figure_a.svg", "figure_b.svg", "figure_g.svg", "divergences.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let polylines = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap().matches("<polyline").count();
    assert_eq!((polylines("figure_a.svg"), polylines("figure_b.svg"), polylines("figure_g.svg")), (2, 3, 4));
    let comparison = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 1 + 3 * 222);
    assert!(fs::read_to_string(dir.path().join("divergences.csv")).unwrap().contains(",3,"));

    let svg = dir.path().join("custom.svg");
    let o = run(&[
        "plot",
        "--comparison",
        path_str(&dir.path().join("comparison.csv")),
        "--models",
        "ols,ml",
        "--title",
        "t",
        "--out",
        path_str(&svg),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 3);
    let o = run(&[
        "plot",
        "--comparison",
        path_str(&dir.path().join("comparison.csv")),
        "--models",
        "x",
        "--out",
        path_str(&svg),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let cfg = dir.join("run.cfg");
    let text = format!(
        "# replication run\npanel_path = {}\noutput_dir = {}\nmax_epochs = 300\nseed = 2\n{extra}",
        panel(),
        dir.join("out").display()
    );
    fs::write(&cfg, text).unwrap();
    cfg
}

#[test]
fn run_pipeline_writes_all_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let mut names: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "check_model.txt",
            "comparison.csv",
            "divergences.csv",
            "figure_a.svg",
            "figure_b.svg",
            "figure_g.svg",
            "ingest_summary.txt",
            "network.txt",
            "panel.csv",
            "regression.csv",
            "residuals.csv",
            "train_trace.csv",
        ]
    );
    assert_eq!(fs::read_to_string(out.join("panel.csv")).unwrap(), fs::read_to_string(panel()).unwrap());

    let first: Vec<Vec<u8>> = names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect();
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert!(o.status.success());
    let second: Vec<Vec<u8>> = names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn run_pipeline_failures_name_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mu = 50\n");
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("train stage"));

    let cfg = dir.path().join("missing.cfg");
    fs::write(
        &cfg,
        "fedfunds_series_path = /nonexistent/a.csv\ninflation_series_path = /nonexistent/b.csv\n\
         gdp_series_path = /nonexistent/c.csv\npotential_gdp_series_path = /nonexistent/d.csv\n",
    )
    .unwrap();
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ingest stage"));

    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = run(&["run", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config stage"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mu = 50\n");
    let o =
        run(&["train-ml", "--config", path_str(&cfg), "--mu", "0.001", "--epochs", "5", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dump = fs::read_to_string(dir.path().join("network.txt")).unwrap();
    assert!(dump.contains("mu=0.001") && dump.contains("max_epochs=5") && dump.contains("seed=2"));
}

#[test]
fn ingest_fred_exports() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let mut ff = String::from("DATE,FEDFUNDS\n");
    let mut cpi = String::from("DATE,CPIAUCSL\n");
    for y in 1999..=2001 {
        for m in 1..=12 {
            ff.push_str(&format!("{y}-{m:02}-01,{}\n", 5.0 + (m % 3) as f64));
            cpi.push_str(&format!(
                "{y}-{m:02}-01,{}\n",
                100.0 * 1.02f64.powf((y - 1999) as f64 + (m - 1) as f64 / 12.0)
            ));
        }
    }
    ff = ff.replacen("1999-02-01,7", "1999-02-01,.", 1);
    let mut gdp = String::from("DATE,GDPC1\n");
    let mut pot = String::from("DATE,GDPPOT\n");
    for y in 1999..=2001 {
        for m in [1, 4, 7, 10] {
            gdp.push_str(&format!("{y}-{m:02}-01,101\n"));
            pot.push_str(&format!("{y}-{m:02}-01,100\n"));
        }
    }
    let paths = [write("ff.csv", &ff), write("cpi.csv", &cpi), write("gdp.csv", &gdp), write("pot.csv", &pot)];
    let o = run(&[
        "ingest",
        "--fedfunds",
        path_str(&paths[0]),
        "--inflation",
        path_str(&paths[1]),
        "--gdp",
        path_str(&paths[2]),
        "--potential-gdp",
        path_str(&paths[3]),
        "--out",
        path_str(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("panel_rows=8") && text.contains("panel_range=2000Q1..2001Q4"), "{text}");
    assert!(text.contains("missing_dropped=1") && text.contains("data vintage caveat"));
    let panel = fs::read_to_string(dir.path().join("panel.csv")).unwrap();
    let first = panel.lines().nth(1).unwrap();
    let fields: Vec<f64> = first.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert!((fields[1] - 2.0).abs() < 1e-9, "yoy inflation {first}");
    assert!((fields[3] - 1.0).abs() < 1e-12, "output gap {first}");
}
