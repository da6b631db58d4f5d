use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use taylor_core::dataset::{ingest_files, IngestSummary, VINTAGE_CAVEAT};
use taylor_core::fmt::sig6;
use taylor_core::mlp::{parse_weight_dump, weight_dump, InputScaling};
use taylor_core::ols::{format_table, recover_structural, recover_structural_rounded, residual_stats};
use taylor_core::report::{
    build_series, comparison_csv, divergences_csv, find_divergences, parse_comparison_csv, render_svg, EstimateSeries,
    Estimator, SvgOptions,
};
use taylor_core::{fit_ols, rule_rate, train, Dataset, Error, Network, Preset, RuleParams, RunConfig};

use crate::{
    CheckModelArgs, EvaluateArgs, FitOlsArgs, IngestArgs, MlEstimateArgs, PlotArgs, RunArgs, SimulateArgs, TargetArgs,
    TrainArgs,
};

/// A failed command, tagged with the pipeline stage that failed.
#[derive(Debug)]
pub struct Failure {
    pub stage: &'static str,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {:#}", self.stage, self.error)
    }
}

/// Bad or missing command-line input.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// A model check whose estimates missed the analytic values.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

type Outcome = Result<(), Failure>;

trait Staged<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Staged<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure { stage, error: e.into() })
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let result = match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    };
    result.map_err(|e| match e {
        Error::Config { .. } => Failure { stage: "config", error: usage(e.to_string()) },
        other => Failure { stage: "config", error: other.into() },
    })
}

fn apply_targets(cfg: &mut RunConfig, t: &TargetArgs) {
    if let Some(v) = t.rstar {
        cfg.targets.r_star = v;
    }
    if let Some(v) = t.pistar {
        cfg.targets.pi_star = v;
    }
}

fn panel_path(flag: &Option<PathBuf>, cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.panel_path.clone())
        .ok_or_else(|| usage("--panel is required (or set panel_path in the config file)"))
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

fn load_panel(path: &Path, cfg: &RunConfig) -> anyhow::Result<Dataset> {
    Ok(Dataset::from_panel_csv(&read(path)?, cfg.targets)?)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|source| Error::File { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::File { path: path.clone(), source })?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn out_dir(flag: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.clone().unwrap_or_else(|| cfg.output_dir.clone())
}

// ---- ingest ----

fn ingest_dataset(cfg: &RunConfig) -> anyhow::Result<(Dataset, IngestSummary)> {
    let paths = cfg.series_paths().ok_or_else(|| {
        usage("all four series paths are required (--fedfunds --inflation --gdp --potential-gdp or config keys)")
    })?;
    Ok(ingest_files(&paths, cfg.inflation_measure, cfg.targets)?)
}

fn write_ingest(dir: &Path, ds: &Dataset, summary: &str) -> Result<(), Error> {
    write_artifact(dir, "panel.csv", &ds.to_panel_csv())?;
    write_artifact(dir, "ingest_summary.txt", summary)?;
    Ok(())
}

pub fn ingest(config: Option<&Path>, a: IngestArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    for (slot, flag) in [
        (&mut cfg.fedfunds_series_path, a.fedfunds),
        (&mut cfg.inflation_series_path, a.inflation),
        (&mut cfg.gdp_series_path, a.gdp),
        (&mut cfg.potential_gdp_series_path, a.potential_gdp),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if let Some(m) = &a.inflation_measure {
        cfg.set("inflation_measure", m).map_err(|e| usage(e.to_string())).stage("config")?;
    }
    apply_targets(&mut cfg, &a.targets);
    let (ds, summary) = ingest_dataset(&cfg).stage("ingest")?;
    let text = summary.to_string();
    print!("{text}");
    write_ingest(&out_dir(&a.out, &cfg), &ds, &text).stage("ingest")
}

// ---- fit-ols ----

struct OlsOutput {
    text: String,
    regression_csv: String,
    residuals_csv: String,
}

fn ols_report(ds: &Dataset, target_rule: Option<Preset>) -> anyhow::Result<OlsOutput> {
    let (label, target) = match target_rule {
        Some(p) => {
            let params = p.params();
            let t: Vec<f64> = ds.rows().iter().map(|r| rule_rate(r.inflation, r.output_gap, &params)).collect();
            (format!("{} rates", p.name()), t)
        }
        None => ("Fed funds rate".to_string(), ds.fedfunds()),
    };
    let fit = fit_ols(ds, &target)?;
    let mut text = format_table(&[(label.as_str(), &fit)]);
    text.push_str("(standard errors in parentheses; * p<0.05, ** p<0.01, *** p<0.001)\n");

    let targets = ds.targets();
    let full = recover_structural(fit.alpha(), fit.theta_pi(), fit.beta_y(), targets)?;
    let rounded = recover_structural_rounded(&fit, targets)?;
    text.push_str(&format!(
        "structural: beta_pi={} beta_1={} beta_y={}\n",
        sig6(full.beta_pi),
        sig6(full.beta_1),
        sig6(full.beta_y)
    ));
    text.push_str(&format!(
        "structural (two-decimal estimates): beta_pi={} beta_1={} beta_y={}\n",
        sig6(rounded.beta_pi),
        sig6(rounded.beta_1),
        sig6(rounded.beta_y)
    ));

    let ols = residual_stats(&fit.residuals)?;
    text.push_str(&format!(
        "ols residuals: sum={} abs_sum={} mse={}\n",
        sig6(ols.sum),
        sig6(ols.abs_sum),
        sig6(ols.mse)
    ));
    if target_rule.is_none() {
        let taylor = build_series(ds, Estimator::Rule(Preset::Taylor1993.params()), "taylor1993")?;
        let stats = residual_stats(&taylor.errors())?;
        text.push_str(&format!(
            "taylor1993 residuals: sum={} abs_sum={} mse={}\n",
            sig6(stats.sum),
            sig6(stats.abs_sum),
            sig6(stats.mse)
        ));
        text.push_str(&format!("note={VINTAGE_CAVEAT}\n"));
    }
    let dates: Vec<_> = ds.rows().iter().map(|r| r.date).collect();
    Ok(OlsOutput { text, regression_csv: fit.coefficients_csv(), residuals_csv: fit.residuals_csv(&dates)? })
}

fn parse_preset(name: &str) -> anyhow::Result<Preset> {
    name.parse::<Preset>().map_err(|e| usage(e.to_string()))
}

pub fn fit_ols_cmd(config: Option<&Path>, a: FitOlsArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    let rule = a.target_rule.as_deref().map(parse_preset).transpose().stage("fit-ols")?;
    let ds = panel_path(&a.panel, &cfg).and_then(|p| load_panel(&p, &cfg)).stage("ingest")?;
    let out = ols_report(&ds, rule).stage("fit-ols")?;
    print!("{}", out.text);
    let dir = out_dir(&a.out, &cfg);
    write_artifact(&dir, "regression.csv", &out.regression_csv).stage("fit-ols")?;
    write_artifact(&dir, "residuals.csv", &out.residuals_csv).stage("fit-ols")?;
    Ok(())
}

// ---- check-model ----

const CHECK_TOLERANCE: f64 = 1e-3;
const CHECK_MIN_R2: f64 = 0.999;

/// Report text and whether every estimate matched.
fn check_report(ds: &Dataset, preset: Preset) -> anyhow::Result<(String, bool)> {
    let params = preset.params();
    let target: Vec<f64> = ds.rows().iter().map(|r| rule_rate(r.inflation, r.output_gap, &params)).collect();
    let fit = fit_ols(ds, &target)?;
    let mut text = format!("model check: {}\n", preset.name());
    text.push_str(&format_table(&[(preset.name(), &fit)]));
    let checks = [
        ("alpha", fit.alpha(), params.reduced_intercept()),
        ("theta_pi", fit.theta_pi(), params.reduced_inflation_coef()),
        ("beta_y", fit.beta_y(), params.beta_y),
    ];
    let mut pass = true;
    for (name, got, want) in checks {
        let ok = (got - want).abs() <= CHECK_TOLERANCE;
        pass &= ok;
        text.push_str(&format!(
            "{name}: estimate={} expected={} {}\n",
            sig6(got),
            sig6(want),
            if ok { "PASS" } else { "FAIL" }
        ));
    }
    let r2_ok = fit.r_squared >= CHECK_MIN_R2;
    pass &= r2_ok;
    text.push_str(&format!(
        "r_squared: {} (>= {CHECK_MIN_R2}) {}\n",
        sig6(fit.r_squared),
        if r2_ok { "PASS" } else { "FAIL" }
    ));
    text.push_str(if pass { "result: PASS\n" } else { "result: FAIL\n" });
    Ok((text, pass))
}

pub fn check_model_cmd(config: Option<&Path>, a: CheckModelArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    let preset = parse_preset(&a.preset).stage("check-model")?;
    let ds = panel_path(&a.panel, &cfg).and_then(|p| load_panel(&p, &cfg)).stage("ingest")?;
    let (text, pass) = check_report(&ds, preset).stage("check-model")?;
    print!("{text}");
    if pass {
        Ok(())
    } else {
        Err(CheckFailed(preset.name().to_string())).stage("check-model")
    }
}

// ---- train-ml ----

fn apply_train_flags(cfg: &mut RunConfig, a: &TrainArgs) {
    let t = &mut cfg.train;
    if let Some(v) = a.mu {
        t.mu = v;
    }
    if let Some(v) = a.epochs {
        t.max_epochs = v;
    }
    if let Some(v) = a.seed {
        t.seed = v;
    }
    if let Some(v) = a.hidden {
        t.hidden_nodes = v;
    }
    if let Some(v) = a.epsilon {
        t.epsilon = v;
    }
    if let Some(v) = a.biases {
        t.biases = v;
    }
    if a.scale {
        t.input_scaling = InputScaling::Standardize;
    }
}

struct Trained {
    net: Network,
    dump: String,
    trace: String,
    text: String,
}

fn train_network(ds: &Dataset, cfg: &RunConfig) -> anyhow::Result<Trained> {
    let (net, report) = train(ds, &cfg.train)?;
    let text = format!(
        "epochs_run={} stop_reason={} final_mse={} final_max_abs_error={}\n",
        report.epochs_run,
        report.stop_reason.as_str(),
        sig6(report.final_mse),
        sig6(*report.max_abs_trace.last().expect("at least one epoch"))
    );
    Ok(Trained { dump: weight_dump(&net, &cfg.train, &report), trace: report.trace_csv(), net, text })
}

pub fn train_ml(config: Option<&Path>, a: TrainArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    apply_train_flags(&mut cfg, &a);
    cfg.train.validate().map_err(|e| usage(e.to_string())).stage("config")?;
    let ds = panel_path(&a.panel, &cfg).and_then(|p| load_panel(&p, &cfg)).stage("ingest")?;
    let t = train_network(&ds, &cfg).stage("train")?;
    print!("{}", t.text);
    let dir = out_dir(&a.out, &cfg);
    write_artifact(&dir, "network.txt", &t.dump).stage("train")?;
    write_artifact(&dir, "train_trace.csv", &t.trace).stage("train")?;
    Ok(())
}

// ---- ml-estimate ----

fn estimates_csv(series: &EstimateSeries) -> String {
    let mut out = String::from("date,actual,estimated,error\n");
    for r in &series.rows {
        out.push_str(&format!("{},{},{},{}\n", r.date, r.actual, r.estimated, r.error));
    }
    out
}

pub fn ml_estimate(config: Option<&Path>, a: MlEstimateArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    let ds = panel_path(&a.panel, &cfg).and_then(|p| load_panel(&p, &cfg)).stage("ingest")?;
    let net = read(&a.network).and_then(|t| parse_weight_dump(&t)).stage("ml-estimate")?;
    let series = build_series(&ds, Estimator::Network(&net), "ml").stage("ml-estimate")?;
    let csv = estimates_csv(&series);
    match &a.output {
        Some(path) => {
            fs::write(path, &csv).map_err(|source| Error::File { path: path.clone(), source }).stage("ml-estimate")?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

// ---- evaluate ----

fn evaluate_artifacts(ds: &Dataset, net: &Network, threshold: f64, dir: &Path) -> anyhow::Result<String> {
    let fit = fit_ols(ds, &ds.fedfunds())?;
    let series = vec![
        build_series(ds, Estimator::Rule(Preset::Taylor1993.params()), "taylor1993")?,
        build_series(ds, Estimator::from_fit(&fit), "ols")?,
        build_series(ds, Estimator::Network(net), "ml")?,
    ];
    let mut text = String::new();
    let mut episodes = Vec::new();
    for s in &series {
        let stats = residual_stats(&s.errors())?;
        let eps = find_divergences(s, threshold)?;
        text.push_str(&format!(
            "{}: mse={} abs_error_sum={} error_sum={} divergence_episodes={}\n",
            s.model_name,
            sig6(stats.mse),
            sig6(stats.abs_sum),
            sig6(stats.sum),
            eps.len()
        ));
        for e in &eps {
            text.push_str(&format!(
                "  {}..{} quarters={} peak_abs_error={}\n",
                e.start,
                e.end,
                e.quarters,
                sig6(e.peak_abs_error)
            ));
        }
        episodes.push((s.model_name.clone(), eps));
    }
    text.push_str(&format!("divergence_threshold={}\nnote={VINTAGE_CAVEAT}\n", sig6(threshold)));

    write_artifact(dir, "comparison.csv", &comparison_csv(&series))?;
    let figures = [
        ("figure_a.svg", "Taylor rule vs actual fed funds rate", 1),
        ("figure_b.svg", "Taylor rule and OLS estimate vs actual", 2),
        ("figure_g.svg", "Taylor rule, OLS, and network estimates vs actual", 3),
    ];
    for (name, title, k) in figures {
        let opts = SvgOptions { title: title.to_string(), ..SvgOptions::default() };
        write_artifact(dir, name, &render_svg(&series[..k], &opts)?)?;
    }
    write_artifact(dir, "divergences.csv", &divergences_csv(&episodes, threshold))?;
    Ok(text)
}

pub fn evaluate(config: Option<&Path>, a: EvaluateArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    if let Some(t) = a.threshold {
        cfg.divergence_threshold = t;
    }
    cfg.validate().map_err(|e| usage(e.to_string())).stage("config")?;
    let ds = panel_path(&a.panel, &cfg).and_then(|p| load_panel(&p, &cfg)).stage("ingest")?;
    let net = match &a.network {
        Some(path) => read(path).and_then(|t| parse_weight_dump(&t)).stage("evaluate")?,
        None => train_network(&ds, &cfg).stage("train")?.net,
    };
    let text = evaluate_artifacts(&ds, &net, cfg.divergence_threshold, &out_dir(&a.out, &cfg)).stage("evaluate")?;
    print!("{text}");
    Ok(())
}

// ---- simulate ----

pub fn simulate(config: Option<&Path>, a: SimulateArgs) -> Outcome {
    let mut cfg = load_config(config)?;
    apply_targets(&mut cfg, &a.targets);
    let params = if a.rule == "custom" {
        match (a.beta1, a.betapi, a.betay) {
            (Some(b1), Some(bp), Some(by)) => {
                RuleParams::new(cfg.targets.r_star, cfg.targets.pi_star, b1, bp, by).stage("simulate")?
            }
            _ => return Err(usage("--rule custom requires --beta1, --betapi and --betay")).stage("simulate"),
        }
    } else {
        let mut p = parse_preset(&a.rule).stage("simulate")?.params();
        if let Some(v) = a.targets.rstar {
            p.r_star = v;
        }
        if let Some(v) = a.targets.pistar {
            p.pi_star = v;
        }
        p
    };
    println!("{}", sig6(rule_rate(a.pi, a.gap, &params)));
    Ok(())
}

// ---- plot ----

pub fn plot(a: PlotArgs) -> Outcome {
    let all = read(&a.comparison).and_then(|t| parse_comparison_csv(&t)).stage("plot")?;
    let series: Vec<EstimateSeries> = if a.models.is_empty() {
        all
    } else {
        let mut picked = Vec::new();
        for m in &a.models {
            match all.iter().find(|s| &s.model_name == m) {
                Some(s) => picked.push(s.clone()),
                None => return Err(usage(format!("model `{m}` not found in comparison CSV"))).stage("plot"),
            }
        }
        picked
    };
    let opts = SvgOptions { title: a.title, width: a.width, height: a.height };
    let svg = render_svg(&series, &opts).stage("plot")?;
    fs::write(&a.out, svg).map_err(|source| Error::File { path: a.out.clone(), source }).stage("plot")?;
    println!("wrote {}", a.out.display());
    Ok(())
}

// ---- run ----

pub fn run(config: Option<&Path>, a: RunArgs) -> Outcome {
    if config.is_none() {
        return Err(usage("run requires --config")).stage("config");
    }
    let cfg = load_config(config)?;
    cfg.validate().map_err(|e| usage(e.to_string())).stage("config")?;
    let dir = out_dir(&a.out, &cfg);

    let ds = if let Some(panel) = cfg.panel_path.clone().filter(|_| cfg.series_paths().is_none()) {
        let ds = load_panel(&panel, &cfg).stage("ingest")?;
        let summary = format!(
            "source={}\npanel_rows={}\npanel_range={}..{}\nr_star={}\npi_star={}\nnote={VINTAGE_CAVEAT}\n",
            panel.display(),
            ds.len(),
            ds.first_date().expect("nonempty"),
            ds.last_date().expect("nonempty"),
            cfg.targets.r_star,
            cfg.targets.pi_star
        );
        print!("{summary}");
        write_ingest(&dir, &ds, &summary).stage("ingest")?;
        ds
    } else {
        let (ds, summary) = ingest_dataset(&cfg).stage("ingest")?;
        let text = summary.to_string();
        print!("{text}");
        write_ingest(&dir, &ds, &text).stage("ingest")?;
        ds
    };

    let ols = ols_report(&ds, None).stage("fit-ols")?;
    print!("{}", ols.text);
    write_artifact(&dir, "regression.csv", &ols.regression_csv).stage("fit-ols")?;
    write_artifact(&dir, "residuals.csv", &ols.residuals_csv).stage("fit-ols")?;

    let (check, pass) = check_report(&ds, Preset::Taylor1993).stage("check-model")?;
    print!("{check}");
    write_artifact(&dir, "check_model.txt", &check).stage("check-model")?;
    if !pass {
        return Err(CheckFailed(Preset::Taylor1993.name().to_string())).stage("check-model");
    }

    let t = train_network(&ds, &cfg).stage("train")?;
    print!("{}", t.text);
    write_artifact(&dir, "network.txt", &t.dump).stage("train")?;
    write_artifact(&dir, "train_trace.csv", &t.trace).stage("train")?;

    let text = evaluate_artifacts(&ds, &t.net, cfg.divergence_threshold, &dir).stage("evaluate")?;
    print!("{text}");
    Ok(())
}
