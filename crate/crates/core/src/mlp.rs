//! Two-input, single-hidden-layer sigmoid network trained by online
//! gradient descent.
//!
//! Forward pass, for hidden node `n`:
//!
//! ```text
//! u_n = w[0][n] * pi + w[1][n] * gap (+ b_n)
//! z_n = sigmoid(u_n)
//! i_hat = sum_n v_n * z_n (+ c)
//! ```
//!
//! The loss is `E = e^2 / 2` with `e = i - i_hat`, and each sample moves the
//! weights by `-mu * dE/dweight`:
//!
//! ```text
//! v_n    += mu * e * z_n
//! w[j][n] += mu * e * v_n * x_j * z_n * (1 - z_n)
//! ```
//!
//! Both updates are evaluated at the same (pre-update) weights.
//!
//! Bias terms `b_n` and `c` are optional. Inputs can optionally be
//! standardized with training-set moments; the network then carries the
//! moments and applies them itself, so callers always pass raw percent values.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Inputs are `[inflation, output_gap]`.
pub const INPUTS: usize = 2;

/// Half-width of the uniform weight initialization.
pub const INIT_RANGE: f64 = 0.5;

/// Logistic function, split on sign so `exp` never overflows.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bias {
    pub hidden: Vec<f64>,
    pub output: f64,
}

/// Per-input z-scoring applied before the first layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: [f64; INPUTS],
    pub std: [f64; INPUTS],
}

impl Standardizer {
    /// Population moments of inflation and output gap. A constant input gets
    /// unit scale.
    pub fn fit(dataset: &Dataset) -> Self {
        let n = dataset.len() as f64;
        let cols = [
            dataset.rows().iter().map(|r| r.inflation).collect::<Vec<_>>(),
            dataset.rows().iter().map(|r| r.output_gap).collect::<Vec<_>>(),
        ];
        let mut mean = [0.0; INPUTS];
        let mut std = [1.0; INPUTS];
        for j in 0..INPUTS {
            mean[j] = cols[j].iter().sum::<f64>() / n;
            let var = cols[j].iter().map(|x| (x - mean[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                std[j] = var.sqrt();
            }
        }
        Self { mean, std }
    }

    pub fn apply(&self, x: [f64; INPUTS]) -> [f64; INPUTS] {
        std::array::from_fn(|j| (x[j] - self.mean[j]) / self.std[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// `w[j][n]`: input `j` (0 = inflation, 1 = output gap) to hidden node `n`.
    pub w: [Vec<f64>; INPUTS],
    /// Hidden node `n` to output.
    pub v: Vec<f64>,
    pub bias: Option<Bias>,
    pub scaler: Option<Standardizer>,
}

/// Hidden-layer pre-activations `u` and activations `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub u: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub output: f64,
    pub state: HiddenState,
    /// Inputs as seen by the first layer (after scaling, if any).
    pub x: [f64; INPUTS],
}

/// One training observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub pi: f64,
    pub gap: f64,
    pub target: f64,
}

impl Network {
    pub fn new(w: [Vec<f64>; INPUTS], v: Vec<f64>) -> Result<Self> {
        let net = Self { w, v, bias: None, scaler: None };
        net.validate()?;
        Ok(net)
    }

    /// All weights zero, no biases.
    pub fn zeros(hidden: usize) -> Self {
        Self { w: [vec![0.0; hidden], vec![0.0; hidden]], v: vec![0.0; hidden], bias: None, scaler: None }
    }

    pub fn with_bias(mut self, bias: Bias) -> Result<Self> {
        self.bias = Some(bias);
        self.validate()?;
        Ok(self)
    }

    pub fn hidden_nodes(&self) -> usize {
        self.v.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v.len();
        if n == 0 {
            return Err(Error::Shape("network needs at least one hidden node".into()));
        }
        if self.w.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!(
                "input weights have {} and {} entries for {n} hidden nodes",
                self.w[0].len(),
                self.w[1].len()
            )));
        }
        if let Some(b) = &self.bias {
            if b.hidden.len() != n {
                return Err(Error::Shape(format!("{} hidden biases for {n} hidden nodes", b.hidden.len())));
            }
        }
        if !self.params().iter().all(|p| p.is_finite()) {
            return Err(Error::Domain("network weights must be finite".into()));
        }
        Ok(())
    }

    /// Flattened parameters: `w[0]`, `w[1]`, `v`, then hidden biases and the
    /// output bias when present.
    pub fn params(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.w.iter().flatten().chain(&self.v).copied().collect();
        if let Some(b) = &self.bias {
            p.extend(&b.hidden);
            p.push(b.output);
        }
        p
    }

    fn param_mut(&mut self, index: usize) -> &mut f64 {
        let n = self.v.len();
        match index {
            i if i < n => &mut self.w[0][i],
            i if i < 2 * n => &mut self.w[1][i - n],
            i if i < 3 * n => &mut self.v[i - 2 * n],
            i => {
                let b = self.bias.as_mut().expect("index within params()");
                if i < 4 * n {
                    &mut b.hidden[i - 3 * n]
                } else {
                    &mut b.output
                }
            }
        }
    }

    pub fn predict(&self, pi: f64, gap: f64) -> f64 {
        forward(pi, gap, self).output
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Vec<f64> {
        dataset.rows().iter().map(|r| self.predict(r.inflation, r.output_gap)).collect()
    }
}

pub fn forward(pi: f64, gap: f64, net: &Network) -> Forward {
    let x = match &net.scaler {
        Some(s) => s.apply([pi, gap]),
        None => [pi, gap],
    };
    let n = net.hidden_nodes();
    let mut u: Vec<f64> = (0..n).map(|k| net.w[0][k] * x[0] + net.w[1][k] * x[1]).collect();
    if let Some(b) = &net.bias {
        for (uk, bk) in u.iter_mut().zip(&b.hidden) {
            *uk += bk;
        }
    }
    let z: Vec<f64> = u.iter().map(|&uk| sigmoid(uk)).collect();
    let mut output: f64 = net.v.iter().zip(&z).map(|(v, z)| v * z).sum();
    if let Some(b) = &net.bias {
        output += b.output;
    }
    Forward { output, state: HiddenState { u, z }, x }
}

/// `E = (target - output)^2 / 2`.
pub fn loss(net: &Network, sample: &Sample) -> f64 {
    let e = sample.target - net.predict(sample.pi, sample.gap);
    0.5 * e * e
}

/// `dE/dparam` for every entry of [`Network::params`], plus the error `e`.
pub fn gradient(net: &Network, sample: &Sample) -> (Vec<f64>, f64) {
    let fwd = forward(sample.pi, sample.gap, net);
    let e = sample.target - fwd.output;
    let n = net.hidden_nodes();
    let z = &fwd.state.z;
    // dE/du_n = -e * v_n * z_n (1 - z_n)
    let delta: Vec<f64> = (0..n).map(|k| -e * net.v[k] * z[k] * (1.0 - z[k])).collect();

    let mut grad = Vec::with_capacity(4 * n + 1);
    grad.extend(delta.iter().map(|d| d * fwd.x[0]));
    grad.extend(delta.iter().map(|d| d * fwd.x[1]));
    grad.extend(z.iter().map(|zk| -e * zk));
    if net.bias.is_some() {
        grad.extend(&delta);
        grad.push(-e);
    }
    (grad, e)
}

/// Applies one gradient-descent update in place and returns the pre-update
/// error `e = target - output`.
pub fn step_in_place(net: &mut Network, sample: &Sample, mu: f64) -> f64 {
    let fwd = forward(sample.pi, sample.gap, net);
    let e = sample.target - fwd.output;
    let z = &fwd.state.z;
    for k in 0..net.hidden_nodes() {
        // uses v_n before its own update
        let common = mu * e * net.v[k] * z[k] * (1.0 - z[k]);
        net.w[0][k] += common * fwd.x[0];
        net.w[1][k] += common * fwd.x[1];
        if let Some(b) = net.bias.as_mut() {
            b.hidden[k] += common;
        }
        net.v[k] += mu * e * z[k];
    }
    if let Some(b) = net.bias.as_mut() {
        b.output += mu * e;
    }
    e
}

/// One backpropagation update on a copy of `net`.
pub fn backprop_step(sample: &Sample, net: &Network, mu: f64) -> (Network, f64) {
    let mut next = net.clone();
    let e = step_in_place(&mut next, sample, mu);
    (next, e)
}

/// Worst relative disagreement between the analytic gradient and central
/// finite differences of the loss with step `h`.
///
/// Relative error is `|a - f| / max(|a|, |f|, 1)`, so components well below
/// one are compared in absolute terms.
pub fn gradient_check(net: &Network, sample: &Sample, h: f64) -> f64 {
    let (analytic, _) = gradient(net, sample);
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let original = *probe.param_mut(i);
        *probe.param_mut(i) = original + h;
        let up = loss(&probe, sample);
        *probe.param_mut(i) = original - h;
        let down = loss(&probe, sample);
        *probe.param_mut(i) = original;
        let numeric = (up - down) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
        worst = worst.max(rel);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputScaling {
    #[default]
    Raw,
    Standardize,
}

impl InputScaling {
    pub fn as_str(self) -> &'static str {
        match self {
            InputScaling::Raw => "raw",
            InputScaling::Standardize => "standardize",
        }
    }
}

impl FromStr for InputScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(InputScaling::Raw),
            "standardize" => Ok(InputScaling::Standardize),
            other => Err(Error::Domain(format!("unknown input scaling `{other}` (expected raw or standardize)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Gradient-descent step size.
    pub mu: f64,
    /// Converged once every in-sample |e| is below this (percent).
    pub epsilon: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub hidden_nodes: usize,
    pub input_scaling: InputScaling,
    pub biases: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mu: 0.001,
            epsilon: 1e-4,
            max_epochs: 10_000,
            seed: 1,
            hidden_nodes: 6,
            input_scaling: InputScaling::Raw,
            biases: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Domain(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_epochs == 0 {
            return Err(Error::Domain("max_epochs must be at least 1".into()));
        }
        if self.hidden_nodes == 0 {
            return Err(Error::Domain("hidden_nodes must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxEpochs,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    /// In-sample MSE after each epoch.
    pub mse_trace: Vec<f64>,
    /// Largest in-sample |e| after each epoch.
    pub max_abs_trace: Vec<f64>,
    pub final_mse: f64,
    pub mu: f64,
}

impl TrainReport {
    /// `epoch,mse,max_abs_error` rows, one per epoch.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,mse,max_abs_error\n");
        for (i, (mse, max_abs)) in self.mse_trace.iter().zip(&self.max_abs_trace).enumerate() {
            let _ = writeln!(out, "{},{mse},{max_abs}", i + 1);
        }
        out
    }
}

/// Seeded uniform initialization in `[-INIT_RANGE, INIT_RANGE]`.
pub fn init_network(config: &TrainConfig) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.hidden_nodes;
    let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE)).collect() };
    let w = [draw(n), draw(n)];
    let v = draw(n);
    let bias = config.biases.then(|| {
        let hidden = draw(n);
        let output = draw(1)[0];
        Bias { hidden, output }
    });
    Network { w, v, bias, scaler: None }
}

fn samples(dataset: &Dataset) -> Vec<Sample> {
    dataset.rows().iter().map(|r| Sample { pi: r.inflation, gap: r.output_gap, target: r.fedfunds }).collect()
}

fn in_sample_errors(net: &Network, samples: &[Sample]) -> (f64, f64) {
    let mut sq = 0.0;
    let mut max_abs: f64 = 0.0;
    for s in samples {
        let e = s.target - net.predict(s.pi, s.gap);
        sq += e * e;
        max_abs = max_abs.max(e.abs());
        if e.is_nan() {
            return (f64::NAN, f64::NAN);
        }
    }
    (sq / samples.len() as f64, max_abs)
}

/// Online gradient descent over the rows in chronological order.
///
/// Each epoch applies one update per row, then measures in-sample error with
/// the weights held fixed. Training stops once every |e| is below
/// `epsilon`, or after `max_epochs`.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Network, TrainReport)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    let samples = samples(dataset);
    let mut net = init_network(config);
    if config.input_scaling == InputScaling::Standardize {
        net.scaler = Some(Standardizer::fit(dataset));
    }

    let mut mse_trace = Vec::new();
    let mut max_abs_trace = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;
    for epoch in 1..=config.max_epochs {
        for s in &samples {
            let e = step_in_place(&mut net, s, config.mu);
            if !e.is_finite() {
                return Err(Error::Diverged { epoch, mu: config.mu });
            }
        }
        let (mse, max_abs) = in_sample_errors(&net, &samples);
        if !mse.is_finite() || !net.params().iter().all(|p| p.is_finite()) {
            return Err(Error::Diverged { epoch, mu: config.mu });
        }
        mse_trace.push(mse);
        max_abs_trace.push(max_abs);
        if max_abs < config.epsilon {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let report = TrainReport {
        epochs_run: mse_trace.len(),
        stop_reason,
        final_mse: *mse_trace.last().expect("at least one epoch"),
        mse_trace,
        max_abs_trace,
        mu: config.mu,
    };
    Ok((net, report))
}

/// Flat `key=value` weight dump with a config echo.
///
/// Weights are written with shortest round-trip formatting, so
/// [`parse_weight_dump`] restores them exactly.
pub fn weight_dump(net: &Network, config: &TrainConfig, report: &TrainReport) -> String {
    let mut out = String::from("# taylor network weights\n");
    let _ = writeln!(out, "hidden_nodes={}", net.hidden_nodes());
    let _ = writeln!(out, "biases={}", net.bias.is_some());
    let scaling = if net.scaler.is_some() { InputScaling::Standardize } else { InputScaling::Raw };
    let _ = writeln!(out, "input_scaling={}", scaling.as_str());
    let _ = writeln!(out, "mu={}", config.mu);
    let _ = writeln!(out, "epsilon={}", config.epsilon);
    let _ = writeln!(out, "max_epochs={}", config.max_epochs);
    let _ = writeln!(out, "seed={}", config.seed);
    let _ = writeln!(out, "epochs_run={}", report.epochs_run);
    let _ = writeln!(out, "stop_reason={}", report.stop_reason.as_str());
    let _ = writeln!(out, "final_mse={}", report.final_mse);
    if let Some(s) = &net.scaler {
        for j in 0..INPUTS {
            let _ = writeln!(out, "scale_mean[{j}]={}", s.mean[j]);
            let _ = writeln!(out, "scale_std[{j}]={}", s.std[j]);
        }
    }
    for (j, row) in net.w.iter().enumerate() {
        for (n, w) in row.iter().enumerate() {
            let _ = writeln!(out, "w[{j}][{n}]={w}");
        }
    }
    for (n, v) in net.v.iter().enumerate() {
        let _ = writeln!(out, "v[{n}]={v}");
    }
    if let Some(b) = &net.bias {
        for (n, bn) in b.hidden.iter().enumerate() {
            let _ = writeln!(out, "b[{n}]={bn}");
        }
        let _ = writeln!(out, "c={}", b.output);
    }
    out
}

/// Restores a network from [`weight_dump`] output. Config echo keys are ignored.
pub fn parse_weight_dump(text: &str) -> Result<Network> {
    const SOURCE: &str = "network";
    let mut entries = std::collections::HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(SOURCE, idx + 1, "expected key=value"))?;
        entries.insert(key.trim().to_string(), (idx + 1, value.trim().to_string()));
    }
    let get = |key: &str| -> Result<&(usize, String)> {
        entries.get(key).ok_or_else(|| Error::parse(SOURCE, 0, format!("missing key `{key}`")))
    };
    let num = |key: &str| -> Result<f64> {
        let (line, value) = get(key)?;
        value.parse::<f64>().map_err(|_| Error::parse(SOURCE, *line, format!("`{key}` is not a number")))
    };

    let (line, hidden) = get("hidden_nodes")?;
    let hidden: usize = hidden.parse().map_err(|_| Error::parse(SOURCE, *line, "hidden_nodes must be an integer"))?;
    let biases = match entries.get("biases") {
        Some((line, v)) => {
            v.parse::<bool>().map_err(|_| Error::parse(SOURCE, *line, "biases must be true or false"))?
        }
        None => false,
    };
    let scaling = match entries.get("input_scaling") {
        Some((line, v)) => v.parse::<InputScaling>().map_err(|e| Error::parse(SOURCE, *line, e.to_string()))?,
        None => InputScaling::Raw,
    };

    let mut w = [Vec::with_capacity(hidden), Vec::with_capacity(hidden)];
    for (j, row) in w.iter_mut().enumerate() {
        for n in 0..hidden {
            row.push(num(&format!("w[{j}][{n}]"))?);
        }
    }
    let v = (0..hidden).map(|n| num(&format!("v[{n}]"))).collect::<Result<Vec<_>>>()?;
    let bias = if biases {
        Some(Bias {
            hidden: (0..hidden).map(|n| num(&format!("b[{n}]"))).collect::<Result<Vec<_>>>()?,
            output: num("c")?,
        })
    } else {
        None
    };
    let scaler = match scaling {
        InputScaling::Raw => None,
        InputScaling::Standardize => Some(Standardizer {
            mean: [num("scale_mean[0]")?, num("scale_mean[1]")?],
            std: [num("scale_std[0]")?, num("scale_std[1]")?],
        }),
    };
    let net = Network { w, v, bias, scaler };
    net.validate()?;
    Ok(net)
}
