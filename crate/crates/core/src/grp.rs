//! Generator / Responsibility-Predictor stack.
//!
//! Each layer pairs a Generator network `G^k` with a Responsibility
//! Predictor whose sigmoid output `π^k` weights it. During training the
//! reference responsibilities are a softmax of `−γ·|r_G − G^k|` over layers;
//! they gate each Generator's learning rate and serve as the Predictor's
//! target. `γ` grows geometrically after every episode, so the split between
//! layers sharpens as training proceeds.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mulnet::{evaluate, gradient_from, sigmoid_head, NetworkInput, WeightMatrix};

/// How a raw gradient step is scaled before it is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `Δ = rate · (e · ∇ − λ · W)`
    #[default]
    Plain,
    /// Plain step divided by `1 + ‖∇‖²` (normalised LMS).
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrpConfig {
    /// Number of layers.
    pub m: usize,
    /// Base learning rate.
    pub mu: f64,
    /// L2 coefficient.
    pub lambda: f64,
    pub gamma0: f64,
    /// Per-episode growth of γ, strictly greater than one.
    pub beta: f64,
    pub w_gain: f64,
    /// Half-width of the uniform weight initialisation.
    pub init_scale: f64,
    pub seed: u64,
    /// Multiplier on the rate of off-diagonal (exponent) weights.
    pub gate_scale: f64,
    /// Base rate of the responsibility predictors.
    pub mu_rp: f64,
    /// Off-diagonal rate multiplier for the predictors.
    pub gate_scale_rp: f64,
    #[serde(default)]
    pub step_rule: StepRule,
}

impl Default for GrpConfig {
    fn default() -> Self {
        Self {
            m: 1,
            mu: 1e-4,
            lambda: 1e-3,
            gamma0: 1.0,
            beta: 1.05,
            w_gain: 1.0,
            init_scale: 0.1,
            seed: 0,
            gate_scale: 3e-5,
            mu_rp: 1e-2,
            gate_scale_rp: 3e-2,
            step_rule: StepRule::default(),
        }
    }
}

impl GrpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::config("m", "need at least one layer"));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::config("mu", "must be strictly positive"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("lambda", "must be non-negative"));
        }
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return Err(Error::config("gamma0", "must be strictly positive"));
        }
        if !(self.beta.is_finite() && self.beta > 1.0) {
            return Err(Error::config("beta", "must be greater than one"));
        }
        if !(self.mu_rp.is_finite() && self.mu_rp > 0.0) {
            return Err(Error::config("mu_rp", "must be strictly positive"));
        }
        for (key, v) in [
            ("gate_scale", self.gate_scale),
            ("gate_scale_rp", self.gate_scale_rp),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(key, "must be finite and non-negative"));
            }
        }
        if !self.w_gain.is_finite() {
            return Err(Error::config("w_gain", "must be finite"));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(Error::config(
                "init_scale",
                "must be strictly positive so layers start distinct",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrpLayer {
    /// Generator weights.
    pub w: WeightMatrix,
    /// Responsibility-predictor weights.
    pub r: WeightMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrpModel {
    pub layers: Vec<GrpLayer>,
    pub gamma: f64,
    pub config: GrpConfig,
    pub episode_count: u64,
}

/// Per-layer values from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub g: Vec<f64>,
    pub pi: Vec<f64>,
    pub tau_out: f64,
}

/// Everything computed during one online update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub g: Vec<f64>,
    pub pi: Vec<f64>,
    pub e_g: Vec<f64>,
    pub r_rp: Vec<f64>,
    pub e_rp: Vec<f64>,
    pub tau_out: f64,
    pub r_g: f64,
    /// Exponent clamps hit across all networks during this step.
    pub clamped: u32,
}

impl StepRule {
    /// Factor applied to the base rate; `chain` is the scalar derivative
    /// between the network output and the trained quantity.
    fn scale(self, grad: &WeightMatrix, chain: f64) -> f64 {
        match self {
            StepRule::Plain => 1.0,
            StepRule::Normalized => {
                let sq: f64 = grad.iter().map(|g| g * g).sum();
                1.0 / (1.0 + chain * chain * sq)
            }
        }
    }
}

/// Softmax of `−γ·|e_G|`, shifted by the smallest error for stability.
pub fn responsibility_reference(errors: &[f64], gamma: f64) -> Vec<f64> {
    let min = errors.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    let weights: Vec<f64> = errors
        .iter()
        .map(|e| {
            let gap = e.abs() - min;
            // an infinite gamma must still give the winners weight one
            if gap == 0.0 {
                1.0
            } else {
                (-gamma * gap).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

impl GrpModel {
    /// Fresh model with i.i.d. uniform weights; layer `k` draws from its own
    /// ChaCha stream so layers never coincide.
    pub fn init(config: GrpConfig) -> Result<Self> {
        config.validate()?;
        let dist = Uniform::new_inclusive(-config.init_scale, config.init_scale);
        let layers = (0..config.m)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(k as u64 + 1);
                let mut draw = || {
                    let mut m = WeightMatrix::zeros();
                    for row in m.0.iter_mut() {
                        for v in row.iter_mut() {
                            *v = dist.sample(&mut rng);
                        }
                    }
                    m
                };
                let w = draw();
                let r = draw();
                GrpLayer { w, r }
            })
            .collect();
        Ok(Self {
            layers,
            gamma: config.gamma0,
            config,
            episode_count: 0,
        })
    }

    pub fn m(&self) -> usize {
        self.layers.len()
    }

    pub fn forward(&self, x: &NetworkInput) -> Forward {
        let mut g = Vec::with_capacity(self.m());
        let mut pi = Vec::with_capacity(self.m());
        for layer in &self.layers {
            g.push(evaluate(&layer.w, x).value);
            pi.push(sigmoid_head(
                evaluate(&layer.r, x).value,
                self.config.w_gain,
            ));
        }
        let tau_out = g.iter().zip(&pi).map(|(g, p)| g * p).sum();
        Forward { g, pi, tau_out }
    }

    /// Combined output with reference signals substituted in; equals `r_g`.
    pub fn total_output_identity(&self, x: &NetworkInput, r_g: f64) -> f64 {
        let fwd = self.forward(x);
        let e_g: Vec<f64> = fwd.g.iter().map(|g| r_g - g).collect();
        let r_rp = responsibility_reference(&e_g, self.gamma);
        fwd.g
            .iter()
            .zip(&fwd.pi)
            .zip(e_g.iter().zip(&r_rp))
            .map(|((g, pi), (e, r))| (g + e) * (pi + (r - pi)))
            .sum()
    }

    pub fn learn_step(&mut self, x: &NetworkInput, r_g: f64) -> Result<StepRecord> {
        let cfg = self.config;
        let m = self.m();
        let mut g_evals = Vec::with_capacity(m);
        let mut b_evals = Vec::with_capacity(m);
        for layer in &self.layers {
            g_evals.push(evaluate(&layer.w, x));
            b_evals.push(evaluate(&layer.r, x));
        }
        let g: Vec<f64> = g_evals.iter().map(|e| e.value).collect();
        let pi: Vec<f64> = b_evals
            .iter()
            .map(|e| sigmoid_head(e.value, cfg.w_gain))
            .collect();
        let e_g: Vec<f64> = g.iter().map(|g| r_g - g).collect();
        let r_rp = responsibility_reference(&e_g, self.gamma);
        let e_rp: Vec<f64> = r_rp.iter().zip(&pi).map(|(r, p)| r - p).collect();
        let tau_out = g.iter().zip(&pi).map(|(g, p)| g * p).sum();
        let mut clamped = 0;

        for (k, layer) in self.layers.iter_mut().enumerate() {
            clamped += g_evals[k].clamp_count() + b_evals[k].clamp_count();

            let mu_k = r_rp[k] * cfg.mu;
            if mu_k != 0.0 {
                let mut grad = gradient_from(&g_evals[k], x);
                grad.scale_off_diagonal(cfg.gate_scale);
                let rate = mu_k * cfg.step_rule.scale(&grad, 1.0);
                let old = layer.w;
                layer.w.add_scaled(&grad, rate * e_g[k]);
                layer.w.add_scaled(&old, -rate * cfg.lambda);
            }

            let slope = cfg.w_gain * pi[k] * (1.0 - pi[k]);
            let mut grad = gradient_from(&b_evals[k], x);
            grad.scale_off_diagonal(cfg.gate_scale_rp);
            let rate = cfg.mu_rp * cfg.step_rule.scale(&grad, slope);
            let old = layer.r;
            layer.r.add_scaled(&grad, rate * e_rp[k] * slope);
            layer.r.add_scaled(&old, -rate * cfg.lambda);

            if !(layer.w.is_finite() && layer.r.is_finite()) {
                return Err(Error::Divergence(format!(
                    "layer {} produced non-finite weights (episode {}, r_G = {r_g}, G = {:?}, pi = {:?}, x = {:?})",
                    k + 1,
                    self.episode_count,
                    g,
                    pi,
                    x.0
                )));
            }
        }

        Ok(StepRecord {
            g,
            pi,
            e_g,
            r_rp,
            e_rp,
            tau_out,
            r_g,
            clamped,
        })
    }

    pub fn end_episode(&mut self) {
        self.gamma = (self.gamma * self.config.beta).min(f64::MAX);
        self.episode_count += 1;
    }
}
