//! Multiplicative network.
//!
//! Every input neuron `i` contributes `W_ii · x_i`, gated by every other
//! active input through a factor `exp(W_ij · x_j)`. A silent input
//! (`x_j = 0`) leaves the other neurons untouched. Signed sensory values are
//! split into non-negative halves before they reach the network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Number of network inputs after splitting.
pub const N_INPUTS: usize = 8;

/// Exponent arguments are clamped to `[-EXP_CLAMP, EXP_CLAMP]`.
pub const EXP_CLAMP: f64 = 50.0;

/// `[(alpha − alpha_tgt), phi_h, phi_h_dot, phi_k, phi_k_dot]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensoryInput {
    pub alpha_err: f64,
    pub phi_h: f64,
    pub phi_h_dot: f64,
    pub phi_k: f64,
    pub phi_k_dot: f64,
}

/// Non-negative network input:
/// `[err⁺, err⁻, phi_h, phi_h_dot⁺, phi_h_dot⁻, phi_k, phi_k_dot⁺, phi_k_dot⁻]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkInput(pub [f64; N_INPUTS]);

impl NetworkInput {
    pub fn as_array(&self) -> &[f64; N_INPUTS] {
        &self.0
    }
}

#[inline]
fn pos(v: f64) -> f64 {
    v.max(0.0)
}

#[inline]
fn neg(v: f64) -> f64 {
    (-v).max(0.0)
}

pub fn split_input(raw: &SensoryInput) -> NetworkInput {
    NetworkInput([
        pos(raw.alpha_err),
        neg(raw.alpha_err),
        raw.phi_h,
        pos(raw.phi_h_dot),
        neg(raw.phi_h_dot),
        raw.phi_k,
        pos(raw.phi_k_dot),
        neg(raw.phi_k_dot),
    ])
}

/// Dense 8×8 weight matrix, row `i` belongs to target neuron `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightMatrix(pub [[f64; N_INPUTS]; N_INPUTS]);

impl Default for WeightMatrix {
    fn default() -> Self {
        Self::zeros()
    }
}

impl WeightMatrix {
    pub fn zeros() -> Self {
        WeightMatrix([[0.0; N_INPUTS]; N_INPUTS])
    }

    pub fn diagonal(d: [f64; N_INPUTS]) -> Self {
        let mut w = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            w.0[i][i] = v;
        }
        w
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[i][j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flatten().copied()
    }

    /// `self ← self + scale · other`
    pub fn scale_off_diagonal(&mut self, factor: f64) {
        for (i, row) in self.0.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i != j {
                    *v *= factor;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &WeightMatrix, scale: f64) {
        for (row, orow) in self.0.iter_mut().zip(other.0.iter()) {
            for (v, o) in row.iter_mut().zip(orow.iter()) {
                *v += scale * o;
            }
        }
    }
}

/// Forward pass with the per-neuron terms kept for the gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetEval {
    pub value: f64,
    /// `W_ii · x_i · Π exp(W_ij · x_j)` for each neuron.
    pub terms: [f64; N_INPUTS],
    /// `Π_{j≠i} exp(W_ij · x_j)` for each neuron.
    pub gates: [f64; N_INPUTS],
    /// Bit `i·8 + j` is set when the exponent argument for `(i, j)` was clamped.
    pub clamped: u64,
}

impl NetEval {
    pub fn clamp_count(&self) -> u32 {
        self.clamped.count_ones()
    }
}

pub fn evaluate(w: &WeightMatrix, x: &NetworkInput) -> NetEval {
    let x = x.as_array();
    let mut terms = [0.0; N_INPUTS];
    let mut gates = [0.0; N_INPUTS];
    let mut clamped = 0u64;
    for i in 0..N_INPUTS {
        let mut exponent = 0.0;
        for j in 0..N_INPUTS {
            if j == i {
                continue;
            }
            let arg = w.0[i][j] * x[j];
            if arg.abs() > EXP_CLAMP {
                clamped |= 1 << (i * N_INPUTS + j);
                exponent += arg.clamp(-EXP_CLAMP, EXP_CLAMP);
            } else {
                exponent += arg;
            }
        }
        gates[i] = exponent.exp();
        terms[i] = w.0[i][i] * x[i] * gates[i];
    }
    NetEval {
        value: terms.iter().sum(),
        terms,
        gates,
        clamped,
    }
}

pub fn net_forward(w: &WeightMatrix, x: &NetworkInput) -> f64 {
    evaluate(w, x).value
}

/// Logistic head, held strictly inside (0, 1) where it saturates.
pub fn sigmoid_head(b: f64, w_gain: f64) -> f64 {
    let s = 1.0 / (1.0 + (-w_gain * b).exp());
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Exact partials of the network output with respect to every weight,
/// reusing a forward evaluation. Clamped exponents have zero slope.
pub fn gradient_from(eval: &NetEval, x: &NetworkInput) -> WeightMatrix {
    let x = x.as_array();
    let mut grad = WeightMatrix::zeros();
    for i in 0..N_INPUTS {
        for j in 0..N_INPUTS {
            grad.0[i][j] = if i == j {
                x[i] * eval.gates[i]
            } else if eval.clamped & (1 << (i * N_INPUTS + j)) != 0 {
                0.0
            } else {
                eval.terms[i] * x[j]
            };
        }
    }
    grad
}

pub fn net_gradient(w: &WeightMatrix, x: &NetworkInput) -> WeightMatrix {
    gradient_from(&evaluate(w, x), x)
}

/// Largest entry-wise relative error between `net_gradient` and central
/// differences of `net_forward` with step `h`.
///
/// Relative error is `|analytic − numeric| / max(|analytic|, |numeric|, 1)`.
pub fn finite_difference_check(w: &WeightMatrix, x: &NetworkInput, h: f64) -> f64 {
    assert!(h > 0.0, "finite-difference step must be positive");
    let analytic = net_gradient(w, x);
    let mut worst = 0.0f64;
    for i in 0..N_INPUTS {
        for j in 0..N_INPUTS {
            let mut plus = *w;
            let mut minus = *w;
            plus.0[i][j] += h;
            minus.0[i][j] -= h;
            let numeric = (net_forward(&plus, x) - net_forward(&minus, x)) / (2.0 * h);
            let a = analytic.0[i][j];
            let scale = a.abs().max(numeric.abs()).max(1.0);
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    worst
}

/// Weights uniform in ±0.5 and inputs uniform in [0, 2).
pub fn random_instance<R: Rng>(rng: &mut R) -> (WeightMatrix, NetworkInput) {
    let mut w = WeightMatrix::zeros();
    for row in w.0.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    let mut x = [0.0; N_INPUTS];
    for v in x.iter_mut() {
        *v = rng.gen_range(0.0..2.0);
    }
    (w, NetworkInput(x))
}

/// Largest [`finite_difference_check`] error over `n` seeded random
/// instances.
pub fn gradient_check_suite(n: usize, seed: u64, h: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (w, x) = random_instance(&mut rng);
            finite_difference_check(&w, &x, h)
        })
        .fold(0.0, f64::max)
}
