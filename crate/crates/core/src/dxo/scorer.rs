use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Linear,
    Mlp1,
}

impl std::str::FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ScorerKind::Linear),
            "mlp1" | "mlp" => Ok(ScorerKind::Mlp1),
            other => Err(Error::Config(format!("unknown scorer kind `{other}`"))),
        }
    }
}

/// Real-valued scoring function with a flat parameter vector.
///
/// Parameter layout:
/// - linear: `[w₀ … w_{d−1}, b]`, `h(x) = w·x + b`
/// - mlp1: `[W (h×d, row-major), b (h), v (h), c]`, `h(x) = v·tanh(Wx + b) + c`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScorer")]
pub struct Scorer {
    kind: ScorerKind,
    dim: usize,
    #[serde(skip_serializing_if = "is_zero")]
    hidden: usize,
    params: Vec<f64>,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Deserialize)]
struct RawScorer {
    kind: ScorerKind,
    dim: usize,
    #[serde(default)]
    hidden: usize,
    params: Vec<f64>,
}

impl TryFrom<RawScorer> for Scorer {
    type Error = Error;

    fn try_from(raw: RawScorer) -> Result<Self> {
        Scorer::from_params(raw.kind, raw.dim, raw.hidden, raw.params)
    }
}

fn param_count(kind: ScorerKind, dim: usize, hidden: usize) -> usize {
    match kind {
        ScorerKind::Linear => dim + 1,
        ScorerKind::Mlp1 => hidden * dim + 2 * hidden + 1,
    }
}

impl Scorer {
    pub fn from_params(kind: ScorerKind, dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("scorer dimension must be positive".into()));
        }
        let hidden = if kind == ScorerKind::Linear { 0 } else { hidden };
        if kind == ScorerKind::Mlp1 && hidden == 0 {
            return Err(Error::Config("mlp1 scorer needs at least one hidden unit".into()));
        }
        let expected = param_count(kind, dim, hidden);
        if params.len() != expected {
            return Err(Error::Config(format!(
                "{kind:?} scorer with dim={dim}, hidden={hidden} needs {expected} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("scorer parameters must be finite".into()));
        }
        Ok(Scorer { kind, dim, hidden, params })
    }

    pub fn linear(weights: Vec<f64>, bias: f64) -> Result<Self> {
        let dim = weights.len();
        let mut params = weights;
        params.push(bias);
        Self::from_params(ScorerKind::Linear, dim, 0, params)
    }

    /// Linear scorer with all weights and the bias at zero.
    pub fn zero_linear(dim: usize) -> Self {
        Scorer {
            kind: ScorerKind::Linear,
            dim,
            hidden: 0,
            params: vec![0.0; dim + 1],
        }
    }

    /// One-hidden-layer tanh network. Hidden weights are drawn from
    /// `U(−1/√d, 1/√d)` and output weights from `U(−1/√h, 1/√h)`; biases start at zero.
    pub fn mlp1(dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_bound = 1.0 / (dim as f64).sqrt();
        let out_bound = 1.0 / (hidden as f64).sqrt();
        let mut params = Vec::with_capacity(param_count(ScorerKind::Mlp1, dim, hidden));
        params.extend((0..hidden * dim).map(|_| rng.gen_range(-in_bound..in_bound)));
        params.extend(std::iter::repeat_n(0.0, hidden));
        params.extend((0..hidden).map(|_| rng.gen_range(-out_bound..out_bound)));
        params.push(0.0);
        Scorer {
            kind: ScorerKind::Mlp1,
            dim,
            hidden,
            params,
        }
    }

    /// Default initialization for `kind`.
    pub fn init(kind: ScorerKind, dim: usize, hidden: usize, seed: u64) -> Self {
        match kind {
            ScorerKind::Linear => Self::zero_linear(dim),
            ScorerKind::Mlp1 => Self::mlp1(dim, hidden, seed),
        }
    }

    pub fn kind(&self) -> ScorerKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.kind {
            ScorerKind::Linear => {
                let (w, b) = self.params.split_at(self.dim);
                dot(w, x) + b[0]
            }
            ScorerKind::Mlp1 => {
                let (d, h) = (self.dim, self.hidden);
                let (w, rest) = self.params.split_at(h * d);
                let (b, rest) = rest.split_at(h);
                let (v, c) = rest.split_at(h);
                let mut out = c[0];
                for k in 0..h {
                    out += v[k] * (dot(&w[k * d..(k + 1) * d], x) + b[k]).tanh();
                }
                out
            }
        }
    }

    /// `grad += coef · ∂h(x)/∂θ`.
    pub fn accumulate_grad(&self, x: &[f64], coef: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        if coef == 0.0 {
            return;
        }
        match self.kind {
            ScorerKind::Linear => {
                for (g, xi) in grad.iter_mut().zip(x) {
                    *g += coef * xi;
                }
                grad[self.dim] += coef;
            }
            ScorerKind::Mlp1 => {
                let (d, h) = (self.dim, self.hidden);
                let (w, rest) = self.params.split_at(h * d);
                let (b, rest) = rest.split_at(h);
                let v = &rest[..h];
                let (gw, grest) = grad.split_at_mut(h * d);
                let (gb, grest) = grest.split_at_mut(h);
                let (gv, gc) = grest.split_at_mut(h);
                for k in 0..h {
                    let a = (dot(&w[k * d..(k + 1) * d], x) + b[k]).tanh();
                    let back = coef * v[k] * (1.0 - a * a);
                    for (g, xi) in gw[k * d..(k + 1) * d].iter_mut().zip(x) {
                        *g += back * xi;
                    }
                    gb[k] += back;
                    gv[k] += coef * a;
                }
                gc[0] += coef;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
