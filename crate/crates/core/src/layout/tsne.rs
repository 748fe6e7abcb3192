use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::exec::Execution;

use super::affinity::{pairwise_affinities_with, AffinityMatrix};
use super::LayoutError;

const KL_EPSILON: f64 = 1e-12;
const INIT_STD: f64 = 1e-4;
const DUPLICATE_JITTER: f64 = 1e-8;
const MIN_GAIN: f64 = 0.01;

/// Optimization settings. Defaults follow the common reference settings of
/// exact t-SNE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    /// Target perplexity; reduced to `(N - 1) / 3` (never below 1) for small inputs.
    pub perplexity: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    /// Number of leading iterations that use `early_exaggeration` and the
    /// initial momentum.
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
    pub sigma_tolerance: f64,
    pub sigma_max_bisections: usize,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: 15.0,
            learning_rate: 200.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            seed: 0,
            sigma_tolerance: 1e-5,
            sigma_max_bisections: super::DEFAULT_MAX_BISECTIONS,
        }
    }
}

impl TsneParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |m: String| Err(LayoutError::InvalidParams(m));
        if !(self.perplexity >= 1.0) {
            return bad(format!("perplexity {} < 1", self.perplexity));
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(self.sigma_tolerance > 0.0) {
            return bad("sigma tolerance must be positive".into());
        }
        Ok(())
    }

    /// Perplexity actually used for `n` points.
    pub fn effective_perplexity(&self, n: usize) -> f64 {
        let cap = n.saturating_sub(1) as f64 / 3.0;
        self.perplexity.min(cap).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutResult {
    pub coords: Vec<[f64; 2]>,
    /// KL divergence after each iteration's update.
    pub kl_trace: Vec<f64>,
    /// The parameters used, with the effective perplexity.
    pub params: TsneParams,
}

/// Student-t kernel values `1 / (1 + |y_i - y_j|^2)` (zero diagonal) and their sum.
fn student_kernel(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let n = y.len();
    let mut total = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            total += 2.0 * v;
        }
    }
    total
}

fn kl_with_kernel(p: &[f64], num: &[f64], total: f64) -> f64 {
    let mut kl = 0.0;
    for (pij, nij) in p.iter().zip(num) {
        if *pij > 0.0 {
            let q = nij / total;
            kl += pij * (pij.max(KL_EPSILON) / q.max(KL_EPSILON)).ln();
        }
    }
    kl.max(0.0)
}

/// KL(P || Q) where Q is the Student-t affinity of the 2-D layout `y`.
pub fn kl_divergence(p: &AffinityMatrix, y: &[[f64; 2]]) -> Result<f64, LayoutError> {
    let n = p.len();
    if y.len() != n {
        return Err(LayoutError::Shape(format!("{} coordinates for {n} points", y.len())));
    }
    let mut num = vec![0.0; n * n];
    let total = student_kernel(y, &mut num);
    Ok(kl_with_kernel(p.joint(), &num, total))
}

/// KL divergence between two discrete distributions over the same support,
/// with the same epsilon floors as [`kl_divergence`].
pub fn kl_between(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi.max(KL_EPSILON) / qi.max(KL_EPSILON)).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Adds seeded jitter to every point that exactly repeats an earlier one.
fn jitter_duplicates<P: AsRef<[f64]>>(points: &[P], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a09_e667_f3bc_c908);
    let noise = Normal::new(0.0, DUPLICATE_JITTER).expect("valid std");
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let p = p.as_ref();
        let mut v = p.to_vec();
        if out.iter().any(|q| q.as_slice() == p) {
            for x in &mut v {
                *x += noise.sample(&mut rng);
            }
        }
        out.push(v);
    }
    out
}

/// Exact t-SNE into two dimensions.
pub fn tsne<P: AsRef<[f64]> + Sync>(points: &[P], params: &TsneParams) -> Result<LayoutResult, LayoutError> {
    tsne_with(points, params, Execution::default())
}

/// [`tsne`] with an explicit strategy for the affinity stage. The gradient
/// loop always runs on one thread so results are bit-identical across
/// strategies.
pub fn tsne_with<P: AsRef<[f64]> + Sync>(
    points: &[P],
    params: &TsneParams,
    exec: Execution,
) -> Result<LayoutResult, LayoutError> {
    params.validate()?;
    let n = points.len();
    if n < 3 {
        return Err(LayoutError::TooFewPoints(n));
    }
    let mut used = *params;
    used.perplexity = params.effective_perplexity(n);

    let jittered = jitter_duplicates(points, params.seed);
    let affinities =
        pairwise_affinities_with(&jittered, used.perplexity, used.sigma_tolerance, used.sigma_max_bisections, exec)?;
    let p = affinities.joint();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = Normal::new(0.0, INIT_STD).expect("valid std");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut grad = vec![[0.0f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut kl_trace = Vec::with_capacity(used.iterations);

    for iter in 0..used.iterations {
        let early = iter < used.exaggeration_iterations;
        let exaggeration = if early { used.early_exaggeration } else { 1.0 };
        let momentum = if early { used.initial_momentum } else { used.final_momentum };

        let total = student_kernel(&y, &mut num);
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = i * n + j;
                let mult = (exaggeration * p[k] - num[k] / total) * num[k];
                g[0] += mult * (y[i][0] - y[j][0]);
                g[1] += mult * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * g[0], 4.0 * g[1]];
        }

        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (velocity[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                if gains[i][d] < MIN_GAIN {
                    gains[i][d] = MIN_GAIN;
                }
                velocity[i][d] = momentum * velocity[i][d] - used.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        }
        let mean = y.iter().fold([0.0; 2], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        for v in &mut y {
            v[0] -= mean[0] / n as f64;
            v[1] -= mean[1] / n as f64;
        }

        let total = student_kernel(&y, &mut num);
        kl_trace.push(kl_with_kernel(p, &num, total));
    }

    if y.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return Err(LayoutError::Diverged);
    }
    Ok(LayoutResult { coords: y, kl_trace, params: used })
}
