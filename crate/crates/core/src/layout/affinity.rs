use crate::exec::Execution;

use super::LayoutError;

/// Symmetrized joint probabilities of a point set plus the per-point
/// Gaussian bandwidths that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    p: Vec<f64>,
    sigmas: Vec<f64>,
    perplexities: Vec<f64>,
}

impl AffinityMatrix {
    /// Wraps a joint distribution given row-major. The matrix must be square,
    /// symmetric, non-negative with zero diagonal and sum to one.
    pub fn from_joint(n: usize, p: Vec<f64>) -> Result<Self, LayoutError> {
        if p.len() != n * n {
            return Err(LayoutError::Shape(format!("{} entries for {n} points", p.len())));
        }
        let total: f64 = p.iter().sum();
        for i in 0..n {
            if p[i * n + i] != 0.0 {
                return Err(LayoutError::Shape(format!("non-zero diagonal at {i}")));
            }
            for j in 0..n {
                let v = p[i * n + j];
                if !(v >= 0.0) || (v - p[j * n + i]).abs() > 1e-12 {
                    return Err(LayoutError::Shape(format!("entry ({i}, {j}) is negative or asymmetric")));
                }
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(LayoutError::Shape(format!("entries sum to {total}")));
        }
        Ok(AffinityMatrix { n, p, sigmas: vec![f64::NAN; n], perplexities: vec![f64::NAN; n] })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    /// Row-major joint probabilities.
    pub fn joint(&self) -> &[f64] {
        &self.p
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Perplexity actually reached by each conditional row.
    pub fn achieved_perplexities(&self) -> &[f64] {
        &self.perplexities
    }
}

pub(crate) fn squared_distances<P: AsRef<[f64]> + Sync>(points: &[P], exec: Execution) -> Vec<f64> {
    let n = points.len();
    let rows = exec.map_range(n, |i| {
        let a = points[i].as_ref();
        (0..n)
            .map(|j| {
                let b = points[j].as_ref();
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
            })
            .collect::<Vec<_>>()
    });
    rows.concat()
}

/// Outcome of calibrating one conditional row.
#[derive(Debug, Clone)]
pub(crate) struct RowCalibration {
    pub conditional: Vec<f64>,
    pub beta: f64,
    pub perplexity: f64,
}

/// Entropy (nats) and normalized weights of `exp(-beta * s_j)`, where the
/// shifted distances `s_j` are all non-negative.
fn row_entropy(shifted: &[f64], beta: f64, weights: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (w, s) in weights.iter_mut().zip(shifted) {
        *w = (-beta * s).exp();
        sum += *w;
        weighted += s * *w;
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
    sum.ln() + beta * weighted / sum
}

/// Finds the precision `beta = 1 / (2 sigma^2)` of row `row` whose
/// conditional distribution has perplexity `target` (within `tolerance` on
/// the natural-log entropy), bisecting at most `max_steps` times.
pub(crate) fn calibrate_row(
    dist_row: &[f64],
    row: usize,
    target: f64,
    tolerance: f64,
    max_steps: usize,
) -> Result<RowCalibration, LayoutError> {
    let n = dist_row.len();
    let others: Vec<f64> = (0..n).filter(|&j| j != row).map(|j| dist_row[j]).collect();
    let min = others.iter().copied().fold(f64::INFINITY, f64::min);
    let max = others.iter().copied().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Err(LayoutError::DegenerateDistances { row });
    }
    // rounding-level differences count as ties
    let shifted: Vec<f64> = others.iter().map(|d| if d - min <= max * 1e-12 { 0.0 } else { d - min }).collect();
    let mean_shift = shifted.iter().sum::<f64>() / shifted.len() as f64;
    let log_target = target.ln();

    let mut weights = vec![0.0; shifted.len()];
    let mut beta = if mean_shift > 0.0 { 1.0 / mean_shift } else { 1.0 / max };
    let mut entropy = row_entropy(&shifted, beta, &mut weights);
    if mean_shift > 0.0 {
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for _ in 0..max_steps {
            let diff = entropy - log_target;
            if diff.abs() < tolerance {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            entropy = row_entropy(&shifted, beta, &mut weights);
        }
    }

    let mut conditional = Vec::with_capacity(n);
    let mut it = weights.into_iter();
    for j in 0..n {
        conditional.push(if j == row { 0.0 } else { it.next().unwrap_or(0.0) });
    }
    Ok(RowCalibration { conditional, beta, perplexity: entropy.exp() })
}

/// Gaussian input affinities of `points`.
///
/// Each row's bandwidth is bisected until its conditional distribution
/// reaches `perplexity`; the target is capped at `N - 1`, the largest value a
/// row over `N - 1` neighbours can reach. Rows are then symmetrized as
/// `p_ij = (p_j|i + p_i|j) / 2N`.
pub fn pairwise_affinities<P: AsRef<[f64]> + Sync>(
    points: &[P],
    perplexity: f64,
    tolerance: f64,
) -> Result<AffinityMatrix, LayoutError> {
    pairwise_affinities_with(points, perplexity, tolerance, super::DEFAULT_MAX_BISECTIONS, Execution::default())
}

pub fn pairwise_affinities_with<P: AsRef<[f64]> + Sync>(
    points: &[P],
    perplexity: f64,
    tolerance: f64,
    max_bisections: usize,
    exec: Execution,
) -> Result<AffinityMatrix, LayoutError> {
    let n = points.len();
    if n < 3 {
        return Err(LayoutError::TooFewPoints(n));
    }
    if !(perplexity >= 1.0) {
        return Err(LayoutError::InvalidParams(format!("perplexity {perplexity} < 1")));
    }
    let target = perplexity.min((n - 1) as f64);
    let dist = squared_distances(points, exec);
    let rows = exec
        .map_range(n, |i| calibrate_row(&dist[i * n..(i + 1) * n], i, target, tolerance, max_bisections))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let mut p = vec![0.0; n * n];
    let scale = 2.0 * n as f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (rows[i].conditional[j] + rows[j].conditional[i]) / scale;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    let sigmas = rows.iter().map(|r| (1.0 / (2.0 * r.beta)).sqrt()).collect();
    let perplexities = rows.iter().map(|r| r.perplexity).collect();
    Ok(AffinityMatrix { n, p, sigmas, perplexities })
}
