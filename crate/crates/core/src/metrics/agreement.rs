use super::MetricsError;

/// Subjects (rows) rated by every rater (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    subjects: usize,
    raters: usize,
    values: Vec<f64>,
}

impl RatingsMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MetricsError> {
        let subjects = rows.len();
        let raters = rows.first().map_or(0, Vec::len);
        if subjects < 2 || raters < 2 {
            return Err(MetricsError::MatrixShape(format!("{subjects} subjects x {raters} raters, need at least 2 x 2")));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != raters) {
            return Err(MetricsError::MatrixShape(format!("row {i} has {} ratings, expected {raters}", rows[i].len())));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::MatrixShape("non-finite rating".into()));
        }
        Ok(RatingsMatrix { subjects, raters, values })
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn get(&self, subject: usize, rater: usize) -> f64 {
        self.values[subject * self.raters + rater]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaSummary {
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    pub df_rows: usize,
    pub df_cols: usize,
    pub df_error: usize,
}

/// Mean that is exact when every value is equal.
fn mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let first = it.next().unwrap_or(0.0);
    if it.all(|v| v == first) {
        return first;
    }
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Two-way ANOVA mean squares without replication.
pub fn anova(m: &RatingsMatrix) -> AnovaSummary {
    let (n, k) = (m.subjects, m.raters);
    let row_means: Vec<f64> = (0..n).map(|i| mean((0..k).map(|j| m.get(i, j)))).collect();
    let col_means: Vec<f64> = (0..k).map(|j| mean((0..n).map(|i| m.get(i, j)))).collect();
    let grand = mean(col_means.iter().copied());

    let ss_rows = k as f64 * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ss_cols = n as f64 * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let mut ss_error = 0.0;
    for i in 0..n {
        for j in 0..k {
            let resid = m.get(i, j) - row_means[i] - col_means[j] + grand;
            ss_error += resid * resid;
        }
    }
    let df_rows = n - 1;
    let df_cols = k - 1;
    let df_error = df_rows * df_cols;
    AnovaSummary {
        ms_rows: ss_rows / df_rows as f64,
        ms_cols: ss_cols / df_cols as f64,
        ms_error: ss_error / df_error as f64,
        df_rows,
        df_cols,
        df_error,
    }
}

/// ICC(2,1): two-way random effects, absolute agreement, single rater.
pub fn icc(m: &RatingsMatrix) -> Result<f64, MetricsError> {
    let first = m.values[0];
    if m.values.iter().all(|v| *v == first) {
        return Err(MetricsError::DegenerateMatrix);
    }
    let a = anova(m);
    let (n, k) = (m.subjects as f64, m.raters as f64);
    let denom = a.ms_rows + (k - 1.0) * a.ms_error + k * (a.ms_cols - a.ms_error) / n;
    if denom <= 0.0 {
        return Err(MetricsError::DegenerateMatrix);
    }
    Ok((a.ms_rows - a.ms_error) / denom)
}

/// One rater's verdict on one generated item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub rater: String,
    pub agree: bool,
}

impl Annotation {
    pub fn new(rater: impl Into<String>, agree: bool) -> Self {
        Annotation { rater: rater.into(), agree }
    }
}

/// Percentage of items a strict majority of their raters accepted. Ties
/// count as not correct.
pub fn correctness_rate(items: &[Vec<Annotation>]) -> Result<f64, MetricsError> {
    if items.is_empty() {
        return Err(MetricsError::NoItems);
    }
    let mut correct = 0usize;
    for (i, annotations) in items.iter().enumerate() {
        if annotations.is_empty() {
            return Err(MetricsError::UnannotatedItem(i));
        }
        let agree = annotations.iter().filter(|a| a.agree).count();
        if 2 * agree > annotations.len() {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / items.len() as f64)
}
