use atlas_forge_core::metrics::{correctness_rate, icc, sus_score, Annotation, MetricsError, RatingsMatrix, SusResponse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ICC(2,1) from explicit sums of squares: total = rows + cols + error.
fn icc_oracle(x: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let k = x[0].len();
    let cells = (n * k) as f64;
    let grand: f64 = x.iter().flatten().sum::<f64>() / cells;
    let ss_total: f64 = x.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_rows: f64 = x.iter().map(|r| k as f64 * (r.iter().sum::<f64>() / k as f64 - grand).powi(2)).sum();
    let ss_cols: f64 = (0..k)
        .map(|j| {
            let m = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            n as f64 * (m - grand).powi(2)
        })
        .sum();
    let ss_err = ss_total - ss_rows - ss_cols;
    let msr = ss_rows / (n - 1) as f64;
    let msc = ss_cols / (k - 1) as f64;
    let mse = ss_err / ((n - 1) * (k - 1)) as f64;
    (msr - mse) / (msr + (k as f64 - 1.0) * mse + k as f64 * (msc - mse) / n as f64)
}

#[test]
fn icc_matches_oracle_on_seeded_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let n = rng.random_range(2..=30);
        let k = rng.random_range(2..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(1..=7) as f64).collect()).collect();
        let m = RatingsMatrix::new(rows.clone()).unwrap();
        match icc(&m) {
            Ok(v) => {
                let o = icc_oracle(&rows);
                assert!((v - o).abs() < 1e-9, "case {case}: {v} vs {o}");
            }
            Err(MetricsError::DegenerateMatrix) => {}
            Err(e) => panic!("case {case}: {e}"),
        }
    }
}

#[test]
fn icc_reference_value() {
    // 6 subjects x 4 judges; value from numpy mean squares
    let rows = vec![
        vec![9.0, 2.0, 5.0, 8.0],
        vec![6.0, 1.0, 3.0, 2.0],
        vec![8.0, 4.0, 6.0, 8.0],
        vec![7.0, 1.0, 2.0, 6.0],
        vec![10.0, 5.0, 6.0, 9.0],
        vec![6.0, 2.0, 4.0, 7.0],
    ];
    assert!((icc(&RatingsMatrix::new(rows).unwrap()).unwrap() - 0.2897637795275592).abs() < 1e-12);
}

#[test]
fn degenerate_inputs() {
    assert!(matches!(icc(&RatingsMatrix::new(vec![vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap()), Err(MetricsError::DegenerateMatrix)));
    assert!(matches!(RatingsMatrix::new(vec![vec![1.0, 2.0]]), Err(MetricsError::MatrixShape(_))));
    assert!(matches!(SusResponse::new([3, 3, 3, 3, 6, 3, 3, 3, 3, 3]), Err(MetricsError::OutOfRange { item: 5, .. })));
    assert!(matches!(SusResponse::from_slice(&[3; 9]), Err(MetricsError::SusLength(9))));
    assert!(correctness_rate(&[]).is_err());
}

#[test]
fn sus_closed_form() {
    let score = |items: [u8; 10]| sus_score(&SusResponse::new(items).unwrap());
    assert_eq!(score([3; 10]), 50.0);
    assert_eq!(score([5, 1, 5, 1, 5, 1, 5, 1, 5, 1]), 100.0);
    assert_eq!(score([4, 2, 4, 2, 4, 2, 4, 2, 4, 2]), 75.0);
}

#[test]
fn correctness_tally_on_seeded_fixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let items: Vec<Vec<Annotation>> = (0..46)
        .map(|_| (0..3).map(|r| Annotation::new(format!("r{r}"), rng.random_bool(0.8))).collect())
        .collect();
    // tally: an item is correct when at least two of its three raters agree
    let mut correct = 0;
    for item in &items {
        let mut yes = 0;
        for a in item {
            if a.agree {
                yes += 1;
            }
        }
        if yes >= 2 {
            correct += 1;
        }
    }
    let expected = correct as f64 / 46.0 * 100.0;
    assert!((correctness_rate(&items).unwrap() - expected).abs() < 1e-12);
}
