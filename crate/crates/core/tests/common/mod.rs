#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    // resolves from the core crate and from other crates that include this file
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

/// The 60-point, 10-D, three-cluster fixture as (labels, points).
pub fn cluster_fixture() -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(fixture("clusters_3x20_10d.csv")).unwrap();
    let mut labels = Vec::new();
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        labels.push(rec[0].parse().unwrap());
        points.push(rec.iter().skip(1).map(|v| v.parse::<f64>().unwrap()).collect());
    }
    (labels, points)
}

/// Mean silhouette coefficient with Euclidean distance. Points alone in
/// their cluster score 0.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let n = points.len();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..n {
            if i != j {
                sums[labels[j]] += dist(points[i], points[j]);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

/// Rows of the planted paraphrase corpus as (template, five components).
pub fn planted_rows() -> Vec<(usize, [String; 5])> {
    let mut rdr = csv::Reader::from_path(fixture("planted_uses.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), [1, 2, 3, 4, 5].map(|i| r[i].to_string()))
        })
        .collect()
}
