use crate::model::{Coord, RiskLevel};

/// Horizontal band `[lo, hi]` a risk level occupies in the split view.
pub fn risk_band(level: RiskLevel) -> (f64, f64) {
    match level {
        RiskLevel::Unacceptable => (0.0, 0.30),
        RiskLevel::High => (0.35, 0.65),
        RiskLevel::LimitedLow => (0.70, 1.0),
    }
}

/// Min-max scales each axis into `[0, 1]`; a constant axis maps to 0.5.
pub fn normalize_coords(points: &[[f64; 2]]) -> Vec<Coord> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let scale = |v: f64, d: usize| {
        let span = hi[d] - lo[d];
        if span > 0.0 {
            ((v - lo[d]) / span).clamp(0.0, 1.0)
        } else {
            0.5
        }
    };
    points.iter().map(|p| Coord::new(scale(p[0], 0), scale(p[1], 1))).collect()
}

/// Maps a normalized point into its risk band; y is untouched.
pub fn split_point(coord: Coord, level: RiskLevel) -> Coord {
    let (lo, hi) = risk_band(level);
    Coord::new(lo + coord.x * (hi - lo), coord.y)
}

/// Split-view coordinates for paired points and levels.
pub fn split_by_risk(points: &[(Coord, RiskLevel)]) -> Vec<Coord> {
    points.iter().map(|(c, l)| split_point(*c, *l)).collect()
}
