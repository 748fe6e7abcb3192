use std::fmt;

use serde::Serialize;

use super::types::{AtlasDataset, ImplementationPotential, RiskLevel};

/// Histogram summary of a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub uses: usize,
    pub unacceptable: usize,
    pub high: usize,
    pub limited_low: usize,
    pub existing: usize,
    pub upcoming: usize,
    pub unlikely: usize,
    pub daily: usize,
    pub risk_items: usize,
    pub benefit_items: usize,
    pub mitigation_items: usize,
}

impl DatasetStats {
    pub fn risk_count(&self, level: RiskLevel) -> usize {
        match level {
            RiskLevel::Unacceptable => self.unacceptable,
            RiskLevel::High => self.high,
            RiskLevel::LimitedLow => self.limited_low,
        }
    }

    pub fn potential_count(&self, p: ImplementationPotential) -> usize {
        match p {
            ImplementationPotential::Existing => self.existing,
            ImplementationPotential::Upcoming => self.upcoming,
            ImplementationPotential::Unlikely => self.unlikely,
        }
    }

    /// Fraction of daily uses; 0 for an empty dataset.
    pub fn daily_share(&self) -> f64 {
        if self.uses == 0 {
            0.0
        } else {
            self.daily as f64 / self.uses as f64
        }
    }
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "uses: {}", self.uses)?;
        writeln!(f, "risk_level:")?;
        for level in RiskLevel::ALL {
            let n = self.risk_count(level);
            writeln!(f, "  {:<14}{:>5}  ({:.0}%)", level.as_str(), n, pct(n, self.uses))?;
        }
        writeln!(f, "implementation_potential:")?;
        for p in ImplementationPotential::ALL {
            let n = self.potential_count(p);
            writeln!(f, "  {:<14}{:>5}  ({:.0}%)", p.as_str(), n, pct(n, self.uses))?;
        }
        writeln!(f, "daily: {} ({:.1}%)", self.daily, 100.0 * self.daily_share())?;
        writeln!(f, "card items: risks={} benefits={} mitigations={}", self.risk_items, self.benefit_items, self.mitigation_items)
    }
}

pub fn dataset_stats(dataset: &AtlasDataset) -> DatasetStats {
    let mut s = DatasetStats { uses: dataset.uses.len(), ..Default::default() };
    for u in &dataset.uses {
        match u.risk_level {
            RiskLevel::Unacceptable => s.unacceptable += 1,
            RiskLevel::High => s.high += 1,
            RiskLevel::LimitedLow => s.limited_low += 1,
        }
        match u.implementation_potential {
            ImplementationPotential::Existing => s.existing += 1,
            ImplementationPotential::Upcoming => s.upcoming += 1,
            ImplementationPotential::Unlikely => s.unlikely += 1,
        }
        if u.daily {
            s.daily += 1;
        }
    }
    for c in &dataset.cards {
        s.risk_items += c.risks.len();
        s.benefit_items += c.benefits.len();
        s.mitigation_items += c.mitigations.len();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::UseCase;
    use proptest::prelude::*;

    #[test]
    fn empty_dataset_is_all_zero() {
        let s = dataset_stats(&AtlasDataset::new("x"));
        assert_eq!(s, DatasetStats::default());
        assert_eq!(s.daily_share(), 0.0);
    }

    proptest! {
        #[test]
        fn histograms_sum_to_size(levels in proptest::collection::vec((0usize..3, 0usize..3, any::<bool>()), 0..60)) {
            let mut d = AtlasDataset::new("x");
            for (i, (r, p, daily)) in levels.iter().enumerate() {
                let mut u = UseCase::new(format!("p{i}"), "c", "u", "s", "d", "desc");
                u.risk_level = RiskLevel::ALL[*r];
                u.implementation_potential = ImplementationPotential::ALL[*p];
                u.daily = *daily;
                d.uses.push(u);
            }
            let s = dataset_stats(&d);
            prop_assert_eq!(s.unacceptable + s.high + s.limited_low, d.uses.len());
            prop_assert_eq!(s.existing + s.upcoming + s.unlikely, d.uses.len());
            prop_assert!(s.daily <= s.uses);
        }
    }
}
