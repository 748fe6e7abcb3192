use std::collections::BTreeSet;
use std::fmt;

use super::types::{AssessmentItem, AtlasDataset, ImpactCard, RiskLevel, UseCase, MAX_COMPONENT_CHARS};

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Every invariant violation found; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// True if any violation message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.to_string().contains(needle))
    }

    fn push(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { subject: subject.into(), message: message.into() });
    }

    fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_use(use_case: &UseCase) -> ValidationReport {
    let mut report = ValidationReport::default();
    let subject = use_case.id.as_str();
    for (name, value) in use_case.components() {
        if value.trim().is_empty() {
            report.push(subject, format!("{name} empty"));
            continue;
        }
        if value.trim() != value {
            report.push(subject, format!("{name} has surrounding whitespace"));
        }
        let chars = value.chars().count();
        if chars > MAX_COMPONENT_CHARS {
            report.push(
                subject,
                format!("{name} too long ({chars} > {MAX_COMPONENT_CHARS} characters)"),
            );
        }
    }
    if use_case.short_description.trim().is_empty() {
        report.push(subject, "short_description empty");
    }
    let expected = use_case.expected_id();
    if use_case.id != expected {
        report.push(subject, format!("id does not match components (expected {expected})"));
    }
    report
}

fn validate_item(report: &mut ValidationReport, subject: &str, kind: &str, i: usize, item: &AssessmentItem) {
    if item.text.trim().is_empty() {
        report.push(subject, format!("{kind}[{i}] text empty"));
    }
    if item.affected.is_empty() {
        report.push(subject, format!("{kind}[{i}] affected empty"));
    }
}

/// Checks a card against the use it describes.
pub fn validate_card(card: &ImpactCard, use_case: &UseCase) -> ValidationReport {
    let mut report = ValidationReport::default();
    let subject = format!("card {}", card.use_id);
    if card.use_id != use_case.id {
        report.push(&subject, format!("refers to {} but was checked against {}", card.use_id, use_case.id));
    }
    if card.risks.is_empty() && use_case.risk_level >= RiskLevel::High {
        report.push(&subject, format!("no risks listed for a {} use", use_case.risk_level));
    }
    if card.mitigated_risk_level > use_case.risk_level {
        report.push(
            &subject,
            format!(
                "mitigation raises risk from {} to {}",
                use_case.risk_level, card.mitigated_risk_level
            ),
        );
    }
    for (i, item) in card.risks.iter().enumerate() {
        validate_item(&mut report, &subject, "risks", i, item);
    }
    for (i, item) in card.benefits.iter().enumerate() {
        validate_item(&mut report, &subject, "benefits", i, item);
    }
    for (i, m) in card.mitigations.iter().enumerate() {
        if m.text.trim().is_empty() {
            report.push(&subject, format!("mitigations[{i}] text empty"));
        }
    }
    report
}

/// Full dataset check. With `require_layout` unset an atlas without any
/// coordinates (the input of the `layout` step) is accepted.
pub fn validate_dataset(dataset: &AtlasDataset, require_layout: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    if dataset.schema_version != super::types::SCHEMA_VERSION {
        report.push("dataset", format!("unsupported schema_version {}", dataset.schema_version));
    }

    let mut ids = BTreeSet::new();
    for u in &dataset.uses {
        if !ids.insert(u.id.as_str()) {
            report.push(&u.id, "duplicate id");
        }
        report.extend(validate_use(u));
    }

    let mut card_ids = BTreeSet::new();
    for card in &dataset.cards {
        if !card_ids.insert(card.use_id.as_str()) {
            report.push(format!("card {}", card.use_id), "duplicate card");
        }
        match dataset.use_by_id(&card.use_id) {
            Some(u) => report.extend(validate_card(card, u)),
            None => report.push(format!("card {}", card.use_id), "refers to unknown use"),
        }
    }
    for id in ids.difference(&card_ids) {
        report.push(*id, "no impact card");
    }

    let laid_out = require_layout || !dataset.coords.is_empty() || !dataset.split_coords.is_empty();
    if laid_out {
        for (name, map) in [("coords", &dataset.coords), ("split_coords", &dataset.split_coords)] {
            let keys: BTreeSet<&str> = map.keys().map(String::as_str).collect();
            if keys != ids {
                report.push("dataset", format!("{name} keys differ from use ids"));
            }
            for (id, c) in map {
                if !c.x.is_finite() || !c.y.is_finite() || !c.in_unit_square() {
                    report.push(id, format!("{name} coordinate out of range ({}, {})", c.x, c.y));
                }
            }
        }
    }
    report
}
