use std::collections::{BTreeMap, BTreeSet};

use crate::exec::Execution;
use crate::model::{assign_categories, validate_card, AtlasDataset, ImpactCard, RiskLevel, RuleTable, UseCase};

use super::prompt::{build_benefit_prompt, build_explore_prompt, build_illustration_prompt, build_mitigation_prompt, build_risk_prompt};
use super::provider::ChatProvider;
use super::repair::complete_with_repair;
use super::schema::{parse_benefit_output, parse_explore_output, parse_mitigation_output, parse_risk_output};
use super::{GenError, DEFAULT_MAX_IN_FLIGHT, DEFAULT_MAX_RETRIES};

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub max_retries: usize,
    pub max_in_flight: usize,
    /// Domains per explore prompt; 0 sends the whole list in one prompt.
    pub domains_per_prompt: usize,
    pub exec: Execution,
    pub rules: RuleTable,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            max_retries: DEFAULT_MAX_RETRIES,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            domains_per_prompt: 0,
            exec: Execution::default(),
            rules: RuleTable::builtin(),
        }
    }
}

fn malformed(field: &str, reason: String) -> GenError {
    GenError::MalformedOutput { field: field.to_string(), reason }
}

/// Checks that an explore reply has exactly three distinct uses for every
/// requested domain and none for others. Domain names compare
/// case-insensitively.
fn check_explore_counts(uses: &[UseCase], domains: &[String]) -> Result<(), GenError> {
    let mut per_domain: BTreeMap<String, BTreeSet<&str>> =
        domains.iter().map(|d| (d.trim().to_lowercase(), BTreeSet::new())).collect();
    for (i, u) in uses.iter().enumerate() {
        match per_domain.get_mut(&u.domain.to_lowercase()) {
            Some(ids) => {
                if !ids.insert(&u.id) {
                    return Err(malformed(&format!("uses[{i}]"), format!("duplicate use for domain `{}`", u.domain)));
                }
            }
            None => return Err(malformed(&format!("uses[{i}].domain"), format!("`{}` is not one of the listed domains", u.domain))),
        }
    }
    for d in domains {
        let n = per_domain[&d.trim().to_lowercase()].len();
        if n != 3 {
            return Err(malformed("uses", format!("domain `{d}` has {n} uses, expected 3")));
        }
    }
    Ok(())
}

/// Runs the explore step: three uses per domain, ids unique across the
/// whole list, sorted by id.
pub fn generate_uses(
    provider: &dyn ChatProvider,
    technology: &str,
    domains: &[String],
    opts: &GenerateOptions,
) -> Result<Vec<UseCase>, GenError> {
    let mut seen = BTreeSet::new();
    let domains: Vec<String> = domains
        .iter()
        .map(|d| d.trim().to_string())
        .filter(|d| !d.is_empty() && seen.insert(d.to_lowercase()))
        .collect();
    if domains.is_empty() {
        return Err(GenError::EmptyDomains);
    }
    let chunk = if opts.domains_per_prompt == 0 { domains.len() } else { opts.domains_per_prompt };
    let batches: Vec<&[String]> = domains.chunks(chunk).collect();
    let results = opts.exec.map_bounded(opts.max_in_flight, &batches, |batch| {
        let prompt = build_explore_prompt(technology, batch)?;
        let reply = complete_with_repair(provider, &prompt, opts.max_retries, |text| {
            let uses = parse_explore_output(text)?;
            check_explore_counts(&uses, batch)?;
            Ok(uses)
        })?;
        if reply.retries > 0 {
            log::info!("explore reply repaired after {} retries", reply.retries);
        }
        Ok::<_, GenError>(reply.value)
    });
    let mut by_id = BTreeMap::new();
    for batch in results {
        for u in batch? {
            by_id.entry(u.id.clone()).or_insert(u);
        }
    }
    Ok(by_id.into_values().collect())
}

/// Assesses one use: risk classification, benefits, mitigations and the
/// illustration prompt. Returns the use with its risk level and categories
/// filled in, and its card.
pub fn generate_card(provider: &dyn ChatProvider, use_case: &UseCase, opts: &GenerateOptions) -> Result<(UseCase, ImpactCard), GenError> {
    assess(provider, use_case, None, opts)
}

/// Like [`generate_card`] but keeps a curated risk level instead of the
/// provider's classification. The provider's risks, reasoning, benefits and
/// mitigations are still used.
pub fn generate_card_at_level(
    provider: &dyn ChatProvider,
    use_case: &UseCase,
    level: RiskLevel,
    opts: &GenerateOptions,
) -> Result<(UseCase, ImpactCard), GenError> {
    assess(provider, use_case, Some(level), opts)
}

fn assess(
    provider: &dyn ChatProvider,
    use_case: &UseCase,
    fixed: Option<RiskLevel>,
    opts: &GenerateOptions,
) -> Result<(UseCase, ImpactCard), GenError> {
    let mut u = use_case.clone();
    let risk = complete_with_repair(provider, &build_risk_prompt(&u)?, opts.max_retries, |text| {
        let out = parse_risk_output(text)?;
        let level = fixed.unwrap_or(out.risk_level);
        if level >= RiskLevel::High && out.hr_risks.is_empty() && out.sdg_risks.is_empty() {
            return Err(malformed("hr_risks", format!("a {level} use needs at least one risk")));
        }
        Ok(out)
    })?
    .value;
    u.risk_level = fixed.unwrap_or(risk.risk_level);
    let risks = risk.all_risks();

    let benefits = complete_with_repair(provider, &build_benefit_prompt(&u)?, opts.max_retries, parse_benefit_output)?.value;

    let (mitigations, mitigated_description, mitigated_risk_level) = if risks.is_empty() {
        (Vec::new(), u.long_description.clone(), u.risk_level)
    } else {
        let level = u.risk_level;
        let out = complete_with_repair(provider, &build_mitigation_prompt(&u, &risks)?, opts.max_retries, |text| {
            let out = parse_mitigation_output(text)?;
            if out.mitigated_risk_level > level {
                return Err(malformed(
                    "mitigated_risk_level",
                    format!("mitigation cannot raise the risk level from {level} to {}", out.mitigated_risk_level),
                ));
            }
            Ok(out)
        })?
        .value;
        (out.mitigations, out.mitigated_description, out.mitigated_risk_level)
    };

    u.categories = assign_categories(&u, &opts.rules);
    let card = ImpactCard {
        use_id: u.id.clone(),
        risks,
        benefits,
        mitigations,
        mitigated_description,
        mitigated_risk_level,
        risk_reasoning: match fixed {
            Some(level) if level != risk.risk_level => {
                format!("Curated as {level}; the generated assessment said {}: {}", risk.risk_level, risk.reasoning)
            }
            _ => risk.reasoning,
        },
        illustration_prompt: build_illustration_prompt(&u)?,
        illustration_ref: None,
    };
    let report = validate_card(&card, &u);
    if !report.is_valid() {
        return Err(GenError::InvalidCard { use_id: u.id.clone(), reason: report.to_string().trim_end().to_string() });
    }
    Ok((u, card))
}

/// Assesses every use with at most `opts.max_in_flight` uses in progress.
/// Output is ordered by use id whatever the completion order; the first
/// failure in that order is returned.
pub fn generate_cards(
    provider: &dyn ChatProvider,
    uses: &[UseCase],
    opts: &GenerateOptions,
) -> Result<(Vec<UseCase>, Vec<ImpactCard>), GenError> {
    let mut sorted: Vec<&UseCase> = uses.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let results = opts.exec.map_bounded(opts.max_in_flight, &sorted, |u| generate_card(provider, u, opts));
    let mut out_uses = Vec::with_capacity(uses.len());
    let mut cards = Vec::with_capacity(uses.len());
    for r in results {
        let (u, c) = r?;
        out_uses.push(u);
        cards.push(c);
    }
    Ok((out_uses, cards))
}

/// Explore plus assessment; the result has no layout yet.
pub fn generate_atlas(
    provider: &dyn ChatProvider,
    technology: &str,
    domains: &[String],
    opts: &GenerateOptions,
) -> Result<AtlasDataset, GenError> {
    let uses = generate_uses(provider, technology, domains, opts)?;
    log::info!("generated {} uses, assessing", uses.len());
    let (uses, cards) = generate_cards(provider, &uses, opts)?;
    let mut dataset = AtlasDataset::new(technology.trim());
    dataset.uses = uses;
    dataset.cards = cards;
    dataset.sort();
    Ok(dataset)
}
