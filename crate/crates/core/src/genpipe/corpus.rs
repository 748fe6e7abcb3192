//! Static prompt context and the default domain list.

use std::path::Path;

const DOMAINS: &str = include_str!("../../assets/domains.txt");
const EU_AI_ACT: &str = include_str!("../../assets/context/eu_ai_act.txt");
const SDGS: &str = include_str!("../../assets/context/sdgs.txt");
const UDHR: &str = include_str!("../../assets/context/udhr.txt");

/// Non-blank lines not starting with `#`, trimmed.
pub fn config_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// The 46 shipped application domains.
pub fn default_domains() -> Vec<String> {
    config_lines(DOMAINS)
}

pub fn load_domains_file(path: &Path) -> std::io::Result<Vec<String>> {
    Ok(config_lines(&std::fs::read_to_string(path)?))
}

/// Prohibited-practice and Annex III high-risk excerpts.
pub fn eu_ai_act_excerpts() -> Vec<String> {
    config_lines(EU_AI_ACT)
}

pub fn sdg_definitions() -> Vec<String> {
    config_lines(SDGS)
}

pub fn udhr_articles() -> Vec<String> {
    config_lines(UDHR)
}
