use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{AssessmentItem, UseCase};

use super::corpus;
use super::schema::SchemaId;
use super::GenError;

const EXPLORE_ROLE: &str =
    "You are a Senior AI Technology Expert responsible for identifying and cataloging various AI applications and use cases.";
const RISK_ROLE: &str =
    "You are a Senior AI Technology Expert, specializing in compliance with the EU AI Act, SDGs, and HRs.";
const BENEFIT_ROLE: &str = "You are a Senior AI Technology Expert, specializing in SDGs and HRs.";
const MITIGATION_ROLE: &str = "You are a Senior AI Technology Expert, specializing in responsible AI design and the mitigation of AI risks.";

/// Heading of the domain list block; the mock provider reads it back.
pub const DOMAINS_HEADING: &str = "Domains";
pub const USE_HEADING: &str = "Use under assessment";
pub const INCIDENT_HEADING: &str = "Incident";
pub const RISKS_HEADING: &str = "Identified risks";
pub const EU_AI_ACT_HEADING: &str = "EU AI Act excerpts";
pub const SDG_HEADING: &str = "Sustainable Development Goals";
pub const UDHR_HEADING: &str = "Universal Declaration of Human Rights";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextKind {
    Technology,
    Domains,
    Use,
    Incident,
    Risks,
    EuAiAct,
    Sdgs,
    Udhr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBlock {
    pub kind: ContextKind,
    pub title: String,
    pub body: String,
}

impl ContextBlock {
    fn new(kind: ContextKind, title: &str, body: impl Into<String>) -> Self {
        ContextBlock { kind, title: title.to_string(), body: body.into() }
    }

    fn list(kind: ContextKind, title: &str, items: &[String]) -> Self {
        let body = items.iter().map(|i| format!("- {i}")).collect::<Vec<_>>().join("\n");
        Self::new(kind, title, body)
    }
}

/// A structured prompt: role, context inputs, ordered instructions and the
/// registered output schema the reply must follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub role_preamble: String,
    pub context_inputs: Vec<ContextBlock>,
    pub instructions: Vec<String>,
    pub output_schema: SchemaId,
}

impl PromptSpec {
    pub fn has_context(&self, kind: ContextKind) -> bool {
        self.context_inputs.iter().any(|b| b.kind == kind)
    }

    /// The system message.
    pub fn system_text(&self) -> &str {
        &self.role_preamble
    }

    /// The user message: context blocks, numbered instructions and the
    /// output contract.
    pub fn user_text(&self) -> String {
        let mut out = String::new();
        for block in &self.context_inputs {
            writeln!(out, "## {}\n{}\n", block.title, block.body).unwrap();
        }
        out.push_str("## Instructions\n");
        for (i, step) in self.instructions.iter().enumerate() {
            writeln!(out, "{}. {}", i + 1, step).unwrap();
        }
        writeln!(
            out,
            "\n## Output\nReply with a single JSON object and nothing else. It must validate against the JSON schema `{}`:\n{}",
            self.output_schema.name(),
            serde_json::to_string_pretty(&self.output_schema.json_schema()).unwrap()
        )
        .unwrap();
        out
    }

    /// System and user text joined, for string-level inspection.
    pub fn full_text(&self) -> String {
        format!("{}\n\n{}", self.system_text(), self.user_text())
    }
}

/// Use details; the current risk level is only shown where the prompt
/// builds on an earlier classification.
fn use_block(u: &UseCase, with_risk: bool) -> ContextBlock {
    let mut body = format!(
        "Purpose: {}\nCapability: {}\nAI user: {}\nAI subject: {}\nDomain: {}\nDescription: {}",
        u.purpose, u.capability, u.ai_user, u.ai_subject, u.domain, u.long_description
    );
    if with_risk {
        body.push_str(&format!("\nRisk level: {}", u.risk_level));
    }
    ContextBlock::new(ContextKind::Use, USE_HEADING, body)
}

fn check_use(u: &UseCase) -> Result<(), GenError> {
    let report = crate::model::validate_use(u);
    if report.is_valid() {
        Ok(())
    } else {
        Err(GenError::InvalidUse(report.to_string().trim_end().to_string()))
    }
}

const FIVE_COMPONENTS: &str = "Describe every use in five components: domain (the specific industry or sector, e.g. finance), purpose (the end goal, e.g. fraud prevention), capability (the technological feature, e.g. facial recognition), AI user (the entity managing and overseeing the use, e.g. banks) and AI subject (the individuals or groups impacted by the use, e.g. customers).";

pub fn build_explore_prompt(technology: &str, domains: &[String]) -> Result<PromptSpec, GenError> {
    if domains.is_empty() {
        return Err(GenError::EmptyDomains);
    }
    let technology = technology.trim();
    Ok(PromptSpec {
        role_preamble: EXPLORE_ROLE.to_string(),
        context_inputs: vec![
            ContextBlock::new(ContextKind::Technology, "Technology", technology),
            ContextBlock::list(ContextKind::Domains, DOMAINS_HEADING, domains),
        ],
        instructions: vec![
            format!(
                "Generate exactly three distinct uses of {technology} for each of the {} domains listed above, covering existing and upcoming uses.",
                domains.len()
            ),
            FIVE_COMPONENTS.to_string(),
            format!("Summarize every use in a concise one-line description (e.g. {technology} for financial fraud detection) and add a one-paragraph long description."),
            "Mark each use's implementation potential as existing (currently in use), upcoming (expected soon) or unlikely, and whether ordinary people meet it in daily life.".to_string(),
            "Copy each domain name exactly as listed.".to_string(),
        ],
        output_schema: SchemaId::Explore,
    })
}

/// ExploreGen variant that reverse-engineers one use from an incident report.
pub fn build_incident_prompt(title: &str, description: &str) -> PromptSpec {
    let body = format!("Title: {}\nDescription: {}", title.trim(), description.trim());
    PromptSpec {
        role_preamble: EXPLORE_ROLE.to_string(),
        context_inputs: vec![ContextBlock::new(ContextKind::Incident, INCIDENT_HEADING, body)],
        instructions: vec![
            "Generate one possible AI use that could have caused the incident above.".to_string(),
            FIVE_COMPONENTS.to_string(),
            "Summarize the use in a concise one-line description and add a one-paragraph long description.".to_string(),
            "Return exactly one use.".to_string(),
        ],
        output_schema: SchemaId::Explore,
    }
}

fn rights_context() -> [ContextBlock; 2] {
    [
        ContextBlock::list(ContextKind::Sdgs, SDG_HEADING, &corpus::sdg_definitions()),
        ContextBlock::list(ContextKind::Udhr, UDHR_HEADING, &corpus::udhr_articles()),
    ]
}

const LAYER_STEP: &str = "Group every item by its relevance to the capability, human interaction, or systemic impact layer, and mark who is affected: the AI subject, the AI user, or society.";

pub fn build_risk_prompt(u: &UseCase) -> Result<PromptSpec, GenError> {
    check_use(u)?;
    let mut context = vec![
        use_block(u, false),
        ContextBlock::list(ContextKind::EuAiAct, EU_AI_ACT_HEADING, &corpus::eu_ai_act_excerpts()),
    ];
    context.extend(rights_context());
    Ok(PromptSpec {
        role_preamble: RISK_ROLE.to_string(),
        context_inputs: context,
        instructions: vec![
            "Classify the use under the EU AI Act: unacceptable, high-risk, or none of these two (minimal risk). Explain your reasoning and quote the relevant excerpts.".to_string(),
            "Identify any additional risks from the ways the use undermines the Sustainable Development Goals or the human rights articles, citing the goal or article.".to_string(),
            LAYER_STEP.to_string(),
        ],
        output_schema: SchemaId::Risk,
    })
}

pub fn build_benefit_prompt(u: &UseCase) -> Result<PromptSpec, GenError> {
    check_use(u)?;
    let mut context = vec![use_block(u, false)];
    context.extend(rights_context());
    Ok(PromptSpec {
        role_preamble: BENEFIT_ROLE.to_string(),
        context_inputs: context,
        instructions: vec![
            "Identify the benefits of the use by the ways it supports the Sustainable Development Goals or the human rights articles, citing the goal or article.".to_string(),
            LAYER_STEP.to_string(),
        ],
        output_schema: SchemaId::Benefit,
    })
}

pub fn build_mitigation_prompt(u: &UseCase, risks: &[AssessmentItem]) -> Result<PromptSpec, GenError> {
    check_use(u)?;
    if risks.is_empty() {
        return Err(GenError::NoRisks);
    }
    let risk_lines: Vec<String> =
        risks.iter().enumerate().map(|(i, r)| format!("[{}] ({}) {}", i + 1, r.layer, r.text)).collect();
    Ok(PromptSpec {
        role_preamble: MITIGATION_ROLE.to_string(),
        context_inputs: vec![use_block(u, true), ContextBlock::list(ContextKind::Risks, RISKS_HEADING, &risk_lines)],
        instructions: vec![
            "Propose mitigation strategies for the identified risks; one strategy may address several risks and a risk may need several strategies.".to_string(),
            "Group the strategies by their relevance to the capability, human interaction, or systemic impact layer.".to_string(),
            "Describe a new, mitigated version of the use.".to_string(),
            "Evaluate the mitigated version under the EU AI Act: is it still unacceptable or high-risk, or minimal risk?".to_string(),
        ],
        output_schema: SchemaId::Mitigation,
    })
}

/// Image-model prompt for a use's illustration.
pub fn build_illustration_prompt(u: &UseCase) -> Result<String, GenError> {
    let description = u.short_description.trim();
    if description.is_empty() {
        return Err(GenError::InvalidUse(format!("{}: short_description empty", u.id)));
    }
    Ok(format!(
        "Generate an image for the {description} with the content that is safe and appropriate. Use line art style, low polygons, and black lines on the white background"
    ))
}
