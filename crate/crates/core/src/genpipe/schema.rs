//! Registered reply schemas and their parsers.
//!
//! Providers must answer with one JSON object per schema. Parsers accept the
//! object bare or wrapped in a Markdown code fence, and report the first
//! violation as [`GenError::MalformedOutput`] naming the offending field so
//! the repair loop can quote it back.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::model::{validate_use, Affected, AssessmentItem, ImplementationPotential, Mitigation, RiskLevel, SocioTechnicalLayer, UseCase};

use super::GenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaId {
    Explore,
    Risk,
    Benefit,
    Mitigation,
}

fn item_schema(with_affected: bool) -> Value {
    let mut props = json!({
        "text": {"type": "string", "minLength": 1},
        "layer": {"enum": ["capability", "human-interaction", "systemic-impact"]},
    });
    let mut required = vec!["text", "layer"];
    if with_affected {
        props["affected"] = json!({"type": "array", "minItems": 1, "items": {"enum": ["subject", "user", "society"]}});
        props["basis"] = json!({"type": "string"});
        required.push("affected");
    }
    json!({"type": "object", "properties": props, "required": required})
}

impl SchemaId {
    pub fn name(self) -> &'static str {
        match self {
            SchemaId::Explore => "explore-uses",
            SchemaId::Risk => "risk-assessment",
            SchemaId::Benefit => "benefit-assessment",
            SchemaId::Mitigation => "mitigation-plan",
        }
    }

    /// JSON Schema sent with the request and quoted in the prompt.
    pub fn json_schema(self) -> Value {
        let text = json!({"type": "string", "minLength": 1, "maxLength": 200});
        match self {
            SchemaId::Explore => json!({
                "type": "object",
                "required": ["uses"],
                "properties": {"uses": {"type": "array", "minItems": 1, "items": {
                    "type": "object",
                    "required": ["domain", "purpose", "capability", "ai_user", "ai_subject", "description"],
                    "properties": {
                        "domain": text, "purpose": text, "capability": text,
                        "ai_user": text, "ai_subject": text,
                        "description": {"type": "string", "minLength": 1},
                        "long_description": {"type": "string"},
                        "implementation_potential": {"enum": ["existing", "upcoming", "unlikely"]},
                        "daily": {"type": "boolean"}
                    }
                }}}
            }),
            SchemaId::Risk => json!({
                "type": "object",
                "required": ["risk_level", "reasoning", "hr_risks", "sdg_risks"],
                "properties": {
                    "risk_level": {"enum": ["unacceptable", "high-risk", "minimal risk"]},
                    "reasoning": {"type": "string"},
                    "act_excerpts": {"type": "array", "items": {"type": "string"}},
                    "hr_risks": {"type": "array", "items": item_schema(true)},
                    "sdg_risks": {"type": "array", "items": item_schema(true)}
                }
            }),
            SchemaId::Benefit => json!({
                "type": "object",
                "required": ["benefits"],
                "properties": {"benefits": {"type": "array", "items": item_schema(true)}}
            }),
            SchemaId::Mitigation => json!({
                "type": "object",
                "required": ["mitigations", "mitigated_description", "mitigated_risk_level"],
                "properties": {
                    "mitigations": {"type": "array", "minItems": 1, "items": item_schema(false)},
                    "mitigated_description": {"type": "string", "minLength": 1},
                    "mitigated_risk_level": {"enum": ["unacceptable", "high-risk", "minimal risk"]}
                }
            }),
        }
    }
}

fn malformed(field: impl Into<String>, reason: impl Into<String>) -> GenError {
    GenError::MalformedOutput { field: field.into(), reason: reason.into() }
}

/// Pulls the JSON object out of a reply, tolerating code fences and chatter
/// around it.
pub fn extract_json(text: &str) -> Result<Map<String, Value>, GenError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(malformed("$", "empty reply"));
    }
    let (start, end) = match (trimmed.find('{'), trimmed.rfind('}')) {
        (Some(s), Some(e)) if s < e => (s, e),
        _ => return Err(malformed("$", "no JSON object in reply")),
    };
    match serde_json::from_str::<Value>(&trimmed[start..=end]) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(malformed("$", "reply is not a JSON object")),
        Err(e) => Err(malformed("$", format!("invalid JSON: {e}"))),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, GenError> {
    obj.get(key).filter(|v| !v.is_null()).ok_or_else(|| malformed(format!("{path}{key}"), "missing"))
}

fn required_str(obj: &Map<String, Value>, path: &str, key: &str) -> Result<String, GenError> {
    match get(obj, path, key)? {
        Value::String(s) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        Value::String(_) => Err(malformed(format!("{path}{key}"), "empty")),
        _ => Err(malformed(format!("{path}{key}"), "not a string")),
    }
}

fn optional_str(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<String>, GenError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.trim().to_string())),
        Some(_) => Err(malformed(format!("{path}{key}"), "not a string")),
    }
}

fn array<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Vec<Value>, GenError> {
    get(obj, path, key)?.as_array().ok_or_else(|| malformed(format!("{path}{key}"), "not an array"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, GenError> {
    v.as_object().ok_or_else(|| malformed(path, "not an object"))
}

fn normalize_label(s: &str) -> String {
    s.trim().to_lowercase().replace(['-', '_'], " ").split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Maps a risk label, including common synonyms, onto a [`RiskLevel`].
pub fn parse_risk_label(label: &str) -> Result<RiskLevel, GenError> {
    let norm = normalize_label(label);
    let stripped = norm.strip_suffix(" risk").unwrap_or(&norm);
    let level = match stripped {
        "unacceptable" | "prohibited" | "banned" => RiskLevel::Unacceptable,
        "high" => RiskLevel::High,
        "minimal" | "low" | "limited" | "limited or low" | "limited low" | "low or limited" | "none" | "no"
        | "none of these two" => RiskLevel::LimitedLow,
        _ => return Err(GenError::UnknownRiskLabel(label.trim().to_string())),
    };
    Ok(level)
}

pub fn parse_layer(label: &str, field: &str) -> Result<SocioTechnicalLayer, GenError> {
    let norm = normalize_label(label);
    let stripped = norm.strip_suffix(" layer").unwrap_or(&norm);
    match stripped {
        "capability" | "technical capability" => Ok(SocioTechnicalLayer::Capability),
        "human interaction" => Ok(SocioTechnicalLayer::HumanInteraction),
        "systemic impact" | "systemic" => Ok(SocioTechnicalLayer::SystemicImpact),
        _ => Err(malformed(field, format!("unknown layer `{label}`"))),
    }
}

fn parse_affected(v: &Value, field: &str) -> Result<BTreeSet<Affected>, GenError> {
    let list = v.as_array().ok_or_else(|| malformed(field, "not an array"))?;
    let mut out = BTreeSet::new();
    for entry in list {
        let s = entry.as_str().ok_or_else(|| malformed(field, "entries must be strings"))?;
        let a = match normalize_label(s).as_str() {
            "subject" | "subjects" | "ai subject" | "ai subjects" => Affected::Subject,
            "user" | "users" | "ai user" | "ai users" => Affected::User,
            "society" | "societal" | "public" | "general public" => Affected::Society,
            _ => return Err(malformed(field, format!("unknown affected party `{s}`"))),
        };
        out.insert(a);
    }
    if out.is_empty() {
        return Err(malformed(field, "empty"));
    }
    Ok(out)
}

fn parse_items(obj: &Map<String, Value>, key: &str) -> Result<Vec<AssessmentItem>, GenError> {
    let mut items = Vec::new();
    for (i, v) in array(obj, "", key)?.iter().enumerate() {
        let path = format!("{key}[{i}].");
        let item = object(v, &path)?;
        let layer_label = required_str(item, &path, "layer")?;
        items.push(AssessmentItem {
            text: required_str(item, &path, "text")?,
            layer: parse_layer(&layer_label, &format!("{path}layer"))?,
            affected: parse_affected(get(item, &path, "affected")?, &format!("{path}affected"))?,
            basis: optional_str(item, &path, "basis")?,
        });
    }
    Ok(items)
}

/// Parses an explore reply into uses with derived ids. Implementation
/// potential defaults to `existing`, `daily` to false and the long
/// description to the one-line description. Risk level is provisional
/// (`limited-low`) until classified.
pub fn parse_explore_output(text: &str) -> Result<Vec<UseCase>, GenError> {
    let obj = extract_json(text)?;
    let list = array(&obj, "", "uses")?;
    if list.is_empty() {
        return Err(malformed("uses", "empty"));
    }
    let mut uses = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let path = format!("uses[{i}].");
        let item = object(v, &path)?;
        let mut u = UseCase::new(
            required_str(item, &path, "purpose")?,
            required_str(item, &path, "capability")?,
            required_str(item, &path, "ai_user")?,
            required_str(item, &path, "ai_subject")?,
            required_str(item, &path, "domain")?,
            required_str(item, &path, "description")?,
        );
        if let Some(long) = optional_str(item, &path, "long_description")? {
            u.long_description = long;
        }
        if let Some(p) = optional_str(item, &path, "implementation_potential")? {
            u.implementation_potential =
                p.parse::<ImplementationPotential>().map_err(|e| malformed(format!("{path}implementation_potential"), e))?;
        }
        match item.get("daily") {
            None | Some(Value::Null) => {}
            Some(Value::Bool(b)) => u.daily = *b,
            Some(_) => return Err(malformed(format!("{path}daily"), "not a boolean")),
        }
        let report = validate_use(&u);
        if let Some(v) = report.violations.first() {
            return Err(malformed(format!("uses[{i}]"), v.message.clone()));
        }
        uses.push(u);
    }
    Ok(uses)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskGenOutput {
    pub risk_level: RiskLevel,
    pub reasoning: String,
    pub act_excerpts: Vec<String>,
    pub hr_risks: Vec<AssessmentItem>,
    pub sdg_risks: Vec<AssessmentItem>,
}

impl RiskGenOutput {
    /// Human-rights risks followed by SDG risks.
    pub fn all_risks(&self) -> Vec<AssessmentItem> {
        self.hr_risks.iter().chain(&self.sdg_risks).cloned().collect()
    }
}

pub fn parse_risk_output(text: &str) -> Result<RiskGenOutput, GenError> {
    let obj = extract_json(text)?;
    let risk_level = parse_risk_label(&required_str(&obj, "", "risk_level")?)?;
    let act_excerpts = match obj.get("act_excerpts") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(list)) => list
            .iter()
            .map(|v| v.as_str().map(|s| s.trim().to_string()).ok_or_else(|| malformed("act_excerpts", "entries must be strings")))
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(malformed("act_excerpts", "not an array")),
    };
    Ok(RiskGenOutput {
        risk_level,
        reasoning: optional_str(&obj, "", "reasoning")?.unwrap_or_default(),
        act_excerpts,
        hr_risks: parse_items(&obj, "hr_risks")?,
        sdg_risks: parse_items(&obj, "sdg_risks")?,
    })
}

pub fn parse_benefit_output(text: &str) -> Result<Vec<AssessmentItem>, GenError> {
    parse_items(&extract_json(text)?, "benefits")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MitigationOutput {
    pub mitigations: Vec<Mitigation>,
    pub mitigated_description: String,
    pub mitigated_risk_level: RiskLevel,
}

/// Parses a mitigation plan. Reclassification is taken as stated; whether it
/// is allowed to differ from the original level is checked by the caller.
pub fn parse_mitigation_output(text: &str) -> Result<MitigationOutput, GenError> {
    let obj = extract_json(text)?;
    let mut mitigations = Vec::new();
    for (i, v) in array(&obj, "", "mitigations")?.iter().enumerate() {
        let path = format!("mitigations[{i}].");
        let item = object(v, &path)?;
        let layer_label = required_str(item, &path, "layer")?;
        mitigations.push(Mitigation {
            text: required_str(item, &path, "text")?,
            layer: parse_layer(&layer_label, &format!("{path}layer"))?,
        });
    }
    if mitigations.is_empty() {
        return Err(malformed("mitigations", "empty"));
    }
    Ok(MitigationOutput {
        mitigations,
        mitigated_description: required_str(&obj, "", "mitigated_description")?,
        mitigated_risk_level: parse_risk_label(&required_str(&obj, "", "mitigated_risk_level")?)?,
    })
}
