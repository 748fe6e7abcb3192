//! Offline providers: a seeded generator of schema-valid replies and a
//! scripted replayer for tests.

use std::sync::Mutex;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::layout::fnv1a;
use crate::model::RiskLevel;

use super::prompt::{DOMAINS_HEADING, INCIDENT_HEADING, USE_HEADING};
use super::provider::{ChatProvider, ChatRequest};
use super::schema::{parse_risk_label, SchemaId};
use super::GenError;

/// Deterministic stand-in for a chat model. Replies depend only on the seed
/// and the request messages, and always satisfy the requested schema.
#[derive(Debug, Clone, Copy)]
pub struct MockProvider {
    seed: u64,
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        MockProvider { seed }
    }

    fn rng_for(&self, request: &ChatRequest) -> ChaCha8Rng {
        let mut bytes = Vec::new();
        for m in &request.messages {
            bytes.extend_from_slice(m.role.as_bytes());
            bytes.push(0);
            bytes.extend_from_slice(m.content.as_bytes());
            bytes.push(0);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(&bytes))
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenError> {
        let mut rng = self.rng_for(request);
        let text = request.user_text();
        let reply = match request.schema {
            SchemaId::Explore => match block(text, INCIDENT_HEADING) {
                Some(lines) => incident_reply(&lines, &mut rng),
                None => explore_reply(text, &mut rng),
            },
            SchemaId::Risk => risk_reply(&UseFields::read(text), &mut rng),
            SchemaId::Benefit => benefit_reply(&UseFields::read(text), &mut rng),
            SchemaId::Mitigation => mitigation_reply(&UseFields::read(text), &mut rng),
        };
        Ok(reply.to_string())
    }
}

/// Lines of the `## heading` block, up to the next blank line.
fn block<'a>(text: &'a str, heading: &str) -> Option<Vec<&'a str>> {
    let marker = format!("## {heading}\n");
    let start = text.find(&marker)? + marker.len();
    Some(text[start..].lines().take_while(|l| !l.trim().is_empty()).collect())
}

fn field<'a>(lines: &[&'a str], key: &str) -> &'a str {
    lines.iter().find_map(|l| l.strip_prefix(key)).map(str::trim).unwrap_or("")
}

const USE_TEMPLATES: [(&str, &str, &str); 12] = [
    ("identity verification", "service providers", "customers"),
    ("access control", "facility operators", "visitors"),
    ("security monitoring", "security staff", "general public"),
    ("attendance tracking", "managers", "workers"),
    ("personalized services", "businesses", "clients"),
    ("fraud prevention", "compliance teams", "account holders"),
    ("missing person search", "public authorities", "missing persons"),
    ("age estimation", "platform operators", "children"),
    ("emotion analysis", "analysts", "participants"),
    ("patient identification", "clinicians", "patients"),
    ("suspect identification", "police officers", "suspects"),
    ("audience analytics", "marketers", "audiences"),
];

fn explore_reply(text: &str, rng: &mut ChaCha8Rng) -> Value {
    let technology = block(text, "Technology").and_then(|l| l.first().map(|s| s.trim().to_string())).unwrap_or_else(|| "AI".into());
    let domains: Vec<&str> = block(text, DOMAINS_HEADING)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|l| l.strip_prefix("- "))
        .map(str::trim)
        .collect();
    let mut uses = Vec::with_capacity(domains.len() * 3);
    for domain in domains {
        for (purpose, user, subject) in USE_TEMPLATES.choose_multiple(rng, 3) {
            let potential = match rng.random_range(0..100) {
                0..=64 => "existing",
                65..=92 => "upcoming",
                _ => "unlikely",
            };
            uses.push(json!({
                "domain": domain,
                "purpose": purpose,
                "capability": technology,
                "ai_user": user,
                "ai_subject": subject,
                "description": format!("{technology} for {purpose} in {}", domain.to_lowercase()),
                "long_description": format!(
                    "{user} in {domain} use {technology} for {purpose}, applied to {subject}."
                ),
                "implementation_potential": potential,
                "daily": rng.random_bool(0.3),
            }));
        }
    }
    json!({ "uses": uses })
}

fn first_match<'a>(text: &str, table: &[(&[&str], &'a str)], default: &'a str) -> &'a str {
    table.iter().find(|(keys, _)| keys.iter().any(|k| text.contains(k))).map_or(default, |(_, v)| v)
}

fn incident_reply(lines: &[&str], rng: &mut ChaCha8Rng) -> Value {
    let title = field(lines, "Title:");
    let text = lines.join(" ").to_lowercase();
    let (capability, purpose) = match first_match(
        &text,
        &[
            (&["recommend"], "rec"),
            (&["facial", "face "], "face"),
            (&["self-driving", "autonomous", "autopilot", "vehicle"], "drive"),
            (&["chatbot", "language model", "assistant"], "chat"),
            (&["hiring", "recruit", "applicant", "resume"], "hire"),
            (&["translat"], "translate"),
        ],
        "",
    ) {
        "rec" => ("Content recommendation", "Recommending content to users"),
        "face" => ("Facial recognition", "Identifying people from images"),
        "drive" => ("Autonomous driving", "Driving vehicles without human control"),
        "chat" => ("Conversational AI", "Answering user questions"),
        "hire" => ("Candidate ranking", "Screening job applicants"),
        "translate" => ("Machine translation", "Translating text between languages"),
        _ => ("Automated decision-making", "Automating decisions about people"),
    };
    let subject = first_match(
        &text,
        &[
            (&["child", "kid", "minor"], "Children"),
            (&["pedestrian", "driver", "road"], "Road users"),
            (&["applicant", "employee", "worker"], "Workers"),
            (&["patient"], "Patients"),
            (&["student"], "Students"),
        ],
        "General public",
    );
    let (domain, user) = match first_match(
        &text,
        &[
            (&["youtube", "video", "social media"], "media"),
            (&["vehicle", "car ", "tesla", "uber"], "transport"),
            (&["police", "arrest", "court"], "police"),
            (&["hospital", "health", "medical"], "health"),
            (&["hiring", "recruit", "job"], "jobs"),
        ],
        "",
    ) {
        "media" => ("Media and entertainment", "Video platforms"),
        "transport" => ("Transportation", "Vehicle manufacturers"),
        "police" => ("Law enforcement", "Police departments"),
        "health" => ("Healthcare", "Hospitals"),
        "jobs" => ("Employment", "Employers"),
        _ => ("Online services", "Technology companies"),
    };
    let description = if title.is_empty() {
        format!("{capability} for {}", purpose.to_lowercase())
    } else {
        format!("{capability} for {}, as in \"{title}\"", purpose.to_lowercase())
    };
    json!({"uses": [{
        "domain": domain,
        "purpose": purpose,
        "capability": capability,
        "ai_user": user,
        "ai_subject": subject,
        "description": description,
        "implementation_potential": "existing",
        "daily": rng.random_bool(0.5),
    }]})
}

struct UseFields {
    purpose: String,
    user: String,
    subject: String,
    risk_level: Option<RiskLevel>,
}

impl UseFields {
    fn read(text: &str) -> Self {
        let lines = block(text, USE_HEADING).unwrap_or_default();
        let or = |s: &str, d: &str| if s.is_empty() { d.to_string() } else { s.to_lowercase() };
        UseFields {
            purpose: or(field(&lines, "Purpose:"), "its purpose"),
            user: or(field(&lines, "AI user:"), "operators"),
            subject: or(field(&lines, "AI subject:"), "people"),
            risk_level: parse_risk_label(field(&lines, "Risk level:")).ok(),
        }
    }
}

const LAYERS: [&str; 3] = ["capability", "human interaction", "systemic impact"];
const PARTIES: [&str; 3] = ["subject", "user", "society"];

fn affected(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let mask = rng.random_range(1..8u8);
    PARTIES.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| *p).collect()
}

fn items(rng: &mut ChaCha8Rng, count: usize, texts: &[[String; 3]; 2], basis: impl Fn(&mut ChaCha8Rng) -> String) -> Vec<Value> {
    (0..count)
        .map(|_| {
            let layer = rng.random_range(0..3);
            let text = &texts[rng.random_range(0..2)][layer];
            let basis = basis(rng);
            json!({"text": text, "layer": LAYERS[layer], "affected": affected(rng), "basis": basis})
        })
        .collect()
}

fn level_label(level: RiskLevel) -> &'static str {
    match level {
        RiskLevel::Unacceptable => "unacceptable",
        RiskLevel::High => "high-risk",
        RiskLevel::LimitedLow => "minimal risk",
    }
}

fn risk_reply(u: &UseFields, rng: &mut ChaCha8Rng) -> Value {
    let level = RiskLevel::ALL[rng.random_range(0..3)];
    let texts = [
        [
            format!("Errors in {} misidentify {} and lead to unfair outcomes.", u.purpose, u.subject),
            format!("{} over-rely on automated results when carrying out {}.", cap(&u.user), u.purpose),
            format!("Widespread {} normalizes monitoring of {}.", u.purpose, u.subject),
        ],
        [
            format!("Training data gaps make {} less accurate for some groups of {}.", u.purpose, u.subject),
            format!("{} cannot contest decisions made through {}.", cap(&u.subject), u.purpose),
            format!("Data collected for {} erodes privacy across society.", u.purpose),
        ],
    ];
    let hr_count = rng.random_range(1..=2);
    let hr = items(rng, hr_count, &texts, |r| format!("UDHR Article {}", r.random_range(1..=30)));
    let sdg_count = rng.random_range(1..=2);
    let sdg = items(rng, sdg_count, &texts, |r| format!("SDG {}", r.random_range(1..=17)));
    let excerpts: Vec<String> = match level {
        RiskLevel::Unacceptable => vec!["Article 5 (prohibited practices)".into()],
        RiskLevel::High => vec![format!("Annex III point {}", rng.random_range(1..=8))],
        RiskLevel::LimitedLow => Vec::new(),
    };
    json!({
        "risk_level": level_label(level),
        "reasoning": format!("Using AI for {} affecting {} is classified as {}.", u.purpose, u.subject, level_label(level)),
        "act_excerpts": excerpts,
        "hr_risks": hr,
        "sdg_risks": sdg,
    })
}

fn benefit_reply(u: &UseFields, rng: &mut ChaCha8Rng) -> Value {
    let texts = [
        [
            format!("Automating {} makes it faster and more consistent.", u.purpose),
            format!("{} spend less time on routine work in {}.", cap(&u.user), u.purpose),
            format!("Better {} improves access to services for {}.", u.purpose, u.subject),
        ],
        [
            format!("{} scales to volumes manual work cannot handle.", cap(&u.purpose)),
            format!("{} get quicker responses.", cap(&u.subject)),
            format!("Reliable {} strengthens trust in institutions.", u.purpose),
        ],
    ];
    let count = rng.random_range(1..=3);
    json!({"benefits": items(rng, count, &texts, |r| format!("SDG {}", r.random_range(1..=17)))})
}

fn mitigation_reply(u: &UseFields, rng: &mut ChaCha8Rng) -> Value {
    let current = u.risk_level.unwrap_or(RiskLevel::Unacceptable);
    let allowed: Vec<RiskLevel> = RiskLevel::ALL.into_iter().filter(|l| *l <= current).collect();
    let mitigated = allowed[rng.random_range(0..allowed.len())];
    let pool = [
        ("Audit accuracy across demographic groups before deployment.".to_string(), "capability"),
        (format!("Require human review before acting on results of {}.", u.purpose), "human interaction"),
        ("Inform affected people and offer a way to opt out or appeal.".to_string(), "human interaction"),
        ("Limit data retention and publish transparency reports.".to_string(), "systemic impact"),
        ("Restrict the system to the narrowest necessary purpose.".to_string(), "systemic impact"),
    ];
    let count = rng.random_range(1..=3);
    let chosen: Vec<Value> =
        pool.choose_multiple(rng, count).map(|(text, layer)| json!({"text": text, "layer": layer})).collect();
    json!({
        "mitigations": chosen,
        "mitigated_description": format!("{} with human oversight, consent and regular audits.", cap(&u.purpose)),
        "mitigated_risk_level": level_label(mitigated),
    })
}

fn cap(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Replays fixed replies in order and records every request.
pub struct ScriptedProvider {
    replies: Vec<Result<String, String>>,
    repeat_last: bool,
    state: Mutex<Vec<ChatRequest>>,
}

impl ScriptedProvider {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedProvider {
            replies: replies.into_iter().map(|r| Ok(r.into())).collect(),
            repeat_last: false,
            state: Mutex::new(Vec::new()),
        }
    }

    /// A provider whose every call fails with a transport error.
    pub fn failing(message: impl Into<String>) -> Self {
        ScriptedProvider { replies: vec![Err(message.into())], repeat_last: true, state: Mutex::new(Vec::new()) }
    }

    /// Keep answering with the last reply once the script runs out.
    pub fn repeat_last(mut self) -> Self {
        self.repeat_last = true;
        self
    }

    pub fn calls(&self) -> usize {
        self.state.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.state.lock().unwrap().clone()
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenError> {
        let mut seen = self.state.lock().unwrap();
        let index = seen.len();
        seen.push(request.clone());
        let reply = match self.replies.get(index) {
            Some(r) => r,
            None if self.repeat_last && !self.replies.is_empty() => self.replies.last().unwrap(),
            None => return Err(GenError::Transport(format!("script exhausted after {index} replies"))),
        };
        reply.clone().map_err(GenError::Transport)
    }
}
