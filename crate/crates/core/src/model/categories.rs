//! Rule-based category assignment.
//!
//! A rule table maps each of the ten categories to one or more predicates.
//! A keyword predicate fires when any keyword occurs, case-insensitively, as
//! a substring of any listed text field. A flag predicate copies a boolean
//! field of the use. A category is set when any of its rules fires.
//!
//! ```toml
//! [[rule]]
//! category = "application-area:law-enforcement"
//! fields = ["domain", "purpose", "ai_user"]
//! keywords = ["police", "border"]
//!
//! [[rule]]
//! category = "use:daily"
//! flag = "daily"
//! ```

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use super::types::{Category, CategorySet, UseCase};

const DEFAULT_RULES: &str = include_str!("../../assets/categories.toml");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule table is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("rule {index}: {message}")]
    Rule { index: usize, message: String },
    #[error("no rule covers category `{0}`")]
    Uncovered(Category),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    Purpose,
    Capability,
    AiUser,
    AiSubject,
    Domain,
    ShortDescription,
    LongDescription,
}

impl TextField {
    fn get(self, u: &UseCase) -> &str {
        match self {
            TextField::Purpose => &u.purpose,
            TextField::Capability => &u.capability,
            TextField::AiUser => &u.ai_user,
            TextField::AiSubject => &u.ai_subject,
            TextField::Domain => &u.domain,
            TextField::ShortDescription => &u.short_description,
            TextField::LongDescription => &u.long_description,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagField {
    Daily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Keywords { fields: Vec<TextField>, keywords: Vec<String> },
    Flag(FlagField),
}

impl Predicate {
    fn matches(&self, u: &UseCase) -> bool {
        match self {
            Predicate::Flag(FlagField::Daily) => u.daily,
            Predicate::Keywords { fields, keywords } => fields.iter().any(|f| {
                let text = f.get(u).to_lowercase();
                keywords.iter().any(|k| text.contains(k.as_str()))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub category: Category,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    rules: Vec<Rule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    category: String,
    #[serde(default)]
    fields: Vec<TextField>,
    #[serde(default)]
    keywords: Vec<String>,
    flag: Option<FlagField>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    #[serde(default)]
    rule: Vec<RawRule>,
}

impl RuleTable {
    /// Builds a table, rejecting it unless all ten categories are covered.
    pub fn new(rules: Vec<Rule>) -> Result<Self, RuleError> {
        let covered: BTreeSet<Category> = rules.iter().map(|r| r.category).collect();
        if let Some(missing) = Category::ALL.into_iter().find(|c| !covered.contains(c)) {
            return Err(RuleError::Uncovered(missing));
        }
        Ok(RuleTable { rules })
    }

    pub fn from_toml_str(src: &str) -> Result<Self, RuleError> {
        let raw: RawTable = toml::from_str(src)?;
        let mut rules = Vec::with_capacity(raw.rule.len());
        for (index, r) in raw.rule.into_iter().enumerate() {
            let err = |message: String| RuleError::Rule { index, message };
            let category = r.category.parse::<Category>().map_err(err)?;
            let predicate = match (r.flag, r.keywords.is_empty()) {
                (Some(flag), true) if r.fields.is_empty() => Predicate::Flag(flag),
                (Some(_), _) => return Err(err("`flag` cannot be combined with `fields`/`keywords`".into())),
                (None, true) => return Err(err("needs `keywords` or `flag`".into())),
                (None, false) => {
                    if r.fields.is_empty() {
                        return Err(err("keyword rule lists no `fields`".into()));
                    }
                    let keywords = r.keywords.iter().map(|k| k.trim().to_lowercase()).collect::<Vec<_>>();
                    if keywords.iter().any(String::is_empty) {
                        return Err(err("empty keyword".into()));
                    }
                    Predicate::Keywords { fields: r.fields, keywords }
                }
            };
            rules.push(Rule { category, predicate });
        }
        RuleTable::new(rules)
    }

    /// The rule table shipped in `assets/categories.toml`.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_RULES).expect("shipped category rules are valid")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}

pub fn assign_categories(use_case: &UseCase, rules: &RuleTable) -> CategorySet {
    let mut set = CategorySet::empty();
    for rule in &rules.rules {
        if !set.contains(rule.category) && rule.predicate.matches(use_case) {
            set.set(rule.category, true);
        }
    }
    set
}
