use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

/// Maximum length, in characters, of each of the five use components.
pub const MAX_COMPONENT_CHARS: usize = 200;

/// Current `atlas.json` schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// EU AI Act risk tier of a use.
///
/// Ordered so that `LimitedLow < High < Unacceptable`; a mitigated version of
/// a use must never compare greater than the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    #[serde(rename = "limited-low")]
    LimitedLow,
    #[serde(rename = "high")]
    High,
    #[serde(rename = "unacceptable")]
    Unacceptable,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Unacceptable, RiskLevel::High, RiskLevel::LimitedLow];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Unacceptable => "unacceptable",
            RiskLevel::High => "high",
            RiskLevel::LimitedLow => "limited-low",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskLevel {
    type Err = String;

    /// Strict parse of the serialized form. LLM replies go through the more
    /// forgiving synonym table in `genpipe`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RiskLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown risk level `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImplementationPotential {
    Existing,
    Upcoming,
    Unlikely,
}

impl ImplementationPotential {
    pub const ALL: [ImplementationPotential; 3] = [
        ImplementationPotential::Existing,
        ImplementationPotential::Upcoming,
        ImplementationPotential::Unlikely,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImplementationPotential::Existing => "existing",
            ImplementationPotential::Upcoming => "upcoming",
            ImplementationPotential::Unlikely => "unlikely",
        }
    }
}

impl FromStr for ImplementationPotential {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        ImplementationPotential::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown implementation potential `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SocioTechnicalLayer {
    Capability,
    HumanInteraction,
    SystemicImpact,
}

impl SocioTechnicalLayer {
    pub const ALL: [SocioTechnicalLayer; 3] = [
        SocioTechnicalLayer::Capability,
        SocioTechnicalLayer::HumanInteraction,
        SocioTechnicalLayer::SystemicImpact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SocioTechnicalLayer::Capability => "capability",
            SocioTechnicalLayer::HumanInteraction => "human-interaction",
            SocioTechnicalLayer::SystemicImpact => "systemic-impact",
        }
    }
}

impl fmt::Display for SocioTechnicalLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Who bears a risk or receives a benefit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Affected {
    Subject,
    User,
    Society,
}

impl Affected {
    pub const ALL: [Affected; 3] = [Affected::Subject, Affected::User, Affected::Society];

    pub fn as_str(self) -> &'static str {
        match self {
            Affected::Subject => "subject",
            Affected::User => "user",
            Affected::Society => "society",
        }
    }
}

/// The ten filter categories of the atlas, in their fixed display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    PublicSector,
    LawEnforcement,
    Commerce,
    Health,
    Children,
    GeneralPublic,
    Workers,
    CriticalInfrastructure,
    Entertainment,
    Daily,
}

impl Category {
    pub const COUNT: usize = 10;

    pub const ALL: [Category; Category::COUNT] = [
        Category::PublicSector,
        Category::LawEnforcement,
        Category::Commerce,
        Category::Health,
        Category::Children,
        Category::GeneralPublic,
        Category::Workers,
        Category::CriticalInfrastructure,
        Category::Entertainment,
        Category::Daily,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::PublicSector => "application-area:public-sector",
            Category::LawEnforcement => "application-area:law-enforcement",
            Category::Commerce => "application-area:commerce",
            Category::Health => "application-area:health",
            Category::Children => "subject:children",
            Category::GeneralPublic => "subject:general-public",
            Category::Workers => "subject:workers",
            Category::CriticalInfrastructure => "impact:critical-infrastructure",
            Category::Entertainment => "impact:entertainment",
            Category::Daily => "use:daily",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Default palette colour for the dot map.
    pub fn default_color(self) -> &'static str {
        match self {
            Category::PublicSector => "#1f77b4",
            Category::LawEnforcement => "#d62728",
            Category::Commerce => "#ff7f0e",
            Category::Health => "#2ca02c",
            Category::Children => "#e377c2",
            Category::GeneralPublic => "#9467bd",
            Category::Workers => "#8c564b",
            Category::CriticalInfrastructure => "#7f7f7f",
            Category::Entertainment => "#bcbd22",
            Category::Daily => "#17becf",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// Ten boolean category flags. Serialized as the list of set flags, always in
/// `Category::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CategorySet([bool; Category::COUNT]);

impl CategorySet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, category: Category) -> bool {
        self.0[category.index()]
    }

    pub fn set(&mut self, category: Category, value: bool) {
        self.0[category.index()] = value;
    }

    pub fn with(mut self, category: Category) -> Self {
        self.set(category, true);
        self
    }

    pub fn flags(&self) -> [bool; Category::COUNT] {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Category> + '_ {
        Category::ALL.into_iter().filter(|c| self.contains(*c))
    }
}

impl Serialize for CategorySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(Category::as_str))
    }
}

impl<'de> Deserialize<'de> for CategorySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        let mut set = CategorySet::empty();
        for name in names {
            let category = name.parse::<Category>().map_err(serde::de::Error::custom)?;
            set.set(category, true);
        }
        Ok(set)
    }
}

/// One AI use in the five-component format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UseCase {
    pub id: String,
    pub purpose: String,
    pub capability: String,
    pub ai_user: String,
    pub ai_subject: String,
    pub domain: String,
    pub short_description: String,
    pub long_description: String,
    pub daily: bool,
    pub implementation_potential: ImplementationPotential,
    pub risk_level: RiskLevel,
    pub categories: CategorySet,
    #[serde(default)]
    pub source_incident_ids: BTreeSet<u64>,
}

/// Builds the stable id of a use from its five components.
///
/// Components are trimmed and lowercased, joined with a unit separator and
/// hashed; the id is `use-` plus the first 16 hex digits of the SHA-256.
pub fn derive_use_id(
    purpose: &str,
    capability: &str,
    ai_user: &str,
    ai_subject: &str,
    domain: &str,
) -> String {
    let joined = [purpose, capability, ai_user, ai_subject, domain]
        .iter()
        .map(|c| c.trim().to_lowercase())
        .collect::<Vec<_>>()
        .join("\u{1f}");
    let digest = Sha256::digest(joined.as_bytes());
    let mut id = String::from("use-");
    for byte in &digest[..8] {
        id.push_str(&format!("{byte:02x}"));
    }
    id
}

impl UseCase {
    /// Creates a use with a derived id, default potential `Existing`,
    /// provisional risk `LimitedLow` and no categories.
    pub fn new(
        purpose: impl Into<String>,
        capability: impl Into<String>,
        ai_user: impl Into<String>,
        ai_subject: impl Into<String>,
        domain: impl Into<String>,
        short_description: impl Into<String>,
    ) -> Self {
        let purpose = purpose.into();
        let capability = capability.into();
        let ai_user = ai_user.into();
        let ai_subject = ai_subject.into();
        let domain = domain.into();
        let short_description = short_description.into();
        let id = derive_use_id(&purpose, &capability, &ai_user, &ai_subject, &domain);
        UseCase {
            id,
            long_description: short_description.clone(),
            purpose,
            capability,
            ai_user,
            ai_subject,
            domain,
            short_description,
            daily: false,
            implementation_potential: ImplementationPotential::Existing,
            risk_level: RiskLevel::LimitedLow,
            categories: CategorySet::empty(),
            source_incident_ids: BTreeSet::new(),
        }
    }

    pub fn expected_id(&self) -> String {
        derive_use_id(&self.purpose, &self.capability, &self.ai_user, &self.ai_subject, &self.domain)
    }

    /// The five components in canonical order, labelled.
    pub fn components(&self) -> [(&'static str, &str); 5] {
        [
            ("purpose", &self.purpose),
            ("capability", &self.capability),
            ("ai_user", &self.ai_user),
            ("ai_subject", &self.ai_subject),
            ("domain", &self.domain),
        ]
    }

    /// "purpose | capability | ai_user | ai_subject | domain"
    pub fn component_text(&self) -> String {
        self.components().iter().map(|(_, v)| *v).collect::<Vec<_>>().join(" | ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentItem {
    pub text: String,
    pub layer: SocioTechnicalLayer,
    pub affected: BTreeSet<Affected>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mitigation {
    pub text: String,
    pub layer: SocioTechnicalLayer,
}

/// Impact assessment for one use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactCard {
    pub use_id: String,
    pub risks: Vec<AssessmentItem>,
    pub benefits: Vec<AssessmentItem>,
    pub mitigations: Vec<Mitigation>,
    pub mitigated_description: String,
    pub mitigated_risk_level: RiskLevel,
    pub risk_reasoning: String,
    pub illustration_prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illustration_ref: Option<String>,
}

impl ImpactCard {
    /// Risks grouped by layer, in layer order, preserving item order.
    pub fn risks_by_layer(&self) -> BTreeMap<SocioTechnicalLayer, Vec<&AssessmentItem>> {
        group_by_layer(&self.risks)
    }

    pub fn benefits_by_layer(&self) -> BTreeMap<SocioTechnicalLayer, Vec<&AssessmentItem>> {
        group_by_layer(&self.benefits)
    }
}

fn group_by_layer(items: &[AssessmentItem]) -> BTreeMap<SocioTechnicalLayer, Vec<&AssessmentItem>> {
    let mut groups: BTreeMap<_, Vec<_>> =
        SocioTechnicalLayer::ALL.into_iter().map(|l| (l, Vec::new())).collect();
    for item in items {
        groups.entry(item.layer).or_default().push(item);
    }
    groups
}

/// A point of the dot map, normally in `[0, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    /// Rounds both axes to the six decimals kept by the atlas file.
    pub fn quantized(self) -> Self {
        Coord { x: quantize(self.x), y: quantize(self.y) }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

pub(crate) fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// The atlas interchange container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasDataset {
    pub schema_version: u32,
    pub technology: String,
    pub uses: Vec<UseCase>,
    pub cards: Vec<ImpactCard>,
    #[serde(default)]
    pub coords: BTreeMap<String, Coord>,
    #[serde(default)]
    pub split_coords: BTreeMap<String, Coord>,
    #[serde(default)]
    pub palette: BTreeMap<String, String>,
}

impl AtlasDataset {
    pub fn new(technology: impl Into<String>) -> Self {
        AtlasDataset {
            schema_version: SCHEMA_VERSION,
            technology: technology.into(),
            uses: Vec::new(),
            cards: Vec::new(),
            coords: BTreeMap::new(),
            split_coords: BTreeMap::new(),
            palette: default_palette(),
        }
    }

    /// Sorts uses and cards by id so equal content serializes identically.
    pub fn sort(&mut self) {
        self.uses.sort_by(|a, b| a.id.cmp(&b.id));
        self.cards.sort_by(|a, b| a.use_id.cmp(&b.use_id));
    }

    pub fn use_by_id(&self, id: &str) -> Option<&UseCase> {
        self.uses.iter().find(|u| u.id == id)
    }

    pub fn card_for(&self, id: &str) -> Option<&ImpactCard> {
        self.cards.iter().find(|c| c.use_id == id)
    }
}

pub fn default_palette() -> BTreeMap<String, String> {
    Category::ALL
        .into_iter()
        .map(|c| (c.as_str().to_string(), c.default_color().to_string()))
        .collect()
}
