//! Domain types, validation, category rules and the atlas file format.

mod categories;
mod codec;
mod stats;
mod types;
mod validate;

pub use categories::{assign_categories, FlagField, Predicate, Rule, RuleError, RuleTable, TextField};
pub use codec::{parse_atlas, serialize_atlas, to_canonical_string, CodecError};
pub use stats::{dataset_stats, DatasetStats};
pub use types::*;
pub use validate::{validate_card, validate_dataset, validate_use, ValidationReport, Violation};
