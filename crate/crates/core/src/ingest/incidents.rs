use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::IngestError;

/// One AI incident report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub incident_id: u64,
    pub title: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncidentFormat {
    Csv,
    Json,
}

impl IncidentFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(IncidentFormat::Csv),
            "json" => Some(IncidentFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for IncidentFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(IncidentFormat::Csv),
            "json" => Ok(IncidentFormat::Json),
            other => Err(format!("unknown incident format `{other}` (expected csv or json)")),
        }
    }
}

fn format_error(row: usize, message: impl Into<String>) -> IngestError {
    IngestError::Format { row, message: message.into() }
}

fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    let shape = b.len() == 10
        && b.iter().enumerate().all(|(i, c)| if i == 4 || i == 7 { *c == b'-' } else { c.is_ascii_digit() });
    shape && matches!((s[5..7].parse::<u32>(), s[8..10].parse::<u32>()), (Ok(1..=12), Ok(1..=31)))
}

fn build_record(row: usize, id: &str, title: &str, description: &str, date: Option<&str>) -> Result<IncidentRecord, IngestError> {
    let incident_id = id.trim().parse::<u64>().map_err(|_| format_error(row, format!("incident_id `{id}` is not a non-negative integer")))?;
    let description = description.trim();
    if description.is_empty() {
        return Err(format_error(row, "description is empty"));
    }
    let date = match date.map(str::trim).filter(|d| !d.is_empty()) {
        None => None,
        Some(d) if is_iso_date(d) => Some(d.to_string()),
        Some(d) => return Err(format_error(row, format!("date `{d}` is not YYYY-MM-DD"))),
    };
    Ok(IncidentRecord { incident_id, title: title.trim().to_string(), description: description.to_string(), date })
}

fn reject_duplicates(records: &[IncidentRecord]) -> Result<(), IngestError> {
    let mut first: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if let Some(prev) = first.insert(r.incident_id, i + 1) {
            return Err(IngestError::DuplicateId { id: r.incident_id, first_row: prev, row: i + 1 });
        }
    }
    Ok(())
}

/// Reads CSV with header `incident_id,title,description,date`. Rows are
/// numbered from 1, not counting the header.
pub fn parse_incidents_csv<R: Read>(reader: R) -> Result<Vec<IncidentRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(reader);
    let headers = rdr.headers().map_err(|e| format_error(0, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(title_col), Some(desc_col)) = (col("incident_id"), col("title"), col("description")) else {
        return Err(format_error(0, format!("header must be incident_id,title,description,date; got {}", headers.iter().collect::<Vec<_>>().join(","))));
    };
    let date_col = col("date");
    let mut records = Vec::new();
    for (i, result) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = result.map_err(|e| format_error(row, e.to_string()))?;
        let get = |c: usize| rec.get(c).unwrap_or("");
        records.push(build_record(row, get(id_col), get(title_col), get(desc_col), date_col.map(get))?);
    }
    reject_duplicates(&records)?;
    Ok(records)
}

/// Reads a JSON array of incident objects.
pub fn parse_incidents_json(text: &str) -> Result<Vec<IncidentRecord>, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| format_error(0, format!("invalid JSON at line {}: {e}", e.line())))?;
    let list = value.as_array().ok_or_else(|| format_error(0, "expected a JSON array of incidents"))?;
    let mut records = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let row = i + 1;
        let obj = item.as_object().ok_or_else(|| format_error(row, "not an object"))?;
        let id = match obj.get("incident_id") {
            Some(Value::Number(n)) => n.to_string(),
            Some(Value::String(s)) => s.clone(),
            _ => return Err(format_error(row, "incident_id missing")),
        };
        let text_field = |key: &str| -> Result<Option<&str>, IngestError> {
            match obj.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s)),
                Some(_) => Err(format_error(row, format!("{key} is not a string"))),
            }
        };
        records.push(build_record(
            row,
            &id,
            text_field("title")?.unwrap_or(""),
            text_field("description")?.unwrap_or(""),
            text_field("date")?,
        )?);
    }
    reject_duplicates(&records)?;
    Ok(records)
}

pub fn load_incidents(path: &Path, format: IncidentFormat) -> Result<Vec<IncidentRecord>, IngestError> {
    let io = |source| IngestError::Io { path: path.display().to_string(), source };
    match format {
        IncidentFormat::Csv => parse_incidents_csv(fs::File::open(path).map_err(io)?),
        IncidentFormat::Json => parse_incidents_json(&fs::read_to_string(path).map_err(io)?),
    }
}
