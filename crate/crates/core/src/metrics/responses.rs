//! Study responses file and the `eval` report.
//!
//! The responses CSV has the header `participant,instrument,item,value`, one
//! answer per row:
//!
//! | instrument              | participant | item              | value          |
//! |-------------------------|-------------|-------------------|----------------|
//! | `sus`                   | respondent  | 1..=10            | 1..=5          |
//! | `aesthetics:classic`    | respondent  | item label        | rating         |
//! | `aesthetics:expressive` | respondent  | item label        | rating         |
//! | `aesthetics:pleasurable`| respondent  | item label        | rating         |
//! | `rating:<set>`          | rater       | rated subject id  | score          |
//! | `annotation:<set>`      | rater       | annotated item id | 1/0, yes/no    |
//!
//! `rating` rows of one set must form a complete subjects x raters table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use serde::Deserialize;

use super::agreement::{correctness_rate, icc, Annotation, RatingsMatrix};
use super::survey::{aesthetics_means, sus_score, AestheticsMeans, AestheticsResponse, SusResponse};
use super::MetricsError;

#[derive(Debug, Deserialize)]
struct Row {
    participant: String,
    instrument: String,
    item: String,
    value: String,
}

#[derive(Debug, Clone, Default)]
pub struct Responses {
    sus: BTreeMap<String, BTreeMap<usize, u8>>,
    aesthetics: BTreeMap<String, AestheticsResponse>,
    ratings: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
    annotations: BTreeMap<String, BTreeMap<String, Vec<Annotation>>>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "agree" => Some(true),
        "0" | "false" | "no" | "disagree" => Some(false),
        _ => None,
    }
}

impl Responses {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, MetricsError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut out = Responses::default();
        for (i, record) in csv.deserialize::<Row>().enumerate() {
            // header is line 1
            let line = i + 2;
            let bad = |message: String| MetricsError::Csv { line, message };
            let row = record.map_err(|e| bad(e.to_string()))?;
            let number = || row.value.parse::<f64>().map_err(|_| bad(format!("value `{}` is not a number", row.value)));
            let (kind, set) = row.instrument.split_once(':').unwrap_or((row.instrument.as_str(), ""));
            match (kind, set) {
                ("sus", "") => {
                    let item: usize = row.item.parse().ok().filter(|i| (1..=10).contains(i)).ok_or_else(|| bad(format!("sus item `{}` not in 1..=10", row.item)))?;
                    let value: u8 = row.value.parse().ok().filter(|v| (1..=5).contains(v)).ok_or_else(|| bad(format!("sus value `{}` not in 1..=5", row.value)))?;
                    if out.sus.entry(row.participant.clone()).or_default().insert(item, value).is_some() {
                        return Err(bad(format!("duplicate sus item {item} for {}", row.participant)));
                    }
                }
                ("aesthetics", facet) => {
                    let v = number()?;
                    let entry = out.aesthetics.entry(row.participant.clone()).or_default();
                    match facet {
                        "classic" => entry.classic.push(v),
                        "expressive" => entry.expressive.push(v),
                        "pleasurable" => entry.pleasurable.push(v),
                        other => return Err(bad(format!("unknown aesthetics facet `{other}`"))),
                    }
                }
                ("rating", set) if !set.is_empty() => {
                    let v = number()?;
                    let cell = out.ratings.entry(set.to_string()).or_default().entry(row.item.clone()).or_default();
                    if cell.insert(row.participant.clone(), v).is_some() {
                        return Err(bad(format!("duplicate rating of `{}` by `{}`", row.item, row.participant)));
                    }
                }
                ("annotation", set) if !set.is_empty() => {
                    let agree = parse_bool(&row.value).ok_or_else(|| bad(format!("annotation value `{}` is not yes/no", row.value)))?;
                    out.annotations
                        .entry(set.to_string())
                        .or_default()
                        .entry(row.item.clone())
                        .or_default()
                        .push(Annotation::new(row.participant.clone(), agree));
                }
                _ => return Err(bad(format!("unknown instrument `{}`", row.instrument))),
            }
        }
        Ok(out)
    }

    pub fn sus_responses(&self) -> Result<Vec<SusResponse>, MetricsError> {
        self.sus
            .iter()
            .map(|(who, items)| {
                if items.len() != 10 {
                    return Err(MetricsError::Incomplete(format!("participant `{who}` answered {} of 10 SUS items", items.len())));
                }
                SusResponse::from_slice(&items.values().copied().collect::<Vec<_>>())
            })
            .collect()
    }

    /// Ratings of one set as a subjects x raters matrix, rows and columns
    /// sorted by id.
    pub fn ratings_matrix(&self, set: &str) -> Result<RatingsMatrix, MetricsError> {
        let by_subject = self.ratings.get(set).ok_or_else(|| MetricsError::Incomplete(format!("no ratings for `{set}`")))?;
        let raters: BTreeSet<&String> = by_subject.values().flat_map(|r| r.keys()).collect();
        let mut rows = Vec::with_capacity(by_subject.len());
        for (subject, cells) in by_subject {
            let mut row = Vec::with_capacity(raters.len());
            for rater in &raters {
                let v = cells
                    .get(*rater)
                    .ok_or_else(|| MetricsError::Incomplete(format!("`{set}`: `{rater}` did not rate `{subject}`")))?;
                row.push(*v);
            }
            rows.push(row);
        }
        RatingsMatrix::new(rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IccLine {
    pub set: String,
    pub subjects: usize,
    pub raters: usize,
    pub icc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectnessLine {
    pub set: String,
    pub items: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub sus: Option<(usize, f64)>,
    pub aesthetics: Option<(usize, AestheticsMeans)>,
    pub icc: Vec<IccLine>,
    pub correctness: Vec<CorrectnessLine>,
}

pub fn evaluate(responses: &Responses) -> Result<EvalReport, MetricsError> {
    let mut report = EvalReport::default();
    let sus = responses.sus_responses()?;
    if !sus.is_empty() {
        let mean = sus.iter().map(sus_score).sum::<f64>() / sus.len() as f64;
        report.sus = Some((sus.len(), mean));
    }
    if !responses.aesthetics.is_empty() {
        let groups: Vec<AestheticsResponse> = responses.aesthetics.values().cloned().collect();
        report.aesthetics = Some((groups.len(), aesthetics_means(&groups)?));
    }
    for set in responses.ratings.keys() {
        let m = responses.ratings_matrix(set)?;
        report.icc.push(IccLine { set: set.clone(), subjects: m.subjects(), raters: m.raters(), icc: icc(&m)? });
    }
    for (set, items) in &responses.annotations {
        let items: Vec<Vec<Annotation>> = items.values().cloned().collect();
        report.correctness.push(CorrectnessLine { set: set.clone(), items: items.len(), rate: correctness_rate(&items)? });
    }
    Ok(report)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((n, mean)) = self.sus {
            writeln!(f, "sus: participants={n} mean={mean:.2}")?;
        }
        if let Some((n, m)) = self.aesthetics {
            writeln!(
                f,
                "aesthetics: participants={n} classic={:.2} expressive={:.2} pleasurable={:.2}",
                m.classic, m.expressive, m.pleasurable
            )?;
        }
        for line in &self.icc {
            writeln!(f, "icc[{}]: subjects={} raters={} icc2_1={:.4}", line.set, line.subjects, line.raters, line.icc)?;
        }
        for line in &self.correctness {
            writeln!(f, "correct[{}]: items={} rate={:.2}%", line.set, line.items, line.rate)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "participant,instrument,item,value
p1,sus,1,4
p1,sus,2,2
p1,sus,3,4
p1,sus,4,2
p1,sus,5,4
p1,sus,6,2
p1,sus,7,4
p1,sus,8,2
p1,sus,9,4
p1,sus,10,2
p1,aesthetics:classic,c1,3
p1,aesthetics:expressive,e1,3
p1,aesthetics:pleasurable,l1,3
p2,aesthetics:classic,c1,5
p2,aesthetics:expressive,e1,5
p2,aesthetics:pleasurable,l1,5
r1,rating:risks,u1,1
r2,rating:risks,u1,1
r1,rating:risks,u2,2
r2,rating:risks,u2,2
r1,annotation:risks,u1,yes
r2,annotation:risks,u1,yes
r3,annotation:risks,u1,no
r1,annotation:risks,u2,no
";

    #[test]
    fn report_is_stable() {
        let r = Responses::from_reader(SAMPLE.as_bytes()).unwrap();
        let report = evaluate(&r).unwrap();
        assert_eq!(
            report.to_string(),
            "sus: participants=1 mean=75.00\n\
             aesthetics: participants=2 classic=4.00 expressive=4.00 pleasurable=4.00\n\
             icc[risks]: subjects=2 raters=2 icc2_1=1.0000\n\
             correct[risks]: items=2 rate=50.00%\n"
        );
    }

    #[test]
    fn bad_rows_name_their_line() {
        let text = "participant,instrument,item,value\np1,sus,1,4\np1,sus,2,9\n";
        let err = Responses::from_reader(text.as_bytes()).unwrap_err();
        assert!(matches!(err, MetricsError::Csv { line: 3, .. }), "{err}");
        let text = "participant,instrument,item,value\np1,mood,1,4\n";
        assert!(matches!(Responses::from_reader(text.as_bytes()), Err(MetricsError::Csv { line: 2, .. })));
    }

    #[test]
    fn incomplete_tables_are_reported() {
        let text = "participant,instrument,item,value\nr1,rating:x,u1,1\nr2,rating:x,u1,2\nr1,rating:x,u2,3\n";
        let r = Responses::from_reader(text.as_bytes()).unwrap();
        assert!(matches!(evaluate(&r), Err(MetricsError::Incomplete(_))));
        let text = "participant,instrument,item,value\np1,sus,1,4\n";
        let r = Responses::from_reader(text.as_bytes()).unwrap();
        assert!(matches!(evaluate(&r), Err(MetricsError::Incomplete(_))));
    }
}
