use super::MetricsError;

/// One completed System Usability Scale questionnaire.
///
/// Items are 1-based in the questionnaire; odd items are positively worded,
/// even items negatively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SusResponse {
    items: [u8; 10],
}

impl SusResponse {
    pub fn new(items: [u8; 10]) -> Result<Self, MetricsError> {
        if let Some(i) = items.iter().position(|v| !(1..=5).contains(v)) {
            return Err(MetricsError::OutOfRange { item: i + 1, value: f64::from(items[i]) });
        }
        Ok(SusResponse { items })
    }

    pub fn from_slice(items: &[u8]) -> Result<Self, MetricsError> {
        let items: [u8; 10] = items.try_into().map_err(|_| MetricsError::SusLength(items.len()))?;
        Self::new(items)
    }

    pub fn items(&self) -> [u8; 10] {
        self.items
    }
}

/// Score in `[0, 100]`.
pub fn sus_score(r: &SusResponse) -> f64 {
    let raw: u32 = r
        .items
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = u32::from(x);
            // index 0 is questionnaire item 1 (odd)
            if i % 2 == 0 {
                x - 1
            } else {
                5 - x
            }
        })
        .sum();
    f64::from(raw) * 2.5
}

/// Per-participant aesthetics ratings, grouped by facet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AestheticsResponse {
    pub classic: Vec<f64>,
    pub expressive: Vec<f64>,
    pub pleasurable: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AestheticsMeans {
    pub classic: f64,
    pub expressive: f64,
    pub pleasurable: f64,
}

/// Mean facet score across participants, each participant's facet score
/// being the mean of their items in that facet.
pub fn aesthetics_means(responses: &[AestheticsResponse]) -> Result<AestheticsMeans, MetricsError> {
    fn facet(responses: &[AestheticsResponse], name: &'static str, get: fn(&AestheticsResponse) -> &[f64]) -> Result<f64, MetricsError> {
        if responses.is_empty() {
            return Err(MetricsError::EmptyGroup(name));
        }
        let mut total = 0.0;
        for r in responses {
            let items = get(r);
            if items.is_empty() {
                return Err(MetricsError::EmptyGroup(name));
            }
            total += items.iter().sum::<f64>() / items.len() as f64;
        }
        Ok(total / responses.len() as f64)
    }
    Ok(AestheticsMeans {
        classic: facet(responses, "classic", |r| &r.classic)?,
        expressive: facet(responses, "expressive", |r| &r.expressive)?,
        pleasurable: facet(responses, "pleasurable", |r| &r.pleasurable)?,
    })
}
