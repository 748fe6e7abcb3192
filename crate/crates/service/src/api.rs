use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use atlas_forge_core::model::{to_canonical_string, Affected, AssessmentItem, AtlasDataset, Category, Coord, RiskLevel, SocioTechnicalLayer, UseCase};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;
use tower_http::services::ServeDir;

type Shared = Arc<AtlasDataset>;

const PLACEHOLDER_INDEX: &str = "<!doctype html>
<html lang=\"en\">
<head><meta charset=\"utf-8\"><title>atlas-forge</title></head>
<body>
<p>No UI bundle configured. The data is available at
<a href=\"/api/meta\">/api/meta</a> and <a href=\"/api/uses\">/api/uses</a>.</p>
</body>
</html>
";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown risk level `{0}`")]
    UnknownRisk(String),
}

/// Query string of `/api/uses`. Empty values count as absent.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct UseFilter {
    pub category: Option<String>,
    pub q: Option<String>,
    pub risk: Option<String>,
}

struct Compiled {
    category: Option<Category>,
    needle: Option<String>,
    risk: Option<RiskLevel>,
}

fn present(v: &Option<String>) -> Option<&str> {
    v.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

impl UseFilter {
    fn compile(&self) -> Result<Compiled, FilterError> {
        let category = present(&self.category)
            .map(|c| c.parse::<Category>().map_err(|_| FilterError::UnknownCategory(c.to_string())))
            .transpose()?;
        let risk = present(&self.risk)
            .map(|r| r.parse::<RiskLevel>().map_err(|_| FilterError::UnknownRisk(r.to_string())))
            .transpose()?;
        Ok(Compiled { category, needle: present(&self.q).map(str::to_lowercase), risk })
    }
}

impl Compiled {
    fn matches(&self, u: &UseCase) -> bool {
        if self.category.is_some_and(|c| !u.categories.contains(c)) {
            return false;
        }
        if self.risk.is_some_and(|r| u.risk_level != r) {
            return false;
        }
        match &self.needle {
            None => true,
            Some(n) => [u.short_description.as_str(), u.long_description.as_str()]
                .into_iter()
                .chain(u.components().into_iter().map(|(_, v)| v))
                .any(|s| s.to_lowercase().contains(n.as_str())),
        }
    }
}

fn coord_value(map: &BTreeMap<String, Coord>, id: &str) -> Value {
    map.get(id).map_or(Value::Null, |c| json!({ "x": c.x, "y": c.y }))
}

fn summary(d: &AtlasDataset, u: &UseCase) -> Value {
    json!({
        "id": u.id,
        "purpose": u.purpose,
        "capability": u.capability,
        "ai_user": u.ai_user,
        "ai_subject": u.ai_subject,
        "domain": u.domain,
        "short_description": u.short_description,
        "risk_level": u.risk_level,
        "implementation_potential": u.implementation_potential,
        "daily": u.daily,
        "categories": u.categories,
        "coords": coord_value(&d.coords, &u.id),
        "split_coords": coord_value(&d.split_coords, &u.id),
    })
}

pub fn meta_body(d: &AtlasDataset) -> Value {
    let categories: Vec<Value> = Category::ALL
        .into_iter()
        .map(|c| {
            let color = d.palette.get(c.as_str()).map_or(c.default_color(), String::as_str);
            let count = d.uses.iter().filter(|u| u.categories.contains(c)).count();
            json!({ "name": c.as_str(), "color": color, "use_count": count })
        })
        .collect();
    json!({
        "schema_version": d.schema_version,
        "technology": d.technology,
        "use_count": d.uses.len(),
        "categories": categories,
    })
}

/// Filtered summaries in id order.
pub fn uses_body(d: &AtlasDataset, filter: &UseFilter) -> Result<Value, FilterError> {
    let f = filter.compile()?;
    let mut matched: Vec<&UseCase> = d.uses.iter().filter(|u| f.matches(u)).collect();
    matched.sort_by(|a, b| a.id.cmp(&b.id));
    let uses: Vec<Value> = matched.into_iter().map(|u| summary(d, u)).collect();
    Ok(json!({ "count": uses.len(), "uses": uses }))
}

fn item_value(item: &AssessmentItem) -> Value {
    let mut affected = Map::new();
    for a in Affected::ALL {
        affected.insert(a.as_str().to_string(), Value::Bool(item.affected.contains(&a)));
    }
    let mut v = json!({ "text": item.text, "affected": affected });
    if let Some(basis) = &item.basis {
        v["basis"] = json!(basis);
    }
    v
}

fn by_layer(items: &[AssessmentItem]) -> Value {
    let mut out = Map::new();
    for layer in SocioTechnicalLayer::ALL {
        let group: Vec<Value> = items.iter().filter(|i| i.layer == layer).map(item_value).collect();
        out.insert(layer.as_str().to_string(), Value::Array(group));
    }
    Value::Object(out)
}

/// Full profile of one use, or `None` for an unknown id.
pub fn use_detail_body(d: &AtlasDataset, id: &str) -> Option<Value> {
    let u = d.use_by_id(id)?;
    let card = d.card_for(id).map(|c| {
        let mut mitigations = Map::new();
        for layer in SocioTechnicalLayer::ALL {
            let group: Vec<&str> = c.mitigations.iter().filter(|m| m.layer == layer).map(|m| m.text.as_str()).collect();
            mitigations.insert(layer.as_str().to_string(), json!(group));
        }
        let mut v = json!({
            "risks": by_layer(&c.risks),
            "benefits": by_layer(&c.benefits),
            "mitigations": mitigations,
            "mitigated_description": c.mitigated_description,
            "mitigated_risk_level": c.mitigated_risk_level,
            "risk_reasoning": c.risk_reasoning,
            "illustration_prompt": c.illustration_prompt,
        });
        if let Some(r) = &c.illustration_ref {
            v["illustration_ref"] = json!(r);
        }
        v
    });
    Some(json!({
        "use": u,
        "card": card,
        "coords": coord_value(&d.coords, id),
        "split_coords": coord_value(&d.split_coords, id),
    }))
}

fn json_response(status: StatusCode, body: &Value) -> Response {
    let text = to_canonical_string(body).expect("JSON values always serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn error_response(status: StatusCode, message: String) -> Response {
    json_response(status, &json!({ "error": message }))
}

async fn meta(State(d): State<Shared>) -> Response {
    json_response(StatusCode::OK, &meta_body(&d))
}

async fn uses(State(d): State<Shared>, Query(filter): Query<UseFilter>) -> Response {
    match uses_body(&d, &filter) {
        Ok(body) => json_response(StatusCode::OK, &body),
        Err(e) => error_response(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn use_detail(State(d): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    match use_detail_body(&d, &id) {
        Some(body) => json_response(StatusCode::OK, &body),
        None => error_response(StatusCode::NOT_FOUND, format!("no use with id `{id}`")),
    }
}

async fn api_not_found() -> Response {
    error_response(StatusCode::NOT_FOUND, "no such endpoint".to_string())
}

pub(crate) fn routes(dataset: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/meta", get(meta))
        .route("/uses", get(uses))
        .route("/uses/{id}", get(use_detail))
        .fallback(api_not_found)
        .with_state(dataset);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    }
}
