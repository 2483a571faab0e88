//! Response bodies shared by the HTTP API and the `query` subcommand.
//!
//! | path                              | body                                   |
//! |-----------------------------------|----------------------------------------|
//! | `/api/v1/citations/{doi}`         | `{"records":[...],"license":...}`      |
//! | `/api/v1/references/{doi}`        | `{"records":[...],"license":...}`      |
//! | `/api/v1/citation/{oci}`          | citation record plus `"license"`       |
//! | `/api/v1/citation-count/{doi}`    | `{"count":N,"license":...}`            |
//! | `/api/v1/metadata/{doi}`          | resource record plus `"license"`       |
//! | `/api/v1/stats`                   | `{"stats":{...},"license":...}`        |
//!
//! List endpoints switch to CSV with `format=csv`. Errors are
//! `{"error":"<Name>"}` with status 404 (400 for an unsupported format).

use serde::Serialize;
use serde_json::json;

use super::LoadedIndex;
use crate::identifiers::normalize_doi;
use crate::index::{write_csv_records, CitationRecord};
use crate::LICENSE;

pub const API_PREFIX: &str = "/api/v1/";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Citations(String),
    References(String),
    Citation(String),
    CitationCount(String),
    Metadata(String),
    Stats,
}

impl Endpoint {
    /// Matches a decoded request path. Identifiers take the whole remainder,
    /// slashes included.
    pub fn from_path(path: &str) -> Option<Endpoint> {
        let rest = path.strip_prefix(API_PREFIX)?;
        if rest == "stats" {
            return Some(Endpoint::Stats);
        }
        let (name, id) = rest.split_once('/')?;
        if id.is_empty() {
            return None;
        }
        let id = id.to_string();
        Some(match name {
            "citations" => Endpoint::Citations(id),
            "references" => Endpoint::References(id),
            "citation" => Endpoint::Citation(id),
            "citation-count" => Endpoint::CitationCount(id),
            "metadata" => Endpoint::Metadata(id),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseFormat {
    #[default]
    Json,
    Csv,
}

impl ResponseFormat {
    pub fn parse(value: Option<&str>) -> Option<ResponseFormat> {
        match value {
            None | Some("json") => Some(ResponseFormat::Json),
            Some("csv") => Some(ResponseFormat::Csv),
            Some(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

impl ApiResponse {
    fn json(status: u16, value: &impl Serialize) -> ApiResponse {
        ApiResponse {
            status,
            content_type: "application/json",
            body: serde_json::to_string(value).expect("serializable"),
        }
    }

    pub fn error(status: u16, name: &str) -> ApiResponse {
        ApiResponse::json(status, &json!({ "error": name }))
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Serialize)]
struct Records<'a> {
    records: &'a [CitationRecord],
    license: &'static str,
}

#[derive(Serialize)]
struct Count {
    count: usize,
    license: &'static str,
}

#[derive(Serialize)]
struct WithLicense<'a, T: Serialize> {
    #[serde(flatten)]
    inner: &'a T,
    license: &'static str,
}

fn list(records: Vec<CitationRecord>, format: ResponseFormat) -> ApiResponse {
    match format {
        ResponseFormat::Json => ApiResponse::json(200, &Records { records: &records, license: LICENSE }),
        ResponseFormat::Csv => {
            let mut body = Vec::new();
            write_csv_records(&records, &mut body).expect("writing to memory");
            ApiResponse {
                status: 200,
                content_type: "text/csv; charset=utf-8",
                body: String::from_utf8(body).expect("CSV of UTF-8 fields"),
            }
        }
    }
}

/// Computes the response for one request. Pure: the index is never modified.
pub fn respond(loaded: &LoadedIndex, endpoint: &Endpoint, format: ResponseFormat) -> ApiResponse {
    let index = &loaded.index;
    let doi = |raw: &str| normalize_doi(raw).map_err(|e| ApiResponse::error(404, e.name()));
    let result = match endpoint {
        Endpoint::Citations(raw) => doi(raw).map(|d| list(index.lookup_citations(&d), format)),
        Endpoint::References(raw) => doi(raw).map(|d| list(index.lookup_references(&d), format)),
        Endpoint::CitationCount(raw) => {
            doi(raw).map(|d| ApiResponse::json(200, &Count { count: index.citation_count(&d), license: LICENSE }))
        }
        Endpoint::Citation(raw) => index
            .lookup_by_oci_str(raw)
            .map(|r| ApiResponse::json(200, &WithLicense { inner: &r, license: LICENSE }))
            .map_err(|e| ApiResponse::error(404, e.name())),
        Endpoint::Metadata(raw) => doi(raw).and_then(|d| match index.resource(&d) {
            Some(r) => Ok(ApiResponse::json(200, &WithLicense { inner: r, license: LICENSE })),
            None => Err(ApiResponse::error(404, "UnknownDoi")),
        }),
        Endpoint::Stats => Ok(ApiResponse::json(200, &json!({ "stats": loaded.stats, "license": LICENSE }))),
    };
    result.unwrap_or_else(|e| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::ingestion::ingest_stream;

    fn loaded() -> LoadedIndex {
        let (resources, _) = ingest_stream(
            "{\"doi\":\"10.1/a\",\"date\":\"2020\",\"references\":[\"10.1/b\"]}\n{\"doi\":\"10.1/b\",\"date\":\"2018\",\"title\":\"B\"}\n"
                .as_bytes(),
        )
        .unwrap();
        LoadedIndex::from_index(build_index(resources).unwrap())
    }

    fn get(path: &str) -> ApiResponse {
        respond(&loaded(), &Endpoint::from_path(path).unwrap(), ResponseFormat::Json)
    }

    #[test]
    fn routes() {
        assert_eq!(Endpoint::from_path("/api/v1/citations/10.1/b"), Some(Endpoint::Citations("10.1/b".into())));
        assert_eq!(
            Endpoint::from_path("/api/v1/citation-count/10.1/b/c"),
            Some(Endpoint::CitationCount("10.1/b/c".into()))
        );
        assert_eq!(Endpoint::from_path("/api/v1/stats"), Some(Endpoint::Stats));
        assert_eq!(Endpoint::from_path("/api/v1/citations/"), None);
        assert_eq!(Endpoint::from_path("/api/v1/nope/10.1/b"), None);
        assert_eq!(Endpoint::from_path("/api/v2/stats"), None);
    }

    #[test]
    fn count() {
        let r = get("/api/v1/citation-count/10.1/b");
        assert_eq!((r.status, r.body.as_str()), (200, r#"{"count":1,"license":"CC0-1.0"}"#));
        let r = get("/api/v1/citation-count/10.9/zz");
        assert_eq!(r.body, r#"{"count":0,"license":"CC0-1.0"}"#);
    }

    #[test]
    fn citation_by_oci() {
        let r = get("/api/v1/citation/oci:020010036013910-020010036013911");
        assert_eq!(r.status, 200);
        let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["citing"], "10.1/a");
        assert_eq!(v["timespan"], "P2Y");
        assert_eq!(v["license"], "CC0-1.0");
        let r = get("/api/v1/citation/oci:zz");
        assert_eq!((r.status, r.body.as_str()), (404, r#"{"error":"MalformedOci"}"#));
        let r = get("/api/v1/citation/oci:020010036013911-020010036013910");
        assert_eq!((r.status, r.body.as_str()), (404, r#"{"error":"UnknownOci"}"#));
    }

    #[test]
    fn lists() {
        let r = get("/api/v1/citations/10.1/b");
        let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 1);
        let r = get("/api/v1/references/10.1/b");
        assert_eq!(r.body, r#"{"records":[],"license":"CC0-1.0"}"#);
        let r = get("/api/v1/citations/nonsense");
        assert_eq!((r.status, r.body.as_str()), (404, r#"{"error":"InvalidDoi"}"#));
        let csv = respond(&loaded(), &Endpoint::Citations("10.1/B".into()), ResponseFormat::Csv);
        assert!(csv.body.starts_with("# license: CC0-1.0\noci,citing,cited,"));
        assert_eq!(csv.body.lines().count(), 3);
    }

    #[test]
    fn metadata_and_stats() {
        let r = get("/api/v1/metadata/10.1/b");
        let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["title"], "B");
        assert_eq!(v["license"], "CC0-1.0");
        assert_eq!(get("/api/v1/metadata/10.1/zz").body, r#"{"error":"UnknownDoi"}"#);
        let v: serde_json::Value = serde_json::from_str(&get("/api/v1/stats").body).unwrap();
        assert_eq!(v["stats"]["citation_links"], 1);
        assert_eq!(v["license"], "CC0-1.0");
    }
}
