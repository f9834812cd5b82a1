//! Request/response API over an [`Engine`].
//!
//! [`Service::dispatch`] is transport-agnostic; [`serve`] mounts it on an
//! HTTP listener. Bodies are JSON except the proposal feed (RSS 1.0) and the
//! corpus snapshot (RDF/XML). Errors are `{"error": {"code", "message"}}`.
//!
//! | method | path                         | body / query                        |
//! |--------|------------------------------|-------------------------------------|
//! | GET    | `/tree`                      |                                     |
//! | GET    | `/node/{code}`               |                                     |
//! | GET    | `/node/{code}/metaqueries`   |                                     |
//! | GET    | `/search`                    | `q`, `lang` (en default), `limit`   |
//! | GET    | `/articles/{key}`            | key may contain `/`                 |
//! | GET    | `/proposals`, `/proposals/{id}` |                                  |
//! | POST   | `/proposals`                 | `{node, text, kind, proposer}`      |
//! | POST   | `/proposals/{id}/votes`      | `{member, verdict}`                 |
//! | GET    | `/feeds/proposals`           |                                     |
//! | GET    | `/snapshot`                  |                                     |
//! | POST   | `/ingest`                    | `format`, `promote`, `operator`     |

use std::sync::{Arc, RwLock};

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::Format;
use crate::engine::Engine;
use crate::error::Error;
use crate::lexicon::{ProposalKind, Verdict};
use crate::textproc::Language;

pub const JSON: &str = "application/json; charset=utf-8";
pub const RSS: &str = "application/rss+xml; charset=utf-8";
pub const RDF: &str = "application/rdf+xml; charset=utf-8";
pub const OPERATOR_HEADER: &str = "x-ontonav-operator";
pub const DEFAULT_SEARCH_LIMIT: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApiRequest {
    pub method: String,
    /// Percent-encoded path, without the query string.
    pub path: String,
    /// Decoded query parameters in order.
    pub query: Vec<(String, String)>,
    pub content_type: Option<String>,
    /// Whether the caller presented the operator flag as a header.
    pub operator: bool,
    pub body: Vec<u8>,
}

impl ApiRequest {
    /// Build a request from a method and a target such as `/search?q=a+b`.
    pub fn new(method: &str, target: &str) -> Self {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        ApiRequest {
            method: method.to_ascii_uppercase(),
            path: path.to_string(),
            query: parse_query(query),
            ..ApiRequest::default()
        }
    }

    pub fn get(target: &str) -> Self {
        ApiRequest::new("GET", target)
    }

    pub fn post_json(target: &str, body: &Value) -> Self {
        ApiRequest {
            content_type: Some(JSON.to_string()),
            body: body.to_string().into_bytes(),
            ..ApiRequest::new("POST", target)
        }
    }

    pub fn with_body(mut self, content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        self.content_type = Some(content_type.to_string());
        self.body = body.into();
        self
    }

    pub fn param(&self, name: &str) -> Option<&str> {
        self.query.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn flag(&self, name: &str) -> bool {
        matches!(self.param(name), Some("true" | "1" | "yes"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiResponse {
    pub status: u16,
    pub content_type: String,
    pub body: String,
}

impl ApiResponse {
    fn json(status: u16, value: &impl Serialize) -> Self {
        ApiResponse {
            status,
            content_type: JSON.to_string(),
            body: serde_json::to_string(value).expect("response serializes"),
        }
    }

    fn text(content_type: &str, body: String) -> Self {
        ApiResponse {
            status: 200,
            content_type: content_type.to_string(),
            body,
        }
    }

    pub fn error(status: u16, code: &str, message: impl Into<String>) -> Self {
        ApiResponse::json(status, &json!({"error": {"code": code, "message": message.into()}}))
    }

    fn from_error(e: &Error) -> Self {
        ApiResponse::error(status_of(e), e.code(), e.to_string())
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// The body as JSON; XML bodies yield an error.
    pub fn json_body(&self) -> serde_json::Result<Value> {
        serde_json::from_str(&self.body)
    }
}

pub fn status_of(e: &Error) -> u16 {
    match e {
        Error::NotFound { .. } => 404,
        Error::Conflict(_) => 409,
        Error::Io(_) | Error::Translation(_) => 500,
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::Rejected(_)
        | Error::Unanalyzable(_)
        | Error::NoQueryableTerms(_)
        | Error::Config(_)
        | Error::Precondition(_)
        | Error::Json(_) => 400,
    }
}

fn parse_query(query: &str) -> Vec<(String, String)> {
    query
        .split('&')
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            (decode_component(k), decode_component(v))
        })
        .collect()
}

fn decode_component(s: &str) -> String {
    percent_decode_str(&s.replace('+', " "))
        .decode_utf8_lossy()
        .into_owned()
}

#[derive(Deserialize)]
struct ProposalBody {
    node: String,
    text: String,
    kind: ProposalKind,
    proposer: String,
}

#[derive(Deserialize)]
struct VoteBody {
    member: String,
    verdict: Verdict,
}

type Outcome = std::result::Result<ApiResponse, ApiResponse>;

fn fail(e: Error) -> ApiResponse {
    ApiResponse::from_error(&e)
}

/// Shared engine behind a reader/writer lock. Reads run concurrently;
/// mutations are applied one at a time and are never observed half-done.
#[derive(Debug)]
pub struct Service {
    engine: RwLock<Engine>,
}

impl Service {
    pub fn new(engine: Engine) -> Self {
        Service {
            engine: RwLock::new(engine),
        }
    }

    pub fn read<T>(&self, f: impl FnOnce(&Engine) -> T) -> T {
        f(&self.engine.read().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn write<T>(&self, f: impl FnOnce(&mut Engine) -> T) -> T {
        f(&mut self.engine.write().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn state_digest(&self) -> String {
        self.read(Engine::state_digest)
    }

    pub fn into_engine(self) -> Engine {
        self.engine.into_inner().unwrap_or_else(|p| p.into_inner())
    }

    pub fn dispatch(&self, req: &ApiRequest) -> ApiResponse {
        match self.route(req) {
            Ok(r) | Err(r) => r,
        }
    }

    fn route(&self, req: &ApiRequest) -> Outcome {
        let raw: Vec<&str> = req.path.split('/').filter(|s| !s.is_empty()).collect();
        let segs: Vec<String> = raw.iter().map(|s| decode_path(s)).collect();
        let segs: Vec<&str> = segs.iter().map(String::as_str).collect();
        let method = req.method.as_str();
        let allow = |methods: &[&str]| -> Result<(), ApiResponse> {
            if methods.contains(&method) {
                Ok(())
            } else {
                Err(ApiResponse::error(
                    405,
                    "method_not_allowed",
                    format!("{method} is not allowed on {}", req.path),
                ))
            }
        };
        match segs.as_slice() {
            ["tree"] => {
                allow(&["GET"])?;
                Ok(self.read(|e| ApiResponse::json(200, &e.tree())))
            }
            ["node", code] => {
                allow(&["GET"])?;
                self.read(|e| e.node_detail(code).map(|d| ApiResponse::json(200, &d)))
                    .map_err(fail)
            }
            ["node", code, "metaqueries"] => {
                allow(&["GET"])?;
                self.read(|e| {
                    let node = e.taxonomy().get(code)?.code.clone();
                    let terms = e.node_terms(code)?;
                    let metaqueries = e.node_metaqueries(code)?;
                    Ok(ApiResponse::json(
                        200,
                        &json!({"node": node, "terms": terms, "metaqueries": metaqueries}),
                    ))
                })
                .map_err(fail)
            }
            ["search"] => {
                allow(&["GET"])?;
                self.search(req)
            }
            ["articles", ..] if segs.len() > 1 => {
                allow(&["GET"])?;
                // Keys such as DBLP's contain slashes; rejoin the raw tail.
                let key = raw[1..].iter().map(|s| decode_path(s)).collect::<Vec<_>>().join("/");
                self.read(|e| e.article(&key).map(|a| ApiResponse::json(200, &a)))
                    .map_err(fail)
            }
            ["proposals"] => {
                allow(&["GET", "POST"])?;
                if method == "GET" {
                    return Ok(self.read(|e| ApiResponse::json(200, &e.proposals())));
                }
                let body: ProposalBody = json_body(req)?;
                self.write(|e| e.propose(&body.node, &body.text, body.kind, &body.proposer))
                    .map(|p| ApiResponse::json(201, &p))
                    .map_err(fail)
            }
            ["proposals", id] => {
                allow(&["GET"])?;
                let id = proposal_id(id)?;
                self.read(|e| e.proposal(id).map(|p| ApiResponse::json(200, &p)))
                    .map_err(fail)
            }
            ["proposals", id, "votes"] => {
                allow(&["POST"])?;
                let id = proposal_id(id)?;
                let body: VoteBody = json_body(req)?;
                self.write(|e| e.vote(id, &body.member, body.verdict))
                    .map(|p| ApiResponse::json(200, &p))
                    .map_err(fail)
            }
            ["feeds", "proposals"] => {
                allow(&["GET"])?;
                Ok(self.read(|e| ApiResponse::text(RSS, e.feed())))
            }
            ["snapshot"] => {
                allow(&["GET"])?;
                Ok(self.read(|e| ApiResponse::text(RDF, e.snapshot())))
            }
            ["ingest"] => {
                allow(&["POST"])?;
                self.ingest(req)
            }
            _ => Err(ApiResponse::error(
                404,
                "not_found",
                format!("no route for {}", req.path),
            )),
        }
    }

    fn search(&self, req: &ApiRequest) -> Outcome {
        let q = req
            .param("q")
            .ok_or_else(|| ApiResponse::error(400, "validation_error", "missing query parameter q"))?;
        let lang = match req.param("lang") {
            None => Language::En,
            Some(l) => l.parse::<Language>().map_err(fail)?,
        };
        let limit = match req.param("limit") {
            None => DEFAULT_SEARCH_LIMIT,
            Some(l) => l
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| ApiResponse::error(400, "validation_error", format!("bad limit {l:?}")))?,
        };
        self.read(|e| e.search(q, lang, limit).map(|r| ApiResponse::json(200, &r)))
            .map_err(fail)
    }

    fn ingest(&self, req: &ApiRequest) -> Outcome {
        if !(req.operator || req.flag("operator")) {
            return Err(ApiResponse::error(
                403,
                "forbidden",
                "corpus ingest requires the operator flag",
            ));
        }
        let (body, part_format) = match req.content_type.as_deref().and_then(multipart_boundary) {
            Some(boundary) => extract_upload(&req.body, &boundary)
                .ok_or_else(|| ApiResponse::error(400, "validation_error", "multipart body has no file part"))?,
            None => (req.body.clone(), None),
        };
        let format = match req.param("format").map(str::to_string).or(part_format) {
            None => Format::Bibtex,
            Some(f) => f.parse::<Format>().map_err(fail)?,
        };
        let promote = req.flag("promote");
        self.write(|e| e.ingest(&body, format, promote))
            .map(|o| ApiResponse::json(200, &o))
            .map_err(fail)
    }
}

fn decode_path(s: &str) -> String {
    percent_decode_str(s).decode_utf8_lossy().into_owned()
}

fn proposal_id(s: &str) -> Result<u64, ApiResponse> {
    s.parse()
        .map_err(|_| ApiResponse::error(400, "validation_error", format!("bad proposal id {s:?}")))
}

fn json_body<T: for<'de> Deserialize<'de>>(req: &ApiRequest) -> Result<T, ApiResponse> {
    serde_json::from_slice(&req.body).map_err(|e| fail(Error::Json(e)))
}

fn multipart_boundary(content_type: &str) -> Option<String> {
    let (mime, params) = content_type.split_once(';')?;
    if !mime.trim().eq_ignore_ascii_case("multipart/form-data") {
        return None;
    }
    params.split(';').find_map(|p| {
        let (k, v) = p.split_once('=')?;
        k.trim()
            .eq_ignore_ascii_case("boundary")
            .then(|| v.trim().trim_matches('"').to_string())
    })
}

fn find(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    haystack
        .get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|i| i + from)
}

/// The uploaded file from a form: the part named `file`, else the first part
/// with a filename. A text part named `format` is returned alongside.
fn extract_upload(body: &[u8], boundary: &str) -> Option<(Vec<u8>, Option<String>)> {
    let delim = format!("--{boundary}").into_bytes();
    let mut parts = Vec::new();
    let mut pos = find(body, &delim, 0)? + delim.len();
    while let Some(next) = find(body, &delim, pos) {
        let part = &body[pos..next];
        let part = part.strip_prefix(b"\r\n").unwrap_or(part);
        let part = part.strip_suffix(b"\r\n").unwrap_or(part);
        if let Some(split) = find(part, b"\r\n\r\n", 0) {
            let headers = String::from_utf8_lossy(&part[..split]).to_ascii_lowercase();
            parts.push((headers, part[split + 4..].to_vec()));
        }
        pos = next + delim.len();
        if body[pos..].starts_with(b"--") {
            break;
        }
    }
    let format = parts
        .iter()
        .find(|(h, _)| h.contains("name=\"format\""))
        .map(|(_, v)| String::from_utf8_lossy(v).trim().to_string());
    let file = parts
        .iter()
        .find(|(h, _)| h.contains("name=\"file\""))
        .or_else(|| parts.iter().find(|(h, _)| h.contains("filename=")))?;
    Some((file.1.clone(), format))
}

/// Serve the API over HTTP until interrupted.
pub async fn serve(service: Arc<Service>, addr: std::net::SocketAddr) -> crate::Result<()> {
    use axum::extract::DefaultBodyLimit;

    let app = axum::Router::new()
        .fallback(http::handle)
        .with_state(service)
        .layer(DefaultBodyLimit::max(http::MAX_BODY));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

mod http {
    use std::sync::Arc;

    use axum::body::Bytes;
    use axum::extract::State;
    use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
    use axum::response::{IntoResponse, Response};

    use super::{ApiRequest, ApiResponse, Service, OPERATOR_HEADER};

    pub const MAX_BODY: usize = 512 * 1024 * 1024;

    pub async fn handle(
        State(service): State<Arc<Service>>,
        method: Method,
        uri: Uri,
        headers: HeaderMap,
        body: Bytes,
    ) -> Response {
        if method == Method::OPTIONS {
            return with_cors(StatusCode::NO_CONTENT.into_response());
        }
        let target = uri.path_and_query().map(|p| p.as_str()).unwrap_or("/");
        let mut req = ApiRequest::new(method.as_str(), target);
        req.content_type = headers
            .get(header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        req.operator = headers
            .get(OPERATOR_HEADER)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| matches!(v, "true" | "1" | "yes"));
        req.body = body.to_vec();
        let res = tokio::task::spawn_blocking(move || service.dispatch(&req))
            .await
            .unwrap_or_else(|e| ApiResponse::error(500, "internal_error", e.to_string()));
        let status = StatusCode::from_u16(res.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let mut out = (status, res.body).into_response();
        if let Ok(v) = HeaderValue::from_str(&res.content_type) {
            out.headers_mut().insert(header::CONTENT_TYPE, v);
        }
        with_cors(out)
    }

    // The navigator is a static bundle that may be hosted elsewhere.
    fn with_cors(mut res: Response) -> Response {
        let h = res.headers_mut();
        h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
        h.insert(
            header::ACCESS_CONTROL_ALLOW_METHODS,
            HeaderValue::from_static("GET, POST, OPTIONS"),
        );
        h.insert(
            header::ACCESS_CONTROL_ALLOW_HEADERS,
            HeaderValue::from_static("content-type, x-ontonav-operator"),
        );
        res
    }
}
