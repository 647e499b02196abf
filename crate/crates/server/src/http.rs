//! Routes. Each handler parses, calls the hub and maps the outcome.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use privgraph::consent::{ConsentError, RequestStatus};
use privgraph::query::{AugmentationMode, QueryError};
use privgraph::rdf::Iri;
use privgraph::store::{Role, StoreError};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::hub::{finding_json, parse_iri, Hub, HubError, IngestTarget, PolicyRequest};

pub const USER_HEADER: &str = "x-user-iri";

type AppState = Arc<Hub>;

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/resources", post(post_resources))
        .route("/observations", post(post_observations))
        .route("/privacy", post(post_privacy))
        .route("/parties", post(post_party))
        .route("/ownership", post(post_ownership))
        .route("/interests", post(post_interest))
        .route("/policies", post(post_policy))
        .route("/access-requests", post(post_access_request))
        .route("/consent-requests", get(get_consent_requests))
        .route("/consent-requests/{id}/grant", post(post_grant))
        .route("/consent-requests/{id}/deny", post(post_deny))
        .route("/permissions", get(get_permissions))
        .route("/permissions/{id}/revoke", post(post_revoke))
        .route("/query", post(post_query))
        .route("/query/augmented", post(post_augmented))
        .route("/lint", get(get_lint))
        .route("/vocabulary", get(get_vocabulary))
        .with_state(hub)
}

pub struct ApiError(HubError);

impl<E: Into<HubError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

fn store_status(e: &StoreError) -> (StatusCode, &'static str) {
    use StoreError::*;
    match e {
        WrongGraph { .. } => (StatusCode::BAD_REQUEST, "WrongGraph"),
        Unauthorized(_) => (StatusCode::FORBIDDEN, "Unauthorized"),
        CardinalityViolation { .. } => (StatusCode::CONFLICT, "CardinalityViolation"),
        UnknownVocabularyTerm(_) => (StatusCode::UNPROCESSABLE_ENTITY, "UnknownVocabularyTerm"),
        MetadataAbuse { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "MetadataAbuse"),
        NoResourceSubject => (StatusCode::UNPROCESSABLE_ENTITY, "NoResourceSubject"),
        UnregisteredProducer { .. } => (StatusCode::CONFLICT, "UnregisteredProducer"),
        DanglingReference { .. } => (StatusCode::CONFLICT, "DanglingReference"),
        DuplicateController => (StatusCode::CONFLICT, "DuplicateController"),
        VocabularyInSnapshot => (StatusCode::BAD_REQUEST, "VocabularyInSnapshot"),
        Snapshot(_) => (StatusCode::BAD_REQUEST, "Snapshot"),
        Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Io"),
    }
}

fn consent_status(e: &ConsentError) -> (StatusCode, &'static str) {
    use ConsentError::*;
    match e {
        Store(s) => store_status(s),
        DuplicateController => (StatusCode::CONFLICT, "DuplicateController"),
        InvalidRole(_) => (StatusCode::BAD_REQUEST, "InvalidRole"),
        UnknownParty(_) => (StatusCode::NOT_FOUND, "UnknownParty"),
        UnknownRequester(_) => (StatusCode::FORBIDDEN, "UnknownRequester"),
        UnknownTarget(_) => (StatusCode::NOT_FOUND, "UnknownTarget"),
        UnknownSubject(_) => (StatusCode::NOT_FOUND, "UnknownSubject"),
        CardinalityViolation { .. } => (StatusCode::CONFLICT, "CardinalityViolation"),
        NoOwner(_) => (StatusCode::CONFLICT, "NoOwner"),
        NotOwner(_) => (StatusCode::FORBIDDEN, "NotOwner"),
        NotPending(_) => (StatusCode::CONFLICT, "NotPending"),
        ExpiryInPast(_) => (StatusCode::UNPROCESSABLE_ENTITY, "ExpiryInPast"),
        UnknownPermission(_) => (StatusCode::NOT_FOUND, "UnknownPermission"),
        InvalidAction(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidAction"),
        InvalidPurpose(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidPurpose"),
        NoRegisteredInterest(_) => (StatusCode::CONFLICT, "NoRegisteredInterest"),
        InvalidPolicy(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidPolicy"),
        Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Io"),
    }
}

fn query_status(e: &QueryError) -> (StatusCode, &'static str) {
    use QueryError::*;
    match e {
        Syntax(_) => (StatusCode::BAD_REQUEST, "Syntax"),
        UnknownPrefix { .. } => (StatusCode::BAD_REQUEST, "UnknownPrefix"),
        InvalidTerm { .. } => (StatusCode::BAD_REQUEST, "InvalidTerm"),
        PrivacyTermInUserQuery(_) => (StatusCode::BAD_REQUEST, "PrivacyTermInUserQuery"),
        Unsupported { .. } => (StatusCode::BAD_REQUEST, "Unsupported"),
        BlankNodeInQuery { .. } => (StatusCode::BAD_REQUEST, "BlankNodeInQuery"),
        UnknownVariable(_) => (StatusCode::BAD_REQUEST, "UnknownVariable"),
        NoRegisteredInterest(_) => (StatusCode::CONFLICT, "NoRegisteredInterest"),
        Unauthorized(_) => (StatusCode::FORBIDDEN, "Unauthorized"),
    }
}

impl ApiError {
    fn status(&self) -> (StatusCode, &'static str) {
        match &self.0 {
            HubError::Store(e) => store_status(e),
            HubError::Consent(e) => consent_status(e),
            HubError::Query(e) => query_status(e),
            HubError::Turtle(_) => (StatusCode::BAD_REQUEST, "Syntax"),
            HubError::BadRequest(_) => (StatusCode::BAD_REQUEST, "BadRequest"),
            HubError::Forbidden(_) => (StatusCode::FORBIDDEN, "Unauthorized"),
            HubError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Io"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status();
        (status, Json(json!({"error": code, "message": self.0.to_string()}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// The `X-User-IRI` header, if present.
pub struct Caller(pub Option<Iri>);

impl<S: Send + Sync> FromRequestParts<S> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, Self::Rejection> {
        let Some(value) = parts.headers.get(USER_HEADER) else {
            return Ok(Caller(None));
        };
        let text = value
            .to_str()
            .map_err(|_| HubError::BadRequest("X-User-IRI is not valid text".into()))?;
        Ok(Caller(Some(parse_iri(text)?)))
    }
}

/// Persists after a successful write.
fn saved<T>(hub: &Hub, value: T) -> ApiResult<T> {
    hub.persist()?;
    Ok(value)
}

async fn post_resources(State(hub): State<AppState>, Caller(user): Caller, body: String) -> ApiResult<Response> {
    let report = hub.ingest(user.as_ref(), IngestTarget::Resource, &body)?;
    let registered: Vec<&str> = report.registered.iter().map(Iri::as_str).collect();
    let body = json!(registered);
    saved(&hub, (StatusCode::CREATED, Json(body)).into_response())
}

async fn post_observations(State(hub): State<AppState>, Caller(user): Caller, body: String) -> ApiResult<Response> {
    let report = hub.ingest(user.as_ref(), IngestTarget::Observation, &body)?;
    saved(&hub, (StatusCode::CREATED, Json(json!({"inserted": report.inserted}))).into_response())
}

#[derive(Deserialize)]
struct GraphParam {
    graph: String,
}

async fn post_privacy(
    State(hub): State<AppState>,
    Caller(user): Caller,
    Query(p): Query<GraphParam>,
    body: String,
) -> ApiResult<Response> {
    let target: IngestTarget = p.graph.parse().map_err(HubError::BadRequest)?;
    if !matches!(target, IngestTarget::Consent | IngestTarget::Permissions) {
        return Err(HubError::BadRequest("graph must be consent or permissions".into()).into());
    }
    let report = hub.ingest(user.as_ref(), target, &body)?;
    saved(&hub, (StatusCode::CREATED, Json(json!({"inserted": report.inserted}))).into_response())
}

#[derive(Deserialize)]
struct PartyBody {
    iri: String,
    roles: Vec<String>,
}

fn parse_role(s: &str) -> Result<Role, HubError> {
    match s {
        "consenting_party" | "ConsentingParty" => Ok(Role::ConsentingParty),
        "allowed_party" | "AllowedParty" => Ok(Role::AllowedParty),
        other => Err(HubError::BadRequest(format!("unknown role {other:?}"))),
    }
}

async fn post_party(State(hub): State<AppState>, Caller(user): Caller, Json(b): Json<PartyBody>) -> ApiResult<StatusCode> {
    let roles = b.roles.iter().map(|r| parse_role(r)).collect::<Result<Vec<_>, _>>()?;
    hub.register_party(user.as_ref(), &parse_iri(&b.iri)?, &roles)?;
    saved(&hub, StatusCode::CREATED)
}

#[derive(Deserialize)]
struct OwnershipBody {
    owner: String,
    subjects: Vec<String>,
}

async fn post_ownership(
    State(hub): State<AppState>,
    Caller(user): Caller,
    Json(b): Json<OwnershipBody>,
) -> ApiResult<Response> {
    let subjects = b.subjects.iter().map(|s| parse_iri(s)).collect::<Result<BTreeSet<_>, _>>()?;
    let written = hub.declare_ownership(user.as_ref(), &parse_iri(&b.owner)?, &subjects)?;
    saved(&hub, (StatusCode::CREATED, Json(json!({"inserted": written}))).into_response())
}

#[derive(Deserialize)]
struct InterestBody {
    action: String,
    purpose: String,
}

async fn post_interest(State(hub): State<AppState>, Caller(user): Caller, Json(b): Json<InterestBody>) -> ApiResult<StatusCode> {
    hub.register_interest(user.as_ref(), &b.action, &b.purpose)?;
    saved(&hub, StatusCode::NO_CONTENT)
}

async fn post_policy(State(hub): State<AppState>, Caller(user): Caller, Json(b): Json<PolicyRequest>) -> ApiResult<Response> {
    let rule = hub.set_policy(user.as_ref(), &b)?;
    saved(&hub, (StatusCode::CREATED, Json(rule)).into_response())
}

#[derive(Deserialize)]
struct AccessBody {
    action: String,
    purpose: String,
    targets: Vec<String>,
}

async fn post_access_request(State(hub): State<AppState>, Caller(user): Caller, Json(b): Json<AccessBody>) -> ApiResult<Response> {
    let outcome = hub.request_access(user.as_ref(), &b.action, &b.purpose, &b.targets)?;
    saved(&hub, Json(outcome).into_response())
}

#[derive(Deserialize)]
struct StatusParam {
    status: Option<RequestStatus>,
}

async fn get_consent_requests(
    State(hub): State<AppState>,
    Caller(user): Caller,
    Query(p): Query<StatusParam>,
) -> ApiResult<Response> {
    Ok(Json(hub.consent_requests(user.as_ref(), p.status)?).into_response())
}

#[derive(Deserialize)]
struct GrantBody {
    expires_at: DateTime<Utc>,
}

async fn post_grant(
    State(hub): State<AppState>,
    Caller(user): Caller,
    Path(id): Path<String>,
    Json(b): Json<GrantBody>,
) -> ApiResult<Response> {
    let perm = hub.grant(user.as_ref(), &id, b.expires_at)?;
    saved(&hub, Json(perm).into_response())
}

async fn post_deny(State(hub): State<AppState>, Caller(user): Caller, Path(id): Path<String>) -> ApiResult<Response> {
    let request = hub.deny(user.as_ref(), &id)?;
    saved(&hub, Json(request).into_response())
}

async fn get_permissions(State(hub): State<AppState>, Caller(user): Caller) -> ApiResult<Response> {
    let perms = hub.permissions(user.as_ref())?;
    saved(&hub, Json(perms).into_response())
}

async fn post_revoke(State(hub): State<AppState>, Caller(user): Caller, Path(id): Path<String>) -> ApiResult<StatusCode> {
    hub.revoke(user.as_ref(), &id)?;
    saved(&hub, StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct ModeParam {
    mode: Option<String>,
}

async fn post_query(
    State(hub): State<AppState>,
    Caller(user): Caller,
    Query(p): Query<ModeParam>,
    body: String,
) -> ApiResult<Response> {
    let mode = p
        .mode
        .map(|m| m.parse::<AugmentationMode>())
        .transpose()
        .map_err(HubError::BadRequest)?;
    let rs = hub.query(user.as_ref(), &body, mode)?;
    Ok((
        [(header::CONTENT_TYPE, "application/sparql-results+json")],
        rs.to_json().to_string(),
    )
        .into_response())
}

async fn post_augmented(State(hub): State<AppState>, Caller(user): Caller, body: String) -> ApiResult<Response> {
    let text = hub.augmented_query(user.as_ref(), &body)?;
    Ok(([(header::CONTENT_TYPE, "application/sparql-query")], text).into_response())
}

async fn get_lint(State(hub): State<AppState>) -> Json<Value> {
    Json(Value::Array(hub.lint().iter().map(finding_json).collect()))
}

async fn get_vocabulary(State(hub): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "text/turtle")], hub.vocabulary_turtle()).into_response()
}

pub async fn serve(hub: Arc<Hub>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(hub.config().listen).await?;
    axum::serve(listener, router(hub)).await
}
