//! JSON session service.
//!
//! Bodies are parsed by hand rather than through axum's extractor so that
//! malformed input gets the same `{"error": code, ...}` body as every other
//! failure.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cantor_core::arena::{NewSession, SessionStore};
use cantor_core::Side;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::ops::{self, OpError};

impl IntoResponse for OpError {
    fn into_response(self) -> Response {
        let status = match self.code {
            "UnknownSession" => StatusCode::NOT_FOUND,
            "WrongTurn" | "Finished" => StatusCode::CONFLICT,
            "IllegalMove" => StatusCode::UNPROCESSABLE_ENTITY,
            "EngineFault" | "LogError" | "OracleContractViolation" | "TreeError" | "EnumerationError" => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        };
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(b) = self.bound {
            body["bound"] = json!(b);
        }
        (status, Json(body)).into_response()
    }
}

type Reply = Result<Response, OpError>;

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, OpError> {
    serde_json::from_slice(body).map_err(|e| OpError::new("ParseError", e.to_string()))
}

fn ok(value: impl serde::Serialize) -> Reply {
    Ok(Json(value).into_response())
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/move", post(post_move))
        .route("/session/{id}/target-tree", get(target_tree))
        .route("/extract", post(extract))
        .route("/classify", post(classify))
        .route("/counterplay", post(counterplay))
        .with_state(store)
}

async fn create_session(State(store): State<Arc<SessionStore>>, body: Bytes) -> Reply {
    let req: NewSession = parse(&body)?;
    let view = store.create_session(&req)?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Reply {
    ok(store.view(&id)?)
}

#[derive(Deserialize)]
struct MoveBody {
    value: String,
    #[serde(default)]
    side: Option<Side>,
}

async fn post_move(State(store): State<Arc<SessionStore>>, Path(id): Path<String>, body: Bytes) -> Reply {
    let m: MoveBody = parse(&body)?;
    ok(store.post_move(&id, m.side, &m.value)?)
}

#[derive(Deserialize)]
struct DepthQuery {
    depth: Option<String>,
}

async fn target_tree(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Query<DepthQuery>,
) -> Reply {
    let depth = match q.depth {
        None => 6,
        Some(d) => d.parse().map_err(|_| OpError::new("ParseError", format!("depth {d:?} is not a number")))?,
    };
    ok(store.overlay(&id, depth)?)
}

async fn extract(body: Bytes) -> Reply {
    let req: ops::ExtractRequest = parse(&body)?;
    ok(tokio::task::spawn_blocking(move || ops::extract(&req)).await.map_err(join_error)??)
}

async fn classify(body: Bytes) -> Reply {
    let req: ops::ClassifyRequest = parse(&body)?;
    ok(tokio::task::spawn_blocking(move || ops::classify(&req)).await.map_err(join_error)??)
}

async fn counterplay(body: Bytes) -> Reply {
    let req: ops::CounterplayRequest = parse(&body)?;
    ok(tokio::task::spawn_blocking(move || ops::run_counterplay(&req)).await.map_err(join_error)??)
}

fn join_error(e: tokio::task::JoinError) -> OpError {
    OpError::new("EngineFault", e.to_string())
}
