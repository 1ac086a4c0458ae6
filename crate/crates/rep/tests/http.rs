mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use common::*;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &std::path::Path) -> Router {
    rep::http::router(Arc::new(service(dir)), Some(asset("static")))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value, Option<String>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let location = resp.headers().get(header::LOCATION).map(|v| v.to_str().unwrap().to_string());
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, v, location)
}

fn assert_error(v: &Value, code: &str) {
    assert_eq!(v["code"], code, "{v}");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[tokio::test]
async fn interview_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());

    let (s, v, _) = call(&app, Method::GET, "/healthz", None).await;
    assert_eq!((s, v["status"].as_str(), v["api_version"].as_u64()), (StatusCode::OK, Some("ok"), Some(1)));

    let (s, v, _) = call(&app, Method::POST, "/sessions", Some(json!({"script": "demo_script", "persona": "kaya"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["api_version"], 1);
    let id = v["session_id"].as_str().unwrap().to_string();
    assert_eq!(v["replies"].as_array().unwrap().last().unwrap()["widget"], json!({"type": "open_text", "question": "name-q"}));

    let msgs = format!("/sessions/{id}/messages");
    let (s, v, _) = call(&app, Method::POST, &msgs, Some(json!({"kind": "text", "text": "Ada"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["replies"][0]["text"].as_str().unwrap().contains("Ada"));
    for t in ["I am an analyst.", "Puzzles."] {
        call(&app, Method::POST, &msgs, Some(json!({"kind": "text", "text": t}))).await;
    }

    let (s, v, _) = call(&app, Method::POST, &msgs, Some(json!({"kind": "likert", "question": "im-1", "value": 9}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "invalid_answer");
    assert_eq!(v["reply"]["widget"]["question"], "im-1");

    let (s, v, _) = call(&app, Method::POST, &msgs, Some(json!({"kind": "shout"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error(&v, "bad_request");

    let (s, v, _) = call(&app, Method::GET, &format!("/sessions/{id}/report"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error(&v, "session_not_complete");

    let (s, _, loc) = call(&app, Method::GET, &format!("/r/{id}/article-1"), None).await;
    assert_eq!(s, StatusCode::FOUND);
    assert_eq!(loc.as_deref(), Some("https://example.org/articles/asking-for-feedback"));
    let (s, v, _) = call(&app, Method::GET, &format!("/r/{id}/nope"), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_link");

    let (s, v, _) = call(&app, Method::GET, "/results?sort_by=wc", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["results"], json!([]));
    let (s, v, _) = call(&app, Method::GET, "/results?sort_by=shoe_size", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_error(&v, "unknown_sort_key");
    let (s, _, _) = call(&app, Method::GET, "/results?sort_by=wc&order=sideways", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn not_found_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v, _) = call(&app, Method::POST, "/sessions", Some(json!({"script": "missing"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_script");
    let (s, v, _) = call(&app, Method::POST, "/sessions", Some(json!({"script": "demo_script", "persona": "zed"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_persona");
    let (s, v, _) = call(&app, Method::POST, "/sessions/abc/messages", Some(json!({"kind": "text", "text": "hi"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "session_not_found");
    let (s, v, _) = call(&app, Method::GET, "/sessions/abc/report", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_error(&v, "session_not_found");
}

#[tokio::test]
async fn completed_session_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(service(dir.path()));
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    drive(&svc, &id, &demo_plan(), |e| panic!("{e}"));
    let app = rep::http::router(svc.clone(), None);

    let (s, v, _) =
        call(&app, Method::POST, &format!("/sessions/{id}/messages"), Some(json!({"kind": "text", "text": "hi"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_error(&v, "session_completed");
    assert!(v["reply"]["text"].as_str().is_some());

    let (s, v, _) = call(&app, Method::GET, &format!("/sessions/{id}/report"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["report"]["traits"].as_array().unwrap().len(), 35);
    assert_eq!(v["report"]["wc"], 6);
    assert_eq!(v["report"]["wl"], 6);
    let (_, page, _) = call(&app, Method::GET, "/results?sort_by=warmth&order=asc", None).await;
    assert_eq!(page["sort_by"], "warmth");
    assert_eq!(page["order"], "asc");
    assert_eq!(page["results"][0], v);
}

#[tokio::test]
async fn static_route_serves_the_client() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v, _) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_str().unwrap().contains("<html"));
    let (s, _, _) = call(&app, Method::GET, "/missing.css", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
