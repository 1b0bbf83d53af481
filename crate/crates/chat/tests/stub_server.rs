use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use actune_chat::{chat_complete, ChatBackend, ChatWireConfig};
use actune_core::backend::{BackendError, PlannerBackend, Request, RequestKind};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

const REPLY: &str = "Plan:\n```python\ntask_plan = [(0, 'drop', ('large red trash can', 0.5, 0.03))]\n```";

#[derive(Clone, Default)]
struct Stub {
    /// Status codes returned before a normal reply.
    failures: Arc<Mutex<Vec<u16>>>,
    calls: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
    auth: Arc<Mutex<Vec<Option<String>>>>,
    raw: Option<&'static str>,
}

async fn complete(State(s): State<Stub>, headers: axum::http::HeaderMap, Json(body): Json<Value>) -> axum::response::Response {
    s.calls.fetch_add(1, Ordering::SeqCst);
    s.auth.lock().unwrap().push(headers.get("authorization").map(|h| h.to_str().unwrap().to_string()));
    s.bodies.lock().unwrap().push(body);
    let next = {
        let mut f = s.failures.lock().unwrap();
        (!f.is_empty()).then(|| f.remove(0))
    };
    if let Some(code) = next {
        return (StatusCode::from_u16(code).unwrap(), "busy").into_response();
    }
    if let Some(raw) = s.raw {
        return (StatusCode::OK, raw).into_response();
    }
    Json(json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": REPLY}}]})).into_response()
}

fn serve(stub: Stub) -> String {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            let app = Router::new().route("/v1/chat/completions", post(complete)).with_state(stub);
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}/v1/chat/completions", rx.recv().unwrap())
}

fn cfg(url: &str) -> ChatWireConfig {
    let mut c = ChatWireConfig::new(url, "stub-model");
    c.token_env = String::new();
    c.backoff_ms = 5;
    c
}

fn user(text: &str) -> Vec<(String, String)> {
    vec![("user".to_string(), text.to_string())]
}

#[test]
fn echoes_reply_and_sends_wire_shape() {
    let stub = Stub::default();
    let url = serve(stub.clone());
    let mut c = cfg(&url);
    c.temperature = 0.7;
    assert_eq!(chat_complete(&c, &user("hello")).unwrap(), REPLY);
    let body = stub.bodies.lock().unwrap()[0].clone();
    assert_eq!(body, json!({"model": "stub-model", "temperature": 0.7, "messages": [{"role": "user", "content": "hello"}]}));
}

#[test]
fn retries_server_errors() {
    let stub = Stub { failures: Arc::new(Mutex::new(vec![500, 503])), ..Default::default() };
    let url = serve(stub.clone());
    assert_eq!(chat_complete(&cfg(&url), &user("x")).unwrap(), REPLY);
    assert_eq!(stub.calls.load(Ordering::SeqCst), 3);
}

#[test]
fn gives_up_after_three_attempts() {
    let stub = Stub { failures: Arc::new(Mutex::new(vec![500, 500, 500, 500])), ..Default::default() };
    let url = serve(stub.clone());
    assert!(matches!(chat_complete(&cfg(&url), &user("x")), Err(BackendError::Transport(_))));
    assert_eq!(stub.calls.load(Ordering::SeqCst), 3);
}

#[test]
fn rate_limit_and_malformed() {
    let url = serve(Stub { failures: Arc::new(Mutex::new(vec![429])), ..Default::default() });
    assert_eq!(chat_complete(&cfg(&url), &user("x")), Err(BackendError::RateLimited));
    let url = serve(Stub { raw: Some("<html>not json</html>"), ..Default::default() });
    assert!(matches!(chat_complete(&cfg(&url), &user("x")), Err(BackendError::MalformedResponse(_))));
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let mut c = cfg("http://127.0.0.1:9/v1/chat/completions");
    c.attempts = 1;
    assert!(matches!(chat_complete(&c, &user("x")), Err(BackendError::Transport(_))));
}

#[test]
fn session_keeps_transcript_and_budget() {
    let stub = Stub::default();
    let url = serve(stub.clone());
    let mut c = cfg(&url);
    c.token_env = "ACTUNE_STUB_TOKEN".into();
    c.system_prompt = Some("You plan robot tasks.".into());
    std::env::set_var("ACTUNE_STUB_TOKEN", "secret");
    let backend = ChatBackend::new(c.clone()).unwrap();
    let mut s = backend.start_session(0, 0).unwrap();
    let req = Request { kind: RequestKind::TaskPlan, prompt: "plan it", failure_index: None, current_plan: None };
    assert_eq!(s.complete(&req).unwrap(), REPLY);
    assert_eq!(s.complete(&req).unwrap(), REPLY);
    assert_eq!(s.transcript().len(), 5);
    let second = stub.bodies.lock().unwrap()[1].clone();
    assert_eq!(second["messages"].as_array().unwrap().len(), 4);
    assert_eq!(stub.auth.lock().unwrap()[0].as_deref(), Some("Bearer secret"));

    c.max_context_tokens = 10;
    let mut small = ChatBackend::new(c).unwrap().start_session(0, 0).unwrap();
    let long = "x".repeat(200);
    let req = Request { kind: RequestKind::TaskPlan, prompt: &long, failure_index: None, current_plan: None };
    assert!(matches!(small.complete(&req), Err(BackendError::ContextBudget { limit: 10, .. })));
}

#[test]
fn missing_token_variable() {
    let mut c = cfg("http://127.0.0.1:9/");
    c.token_env = "ACTUNE_SURELY_UNSET_VAR".into();
    let b = ChatBackend::new(c).unwrap();
    assert!(matches!(b.start_session(0, 0), Err(BackendError::Config(_))));
}
