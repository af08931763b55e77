use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use progsim_core::cluster::parse_flat_clusters;
use progsim_service::store::MemoryStore;
use progsim_service::{router, Engine, ServiceConfig};

const TOKEN: &str = "s3cret";

fn app() -> (Engine, Router) {
    let config = ServiceConfig { instructor_token: Some(TOKEN.into()), min_attempts: 1, ..ServiceConfig::default() };
    let engine = Engine::open(config, Arc::new(MemoryStore::new())).unwrap();
    (engine.clone(), router(engine))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>, token: bool) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if token {
        req = req.header("authorization", format!("Bearer {TOKEN}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn program(k: usize) -> String {
    let body = (0..k).map(|i| format!("x = x + {i};")).collect::<String>();
    format!("int main(){{ int x; x = 0; {body} printf(\"%d\", x); return 0; }}")
}

#[tokio::test]
async fn submission_to_hints_round_trip() {
    let (engine, app) = app();
    for (i, k) in [1, 1, 2, 3, 3, 4].into_iter().enumerate() {
        let body = json!({ "id": format!("s{i}"), "author": "u", "source": program(k), "correct": true, "marks": k as f64 });
        let (status, text) = call(&app, "POST", "/v1/problems/p1/submissions", Some(body), false).await;
        assert_eq!(status, StatusCode::CREATED, "{text}");
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["submission_id"], format!("s{i}"));
        assert_eq!(v["diagnostics"], json!([]));
    }
    let (status, text) = call(
        &app,
        "POST",
        "/v1/problems/p1/submissions",
        Some(json!({ "author": "u", "source": "int main( {", "correct": false })),
        false,
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["diagnostics"][0]["line"], 1);
    engine.wait_idle("p1");

    // Instructor endpoints need the token.
    assert_eq!(call(&app, "POST", "/v1/problems/p1/recluster", None, false).await.0, StatusCode::UNAUTHORIZED);
    let (status, text) = call(&app, "POST", "/v1/problems/p1/recluster", None, true).await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let summary: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(summary["submissions"], 6);

    let corr = json!({ "source": program(2), "author": "u" });
    let (status, _) = call(&app, "POST", "/v1/problems/p1/corrections", Some(corr.clone()), false).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    let (status, _) =
        call(&app, "PUT", "/v1/problems/p1/activation", Some(json!({ "active": true })), true).await;
    assert_eq!(status, StatusCode::OK);
    let (status, text) = call(&app, "POST", "/v1/problems/p1/corrections", Some(corr), false).await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["neighbor_distance"], 0.0);
    assert_eq!(v["suppressed"], false);
    assert_eq!(v["hints"], json!([]));

    let (status, text) = call(&app, "GET", "/v1/problems/p1/clusters", None, true).await;
    assert_eq!(status, StatusCode::OK);
    let rows = parse_flat_clusters(&text).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(text, engine.export_clusters("p1").unwrap());

    let (status, text) = call(&app, "GET", "/v1/problems/p1/dendrogram", None, true).await;
    assert_eq!(status, StatusCode::OK);
    let tree: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(tree["count"], 6);

    let (status, text) = call(&app, "GET", "/v1/problems/p1/forcegraph", None, true).await;
    assert_eq!(status, StatusCode::OK);
    let graph: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 6);

    let (status, text) = call(&app, "GET", "/v1/problems/p1/variance", None, true).await;
    assert_eq!(status, StatusCode::OK);
    let report: Value = serde_json::from_str(&text).unwrap();
    assert!(report["overall_variance"].as_f64().unwrap() > 0.0);
}

#[tokio::test]
async fn errors_map_to_statuses() {
    let (_, app) = app();
    let corr = json!({ "source": "int main(){}" });
    assert_eq!(call(&app, "POST", "/v1/problems/nope/corrections", Some(corr.clone()), false).await.0, StatusCode::NOT_FOUND);
    call(&app, "PUT", "/v1/problems/p2/activation", Some(json!({ "active": true })), true).await;
    let (status, text) = call(&app, "POST", "/v1/problems/p2/corrections", Some(corr), false).await;
    assert_eq!(status, StatusCode::CONFLICT, "{text}");
    assert!(text.contains("error"));
    assert_eq!(call(&app, "GET", "/v1/problems/p2/clusters", None, true).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", "/v1/problems/p2/recluster", None, true).await.0, StatusCode::CONFLICT);
    let bad = json!({ "author": "u", "source": "int main(){}", "correct": true, "id": "has space" });
    assert_eq!(call(&app, "POST", "/v1/problems/p2/submissions", Some(bad), false).await.0, StatusCode::BAD_REQUEST);
    let malformed = json!({ "source": "int main(){}" });
    assert!(call(&app, "POST", "/v1/problems/p2/submissions", Some(malformed), false).await.0.is_client_error());
    assert_eq!(call(&app, "GET", "/v1/health", None, false).await, (StatusCode::OK, "ok".to_string()));
}

#[tokio::test]
async fn parse_errors_come_back_as_diagnostics() {
    let (engine, app) = app();
    engine.ingest("p3", progsim_service::NewSubmission { author: "u".into(), source: program(1), correct: true, ..Default::default() }).unwrap();
    engine.wait_idle("p3");
    engine.recluster("p3").unwrap();
    engine.set_active("p3", true).unwrap();
    let (status, text) =
        call(&app, "POST", "/v1/problems/p3/corrections", Some(json!({ "source": "int main(){ switch(x){} }" })), false).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v.get("hints").is_none());
    assert!(v["diagnostics"][0]["message"].as_str().unwrap().contains("switch"));
}
