use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use riskreg::golden::{sca_register, seed_catalog};
use riskreg::{Appetite, BandThresholds};
use riskreg_service::{router, RegisterStore, ServiceConfig};

fn golden_store() -> Arc<RegisterStore> {
    let (register, _) = sca_register();
    Arc::new(RegisterStore::new(register, Appetite::default(), BandThresholds::default(), seed_catalog()).unwrap())
}

fn app() -> Router {
    router(golden_store(), ServiceConfig::default())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn entry_16(threat_likelihood: i64) -> Value {
    json!({
        "asset": {"name": "Electronic Data", "category": "PureInformation", "owner": "CIO", "value": 5},
        "threat": {"name": "Human error", "likelihood": threat_likelihood},
        "vulnerability": {"name": "Mental Stress", "likelihood": 9}
    })
}

fn find(doc: &Value, id: u64) -> &Value {
    doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["id"] == id)
        .unwrap()
}

#[tokio::test]
async fn register_lists_golden_entries_in_order() {
    let app = app();
    let (status, doc) = call(&app, Method::GET, "/api/register", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["revision"], 1);
    assert_eq!(doc["appetite"], 150);
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 45);
    assert_eq!(entries[0]["id"], 16);
    assert_eq!(entries[0]["risk"], 360);
    assert_eq!(entries[0]["band"], "RED");
    assert_eq!(entries[0]["treatment"], "avoid_eliminate");
    let risks: Vec<u64> = entries.iter().map(|e| e["risk"].as_u64().unwrap()).collect();
    assert!(risks.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(risks.iter().filter(|&&r| r > 150).count(), 25);
}

#[tokio::test]
async fn put_rescores_and_bumps_revision() {
    let app = app();
    let body = json!({"expected_revision": 1, "entry": entry_16(4)});
    let (status, doc) = call(&app, Method::PUT, "/api/entries/16", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["revision"], 2);
    assert_eq!(doc["entry"]["risk"], 180);
    assert_eq!(doc["entry"]["band"], "RED");

    let (_, register) = call(&app, Method::GET, "/api/register", None).await;
    assert_eq!(register["revision"], 2);
    assert_eq!(find(&register, 16)["risk"], 180);
}

#[tokio::test]
async fn out_of_range_likelihood_is_field_level_422() {
    let app = app();
    let body = json!({"expected_revision": 1, "entry": entry_16(11)});
    let (status, doc) = call(&app, Method::PUT, "/api/entries/16", Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(doc["code"], "RangeError");
    assert_eq!(doc["field"], "threat.likelihood");

    let (_, register) = call(&app, Method::GET, "/api/register", None).await;
    assert_eq!(register["revision"], 1);
    assert_eq!(find(&register, 16)["risk"], 360);
}

#[tokio::test]
async fn unknown_labels_are_rejected() {
    let app = app();
    let mut entry = entry_16(4);
    entry["asset"]["owner"] = json!("Janitor");
    entry["asset"]["category"] = json!("Furniture");
    let (status, doc) = call(
        &app,
        Method::PUT,
        "/api/entries/16",
        Some(json!({"expected_revision": 1, "entry": entry})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(doc["errors"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn stale_revision_conflicts() {
    let app = app();
    let first = json!({"expected_revision": 1, "entry": entry_16(4)});
    assert_eq!(
        call(&app, Method::PUT, "/api/entries/16", Some(first.clone())).await.0,
        StatusCode::OK
    );
    let (status, doc) = call(&app, Method::PUT, "/api/entries/16", Some(first)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(doc["code"], "RevisionConflict");
}

#[tokio::test]
async fn malformed_json_is_400() {
    let app = app();
    let req = Request::builder()
        .method(Method::PUT)
        .uri("/api/entries/16")
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn create_and_delete_entries() {
    let app = app();
    let (status, doc) = call(
        &app,
        Method::POST,
        "/api/entries",
        Some(json!({"expected_revision": 1, "entry": entry_16(1)})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(doc["entry"]["id"], 46);
    assert_eq!(doc["entry"]["risk"], 45);

    let mut dup = entry_16(1);
    dup["id"] = json!(46);
    let (status, doc) = call(
        &app,
        Method::POST,
        "/api/entries",
        Some(json!({"expected_revision": 2, "entry": dup})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(doc["code"], "DuplicateId");

    let (status, doc) = call(&app, Method::DELETE, "/api/entries/46?expected_revision=2", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["revision"], 3);
    let (status, doc) = call(&app, Method::DELETE, "/api/entries/46?expected_revision=3", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(doc["code"], "UnknownEntry");
}

#[tokio::test]
async fn appetite_from_anchors() {
    let app = app();
    let (status, doc) = call(&app, Method::GET, "/api/appetite", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["appetite"], 150);

    let low = json!({"asset_value": 1, "threat_likelihood": 10, "vulnerability_likelihood": 10});
    let high = json!({"asset_value": 2, "threat_likelihood": 10, "vulnerability_likelihood": 10});
    let body = json!({"expected_revision": 1, "anchors": {"low": low, "high": high}});
    let (status, doc) = call(&app, Method::PUT, "/api/appetite", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["appetite"], 150);
    assert_eq!(doc["revision"], 2);

    let body = json!({"expected_revision": 2, "anchors": "1,10,10:3,10,10"});
    let (status, doc) = call(&app, Method::PUT, "/api/appetite", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["appetite"], 200);
    let (_, register) = call(&app, Method::GET, "/api/register", None).await;
    assert_eq!(register["appetite"], 200);
    assert_eq!(find(&register, 14)["band"], "RED");
    assert_eq!(find(&register, 4)["band"], "YELLOW");

    let bad = json!({"asset_value": 6, "threat_likelihood": 10, "vulnerability_likelihood": 10});
    let body = json!({"expected_revision": 3, "anchors": {"low": bad, "high": high}});
    let (status, doc) = call(&app, Method::PUT, "/api/appetite", Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(doc["field"], "anchors.low.asset_value");
}

#[tokio::test]
async fn whatif_does_not_mutate() {
    let app = app();
    let plan = json!({"assignments": {"16": ["C-ADM-01", "C-TEC-09"]}});
    let (status, doc) = call(&app, Method::POST, "/api/whatif", Some(plan)).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["revision"], 1);
    let delta = doc["deltas"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["id"] == 16)
        .unwrap();
    assert_eq!(delta["risk_before"], 360);
    assert_eq!(delta["risk_after"], 175);
    assert_eq!(delta["band_after"], "RED");
    let before = doc["total_before"].as_u64().unwrap();
    let after = doc["total_after"].as_u64().unwrap();
    assert_eq!(before - after, 185);
    assert_eq!(doc["defense"][0]["satisfied"], true);

    let (_, register) = call(&app, Method::GET, "/api/register", None).await;
    assert_eq!(register["revision"], 1);
    assert_eq!(find(&register, 16)["risk"], 360);
}

#[tokio::test]
async fn whatif_rejects_unknown_control() {
    let app = app();
    let plan = json!({"assignments": {"16": ["C-NOPE"]}});
    let (status, doc) = call(&app, Method::POST, "/api/whatif", Some(plan)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(doc["code"], "UnknownControl");
}

fn heat_total(doc: &Value) -> usize {
    doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["cells"].as_array().unwrap())
        .map(|c| c["entries"].as_array().unwrap().len())
        .sum()
}

fn cell_of(doc: &Value, id: u64) -> (u64, u64) {
    for row in doc["rows"].as_array().unwrap() {
        for cell in row["cells"].as_array().unwrap() {
            if cell["entries"].as_array().unwrap().iter().any(|e| e == id) {
                return (cell["asset_value"].as_u64().unwrap(), cell["column"].as_u64().unwrap());
            }
        }
    }
    panic!("entry {id} not on the map");
}

#[tokio::test]
async fn heatmap_tracks_edits() {
    let app = app();
    let (status, doc) = call(&app, Method::GET, "/api/heatmap", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert_eq!(heat_total(&doc), 45);
    assert_eq!(cell_of(&doc, 16), (5, 8));

    let body = json!({"expected_revision": 1, "entry": entry_16(1)});
    assert_eq!(
        call(&app, Method::PUT, "/api/entries/16", Some(body)).await.0,
        StatusCode::OK
    );
    let (_, doc) = call(&app, Method::GET, "/api/heatmap", None).await;
    assert_eq!(doc["revision"], 2);
    assert_eq!(heat_total(&doc), 45);
    assert_eq!(cell_of(&doc, 16), (5, 1));
}

#[tokio::test]
async fn controls_catalog() {
    let (status, doc) = call(&app(), Method::GET, "/api/controls", None).await;
    assert_eq!(status, StatusCode::OK);
    let controls = doc.as_array().unwrap();
    assert_eq!(controls.len(), 26);
    let mut categories: Vec<&str> = controls.iter().map(|c| c["category"].as_str().unwrap()).collect();
    categories.sort();
    categories.dedup();
    assert_eq!(categories, ["administrative", "physical", "technical"]);

    let empty = router(Arc::new(RegisterStore::empty()), ServiceConfig::default());
    let (status, doc) = call(&empty, Method::GET, "/api/controls", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc, json!([]));
}

#[tokio::test]
async fn save_writes_register_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("register.csv");
    let config = ServiceConfig {
        save_path: Some(path.clone()),
        ..Default::default()
    };
    let app = router(golden_store(), config);
    let body = json!({"expected_revision": 1, "entry": entry_16(4)});
    assert_eq!(
        call(&app, Method::PUT, "/api/entries/16", Some(body)).await.0,
        StatusCode::OK
    );
    let (status, doc) = call(&app, Method::POST, "/api/save", None).await;
    assert_eq!(status, StatusCode::OK, "{doc}");
    assert_eq!(doc["entries"], 45);

    let bytes = std::fs::read(&path).unwrap();
    let (saved, report) = riskreg::io::parse_register_csv(&bytes).unwrap();
    assert!(report.errors.is_empty());
    assert_eq!(saved.get(16).unwrap().risk, 180);

    let (status, doc) = call(&self::app(), Method::POST, "/api/save", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(doc["code"], "NoSavePath");
}

#[tokio::test]
async fn root_serves_a_page() {
    let res = app()
        .oneshot(Request::get("/").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>custom</p>").unwrap();
    let config = ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let app = router(golden_store(), config);
    let res = app
        .clone()
        .oneshot(Request::get("/").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<p>custom</p>");
    let (status, _) = call(&app, Method::GET, "/api/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
