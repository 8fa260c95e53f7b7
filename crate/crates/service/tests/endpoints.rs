use std::collections::HashMap;
use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use trustscore_core::active::Oracle;
use trustscore_core::dataset::table::ScoreRow;
use trustscore_core::dataset::{generate_synthetic, SyntheticParams};
use trustscore_core::experiment::{prepare, Prepared, SyntheticSetup};
use trustscore_core::scoring::score_corpus;
use trustscore_core::{Label, Lexicon};
use trustscore_service::{router, AppState, Catalog, ServiceConfig, StartupError};

const SETUP: SyntheticSetup = SyntheticSetup { n_users: 300, seed_labels: 40, test_size: 60, noise: 0.0, seed: 5 };

fn fixture() -> (Prepared, Catalog) {
    let prepared = prepare(&SETUP).unwrap();
    let (corpus, _) = generate_synthetic(SETUP.n_users, SETUP.seed, &SyntheticParams::default());
    let cards = score_corpus(&corpus, &Lexicon::builtin());
    let rows = corpus.users().iter().zip(&cards).map(|(u, c)| ScoreRow::new(u, c)).collect();
    let tweets = corpus.iter().flat_map(|(_, t)| t.to_vec()).collect();
    let catalog = Catalog::new("synthetic".into(), prepared.dataset.clone(), rows, tweets);
    (prepared, catalog)
}

fn app(dir: &Path) -> (Router, Oracle) {
    let (prepared, catalog) = fixture();
    let state = AppState::with_catalog(catalog, dir).unwrap();
    (router(state, None), prepared.oracle)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let request = match body {
        Some(b) => request.body(Body::from(b.to_string())).unwrap(),
        None => request.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

/// Labels for the pending batch, from the simulated oracle.
async fn answer(app: &Router, oracle: &Oracle, session: &str) -> (String, Value) {
    let (status, batch) = call(app, "GET", &format!("/sessions/{session}/batch"), None).await;
    assert_eq!(status, StatusCode::OK, "{batch}");
    let Oracle::Simulated(sim) = oracle else { unreachable!() };
    let mut labels = serde_json::Map::new();
    for inst in batch["instances"].as_array().unwrap() {
        let id = inst["user_id"].as_str().unwrap();
        let values: Vec<f64> =
            inst["features"].as_array().unwrap().iter().map(|c| c["value"].as_f64().unwrap()).collect();
        let label = sim.label(id, &values.try_into().unwrap());
        labels.insert(id.into(), json!(label == Label::Trustworthy));
    }
    (batch["batch_token"].as_str().unwrap().to_string(), Value::Object(labels))
}

async fn create(app: &Router, body: Value) -> Value {
    let (status, created) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{created}");
    created
}

#[tokio::test]
async fn healthz_reports_ok() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (status, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["sessions"], 0);
}

#[tokio::test]
async fn create_validates_config() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    for (body, expected) in [
        (json!({"batch_size": 0}), StatusCode::BAD_REQUEST),
        (json!({"learner": "knn"}), StatusCode::BAD_REQUEST),
        (json!({"strategy": "committee"}), StatusCode::BAD_REQUEST),
        (json!({"batch_size": "ten"}), StatusCode::BAD_REQUEST),
        (json!({"dataset": "elsewhere"}), StatusCode::NOT_FOUND),
    ] {
        let (status, err) = call(&app, "POST", "/sessions", Some(body.clone())).await;
        assert_eq!(status, expected, "{body} -> {err}");
        assert!(err["error"].is_string());
    }
    let created =
        create(&app, json!({"learner": "svm", "strategy": "margin", "batch_size": 7, "dataset": "synthetic"})).await;
    assert_eq!(created["batch_size"], 7);
    assert_eq!(created["labeled_count"], 40);
    assert_eq!(created["pool_size"], 200 - 7);
    assert_eq!(created["curve"].as_array().unwrap().len(), 1);
    assert_eq!(created["batch_token"], format!("{}-0", created["session_id"].as_str().unwrap()));
}

#[tokio::test]
async fn batch_carries_display_payload() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let created = create(&app, json!({"batch_size": 5, "seed": 1})).await;
    let id = created["session_id"].as_str().unwrap();
    let (status, batch) = call(&app, "GET", &format!("/sessions/{id}/batch"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(batch["complete"], false);
    let instances = batch["instances"].as_array().unwrap();
    assert_eq!(instances.len(), 5);
    for inst in instances {
        let features = inst["features"].as_array().unwrap();
        assert_eq!(features.len(), 19);
        assert!(features.iter().all(|f| (0.0..=1.0).contains(&f["value"].as_f64().unwrap())));
        assert!(features.iter().all(|f| f["raw"].is_number()));
        let card: ScoreRow = serde_json::from_value(inst["scorecard"].clone()).unwrap();
        assert_eq!(card.user_id, inst["user_id"]);
        let tweets = inst["tweets"].as_array().unwrap();
        assert!(!tweets.is_empty() && tweets.len() <= 10);
        let engagement: Vec<u64> =
            tweets.iter().map(|t| t["retweet_count"].as_u64().unwrap() + t["like_count"].as_u64().unwrap()).collect();
        assert!(engagement.windows(2).all(|w| w[0] >= w[1]));
        assert!((0.0..=1.0).contains(&inst["p_trustworthy"].as_f64().unwrap()));
    }
    let (status, _) = call(&app, "GET", "/sessions/s999/batch", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn label_round_trip_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let (app, oracle) = app(dir.path());
    let created = create(&app, json!({"batch_size": 6, "seed": 2, "patience": 0})).await;
    let id = created["session_id"].as_str().unwrap();
    let (token, labels) = answer(&app, &oracle, id).await;

    let mut partial = labels.as_object().unwrap().clone();
    let dropped: Vec<String> = partial.keys().take(2).cloned().collect();
    for k in &dropped {
        partial.remove(k);
    }
    let (status, err) =
        call(&app, "POST", &format!("/sessions/{id}/labels"), Some(json!({"batch_token": token, "labels": partial})))
            .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let mut missing: Vec<String> = serde_json::from_value(err["missing"].clone()).unwrap();
    missing.sort();
    let mut expected = dropped.clone();
    expected.sort();
    assert_eq!(missing, expected);

    let submission = json!({"batch_token": token, "labels": labels});
    let (status, report) = call(&app, "POST", &format!("/sessions/{id}/labels"), Some(submission.clone())).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["point"]["iteration"], 1);
    assert_eq!(report["point"]["labeled_count"], 46);
    assert_eq!(report["next_batch_token"], format!("{id}-1"));

    let (status, curve) = call(&app, "GET", &format!("/sessions/{id}/curve"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(curve["points"].as_array().unwrap().len(), 2);

    let (status, replay) = call(&app, "POST", &format!("/sessions/{id}/labels"), Some(submission)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(replay["original"], report);

    let (status, _) =
        call(&app, "POST", &format!("/sessions/{id}/labels"), Some(json!({"batch_token": "bogus", "labels": {}})))
            .await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, curve_after) = call(&app, "GET", &format!("/sessions/{id}/curve"), None).await;
    assert_eq!(curve_after, curve);
}

#[tokio::test]
async fn invalid_label_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (app, oracle) = app(dir.path());
    let created = create(&app, json!({"batch_size": 2})).await;
    let id = created["session_id"].as_str().unwrap();
    let (token, labels) = answer(&app, &oracle, id).await;
    let mut bad = labels.as_object().unwrap().clone();
    let first = bad.keys().next().unwrap().clone();
    bad.insert(first, json!("maybe"));
    let (status, _) =
        call(&app, "POST", &format!("/sessions/{id}/labels"), Some(json!({"batch_token": token, "labels": bad}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn exhausted_pool_completes_session() {
    let dir = tempfile::tempdir().unwrap();
    let (app, oracle) = app(dir.path());
    let created = create(&app, json!({"batch_size": 150, "patience": 0})).await;
    let id = created["session_id"].as_str().unwrap();
    for round in 0..2 {
        let (token, labels) = answer(&app, &oracle, id).await;
        let (status, report) = call(
            &app,
            "POST",
            &format!("/sessions/{id}/labels"),
            Some(json!({"batch_token": token, "labels": labels})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(report["complete"], round == 1);
    }
    let (status, batch) = call(&app, "GET", &format!("/sessions/{id}/batch"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(batch["complete"], true);
    assert!(batch["instances"].as_array().unwrap().is_empty());
    assert_eq!(batch["status"]["reason"], "pool_exhausted");
    let (status, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/labels"),
        Some(json!({"batch_token": format!("{id}-2"), "labels": {}})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_submissions_apply_once() {
    let dir = tempfile::tempdir().unwrap();
    let (app, oracle) = app(dir.path());
    let created = create(&app, json!({"batch_size": 10, "patience": 0})).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    let (token, labels) = answer(&app, &oracle, &id).await;
    let body = json!({"batch_token": token, "labels": labels});
    let uri = format!("/sessions/{id}/labels");
    let attempts: Vec<_> = (0..4)
        .map(|_| {
            let (app, uri, body) = (app.clone(), uri.clone(), body.clone());
            tokio::spawn(async move { call(&app, "POST", &uri, Some(body)).await.0 })
        })
        .collect();
    let mut statuses = Vec::new();
    for a in attempts {
        statuses.push(a.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 1, "{statuses:?}");
    assert!(statuses.iter().all(|s| *s == StatusCode::OK || *s == StatusCode::CONFLICT));
    let (_, curve) = call(&app, "GET", &format!("/sessions/{id}/curve"), None).await;
    assert_eq!(curve["points"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (first, oracle) = app(dir.path());
    let created = create(&first, json!({"batch_size": 8, "seed": 4, "patience": 0})).await;
    let id = created["session_id"].as_str().unwrap();
    let (token, labels) = answer(&first, &oracle, id).await;
    let (_, report) = call(
        &first,
        "POST",
        &format!("/sessions/{id}/labels"),
        Some(json!({"batch_token": token, "labels": labels.clone()})),
    )
    .await;
    let (_, curve) = call(&first, "GET", &format!("/sessions/{id}/curve"), None).await;
    let (_, batch) = call(&first, "GET", &format!("/sessions/{id}/batch"), None).await;
    drop(first);

    let (second, _) = app(dir.path());
    assert_eq!(call(&second, "GET", &format!("/sessions/{id}/curve"), None).await.1, curve);
    assert_eq!(call(&second, "GET", &format!("/sessions/{id}/batch"), None).await.1, batch);
    let (status, replay) =
        call(&second, "POST", &format!("/sessions/{id}/labels"), Some(json!({"batch_token": token, "labels": labels})))
            .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(replay["original"], report);

    let fresh = create(&second, json!({})).await;
    assert_ne!(fresh["session_id"], id);
}

#[tokio::test]
async fn scorecard_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (status, card) = call(&app, "GET", "/users/u000007/scorecard", None).await;
    assert_eq!(status, StatusCode::OK);
    let row: ScoreRow = serde_json::from_value(card).unwrap();
    let parts = row.card().influence_components();
    let mean = parts.iter().sum::<f64>() / 5.0;
    assert!((row.influence_score - mean).abs() < 1e-12);
    let (status, _) = call(&app, "GET", "/users/nobody/scorecard", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn startup_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        listen: "127.0.0.1:0".into(),
        dataset: dir.path().join("missing.csv"),
        data_dir: dir.path().join("data"),
        scorecards: None,
        tweets: None,
        ui_dir: None,
    };
    assert!(matches!(trustscore_service::serve(config.clone()).await, Err(StartupError::Dataset { .. })));

    let dataset = dir.path().join("ds.csv");
    trustscore_core::dataset::save_dataset(&prepare(&SETUP).unwrap().dataset, &dataset).unwrap();
    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let busy = ServiceConfig { listen: held.local_addr().unwrap().to_string(), dataset, ..config };
    assert!(matches!(trustscore_service::serve(busy).await, Err(StartupError::Bind { .. })));
}

#[tokio::test]
async fn labels_accept_several_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let created = create(&app, json!({"batch_size": 4, "patience": 0})).await;
    let id = created["session_id"].as_str().unwrap();
    let (_, batch) = call(&app, "GET", &format!("/sessions/{id}/batch"), None).await;
    let ids: Vec<&str> =
        batch["instances"].as_array().unwrap().iter().map(|i| i["user_id"].as_str().unwrap()).collect();
    let encodings = [json!("trustworthy"), json!(0), json!(true), json!("untrustworthy")];
    let labels: HashMap<&str, Value> = ids.iter().copied().zip(encodings).collect();
    let (status, report) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/labels"),
        Some(json!({"batch_token": batch["batch_token"], "labels": labels})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{report}");
}
