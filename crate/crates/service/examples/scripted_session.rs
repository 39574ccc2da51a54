//! Drive the HTTP API with a simulated user: create a session, answer every
//! query, then print the learned reward surface as a coarse heat map.
//!
//!     cargo run --release -p prefgp-service --example scripted_session

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use prefgp::experiment::stream_rng;
use prefgp::sim_env::oracle_respond;
use prefgp::{FeatureVector, Preference, RewardKind, TrueReward};
use prefgp_service::{router, SessionStore};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> Result<Value, Box<dyn std::error::Error>> {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let body = body.map(|v| Body::from(v.to_string())).unwrap_or_else(Body::empty);
    let resp = app.clone().oneshot(req.body(body)?).await?;
    let status = resp.status();
    let value: Value = serde_json::from_slice(&resp.into_body().collect().await?.to_bytes())?;
    if !status.is_success() {
        return Err(format!("{uri}: {status} {value}").into());
    }
    Ok(value)
}

fn features(candidate: &Value) -> FeatureVector {
    let coords = candidate["features"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    FeatureVector::new(coords).unwrap()
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let app = router(Arc::new(SessionStore::in_memory()));
    let created = call(&app, Method::POST, "/sessions", Some(json!({"env": "minigolf2d", "seed": 5, "budget": 15}))).await?;
    let id = created["id"].as_str().unwrap().to_string();
    println!("session {id}: features {}", created["feature_names"]);

    let truth = TrueReward::sample(RewardKind::Poly2, 2, 1.0, &mut stream_rng(5, 1))?;
    let mut user = stream_rng(5, 7);
    loop {
        let q = call(&app, Method::GET, &format!("/sessions/{id}/query"), None).await?;
        if q["status"] == "complete" {
            break;
        }
        let answer = oracle_respond(&truth, &features(&q["first"]), &features(&q["second"]), &mut user);
        let choice = if answer == Preference::First { "first" } else { "second" };
        println!(
            "q{:<2} {:>3} vs {:>3}  {:.3} bits  -> {choice}",
            q["asked"].as_u64().unwrap() + 1,
            q["first"]["index"],
            q["second"]["index"],
            q["objective"].as_f64().unwrap()
        );
        call(&app, Method::POST, &format!("/sessions/{id}/response"), Some(json!({ "choice": choice }))).await?;
    }

    let surface = call(&app, Method::GET, &format!("/sessions/{id}/surface?grid=9"), None).await?;
    let mean: Vec<Vec<f64>> = serde_json::from_value(surface["mean"].clone())?;
    let (lo, hi) = mean.iter().flatten().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    println!("posterior mean, {} rows x {} columns (row 0 at the bottom):", surface["axes"][1]["name"], surface["axes"][0]["name"]);
    for row in mean.iter().rev() {
        let line: String = row
            .iter()
            .map(|v| shades[(((v - lo) / (hi - lo).max(1e-12)) * 9.0).round() as usize])
            .flat_map(|c| [c, c])
            .collect();
        println!("  |{line}|");
    }
    println!("range [{lo:.3}, {hi:.3}]");
    Ok(())
}
