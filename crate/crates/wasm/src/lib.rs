//! Browser bindings. Every export returns a JSON string; errors become JS exceptions.

use std::path::Path;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use skewrank::experiments::{
    irt_trial, nlogn_samples, recovery_trial, IrtSpec, RecoveryTrialSpec, ScoreModel,
};
use skewrank::io::parse_ratings;
use skewrank::pipeline::{aggregate_table, rank_aggregated};
use skewrank::solver::SolverConfig;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn solver(rank: usize) -> SolverConfig {
    SolverConfig { rank, ..Default::default() }
}

/// Ranks the items in a `voter,item,rating` CSV document.
#[wasm_bindgen]
pub fn rank_csv(text: &str, method: &str, min_support: usize, rank: usize) -> Result<String, JsValue> {
    rank_csv_json(text, method, min_support, rank).map(|v| v.to_string()).map_err(fail)
}

fn rank_csv_json(text: &str, method: &str, min_support: usize, rank: usize) -> skewrank::Result<Value> {
    let source = Path::new("input");
    let table = parse_ratings(text.as_bytes(), source, b',')?;
    let agg = aggregate_table(&table, source, method.parse()?, 0)?;
    let run = rank_aggregated(&agg, min_support, &solver(rank), 1.0)?;
    let ranking: Vec<Value> = run
        .ranking
        .items
        .iter()
        .map(|r| json!({ "rank": r.rank, "id": r.id, "score": r.score }))
        .collect();
    Ok(json!({
        "ranking": ranking,
        "pairs": run.samples.len() / 2,
        "iterations": run.outcome.iterations,
        "converged": run.outcome.converged,
        "solver_residual": run.solver_residual.value,
        "score_residual": run.score_residual.value,
        "nu": run.coherence.as_ref().map(|c| c.nu).ok(),
    }))
}

/// Fraction of noiseless uniform instances recovered at each multiple of `n ln n` samples.
#[wasm_bindgen]
pub fn recovery_curve(n: usize, trials: usize, max_multiplier: usize, seed: u64) -> Result<String, JsValue> {
    let mut points = Vec::new();
    for mult in 1..=max_multiplier {
        let spec = RecoveryTrialSpec {
            n,
            num_samples: nlogn_samples(n, mult as f64),
            noise_eps: 0.0,
            score_model: ScoreModel::UniformRandom,
            seed,
            trials,
        };
        let report = recovery_trial(&spec, &solver(2)).map_err(fail)?;
        points.push(json!({
            "multiplier": mult,
            "samples": spec.num_samples,
            "success": report.success_fraction(),
        }));
    }
    Ok(Value::Array(points).to_string())
}

/// One synthetic rating trial: Kendall tau of completion scores and of mean ratings.
#[wasm_bindgen]
pub fn irt(users: usize, items: usize, ratings_per_user: f64, eps: f64, seed: u64) -> Result<String, JsValue> {
    let spec = IrtSpec {
        num_users: users,
        num_items: items,
        avg_ratings_per_user: ratings_per_user,
        noise_eps: eps,
        seed,
        trials: 1,
    };
    let t = irt_trial(&spec, &solver(2), 0).map_err(fail)?;
    Ok(json!({
        "tau_completion": t.tau_nn,
        "tau_mean": t.tau_mean,
        "unrated_items": t.unrated_items,
        "converged": t.converged,
        "iterations": t.iterations,
    })
    .to_string())
}
