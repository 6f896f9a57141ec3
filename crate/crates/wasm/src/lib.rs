//! Browser bindings for the response-curve explorer.
//!
//! Three operations are exposed, all speaking JSON strings across the
//! boundary: optimize a band configuration and return the resulting curve,
//! evaluate the curve for explicit angles, and overlay the dephased
//! response for small degrees. Errors come back as `{"error": "..."}`.

use wasm_bindgen::prelude::*;

use gqspi_core::{
    dephasing_response_analytic, gqsp_build, optimize_angles, p_err_multi, response_coefficients,
    response_curve, DephasingSchedule, Objective, OptimizationProblem, PhaseAngles, ThresholdSpec,
};

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn angles_json(a: &PhaseAngles) -> serde_json::Value {
    serde_json::json!({
        "theta": a.theta(),
        "phi": a.phi(),
        "lambda0": a.lambda0(),
    })
}

fn parse_angles(angles: &str) -> Result<PhaseAngles, String> {
    let v: serde_json::Value = serde_json::from_str(angles).map_err(|e| e.to_string())?;
    let grab = |key: &str| -> Result<Vec<f64>, String> {
        v[key]
            .as_array()
            .ok_or_else(|| format!("missing {key}"))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| format!("bad {key} entry")))
            .collect()
    };
    let theta = grab("theta")?;
    let phi = grab("phi")?;
    let lambda0 = v["lambda0"].as_f64().unwrap_or(0.0);
    PhaseAngles::new(theta, phi, lambda0).map_err(|e| e.to_string())
}

fn curve_json(a: &PhaseAngles, kappa: f64, points: usize) -> Result<serde_json::Value, String> {
    let spec = response_coefficients(&gqsp_build(a).map_err(|e| e.to_string())?, kappa)
        .map_err(|e| e.to_string())?;
    let curve = response_curve(&spec, points.clamp(2, 4096)).map_err(|e| e.to_string())?;
    let pts: Vec<[f64; 2]> = curve
        .beta_grid()
        .iter()
        .zip(curve.values())
        .map(|(b, v)| [*b, *v])
        .collect();
    Ok(serde_json::json!({
        "kappa": kappa,
        "period": curve.response_period(),
        "points": pts,
    }))
}

/// Optimize phase angles for decision bands given as `[[lo, hi], ...]`
/// (fractions of the half-period), then return the angles, the achieved
/// error density, and the sampled curve.
#[wasm_bindgen]
pub fn optimize_and_curve(
    degree: usize,
    kappa: f64,
    bands_json: &str,
    seed: u64,
    restarts: usize,
    points: usize,
) -> String {
    let run = || -> Result<String, String> {
        let fracs: Vec<(f64, f64)> =
            serde_json::from_str(bands_json).map_err(|e| e.to_string())?;
        let half = 0.5 * std::f64::consts::PI / kappa;
        let bands: Vec<(f64, f64)> = fracs
            .iter()
            .map(|(lo, hi)| (lo * half, hi * half))
            .collect();
        let thr = ThresholdSpec::new(bands.clone(), kappa).map_err(|e| e.to_string())?;
        let objective = if bands.len() == 1 {
            Objective::Single
        } else {
            Objective::Multi
        };
        let mut problem = OptimizationProblem::new(degree.min(16), thr.clone(), objective);
        problem.seed = seed;
        problem.restarts = restarts.clamp(1, 32);
        problem.max_iters = 120;
        let result = optimize_angles(&problem).map_err(|e| e.to_string())?;
        let spec = response_coefficients(
            &gqsp_build(&result.best_angles).map_err(|e| e.to_string())?,
            kappa,
        )
        .map_err(|e| e.to_string())?;
        let p_err = p_err_multi(&spec, &thr).map_err(|e| e.to_string())?;
        let mut doc = curve_json(&result.best_angles, kappa, points)?;
        doc["angles"] = angles_json(&result.best_angles);
        doc["p_err"] = serde_json::json!(p_err);
        doc["bands"] = serde_json::json!(bands);
        doc["converged"] = serde_json::json!(result.converged);
        Ok(doc.to_string())
    };
    run().unwrap_or_else(err_json)
}

/// Curve for explicit angles: `{"theta": [...], "phi": [...], "lambda0": x}`.
#[wasm_bindgen]
pub fn response_curve_for(angles_json_str: &str, kappa: f64, points: usize) -> String {
    let run = || -> Result<String, String> {
        let a = parse_angles(angles_json_str)?;
        let mut doc = curve_json(&a, kappa, points)?;
        doc["angles"] = angles_json(&a);
        Ok(doc.to_string())
    };
    run().unwrap_or_else(err_json)
}

/// Dephased response overlay (constant per-kick strength `gamma`); the
/// quadruple sign-vector sum limits this to degree 3.
#[wasm_bindgen]
pub fn dephased_curve_for(
    angles_json_str: &str,
    kappa: f64,
    gamma: f64,
    points: usize,
) -> String {
    let run = || -> Result<String, String> {
        let a = parse_angles(angles_json_str)?;
        let sched =
            DephasingSchedule::constant(gamma, a.degree()).map_err(|e| e.to_string())?;
        let period = std::f64::consts::PI / kappa;
        let n = points.clamp(2, 2048);
        let mut pts = Vec::with_capacity(n);
        for j in 0..n {
            let beta = -0.5 * period + period * j as f64 / n as f64;
            let p = dephasing_response_analytic(&a, kappa, beta, &sched)
                .map_err(|e| e.to_string())?;
            pts.push([beta, p]);
        }
        Ok(serde_json::json!({
            "kappa": kappa,
            "gamma": gamma,
            "period": period,
            "points": pts,
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimize_and_curve_roundtrip() {
        let out = optimize_and_curve(2, 0.25, "[[-0.3, 0.5]]", 7, 3, 64);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(doc["error"].is_null(), "{out}");
        assert_eq!(doc["points"].as_array().unwrap().len(), 64);
        assert!(doc["p_err"].as_f64().unwrap() < 0.5);
        // Curve feeds back through the explicit-angle entry point.
        let again = response_curve_for(&doc["angles"].to_string(), 0.25, 64);
        let doc2: serde_json::Value = serde_json::from_str(&again).unwrap();
        assert_eq!(doc["points"], doc2["points"]);
    }

    #[test]
    fn dephased_curve_reduces_at_zero_gamma() {
        let angles = r#"{"theta": [0.7, -0.3, 0.9], "phi": [0.1, 0.0, -0.4], "lambda0": 0.2}"#;
        let clean: serde_json::Value =
            serde_json::from_str(&response_curve_for(angles, 0.25, 32)).unwrap();
        let noisy: serde_json::Value =
            serde_json::from_str(&dephased_curve_for(angles, 0.25, 0.0, 32)).unwrap();
        let a = clean["points"].as_array().unwrap();
        let b = noisy["points"].as_array().unwrap();
        for (x, y) in a.iter().zip(b) {
            let (pa, pb) = (x[1].as_f64().unwrap(), y[1].as_f64().unwrap());
            assert!((pa - pb).abs() < 1e-8);
        }
    }

    #[test]
    fn errors_are_reported_as_json() {
        let out = optimize_and_curve(3, -1.0, "[[-0.3, 0.5]]", 0, 1, 16);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(doc["error"].is_string());
        let out = dephased_curve_for(r#"{"theta": [0,0,0,0,0], "phi": [0,0,0,0,0]}"#, 0.2, 0.1, 16);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(doc["error"].is_string(), "degree 4 exceeds the quadruple-sum budget");
    }
}
