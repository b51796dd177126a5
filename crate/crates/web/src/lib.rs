//! Browser bindings: α tables, exact spectra of expression documents and the
//! Jacobi classification. Every export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qes_core::abstract_jacobi;
use qes_core::expr;
use qes_core::gens;
use qes_core::rational;
use qes_core::verify::{self, SpectrumOptions};

/// Largest Δ the page will classify; the expansion grows like (2Δ)!.
pub const MAX_CLASSIFY_DELTA: u32 = 4;

pub fn alpha_json(delta: u32) -> String {
    let a = gens::solve_alpha(delta);
    let values: Vec<String> = a.values.iter().map(rational::format).collect();
    json!({ "delta": delta, "alpha": values }).to_string()
}

pub fn spectrum_json(document: &str, float_fallback: bool) -> Result<String, String> {
    let doc = expr::parse_document(document).map_err(|e| e.to_string())?;
    let space = doc.context.space().map_err(|e| e.to_string())?;
    let report = verify::spectrum(&doc.operator, &space, SpectrumOptions { float_fallback }).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    v["operator"] = Value::String(match &doc.operator {
        expr::Operator::Scalar(s) => s.to_string(),
        expr::Operator::Graded(g) => g.to_string(),
    });
    Ok(v.to_string())
}

pub fn classify_json(delta_max: u32) -> Result<String, String> {
    if delta_max > MAX_CLASSIFY_DELTA {
        return Err(format!("Δ_max is capped at {MAX_CLASSIFY_DELTA} in the browser"));
    }
    let reports = abstract_jacobi::classify(delta_max).map_err(|e| e.to_string())?;
    serde_json::to_string(&reports).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn alpha(delta: u32) -> String {
    alpha_json(delta)
}

#[wasm_bindgen]
pub fn spectrum(document: &str, float_fallback: bool) -> Result<String, JsError> {
    spectrum_json(document, float_fallback).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(delta_max: u32) -> Result<String, JsError> {
    classify_json(delta_max).map_err(|e| JsError::new(&e))
}
