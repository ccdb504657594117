//! Browser bindings. Every export takes and returns plain text so the page
//! can stay a single static file.

use wasm_bindgen::prelude::*;

use resaware::cli::simulation_report_with;
use resaware::extent::{extent_generic, extent_recursive};
use resaware::model::parse_model;
use resaware::strategy::{parse_strategy, synth_buchi};

fn extent_text(model: &str, engine: &str) -> Result<String, String> {
    let m = parse_model(model).map_err(|e| e.to_string())?;
    match engine {
        "recursive" | "fig1" => Ok(extent_recursive(&m)
            .map_err(|e| e.to_string())?
            .0
            .render(&m)),
        _ => Ok(extent_generic(&m).render(&m)),
    }
}

fn synthesize_text(model: &str) -> Result<String, String> {
    let m = parse_model(model).map_err(|e| e.to_string())?;
    Ok(synth_buchi(&m)
        .map_err(|e| e.to_string())?
        .reduced
        .render(&m))
}

fn simulate_text(
    model: &str,
    strategy: &str,
    from: &str,
    mem: &str,
    adversary: &str,
    steps: usize,
) -> Result<String, String> {
    let m = parse_model(model).map_err(|e| e.to_string())?;
    let reduced = if strategy.trim().is_empty() {
        synth_buchi(&m).map_err(|e| e.to_string())?.reduced
    } else {
        parse_strategy(&m, strategy).map_err(|e| e.to_string())?
    };
    simulation_report_with(&m, &reduced, from, mem, steps, adversary).map_err(|e| e.to_string())
}

/// `state=value` lines; `engine` is `generic` or `recursive`.
#[wasm_bindgen]
pub fn extent(model: &str, engine: &str) -> Result<String, JsError> {
    extent_text(model, engine).map_err(|e| JsError::new(&e))
}

/// The strategy file of a Büchi model.
#[wasm_bindgen]
pub fn synthesize(model: &str) -> Result<String, JsError> {
    synthesize_text(model).map_err(|e| JsError::new(&e))
}

/// Configuration trace and verdict. An empty strategy is synthesized first.
#[wasm_bindgen]
pub fn simulate(
    model: &str,
    strategy: &str,
    from: &str,
    mem: &str,
    adversary: &str,
    steps: usize,
) -> Result<String, JsError> {
    simulate_text(model, strategy, from, mem, adversary, steps).map_err(|e| JsError::new(&e))
}
