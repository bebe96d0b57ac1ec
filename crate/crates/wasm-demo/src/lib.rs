//! Browser bindings: λ bars of an emitted program, the adiabatic outcome
//! distribution, and the ramp curve. Everything returns JSON strings.

use cavity_core::hamiltonian::{ramp, to_mattis, MattisProgram, RampShape};
use cavity_core::instances::{instance_from_json, parse_cnf_with, parse_graph, CnfOptions, Instance, InstanceKind};
use cavity_core::reductions::{encode, ProblemKind, SourceInstance, SubsetSumInstance};
use cavity_core::solvers::adiabatic_simulate;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn source(problem: &str, text: &str, k: Option<usize>) -> Result<SubsetSumInstance, String> {
    let kind: ProblemKind = problem.parse().map_err(|e: cavity_core::Error| e.to_string())?;
    let instance = match kind {
        ProblemKind::Sat3 => SourceInstance::Cnf(parse_cnf_with(text, CnfOptions { pad_to_3sat: true }).map_err(|e| e.to_string())?),
        k if k.takes_graph() => SourceInstance::Graph(parse_graph(text).map_err(|e| e.to_string())?),
        _ => {
            let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let want = match kind {
                ProblemKind::SubsetSum => InstanceKind::SubsetSum,
                _ => InstanceKind::SetSystem,
            };
            match instance_from_json(&v, want).map_err(|e| e.to_string())? {
                Instance::SetSystem(s) => SourceInstance::Sets(s),
                Instance::SubsetSum(r) => return SubsetSumInstance::from_raw(r).map_err(|e| e.to_string()),
                _ => return Err("unsupported instance".into()),
            }
        }
    };
    let k = if kind.needs_k() {
        Some(k.ok_or_else(|| format!("{kind} needs k"))?)
    } else {
        None
    };
    encode(kind, &instance, k).map_err(|e| e.to_string())
}

fn program(problem: &str, text: &str, k: Option<usize>) -> Result<MattisProgram, String> {
    to_mattis(&source(problem, text, k)?).map_err(|e| e.to_string())
}

pub fn lambda_bars_json(problem: &str, text: &str, k: Option<usize>) -> Result<Value, String> {
    let p = program(problem, text, k)?;
    Ok(json!({
        "atoms": p.atoms,
        "lambda": p.lambdas,
        "h": p.fields,
        "positions": p.positions,
        "roles": p.roles,
        "a_max": p.a_max,
    }))
}

pub fn distribution_json(problem: &str, text: &str, k: Option<usize>, shape: &str, time: f64, steps: usize) -> Result<Value, String> {
    let p = program(problem, text, k)?;
    let shape: RampShape = shape.parse().map_err(|e: cavity_core::Error| e.to_string())?;
    let sched = ramp(shape, 101).map_err(|e| e.to_string())?;
    let r = adiabatic_simulate(&p, &sched, time, steps).map_err(|e| e.to_string())?;
    let label = |b: usize| (0..p.atoms).map(|i| if b >> i & 1 == 1 { '1' } else { '0' }).collect::<String>();
    Ok(json!({
        "labels": (0..r.probabilities.len()).map(label).collect::<Vec<_>>(),
        "probabilities": r.probabilities,
        "ground_states": r.ground_states.iter().map(|&b| label(b)).collect::<Vec<_>>(),
        "success_probability": r.success_probability,
        "max_norm_drift": r.max_norm_drift,
    }))
}

pub fn ramp_json(shape: &str, steps: usize) -> Result<Value, String> {
    let shape: RampShape = shape.parse().map_err(|e: cavity_core::Error| e.to_string())?;
    let r = ramp(shape, steps).map_err(|e| e.to_string())?;
    Ok(json!({ "t": (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect::<Vec<_>>(), "s": r.samples }))
}

fn js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn opt_k(k: i32) -> Option<usize> {
    usize::try_from(k).ok()
}

/// λ_i and h_i per atom. Pass `k < 0` for problems without a size parameter.
#[wasm_bindgen]
pub fn lambda_bars(problem: &str, text: &str, k: i32) -> Result<String, JsError> {
    js(lambda_bars_json(problem, text, opt_k(k)))
}

#[wasm_bindgen]
pub fn adiabatic_distribution(problem: &str, text: &str, k: i32, shape: &str, time: f64, steps: usize) -> Result<String, JsError> {
    js(distribution_json(problem, text, opt_k(k), shape, time, steps))
}

#[wasm_bindgen]
pub fn ramp_curve(shape: &str, steps: usize) -> Result<String, JsError> {
    js(ramp_json(shape, steps))
}
