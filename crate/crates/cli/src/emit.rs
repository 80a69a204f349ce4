//! Report writers and persisted file schemas.
//!
//! Data files are written by hand with floats at 17 significant digits so
//! identical inputs produce byte-identical outputs and every value
//! round-trips losslessly. Reading uses serde on the same schemas.

use serde::Deserialize;
use wavebranch_core::continuation::{BranchPoint, BranchState, WaveField};
use wavebranch_core::frechet::{PhysicalWave, WaveKind};
use wavebranch_core::spectra::SpectrumReport;
use wavebranch_core::stream::solve_stream;
use wavebranch_core::vorticity::VorticityModel;
use wavebranch_core::Result as CoreResult;
use wavebranch_core::WaveError;

/// 17-significant-digit float, the lossless round-trip format.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "null".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "\"inf\"".to_string() } else { "\"-inf\"".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn json_array(values: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*v));
    }
    out.push(']');
    out
}

pub fn spectrum_json(rep: &SpectrumReport, extra: &[(&str, String)]) -> String {
    let mut out = String::from("{");
    out.push_str(&format!("\"problem\":\"{}\"", rep.problem_tag));
    out.push_str(&format!(",\"eigenvalues\":{}", json_array(&rep.eigenvalues)));
    out.push_str(&format!(",\"negative_count\":{}", rep.negative_count));
    match rep.nu0_reference {
        Some(v) => out.push_str(&format!(",\"nu0_reference\":{}", fmt_f64(v))),
        None => out.push_str(",\"nu0_reference\":null"),
    }
    out.push_str(&format!(",\"max_residual\":{}", fmt_f64(rep.max_residual)));
    for (k, v) in extra {
        out.push_str(&format!(",\"{k}\":{v}"));
    }
    out.push('}');
    out.push('\n');
    out
}

// ---------------------------------------------------------------- wave files

#[derive(Deserialize)]
struct WaveFileRaw {
    kind: String,
    omega: Vec<f64>,
    s: f64,
    r: f64,
    length: f64,
    nx: usize,
    ny: usize,
    xi: Vec<f64>,
    psi: Vec<f64>,
}

/// Serialize a physical wave with its generating stream parameters.
pub fn wave_to_json(wave: &PhysicalWave) -> String {
    let kind = match wave.kind {
        WaveKind::SolitaryTruncated => "solitary-truncated",
        WaveKind::PeriodicCell => "periodic-cell",
    };
    let mut out = String::from("{");
    out.push_str(&format!("\"kind\":\"{kind}\""));
    out.push_str(&format!(",\"omega\":{}", json_array(wave.stream.model().coeffs())));
    out.push_str(&format!(",\"s\":{}", fmt_f64(wave.stream.s())));
    out.push_str(&format!(",\"r\":{}", fmt_f64(wave.r)));
    out.push_str(&format!(",\"length\":{}", fmt_f64(wave.length())));
    out.push_str(&format!(",\"nx\":{},\"ny\":{}", wave.nx(), wave.ny()));
    out.push_str(&format!(",\"xi\":{}", json_array(&wave.xi)));
    out.push_str(&format!(",\"psi\":{}", json_array(&wave.psi)));
    out.push_str("}\n");
    out
}

/// Rebuild a wave (and its stream) from the persisted schema.
pub fn wave_from_json(text: &str) -> CoreResult<PhysicalWave> {
    let raw: WaveFileRaw = serde_json::from_str(text)
        .map_err(|_| WaveError::InvalidInput { what: "wave file does not match the schema" })?;
    let kind = match raw.kind.as_str() {
        "solitary-truncated" => WaveKind::SolitaryTruncated,
        "periodic-cell" => WaveKind::PeriodicCell,
        _ => return Err(WaveError::InvalidInput { what: "unknown wave kind" }),
    };
    if raw.xi.len() != raw.nx + 1 || raw.psi.len() != (raw.nx + 1) * (raw.ny + 1) {
        return Err(WaveError::InvalidInput { what: "wave file arrays disagree with nx, ny" });
    }
    let model = VorticityModel::new(&raw.omega)?;
    let stream = solve_stream(&model, raw.s, 512)?;
    let xs: Vec<f64> = (0..=raw.nx).map(|i| raw.length * i as f64 / raw.nx as f64).collect();
    let etas: Vec<f64> = (0..=raw.ny).map(|j| j as f64 / raw.ny as f64).collect();
    let wave = PhysicalWave { kind, xs, etas, xi: raw.xi, psi: raw.psi, r: raw.r, stream };
    wave.validate()?;
    Ok(wave)
}

// -------------------------------------------------------------- branch files

#[derive(Deserialize)]
struct BranchPointRaw {
    amplitude: f64,
    lambda: f64,
    newton_iterations: usize,
    final_residual: f64,
    w: Vec<f64>,
}

#[derive(Deserialize)]
struct BranchFileRaw {
    omega: Vec<f64>,
    s: f64,
    n_q: usize,
    n_p: usize,
    points: Vec<BranchPointRaw>,
    stopped_early: bool,
}

/// Serialize a branch (grids row-major by q index, then p).
pub fn branch_to_json(state: &BranchState) -> String {
    let first = &state.points[0].field;
    let stream = first.stream();
    let mut out = String::from("{");
    out.push_str(&format!("\"omega\":{}", json_array(stream.model().coeffs())));
    out.push_str(&format!(",\"s\":{}", fmt_f64(stream.s())));
    out.push_str(&format!(",\"r\":{}", fmt_f64(stream.bernoulli())));
    out.push_str(&format!(",\"n_q\":{},\"n_p\":{}", 2 * first.m(), first.np()));
    out.push_str(&format!(",\"tau_star\":{}", fmt_f64(first.tau_star)));
    out.push_str(&format!(",\"lambda0\":{}", fmt_f64(first.lambda0)));
    out.push_str(&format!(",\"stopped_early\":{}", state.stopped_early));
    out.push_str(",\"points\":[");
    for (k, p) in state.points.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"amplitude\":{},\"lambda\":{},\"newton_iterations\":{},\"final_residual\":{},\"w\":{}}}",
            fmt_f64(p.amplitude),
            fmt_f64(p.lambda),
            p.newton_iterations,
            fmt_f64(p.final_residual),
            json_array(&p.field.w)
        ));
    }
    out.push_str("]}\n");
    out
}

/// Rebuild a branch state from the persisted schema.
pub fn branch_from_json(text: &str) -> CoreResult<BranchState> {
    let raw: BranchFileRaw = serde_json::from_str(text)
        .map_err(|_| WaveError::InvalidInput { what: "branch file does not match the schema" })?;
    let model = VorticityModel::new(&raw.omega)?;
    let stream = solve_stream(&model, raw.s, 512)?;
    let mut points = Vec::with_capacity(raw.points.len());
    for p in &raw.points {
        let mut field = WaveField::uniform(&stream, raw.n_q, raw.n_p)?;
        if p.w.len() != field.w.len() {
            return Err(WaveError::InvalidInput { what: "branch file grid size mismatch" });
        }
        field.w.copy_from_slice(&p.w);
        field.lambda = p.lambda;
        points.push(BranchPoint {
            amplitude: p.amplitude,
            lambda: p.lambda,
            field,
            newton_iterations: p.newton_iterations,
            final_residual: p.final_residual,
            quad_ratio: 0.0,
        });
    }
    if points.is_empty() {
        return Err(WaveError::InvalidInput { what: "branch file has no points" });
    }
    Ok(BranchState { points, stopped_early: raw.stopped_early })
}
