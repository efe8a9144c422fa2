//! File formats for traces, reports and meshes.
//!
//! Every number in a machine-readable file is rounded to 12 significant
//! digits first, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::curve::CurveTrace;
use crate::error::{Error, Result};
use crate::hopf::HopfPatch;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text that reads back as `round_sig(x)`; plain decimals for
/// moderate magnitudes, exponent form otherwise.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    if !r.is_finite() {
        return if r.is_nan() { "nan".into() } else if r > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let m = r.abs();
    if (1e-4..1e15).contains(&m) { format!("{r}") } else { format!("{r:e}") }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `s,kappa,kappa_prime,psi,x,y,z`, one row per sample.
pub fn write_trace_csv(trace: &CurveTrace, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "s,kappa,kappa_prime,psi,x,y,z")?;
    for (st, pt) in trace.states.iter().zip(&trace.points) {
        let row = [st.s, st.kappa, st.kappa_prime, st.psi, pt[0], pt[1], pt[2]].map(fmt_num);
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TraceDocument {
    p: f64,
    a: f64,
    n: Option<u32>,
    m: Option<u32>,
    closure_gap: f64,
    winding_number: i64,
    period: f64,
    periods: u32,
    samples_per_period: usize,
    max_first_integral_residual: f64,
    columns: [&'static str; 7],
    samples: Vec<[f64; 7]>,
}

pub fn write_trace_json(trace: &CurveTrace, w: &mut dyn Write) -> Result<()> {
    let doc = TraceDocument {
        p: trace.p,
        a: trace.a,
        n: trace.index.as_ref().map(|i| i.n),
        m: trace.index.as_ref().map(|i| i.m),
        closure_gap: trace.closure_gap,
        winding_number: trace.winding_number,
        period: trace.period,
        periods: trace.periods,
        samples_per_period: trace.samples_per_period,
        max_first_integral_residual: trace.max_first_integral_residual,
        columns: ["s", "kappa", "kappa_prime", "psi", "x", "y", "z"],
        samples: trace
            .states
            .iter()
            .zip(&trace.points)
            .map(|(st, pt)| [st.s, st.kappa, st.kappa_prime, st.psi, pt[0], pt[1], pt[2]])
            .collect(),
    };
    w.write_all(to_json(&doc)?.as_bytes())?;
    Ok(())
}

/// Orthographic view onto the plane `x = 0`: `(y, z)` inside the unit disc.
/// The curves lie in `x > 0`, so nothing is hidden.
pub fn write_trace_svg(trace: &CurveTrace, w: &mut dyn Write, size: u32) -> Result<()> {
    let half = size as f64 / 2.0;
    let scale = 0.95 * half;
    let map = |y: f64, z: f64| (half + scale * y, half - scale * z);
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#)?;
    writeln!(
        w,
        r##"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="#999" stroke-width="1"/>"##,
        fmt_num(half),
        fmt_num(half),
        fmt_num(scale)
    )?;
    let mut d = String::new();
    for (j, pt) in trace.points.iter().enumerate() {
        let (u, v) = map(pt[1], pt[2]);
        d.push_str(&format!("{}{:.3},{:.3}", if j == 0 { "M" } else { " L" }, u, v));
    }
    writeln!(w, r##"<path d="{d}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##)?;
    writeln!(w, "</svg>")?;
    Ok(())
}

fn projected(patch: &HopfPatch) -> Result<&[[f64; 3]]> {
    patch
        .projected
        .as_deref()
        .ok_or_else(|| Error::Domain("mesh has not been stereographically projected".into()))
}

/// Projected vertices and triangles (1-based) in Wavefront OBJ.
pub fn write_obj(patch: &HopfPatch, w: &mut dyn Write) -> Result<()> {
    let verts = projected(patch)?;
    writeln!(w, "# Hopf torus, {} vertices, {} triangles", verts.len(), 2 * patch.quads.len())?;
    for v in verts {
        writeln!(w, "v {} {} {}", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2]))?;
    }
    for t in patch.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Per-vertex `H = κ/2`, one value per line in vertex order.
pub fn write_mean_curvature(patch: &HopfPatch, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "# H")?;
    for h in &patch.mean_curvature {
        writeln!(w, "{}", fmt_num(*h))?;
    }
    Ok(())
}

/// ASCII PLY with `H` as a vertex property.
pub fn write_ply(patch: &HopfPatch, w: &mut dyn Write) -> Result<()> {
    let verts = projected(patch)?;
    let tris = patch.triangles();
    writeln!(w, "ply\nformat ascii 1.0")?;
    writeln!(w, "element vertex {}", verts.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z\nproperty double H")?;
    writeln!(w, "element face {}", tris.len())?;
    writeln!(w, "property list uchar int vertex_indices\nend_header")?;
    for (v, h) in verts.iter().zip(&patch.mean_curvature) {
        writeln!(w, "{} {} {} {}", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2]), fmt_num(*h))?;
    }
    for t in tris {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<()> {
    w.write_all(to_json(value)?.as_bytes())?;
    Ok(())
}
