//! JSON report assembly. Every report carries `schema_version` and a
//! provenance block; [`self_check`] refuses to emit one without them.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::expansion::QuadratureGrid;
use crate::quantum::{HERMITIAN_TOL, INDEX_TOL, NORMALIZATION_TOL, PSD_TOL, TRACE_TOL};
use crate::tensor::Tensor;

pub const SCHEMA_VERSION: &str = "1.0";

pub const MEASURE_CONVENTION: &str = "kernel measure dΓ = μ dΩ with ∫dΓ Δ = 1 (spin: μ = (2s+1)/4π); \
order-parameter operators T̂ = A_l ∫dΩ T(u) Δ(u) use the plain solid-angle measure";

pub fn tensor_json(t: &Tensor) -> Value {
    json!({
        "rank": t.rank(),
        "dim": t.dim(),
        "index_order": "row-major",
        "components": t.data(),
    })
}

/// Eigen-decomposition of a symmetric rank-2 tensor, eigenvalues
/// descending. Each eigenvector's largest component is made positive so the
/// output is reproducible.
pub fn eigen_json(t: &Tensor) -> Value {
    let d = t.dim();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (t.get(&[i, j]) + t.get(&[j, i])));
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            // `+ 0.0` turns −0 into +0.
            v.iter_mut().for_each(|x| *x = sign * *x + 0.0);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    json!({
        "eigenvalues": pairs.iter().map(|p| p.0).collect::<Vec<_>>(),
        "eigenvectors": pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>(),
        "director": pairs[0].1,
        "strength": pairs[0].0,
    })
}

pub fn grid_json(grid: &QuadratureGrid) -> Value {
    json!({
        "domain": grid.domain().to_string(),
        "band_limit": grid.band_limit(),
        "nodes": grid.len(),
    })
}

pub fn tolerances_json() -> Value {
    json!({
        "hermitian": HERMITIAN_TOL,
        "trace": TRACE_TOL,
        "psd": PSD_TOL,
        "index": INDEX_TOL,
        "kernel_normalization": NORMALIZATION_TOL,
    })
}

pub struct Report {
    kind: &'static str,
    body: Map<String, Value>,
    grid: Value,
    mu: Option<f64>,
}

impl Report {
    pub fn new(kind: &'static str) -> Self {
        Self { kind, body: Map::new(), grid: Value::Null, mu: None }
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.body.insert(key.into(), value);
        self
    }

    pub fn grid(&mut self, grid: Value) -> &mut Self {
        self.grid = grid;
        self
    }

    pub fn mu(&mut self, mu: f64) -> &mut Self {
        self.mu = Some(mu);
        self
    }

    pub fn finish(self, config: &RunConfig) -> Result<Value> {
        let mut out = Map::new();
        out.insert("schema_version".into(), json!(SCHEMA_VERSION));
        out.insert("kind".into(), json!(self.kind));
        out.extend(self.body);
        out.insert(
            "provenance".into(),
            json!({
                "tool": "qorient",
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "grid": self.grid,
                "measure": MEASURE_CONVENTION,
                "mu": self.mu,
                "tolerances": tolerances_json(),
            }),
        );
        let v = Value::Object(out);
        self_check(&v)?;
        Ok(v)
    }
}

/// A report is well-formed iff it names its schema and carries the full
/// provenance block, including a config that parses back.
pub fn self_check(report: &Value) -> Result<()> {
    let fail = |what: &str| Err(Error::Invariant(format!("report self-check: {what}")));
    if report.get("schema_version").and_then(Value::as_str).is_none() {
        return fail("missing schema_version");
    }
    let Some(p) = report.get("provenance").and_then(Value::as_object) else {
        return fail("missing provenance block");
    };
    for key in ["tool", "version", "config", "grid", "measure", "mu", "tolerances"] {
        if !p.contains_key(key) {
            return fail(&format!("provenance lacks {key:?}"));
        }
    }
    if serde_json::from_value::<RunConfig>(p["config"].clone()).is_err() {
        return fail("provenance config does not parse");
    }
    Ok(())
}
