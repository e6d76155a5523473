use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::{Command, OutputFormat, RunConfig, StateSpec, SystemSpec};
use super::report::{eigen_json, grid_json, tensor_json, Report};
use crate::angular::{check_projection, clebsch_gordan, HalfInteger};
use crate::error::{Error, Result};
use crate::expansion::{build_grid, expand_cartesian, expand_rotation, Domain, ExpansionResult, GridSamples};
use crate::fermi::{
    estimate_pf_threshold, fermi_order_parameters_with_pf, FermiMode, MomentumOccupation, PolarGridSpec,
};
use crate::molecular::{body_axis_nematic, molecular_nematic, molecular_polarization, MolecularTensor, RotationField};
use crate::quantum::{expectation, order_parameter_operator, wigner_from_state, DensityMatrix};
use crate::spin::{nematic_operator_closed, polarization_operator_closed, spin_kernel, SpinSystem};
use crate::tensor::{SpatialDim, Tensor};
use crate::verify::{self, CriterionReport, VerifyOptions};

/// What a command produced: a JSON report or raw text (CSV, tables).
pub enum Output {
    Json(Value),
    Text(String),
}

pub struct Outcome {
    pub output: Output,
    /// Exit status for a run that completed without error.
    pub status: i32,
    /// Printed to stdout in addition to `output` when that goes to a file.
    pub console: Option<String>,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Self { output, status: 0, console: None }
    }
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        Command::OrderParams => order_params(config),
        Command::Expand => expand(config),
        Command::Verify => verify_cmd(config),
        Command::Wigner => wigner(config),
        Command::Clebsch => clebsch(config),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))
}

fn json_only(config: &RunConfig) -> Result<()> {
    if config.format == OutputFormat::Csv {
        return Err(Error::Parse("CSV output is only for grid samples (wigner, clebsch); use --format json".into()));
    }
    Ok(())
}

fn load_state(spec: &StateSpec, sys: &SpinSystem) -> Result<DensityMatrix> {
    let n = sys.dim();
    let rho = match spec {
        StateSpec::Mixed => DensityMatrix::maximally_mixed(n),
        StateSpec::Basis(m) => {
            let m: HalfInteger = m.parse()?;
            check_projection(sys.s(), m)?;
            let mut psi = vec![Complex64::new(0.0, 0.0); n];
            psi[sys.index(m)?] = Complex64::new(1.0, 0.0);
            DensityMatrix::pure(&psi)?
        }
        StateSpec::File(path) => serde_json::from_reader(open(path)?).map_err(|e| {
            // Shape errors are malformed input; physics violations surface
            // through the matrix constructor's own message.
            let msg = e.to_string();
            if let Some((_, detail)) = msg.split_once("invariant violated: ") {
                Error::Invariant(format!("{}: {detail}", path.display()))
            } else {
                Error::Parse(format!("{}: {msg}", path.display()))
            }
        })?,
    };
    if rho.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
    }
    Ok(rho)
}

fn max_rank(config: &RunConfig) -> usize {
    config.ranks.iter().copied().max().unwrap_or(0)
}

fn spin_grid_band(config: &RunConfig, s2: usize, rank: usize) -> usize {
    config.band_limit.unwrap_or((2 * s2).max(s2 + rank))
}

fn order_params(config: &RunConfig) -> Result<Outcome> {
    json_only(config)?;
    let system = config.system.as_ref().ok_or_else(|| Error::Parse("order-params needs --system".into()))?;
    let report = match system {
        SystemSpec::Spin { spin, state } => spin_order(config, spin, state)?,
        SystemSpec::Fermi { profile, input, mode, pf_threshold } => {
            let occ = match (profile, input) {
                (Some(p), _) => MomentumOccupation::from_profile(p, &PolarGridSpec::default())?,
                (None, Some(path)) => MomentumOccupation::read_csv(open(path)?)?,
                (None, None) => unreachable!("checked at parse time"),
            };
            fermi_order(config, &occ, *mode, *pf_threshold)?
        }
        SystemSpec::Molecular { density, input, column } => {
            let field = match (density, input) {
                (Some(d), _) => RotationField::from_density(build_grid(Domain::SO3, config.band_limit.unwrap_or(32))?, d)?,
                (None, Some(path)) => {
                    let samples = GridSamples::read_csv(open(path)?, config.band_limit)?;
                    let col = column.clone().unwrap_or_else(|| samples.columns[0].clone());
                    RotationField::from_samples(&samples, &col, true)?
                }
                (None, None) => unreachable!("checked at parse time"),
            };
            molecular_order(config, &field)?
        }
        SystemSpec::Classical { input, domain, column } => {
            let (samples, col) = read_samples(input, *domain, column.as_deref(), config.band_limit)?;
            classical_order(config, &samples, &col)?
        }
    };
    Ok(Outcome::ok(Output::Json(report.finish(config)?)))
}

fn spin_order(config: &RunConfig, spin: &str, state: &StateSpec) -> Result<Report> {
    let sys = SpinSystem::new(spin.parse()?)?;
    let rho = load_state(state, &sys)?;
    let s2 = sys.s().twice() as usize;
    let grid = build_grid(Domain::S2, spin_grid_band(config, s2, max_rank(config)))?;
    let kernel = spin_kernel(sys.s(), &grid)?;
    let mut results = Vec::new();
    for &rank in &config.ranks {
        let op = order_parameter_operator(&kernel, SpatialDim::Three, rank)?;
        let value = expectation(&rho, &op)?;
        let mut entry = json!({ "rank": rank, "tensor": tensor_json(value.tensor()) });
        let closed = match rank {
            1 => Some(polarization_operator_closed(sys.s())),
            2 => Some(nematic_operator_closed(sys.s())),
            _ => None,
        };
        if let Some(c) = &closed {
            entry["closed_form_deviation"] = json!(op.max_abs_diff(c));
        }
        if rank == 2 {
            entry["eigen"] = eigen_json(value.tensor());
        }
        let note = closed.as_ref().and_then(|c| c.note().map(str::to_string)).or_else(|| {
            (rank > s2).then(|| format!("rank {rank} exceeds 2s = {s2}: the spin kernel carries no such component, the operator vanishes"))
        });
        if let Some(n) = note {
            entry["note"] = json!(n);
        }
        results.push(entry);
    }
    let mut r = Report::new("order_parameters");
    r.set("system", json!({ "kind": "spin", "s": sys.s().to_string(), "dim": sys.dim() }))
        .set("results", Value::Array(results))
        .grid(grid_json(&grid))
        .mu(kernel.mu());
    Ok(r)
}

fn fermi_order(config: &RunConfig, occ: &MomentumOccupation, mode: FermiMode, threshold: f64) -> Result<Report> {
    let p_f = match estimate_pf_threshold(occ, threshold) {
        Ok(p) => Some(p),
        Err(e) if mode == FermiMode::FermiSurface => return Err(e),
        Err(_) => None,
    };
    let band = max_rank(config);
    let op = fermi_order_parameters_with_pf(occ, band, mode, p_f.unwrap_or(1.0))?;
    let results: Vec<Value> = config
        .ranks
        .iter()
        .map(|&rank| {
            let t = op.tensors[rank].tensor();
            let mut entry = json!({ "rank": rank, "tensor": tensor_json(t) });
            if rank == 2 {
                entry["eigen"] = eigen_json(t);
            }
            entry
        })
        .collect();
    let mut r = Report::new("order_parameters");
    r.set(
        "system",
        json!({
            "kind": "fermi",
            "mode": mode,
            "p_f": p_f,
            "p_f_threshold": threshold,
            "particle_density": op.particle_density,
            "normalization": "expectation per particle: ∫n σ / ∫n",
        }),
    )
    .set("results", Value::Array(results))
    .grid(json!({
        "domain": "polar",
        "radial_nodes": occ.radii().len(),
        "angular_nodes": occ.angles().len(),
    }));
    Ok(r)
}

fn classical_tensor(t: &MolecularTensor) -> &Tensor {
    t.classical().expect("scalar field gives classical tensors")
}

fn molecular_order(config: &RunConfig, field: &RotationField) -> Result<Report> {
    let mut results = Vec::new();
    for &rank in &config.ranks {
        let entry = match rank {
            1 => {
                let p = molecular_polarization(field)?;
                json!({
                    "rank": 1,
                    "name": "P",
                    "index_order": "(i, j): i lab frame, j body frame",
                    "tensor": tensor_json(classical_tensor(&p)),
                })
            }
            2 => {
                let q = molecular_nematic(field)?;
                let q = classical_tensor(&q);
                let axis = body_axis_nematic(q).scale(3.0 * std::f64::consts::PI);
                json!({
                    "rank": 2,
                    "name": "Q",
                    "index_order": "(i, j, k, l): i, k lab frame; j, l body frame",
                    "tensor": tensor_json(q),
                    "measured_properties": q_properties(q),
                    "body_z_axis_nematic": { "tensor": tensor_json(&axis), "eigen": eigen_json(&axis) },
                })
            }
            _ => return Err(Error::Parse(format!("molecular order parameters exist for ranks 1 and 2, not {rank}"))),
        };
        results.push(entry);
    }
    let mut r = Report::new("order_parameters");
    r.set("system", json!({ "kind": "molecular" }))
        .set("results", Value::Array(results))
        .grid(grid_json(field.grid()));
    Ok(r)
}

/// Symmetries of `Q_ijkl` that are measured rather than assumed.
fn q_properties(q: &Tensor) -> Value {
    let mut exchange = 0.0f64;
    let mut lab_sym = 0.0f64;
    let mut body_sym = 0.0f64;
    let mut lab_trace = 0.0f64;
    let mut body_trace = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let v = q.get(&[i, j, k, l]);
                    exchange = exchange.max((v - q.get(&[k, l, i, j])).abs());
                    lab_sym = lab_sym.max((v - q.get(&[k, j, i, l])).abs());
                    body_sym = body_sym.max((v - q.get(&[i, l, k, j])).abs());
                }
            }
            lab_trace = lab_trace.max((0..3).map(|a| q.get(&[a, i, a, j])).sum::<f64>().abs());
            body_trace = body_trace.max((0..3).map(|a| q.get(&[i, a, j, a])).sum::<f64>().abs());
        }
    }
    json!({
        "pair_exchange_defect": exchange,
        "lab_symmetry_defect": lab_sym,
        "body_symmetry_defect": body_sym,
        "lab_trace_defect": lab_trace,
        "body_trace_defect": body_trace,
    })
}

fn read_samples(
    input: &Path,
    domain: Option<Domain>,
    column: Option<&str>,
    band_limit: Option<usize>,
) -> Result<(GridSamples, String)> {
    let samples = GridSamples::read_csv(open(input)?, band_limit)?;
    if let Some(d) = domain {
        if d != samples.grid.domain() {
            return Err(Error::GridMismatch(format!("--domain {d} but the file holds {} samples", samples.grid.domain())));
        }
    }
    let col = match column {
        Some(c) => c.to_string(),
        None => samples.columns[0].clone(),
    };
    if samples.column(&col).is_none() {
        return Err(Error::Parse(format!("no column {col:?} in {}", input.display())));
    }
    Ok((samples, col))
}

/// Largest expansion order a grid supports (products of two band-L
/// functions must integrate exactly).
fn default_order(samples: &GridSamples) -> usize {
    samples.grid.band_limit() / 2
}

fn run_expansion(samples: &GridSamples, col: &str, order: usize) -> Result<ExpansionResult> {
    let values = samples.column(col).expect("column checked");
    match samples.grid.domain() {
        Domain::SO3 => expand_rotation(&samples.grid, values, order),
        _ => expand_cartesian(&samples.grid, values, order),
    }
}

fn classical_order(config: &RunConfig, samples: &GridSamples, col: &str) -> Result<Report> {
    let order = max_rank(config);
    let ex = run_expansion(samples, col, order)?;
    let results: Vec<Value> = config
        .ranks
        .iter()
        .map(|&rank| match ex.cartesian(rank) {
            Some(t) => {
                let mut entry = json!({ "rank": rank, "tensor": tensor_json(t.tensor()) });
                if rank == 2 {
                    entry["eigen"] = eigen_json(t.tensor());
                }
                entry
            }
            None => {
                let c = ex.rotation(rank).expect("rotation coefficients up to the order");
                json!({
                    "rank": rank,
                    "index_order": "(i1…il, j1…jl): lab indices then body indices",
                    "tensor": tensor_json(&c.as_tensor()),
                })
            }
        })
        .collect();
    let mut r = Report::new("order_parameters");
    r.set("system", json!({ "kind": "classical", "column": col, "residual": ex.residual }))
        .set("results", Value::Array(results))
        .grid(grid_json(&samples.grid));
    Ok(r)
}

fn expand(config: &RunConfig) -> Result<Outcome> {
    json_only(config)?;
    let Some(SystemSpec::Classical { input, domain, column }) = &config.system else {
        return Err(Error::Parse("expand needs --input".into()));
    };
    let (samples, col) = read_samples(input, *domain, column.as_deref(), None)?;
    let order = config.band_limit.unwrap_or_else(|| default_order(&samples));
    let ex = run_expansion(&samples, &col, order)?;
    let mut r = Report::new("expansion");
    r.set("column", json!(col))
        .set("order", json!(order))
        .set("residual", json!(ex.residual))
        .set("coefficients", serde_json::to_value(&ex.coefficients)?)
        .set("angular", serde_json::to_value(&ex.angular)?)
        .grid(grid_json(&samples.grid));
    Ok(Outcome::ok(Output::Json(r.finish(config)?)))
}

pub fn format_table(reports: &[CriterionReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<4} {:<20} {:<44} {:>11}   {:<9}\n",
        "", "criterion", "headline check", "measured", "tolerance"
    ));
    for r in reports {
        out.push_str(&format!("{r}\n"));
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    out.push_str(&format!("{} criteria, {} passed, {failed} failed\n", reports.len(), reports.len() - failed));
    out
}

fn verify_cmd(config: &RunConfig) -> Result<Outcome> {
    let opts = VerifyOptions { tolerance: config.tolerance, only: config.only.clone(), seed: config.seed };
    let reports = verify::run(&opts)?;
    let status = if reports.iter().all(CriterionReport::passed) { 0 } else { 3 };
    let table = format_table(&reports);
    // The table always reaches the terminal; with --output the file gets
    // the full JSON report.
    let (output, console) = match config.format {
        OutputFormat::Csv => return Err(Error::Parse("verify writes a table or JSON, not CSV".into())),
        OutputFormat::Json if config.output.is_some() => {
            let mut r = Report::new("verification");
            r.set("criteria", serde_json::to_value(&reports)?).set("passed", json!(status == 0));
            (Output::Json(r.finish(config)?), Some(table))
        }
        OutputFormat::Json => (Output::Text(table), None),
    };
    Ok(Outcome { output, status, console })
}

fn wigner(config: &RunConfig) -> Result<Outcome> {
    match config.system.as_ref() {
        Some(SystemSpec::Spin { spin, state }) => {
            let sys = SpinSystem::new(spin.parse()?)?;
            let rho = load_state(state, &sys)?;
            let s2 = sys.s().twice() as usize;
            let grid = build_grid(Domain::S2, spin_grid_band(config, s2, 0))?;
            let kernel = spin_kernel(sys.s(), &grid)?;
            let w = wigner_from_state(&rho, &kernel)?;
            let samples = GridSamples::new(grid.clone(), "W", w)?;
            let output = match config.format {
                OutputFormat::Csv => {
                    let mut buf = Vec::new();
                    samples.write_csv(&mut buf)?;
                    Output::Text(String::from_utf8(buf).expect("CSV is UTF-8"))
                }
                OutputFormat::Json => {
                    let mut r = Report::new("wigner");
                    r.set("system", json!({ "kind": "spin", "s": sys.s().to_string() }))
                        .set("nodes", json!(grid.nodes().iter().map(|n| [n[0], n[1]]).collect::<Vec<_>>()))
                        .set("weights", json!(grid.weights()))
                        .set("W", json!(samples.column("W")))
                        .grid(grid_json(&grid))
                        .mu(kernel.mu());
                    Output::Json(r.finish(config)?)
                }
            };
            Ok(Outcome::ok(output))
        }
        Some(SystemSpec::Fermi { profile, input, .. }) => {
            let occ = match (profile, input) {
                (Some(p), _) => MomentumOccupation::from_profile(p, &PolarGridSpec::default())?,
                (None, Some(path)) => MomentumOccupation::read_csv(open(path)?)?,
                (None, None) => unreachable!("checked at parse time"),
            };
            let mut buf = Vec::new();
            occ.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).expect("CSV is UTF-8");
            let output = match config.format {
                OutputFormat::Csv => Output::Text(text),
                OutputFormat::Json => {
                    let mut r = Report::new("wigner");
                    r.set("system", json!({ "kind": "fermi", "particle_density": occ.particle_density() }))
                        .set("radii", json!(occ.radii()))
                        .set("angles", json!(occ.angles()))
                        .set(
                            "n",
                            json!((0..occ.radii().len())
                                .map(|i| (0..occ.angles().len()).map(|j| occ.value(i, j)).collect::<Vec<_>>())
                                .collect::<Vec<_>>()),
                        )
                        .grid(json!({
                            "domain": "polar",
                            "radial_nodes": occ.radii().len(),
                            "angular_nodes": occ.angles().len(),
                        }));
                    Output::Json(r.finish(config)?)
                }
            };
            Ok(Outcome::ok(output))
        }
        _ => Err(Error::Parse("wigner supports --system spin and --system fermi".into())),
    }
}

fn clebsch(config: &RunConfig) -> Result<Outcome> {
    let (j1s, j2s) = config.couple.as_ref().ok_or_else(|| Error::Parse("clebsch needs --j1 and --j2".into()))?;
    let (j1, j2): (HalfInteger, HalfInteger) = (j1s.parse()?, j2s.parse()?);
    if j1.twice() < 0 || j2.twice() < 0 {
        return Err(Error::Parse("angular momenta must be non-negative".into()));
    }
    let mut rows = Vec::new();
    let lo = (j1.twice() - j2.twice()).abs();
    for jt in (lo..=j1.twice() + j2.twice()).step_by(2) {
        let j = HalfInteger::from_twice(jt);
        for m1 in j1.projections() {
            for m2 in j2.projections() {
                let m = m1 + m2;
                if m.twice().abs() > jt {
                    continue;
                }
                rows.push((j, m1, m2, m, clebsch_gordan(j1, m1, j2, m2, j, m)?));
            }
        }
    }
    let output = match config.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["j1", "m1", "j2", "m2", "J", "M", "value"])?;
            for (j, m1, m2, m, v) in &rows {
                w.write_record(&[
                    j1.to_string(),
                    m1.to_string(),
                    j2.to_string(),
                    m2.to_string(),
                    j.to_string(),
                    m.to_string(),
                    v.to_string(),
                ])?;
            }
            Output::Text(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("UTF-8"))
        }
        OutputFormat::Json => {
            let mut r = Report::new("clebsch_gordan");
            r.set("j1", json!(j1.to_string())).set("j2", json!(j2.to_string())).set(
                "coefficients",
                json!(rows
                    .iter()
                    .map(|(j, m1, m2, m, v)| json!({
                        "m1": m1.to_string(), "m2": m2.to_string(), "J": j.to_string(), "M": m.to_string(), "value": v,
                    }))
                    .collect::<Vec<_>>()),
            );
            Output::Json(r.finish(config)?)
        }
    };
    Ok(Outcome::ok(output))
}
