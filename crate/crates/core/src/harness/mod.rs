//! Case runner: builds a preset, solves flow (optionally eliminating
//! intersections), runs transport, and compares against the case's
//! reference.

mod cases;
pub mod export;
pub mod norm;
mod pipeline;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::CouplingError;
use crate::elimination::EliminationError;
use crate::fv::{Diagnostics, FvError};
use crate::linsolve::SolveError;
use crate::mesh::{MeshError, MixedDimensionalMesh};
use crate::transport::{write_series, TransportError};

pub use cases::{build_case, case_2_reference, resolve_parameters, CaseId, CaseSetup, Discretization};
pub use norm::{dof_volumes, dofs_of_dim, inject, l2_error, tensor_cell_index, L2Error, NORM_VERSION};
pub use pipeline::{
    condition, flux_field, run_transport, solve_flow, Elimination, FlowSolution, TransportResult, TransportSetup,
};

/// `git describe` of the build, or "unknown".
pub const BUILD_DESCRIBE: &str = env!("FRACFV_GIT_DESCRIBE");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("case {case}: {source}")]
    InCase {
        case: String,
        #[source]
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    /// Process exit code of the failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Mesh(_) => 2,
            HarnessError::Assembly(_) => 3,
            HarnessError::Solver(_) => 4,
            HarnessError::Io(_) => 5,
            HarnessError::Usage(_) => 64,
            HarnessError::InCase { source, .. } => source.exit_code(),
        }
    }

    fn in_case(self, case: &str) -> Self {
        match self {
            e @ HarnessError::InCase { .. } => e,
            e => HarnessError::InCase {
                case: case.to_string(),
                source: Box::new(e),
            },
        }
    }
}

impl From<FvError> for HarnessError {
    fn from(e: FvError) -> Self {
        HarnessError::Assembly(e.to_string())
    }
}

impl From<CouplingError> for HarnessError {
    fn from(e: CouplingError) -> Self {
        HarnessError::Assembly(e.to_string())
    }
}

impl From<EliminationError> for HarnessError {
    fn from(e: EliminationError) -> Self {
        match e {
            EliminationError::SingularBlock { .. } => HarnessError::Solver(e.to_string()),
            e => HarnessError::Assembly(e.to_string()),
        }
    }
}

impl From<SolveError> for HarnessError {
    fn from(e: SolveError) -> Self {
        HarnessError::Solver(e.to_string())
    }
}

impl From<TransportError> for HarnessError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::MissingInflowCondition { .. } => HarnessError::Assembly(e.to_string()),
            e => HarnessError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case: CaseId,
    pub resolution: usize,
    pub discretization: Discretization,
    pub elimination: Elimination,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl CaseSpec {
    /// The case with its default resolution, discretization and elimination.
    pub fn new(case: CaseId) -> Self {
        Self {
            case,
            resolution: case.default_resolution(),
            discretization: case.default_discretization(),
            elimination: case.default_elimination(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_resolution(mut self, r: usize) -> Self {
        self.resolution = r;
        self
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = d;
        self
    }

    pub fn with_elimination(mut self, e: Elimination) -> Self {
        self.elimination = e;
        self
    }

    pub fn with_override(mut self, key: &str, value: f64) -> Self {
        self.overrides.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub quantity: String,
    pub group: String,
    pub value: f64,
    pub absolute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub full: f64,
    pub solved: f64,
    /// `full / solved`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub flow: f64,
    pub transport_mass: Option<f64>,
    pub max_principle_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub norm_version: String,
    pub build: String,
    pub spec: CaseSpec,
    pub parameters: BTreeMap<String, f64>,
    pub reference: String,
    pub dofs: usize,
    pub solved_dofs: usize,
    pub errors: Vec<ErrorEntry>,
    pub condition: Option<ConditionReport>,
    pub conservation: ConservationReport,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
    /// Wall-clock seconds; the only entries that vary between identical runs.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn error(&self, quantity: &str, group: &str) -> Option<f64> {
        self.errors
            .iter()
            .find(|e| e.quantity == quantity && e.group == group)
            .map(|e| e.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub mesh: MixedDimensionalMesh,
    pub flow: FlowSolution,
    pub tracer: Option<TransportResult>,
    pub reference_pressure: Option<Vec<f64>>,
    pub reference_tracer: Option<Vec<f64>>,
}

impl RunOutput {
    pub fn pressure(&self) -> &[f64] {
        &self.flow.pressure
    }

    /// Writes the report, fields and series into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.report.to_json())?;
        let mut w = std::io::BufWriter::new(fs::File::create(dir.join("pressure.csv"))?);
        export::write_field_csv(&mut w, &self.mesh, &self.flow.pressure)?;
        let mut w = std::io::BufWriter::new(fs::File::create(dir.join("pressure.vtk"))?);
        export::write_field_vtk(&mut w, &self.mesh, &self.flow.pressure, "pressure")?;
        if let Some(t) = &self.tracer {
            let mut w = std::io::BufWriter::new(fs::File::create(dir.join("tracer.csv"))?);
            export::write_field_csv(&mut w, &self.mesh, &t.concentration)?;
            let mut w = std::io::BufWriter::new(fs::File::create(dir.join("tracer.vtk"))?);
            export::write_field_vtk(&mut w, &self.mesh, &t.concentration, "tracer")?;
            if !t.series.is_empty() {
                let w = std::io::BufWriter::new(fs::File::create(dir.join("series.csv"))?);
                write_series(w, &t.series)?;
            }
        }
        if let Some(r) = &self.reference_pressure {
            if r.len() == self.mesh.num_dofs() {
                let mut w = std::io::BufWriter::new(fs::File::create(dir.join("reference_pressure.csv"))?);
                export::write_field_csv(&mut w, &self.mesh, r)?;
            }
        }
        if let Some(r) = &self.reference_tracer {
            let mut w = std::io::BufWriter::new(fs::File::create(dir.join("reference_tracer.csv"))?);
            export::write_field_csv(&mut w, &self.mesh, r)?;
        }
        Ok(())
    }
}

/// Dof groups for error reporting over the active dofs of `flow`.
fn groups(mesh: &MixedDimensionalMesh, active: &[bool]) -> Vec<(&'static str, Vec<usize>)> {
    let n = mesh.ambient_dim;
    let keep = |v: Vec<usize>| -> Vec<usize> { v.into_iter().filter(|&d| active[d]).collect() };
    let mut out = vec![
        ("kept", (0..mesh.num_dofs()).filter(|&d| active[d]).collect()),
        ("matrix", keep(dofs_of_dim(mesh, n))),
    ];
    if n >= 1 {
        let f = keep(dofs_of_dim(mesh, n - 1));
        if !f.is_empty() {
            out.push(("fracture", f));
        }
    }
    out
}

fn push_errors(
    errors: &mut Vec<ErrorEntry>,
    quantity: &str,
    field: &[f64],
    reference: &[f64],
    volumes: &[f64],
    groups: &[(&'static str, Vec<usize>)],
) {
    for (name, dofs) in groups {
        let e = l2_error(field, reference, volumes, dofs);
        errors.push(ErrorEntry {
            quantity: quantity.to_string(),
            group: name.to_string(),
            value: e.value,
            absolute: e.absolute,
        });
    }
}

pub fn run_case(spec: &CaseSpec) -> Result<RunOutput, HarnessError> {
    run_case_inner(spec).map_err(|e| e.in_case(spec.case.as_str()))
}

fn run_case_inner(spec: &CaseSpec) -> Result<RunOutput, HarnessError> {
    let mut timings = BTreeMap::new();
    let mut notes = Vec::new();
    let params = resolve_parameters(spec.case, &spec.overrides)?;
    let t0 = Instant::now();
    let setup = build_case(spec.case, spec.resolution, spec.discretization, &params)?;
    timings.insert("setup".to_string(), t0.elapsed().as_secs_f64());
    let mesh = setup.problem.mesh.clone();
    let volumes = dof_volumes(&mesh);

    let t0 = Instant::now();
    let disc_only = crate::coupling::discretize(&setup.problem)?;
    timings.insert("discretization".to_string(), t0.elapsed().as_secs_f64());
    drop(disc_only);

    let flow = solve_flow(&setup.problem, spec.elimination, &setup.eliminated)?;
    timings.insert("flow".to_string(), flow.seconds);
    let tracer = match &setup.transport {
        Some(t) => {
            let r = run_transport(&setup.problem, &flow, t)?;
            timings.insert("transport".to_string(), r.seconds);
            Some(r)
        }
        None => None,
    };

    let mut errors = Vec::new();
    let mut reference_pressure = None;
    let mut reference_tracer = None;
    let mut full_matrix = None;
    let reference: String;
    let grp = groups(&mesh, &flow.active);

    match spec.case {
        CaseId::Case2 => {
            let rr = params["reference_resolution"] as usize;
            reference = format!("equi-dimensional mpfa on a {rr}x{rr} grid with a resolved fracture layer");
            if rr < 256 {
                notes.push(format!("reference resolution {rr} is below the 256x256 of the original study"));
            }
            notes.push("transport is not run for this case".to_string());
            let t0 = Instant::now();
            let (fine, coords) = case_2_reference(
                rr,
                params["ratio"],
                params["angle"],
                params["k_fracture"],
                params["aperture"],
            )?;
            let fine_flow = solve_flow(&fine, Elimination::None, &[])?;
            timings.insert("reference".to_string(), t0.elapsed().as_secs_f64());
            let (err, _) = case_2_error(&mesh, &flow.pressure, &fine.mesh, &fine_flow.pressure, &coords, params["aperture"]);
            errors.push(ErrorEntry {
                quantity: "pressure".into(),
                group: "matrix".into(),
                value: err.value,
                absolute: err.absolute,
            });
        }
        CaseId::Case1_2Lite => {
            let fine_res = 2 * spec.resolution;
            reference = format!("no elimination at resolution {fine_res}");
            let t0 = Instant::now();
            let fine = build_case(spec.case, fine_res, spec.discretization, &params)?;
            let fine_flow = solve_flow(&fine.problem, Elimination::None, &[])?;
            timings.insert("reference".to_string(), t0.elapsed().as_secs_f64());
            let h = 1.0 / spec.resolution as f64;
            let coarse_coords: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..=spec.resolution).map(|i| i as f64 * h).collect())
                .collect();
            let err = injected_matrix_error(&mesh, &flow.pressure, &fine.problem.mesh, &fine_flow.pressure, &coarse_coords);
            errors.push(ErrorEntry {
                quantity: "pressure".into(),
                group: "matrix".into(),
                value: err.value,
                absolute: err.absolute,
            });
        }
        _ => {
            // same mesh, no elimination, and full mpfa for case 3
            let ref_disc = if spec.case == CaseId::Case3 {
                Discretization::Mpfa
            } else {
                spec.discretization
            };
            reference = format!("{} without elimination on the same grid", serde_json::to_string(&ref_disc).unwrap().trim_matches('"'));
            let same = ref_disc == spec.discretization && spec.elimination == Elimination::None;
            let t0 = Instant::now();
            let (rflow, rtracer) = if same {
                (flow.clone(), tracer.clone())
            } else {
                let mut rs = setup.clone();
                ref_disc.apply(&mut rs.problem);
                let rf = solve_flow(&rs.problem, Elimination::None, &[])?;
                let rt = match &rs.transport {
                    Some(t) => Some(run_transport(&rs.problem, &rf, t)?),
                    None => None,
                };
                (rf, rt)
            };
            timings.insert("reference".to_string(), t0.elapsed().as_secs_f64());
            push_errors(&mut errors, "pressure", &flow.pressure, &rflow.pressure, &volumes, &grp);
            if spec.elimination != Elimination::None {
                let elim: Vec<usize> = flow.eliminated.clone();
                if !elim.is_empty() {
                    let e = l2_error(&flow.pressure, &rflow.pressure, &volumes, &elim);
                    errors.push(ErrorEntry {
                        quantity: "pressure".into(),
                        group: "eliminated".into(),
                        value: e.value,
                        absolute: e.absolute,
                    });
                }
            }
            if let (Some(t), Some(rt)) = (&tracer, &rtracer) {
                push_errors(&mut errors, "tracer", &t.concentration, &rt.concentration, &volumes, &grp);
            }
            if spec.case == CaseId::Case1_1 {
                let linear: Vec<f64> = (0..mesh.num_dofs()).map(|d| 1.0 - mesh.dof_centre(d).x).collect();
                let e = l2_error(&flow.pressure, &linear, &volumes, &grp[0].1);
                errors.push(ErrorEntry {
                    quantity: "pressure_vs_linear".into(),
                    group: "kept".into(),
                    value: e.value,
                    absolute: e.absolute,
                });
            }
            if spec.elimination != Elimination::None && ref_disc == spec.discretization {
                full_matrix = Some(rflow.solved_matrix.clone());
            }
            reference_pressure = Some(rflow.pressure.clone());
            reference_tracer = rtracer.map(|t| t.concentration);
        }
    }

    let t0 = Instant::now();
    let solved = condition(&flow.solved_matrix)?;
    let full = match full_matrix {
        Some(m) => condition(&m)?,
        None if spec.elimination == Elimination::None => solved,
        None => {
            let sys = crate::coupling::assemble_global(&setup.problem)?;
            condition(&sys.matrix)?
        }
    };
    timings.insert("condition".to_string(), t0.elapsed().as_secs_f64());

    let report = Report {
        norm_version: NORM_VERSION.to_string(),
        build: BUILD_DESCRIBE.to_string(),
        spec: spec.clone(),
        parameters: params,
        reference,
        dofs: mesh.num_dofs(),
        solved_dofs: flow.solved_matrix.nrows(),
        errors,
        condition: Some(ConditionReport {
            full,
            solved,
            ratio: full / solved,
        }),
        conservation: ConservationReport {
            flow: flow.conservation_error(),
            transport_mass: tracer.as_ref().map(|t| t.mass_error),
            max_principle_violation: tracer.as_ref().map(|t| t.max_principle_violation),
        },
        diagnostics: flow.system.diagnostics.clone(),
        notes,
        timings,
    };
    Ok(RunOutput {
        report,
        mesh,
        flow,
        tracer,
        reference_pressure,
        reference_tracer,
    })
}

/// Coarse matrix pressure injected onto the fine matrix cells, compared
/// over fine cells outside the fracture layer. Returns the error and the
/// injected field.
pub fn case_2_error(
    coarse: &MixedDimensionalMesh,
    p: &[f64],
    fine: &MixedDimensionalMesh,
    p_ref: &[f64],
    _fine_coords: &[Vec<f64>],
    aperture: f64,
) -> (L2Error, Vec<f64>) {
    let n = coarse.subdomains[0].num_cells();
    let res = (n as f64).sqrt().round() as usize;
    let h = 1.0 / res as f64;
    let cc: Vec<Vec<f64>> = (0..2).map(|_| (0..=res).map(|i| i as f64 * h).collect()).collect();
    let centres = &fine.subdomains[0].cell_centres;
    let injected: Vec<f64> = inject(&p[..n], centres, |x| tensor_cell_index(&cc, x))
        .into_iter()
        .map(|v| v.unwrap_or(0.0))
        .collect();
    let subset: Vec<usize> = (0..centres.len())
        .filter(|&i| (centres[i].y - 0.5).abs() > aperture / 2.0)
        .collect();
    let vol = &fine.subdomains[0].cell_volumes;
    (l2_error(&injected, &p_ref[..centres.len()], vol, &subset), injected)
}

fn injected_matrix_error(
    coarse: &MixedDimensionalMesh,
    p: &[f64],
    fine: &MixedDimensionalMesh,
    p_ref: &[f64],
    coarse_coords: &[Vec<f64>],
) -> L2Error {
    let n = coarse.subdomains[0].num_cells();
    let centres = &fine.subdomains[0].cell_centres;
    let injected: Vec<f64> = inject(&p[..n], centres, |x| tensor_cell_index(coarse_coords, x))
        .into_iter()
        .map(|v| v.unwrap_or(0.0))
        .collect();
    let subset: Vec<usize> = (0..centres.len()).collect();
    l2_error(&injected, &p_ref[..centres.len()], &fine.subdomains[0].cell_volumes, &subset)
}

/// One point of the case 1.1 permeability sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k_h: f64,
    pub k_v: f64,
    pub schur_error: f64,
    pub star_delta_error: f64,
    pub schur_condition_ratio: f64,
    pub star_delta_condition_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub norm_version: String,
    pub build: String,
    pub resolution: usize,
    pub points: Vec<SweepPoint>,
    pub seconds: f64,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Tab-separated matrices of errors and condition ratios, rows K_h,
    /// columns K_v.
    pub fn tables(&self) -> String {
        let mut kh: Vec<f64> = self.points.iter().map(|p| p.k_h).collect();
        let mut kv: Vec<f64> = self.points.iter().map(|p| p.k_v).collect();
        for v in [&mut kh, &mut kv] {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
        }
        let mut out = String::new();
        let metrics: [(&str, fn(&SweepPoint) -> f64); 4] = [
            ("schur pressure error", |p| p.schur_error),
            ("star-delta pressure error", |p| p.star_delta_error),
            ("schur R_C", |p| p.schur_condition_ratio),
            ("star-delta R_C", |p| p.star_delta_condition_ratio),
        ];
        for (name, f) in metrics {
            out.push_str(&format!("# {name} (rows K_h, columns K_v)\nK_h\\K_v"));
            for v in &kv {
                out.push_str(&format!("\t{v:e}"));
            }
            out.push('\n');
            for h in &kh {
                out.push_str(&format!("{h:e}"));
                for v in &kv {
                    let p = self.points.iter().find(|p| p.k_h == *h && p.k_v == *v).unwrap();
                    out.push_str(&format!("\t{:.3e}", f(p)));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Case 1.1 over all `(K_h, K_v)` pairs of `values`.
pub fn sweep_case_1_1(values: &[f64], resolution: usize) -> Result<SweepReport, HarnessError> {
    let start = Instant::now();
    let mut points = Vec::new();
    for &k_h in values {
        for &k_v in values {
            let base = CaseSpec::new(CaseId::Case1_1)
                .with_resolution(resolution)
                .with_override("k_h", k_h)
                .with_override("k_v", k_v);
            let schur = run_case(&base.clone().with_elimination(Elimination::Schur))?;
            let sd = run_case(&base.with_elimination(Elimination::StarDelta))?;
            let err = |r: &RunOutput| r.report.error("pressure", "kept").unwrap_or(f64::NAN);
            let rc = |r: &RunOutput| r.report.condition.as_ref().map(|c| c.ratio).unwrap_or(f64::NAN);
            points.push(SweepPoint {
                k_h,
                k_v,
                schur_error: err(&schur),
                star_delta_error: err(&sd),
                schur_condition_ratio: rc(&schur),
                star_delta_condition_ratio: rc(&sd),
            });
        }
    }
    Ok(SweepReport {
        norm_version: NORM_VERSION.to_string(),
        build: BUILD_DESCRIBE.to_string(),
        resolution,
        points,
        seconds: start.elapsed().as_secs_f64(),
    })
}
