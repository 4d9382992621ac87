//! Flow solve with optional intersection elimination, followed by tracer
//! transport on the resulting flux field.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coupling::{assemble_global, FlowProblem, GlobalSystem};
use crate::elimination::{reduced_fluxes, InflowOrigin, ReducedFluxes, schur_complement, star_delta_reduce, EliminationKind};
use crate::fv::{BoundaryCondition, BoundaryConditionSet};
use crate::linsolve::{condition_number, condition_number_estimate, direct_solve, CsrMatrix, DENSE_CONDITION_LIMIT};
use crate::transport::{upwind_operator, TransportError, FluxField, TransportSimulation, TransportState};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Elimination {
    #[default]
    None,
    Schur,
    StarDelta,
}

impl Elimination {
    pub fn kind(self) -> Option<EliminationKind> {
        match self {
            Elimination::None => None,
            Elimination::Schur => Some(EliminationKind::Schur),
            Elimination::StarDelta => Some(EliminationKind::StarDelta),
        }
    }
}

impl std::str::FromStr for Elimination {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Elimination::None),
            "schur" => Ok(Elimination::Schur),
            "star_delta" | "star-delta" => Ok(Elimination::StarDelta),
            _ => Err(HarnessError::Usage(format!("unknown elimination '{s}'"))),
        }
    }
}

/// Solved pressure with everything transport needs.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub elimination: Elimination,
    /// The system whose face and interface fluxes are used.
    pub system: GlobalSystem,
    /// Full-length pressure; eliminated entries are back-substituted.
    pub pressure: Vec<f64>,
    pub eliminated: Vec<usize>,
    /// `false` for eliminated dofs.
    pub active: Vec<bool>,
    /// The matrix actually solved.
    pub solved_matrix: CsrMatrix,
    /// Flux between kept dofs replacing the eliminated cells, `(i, j, F)`.
    pub extra_connections: Vec<(usize, usize, f64)>,
    /// Schur runs: flow routed through the eliminated cells.
    pub routing: Option<ReducedFluxes>,
    pub seconds: f64,
}

impl FlowSolution {
    /// Relative flow mass-balance residual over the solved dofs.
    pub fn conservation_error(&self) -> f64 {
        let r = self.system.conservation_residual(&self.pressure);
        let scale = self
            .system
            .face_fluxes(&self.pressure)
            .iter()
            .chain(&self.system.sources)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = (0..r.len())
            .filter(|&i| self.active[i])
            .fold(0.0f64, |m, i| m.max(r[i].abs()));
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

pub fn solve_flow(problem: &FlowProblem, elimination: Elimination, eliminated: &[usize]) -> Result<FlowSolution, HarnessError> {
    let start = Instant::now();
    let nd = problem.mesh.num_dofs();
    let mut active = vec![true; nd];
    let eliminated: Vec<usize> = if elimination == Elimination::None {
        Vec::new()
    } else {
        eliminated.to_vec()
    };
    for &e in &eliminated {
        active[e] = false;
    }
    let mut out = match elimination {
        Elimination::None => {
            let system = assemble_global(problem)?;
            let pressure = direct_solve(&system.matrix, &system.rhs)?;
            let solved_matrix = system.matrix.clone();
            FlowSolution {
                elimination,
                system,
                pressure,
                eliminated,
                active,
                solved_matrix,
                extra_connections: Vec::new(),
                routing: None,
                seconds: 0.0,
            }
        }
        Elimination::Schur => {
            let system = assemble_global(problem)?;
            let red = schur_complement(&system.matrix, &system.rhs, &eliminated)?;
            let pk = direct_solve(&red.matrix, &red.rhs)?;
            let pressure = red.back_substitute(&pk);
            let rf = reduced_fluxes(&problem.mesh, &system, &red.eliminated, &pressure)?;
            FlowSolution {
                elimination,
                system,
                pressure,
                eliminated: red.eliminated.clone(),
                active,
                solved_matrix: red.matrix,
                extra_connections: rf.connections.clone(),
                routing: Some(rf),
                seconds: 0.0,
            }
        }
        Elimination::StarDelta => {
            let sd = star_delta_reduce(problem, &eliminated)?;
            let pk = direct_solve(&sd.matrix, &sd.rhs)?;
            let pressure = sd.back_substitute(&pk);
            let extra_connections = sd
                .connections
                .iter()
                .map(|&(i, j, t)| (i, j, t * (pressure[i] - pressure[j])))
                .collect();
            FlowSolution {
                elimination,
                eliminated: sd.eliminated.clone(),
                system: sd.system,
                pressure,
                active,
                solved_matrix: sd.matrix,
                extra_connections,
                routing: None,
                seconds: 0.0,
            }
        }
    };
    out.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// 2-norm condition number; dense up to the dense limit, estimated above.
pub fn condition(a: &CsrMatrix) -> Result<f64, HarnessError> {
    if a.nrows() <= DENSE_CONDITION_LIMIT {
        Ok(condition_number(a)?)
    } else {
        Ok(condition_number_estimate(a, 200)?)
    }
}

/// Tracer set-up of a case.
#[derive(Debug, Clone)]
pub struct TransportSetup {
    pub bc: Vec<BoundaryConditionSet>,
    pub initial: Vec<f64>,
    /// Concentration injected by positive flow sources, per dof.
    pub source_concentration: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    pub probe: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub concentration: Vec<f64>,
    pub series: Vec<(f64, f64)>,
    /// Largest relative mass-accounting error over all steps.
    pub mass_error: f64,
    /// Largest excursion outside the range of initial, boundary and source
    /// concentrations; zero when the maximum principle holds.
    pub max_principle_violation: f64,
    pub seconds: f64,
}

/// The flux field a flow solution induces on its active dofs.
pub fn flux_field(problem: &FlowProblem, flow: &FlowSolution, setup: &TransportSetup) -> Result<FluxField, HarnessError> {
    let mut field = FluxField::from_system(
        &problem.mesh,
        &flow.system,
        &flow.pressure,
        &setup.bc,
        &setup.source_concentration,
        &flow.active,
    );
    field.internal.extend(flow.extra_connections.iter().copied());
    if let Some(rf) = &flow.routing {
        for &(k, r) in &rf.sinks {
            field.sources.push((k, -r, 0.0));
        }
        for &(j, o, rate) in &rf.deliveries {
            let inflow = &rf.inflows[o];
            let c = match inflow.origin {
                InflowOrigin::Source => setup.source_concentration[inflow.dof],
                InflowOrigin::Boundary { subdomain, face } => match setup.bc[subdomain].get(face) {
                    Some(BoundaryCondition::Dirichlet(v)) => v,
                    Some(BoundaryCondition::Neumann(j)) => {
                        j * problem.mesh.subdomains[subdomain].face_areas[face] / -inflow.rate
                    }
                    None => {
                        return Err(TransportError::MissingInflowCondition { subdomain, face }.into());
                    }
                },
            };
            field.sources.push((j, rate, c));
        }
    }
    Ok(field)
}

pub fn run_transport(problem: &FlowProblem, flow: &FlowSolution, setup: &TransportSetup) -> Result<TransportResult, HarnessError> {
    let start = Instant::now();
    let field = flux_field(problem, flow, setup)?;
    let op = upwind_operator(&field)?;
    // eliminated dofs are decoupled; a unit volume keeps them inert
    let volumes: Vec<f64> = (0..problem.mesh.num_dofs())
        .map(|d| if flow.active[d] { problem.mesh.dof_volume(d) } else { 1.0 })
        .collect();
    let sim = TransportSimulation::new(op, volumes, setup.dt)?;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (d, &c) in setup.initial.iter().enumerate() {
        if flow.active[d] {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    for &(_, f, bc) in &field.boundary {
        if let (Some(BoundaryCondition::Dirichlet(v)), true) = (bc, f < 0.0) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    for &(_, q, c) in &field.sources {
        if q > 0.0 {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }

    let steps = (setup.t_final / setup.dt).round() as usize;
    let mut state = TransportState {
        time: 0.0,
        concentration: setup.initial.clone(),
    };
    let mut series = Vec::with_capacity(steps + 1);
    let mut mass_error = 0.0f64;
    let mut violation = 0.0f64;
    if let Some(p) = setup.probe {
        series.push((0.0, state.concentration[p]));
    }
    for _ in 0..steps {
        let next = sim.step(&state);
        mass_error = mass_error.max(sim.mass_balance_error(&state, &next));
        for (d, &c) in next.concentration.iter().enumerate() {
            if flow.active[d] {
                violation = violation.max(lo - c).max(c - hi);
            }
        }
        state = next;
        if let Some(p) = setup.probe {
            series.push((state.time, state.concentration[p]));
        }
    }
    Ok(TransportResult {
        concentration: state.concentration,
        series,
        mass_error,
        max_principle_violation: violation.max(0.0),
        seconds: start.elapsed().as_secs_f64(),
    })
}
