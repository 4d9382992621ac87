//! Upwind advection of a passive tracer with implicit Euler steps.

use std::io::Write;

use thiserror::Error;

use crate::coupling::GlobalSystem;
use crate::fv::{BoundaryCondition, BoundaryConditionSet};
use crate::linsolve::{CsrMatrix, LuFactorization, SolveError, TripletBuilder};
use crate::mesh::{FaceKind, MixedDimensionalMesh};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("inflow through boundary face {face} of subdomain {subdomain} has no transport condition")]
    MissingInflowCondition { subdomain: usize, face: usize },
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("step matrix: {0}")]
    Solve(#[from] SolveError),
    #[error("probe at {point:?} is ambiguous between dofs {candidates:?}")]
    AmbiguousProbe { point: [f64; 3], candidates: Vec<usize> },
    #[error("no cell of dimension {0} to probe")]
    EmptyProbe(usize),
}

/// Tracer exchange on a stationary flux field, over global dofs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluxField {
    pub num_dofs: usize,
    /// `(a, b, F)`: flux `F` from `a` to `b`; either sign.
    pub internal: Vec<(usize, usize, f64)>,
    /// `(dof, outward flux, condition)`.
    pub boundary: Vec<(usize, f64, Option<BoundaryCondition>)>,
    /// `(dof, rate, concentration)`; positive rates inject at the given
    /// concentration, negative rates extract at the cell concentration.
    pub sources: Vec<(usize, f64, f64)>,
    /// Boundary face areas matching `boundary`, for Neumann tracer data.
    pub boundary_areas: Vec<f64>,
}

impl FluxField {
    /// Fluxes of a solved flow system. Faces and pairs touching a dof with
    /// `active[dof] == false` are skipped. `source_concentration` is used
    /// for positive flow sources.
    pub fn from_system(
        mesh: &MixedDimensionalMesh,
        system: &GlobalSystem,
        p: &[f64],
        transport_bc: &[BoundaryConditionSet],
        source_concentration: &[f64],
        active: &[bool],
    ) -> Self {
        let fluxes = system.face_fluxes(p);
        let mut out = FluxField {
            num_dofs: mesh.num_dofs(),
            ..Default::default()
        };
        for (s, sd) in mesh.subdomains.iter().enumerate() {
            let base = mesh.dof_range(s).start;
            for f in 0..sd.num_faces() {
                let flux = fluxes[system.global_face(s, f)];
                match sd.face_kind[f] {
                    FaceKind::Interior => {
                        let (c0, s0) = sd.face_cells[f][0];
                        let (c1, _) = sd.face_cells[f][1];
                        let (a, b) = (base + c0, base + c1);
                        if active[a] && active[b] {
                            out.internal.push((a, b, s0 * flux));
                        }
                    }
                    FaceKind::Boundary => {
                        let (c, sign) = sd.face_cells[f][0];
                        if active[base + c] {
                            out.boundary.push((base + c, sign * flux, transport_bc[s].get(f)));
                            out.boundary_areas.push(sd.face_areas[f]);
                        }
                    }
                    FaceKind::InternalBoundary => {}
                }
            }
        }
        for (k, lam) in system.interface_fluxes(p).into_iter().enumerate() {
            let pr = &system.pairs[k];
            if active[pr.higher_dof] && active[pr.lower_dof] {
                out.internal.push((pr.higher_dof, pr.lower_dof, lam));
            }
        }
        for (d, &q) in system.sources.iter().enumerate() {
            if q != 0.0 && active[d] {
                out.sources.push((d, q, source_concentration[d]));
            }
        }
        out
    }
}

/// `outflow(T) = A T - g`, the net tracer outflow of every cell.
#[derive(Debug, Clone)]
pub struct UpwindOperator {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

pub fn upwind_operator(field: &FluxField) -> Result<UpwindOperator, TransportError> {
    let n = field.num_dofs;
    let mut t = TripletBuilder::new(n, n);
    let mut g = vec![0.0; n];
    for &(a, b, f) in &field.internal {
        if f > 0.0 {
            t.push(a, a, f);
            t.push(b, a, -f);
        } else if f < 0.0 {
            t.push(b, b, -f);
            t.push(a, b, f);
        }
    }
    for (k, &(d, f, bc)) in field.boundary.iter().enumerate() {
        match bc {
            Some(BoundaryCondition::Neumann(j)) => g[d] -= j * field.boundary_areas[k],
            Some(BoundaryCondition::Dirichlet(td)) if f < 0.0 => g[d] -= f * td,
            _ if f > 0.0 => t.push(d, d, f),
            _ if f < 0.0 => {
                return Err(TransportError::MissingInflowCondition {
                    subdomain: usize::MAX,
                    face: k,
                })
            }
            _ => {}
        }
    }
    for &(d, q, c) in &field.sources {
        if q > 0.0 {
            g[d] += q * c;
        } else if q < 0.0 {
            t.push(d, d, -q);
        }
    }
    Ok(UpwindOperator { matrix: t.build(), rhs: g })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportState {
    pub time: f64,
    pub concentration: Vec<f64>,
}

/// Implicit Euler on a fixed operator; the step matrix is factored once.
pub struct TransportSimulation {
    pub operator: UpwindOperator,
    pub volumes: Vec<f64>,
    pub dt: f64,
    factor: LuFactorization,
}

impl TransportSimulation {
    pub fn new(operator: UpwindOperator, volumes: Vec<f64>, dt: f64) -> Result<Self, TransportError> {
        if !(dt > 0.0) {
            return Err(TransportError::InvalidTimeStep(dt));
        }
        let n = volumes.len();
        let mut t = TripletBuilder::with_capacity(n, n, operator.matrix.nnz() + n);
        for (i, v) in volumes.iter().enumerate() {
            t.push(i, i, v / dt);
        }
        for (r, c, v) in operator.matrix.triplets() {
            t.push(r, c, v);
        }
        let factor = LuFactorization::new(&t.build())?;
        Ok(Self {
            operator,
            volumes,
            dt,
            factor,
        })
    }

    pub fn step(&self, state: &TransportState) -> TransportState {
        let rhs: Vec<f64> = (0..self.volumes.len())
            .map(|i| self.volumes[i] / self.dt * state.concentration[i] + self.operator.rhs[i])
            .collect();
        TransportState {
            time: state.time + self.dt,
            concentration: self.factor.solve(&rhs),
        }
    }

    /// Steps until `t_final`, sampling `probe` after every step (and at the
    /// start). Returns the final state and the series.
    pub fn run(&self, initial: TransportState, t_final: f64, probe: Option<usize>) -> (TransportState, Vec<(f64, f64)>) {
        let steps = ((t_final - initial.time) / self.dt).round().max(0.0) as usize;
        let mut series = Vec::with_capacity(steps + 1);
        let mut state = initial;
        if let Some(p) = probe {
            series.push((state.time, state.concentration[p]));
        }
        for _ in 0..steps {
            state = self.step(&state);
            if let Some(p) = probe {
                series.push((state.time, state.concentration[p]));
            }
        }
        (state, series)
    }

    /// `|Σ V (Tⁿ - Tⁿ⁻¹)/Δt + Σ outflow(Tⁿ)|` relative to the largest term.
    pub fn mass_balance_error(&self, before: &TransportState, after: &TransportState) -> f64 {
        let storage: f64 = (0..self.volumes.len())
            .map(|i| self.volumes[i] * (after.concentration[i] - before.concentration[i]) / self.dt)
            .sum();
        let out = self.operator.matrix.mul_vec(&after.concentration);
        let net: f64 = out.iter().zip(&self.operator.rhs).map(|(a, g)| a - g).sum();
        let scale = storage.abs().max(net.abs()).max(self.operator.rhs.iter().map(|v| v.abs()).sum());
        if scale == 0.0 {
            0.0
        } else {
            (storage + net).abs() / scale
        }
    }
}

/// Default step: a two-hundredth of the simulated time.
pub fn default_time_step(t_final: f64) -> f64 {
    t_final / 200.0
}

/// The cell of dimension `dim` nearest to `point`; ties are an error.
pub fn probe_cell(mesh: &MixedDimensionalMesh, dim: usize, point: &Vec3) -> Result<usize, TransportError> {
    let tol = 1e-12 * mesh.diameter();
    let mut best = f64::INFINITY;
    let mut cands: Vec<usize> = Vec::new();
    for dof in mesh.dofs_with_dim_at_most(dim) {
        let (s, _) = mesh.dof_owner(dof);
        if mesh.subdomains[s].dim != dim {
            continue;
        }
        let d = (mesh.dof_centre(dof) - point).norm();
        if d < best - tol {
            best = d;
            cands.clear();
            cands.push(dof);
        } else if (d - best).abs() <= tol {
            cands.push(dof);
        }
    }
    match cands.len() {
        0 => Err(TransportError::EmptyProbe(dim)),
        1 => Ok(cands[0]),
        _ => Err(TransportError::AmbiguousProbe {
            point: [point.x, point.y, point.z],
            candidates: cands,
        }),
    }
}

pub fn write_series<W: Write>(mut w: W, series: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "time,concentration")?;
    for (t, c) in series {
        writeln!(w, "{t:.17e},{c:.17e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upwind_picks_the_upstream_cell() {
        let field = FluxField {
            num_dofs: 2,
            internal: vec![(0, 1, 2.0)],
            ..Default::default()
        };
        let op = upwind_operator(&field).unwrap();
        assert_eq!(op.matrix.get(0, 0), 2.0);
        assert_eq!(op.matrix.get(1, 0), -2.0);
        assert_eq!(op.matrix.get(1, 1), 0.0);
        let rev = FluxField {
            num_dofs: 2,
            internal: vec![(0, 1, -2.0)],
            ..Default::default()
        };
        let op = upwind_operator(&rev).unwrap();
        assert_eq!(op.matrix.get(1, 1), 2.0);
        assert_eq!(op.matrix.get(0, 1), -2.0);
    }

    #[test]
    fn zero_flux_advects_nothing() {
        let field = FluxField {
            num_dofs: 2,
            internal: vec![(0, 1, 0.0)],
            boundary: vec![(0, 0.0, None)],
            boundary_areas: vec![1.0],
            ..Default::default()
        };
        let op = upwind_operator(&field).unwrap();
        assert_eq!(op.matrix.nnz(), 0);
        assert!(op.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_cell_step() {
        // outflow 1 on one face, inflow 1 at T_D = 0 on the other
        let field = FluxField {
            num_dofs: 1,
            boundary: vec![(0, 1.0, None), (0, -1.0, Some(BoundaryCondition::Dirichlet(0.0)))],
            boundary_areas: vec![1.0, 1.0],
            ..Default::default()
        };
        let sim = TransportSimulation::new(upwind_operator(&field).unwrap(), vec![1.0], 1.0).unwrap();
        let s0 = TransportState {
            time: 0.0,
            concentration: vec![1.0],
        };
        let s1 = sim.step(&s0);
        assert!((s1.concentration[0] - 0.5).abs() < 1e-15);
        assert_eq!(s1.time, 1.0);
        assert!(sim.mass_balance_error(&s0, &s1) < 1e-15);
    }

    #[test]
    fn no_flow_keeps_the_state() {
        let field = FluxField {
            num_dofs: 3,
            ..Default::default()
        };
        let sim = TransportSimulation::new(upwind_operator(&field).unwrap(), vec![1.0, 2.0, 0.5], 0.1).unwrap();
        let s0 = TransportState {
            time: 0.0,
            concentration: vec![0.2, 0.7, 1.0],
        };
        let (end, series) = sim.run(s0.clone(), 1.0, Some(1));
        assert_eq!(end.concentration, s0.concentration);
        assert_eq!(series.len(), 11);
        assert!(series.iter().all(|&(_, c)| c == 0.7));
    }

    #[test]
    fn inflow_without_condition_is_an_error() {
        let field = FluxField {
            num_dofs: 1,
            boundary: vec![(0, -1.0, None)],
            boundary_areas: vec![1.0],
            ..Default::default()
        };
        assert!(matches!(
            upwind_operator(&field),
            Err(TransportError::MissingInflowCondition { .. })
        ));
    }

    #[test]
    fn series_csv() {
        let mut buf = Vec::new();
        write_series(&mut buf, &[(0.0, 1.0), (0.5, 0.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time,concentration"));
        let row: Vec<f64> = lines.nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row, vec![0.5, 0.25]);
    }
}
