//! Cell-centred finite-volume flux discretizations on a single subdomain.
//!
//! A discretization is a flux operator pair `(Tc, Tb)`: the flux through
//! face `f`, measured along its stored normal, is
//! `F_f = Σ_c Tc[f, c] p_c + Σ_g Tb[f, g] data_g`, where the boundary data
//! vector holds Dirichlet pressures, total Neumann fluxes, or the coupling
//! flux on internal-boundary faces (positive out of the subdomain).

mod bc;
mod mpfa;
mod tpfa;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

pub use bc::{BoundaryCondition, BoundaryConditionSet};
pub use mpfa::{assemble_mpfa, default_eta};
pub use tpfa::{assemble_tpfa, tpfa_face_transmissibility, tpfa_half_transmissibility};

use crate::linsolve::{CsrMatrix, TripletBuilder};
use crate::mesh::SubdomainGrid;
use crate::permeability::PermeabilityTensor;
use crate::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum FvError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("singular local system in the interaction region of node {node}")]
    SingularInteractionRegion { node: usize },
    #[error("invalid boundary conditions: {0}")]
    BoundaryConditions(String),
    #[error("expected {expected} permeability tensors, got {got}")]
    PermeabilityCount { expected: usize, got: usize },
    #[error("permeability tensors must be given in {expected} dimensions, got {got}")]
    PermeabilityDimension { expected: usize, got: usize },
    #[error("continuity point parameter {0} outside [0, 1)")]
    InvalidEta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tpfa,
    /// MPFA-O with continuity points `(1 - eta) x_f + eta x_n`; `None`
    /// picks the default for the grid type.
    Mpfa { eta: Option<f64> },
}

/// Warnings collected during assembly.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub negative_half_transmissibilities: usize,
    pub blocked_faces: usize,
    /// Largest 1-norm condition estimate over MPFA interaction regions.
    pub max_local_condition: f64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.negative_half_transmissibilities += other.negative_half_transmissibilities;
        self.blocked_faces += other.blocked_faces;
        self.max_local_condition = self.max_local_condition.max(other.max_local_condition);
    }
}

#[derive(Debug, Clone)]
pub struct SubdomainDiscretization {
    /// faces x cells
    pub flux_cells: CsrMatrix,
    /// faces x faces, acting on the boundary data vector
    pub flux_boundary: CsrMatrix,
    pub diagnostics: Diagnostics,
}

impl SubdomainDiscretization {
    pub fn face_fluxes(&self, p: &[f64], boundary_data: &[f64]) -> Vec<f64> {
        let mut f = self.flux_cells.mul_vec(p);
        for (fi, g) in f.iter_mut().zip(self.flux_boundary.mul_vec(boundary_data)) {
            *fi += g;
        }
        f
    }
}

pub fn discretize(
    grid: &SubdomainGrid,
    k: &[PermeabilityTensor],
    bc: &BoundaryConditionSet,
    method: Method,
) -> Result<SubdomainDiscretization, FvError> {
    match method {
        Method::Tpfa => assemble_tpfa(grid, k, bc),
        Method::Mpfa { eta } => assemble_mpfa(grid, k, bc, eta.unwrap_or_else(|| default_eta(grid))),
    }
}

/// Signed cell-face incidence (cells x faces).
pub fn divergence(grid: &SubdomainGrid) -> CsrMatrix {
    let mut t = TripletBuilder::new(grid.num_cells(), grid.num_faces());
    for (c, faces) in grid.cell_faces.iter().enumerate() {
        for &(f, s) in faces {
            t.push(c, f, s);
        }
    }
    t.build()
}

/// Face fluxes from cell pressures, with `bc` supplying the boundary data
/// and zero coupling flux on internal boundaries.
pub fn reconstruct_fluxes(
    grid: &SubdomainGrid,
    disc: &SubdomainDiscretization,
    p: &[f64],
    bc: &BoundaryConditionSet,
) -> Vec<f64> {
    disc.face_fluxes(p, &bc.boundary_data(grid))
}

/// Linear system of a stand-alone subdomain with no flux across internal
/// boundaries. `sources` are cell-integrated rates.
pub fn assemble_subdomain_system(
    grid: &SubdomainGrid,
    disc: &SubdomainDiscretization,
    bc: &BoundaryConditionSet,
    sources: &[f64],
) -> (CsrMatrix, Vec<f64>) {
    let div = divergence(grid);
    let a = sparse_product(&div, &disc.flux_cells);
    let g = bc.boundary_data(grid);
    let bg = div.mul_vec(&disc.flux_boundary.mul_vec(&g));
    let b = sources.iter().zip(bg).map(|(s, x)| s - x).collect();
    (a, b)
}

/// `A * B` for CSR matrices.
pub(crate) fn sparse_product(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let mut t = TripletBuilder::new(a.nrows(), b.ncols());
    for r in 0..a.nrows() {
        for (k, av) in a.row(r) {
            for (c, bv) in b.row(k) {
                t.push(r, c, av * bv);
            }
        }
    }
    t.build()
}

pub(crate) fn check_permeability(grid: &SubdomainGrid, k: &[PermeabilityTensor]) -> Result<(), FvError> {
    if k.len() != grid.num_cells() {
        return Err(FvError::PermeabilityCount {
            expected: grid.num_cells(),
            got: k.len(),
        });
    }
    if let Some(t) = k.iter().find(|t| t.dim() != grid.ambient_dim) {
        return Err(FvError::PermeabilityDimension {
            expected: grid.ambient_dim,
            got: t.dim(),
        });
    }
    Ok(())
}

/// `Bᵀ K B` for a tangent basis `B`.
pub(crate) fn tangent_tensor(k: &PermeabilityTensor, basis: &[Vec3]) -> DMatrix<f64> {
    let d = basis.len();
    DMatrix::from_fn(d, d, |i, j| k.bilinear(&basis[i], &basis[j]))
}

pub(crate) fn tangent_coords(v: &Vec3, basis: &[Vec3]) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(v)))
}

#[cfg(test)]
mod tests;
