use crate::mesh::{FaceKind, SubdomainGrid};
use crate::Vec3;

use super::FvError;

/// Condition on one boundary face. Neumann values are outward normal flux
/// densities; the face carries `value * area`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    Neumann(f64),
}

/// Per-face conditions of one subdomain. Entries of non-boundary faces are
/// `None`; faces on internal boundaries take the coupling flux instead.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditionSet {
    faces: Vec<Option<BoundaryCondition>>,
}

impl BoundaryConditionSet {
    /// Zero Neumann on every boundary face.
    pub fn no_flow(grid: &SubdomainGrid) -> Self {
        Self::from_fn(grid, |_, _| BoundaryCondition::Neumann(0.0))
    }

    /// Evaluates `f(face centre, outward normal)` on every boundary face.
    pub fn from_fn(grid: &SubdomainGrid, mut f: impl FnMut(&Vec3, &Vec3) -> BoundaryCondition) -> Self {
        let faces = (0..grid.num_faces())
            .map(|k| match grid.face_kind[k] {
                FaceKind::Boundary => Some(f(&grid.face_centres[k], &grid.face_normals[k])),
                _ => None,
            })
            .collect();
        Self { faces }
    }

    /// Checks completeness against `grid`.
    pub fn from_faces(grid: &SubdomainGrid, faces: Vec<Option<BoundaryCondition>>) -> Result<Self, FvError> {
        if faces.len() != grid.num_faces() {
            return Err(FvError::BoundaryConditions(format!(
                "{} conditions for {} faces",
                faces.len(),
                grid.num_faces()
            )));
        }
        for (k, bc) in faces.iter().enumerate() {
            match (grid.face_kind[k], bc) {
                (FaceKind::Boundary, None) => {
                    return Err(FvError::BoundaryConditions(format!("boundary face {k} has no condition")))
                }
                (FaceKind::InternalBoundary, Some(_)) => {
                    return Err(FvError::BoundaryConditions(format!(
                        "face {k} lies on an internal boundary and cannot be assigned a condition"
                    )))
                }
                (FaceKind::Interior, Some(_)) => {
                    return Err(FvError::BoundaryConditions(format!("face {k} is interior")))
                }
                _ => {}
            }
        }
        Ok(Self { faces })
    }

    pub fn get(&self, face: usize) -> Option<BoundaryCondition> {
        self.faces[face]
    }

    pub fn set(&mut self, face: usize, bc: BoundaryCondition) {
        assert!(self.faces[face].is_some(), "face {face} is not an outer boundary face");
        self.faces[face] = Some(bc);
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn is_dirichlet(&self, face: usize) -> bool {
        matches!(self.faces[face], Some(BoundaryCondition::Dirichlet(_)))
    }

    /// Boundary data vector of the flux operator: Dirichlet values, total
    /// Neumann fluxes, and zero elsewhere.
    pub fn boundary_data(&self, grid: &SubdomainGrid) -> Vec<f64> {
        self.faces
            .iter()
            .enumerate()
            .map(|(k, bc)| match bc {
                Some(BoundaryCondition::Dirichlet(v)) => *v,
                Some(BoundaryCondition::Neumann(u)) => u * grid.face_areas[k],
                None => 0.0,
            })
            .collect()
    }
}
