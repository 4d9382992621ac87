use crate::linsolve::TripletBuilder;
use crate::mesh::{FaceKind, SubdomainGrid};
use crate::permeability::PermeabilityTensor;
use crate::Vec3;

use super::{check_permeability, BoundaryConditionSet, Diagnostics, FvError, SubdomainDiscretization};

/// `A (n·K·d) / (d·d)` with `d` from the cell centre to the face centre.
/// Negative values are returned unchanged.
pub fn tpfa_half_transmissibility(
    area: f64,
    normal: &Vec3,
    d: &Vec3,
    k: &PermeabilityTensor,
) -> Result<f64, FvError> {
    let dd = d.dot(d);
    if !(dd > 0.0) {
        return Err(FvError::DegenerateGeometry("cell centre coincides with face centre".into()));
    }
    Ok(area * k.bilinear(normal, d) / dd)
}

/// Harmonic combination; `None` when `α_i + α_j = 0`, which the caller
/// treats as a blocking face.
pub fn tpfa_face_transmissibility(alpha_i: f64, alpha_j: f64) -> Option<f64> {
    let s = alpha_i + alpha_j;
    if s == 0.0 {
        return None;
    }
    Some(alpha_i * alpha_j / s)
}

pub fn assemble_tpfa(
    grid: &SubdomainGrid,
    k: &[PermeabilityTensor],
    bc: &BoundaryConditionSet,
) -> Result<SubdomainDiscretization, FvError> {
    check_permeability(grid, k)?;
    let nf = grid.num_faces();
    let mut tc = TripletBuilder::with_capacity(nf, grid.num_cells(), 2 * nf);
    let mut tb = TripletBuilder::new(nf, nf);
    let mut diag = Diagnostics::default();

    for f in 0..nf {
        let mut half = Vec::with_capacity(2);
        for &(c, s) in &grid.face_cells[f] {
            let d = grid.face_centres[f] - grid.cell_centres[c];
            // the normal oriented out of c
            let n = grid.face_normals[f] * s;
            let a = tpfa_half_transmissibility(grid.face_areas[f], &n, &d, &k[c]).map_err(|_| {
                FvError::DegenerateGeometry(format!("face {f}: cell {c} centre lies on the face"))
            })?;
            if a < 0.0 {
                diag.negative_half_transmissibilities += 1;
            }
            half.push((c, s, a));
        }
        match grid.face_kind[f] {
            FaceKind::Interior => {
                let (ci, si, ai) = half[0];
                let (cj, sj, aj) = half[1];
                match tpfa_face_transmissibility(ai, aj) {
                    Some(t) => {
                        tc.push(f, ci, si * t);
                        tc.push(f, cj, sj * t);
                    }
                    None => diag.blocked_faces += 1,
                }
            }
            FaceKind::Boundary if bc.is_dirichlet(f) => {
                let (c, s, a) = half[0];
                tc.push(f, c, s * a);
                tb.push(f, f, -s * a);
            }
            FaceKind::Boundary | FaceKind::InternalBoundary => {
                // data is the flux out of the cell
                let (_, s, _) = half[0];
                tb.push(f, f, s);
            }
        }
    }
    Ok(SubdomainDiscretization {
        flux_cells: tc.build(),
        flux_boundary: tb.build(),
        diagnostics: diag,
    })
}
