//! MPFA-O. One interaction region per node; sub-face pressures at the
//! continuity points are eliminated with a dense local solve.

use nalgebra::{DMatrix, DVector};

use crate::linsolve::TripletBuilder;
use crate::mesh::{FaceKind, SubdomainGrid};
use crate::permeability::PermeabilityTensor;

use super::{
    check_permeability, tangent_coords, tangent_tensor, BoundaryConditionSet, Diagnostics, FvError,
    SubdomainDiscretization,
};

const LOCAL_SINGULAR_TOLERANCE: f64 = 1e-12;

/// 1/3 on simplex grids of dimension 2 or more, 0 otherwise.
pub fn default_eta(grid: &SubdomainGrid) -> f64 {
    if grid.dim >= 2 && grid.cell_nodes.iter().all(|c| c.len() == grid.dim + 1) {
        1.0 / 3.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, PartialEq)]
enum SubFace {
    Interior,
    Dirichlet,
    /// Flux prescribed by the boundary data (Neumann or coupling).
    Flux,
}

/// Flux through one sub-face seen from one cell: `Σ_j w_j (π_j - p_c)`
/// over the local faces `faces[j]` of that cell.
struct CellFlux {
    cell: usize,
    faces: Vec<usize>,
    w: DVector<f64>,
}

pub fn assemble_mpfa(
    grid: &SubdomainGrid,
    k: &[PermeabilityTensor],
    bc: &BoundaryConditionSet,
    eta: f64,
) -> Result<SubdomainDiscretization, FvError> {
    check_permeability(grid, k)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(FvError::InvalidEta(eta));
    }
    let nf = grid.num_faces();
    let mut tc = TripletBuilder::new(nf, grid.num_cells());
    let mut tb = TripletBuilder::new(nf, nf);
    let mut diag = Diagnostics::default();
    if grid.dim == 0 {
        return Ok(SubdomainDiscretization {
            flux_cells: tc.build(),
            flux_boundary: tb.build(),
            diagnostics: diag,
        });
    }
    let kt: Vec<DMatrix<f64>> = (0..grid.num_cells())
        .map(|c| tangent_tensor(&k[c], &grid.cell_bases[c]))
        .collect();

    for node in 0..grid.num_nodes() {
        let faces = &grid.node_faces[node];
        if faces.is_empty() {
            continue;
        }
        let local = |f: usize| faces.iter().position(|&g| g == f).unwrap();
        let kinds: Vec<SubFace> = faces
            .iter()
            .map(|&f| match grid.face_kind[f] {
                FaceKind::Interior => SubFace::Interior,
                FaceKind::Boundary if bc.is_dirichlet(f) => SubFace::Dirichlet,
                _ => SubFace::Flux,
            })
            .collect();
        let mut unknown = vec![usize::MAX; faces.len()];
        let mut nu = 0;
        for (j, kind) in kinds.iter().enumerate() {
            if *kind != SubFace::Dirichlet {
                unknown[j] = nu;
                nu += 1;
            }
        }
        let mut cells: Vec<usize> = faces
            .iter()
            .flat_map(|&f| grid.face_cells[f].iter().map(|&(c, _)| c))
            .collect();
        cells.sort_unstable();
        cells.dedup();
        let cell_pos = |c: usize| cells.binary_search(&c).unwrap();
        let xn = grid.nodes[node];
        let sub_area = |f: usize| grid.face_areas[f] / grid.face_nodes[f].len() as f64;

        // per local face, the flux expression from each adjacent cell
        let mut exprs: Vec<Vec<CellFlux>> = (0..faces.len()).map(|_| Vec::new()).collect();
        for &c in &cells {
            let cf = grid.cell_faces_at_node(c, node);
            let basis = &grid.cell_bases[c];
            if cf.len() != grid.dim {
                return Err(FvError::DegenerateGeometry(format!(
                    "cell {c} meets node {node} in {} faces, expected {}",
                    cf.len(),
                    grid.dim
                )));
            }
            let lf: Vec<usize> = cf.iter().map(|&(f, _)| local(f)).collect();
            let d = DMatrix::from_fn(grid.dim, grid.dim, |r, col| {
                let f = cf[r].0;
                // Dirichlet data lives at the face centre
                let e = if kinds[local(f)] == SubFace::Dirichlet { 0.0 } else { eta };
                let xc = grid.face_centres[f] * (1.0 - e) + xn * e;
                tangent_coords(&(xc - grid.cell_centres[c]), basis)[col]
            });
            let dinv = d.try_inverse().ok_or(FvError::SingularInteractionRegion { node })?;
            let kd = &kt[c] * dinv;
            for &(f, _) in &cf {
                let nt = tangent_coords(&grid.face_normals[f], basis);
                let w = (nt.transpose() * &kd).transpose() * (-sub_area(f));
                exprs[local(f)].push(CellFlux {
                    cell: c,
                    faces: lf.clone(),
                    w,
                });
            }
        }

        let nc = cells.len();
        let ng = faces.len();
        // M π = Cp p + Cg g
        let mut m = DMatrix::zeros(nu, nu);
        let mut cp = DMatrix::zeros(nu, nc);
        let mut cg = DMatrix::zeros(nu, ng);
        let add_expr = |e: &CellFlux,
                        scale: f64,
                        row: usize,
                        m: &mut DMatrix<f64>,
                        cp: &mut DMatrix<f64>,
                        cg: &mut DMatrix<f64>| {
            let mut wsum = 0.0;
            for (j, &lf) in e.faces.iter().enumerate() {
                let w = e.w[j] * scale;
                wsum += w;
                if kinds[lf] == SubFace::Dirichlet {
                    cg[(row, lf)] -= w;
                } else {
                    m[(row, unknown[lf])] += w;
                }
            }
            cp[(row, cell_pos(e.cell))] += wsum;
        };
        for j in 0..ng {
            match kinds[j] {
                SubFace::Dirichlet => {}
                SubFace::Interior => {
                    let row = unknown[j];
                    add_expr(&exprs[j][0], 1.0, row, &mut m, &mut cp, &mut cg);
                    add_expr(&exprs[j][1], -1.0, row, &mut m, &mut cp, &mut cg);
                }
                SubFace::Flux => {
                    let row = unknown[j];
                    let f = faces[j];
                    add_expr(&exprs[j][0], 1.0, row, &mut m, &mut cp, &mut cg);
                    let s = grid.face_cells[f][0].1;
                    cg[(row, j)] += s * sub_area(f) / grid.face_areas[f];
                }
            }
        }

        let (xp, xg) = if nu > 0 {
            let scale = m.abs().max();
            let lu = m.clone().lu();
            let u = lu.u();
            let min_pivot = u.diagonal().abs().min();
            if !(min_pivot > LOCAL_SINGULAR_TOLERANCE * scale) {
                return Err(FvError::SingularInteractionRegion { node });
            }
            let inv = lu.try_inverse().ok_or(FvError::SingularInteractionRegion { node })?;
            let cond = norm1(&m) * norm1(&inv);
            diag.max_local_condition = diag.max_local_condition.max(cond);
            (&inv * &cp, &inv * &cg)
        } else {
            (DMatrix::zeros(0, nc), DMatrix::zeros(0, ng))
        };

        for j in 0..ng {
            let f = faces[j];
            if kinds[j] == SubFace::Flux {
                let s = grid.face_cells[f][0].1;
                tb.push(f, f, s * sub_area(f) / grid.face_areas[f]);
                continue;
            }
            let e = &exprs[j][0];
            let mut row_p = DVector::zeros(nc);
            let mut row_g = DVector::zeros(ng);
            let mut wsum = 0.0;
            for (i, &lf) in e.faces.iter().enumerate() {
                let w = e.w[i];
                wsum += w;
                if kinds[lf] == SubFace::Dirichlet {
                    row_g[lf] += w;
                } else {
                    row_p += xp.row(unknown[lf]).transpose() * w;
                    row_g += xg.row(unknown[lf]).transpose() * w;
                }
            }
            row_p[cell_pos(e.cell)] -= wsum;
            for (i, &c) in cells.iter().enumerate() {
                tc.push(f, c, row_p[i]);
            }
            for (i, &g) in faces.iter().enumerate() {
                if row_g[i] != 0.0 {
                    tb.push(f, g, row_g[i]);
                }
            }
        }
    }
    Ok(SubdomainDiscretization {
        flux_cells: tc.build(),
        flux_boundary: tb.build(),
        diagnostics: diag,
    })
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max)
}
