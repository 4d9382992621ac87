//! Fracture-matrix coupling and global assembly.
//!
//! Every interface pair (higher face `f`, lower cell `j`) carries a flux
//! `λ = t (p_i - p_j)` from the higher cell `i` into `j`. Assembly works with
//! two operators over the global dofs:
//!
//! * `Λ` (pairs x dofs), the interface fluxes;
//! * `Φ = Tc + Tb P Λ` (faces x dofs) plus a constant part `Tb g`, the
//!   internal face fluxes of all subdomains, where `P` places each `λ` in
//!   the boundary data slot of its face.
//!
//! The global matrix is `A = Div Φ - L Λ` where `L` adds `λ` to the lower
//! cell's balance.

use serde::Serialize;
use thiserror::Error;

use crate::fv::{self, BoundaryCondition, BoundaryConditionSet, Diagnostics, FvError, Method, SubdomainDiscretization};
use crate::linsolve::{CsrMatrix, TripletBuilder};
use crate::mesh::{FractureNetworkSpec, MixedDimensionalMesh, SubdomainKind};
use crate::permeability::PermeabilityTensor;
use crate::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum CouplingError {
    #[error("subdomain {subdomain}: {source}")]
    Discretization { subdomain: usize, source: FvError },
    #[error(
        "interface {interface}, pair {pair}: aperture {aperture:e} is not small against the \
         cell-to-face distance {distance:e}; the corrected distance would change sign (the model assumes a << h_min)"
    )]
    ApertureTooLarge {
        interface: usize,
        pair: usize,
        aperture: f64,
        distance: f64,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Coupling half transmissibilities and their harmonic combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingTransmissibility {
    /// Higher-dimensional side.
    pub alpha_higher: f64,
    /// Lower-dimensional side, `n·K·n / (a/2) · A`.
    pub alpha_lower: f64,
    pub t: f64,
}

/// `area` is the aperture-weighted face area, `normal` points out of the
/// higher cell and `d` runs from its centre to the face centre.
/// `lower_dim == 0` replaces `n·K·n` by the mean eigenvalue.
pub fn coupling_transmissibility(
    area: f64,
    normal: &Vec3,
    d: &Vec3,
    k_higher: &PermeabilityTensor,
    aperture: f64,
    k_lower: &PermeabilityTensor,
    lower_dim: usize,
    distance_correction: bool,
) -> Result<CouplingTransmissibility, CouplingError> {
    let dist = d.norm();
    let d_eff = if distance_correction {
        if aperture >= 2.0 * dist {
            return Err(CouplingError::ApertureTooLarge {
                interface: usize::MAX,
                pair: usize::MAX,
                aperture,
                distance: dist,
            });
        }
        d * (1.0 - aperture / (2.0 * dist))
    } else {
        *d
    };
    let alpha_higher = fv::tpfa_half_transmissibility(area, normal, &d_eff, k_higher)
        .map_err(|e| CouplingError::Invalid(e.to_string()))?;
    let kn = if lower_dim == 0 {
        k_lower.mean_eigenvalue()
    } else {
        k_lower.bilinear(normal, normal)
    };
    let alpha_lower = kn / (aperture / 2.0) * area;
    let t = fv::tpfa_face_transmissibility(alpha_higher, alpha_lower).unwrap_or(0.0);
    Ok(CouplingTransmissibility {
        alpha_higher,
        alpha_lower,
        t,
    })
}

/// Flow problem on a mixed-dimensional mesh. Permeabilities are ambient
/// tensors per cell; sources are cell-integrated rates per global dof.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub mesh: MixedDimensionalMesh,
    pub permeability: Vec<Vec<PermeabilityTensor>>,
    pub methods: Vec<Method>,
    pub bc: Vec<BoundaryConditionSet>,
    pub sources: Vec<f64>,
    pub distance_correction: bool,
}

impl FlowProblem {
    /// No-flow boundaries, no sources, one method everywhere.
    pub fn new(mesh: MixedDimensionalMesh, permeability: Vec<Vec<PermeabilityTensor>>, method: Method) -> Self {
        let bc = mesh.subdomains.iter().map(BoundaryConditionSet::no_flow).collect();
        let methods = vec![method; mesh.subdomains.len()];
        let sources = vec![0.0; mesh.num_dofs()];
        Self {
            mesh,
            permeability,
            methods,
            bc,
            sources,
            distance_correction: false,
        }
    }

    /// Sets every outer boundary face from `f(subdomain, face centre, normal)`.
    pub fn set_boundary_conditions(&mut self, mut f: impl FnMut(usize, &Vec3, &Vec3) -> BoundaryCondition) {
        self.bc = self
            .mesh
            .subdomains
            .iter()
            .enumerate()
            .map(|(s, g)| BoundaryConditionSet::from_fn(g, |x, n| f(s, x, n)))
            .collect();
    }

    /// `top` on the highest-dimensional subdomains, `lower` elsewhere.
    pub fn set_methods_by_dim(&mut self, top: Method, lower: Method) {
        let n = self.mesh.max_dim();
        self.methods = self
            .mesh
            .subdomains
            .iter()
            .map(|s| if s.dim == n { top } else { lower })
            .collect();
    }
}

/// Cell permeabilities for a mesh built from `spec`: fractures take their
/// patch tensor, intersections follow the spec's rule, and the matrix is
/// evaluated at cell centres.
pub fn network_permeability(
    mesh: &MixedDimensionalMesh,
    spec: &FractureNetworkSpec,
    matrix: impl Fn(&Vec3) -> PermeabilityTensor,
) -> Vec<Vec<PermeabilityTensor>> {
    mesh.subdomains
        .iter()
        .map(|sd| match &sd.kind {
            SubdomainKind::Fracture { id } => vec![spec.fractures[*id].permeability; sd.num_cells()],
            SubdomainKind::Intersection { cell_parents } => {
                cell_parents.iter().map(|p| spec.intersection_tensor(p)).collect()
            }
            SubdomainKind::Matrix | SubdomainKind::Imported => sd.cell_centres.iter().map(&matrix).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfacePair {
    pub interface: usize,
    pub pair: usize,
    pub higher_dof: usize,
    pub lower_dof: usize,
    /// Global face index of the higher-dimensional face.
    pub face: usize,
    pub transmissibility: CouplingTransmissibility,
}

#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Start of each subdomain's faces in the global face numbering.
    pub face_offsets: Vec<usize>,
    /// `Φ` (faces x dofs).
    pub face_flux: CsrMatrix,
    pub face_flux_const: Vec<f64>,
    /// `Λ` (pairs x dofs).
    pub interface_flux: CsrMatrix,
    pub pairs: Vec<InterfacePair>,
    /// Signed incidence (dofs x faces).
    pub divergence: CsrMatrix,
    pub sources: Vec<f64>,
    pub discretizations: Vec<SubdomainDiscretization>,
    pub diagnostics: Diagnostics,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.rhs.len()
    }

    pub fn face_fluxes(&self, p: &[f64]) -> Vec<f64> {
        let mut f = self.face_flux.mul_vec(p);
        for (v, c) in f.iter_mut().zip(&self.face_flux_const) {
            *v += c;
        }
        f
    }

    /// Flux from the higher into the lower cell of every pair.
    pub fn interface_fluxes(&self, p: &[f64]) -> Vec<f64> {
        self.interface_flux.mul_vec(p)
    }

    /// Per-dof mass balance residual: outflow through faces minus inflow
    /// from higher dimensions minus source.
    pub fn conservation_residual(&self, p: &[f64]) -> Vec<f64> {
        let mut r = self.divergence.mul_vec(&self.face_fluxes(p));
        for (k, lam) in self.interface_fluxes(p).into_iter().enumerate() {
            r[self.pairs[k].lower_dof] -= lam;
        }
        for (ri, s) in r.iter_mut().zip(&self.sources) {
            *ri -= s;
        }
        r
    }

    pub fn global_face(&self, subdomain: usize, face: usize) -> usize {
        self.face_offsets[subdomain] + face
    }
}

/// Subdomain discretizations plus the two-point couplings.
pub fn discretize(problem: &FlowProblem) -> Result<(Vec<SubdomainDiscretization>, Vec<InterfacePair>), CouplingError> {
    let mesh = &problem.mesh;
    let ns = mesh.subdomains.len();
    if problem.permeability.len() != ns || problem.methods.len() != ns || problem.bc.len() != ns {
        return Err(CouplingError::Invalid("per-subdomain inputs do not match the mesh".into()));
    }
    if problem.sources.len() != mesh.num_dofs() {
        return Err(CouplingError::Invalid("source vector does not match the dofs".into()));
    }
    let mut discs = Vec::with_capacity(ns);
    for (s, sd) in mesh.subdomains.iter().enumerate() {
        let d = fv::discretize(sd, &problem.permeability[s], &problem.bc[s], problem.methods[s])
            .map_err(|source| CouplingError::Discretization { subdomain: s, source })?;
        discs.push(d);
    }
    let face_offsets = face_offsets(mesh);
    let mut pairs = Vec::new();
    for (i, intf) in mesh.interfaces.iter().enumerate() {
        let hi = &mesh.subdomains[intf.higher];
        let lo = &mesh.subdomains[intf.lower];
        for (k, &(f, j)) in intf.pairs.iter().enumerate() {
            let (c, s) = hi.face_cells[f][0];
            let n = hi.face_normals[f] * s;
            let d = hi.face_centres[f] - hi.cell_centres[c];
            let ct = coupling_transmissibility(
                hi.face_areas[f],
                &n,
                &d,
                &problem.permeability[intf.higher][c],
                lo.aperture[j],
                &problem.permeability[intf.lower][j],
                lo.dim,
                problem.distance_correction,
            )
            .map_err(|e| match e {
                CouplingError::ApertureTooLarge { aperture, distance, .. } => CouplingError::ApertureTooLarge {
                    interface: i,
                    pair: k,
                    aperture,
                    distance,
                },
                other => other,
            })?;
            pairs.push(InterfacePair {
                interface: i,
                pair: k,
                higher_dof: mesh.dof(intf.higher, c),
                lower_dof: mesh.dof(intf.lower, j),
                face: face_offsets[intf.higher] + f,
                transmissibility: ct,
            });
        }
    }
    Ok((discs, pairs))
}

fn face_offsets(mesh: &MixedDimensionalMesh) -> Vec<usize> {
    let mut off = Vec::with_capacity(mesh.subdomains.len() + 1);
    let mut acc = 0;
    for sd in &mesh.subdomains {
        off.push(acc);
        acc += sd.num_faces();
    }
    off.push(acc);
    off
}

/// Two-point interface flux operator.
pub fn two_point_interface_flux(pairs: &[InterfacePair], ndofs: usize) -> CsrMatrix {
    let mut t = TripletBuilder::new(pairs.len(), ndofs);
    for (k, p) in pairs.iter().enumerate() {
        t.push(k, p.higher_dof, p.transmissibility.t);
        t.push(k, p.lower_dof, -p.transmissibility.t);
    }
    t.build()
}

pub fn assemble_global(problem: &FlowProblem) -> Result<GlobalSystem, CouplingError> {
    let (discs, pairs) = discretize(problem)?;
    let lambda = two_point_interface_flux(&pairs, problem.mesh.num_dofs());
    Ok(assemble_with_interface_flux(problem, discs, pairs, lambda))
}

/// Assembly for a given interface flux operator.
pub fn assemble_with_interface_flux(
    problem: &FlowProblem,
    discs: Vec<SubdomainDiscretization>,
    pairs: Vec<InterfacePair>,
    lambda: CsrMatrix,
) -> GlobalSystem {
    let mesh = &problem.mesh;
    let nd = mesh.num_dofs();
    let offsets = face_offsets(mesh);
    let nf = *offsets.last().unwrap();

    // pair feeding each global face, if any
    let mut face_pair = vec![usize::MAX; nf];
    for (k, p) in pairs.iter().enumerate() {
        face_pair[p.face] = k;
    }

    let mut phi = TripletBuilder::new(nf, nd);
    let mut phi0 = vec![0.0; nf];
    let mut div = TripletBuilder::new(nd, nf);
    let mut diagnostics = Diagnostics::default();
    for (s, sd) in mesh.subdomains.iter().enumerate() {
        let disc = &discs[s];
        diagnostics.merge(&disc.diagnostics);
        let g = problem.bc[s].boundary_data(sd);
        let base = offsets[s];
        let dof0 = mesh.dof_range(s).start;
        for f in 0..sd.num_faces() {
            let gf = base + f;
            for (c, v) in disc.flux_cells.row(f) {
                phi.push(gf, dof0 + c, v);
            }
            for (h, v) in disc.flux_boundary.row(f) {
                let k = face_pair[base + h];
                if k == usize::MAX {
                    phi0[gf] += v * g[h];
                } else {
                    for (dof, w) in lambda.row(k) {
                        phi.push(gf, dof, v * w);
                    }
                }
            }
        }
        for (c, faces) in sd.cell_faces.iter().enumerate() {
            for &(f, sign) in faces {
                div.push(dof0 + c, base + f, sign);
            }
        }
    }
    let face_flux = phi.build();
    let divergence = div.build();

    let mut a = TripletBuilder::new(nd, nd);
    for r in 0..nd {
        for (f, sign) in divergence.row(r) {
            for (c, v) in face_flux.row(f) {
                a.push(r, c, sign * v);
            }
        }
    }
    for (k, p) in pairs.iter().enumerate() {
        for (c, v) in lambda.row(k) {
            a.push(p.lower_dof, c, -v);
        }
    }
    let matrix = a.build();
    let dphi0 = divergence.mul_vec(&phi0);
    let rhs = problem.sources.iter().zip(&dphi0).map(|(q, d)| q - d).collect();

    GlobalSystem {
        matrix,
        rhs,
        face_offsets: offsets,
        face_flux,
        face_flux_const: phi0,
        interface_flux: lambda,
        pairs,
        divergence,
        sources: problem.sources.clone(),
        discretizations: discs,
        diagnostics,
    }
}
