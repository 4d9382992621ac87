//! Mixed-dimensional mesh hierarchy: per-dimension subdomain grids plus the
//! matched interface maps that connect them.

mod cartesian;
pub mod geometry;
mod io;

pub use cartesian::{
    build_cartesian_with_fractures, build_tensor_grid_with_fractures, FractureNetworkSpec,
    FracturePatch, IntersectionPermeability,
};
pub use io::{import_conforming_mesh, read_mesh_document, write_mesh_document, MESH_FORMAT_VERSION};

use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("fracture {fracture}: plane or extent at {value} on axis {axis} is not aligned with the grid")]
    NotGridAligned { fracture: usize, axis: usize, value: f64 },
    #[error("fracture {fracture} lies on the domain boundary")]
    FractureOnBoundary { fracture: usize },
    #[error("fractures {first} and {second} overlap")]
    OverlappingFractures { first: usize, second: usize },
    #[error("invalid network specification: {0}")]
    InvalidSpec(String),
    #[error("mesh document line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("interface {interface} pair {pair} (face {face}, cell {cell}): centroids differ by {distance:e}")]
    Conformity {
        interface: usize,
        pair: usize,
        face: usize,
        cell: usize,
        distance: f64,
    },
    #[error("degenerate geometry in subdomain {subdomain}: {what}")]
    DegenerateGeometry { subdomain: usize, what: String },
    #[error("mesh invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What part of the fractured domain a subdomain represents.
#[derive(Debug, Clone, PartialEq)]
pub enum SubdomainKind {
    Matrix,
    Fracture { id: usize },
    /// Intersection of fractures; the parent fracture ids are kept per cell.
    Intersection { cell_parents: Vec<Vec<usize>> },
    Imported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
    /// One-sided face on an internal (fracture) boundary, coupled to a
    /// lower-dimensional cell.
    InternalBoundary,
}

/// Grid of one subdomain with its geometry.
///
/// Volumes and face areas carry the aperture weighting `a^(N-d)`; the
/// unweighted measures are kept alongside.
#[derive(Debug, Clone)]
pub struct SubdomainGrid {
    pub dim: usize,
    pub ambient_dim: usize,
    pub kind: SubdomainKind,
    pub nodes: Vec<Vec3>,
    pub cell_nodes: Vec<Vec<usize>>,
    pub face_nodes: Vec<Vec<usize>>,
    /// `(face, sign)`; sign is +1 where the face normal points out of the cell.
    pub cell_faces: Vec<Vec<(usize, f64)>>,
    /// `(cell, sign)`, one or two entries.
    pub face_cells: Vec<Vec<(usize, f64)>>,
    pub face_kind: Vec<FaceKind>,
    pub node_faces: Vec<Vec<usize>>,
    pub aperture: Vec<f64>,
    pub cell_centres: Vec<Vec3>,
    pub cell_volumes: Vec<f64>,
    pub cell_measures: Vec<f64>,
    /// Orthonormal tangent basis (d vectors) per cell.
    pub cell_bases: Vec<Vec<Vec3>>,
    pub face_centres: Vec<Vec3>,
    pub face_normals: Vec<Vec3>,
    pub face_areas: Vec<f64>,
    pub face_measures: Vec<f64>,
}

/// Topology input for [`SubdomainGrid::from_topology`].
#[derive(Debug, Clone)]
pub struct SubdomainTopology {
    pub dim: usize,
    pub ambient_dim: usize,
    pub kind: SubdomainKind,
    pub aperture: Vec<f64>,
    pub nodes: Vec<Vec3>,
    pub cell_nodes: Vec<Vec<usize>>,
    pub face_nodes: Vec<Vec<usize>>,
    pub cell_faces: Vec<Vec<usize>>,
    pub internal_boundary: Vec<bool>,
}

impl SubdomainGrid {
    pub fn from_topology(topo: SubdomainTopology, id: usize) -> Result<Self, MeshError> {
        let SubdomainTopology {
            dim,
            ambient_dim,
            kind,
            aperture,
            nodes,
            cell_nodes,
            face_nodes,
            cell_faces,
            internal_boundary,
        } = topo;
        let degenerate = |what: String| MeshError::DegenerateGeometry { subdomain: id, what };
        let nc = cell_nodes.len();
        let nf = face_nodes.len();
        if aperture.len() != nc || cell_faces.len() != nc || internal_boundary.len() != nf {
            return Err(MeshError::Invariant(format!(
                "subdomain {id}: inconsistent topology array lengths"
            )));
        }
        let scale = bbox_diameter(&nodes).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let weight = |a: f64| a.powi((ambient_dim - dim) as i32);

        let mut face_cells: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for (c, faces) in cell_faces.iter().enumerate() {
            for &f in faces {
                if f >= nf {
                    return Err(MeshError::Invariant(format!("subdomain {id}: cell {c} references face {f}")));
                }
                face_cells[f].push(c);
            }
        }

        let pts = |ids: &[usize]| ids.iter().map(|&n| nodes[n]).collect::<Vec<_>>();

        let mut face_centres = Vec::with_capacity(nf);
        let mut face_measures = Vec::with_capacity(nf);
        for f in 0..nf {
            let (m, c) = geometry::face_measure_centroid(&pts(&face_nodes[f]));
            if !(m > 0.0) {
                return Err(degenerate(format!("face {f} has zero measure")));
            }
            face_measures.push(m);
            face_centres.push(c);
        }

        let mut cell_centres = Vec::with_capacity(nc);
        let mut cell_measures = Vec::with_capacity(nc);
        let mut cell_volumes = Vec::with_capacity(nc);
        let mut cell_bases = Vec::with_capacity(nc);
        for c in 0..nc {
            let cp = pts(&cell_nodes[c]);
            let faces: Vec<Vec<Vec3>> = cell_faces[c].iter().map(|&f| pts(&face_nodes[f])).collect();
            let (m, centre) = if dim == 0 {
                (1.0, cp[0])
            } else {
                geometry::cell_measure_centroid(&cp, &faces)
            };
            if !(m > 0.0) {
                return Err(degenerate(format!("cell {c} has zero measure")));
            }
            let basis = if dim == ambient_dim {
                (0..dim).map(|a| Vec3::ith(a, 1.0)).collect()
            } else {
                geometry::affine_basis(&cp, dim, tol)
            };
            if basis.len() != dim {
                return Err(degenerate(format!("cell {c} does not span {dim} dimensions")));
            }
            cell_centres.push(centre);
            cell_measures.push(m);
            cell_volumes.push(m * weight(aperture[c]));
            cell_bases.push(basis);
        }

        let mut face_normals = Vec::with_capacity(nf);
        let mut face_areas = Vec::with_capacity(nf);
        let mut face_kind = Vec::with_capacity(nf);
        let mut signed_face_cells = Vec::with_capacity(nf);
        let mut signed_cell_faces: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nc];
        for f in 0..nf {
            let cells = &face_cells[f];
            let first = *cells
                .first()
                .ok_or_else(|| MeshError::Invariant(format!("subdomain {id}: face {f} has no cell")))?;
            if cells.len() > 2 {
                return Err(MeshError::Invariant(format!(
                    "subdomain {id}: face {f} has {} cells",
                    cells.len()
                )));
            }
            let n = geometry::face_normal(
                &pts(&face_nodes[f]),
                &face_centres[f],
                &cell_centres[first],
                &cell_bases[first],
                tol,
            )
            .ok_or_else(|| degenerate(format!("face {f} normal undefined")))?;
            face_normals.push(n);
            face_areas.push(face_measures[f] * weight(aperture[first]));
            let kind = match (cells.len(), internal_boundary[f]) {
                (2, false) => FaceKind::Interior,
                (1, false) => FaceKind::Boundary,
                (1, true) => FaceKind::InternalBoundary,
                _ => {
                    return Err(MeshError::Invariant(format!(
                        "subdomain {id}: internal-boundary face {f} has two cells"
                    )))
                }
            };
            face_kind.push(kind);
            let mut fc = Vec::with_capacity(cells.len());
            for &c in cells {
                let s = if n.dot(&(face_centres[f] - cell_centres[c])) >= 0.0 { 1.0 } else { -1.0 };
                fc.push((c, s));
            }
            signed_face_cells.push(fc);
        }
        for c in 0..nc {
            for &f in &cell_faces[c] {
                let s = signed_face_cells[f].iter().find(|(cc, _)| *cc == c).unwrap().1;
                signed_cell_faces[c].push((f, s));
            }
        }
        let mut node_faces = vec![Vec::new(); nodes.len()];
        for (f, fnodes) in face_nodes.iter().enumerate() {
            for &n in fnodes {
                node_faces[n].push(f);
            }
        }

        Ok(Self {
            dim,
            ambient_dim,
            kind,
            nodes,
            cell_nodes,
            face_nodes,
            cell_faces: signed_cell_faces,
            face_cells: signed_face_cells,
            face_kind,
            node_faces,
            aperture,
            cell_centres,
            cell_volumes,
            cell_measures,
            cell_bases,
            face_centres,
            face_normals,
            face_areas,
            face_measures,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    pub fn num_faces(&self) -> usize {
        self.face_nodes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_faces()).filter(|&f| self.face_kind[f] == FaceKind::Boundary)
    }

    /// Largest pairwise node distance of a cell.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let ids = &self.cell_nodes[c];
        let mut d: f64 = 0.0;
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                d = d.max((self.nodes[a] - self.nodes[b]).norm());
            }
        }
        d
    }

    /// Faces of cell `c` that contain node `n`.
    pub fn cell_faces_at_node(&self, c: usize, n: usize) -> Vec<(usize, f64)> {
        self.cell_faces[c]
            .iter()
            .copied()
            .filter(|&(f, _)| self.face_nodes[f].contains(&n))
            .collect()
    }
}

pub(crate) fn bbox_diameter(points: &[Vec3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

/// Matched coupling between a subdomain and one of dimension one lower.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMap {
    pub higher: usize,
    pub lower: usize,
    /// `(higher-dim face, lower-dim cell)`.
    pub pairs: Vec<(usize, usize)>,
}

/// The full hierarchy with a global cell numbering.
#[derive(Debug, Clone)]
pub struct MixedDimensionalMesh {
    pub ambient_dim: usize,
    pub subdomains: Vec<SubdomainGrid>,
    pub interfaces: Vec<InterfaceMap>,
    offsets: Vec<usize>,
}

/// Relative tolerance (of the domain diameter) for interface centroid matching.
pub const CONFORMITY_TOLERANCE: f64 = 1e-10;

impl MixedDimensionalMesh {
    pub fn new(
        ambient_dim: usize,
        subdomains: Vec<SubdomainGrid>,
        interfaces: Vec<InterfaceMap>,
    ) -> Result<Self, MeshError> {
        let mut offsets = Vec::with_capacity(subdomains.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for sd in &subdomains {
            acc += sd.num_cells();
            offsets.push(acc);
        }
        let mesh = Self {
            ambient_dim,
            subdomains,
            interfaces,
            offsets,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_dofs(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn dof(&self, subdomain: usize, cell: usize) -> usize {
        self.offsets[subdomain] + cell
    }

    pub fn dof_range(&self, subdomain: usize) -> std::ops::Range<usize> {
        self.offsets[subdomain]..self.offsets[subdomain + 1]
    }

    /// `(subdomain, cell)` owning a global dof.
    pub fn dof_owner(&self, dof: usize) -> (usize, usize) {
        let s = self.offsets.partition_point(|&o| o <= dof) - 1;
        (s, dof - self.offsets[s])
    }

    pub fn max_dim(&self) -> usize {
        self.subdomains.iter().map(|s| s.dim).max().unwrap_or(0)
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Vec3> = self.subdomains.iter().flat_map(|s| s.nodes.iter().copied()).collect();
        bbox_diameter(&pts)
    }

    /// Dofs of all cells in subdomains of dimension `<= max_dim`.
    pub fn dofs_with_dim_at_most(&self, max_dim: usize) -> Vec<usize> {
        (0..self.subdomains.len())
            .filter(|&s| self.subdomains[s].dim <= max_dim)
            .flat_map(|s| self.dof_range(s))
            .collect()
    }

    pub fn dof_centre(&self, dof: usize) -> Vec3 {
        let (s, c) = self.dof_owner(dof);
        self.subdomains[s].cell_centres[c]
    }

    pub fn dof_volume(&self, dof: usize) -> f64 {
        let (s, c) = self.dof_owner(dof);
        self.subdomains[s].cell_volumes[c]
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let top = self.max_dim();
        let diam = self.diameter();
        for (s, sd) in self.subdomains.iter().enumerate() {
            if sd.dim == top && sd.aperture.iter().any(|&a| a != 1.0) {
                return Err(MeshError::Invariant(format!(
                    "highest-dimensional subdomain {s} must have unit aperture"
                )));
            }
            for (c, &v) in sd.cell_volumes.iter().enumerate() {
                if !(v > 0.0) {
                    return Err(MeshError::Invariant(format!("subdomain {s} cell {c}: non-positive volume")));
                }
            }
            for f in 0..sd.num_faces() {
                if !(sd.face_areas[f] > 0.0) {
                    return Err(MeshError::Invariant(format!("subdomain {s} face {f}: non-positive area")));
                }
                if (sd.face_normals[f].norm() - 1.0).abs() > 1e-12 {
                    return Err(MeshError::Invariant(format!("subdomain {s} face {f}: normal not unit")));
                }
            }
        }
        let mut coupled: Vec<Vec<bool>> = self
            .subdomains
            .iter()
            .map(|sd| vec![false; sd.num_faces()])
            .collect();
        for (i, intf) in self.interfaces.iter().enumerate() {
            let (hi, lo) = (&self.subdomains[intf.higher], &self.subdomains[intf.lower]);
            if hi.dim != lo.dim + 1 {
                return Err(MeshError::Invariant(format!(
                    "interface {i} connects dimensions {} and {}",
                    hi.dim, lo.dim
                )));
            }
            for (p, &(f, c)) in intf.pairs.iter().enumerate() {
                if f >= hi.num_faces() || c >= lo.num_cells() {
                    return Err(MeshError::Invariant(format!("interface {i} pair {p} out of range")));
                }
                if hi.face_kind[f] != FaceKind::InternalBoundary {
                    return Err(MeshError::Invariant(format!(
                        "interface {i} pair {p}: face {f} is not an internal boundary"
                    )));
                }
                if std::mem::replace(&mut coupled[intf.higher][f], true) {
                    return Err(MeshError::Invariant(format!(
                        "face {f} of subdomain {} is coupled twice",
                        intf.higher
                    )));
                }
                let distance = (hi.face_centres[f] - lo.cell_centres[c]).norm();
                if distance > CONFORMITY_TOLERANCE * diam {
                    return Err(MeshError::Conformity {
                        interface: i,
                        pair: p,
                        face: f,
                        cell: c,
                        distance,
                    });
                }
            }
        }
        for (s, sd) in self.subdomains.iter().enumerate() {
            for f in 0..sd.num_faces() {
                if sd.face_kind[f] == FaceKind::InternalBoundary && !coupled[s][f] {
                    return Err(MeshError::Invariant(format!(
                        "internal-boundary face {f} of subdomain {s} has no interface pair"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Lookup from `(higher subdomain, face)` to `(interface, pair index)`.
    pub fn interface_face_index(&self) -> Vec<Vec<Option<(usize, usize)>>> {
        let mut idx: Vec<Vec<Option<(usize, usize)>>> = self
            .subdomains
            .iter()
            .map(|sd| vec![None; sd.num_faces()])
            .collect();
        for (i, intf) in self.interfaces.iter().enumerate() {
            for (p, &(f, _)) in intf.pairs.iter().enumerate() {
                idx[intf.higher][f] = Some((i, p));
            }
        }
        idx
    }
}

/// Smallest cell diameter of the highest-dimensional subdomain(s).
pub fn min_cell_diameter(mesh: &MixedDimensionalMesh) -> f64 {
    let top = mesh.max_dim();
    mesh.subdomains
        .iter()
        .filter(|s| s.dim == top)
        .flat_map(|s| (0..s.num_cells()).map(move |c| s.cell_diameter(c)))
        .fold(f64::INFINITY, f64::min)
}
