//! Tensor-product grids with axis-aligned fracture patches on grid planes.
//!
//! The builder splits matrix faces on fracture planes into two one-sided
//! faces, meshes each fracture patch with the coincident grid facets, and
//! cuts fractures along their intersections, which become lower-dimensional
//! subdomains (lines and points in 3D, points in 2D).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{InterfaceMap, MeshError, MixedDimensionalMesh, SubdomainGrid, SubdomainKind, SubdomainTopology};
use crate::permeability::PermeabilityTensor;
use crate::Vec3;

/// Planar fracture patch, normal to `normal_axis` at `position`.
#[derive(Debug, Clone)]
pub struct FracturePatch {
    pub normal_axis: usize,
    pub position: f64,
    /// `[min, max]` per axis; the entry of the normal axis is ignored.
    pub extent: [[f64; 2]; 3],
    pub aperture: f64,
    pub permeability: PermeabilityTensor,
}

impl FracturePatch {
    /// Patch spanning the whole box of `spec` in its tangential directions.
    pub fn spanning(
        spec: &FractureNetworkSpec,
        normal_axis: usize,
        position: f64,
        aperture: f64,
        permeability: PermeabilityTensor,
    ) -> Self {
        let mut extent = [[0.0; 2]; 3];
        for a in 0..3 {
            extent[a] = [spec.lower[a], spec.upper[a]];
        }
        Self {
            normal_axis,
            position,
            extent,
            aperture,
            permeability,
        }
    }
}

/// How intersection cells obtain their permeability.
#[derive(Debug, Clone)]
pub enum IntersectionPermeability {
    /// The parent fracture with the smallest mean eigenvalue.
    LeastPermeable,
    /// A named fracture, falling back to the least permeable parent when the
    /// named one does not take part in the intersection.
    FromFracture(usize),
    /// Tensor harmonic mean of the crossing fractures.
    HarmonicAverage,
    Explicit(PermeabilityTensor),
}

/// Axis-aligned box with fracture patches.
#[derive(Debug, Clone)]
pub struct FractureNetworkSpec {
    pub dim: usize,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub fractures: Vec<FracturePatch>,
    pub intersection_permeability: IntersectionPermeability,
}

impl FractureNetworkSpec {
    /// Unit box `[0, 1]^dim` without fractures.
    pub fn unit(dim: usize) -> Self {
        let mut upper = [0.0; 3];
        for u in upper.iter_mut().take(dim) {
            *u = 1.0;
        }
        Self {
            dim,
            lower: [0.0; 3],
            upper,
            fractures: Vec::new(),
            intersection_permeability: IntersectionPermeability::LeastPermeable,
        }
    }

    pub fn with_fracture(mut self, patch: FracturePatch) -> Self {
        self.fractures.push(patch);
        self
    }

    pub fn intersection_tensor(&self, parents: &[usize]) -> PermeabilityTensor {
        let least = || {
            parents
                .iter()
                .map(|&p| self.fractures[p].permeability)
                .min_by(|a, b| a.mean_eigenvalue().partial_cmp(&b.mean_eigenvalue()).unwrap())
                .expect("intersection has parents")
        };
        match &self.intersection_permeability {
            IntersectionPermeability::LeastPermeable => least(),
            IntersectionPermeability::FromFracture(id) => {
                if parents.contains(id) {
                    self.fractures[*id].permeability
                } else {
                    least()
                }
            }
            IntersectionPermeability::HarmonicAverage => {
                let ks: Vec<_> = parents.iter().map(|&p| self.fractures[p].permeability).collect();
                PermeabilityTensor::harmonic_mean(&ks)
            }
            IntersectionPermeability::Explicit(k) => *k,
        }
    }
}

/// Uniform grid with `resolution[a]` cells along axis `a`.
pub fn build_cartesian_with_fractures(
    spec: &FractureNetworkSpec,
    resolution: &[usize],
) -> Result<MixedDimensionalMesh, MeshError> {
    if resolution.len() != spec.dim {
        return Err(MeshError::InvalidSpec(format!(
            "resolution has {} entries for a {}-dimensional domain",
            resolution.len(),
            spec.dim
        )));
    }
    let coords: Vec<Vec<f64>> = (0..spec.dim)
        .map(|a| {
            let n = resolution[a];
            let (lo, hi) = (spec.lower[a], spec.upper[a]);
            (0..=n)
                .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
                .collect()
        })
        .collect();
    build_tensor_grid_with_fractures(spec, &coords)
}

type Idx = [usize; 3];

/// Codimension-2 (or 3) grid entity: `mask` marks the axes whose entry in
/// `idx` is a node index; the remaining axes hold cell indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct EntityKey {
    mask: u8,
    idx: Idx,
}

struct Grid<'a> {
    dim: usize,
    coords: &'a [Vec<f64>],
    ncell: Idx,
}

impl Grid<'_> {
    fn nodes_along(&self, a: usize) -> usize {
        if a < self.dim {
            self.ncell[a] + 1
        } else {
            1
        }
    }

    fn cells_along(&self, a: usize) -> usize {
        if a < self.dim {
            self.ncell[a]
        } else {
            1
        }
    }

    fn node_id(&self, i: Idx) -> usize {
        i[0] + self.nodes_along(0) * (i[1] + self.nodes_along(1) * i[2])
    }

    fn cell_id(&self, i: Idx) -> usize {
        i[0] + self.cells_along(0) * (i[1] + self.cells_along(1) * i[2])
    }

    fn node_pos(&self, i: Idx) -> Vec3 {
        let mut p = Vec3::zeros();
        for a in 0..self.dim {
            p[a] = self.coords[a][i[a]];
        }
        p
    }

    fn find(&self, axis: usize, value: f64, fracture: usize) -> Result<usize, MeshError> {
        let c = &self.coords[axis];
        let tol = 1e-9 * (c[c.len() - 1] - c[0]).abs();
        c.iter()
            .position(|&x| (x - value).abs() <= tol)
            .ok_or(MeshError::NotGridAligned { fracture, axis, value })
    }
}

fn step(mut i: Idx, axis: usize, by: usize) -> Idx {
    i[axis] += by;
    i
}

/// Iterates multi-indices in `ranges` with axis 0 fastest.
fn multi_range(ranges: [(usize, usize); 3]) -> Vec<Idx> {
    let mut out = Vec::new();
    for k in ranges[2].0..ranges[2].1 {
        for j in ranges[1].0..ranges[1].1 {
            for i in ranges[0].0..ranges[0].1 {
                out.push([i, j, k]);
            }
        }
    }
    out
}

struct LocalNodes {
    map: HashMap<usize, usize>,
    coords: Vec<Vec3>,
}

impl LocalNodes {
    fn new() -> Self {
        Self {
            map: HashMap::new(),
            coords: Vec::new(),
        }
    }

    fn get(&mut self, grid: &Grid, i: Idx) -> usize {
        let id = grid.node_id(i);
        let next = self.coords.len();
        *self.map.entry(id).or_insert_with(|| {
            self.coords.push(grid.node_pos(i));
            next
        })
    }
}

/// Facet nodes in cyclic order, for the facet normal to `axis` at `i`.
fn facet_nodes(grid: &Grid, nodes: &mut LocalNodes, axis: usize, i: Idx) -> Vec<usize> {
    let tang: Vec<usize> = (0..grid.dim).filter(|&a| a != axis).collect();
    let corners: Vec<Idx> = match tang.len() {
        0 => vec![i],
        1 => vec![i, step(i, tang[0], 1)],
        _ => vec![
            i,
            step(i, tang[0], 1),
            step(step(i, tang[0], 1), tang[1], 1),
            step(i, tang[1], 1),
        ],
    };
    corners.into_iter().map(|c| nodes.get(grid, c)).collect()
}

struct PatchIndex {
    axis: usize,
    ranges: [(usize, usize); 3],
}

/// Tensor grid with arbitrary node coordinates per axis.
pub fn build_tensor_grid_with_fractures(
    spec: &FractureNetworkSpec,
    coords: &[Vec<f64>],
) -> Result<MixedDimensionalMesh, MeshError> {
    let dim = spec.dim;
    if !(1..=3).contains(&dim) || coords.len() != dim {
        return Err(MeshError::InvalidSpec(format!("unsupported dimension {dim}")));
    }
    let mut ncell = [0; 3];
    for a in 0..dim {
        if coords[a].len() < 2 || coords[a].windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MeshError::InvalidSpec(format!("axis {a} coordinates must increase")));
        }
        ncell[a] = coords[a].len() - 1;
    }
    let grid = Grid { dim, coords, ncell };

    // fracture patches as index ranges
    let mut patches = Vec::with_capacity(spec.fractures.len());
    for (p, fr) in spec.fractures.iter().enumerate() {
        let ax = fr.normal_axis;
        if ax >= dim || dim < 2 {
            return Err(MeshError::InvalidSpec(format!("fracture {p} has invalid normal axis {ax}")));
        }
        if !(fr.aperture > 0.0) {
            return Err(MeshError::InvalidSpec(format!("fracture {p} needs a positive aperture")));
        }
        let k = grid.find(ax, fr.position, p)?;
        if k == 0 || k == ncell[ax] {
            return Err(MeshError::FractureOnBoundary { fracture: p });
        }
        let mut ranges = [(0, 1); 3];
        ranges[ax] = (k, k + 1);
        for t in (0..dim).filter(|&t| t != ax) {
            let lo = grid.find(t, fr.extent[t][0], p)?;
            let hi = grid.find(t, fr.extent[t][1], p)?;
            if lo >= hi {
                return Err(MeshError::InvalidSpec(format!("fracture {p} has empty extent on axis {t}")));
            }
            ranges[t] = (lo, hi);
        }
        patches.push(PatchIndex { axis: ax, ranges });
    }

    // facet -> (patch, local cell)
    let mut fractured: HashMap<(usize, Idx), (usize, usize)> = HashMap::new();
    let mut patch_cells: Vec<Vec<Idx>> = Vec::with_capacity(patches.len());
    for (p, pi) in patches.iter().enumerate() {
        let cells = multi_range(pi.ranges);
        for (lc, &i) in cells.iter().enumerate() {
            if let Some(&(q, _)) = fractured.get(&(pi.axis, i)) {
                return Err(MeshError::OverlappingFractures { first: q, second: p });
            }
            fractured.insert((pi.axis, i), (p, lc));
        }
        patch_cells.push(cells);
    }

    // edges (codim 2) of every patch cell and the patches touching them
    let patch_edges = |p: usize, i: Idx| -> Vec<(EntityKey, usize)> {
        let ax = patches[p].axis;
        let mut out = Vec::new();
        for t in (0..dim).filter(|&t| t != ax) {
            for s in 0..2 {
                let mut idx = i;
                idx[t] += s;
                out.push((
                    EntityKey {
                        mask: (1 << ax) | (1 << t),
                        idx,
                    },
                    t,
                ));
            }
        }
        out
    };
    let mut edge_patches: BTreeMap<EntityKey, BTreeSet<usize>> = BTreeMap::new();
    for (p, cells) in patch_cells.iter().enumerate() {
        for &i in cells {
            for (key, _) in patch_edges(p, i) {
                edge_patches.entry(key).or_default().insert(p);
            }
        }
    }
    let is_intersection = |key: &EntityKey| -> bool {
        edge_patches
            .get(key)
            .map(|ps| ps.iter().map(|&p| patches[p].axis).collect::<BTreeSet<_>>().len() >= 2)
            .unwrap_or(false)
    };
    let intersection_edges: Vec<EntityKey> = edge_patches.keys().copied().filter(|k| is_intersection(k)).collect();

    let n_patch = patches.len();
    let mut topologies: Vec<SubdomainTopology> = Vec::new();
    let mut interfaces: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();

    // ---- matrix ----
    {
        let mut nodes = LocalNodes::new();
        let all_cells = multi_range([
            (0, grid.cells_along(0)),
            (0, grid.cells_along(1)),
            (0, grid.cells_along(2)),
        ]);
        let corner_offsets: Vec<Idx> = match dim {
            1 => vec![[0, 0, 0], [1, 0, 0]],
            2 => vec![[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
            _ => vec![
                [0, 0, 0],
                [1, 0, 0],
                [1, 1, 0],
                [0, 1, 0],
                [0, 0, 1],
                [1, 0, 1],
                [1, 1, 1],
                [0, 1, 1],
            ],
        };
        // register nodes in grid order so matrix node numbering is lexicographic
        for i in multi_range([
            (0, grid.nodes_along(0)),
            (0, grid.nodes_along(1)),
            (0, grid.nodes_along(2)),
        ]) {
            nodes.get(&grid, i);
        }
        let cell_nodes: Vec<Vec<usize>> = all_cells
            .iter()
            .map(|&c| {
                corner_offsets
                    .iter()
                    .map(|o| nodes.get(&grid, [c[0] + o[0], c[1] + o[1], c[2] + o[2]]))
                    .collect()
            })
            .collect();
        let mut cell_faces = vec![Vec::new(); all_cells.len()];
        let mut face_nodes = Vec::new();
        let mut internal = Vec::new();
        for ax in 0..dim {
            let mut ranges = [(0, 1); 3];
            for a in 0..dim {
                ranges[a] = (0, grid.cells_along(a));
            }
            ranges[ax] = (0, grid.nodes_along(ax));
            for i in multi_range(ranges) {
                let fnodes = facet_nodes(&grid, &mut nodes, ax, i);
                let neg = (i[ax] > 0).then(|| grid.cell_id(step(i, ax, 0).map_axis(ax, |v| v - 1)));
                let pos = (i[ax] < ncell[ax]).then(|| grid.cell_id(i));
                match fractured.get(&(ax, i)) {
                    Some(&(p, lc)) => {
                        for c in [neg, pos].into_iter().flatten() {
                            let f = face_nodes.len();
                            face_nodes.push(fnodes.clone());
                            internal.push(true);
                            cell_faces[c].push(f);
                            interfaces.entry((0, 1 + p)).or_default().push((f, lc));
                        }
                    }
                    None => {
                        let f = face_nodes.len();
                        face_nodes.push(fnodes);
                        internal.push(false);
                        for c in [neg, pos].into_iter().flatten() {
                            cell_faces[c].push(f);
                        }
                    }
                }
            }
        }
        topologies.push(SubdomainTopology {
            dim,
            ambient_dim: dim,
            kind: SubdomainKind::Matrix,
            aperture: vec![1.0; all_cells.len()],
            nodes: nodes.coords,
            cell_nodes,
            face_nodes,
            cell_faces,
            internal_boundary: internal,
        });
    }

    // ---- intersection subdomain numbering ----
    // 2D: each intersection point is a 0D subdomain.
    // 3D: intersection edges grouped per line are 1D subdomains; points where
    //     lines of different direction meet are 0D subdomains.
    let mut edge_target: HashMap<EntityKey, (usize, usize)> = HashMap::new();
    let mut lines: BTreeMap<EntityKey, Vec<EntityKey>> = BTreeMap::new();
    let mut point_subdomains: BTreeMap<usize, (Idx, BTreeSet<usize>)> = BTreeMap::new();
    if dim == 2 {
        for (s, key) in intersection_edges.iter().enumerate() {
            edge_target.insert(*key, (1 + n_patch + s, 0));
        }
    } else if dim == 3 {
        for key in &intersection_edges {
            let free = (0..3).find(|a| key.mask & (1 << a) == 0).unwrap();
            let mut line_key = *key;
            line_key.idx[free] = 0;
            lines.entry(line_key).or_default().push(*key);
        }
        for (l, (_, edges)) in lines.iter_mut().enumerate() {
            edges.sort_by_key(|e| e.idx);
            for (c, e) in edges.iter().enumerate() {
                edge_target.insert(*e, (1 + n_patch + l, c));
            }
        }
        // points shared by lines of different directions
        let mut node_dirs: BTreeMap<usize, (Idx, BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
        for key in &intersection_edges {
            let free = (0..3).find(|a| key.mask & (1 << a) == 0).unwrap();
            for s in 0..2 {
                let nidx = step(key.idx, free, s);
                let entry = node_dirs
                    .entry(grid.node_id(nidx))
                    .or_insert((nidx, BTreeSet::new(), BTreeSet::new()));
                entry.1.insert(free);
                entry.2.extend(edge_patches[key].iter().copied());
            }
        }
        for (id, (nidx, dirs, parents)) in node_dirs {
            if dirs.len() >= 2 {
                point_subdomains.insert(id, (nidx, parents));
            }
        }
    }
    let n_lines = lines.len();
    let first_point = 1 + n_patch + if dim == 2 { intersection_edges.len() } else { n_lines };
    let point_index: HashMap<usize, usize> = point_subdomains
        .keys()
        .enumerate()
        .map(|(k, &id)| (id, first_point + k))
        .collect();

    // ---- fractures ----
    for (p, cells) in patch_cells.iter().enumerate() {
        let sd = 1 + p;
        let ax = patches[p].axis;
        let mut nodes = LocalNodes::new();
        let cell_nodes: Vec<Vec<usize>> = cells.iter().map(|&i| facet_nodes(&grid, &mut nodes, ax, i)).collect();
        let mut cell_faces = vec![Vec::new(); cells.len()];
        let mut face_nodes: Vec<Vec<usize>> = Vec::new();
        let mut internal = Vec::new();
        let mut shared: HashMap<EntityKey, usize> = HashMap::new();
        for (lc, &i) in cells.iter().enumerate() {
            for (key, t) in patch_edges(p, i) {
                let fnodes: Vec<usize> = if dim == 2 {
                    vec![nodes.get(&grid, key.idx)]
                } else {
                    let free = (0..3).find(|&a| a != ax && a != t).unwrap();
                    vec![nodes.get(&grid, key.idx), nodes.get(&grid, step(key.idx, free, 1))]
                };
                if let Some(&(target, tc)) = edge_target.get(&key) {
                    let f = face_nodes.len();
                    face_nodes.push(fnodes);
                    internal.push(true);
                    cell_faces[lc].push(f);
                    interfaces.entry((sd, target)).or_default().push((f, tc));
                } else {
                    let f = *shared.entry(key).or_insert_with(|| {
                        face_nodes.push(fnodes);
                        internal.push(false);
                        face_nodes.len() - 1
                    });
                    cell_faces[lc].push(f);
                }
            }
        }
        topologies.push(SubdomainTopology {
            dim: dim - 1,
            ambient_dim: dim,
            kind: SubdomainKind::Fracture { id: p },
            aperture: vec![spec.fractures[p].aperture; cells.len()],
            nodes: nodes.coords,
            cell_nodes,
            face_nodes,
            cell_faces,
            internal_boundary: internal,
        });
    }

    let min_aperture = |parents: &BTreeSet<usize>| {
        parents
            .iter()
            .map(|&p| spec.fractures[p].aperture)
            .fold(f64::INFINITY, f64::min)
    };

    // ---- intersection lines (3D) ----
    for (l, (_, edges)) in lines.iter().enumerate() {
        let sd = 1 + n_patch + l;
        let free = (0..3).find(|a| edges[0].mask & (1 << a) == 0).unwrap();
        let mut nodes = LocalNodes::new();
        let mut cell_nodes = Vec::new();
        let mut cell_faces = vec![Vec::new(); edges.len()];
        let mut face_nodes: Vec<Vec<usize>> = Vec::new();
        let mut internal = Vec::new();
        let mut shared: HashMap<usize, usize> = HashMap::new();
        let mut parents = Vec::new();
        let mut aperture = Vec::new();
        for (c, e) in edges.iter().enumerate() {
            let ends = [e.idx, step(e.idx, free, 1)];
            cell_nodes.push(ends.iter().map(|&n| nodes.get(&grid, n)).collect());
            let ps = &edge_patches[e];
            parents.push(ps.iter().copied().collect());
            aperture.push(min_aperture(ps));
            for nidx in ends {
                let local = nodes.get(&grid, nidx);
                let gid = grid.node_id(nidx);
                if let Some(&target) = point_index.get(&gid) {
                    let f = face_nodes.len();
                    face_nodes.push(vec![local]);
                    internal.push(true);
                    cell_faces[c].push(f);
                    interfaces.entry((sd, target)).or_default().push((f, 0));
                } else {
                    let f = *shared.entry(gid).or_insert_with(|| {
                        face_nodes.push(vec![local]);
                        internal.push(false);
                        face_nodes.len() - 1
                    });
                    cell_faces[c].push(f);
                }
            }
        }
        topologies.push(SubdomainTopology {
            dim: 1,
            ambient_dim: dim,
            kind: SubdomainKind::Intersection { cell_parents: parents },
            aperture,
            nodes: nodes.coords,
            cell_nodes,
            face_nodes,
            cell_faces,
            internal_boundary: internal,
        });
    }

    // ---- points ----
    let point_list: Vec<(Idx, BTreeSet<usize>)> = if dim == 2 {
        intersection_edges
            .iter()
            .map(|k| (k.idx, edge_patches[k].clone()))
            .collect()
    } else {
        point_subdomains.values().cloned().collect()
    };
    for (nidx, parents) in point_list {
        topologies.push(SubdomainTopology {
            dim: 0,
            ambient_dim: dim,
            kind: SubdomainKind::Intersection {
                cell_parents: vec![parents.iter().copied().collect()],
            },
            aperture: vec![min_aperture(&parents)],
            nodes: vec![grid.node_pos(nidx)],
            cell_nodes: vec![vec![0]],
            face_nodes: Vec::new(),
            cell_faces: vec![Vec::new()],
            internal_boundary: Vec::new(),
        });
    }

    let subdomains = topologies
        .into_iter()
        .enumerate()
        .map(|(s, t)| SubdomainGrid::from_topology(t, s))
        .collect::<Result<Vec<_>, _>>()?;
    let interfaces = interfaces
        .into_iter()
        .map(|((higher, lower), pairs)| InterfaceMap { higher, lower, pairs })
        .collect();
    MixedDimensionalMesh::new(dim, subdomains, interfaces)
}

trait MapAxis {
    fn map_axis(self, axis: usize, f: impl Fn(usize) -> usize) -> Self;
}

impl MapAxis for Idx {
    fn map_axis(mut self, axis: usize, f: impl Fn(usize) -> usize) -> Self {
        self[axis] = f(self[axis]);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::FaceKind;

    fn spec_with(dim: usize, planes: &[(usize, f64)]) -> FractureNetworkSpec {
        let mut spec = FractureNetworkSpec::unit(dim);
        for &(axis, pos) in planes {
            let p = FracturePatch::spanning(&spec, axis, pos, 1e-2, PermeabilityTensor::isotropic(dim - 1, 1.0));
            spec = spec.with_fracture(p);
        }
        spec
    }

    #[test]
    fn single_fracture_between_two_cells() {
        let mesh = build_cartesian_with_fractures(&spec_with(2, &[(0, 0.5)]), &[2, 1]).unwrap();
        assert_eq!(mesh.subdomains.len(), 2);
        assert_eq!(mesh.subdomains[0].num_cells(), 2);
        assert_eq!(mesh.subdomains[1].num_cells(), 1);
        assert_eq!(mesh.interfaces.len(), 1);
        assert_eq!(mesh.interfaces[0].pairs.len(), 2);
        let m = &mesh.subdomains[0];
        let split = m.face_kind.iter().filter(|&&k| k == FaceKind::InternalBoundary).count();
        assert_eq!(split, 2);
        assert!((mesh.subdomains[1].cell_volumes[0] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn crossing_fractures_in_2d() {
        let mesh = build_cartesian_with_fractures(&spec_with(2, &[(0, 0.5), (1, 0.5)]), &[2, 2]).unwrap();
        let cells: Vec<(usize, usize)> = mesh.subdomains.iter().map(|s| (s.dim, s.num_cells())).collect();
        assert_eq!(cells, vec![(2, 4), (1, 2), (1, 2), (0, 1)]);
        let matrix_pairs: usize = mesh.interfaces.iter().filter(|i| i.higher == 0).map(|i| i.pairs.len()).sum();
        let point_pairs: usize = mesh.interfaces.iter().filter(|i| i.lower == 3).map(|i| i.pairs.len()).sum();
        assert_eq!(matrix_pairs, 8);
        assert_eq!(point_pairs, 4);
        assert!((mesh.subdomains[3].cell_volumes[0] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn orthogonal_fractures_in_3d() {
        let mesh = build_cartesian_with_fractures(&spec_with(3, &[(0, 0.5), (2, 0.5)]), &[2, 2, 2]).unwrap();
        let by_dim = |d: usize| -> usize {
            mesh.subdomains.iter().filter(|s| s.dim == d).map(|s| s.num_cells()).sum()
        };
        assert_eq!(by_dim(3), 8);
        assert_eq!(by_dim(2), 8);
        assert_eq!(by_dim(1), 2);
        assert_eq!(by_dim(0), 0);
        let line = mesh.subdomains.iter().find(|s| s.dim == 1).unwrap();
        assert!((line.cell_volumes[0] - 0.5 * 1e-4).abs() < 1e-17);
    }

    #[test]
    fn three_planes_meet_in_a_point() {
        let mesh =
            build_cartesian_with_fractures(&spec_with(3, &[(0, 0.5), (1, 0.5), (2, 0.5)]), &[2, 2, 2]).unwrap();
        let points: usize = mesh.subdomains.iter().filter(|s| s.dim == 0).map(|s| s.num_cells()).sum();
        let lines: usize = mesh.subdomains.iter().filter(|s| s.dim == 1).map(|s| s.num_cells()).sum();
        assert_eq!(points, 1);
        assert_eq!(lines, 6);
        mesh.validate().unwrap();
    }

    #[test]
    fn off_grid_fracture_is_rejected() {
        let err = build_cartesian_with_fractures(&spec_with(2, &[(0, 0.3)]), &[2, 2]).unwrap_err();
        assert!(matches!(err, MeshError::NotGridAligned { .. }));
    }

    #[test]
    fn minimum_cell_diameter() {
        let mesh = build_cartesian_with_fractures(&spec_with(2, &[]), &[4, 2]).unwrap();
        let h = crate::mesh::min_cell_diameter(&mesh);
        assert!((h - (0.25f64.powi(2) + 0.5f64.powi(2)).sqrt()).abs() < 1e-15);
    }
}
