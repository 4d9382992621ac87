//! Elimination of intersection cells.
//!
//! Schur reduction is exact: `A_r = A_kk - A_ke A_ee⁻¹ A_ek`. Star-Delta
//! removes each intersection cell and connects its branches directly with
//! `T_ij = α_i α_j / Σ_k α_k`, which is the limit of infinitely permeable
//! intersections.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use serde::Serialize;
use thiserror::Error;

use crate::coupling::{self, CouplingError, FlowProblem, GlobalSystem};
use crate::fv::BoundaryCondition;
use crate::linsolve::{CsrMatrix, TripletBuilder};
use crate::mesh::{FaceKind, MixedDimensionalMesh};
use crate::permeability::PermeabilityTensor;

const SINGULAR_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum EliminationError {
    #[error("the eliminated block is singular; involved dofs {dofs:?}")]
    SingularBlock { dofs: Vec<usize> },
    #[error("dof {0} is outside the system")]
    OutOfRange(usize),
    #[error("eliminated cell (dof {0}) has a source term; Star-Delta has no cell to carry it")]
    SourceInEliminatedCell(usize),
    #[error("eliminated cell (dof {0}) touches a Dirichlet boundary")]
    DirichletOnEliminatedCell(usize),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EliminationKind {
    Schur,
    StarDelta,
}

/// All dofs of subdomains with dimension at most `N - 2`.
pub fn intersection_dofs(mesh: &MixedDimensionalMesh) -> Vec<usize> {
    let n = mesh.max_dim();
    if n < 2 {
        return Vec::new();
    }
    mesh.dofs_with_dim_at_most(n - 2)
}

enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Factor::Cholesky(c) => c.solve(b),
            Factor::Lu(l) => l.solve(b).expect("factor checked non-singular"),
        }
    }
}

/// Algebraic Schur reduction of a sparse system.
pub struct SchurReduction {
    pub kept: Vec<usize>,
    pub eliminated: Vec<usize>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `A_ke A_ee⁻¹ A_ek` on the kept neighbours of the eliminated set, in
    /// kept numbering.
    pub correction: BTreeMap<(usize, usize), f64>,
    /// Kept dofs (kept numbering) coupled to the eliminated set.
    pub neighbours: Vec<usize>,
    a_en: DMatrix<f64>,
    b_e: DVector<f64>,
    factor: Factor,
    pub symmetric: bool,
}

impl std::fmt::Debug for SchurReduction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchurReduction")
            .field("kept", &self.kept.len())
            .field("eliminated", &self.eliminated)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// Reduces `A p = b` onto the complement of `eliminated`.
pub fn schur_complement(a: &CsrMatrix, b: &[f64], eliminated: &[usize]) -> Result<SchurReduction, EliminationError> {
    let n = a.nrows();
    let mut is_elim = vec![usize::MAX; n];
    let mut elim = eliminated.to_vec();
    elim.sort_unstable();
    elim.dedup();
    for (i, &e) in elim.iter().enumerate() {
        if e >= n {
            return Err(EliminationError::OutOfRange(e));
        }
        is_elim[e] = i;
    }
    let kept: Vec<usize> = (0..n).filter(|&i| is_elim[i] == usize::MAX).collect();
    let mut kept_index = vec![usize::MAX; n];
    for (i, &k) in kept.iter().enumerate() {
        kept_index[k] = i;
    }
    let ne = elim.len();

    // A_ee dense, and the kept neighbours of the eliminated set
    let mut a_ee = DMatrix::zeros(ne, ne);
    let mut nb = Vec::new();
    for (i, &e) in elim.iter().enumerate() {
        for (c, v) in a.row(e) {
            if is_elim[c] != usize::MAX {
                a_ee[(i, is_elim[c])] += v;
            } else {
                nb.push(kept_index[c]);
            }
        }
    }
    for r in 0..n {
        if is_elim[r] == usize::MAX && a.row(r).any(|(c, _)| is_elim[c] != usize::MAX) {
            nb.push(kept_index[r]);
        }
    }
    nb.sort_unstable();
    nb.dedup();
    let nn = nb.len();
    let nb_pos = |k: usize| nb.binary_search(&k).unwrap();
    let mut a_en = DMatrix::zeros(ne, nn);
    let mut a_ne = DMatrix::zeros(nn, ne);
    for (i, &e) in elim.iter().enumerate() {
        for (c, v) in a.row(e) {
            if is_elim[c] == usize::MAX {
                a_en[(i, nb_pos(kept_index[c]))] += v;
            }
        }
    }
    for (j, &k) in nb.iter().enumerate() {
        for (c, v) in a.row(kept[k]) {
            if is_elim[c] != usize::MAX {
                a_ne[(j, is_elim[c])] += v;
            }
        }
    }

    let symmetric = a_ee == a_ee.transpose() && a_ne == a_en.transpose();
    let scale = a_ee.abs().max();
    let singular = || EliminationError::SingularBlock { dofs: elim.clone() };
    let chol = if symmetric { Cholesky::new(a_ee.clone()) } else { None };
    let (factor, s) = match chol {
        Some(ch) => {
            let l = ch.l();
            if l.diagonal().iter().any(|d| !(d * d > SINGULAR_TOLERANCE * scale)) {
                return Err(singular());
            }
            // S = Yᵀ Y with Y = L⁻¹ A_en, filled symmetrically
            let y = l.solve_lower_triangular(&a_en).ok_or_else(singular)?;
            let mut s = DMatrix::zeros(nn, nn);
            for i in 0..nn {
                for j in i..nn {
                    let mut acc = 0.0;
                    for k in 0..ne {
                        acc += y[(k, i)] * y[(k, j)];
                    }
                    s[(i, j)] = acc;
                    s[(j, i)] = acc;
                }
            }
            (Factor::Cholesky(ch), s)
        }
        None => {
            let lu = a_ee.clone().lu();
            let min_pivot = lu.u().diagonal().abs().min();
            if ne > 0 && !(min_pivot > SINGULAR_TOLERANCE * scale) {
                return Err(singular());
            }
            let x = lu.solve(&a_en).ok_or_else(singular)?;
            (Factor::Lu(lu), &a_ne * x)
        }
    };

    let b_e = DVector::from_iterator(ne, elim.iter().map(|&e| b[e]));
    let w = factor.solve(&DMatrix::from_column_slice(ne, 1, b_e.as_slice()));
    let mut rhs: Vec<f64> = kept.iter().map(|&k| b[k]).collect();
    for (j, &k) in nb.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..ne {
            acc += a_ne[(j, i)] * w[(i, 0)];
        }
        rhs[k] -= acc;
    }

    let mut t = TripletBuilder::with_capacity(kept.len(), kept.len(), a.nnz() + nn * nn);
    for (i, &k) in kept.iter().enumerate() {
        for (c, v) in a.row(k) {
            if is_elim[c] == usize::MAX {
                t.push(i, kept_index[c], v);
            }
        }
    }
    let mut correction = BTreeMap::new();
    for i in 0..nn {
        for j in 0..nn {
            let v = s[(i, j)];
            if v != 0.0 {
                t.push(nb[i], nb[j], -v);
                correction.insert((nb[i], nb[j]), v);
            }
        }
    }
    Ok(SchurReduction {
        matrix: t.build(),
        rhs,
        kept,
        eliminated: elim,
        correction,
        neighbours: nb,
        a_en,
        b_e,
        factor,
        symmetric,
    })
}

impl SchurReduction {
    /// `p_e = A_ee⁻¹ (b_e - A_ek p_k)`, returned with `p_k` as a full field.
    pub fn back_substitute(&self, p_kept: &[f64]) -> Vec<f64> {
        let ne = self.eliminated.len();
        let pn = DVector::from_iterator(self.neighbours.len(), self.neighbours.iter().map(|&k| p_kept[k]));
        let r = &self.b_e - &self.a_en * pn;
        let pe = self.factor.solve(&DMatrix::from_column_slice(ne, 1, r.as_slice()));
        let mut full = vec![0.0; self.kept.len() + ne];
        for (i, &k) in self.kept.iter().enumerate() {
            full[k] = p_kept[i];
        }
        for (i, &e) in self.eliminated.iter().enumerate() {
            full[e] = pe[(i, 0)];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&k| full[k]).collect()
    }
}

/// A Star-Delta reduced flow system. `system` is the full-size assembly
/// with the intersection fluxes replaced by branch-to-branch fluxes; its
/// rows and columns of eliminated dofs are unused.
#[derive(Debug, Clone)]
pub struct StarDelta {
    pub system: GlobalSystem,
    pub kept: Vec<usize>,
    pub eliminated: Vec<usize>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `(branch dof i, branch dof j, T_ij)` with `i < j`.
    pub connections: Vec<(usize, usize, f64)>,
    /// Branches `(dof, α)` of each eliminated dof.
    branches: Vec<Vec<(usize, f64)>>,
}

/// `T_ij = α_i α_j / Σ α` for all pairs `i < j`.
pub fn star_delta_transmissibilities(alpha: &[f64]) -> Vec<(usize, usize, f64)> {
    let sum: f64 = alpha.iter().sum();
    let mut out = Vec::new();
    for i in 0..alpha.len() {
        for j in i + 1..alpha.len() {
            out.push((i, j, alpha[i] * alpha[j] / sum));
        }
    }
    out
}

/// Star-Delta reduction of `problem` over the `eliminated` dofs. Branches
/// are the interface pairs from kept higher-dimensional cells into an
/// eliminated cell; connections between two eliminated cells are dropped.
pub fn star_delta_reduce(problem: &FlowProblem, eliminated: &[usize]) -> Result<StarDelta, EliminationError> {
    let mesh = &problem.mesh;
    let nd = mesh.num_dofs();
    let mut elim = eliminated.to_vec();
    elim.sort_unstable();
    elim.dedup();
    let mut is_elim = vec![false; nd];
    for &e in &elim {
        if e >= nd {
            return Err(EliminationError::OutOfRange(e));
        }
        is_elim[e] = true;
        if problem.sources[e] != 0.0 {
            return Err(EliminationError::SourceInEliminatedCell(e));
        }
        let (s, c) = mesh.dof_owner(e);
        let sd = &mesh.subdomains[s];
        for &(f, _) in &sd.cell_faces[c] {
            if matches!(problem.bc[s].get(f), Some(BoundaryCondition::Dirichlet(_))) {
                return Err(EliminationError::DirichletOnEliminatedCell(e));
            }
        }
    }
    let (discs, pairs) = coupling::discretize(problem)?;

    let mut branch_pairs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, p) in pairs.iter().enumerate() {
        if is_elim[p.lower_dof] && !is_elim[p.higher_dof] {
            branch_pairs.entry(p.lower_dof).or_default().push(k);
        }
    }
    let mut lambda = TripletBuilder::new(pairs.len(), nd);
    for (k, p) in pairs.iter().enumerate() {
        if !is_elim[p.lower_dof] && !is_elim[p.higher_dof] {
            lambda.push(k, p.higher_dof, p.transmissibility.t);
            lambda.push(k, p.lower_dof, -p.transmissibility.t);
        }
    }
    let mut connections = Vec::new();
    let mut branches = vec![Vec::new(); elim.len()];
    for (ei, &e) in elim.iter().enumerate() {
        let Some(ks) = branch_pairs.get(&e) else { continue };
        let alpha: Vec<f64> = ks.iter().map(|&k| pairs[k].transmissibility.alpha_higher).collect();
        branches[ei] = ks.iter().zip(&alpha).map(|(&k, &a)| (pairs[k].higher_dof, a)).collect();
        for (i, j, t) in star_delta_transmissibilities(&alpha) {
            let (di, dj) = (pairs[ks[i]].higher_dof, pairs[ks[j]].higher_dof);
            // λ_i gains T_ij (p_i - p_j), λ_j gains T_ij (p_j - p_i)
            lambda.push(ks[i], di, t);
            lambda.push(ks[i], dj, -t);
            lambda.push(ks[j], dj, t);
            lambda.push(ks[j], di, -t);
            if di != dj {
                connections.push((di.min(dj), di.max(dj), t));
            }
        }
    }
    let system = coupling::assemble_with_interface_flux(problem, discs, pairs, lambda.build());
    let kept: Vec<usize> = (0..nd).filter(|&i| !is_elim[i]).collect();
    let matrix = system.matrix.submatrix(&kept, &kept);
    let rhs = kept.iter().map(|&k| system.rhs[k]).collect();
    Ok(StarDelta {
        system,
        kept,
        eliminated: elim,
        matrix,
        rhs,
        connections,
        branches,
    })
}

impl StarDelta {
    /// Full field with eliminated pressures set to the α-weighted mean of
    /// their branches.
    pub fn back_substitute(&self, p_kept: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.kept.len() + self.eliminated.len()];
        for (i, &k) in self.kept.iter().enumerate() {
            full[k] = p_kept[i];
        }
        for (ei, &e) in self.eliminated.iter().enumerate() {
            let b = &self.branches[ei];
            let sum: f64 = b.iter().map(|(_, a)| a).sum();
            if sum != 0.0 {
                full[e] = b.iter().map(|&(d, a)| a * full[d]).sum::<f64>() / sum;
            }
        }
        full
    }
}

/// Where water enters an eliminated cell from outside the flow network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InflowOrigin {
    Source,
    Boundary { subdomain: usize, face: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExternalInflow {
    pub dof: usize,
    pub rate: f64,
    pub origin: InflowOrigin,
}

/// Fluxes through the eliminated cells, routed between kept cells. The
/// eliminated cells act as zero-volume mixing nodes, so upwind transport on
/// these fluxes matches the full system in the limit of vanishing
/// intersection volume.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReducedFluxes {
    /// `(k, j, G)`: rate of water leaving kept `k` into the eliminated set
    /// and arriving at kept `j`.
    pub connections: Vec<(usize, usize, f64)>,
    /// `(k, rate)`: water from kept `k` that leaves the domain inside the
    /// eliminated set (outflow boundaries, sinks).
    pub sinks: Vec<(usize, f64)>,
    pub inflows: Vec<ExternalInflow>,
    /// `(j, inflow index, rate)`: external inflow delivered to kept `j`.
    pub deliveries: Vec<(usize, usize, f64)>,
}

/// Routes the exact fluxes of the full field `p` through the `eliminated`
/// cells. `system` is the unreduced assembly on `mesh`.
pub fn reduced_fluxes(
    mesh: &MixedDimensionalMesh,
    system: &GlobalSystem,
    eliminated: &[usize],
    p: &[f64],
) -> Result<ReducedFluxes, EliminationError> {
    let nd = mesh.num_dofs();
    let mut pos = vec![usize::MAX; nd];
    for (i, &e) in eliminated.iter().enumerate() {
        pos[e] = i;
    }
    let is_elim = |d: usize| pos[d] != usize::MAX;
    let ne = eliminated.len();

    // directed edges (from, to, F > 0) touching the eliminated set
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut push = |a: usize, b: usize, f: f64| {
        if f > 0.0 {
            edges.push((a, b, f));
        } else if f < 0.0 {
            edges.push((b, a, -f));
        }
    };
    let mut sink = vec![0.0; ne];
    let mut out = ReducedFluxes::default();
    let fluxes = system.face_fluxes(p);
    for (s, sd) in mesh.subdomains.iter().enumerate() {
        let base = mesh.dof_range(s).start;
        for f in 0..sd.num_faces() {
            let flux = fluxes[system.global_face(s, f)];
            match sd.face_kind[f] {
                FaceKind::Interior => {
                    let (c0, s0) = sd.face_cells[f][0];
                    let (c1, _) = sd.face_cells[f][1];
                    let (a, b) = (base + c0, base + c1);
                    if is_elim(a) || is_elim(b) {
                        push(a, b, s0 * flux);
                    }
                }
                FaceKind::Boundary => {
                    let (c, sign) = sd.face_cells[f][0];
                    let d = base + c;
                    if is_elim(d) {
                        let outward = sign * flux;
                        if outward > 0.0 {
                            sink[pos[d]] += outward;
                        } else if outward < 0.0 {
                            out.inflows.push(ExternalInflow {
                                dof: d,
                                rate: -outward,
                                origin: InflowOrigin::Boundary { subdomain: s, face: f },
                            });
                        }
                    }
                }
                FaceKind::InternalBoundary => {}
            }
        }
    }
    for (k, lam) in system.interface_fluxes(p).into_iter().enumerate() {
        let pr = &system.pairs[k];
        if is_elim(pr.higher_dof) || is_elim(pr.lower_dof) {
            push(pr.higher_dof, pr.lower_dof, lam);
        }
    }
    for &e in eliminated {
        let q = system.sources[e];
        if q > 0.0 {
            out.inflows.push(ExternalInflow {
                dof: e,
                rate: q,
                origin: InflowOrigin::Source,
            });
        } else if q < 0.0 {
            sink[pos[e]] -= q;
        }
    }

    // steady zero-volume balance: M c_E = B c_K + Bo c_origin
    let mut kept_in: Vec<usize> = edges
        .iter()
        .filter(|&&(a, b, _)| !is_elim(a) && is_elim(b))
        .map(|&(a, _, _)| a)
        .collect();
    kept_in.sort_unstable();
    kept_in.dedup();
    let col = |k: usize| kept_in.binary_search(&k).unwrap();
    let nk = kept_in.len();
    let no = out.inflows.len();
    let mut m = DMatrix::<f64>::zeros(ne, ne);
    let mut rhs = DMatrix::<f64>::zeros(ne, nk + no);
    for i in 0..ne {
        m[(i, i)] += sink[i];
    }
    for &(a, b, f) in &edges {
        if is_elim(a) {
            m[(pos[a], pos[a])] += f;
            if is_elim(b) {
                m[(pos[b], pos[a])] -= f;
            }
        } else if is_elim(b) {
            rhs[(pos[b], col(a))] += f;
        }
    }
    for (o, inflow) in out.inflows.iter().enumerate() {
        rhs[(pos[inflow.dof], nk + o)] += inflow.rate;
    }
    for i in 0..ne {
        // stagnant cells carry nothing; any value closes the system
        if m[(i, i)] == 0.0 {
            m[(i, i)] = 1.0;
        }
    }
    let x = m.lu().solve(&rhs).ok_or_else(|| EliminationError::SingularBlock {
        dofs: eliminated.to_vec(),
    })?;

    let mut routed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut delivered: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(a, b, f) in &edges {
        if is_elim(a) && !is_elim(b) {
            let i = pos[a];
            for (c, &k) in kept_in.iter().enumerate() {
                let g = f * x[(i, c)];
                if g != 0.0 {
                    *routed.entry((k, b)).or_default() += g;
                }
            }
            for o in 0..no {
                let g = f * x[(i, nk + o)];
                if g != 0.0 {
                    *delivered.entry((b, o)).or_default() += g;
                }
            }
        }
    }
    out.connections = routed.into_iter().map(|((k, j), g)| (k, j, g)).collect();
    out.deliveries = delivered.into_iter().map(|((j, o), g)| (j, o, g)).collect();
    for (c, &k) in kept_in.iter().enumerate() {
        let r: f64 = (0..ne).map(|i| sink[i] * x[(i, c)]).sum();
        if r != 0.0 {
            out.sinks.push((k, r));
        }
    }
    Ok(out)
}

/// Deviation between the Schur reduction with intersection permeability
/// `k_boost` and the Star-Delta reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub k_boost: f64,
    pub max_matrix_deviation: f64,
    pub relative_pressure_difference: f64,
}

pub fn limit_equivalence_check(
    problem: &FlowProblem,
    eliminated: &[usize],
    k_boost: f64,
) -> Result<LimitReport, EliminationError> {
    let mut boosted = problem.clone();
    for &e in eliminated {
        let (s, c) = problem.mesh.dof_owner(e);
        boosted.permeability[s][c] = PermeabilityTensor::isotropic(problem.mesh.ambient_dim, k_boost);
    }
    let sys = coupling::assemble_global(&boosted)?;
    let schur = schur_complement(&sys.matrix, &sys.rhs, eliminated)?;
    let sd = star_delta_reduce(problem, eliminated)?;
    let dev = (schur.matrix.to_dense() - sd.matrix.to_dense()).abs().max();
    let ps = crate::linsolve::direct_solve(&schur.matrix, &schur.rhs).map_err(|_| EliminationError::SingularBlock {
        dofs: schur.kept.clone(),
    })?;
    let pd = crate::linsolve::direct_solve(&sd.matrix, &sd.rhs).map_err(|_| EliminationError::SingularBlock {
        dofs: sd.kept.clone(),
    })?;
    let num: f64 = ps.iter().zip(&pd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = pd.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LimitReport {
        k_boost,
        max_matrix_deviation: dev,
        relative_pressure_difference: if den > 0.0 { num / den } else { num },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> CsrMatrix {
        let n = rows.len();
        CsrMatrix::from_dense(&DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
    }

    #[test]
    fn two_by_two_reduction_and_back_substitution() {
        let a = dense(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let r = schur_complement(&a, &[1.0, 0.0], &[1]).unwrap();
        assert_eq!(r.matrix.get(0, 0), 1.5);
        assert_eq!(r.rhs, vec![1.0]);
        let pk = r.rhs[0] / r.matrix.get(0, 0);
        let full = r.back_substitute(&[pk]);
        assert!((full[0] - 2.0 / 3.0).abs() < 1e-15 && (full[1] - 1.0 / 3.0).abs() < 1e-15);
        let z = schur_complement(&a, &[0.0, 0.0], &[1]).unwrap();
        assert_eq!(z.back_substitute(&[0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn tridiagonal_middle_elimination() {
        let a = dense(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let r = schur_complement(&a, &[0.0; 3], &[1]).unwrap();
        let m = r.matrix.to_dense();
        let expect = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5]);
        assert!((m - expect).abs().max() < 1e-15);
        assert!(r.symmetric);
    }

    #[test]
    fn singular_block_names_dofs() {
        let a = dense(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(
            schur_complement(&a, &[0.0; 2], &[1]).unwrap_err(),
            EliminationError::SingularBlock { dofs: vec![1] }
        );
    }

    #[test]
    fn star_delta_examples() {
        assert_eq!(star_delta_transmissibilities(&[2.0, 2.0]), vec![(0, 1, 1.0)]);
        let four = star_delta_transmissibilities(&[2.0; 4]);
        assert_eq!(four.len(), 6);
        assert!(four.iter().all(|t| t.2 == 0.5));
        let three = star_delta_transmissibilities(&[1.0, 2.0, 3.0]);
        assert_eq!(three, vec![(0, 1, 2.0 / 6.0), (0, 2, 3.0 / 6.0), (1, 2, 6.0 / 6.0)]);
    }

    #[test]
    fn star_delta_row_sums() {
        let alpha = [0.3, 1.7, 4.0, 2.5];
        let sum: f64 = alpha.iter().sum();
        let ts = star_delta_transmissibilities(&alpha);
        for i in 0..alpha.len() {
            let row: f64 = ts.iter().filter(|t| t.0 == i || t.1 == i).map(|t| t.2).sum();
            let expect = alpha[i] * (sum - alpha[i]) / sum;
            assert!((row - expect).abs() <= 1e-15 * expect);
        }
    }
}
