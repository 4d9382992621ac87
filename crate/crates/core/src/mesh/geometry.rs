//! Measures, centroids and normals of cells and faces given as node lists.
//!
//! Every entity is decomposed into simplices: faces by a fan around their
//! node mean, cells by coning their face simplices to the cell node mean.
//! This is exact for the convex, planar-faced cells produced here.

use nalgebra::DMatrix;

use crate::Vec3;

/// k-dimensional measure of the simplex spanned by `k + 1` points.
pub fn simplex_measure(points: &[Vec3]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let edges: Vec<Vec3> = points[1..].iter().map(|p| p - points[0]).collect();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = edges[i].dot(&edges[j]);
        }
    }
    let det = gram.determinant().max(0.0);
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    det.sqrt() / fact
}

pub fn mean(points: &[Vec3]) -> Vec3 {
    let mut m = Vec3::zeros();
    for p in points {
        m += p;
    }
    m / points.len() as f64
}

/// Simplices (as point lists) whose union is the face.
pub fn face_simplices(points: &[Vec3]) -> Vec<Vec<Vec3>> {
    match points.len() {
        1 | 2 => vec![points.to_vec()],
        n => {
            let m = mean(points);
            (0..n)
                .map(|k| vec![m, points[k], points[(k + 1) % n]])
                .collect()
        }
    }
}

/// `(measure, centroid)` of a face.
pub fn face_measure_centroid(points: &[Vec3]) -> (f64, Vec3) {
    if points.len() == 1 {
        return (1.0, points[0]);
    }
    let mut total = 0.0;
    let mut c = Vec3::zeros();
    for s in face_simplices(points) {
        let m = simplex_measure(&s);
        total += m;
        c += mean(&s) * m;
    }
    (total, c / total)
}

/// `(measure, centroid)` of a d-dimensional cell from its nodes and the node
/// lists of its faces.
pub fn cell_measure_centroid(cell_points: &[Vec3], faces: &[Vec<Vec3>]) -> (f64, Vec3) {
    if faces.is_empty() {
        return (1.0, mean(cell_points));
    }
    let apex = mean(cell_points);
    let mut total = 0.0;
    let mut c = Vec3::zeros();
    for face in faces {
        for s in face_simplices(face) {
            let mut pts = Vec::with_capacity(s.len() + 1);
            pts.push(apex);
            pts.extend(s);
            let m = simplex_measure(&pts);
            total += m;
            c += mean(&pts) * m;
        }
    }
    (total, c / total)
}

/// Orthonormal basis of the affine hull of `points`, at most `max_dim`
/// vectors. Directions shorter than `tol` are discarded.
pub fn affine_basis(points: &[Vec3], max_dim: usize, tol: f64) -> Vec<Vec3> {
    let mut basis: Vec<Vec3> = Vec::new();
    for p in &points[1.min(points.len())..] {
        if basis.len() == max_dim {
            break;
        }
        let mut v = p - points[0];
        for b in &basis {
            v -= b * b.dot(&v);
        }
        // second pass for orthogonality
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > tol {
            basis.push(v / n);
        }
    }
    basis
}

/// Unit normal of a face lying in the cell tangent space `cell_basis`,
/// pointing away from `cell_centre`.
pub fn face_normal(
    face_points: &[Vec3],
    face_centre: &Vec3,
    cell_centre: &Vec3,
    cell_basis: &[Vec3],
    tol: f64,
) -> Option<Vec3> {
    let face_basis = affine_basis(face_points, cell_basis.len().saturating_sub(1), tol);
    let w = face_centre - cell_centre;
    let mut v = Vec3::zeros();
    for b in cell_basis {
        v += b * b.dot(&w);
    }
    for b in &face_basis {
        v -= b * b.dot(&v);
    }
    let n = v.norm();
    if n <= tol {
        return None;
    }
    Some(v / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn simplex_measures() {
        assert_eq!(simplex_measure(&[v(0., 0., 0.), v(2., 0., 0.)]), 2.0);
        let tri = simplex_measure(&[v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.)]);
        assert!((tri - 0.5).abs() < 1e-15);
        let tet = simplex_measure(&[v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(0., 0., 1.)]);
        assert!((tet - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unit_square_cell() {
        let p = [v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)];
        let faces: Vec<Vec<Vec3>> = (0..4).map(|k| vec![p[k], p[(k + 1) % 4]]).collect();
        let (m, c) = cell_measure_centroid(&p, &faces);
        assert!((m - 1.0).abs() < 1e-15);
        assert!((c - v(0.5, 0.5, 0.)).norm() < 1e-15);
    }

    #[test]
    fn normal_of_square_edge() {
        let basis = vec![v(1., 0., 0.), v(0., 1., 0.)];
        let n = face_normal(
            &[v(1., 0., 0.), v(1., 1., 0.)],
            &v(1., 0.5, 0.),
            &v(0.5, 0.5, 0.),
            &basis,
            1e-14,
        )
        .unwrap();
        assert!((n - v(1., 0., 0.)).norm() < 1e-15);
    }
}
