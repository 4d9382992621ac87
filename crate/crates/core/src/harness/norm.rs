//! Discrete L² errors.

use serde::Serialize;

use crate::mesh::MixedDimensionalMesh;
use crate::Vec3;

/// Tag written next to every reported error.
pub const NORM_VERSION: &str = "l2-vol-rel-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Error {
    pub value: f64,
    /// Set when the reference norm vanished and `value` is absolute.
    pub absolute: bool,
}

/// `sqrt(Σ V (x - r)²) / sqrt(Σ V r²)` over `subset`.
pub fn l2_error(field: &[f64], reference: &[f64], volumes: &[f64], subset: &[usize]) -> L2Error {
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in subset {
        let d = field[i] - reference[i];
        num += volumes[i] * d * d;
        den += volumes[i] * reference[i] * reference[i];
    }
    if den > 0.0 {
        L2Error {
            value: (num / den).sqrt(),
            absolute: false,
        }
    } else {
        L2Error {
            value: num.sqrt(),
            absolute: true,
        }
    }
}

/// Piecewise-constant injection of a coarse field onto fine cells: every
/// fine cell takes the value of the coarse cell containing its centre.
/// `locate` maps a point to a coarse index.
pub fn inject(coarse: &[f64], fine_centres: &[Vec3], locate: impl Fn(&Vec3) -> Option<usize>) -> Vec<Option<f64>> {
    fine_centres.iter().map(|x| locate(x).map(|c| coarse[c])).collect()
}

/// Cell of a tensor grid with node coordinates `coords[a]` containing `x`.
pub fn tensor_cell_index(coords: &[Vec<f64>], x: &Vec3) -> Option<usize> {
    let mut idx = 0;
    let mut stride = 1;
    for (a, c) in coords.iter().enumerate() {
        let n = c.len() - 1;
        if x[a] < c[0] || x[a] > c[n] {
            return None;
        }
        let i = c.partition_point(|&v| v <= x[a]).saturating_sub(1).min(n - 1);
        idx += i * stride;
        stride *= n;
    }
    Some(idx)
}

/// Dofs of subdomains with dimension `dim`.
pub fn dofs_of_dim(mesh: &MixedDimensionalMesh, dim: usize) -> Vec<usize> {
    mesh.subdomains
        .iter()
        .enumerate()
        .filter(|(_, s)| s.dim == dim)
        .flat_map(|(s, _)| mesh.dof_range(s))
        .collect()
}

pub fn dof_volumes(mesh: &MixedDimensionalMesh) -> Vec<f64> {
    (0..mesh.num_dofs()).map(|d| mesh.dof_volume(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_fields_have_zero_error() {
        let x = [1.0, -2.0, 3.5];
        let e = l2_error(&x, &x, &[1.0, 2.0, 3.0], &[0, 1, 2]);
        assert_eq!(e.value, 0.0);
        assert!(!e.absolute);
    }

    #[test]
    fn uniform_offset() {
        let r = [1.0; 4];
        let x = [1.1; 4];
        let e = l2_error(&x, &r, &[0.3, 1.0, 7.0, 0.01], &[0, 1, 2, 3]);
        assert!((e.value - 0.1).abs() < 1e-14);
    }

    #[test]
    fn zero_reference_is_flagged() {
        let e = l2_error(&[3.0, 4.0], &[0.0, 0.0], &[1.0, 1.0], &[0, 1]);
        assert!(e.absolute);
        assert_eq!(e.value, 5.0);
    }

    #[test]
    fn subset_restricts_the_sum() {
        let e = l2_error(&[1.0, 100.0], &[1.0, 1.0], &[1.0, 1.0], &[0]);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn injection_preserves_piecewise_constant_norms() {
        // 2x2 field injected onto the nested 4x4 grid and averaged back
        let coarse_coords = vec![vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]];
        let fine: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let fine_coords = vec![fine.clone(), fine];
        let coarse = [1.0, -2.0, 0.5, 4.0];
        let centres: Vec<Vec3> = (0..16)
            .map(|k| Vec3::new((k % 4) as f64 / 4.0 + 0.125, (k / 4) as f64 / 4.0 + 0.125, 0.0))
            .collect();
        let injected: Vec<f64> = inject(&coarse, &centres, |x| tensor_cell_index(&coarse_coords, x))
            .into_iter()
            .map(Option::unwrap)
            .collect();
        let fine_norm: f64 = injected.iter().map(|v| v * v / 16.0).sum::<f64>();
        let coarse_norm: f64 = coarse.iter().map(|v| v * v / 4.0).sum::<f64>();
        assert_eq!(fine_norm, coarse_norm);
        let mut back = [0.0; 4];
        for (k, x) in centres.iter().enumerate() {
            back[tensor_cell_index(&coarse_coords, x).unwrap()] += injected[k] / 4.0;
            assert_eq!(tensor_cell_index(&fine_coords, x), Some(k));
        }
        assert_eq!(back, coarse);
    }
}
