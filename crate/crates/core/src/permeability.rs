//! Symmetric positive-definite permeability tensors.
//!
//! Tensors are stored as 3x3 matrices. In an N < 3 dimensional setting the
//! unused diagonal entries are 1 and never touched by N-dimensional vectors.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum PermeabilityError {
    #[error("permeability tensor is not symmetric")]
    NotSymmetric,
    #[error("permeability tensor is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("unsupported dimension {0}")]
    Dimension(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermeabilityTensor {
    dim: usize,
    k: Matrix3<f64>,
}

impl PermeabilityTensor {
    pub fn from_matrix(dim: usize, k: Matrix3<f64>) -> Result<Self, PermeabilityError> {
        if !(1..=3).contains(&dim) {
            return Err(PermeabilityError::Dimension(dim));
        }
        let mut full = Matrix3::identity();
        full.view_mut((0, 0), (dim, dim)).copy_from(&k.view((0, 0), (dim, dim)));
        let scale = full.abs().max();
        if (full - full.transpose()).abs().max() > 1e-14 * scale {
            return Err(PermeabilityError::NotSymmetric);
        }
        let t = Self { dim, k: full };
        let min_eig = t.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(PermeabilityError::NotPositiveDefinite(min_eig));
        }
        Ok(t)
    }

    pub fn isotropic(dim: usize, k: f64) -> Self {
        Self::diagonal(&vec![k; dim])
    }

    /// Panics on non-positive entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Matrix3::identity();
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self::from_matrix(dim, m).expect("diagonal permeability must be positive")
    }

    /// `R(θ) diag(k_max, k_min) R(θ)ᵀ` in 2D.
    pub fn rotated_2d(k_max: f64, k_min: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut m = Matrix3::identity();
        m[(0, 0)] = k_max * c * c + k_min * s * s;
        m[(1, 1)] = k_max * s * s + k_min * c * c;
        m[(0, 1)] = (k_max - k_min) * s * c;
        m[(1, 0)] = m[(0, 1)];
        Self::from_matrix(2, m).expect("rotated permeability must be positive")
    }

    /// Principal values rotated by `theta` about the z axis (3D).
    pub fn rotated_about_z(principal: [f64; 3], theta: f64) -> Self {
        let r = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), theta);
        let d = Matrix3::from_diagonal(&Vec3::new(principal[0], principal[1], principal[2]));
        let m = r.matrix() * d * r.matrix().transpose();
        let m = (m + m.transpose()) * 0.5;
        Self::from_matrix(3, m).expect("rotated permeability must be positive")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.k
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.k * v
    }

    /// `aᵀ K b`.
    pub fn bilinear(&self, a: &Vec3, b: &Vec3) -> f64 {
        a.dot(&(self.k * b))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let block = DMatrix::from_fn(self.dim, self.dim, |i, j| self.k[(i, j)]);
        let mut vals: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Mean of the eigenvalues, i.e. `trace / dim`.
    pub fn mean_eigenvalue(&self) -> f64 {
        (0..self.dim).map(|i| self.k[(i, i)]).sum::<f64>() / self.dim as f64
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut k = self.k * s;
        for i in self.dim..3 {
            k[(i, i)] = 1.0;
        }
        Self { dim: self.dim, k }
    }

    /// `n (Σ K_i⁻¹)⁻¹`, the harmonic mean of several tensors.
    pub fn harmonic_mean(tensors: &[PermeabilityTensor]) -> Self {
        let dim = tensors[0].dim;
        let mut acc = Matrix3::zeros();
        for t in tensors {
            acc += t.k.try_inverse().expect("SPD tensor is invertible");
        }
        let m = (acc / tensors.len() as f64).try_inverse().unwrap();
        let m = (m + m.transpose()) * 0.5;
        Self::from_matrix(dim, m).unwrap()
    }
}
