use super::*;
use crate::linsolve::direct_solve;
use crate::mesh::{build_tensor_grid_with_fractures, read_mesh_document, FractureNetworkSpec};

fn plain_grid(coords: &[Vec<f64>]) -> SubdomainGrid {
    let spec = FractureNetworkSpec::unit(coords.len());
    let mesh = build_tensor_grid_with_fractures(&spec, coords).unwrap();
    mesh.subdomains.into_iter().next().unwrap()
}

fn uniform(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Unit square split into `n x n` squares, each cut into two triangles,
/// interior nodes shifted by a fixed pattern.
fn triangle_grid(n: usize) -> SubdomainGrid {
    let mut doc = format!("fracfv-mesh 1\nambient_dim 2\nsubdomains 1\nsubdomain 2 1 matrix\nnodes {}\n", (n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (mut x, mut y) = (i as f64 / n as f64, j as f64 / n as f64);
            if i > 0 && i < n && j > 0 && j < n {
                x += 0.15 / n as f64 * ((i * 7 + j * 3) % 5) as f64 / 4.0;
                y -= 0.12 / n as f64 * ((i * 2 + j * 5) % 3) as f64 / 2.0;
            }
            doc += &format!("{x:.17e} {y:.17e}\n");
        }
    }
    doc += &format!("cells {} simplex\n", 2 * n * n);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..n {
        for i in 0..n {
            doc += &format!("3 {} {} {}\n", id(i, j), id(i + 1, j), id(i + 1, j + 1));
            doc += &format!("3 {} {} {}\n", id(i, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    doc += "end\ninterfaces 0\n";
    read_mesh_document(&doc).unwrap().subdomains.into_iter().next().unwrap()
}

fn constant_k(grid: &SubdomainGrid, k: PermeabilityTensor) -> Vec<PermeabilityTensor> {
    vec![k; grid.num_cells()]
}

fn solve(grid: &SubdomainGrid, disc: &SubdomainDiscretization, bc: &BoundaryConditionSet) -> Vec<f64> {
    let (a, b) = assemble_subdomain_system(grid, disc, bc, &vec![0.0; grid.num_cells()]);
    direct_solve(&a, &b).unwrap()
}

#[test]
fn half_transmissibility_examples() {
    let n = Vec3::new(1.0, 0.0, 0.0);
    let i2 = PermeabilityTensor::isotropic(2, 1.0);
    let a = tpfa_half_transmissibility(1.0, &n, &Vec3::new(0.5, 0.0, 0.0), &i2).unwrap();
    assert!((a - 2.0).abs() < 1e-15);
    let k = PermeabilityTensor::diagonal(&[4.0, 1.0]);
    let a = tpfa_half_transmissibility(1.0, &n, &Vec3::new(0.5, 0.0, 0.0), &k).unwrap();
    assert!((a - 8.0).abs() < 1e-15);
    let a = tpfa_half_transmissibility(1.0, &n, &Vec3::new(0.5, 0.5, 0.0), &i2).unwrap();
    assert!((a - 1.0).abs() < 1e-15);
    assert!(tpfa_half_transmissibility(1.0, &n, &Vec3::zeros(), &i2).is_err());
}

#[test]
fn face_transmissibility_examples() {
    assert_eq!(tpfa_face_transmissibility(2.0, 2.0), Some(1.0));
    assert_eq!(tpfa_face_transmissibility(3.0, 6.0), Some(2.0));
    assert_eq!(tpfa_face_transmissibility(0.0, 5.0), Some(0.0));
    assert_eq!(tpfa_face_transmissibility(0.0, 0.0), None);
}

#[test]
fn series_resistors_in_one_dimension() {
    let grid = plain_grid(&[vec![0.0, 1.0, 2.0, 3.0]]);
    let k: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&v| PermeabilityTensor::isotropic(1, v)).collect();
    let bc = BoundaryConditionSet::from_fn(&grid, |x, _| BoundaryCondition::Dirichlet(if x.x < 1.0 { 1.0 } else { 0.0 }));
    let disc = assemble_tpfa(&grid, &k, &bc).unwrap();
    let p = solve(&grid, &disc, &bc);
    let fluxes = reconstruct_fluxes(&grid, &disc, &p, &bc);
    // resistance h/K summed over the cells
    let q = 1.0 / (1.0 / 1.0 + 1.0 / 2.0 + 1.0 / 4.0);
    for f in 0..grid.num_faces() {
        let along_x = fluxes[f] * grid.face_normals[f].x;
        assert!((along_x - q).abs() < 1e-13, "face {f}: {along_x} vs {q}");
    }
}

#[test]
fn tpfa_reproduces_linear_pressure() {
    let grid = plain_grid(&[uniform(5), vec![0.0, 0.2, 0.7, 1.0]]);
    let k = constant_k(&grid, PermeabilityTensor::isotropic(2, 1.0));
    let bc = BoundaryConditionSet::from_fn(&grid, |x, n| {
        if n.x.abs() > 0.5 {
            BoundaryCondition::Dirichlet(1.0 - x.x)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let disc = assemble_tpfa(&grid, &k, &bc).unwrap();
    let p = solve(&grid, &disc, &bc);
    for (c, x) in grid.cell_centres.iter().enumerate() {
        assert!((p[c] - (1.0 - x.x)).abs() < 1e-13);
    }
}

#[test]
fn pure_neumann_has_constant_null_space() {
    let grid = plain_grid(&[uniform(3), uniform(2)]);
    let k = constant_k(&grid, PermeabilityTensor::isotropic(2, 1.0));
    let bc = BoundaryConditionSet::no_flow(&grid);
    for method in [Method::Tpfa, Method::Mpfa { eta: None }] {
        let disc = discretize(&grid, &k, &bc, method).unwrap();
        let (a, _) = assemble_subdomain_system(&grid, &disc, &bc, &vec![0.0; grid.num_cells()]);
        let r = a.mul_vec(&vec![1.0; grid.num_cells()]);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
        assert!(direct_solve(&a, &vec![0.0; grid.num_cells()]).is_err());
    }
}

#[test]
fn mpfa_matches_tpfa_on_k_orthogonal_grid() {
    let grid = plain_grid(&[vec![0.0, 0.1, 0.4, 0.5, 1.0], vec![0.0, 0.3, 0.35, 1.0]]);
    let k: Vec<_> = (0..grid.num_cells())
        .map(|c| PermeabilityTensor::diagonal(&[1.0 + c as f64, 0.5 + 0.1 * c as f64]))
        .collect();
    let bc = BoundaryConditionSet::from_fn(&grid, |x, n| {
        if n.x > 0.5 {
            BoundaryCondition::Dirichlet(x.y)
        } else if n.y < -0.5 {
            BoundaryCondition::Neumann(0.3)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let t = assemble_tpfa(&grid, &k, &bc).unwrap();
    let m = assemble_mpfa(&grid, &k, &bc, 0.0).unwrap();
    let src = vec![0.0; grid.num_cells()];
    let (at, bt) = assemble_subdomain_system(&grid, &t, &bc, &src);
    let (am, bm) = assemble_subdomain_system(&grid, &m, &bc, &src);
    let diff = (at.to_dense() - am.to_dense()).abs().max();
    assert!(diff < 1e-12 * at.max_abs(), "matrix difference {diff}");
    for (x, y) in bt.iter().zip(&bm) {
        assert!((x - y).abs() < 1e-12);
    }
}

fn check_linear_exactness(grid: &SubdomainGrid, k: PermeabilityTensor, eta: f64) {
    let g = Vec3::new(0.7, -1.3, 0.4);
    let exact = |x: &Vec3| 2.0 + g.dot(x);
    let kk = constant_k(grid, k);
    let bc = BoundaryConditionSet::from_fn(grid, |x, _| BoundaryCondition::Dirichlet(exact(x)));
    let disc = assemble_mpfa(grid, &kk, &bc, eta).unwrap();
    let p = solve(grid, &disc, &bc);
    for (c, x) in grid.cell_centres.iter().enumerate() {
        assert!((p[c] - exact(x)).abs() < 1e-10, "cell {c}: {} vs {}", p[c], exact(x));
    }
    // face fluxes equal -A n·K·g
    let fl = reconstruct_fluxes(grid, &disc, &p, &bc);
    for f in 0..grid.num_faces() {
        let expect = -grid.face_areas[f] * k.bilinear(&grid.face_normals[f], &g);
        assert!((fl[f] - expect).abs() < 1e-10);
    }
}

#[test]
fn mpfa_linear_exactness_on_triangles() {
    let grid = triangle_grid(5);
    check_linear_exactness(&grid, PermeabilityTensor::rotated_2d(10.0, 1.0, 0.4), default_eta(&grid));
}

#[test]
fn mpfa_linear_exactness_on_distorted_tensor_grid() {
    let grid = plain_grid(&[vec![0.0, 0.2, 0.5, 1.0], vec![0.0, 0.6, 1.0], vec![0.0, 0.3, 0.45, 1.0]]);
    let k = PermeabilityTensor::rotated_about_z([1e3, 1e3 / 3.0, 1e3], std::f64::consts::FRAC_PI_4);
    check_linear_exactness(&grid, k, 0.0);
}

#[test]
fn interior_node_transmissibilities_are_rotation_symmetric() {
    let grid = plain_grid(&[uniform(2), uniform(2)]);
    let k = constant_k(&grid, PermeabilityTensor::isotropic(2, 1.0));
    let bc = BoundaryConditionSet::no_flow(&grid);
    let disc = assemble_mpfa(&grid, &k, &bc, 0.0).unwrap();
    let (a, _) = assemble_subdomain_system(&grid, &disc, &bc, &[0.0; 4]);
    // cells 0,1,3,2 are visited turning around the centre node
    let ring = [0, 1, 3, 2];
    for r in 0..4 {
        let (c0, c1, c2) = (ring[r], ring[(r + 1) % 4], ring[(r + 2) % 4]);
        assert!((a.get(c0, c0) - a.get(0, 0)).abs() < 1e-14);
        assert!((a.get(c0, c1) - a.get(0, 1)).abs() < 1e-14);
        assert!((a.get(c0, c2) - a.get(0, 3)).abs() < 1e-14);
    }
    assert!(a.is_symmetric(1e-12));
}

#[test]
fn constant_pressure_gives_zero_interior_flux() {
    let grid = triangle_grid(4);
    let k = constant_k(&grid, PermeabilityTensor::rotated_2d(100.0, 1.0, 1.0));
    let bc = BoundaryConditionSet::from_fn(&grid, |_, _| BoundaryCondition::Dirichlet(3.0));
    for method in [Method::Tpfa, Method::Mpfa { eta: None }] {
        let disc = discretize(&grid, &k, &bc, method).unwrap();
        let fl = reconstruct_fluxes(&grid, &disc, &vec![3.0; grid.num_cells()], &bc);
        let tmax = disc.flux_cells.max_abs();
        assert!(fl.iter().all(|v| v.abs() <= 1e-12 * tmax));
    }
}

#[test]
fn reconstructed_fluxes_are_conservative() {
    let grid = plain_grid(&[uniform(6), uniform(4)]);
    let k = constant_k(&grid, PermeabilityTensor::rotated_2d(6.0, 1.0, 0.5));
    let bc = BoundaryConditionSet::from_fn(&grid, |x, _| {
        if x.x < 1e-12 {
            BoundaryCondition::Dirichlet(1.0)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let src: Vec<f64> = (0..grid.num_cells()).map(|c| (c % 3) as f64 * 0.1).collect();
    let disc = assemble_mpfa(&grid, &k, &bc, 0.0).unwrap();
    let (a, b) = assemble_subdomain_system(&grid, &disc, &bc, &src);
    let p = direct_solve(&a, &b).unwrap();
    let fl = reconstruct_fluxes(&grid, &disc, &p, &bc);
    let div = divergence(&grid).mul_vec(&fl);
    for c in 0..grid.num_cells() {
        assert!((div[c] - src[c]).abs() < 1e-12);
    }
}

#[test]
fn two_cell_flux_and_no_flow() {
    let grid = plain_grid(&[vec![0.0, 0.5, 1.0]]);
    let k = constant_k(&grid, PermeabilityTensor::isotropic(1, 0.5));
    let bc = BoundaryConditionSet::no_flow(&grid);
    let disc = assemble_tpfa(&grid, &k, &bc).unwrap();
    let fl = reconstruct_fluxes(&grid, &disc, &[1.0, 0.0], &bc);
    let interior = (0..grid.num_faces()).find(|&f| grid.face_cells[f].len() == 2).unwrap();
    // t = 1; the flux runs from cell 0 to cell 1
    assert!((fl[interior] * grid.face_cells[interior][0].1 - 1.0).abs() < 1e-15);
    assert!(reconstruct_fluxes(&grid, &disc, &[2.0, 2.0], &bc).iter().all(|&v| v == 0.0));
}

#[test]
fn tpfa_system_is_symmetric() {
    let grid = triangle_grid(3);
    let k = constant_k(&grid, PermeabilityTensor::rotated_2d(5.0, 1.0, 0.3));
    let bc = BoundaryConditionSet::from_fn(&grid, |x, _| BoundaryCondition::Dirichlet(x.x));
    let disc = assemble_tpfa(&grid, &k, &bc).unwrap();
    let (a, _) = assemble_subdomain_system(&grid, &disc, &bc, &vec![0.0; grid.num_cells()]);
    assert!(a.is_symmetric(1e-14));
}

#[test]
fn wrong_permeability_dimension_is_rejected() {
    let grid = plain_grid(&[uniform(2), uniform(2)]);
    let k = vec![PermeabilityTensor::isotropic(3, 1.0); 4];
    let bc = BoundaryConditionSet::no_flow(&grid);
    assert_eq!(
        assemble_tpfa(&grid, &k, &bc).unwrap_err(),
        FvError::PermeabilityDimension { expected: 2, got: 3 }
    );
}
