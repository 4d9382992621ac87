//! Named case presets: geometry, permeabilities, boundary data and tracer
//! set-up.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coupling::{network_permeability, FlowProblem};
use crate::elimination::intersection_dofs;
use crate::fv::{BoundaryCondition, BoundaryConditionSet, Method};
use crate::mesh::{
    build_cartesian_with_fractures, build_tensor_grid_with_fractures, FracturePatch, FractureNetworkSpec,
    IntersectionPermeability, MixedDimensionalMesh,
};
use crate::permeability::PermeabilityTensor;
use crate::transport::{default_time_step, probe_cell};
use crate::Vec3;

use super::pipeline::TransportSetup;
use super::HarnessError;

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "1.1")]
    Case1_1,
    #[serde(rename = "1.2-lite")]
    Case1_2Lite,
    #[serde(rename = "1.3")]
    Case1_3,
    #[serde(rename = "2")]
    Case2,
    #[serde(rename = "3")]
    Case3,
    #[serde(rename = "4")]
    Case4,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::Case1_1,
        CaseId::Case1_2Lite,
        CaseId::Case1_3,
        CaseId::Case2,
        CaseId::Case3,
        CaseId::Case4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Case1_1 => "1.1",
            CaseId::Case1_2Lite => "1.2-lite",
            CaseId::Case1_3 => "1.3",
            CaseId::Case2 => "2",
            CaseId::Case3 => "3",
            CaseId::Case4 => "4",
        }
    }

    pub fn default_resolution(self) -> usize {
        match self {
            CaseId::Case1_1 | CaseId::Case1_2Lite => 20,
            CaseId::Case2 => 16,
            CaseId::Case1_3 | CaseId::Case3 | CaseId::Case4 => 8,
        }
    }

    pub fn default_discretization(self) -> Discretization {
        match self {
            CaseId::Case2 | CaseId::Case3 => Discretization::Mpfa,
            _ => Discretization::Tpfa,
        }
    }

    pub fn default_elimination(self) -> super::Elimination {
        match self {
            CaseId::Case4 => super::Elimination::Schur,
            _ => super::Elimination::None,
        }
    }

    /// Free parameters and their defaults.
    pub fn parameters(self) -> BTreeMap<&'static str, f64> {
        let list: &[(&str, f64)] = match self {
            CaseId::Case1_1 => &[("k_h", 1.0), ("k_v", 1.0), ("k_intersection", f64::NAN), ("aperture", 1e-2)],
            CaseId::Case1_2Lite => &[("k_high", 1e4), ("k_low", 1e-4), ("aperture", 1e-4)],
            CaseId::Case1_3 => &[
                ("k_conductive", 1e6),
                ("k_blocking", 1e-6),
                ("aperture", 1e-6),
                ("t_final", 0.5),
            ],
            CaseId::Case2 => &[
                ("ratio", 1.0),
                ("angle", 30.0),
                ("k_fracture", 1e4),
                ("aperture", 1e-3),
                ("reference_resolution", 128.0),
            ],
            CaseId::Case3 => &[
                ("k_fracture", 1e3),
                ("angle", 45.0),
                ("aperture", 1e-3),
                ("t_final", 30.0),
            ],
            CaseId::Case4 => &[
                ("k_conductive", 1e5),
                ("k_blocking", 1e-5),
                ("k_upper", 1e-2),
                ("k_lower", 1e-3),
                ("aperture", 1e-6),
                ("well_rate", 1.0),
                ("t_final", 2.0),
            ],
        };
        list.iter().copied().collect()
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown case '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Tpfa,
    Mpfa,
    /// TPFA in the matrix, MPFA in lower-dimensional subdomains.
    Hybrid,
}

impl Discretization {
    pub fn apply(self, problem: &mut FlowProblem) {
        let mpfa = Method::Mpfa { eta: None };
        match self {
            Discretization::Tpfa => problem.set_methods_by_dim(Method::Tpfa, Method::Tpfa),
            Discretization::Mpfa => problem.set_methods_by_dim(mpfa, mpfa),
            Discretization::Hybrid => problem.set_methods_by_dim(Method::Tpfa, mpfa),
        }
    }
}

impl FromStr for Discretization {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tpfa" => Ok(Discretization::Tpfa),
            "mpfa" => Ok(Discretization::Mpfa),
            "hybrid" => Ok(Discretization::Hybrid),
            _ => Err(HarnessError::Usage(format!("unknown discretization '{s}'"))),
        }
    }
}

/// Resolved parameters: defaults with overrides applied.
pub fn resolve_parameters(id: CaseId, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>, HarnessError> {
    let mut params: BTreeMap<String, f64> = id.parameters().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    for (k, &v) in overrides {
        match params.get_mut(k) {
            Some(slot) => {
                if !v.is_finite() {
                    return Err(HarnessError::Usage(format!("override {k} must be finite")));
                }
                *slot = v;
            }
            None => {
                let known: Vec<&str> = params.keys().map(String::as_str).collect();
                return Err(HarnessError::Usage(format!(
                    "case {id} has no parameter '{k}' (known: {})",
                    known.join(", ")
                )));
            }
        }
    }
    Ok(params)
}

/// A case ready to solve.
#[derive(Debug, Clone)]
pub struct CaseSetup {
    pub problem: FlowProblem,
    pub transport: Option<TransportSetup>,
    /// Dofs removed by an elimination.
    pub eliminated: Vec<usize>,
    pub network: FractureNetworkSpec,
}

pub fn build_case(
    id: CaseId,
    resolution: usize,
    disc: Discretization,
    params: &BTreeMap<String, f64>,
) -> Result<CaseSetup, HarnessError> {
    let p = |k: &str| params[k];
    let setup = match id {
        CaseId::Case1_1 => case_1_1(resolution, p("k_h"), p("k_v"), p("k_intersection"), p("aperture"))?,
        CaseId::Case1_2Lite => case_1_2_lite(resolution, p("k_high"), p("k_low"), p("aperture"))?,
        CaseId::Case1_3 => case_1_3(resolution, p("k_conductive"), p("k_blocking"), p("aperture"), p("t_final"))?,
        CaseId::Case2 => case_2(resolution, p("ratio"), p("angle"), p("k_fracture"), p("aperture"))?,
        CaseId::Case3 => case_3(resolution, p("k_fracture"), p("angle"), p("aperture"), p("t_final"))?,
        CaseId::Case4 => case_4(
            resolution,
            [p("k_conductive"), p("k_blocking"), p("k_upper"), p("k_lower")],
            p("aperture"),
            p("well_rate"),
            p("t_final"),
        )?,
    };
    let mut setup = setup;
    disc.apply(&mut setup.problem);
    Ok(setup)
}

fn iso(dim: usize, k: f64) -> PermeabilityTensor {
    PermeabilityTensor::isotropic(dim, k)
}

fn check_resolution(resolution: usize, multiple: usize) -> Result<(), HarnessError> {
    if resolution == 0 || resolution % multiple != 0 {
        return Err(HarnessError::Usage(format!(
            "resolution must be a positive multiple of {multiple}, got {resolution}"
        )));
    }
    Ok(())
}

fn on_face(x: &Vec3, n: &Vec3, axis: usize, value: f64) -> bool {
    n[axis].abs() > 0.5 && (x[axis] - value).abs() < EPS
}

/// Dirichlet data for tracer inflow on every outer boundary face.
fn tracer_bc(mesh: &MixedDimensionalMesh, value: f64) -> Vec<BoundaryConditionSet> {
    mesh.subdomains
        .iter()
        .map(|g| BoundaryConditionSet::from_fn(g, |_, _| BoundaryCondition::Dirichlet(value)))
        .collect()
}

fn transport_setup(
    mesh: &MixedDimensionalMesh,
    bc: Vec<BoundaryConditionSet>,
    initial: f64,
    t_final: f64,
    probe: Option<usize>,
) -> Option<TransportSetup> {
    Some(TransportSetup {
        bc,
        initial: vec![initial; mesh.num_dofs()],
        source_concentration: vec![0.0; mesh.num_dofs()],
        t_final,
        dt: default_time_step(t_final),
        probe,
    })
}

/// Unit square, fractures at x = 0.5 (K_v) and y = 0.5 (K_h); the
/// intersection inherits K_v unless given explicitly. p = 1 - x on the
/// vertical boundaries, no flow elsewhere.
fn case_1_1(resolution: usize, k_h: f64, k_v: f64, k_i: f64, aperture: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 2)?;
    let mut spec = FractureNetworkSpec::unit(2);
    let vertical = FracturePatch::spanning(&spec, 0, 0.5, aperture, iso(2, k_v));
    let horizontal = FracturePatch::spanning(&spec, 1, 0.5, aperture, iso(2, k_h));
    spec = spec.with_fracture(vertical).with_fracture(horizontal);
    spec.intersection_permeability = if k_i.is_nan() {
        IntersectionPermeability::FromFracture(0)
    } else {
        IntersectionPermeability::Explicit(iso(2, k_i))
    };
    let mesh = build_cartesian_with_fractures(&spec, &[resolution, resolution])?;
    let perm = network_permeability(&mesh, &spec, |_| iso(2, 1.0));
    let mut problem = FlowProblem::new(mesh, perm, Method::Tpfa);
    problem.distance_correction = true;
    problem.set_boundary_conditions(|_, x, n| {
        if n[0].abs() > 0.5 && (x[0] < EPS || x[0] > 1.0 - EPS) {
            BoundaryCondition::Dirichlet(1.0 - x[0])
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let eliminated = intersection_dofs(&problem.mesh);
    Ok(CaseSetup {
        problem,
        transport: None,
        eliminated,
        network: spec,
    })
}

/// Ten axis-aligned fractures of two permeabilities in the unit square,
/// intersections with the harmonic average of their parents. Flow from
/// left (p = 1) to right (p = 0).
fn case_1_2_lite(resolution: usize, k_high: f64, k_low: f64, aperture: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 20)?;
    let mut spec = FractureNetworkSpec::unit(2);
    spec.intersection_permeability = IntersectionPermeability::HarmonicAverage;
    // (normal axis, position, tangential extent, conductive)
    let layout: [(usize, f64, [f64; 2], bool); 10] = [
        (0, 0.3, [0.0, 1.0], true),
        (1, 0.5, [0.0, 1.0], true),
        (0, 0.7, [0.15, 0.9], true),
        (1, 0.8, [0.1, 0.6], true),
        (1, 0.2, [0.4, 1.0], true),
        (0, 0.5, [0.05, 0.7], false),
        (1, 0.35, [0.1, 0.85], false),
        (0, 0.85, [0.4, 0.95], false),
        (1, 0.65, [0.2, 0.9], false),
        (0, 0.15, [0.25, 0.75], false),
    ];
    for (axis, pos, ext, conductive) in layout {
        let k = if conductive { k_high } else { k_low };
        let mut patch = FracturePatch::spanning(&spec, axis, pos, aperture, iso(2, k));
        patch.extent[1 - axis] = ext;
        spec = spec.with_fracture(patch);
    }
    let mesh = build_cartesian_with_fractures(&spec, &[resolution, resolution])?;
    let perm = network_permeability(&mesh, &spec, |_| iso(2, 1.0));
    let mut problem = FlowProblem::new(mesh, perm, Method::Tpfa);
    problem.set_boundary_conditions(|_, x, n| {
        if on_face(x, n, 0, 0.0) {
            BoundaryCondition::Dirichlet(1.0)
        } else if on_face(x, n, 0, 1.0) {
            BoundaryCondition::Dirichlet(0.0)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let eliminated = intersection_dofs(&problem.mesh);
    Ok(CaseSetup {
        problem,
        transport: None,
        eliminated,
        network: spec,
    })
}

/// Unit cube with a conductive fracture at z = 0.5 and a blocking one at
/// x = 0.5; p = 1 at x = 0, p = 0 at x = 1, tracer flushed from T = 1.
fn case_1_3(resolution: usize, k_c: f64, k_b: f64, aperture: f64, t_final: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 2)?;
    let mut spec = FractureNetworkSpec::unit(3);
    spec.intersection_permeability = IntersectionPermeability::LeastPermeable;
    let conductive = FracturePatch::spanning(&spec, 2, 0.5, aperture, iso(3, k_c));
    let blocking = FracturePatch::spanning(&spec, 0, 0.5, aperture, iso(3, k_b));
    spec = spec.with_fracture(conductive).with_fracture(blocking);
    let mesh = build_cartesian_with_fractures(&spec, &[resolution; 3])?;
    let perm = network_permeability(&mesh, &spec, |_| iso(3, 1.0));
    let mut problem = FlowProblem::new(mesh, perm, Method::Tpfa);
    problem.set_boundary_conditions(|_, x, n| {
        if on_face(x, n, 0, 0.0) {
            BoundaryCondition::Dirichlet(1.0)
        } else if on_face(x, n, 0, 1.0) {
            BoundaryCondition::Dirichlet(0.0)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let probe = probe_cell(&problem.mesh, 3, &Vec3::new(1.0, 0.45, 0.55))?;
    let transport = transport_setup(&problem.mesh, tracer_bc(&problem.mesh, 0.0), 1.0, t_final, Some(probe));
    let eliminated = intersection_dofs(&problem.mesh);
    Ok(CaseSetup {
        problem,
        transport,
        eliminated,
        network: spec,
    })
}

fn case_2_matrix_tensor(ratio: f64, angle_deg: f64) -> PermeabilityTensor {
    PermeabilityTensor::rotated_2d(ratio, 1.0, angle_deg.to_radians())
}

/// p = 1 on the boundary within 0.25 of the origin, p = 0 within 0.25 of
/// (1, 1), no flow elsewhere.
fn case_2_bc(x: &Vec3, n: &Vec3) -> BoundaryCondition {
    let low = (on_face(x, n, 0, 0.0) && x[1] < 0.25) || (on_face(x, n, 1, 0.0) && x[0] < 0.25);
    let high = (on_face(x, n, 0, 1.0) && x[1] > 0.75) || (on_face(x, n, 1, 1.0) && x[0] > 0.75);
    if low {
        BoundaryCondition::Dirichlet(1.0)
    } else if high {
        BoundaryCondition::Dirichlet(0.0)
    } else {
        BoundaryCondition::Neumann(0.0)
    }
}

/// Unit square with anisotropic matrix and one conductive fracture at
/// y = 0.5. Pressure only.
fn case_2(resolution: usize, ratio: f64, angle: f64, k_f: f64, aperture: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 4)?;
    let mut spec = FractureNetworkSpec::unit(2);
    spec = spec.clone().with_fracture(FracturePatch::spanning(&spec, 1, 0.5, aperture, iso(2, k_f)));
    let mesh = build_cartesian_with_fractures(&spec, &[resolution, resolution])?;
    let km = case_2_matrix_tensor(ratio, angle);
    let perm = network_permeability(&mesh, &spec, |_| km);
    let mut problem = FlowProblem::new(mesh, perm, Method::Mpfa { eta: None });
    problem.distance_correction = true;
    problem.set_boundary_conditions(|_, x, n| case_2_bc(x, n));
    Ok(CaseSetup {
        problem,
        transport: None,
        eliminated: Vec::new(),
        network: spec,
    })
}

/// Equi-dimensional reference for case 2: the fracture is a layer of
/// thickness `aperture` resolved by the tensor grid. Returns the problem
/// and the node coordinates per axis.
pub fn case_2_reference(
    resolution: usize,
    ratio: f64,
    angle: f64,
    k_f: f64,
    aperture: f64,
) -> Result<(FlowProblem, Vec<Vec<f64>>), HarnessError> {
    check_resolution(resolution, 2)?;
    let h = 1.0 / resolution as f64;
    if aperture >= h {
        return Err(HarnessError::Usage(format!(
            "reference resolution {resolution} does not resolve aperture {aperture}"
        )));
    }
    let xs: Vec<f64> = (0..=resolution).map(|i| i as f64 * h).collect();
    let mut ys: Vec<f64> = Vec::with_capacity(resolution + 2);
    for &y in &xs {
        if (y - 0.5).abs() < EPS {
            ys.push(0.5 - aperture / 2.0);
            ys.push(0.5 + aperture / 2.0);
        } else {
            ys.push(y);
        }
    }
    let spec = FractureNetworkSpec::unit(2);
    let coords = vec![xs, ys];
    let mesh = build_tensor_grid_with_fractures(&spec, &coords)?;
    let km = case_2_matrix_tensor(ratio, angle);
    let kf = iso(2, k_f);
    let perm = network_permeability(&mesh, &spec, |x| if (x[1] - 0.5).abs() < aperture { kf } else { km });
    let mut problem = FlowProblem::new(mesh, perm, Method::Mpfa { eta: None });
    problem.set_boundary_conditions(|_, x, n| case_2_bc(x, n));
    Ok((problem, coords))
}

/// Unit cube with an anisotropic fracture at z = 0.5. Inflow through the
/// bottom corner x, y < 0.25, outflow through the top corner x, y > 0.75.
fn case_3(resolution: usize, k_f: f64, angle: f64, aperture: f64, t_final: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 4)?;
    let mut spec = FractureNetworkSpec::unit(3);
    let kf = PermeabilityTensor::rotated_about_z([k_f, k_f / 3.0, k_f], angle.to_radians());
    spec = spec.clone().with_fracture(FracturePatch::spanning(&spec, 2, 0.5, aperture, kf));
    let mesh = build_cartesian_with_fractures(&spec, &[resolution; 3])?;
    let perm = network_permeability(&mesh, &spec, |_| iso(3, 1.0));
    let mut problem = FlowProblem::new(mesh, perm, Method::Mpfa { eta: None });
    problem.set_boundary_conditions(|_, x, n| {
        if on_face(x, n, 2, 0.0) && x[0] < 0.25 && x[1] < 0.25 {
            BoundaryCondition::Dirichlet(1.0)
        } else if on_face(x, n, 2, 1.0) && x[0] > 0.75 && x[1] > 0.75 {
            BoundaryCondition::Dirichlet(0.0)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let probe = probe_cell(&problem.mesh, 3, &Vec3::new(1.0, 1.0, 1.0))?;
    let transport = transport_setup(&problem.mesh, tracer_bc(&problem.mesh, 0.0), 1.0, t_final, Some(probe));
    Ok(CaseSetup {
        problem,
        transport,
        eliminated: Vec::new(),
        network: spec,
    })
}

/// Conductive fractures at x = 0.5 and z = 0.5, a blocking patch at
/// y = 0.5 over x, z in [0.25, 0.75]; matrix more permeable above z = 0.5.
/// A fixed-rate well in the intersection line below the blocking patch.
fn case_4(resolution: usize, k: [f64; 4], aperture: f64, rate: f64, t_final: f64) -> Result<CaseSetup, HarnessError> {
    check_resolution(resolution, 4)?;
    let [k_c, k_b, k_up, k_lo] = k;
    let mut spec = FractureNetworkSpec::unit(3);
    spec.intersection_permeability = IntersectionPermeability::LeastPermeable;
    let fx = FracturePatch::spanning(&spec, 0, 0.5, aperture, iso(3, k_c));
    let fz = FracturePatch::spanning(&spec, 2, 0.5, aperture, iso(3, k_c));
    let mut fy = FracturePatch::spanning(&spec, 1, 0.5, aperture, iso(3, k_b));
    fy.extent[0] = [0.25, 0.75];
    fy.extent[2] = [0.25, 0.75];
    spec = spec.with_fracture(fx).with_fracture(fz).with_fracture(fy);
    let mesh = build_cartesian_with_fractures(&spec, &[resolution; 3])?;
    let perm = network_permeability(&mesh, &spec, |x| iso(3, if x[2] > 0.5 { k_up } else { k_lo }));
    let mut problem = FlowProblem::new(mesh, perm, Method::Tpfa);
    problem.set_boundary_conditions(|_, x, n| {
        if on_face(x, n, 2, 0.0) || on_face(x, n, 2, 1.0) {
            BoundaryCondition::Dirichlet(0.0)
        } else {
            BoundaryCondition::Neumann(0.0)
        }
    });
    let well = probe_cell(&problem.mesh, 1, &Vec3::new(0.5, 0.3, 0.5))?;
    problem.sources[well] = rate;
    let mut transport = transport_setup(&problem.mesh, tracer_bc(&problem.mesh, 0.0), 0.0, t_final, Some(well));
    if let Some(t) = transport.as_mut() {
        t.source_concentration[well] = 1.0;
    }
    let eliminated = intersection_dofs(&problem.mesh);
    Ok(CaseSetup {
        problem,
        transport,
        eliminated,
        network: spec,
    })
}
