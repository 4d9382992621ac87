use std::fs;

use fracfv::harness::export::read_field_csv;
use fracfv::harness::*;

fn without_timings(mut r: Report) -> Report {
    r.timings.clear();
    r
}

#[test]
fn identical_runs_give_identical_reports() {
    let spec = CaseSpec::new(CaseId::Case1_3).with_elimination(Elimination::Schur);
    let a = run_case(&spec).unwrap();
    let b = run_case(&spec).unwrap();
    assert_eq!(without_timings(a.report.clone()), without_timings(b.report.clone()));
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(a.pressure()), bits(b.pressure()));
    assert_eq!(
        bits(&a.tracer.as_ref().unwrap().concentration),
        bits(&b.tracer.as_ref().unwrap().concentration)
    );
}

#[test]
fn case_1_1_uniform_is_linear() {
    let r = run_case(&CaseSpec::new(CaseId::Case1_1)).unwrap();
    assert!(r.report.error("pressure_vs_linear", "kept").unwrap() <= 1e-12);
    for (d, p) in r.pressure().iter().enumerate() {
        let x = r.mesh.dof_centre(d).x;
        assert!((p - (1.0 - x)).abs() <= 1e-12, "dof {d}: {p} vs {}", 1.0 - x);
    }
}

#[test]
fn outputs_are_written_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_case(&CaseSpec::new(CaseId::Case1_3).with_resolution(4)).unwrap();
    out.write(dir.path()).unwrap();
    for f in ["report.json", "pressure.csv", "pressure.vtk", "tracer.csv", "tracer.vtk", "series.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["norm_version"], NORM_VERSION);
    assert_eq!(json["spec"]["case"], "1.3");
    assert_eq!(json["build"], BUILD_DESCRIBE);

    let rows = read_field_csv(fs::read(dir.path().join("pressure.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), out.mesh.num_dofs());
    for (row, p) in rows.iter().zip(out.pressure()) {
        assert_eq!(row.value.to_bits(), p.to_bits());
    }

    // the 3D matrix plus the two fracture planes; 1D and 0D cells are not exported
    let cells: usize = out
        .mesh
        .subdomains
        .iter()
        .filter(|g| g.dim >= 2)
        .map(|g| g.num_cells())
        .sum();
    assert_eq!(cells, 4 * 4 * 4 + 2 * 4 * 4);
    let vtk = fs::read_to_string(dir.path().join("pressure.vtk")).unwrap();
    assert!(vtk.contains(&format!("CELL_TYPES {cells}\n")));
    assert_eq!(vtk.lines().filter(|l| *l == "12").count(), 64);
    assert_eq!(vtk.lines().filter(|l| *l == "9").count(), 32);

    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("time,concentration"));
    assert_eq!(series.lines().count(), 1 + 201);
}

#[test]
fn reference_comparison_ignores_eliminated_cells() {
    let r = run_case(&CaseSpec::new(CaseId::Case1_1).with_elimination(Elimination::Schur)).unwrap();
    let kept = r.flow.active.iter().filter(|&&a| a).count();
    assert_eq!(r.report.solved_dofs, kept);
    assert!(r.report.dofs > r.report.solved_dofs);
    assert!(r.report.condition.as_ref().unwrap().ratio.is_finite());
}

#[test]
fn error_categories() {
    let usage = run_case(&CaseSpec::new(CaseId::Case1_1).with_override("nonsense", 1.0)).unwrap_err();
    assert_eq!(usage.exit_code(), 64);
    let usage = run_case(&CaseSpec::new(CaseId::Case1_2Lite).with_resolution(15)).unwrap_err();
    assert_eq!(usage.exit_code(), 64);
    // the well sits in an intersection cell, which Star-Delta cannot eliminate
    let assembly = run_case(&CaseSpec::new(CaseId::Case4).with_elimination(Elimination::StarDelta)).unwrap_err();
    assert_eq!(assembly.exit_code(), 3, "{assembly}");
    assert!("9".parse::<CaseId>().is_err());
    assert!("jacobi".parse::<Elimination>().is_err());
}

#[test]
fn sweep_tables_cover_every_pair() {
    let s = sweep_case_1_1(&[1e-2, 1e2], 8).unwrap();
    assert_eq!(s.points.len(), 4);
    let t = s.tables();
    assert_eq!(t.matches("# ").count(), 4);
    assert!(s.points.iter().all(|p| p.schur_error <= 1e-12));
    let json: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 4);
}
