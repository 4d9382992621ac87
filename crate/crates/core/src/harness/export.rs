//! Field export: CSV for every cell, legacy VTK for 2D/3D subdomains.

use std::io::{self, BufRead, Write};

use crate::mesh::{MixedDimensionalMesh, SubdomainGrid};

pub const FIELD_CSV_HEADER: &str = "x,y,z,dim,value";

/// One row per dof: centre coordinates, subdomain dimension and value,
/// with 17 significant digits.
pub fn write_field_csv<W: Write>(mut w: W, mesh: &MixedDimensionalMesh, field: &[f64]) -> io::Result<()> {
    writeln!(w, "{FIELD_CSV_HEADER}")?;
    for (d, v) in field.iter().enumerate().take(mesh.num_dofs()) {
        let x = mesh.dof_centre(d);
        let (s, _) = mesh.dof_owner(d);
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{:.16e}",
            x.x, x.y, x.z, mesh.subdomains[s].dim, v
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub centre: [f64; 3],
    pub dim: usize,
    pub value: f64,
}

pub fn read_field_csv<R: BufRead>(r: R) -> io::Result<Vec<FieldRow>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut lines = r.lines();
    let header = lines.next().transpose()?;
    if header.as_deref() != Some(FIELD_CSV_HEADER) {
        return Err(bad("missing field header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(bad(format!("row {}: expected 5 columns", i + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1)));
        rows.push(FieldRow {
            centre: [num(parts[0])?, num(parts[1])?, num(parts[2])?],
            dim: parts[3].parse().map_err(|e| bad(format!("row {}: {e}", i + 1)))?,
            value: num(parts[4])?,
        });
    }
    Ok(rows)
}

/// VTK cell type and node order of one cell.
fn vtk_cell(grid: &SubdomainGrid, c: usize) -> (u8, Vec<usize>) {
    let nodes = &grid.cell_nodes[c];
    let simplex = nodes.len() == grid.dim + 1;
    match (grid.dim, simplex) {
        (0, _) => (1, nodes.clone()),
        (1, _) => (3, nodes.clone()),
        (2, true) => (5, nodes.clone()),
        (_, true) => (10, nodes.clone()),
        (dim, false) => {
            // boxes: sort lexicographically in tangent coordinates, then
            // permute into the VTK quad/hexahedron winding
            let basis = &grid.cell_bases[c];
            let origin = grid.cell_centres[c];
            let mut keyed: Vec<(Vec<f64>, usize)> = nodes
                .iter()
                .map(|&n| {
                    let d = grid.nodes[n] - origin;
                    let mut k: Vec<f64> = basis.iter().map(|b| d.dot(b)).collect();
                    k.reverse();
                    (k, n)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let lex: Vec<usize> = keyed.into_iter().map(|(_, n)| n).collect();
            if dim == 2 && lex.len() == 4 {
                (9, [0, 1, 3, 2].iter().map(|&i| lex[i]).collect())
            } else if dim == 3 && lex.len() == 8 {
                (12, [0, 1, 3, 2, 4, 5, 7, 6].iter().map(|&i| lex[i]).collect())
            } else {
                // general polytope: fall back to a polygon/poly-vertex
                (if dim == 2 { 7 } else { 2 }, nodes.clone())
            }
        }
    }
}

/// Legacy ASCII VTK unstructured grid of the 2D and 3D subdomains with the
/// field as cell data. Returns the number of cells written.
pub fn write_field_vtk<W: Write>(mut w: W, mesh: &MixedDimensionalMesh, field: &[f64], name: &str) -> io::Result<usize> {
    let subs: Vec<usize> = (0..mesh.subdomains.len()).filter(|&s| mesh.subdomains[s].dim >= 2).collect();
    let npoints: usize = subs.iter().map(|&s| mesh.subdomains[s].num_nodes()).sum();
    let cells: Vec<(usize, usize)> = subs
        .iter()
        .flat_map(|&s| (0..mesh.subdomains[s].num_cells()).map(move |c| (s, c)))
        .collect();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{name}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {npoints} double")?;
    let mut offset = vec![0; mesh.subdomains.len()];
    let mut acc = 0;
    for &s in &subs {
        offset[s] = acc;
        for x in &mesh.subdomains[s].nodes {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", x.x, x.y, x.z)?;
        }
        acc += mesh.subdomains[s].num_nodes();
    }
    let described: Vec<(u8, Vec<usize>)> = cells.iter().map(|&(s, c)| vtk_cell(&mesh.subdomains[s], c)).collect();
    let size: usize = described.iter().map(|(_, n)| n.len() + 1).sum();
    writeln!(w, "CELLS {} {size}", cells.len())?;
    for ((s, _), (_, nodes)) in cells.iter().zip(&described) {
        write!(w, "{}", nodes.len())?;
        for n in nodes {
            write!(w, " {}", n + offset[*s])?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for (t, _) in &described {
        writeln!(w, "{t}")?;
    }
    writeln!(w, "CELL_DATA {}", cells.len())?;
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &(s, c) in &cells {
        writeln!(w, "{:.16e}", field[mesh.dof(s, c)])?;
    }
    writeln!(w, "SCALARS dim int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &(s, _) in &cells {
        writeln!(w, "{}", mesh.subdomains[s].dim)?;
    }
    Ok(cells.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cartesian_with_fractures, FracturePatch, FractureNetworkSpec};
    use crate::permeability::PermeabilityTensor;

    fn mesh() -> MixedDimensionalMesh {
        let spec = FractureNetworkSpec::unit(2);
        let spec = spec
            .clone()
            .with_fracture(FracturePatch::spanning(&spec, 0, 0.5, 1e-2, PermeabilityTensor::isotropic(2, 1.0)));
        build_cartesian_with_fractures(&spec, &[2, 2]).unwrap()
    }

    #[test]
    fn empty_field_has_header_only() {
        let empty = MixedDimensionalMesh::new(2, Vec::new(), Vec::new()).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &empty, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{FIELD_CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = mesh();
        let field: Vec<f64> = (0..m.num_dofs()).map(|i| (i as f64 + 0.1).sqrt() / 3.0 - 1e-17).collect();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &m, &field).unwrap();
        let rows = read_field_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), m.num_dofs());
        for (d, row) in rows.iter().enumerate() {
            assert_eq!(row.value.to_bits(), field[d].to_bits());
            let x = m.dof_centre(d);
            assert_eq!(row.centre, [x.x, x.y, x.z]);
        }
        assert_eq!(rows.last().unwrap().dim, 1);
    }

    #[test]
    fn vtk_counts_and_quad_winding() {
        let m = mesh();
        let field = vec![1.0; m.num_dofs()];
        let mut buf = Vec::new();
        let n = write_field_vtk(&mut buf, &m, &field, "pressure").unwrap();
        assert_eq!(n, 4);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("CELLS 4 20"));
        assert_eq!(text.lines().filter(|l| *l == "9").count(), 4);
        // first quad goes counter-clockwise around its centre
        let (_, nodes) = vtk_cell(&m.subdomains[0], 0);
        let g = &m.subdomains[0];
        let c = g.cell_centres[0];
        let area: f64 = (0..4)
            .map(|i| {
                let a = g.nodes[nodes[i]] - c;
                let b = g.nodes[nodes[(i + 1) % 4]] - c;
                a.x * b.y - a.y * b.x
            })
            .sum();
        assert!(area > 0.0);
    }
}
