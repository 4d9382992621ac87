//! Plain-text mesh document.
//!
//! ```text
//! fracfv-mesh 1
//! ambient_dim <N>
//! subdomains <S>
//! subdomain <d> <aperture> <kind>      kind: matrix | fracture <id> | intersection | imported
//! nodes <n>
//! <x_1> .. <x_N>                        one line per node
//! cells <m> simplex|explicit
//! <k> <node_1> .. <node_k>              one line per cell
//! faces <F>                             explicit only
//! <k> <node_1> .. <node_k>
//! cell_faces                            explicit only
//! <k> <face_1> .. <face_k>              one line per cell
//! end
//! ... (S subdomain blocks)
//! interfaces <I>
//! interface <higher> <lower> <P>
//! <face> <cell>                         P lines
//! ```
//!
//! Indices are 0-based. Blank lines and lines starting with `#` are ignored.
//! In `simplex` mode every cell must list `d + 1` nodes and faces are
//! derived: for each cell in order, the face omitting local node `j` for
//! `j = 0..=d`, numbered by first appearance. A derived face listed in an
//! interface that is shared by two cells is split: the second cell gets a
//! new face appended at the end, and the lower-dimensional cell is paired
//! with both. Reals are written with 17 significant digits.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::{
    InterfaceMap, MeshError, MixedDimensionalMesh, SubdomainGrid, SubdomainKind, SubdomainTopology,
};
use crate::Vec3;

pub const MESH_FORMAT_VERSION: u32 = 1;

struct Lines<'a> {
    inner: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { inner, pos: 0 }
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>), MeshError> {
        let (n, l) = *self.inner.get(self.pos).ok_or(MeshError::Format {
            line: self.inner.last().map(|x| x.0).unwrap_or(0),
            message: "unexpected end of document".into(),
        })?;
        self.pos += 1;
        Ok((n, l.split_whitespace().collect()))
    }

    fn keyword(&mut self, word: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        let (n, toks) = self.next()?;
        if toks.first() != Some(&word) {
            return Err(MeshError::Format {
                line: n,
                message: format!("expected '{word}'"),
            });
        }
        Ok((n, toks))
    }
}

fn parse<T: std::str::FromStr>(line: usize, tok: Option<&&str>, what: &str) -> Result<T, MeshError> {
    tok.and_then(|t| t.parse().ok()).ok_or(MeshError::Format {
        line,
        message: format!("invalid or missing {what}"),
    })
}

fn index_list(line: usize, toks: &[&str]) -> Result<Vec<usize>, MeshError> {
    let k: usize = parse(line, toks.first(), "count")?;
    if toks.len() != k + 1 {
        return Err(MeshError::Format {
            line,
            message: format!("expected {k} indices"),
        });
    }
    toks[1..].iter().map(|t| parse(line, Some(t), "index")).collect()
}

struct RawSubdomain {
    topo: SubdomainTopology,
    simplex: bool,
}

/// Parses a mesh document and validates the resulting hierarchy.
pub fn read_mesh_document(text: &str) -> Result<MixedDimensionalMesh, MeshError> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.keyword("fracfv-mesh")?;
    let version: u32 = parse(n, header.get(1), "format version")?;
    if version != MESH_FORMAT_VERSION {
        return Err(MeshError::Format {
            line: n,
            message: format!("unsupported format version {version}"),
        });
    }
    let (n, t) = lines.keyword("ambient_dim")?;
    let ambient: usize = parse(n, t.get(1), "ambient dimension")?;
    if !(1..=3).contains(&ambient) {
        return Err(MeshError::Format {
            line: n,
            message: "ambient dimension must be 1, 2 or 3".into(),
        });
    }
    let (n, t) = lines.keyword("subdomains")?;
    let count: usize = parse(n, t.get(1), "subdomain count")?;

    let mut raws = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, t) = lines.keyword("subdomain")?;
        let dim: usize = parse(n, t.get(1), "dimension")?;
        let aperture: f64 = parse(n, t.get(2), "aperture")?;
        if dim > ambient || !(aperture > 0.0) {
            return Err(MeshError::Format {
                line: n,
                message: "invalid dimension or aperture".into(),
            });
        }
        let kind = match t.get(3).copied() {
            None | Some("imported") => SubdomainKind::Imported,
            Some("matrix") => SubdomainKind::Matrix,
            Some("fracture") => SubdomainKind::Fracture {
                id: parse(n, t.get(4), "fracture id")?,
            },
            Some("intersection") => SubdomainKind::Intersection { cell_parents: Vec::new() },
            Some(other) => {
                return Err(MeshError::Format {
                    line: n,
                    message: format!("unknown subdomain kind '{other}'"),
                })
            }
        };
        let (n, t) = lines.keyword("nodes")?;
        let nn: usize = parse(n, t.get(1), "node count")?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (n, t) = lines.next()?;
            if t.len() != ambient {
                return Err(MeshError::Format {
                    line: n,
                    message: format!("expected {ambient} coordinates"),
                });
            }
            let mut p = Vec3::zeros();
            for a in 0..ambient {
                p[a] = parse(n, t.get(a), "coordinate")?;
            }
            nodes.push(p);
        }
        let (n, t) = lines.keyword("cells")?;
        let nc: usize = parse(n, t.get(1), "cell count")?;
        let simplex = match t.get(2).copied() {
            Some("simplex") => true,
            Some("explicit") => false,
            _ => {
                return Err(MeshError::Format {
                    line: n,
                    message: "cell mode must be 'simplex' or 'explicit'".into(),
                })
            }
        };
        let mut cell_nodes = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (n, t) = lines.next()?;
            let ids = index_list(n, &t)?;
            if ids.iter().any(|&i| i >= nn) {
                return Err(MeshError::Format {
                    line: n,
                    message: "node index out of range".into(),
                });
            }
            if simplex && ids.len() != dim + 1 {
                return Err(MeshError::Format {
                    line: n,
                    message: format!("non-simplex cell with {} nodes in a {dim}-dimensional subdomain", ids.len()),
                });
            }
            cell_nodes.push(ids);
        }
        let (face_nodes, cell_faces) = if simplex {
            derive_simplex_faces(dim, &cell_nodes)
        } else if dim == 0 {
            lines.keyword("faces")?;
            lines.keyword("cell_faces")?;
            for _ in 0..nc {
                lines.next()?;
            }
            (Vec::new(), vec![Vec::new(); nc])
        } else {
            let (n, t) = lines.keyword("faces")?;
            let nf: usize = parse(n, t.get(1), "face count")?;
            let mut face_nodes = Vec::with_capacity(nf);
            for _ in 0..nf {
                let (n, t) = lines.next()?;
                let ids = index_list(n, &t)?;
                if ids.iter().any(|&i| i >= nn) {
                    return Err(MeshError::Format {
                        line: n,
                        message: "node index out of range".into(),
                    });
                }
                face_nodes.push(ids);
            }
            lines.keyword("cell_faces")?;
            let mut cell_faces = Vec::with_capacity(nc);
            for _ in 0..nc {
                let (n, t) = lines.next()?;
                let ids = index_list(n, &t)?;
                if ids.iter().any(|&f| f >= nf) {
                    return Err(MeshError::Format {
                        line: n,
                        message: "face index out of range".into(),
                    });
                }
                cell_faces.push(ids);
            }
            (face_nodes, cell_faces)
        };
        lines.keyword("end")?;
        let nf = face_nodes.len();
        raws.push(RawSubdomain {
            topo: SubdomainTopology {
                dim,
                ambient_dim: ambient,
                kind,
                aperture: vec![aperture; nc],
                nodes,
                cell_nodes,
                face_nodes,
                cell_faces,
                internal_boundary: vec![false; nf],
            },
            simplex,
        });
    }

    let (n, t) = lines.keyword("interfaces")?;
    let ni: usize = parse(n, t.get(1), "interface count")?;
    let mut interfaces = Vec::with_capacity(ni);
    for _ in 0..ni {
        let (n, t) = lines.keyword("interface")?;
        let higher: usize = parse(n, t.get(1), "higher subdomain")?;
        let lower: usize = parse(n, t.get(2), "lower subdomain")?;
        let np: usize = parse(n, t.get(3), "pair count")?;
        if higher >= raws.len() || lower >= raws.len() {
            return Err(MeshError::Format {
                line: n,
                message: "subdomain index out of range".into(),
            });
        }
        let mut pairs = Vec::with_capacity(np);
        for _ in 0..np {
            let (n, t) = lines.next()?;
            let f: usize = parse(n, t.first(), "face index")?;
            let c: usize = parse(n, t.get(1), "cell index")?;
            if f >= raws[higher].topo.face_nodes.len() || c >= raws[lower].topo.cell_nodes.len() {
                return Err(MeshError::Format {
                    line: n,
                    message: "interface index out of range".into(),
                });
            }
            pairs.push((f, c));
        }
        interfaces.push(InterfaceMap { higher, lower, pairs });
    }

    split_interface_faces(&mut raws, &mut interfaces);

    let subdomains = raws
        .into_iter()
        .enumerate()
        .map(|(s, r)| SubdomainGrid::from_topology(r.topo, s))
        .collect::<Result<Vec<_>, _>>()?;
    MixedDimensionalMesh::new(ambient, subdomains, interfaces)
}

fn derive_simplex_faces(dim: usize, cell_nodes: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut face_nodes = Vec::new();
    let mut cell_faces = Vec::with_capacity(cell_nodes.len());
    for nodes in cell_nodes {
        let mut faces = Vec::new();
        if dim > 0 {
            for skip in 0..nodes.len() {
                let fnodes: Vec<usize> = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &n)| n)
                    .collect();
                let mut key = fnodes.clone();
                key.sort_unstable();
                let f = *lookup.entry(key).or_insert_with(|| {
                    face_nodes.push(fnodes);
                    face_nodes.len() - 1
                });
                faces.push(f);
            }
        }
        cell_faces.push(faces);
    }
    (face_nodes, cell_faces)
}

fn split_interface_faces(raws: &mut [RawSubdomain], interfaces: &mut [InterfaceMap]) {
    for intf in interfaces.iter_mut() {
        let raw = &mut raws[intf.higher];
        let mut new_pairs = Vec::with_capacity(intf.pairs.len());
        for &(f, c) in &intf.pairs {
            raw.topo.internal_boundary[f] = true;
            new_pairs.push((f, c));
            if !raw.simplex {
                continue;
            }
            let owners: Vec<usize> = (0..raw.topo.cell_faces.len())
                .filter(|&k| raw.topo.cell_faces[k].contains(&f))
                .collect();
            if owners.len() == 2 {
                let g = raw.topo.face_nodes.len();
                raw.topo.face_nodes.push(raw.topo.face_nodes[f].clone());
                raw.topo.internal_boundary.push(true);
                for slot in raw.topo.cell_faces[owners[1]].iter_mut() {
                    if *slot == f {
                        *slot = g;
                    }
                }
                new_pairs.push((g, c));
            }
        }
        intf.pairs = new_pairs;
    }
}

/// Reads and validates a mesh document from disk.
pub fn import_conforming_mesh(path: impl AsRef<Path>) -> Result<MixedDimensionalMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    read_mesh_document(&text)
}

/// Writes the mesh in `explicit` mode, which preserves face numbering.
pub fn write_mesh_document<W: Write>(mesh: &MixedDimensionalMesh, mut w: W) -> Result<(), MeshError> {
    let n = mesh.ambient_dim;
    writeln!(w, "fracfv-mesh {MESH_FORMAT_VERSION}")?;
    writeln!(w, "ambient_dim {n}")?;
    writeln!(w, "subdomains {}", mesh.subdomains.len())?;
    for sd in &mesh.subdomains {
        let kind = match &sd.kind {
            SubdomainKind::Matrix => "matrix".to_string(),
            SubdomainKind::Fracture { id } => format!("fracture {id}"),
            SubdomainKind::Intersection { .. } => "intersection".to_string(),
            SubdomainKind::Imported => "imported".to_string(),
        };
        let aperture = sd.aperture.first().copied().unwrap_or(1.0);
        writeln!(w, "subdomain {} {:.16e} {}", sd.dim, aperture, kind)?;
        writeln!(w, "nodes {}", sd.num_nodes())?;
        for p in &sd.nodes {
            let coords: Vec<String> = (0..n).map(|a| format!("{:.16e}", p[a])).collect();
            writeln!(w, "{}", coords.join(" "))?;
        }
        writeln!(w, "cells {} explicit", sd.num_cells())?;
        for c in &sd.cell_nodes {
            writeln!(w, "{} {}", c.len(), join(c))?;
        }
        writeln!(w, "faces {}", sd.num_faces())?;
        for f in &sd.face_nodes {
            writeln!(w, "{} {}", f.len(), join(f))?;
        }
        writeln!(w, "cell_faces")?;
        for cf in &sd.cell_faces {
            let ids: Vec<usize> = cf.iter().map(|&(f, _)| f).collect();
            writeln!(w, "{} {}", ids.len(), join(&ids))?;
        }
        writeln!(w, "end")?;
    }
    writeln!(w, "interfaces {}", mesh.interfaces.len())?;
    for intf in &mesh.interfaces {
        writeln!(w, "interface {} {} {}", intf.higher, intf.lower, intf.pairs.len())?;
        for (f, c) in &intf.pairs {
            writeln!(w, "{f} {c}")?;
        }
    }
    Ok(())
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}
