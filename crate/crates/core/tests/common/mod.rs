#![allow(dead_code)]

use std::fmt::Write as _;
use std::io::Write as _;

/// Writes one acceptance line past the test harness capture and returns
/// `pass` for asserting.
pub fn verdict(label: &str, pass: bool, detail: &str) -> bool {
    let line = format!(
        "acceptance {label}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

/// Perturbed triangulation of the unit square as a mesh document.
pub fn triangle_document(n: usize) -> String {
    let mut doc = format!(
        "fracfv-mesh 1\nambient_dim 2\nsubdomains 1\nsubdomain 2 1 imported\nnodes {}\n",
        (n + 1) * (n + 1)
    );
    for j in 0..=n {
        for i in 0..=n {
            let (mut x, mut y) = (i as f64 / n as f64, j as f64 / n as f64);
            if i > 0 && i < n && j > 0 && j < n {
                x += 0.2 / n as f64 * (((i * 7 + j * 3) % 5) as f64 / 4.0 - 0.5);
                y += 0.2 / n as f64 * (((i * 2 + j * 5) % 3) as f64 / 2.0 - 0.5);
            }
            writeln!(doc, "{x:.17e} {y:.17e}").unwrap();
        }
    }
    writeln!(doc, "cells {} simplex", 2 * n * n).unwrap();
    let id = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..n {
        for i in 0..n {
            writeln!(doc, "3 {} {} {}", id(i, j), id(i + 1, j), id(i + 1, j + 1)).unwrap();
            writeln!(doc, "3 {} {} {}", id(i, j), id(i + 1, j + 1), id(i, j + 1)).unwrap();
        }
    }
    doc + "end\ninterfaces 0\n"
}

/// Perturbed Kuhn tetrahedralisation of the unit cube (six tetrahedra per
/// cube) as a mesh document.
pub fn tetrahedron_document(n: usize) -> String {
    let np = (n + 1) * (n + 1) * (n + 1);
    let mut doc = format!("fracfv-mesh 1\nambient_dim 3\nsubdomains 1\nsubdomain 3 1 imported\nnodes {np}\n");
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                let mut x = [i as f64, j as f64, k as f64].map(|v| v / n as f64);
                if [i, j, k].iter().all(|&v| v > 0 && v < n) {
                    let h = 0.15 / n as f64;
                    x[0] += h * (((i + 2 * j + 3 * k) % 5) as f64 / 4.0 - 0.5);
                    x[1] += h * (((3 * i + j + k) % 3) as f64 / 2.0 - 0.5);
                    x[2] += h * (((i + j + 2 * k) % 4) as f64 / 3.0 - 0.5);
                }
                writeln!(doc, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2]).unwrap();
            }
        }
    }
    writeln!(doc, "cells {} simplex", 6 * n * n * n).unwrap();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in perms {
                    let mut v = [i, j, k];
                    let mut ids = vec![id(v[0], v[1], v[2])];
                    for &a in &p {
                        v[a] += 1;
                        ids.push(id(v[0], v[1], v[2]));
                    }
                    writeln!(doc, "4 {} {} {} {}", ids[0], ids[1], ids[2], ids[3]).unwrap();
                }
            }
        }
    }
    doc + "end\ninterfaces 0\n"
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
