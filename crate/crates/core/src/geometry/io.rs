//! Line-oriented mesh text format.
//!
//! ```text
//! mesh2d v1
//! v <x> <y>
//! t <i> <j> <k>
//! b <i> <j> <S|W>
//! ```
//!
//! Indices are 0-based; coordinates are written with 17 significant digits
//! so a write/read cycle reproduces every coordinate bit for bit. Blank lines
//! and lines starting with `#` are ignored by the reader.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryEdge, MeshDomain, Tag};
use crate::error::{Error, Result};

pub const HEADER: &str = "mesh2d v1";

pub fn write_mesh(mesh: &MeshDomain) -> String {
    let mut out = String::with_capacity(64 * mesh.n_vertices());
    out.push_str(HEADER);
    out.push('\n');
    for p in mesh.vertices() {
        let _ = writeln!(out, "v {:.16e} {:.16e}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for e in mesh.boundary_edges() {
        let _ = writeln!(out, "b {} {} {}", e.v[0], e.v[1], e.tag);
    }
    out
}

pub fn read_mesh(text: &str) -> Result<MeshDomain> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((line, h)) => return Err(Error::Parse { line, msg: format!("expected `{HEADER}`, found `{h}`") }),
        None => return Err(Error::Parse { line: 0, msg: "empty mesh file".into() }),
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let err = |msg: &str| Error::Parse { line, msg: format!("{msg}: `{l}`") };
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad coordinate"));
        let ix = |s: &str| s.parse::<usize>().map_err(|_| err("bad index"));
        match (fields[0], fields.len()) {
            ("v", 3) => vertices.push([num(fields[1])?, num(fields[2])?]),
            ("t", 4) => triangles.push([ix(fields[1])?, ix(fields[2])?, ix(fields[3])?]),
            ("b", 4) => boundary.push(BoundaryEdge {
                v: [ix(fields[1])?, ix(fields[2])?],
                tag: fields[3].parse::<Tag>().map_err(|_| err("bad tag"))?,
                arc: None,
            }),
            _ => return Err(err("unrecognized record")),
        }
    }
    Ok(MeshDomain::from_parts(vertices, triangles, boundary))
}

pub fn write_mesh_file(mesh: &MeshDomain, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<MeshDomain> {
    read_mesh(&std::fs::read_to_string(path)?)
}
