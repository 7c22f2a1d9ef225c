use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{MeshDomain, Tag};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MeshIssue {
    IndexOutOfRange { triangle: Option<usize>, boundary_edge: Option<usize>, index: usize },
    NonPositiveArea { triangle: usize, area: f64 },
    /// An edge shared by more than two triangles.
    NonManifoldEdge { a: usize, b: usize, triangles: usize },
    /// Edge with one owning triangle but no boundary tag.
    UntaggedBoundaryEdge { a: usize, b: usize },
    /// Tagged edge that is not a boundary edge of the triangulation.
    TaggedInteriorEdge { a: usize, b: usize, tag: Tag },
    DuplicateBoundaryEdge { a: usize, b: usize },
    NonFiniteCoordinate { vertex: usize },
}

impl fmt::Display for MeshIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshIssue::IndexOutOfRange { triangle, boundary_edge, index } => {
                write!(f, "vertex index {index} out of range (triangle {triangle:?}, boundary edge {boundary_edge:?})")
            }
            MeshIssue::NonPositiveArea { triangle, area } => write!(f, "triangle {triangle} has signed area {area:e}"),
            MeshIssue::NonManifoldEdge { a, b, triangles } => write!(f, "edge ({a},{b}) shared by {triangles} triangles"),
            MeshIssue::UntaggedBoundaryEdge { a, b } => write!(f, "boundary edge ({a},{b}) carries no tag"),
            MeshIssue::TaggedInteriorEdge { a, b, tag } => write!(f, "edge ({a},{b}) tagged {tag} is not on the boundary"),
            MeshIssue::DuplicateBoundaryEdge { a, b } => write!(f, "boundary edge ({a},{b}) listed more than once"),
            MeshIssue::NonFiniteCoordinate { vertex } => write!(f, "vertex {vertex} has a non-finite coordinate"),
        }
    }
}

/// Every invariant violation found in a mesh; empty iff the mesh is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MeshReport {
    pub issues: Vec<MeshIssue>,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for MeshReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("mesh is valid");
        }
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub fn validate_mesh(mesh: &MeshDomain) -> MeshReport {
    let mut issues = Vec::new();
    let n = mesh.n_vertices();
    for (v, p) in mesh.vertices().iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            issues.push(MeshIssue::NonFiniteCoordinate { vertex: v });
        }
    }
    let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if let Some(&bad) = tri.iter().find(|&&v| v >= n) {
            issues.push(MeshIssue::IndexOutOfRange { triangle: Some(t), boundary_edge: None, index: bad });
            continue;
        }
        let area = mesh.signed_area(t);
        if !(area > 0.0) {
            issues.push(MeshIssue::NonPositiveArea { triangle: t, area });
        }
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut tagged: BTreeMap<(usize, usize), Tag> = BTreeMap::new();
    for (k, e) in mesh.boundary_edges().iter().enumerate() {
        if let Some(&bad) = e.v.iter().find(|&&v| v >= n) {
            issues.push(MeshIssue::IndexOutOfRange { triangle: None, boundary_edge: Some(k), index: bad });
            continue;
        }
        let key = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
        if tagged.insert(key, e.tag).is_some() {
            issues.push(MeshIssue::DuplicateBoundaryEdge { a: key.0, b: key.1 });
        }
    }
    for (&(a, b), &count) in &edge_count {
        if count > 2 {
            issues.push(MeshIssue::NonManifoldEdge { a, b, triangles: count });
        } else if count == 1 && !tagged.contains_key(&(a, b)) {
            issues.push(MeshIssue::UntaggedBoundaryEdge { a, b });
        }
    }
    for (&(a, b), &tag) in &tagged {
        if edge_count.get(&(a, b)).copied() != Some(1) {
            issues.push(MeshIssue::TaggedInteriorEdge { a, b, tag });
        }
    }
    MeshReport { issues }
}
