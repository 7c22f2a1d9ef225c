//! Tagged 2D triangulations: the free surface `S`, the walls `W` and the
//! interface vertices where they meet.

mod builders;
mod io;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builders::{build_disk, build_half_disk, build_rectangle, build_rectangle_graded, refine};
pub use io::{read_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub use validate::{validate_mesh, MeshIssue, MeshReport};

pub type Point = [f64; 2];

/// Boundary portion an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    /// Free surface, carries the Steklov condition.
    S,
    /// Walls, Neumann or Dirichlet depending on the problem kind.
    W,
}

impl Tag {
    pub fn opposite(self) -> Tag {
        match self {
            Tag::S => Tag::W,
            Tag::W => Tag::S,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::S => "S",
            Tag::W => "W",
        })
    }
}

impl FromStr for Tag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tag> {
        match s.trim() {
            "S" | "s" => Ok(Tag::S),
            "W" | "w" => Ok(Tag::W),
            other => Err(Error::invalid(format!("unknown boundary tag `{other}`"))),
        }
    }
}

/// The three eigenproblems the laboratory solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// Steklov on `S`, `u = 0` on `W`.
    SteklovDirichlet,
    /// Steklov on `S`, `du/dn = 0` on `W` (the sloshing problem).
    SteklovNeumann,
    /// Steklov on the whole boundary, `W` empty.
    PureSteklov,
}

impl ProblemKind {
    /// Robin-shifted kinds solve with `a + m_S` and report `lambda = lambda_hat - 1`.
    pub fn is_robin_shifted(self) -> bool {
        !matches!(self, ProblemKind::SteklovDirichlet)
    }

    pub fn check_mesh(self, mesh: &MeshDomain) -> Result<()> {
        let has_w = mesh.boundary_edges().iter().any(|e| e.tag == Tag::W);
        let has_s = mesh.boundary_edges().iter().any(|e| e.tag == Tag::S);
        let reason = match self {
            _ if !has_s => Some("the free surface S is empty"),
            ProblemKind::SteklovDirichlet | ProblemKind::SteklovNeumann if !has_w => {
                Some("requires a nonempty W boundary")
            }
            ProblemKind::PureSteklov if has_w => Some("requires W to be empty"),
            _ => None,
        };
        match reason {
            Some(r) => Err(Error::IncompatibleKind {
                kind: self.to_string(),
                reason: r.to_string(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::SteklovDirichlet => "sd",
            ProblemKind::SteklovNeumann => "sn",
            ProblemKind::PureSteklov => "steklov",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<ProblemKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sd" | "steklov-dirichlet" => Ok(ProblemKind::SteklovDirichlet),
            "sn" | "steklov-neumann" | "sloshing" => Ok(ProblemKind::SteklovNeumann),
            "steklov" | "pure" | "pure-steklov" => Ok(ProblemKind::PureSteklov),
            other => Err(Error::invalid(format!("unknown problem kind `{other}`"))),
        }
    }
}

/// Circle carrying a curved boundary portion; used to project refinement
/// midpoints back onto the true boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: Point,
    pub radius: f64,
}

impl Arc {
    pub fn project(&self, p: Point) -> Point {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [
            self.center[0] + self.radius * d[0] / r,
            self.center[1] + self.radius * d[1] / r,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints, oriented so the domain lies to the left of `v[0] -> v[1]`.
    pub v: [usize; 2],
    pub tag: Tag,
    pub arc: Option<Arc>,
}

/// Immutable tagged triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDomain {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    normals: Vec<Point>,
    interface: Vec<usize>,
}

impl MeshDomain {
    /// Assembles a mesh from raw parts. Boundary edges are re-oriented to
    /// agree with their owning triangle when one exists; nothing is
    /// validated here (see [`validate_mesh`]).
    pub fn from_parts(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, boundary: Vec<BoundaryEdge>) -> Self {
        let n = vertices.len();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                directed.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        let boundary: Vec<BoundaryEdge> = boundary
            .into_iter()
            .map(|mut e| {
                if !directed.contains_key(&(e.v[0], e.v[1])) && directed.contains_key(&(e.v[1], e.v[0])) {
                    e.v.swap(0, 1);
                }
                e
            })
            .collect();
        let normals = boundary
            .iter()
            .map(|e| {
                if e.v[0] >= n || e.v[1] >= n {
                    return [f64::NAN, f64::NAN];
                }
                let a = vertices[e.v[0]];
                let b = vertices[e.v[1]];
                let d = [b[0] - a[0], b[1] - a[1]];
                let l = (d[0] * d[0] + d[1] * d[1]).sqrt();
                [d[1] / l, -d[0] / l]
            })
            .collect();
        let mut touches = vec![(false, false); n];
        for e in &boundary {
            for &v in &e.v {
                if v < n {
                    match e.tag {
                        Tag::S => touches[v].0 = true,
                        Tag::W => touches[v].1 = true,
                    }
                }
            }
        }
        let interface = (0..n).filter(|&v| touches[v].0 && touches[v].1).collect();
        MeshDomain {
            vertices,
            triangles,
            boundary,
            normals,
            interface,
        }
    }

    /// Like [`MeshDomain::from_parts`] but rejects meshes with any invariant violation.
    pub fn try_new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, boundary: Vec<BoundaryEdge>) -> Result<Self> {
        let mesh = Self::from_parts(vertices, triangles, boundary);
        let report = validate_mesh(&mesh);
        if report.is_valid() {
            Ok(mesh)
        } else {
            Err(Error::InvalidMesh(report.to_string()))
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Outward unit normal of boundary edge `e`.
    pub fn normal(&self, e: usize) -> Point {
        self.normals[e]
    }

    pub fn interface_vertices(&self) -> &[usize] {
        &self.interface
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.boundary[e].v;
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn boundary_length(&self, tag: Option<Tag>) -> f64 {
        (0..self.boundary.len())
            .filter(|&e| tag.map_or(true, |t| self.boundary[e].tag == t))
            .map(|e| self.edge_length(e))
            .sum()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Vertices lying on at least one edge with the given tag.
    pub fn tagged_vertices(&self, tag: Tag) -> Vec<usize> {
        let mut flag = vec![false; self.vertices.len()];
        for e in self.boundary.iter().filter(|e| e.tag == tag) {
            flag[e.v[0]] = true;
            flag[e.v[1]] = true;
        }
        (0..flag.len()).filter(|&v| flag[v]).collect()
    }

    /// Vertices on any boundary edge.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut flag = vec![false; self.vertices.len()];
        for e in &self.boundary {
            flag[e.v[0]] = true;
            flag[e.v[1]] = true;
        }
        (0..flag.len()).filter(|&v| flag[v]).collect()
    }

    /// Number of distinct (undirected) edges.
    pub fn n_edges(&self) -> usize {
        let mut edges = std::collections::BTreeSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// Triangle owning each boundary edge (`None` for dangling edges).
    pub fn boundary_owners(&self) -> Vec<Option<usize>> {
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                directed.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        self.boundary
            .iter()
            .map(|e| directed.get(&(e.v[0], e.v[1])).copied())
            .collect()
    }

    pub fn bbox(&self) -> [Point; 2] {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        [lo, hi]
    }

    /// Stable fingerprint of coordinates, connectivity and tags.
    pub fn id(&self) -> String {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for p in &self.vertices {
            p[0].to_bits().hash(&mut h);
            p[1].to_bits().hash(&mut h);
        }
        self.triangles.hash(&mut h);
        for e in &self.boundary {
            e.v.hash(&mut h);
            e.tag.hash(&mut h);
        }
        format!("{:016x}", h.finish())
    }

    /// Same connectivity and tags, new coordinates. Curved-arc metadata is
    /// dropped unless the coordinates are unchanged.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> MeshDomain {
        assert_eq!(vertices.len(), self.vertices.len());
        let keep_arcs = vertices == self.vertices;
        let boundary = self
            .boundary
            .iter()
            .map(|e| BoundaryEdge {
                arc: if keep_arcs { e.arc } else { None },
                ..*e
            })
            .collect();
        MeshDomain::from_parts(vertices, self.triangles.clone(), boundary)
    }

    /// The same mesh with vertices renumbered by `perm` (new index of old vertex `v` is `perm[v]`).
    pub fn permuted(&self, perm: &[usize]) -> MeshDomain {
        let n = self.vertices.len();
        assert_eq!(perm.len(), n);
        let mut vertices = vec![[0.0; 2]; n];
        for v in 0..n {
            vertices[perm[v]] = self.vertices[v];
        }
        let triangles = self.triangles.iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect();
        let boundary = self
            .boundary
            .iter()
            .map(|e| BoundaryEdge {
                v: [perm[e.v[0]], perm[e.v[1]]],
                ..*e
            })
            .collect();
        MeshDomain::from_parts(vertices, triangles, boundary)
    }

    /// Closest point to `p` on the boundary edges carrying `tag` (any tag if `None`),
    /// returned with the edge index.
    pub fn nearest_boundary_point(&self, p: Point, tag: Option<Tag>) -> Option<(Point, usize)> {
        let mut best: Option<(f64, Point, usize)> = None;
        for (k, e) in self.boundary.iter().enumerate() {
            if tag.is_some_and(|t| t != e.tag) {
                continue;
            }
            let q = closest_on_segment(p, self.vertices[e.v[0]], self.vertices[e.v[1]]);
            let d = dist(p, q);
            if best.map_or(true, |b| d < b.0) {
                best = Some((d, q, k));
            }
        }
        best.map(|(_, q, k)| (q, k))
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub(crate) fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    if l2 == 0.0 {
        return a;
    }
    let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
    [a[0] + s * d[0], a[1] + s * d[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_compatibility() {
        let rect = build_rectangle(1.0, 1.0, 2, 2).unwrap();
        let disk = build_disk(1, 3).unwrap();
        assert!(ProblemKind::SteklovDirichlet.check_mesh(&rect).is_ok());
        assert!(ProblemKind::SteklovNeumann.check_mesh(&rect).is_ok());
        assert!(ProblemKind::PureSteklov.check_mesh(&rect).is_err());
        assert!(ProblemKind::PureSteklov.check_mesh(&disk).is_ok());
        assert!(ProblemKind::SteklovNeumann.check_mesh(&disk).is_err());
    }

    #[test]
    fn kind_and_tag_parse() {
        assert_eq!("sn".parse::<ProblemKind>().unwrap(), ProblemKind::SteklovNeumann);
        assert_eq!("steklov".parse::<ProblemKind>().unwrap(), ProblemKind::PureSteklov);
        assert_eq!("W".parse::<Tag>().unwrap(), Tag::W);
        assert!("X".parse::<Tag>().is_err());
    }

    #[test]
    fn boundary_edges_reoriented_and_normals_outward() {
        let rect = build_rectangle(2.0, 1.0, 4, 3).unwrap();
        for (k, e) in rect.boundary_edges().iter().enumerate() {
            let n = rect.normal(k);
            let a = rect.vertices()[e.v[0]];
            let b = rect.vertices()[e.v[1]];
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            // outward: moving along n leaves the rectangle [0,2]x[-1,0]
            let out = [mid[0] + 1e-3 * n[0], mid[1] + 1e-3 * n[1]];
            let inside = out[0] > 0.0 && out[0] < 2.0 && out[1] > -1.0 && out[1] < 0.0;
            assert!(!inside, "edge {k} normal {n:?} points inward");
        }
    }

    #[test]
    fn permutation_preserves_structure() {
        let rect = build_rectangle(1.0, 1.0, 3, 2).unwrap();
        let n = rect.n_vertices();
        let perm: Vec<usize> = (0..n).map(|v| (v * 5 + 3) % n).collect();
        let p = rect.permuted(&perm);
        assert!(validate_mesh(&p).is_valid());
        assert_eq!(p.interface_vertices().len(), 2);
        assert!((p.area() - rect.area()).abs() < 1e-14);
    }
}
