//! P1 finite-element matrices and the first-order shape-derivative forms.
//!
//! Volume forms use the 3-point edge-midpoint rule (exact for quadratics),
//! boundary forms use 2-point Gauss on each edge.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{MeshDomain, Point, ProblemKind, Tag};
use crate::linalg::{CsrMatrix, SparseCholesky};
use crate::perturb::{FieldEval, PerturbationField};

pub const VOLUME_QUADRATURE: &str = "triangle edge-midpoint rule, 3 points, degree 2";
pub const EDGE_QUADRATURE: &str = "Gauss-Legendre, 2 points per edge, degree 3";

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Stiffness,
    BoundaryMassS,
    Robin,
}

impl FormKind {
    pub fn name(self) -> &'static str {
        match self {
            FormKind::Stiffness => "stiffness",
            FormKind::BoundaryMassS => "boundary-mass-S",
            FormKind::Robin => "robin",
        }
    }
}

/// An assembled symmetric matrix over the mesh vertices.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub kind: FormKind,
    pub mesh_id: String,
    pub matrix: CsrMatrix,
}

impl FormMatrix {
    /// Coordinate text: a comment header, then one `i j value` line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut out = String::new();
        let quad = match self.kind {
            FormKind::Stiffness => VOLUME_QUADRATURE,
            FormKind::BoundaryMassS => EDGE_QUADRATURE,
            FormKind::Robin => "stiffness + boundary mass",
        };
        let _ = writeln!(out, "# form {} mesh {} quadrature {}", self.kind.name(), self.mesh_id, quad);
        let _ = writeln!(out, "# {} {} {}", self.matrix.nrows(), self.matrix.ncols(), self.matrix.nnz());
        for (i, j, v) in self.matrix.triplets() {
            let _ = writeln!(out, "{i} {j} {v:.17e}");
        }
        out
    }
}

/// Map between mesh vertices and free degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    free: Vec<usize>,
    full_to_free: Vec<Option<usize>>,
}

impl DofMap {
    pub fn identity(n: usize) -> Self {
        DofMap {
            free: (0..n).collect(),
            full_to_free: (0..n).map(Some).collect(),
        }
    }

    /// Free dofs for the given problem kind: every vertex except the `W`
    /// vertices (interface included) for Steklov-Dirichlet.
    pub fn for_kind(mesh: &MeshDomain, kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::SteklovDirichlet => {
                let mut fixed = vec![false; mesh.n_vertices()];
                for v in mesh.tagged_vertices(Tag::W) {
                    fixed[v] = true;
                }
                let free: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| !fixed[v]).collect();
                let mut full_to_free = vec![None; mesh.n_vertices()];
                for (k, &v) in free.iter().enumerate() {
                    full_to_free[v] = Some(k);
                }
                DofMap { free, full_to_free }
            }
            _ => DofMap::identity(mesh.n_vertices()),
        }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn n_full(&self) -> usize {
        self.full_to_free.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, vertex: usize) -> Option<usize> {
        self.full_to_free[vertex]
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| full[v]).collect()
    }

    /// Zero-extends a free-dof vector to all vertices.
    pub fn extend(&self, free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_full()];
        for (&v, &x) in self.free.iter().zip(free) {
            out[v] = x;
        }
        out
    }
}

/// Gradients of the three barycentric functions and the area of triangle `t`.
pub(crate) fn p1_gradients(mesh: &MeshDomain, t: usize) -> ([Point; 3], f64) {
    let [a, b, c] = mesh.triangles()[t];
    let p = mesh.vertices();
    let (p0, p1, p2) = (p[a], p[b], p[c]);
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let g = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (g, 0.5 * det)
}

fn grad_of(g: &[Point; 3], tri: [usize; 3], u: &[f64]) -> Point {
    let mut out = [0.0; 2];
    for k in 0..3 {
        out[0] += u[tri[k]] * g[k][0];
        out[1] += u[tri[k]] * g[k][1];
    }
    out
}

pub fn stiffness(mesh: &MeshDomain) -> FormMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
            }
        }
    }
    FormMatrix {
        kind: FormKind::Stiffness,
        mesh_id: mesh.id(),
        matrix: CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &trip),
    }
}

fn edge_mass(mesh: &MeshDomain, keep: impl Fn(Tag) -> bool) -> CsrMatrix {
    let mut trip = Vec::new();
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if !keep(edge.tag) {
            continue;
        }
        let l = mesh.edge_length(e);
        let [a, b] = edge.v;
        trip.extend([(a, a, l / 3.0), (b, b, l / 3.0), (a, b, l / 6.0), (b, a, l / 6.0)]);
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &trip)
}

/// Consistent (exactly integrated) P1 mass matrix of the `S` edges.
pub fn boundary_mass_s(mesh: &MeshDomain) -> FormMatrix {
    FormMatrix {
        kind: FormKind::BoundaryMassS,
        mesh_id: mesh.id(),
        matrix: edge_mass(mesh, |t| t == Tag::S),
    }
}

/// Boundary mass over one tag, or over the whole boundary when `region` is `None`.
pub fn boundary_mass(mesh: &MeshDomain, region: Option<Tag>) -> CsrMatrix {
    edge_mass(mesh, |t| region.map_or(true, |r| r == t))
}

pub fn robin_matrix(mesh: &MeshDomain) -> FormMatrix {
    let k = stiffness(mesh);
    let m = boundary_mass_s(mesh);
    FormMatrix {
        kind: FormKind::Robin,
        mesh_id: k.mesh_id,
        matrix: k.matrix.add(&m.matrix),
    }
}

/// Deletes the rows and columns of every `W` vertex (interface included).
pub fn dirichlet_restrict(matrix: &FormMatrix, mesh: &MeshDomain) -> Result<(CsrMatrix, DofMap)> {
    if !mesh.boundary_edges().iter().any(|e| e.tag == Tag::W) {
        return Err(Error::Unsupported("Dirichlet restriction needs a nonempty W boundary".into()));
    }
    if matrix.matrix.nrows() != mesh.n_vertices() {
        return Err(Error::invalid("matrix size does not match the mesh"));
    }
    let map = DofMap::for_kind(mesh, ProblemKind::SteklovDirichlet);
    Ok((matrix.matrix.principal_submatrix(map.free_dofs()), map))
}

fn check_vectors(mesh: &MeshDomain, vecs: &[&[f64]]) -> Result<()> {
    for v in vecs {
        if v.len() != mesh.n_vertices() {
            return Err(Error::invalid(format!(
                "nodal vector has length {}, mesh has {} vertices",
                v.len(),
                mesh.n_vertices()
            )));
        }
    }
    Ok(())
}

fn check_field(psi: &PerturbationField) -> Result<()> {
    if matches!(psi, PerturbationField::VertexTable { .. }) {
        return Err(Error::Unsupported("shape forms need an evaluable field".into()));
    }
    Ok(())
}

/// Field data at the three edge midpoints of triangle `t`, or `None` when
/// the field vanishes there identically.
fn midpoint_fields(mesh: &MeshDomain, psi: &PerturbationField, t: usize) -> Option<[(Point, FieldEval); 3]> {
    let [a, b, c] = mesh.triangles()[t];
    let p = mesh.vertices();
    let mid = |i: usize, j: usize| [(p[i][0] + p[j][0]) * 0.5, (p[i][1] + p[j][1]) * 0.5];
    if let Some([lo, hi]) = psi.support_box() {
        let xs = [p[a][0], p[b][0], p[c][0]];
        let ys = [p[a][1], p[b][1], p[c][1]];
        let (xmin, xmax) = (xs.iter().cloned().fold(f64::MAX, f64::min), xs.iter().cloned().fold(f64::MIN, f64::max));
        let (ymin, ymax) = (ys.iter().cloned().fold(f64::MAX, f64::min), ys.iter().cloned().fold(f64::MIN, f64::max));
        if xmax < lo[0] || xmin > hi[0] || ymax < lo[1] || ymin > hi[1] {
            return None;
        }
    }
    let q = [mid(a, b), mid(b, c), mid(c, a)];
    Some(q.map(|x| (x, psi.eval(x).expect("checked evaluable"))))
}

/// Integrand of the stiffness derivative for constant gradients and field Jacobian `j`.
fn da_density(gu: Point, gv: Point, j: &[[f64; 2]; 2]) -> f64 {
    let div = j[0][0] + j[1][1];
    let mut s = div * (gu[0] * gv[0] + gu[1] * gv[1]);
    for i in 0..2 {
        for k in 0..2 {
            s -= (gu[i] * gv[k] + gu[k] * gv[i]) * j[i][k];
        }
    }
    s
}

/// Matrix `[form_dA(psi, u_r, u_s)]` for a set of nodal vectors.
pub fn form_da_matrix(mesh: &MeshDomain, psi: &PerturbationField, vecs: &[&[f64]]) -> Result<DMatrix<f64>> {
    check_field(psi)?;
    check_vectors(mesh, vecs)?;
    let m = vecs.len();
    let mut out = DMatrix::zeros(m, m);
    for t in 0..mesh.n_triangles() {
        let Some(q) = midpoint_fields(mesh, psi, t) else { continue };
        let (g, area) = p1_gradients(mesh, t);
        let tri = mesh.triangles()[t];
        let grads: Vec<Point> = vecs.iter().map(|u| grad_of(&g, tri, u)).collect();
        for r in 0..m {
            for s in r..m {
                let val: f64 = q.iter().map(|(_, e)| da_density(grads[r], grads[s], &e.jacobian)).sum::<f64>() * area / 3.0;
                out[(r, s)] += val;
                if s != r {
                    out[(s, r)] += val;
                }
            }
        }
    }
    Ok(out)
}

/// `int div(psi) grad u . grad v - (d_i u d_j v + d_j u d_i v) d_j psi_i`.
pub fn form_da(mesh: &MeshDomain, psi: &PerturbationField, u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(form_da_matrix(mesh, psi, &[u, v])?[(0, 1)])
}

/// Matrix `[form_dB(psi, u_r, u_s)]` over `region` (`None` = whole boundary).
pub fn form_db_matrix(mesh: &MeshDomain, psi: &PerturbationField, vecs: &[&[f64]], region: Option<Tag>) -> Result<DMatrix<f64>> {
    check_field(psi)?;
    check_vectors(mesh, vecs)?;
    let m = vecs.len();
    let mut out = DMatrix::zeros(m, m);
    let p = mesh.vertices();
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if region.is_some_and(|r| r != edge.tag) {
            continue;
        }
        let [a, b] = edge.v;
        let n = mesh.normal(e);
        let l = mesh.edge_length(e);
        for &xi in &GAUSS2 {
            let x = [p[a][0] + xi * (p[b][0] - p[a][0]), p[a][1] + xi * (p[b][1] - p[a][1])];
            let f = psi.eval(x)?;
            let j = f.jacobian;
            let nn = n[0] * (j[0][0] * n[0] + j[0][1] * n[1]) + n[1] * (j[1][0] * n[0] + j[1][1] * n[1]);
            let w = 0.5 * l * (f.divergence - nn);
            if w == 0.0 {
                continue;
            }
            let vals: Vec<f64> = vecs.iter().map(|u| (1.0 - xi) * u[a] + xi * u[b]).collect();
            for r in 0..m {
                for s in r..m {
                    let val = w * vals[r] * vals[s];
                    out[(r, s)] += val;
                    if s != r {
                        out[(s, r)] += val;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `int_region u v (div psi - nu . (D psi) nu) dsigma`.
pub fn form_db(mesh: &MeshDomain, psi: &PerturbationField, u: &[f64], v: &[f64], region: Option<Tag>) -> Result<f64> {
    Ok(form_db_matrix(mesh, psi, &[u, v], region)?[(0, 1)])
}

/// `int u v div(psi) + psi . grad(u v)`: the derivative of `int u v` under the flow.
pub fn form_dv(mesh: &MeshDomain, psi: &PerturbationField, u: &[f64], v: &[f64]) -> Result<f64> {
    check_field(psi)?;
    check_vectors(mesh, &[u, v])?;
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let Some(q) = midpoint_fields(mesh, psi, t) else { continue };
        let (g, area) = p1_gradients(mesh, t);
        let tri = mesh.triangles()[t];
        let (gu, gv) = (grad_of(&g, tri, u), grad_of(&g, tri, v));
        // barycentric coordinates of the edge midpoints (ab, bc, ca)
        const BARY: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
        let mut s = 0.0;
        for (k, (_, f)) in q.iter().enumerate() {
            let uq: f64 = (0..3).map(|i| BARY[k][i] * u[tri[i]]).sum();
            let vq: f64 = (0..3).map(|i| BARY[k][i] * v[tri[i]]).sum();
            let grad_uv = [uq * gv[0] + vq * gu[0], uq * gv[1] + vq * gu[1]];
            s += uq * vq * f.divergence + f.value[0] * grad_uv[0] + f.value[1] * grad_uv[1];
        }
        total += s * area / 3.0;
    }
    Ok(total)
}

fn nodal_jacobian(g: &[Point; 3], tri: [usize; 3], vel: &[Point]) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for k in 0..3 {
        for a in 0..2 {
            for b in 0..2 {
                j[a][b] += vel[tri[k]][a] * g[k][b];
            }
        }
    }
    j
}

/// Exact derivative of `u^T K v` when every vertex moves with `velocities`
/// and the nodal values are held fixed.
pub fn form_da_nodal(mesh: &MeshDomain, velocities: &[Point], u: &[f64], v: &[f64]) -> Result<f64> {
    check_vectors(mesh, &[u, v])?;
    if velocities.len() != mesh.n_vertices() {
        return Err(Error::invalid("one velocity per vertex is required"));
    }
    let mut total = 0.0;
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(mesh, t);
        let j = nodal_jacobian(&g, tri, velocities);
        total += area * da_density(grad_of(&g, tri, u), grad_of(&g, tri, v), &j);
    }
    Ok(total)
}

/// Exact derivative of `u^T M_region v` under vertex velocities.
pub fn form_db_nodal(mesh: &MeshDomain, velocities: &[Point], u: &[f64], v: &[f64], region: Option<Tag>) -> Result<f64> {
    check_vectors(mesh, &[u, v])?;
    if velocities.len() != mesh.n_vertices() {
        return Err(Error::invalid("one velocity per vertex is required"));
    }
    let p = mesh.vertices();
    let mut total = 0.0;
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if region.is_some_and(|r| r != edge.tag) {
            continue;
        }
        let [a, b] = edge.v;
        let l = mesh.edge_length(e);
        let tau = [(p[b][0] - p[a][0]) / l, (p[b][1] - p[a][1]) / l];
        let dl = tau[0] * (velocities[b][0] - velocities[a][0]) + tau[1] * (velocities[b][1] - velocities[a][1]);
        let q = (2.0 * u[a] * v[a] + u[a] * v[b] + u[b] * v[a] + 2.0 * u[b] * v[b]) / 6.0;
        total += dl * q;
    }
    Ok(total)
}

/// Normal derivative recovered on the vertices of one boundary portion.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFlux {
    pub region: Tag,
    pub vertices: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryFlux {
    /// Value at a mesh vertex, zero off the region.
    pub fn at(&self, vertex: usize) -> f64 {
        self.vertices.binary_search(&vertex).map_or(0.0, |k| self.values[k])
    }

    /// Mean of the two endpoint values on every edge of the region.
    pub fn edge_values(&self, mesh: &MeshDomain) -> Vec<(usize, f64)> {
        mesh.boundary_edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.tag == self.region)
            .map(|(k, e)| (k, 0.5 * (self.at(e.v[0]) + self.at(e.v[1]))))
            .collect()
    }
}

/// Residual-based flux: solves `M_region g = (K e - lambda M_S e)|_region`.
///
/// `e` is a nodal vector on all vertices (zero on `W` for Steklov-Dirichlet).
pub fn flux_recovery(mesh: &MeshDomain, e: &[f64], lambda: f64, region: Tag) -> Result<BoundaryFlux> {
    check_vectors(mesh, &[e])?;
    let vertices = mesh.tagged_vertices(region);
    if vertices.is_empty() || mesh.boundary_length(Some(region)) <= 0.0 {
        return Err(Error::invalid(format!("region {region} has zero measure")));
    }
    let k = stiffness(mesh).matrix;
    let ms = boundary_mass_s(mesh).matrix;
    let ke = k.mul_vec(e);
    let me = ms.mul_vec(e);
    let rhs: Vec<f64> = vertices.iter().map(|&v| ke[v] - lambda * me[v]).collect();
    let mr = boundary_mass(mesh, Some(region)).principal_submatrix(&vertices);
    let values = SparseCholesky::factor(&mr)?.solve(&rhs);
    Ok(BoundaryFlux { region, vertices, values })
}
