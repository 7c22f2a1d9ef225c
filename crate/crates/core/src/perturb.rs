//! Domain perturbation fields `psi` and mesh transplantation by `I + t psi`.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, MeshDomain, Point, Tag};

/// Default sampling density (samples per support diameter) for the C² norm estimate.
pub const DEFAULT_C2_DENSITY: usize = 64;

/// Unit-amplitude profile `(1 - (r/R)^2)^3`, C² with compact support.
fn profile(d2: f64, r2: f64) -> (f64, f64) {
    let s = d2 / r2;
    if s >= 1.0 {
        (0.0, 0.0)
    } else {
        let w = 1.0 - s;
        // value and d(value)/d(d2)
        (w * w * w, -3.0 * w * w / r2)
    }
}

/// Extension of the outward normal around a bump anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NormalModel {
    /// Flat boundary piece: the normal is constant.
    Constant { n: Point },
    /// Circular boundary piece: `sign * (x - center) / |x - center|`.
    Radial { center: Point, sign: f64 },
}

impl NormalModel {
    /// Value and Jacobian `dN_i/dx_j`.
    fn eval(&self, x: Point) -> (Point, [[f64; 2]; 2]) {
        match *self {
            NormalModel::Constant { n } => (n, [[0.0; 2]; 2]),
            NormalModel::Radial { center, sign } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let n = [d[0] / rho, d[1] / rho];
                let mut j = [[0.0; 2]; 2];
                for (i, row) in j.iter_mut().enumerate() {
                    for (k, v) in row.iter_mut().enumerate() {
                        let delta = if i == k { 1.0 } else { 0.0 };
                        *v = sign * (delta - n[i] * n[k]) / rho;
                    }
                }
                ([sign * n[0], sign * n[1]], j)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalBump {
    pub anchor: Point,
    pub radius: f64,
    pub amplitude: f64,
    pub side: Tag,
    pub normal: NormalModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorBump {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
    /// Unit direction of the displacement.
    pub direction: Point,
}

/// A perturbation field in the C² class used for domain variations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationField {
    /// `psi = alpha(x) N(x)` localized on one boundary side.
    NormalBump(NormalBump),
    /// `psi = alpha(x) d`, supported strictly inside the domain.
    InteriorBump(InteriorBump),
    /// `psi(x) = A x + b`.
    Affine { a: [[f64; 2]; 2], b: Point },
    /// Raw per-vertex displacements. Not a C² field; only usable for transplants.
    VertexTable { displacements: Vec<Point> },
}

/// Value, Jacobian (`jacobian[i][j] = d psi_i / d x_j`) and divergence at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: Point,
    pub jacobian: [[f64; 2]; 2],
    pub divergence: f64,
}

impl FieldEval {
    const ZERO: FieldEval = FieldEval {
        value: [0.0; 2],
        jacobian: [[0.0; 2]; 2],
        divergence: 0.0,
    };
}

impl PerturbationField {
    pub fn zero() -> Self {
        Self::translation([0.0, 0.0])
    }

    pub fn translation(b: Point) -> Self {
        PerturbationField::Affine { a: [[0.0; 2]; 2], b }
    }

    /// `psi(x) = x`.
    pub fn dilation() -> Self {
        PerturbationField::Affine {
            a: [[1.0, 0.0], [0.0, 1.0]],
            b: [0.0, 0.0],
        }
    }

    pub fn eval(&self, x: Point) -> Result<FieldEval> {
        match self {
            PerturbationField::NormalBump(nb) => {
                let d = [x[0] - nb.anchor[0], x[1] - nb.anchor[1]];
                let (p, dp) = profile(d[0] * d[0] + d[1] * d[1], nb.radius * nb.radius);
                if p == 0.0 {
                    return Ok(FieldEval::ZERO);
                }
                let alpha = nb.amplitude * p;
                let grad = [nb.amplitude * dp * 2.0 * d[0], nb.amplitude * dp * 2.0 * d[1]];
                let (n, dn) = nb.normal.eval(x);
                let mut jac = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        jac[i][j] = n[i] * grad[j] + alpha * dn[i][j];
                    }
                }
                Ok(FieldEval {
                    value: [alpha * n[0], alpha * n[1]],
                    jacobian: jac,
                    divergence: jac[0][0] + jac[1][1],
                })
            }
            PerturbationField::InteriorBump(ib) => {
                let d = [x[0] - ib.center[0], x[1] - ib.center[1]];
                let (p, dp) = profile(d[0] * d[0] + d[1] * d[1], ib.radius * ib.radius);
                if p == 0.0 {
                    return Ok(FieldEval::ZERO);
                }
                let u = ib.direction;
                let grad = [ib.amplitude * dp * 2.0 * d[0], ib.amplitude * dp * 2.0 * d[1]];
                let jac = [[u[0] * grad[0], u[0] * grad[1]], [u[1] * grad[0], u[1] * grad[1]]];
                Ok(FieldEval {
                    value: [ib.amplitude * p * u[0], ib.amplitude * p * u[1]],
                    jacobian: jac,
                    divergence: jac[0][0] + jac[1][1],
                })
            }
            PerturbationField::Affine { a, b } => Ok(FieldEval {
                value: [a[0][0] * x[0] + a[0][1] * x[1] + b[0], a[1][0] * x[0] + a[1][1] * x[1] + b[1]],
                jacobian: *a,
                divergence: a[0][0] + a[1][1],
            }),
            PerturbationField::VertexTable { .. } => Err(Error::Unsupported(
                "vertex-table fields have no pointwise evaluator".into(),
            )),
        }
    }

    /// Displacement of every mesh vertex.
    pub fn vertex_values(&self, mesh: &MeshDomain) -> Result<Vec<Point>> {
        match self {
            PerturbationField::VertexTable { displacements } => {
                if displacements.len() != mesh.n_vertices() {
                    return Err(Error::invalid(format!(
                        "vertex table has {} entries, mesh has {} vertices",
                        displacements.len(),
                        mesh.n_vertices()
                    )));
                }
                Ok(displacements.clone())
            }
            _ => mesh.vertices().iter().map(|&x| self.eval(x).map(|e| e.value)).collect(),
        }
    }

    /// Axis-aligned box containing the support, if compact.
    pub fn support_box(&self) -> Option<[Point; 2]> {
        let (c, r) = match self {
            PerturbationField::NormalBump(nb) => (nb.anchor, nb.radius),
            PerturbationField::InteriorBump(ib) => (ib.center, ib.radius),
            _ => return None,
        };
        Some([[c[0] - r, c[1] - r], [c[0] + r, c[1] + r]])
    }

    /// Estimate of `max_{i=0,1,2} sup |D^i psi|`, sampled on the support (or
    /// on `[-1,1]^2` for affine fields).
    pub fn c2_norm_estimate(&self, density: usize) -> f64 {
        let window = self.support_box().unwrap_or([[-1.0, -1.0], [1.0, 1.0]]);
        self.c2_norm_estimate_in(window, density)
    }

    /// Like [`Self::c2_norm_estimate`], sampled on `window` (intersected with the support).
    ///
    /// The sample set for density `d` contains the sets of every smaller
    /// density, so the estimate is nondecreasing in `d`. Second derivatives
    /// come from central differences of the analytic Jacobian.
    pub fn c2_norm_estimate_in(&self, window: [Point; 2], density: usize) -> f64 {
        if let PerturbationField::VertexTable { displacements } = self {
            return displacements.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
        }
        let window = match self.support_box() {
            Some(sb) => [
                [window[0][0].max(sb[0][0]), window[0][1].max(sb[0][1])],
                [window[1][0].min(sb[1][0]), window[1][1].min(sb[1][1])],
            ],
            None => window,
        };
        if window[0][0] > window[1][0] || window[0][1] > window[1][1] {
            return 0.0;
        }
        let span = (window[1][0] - window[0][0]).max(window[1][1] - window[0][1]);
        let h = 1e-5 * span.max(1e-12);
        let mut sup = 0.0f64;
        for d in 2..=density.max(2) {
            for i in 0..=d {
                for j in 0..=d {
                    let x = [
                        window[0][0] + (window[1][0] - window[0][0]) * (i as f64 / d as f64),
                        window[0][1] + (window[1][1] - window[0][1]) * (j as f64 / d as f64),
                    ];
                    let e = self.eval(x).expect("evaluable field");
                    sup = sup.max(e.value[0].hypot(e.value[1]));
                    sup = sup.max(op_norm(&e.jacobian));
                    let mut second = 0.0;
                    for k in 0..2 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[k] += h;
                        xm[k] -= h;
                        let jp = self.eval(xp).expect("evaluable field").jacobian;
                        let jm = self.eval(xm).expect("evaluable field").jacobian;
                        for a in 0..2 {
                            for b in 0..2 {
                                second += ((jp[a][b] - jm[a][b]) / (2.0 * h)).powi(2);
                            }
                        }
                    }
                    sup = sup.max(second.sqrt());
                }
            }
        }
        sup
    }

    /// Same field with every displacement multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            PerturbationField::NormalBump(nb) => PerturbationField::NormalBump(NormalBump {
                amplitude: nb.amplitude * s,
                ..*nb
            }),
            PerturbationField::InteriorBump(ib) => PerturbationField::InteriorBump(InteriorBump {
                amplitude: ib.amplitude * s,
                ..*ib
            }),
            PerturbationField::Affine { a, b } => PerturbationField::Affine {
                a: [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]],
                b: [b[0] * s, b[1] * s],
            },
            PerturbationField::VertexTable { displacements } => PerturbationField::VertexTable {
                displacements: displacements.iter().map(|d| [d[0] * s, d[1] * s]).collect(),
            },
        }
    }

    /// True when `psi` vanishes at every vertex of the `tag` boundary portion.
    pub fn vanishes_on(&self, mesh: &MeshDomain, tag: Tag) -> Result<bool> {
        let values = self.vertex_values(mesh)?;
        Ok(mesh.tagged_vertices(tag).iter().all(|&v| values[v] == [0.0, 0.0]))
    }

    pub fn id(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        json.hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

fn op_norm(m: &[[f64; 2]; 2]) -> f64 {
    // largest singular value of a 2x2 matrix
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (s1 + disc)).sqrt()
}

/// Normal bump anchored at the boundary point nearest to `anchor`.
///
/// The support (a disk of the given radius) must meet only boundary edges
/// of the requested side and must stay clear of the interface vertices.
pub fn normal_bump(mesh: &MeshDomain, anchor: Point, radius: f64, amplitude: f64, side: Tag) -> Result<PerturbationField> {
    if !(radius > 0.0 && radius.is_finite()) || !amplitude.is_finite() {
        return Err(Error::invalid(format!("bump needs radius > 0 and finite amplitude (got {radius}, {amplitude})")));
    }
    let (q, e) = mesh
        .nearest_boundary_point(anchor, None)
        .ok_or_else(|| Error::invalid("mesh has no boundary"))?;
    let [lo, hi] = mesh.bbox();
    let diam = dist(lo, hi);
    // polygonal arcs sit inside the true circle by a fraction of an edge
    if dist(q, anchor) > (1e-6 * diam).max(0.5 * mesh.edge_length(e)) {
        return Err(Error::invalid(format!("anchor {anchor:?} is not on the boundary")));
    }
    let edge = mesh.boundary_edges()[e];
    let q = match edge.arc {
        Some(arc) => arc.project(anchor),
        None => q,
    };
    if edge.tag != side {
        return Err(Error::InvalidSupport(format!(
            "anchor lies on {} but the bump was requested on {side}",
            edge.tag
        )));
    }
    for &v in mesh.interface_vertices() {
        let d = dist(mesh.vertices()[v], q);
        if d <= radius {
            return Err(Error::InvalidSupport(format!(
                "support of radius {radius} reaches interface vertex {v} (distance {d:.4})"
            )));
        }
    }
    for (k, other) in mesh.boundary_edges().iter().enumerate() {
        if other.tag == side {
            continue;
        }
        let p = crate::geometry::closest_on_segment(q, mesh.vertices()[other.v[0]], mesh.vertices()[other.v[1]]);
        if dist(p, q) < radius {
            return Err(Error::InvalidSupport(format!("support crosses boundary edge {k} tagged {}", other.tag)));
        }
    }
    let n_edge = mesh.normal(e);
    let normal = match edge.arc {
        Some(arc) => {
            if radius >= 0.9 * arc.radius {
                return Err(Error::InvalidSupport(format!(
                    "radius {radius} too large for an arc of radius {}",
                    arc.radius
                )));
            }
            let d = [q[0] - arc.center[0], q[1] - arc.center[1]];
            let sign = if d[0] * n_edge[0] + d[1] * n_edge[1] >= 0.0 { 1.0 } else { -1.0 };
            NormalModel::Radial {
                center: arc.center,
                sign,
            }
        }
        None => NormalModel::Constant { n: n_edge },
    };
    Ok(PerturbationField::NormalBump(NormalBump {
        anchor: q,
        radius,
        amplitude,
        side,
        normal,
    }))
}

/// Bump field whose support lies strictly inside the domain.
pub fn interior_bump(mesh: &MeshDomain, center: Point, radius: f64, amplitude: f64, direction: Point) -> Result<PerturbationField> {
    let len = direction[0].hypot(direction[1]);
    if !(radius > 0.0 && radius.is_finite()) || !(len > 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid("interior bump needs radius > 0, a nonzero direction and finite amplitude"));
    }
    let inside = (0..mesh.n_triangles()).any(|t| point_in_triangle(mesh, t, center));
    if !inside {
        return Err(Error::InvalidSupport(format!("center {center:?} is outside the domain")));
    }
    let (q, _) = mesh
        .nearest_boundary_point(center, None)
        .ok_or_else(|| Error::invalid("mesh has no boundary"))?;
    if dist(q, center) <= radius {
        return Err(Error::InvalidSupport(format!(
            "support of radius {radius} reaches the boundary (distance {:.4})",
            dist(q, center)
        )));
    }
    Ok(PerturbationField::InteriorBump(InteriorBump {
        center,
        radius,
        amplitude,
        direction: [direction[0] / len, direction[1] / len],
    }))
}

fn point_in_triangle(mesh: &MeshDomain, t: usize, p: Point) -> bool {
    let [a, b, c] = mesh.triangles()[t];
    let v = mesh.vertices();
    let cross = |o: Point, u: Point| (u[0] - o[0]) * (p[1] - o[1]) - (u[1] - o[1]) * (p[0] - o[0]);
    let (d1, d2, d3) = (cross(v[a], v[b]), cross(v[b], v[c]), cross(v[c], v[a]));
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// A mesh moved by `x -> x + t psi(x)`, with the source mesh and field it came from.
#[derive(Debug, Clone)]
pub struct TransplantRecord {
    pub source_mesh_id: String,
    pub field_id: String,
    pub t: f64,
    pub mesh: MeshDomain,
}

/// Moves every vertex by `t psi(x)`, keeping connectivity and tags.
///
/// Requires `|t| * ||psi||_C2 < 1/2` (estimated over the mesh bounding box)
/// and that no triangle inverts.
pub fn transplant(mesh: &MeshDomain, psi: &PerturbationField, t: f64) -> Result<TransplantRecord> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("non-finite amplitude {t}")));
    }
    let norm = psi.c2_norm_estimate_in(mesh.bbox(), DEFAULT_C2_DENSITY);
    let product = t.abs() * norm;
    if product >= 0.5 {
        return Err(Error::AmplitudeTooLarge { product });
    }
    let disp = psi.vertex_values(mesh)?;
    let vertices: Vec<Point> = mesh
        .vertices()
        .iter()
        .zip(&disp)
        .map(|(x, d)| [x[0] + t * d[0], x[1] + t * d[1]])
        .collect();
    let moved = mesh.with_vertices(vertices);
    for k in 0..moved.n_triangles() {
        let area = moved.signed_area(k);
        if !(area > 0.0) {
            return Err(Error::MeshFolded { triangle: k, area });
        }
    }
    Ok(TransplantRecord {
        source_mesh_id: mesh.id(),
        field_id: psi.id(),
        t,
        mesh: moved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk, build_rectangle, refine};
    use std::f64::consts::PI;

    #[test]
    fn identity_field() {
        let e = PerturbationField::dilation().eval([0.3, -0.7]).unwrap();
        assert_eq!(e.value, [0.3, -0.7]);
        assert_eq!(e.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(e.divergence, 2.0);
    }

    #[test]
    fn translation_field() {
        let e = PerturbationField::translation([0.2, -0.1]).eval([5.0, 3.0]).unwrap();
        assert_eq!(e.value, [0.2, -0.1]);
        assert_eq!(e.jacobian, [[0.0; 2]; 2]);
        assert_eq!(e.divergence, 0.0);
    }

    #[test]
    fn vertex_table_has_no_evaluator() {
        let f = PerturbationField::VertexTable { displacements: vec![[0.0, 0.0]] };
        assert!(matches!(f.eval([0.0, 0.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bump_on_disk_normalization() {
        let disk = build_disk(4, 32).unwrap();
        let f = normal_bump(&disk, [1.0, 0.0], 0.3, 0.02, Tag::S).unwrap();
        let e = f.eval([1.0, 0.0]).unwrap();
        assert!((e.value[0] - 0.02).abs() < 1e-15 && e.value[1].abs() < 1e-15);
        assert_eq!(f.eval([0.0, 1.0]).unwrap(), FieldEval::ZERO);
        assert_eq!(f.eval([1.0, 0.31]).unwrap().value, [0.0, 0.0]);
    }

    #[test]
    fn bump_support_rules() {
        let rect = build_rectangle(1.0, 1.0, 8, 8).unwrap();
        assert!(matches!(
            normal_bump(&rect, [0.5, 0.0], 0.2, 0.01, Tag::W),
            Err(Error::InvalidSupport(_))
        ));
        assert!(matches!(
            normal_bump(&rect, [0.1, 0.0], 0.2, 0.01, Tag::S),
            Err(Error::InvalidSupport(_))
        ));
        assert!(normal_bump(&rect, [0.5, 0.0], 0.2, 0.01, Tag::S).is_ok());
        assert!(normal_bump(&rect, [0.5, -1.0], 0.2, 0.01, Tag::W).is_ok());
        assert!(normal_bump(&rect, [0.5, -0.5], 0.2, 0.01, Tag::S).is_err());
    }

    #[test]
    fn divergence_is_jacobian_trace_and_jacobian_matches_differences() {
        let disk = build_disk(4, 32).unwrap();
        let fields = [
            normal_bump(&disk, [0.0, 1.0], 0.4, 0.03, Tag::S).unwrap(),
            interior_bump(&disk, [0.1, 0.2], 0.3, 0.05, [1.0, 2.0]).unwrap(),
            PerturbationField::Affine { a: [[0.3, -1.0], [2.0, 0.5]], b: [0.1, 0.0] },
        ];
        let h = 1e-6;
        for f in &fields {
            for &x in &[[0.05, 0.9], [0.2, 0.1], [-0.1, 0.8]] {
                let e = f.eval(x).unwrap();
                assert!((e.divergence - e.jacobian[0][0] - e.jacobian[1][1]).abs() < 1e-15);
                for j in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let (vp, vm) = (f.eval(xp).unwrap().value, f.eval(xm).unwrap().value);
                    for i in 0..2 {
                        let fd = (vp[i] - vm[i]) / (2.0 * h);
                        assert!((fd - e.jacobian[i][j]).abs() < 1e-7, "{f:?} at {x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn c2_norm_simple_cases() {
        assert_eq!(PerturbationField::translation([0.1, 0.0]).c2_norm_estimate(8), 0.1);
        assert_eq!(PerturbationField::zero().c2_norm_estimate(8), 0.0);
    }

    #[test]
    fn c2_norm_of_flat_bump_matches_profile_suprema() {
        // Symbolic suprema of amp*(1-s)^3, s = r^2/R^2, times a constant unit normal:
        //   |psi| <= amp, |D psi| <= 6 amp/R * max sqrt(s)(1-s)^2 = 6 amp/R * sqrt(0.2)*0.64,
        //   |D^2 psi|_F <= 6 sqrt(2) amp / R^2 (attained at the anchor).
        let rect = build_rectangle(2.0, 1.0, 8, 4).unwrap();
        let (amp, r) = (0.01, 0.3);
        let f = normal_bump(&rect, [1.0, 0.0], r, amp, Tag::S).unwrap();
        let d1 = 6.0 * amp / r * 0.2f64.sqrt() * 0.64;
        let d2 = 6.0 * 2f64.sqrt() * amp / (r * r);
        let oracle = amp.max(d1).max(d2);
        let est = f.c2_norm_estimate(64);
        assert!(est >= amp && est.is_finite());
        assert!((est - oracle).abs() < 1e-5 * oracle, "estimate {est} vs {oracle}");
    }

    #[test]
    fn c2_norm_monotone_in_density() {
        let disk = build_disk(4, 32).unwrap();
        let f = normal_bump(&disk, [0.6, 0.8], 0.35, 0.01, Tag::S).unwrap();
        let mut last = 0.0;
        for d in [2, 3, 5, 8, 13, 21] {
            let e = f.c2_norm_estimate(d);
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn transplant_identities() {
        let disk = refine(&build_disk(3, 24).unwrap());
        let bump = normal_bump(&disk, [0.0, -1.0], 0.4, 0.01, Tag::S).unwrap();
        let r0 = transplant(&disk, &bump, 0.0).unwrap();
        for (a, b) in r0.mesh.vertices().iter().zip(disk.vertices()) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
        let c = [0.25, -0.3];
        let moved = transplant(&disk, &PerturbationField::translation(c), 1.0).unwrap();
        for (a, b) in moved.mesh.vertices().iter().zip(disk.vertices()) {
            assert_eq!(*a, [b[0] + c[0], b[1] + c[1]]);
        }
        let dil = transplant(&disk, &PerturbationField::dilation(), 0.1).unwrap();
        for v in dil.mesh.boundary_vertices() {
            let p = dil.mesh.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.1).abs() < 1e-14);
        }
    }

    #[test]
    fn transplant_guards() {
        let disk = build_disk(3, 24).unwrap();
        assert!(matches!(
            transplant(&disk, &PerturbationField::dilation(), 0.6),
            Err(Error::AmplitudeTooLarge { .. })
        ));
        // a vertex table that swaps two neighbouring vertices folds the mesh
        let mut disp = vec![[0.0, 0.0]; disk.n_vertices()];
        disp[0] = [0.45, 0.0];
        let table = PerturbationField::VertexTable { displacements: disp };
        assert!(matches!(transplant(&disk, &table, 1.0), Err(Error::MeshFolded { .. })));
    }

    #[test]
    fn interior_field_keeps_boundary_and_bump_keeps_opposite_side() {
        let rect = build_rectangle(PI, 1.0, 16, 8).unwrap();
        let ib = interior_bump(&rect, [1.5, -0.5], 0.3, 0.05, [1.0, 1.0]).unwrap();
        let rec = transplant(&rect, &ib, 0.05).unwrap();
        for v in rect.boundary_vertices() {
            assert_eq!(rec.mesh.vertices()[v], rect.vertices()[v]);
        }
        assert!(interior_bump(&rect, [1.5, -0.1], 0.3, 0.05, [1.0, 0.0]).is_err());
        let wb = normal_bump(&rect, [1.5, -1.0], 0.4, 0.05, Tag::W).unwrap();
        assert!(wb.vanishes_on(&rect, Tag::S).unwrap());
        let sb = normal_bump(&rect, [1.5, 0.0], 0.4, 0.05, Tag::S).unwrap();
        assert!(sb.vanishes_on(&rect, Tag::W).unwrap());
    }

    #[test]
    fn coordinates_are_linear_in_t() {
        let disk = build_disk(3, 24).unwrap();
        let f = normal_bump(&disk, [0.0, 1.0], 0.5, 0.005, Tag::S).unwrap();
        let disp = f.vertex_values(&disk).unwrap();
        for &t in &[0.5, -1.0, 2.0] {
            let m = transplant(&disk, &f, t).unwrap().mesh;
            for ((p, x), d) in m.vertices().iter().zip(disk.vertices()).zip(&disp) {
                assert_eq!(*p, [x[0] + t * d[0], x[1] + t * d[1]]);
            }
        }
    }
}
