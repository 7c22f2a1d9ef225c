use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Arc, BoundaryEdge, MeshDomain, Point, Tag};
use crate::error::{Error, Result};

/// Rectangular tank `[0, a] x [-h, 0]`: top edge is the free surface, the
/// bottom and the lateral walls are `W`.
pub fn build_rectangle(a: f64, h: f64, nx: usize, ny: usize) -> Result<MeshDomain> {
    build_rectangle_graded(a, h, nx, ny, 1.0)
}

/// Rectangle with power-law grading toward the two interface corners.
///
/// `grading = 1` is uniform; larger values shrink the cells next to
/// `x = 0`, `x = a` and `y = 0`.
pub fn build_rectangle_graded(a: f64, h: f64, nx: usize, ny: usize, grading: f64) -> Result<MeshDomain> {
    if !(a > 0.0 && h > 0.0 && a.is_finite() && h.is_finite()) {
        return Err(Error::invalid(format!("rectangle needs a, h > 0 (got a={a}, h={h})")));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::invalid(format!("rectangle needs nx, ny >= 2 (got {nx}, {ny})")));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::invalid(format!("grading must be >= 1 (got {grading})")));
    }
    let gx = |s: f64| {
        if s <= 0.5 {
            0.5 * (2.0 * s).powf(grading)
        } else {
            1.0 - 0.5 * (2.0 * (1.0 - s)).powf(grading)
        }
    };
    let xs: Vec<f64> = (0..=nx)
        .map(|i| match i {
            0 => 0.0,
            _ if i == nx => a,
            _ => a * gx(i as f64 / nx as f64),
        })
        .collect();
    let ys: Vec<f64> = (0..=ny)
        .map(|j| match j {
            0 => -h,
            _ if j == ny => 0.0,
            _ => -h * (1.0 - j as f64 / ny as f64).powf(grading),
        })
        .collect();
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in &ys {
        for &x in &xs {
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary = Vec::new();
    let edge = |a: usize, b: usize, tag: Tag| BoundaryEdge { v: [a, b], tag, arc: None };
    for i in 0..nx {
        boundary.push(edge(idx(i, 0), idx(i + 1, 0), Tag::W));
    }
    for j in 0..ny {
        boundary.push(edge(idx(nx, j), idx(nx, j + 1), Tag::W));
    }
    for i in (0..nx).rev() {
        boundary.push(edge(idx(i + 1, ny), idx(i, ny), Tag::S));
    }
    for j in (0..ny).rev() {
        boundary.push(edge(idx(0, j + 1), idx(0, j), Tag::W));
    }
    Ok(MeshDomain::from_parts(vertices, triangles, boundary))
}

fn check_polar(n_rings: usize, n_sectors: usize) -> Result<()> {
    if n_rings < 1 || n_sectors < 3 {
        return Err(Error::invalid(format!(
            "polar mesh needs n_rings >= 1 and n_sectors >= 3 (got {n_rings}, {n_sectors})"
        )));
    }
    Ok(())
}

/// Unit disk with every boundary edge on the free surface.
///
/// Each ring carries `n_sectors` vertices, so the mesh is invariant under
/// rotation by `2*pi/n_sectors` and the discrete spectrum keeps the exact
/// double eigenvalues of the disk.
pub fn build_disk(n_rings: usize, n_sectors: usize) -> Result<MeshDomain> {
    check_polar(n_rings, n_sectors)?;
    let ns = n_sectors;
    let idx = |r: usize, s: usize| 1 + (r - 1) * ns + (s % ns);
    let mut vertices = vec![[0.0, 0.0]];
    for r in 1..=n_rings {
        let rad = r as f64 / n_rings as f64;
        for s in 0..ns {
            let th = 2.0 * PI * s as f64 / ns as f64;
            vertices.push([rad * th.cos(), rad * th.sin()]);
        }
    }
    let mut triangles = Vec::new();
    for s in 0..ns {
        triangles.push([0, idx(1, s), idx(1, s + 1)]);
    }
    for r in 1..n_rings {
        for s in 0..ns {
            let (a, b, c, d) = (idx(r, s), idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    let arc = Some(Arc {
        center: [0.0, 0.0],
        radius: 1.0,
    });
    let boundary = (0..ns)
        .map(|s| BoundaryEdge {
            v: [idx(n_rings, s), idx(n_rings, s + 1)],
            tag: Tag::S,
            arc,
        })
        .collect();
    Ok(MeshDomain::from_parts(vertices, triangles, boundary))
}

/// Lower half of the unit disk: the diameter on `y = 0` is the free surface,
/// the circular arc is the wall.
pub fn build_half_disk(n_rings: usize, n_sectors: usize) -> Result<MeshDomain> {
    check_polar(n_rings, n_sectors)?;
    let ns = n_sectors;
    let idx = |r: usize, s: usize| 1 + (r - 1) * (ns + 1) + s;
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    for r in 1..=n_rings {
        let rad = r as f64 / n_rings as f64;
        for s in 0..=ns {
            let th = PI + PI * s as f64 / ns as f64;
            let p = match s {
                0 => [-rad, 0.0],
                _ if s == ns => [rad, 0.0],
                _ => [rad * th.cos(), rad * th.sin()],
            };
            vertices.push(p);
        }
    }
    let mut triangles = Vec::new();
    for s in 0..ns {
        triangles.push([0, idx(1, s), idx(1, s + 1)]);
    }
    for r in 1..n_rings {
        for s in 0..ns {
            let (a, b, c, d) = (idx(r, s), idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    let arc = Some(Arc {
        center: [0.0, 0.0],
        radius: 1.0,
    });
    let mut boundary = Vec::new();
    for s in 0..ns {
        boundary.push(BoundaryEdge {
            v: [idx(n_rings, s), idx(n_rings, s + 1)],
            tag: Tag::W,
            arc,
        });
    }
    let flat = |a: usize, b: usize| BoundaryEdge { v: [a, b], tag: Tag::S, arc: None };
    // right half of the diameter, from (1,0) back to the centre
    for r in (1..n_rings).rev() {
        boundary.push(flat(idx(r + 1, ns), idx(r, ns)));
    }
    boundary.push(flat(idx(1, ns), 0));
    boundary.push(flat(0, idx(1, 0)));
    for r in 1..n_rings {
        boundary.push(flat(idx(r, 0), idx(r + 1, 0)));
    }
    Ok(MeshDomain::from_parts(vertices, triangles, boundary))
}

/// Uniform red refinement: every triangle is split into four through its
/// edge midpoints. Midpoints of boundary edges lying on a known arc are
/// projected back to the circle.
pub fn refine(mesh: &MeshDomain) -> MeshDomain {
    let mut vertices = mesh.vertices().to_vec();
    let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in mesh.triangles() {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary = Vec::with_capacity(2 * mesh.boundary_edges().len());
    for e in mesh.boundary_edges() {
        let m = midpoint(e.v[0], e.v[1], &mut vertices);
        if let Some(arc) = e.arc {
            vertices[m] = arc.project(vertices[m]);
        }
        boundary.push(BoundaryEdge { v: [e.v[0], m], ..*e });
        boundary.push(BoundaryEdge { v: [m, e.v[1]], ..*e });
    }
    MeshDomain::from_parts(vertices, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_mesh;

    fn count_tag(m: &MeshDomain, t: Tag) -> usize {
        m.boundary_edges().iter().filter(|e| e.tag == t).count()
    }

    #[test]
    fn small_rectangle_counts() {
        let m = build_rectangle(1.0, 1.0, 2, 2).unwrap();
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_triangles(), 8);
        assert_eq!(count_tag(&m, Tag::S), 2);
        assert_eq!(count_tag(&m, Tag::W), 6);
        assert!(validate_mesh(&m).is_valid());
        let mut gamma: Vec<Point> = m.interface_vertices().iter().map(|&v| m.vertices()[v]).collect();
        gamma.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(gamma, vec![[0.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn rectangle_rejects_degenerate() {
        assert!(build_rectangle(1.0, 0.0, 2, 2).is_err());
        assert!(build_rectangle(-1.0, 1.0, 2, 2).is_err());
        assert!(build_rectangle(1.0, 1.0, 1, 2).is_err());
        assert!(build_rectangle_graded(1.0, 1.0, 4, 4, 0.5).is_err());
    }

    #[test]
    fn rectangle_boundary_length_is_exact() {
        let (a, h) = (PI, 1.0);
        let m = build_rectangle(a, h, 7, 5).unwrap();
        assert!((m.boundary_length(None) - (2.0 * a + 2.0 * h)).abs() < 1e-13);
        assert!((m.boundary_length(Some(Tag::S)) - a).abs() < 1e-14);
        let g = build_rectangle_graded(a, h, 8, 8, 2.0).unwrap();
        assert!(validate_mesh(&g).is_valid());
        assert!((g.boundary_length(None) - (2.0 * a + 2.0 * h)).abs() < 1e-13);
    }

    #[test]
    fn smallest_disk_fan() {
        let m = build_disk(1, 3).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 3);
        assert_eq!(count_tag(&m, Tag::S), 3);
        assert!(m.interface_vertices().is_empty());
        assert!(validate_mesh(&m).is_valid());
        assert!(build_disk(0, 3).is_err());
        assert!(build_disk(1, 2).is_err());
    }

    #[test]
    fn disk_perimeter_converges_quadratically() {
        let err = |ns: usize| (build_disk(2, ns).unwrap().boundary_length(None) - 2.0 * PI).abs();
        let (e1, e2) = (err(32), err(64));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn half_disk_interface() {
        let m = build_half_disk(1, 4).unwrap();
        assert!(validate_mesh(&m).is_valid());
        let mut gamma: Vec<Point> = m.interface_vertices().iter().map(|&v| m.vertices()[v]).collect();
        gamma.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(gamma, vec![[-1.0, 0.0], [1.0, 0.0]]);
        let m = build_half_disk(5, 12).unwrap();
        assert!(validate_mesh(&m).is_valid());
        assert_eq!(m.interface_vertices().len(), 2);
        assert!((m.boundary_length(Some(Tag::S)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn refine_counts() {
        let m = build_rectangle(1.0, 1.0, 2, 2).unwrap();
        let r = refine(&m);
        assert_eq!(r.n_triangles(), 32);
        assert_eq!(r.n_vertices(), m.n_vertices() + m.n_edges());
        assert!(validate_mesh(&r).is_valid());
        assert_eq!(r.interface_vertices().len(), 2);
        assert!((r.boundary_length(Some(Tag::S)) - 1.0).abs() < 1e-14);
        assert!((r.boundary_length(Some(Tag::W)) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn refine_projects_arc_midpoints() {
        let m = refine(&refine(&build_disk(2, 8).unwrap()));
        assert!(validate_mesh(&m).is_valid());
        for v in m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-14);
        }
        let h = refine(&build_half_disk(2, 6).unwrap());
        assert!(validate_mesh(&h).is_valid());
        for v in h.tagged_vertices(Tag::W) {
            let p = h.vertices()[v];
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-14);
        }
        for v in h.tagged_vertices(Tag::S) {
            assert_eq!(h.vertices()[v][1], 0.0);
        }
    }
}
