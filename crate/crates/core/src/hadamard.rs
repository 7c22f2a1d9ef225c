//! First-order behaviour of an eigenvalue cluster under a domain perturbation.
//!
//! Sign table (positive `mu`-slope means `mu` grows along `+t psi`):
//!
//! | kind             | `M_rs`                                   |
//! |------------------|------------------------------------------|
//! | Steklov-Dirichlet| `dB_S(e_r,e_s) - mu dA(e_r,e_s)`         |
//! | Steklov-Neumann  | `(1-mu) dB_S(e_r,e_s) - mu dA(e_r,e_s)`  |
//! | pure Steklov     | as Steklov-Neumann (`mu = 1/(lambda+1)`) |
//!
//! with eigenvectors orthonormal in the inner product of the solve.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{flux_recovery, form_da_matrix, form_db_matrix};
use crate::error::{Error, Result};
use crate::geometry::{MeshDomain, ProblemKind, Tag};
use crate::linalg::sym_eigen_desc;
use crate::perturb::{transplant, PerturbationField};
use crate::spectral::{solve, Cluster, Spectrum};

/// Relative cluster width above which derivative analysis is flagged.
pub const CLUSTER_VERIFY_TOL: f64 = 1e-4;
const SCORE_FLOOR: f64 = 1e-14;

/// The projected derivative `M` of the solution operator on one cluster.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterDerivative {
    pub kind: ProblemKind,
    pub cluster: Cluster,
    pub field_id: String,
    pub field: PerturbationField,
    /// Cluster value of `mu = 1/lambda_hat`.
    pub mu: f64,
    /// Symmetrized `M`, row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Frobenius norm of the antisymmetric part before symmetrization.
    pub antisymmetry: f64,
    /// Eigenvalues of `M`, descending.
    pub mu_slopes: Vec<f64>,
    /// `-nu / mu^2`, ascending (matches the ascending eigenvalue branches).
    pub lambda_slopes: Vec<f64>,
    /// `None` for a simple eigenvalue.
    pub score: Option<f64>,
    /// Set when the cluster is wider than [`CLUSTER_VERIFY_TOL`].
    pub wide_cluster: bool,
    /// Discretization floor measured by comparing two refinement levels, if known.
    pub refinement_floor: Option<f64>,
}

impl ClusterDerivative {
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.matrix.len();
        DMatrix::from_fn(m, m, |i, j| self.matrix[i][j])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Difference of the extreme `lambda`-slopes.
    pub fn lambda_spread(&self) -> f64 {
        match (self.lambda_slopes.first(), self.lambda_slopes.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

fn cluster_mu(spectrum: &Spectrum, cluster: &Cluster) -> Result<f64> {
    if cluster.multiplicity == 0 || cluster.start + cluster.multiplicity > spectrum.len() {
        return Err(Error::invalid("cluster lies outside the computed spectrum"));
    }
    let lh: f64 = cluster.indices().map(|k| spectrum.lambda_hat[k]).sum::<f64>() / cluster.multiplicity as f64;
    Ok(1.0 / lh)
}

/// `M_rs` for the eigenvectors of `cluster`; see the module sign table.
pub fn cluster_matrix(mesh: &MeshDomain, spectrum: &Spectrum, cluster: &Cluster, psi: &PerturbationField) -> Result<ClusterDerivative> {
    if spectrum.mesh_id != mesh.id() {
        return Err(Error::invalid("spectrum was computed on a different mesh"));
    }
    let mu = cluster_mu(spectrum, cluster)?;
    let vecs: Vec<&[f64]> = cluster.indices().map(|k| spectrum.vectors[k].as_slice()).collect();
    let db = form_db_matrix(mesh, psi, &vecs, Some(Tag::S))?;
    let da = form_da_matrix(mesh, psi, &vecs)?;
    let raw = match spectrum.kind {
        ProblemKind::SteklovDirichlet => db - da * mu,
        _ => db * (1.0 - mu) - da * mu,
    };
    let antisymmetry = (0.5 * (&raw - raw.transpose())).norm();
    let m = 0.5 * (&raw + raw.transpose());
    let (nu, _) = sym_eigen_desc(&m);
    let lambda_slopes = nu.iter().map(|n| -n / (mu * mu)).collect();
    let wide_cluster = cluster.rel_width > CLUSTER_VERIFY_TOL;
    if wide_cluster {
        log::warn!("cluster at {} has relative width {:e}; derivative is ill-conditioned", cluster.center, cluster.rel_width);
    }
    let score = if cluster.multiplicity >= 2 { Some(no_splitting_score(&m)?) } else { None };
    Ok(ClusterDerivative {
        kind: spectrum.kind,
        cluster: *cluster,
        field_id: psi.id(),
        field: psi.clone(),
        mu,
        matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        antisymmetry,
        mu_slopes: nu,
        lambda_slopes,
        score,
        wide_cluster,
        refinement_floor: None,
    })
}

pub fn predicted_slopes(cd: &ClusterDerivative) -> Vec<f64> {
    cd.lambda_slopes.clone()
}

/// `||M - (tr M / m) I||_F / (||M||_F + 1e-14)`.
pub fn no_splitting_score(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n < 2 {
        return Err(Error::UndefinedForSimple);
    }
    let shift = m.trace() / n as f64;
    let dev = m - DMatrix::identity(n, n) * shift;
    Ok(dev.norm() / (m.norm() + SCORE_FLOOR))
}

/// Finite-difference branch data for one cluster.
#[derive(Debug, Clone, Serialize)]
pub struct FdSlopes {
    /// Amplitudes used, starting with 0.
    pub t: Vec<f64>,
    /// `lambda[i][k]`: k-th cluster eigenvalue (ascending) at `t[i]`.
    pub lambda: Vec<Vec<f64>>,
    /// Slopes at 0 of the ascending `lambda` branches.
    pub lambda_slopes: Vec<f64>,
    /// Slopes at 0 of the descending `mu` branches.
    pub mu_slopes: Vec<f64>,
    /// R² of a straight-line fit per branch.
    pub r2: Vec<f64>,
}

/// Least-squares slope at 0 (quadratic model when three or more points exist)
/// and the R² of the straight-line fit.
pub fn fit_slope(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len();
    let tm = t.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let stt: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(x, v)| (x - tm) * (v - ym)).sum();
    let lin = sty / stt;
    let ss_tot: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let ss_res: f64 = t.iter().zip(y).map(|(x, v)| (v - ym - lin * (x - tm)).powi(2)).sum();
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let r2 = if ss_tot <= (1e-13 * scale).powi(2) * n as f64 { 1.0 } else { 1.0 - ss_res / ss_tot };
    if n < 3 {
        return (lin, r2);
    }
    // y = c0 + c1 t + c2 t^2 by normal equations
    let a = DMatrix::from_fn(n, 3, |i, j| t[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(y);
    let c = (a.transpose() * &a).lu().solve(&(a.transpose() * b));
    (c.map_or(lin, |c| c[1]), r2)
}

/// Solves on each transplanted mesh and fits the sorted cluster branches.
pub fn fd_slopes(mesh: &MeshDomain, psi: &PerturbationField, cluster: &Cluster, kind: ProblemKind, t_grid: &[f64]) -> Result<FdSlopes> {
    let mut t: Vec<f64> = vec![0.0];
    t.extend(t_grid.iter().copied().filter(|&x| x != 0.0));
    if t.len() < 2 {
        return Err(Error::invalid("t grid needs a nonzero amplitude"));
    }
    let count = cluster.start + cluster.multiplicity + 1;
    let meshes: Vec<MeshDomain> = t
        .iter()
        .map(|&ti| transplant(mesh, psi, ti).map(|r| r.mesh))
        .collect::<Result<_>>()?;
    let spectra: Vec<Spectrum> = meshes.par_iter().map(|m| solve(m, kind, count)).collect::<Result<_>>()?;
    let range = cluster.indices();
    if spectra[0].len() < range.end {
        return Err(Error::invalid("cluster exceeds the computable spectrum"));
    }
    let gaps = |s: &Spectrum| {
        let lo = (range.start > 0).then(|| s.lambda[range.start] - s.lambda[range.start - 1]);
        let hi = (s.len() > range.end).then(|| s.lambda[range.end] - s.lambda[range.end - 1]);
        (lo, hi)
    };
    let (lo0, hi0) = gaps(&spectra[0]);
    for (s, &ti) in spectra.iter().zip(&t).skip(1) {
        let (lo, hi) = gaps(s);
        for (g0, g) in [(lo0, lo), (hi0, hi)] {
            if let (Some(g0), Some(g)) = (g0, g) {
                if g < 0.5 * g0 {
                    return Err(Error::TrackingFailure {
                        t: ti,
                        reason: format!("gap to a neighbouring eigenvalue shrank from {g0:e} to {g:e}"),
                    });
                }
            }
        }
    }
    let lambda: Vec<Vec<f64>> = spectra.iter().map(|s| s.lambda[range.clone()].to_vec()).collect();
    let mut lambda_slopes = Vec::new();
    let mut mu_slopes = Vec::new();
    let mut r2 = Vec::new();
    for k in 0..cluster.multiplicity {
        let y: Vec<f64> = lambda.iter().map(|row| row[k]).collect();
        let (s, r) = fit_slope(&t, &y);
        lambda_slopes.push(s);
        r2.push(r);
        let ym: Vec<f64> = spectra.iter().map(|sp| sp.mu[range.start + k]).collect();
        mu_slopes.push(fit_slope(&t, &ym).0);
    }
    Ok(FdSlopes { t, lambda, lambda_slopes, mu_slopes, r2 })
}

/// Boundary-only forms of the no-splitting condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReducedCase {
    /// Steklov-Dirichlet, field on `W`: `mu int_W (psi.nu) d_nu e_r d_nu e_s`.
    SdW,
    /// Steklov-Dirichlet, field on `S`.
    SdS,
    /// Steklov-Neumann, field on `S`.
    SnS,
    /// Steklov-Neumann, field on `W`: `-mu int_W (psi.nu) grad e_r . grad e_s`.
    SnW,
}

impl ReducedCase {
    fn kind(self) -> ProblemKind {
        match self {
            ReducedCase::SdW | ReducedCase::SdS => ProblemKind::SteklovDirichlet,
            ReducedCase::SnS | ReducedCase::SnW => ProblemKind::SteklovNeumann,
        }
    }

    fn side(self) -> Tag {
        match self {
            ReducedCase::SdW | ReducedCase::SnW => Tag::W,
            ReducedCase::SdS | ReducedCase::SnS => Tag::S,
        }
    }
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// The reduced boundary matrix of `case`.
///
/// `W` cases use the recovered normal flux (`SdW`) or the tangential
/// derivative along each edge (`SnW`); `S` cases use the P1 gradient of the
/// triangle owning each edge.
pub fn reduced_matrix(case: ReducedCase, mesh: &MeshDomain, spectrum: &Spectrum, cluster: &Cluster, psi: &PerturbationField) -> Result<DMatrix<f64>> {
    if spectrum.kind != case.kind() {
        return Err(Error::InvalidCase(format!("{case:?} needs a {} spectrum, got {}", case.kind(), spectrum.kind)));
    }
    if !psi.vanishes_on(mesh, case.side().opposite())? {
        return Err(Error::InvalidCase(format!("field does not vanish on {}", case.side().opposite())));
    }
    let mu = cluster_mu(spectrum, cluster)?;
    let idx: Vec<usize> = cluster.indices().collect();
    let m = idx.len();
    let side = case.side();
    let fluxes = if case == ReducedCase::SdW {
        Some(
            idx.iter()
                .map(|&k| flux_recovery(mesh, &spectrum.vectors[k], spectrum.lambda[k], Tag::W))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let owners = mesh.boundary_owners();
    let p = mesh.vertices();
    let mut out = DMatrix::zeros(m, m);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if edge.tag != side {
            continue;
        }
        let [a, b] = edge.v;
        let l = mesh.edge_length(e);
        let n = mesh.normal(e);
        let grads: Vec<[f64; 2]> = match (case, owners[e]) {
            (ReducedCase::SdS | ReducedCase::SnS, Some(t)) => {
                let (g, _) = crate::assembly::p1_gradients(mesh, t);
                let tri = mesh.triangles()[t];
                idx.iter()
                    .map(|&k| {
                        let u = &spectrum.vectors[k];
                        let mut gr = [0.0; 2];
                        for c in 0..3 {
                            gr[0] += u[tri[c]] * g[c][0];
                            gr[1] += u[tri[c]] * g[c][1];
                        }
                        gr
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        for &xi in &GAUSS2 {
            let x = [p[a][0] + xi * (p[b][0] - p[a][0]), p[a][1] + xi * (p[b][1] - p[a][1])];
            let f = psi.eval(x)?;
            let alpha = f.value[0] * n[0] + f.value[1] * n[1];
            let j = f.jacobian;
            let nn = n[0] * (j[0][0] * n[0] + j[0][1] * n[1]) + n[1] * (j[1][0] * n[0] + j[1][1] * n[1]);
            let w = 0.5 * l;
            for r in 0..m {
                for s in r..m {
                    let (er, es) = (&spectrum.vectors[idx[r]], &spectrum.vectors[idx[s]]);
                    let val = match case {
                        ReducedCase::SdW => {
                            let fl = fluxes.as_ref().expect("fluxes computed for SdW");
                            let gr = (1.0 - xi) * fl[r].at(a) + xi * fl[r].at(b);
                            let gs = (1.0 - xi) * fl[s].at(a) + xi * fl[s].at(b);
                            mu * alpha * gr * gs
                        }
                        ReducedCase::SnW => {
                            let tr = (er[b] - er[a]) / l;
                            let ts = (es[b] - es[a]) / l;
                            -mu * alpha * tr * ts
                        }
                        ReducedCase::SdS | ReducedCase::SnS => {
                            let gg = grads[r][0] * grads[s][0] + grads[r][1] * grads[s][1];
                            let ur = (1.0 - xi) * er[a] + xi * er[b];
                            let us = (1.0 - xi) * es[a] + xi * es[b];
                            let coef = if case == ReducedCase::SdS { 1.0 } else { 1.0 - mu };
                            -mu * alpha * gg - coef * ur * us * nn
                        }
                    };
                    out[(r, s)] += w * val;
                    if s != r {
                        out[(s, r)] += w * val;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Off-diagonal and diagonal-difference discrepancy of two matrices, i.e.
/// their distance modulo multiples of the identity, relative to `scale`.
pub fn gauge_discrepancy(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let d = a - b;
    let n = d.nrows();
    let shift = d.trace() / n as f64;
    let dev = d - DMatrix::identity(n, n) * shift;
    let scale = a.norm().max(b.norm()).max(1e-300);
    dev.norm() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk, build_rectangle};
    use crate::perturb::{interior_bump, normal_bump};
    use crate::spectral::detect_clusters;
    use std::f64::consts::PI;

    #[test]
    fn score_examples() {
        assert_eq!(no_splitting_score(&(DMatrix::identity(2, 2) * 3.0)).unwrap(), 0.0);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!((no_splitting_score(&d).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(no_splitting_score(&DMatrix::identity(1, 1)), Err(Error::UndefinedForSimple)));
        assert_eq!(no_splitting_score(&DMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn translation_gives_zero_matrix() {
        let m = build_disk(8, 32).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 3).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let cd = cluster_matrix(&m, &s, &c, &PerturbationField::translation([0.3, 0.1])).unwrap();
        assert!(cd.matrix().norm() < 1e-12);
        assert!(cd.lambda_slopes.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn dilation_on_disk_scales_eigenvalues() {
        let m = build_disk(8, 32).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 2).unwrap();
        let c = Cluster::from_range(&s.lambda, 1..2);
        let cd = cluster_matrix(&m, &s, &c, &PerturbationField::dilation()).unwrap();
        assert!((cd.lambda_slopes[0] + s.lambda[1]).abs() < 1e-10 * s.lambda[1]);
        assert_eq!(cd.score, None);
    }

    #[test]
    fn predicted_slopes_of_scalar_and_zero_matrices() {
        let m = build_disk(6, 24).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 3).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let mut cd = cluster_matrix(&m, &s, &c, &PerturbationField::zero()).unwrap();
        assert!(predicted_slopes(&cd).iter().all(|&x| x == 0.0));
        assert_eq!(cd.score, Some(0.0));
        cd.lambda_slopes = vec![-0.5 / (cd.mu * cd.mu); 2];
        assert!((predicted_slopes(&cd)[0] - predicted_slopes(&cd)[1]).abs() == 0.0);
    }

    #[test]
    fn fd_slopes_for_translation_are_zero() {
        let m = build_disk(6, 24).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 4).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let fd = fd_slopes(&m, &PerturbationField::translation([1.0, 0.5]), &c, ProblemKind::PureSteklov, &[1e-3, 2e-3, 4e-3]).unwrap();
        assert!(fd.lambda_slopes.iter().all(|x| x.abs() < 1e-7), "{:?}", fd.lambda_slopes);
    }

    #[test]
    fn predicted_and_fd_slopes_agree_for_a_bump() {
        let m = build_disk(10, 40).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 4).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let psi = normal_bump(&m, [0.6, 0.8], 0.5, 0.05, Tag::S).unwrap();
        let cd = cluster_matrix(&m, &s, &c, &psi).unwrap();
        let fd = fd_slopes(&m, &psi, &c, ProblemKind::PureSteklov, &[1e-3, 2e-3, 4e-3]).unwrap();
        for k in 0..2 {
            let (p, f) = (cd.lambda_slopes[k], fd.lambda_slopes[k]);
            assert!((p - f).abs() < 0.02 * p.abs().max(f.abs()), "{:?} vs {:?}", cd.lambda_slopes, fd.lambda_slopes);
            assert!(fd.r2[k] > 0.999);
        }
        assert!(cd.score.unwrap() > 0.1);
    }

    #[test]
    fn fd_reports_tracking_failure() {
        let m = build_rectangle(PI, 1.0, 16, 8).unwrap();
        let s = solve(&m, ProblemKind::SteklovDirichlet, 3).unwrap();
        let c = Cluster::from_range(&s.lambda, 1..2);
        let big = PerturbationField::Affine { a: [[0.4, 0.0], [0.0, 0.0]], b: [0.0, 0.0] };
        // stretching x by 1.4 moves lambda_2 towards lambda_1 by far more than half the gap
        let r = fd_slopes(&m, &big, &c, ProblemKind::SteklovDirichlet, &[0.9]);
        assert!(matches!(r, Err(Error::TrackingFailure { .. }) | Err(Error::AmplitudeTooLarge { .. })));
    }

    #[test]
    fn reduced_case_rules() {
        let m = build_rectangle(PI, 1.0, 32, 16).unwrap();
        let s = solve(&m, ProblemKind::SteklovDirichlet, 2).unwrap();
        let c = Cluster::from_range(&s.lambda, 0..2);
        let zero_w = normal_bump(&m, [1.5, -1.0], 0.4, 0.0, Tag::W).unwrap();
        assert!(reduced_matrix(ReducedCase::SdW, &m, &s, &c, &zero_w).unwrap().norm() == 0.0);
        let on_s = normal_bump(&m, [1.5, 0.0], 0.4, 0.01, Tag::S).unwrap();
        assert!(matches!(reduced_matrix(ReducedCase::SdW, &m, &s, &c, &on_s), Err(Error::InvalidCase(_))));
        assert!(matches!(reduced_matrix(ReducedCase::SnW, &m, &s, &c, &zero_w), Err(Error::InvalidCase(_))));
        let sn = solve(&m, ProblemKind::SteklovNeumann, 2).unwrap();
        let w = normal_bump(&m, [1.5, -1.0], 0.4, 0.05, Tag::W).unwrap();
        let r = reduced_matrix(ReducedCase::SnW, &m, &sn, &Cluster::from_range(&sn.lambda, 0..1), &w).unwrap();
        assert!(r[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn sd_wall_reduction_matches_cluster_matrix() {
        let mut errs = Vec::new();
        for n in [16, 32] {
            let m = build_rectangle(PI, 1.0, 2 * n, n).unwrap();
            let s = solve(&m, ProblemKind::SteklovDirichlet, 2).unwrap();
            let c = Cluster::from_range(&s.lambda, 0..2);
            let psi = normal_bump(&m, [1.2, -1.0], 0.6, 0.05, Tag::W).unwrap();
            let a = cluster_matrix(&m, &s, &c, &psi).unwrap().matrix();
            let b = reduced_matrix(ReducedCase::SdW, &m, &s, &c, &psi).unwrap();
            errs.push(gauge_discrepancy(&a, &b));
        }
        assert!(errs[1] < errs[0] && errs[1] < 0.05, "{errs:?}");
    }

    #[test]
    fn sd_wall_reduction_matches_analytic_mode() {
        // e_1 = c sin(x) sinh(y+1), a-normalized; d_nu e = -c sin(x) on y=-1.
        // a(e,e) = c^2 int |grad|^2 = c^2 (pi/2) sinh(1) cosh(1) = 1.
        let m = build_rectangle(PI, 1.0, 96, 32).unwrap();
        let s = solve(&m, ProblemKind::SteklovDirichlet, 1).unwrap();
        let c = Cluster::from_range(&s.lambda, 0..1);
        let (x0, r, amp) = (1.2, 0.6, 0.05);
        let psi = normal_bump(&m, [x0, -1.0], r, amp, Tag::W).unwrap();
        let red = reduced_matrix(ReducedCase::SdW, &m, &s, &c, &psi).unwrap()[(0, 0)];
        let c2 = 1.0 / (PI / 2.0 * 1f64.sinh() * 1f64.cosh());
        let mu = 1f64.tanh();
        // alpha = psi . nu = amp (1 - ((x-x0)/r)^2)^3 on the wall; midpoint rule oracle
        let n = 20000;
        let mut integral = 0.0;
        for i in 0..n {
            let x = x0 - r + 2.0 * r * (i as f64 + 0.5) / n as f64;
            let q = 1.0 - ((x - x0) / r).powi(2);
            integral += amp * q.powi(3) * x.sin().powi(2) * 2.0 * r / n as f64;
        }
        let oracle = mu * c2 * integral;
        assert!((red - oracle).abs() < 0.02 * oracle, "{red} vs {oracle}");
    }

    #[test]
    fn interior_field_matrix_shrinks_under_refinement() {
        let mut norms = Vec::new();
        let mut m = build_disk(6, 24).unwrap();
        for _ in 0..3 {
            // the lambda = 2 pair; the lambda = 1 modes are nearly affine and sit at the noise floor
            let s = solve(&m, ProblemKind::PureSteklov, 5).unwrap();
            let c = detect_clusters(&s, 1e-6)[1];
            let psi = interior_bump(&m, [0.2, 0.1], 0.4, 0.05, [1.0, 0.3]).unwrap();
            norms.push(cluster_matrix(&m, &s, &c, &psi).unwrap().matrix().norm());
            m = crate::geometry::refine(&m);
        }
        assert!(norms[1] < norms[0] / 3.0 && norms[2] < norms[1] / 3.0, "{norms:?}");
    }

    #[test]
    fn cluster_matrix_is_linear_in_field() {
        let m = build_disk(8, 32).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 3).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let f = normal_bump(&m, [1.0, 0.0], 0.5, 0.05, Tag::S).unwrap();
        let g = PerturbationField::Affine { a: [[0.1, 0.2], [-0.3, 0.05]], b: [0.0, 0.0] };
        let mf = cluster_matrix(&m, &s, &c, &f).unwrap().matrix();
        let mg = cluster_matrix(&m, &s, &c, &g).unwrap().matrix();
        let m2 = cluster_matrix(&m, &s, &c, &f.scaled(-2.5)).unwrap().matrix();
        assert!((m2 + mf.clone() * 2.5).norm() < 1e-12 * mf.norm());
        let ms = cluster_matrix(&m, &s, &c, &g.scaled(3.0)).unwrap().matrix();
        assert!((ms - mg * 3.0).norm() < 1e-12);
    }

    #[test]
    fn json_export() {
        let m = build_disk(4, 16).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 3).unwrap();
        let c = detect_clusters(&s, 1e-6)[0];
        let cd = cluster_matrix(&m, &s, &c, &PerturbationField::dilation()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cd.to_json().unwrap()).unwrap();
        assert_eq!(v["matrix"].as_array().unwrap().len(), 2);
        assert_eq!(v["field"]["kind"], "affine");
    }
}
