//! Discrete Steklov spectra through the compact operator `f -> A^{-1} M_S f`.
//!
//! `A` is the restricted stiffness (Steklov-Dirichlet) or the Robin matrix
//! `K + M_S` (Steklov-Neumann and pure Steklov). Its eigenvalues are
//! `mu = 1 / lambda_hat`, and `lambda = lambda_hat` or `lambda_hat - 1`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{boundary_mass_s, robin_matrix, stiffness, DofMap};
use crate::error::{Error, Result};
use crate::geometry::{validate_mesh, MeshDomain, ProblemKind};
use crate::linalg::{dot, norm2, spmm, sym_eigen_desc, CsrMatrix, SparseCholesky};

/// Free-dof count below which [`SolverRoute::Auto`] picks the dense route.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverRoute {
    Auto,
    /// Dense eigensolve of the operator projected on the `S` dofs.
    Dense,
    /// Block subspace iteration with Rayleigh-Ritz in the `A` inner product.
    Iterative,
}

/// Residual below which subspace iteration may stop once it no longer improves.
pub const STAGNATION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub route: SolverRoute,
    /// Relative residual at which subspace iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the starting block for subspace iteration.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            route: SolverRoute::Auto,
            tol: 1e-12,
            max_iter: 2000,
            seed: 0x5eed,
        }
    }
}

/// The definite pencil `(A, B)` on the free dofs, with `A` factored.
#[derive(Debug)]
pub struct Pencil {
    pub kind: ProblemKind,
    pub dofs: DofMap,
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub chol: SparseCholesky,
    /// Free-dof indices where `B` has a nonzero row.
    pub s_dofs: Vec<usize>,
}

impl Pencil {
    pub fn new(mesh: &MeshDomain, kind: ProblemKind) -> Result<Pencil> {
        kind.check_mesh(mesh)?;
        let report = validate_mesh(mesh);
        if !report.is_valid() {
            return Err(Error::InvalidMesh(report.to_string()));
        }
        let dofs = DofMap::for_kind(mesh, kind);
        let ms = boundary_mass_s(mesh).matrix;
        let a_full = if kind.is_robin_shifted() {
            robin_matrix(mesh).matrix
        } else {
            stiffness(mesh).matrix
        };
        let a = a_full.principal_submatrix(dofs.free_dofs());
        let b = ms.principal_submatrix(dofs.free_dofs());
        let s_dofs = (0..b.nrows()).filter(|&i| b.row(i).any(|(_, v)| v != 0.0)).collect();
        let chol = SparseCholesky::factor(&a)?;
        Ok(Pencil { kind, dofs, a, b, chol, s_dofs })
    }

    pub fn n_free(&self) -> usize {
        self.a.nrows()
    }

    /// `||A x - lambda_hat B x|| / ||A x||` on the free dofs.
    pub fn relative_residual(&self, x: &[f64], lambda_hat: f64) -> Result<f64> {
        let ax = self.a.mul_vec(x);
        let na = norm2(&ax);
        if !(na > 0.0) {
            return Err(Error::invalid("zero vector is not an eigenvector"));
        }
        let bx = self.b.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(&bx).map(|(a, b)| a - lambda_hat * b).collect();
        Ok(norm2(&r) / na)
    }
}

/// Leading eigenpairs of one problem kind on one mesh.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub kind: ProblemKind,
    pub mesh_id: String,
    /// Ascending.
    pub lambda: Vec<f64>,
    /// `lambda + 1` for Robin-shifted kinds, `lambda` otherwise.
    pub lambda_hat: Vec<f64>,
    /// `1 / lambda_hat`, descending.
    pub mu: Vec<f64>,
    /// Nodal eigenvectors on all vertices, orthonormal in the `A` inner product.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pencil: Arc<Pencil>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn pencil(&self) -> &Pencil {
        &self.pencil
    }

    pub fn free_vector(&self, k: usize) -> Vec<f64> {
        self.pencil.dofs.restrict(&self.vectors[k])
    }

    /// `lambda_hat -> lambda` for this kind.
    pub fn lambda_from_hat(&self, lambda_hat: f64) -> f64 {
        if self.kind.is_robin_shifted() {
            lambda_hat - 1.0
        } else {
            lambda_hat
        }
    }

    /// `k,lambda,residual` rows with 1-based `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda,residual\n");
        for k in 0..self.len() {
            let _ = writeln!(out, "{},{:.15e},{:.6e}", k + 1, self.lambda[k], self.residuals[k]);
        }
        out
    }

    /// `k,vertex,value` rows for every stored eigenvector.
    pub fn vectors_csv(&self) -> String {
        let mut out = String::from("k,vertex,value\n");
        for (k, v) in self.vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.15e}", k + 1, i, x);
            }
        }
        out
    }
}

pub fn solve(mesh: &MeshDomain, kind: ProblemKind, count: usize) -> Result<Spectrum> {
    solve_with(mesh, kind, count, &SolveOptions::default())
}

pub fn solve_with(mesh: &MeshDomain, kind: ProblemKind, count: usize, opts: &SolveOptions) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::invalid("eigenvalue count must be at least 1"));
    }
    let pencil = Pencil::new(mesh, kind)?;
    let rank = pencil.s_dofs.len();
    let count = if count > rank {
        log::warn!("requested {count} eigenpairs but only {rank} S dofs exist; truncating");
        rank
    } else {
        count
    };
    let dense = match opts.route {
        SolverRoute::Dense => true,
        SolverRoute::Iterative => false,
        SolverRoute::Auto => pencil.n_free() < DENSE_LIMIT,
    };
    let (mu, mut x) = if dense {
        dense_projected(&pencil, count)?
    } else {
        subspace_iteration(&pencil, count, opts)?
    };
    a_orthonormalize(&pencil.a, &mut x);
    let mut lambda_hat = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for (k, m) in mu.iter().enumerate() {
        let mut v: Vec<f64> = x.column(k).iter().copied().collect();
        fix_sign(&mut v);
        let lh = 1.0 / m;
        residuals.push(pencil.relative_residual(&v, lh)?);
        lambda_hat.push(lh);
        vectors.push(pencil.dofs.extend(&v));
    }
    let lambda: Vec<f64> = lambda_hat
        .iter()
        .map(|&l| if kind.is_robin_shifted() { l - 1.0 } else { l })
        .collect();
    if lambda.iter().chain(&residuals).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigen-solve produced a non-finite value".into()));
    }
    Ok(Spectrum {
        kind,
        mesh_id: mesh.id(),
        lambda,
        lambda_hat,
        mu,
        vectors,
        residuals,
        pencil: Arc::new(pencil),
    })
}

/// Eigenpairs of `C = P A^{-1} P^T` against `M_SS`, lifted back to all free dofs.
fn dense_projected(p: &Pencil, count: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = p.n_free();
    let ns = p.s_dofs.len();
    let mut e = DMatrix::zeros(n, ns);
    for (c, &i) in p.s_dofs.iter().enumerate() {
        e[(i, c)] = 1.0;
    }
    let sol = p.chol.solve_block(&e);
    let c = DMatrix::from_fn(ns, ns, |i, j| 0.5 * (sol[(p.s_dofs[i], j)] + sol[(p.s_dofs[j], i)]));
    let mss = DMatrix::from_fn(ns, ns, |i, j| p.b.get(p.s_dofs[i], p.s_dofs[j]));
    let l = mss
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("S mass matrix is not definite".into()))?
        .l();
    let h = l.transpose() * &c * &l;
    let (theta, z) = sym_eigen_desc(&h);
    let lt = l.transpose();
    let mut x = DMatrix::zeros(n, count);
    for k in 0..count {
        let y = lt
            .solve_upper_triangular(&z.column(k).into_owned())
            .ok_or_else(|| Error::SingularSystem("triangular solve failed".into()))?;
        let my = &mss * y;
        let col = &sol * my / theta[k];
        x.set_column(k, &col);
    }
    Ok((theta[..count].to_vec(), x))
}

fn subspace_iteration(p: &Pencil, count: usize, opts: &SolveOptions) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = p.n_free();
    let block = (count + count.max(8)).min(p.s_dofs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let mut theta = vec![0.0; block];
    let mut previous = f64::INFINITY;
    for it in 0..opts.max_iter {
        let bx = spmm(&p.b, &x);
        let y = p.chol.solve_block(&bx);
        // A y = B x, so the A-Gram matrix of y is y^T B x.
        let g = y.transpose() * &bx;
        let (gd, gv) = sym_eigen_desc(&g);
        let keep = gd.iter().take_while(|&&d| d > gd[0] * 1e-14).count();
        let mut q = DMatrix::zeros(n, keep);
        for k in 0..keep {
            let col = &y * gv.column(k) / gd[k].sqrt();
            q.set_column(k, &col);
        }
        let h = q.transpose() * spmm(&p.b, &q);
        let (th, w) = sym_eigen_desc(&h);
        x = q * w;
        theta = th;
        if keep < count {
            return Err(Error::SingularSystem("subspace collapsed below the requested count".into()));
        }
        if it % 4 == 3 || it + 1 == opts.max_iter {
            let mut worst: f64 = 0.0;
            for k in 0..count {
                let v: Vec<f64> = x.column(k).iter().copied().collect();
                worst = worst.max(p.relative_residual(&v, 1.0 / theta[k])?);
            }
            if worst <= opts.tol {
                log::debug!("subspace iteration converged in {} steps", it + 1);
                break;
            }
            // round-off floor: the residual stopped improving
            if worst <= STAGNATION_FLOOR && worst > 0.5 * previous {
                log::debug!("subspace iteration stagnated at residual {worst:e} after {} steps", it + 1);
                break;
            }
            previous = worst;
            if it + 1 == opts.max_iter {
                log::warn!("subspace iteration stopped at residual {worst:e}");
            }
        }
    }
    let x = x.columns(0, count).into_owned();
    Ok((theta[..count].to_vec(), x))
}

/// Modified Gram-Schmidt in the `A` inner product, run twice.
fn a_orthonormalize(a: &CsrMatrix, x: &mut DMatrix<f64>) {
    let m = x.ncols();
    let mut cols: Vec<Vec<f64>> = (0..m).map(|k| x.column(k).iter().copied().collect()).collect();
    for _ in 0..2 {
        let mut acols: Vec<Vec<f64>> = Vec::with_capacity(m);
        for k in 0..m {
            let mut ak = a.mul_vec(&cols[k]);
            for j in 0..k {
                let c = dot(&cols[j], &ak);
                for i in 0..cols[k].len() {
                    cols[k][i] -= c * cols[j][i];
                    ak[i] -= c * acols[j][i];
                }
            }
            let nrm = dot(&cols[k], &ak).sqrt();
            for i in 0..cols[k].len() {
                cols[k][i] /= nrm;
                ak[i] /= nrm;
            }
            acols.push(ak);
        }
    }
    for (k, c) in cols.iter().enumerate() {
        x.set_column(k, &nalgebra::DVector::from_column_slice(c));
    }
}

/// Makes the entry of largest magnitude positive.
fn fix_sign(v: &mut [f64]) {
    let (mut best, mut idx) = (0.0, 0);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best * (1.0 + 1e-9) {
            best = x.abs();
            idx = i;
        }
    }
    if v.get(idx).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Per-pair residuals `||A e - lambda_hat B e|| / ||A e||`.
pub fn residual(spectrum: &Spectrum) -> Vec<f64> {
    (0..spectrum.len())
        .map(|k| {
            spectrum
                .pencil
                .relative_residual(&spectrum.free_vector(k), spectrum.lambda_hat[k])
                .unwrap_or(f64::INFINITY)
        })
        .collect()
}

/// A run of numerically coincident eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    /// 0-based index of the first member.
    pub start: usize,
    pub multiplicity: usize,
    /// Mean of the member eigenvalues.
    pub center: f64,
    /// `(max - min) / max(1, |center|)`.
    pub rel_width: f64,
}

impl Cluster {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.multiplicity
    }

    /// Cluster spanning `range` of the given (ascending) eigenvalues.
    pub fn from_range(values: &[f64], range: std::ops::Range<usize>) -> Cluster {
        let members = &values[range.clone()];
        let center = members.iter().sum::<f64>() / members.len() as f64;
        let width = members[members.len() - 1] - members[0];
        Cluster {
            start: range.start,
            multiplicity: members.len(),
            center,
            rel_width: width / center.abs().max(1.0),
        }
    }
}

/// Maximal runs whose adjacent relative spacing is at most `tol`; singletons omitted.
pub fn detect_clusters_in(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let joined = i < values.len() && (values[i] - values[i - 1]).abs() <= tol * values[i].abs().max(1.0);
        if !joined {
            if i - start >= 2 {
                out.push(Cluster::from_range(values, start..i));
            }
            start = i;
        }
    }
    out
}

pub fn detect_clusters(spectrum: &Spectrum, tol: f64) -> Vec<Cluster> {
    detect_clusters_in(&spectrum.lambda, tol)
}

/// Outcome of the Rayleigh-quotient check `int_S phi^2 <= mu_1` over `a(phi,phi) = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct MinMaxReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `int_S phi^2 - mu_1` over the trials (nonpositive when the property holds).
    pub worst_margin: f64,
    /// `|int_S e_1^2 - mu_1|`.
    pub attainment_error: f64,
    /// `int_S e_2^2 - mu_2`, when a second pair exists.
    pub second_error: Option<f64>,
    pub tol: f64,
}

impl MinMaxReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.attainment_error <= self.tol
    }
}

/// Random trials alternate between raw nodal vectors and random
/// combinations of the computed eigenvectors (which probe near the optimum).
pub fn minmax_check(spectrum: &Spectrum, n_trials: usize, seed: u64) -> MinMaxReport {
    let tol = 1e-8;
    let p = &spectrum.pencil;
    let mu1 = spectrum.mu[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n_free();
    let free: Vec<Vec<f64>> = (0..spectrum.len()).map(|k| spectrum.free_vector(k)).collect();
    let (mut violations, mut worst) = (0, f64::NEG_INFINITY);
    for trial in 0..n_trials {
        let phi: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        } else {
            let mut v = vec![0.0; n];
            for e in &free {
                let c: f64 = rng.gen_range(-1.0..1.0);
                for i in 0..n {
                    v[i] += c * e[i];
                }
            }
            v
        };
        let a = p.a.bilinear(&phi, &phi);
        if !(a > 0.0) {
            continue;
        }
        let margin = p.b.bilinear(&phi, &phi) / a - mu1;
        worst = worst.max(margin);
        if margin > tol {
            violations += 1;
        }
    }
    let attainment_error = (p.b.bilinear(&free[0], &free[0]) - mu1).abs();
    let second_error = (free.len() > 1).then(|| p.b.bilinear(&free[1], &free[1]) - spectrum.mu[1]);
    MinMaxReport {
        trials: n_trials,
        violations,
        worst_margin: worst,
        attainment_error,
        second_error,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk, build_half_disk, build_rectangle, refine, Tag};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn sn_half_disk_constant_mode() {
        let m = build_half_disk(6, 24).unwrap();
        let s = solve(&m, ProblemKind::SteklovNeumann, 3).unwrap();
        assert!(s.lambda[0].abs() < 1e-10);
        let e = &s.vectors[0];
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        assert!(e.iter().all(|x| (x - mean).abs() < 1e-8 * mean.abs()));
    }

    #[test]
    fn rectangle_spectra_match_separation_of_variables() {
        let m = build_rectangle(PI, 1.0, 48, 24).unwrap();
        let sn = solve(&m, ProblemKind::SteklovNeumann, 3).unwrap();
        assert!(rel(sn.lambda[1], 1f64.tanh()) < 1e-2);
        assert!(rel(sn.lambda[2], 2.0 * 2f64.tanh()) < 1e-2);
        let sd = solve(&m, ProblemKind::SteklovDirichlet, 1).unwrap();
        assert!(rel(sd.lambda[0], 1.0 / 1f64.tanh()) < 1e-2);
    }

    #[test]
    fn disk_steklov_pairs() {
        let m = build_disk(16, 96).unwrap();
        let s = solve(&m, ProblemKind::PureSteklov, 7).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        assert!(s.lambda[0].abs() < 1e-10);
        for k in 1..7 {
            assert!(rel(s.lambda[k], expect[k]) < 1e-2, "{:?}", s.lambda);
        }
        for k in [1, 3, 5] {
            assert!(rel(s.lambda[k + 1], s.lambda[k]) < 1e-9);
        }
        // nonconstant modes have zero S-mean
        let ms = boundary_mass_s(&m).matrix;
        let one = vec![1.0; m.n_vertices()];
        for k in 1..7 {
            assert!(ms.bilinear(&one, &s.vectors[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn orthonormality_and_residuals() {
        let m = build_rectangle(PI, 1.0, 24, 12).unwrap();
        for kind in [ProblemKind::SteklovDirichlet, ProblemKind::SteklovNeumann] {
            let s = solve(&m, kind, 5).unwrap();
            let p = s.pencil();
            for r in 0..5 {
                assert!(s.residuals[r] < 1e-8);
                for q in 0..5 {
                    let ip = p.a.bilinear(&s.free_vector(r), &s.free_vector(q));
                    let d = if r == q { 1.0 } else { 0.0 };
                    assert!((ip - d).abs() < 1e-10);
                }
            }
            assert!(s.mu.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn dense_and_iterative_routes_agree() {
        let m = build_disk(8, 30).unwrap();
        let d = solve_with(&m, ProblemKind::PureSteklov, 6, &SolveOptions { route: SolverRoute::Dense, ..Default::default() }).unwrap();
        let i = solve_with(&m, ProblemKind::PureSteklov, 6, &SolveOptions { route: SolverRoute::Iterative, ..Default::default() }).unwrap();
        for k in 0..6 {
            assert!((d.lambda[k] - i.lambda[k]).abs() < 1e-10 * d.lambda[k].max(1.0));
            assert!(i.residuals[k] < 1e-10);
        }
        let r = build_rectangle(2.0, 1.0, 20, 10).unwrap();
        let d = solve_with(&r, ProblemKind::SteklovDirichlet, 4, &SolveOptions { route: SolverRoute::Dense, ..Default::default() }).unwrap();
        let i = solve_with(&r, ProblemKind::SteklovDirichlet, 4, &SolveOptions { route: SolverRoute::Iterative, ..Default::default() }).unwrap();
        for k in 0..4 {
            assert!(rel(i.lambda[k], d.lambda[k]) < 1e-10);
        }
    }

    #[test]
    fn renumbering_leaves_eigenvalues_unchanged() {
        let m = build_half_disk(4, 12).unwrap();
        let n = m.n_vertices();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        assert_eq!({ let mut p = perm.clone(); p.sort(); p }, (0..n).collect::<Vec<_>>());
        let a = solve(&m, ProblemKind::SteklovNeumann, 5).unwrap();
        let b = solve(&m.permuted(&perm), ProblemKind::SteklovNeumann, 5).unwrap();
        for k in 0..5 {
            assert!((a.lambda[k] - b.lambda[k]).abs() < 1e-11 * a.lambda[k].max(1.0));
        }
    }

    #[test]
    fn relaxing_dirichlet_constraints_lowers_eigenvalues() {
        // drop W-vertices from the constraint set one at a time on a coarse
        // mesh; dense generalized eigenvalues of the S-pencil can only fall
        let m = build_rectangle(1.0, 1.0, 3, 3).unwrap();
        let k = stiffness(&m).matrix;
        let ms = boundary_mass_s(&m).matrix;
        let w = m.tagged_vertices(Tag::W);
        let top = |fixed: &[usize]| -> f64 {
            let free: Vec<usize> = (0..m.n_vertices()).filter(|v| !fixed.contains(v)).collect();
            let a = k.principal_submatrix(&free).to_dense();
            let b = ms.principal_submatrix(&free).to_dense();
            // largest mu of A^{-1} B via the symmetric form L^{-1} B L^{-T}
            let l = a.clone().cholesky().unwrap().l();
            let li = l.clone().try_inverse().unwrap();
            let (mu, _) = sym_eigen_desc(&(&li * b * li.transpose()));
            1.0 / mu[0]
        };
        let mut fixed = w.clone();
        let mut last = top(&fixed);
        while fixed.len() > 1 {
            fixed.pop();
            let lam = top(&fixed);
            assert!(lam <= last + 1e-12);
            last = lam;
        }
    }

    #[test]
    fn refinement_is_second_order() {
        let exact = 1f64.tanh();
        let mut m = build_rectangle(PI, 1.0, 8, 4).unwrap();
        let mut errs = Vec::new();
        for _ in 0..3 {
            errs.push((solve(&m, ProblemKind::SteklovNeumann, 2).unwrap().lambda[1] - exact).abs());
            m = refine(&m);
        }
        let (r1, r2) = (errs[0] / errs[1], errs[1] / errs[2]);
        assert!((3.2..4.8).contains(&r1) && (3.2..4.8).contains(&r2), "{errs:?}");
    }

    #[test]
    fn cluster_detection_examples() {
        let v = [0.0, 0.999, 1.001, 1.999, 2.001];
        let c = detect_clusters_in(&v, 1e-2);
        assert_eq!(c.iter().map(|c| (c.start, c.multiplicity)).collect::<Vec<_>>(), vec![(1, 2), (3, 2)]);
        assert!(detect_clusters_in(&[0.0, 1.0, 2.0, 3.5], 1e-2).is_empty());
        let all = detect_clusters_in(&v, 10.0);
        assert_eq!((all[0].start, all[0].multiplicity), (0, 5));
    }

    #[test]
    fn minmax_on_rectangle() {
        let m = build_rectangle(PI, 1.0, 16, 8).unwrap();
        for kind in [ProblemKind::SteklovDirichlet, ProblemKind::SteklovNeumann] {
            let s = solve(&m, kind, 4).unwrap();
            let r = minmax_check(&s, 100, 1);
            assert!(r.passed(), "{r:?}");
            assert!(r.second_error.unwrap().abs() < 1e-8 && s.mu[1] <= s.mu[0]);
        }
    }

    #[test]
    fn residual_rules() {
        let m = build_rectangle(PI, 1.0, 16, 8).unwrap();
        let s = solve(&m, ProblemKind::SteklovDirichlet, 2).unwrap();
        assert!(residual(&s).iter().all(|&r| r < 1e-8));
        let p = s.pencil();
        let e = s.free_vector(0);
        let mut prev = 0.0;
        for d in [1e-6, 1e-5, 1e-4] {
            let x: Vec<f64> = e.iter().enumerate().map(|(i, v)| v + if i == 3 { d } else { 0.0 }).collect();
            let r = p.relative_residual(&x, s.lambda_hat[0]).unwrap();
            assert!(r > 5.0 * prev);
            prev = r;
        }
        assert!(p.relative_residual(&vec![0.0; e.len()], 1.0).is_err());
    }

    #[test]
    fn truncates_to_s_rank() {
        let m = build_rectangle(1.0, 1.0, 2, 2).unwrap();
        let s = solve(&m, ProblemKind::SteklovDirichlet, 10).unwrap();
        assert_eq!(s.len(), 1);
        assert!(solve(&build_disk(2, 8).unwrap(), ProblemKind::SteklovNeumann, 2).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = build_rectangle(PI, 1.0, 8, 4).unwrap();
        let s = solve(&m, ProblemKind::SteklovNeumann, 2).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("k,lambda,residual\n1,"));
        assert_eq!(csv.lines().count(), 3);
        assert!(s.vectors_csv().lines().nth(1).unwrap().starts_with("1,0,"));
    }
}
