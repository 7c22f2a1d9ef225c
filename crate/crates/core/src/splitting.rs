//! Searching for cluster-splitting perturbations and composing them until the
//! leading spectrum is numerically simple.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dist, MeshDomain, Point, ProblemKind, Tag};
use crate::hadamard::{cluster_matrix, fit_slope, ClusterDerivative};
use crate::perturb::{interior_bump, normal_bump, transplant, PerturbationField, DEFAULT_C2_DENSITY};
use crate::spectral::{detect_clusters_in, solve, Cluster, Spectrum};

/// Scores below this count as "no first-order splitting".
pub const SCORE_EPS: f64 = 1e-8;
pub const DEFAULT_TOL_SIMPLE: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CandidateFamily {
    /// Normal bumps anchored on the chosen boundary side.
    NormalBumps,
    /// Bumps supported inside the domain (never split at first order).
    InteriorBumps,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub n_candidates: usize,
    pub seed: u64,
    pub family: CandidateFamily,
    /// A candidate is eligible only if its predicted eigenvalue spread at full
    /// budget reaches `min_gap * max(1, lambda)`.
    pub min_gap: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            n_candidates: 16,
            seed: 0,
            family: CandidateFamily::NormalBumps,
            min_gap: DEFAULT_TOL_SIMPLE,
        }
    }
}

/// One scored candidate field, scaled so that its C² norm equals the budget.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub field: PerturbationField,
    pub derivative: ClusterDerivative,
    pub score: f64,
    /// Predicted spread of the cluster at `t = 1`.
    pub predicted_spread: f64,
}

struct SidePath {
    edges: Vec<usize>,
    cumulative: Vec<f64>,
}

impl SidePath {
    fn new(mesh: &MeshDomain, side: Tag) -> SidePath {
        let mut edges = Vec::new();
        let mut cumulative = vec![0.0];
        for (e, edge) in mesh.boundary_edges().iter().enumerate() {
            if edge.tag == side {
                edges.push(e);
                cumulative.push(cumulative.last().unwrap() + mesh.edge_length(e));
            }
        }
        SidePath { edges, cumulative }
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn point_at(&self, mesh: &MeshDomain, s: f64) -> Point {
        let k = self.cumulative.partition_point(|&c| c <= s).clamp(1, self.edges.len()) - 1;
        let e = self.edges[k];
        let edge = mesh.boundary_edges()[e];
        let f = ((s - self.cumulative[k]) / mesh.edge_length(e)).clamp(0.0, 1.0);
        let (a, b) = (mesh.vertices()[edge.v[0]], mesh.vertices()[edge.v[1]]);
        let p = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
        edge.arc.map_or(p, |arc| arc.project(p))
    }
}

fn distance_to_tag(mesh: &MeshDomain, p: Point, tag: Tag) -> f64 {
    mesh.nearest_boundary_point(p, Some(tag)).map_or(f64::INFINITY, |(q, _)| dist(p, q))
}

fn normal_bump_candidates(mesh: &MeshDomain, side: Tag, n: usize, rng: &mut ChaCha8Rng) -> Vec<PerturbationField> {
    let path = SidePath::new(mesh, side);
    let len = path.length();
    let [lo, hi] = mesh.bbox();
    let diam = dist(lo, hi);
    let mut out = Vec::new();
    for i in 0..n {
        let s = (i as f64 + rng.gen_range(0.2..0.8)) / n as f64 * len;
        let anchor = path.point_at(mesh, s);
        let mut r: f64 = rng.gen_range(0.08..0.2) * len;
        r = r.min(0.9 * distance_to_tag(mesh, anchor, side.opposite()));
        if let Some((_, e)) = mesh.nearest_boundary_point(anchor, Some(side)) {
            if let Some(arc) = mesh.boundary_edges()[e].arc {
                r = r.min(0.8 * arc.radius);
            }
        }
        if r < 1e-3 * diam {
            continue;
        }
        for _ in 0..4 {
            match normal_bump(mesh, anchor, r, 1.0, side) {
                Ok(f) => {
                    out.push(f);
                    break;
                }
                Err(_) => r *= 0.7,
            }
        }
    }
    out
}

fn interior_candidates(mesh: &MeshDomain, n: usize, rng: &mut ChaCha8Rng) -> Vec<PerturbationField> {
    let [lo, hi] = mesh.bbox();
    let diam = dist(lo, hi);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < 200 * n.max(1) {
        attempts += 1;
        let c = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        let r = rng.gen_range(0.05..0.2) * diam;
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        if let Ok(f) = interior_bump(mesh, c, r, 1.0, [th.cos(), th.sin()]) {
            out.push(f);
        }
    }
    out
}

/// Every candidate of the family, budget-scaled and scored, best first.
pub fn rank_candidates(mesh: &MeshDomain, spectrum: &Spectrum, cluster: &Cluster, side: Tag, budget: f64, opts: &SearchOptions) -> Result<Vec<Candidate>> {
    if cluster.multiplicity < 2 {
        return Err(Error::UndefinedForSimple);
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::invalid(format!("budget must be positive, got {budget}")));
    }
    if opts.family == CandidateFamily::NormalBumps && !mesh.boundary_edges().iter().any(|e| e.tag == side) {
        return Err(Error::invalid(format!("the mesh has no {side} boundary")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unit = match opts.family {
        CandidateFamily::NormalBumps => normal_bump_candidates(mesh, side, opts.n_candidates, &mut rng),
        CandidateFamily::InteriorBumps => interior_candidates(mesh, opts.n_candidates, &mut rng),
    };
    let mut scored: Vec<(usize, Candidate)> = unit
        .into_par_iter()
        .enumerate()
        .map(|(i, f)| {
            let c2 = f.c2_norm_estimate(DEFAULT_C2_DENSITY);
            let field = f.scaled(budget / c2);
            let derivative = cluster_matrix(mesh, spectrum, cluster, &field)?;
            let score = derivative.score.unwrap_or(0.0);
            let predicted_spread = derivative.lambda_spread();
            Ok((i, Candidate { field, derivative, score, predicted_spread }))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(_, c)| c).collect())
}

/// The best-scoring admissible field for `cluster`, with its derivative.
///
/// Candidates must score above [`SCORE_EPS`] and predict a spread of at least
/// `opts.min_gap * max(1, lambda)` at full budget.
pub fn find_splitting(mesh: &MeshDomain, spectrum: &Spectrum, cluster: &Cluster, side: Tag, budget: f64, opts: &SearchOptions) -> Result<(PerturbationField, ClusterDerivative)> {
    let ranked = rank_candidates(mesh, spectrum, cluster, side, budget, opts)?;
    let floor = opts.min_gap * cluster.center.abs().max(1.0);
    let eligible: Vec<&Candidate> = ranked.iter().filter(|c| c.predicted_spread >= floor).collect();
    match eligible.first() {
        Some(c) if c.score > SCORE_EPS => Ok((c.field.clone(), c.derivative.clone())),
        best => {
            if let Some(top) = ranked.first() {
                log::info!(
                    "no eligible candidate: best raw score {:e}, best predicted spread {:e} below floor {floor:e}",
                    top.score,
                    ranked.iter().map(|c| c.predicted_spread).fold(0.0, f64::max)
                );
            }
            Err(Error::NoCandidateFound { best_score: best.map_or(0.0, |c| c.score) })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SplitConfirmed,
    Inconclusive,
    NoSplit,
}

/// Measured splitting of one cluster along `t psi`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub cluster: Cluster,
    pub field: PerturbationField,
    pub field_id: String,
    /// Amplitudes, starting with 0.
    pub t: Vec<f64>,
    /// Cluster eigenvalues (ascending) per amplitude.
    pub lambda: Vec<Vec<f64>>,
    /// Adjacent gaps inside the cluster per amplitude.
    pub gaps: Vec<Vec<f64>>,
    /// `lambda_last - lambda_first` per amplitude.
    pub total_gap: Vec<f64>,
    pub fitted_slope: f64,
    pub r2: f64,
    pub predicted_spread: f64,
    pub score: f64,
    pub verdict: Verdict,
}

impl SplitReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_svg(&self) -> String {
        let branches: Vec<Vec<f64>> = (0..self.cluster.multiplicity)
            .map(|k| self.lambda.iter().map(|row| row[k]).collect())
            .collect();
        branch_fan_svg(&format!("cluster at lambda = {:.6}", self.cluster.center), &self.t, &branches)
    }
}

fn straight_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    // slope of the straight line and its R²
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(x, v)| (x - tm) * (v - ym)).sum();
    (sty / stt, fit_slope(t, y).1)
}

/// Required agreement between the fitted gap slope and the predicted spread.
pub const SPREAD_TOL: f64 = 0.1;
pub const LINEAR_R2: f64 = 0.99;

/// Recomputes the spectrum along `t psi` and fits the cluster gap against `t`.
pub fn verify_split(mesh: &MeshDomain, field: &PerturbationField, cluster: &Cluster, kind: ProblemKind, t_grid: &[f64]) -> Result<SplitReport> {
    let mut t = vec![0.0];
    t.extend(t_grid.iter().copied().filter(|&x| x > 0.0));
    if t.len() < 2 {
        return Err(Error::invalid("t grid needs a positive amplitude"));
    }
    let count = cluster.start + cluster.multiplicity + 1;
    let meshes: Vec<MeshDomain> = t
        .iter()
        .map(|&ti| transplant(mesh, field, ti).map(|r| r.mesh))
        .collect::<Result<_>>()?;
    let spectra: Vec<Spectrum> = meshes.par_iter().map(|m| solve(m, kind, count)).collect::<Result<_>>()?;
    let range = cluster.indices();
    if spectra[0].len() < range.end {
        return Err(Error::invalid("cluster exceeds the computable spectrum"));
    }
    let neighbour_gaps = |s: &Spectrum| {
        (
            (range.start > 0).then(|| s.lambda[range.start] - s.lambda[range.start - 1]),
            (s.len() > range.end).then(|| s.lambda[range.end] - s.lambda[range.end - 1]),
        )
    };
    let (lo0, hi0) = neighbour_gaps(&spectra[0]);
    for (s, &ti) in spectra.iter().zip(&t).skip(1) {
        let (lo, hi) = neighbour_gaps(s);
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
    let local = Cluster::from_range(&spectra[0].lambda, range.clone());
    let cd = cluster_matrix(&meshes[0], &spectra[0], &local, field)?;
    let lambda: Vec<Vec<f64>> = spectra.iter().map(|s| s.lambda[range.clone()].to_vec()).collect();
    let gaps: Vec<Vec<f64>> = lambda.iter().map(|row| row.windows(2).map(|w| w[1] - w[0]).collect()).collect();
    let total_gap: Vec<f64> = lambda.iter().map(|row| row[row.len() - 1] - row[0]).collect();
    let (fitted_slope, r2) = straight_fit(&t, &total_gap);
    let predicted_spread = cd.lambda_spread();
    let score = cd.score.unwrap_or(0.0);
    let verdict = if score < SCORE_EPS {
        if cd.matrix().norm() <= 1e-12 * cd.mu.max(1e-300) {
            Verdict::NoSplit
        } else {
            Verdict::Inconclusive
        }
    } else if r2 >= LINEAR_R2 && (fitted_slope - predicted_spread).abs() <= SPREAD_TOL * predicted_spread.abs() {
        Verdict::SplitConfirmed
    } else {
        Verdict::Inconclusive
    };
    Ok(SplitReport {
        cluster: *cluster,
        field: field.clone(),
        field_id: field.id(),
        t,
        lambda,
        gaps,
        total_gap,
        fitted_slope,
        r2,
        predicted_spread,
        score,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct SimplifyOptions {
    pub tol_simple: f64,
    pub max_iter: usize,
    pub n_candidates: usize,
    /// Fractions of the budget-scaled field tried for the permanent step.
    pub t_fracs: Vec<f64>,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        SimplifyOptions {
            tol_simple: DEFAULT_TOL_SIMPLE,
            max_iter: DEFAULT_MAX_ITER,
            n_candidates: 16,
            t_fracs: vec![0.125, 0.25, 0.5, 1.0],
        }
    }
}

/// One committed perturbation `x -> x + t psi(x)`.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub cluster: Cluster,
    pub field: PerturbationField,
    pub field_id: String,
    pub t: f64,
    pub budget: f64,
    /// `t * ||psi||_C2`.
    pub spent: f64,
    pub score: f64,
    pub predicted_spread: f64,
    /// Relative adjacent gaps among the leading eigenvalues before the step.
    pub gaps_before: Vec<f64>,
    /// Same, after the step.
    pub gaps_after: Vec<f64>,
    pub report: SplitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TraceOutcome {
    Simple,
    MaxIterations,
    NoCandidate { best_score: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplificationTrace {
    pub kind: ProblemKind,
    pub count: usize,
    pub eps: f64,
    pub side: Tag,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub outcome: TraceOutcome,
    pub initial_lambda: Vec<f64>,
    pub final_lambda: Vec<f64>,
    pub final_gaps: Vec<f64>,
    pub total_spent: f64,
    #[serde(skip)]
    pub final_mesh: MeshDomain,
}

impl SimplificationTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.budget).collect()
    }
}

fn relative_gaps(lambda: &[f64]) -> Vec<f64> {
    lambda.windows(2).map(|w| (w[1] - w[0]) / w[1].abs().max(1.0)).collect()
}

fn clustered_count(lambda: &[f64], tol: f64) -> usize {
    detect_clusters_in(lambda, tol).iter().map(|c| c.multiplicity).sum()
}

/// Iteratively splits the first cluster among the leading `count` eigenvalues
/// with budget `eps / 2^l` at step `l`, until the leading spectrum is simple.
pub fn simplify_spectrum(mesh: &MeshDomain, kind: ProblemKind, count: usize, eps: f64, side: Tag, seed: u64) -> Result<SimplificationTrace> {
    simplify_spectrum_with(mesh, kind, count, eps, side, seed, &SimplifyOptions::default())
}

pub fn simplify_spectrum_with(
    mesh: &MeshDomain,
    kind: ProblemKind,
    count: usize,
    eps: f64,
    side: Tag,
    seed: u64,
    opts: &SimplifyOptions,
) -> Result<SimplificationTrace> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!("budget must lie in (0, 1/2), got {eps}")));
    }
    let mut current = mesh.clone();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut initial_lambda = Vec::new();
    let mut total_spent = 0.0;
    let outcome;
    let mut iteration = 0;
    let final_lambda = loop {
        let spectrum = solve(&current, kind, count + 1)?;
        let lead: Vec<f64> = spectrum.lambda[..count.min(spectrum.len())].to_vec();
        if iteration == 0 {
            initial_lambda = lead.clone();
        }
        if let Some(prev) = steps.last_mut() {
            prev.gaps_after = relative_gaps(&lead);
        }
        let clusters = detect_clusters_in(&lead, opts.tol_simple);
        let Some(&cluster) = clusters.first() else {
            outcome = TraceOutcome::Simple;
            break lead;
        };
        if iteration >= opts.max_iter {
            outcome = TraceOutcome::MaxIterations;
            break lead;
        }
        let budget = eps / 2f64.powi(iteration as i32);
        let search = SearchOptions {
            n_candidates: opts.n_candidates,
            seed: seed.wrapping_add(iteration as u64),
            family: CandidateFamily::NormalBumps,
            min_gap: opts.tol_simple,
        };
        let ranked = rank_candidates(&current, &spectrum, &cluster, side, budget, &search)?;
        let Some(best) = ranked.first().filter(|c| c.score > SCORE_EPS) else {
            outcome = TraceOutcome::NoCandidate { best_score: ranked.first().map_or(0.0, |c| c.score) };
            break lead;
        };
        let floor = opts.tol_simple * cluster.center.abs().max(1.0);
        let Some(choice) = ranked.iter().find(|c| c.score > SCORE_EPS && c.predicted_spread >= floor) else {
            outcome = TraceOutcome::Inconclusive {
                reason: format!(
                    "predicted spread {:e} at full budget is below the resolution floor {floor:e}",
                    best.predicted_spread
                ),
            };
            break lead;
        };
        if !choice.field.vanishes_on(&current, side.opposite())? {
            return Err(Error::InvalidSupport(format!("candidate field moves the {} boundary", side.opposite())));
        }
        let Some((t, report)) = largest_linear_step(&current, &choice.field, &cluster, kind, &opts.t_fracs)? else {
            outcome = TraceOutcome::Inconclusive { reason: "no amplitude gave a linear, predicted split".into() };
            break lead;
        };
        let c2 = choice.field.c2_norm_estimate(DEFAULT_C2_DENSITY);
        let spent = t * c2;
        total_spent += spent;
        log::info!("step {iteration}: cluster at {:.6} (m={}), t = {t}, score {:.3}", cluster.center, cluster.multiplicity, choice.score);
        steps.push(TraceStep {
            iteration,
            cluster,
            field: choice.field.clone(),
            field_id: choice.field.id(),
            t,
            budget,
            spent,
            score: choice.score,
            predicted_spread: choice.predicted_spread,
            gaps_before: relative_gaps(&lead),
            gaps_after: Vec::new(),
            report,
        });
        let before = clustered_count(&lead, opts.tol_simple);
        current = transplant(&current, &choice.field, t)?.mesh;
        iteration += 1;
        log::debug!("clustered indices before step: {before}");
    };
    Ok(SimplificationTrace {
        kind,
        count,
        eps,
        side,
        seed,
        final_gaps: relative_gaps(&final_lambda),
        steps,
        outcome,
        initial_lambda,
        final_lambda,
        total_spent,
        final_mesh: current,
    })
}

/// Largest fraction whose prefix fit is linear and matches the prediction.
fn largest_linear_step(mesh: &MeshDomain, field: &PerturbationField, cluster: &Cluster, kind: ProblemKind, fracs: &[f64]) -> Result<Option<(f64, SplitReport)>> {
    let mut grid: Vec<f64> = fracs.to_vec();
    let report = loop {
        if grid.len() < 2 {
            return Ok(None);
        }
        match verify_split(mesh, field, cluster, kind, &grid) {
            Ok(r) => break r,
            Err(Error::TrackingFailure { t, .. }) | Err(Error::MeshFolded { area: t, .. }) => {
                let cut = grid.iter().position(|&g| g >= t).unwrap_or(grid.len() - 1);
                grid.truncate(cut.min(grid.len() - 1));
            }
            Err(Error::AmplitudeTooLarge { .. }) => {
                grid.pop();
            }
            Err(e) => return Err(e),
        }
    };
    for j in (2..report.t.len()).rev() {
        let (slope, r2) = straight_fit(&report.t[..=j], &report.total_gap[..=j]);
        if r2 >= LINEAR_R2 && (slope - report.predicted_spread).abs() <= SPREAD_TOL * report.predicted_spread.abs() {
            return Ok(Some((report.t[j], report)));
        }
    }
    Ok(None)
}

/// `lambda_k(t)` polylines, one per branch, on a fixed 640x400 canvas.
pub fn branch_fan_svg(title: &str, t: &[f64], branches: &[Vec<f64>]) -> String {
    let (w, h, pad) = (640.0, 400.0, 56.0);
    let tmin = t.iter().cloned().fold(f64::INFINITY, f64::min);
    let tmax = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let all = branches.iter().flatten();
    let ymin = all.clone().cloned().fold(f64::INFINITY, f64::min);
    let ymax = all.cloned().fold(f64::NEG_INFINITY, f64::max);
    let span_t = if tmax > tmin { tmax - tmin } else { 1.0 };
    let span_y = if ymax > ymin { ymax - ymin } else { ymin.abs().max(1e-12) };
    let px = |x: f64| pad + (x - tmin) / span_t * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - ymin) / span_y * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, xml_escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-family="sans-serif" font-size="11">{tmin:.3e}</text>"#, h - pad + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{tmax:.3e}</text>"#, w - pad, h - pad + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">t</text>"#, w / 2.0, h - pad + 30.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{ymax:.8}</text>"#, pad + 4.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{ymin:.8}</text>"#, h - pad);
    for (k, b) in branches.iter().enumerate() {
        let pts: Vec<String> = t.iter().zip(b).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            colors[k % colors.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
