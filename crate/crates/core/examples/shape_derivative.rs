//! Cluster derivative of the double eigenvalue lambda = 1 on the disk under a
//! free-surface bump, checked against finite differences of moved meshes.
//! Also shows the dilation law lambda' = -lambda.

use sloshlab::geometry::{build_disk, ProblemKind, Tag};
use sloshlab::hadamard::{cluster_matrix, fd_slopes};
use sloshlab::perturb::{normal_bump, PerturbationField};
use sloshlab::spectral::{detect_clusters, solve};

fn main() -> sloshlab::Result<()> {
    let mesh = build_disk(16, 64)?;
    let kind = ProblemKind::PureSteklov;
    let s = solve(&mesh, kind, 5)?;
    let pair = detect_clusters(&s, 1e-6)[0];

    let bump = normal_bump(&mesh, [0.6, 0.8], 0.5, 0.02, Tag::S)?;
    let cd = cluster_matrix(&mesh, &s, &pair, &bump)?;
    let fd = fd_slopes(&mesh, &bump, &pair, kind, &[1e-3, 2e-3, 4e-3])?;
    println!("M = {:?}", cd.matrix);
    println!("no-splitting score {:.4}", cd.score.unwrap_or(0.0));
    for k in 0..2 {
        println!("branch {k}: predicted {:+.6e}  measured {:+.6e}  (R^2 {:.6})", cd.lambda_slopes[k], fd.lambda_slopes[k], fd.r2[k]);
    }

    let dil = cluster_matrix(&mesh, &s, &pair, &PerturbationField::dilation())?;
    println!("dilation slopes {:?} (expected -{:.4})", dil.lambda_slopes, pair.center);
    Ok(())
}
