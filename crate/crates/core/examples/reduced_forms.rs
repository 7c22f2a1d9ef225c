//! For a wall bump on the clamped rectangle, the boundary flux formula and the
//! volume form give the same matrix up to a multiple of the identity.

use sloshlab::geometry::{build_rectangle, refine, ProblemKind, Tag};
use sloshlab::hadamard::{cluster_matrix, gauge_discrepancy, reduced_matrix, ReducedCase};
use sloshlab::perturb::normal_bump;
use sloshlab::spectral::{solve, Cluster};

fn main() -> sloshlab::Result<()> {
    let mut mesh = build_rectangle(std::f64::consts::PI, 1.0, 16, 8)?;
    for level in 0..3 {
        let s = solve(&mesh, ProblemKind::SteklovDirichlet, 3)?;
        // the two lowest modes, treated as one block
        let block = Cluster::from_range(&s.lambda, 0..2);
        let psi = normal_bump(&mesh, [1.2, -1.0], 0.6, 0.02, Tag::W)?;
        let volume = cluster_matrix(&mesh, &s, &block, &psi)?.matrix();
        let boundary = reduced_matrix(ReducedCase::SdW, &mesh, &s, &block, &psi)?;
        println!("level {level}: {} vertices, discrepancy {:.3e}", mesh.n_vertices(), gauge_discrepancy(&volume, &boundary));
        mesh = refine(&mesh);
    }
    Ok(())
}
