//! The first eigenvector maximises the free-surface energy over the unit ball
//! of the energy norm. Random trials never beat it.

use sloshlab::geometry::{build_half_disk, build_rectangle, ProblemKind};
use sloshlab::spectral::{minmax_check, solve};

fn main() -> sloshlab::Result<()> {
    let rect = build_rectangle(std::f64::consts::PI, 1.0, 24, 12)?;
    let half = build_half_disk(8, 32)?;
    for (name, mesh, kind) in [
        ("rectangle sd", &rect, ProblemKind::SteklovDirichlet),
        ("rectangle sn", &rect, ProblemKind::SteklovNeumann),
        ("half-disk sn", &half, ProblemKind::SteklovNeumann),
    ] {
        let s = solve(mesh, kind, 3)?;
        let r = minmax_check(&s, 100, 11);
        println!("{name}: {} violations in {} trials, worst margin {:.2e}, attainment {:.1e}", r.violations, r.trials, r.worst_margin, r.attainment_error);
    }
    Ok(())
}
