//! Pure Steklov spectrum of the unit disk: 0, then each integer twice.

use sloshlab::geometry::{build_disk, ProblemKind};
use sloshlab::spectral::{detect_clusters, solve};

fn main() -> sloshlab::Result<()> {
    let mesh = build_disk(32, 128)?;
    let s = solve(&mesh, ProblemKind::PureSteklov, 7)?;
    for (k, (l, r)) in s.lambda.iter().zip(&s.residuals).enumerate() {
        println!("lambda_{k} = {l:.8}   residual {r:.1e}");
    }
    for c in detect_clusters(&s, 1e-6) {
        println!("cluster at {:.6}: multiplicity {}, relative width {:.1e}", c.center, c.multiplicity, c.rel_width);
    }
    Ok(())
}
