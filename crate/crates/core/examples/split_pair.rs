//! Search for a free-surface bump that splits the lambda = 1 pair of the disk,
//! then confirm the split by recomputing the spectrum along the field.

use sloshlab::geometry::{build_disk, ProblemKind, Tag};
use sloshlab::spectral::{detect_clusters, solve};
use sloshlab::splitting::{find_splitting, verify_split, SearchOptions};

fn main() -> sloshlab::Result<()> {
    let mesh = build_disk(16, 64)?;
    let kind = ProblemKind::PureSteklov;
    let s = solve(&mesh, kind, 4)?;
    let pair = detect_clusters(&s, 1e-6)[0];
    let opts = SearchOptions { n_candidates: 16, seed: 7, ..Default::default() };
    let (field, cd) = find_splitting(&mesh, &s, &pair, Tag::S, 0.05, &opts)?;
    println!("best field {} with score {:.4}", field.id(), cd.score.unwrap_or(0.0));

    let report = verify_split(&mesh, &field, &pair, kind, &[0.125, 0.25, 0.5, 1.0])?;
    println!("gap slope {:.4e} vs predicted {:.4e}, R^2 {:.6}", report.fitted_slope, report.predicted_spread, report.r2);
    println!("verdict {:?}", report.verdict);
    let path = std::env::temp_dir().join("sloshlab_branch_fan.svg");
    std::fs::write(&path, report.to_svg())?;
    println!("branch fan written to {}", path.display());
    Ok(())
}
