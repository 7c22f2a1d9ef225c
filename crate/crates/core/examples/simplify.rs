//! Drive the leading seven disk eigenvalues to numerical simplicity with a
//! budget of 0.05, halving it at every step.

use sloshlab::geometry::{build_disk, ProblemKind, Tag};
use sloshlab::splitting::simplify_spectrum;

fn main() -> sloshlab::Result<()> {
    let mesh = build_disk(16, 64)?;
    let trace = simplify_spectrum(&mesh, ProblemKind::PureSteklov, 7, 0.05, Tag::S, 7)?;
    println!("outcome {:?} after {} step(s)", trace.outcome, trace.steps.len());
    for st in &trace.steps {
        println!("  step {}: cluster at {:.4}, budget {}, t = {}, spent {:.4}", st.iteration, st.cluster.center, st.budget, st.t, st.spent);
    }
    println!("before {:?}", trace.initial_lambda);
    println!("after  {:?}", trace.final_lambda);
    let smallest = trace.final_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    println!("smallest relative gap {smallest:.3e}, total spent {:.4}", trace.total_spent);
    Ok(())
}
