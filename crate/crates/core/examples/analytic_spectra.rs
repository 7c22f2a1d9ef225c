//! Sloshing and Steklov-Dirichlet spectra of the rectangle [0, pi] x [-1, 0]
//! against the separated-variable values k tanh(k) and k coth(k).

use sloshlab::geometry::{build_rectangle, refine, ProblemKind};
use sloshlab::spectral::solve;

fn main() -> sloshlab::Result<()> {
    let mesh = refine(&build_rectangle(std::f64::consts::PI, 1.0, 32, 32)?);
    println!("{} vertices", mesh.n_vertices());

    let sn = solve(&mesh, ProblemKind::SteklovNeumann, 6)?;
    println!("sloshing (lambda_0 = 0 is the constant mode)");
    for k in 1..6 {
        let exact = k as f64 * (k as f64).tanh();
        println!("  k={k}  fem {:.6}  exact {exact:.6}  rel {:.2e}", sn.lambda[k], (sn.lambda[k] - exact).abs() / exact);
    }

    let sd = solve(&mesh, ProblemKind::SteklovDirichlet, 5)?;
    println!("walls clamped");
    for k in 1..=5 {
        let exact = k as f64 / (k as f64).tanh();
        println!("  k={k}  fem {:.6}  exact {exact:.6}  rel {:.2e}", sd.lambda[k - 1], (sd.lambda[k - 1] - exact).abs() / exact);
    }
    Ok(())
}
