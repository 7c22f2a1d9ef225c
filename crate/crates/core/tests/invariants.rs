use proptest::prelude::*;

use sloshlab::geometry::{build_disk, build_rectangle, ProblemKind, Tag};
use sloshlab::hadamard::cluster_matrix;
use sloshlab::perturb::{normal_bump, transplant, PerturbationField};
use sloshlab::spectral::{detect_clusters, detect_clusters_in, solve, Cluster};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cluster_matrix_is_symmetric_and_linear_in_amplitude(theta in 0.0..std::f64::consts::TAU, r in 0.3..0.6f64, amp in 0.005..0.03f64) {
        let mesh = build_disk(8, 32).unwrap();
        let s = solve(&mesh, ProblemKind::PureSteklov, 4).unwrap();
        let pair = detect_clusters(&s, 1e-6)[0];
        let psi = normal_bump(&mesh, [theta.cos(), theta.sin()], r, amp, Tag::S).unwrap();
        let m = cluster_matrix(&mesh, &s, &pair, &psi).unwrap().matrix();
        prop_assert!((m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * m.norm());
        let m2 = cluster_matrix(&mesh, &s, &pair, &psi.scaled(2.0)).unwrap().matrix();
        prop_assert!((m2 - 2.0 * &m).norm() <= 1e-12 * m.norm());
    }

    #[test]
    fn transplant_at_zero_is_identity(x in 0.5..2.6f64, r in 0.2..0.45f64) {
        let mesh = build_rectangle(std::f64::consts::PI, 1.0, 12, 6).unwrap();
        let psi = normal_bump(&mesh, [x, 0.0], r, 0.01, Tag::S).unwrap();
        let rec = transplant(&mesh, &psi, 0.0).unwrap();
        prop_assert_eq!(rec.mesh.vertices(), mesh.vertices());
    }

    #[test]
    fn clusters_partition_close_values(mut v in prop::collection::vec(0.0..10.0f64, 1..30), tol in 1e-6..1e-1f64) {
        v.sort_by(f64::total_cmp);
        let clusters = detect_clusters_in(&v, tol);
        let mut last_end = 0;
        for c in &clusters {
            prop_assert!(c.multiplicity >= 2);
            prop_assert!(c.start >= last_end);
            for i in c.start..c.start + c.multiplicity - 1 {
                prop_assert!(v[i + 1] - v[i] <= tol * v[i + 1].abs().max(1.0));
            }
            last_end = c.start + c.multiplicity;
        }
    }

    #[test]
    fn translations_do_not_move_eigenvalues(bx in -0.3..0.3f64, by in -0.3..0.3f64) {
        let mesh = build_rectangle(std::f64::consts::PI, 1.0, 12, 6).unwrap();
        let s0 = solve(&mesh, ProblemKind::SteklovDirichlet, 3).unwrap();
        let moved = transplant(&mesh, &PerturbationField::translation([bx, by]), 1.0).unwrap().mesh;
        let s1 = solve(&moved, ProblemKind::SteklovDirichlet, 3).unwrap();
        for k in 0..3 {
            prop_assert!((s1.lambda[k] - s0.lambda[k]).abs() <= 1e-11 * s0.lambda[k]);
        }
        let c = Cluster::from_range(&s0.lambda, 0..1);
        let d = cluster_matrix(&mesh, &s0, &c, &PerturbationField::translation([bx, by])).unwrap();
        prop_assert!(d.matrix().norm() <= 1e-12);
    }
}
