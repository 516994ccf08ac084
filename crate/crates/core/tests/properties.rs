//! Randomized cross-family invariants.
//!
//! The unit tests inside each module pin behaviour on hand-checked
//! instances; these properties assert the structural guarantees the
//! library trades on — error bounds certified by the declared PL
//! constant, surrogate gaps that never undercut exact gaps, the
//! alternating update order, bit-level solver reductions, and
//! round-trippable trace files — over randomly drawn instances and
//! points.

use proptest::prelude::*;
use saddlebench::linalg;
use saddlebench::metrics;
use saddlebench::problems::{MinimaxProblem, Point, QuadraticSaddle};
use saddlebench::rng::{RngStream, StreamId};
use saddlebench::solvers::{
    smoothed_agda_step, stoc_agda_step, theorem1_stepsizes, SolverState, StepSizes,
};

/// A point inside the problem's declared test box, drawn from the seeded
/// stream so failures replay exactly.
fn box_point(problem: &MinimaxProblem, seed: u64) -> Point {
    let mut rng = RngStream::new(seed, StreamId::Init);
    problem.sample_box_point(&mut rng)
}

/// Strategy over the scalar saddle family `(a/2)x² + bxy − (c/2)y²`,
/// keeping the concavity modulus away from zero so the conditioning stays
/// printable.
fn quadratic_instance() -> impl Strategy<Value = MinimaxProblem> {
    (-3.0f64..3.0, -3.0f64..3.0, 0.05f64..5.0)
        .prop_map(|(a, b, c)| {
            let q = QuadraticSaddle::new(a, b, c).expect("c > 0");
            MinimaxProblem::quadratic_saddle(q, 0.0).expect("valid coefficients")
        })
}

proptest! {
    /// The declared PL constant certifies both halves of the error bound:
    /// the y-gradient dominates μ·dist(y, argmax) and the primal gap
    /// dominates (μ/2)·dist².
    #[test]
    fn pl_constant_certifies_error_and_growth_on_quadratics(
        problem in quadratic_instance(),
        seed in any::<u64>(),
    ) {
        let pt = box_point(&problem, seed);
        let mu = problem.pl_mu();
        let (_, gy) = problem.grad(&pt).unwrap();
        let dist = problem.dist_to_argmax(&pt).unwrap();
        let slack = 1e-9 * (1.0 + dist);
        prop_assert!(
            linalg::norm(&gy) + slack >= mu * dist,
            "‖∇_y f‖ = {} < μ·dist = {}",
            linalg::norm(&gy),
            mu * dist
        );
        let gap = problem.phi(&pt.x).unwrap() - problem.value(&pt).unwrap();
        prop_assert!(
            gap + 1e-9 * (1.0 + gap.abs()) >= 0.5 * mu * dist * dist,
            "Φ − f = {gap} < (μ/2)·dist² = {}",
            0.5 * mu * dist * dist
        );
    }

    /// Same certificates on the rank-deficient family, where the argmax is
    /// an affine subspace rather than a point.
    #[test]
    fn pl_constant_certifies_error_and_growth_on_degenerate(
        dim_x in 2usize..5,
        dim_y in 2usize..5,
        depth in 0.5f64..4.0,
        structure_seed in any::<u64>(),
        point_seed in any::<u64>(),
    ) {
        let rank = 1 + structure_seed as usize % dim_y.saturating_sub(1).max(1);
        let problem = MinimaxProblem::degenerate_quadratic(
            dim_x,
            dim_y,
            rank.min(dim_y),
            depth,
            structure_seed,
            0.0,
        )
        .unwrap();
        let pt = box_point(&problem, point_seed);
        let mu = problem.pl_mu();
        let (_, gy) = problem.grad(&pt).unwrap();
        let dist = problem.dist_to_argmax(&pt).unwrap();
        prop_assert!(
            linalg::norm(&gy) + 1e-9 * (1.0 + dist) >= mu * dist,
            "‖∇_y f‖ = {} < μ·dist = {} (rank {rank})",
            linalg::norm(&gy),
            mu * dist
        );
        let gap = problem.phi(&pt.x).unwrap() - problem.value(&pt).unwrap();
        prop_assert!(
            gap + 1e-9 * (1.0 + gap.abs()) >= 0.5 * mu * dist * dist,
            "Φ − f = {gap} < (μ/2)·dist² = {}",
            0.5 * mu * dist * dist
        );
    }

    /// The always-computable surrogate duality gap upper-bounds the exact
    /// anchored gap wherever the exact one exists.
    #[test]
    fn surrogate_gap_never_undercuts_exact(
        problem in quadratic_instance(),
        anchor in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let pt = box_point(&problem, seed);
        let bound = metrics::gap_bound(&problem, &[anchor], &pt).unwrap();
        let exact = bound.exact.expect("closed forms on the quadratic family");
        prop_assert!(exact >= -1e-9, "exact anchored gap must be nonnegative, got {exact}");
        prop_assert!(
            bound.surrogate + 1e-9 * (1.0 + exact.abs()) >= exact,
            "surrogate {} undercuts exact {exact}",
            bound.surrogate
        );
    }

    /// The alternating step updates x from the old point and y from the
    /// *updated* x — the defining order of the method, recovered here
    /// numerically from one noise-free step.
    #[test]
    fn alternating_step_queries_y_at_updated_x(
        problem in quadratic_instance(),
        seed in any::<u64>(),
        tau1 in 1e-4f64..0.2,
        tau2 in 1e-4f64..0.2,
    ) {
        let pt = box_point(&problem, seed);
        let s = StepSizes::plain(tau1, tau2).unwrap();
        let state = SolverState::new(&problem, pt.clone(), seed).unwrap();
        let stepped = stoc_agda_step(&problem, state, &s).unwrap();

        let (gx_old, gy_old) = problem.grad(&pt).unwrap();
        let expected_x: Vec<f64> =
            pt.x.iter().zip(&gx_old).map(|(x, g)| x - tau1 * g).collect();
        prop_assert_eq!(&stepped.point.x, &expected_x);

        let mid = Point::new(expected_x, pt.y.clone());
        let (_, gy_new) = problem.grad(&mid).unwrap();
        let expected_y: Vec<f64> =
            pt.y.iter().zip(&gy_new).map(|(y, g)| y + tau2 * g).collect();
        prop_assert_eq!(&stepped.point.y, &expected_y);
        // And it must differ from the simultaneous update whenever the
        // cross term makes the two gradients disagree.
        if tau1 * gx_old[0] != 0.0 && gy_new[0] != gy_old[0] {
            prop_assert_ne!(stepped.point.y[0], pt.y[0] + tau2 * gy_old[0]);
        }
        prop_assert_eq!(stepped.oracle_calls, 2);
        prop_assert_eq!(stepped.iter, 1);
    }

    /// With β = 1 or p = 0 the smoothed step is the plain step, bit for
    /// bit, including under a noisy oracle with shared seeds.
    #[test]
    fn smoothed_step_reduces_to_plain_bitwise(
        ab in (-2.0f64..2.0, -2.0f64..2.0),
        c in 0.2f64..3.0,
        seed in any::<u64>(),
        tau1 in 1e-3f64..0.05,
        tau2 in 1e-3f64..0.05,
        p in 0.1f64..5.0,
        beta in 0.01f64..0.99,
    ) {
        let q = QuadraticSaddle::new(ab.0, ab.1, c).unwrap();
        let problem = MinimaxProblem::quadratic_saddle(q, 1.0).unwrap();
        let start = box_point(&problem, seed);

        let plain = StepSizes::plain(tau1, tau2).unwrap();
        let beta_one = StepSizes::smoothed(tau1, tau2, p, 1.0).unwrap();
        let p_zero = StepSizes::smoothed(tau1, tau2, 0.0, beta).unwrap();

        let mut a = SolverState::new(&problem, start.clone(), seed).unwrap();
        let mut b = SolverState::new(&problem, start.clone(), seed)
            .unwrap()
            .with_proximal_center();
        let mut d = SolverState::new(&problem, start, seed)
            .unwrap()
            .with_proximal_center();
        for _ in 0..20 {
            a = stoc_agda_step(&problem, a, &plain).unwrap();
            b = smoothed_agda_step(&problem, b, &beta_one).unwrap();
            d = smoothed_agda_step(&problem, d, &p_zero).unwrap();
            for i in 0..a.point.x.len() {
                prop_assert_eq!(a.point.x[i].to_bits(), b.point.x[i].to_bits());
                prop_assert_eq!(a.point.x[i].to_bits(), d.point.x[i].to_bits());
            }
            for i in 0..a.point.y.len() {
                prop_assert_eq!(a.point.y[i].to_bits(), b.point.y[i].to_bits());
                prop_assert_eq!(a.point.y[i].to_bits(), d.point.y[i].to_bits());
            }
        }
    }

    /// The descent potential V = Φ + (1/8)(Φ − f) is monotone along
    /// noise-free alternating trajectories at the theorem stepsizes, on
    /// any instance of the scalar family — not just the reference one.
    #[test]
    fn potential_descends_at_theorem_stepsizes(
        ab in (-2.0f64..2.0, -2.0f64..2.0),
        c in 0.3f64..3.0,
        seed in any::<u64>(),
    ) {
        let q = QuadraticSaddle::new(ab.0, ab.1, c).unwrap();
        let problem = MinimaxProblem::quadratic_saddle(q, 0.0).unwrap();
        let s = theorem1_stepsizes(problem.smoothness_l(), problem.pl_mu(), 0.0, 1_000, 1.0)
            .unwrap();
        let mut state = SolverState::new(&problem, box_point(&problem, seed), seed).unwrap();
        let mut v = metrics::potential_agda(&problem, &state.point).unwrap().value;
        for t in 0..60 {
            state = stoc_agda_step(&problem, state, &s).unwrap();
            let next = metrics::potential_agda(&problem, &state.point).unwrap().value;
            prop_assert!(
                next <= v + 1e-12 * v.abs().max(1.0),
                "potential rose at step {t}: {v} → {next}"
            );
            v = next;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The inner-solve estimation paths agree with the closed forms they
    /// fall back from: primal-gradient norm within its reported tolerance,
    /// envelope-gradient norm within the requested one.
    #[test]
    fn estimated_metrics_match_closed_forms(
        problem in quadratic_instance(),
        seed in any::<u64>(),
    ) {
        let pt = box_point(&problem, seed);
        let exact = linalg::norm(&problem.grad_phi_exact(&pt.x).unwrap());
        let est = metrics::grad_phi_estimated(&problem, &pt.x, 1e-6).unwrap();
        prop_assert!(!est.exact);
        prop_assert!(
            (est.value - exact).abs() <= 1e-6 + 1e-9 * exact,
            "‖∇Φ‖ estimate {} vs closed form {exact}",
            est.value
        );

        let moreau_exact = metrics::moreau_grad(&problem, &pt.x, 1e-8).unwrap();
        prop_assert!(moreau_exact.exact);
        let moreau_est = metrics::moreau_grad_estimated(&problem, &pt.x, 1e-6).unwrap();
        prop_assert!(
            (moreau_est.value - moreau_exact.value).abs() <= 1e-6 + 1e-9 * moreau_exact.value,
            "envelope-gradient estimate {} vs closed form {}",
            moreau_est.value,
            moreau_exact.value
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Trace files round-trip arbitrary finite values bit-exactly, so a
    /// re-read trace is byte-equivalent evidence of the run that wrote it.
    #[test]
    fn trace_values_roundtrip_bitwise(
        values in prop::collection::vec(
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            1..6,
        ),
        iter in any::<u64>(),
        calls in any::<u64>(),
    ) {
        use saddlebench::harness::trace::{format_value, read_trace, write_trace, Trace, TraceRow};

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        let columns: Vec<String> =
            (0..values.len()).map(|i| format!("col{i}")).collect();
        let trace = Trace {
            columns,
            rows: vec![TraceRow {
                iter,
                oracle_calls: calls,
                values: values.iter().map(|&v| format_value(v)).collect(),
                elapsed_ns: None,
            }],
            diverged: None,
            timing: false,
        };
        write_trace(&path, &trace, &["header echo".to_string()]).unwrap();
        let back = read_trace(&path).unwrap();
        prop_assert_eq!(back.rows.len(), 1);
        prop_assert_eq!(back.rows[0].iter, iter);
        prop_assert_eq!(back.rows[0].oracle_calls, calls);
        for (i, &v) in values.iter().enumerate() {
            let parsed: f64 = back.rows[0].values[i].parse().unwrap();
            prop_assert_eq!(parsed.to_bits(), v.to_bits(), "column {}", i);
        }
    }
}
