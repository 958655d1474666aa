mod common;

use ndarray::Array1;
use proptest::prelude::*;
use shrinkage::bounds::{PgdBound, ProxMBound, PsgdBound};
use shrinkage::gaussian::{gamma_mean_norm, phi, phi_inverse, sample_design, RngSeed};
use shrinkage::geometry::{
    gaussian_distance_sq_analytic_l1, project_l1_ball, project_l2_ball, project_sparse, prox_l1, L1TangentCone,
    Regularizer,
};
use shrinkage::harness::{ExperimentConfig, ExperimentKind, SolverKind};
use shrinkage::links::{link_stats_analytic, Link};
use shrinkage::solvers::{
    lambda_schedule_step, pgd_solve, psgd_solve, sparse_unit_vector, Problem, ProxSchedule, SolverConfig,
};

use common::{brute_l1_projection, brute_sparse_projection, dykstra_l1_cone, max_abs_diff, norm};

fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..=max_len)
}

fn pair_strategy(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_len).prop_flat_map(|p| (prop::collection::vec(-3.0f64..3.0, p), prop::collection::vec(-3.0f64..3.0, p)))
}

fn arr(v: &[f64]) -> Array1<f64> {
    Array1::from(v.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn l1_projection_matches_face_enumeration(v in vec_strategy(6), r in 0.05f64..4.0) {
        let got = project_l1_ball(arr(&v).view(), r);
        let want = brute_l1_projection(&v, r);
        prop_assert!(max_abs_diff(got.as_slice().unwrap(), &want) < 1e-9);
    }

    #[test]
    fn sparse_projection_matches_support_search(v in vec_strategy(10), s in 1usize..10) {
        let got = project_sparse(arr(&v).view(), s);
        let want = brute_sparse_projection(&v, s);
        let d_got: f64 = got.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        let d_want: f64 = want.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!((d_got - d_want).abs() < 1e-12);
        prop_assert!(got.iter().filter(|x| **x != 0.0).count() <= s);
    }

    #[test]
    fn projections_are_idempotent(v in vec_strategy(12), r in 0.1f64..3.0, s in 1usize..6) {
        let v = arr(&v);
        for reg in [Regularizer::L1Ball { radius: r }, Regularizer::L2Ball { radius: r }, Regularizer::Sparsity { s }] {
            let once = reg.project(v.view());
            let twice = reg.project(once.view());
            prop_assert!(max_abs_diff(once.as_slice().unwrap(), twice.as_slice().unwrap()) < 1e-12);
            prop_assert!(reg.is_feasible(once.view(), 1e-9));
        }
    }

    #[test]
    fn convex_projections_are_nonexpansive((a, b) in pair_strategy(12), r in 0.1f64..3.0) {
        let (a, b) = (arr(&a), arr(&b));
        let gap = norm((&a - &b).as_slice().unwrap());
        for (pa, pb) in [
            (project_l1_ball(a.view(), r), project_l1_ball(b.view(), r)),
            (project_l2_ball(a.view(), r), project_l2_ball(b.view(), r)),
        ] {
            prop_assert!(norm((&pa - &pb).as_slice().unwrap()) <= gap + 1e-12);
        }
    }

    #[test]
    fn soft_threshold_is_the_prox((v, probe) in pair_strategy(8), lam in 0.0f64..2.0) {
        let v = arr(&v);
        let x = prox_l1(v.view(), lam);
        let objective = |z: &Array1<f64>| 0.5 * (z - &v).mapv(|d| d * d).sum() + lam * z.mapv(f64::abs).sum();
        let other = &x + &(arr(&probe) * 0.1);
        prop_assert!(objective(&x) <= objective(&other) + 1e-12);
    }

    #[test]
    fn cone_projection_matches_dykstra(p in 2usize..=5, s in 1usize..=2, z in vec_strategy(5), seed in 0u64..1000) {
        let s = s.min(p - 1);
        let theta = sparse_unit_vector(p, s, &mut RngSeed(seed).rng()).unwrap();
        let mut z = z;
        z.resize(p, 0.5);
        let got = L1TangentCone::at(theta.view()).project(arr(&z).view());
        let want = dykstra_l1_cone(theta.as_slice().unwrap(), &z, 4000);
        prop_assert!(max_abs_diff(got.as_slice().unwrap(), &want) < 1e-6, "{got} vs {want:?}");
    }

    #[test]
    fn mean_norm_recurrence(n in 1usize..100_000) {
        // b_n b_{n+1} = n exactly, and n − 1/2 < b_n² < n.
        let (a, b) = (gamma_mean_norm(n).unwrap(), gamma_mean_norm(n + 1).unwrap());
        prop_assert!((a * b / n as f64 - 1.0).abs() < 1e-13);
        prop_assert!(a * a < n as f64 && a * a > n as f64 - 0.5);
    }

    #[test]
    fn phi_inverse_round_trip(t in 1.0f64..1e5) {
        let back = phi_inverse(phi(t)).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn l1_distance_grows_with_support(p in 10usize..600, s in 1usize..9, lam in 0.0f64..6.0) {
        let a = gaussian_distance_sq_analytic_l1(s, p, lam).unwrap().g_sq;
        let b = gaussian_distance_sq_analytic_l1(s + 1, p, lam).unwrap().g_sq;
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn pgd_bound_decreases_to_floor(n0 in 1.0f64..50.0, ratio in 9.0f64..200.0, eta in 0.1f64..5.0, init in 0.1f64..10.0) {
        let b = PgdBound { n: n0 * ratio, n0, kappa: 1.0, eta, sigma: 0.6, gamma: 0.6, init_error: init };
        let floor = b.floor().unwrap();
        let mut prev = f64::INFINITY;
        for tau in 0..200 {
            let v = b.at(tau).unwrap();
            prop_assert!(v <= prev && v >= floor);
            prev = v;
        }
        let louder = PgdBound { sigma: 0.7, ..b };
        prop_assert!(louder.floor().unwrap() > floor);
    }

    #[test]
    fn psgd_bound_decreases_to_floor(n0 in 1.0f64..50.0, ratio in 1.1f64..20.0, p in 10.0f64..500.0, init in 0.0f64..4.0) {
        let b = PsgdBound { n: n0 * ratio, n0, p, eta: 2.0, sigma: 0.6, init_error_sq: init };
        let floor = b.floor().unwrap();
        let mut prev = f64::INFINITY;
        for tau in (0..20_000).step_by(97) {
            let v = b.at(tau).unwrap();
            prop_assert!(v <= prev && v >= floor);
            prev = v;
        }
    }

    #[test]
    fn schedule_step_is_affine(m1 in 0.0f64..5.0, m2 in 0.0f64..5.0, rho in 0.05f64..0.95, n in 10usize..5000) {
        let stats = link_stats_analytic(&Link::Sign).unwrap();
        let sched = ProxSchedule { m0: 1.0, rho, lambda: 0.3, t: 0.5, eta: 2.0 };
        let b_n = gamma_mean_norm(n).unwrap();
        let (l1, a) = lambda_schedule_step(m1, &sched, &stats, n, 40.0, b_n);
        let (l2, b) = lambda_schedule_step(m2, &sched, &stats, n, 40.0, b_n);
        prop_assert!(((a - b) - rho * (m1 - m2)).abs() < 1e-12);
        prop_assert!((m1 - m2) * (l1 - l2) >= 0.0);
    }

    #[test]
    fn recursion_stays_under_geometric_bound(m0 in 0.01f64..10.0, rho in 0.01f64..0.99, eta in 0.0f64..5.0, n in 10usize..10_000, n0 in 1.0f64..100.0) {
        let stats = link_stats_analytic(&Link::Sign).unwrap();
        let sched = ProxSchedule { m0, rho, lambda: 0.5, t: 0.0, eta };
        let b_n = gamma_mean_norm(n).unwrap();
        let bound = ProxMBound { m0, rho, eta, sigma: stats.sigma(), gamma: stats.gamma(), n: n as f64, n0_lambda: n0 };
        let mut m = m0;
        for tau in 0..=300 {
            prop_assert!(m <= bound.geometric_at(tau).unwrap() * (1.0 + 1e-12));
            m = lambda_schedule_step(m, &sched, &stats, n, n0, b_n).1;
        }
    }

    #[test]
    fn config_round_trip(
        kind in prop::sample::select(vec![ExperimentKind::OnebitVsLinear, ExperimentKind::PsgdScaling, ExperimentKind::Solve]),
        solver in prop::sample::select(vec![SolverKind::Pgd, SolverKind::Psgd]),
        p in 20usize..400,
        trials in 1usize..50,
        seed in any::<u64>(),
        levels in 2u32..64,
        clip in 0.5f64..4.0,
        radius in 0.1f64..5.0,
    ) {
        let mut c = ExperimentConfig::new(kind);
        c.p = p;
        c.s = Some(p / 20 + 1);
        c.trials = trials;
        c.seed = RngSeed(seed);
        c.solver = solver;
        c.link = Link::Quantize { levels, clip };
        c.regularizer = Regularizer::L2Ball { radius };
        c.p_list = vec![p / 2 + 40, p + 40];
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(c, again);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solvers_are_deterministic(seed in any::<u64>()) {
        let mut rng = RngSeed(seed).rng();
        let theta = sparse_unit_vector(80, 3, &mut rng).unwrap();
        let x = sample_design(60, 80, RngSeed(seed).derive(1)).unwrap();
        let problem = Problem::from_link(x, theta, Link::Sign, (2.0 / std::f64::consts::PI).sqrt()).unwrap();
        let reg = Regularizer::L1Ball { radius: 1.0 };
        let cfg = SolverConfig { seed: RngSeed(seed), trials: 2, ..SolverConfig::with_iters(40) };
        prop_assert_eq!(pgd_solve(&problem, &reg, &cfg).unwrap().to_csv(), pgd_solve(&problem, &reg, &cfg).unwrap().to_csv());
        let a = psgd_solve(&problem, &reg, &cfg).unwrap();
        let b = psgd_solve(&problem, &reg, &cfg).unwrap();
        prop_assert_eq!(a.mean_sq_error, b.mean_sq_error);
        prop_assert_eq!(a.trials[1].to_csv(), b.trials[1].to_csv());
    }
}
