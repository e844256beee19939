use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use mallows_lab::boot::bootstrap_root_exact;
use mallows_lab::bridge::limit_discrete;
use mallows_lab::dist::{DistributionModel, EmpiricalDistribution, Law, StepDistribution};
use mallows_lab::mallows::{
    discrete_event_power, distance, distance_emp_step_cellwise, distance_step_step, moment_gap_lower_bound,
};
use mallows_lab::stats::loglog_slope;

fn step_law() -> impl Strategy<Value = StepDistribution> {
    (prop::collection::btree_set(-40i32..40, 1..7), prop::collection::vec(1u32..20, 7)).prop_map(|(atoms, w)| {
        let atoms: Vec<f64> = atoms.into_iter().map(|k| k as f64 * 0.37).collect();
        let w = &w[..atoms.len()];
        let total: u32 = w.iter().sum();
        let masses = w.iter().map(|&v| v as f64 / total as f64).collect();
        StepDistribution::new(atoms, masses).unwrap()
    })
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(3.0), 1.0f64..4.0]
}

fn model() -> impl Strategy<Value = DistributionModel> {
    prop_oneof![
        (-5.0f64..5.0, 0.1f64..5.0).prop_map(|(a, w)| DistributionModel::uniform(a, a + w).unwrap()),
        (-5.0f64..5.0, 0.1f64..5.0).prop_map(|(m, s)| DistributionModel::normal(m, s).unwrap()),
        (0.1f64..5.0).prop_map(|r| DistributionModel::exponential(r).unwrap()),
        (-1.0f64..1.0, 0.1f64..1.0).prop_map(|(m, s)| DistributionModel::lognormal(m, s).unwrap()),
        (0.5f64..3.0, 2.5f64..8.0).prop_map(|(x, a)| DistributionModel::pareto(x, a).unwrap()),
    ]
}

fn step_d(f: &StepDistribution, g: &StepDistribution, r: f64) -> f64 {
    distance_step_step(f, g, r).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn galois_property(m in model(), p in 0.0005f64..0.9995, u in 0.0005f64..0.9995) {
        let q = m.quantile(p).unwrap();
        prop_assert!(m.cdf(q) >= p - 1e-12, "F(Q(p)) = {} < p = {}", m.cdf(q), p);
        let x = m.quantile(u).unwrap();
        let fx = m.cdf(x);
        if fx > 0.0 && fx < 1.0 {
            let back = m.quantile(fx).unwrap();
            prop_assert!(back <= x + 1e-9 * (1.0 + x.abs()), "Q(F(x)) = {} > x = {}", back, x);
        }
    }

    #[test]
    fn step_galois_property(f in step_law(), p in 0.001f64..0.999) {
        let q = f.quantile(p).unwrap();
        prop_assert!(f.cdf(q) >= p - 1e-12);
        for &x in f.atoms() {
            let fx = f.cdf(x);
            if fx < 1.0 {
                prop_assert!(f.quantile(fx).unwrap() <= x);
            }
        }
    }

    #[test]
    fn metric_axioms(f in step_law(), g in step_law(), h in step_law(), r in order()) {
        let fg = step_d(&f, &g, r);
        prop_assert_eq!(fg, step_d(&g, &f, r));
        prop_assert_eq!(step_d(&f, &f, r), 0.0);
        prop_assert!(fg <= step_d(&f, &h, r) + step_d(&h, &g, r) + 1e-10);
        if f.atoms() != g.atoms() || f.masses().iter().zip(g.masses()).any(|(a, b)| (a - b).abs() > 1e-12) {
            prop_assert!(fg > 0.0);
        }
    }

    #[test]
    fn affine_scaling(f in step_law(), g in step_law(), a in -4.0f64..4.0, b in -10.0f64..10.0, r in order()) {
        prop_assume!(a.abs() > 1e-3);
        let d = step_d(&f, &g, r);
        let scaled = step_d(&f.affine(a, b).unwrap(), &g.affine(a, b).unwrap(), r);
        prop_assert!((scaled - a.abs() * d).abs() <= 1e-12 * (1.0 + a.abs() * d));
    }

    #[test]
    fn moment_gap_is_below_distance(f in step_law(), g in step_law(), r in order()) {
        let (lf, lg) = (Law::Step(f), Law::Step(g));
        let bound = moment_gap_lower_bound(&lf, &lg, r).unwrap();
        let d = distance(&lf, &lg, r).unwrap().value;
        prop_assert!(bound <= d + 1e-12 * (1.0 + d), "{} > {}", bound, d);
    }

    #[test]
    fn empirical_step_round_trip(values in prop::collection::vec(-5i32..5, 1..30), p in 0.001f64..0.999) {
        let sample = EmpiricalDistribution::from_values(values.iter().map(|&v| v as f64).collect()).unwrap();
        let step = sample.to_step();
        let n = sample.len() as f64;
        prop_assume!(((p * n) - (p * n).round()).abs() > 1e-9);
        prop_assert_eq!(sample.quantile(p).unwrap(), step.quantile(p).unwrap());
    }

    #[test]
    fn cellwise_agrees_with_merge(values in prop::collection::vec(-30i32..30, 1..40), g in step_law(), r in order()) {
        let sample = EmpiricalDistribution::from_values(values.iter().map(|&v| v as f64 * 0.37).collect()).unwrap();
        let merged = distance_step_step(&sample.to_step(), &g, r).unwrap().value_pow_r;
        let cellwise = distance_emp_step_cellwise(&sample, &g, r).unwrap().value_pow_r;
        prop_assert!((merged - cellwise).abs() <= 1e-12 * (1.0 + merged));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn discrete_event_closed_form(f in step_law(), n in 50usize..2000, seed in any::<u64>(), r in order()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sample = Law::Step(f.clone()).sample(n, &mut rng).unwrap();
        if let Some(power) = discrete_event_power(&sample, &f, r) {
            let direct = distance_step_step(&sample.to_step(), &f, r).unwrap().value_pow_r;
            prop_assert!((direct - power).abs() <= 1e-12, "{} vs {}", direct, power);
        }
    }

    #[test]
    fn abs_moment_quadrature_matches_closed_form(m in model(), r in prop_oneof![Just(1.0), Just(2.0), 1.0f64..2.4]) {
        let closed = m.abs_moment(r).unwrap();
        let quad = m.abs_moment_quadrature(r).unwrap().value;
        prop_assert!((closed - quad).abs() <= 1e-8 * closed.abs().max(1e-300), "{}: {} vs {}", m, closed, quad);
    }

    #[test]
    fn limit_draws_are_nonnegative(f in step_law(), r in order(), seed in any::<u64>()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sample = limit_discrete(&f, r, 200, &mut rng).unwrap();
        prop_assert!(sample.draws.iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn exact_bootstrap_root_is_centred(values in prop::collection::vec(-10.0f64..10.0, 1..=6)) {
        let sample = EmpiricalDistribution::from_values(values).unwrap();
        let root = bootstrap_root_exact(&sample).unwrap();
        prop_assert!(root.mean().abs() <= 1e-13, "mean {}", root.mean());
    }

    #[test]
    fn slope_fit_recovers_power_laws(c in 0.01f64..100.0, beta in 0.05f64..2.0) {
        let sizes: Vec<usize> = (6..=14).map(|k| 1usize << k).collect();
        let values: Vec<f64> = sizes.iter().map(|&n| c * (n as f64).powf(-beta)).collect();
        let fit = loglog_slope(&sizes, &values);
        prop_assert!((fit.slope + beta).abs() < 1e-12, "{} vs {}", fit.slope, -beta);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupling_monte_carlo_oracle(f in step_law(), g in step_law(), r in order(), seed in any::<u64>()) {
        const DRAWS: usize = 1_000_000;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        for _ in 0..DRAWS {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let v = (f.quantile(u).unwrap() - g.quantile(u).unwrap()).abs().powf(r);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / DRAWS as f64;
        let se = ((sum_sq / DRAWS as f64 - mean * mean).max(0.0) / DRAWS as f64).sqrt();
        let exact = distance_step_step(&f, &g, r).unwrap().value_pow_r;
        prop_assert!((mean - exact).abs() <= 4.0 * se + 1e-12, "mc {} ± {} vs {}", mean, se, exact);
    }
}

#[test]
fn tied_sample_distances_do_not_depend_on_order() {
    let values = [3.0, 1.0, 1.0, 2.0, 3.0, 3.0];
    let mut reversed = values;
    reversed.reverse();
    let a = EmpiricalDistribution::from_values(values.to_vec()).unwrap();
    let b = EmpiricalDistribution::from_values(reversed.to_vec()).unwrap();
    let atoms: BTreeSet<i64> = values.iter().map(|v| *v as i64).collect();
    assert_eq!(a.to_step().len(), atoms.len());
    assert_eq!(distance(&Law::Empirical(a), &Law::Empirical(b), 2.0).unwrap().value, 0.0);
}
