use cocycle_lab_core::cocycle::{
    odometer_orbit_cocycle, oracle_orbit_cocycle, BaseFunction, BoundedFunctionSpec, Cocycle,
    CocycleSpec, Modifier,
};
use cocycle_lab_core::diagnostics::{drift_scan, recurrence_estimate, Resolution};
use cocycle_lab_core::empirics::{tau_k, BallMeasure, EmpiricalMeasure};
use cocycle_lab_core::kernels::{g_delta, TriangleKernel};
use cocycle_lab_core::runner::shipped_pairs;
use cocycle_lab_core::systems::{Marginal, OdometerPoint, SystemPoint, SystemSpec, GOLDEN_ALPHA};
use cocycle_lab_core::vector::Vector;
use proptest::prelude::*;

fn pairs() -> Vec<Cocycle> {
    shipped_pairs()
        .into_iter()
        .map(|(s, c)| Cocycle::from_specs(s, c).unwrap())
        .collect()
}

fn tolerance(f: &Cocycle) -> f64 {
    if f.is_integer_valued() {
        0.0
    } else {
        1e-9
    }
}

fn walk(f: &Cocycle, x: &SystemPoint, n: i64) -> SystemPoint {
    let mut y = x.clone();
    for _ in 0..n.unsigned_abs() {
        if n > 0 {
            f.system().step_mut(&mut y);
        } else {
            f.system().step_inverse_mut(&mut y);
        }
    }
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cocycle_identity(pair in 0usize..16, seed in any::<u64>(), m in -50i64..=50, n in -50i64..=50) {
        let f = &pairs()[pair];
        let x = f.system().sample_point(seed);
        let lhs = f.eval_sum(&x, m + n).unwrap();
        let rhs = &f.eval_sum(&walk(f, &x, n), m).unwrap() + &f.eval_sum(&x, n).unwrap();
        prop_assert!((&lhs - &rhs).max_norm() <= tolerance(f));
    }

    #[test]
    fn negative_branch_is_antisymmetric(pair in 0usize..16, seed in any::<u64>(), n in 0i64..=60) {
        let f = &pairs()[pair];
        let x = f.system().sample_point(seed);
        let back = f.eval_sum(&walk(f, &x, n), -n).unwrap();
        let fwd = f.eval_sum(&x, n).unwrap();
        prop_assert!((&back + &fwd).max_norm() <= tolerance(f));
    }

    #[test]
    fn step_inverse_undoes_step(pair in 0usize..16, seed in any::<u64>(), n in 1i64..=40) {
        let f = &pairs()[pair];
        let x = f.system().sample_point(seed);
        prop_assert_eq!(walk(f, &walk(f, &x, n), -n), x.clone());
        prop_assert_eq!(walk(f, &walk(f, &x, -n), n), x);
    }

    #[test]
    fn coboundary_telescopes(seed in any::<u64>(), n in 1i64..=200, amplitude in 0.01f64..2.0) {
        let b = BoundedFunctionSpec::TrigOfRotation { amplitude, frequency: 3.0 };
        let base = CocycleSpec::new(BaseFunction::Indicator { beta: 0.4 });
        let f = Cocycle::from_specs(SystemSpec::golden_rotation(), base.clone()).unwrap();
        let g = Cocycle::from_specs(SystemSpec::golden_rotation(), base.with(Modifier::AddCoboundary { b })).unwrap();
        let x = f.system().sample_point(seed);
        let diff = (&g.eval_sum(&x, n).unwrap() - &f.eval_sum(&x, n).unwrap()).max_norm();
        prop_assert!(diff <= 2.0 * g.coboundary_bound() + 1e-9);
    }

    #[test]
    fn symmetrized_diagonal_vanishes(seed in any::<u64>(), n in -100i64..=100, dim in 1usize..=3) {
        let spec = SystemSpec::iid(Marginal::LatticeUniform { dim }).square();
        let f = Cocycle::from_specs(spec, CocycleSpec::coordinate_read().with(Modifier::Symmetrize)).unwrap();
        let x = f.system().components().unwrap().0.sample_point(seed);
        let diag = SystemPoint::pair(x.clone(), x);
        prop_assert_eq!(f.eval_sum(&diag, n).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn symmetrized_sum_is_difference(sx in any::<u64>(), sy in any::<u64>(), n in -100i64..=100) {
        let rot = SystemSpec::golden_rotation();
        let spec = CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.3 });
        let f = Cocycle::from_specs(rot.clone(), spec.clone()).unwrap();
        let ft = Cocycle::from_specs(rot.square(), spec.with(Modifier::Symmetrize)).unwrap();
        let x = f.system().sample_point(sx);
        let y = f.system().sample_point(sy);
        let expect = &f.eval_sum(&x, n).unwrap() - &f.eval_sum(&y, n).unwrap();
        let got = ft.eval_sum(&SystemPoint::pair(x, y), n).unwrap();
        prop_assert!((&got - &expect).max_norm() <= 1e-9);
    }

    #[test]
    fn odometer_closed_form_matches_oracle(seed in any::<u64>()) {
        let SystemPoint::Odometer(x) = cocycle_lab_core::systems::System::new(SystemSpec::Odometer { base: 3 })
            .unwrap()
            .sample_point(seed) else { unreachable!() };
        prop_assert_eq!(odometer_orbit_cocycle(&x), oracle_orbit_cocycle(&x, 1 << 22).unwrap());
    }

    #[test]
    fn odometer_prefixed_points_match_oracle(prefix in proptest::collection::vec(0u8..3, 0..9), seed in any::<u64>()) {
        let x = OdometerPoint::with_prefix(seed, &prefix, 3).unwrap();
        prop_assert_eq!(odometer_orbit_cocycle(&x), oracle_orbit_cocycle(&x, 1 << 22).unwrap());
    }

    #[test]
    fn ball_mass_is_monotone_and_reflect_preserves_it(
        values in proptest::collection::vec(-10.0f64..10.0, 1..80),
        radii in proptest::collection::vec(0.0f64..12.0, 2..8),
    ) {
        let mu = EmpiricalMeasure::from_samples(1, values.iter().map(|v| Vector::scalar(*v)).collect()).unwrap();
        let mut radii = radii;
        radii.sort_by(f64::total_cmp);
        let masses: Vec<f64> = radii.iter().map(|r| mu.ball_mass(*r)).collect();
        prop_assert!(masses.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((mu.ball_mass(1e9) - mu.total_mass()).abs() < 1e-12);
        let reflected = mu.reflect();
        for r in &radii {
            prop_assert_eq!(reflected.ball_mass(*r), mu.ball_mass(*r));
            prop_assert_eq!(reflected.closed_ball_mass(*r), mu.closed_ball_mass(*r));
        }
        let back = reflected.reflect();
        prop_assert_eq!(back.samples(), mu.samples());
    }

    #[test]
    fn tau_is_the_mean_of_its_components(
        parts in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 1..30), 1..6),
        eta in 0.01f64..4.0,
    ) {
        let measures: Vec<EmpiricalMeasure> = parts
            .iter()
            .map(|p| EmpiricalMeasure::from_samples(1, p.iter().map(|v| Vector::scalar(*v)).collect()).unwrap())
            .collect();
        let refs: Vec<&EmpiricalMeasure> = measures.iter().collect();
        let tau = tau_k(&refs).unwrap();
        let mean = measures.iter().map(|m| m.ball_mass(eta)).sum::<f64>() / measures.len() as f64;
        prop_assert!((tau.ball_mass(eta) - mean).abs() < 1e-12);
    }

    #[test]
    fn triangle_kernel_respects_its_envelope(
        delta in 0.001f64..0.999,
        z in proptest::collection::vec(-1.5f64..1.5, 1..=3),
    ) {
        let d = z.len();
        let g = g_delta(&z, delta).unwrap();
        let inside = z.iter().all(|v| v.abs() <= delta);
        prop_assert!(g >= 0.0);
        prop_assert!(g <= delta.powi(-(d as i32)) * 1.000_000_000_1);
        if !inside {
            prop_assert_eq!(g, 0.0);
        }
        prop_assert_eq!(TriangleKernel::new(delta, d).unwrap().peak(), delta.powi(-(d as i32)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn near_return_fraction_is_monotone(seed in any::<u64>()) {
        let f = Cocycle::from_specs(SystemSpec::iid(Marginal::UniformPm1), CocycleSpec::coordinate_read()).unwrap();
        let eps = [0.5, 1.5, 2.5];
        let r = recurrence_estimate(&f, 512, &eps, 100, seed).unwrap();
        for w in r.horizons.windows(2) {
            for e in eps {
                prop_assert!(r.near_return_fraction(w[0], e).unwrap() <= r.near_return_fraction(w[1], e).unwrap());
            }
        }
        for w in eps.windows(2) {
            prop_assert!(r.near_return_fraction(512, w[0]).unwrap() <= r.near_return_fraction(512, w[1]).unwrap());
        }
    }

    #[test]
    fn zero_drift_cell_matches_the_estimate(seed in any::<u64>()) {
        let f = Cocycle::from_specs(
            SystemSpec::Rotation { alpha: GOLDEN_ALPHA },
            CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.25 }),
        )
        .unwrap();
        let res = Resolution { n: 2000, epsilon: 0.05, threshold: 0.95 };
        let scan = drift_scan(&f, &[vec![0.1], vec![0.0]], res, 100, seed).unwrap();
        let est = recurrence_estimate(&f, 2000, &[0.05], 100, seed).unwrap();
        prop_assert_eq!(scan.cells[1].fraction, est.near_return_fraction(2000, 0.05).unwrap());
    }
}
