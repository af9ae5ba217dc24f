use cocycle_lab_core::cocycle::{BaseFunction, Cocycle, CocycleSpec};
use cocycle_lab_core::diagnostics::recurrence_estimate;
use cocycle_lab_core::empirics::{
    density_at_zero, monitor_ineq7, monitor_ineq8, sigma_n, tightness_check, BallMeasure,
    EmpiricalMeasure, Normalization,
};
use cocycle_lab_core::kernels::{phi_delta, TriangleKernel};
use cocycle_lab_core::rng::sample_seed;
use cocycle_lab_core::stats::{cauchy_cdf, ks_statistic, variance};
use cocycle_lab_core::systems::{Marginal, System, SystemPoint, SystemSpec};
use cocycle_lab_core::vector::Vector;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(counts: &[u64], expected: f64) -> f64 {
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn rotation_samples_are_uniform() {
    let t = System::new(SystemSpec::golden_rotation()).unwrap();
    let mut bins = [0u64; 16];
    for i in 0..10_000 {
        let SystemPoint::Rotation(p) = t.sample_point(sample_seed(5, i)) else {
            unreachable!()
        };
        bins[(p.frac >> 60) as usize] += 1;
    }
    assert!(chi_square_p(&bins, 625.0) > 0.001);
}

#[test]
fn golden_rotation_orbit_equidistributes() {
    let t = System::new(SystemSpec::golden_rotation()).unwrap();
    let mut x = t.sample_point(11);
    let mut bins = [0u64; 100];
    for _ in 0..100_000 {
        let SystemPoint::Rotation(p) = &x else {
            unreachable!()
        };
        bins[(p.as_unit() * 100.0) as usize] += 1;
        t.step_mut(&mut x);
    }
    let worst = bins
        .iter()
        .map(|&c| (c as f64 - 1000.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 150.0, "worst bin deviation {worst}");
}

#[test]
fn odometer_visits_cylinders_uniformly() {
    let t = System::new(SystemSpec::Odometer { base: 3 }).unwrap();
    let k = 3;
    let mut x = t.sample_point(2);
    let mut counts = vec![0u64; 27];
    for _ in 0..3u64.pow(k + 2) {
        let SystemPoint::Odometer(p) = &x else {
            unreachable!()
        };
        let code = p
            .prefix(3, k as usize)
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * 3 + d as usize);
        counts[code] += 1;
        t.step_mut(&mut x);
    }
    assert!(counts.iter().all(|&c| c == 9));
}

#[test]
fn odometer_digits_are_uniform_across_seeds() {
    let t = System::new(SystemSpec::Odometer { base: 3 }).unwrap();
    let mut counts = [0u64; 3];
    for i in 0..3000 {
        let SystemPoint::Odometer(p) = t.sample_point(sample_seed(9, i)) else {
            unreachable!()
        };
        for d in p.prefix(3, 30) {
            counts[d as usize] += 1;
        }
    }
    assert!(chi_square_p(&counts, 30_000.0) > 0.001);
}

#[test]
fn markov_transitions_match_the_matrix() {
    let p = [[0.5, 0.5], [0.25, 0.75]];
    let t = System::new(SystemSpec::MarkovShift {
        transition: p.iter().map(|r| r.to_vec()).collect(),
        stationary: vec![1.0 / 3.0, 2.0 / 3.0],
    })
    .unwrap();
    let mut pairs = [[0u64; 2]; 2];
    for i in 0..200 {
        let x = t.sample_point(sample_seed(21, i));
        let symbols: Vec<usize> = (-50..50)
            .map(|s| match t.read_coordinate(&x, s).unwrap() {
                cocycle_lab_core::systems::Coordinate::Symbol(v) => v as usize,
                other => panic!("unexpected coordinate {other:?}"),
            })
            .collect();
        for w in symbols.windows(2) {
            pairs[w[0]][w[1]] += 1;
        }
    }
    for (row, probs) in pairs.iter().zip(p) {
        let total: u64 = row.iter().sum();
        let freq = row[0] as f64 / total as f64;
        let se = (probs[0] * (1.0 - probs[0]) / total as f64).sqrt();
        assert!((freq - probs[0]).abs() < 4.0 * se, "{freq} vs {}", probs[0]);
    }
    let ones: u64 = pairs.iter().map(|r| r[1]).sum();
    let total: u64 = pairs.iter().flatten().sum();
    assert!((ones as f64 / total as f64 - 2.0 / 3.0).abs() < 0.02);
}

#[test]
fn cauchy_sums_are_one_stable() {
    let f = Cocycle::from_specs(
        SystemSpec::iid(Marginal::Cauchy { scale: 1.0 }),
        CocycleSpec::coordinate_read(),
    )
    .unwrap();
    let sigma = sigma_n(&f, 100, Normalization::One, 10_000, 3).unwrap();
    let values: Vec<f64> = sigma.samples().iter().map(|v| v.to_vec()[0]).collect();
    let d = ks_statistic(&values, cauchy_cdf);
    assert!(d < 0.05, "KS distance {d}");
    let t = tightness_check(&[sigma], 20.0, 0.9).unwrap();
    assert!(t.pass, "worst mass {}", t.worst_mass);
}

#[test]
fn simple_walk_satisfies_the_clt() {
    let f = Cocycle::from_specs(
        SystemSpec::iid(Marginal::UniformPm1),
        CocycleSpec::coordinate_read(),
    )
    .unwrap();
    let sigma = sigma_n(&f, 10_000, Normalization::Exponent(0.5), 10_000, 4).unwrap();
    let values: Vec<f64> = sigma.samples().iter().map(|v| v.to_vec()[0]).collect();
    let v = variance(&values);
    assert!((0.9..=1.1).contains(&v), "variance {v}");
}

#[test]
fn one_dimensional_walk_returns_at_the_first_return_rate() {
    let f = Cocycle::from_specs(
        SystemSpec::iid(Marginal::UniformPm1),
        CocycleSpec::coordinate_read(),
    )
    .unwrap();
    let r = recurrence_estimate(&f, 10_000, &[0.5], 1000, 8).unwrap();
    let tail = (2.0 / (std::f64::consts::PI * 10_000.0)).sqrt();
    let p = r.near_return_fraction(10_000, 0.5).unwrap();
    let se = (tail * (1.0 - tail) / 1000.0).sqrt();
    assert!(
        (1.0 - p - tail).abs() < 4.0 * se + 0.005,
        "fraction {p}, tail {tail}"
    );
}

#[test]
fn triangle_kernel_integrates_to_one() {
    for d in [1, 2] {
        for delta in [0.5, 0.1, 0.02] {
            let k = TriangleKernel::new(delta, d).unwrap();
            let integral = k.trapezoid_integral(10_000).unwrap();
            assert!((integral - 1.0).abs() < 1e-9, "d={d} δ={delta}: {integral}");
        }
    }
}

#[test]
fn gaussian_phi_matches_the_difference_density() {
    let f = Cocycle::from_specs(
        SystemSpec::iid(Marginal::Gaussian {
            mean: vec![0.0],
            covariance: vec![vec![1.0]],
        }),
        CocycleSpec::coordinate_read(),
    )
    .unwrap();
    let sigma = sigma_n(&f, 1, Normalization::One, 20_000, 6).unwrap();
    let est = phi_delta(&[0.0], &sigma, 0.1, 1_000_000, 1).unwrap();
    assert!(!est.exact);
    // ∫ g_δ(u) p(u) du for N(0, 2), by Simpson on [−δ, δ].
    let delta: f64 = 0.1;
    let n = 2000;
    let h = 2.0 * delta / n as f64;
    let p = |u: f64| (-u * u / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt();
    let g = |u: f64| ((delta - u.abs()) / (delta * delta)).max(0.0);
    let oracle: f64 = (0..=n)
        .map(|i| {
            let u = -delta + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * g(u) * p(u)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((oracle - 0.2821).abs() < 1e-3);
    assert!(
        (est.value - oracle).abs() < 3.0 * est.standard_error,
        "{} ± {} vs {oracle}",
        est.value,
        est.standard_error
    );
}

#[test]
fn density_of_uniform_is_recovered() {
    let t = System::new(SystemSpec::golden_rotation()).unwrap();
    let samples = (0..100_000)
        .map(|i| {
            let SystemPoint::Rotation(p) = t.sample_point(sample_seed(13, i)) else {
                unreachable!()
            };
            Vector::scalar(2.0 * p.as_unit() - 1.0)
        })
        .collect();
    let mu = EmpiricalMeasure::from_samples(1, samples).unwrap();
    for point in density_at_zero(&mu, &[0.5, 0.1, 0.02]).unwrap() {
        assert!(point.reliable);
        assert!(
            (point.ratio - 1.0).abs() < 3.0 * point.standard_error,
            "{point:?}"
        );
    }
}

#[test]
fn density_of_planar_gaussian_is_recovered() {
    let f = Cocycle::from_specs(
        SystemSpec::iid(Marginal::Gaussian {
            mean: vec![0.0, 0.0],
            covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        }),
        CocycleSpec::coordinate_read(),
    )
    .unwrap();
    let sigma = sigma_n(&f, 1, Normalization::One, 100_000, 17).unwrap();
    let target = 2.0 / std::f64::consts::PI;
    for point in density_at_zero(&sigma, &[0.1, 0.05]).unwrap() {
        assert!(
            (point.ratio - target).abs() < 3.0 * point.standard_error,
            "{point:?}"
        );
    }
}

#[test]
fn atom_at_zero_makes_the_ratio_diverge() {
    let mu = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
    let curve = density_at_zero(&mu, &[1.0, 0.1, 0.01]).unwrap();
    assert!(curve.iter().all(|p| p.ratio >= 1.0 / p.eta));
}

#[test]
fn rotation_indicator_sums_stay_bounded() {
    let f = Cocycle::from_specs(
        SystemSpec::golden_rotation(),
        CocycleSpec::new(BaseFunction::IndicatorMinusMean { beta: 0.5 }),
    )
    .unwrap();
    let x = f.system().sample_point(1);
    let worst = f
        .eval_sum_stream(&x, 100_000)
        .unwrap()
        .map(|(_, v)| v.max_norm())
        .fold(0.0, f64::max);
    // Discrepancy of the golden rotation grows logarithmically.
    assert!(worst < 10.0, "{worst}");
}

#[test]
fn monitor_examples_from_point_masses() {
    let zero = EmpiricalMeasure::point_mass(Vector::scalar(0.0));
    let one = EmpiricalMeasure::point_mass(Vector::scalar(1.0));
    let zeros: Vec<(u64, &dyn BallMeasure)> =
        (1..=8u64).map(|k| (k, &zero as &dyn BallMeasure)).collect();
    let r = monitor_ineq7(&zeros, 0.1, 1.0, 1.0).unwrap();
    assert_eq!(r.tail_max, 1.0);
    assert!(r.violated, "bound {}", r.bound);
    let ladder: Vec<&dyn BallMeasure> = (0..=10).map(|_| &zero as &dyn BallMeasure).collect();
    let r = monitor_ineq8(&ladder, 0.5, 1.0, 1.0).unwrap();
    assert_eq!(r.partial_sum, 2047.0);
    let ladder: Vec<&dyn BallMeasure> = (0..=10).map(|_| &one as &dyn BallMeasure).collect();
    let r = monitor_ineq8(&ladder, 0.9, 16.0, 1.0 / 64.0).unwrap();
    assert_eq!(r.partial_sum, 0.0);
    assert!(!r.violated);
}
