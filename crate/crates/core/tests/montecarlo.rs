use std::f64::consts::PI;

use varorder::field::{make_alpha_field, AlphaField, AlphaSpec};
use varorder::montecarlo::*;
use varorder::stable::stable_cdf_1d;

fn constant(a: f64) -> AlphaField {
    AlphaField::constant(a).unwrap()
}

fn draws(alpha: f64, dt: f64, n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|i| sample_stable_increment(alpha, dt, 1, &mut path_rng(seed, i as u64)).unwrap()[0])
        .collect()
}

#[test]
fn gaussian_increments_have_variance_two_dt() {
    let dt = 0.01;
    let xs = draws(2.0, dt, 100_000, 1);
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let e = Estimate::from_samples(&sq);
    assert!((e.value - 2.0 * dt).abs() < 3.0 * e.stderr, "{e:?}");
}

#[test]
fn cauchy_increments_have_median_dt() {
    let (dt, n) = (0.01, 100_000);
    let mut xs: Vec<f64> = draws(1.0, dt, n, 2).into_iter().map(f64::abs).collect();
    xs.sort_by(f64::total_cmp);
    let median = xs[n / 2];
    let stderr = PI * dt / (2.0 * (n as f64).sqrt());
    assert!((median - dt).abs() < 3.0 * stderr, "{median}");
}

#[test]
fn increments_follow_the_stable_law() {
    let xs = draws(1.5, 1.0, 100_000, 3);
    let cdf = tabulate_cdf(|x| stable_cdf_1d(1.5, 1.0, x), -60.0, 60.0, 2401).unwrap();
    let d = ks_distance(&xs, cdf);
    assert!(d < 0.01, "KS {d}");
}

#[test]
fn planar_increments_have_the_isotropic_characteristic_function() {
    let (alpha, dt, n) = (1.2, 1.0, 100_000);
    let xi = [0.6, 0.8];
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let v = sample_stable_increment(alpha, dt, 2, &mut path_rng(4, i as u64)).unwrap();
            (xi[0] * v[0] + xi[1] * v[1]).cos()
        })
        .collect();
    let e = Estimate::from_samples(&vals);
    let want = (-dt * 1.0f64.powf(alpha)).exp();
    assert!((e.value - want).abs() < 3.0 * e.stderr, "{e:?} vs {want}");
}

#[test]
fn invalid_increment_parameters() {
    let mut rng = path_rng(0, 0);
    assert!(sample_stable_increment(2.5, 0.1, 1, &mut rng).is_err());
    assert!(sample_stable_increment(1.5, 0.0, 1, &mut rng).is_err());
    assert!(sample_stable_increment(1.5, 0.1, 3, &mut rng).is_err());
}

#[test]
fn ensembles_are_reproducible() {
    let a = simulate_levy(&make_alpha_field(&AlphaSpec::default_sine()).unwrap(), 0.2, 0.1, 0.01, 500, 9).unwrap();
    let b = simulate_levy(&make_alpha_field(&AlphaSpec::default_sine()).unwrap(), 0.2, 0.1, 0.01, 500, 9).unwrap();
    assert_eq!(a.positions, b.positions);
    assert!(a.paths().all(|p| p[0] == 0.2));
    assert_eq!(a.positions.len(), 500 * 11);
    let c = simulate_levy(&make_alpha_field(&AlphaSpec::default_sine()).unwrap(), 0.2, 0.1, 0.01, 500, 10).unwrap();
    assert_ne!(a.positions, c.positions);
}

#[test]
fn driver_increments_are_uncorrelated() {
    let (alpha, dt, n) = (1.8, 0.01, 100_000);
    let ens = simulate_sde(|_| 0.0, |_| 1.0, alpha, 0.0, 0.02, dt, n, 11).unwrap();
    let scale = dt.powf(1.0 / alpha);
    let pairs: Vec<(f64, f64)> = ens.paths().map(|p| (((p[1] - p[0]) / scale).tanh(), ((p[2] - p[1]) / scale).tanh())).collect();
    let (ma, mb) = (pairs.iter().map(|p| p.0).sum::<f64>() / n as f64, pairs.iter().map(|p| p.1).sum::<f64>() / n as f64);
    let cov = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / n as f64;
    let va = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum::<f64>() / n as f64;
    let vb = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum::<f64>() / n as f64;
    let rho = cov / (va * vb).sqrt();
    assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "{rho}");
}

#[test]
fn constant_drift_shifts_the_mean() {
    let (c, horizon) = (0.7, 1.0);
    let ens = simulate_sde(|_| c, |_| 1.0, 1.5, 0.0, horizon, 0.01, 100_000, 12).unwrap();
    let e = empirical_semigroup(&ens, &|x: f64| x, horizon).unwrap();
    assert!((e.value - c * horizon).abs() < 3.0 * e.stderr, "{e:?}");
}

#[test]
fn nonpositive_diffusion_is_rejected() {
    let e = simulate_sde(|_| 0.0, |x: f64| x, 1.5, 0.5, 0.1, 0.01, 10, 0);
    assert!(e.is_err());
}

#[test]
fn unit_time_change_reproduces_the_plain_process() {
    let a = simulate_timechange(|_| 1.0, 1.5, 0.0, 0.1, 0.01, 1000, 13).unwrap();
    let b = simulate_levy(&constant(1.5), 0.0, 0.1, 0.01, 1000, 13).unwrap();
    assert_eq!(a.positions, b.positions);
}

#[test]
fn doubled_rate_doubles_time() {
    let n = 100_000;
    let a = simulate_timechange(|_| 2.0, 1.5, 0.0, 0.1, 0.01, n, 14).unwrap();
    let b = simulate_levy(&constant(1.5), 0.0, 0.2, 0.01, n, 15).unwrap();
    let d = ks_two_sample(&a.at_time(0.1).unwrap(), &b.at_time(0.2).unwrap());
    assert!(d < 0.01, "KS {d}");
}

#[test]
fn time_change_rejects_bad_rates() {
    assert!(simulate_timechange(|_| 0.0, 1.5, 0.0, 0.1, 0.01, 10, 0).is_err());
}

#[test]
fn empirical_semigroup_of_constants_and_cosines() {
    let ens = simulate_levy(&constant(1.5), 0.4, 0.2, 0.01, 100_000, 16).unwrap();
    let one = empirical_semigroup(&ens, &|_: f64| 1.0, 0.2).unwrap();
    assert_eq!((one.value, one.stderr), (1.0, 0.0));
    let zero = empirical_semigroup(&ens, &|_: f64| 0.0, 0.2).unwrap();
    assert_eq!((zero.value, zero.stderr), (0.0, 0.0));
    let c = empirical_semigroup(&ens, &|x: f64| x.cos(), 0.2).unwrap();
    let want = (-0.2f64).exp() * 0.4f64.cos();
    assert!((c.value - want).abs() < 3.0 * c.stderr, "{c:?} vs {want}");
    assert!(empirical_semigroup(&ens, &|x: f64| x, 0.015).is_err());
}

#[test]
fn exit_times_edge_cases() {
    let ens = simulate_levy(&constant(1.5), 0.0, 0.05, 0.01, 200, 17).unwrap();
    let all = exit_time(&ens, 0.0, 1e9).unwrap();
    assert_eq!(all.censored_fraction, 1.0);
    assert!(all.records.iter().all(|r| r.tau == 0.05));
    let first = exit_time(&ens, 0.0, 0.0).unwrap();
    assert!(first.records.iter().all(|r| r.step == 1 && r.overshoot > 0.0 && !r.censored));
}

#[test]
fn median_exit_time_decreases_with_order_at_unit_radius() {
    let medians: Vec<f64> = [1.2, 1.5, 1.8]
        .iter()
        .map(|&a| {
            let ens = simulate_levy(&constant(a), 0.0, 2.0, 0.01, 20_000, 18).unwrap();
            let mut taus: Vec<f64> = exit_time(&ens, 0.0, 1.0).unwrap().records.iter().map(|r| r.tau).collect();
            taus.sort_by(f64::total_cmp);
            taus[taus.len() / 2]
        })
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn dynkin_residual_of_constants_is_zero() {
    let ens = simulate_levy(&constant(1.5), 0.0, 0.1, 0.01, 1000, 19).unwrap();
    let r = dynkin_residual(&ens, &|_: f64| 2.0, &|_: f64| 0.0, StopRule::FixedTime(0.1)).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn dynkin_residual_for_the_cosine_eigenpair() {
    let ens = simulate_levy(&constant(1.5), 0.3, 0.2, 1e-3, 100_000, 20).unwrap();
    let f = |x: f64| x.cos();
    let g = |x: f64| -x.cos();
    for rule in [StopRule::FixedTime(0.2), StopRule::Exit(1.0)] {
        let r = dynkin_residual(&ens, &f, &g, rule).unwrap();
        assert!(r.value.abs() <= 3.0 * r.stderr + 0.02, "{rule:?}: {r:?}");
    }
}

fn tail_bump(y: f64) -> f64 {
    let s = ((y.abs() - 0.5) / 0.25).clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn small_settings(seed: u64) -> SmallTimeSettings {
    SmallTimeSettings { steps: 10, exit_radius: 1.0, support_inner: 0.5, support_outer: 0.75, seed }
}

#[test]
fn small_time_estimate_of_zero_and_linearity() {
    let a = constant(1.5);
    let z = smalltime_levy_estimate(0.0, &|_: f64| 0.0, 1e-2, 1000, &a, &small_settings(21)).unwrap();
    assert_eq!(z.estimate.value, 0.0);
    let p1 = smalltime_levy_estimate(0.0, &tail_bump, 1e-2, 1000, &a, &small_settings(21)).unwrap();
    let p2 = smalltime_levy_estimate(0.0, &|y: f64| y.abs().min(3.0) * tail_bump(y), 1e-2, 1000, &a, &small_settings(21)).unwrap();
    let mix = smalltime_levy_estimate(0.0, &|y: f64| 2.0 * tail_bump(y) - 0.5 * y.abs().min(3.0) * tail_bump(y), 1e-2, 1000, &a, &small_settings(21)).unwrap();
    assert!((mix.estimate.value - (2.0 * p1.estimate.value - 0.5 * p2.estimate.value)).abs() < 1e-9 * mix.estimate.value.abs().max(1.0));
}

#[test]
fn small_time_estimate_approaches_the_levy_measure() {
    let a = constant(1.5);
    let r = smalltime_levy_estimate(0.0, &tail_bump, 1e-3, 1_000_000, &a, &small_settings(22)).unwrap();
    assert!(((r.estimate.value - r.target) / r.target).abs() < 0.1, "{r:?}");
    let c = varorder::stable::levy_constant_closed_form(1.5, 1);
    let indicator = 2.0 * c / (1.5 * 0.5f64.powf(1.5));
    assert!(r.target < indicator && r.target > 0.5 * indicator);
}

#[test]
fn maximal_inequality_slope() {
    let grid = [0.1, 0.05, 0.025, 0.0125];
    let r = maximal_inequality_check(0.0, 1.0, &grid, 100_000, &constant(1.5), 1e-3, 23).unwrap();
    let s = r.slope.unwrap();
    assert!((0.85..=1.3).contains(&s), "{r:?}");
    assert!(r.profile.windows(2).all(|w| w[1].1 <= w[0].1));
    let huge = maximal_inequality_check(0.0, 1e9, &grid, 1000, &constant(1.5), 1e-3, 23).unwrap();
    assert!(huge.slope.is_none() && huge.profile.iter().all(|p| p.1 == 0.0));
}

#[test]
fn stopped_moments_grow_at_most_linearly() {
    let grid = [0.01, 0.02, 0.04, 0.08];
    let m = stopped_moment(0.0, 1.0, 1.8, &grid, 100_000, &constant(1.5), 1e-3, 24).unwrap();
    for w in m.windows(2) {
        assert!(w[1].1.value / w[0].1.value <= 2.0 * 1.2, "{m:?}");
    }
    assert!(stopped_moment(0.0, 1.0, 2.5, &grid, 10, &constant(1.5), 1e-3, 24).is_err());
}

#[test]
fn stopped_favard_functional() {
    let a = constant(1.5);
    let grid = [0.1, 0.05, 0.025];
    let c = stopped_favard(&|_: f64| 1.0, 1.0, &grid, &[0.0], 1000, &a, 1e-3, 25).unwrap();
    assert_eq!(c.value, 0.0);
    let cos = stopped_favard(&|x: f64| x.cos(), 1.0, &grid, &[0.0], 100_000, &a, 1e-3, 26).unwrap();
    assert!((cos.value - 1.0).abs() < 3.0 * cos.stderr + 0.1, "{cos:?}");
    let rough = stopped_favard(&|x: f64| x.abs().powf(0.3), 1.0, &[0.1, 0.03, 0.01, 0.003], &[0.0], 20_000, &a, 1e-3, 27).unwrap();
    assert!(rough.diverging, "{rough:?}");
}

#[test]
fn stopped_laws_only_see_the_ball() {
    let (x, r, n) = (0.0, 0.5, 100_000);
    let inside = |y: f64| 1.5 + 0.1 * y.sin();
    let a = make_alpha_field(&AlphaSpec::closure(inside, (-20.0, 20.0))).unwrap();
    let b = make_alpha_field(&AlphaSpec::closure(move |y: f64| if y.abs() <= 2.0 * r { inside(y) } else { 1.2 }, (-20.0, 20.0))).unwrap();
    let ea = simulate_levy(&a, x, 0.1, 0.01, n, 28).unwrap();
    let eb = simulate_levy(&b, x, 0.1, 0.01, n, 29).unwrap();
    let d = ks_two_sample(&stopped_positions(&ea, x, r, 0.1).unwrap(), &stopped_positions(&eb, x, r, 0.1).unwrap());
    assert!(d < 0.015, "KS {d}");
}
