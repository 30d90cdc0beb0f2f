use std::f64::consts::PI;
use std::sync::OnceLock;

use varorder::field::{make_alpha_field, AlphaField, AlphaSpec};
use varorder::grid::ScalarFunction;
use varorder::parametrix::*;
use varorder::stable::stable_pdf_1d;
use varorder::symbol::Symbol;
use varorder::Error;

fn sine_symbol() -> Symbol {
    Symbol::new(make_alpha_field(&AlphaSpec::default_sine()).unwrap())
}

fn variable() -> &'static ParametrixKernel {
    static K: OnceLock<ParametrixKernel> = OnceLock::new();
    K.get_or_init(|| ParametrixKernel::new(sine_symbol(), ParametrixSettings::coarse()).unwrap())
}

fn constant(alpha: f64) -> ParametrixKernel {
    ParametrixKernel::new(Symbol::new(AlphaField::constant(alpha).unwrap()), ParametrixSettings::coarse()).unwrap()
}

/// Composite Simpson on `[0, b]`.
fn simpson(b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

fn f_oracle(sym: &Symbol, t: f64, x: f64, y: f64) -> f64 {
    let (ax, ay) = (sym.order(x), sym.order(y));
    let cut = (60.0 / t).powf(1.0 / ay);
    simpson(cut, 200_000, |xi| {
        let qy = xi.powf(ay);
        (qy - xi.powf(ax)) * (-t * qy).exp() * (xi * (x - y)).cos()
    }) / PI
}

#[test]
fn p0_gaussian_at_origin() {
    let k = constant(2.0);
    let v = k.p0(1.0, 0.4, 0.4).unwrap();
    assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-12);
}

#[test]
fn p0_symmetric_for_constant_order() {
    let k = constant(1.3);
    for (x, y) in [(0.1, 1.7), (-2.0, 0.5), (3.0, -3.0)] {
        assert!((k.p0(0.4, x, y).unwrap() - k.p0(0.4, y, x).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn p0_freezes_order_at_terminal_point() {
    let k = variable();
    for (x, y) in [(0.0, 1.0), (1.0, 0.0), (-0.7, 2.2)] {
        let want = stable_pdf_1d(1.5 + 0.3 * f64::sin(y), 0.3, x - y).unwrap();
        assert!((k.p0(0.3, x, y).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn p0_rejects_times_outside_horizon() {
    assert!(matches!(variable().p0(0.0, 0.0, 0.0), Err(Error::Param(_))));
    assert!(matches!(variable().p0(1.5, 0.0, 0.0), Err(Error::Param(_))));
}

#[test]
fn kernel_f_vanishes_for_equal_orders() {
    let k = constant(1.7);
    assert_eq!(k.kernel_f(0.2, -1.0, 2.0).unwrap(), 0.0);
    let v = variable();
    assert_eq!(v.kernel_f(0.2, 0.3, PI - 0.3).unwrap(), 0.0);
}

#[test]
fn kernel_f_matches_direct_quadrature() {
    let k = variable();
    for (t, x, y) in [(0.5, 0.0, 0.8), (0.1, 1.0, -0.5), (1.0, -2.0, 0.3), (0.2, 0.4, 0.45)] {
        let got = k.kernel_f(t, x, y).unwrap();
        let want = f_oracle(k.symbol(), t, x, y);
        assert!((got - want).abs() < 1e-7 * (1.0 + want.abs()), "t={t} x={x} y={y}: {got} vs {want}");
    }
}

#[test]
fn kernel_f_sign_follows_order_gap_near_diagonal() {
    let k = variable();
    let up = k.kernel_f(0.05, 0.0, 0.02).unwrap();
    let down = k.kernel_f(0.05, 0.0, -0.02).unwrap();
    assert!(up > 0.0 && down < 0.0, "{up} {down}");
}

#[test]
fn chapman_kolmogorov_for_stable_densities() {
    let grid = ConvolutionGrid { half_width: 12.0, space_points: 2401, tail_tol: None, ..Default::default() };
    for rho in [1.2, 1.8] {
        let half = |a: f64, b: f64| stable_pdf_1d(rho, 0.25, a - b).unwrap();
        for (x, y) in [(0.0, 0.3), (1.0, -1.0)] {
            let got = spatial_convolve(half, half, x, y, &grid);
            let want = stable_pdf_1d(rho, 0.5, x - y).unwrap();
            assert!(((got - want) / want).abs() < 1e-3, "rho={rho}: {got} vs {want}");
        }
    }
}

#[test]
fn timespace_convolve_reports_heavy_tails() {
    let grid = ConvolutionGrid { half_width: 2.0, space_points: 21, ..Default::default() };
    let r = timespace_convolve(|_, _, _| 1.0, |_, _, _| 1.0, 0.5, 0.0, 0.0, &grid);
    assert!(matches!(r, Err(Error::Truncation(_))));
}

#[test]
fn constant_order_density_equals_stable_density() {
    let k = constant(1.5);
    for t in [0.1, 0.3] {
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = (-3.0 + 1.5 * i as f64, -2.5 + 1.3 * j as f64);
                let e = k.transition_density(t, x, y).unwrap();
                let want = stable_pdf_1d(1.5, t, x - y).unwrap();
                assert!((e.value - want).abs() < 1e-10);
                assert_eq!(e.value, e.p0_part + e.correction_part);
            }
        }
    }
}

#[test]
fn series_terms_decay_and_stop() {
    let k = variable();
    let sweep = k.phi_column(0.3);
    assert!(!sweep.diverging);
    assert!(sweep.iterates_used >= 2 && sweep.iterates_used <= k.settings.max_iterates);
    let n = &sweep.term_norms;
    assert!(n.windows(2).skip(1).all(|w| w[1] < w[0]), "{n:?}");
    let phi = k.phi_series(0.5, 0.0, 0.3).unwrap();
    assert!(phi.est_error >= 0.0 && phi.iterates_used == sweep.iterates_used);
}

#[test]
fn second_series_term_matches_direct_convolution() {
    let k = variable();
    let (t, x, y) = (0.5, 1.0, 0.0);
    let sweep = k.phi_column(y);
    let grid_terms = |i: usize| {
        let v = k.sweep_total_at(&Sweep { totals: sweep.terms[i].clone(), ..sweep.as_ref().clone() }, t);
        varorder::spectral::TorusFunction::new(k.torus().clone(), v).value(x)
    };
    let first = grid_terms(0);
    let second = grid_terms(1);
    let sym = k.symbol().clone();
    let grid = ConvolutionGrid { half_width: 6.0, space_points: 241, time_nodes: 10, tail_tol: None, ..Default::default() };
    let f = |s: f64, a: f64, b: f64| kernel_f_value(&sym, s, a, b).unwrap();
    let direct = timespace_convolve(f, f, t, x, y, &grid).unwrap();
    let phi = k.phi_series(t, x, y).unwrap().value;
    let direct_f = k.kernel_f(t, x, y).unwrap();
    assert!((first - direct_f).abs() < 2e-2 * direct_f.abs().max(0.05), "{first} vs {direct_f}");
    assert!((second - direct).abs() < 0.5 * direct.abs(), "{second} vs {direct}");
    let rest = (phi - direct_f).abs();
    assert!(rest <= 2.0 * direct.abs() && rest >= 0.5 * direct.abs(), "{rest} vs {direct}");
}

#[test]
fn mass_is_conserved() {
    let k = variable();
    for t in [0.05, 0.5] {
        for x in [0.0, 2.0] {
            let m = k.mass(t, x, 20.0).unwrap();
            assert!((m.total() - 1.0).abs() < 1e-2, "t={t} x={x}: {m:?}");
        }
    }
}

#[test]
fn density_is_nonnegative_up_to_error() {
    let k = variable();
    for t in [0.05, 0.3, 1.0] {
        for i in 0..9 {
            let x = -4.0 + i as f64;
            let e = k.transition_density(t, x, 0.3).unwrap();
            assert!(e.value >= -e.est_error, "t={t} x={x}: {e:?}");
        }
    }
}

#[test]
fn semigroup_of_constants() {
    let k = variable();
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    for x in [-1.0, 0.0, 2.5] {
        assert!((k.semigroup_apply(&one, 0.4, x).unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(k.semigroup_apply(&zero, 0.4, x).unwrap(), 0.0);
    }
}

#[test]
fn gaussian_semigroup_for_order_two() {
    let k = constant(2.0);
    let s2 = 0.6f64;
    let u = move |x: f64| (-x * x / (2.0 * s2)).exp();
    for t in [0.05, 0.5] {
        for x in [0.0, 0.7, 2.0] {
            let v = s2 + 2.0 * t;
            let want = (s2 / v).sqrt() * (-x * x / (2.0 * v)).exp();
            let got = k.semigroup_apply(&u, t, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
        }
    }
}

#[test]
fn chapman_kolmogorov_for_variable_kernel() {
    let k = variable();
    for (t, s) in [(0.1, 0.1), (0.1, 0.2)] {
        let y = 0.3;
        let col = k.density_column(s, y).unwrap();
        let prop = k.propagate(col.values.clone());
        let composed = k.semigroup_values(&prop, t).unwrap();
        for x in [-1.0, 0.3, 1.5] {
            let direct = k.transition_density(t + s, x, y).unwrap();
            let inner = k.transition_density(s, x, y).unwrap();
            let err = (composed.value(x) - direct.value).abs();
            let combined = direct.est_error + inner.est_error + k.periodization_bound(t + s, x, y);
            assert!(err <= 5.0 * combined, "t={t} s={s} x={x}: {err:e} {combined:e}");
        }
    }
}

#[test]
fn resolvent_of_one() {
    let k = variable();
    let r = k.resolvent(&|_: f64| 1.0, 5.0).unwrap();
    for x in [-2.0, 0.0, 1.0] {
        assert!((r.value(x) - 0.2).abs() < 1e-3);
    }
}

#[test]
fn resolvent_is_linear() {
    let k = variable();
    let u = |x: f64| (-x * x).exp();
    let v = |x: f64| (x).cos();
    let w = |x: f64| 2.0 * (-x * x).exp() - 3.0 * x.cos();
    let (ru, rv, rw) = (k.resolvent(&u, 5.0).unwrap(), k.resolvent(&v, 5.0).unwrap(), k.resolvent(&w, 5.0).unwrap());
    for x in [-1.0, 0.2, 2.0] {
        assert!((rw.value(x) - 2.0 * ru.value(x) + 3.0 * rv.value(x)).abs() < 1e-12);
    }
}

#[test]
fn resolvent_identity() {
    let k = variable();
    let u = |x: f64| (-x * x).exp();
    let (lam, mu) = (4.0, 7.0);
    let rl = k.resolvent(&u, lam).unwrap();
    let rm = k.resolvent(&u, mu).unwrap();
    let rlrm = k.resolvent_vec(rm.values.clone(), lam).unwrap();
    for x in [-1.0, 0.0, 0.5, 2.0] {
        let lhs = rl.value(x) - rm.value(x);
        let rhs = (mu - lam) * rlrm.value(x);
        assert!((lhs - rhs).abs() < 1e-4, "{lhs} vs {rhs}");
    }
}

#[test]
fn small_rates_exceed_horizon() {
    assert!(matches!(variable().resolvent(&|_: f64| 1.0, 0.01), Err(Error::Horizon(_))));
    assert!(matches!(variable().resolvent(&|_: f64| 1.0, 0.0), Err(Error::Param(_))));
}

#[test]
fn poisson_pair_of_constant() {
    let k = variable();
    let (f, g) = k.poisson_pair(&|_: f64| 2.0, 5.0).unwrap();
    for x in [-1.0, 0.0, 3.0] {
        assert!((f.value(x) - 0.4).abs() < 1e-3);
        assert!(g.value(x).abs() < 5e-3);
    }
}

#[test]
fn favard_functional_of_constant_vanishes() {
    let k = variable();
    let r = k.favard_functional(&|_: f64| 3.0, &[0.5, 0.1, 0.01], &[0.0, 1.0]).unwrap();
    assert!(r.value < 1e-3 && !r.diverging);
}

#[test]
fn favard_functional_of_poisson_pair() {
    let k = variable();
    let (f, g) = k.poisson_pair(&|x: f64| (-x * x).exp(), 5.0).unwrap();
    let t_grid: Vec<f64> = (1..=8).map(|j| 0.5f64.powi(j)).collect();
    let probes: Vec<f64> = (-20..=20).map(|j| 0.2 * j as f64).collect();
    let r = k.favard_functional(&f, &t_grid, &probes).unwrap();
    let sup_g = probes.iter().map(|&x| g.value(x).abs()).fold(0.0, f64::max);
    assert!(((r.value - sup_g) / sup_g).abs() < 0.1, "{} vs {sup_g}", r.value);
    assert!(!r.diverging);
}

#[test]
fn favard_functional_flags_rough_functions() {
    let k = variable();
    let f = |x: f64| x.abs().powf(0.3);
    let t_grid: Vec<f64> = (1..=8).map(|j| 0.5f64.powi(j)).collect();
    let probes: Vec<f64> = (-10..=10).map(|j| 0.05 * j as f64).collect();
    let r = k.favard_functional(&f, &t_grid, &probes).unwrap();
    assert!(r.diverging, "{:?}", r.profile);
}
