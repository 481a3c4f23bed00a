use conrelax::convex::{ConvexSet, Shape};
use conrelax::grid::{Field, Grid, Region};
use conrelax::solver::{
    diffusion_step, relaxation_step_exact, relaxation_step_implicit, run, stable_dt, transport_step, Scheme,
    SolverConfig, SolverError,
};
use conrelax::system::{FriedrichsSystem, ModelSpec};
use conrelax_testkit::{gaussian_heat, observed_order, rk4, smooth_bump, wave_exact};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seeded(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn wave(mu: f64) -> FriedrichsSystem<f64> {
    ModelSpec::Wave1D { shear_modulus: mu }.build().unwrap().system
}

fn inactive(m: usize) -> ConvexSet<f64> {
    ConvexSet::new(Shape::ball(vec![0.0; m], 1e3), m).unwrap()
}

fn plastic_set(yield_scaled: f64) -> ConvexSet<f64> {
    ConvexSet::new(Shape::cylinder(vec![1], Shape::slab(0, -yield_scaled, yield_scaled)), 2).unwrap()
}

/// Sets with closed-form projections, chosen by index.
fn closed_form_set(kind: usize, rng: &mut ChaCha8Rng) -> ConvexSet<f64> {
    let shape = match kind {
        0 => Shape::ball(vec![rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)], rng.gen_range(0.5..2.0)),
        1 => Shape::cube(
            vec![rng.gen_range(-2.0..-0.2), rng.gen_range(-2.0..-0.2)],
            vec![rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)],
        ),
        2 => {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Shape::half_space(vec![a.cos(), a.sin()], rng.gen_range(0.1..2.0))
        }
        3 => Shape::slab(rng.gen_range(0..2), rng.gen_range(-2.0..-0.2), rng.gen_range(0.2..2.0)),
        _ => Shape::cylinder(vec![1], Shape::slab(0, -0.5, 0.5)),
    };
    ConvexSet::new(shape, 2).unwrap()
}

fn single_state_field(state: &[f64]) -> Field<f64> {
    let grid = Grid::new(1, 1.0, 4).unwrap();
    Field::from_fn(grid, state.len(), |_| state.to_vec()).unwrap()
}

#[test]
fn relaxation_contracts_distance_exponentially() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..1000 {
        let k = closed_form_set(trial % 5, &mut rng);
        let w = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let eps = 10f64.powf(rng.gen_range(-3.0..0.0));
        let dt = eps * rng.gen_range(0.01..5.0);
        let after = relaxation_step_exact(&k, &single_state_field(&w), eps, dt).unwrap();
        let before = k.distance(&w).unwrap();
        let expected = (-dt / eps).exp() * before;
        let got = k.distance(after.cell(0)).unwrap();
        assert!(
            (got - expected).abs() <= 1e-12 * expected.max(f64::MIN_POSITIVE) || (got == 0.0 && expected == 0.0),
            "trial {trial}: {got} vs {expected}"
        );
    }
}

#[test]
fn relaxation_matches_rk4_of_the_source_ode() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let k = closed_form_set(trial % 5, &mut rng);
        let w = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let eps = rng.gen_range(0.05..1.0);
        let dt = rng.gen_range(0.01..2.0);
        let exact = relaxation_step_exact(&k, &single_state_field(&w), eps, dt).unwrap();
        let ode = rk4(
            |_, y| {
                let p = k.project(y).unwrap();
                y.iter().zip(&p).map(|(y, p)| (p - y) / eps).collect()
            },
            &w,
            dt,
            4000,
        );
        for i in 0..2 {
            assert!((exact.cell(0)[i] - ode[i]).abs() < 1e-6, "trial {trial}");
        }
    }
}

#[test]
fn implicit_relaxation_lands_between_state_and_projection() {
    let k = plastic_set(0.5);
    let w = [0.3, 2.0];
    let eps = 0.1;
    for dt in [0.01, 0.1, 1.0, 10.0] {
        let out = relaxation_step_implicit(&k, &single_state_field(&w), eps, dt).unwrap();
        let theta = dt / (eps + dt);
        assert!((out.cell(0)[1] - (2.0 + theta * (0.5 - 2.0))).abs() < 1e-14);
        assert!((out.cell(0)[0] - 0.3).abs() < 1e-15);
    }
}

fn random_compact_field(rng: &mut ChaCha8Rng, grid: Grid<f64>, m: usize, radius: f64) -> Field<f64> {
    let amps: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let centre: f64 = rng.gen_range(-0.2..0.2);
    let width: f64 = rng.gen_range(0.2..radius - 0.2);
    let rough = rng.gen_bool(0.5);
    Field::from_fn(grid, m, |x| {
        let r = (x[0] - centre).abs();
        amps.iter()
            .map(|a| {
                if rough {
                    if r < width { *a } else { 0.0 }
                } else {
                    a * smooth_bump(r, width)
                }
            })
            .collect()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(seeded(48, 21))]
    #[test]
    fn energy_never_grows(seed in any::<u64>(), eps in 0.001..1.0f64, yield_scaled in 0.1..1.0f64, rusanov in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::new(1, 2.0, 128).unwrap();
        let w0 = random_compact_field(&mut rng, grid, 2, 1.0);
        let scheme = if rusanov { Scheme::Rusanov } else { Scheme::Upwind };
        let cfg = SolverConfig::new(eps, 0.5).with_scheme(scheme);
        let report = run(&wave(1.0), &plastic_set(yield_scaled), &w0, &cfg).unwrap();
        let e0 = report.records[0].energy;
        for pair in report.records.windows(2) {
            prop_assert!(pair[1].energy <= pair[0].energy * (1.0 + 1e-12));
        }
        prop_assert!(report.records.last().unwrap().energy <= e0 * (1.0 + 1e-12));
        prop_assert!(report.energy_bounded_by_data());
    }
}

proptest! {
    #![proptest_config(seeded(32, 22))]
    #[test]
    fn solutions_contract_in_l2(seed in any::<u64>(), eps in 0.001..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::new(1, 2.0, 128).unwrap();
        let a = random_compact_field(&mut rng, grid, 2, 1.0);
        let b = random_compact_field(&mut rng, grid, 2, 1.0);
        let cfg = SolverConfig::new(eps, 0.5).with_uniform_snapshots(5);
        let k = plastic_set(0.4);
        let ra = run(&wave(1.0), &k, &a, &cfg).unwrap();
        let rb = run(&wave(1.0), &k, &b, &cfg).unwrap();
        let d0 = a.difference(&b).unwrap().l2_norm(Region::All);
        for (sa, sb) in ra.snapshots.iter().zip(&rb.snapshots) {
            let d = sa.field.difference(&sb.field).unwrap().l2_norm(Region::All);
            prop_assert!(d <= d0 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn inactive_constraint_reduces_to_pure_transport() {
    let sys = wave(2.0);
    let grid = Grid::new(1, 2.0, 256).unwrap();
    let w0 = Field::from_fn(grid, 2, |x| vec![smooth_bump(x[0], 0.4), 0.5 * smooth_bump(x[0] - 0.1, 0.3)]).unwrap();
    let horizon = 0.3;
    for scheme in [Scheme::Upwind, Scheme::Rusanov] {
        let cfg = SolverConfig::new(1e-3, horizon).with_scheme(scheme);
        let relaxed = run(&sys, &inactive(2), &w0, &cfg).unwrap();

        let mut pure = w0.clone();
        let mut t = 0.0;
        while t < horizon {
            let dt = stable_dt(&sys, &grid, &cfg, horizon - t);
            pure = transport_step(&sys, &pure, scheme, dt).unwrap();
            t = if dt >= horizon - t { horizon } else { t + dt };
        }
        let gap = relaxed.final_field().difference(&pure).unwrap().max_abs();
        assert!(gap <= 1e-12, "{scheme:?}: {gap}");
    }
}

fn wave_error(cells: usize, scheme: Scheme) -> f64 {
    let c = 1.5f64;
    let sys = wave(c * c);
    let grid = Grid::new(1, 2.0, cells).unwrap();
    let v0 = |x: f64| smooth_bump(x, 0.5);
    let w0 = |x: f64| 0.5 * smooth_bump(x - 0.1, 0.4);
    let data = Field::from_fn(grid, 2, |x| vec![v0(x[0]), w0(x[0])]).unwrap();
    let horizon = 0.4;
    let cfg = SolverConfig::new(1.0, horizon).with_scheme(scheme);
    let report = run(&sys, &inactive(2), &data, &cfg).unwrap();
    let exact = Field::from_fn(grid, 2, |x| wave_exact(v0, w0, c, horizon, x[0]).to_vec()).unwrap();
    report.final_field().difference(&exact).unwrap().l2_norm(Region::All)
}

#[test]
fn upwind_converges_to_dalembert() {
    let cells = [128, 256, 512];
    let hs: Vec<f64> = cells.iter().map(|&n| 4.0 / n as f64).collect();
    let errs: Vec<f64> = cells.iter().map(|&n| wave_error(n, Scheme::Upwind)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let order = observed_order(&hs, &errs);
    assert!(order >= 0.8, "order {order}, errors {errs:?}");
}

#[test]
fn rusanov_equals_upwind_when_all_speeds_are_maximal() {
    for cells in [128, 256] {
        let (r, u) = (wave_error(cells, Scheme::Rusanov), wave_error(cells, Scheme::Upwind));
        assert!((r - u).abs() <= 1e-12 * u, "{r} vs {u}");
    }
}

/// Two decoupled advections at speeds 1 and 0.25: Rusanov smears the slow
/// field with the fast field's viscosity.
#[test]
fn rusanov_is_more_diffusive_on_slow_fields() {
    let b = conrelax::linalg::Matrix::diag(&[1.0, 0.25]);
    let sys = FriedrichsSystem::new("two speeds", vec![b]).unwrap();
    let grid = Grid::new(1, 2.0, 256).unwrap();
    let profile = |x: f64| smooth_bump(x, 0.5);
    let data = Field::from_fn(grid, 2, |x| vec![profile(x[0]), profile(x[0])]).unwrap();
    let horizon = 0.4;
    let exact = Field::from_fn(grid, 2, |x| vec![profile(x[0] - horizon), profile(x[0] - 0.25 * horizon)]).unwrap();
    let error = |scheme| {
        let report = run(&sys, &inactive(2), &data, &SolverConfig::new(1.0, horizon).with_scheme(scheme)).unwrap();
        report.final_field().difference(&exact).unwrap().l2_norm(Region::All)
    };
    assert!(error(Scheme::Rusanov) > error(Scheme::Upwind));
}

#[test]
fn diffusion_matches_heat_kernel() {
    let still = FriedrichsSystem::new("still", vec![conrelax::linalg::Matrix::zeros(1)]).unwrap();
    let grid = Grid::new(1, 3.0, 300).unwrap();
    let (amp, sigma, eta, horizon) = (1.0, 0.2, 0.05, 0.5);
    let mut f = Field::from_fn(grid, 1, |x| vec![gaussian_heat(amp, sigma, eta, 0.0, x[0])]).unwrap();
    let cfg = SolverConfig::new(1.0, horizon).with_eta(eta);
    let mut t = 0.0;
    while t < horizon {
        let dt = stable_dt(&still, &grid, &cfg, horizon - t);
        f = diffusion_step(&f, eta, dt).unwrap();
        t += dt;
    }
    let exact = Field::from_fn(grid, 1, |x| vec![gaussian_heat(amp, sigma, eta, horizon, x[0])]).unwrap();
    let rel = f.difference(&exact).unwrap().l2_norm(Region::All) / exact.l2_norm(Region::All);
    assert!(rel < 0.02, "relative error {rel}");
}

#[test]
fn two_dimensional_runs_keep_energy_and_support() {
    let sys = ModelSpec::Advection { speeds: vec![1.0, -0.5] }.build().unwrap().system;
    let grid = Grid::new(2, 2.0, 64).unwrap();
    let w0 = Field::from_fn(grid, 1, |x: &[f64]| vec![smooth_bump((x[0] * x[0] + x[1] * x[1]).sqrt(), 0.4)]).unwrap();
    let k = ConvexSet::new(Shape::cube(vec![-0.5], vec![0.5]), 1).unwrap();
    let cfg = SolverConfig::new(0.01, 0.3).with_uniform_snapshots(3);
    let report = run(&sys, &k, &w0, &cfg).unwrap();
    assert!(report.complete);
    assert!(report.records.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-12)));
    let (ok, rows) = conrelax::verify::finite_speed_check(&report, 0.4 + grid.h(), 1.0).unwrap();
    assert!(ok, "{rows:?}");
    // the exact relaxation shrinks the constraint gap by e^{-dt/ε} per step
    assert!(report.max_constraint_dist() <= 0.5 + 1e-12);
}

#[test]
fn wave_in_two_dimensions_with_rusanov() {
    let bx = conrelax::linalg::Matrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
    let by = conrelax::linalg::Matrix::from_rows(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
    let sys = FriedrichsSystem::new("acoustics", vec![bx, by]).unwrap();
    let grid = Grid::new(2, 2.0, 48).unwrap();
    let w0 = Field::from_fn(grid, 3, |x: &[f64]| vec![smooth_bump((x[0] * x[0] + x[1] * x[1]).sqrt(), 0.3), 0.0, 0.0]).unwrap();
    let cfg = SolverConfig::new(0.1, 0.25).with_scheme(Scheme::Rusanov).with_cfl(0.45);
    let report = run(&sys, &inactive(3), &w0, &cfg).unwrap();
    assert!(report.records.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-12)));

    let too_fast = SolverConfig::new(0.1, 0.25).with_scheme(Scheme::Rusanov).with_cfl(0.9);
    let err = run(&sys, &inactive(3), &w0, &too_fast).unwrap_err();
    assert!(matches!(err.error, SolverError::CflViolation { .. }));
}

#[test]
fn single_precision_run() {
    let sys = ModelSpec::Wave1D { shear_modulus: 1.0f32 }.build().unwrap().system;
    let grid = Grid::new(1, 2.0f32, 128).unwrap();
    let w0 = Field::from_fn(grid, 2, |x| vec![if x[0].abs() < 0.5 { 1.0 } else { 0.0 }, 0.0]).unwrap();
    let k = ConvexSet::new(Shape::cylinder(vec![1], Shape::slab(0, -0.2f32, 0.2)), 2).unwrap();
    let report = run(&sys, &k, &w0, &SolverConfig::new(0.01f32, 0.5)).unwrap();
    assert!(report.complete);
    let slack = 1.0 + 1e-5;
    assert!(report.records.windows(2).all(|w| w[1].energy <= w[0].energy * slack));
}
