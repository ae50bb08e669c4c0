mod common;

use std::f64::consts::PI;

use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twolayer::analysis::{matrix_dispersion, model_dispersion, residual_order, Path, Verdict, ORDER_MUS};
use twolayer::models::{
    build_unidirectional_ic, decoupled_evolve, gn2d_residual, ModelId, ModelSpec, State, Tolerances, VelocityRole,
};
use twolayer::params::{ClCoeffs, ClVariant, Params, SymBoussinesqOps};
use twolayer::spectral::{deriv, dx, grad, Field, Grid, VecField};

fn two_pi_2d(nx: usize, ny: usize) -> Grid {
    Grid::new_2d(nx, ny, 2.0 * PI, 2.0 * PI).unwrap()
}

/// 2D field constant in y from a 1D profile.
fn extrude(g2: Grid, f: &Field) -> Field {
    let nx = g2.n(0);
    let mut out = Field::zeros(g2);
    for (node, val) in out.values_mut().iter_mut().enumerate() {
        *val = f.values()[node % nx];
    }
    out
}

fn first_row(f: &Field) -> Vec<f64> {
    f.values()[..f.grid().n(0)].to_vec()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn sw2d_reduces_to_sw1d_on_plane_waves() {
    let g1 = Grid::periodic_1d(64).unwrap();
    let g2 = two_pi_2d(64, 8);
    let p = Params::new(0.4, 0.3, 0.0, 0.01, 1.3).with_bond_inv(0.2);
    let zeta = Field::from_fn(g1, |x, _| 0.3 * x.sin() + 0.1 * (2.0 * x).cos());
    let v = Field::from_fn(g1, |x, _| 0.2 * x.cos() - 0.05 * (3.0 * x).sin());
    let r1 = ModelSpec::new(ModelId::Sw1d, p)
        .rhs(&State::new_1d(zeta.clone(), v.clone(), VelocityRole::ShearMeanV).unwrap())
        .unwrap();
    let s2 = State::new_vec(
        extrude(g2, &zeta),
        VecField::new(vec![extrude(g2, &v), Field::zeros(g2)]).unwrap(),
        VelocityRole::ShearV,
    )
    .unwrap();
    let r2 = ModelSpec::new(ModelId::Sw2d, p)
        .with_tolerances(Tolerances::tight())
        .rhs(&s2)
        .unwrap();
    assert!(max_diff(&first_row(&r2.zeta), r1.zeta.values()) < 1e-10);
    assert!(max_diff(&first_row(&r2.vel[0]), r1.vel[0].values()) < 1e-10);
    assert!(r2.vel[1].sup_norm() < 1e-10);
}

#[test]
fn sw2d_velocity_tendency_is_curl_free() {
    let g = two_pi_2d(32, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = Params::new(0.5, 0.2, 0.0, 0.01, 1.2).with_bond_inv(0.1);
    for _ in 0..5 {
        let zeta = common::smooth_field(g, &mut rng, 3, 0.3);
        let phi = common::smooth_field(g, &mut rng, 3, 0.2);
        let s = State::new_vec(zeta, grad(&phi), VelocityRole::ShearV).unwrap();
        let r = ModelSpec::new(ModelId::Sw2d, p).rhs(&s).unwrap();
        let curl = &deriv(&r.vel[1], 0, 1) - &deriv(&r.vel[0], 1, 1);
        assert!(curl.sup_norm() <= 1e-9, "curl {}", curl.sup_norm());
    }
}

#[test]
fn gn_residual_is_dimensionally_consistent() {
    let g1 = Grid::periodic_1d(64).unwrap();
    let g2 = two_pi_2d(64, 8);
    let p = Params::new(0.4, 0.2, 0.0, 0.05, 1.3).with_bond_inv(0.1);
    let zeta = Field::from_fn(g1, |x, _| 0.4 * x.sin());
    let v = Field::from_fn(g1, |x, _| 0.3 * x.cos() + 0.1 * (2.0 * x).sin());
    let zt = Field::from_fn(g1, |x, _| 0.2 * x.cos());
    let vt = Field::from_fn(g1, |x, _| -0.1 * (2.0 * x).sin());
    let opts = Tolerances::tight().neumann();
    let (m1, u1) = gn2d_residual(
        &zeta,
        &VecField::from_scalar(v.clone()),
        &zt,
        &VecField::from_scalar(vt.clone()),
        &p,
        None,
        1e-4,
        opts,
    )
    .unwrap();
    let lift = |f: &Field| VecField::new(vec![extrude(g2, f), Field::zeros(g2)]).unwrap();
    let (m2, u2) = gn2d_residual(&extrude(g2, &zeta), &lift(&v), &extrude(g2, &zt), &lift(&vt), &p, None, 1e-4, opts).unwrap();
    assert!(max_diff(&first_row(&m2), m1.values()) < 1e-9);
    assert!(max_diff(&first_row(u2.comp(0)), u1.comp(0).values()) < 1e-9);
    assert!(u2.comp(1).sup_norm() < 1e-9);
}

#[test]
fn gn1d_state_is_a_momentum_solution_of_the_residual() {
    // the 1D Green-Naghdi flow advanced by its own tendency leaves a residual of the forward-difference size
    let g = Grid::periodic_1d(64).unwrap();
    let p = Params::new(0.5, 0.1, 0.0, 0.01, 1.2);
    let m = ModelSpec::new(ModelId::Gn1d, p).with_tolerances(Tolerances::tight());
    let zeta = Field::from_fn(g, |x, _| 0.5 * x.sin());
    let v = Field::from_fn(g, |x, _| 0.3 * x.cos());
    let (zt, vt) = m.tendency(&zeta, &v).unwrap();
    let mut prev = f64::INFINITY;
    for dt in [1e-3, 1e-4] {
        let (r0, r1) = gn2d_residual(
            &zeta,
            &VecField::from_scalar(v.clone()),
            &zt,
            &VecField::from_scalar(vt.clone()),
            &p,
            None,
            dt,
            Tolerances::tight().neumann(),
        )
        .unwrap();
        assert!(r0.sup_norm() < 1e-12);
        let r = r1.sup_norm();
        assert!(r < prev);
        prev = r;
    }
    // the forward difference leaves an O(mu dt) remainder plus the O(mu^2 eps) model gap
    assert!(prev < 1e-4, "{prev}");
}

#[test]
fn hierarchy_orders_on_the_reference_state() {
    let g = Grid::periodic_1d(128).unwrap();
    let p = Params::new(0.5, 0.1, 0.0, 0.01, 1.2);
    let spec = |id| ModelSpec::new(id, p).with_tolerances(Tolerances::tight());
    let gn = spec(ModelId::Gn1d);

    let sw = residual_order(&gn, &spec(ModelId::Sw1d), g, Path::Fixed(0.1), &ORDER_MUS, 0.0).unwrap();
    assert_eq!(sw.verdict(1.0, 0.05), Verdict::Pass, "{sw:?}");

    let chgn = residual_order(&gn, &spec(ModelId::Chgn1d), g, Path::SqrtMu, &ORDER_MUS, 0.0).unwrap();
    assert_eq!(chgn.verdict(2.0, 0.1), Verdict::Pass, "{chgn:?}");

    let sym = residual_order(&spec(ModelId::Bouss1d), &spec(ModelId::SymBouss1d), g, Path::Mu, &ORDER_MUS, 0.0).unwrap();
    assert_eq!(sym.verdict(2.0, 0.15), Verdict::Pass, "{sym:?}");

    let same = residual_order(&gn, &gn, g, Path::Mu, &ORDER_MUS, 0.0).unwrap();
    assert_eq!(same.verdict(2.0, 0.15), Verdict::Degenerate);
}

#[test]
fn residual_order_reports_the_failing_sweep_point() {
    let g = Grid::periodic_1d(32).unwrap();
    let p = Params::new(0.5, 0.1, 0.0, 0.01, 2.5);
    // eps = 1 empties the lower layer on the reference state
    let err = residual_order(
        &ModelSpec::new(ModelId::Gn1d, p),
        &ModelSpec::new(ModelId::Sw1d, p),
        g,
        Path::Fixed(1.0),
        &ORDER_MUS,
        0.0,
    )
    .unwrap_err();
    assert!(err.to_string().contains("mu = 0.0001"), "{err}");
    assert_eq!(err.condition(), Some("(H1) h₂ = 1/δ+εζ−βb"), "{err:?}");
}

#[test]
fn boussinesq_base_phase_speed_from_the_linear_operator() {
    let p = Params::new(0.5, 0.0, 0.0, 0.1, 1.0);
    let m = ModelSpec::new(ModelId::Bouss1d, p);
    let c = matrix_dispersion(&m, 32, 1).unwrap();
    assert!((c * c - 1.0 / (1.0 + 0.1 / 3.0)).abs() < 1e-12);
}

#[test]
fn symmetric_boussinesq_phase_speed_by_hand() {
    let (gamma, delta, bo_inv, mu, k) = (0.3, 1.4, 0.2, 0.05, 3.0);
    let ops = SymBoussinesqOps::new(gamma, delta, bo_inv).unwrap();
    let s = ops.s0 + ops.s1 * (mu * k * k);
    let sig = ops.sigma0 + ops.sigma1 * (mu * k * k);
    // det(Sigma - c S) = 0 with diagonal S
    let m: Matrix2<f64> = Matrix2::new(
        sig[(0, 0)] / s[(0, 0)],
        sig[(0, 1)] / s[(0, 0)],
        sig[(1, 0)] / s[(1, 1)],
        sig[(1, 1)] / s[(1, 1)],
    );
    let (tr, det) = (m.trace(), m.determinant());
    let hand = 0.5 * tr + (0.25 * tr * tr - det).sqrt();
    let p = Params::new(gamma, 0.0, 0.0, mu, delta).with_bo_inv(bo_inv);
    let spec = ModelSpec::new(ModelId::SymBouss1d, p);
    assert!((model_dispersion(&spec, k).unwrap() - hand).abs() < 1e-12);
    assert!((matrix_dispersion(&spec, 32, 3).unwrap() - hand).abs() < 1e-12);
}

#[test]
fn prepared_initial_data_matches_independent_evaluation() {
    let g = Grid::periodic_1d(64).unwrap();
    let (gamma, delta, eps, mu) = (0.4, 1.3, 0.2, 0.04);
    let p = Params::new(gamma, eps, 0.0, mu, delta);
    let c = ClCoeffs::new(ClVariant::Unidirectional, gamma, delta, 0.0, 0.0).unwrap();
    let zeta0 = Field::from_fn(g, |x, _| 0.1 * x.sin());
    let s = build_unidirectional_ic(&zeta0, &p, &c).unwrap();

    let gd = gamma + delta;
    let crit = delta * delta - gamma;
    let one = 1.0 + gamma * delta;
    let a1 = 1.5 * crit / gd;
    let a2 = 21.0 * crit * crit / (8.0 * gd * gd) - 3.0 * (delta.powi(3) + gamma) / gd;
    let a3 = 71.0 * crit.powi(3) / (16.0 * gd.powi(3)) - 37.0 * crit * (delta.powi(3) + gamma) / (4.0 * gd * gd)
        + 5.0 * (delta.powi(4) - gamma) / gd;
    let nu = one / (6.0 * delta * gd);
    let k1 = 14.0 * crit * one / (24.0 * delta * gd * gd) - (1.0 - gamma) / (6.0 * gd);
    let k2 = 17.0 * crit * one / (48.0 * delta * gd * gd) - (1.0 - gamma) / (12.0 * gd);
    let want = Field::from_fn(g, |x, _| {
        let (z, zx, zxx) = (0.1 * x.sin(), 0.1 * x.cos(), -0.1 * x.sin());
        let h1 = 1.0 - eps * z;
        let h2 = 1.0 / delta + eps * z;
        let under = z + eps * a1 * z * z / 2.0 + eps * eps * a2 * z.powi(3) / 3.0 + eps.powi(3) * a3 * z.powi(4) / 4.0
            + mu * nu * zxx
            + mu * eps * (k1 * z * zxx + k2 * zx * zx);
        (h1 + gamma * h2) / (h1 * h2) * under
    });
    assert!((&s.vel[0] - &want).sup_norm() < 1e-12);
}

#[test]
fn decoupled_wave_limit_is_dalembert() {
    let g = Grid::periodic_1d(128).unwrap();
    let (gamma, delta) = (0.5, 1.2);
    let p = Params::new(gamma, 0.0, 0.0, 0.0, delta);
    let c = ClCoeffs::new(ClVariant::Decoupled, gamma, delta, 1.0, 0.0).unwrap();
    let gd = gamma + delta;
    let bump = |x: f64| (-4.0 * (x - PI).powi(2)).exp();
    let zeta0 = Field::from_fn(g, |x, _| bump(x));
    let v0 = Field::from_fn(g, |x, _| 0.3 * gd * x.sin());
    let t = 1.0;
    let s = decoupled_evolve(&zeta0, &v0, &p, &c, t, 1e-3).unwrap();
    // zeta_t + v_x / gd = 0, v_t + gd zeta_x = 0
    let wrap = |x: f64| x.rem_euclid(2.0 * PI);
    let plus = |x: f64| 0.5 * (bump(wrap(x)) + 0.3 * wrap(x).sin());
    let minus = |x: f64| 0.5 * (bump(wrap(x)) - 0.3 * wrap(x).sin());
    let zeta = Field::from_fn(g, |x, _| plus(x - t) + minus(x + t));
    let v = Field::from_fn(g, |x, _| gd * (plus(x - t) - minus(x + t)));
    assert!((&s.zeta - &zeta).l2_norm() <= 1e-8);
    assert!((&s.vel[0] - &v).l2_norm() <= 1e-8 * gd);

    let zero = decoupled_evolve(&Field::zeros(g), &Field::zeros(g), &p, &c, 2.0, 0.1).unwrap();
    assert_eq!(zero.sup_norm(), 0.0);
}

#[test]
fn scalar_equation_has_no_tendency_at_rest() {
    let g = Grid::periodic_1d(32).unwrap();
    let p = Params::new(0.5, 0.1, 0.0, 0.01, 1.2);
    for variant in [ClVariant::Unidirectional, ClVariant::Decoupled] {
        let c = ClCoeffs::new(variant, p.gamma, p.delta, 0.5, 0.2).unwrap();
        let r = ModelSpec::new(ModelId::ClScalar, p).with_cl(c, -1.0).rhs(&State::scalar(Field::zeros(g))).unwrap();
        assert_eq!(r.zeta.sup_norm(), 0.0);
    }
}

fn spec_for(id: ModelId, p: Params) -> ModelSpec {
    match id {
        ModelId::ClScalar => {
            let c = ClCoeffs::new(ClVariant::Unidirectional, p.gamma, p.delta, 0.3, 0.4).unwrap();
            ModelSpec::new(id, p.with_bond_inv(0.0)).with_cl(c, 1.0)
        }
        ModelId::Chgn1d => ModelSpec::new(id, p.with_bond_inv(0.0)),
        _ => ModelSpec::new(id, p),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_dimensional_fluxes_have_zero_mean(
        seed in 0u64..1000,
        gamma in 0.0f64..0.95,
        delta in 0.5f64..2.0,
        eps in 0.0f64..0.3,
        mu in 0.001f64..0.05,
        tension in prop::bool::ANY,
    ) {
        let g = Grid::periodic_1d(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeta = common::smooth_field(g, &mut rng, 4, 0.5);
        let v = common::smooth_field(g, &mut rng, 4, 0.3);
        let mut p = Params::new(gamma, eps, 0.0, mu, delta);
        if tension {
            p = p.with_bond_inv(0.1).with_bo_inv(0.1 / mu);
        }
        for id in [ModelId::Sw1d, ModelId::Gn1d, ModelId::Chgn1d, ModelId::Bouss1d, ModelId::SymBouss1d, ModelId::ClScalar] {
            let m = spec_for(id, p);
            let s = if id == ModelId::ClScalar {
                State::scalar(zeta.clone())
            } else {
                m.from_primitive(zeta.clone(), v.clone()).unwrap()
            };
            let r = m.rhs(&s).unwrap();
            prop_assert!(r.zeta.mean().abs() < 1e-13, "{} {}", id, r.zeta.mean());
            if id == ModelId::Gn1d {
                prop_assert!(r.vel[0].mean().abs() < 1e-13, "w {}", r.vel[0].mean());
            }
        }
    }

    #[test]
    fn primitive_conversion_round_trips(seed in 0u64..1000, eps in 0.0f64..0.3, mu in 0.001f64..0.05) {
        let g = Grid::periodic_1d(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeta = common::smooth_field(g, &mut rng, 4, 0.5);
        let v = common::smooth_field(g, &mut rng, 4, 0.3);
        let p = Params::new(0.5, eps, 0.0, mu, 1.2);
        for id in [ModelId::Sw1d, ModelId::Gn1d, ModelId::Chgn1d, ModelId::Bouss1d, ModelId::SymBouss1d] {
            let m = ModelSpec::new(id, p).with_tolerances(Tolerances::tight());
            let s = m.from_primitive(zeta.clone(), v.clone()).unwrap();
            let (z, w) = m.to_primitive(&s).unwrap();
            prop_assert_eq!(&z, &zeta);
            prop_assert!((&w - &v).sup_norm() < 1e-10, "{}", id);
        }
    }

    #[test]
    fn linear_scalar_equation_conserves_l2(seed in 0u64..1000, mu in 0.0f64..0.05) {
        // eps = 0: the scalar operator is skew-adjoint in the weighted norm |u|^2 + mu nu_t |u_x|^2
        let g = Grid::periodic_1d(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = common::smooth_field(g, &mut rng, 6, 1.0);
        let p = Params::new(0.5, 0.0, 0.0, mu, 1.2);
        let c = ClCoeffs::new(ClVariant::Unidirectional, 0.5, 1.2, 0.5, 0.1).unwrap();
        let r = ModelSpec::new(ModelId::ClScalar, p).with_cl(c, 1.0).rhs(&State::scalar(u.clone())).unwrap();
        let ux = dx(&u);
        let rate = u.inner(&r.zeta) + mu * c.nu_t * ux.inner(&dx(&r.zeta));
        prop_assert!(rate.abs() < 1e-10 * (1.0 + u.l2_norm().powi(2)));
    }
}
