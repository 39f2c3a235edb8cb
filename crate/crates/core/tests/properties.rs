//! Property runs for the inequality toolbox: Young's inequality, the
//! scaling sandwiches, norm axioms, the two-sided Orlicz/Luxemburg bound
//! and truncation monotonicity, over randomized inputs.

use foslab_core::grid::{
    holder_check, lmu_norm, luxemburg_norm, modular, orlicz_norm, weighted_luxemburg, BoxDomain,
    GridFunction,
};
use foslab_core::nfunc::{
    estimate_indices, eval_conjugate, xi_bounds, NFunction, NFunctionSpec,
};
use foslab_core::sobolev::{compose_lipschitz, norm_bundle, FractionalParams};
use proptest::prelude::*;

fn families() -> Vec<NFunctionSpec> {
    vec![
        NFunctionSpec::power(2.5).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
        NFunctionSpec::log_weighted(3.0).unwrap(),
    ]
}

fn grid_from(values: Vec<f64>) -> GridFunction {
    let dom = BoxDomain::interval(-1.0, 1.0, 32).unwrap();
    let n = dom.num_points();
    let vals: Vec<f64> = (0..n).map(|i| values[i % values.len()]).collect();
    GridFunction::new(dom, vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn young_gap_nonnegative(s in 0.0f64..10.0, t in 0.0f64..10.0) {
        for spec in families() {
            let gap = foslab_core::nfunc::young_gap(&spec, s, t).unwrap();
            prop_assert!(gap >= -1e-10, "gap {gap} for ({s}, {t})");
        }
    }

    #[test]
    fn young_equality_on_the_density_graph(s in 0.0f64..10.0) {
        for spec in families() {
            let gap = foslab_core::nfunc::young_gap(&spec, s, spec.density(s)).unwrap();
            prop_assert!(gap.abs() <= 1e-8, "gap {gap} at s = {s}");
        }
    }

    #[test]
    fn pointwise_scaling_sandwich(beta in 1e-2f64..1e2, t in 1e-2f64..1e2) {
        for spec in families() {
            let idx = estimate_indices(&spec, 6).unwrap();
            let (x0, x1) = xi_bounds(&idx, beta).unwrap();
            let m = spec.value(t);
            let mb = spec.value(beta * t);
            prop_assert!(x0 * m <= mb + 1e-10 * mb.max(1.0));
            prop_assert!(mb <= x1 * m + 1e-10 * mb.max(1.0));
        }
    }

    #[test]
    fn luxemburg_norm_axioms(raw in prop::collection::vec(-3.0f64..3.0, 8..32), c in 0.1f64..10.0) {
        let spec = NFunctionSpec::power_sum(3.0, 4.0).unwrap();
        let u = grid_from(raw.clone());
        let v = grid_from(raw.iter().map(|x| x.cos()).collect());
        let nu = luxemburg_norm(&u, &spec).unwrap();
        // absolute homogeneity
        let nscaled = luxemburg_norm(&u.scaled(-c), &spec).unwrap();
        prop_assert!((nscaled - c * nu).abs() <= 1e-8 * (1.0 + c * nu));
        // triangle inequality
        let nv = luxemburg_norm(&v, &spec).unwrap();
        let nsum = luxemburg_norm(&u.axpy(1.0, &v).unwrap(), &spec).unwrap();
        prop_assert!(nsum <= nu + nv + 1e-8);
    }

    #[test]
    fn weighted_norm_axioms(raw in prop::collection::vec(-3.0f64..3.0, 8..32), c in 0.1f64..10.0) {
        let spec = NFunctionSpec::power(3.0).unwrap();
        let u = grid_from(raw.clone());
        let v = grid_from(raw.iter().map(|x| 0.3 * x + 0.1).collect());
        let vw = GridFunction::from_fn(u.domain.clone(), |x| 1.0 + x[0] * x[0]).unwrap();
        let nu = weighted_luxemburg(&u, &spec, &vw).unwrap();
        let nscaled = weighted_luxemburg(&u.scaled(c), &spec, &vw).unwrap();
        prop_assert!((nscaled - c * nu).abs() <= 1e-8 * (1.0 + c * nu));
        let nv = weighted_luxemburg(&v, &spec, &vw).unwrap();
        let nsum = weighted_luxemburg(&u.axpy(1.0, &v).unwrap(), &spec, &vw).unwrap();
        prop_assert!(nsum <= nu + nv + 1e-8);
    }

    #[test]
    fn orlicz_bounds_and_holder(raw in prop::collection::vec(-2.0f64..2.0, 8..32)) {
        let spec = NFunctionSpec::power(2.5).unwrap();
        let u = grid_from(raw.clone());
        if u.is_zero() {
            return Ok(());
        }
        let lux = luxemburg_norm(&u, &spec).unwrap();
        let orl = orlicz_norm(&u, &spec).unwrap();
        // two-sided bound between the gauges
        prop_assert!(lux <= orl + 1e-8, "lux {lux} orl {orl}");
        prop_assert!(orl <= 2.0 * lux + 1e-8);
        // gauge bounded by modular + 1
        prop_assert!(orl <= modular(&u, &spec).unwrap() + 1.0 + 1e-8);
        // Hölder against a companion function
        let v = grid_from(raw.iter().map(|x| (x * 1.7).sin()).collect());
        let rep = holder_check(&u, &v, &spec).unwrap();
        prop_assert!(rep.holds, "lhs {} rhs {}", rep.lhs, rep.rhs);
    }

    #[test]
    fn modular_norm_sandwich(raw in prop::collection::vec(-4.0f64..4.0, 8..32)) {
        let spec = NFunctionSpec::power_sum(3.0, 4.0).unwrap();
        let idx = estimate_indices(&spec, 6).unwrap();
        let u = grid_from(raw);
        if u.is_zero() {
            return Ok(());
        }
        let rho = modular(&u, &spec).unwrap();
        let nrm = luxemburg_norm(&u, &spec).unwrap();
        let (x0, x1) = xi_bounds(&idx, nrm).unwrap();
        prop_assert!(x0 <= rho + 1e-8 * rho.max(1.0));
        prop_assert!(rho <= x1 + 1e-8 * x1.max(1.0));
    }

    #[test]
    fn truncation_monotone_in_norms(raw in prop::collection::vec(-3.0f64..3.0, 8..32)) {
        let spec = NFunctionSpec::power(2.0).unwrap();
        let fp = FractionalParams::new(0.5, 1, 0.25).unwrap();
        let u = grid_from(raw);
        if u.max_abs() == 0.0 {
            return Ok(());
        }
        let base = norm_bundle(&u, &spec, &fp, None).unwrap();
        for frac in [0.25, 0.5, 1.0] {
            let level = frac * u.max_abs();
            let tr = compose_lipschitz(&u, |t| t.clamp(-level, level), 1.0, &spec, &fp).unwrap();
            prop_assert!(tr.bundle.semi <= base.semi + 1e-8);
            prop_assert!(tr.bundle.lux <= base.lux + 1e-8);
            prop_assert!(tr.bundle.snorm <= base.snorm + 1e-8);
            prop_assert!(tr.contraction_lhs <= tr.contraction_rhs + 1e-10);
        }
    }
}

#[test]
fn modular_and_norm_vanish_together() {
    // scaling a fixed function to zero drives modular and norm to zero
    // monotonically
    let spec = NFunctionSpec::power(3.0).unwrap();
    let u = grid_from((0..32).map(|i| ((i as f64) / 5.0).sin()).collect());
    let mut last_mod = f64::INFINITY;
    let mut last_norm = f64::INFINITY;
    for k in 0..12 {
        let eps = 0.5f64.powi(k);
        let m = modular(&u.scaled(eps), &spec).unwrap();
        let n = luxemburg_norm(&u.scaled(eps), &spec).unwrap();
        assert!(m <= last_mod && n <= last_norm);
        last_mod = m;
        last_norm = n;
    }
    assert!(last_mod < 1e-9 && last_norm < 1e-3);
}

#[test]
fn lmu_norm_is_a_norm() {
    let u = grid_from((0..24).map(|i| (i as f64 * 0.7).cos()).collect());
    let v = grid_from((0..24).map(|i| (i as f64 * 0.3).sin()).collect());
    for mu in [1.0, 1.5, 2.0, 4.0] {
        let nu = lmu_norm(&u, mu).unwrap();
        let nv = lmu_norm(&v, mu).unwrap();
        let ns = lmu_norm(&u.axpy(1.0, &v).unwrap(), mu).unwrap();
        assert!(ns <= nu + nv + 1e-10);
        let n3 = lmu_norm(&u.scaled(3.0), mu).unwrap();
        assert!((n3 - 3.0 * nu).abs() <= 1e-10 * (1.0 + nu));
    }
}

#[test]
fn conjugate_value_agrees_with_legendre_scan() {
    // independent oracle: dense scan of sup_s (s t - M(s))
    for spec in families() {
        for t in [0.3, 1.0, 4.7] {
            let val = eval_conjugate(&spec, t).unwrap();
            let mut sup = f64::NEG_INFINITY;
            let mut s = 0.0;
            while s < 50.0 {
                sup = sup.max(s * t - spec.value(s));
                s += 1e-4;
            }
            assert!(
                (val - sup).abs() <= 1e-6 * (1.0 + sup.abs()),
                "conjugate at {t}: {val} vs scan {sup}"
            );
        }
    }
}
