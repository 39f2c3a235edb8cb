//! Acceptance suite: every quantitative requirement of the library runs
//! here at its stated tolerance and prints one pass/fail line. The
//! criteria run sequentially inside a single test so the per-criterion
//! runtime budgets are not distorted by test-thread contention.

use foslab_core::grid::{lmu_norm, luxemburg_norm, modular, orlicz_norm, BoxDomain, GridFunction};
use foslab_core::ladder::SubspaceLadder;
use foslab_core::nfunc::{
    estimate_indices, xi_bounds, NFunction, NFunctionSpec, SobolevConjugate,
};
use foslab_core::operator::{consistency_check, KernelQuadrature};
use foslab_core::sobolev::{
    compose_lipschitz, embedding_ratio, norm_bundle, w_s1_comparison, FractionalParams,
};
use foslab_core::variational::{
    compactness_probe, convexity_inequality_check, energy, fountain_diagnostics,
    find_critical_points, grad_energy, pairing, tail_embedding_constant, ProbeKind, ProblemSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Criterion {
    label: &'static str,
    budget: Duration,
    outcome: Result<(), String>,
    elapsed: Duration,
}

fn run(
    label: &'static str,
    budget_secs: u64,
    body: impl FnOnce() -> Result<(), String>,
) -> Criterion {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    Criterion {
        label,
        budget: Duration::from_secs(budget_secs),
        outcome,
        elapsed,
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

/// Random smooth function: a sine-ladder combination with a log-uniform
/// amplitude.
fn random_smooth(dom: &BoxDomain, ladder: &SubspaceLadder, rng: &mut ChaCha8Rng) -> GridFunction {
    let _ = dom;
    let k = ladder.k_max();
    let coeffs: Vec<f64> = (0..k).map(|j| gauss(rng) / (1 + j) as f64).collect();
    let amp = 10f64.powf(rng.gen_range(-1.0..1.0));
    ladder.combine(0, &coeffs).unwrap().scaled(amp)
}

fn prototype(n: usize, nfun: NFunctionSpec) -> ProblemSpec {
    let dom = BoxDomain::interval(-6.0, 6.0, n).unwrap();
    let v = GridFunction::from_fn(dom.clone(), |x| 1.0 + x[0] * x[0]).unwrap();
    let xi = GridFunction::from_fn(dom.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
    ProblemSpec::new(
        nfun,
        FractionalParams::new(0.5, 1, 0.25).unwrap(),
        dom,
        v,
        xi,
        1.5,
        2.0,
        1.0,
    )
    .unwrap()
}

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn criterion_01() -> Result<(), String> {
    for q in [2.0, 3.0, 4.0] {
        let idx = estimate_indices(&NFunctionSpec::power(q).unwrap(), 6).map_err(|e| e.to_string())?;
        check(
            (idx.m0 - q).abs() < 1e-6 && (idx.m_sup - q).abs() < 1e-6,
            format!("indices of |t|^{q}: ({}, {})", idx.m0, idx.m_sup),
        )?;
    }
    let tab: Vec<(f64, f64)> = foslab_core::numeric::log_grid(1e-3, 20.0, 120)
        .into_iter()
        .map(|t| (t, t.exp_m1()))
        .collect();
    let specs = vec![
        NFunctionSpec::power(2.5).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
        NFunctionSpec::log_weighted(3.0).unwrap(),
        NFunctionSpec::tabulated(tab).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for spec in &specs {
        for _ in 0..10_000 {
            let s = rng.gen_range(0.0..8.0);
            let t = rng.gen_range(0.0..8.0);
            let gap = foslab_core::nfunc::young_gap(spec, s, t).map_err(|e| e.to_string())?;
            check(gap >= -1e-10, format!("young gap {gap} at ({s}, {t})"))?;
        }
        for _ in 0..200 {
            let s = rng.gen_range(0.0..8.0);
            let gap = foslab_core::nfunc::young_gap(spec, s, spec.density(s))
                .map_err(|e| e.to_string())?;
            check(gap.abs() <= 1e-8, format!("young equality gap {gap} at {s}"))?;
        }
    }
    Ok(())
}

fn criterion_02() -> Result<(), String> {
    let p2 = NFunctionSpec::power(2.0).unwrap();
    let sc = SobolevConjugate::build(&p2, 2, 0.5).map_err(|e| e.to_string())?;
    for &t in foslab_core::numeric::log_grid(0.1, 10.0, 64).iter() {
        let got = sc.value(t);
        let want = t.powi(4) / 256.0;
        check(
            ((got - want) / want).abs() <= 1e-3,
            format!("M*({t}) = {got}, closed form {want}"),
        )?;
    }
    let idx = estimate_indices(&sc, 2).map_err(|e| e.to_string())?;
    check(
        (idx.m0 - 4.0).abs() <= 0.05 && (idx.m_sup - 4.0).abs() <= 0.05,
        format!("M* index ({}, {})", idx.m0, idx.m_sup),
    )
}

fn criterion_03() -> Result<(), String> {
    let specs = vec![
        NFunctionSpec::power(2.5).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
        NFunctionSpec::log_weighted(3.0).unwrap(),
    ];
    let indices: Vec<_> = specs
        .iter()
        .map(|s| estimate_indices(s, 6).unwrap())
        .collect();
    let dom = BoxDomain::interval(-1.0, 1.0, 32).unwrap();
    let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..500 {
        let u = random_smooth(&dom, &ladder, &mut rng);
        if u.is_zero() {
            continue;
        }
        let spec = &specs[trial % specs.len()];
        let idx = &indices[trial % specs.len()];
        let lux = luxemburg_norm(&u, spec).map_err(|e| e.to_string())?;
        let unit = modular(&u.scaled(1.0 / lux), spec).map_err(|e| e.to_string())?;
        check(
            (unit - 1.0).abs() <= 1e-8,
            format!("trial {trial}: modular at unit scale {unit}"),
        )?;
        let rho = modular(&u, spec).map_err(|e| e.to_string())?;
        let (x0, x1) = xi_bounds(idx, lux).map_err(|e| e.to_string())?;
        check(
            x0 <= rho + 1e-8 * rho.max(1.0) && rho <= x1 + 1e-8 * x1.max(1.0),
            format!("trial {trial}: sandwich {x0} <= {rho} <= {x1}"),
        )?;
        let orl = orlicz_norm(&u, spec).map_err(|e| e.to_string())?;
        check(
            orl <= rho + 1.0 + 1e-8,
            format!("trial {trial}: gauge {orl} vs modular+1 {}", rho + 1.0),
        )?;
        check(
            lux <= orl + 1e-8 && orl <= 2.0 * lux + 1e-8,
            format!("trial {trial}: two-sided bound lux {lux} orl {orl}"),
        )?;
    }
    Ok(())
}

fn criterion_04() -> Result<(), String> {
    let fp = FractionalParams::new(0.5, 1, 0.25).unwrap();
    let dom = BoxDomain::interval(-1.0, 1.0, 64).unwrap();
    let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let specs = [
        NFunctionSpec::power(3.0).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
    ];
    for trial in 0..200 {
        let u = random_smooth(&dom, &ladder, &mut rng);
        if u.is_zero() {
            continue;
        }
        let spec = &specs[trial % 2];
        let b = norm_bundle(&u, spec, &fp, None).map_err(|e| e.to_string())?;
        check(
            0.5 * b.snorm <= b.tilde_norm + 1e-8 && b.tilde_norm <= 2.0 * b.snorm + 1e-8,
            format!("trial {trial}: equivalence snorm {} tilde {}", b.snorm, b.tilde_norm),
        )?;
    }
    // modular power sandwich at pinned gauge values
    for (si, spec) in specs.iter().enumerate() {
        let idx = estimate_indices(spec, 6).unwrap();
        let u = random_smooth(&dom, &ladder, &mut rng);
        let b = norm_bundle(&u, spec, &fp, None).map_err(|e| e.to_string())?;
        for target in [0.1, 0.5, 0.9, 1.1, 2.0, 5.0] {
            let v = u.scaled(target / b.tilde_norm);
            let bv = norm_bundle(v.as_ref(), spec, &fp, None).map_err(|e| e.to_string())?;
            let t = bv.tilde_norm;
            let (lo, hi) = if t > 1.0 {
                (t.powf(idx.m0), t.powf(idx.m_sup))
            } else {
                (t.powf(idx.m_sup), t.powf(idx.m0))
            };
            check(
                lo <= bv.rho_tilde + 1e-8 * bv.rho_tilde.max(1.0)
                    && bv.rho_tilde <= hi + 1e-8 * hi.max(1.0),
                format!("family {si}, gauge {target}: {lo} <= {} <= {hi}", bv.rho_tilde),
            )?;
        }
    }
    Ok(())
}

// helper so `u.scaled(...)` can be passed by reference uniformly above
trait AsRefSelf {
    fn as_ref(&self) -> &Self;
}
impl AsRefSelf for GridFunction {
    fn as_ref(&self) -> &Self {
        self
    }
}

fn criterion_05() -> Result<(), String> {
    let fp = FractionalParams::new(0.5, 1, 0.25).unwrap();
    let dom = BoxDomain::interval(-1.0, 1.0, 64).unwrap();
    let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let specs = [
        NFunctionSpec::power(2.0).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
    ];
    for trial in 0..100 {
        let u = random_smooth(&dom, &ladder, &mut rng);
        if u.max_abs() == 0.0 {
            continue;
        }
        let spec = &specs[trial % 2];
        let base = norm_bundle(&u, spec, &fp, None).map_err(|e| e.to_string())?;
        let level = u.max_abs() * rng.gen_range(0.2..1.0);
        let tr = compose_lipschitz(&u, |t| t.clamp(-level, level), 1.0, spec, &fp)
            .map_err(|e| e.to_string())?;
        check(
            tr.contraction_lhs <= tr.contraction_rhs + 1e-10,
            format!("trial {trial}: contraction {} vs {}", tr.contraction_lhs, tr.contraction_rhs),
        )?;
        check(
            tr.bundle.snorm <= base.snorm + 1e-8,
            format!("trial {trial}: truncation norm {} vs {}", tr.bundle.snorm, base.snorm),
        )?;
    }
    Ok(())
}

fn criterion_06() -> Result<(), String> {
    let fp = FractionalParams::new(0.6, 1, 0.3).unwrap();
    let p2 = NFunctionSpec::power(2.0).unwrap();
    let dom = BoxDomain::interval(0.0, 1.0, 64).unwrap();
    let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..100 {
        let u = random_smooth(&dom, &ladder, &mut rng);
        let rep = w_s1_comparison(&u, &p2, &fp).map_err(|e| e.to_string())?;
        check(
            rep.lhs <= rep.rhs * (1.0 + 1e-6) + 1e-12,
            format!("trial {trial}: {} vs {}", rep.lhs, rep.rhs),
        )?;
    }
    Ok(())
}

fn criterion_07() -> Result<(), String> {
    let p2 = NFunctionSpec::power(2.0).unwrap();
    let fp = FractionalParams::new(0.5, 1, 0.25).unwrap();
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let dom = BoxDomain::interval(-6.0, 6.0, n).unwrap();
        let kq = KernelQuadrature::new(dom.clone());
        let u = GridFunction::from_fn(dom.clone(), |x| (-x[0] * x[0] / 0.5).exp()).unwrap();
        let v = GridFunction::from_fn(dom, |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
        let rep = consistency_check(&u, &v, &p2, &fp, &kq).map_err(|e| e.to_string())?;
        errs.push(rep.rel_error);
    }
    check(
        errs[1] <= 1e-2,
        format!("rel error at n=128: {}", errs[1]),
    )?;
    check(
        errs[1] < errs[0],
        format!("no refinement gain: n=64 {} vs n=128 {}", errs[0], errs[1]),
    )
}

fn criterion_08() -> Result<(), String> {
    let nfuns = [
        NFunctionSpec::power(3.0).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
        NFunctionSpec::log_weighted(3.0).unwrap(),
    ];
    for nfun in nfuns {
        let ps = prototype(64, nfun);
        let u = GridFunction::from_fn(ps.domain.clone(), |x| {
            0.8 * (2.0 * x[0]).sin() * (-x[0] * x[0] / 4.0).exp()
        })
        .unwrap();
        let g = grad_energy(&ps, &u).map_err(|e| e.to_string())?;
        let e0 = energy(&ps, &u).map_err(|e| e.to_string())?.i_lambda;
        let ladder = SubspaceLadder::sine(ps.domain.clone(), 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        let h = 1e-5;
        for dir in 0..20 {
            let v = ladder.random_member(0, 10, &mut rng).unwrap();
            let ep = energy(&ps, &u.axpy(h, &v).unwrap()).unwrap().i_lambda;
            let em = energy(&ps, &u.axpy(-h, &v).unwrap()).unwrap().i_lambda;
            let fd = (ep - em) / (2.0 * h);
            let an = pairing(&g, &v).unwrap();
            check(
                (fd - an).abs() <= 1e-5 * (1.0 + e0.abs()),
                format!("direction {dir}: fd {fd} vs analytic {an}"),
            )?;
        }
    }
    Ok(())
}

fn criterion_09() -> Result<(), String> {
    let ps = prototype(128, NFunctionSpec::power(3.0).unwrap());
    let ladder = SubspaceLadder::sine(ps.domain.clone(), 12).unwrap();
    let mut lk = Vec::new();
    for k in 1..=8usize {
        let est =
            tail_embedding_constant(&ps, &ladder, k, 500, 20, 909).map_err(|e| e.to_string())?;
        check(
            (est.achiever_norm - 1.0).abs() <= 1e-6,
            format!("k={k}: achiever norm {}", est.achiever_norm),
        )?;
        lk.push(est.value);
    }
    for k in 0..7 {
        check(
            lk[k + 1] <= 1.05 * lk[k],
            format!("l_k not non-increasing at k={}: {} -> {}", k + 1, lk[k], lk[k + 1]),
        )?;
    }
    check(
        lk[7] / lk[0] < 0.8,
        format!("l_8/l_1 = {}", lk[7] / lk[0]),
    )?;
    for k in [2usize, 3, 4] {
        let rep = fountain_diagnostics(&ps, &ladder, k, 2.5, 910 + k as u64)
            .map_err(|e| e.to_string())?;
        check(
            rep.a_k > 0.0 && rep.b_k < 0.0,
            format!("k={k}: a_k {} b_k {}", rep.a_k, rep.b_k),
        )?;
        check(
            rep.d_k >= rep.d_k_lower_bound - 1e-8 && rep.d_k <= 1e-8,
            format!("k={k}: d_k {} bound {}", rep.d_k, rep.d_k_lower_bound),
        )?;
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let ps = prototype(128, NFunctionSpec::power(3.0).unwrap());
    let (points, diag) = find_critical_points(&ps, 4, 24, 1001).map_err(|e| e.to_string())?;
    check(
        points.len() >= 3,
        format!("found {} pairs ({diag:?})", points.len()),
    )?;
    let sols: Vec<GridFunction> = points.iter().map(|p| p.u.clone()).collect();
    let probe =
        compactness_probe(&ps, ProbeKind::SolutionTails, &sols).map_err(|e| e.to_string())?;
    let c_embed = probe.c_embed;
    let xi_dual = ps.xi_dual_norm().map_err(|e| e.to_string())?;
    let m0 = ps.indices.m0;
    for (i, cp) in points.iter().enumerate() {
        check(
            cp.residual <= 1e-6,
            format!("pair {i}: residual {}", cp.residual),
        )?;
        check(
            cp.energy.i_lambda < 0.0,
            format!("pair {i}: energy {}", cp.energy.i_lambda),
        )?;
        check(
            cp.deflation_distance >= 1e-3,
            format!("pair {i}: deflation distance {}", cp.deflation_distance),
        )?;
        // boundedness inequality for solutions outside the unit ball
        let nrm = ps.e_norm(&cp.u).map_err(|e| e.to_string())?;
        if nrm >= 1.0 {
            let lhs = nrm.powf(m0) / 2f64.powf(m0 - 1.0);
            let rhs = cp.energy.i_lambda
                + 2.0 * xi_dual * c_embed.powf(ps.p) * nrm.powf(ps.p)
                + 1e-6;
            check(lhs <= rhs, format!("pair {i}: boundedness {lhs} vs {rhs}"))?;
        }
    }
    Ok(())
}

fn criterion_11() -> Result<(), String> {
    let dom = BoxDomain::interval(-1.0, 1.0, 32).unwrap();
    let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for nfun in [
        NFunctionSpec::power(3.0).unwrap(),
        NFunctionSpec::power_sum(3.0, 4.0).unwrap(),
    ] {
        let dom_ps = BoxDomain::interval(-1.0, 1.0, 32).unwrap();
        let v = GridFunction::from_fn(dom_ps.clone(), |x| 1.0 + x[0] * x[0]).unwrap();
        let xi = GridFunction::from_fn(dom_ps.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let ps = ProblemSpec::new(
            nfun,
            FractionalParams::new(0.5, 1, 0.25).unwrap(),
            dom_ps,
            v,
            xi,
            1.5,
            2.0,
            1.0,
        )
        .unwrap();
        for trial in 0..100 {
            let u = random_smooth(&dom, &ladder, &mut rng);
            let v = random_smooth(&dom, &ladder, &mut rng);
            let rep = convexity_inequality_check(&ps, &u, &v).map_err(|e| e.to_string())?;
            check(!rep.skipped, "preconditions unexpectedly failed".into())?;
            check(
                rep.holds,
                format!("trial {trial}: lhs {} rhs {}", rep.lhs, rep.rhs),
            )?;
        }
    }
    Ok(())
}

fn criterion_12() -> Result<(), String> {
    let p2 = NFunctionSpec::power(2.0).unwrap();
    let fp = FractionalParams::new(0.5, 1, 0.25).unwrap();
    let mstar = SobolevConjugate::build(&p2, 2, 0.5).map_err(|e| e.to_string())?;
    let mut c5 = Vec::new();
    for n in [64usize, 128] {
        let dom = BoxDomain::interval(-1.0, 1.0, n).unwrap();
        let ladder = SubspaceLadder::sine(dom.clone(), 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1212);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let u = random_smooth(&dom, &ladder, &mut rng);
            if u.is_zero() {
                continue;
            }
            let r = embedding_ratio(&u, &p2, &fp, &mstar).map_err(|e| e.to_string())?;
            worst = worst.max(r);
        }
        c5.push(worst);
    }
    let ratio = (c5[1] / c5[0]).max(c5[0] / c5[1]);
    check(
        ratio < 2.0,
        format!("C5 at n=64: {}, n=128: {}, factor {}", c5[0], c5[1], ratio),
    )
}

#[test]
fn acceptance() {
    let criteria = vec![
        run("01 n-function exactness and Young gap", 5, criterion_01),
        run("02 Sobolev conjugate closed form", 5, criterion_02),
        run("03 Luxemburg correctness and gauge bounds", 30, criterion_03),
        run("04 norm equivalence and modular sandwich", 120, criterion_04),
        run("05 Lipschitz composition and truncation", 60, criterion_05),
        run("06 W^{s',1} comparison bound", 60, criterion_06),
        run("07 operator consistency under refinement", 60, criterion_07),
        run("08 gradient central-difference agreement", 60, criterion_08),
        run("09 fountain diagnostics on the prototype", 300, criterion_09),
        run("10 multiplicity via deflated search", 600, criterion_10),
        run("11 uniform convexity inequality", 60, criterion_11),
        run("12 embedding constant stability", 300, criterion_12),
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let within = c.elapsed <= c.budget;
        let status = if c.outcome.is_ok() && within { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {status} ({:.2}s / budget {}s)",
            c.label,
            c.elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        if let Err(msg) = &c.outcome {
            println!("    -> {msg}");
            failed.push(format!("{}: {msg}", c.label));
        } else if !within {
            failed.push(format!(
                "{}: exceeded budget ({:.2}s)",
                c.label,
                c.elapsed.as_secs_f64()
            ));
        }
    }
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
