//! Continuity suite: runs the two-segment continuity method from perturbed
//! bases ω' = ω + i∂∂̄(0.3·band-limited) and checks, along each trajectory,
//! the pointwise path identity, monotonicity of I−J, the E_0 path
//! reconstruction, the t → 1 lower-bound chain between the Ding and E_k
//! limits, and the late-path inequality
//! I(ω_φτ, Ric ω_φτ) ≤ n(1−τ)² I(ω, ω_φτ) for τ ≥ t₁(n).

use std::time::Instant;

use kef_core::functionals::moments::pair_moments;
use kef_core::functionals::{closed_energies, form_cache};
use kef_core::solvers::{
    continuity_run, extrapolate_to_one, integral_i_minus_j, integrate_samples,
    ContinuitySolveConfig, ContinuityTrajectory,
};
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{SphereForm, SphereModel};

use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

/// Smallest τ ∈ [0, 1) with (1−τ)^j (n−1) C(n−1, j) < n for every j < n —
/// the dimensional threshold after which the late-path inequality holds.
pub fn t_one(n: usize) -> f64 {
    let binom = |n: usize, k: usize| -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    };
    let ok = |tau: f64| -> bool {
        (0..n).all(|j| (1.0 - tau).powi(j as i32) * (n as f64 - 1.0) * binom(n - 1, j) < n as f64)
    };
    if ok(0.0) {
        return 0.0;
    }
    // bisect the threshold (the condition is monotone in τ)
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const EXTRAPOLATION_WINDOW: usize = 5;

fn trajectory_case(
    m: &SphereModel,
    name: &str,
    base_pot: &ScalarField,
    config: &SuiteConfig,
) -> CaseRecord {
    let mut rec = CaseRecord::new(name);
    let solve_cfg = ContinuitySolveConfig::default();
    let traj = match continuity_run(m, base_pot, &solve_cfg) {
        Ok(t) => t,
        Err(e) => {
            rec.fail(format!("solver failure: {e}"));
            return rec;
        }
    };
    let n = 1; // sphere model
    rec.value("nodes", traj.nodes.len() as f64);

    // per-node checks and plot series
    let aubin_tol = config.tol("aubin_residual");
    let mono_tol = config.tol("monotone");
    let mut max_aubin = 0.0_f64;
    let mut mono_defect = 0.0_f64;
    let mut prev = f64::NEG_INFINITY;
    let mut series: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for node in &traj.nodes {
        if let Some(a) = node.diagnostics.aubin_residual {
            max_aubin = max_aubin.max(a);
        }
        if node.t >= 0.0 {
            mono_defect = mono_defect.max(prev - node.diagnostics.i_minus_j);
            prev = node.diagnostics.i_minus_j;
        }
        series.entry("t".into()).or_default().push(node.t);
        series
            .entry("c_t".into())
            .or_default()
            .push(node.c_t.unwrap_or(0.0));
        series
            .entry("i_minus_j".into())
            .or_default()
            .push(node.diagnostics.i_minus_j);
        for (k, e) in node.diagnostics.e_k.iter().enumerate() {
            series.entry(format!("e_{k}")).or_default().push(*e);
        }
        series
            .entry("ding_f".into())
            .or_default()
            .push(node.diagnostics.ding_f);
    }
    rec.series = series;
    rec.residual("aubin_path_identity", max_aubin, aubin_tol);
    rec.residual("i_minus_j_monotone", mono_defect.max(0.0), mono_tol);

    // Ezeroteq reconstruction at τ = last node:
    // E_0(ω_φ0, ω_φτ) = −(1−τ)(I−J)(ω,ω_φτ) + (I−J)(ω,ω_φ0) − ∫₀^τ (I−J) dt
    if let Err(e) = e0_reconstruction(m, base_pot, &traj, config, &mut rec) {
        rec.fail(format!("reconstruction error: {e}"));
    }

    // limit chain: l̂ + (1/V)∫f ωⁿ = l̂_0 = l̂_k + I_k(ω, Ric ω), and the
    // Ding–Tian identity l̂ = −∫₀¹ (I−J) dt
    let chain_tol = config.tol("limit_chain");
    let ts: Vec<f64> = traj.ma_nodes().map(|nd| nd.t).collect();
    let fs: Vec<f64> = traj.ma_nodes().map(|nd| nd.diagnostics.ding_f).collect();
    let l_hat = extrapolate_to_one(&ts, &fs, EXTRAPOLATION_WINDOW);
    let imj_integral = integral_i_minus_j(&traj, EXTRAPOLATION_WINDOW);
    rec.value("l_hat", l_hat);
    rec.value("i_minus_j_integral", imj_integral);
    rec.residual("lzeroeq", l_hat + imj_integral, chain_tol);
    let base_form = m.form_from_potential(base_pot);
    match form_cache(m, &base_form) {
        Ok(base_cache) => {
            let mut l_k = Vec::new();
            for k in 0..=n {
                let es: Vec<f64> = traj
                    .ma_nodes()
                    .map(|nd| nd.diagnostics.e_k[k])
                    .collect();
                l_k.push(extrapolate_to_one(&ts, &es, EXTRAPOLATION_WINDOW));
            }
            let lhs = l_hat + base_cache.f_mean;
            rec.value("l_0_hat", l_k[0]);
            rec.residual("remm_l_vs_l0", lhs - l_k[0], chain_tol);
            for k in 1..=n {
                let ik = pair_moments(m, &base_form, &base_cache.ricci).i_k(k);
                rec.residual(&format!("remm_l0_vs_l{k}"), l_k[0] - (l_k[k] + ik), chain_tol);
            }
        }
        Err(e) => rec.fail(format!("base cache error: {e}")),
    }

    // IIkteq at every node τ ≥ t₁(n)
    let iik_tol = config.tol("iikteq_margin");
    let t1 = t_one(n);
    rec.value("t_one", t1);
    let mut min_margin = f64::INFINITY;
    for node in traj.nodes.iter().filter(|nd| nd.t >= t1 && nd.t >= 0.0) {
        let abs_pot = ScalarField::lincomb(&[(1.0, base_pot), (1.0, &node.phi)]);
        let form = m.form_from_potential(&abs_pot);
        match form_cache(m, &form) {
            Ok(cf) => {
                let lhs = pair_moments(m, &form, &cf.ricci).aubin_i();
                let rhs =
                    n as f64 * (1.0 - node.t).powi(2) * pair_moments(m, &base_form, &form).aubin_i();
                min_margin = min_margin.min(rhs - lhs);
            }
            Err(e) => rec.fail(format!("cache error at t={}: {e}", node.t)),
        }
    }
    if min_margin.is_finite() {
        rec.margin("iikteq", min_margin, iik_tol);
    }
    rec
}

fn e0_reconstruction(
    m: &SphereModel,
    base_pot: &ScalarField,
    traj: &ContinuityTrajectory,
    config: &SuiteConfig,
    rec: &mut CaseRecord,
) -> kef_core::error::Result<()> {
    let node0 = match traj.nodes.iter().find(|nd| nd.t == 0.0) {
        Some(nd) => nd,
        None => return Ok(()),
    };
    let last = traj.nodes.last().unwrap();
    let form_of = |phi: &ScalarField| -> SphereForm {
        m.form_from_potential(&ScalarField::lincomb(&[(1.0, base_pot), (1.0, phi)]))
    };
    let c0 = form_cache(m, &form_of(&node0.phi))?;
    let ct = form_cache(m, &form_of(&last.phi))?;
    let e0 = closed_energies(m, &c0, &ct).e0;
    let base_form = m.form_from_potential(base_pot);
    let imj = |f: &SphereForm| {
        let mm = pair_moments(m, &base_form, f);
        mm.aubin_i() - mm.aubin_j()
    };
    let pts: Vec<(f64, f64)> = traj
        .nodes
        .iter()
        .filter(|nd| nd.t >= 0.0)
        .map(|nd| (nd.t, nd.diagnostics.i_minus_j))
        .collect();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let integral = integrate_samples(&ts, &vs);
    let recon = -(1.0 - last.t) * imj(&ct.form) + imj(&c0.form) - integral;
    rec.value("e_0_at_tend", e0);
    rec.residual("e0_reconstruction", e0 - recon, config.tol("e0_reconstruction"));
    Ok(())
}

pub fn continuity_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let l = match config.model {
        ModelSelector::Sphere { l } => l,
        ModelSelector::Toric { .. } => {
            return Err(SuiteError::Config(
                "the continuity suite runs on the sphere model".to_string(),
            ))
        }
    };
    let m = SphereModel::new(l)?;
    let amp = 0.3;
    // trajectories are sequential in t; distinct bases run concurrently
    let cases = crate::run_cases(config, config.samples + 1, |i| {
        if i == 0 {
            // KE base: every limit estimate is zero
            let mut rec = trajectory_case(&m, "ke-base", &ScalarField::zero(&m.grid), config);
            let chain_tol = config.tol("limit_chain");
            if let Some(l_hat) = rec.values.get("l_hat").copied() {
                rec.residual("ke_limit_zero", l_hat, chain_tol);
            }
            rec
        } else {
            let seed = config.seed + (i - 1) as u64;
            let raw = m.random_band_limited(seed, 6, true);
            let scl = amp / m.iddbar(&raw).sup_norm();
            let base_pot = ScalarField::lincomb(&[(scl, &raw)]);
            let mut rec = trajectory_case(&m, &format!("perturbed-{seed}"), &base_pot, config);
            rec.input("seed", seed as f64);
            rec.input("amplitude", amp);
            rec
        }
    })?;
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
