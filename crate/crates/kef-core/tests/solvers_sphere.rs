//! Oracle tests for the continuity-method solvers: Calabi–Yau segment
//! endpoints, Newton convergence of the Monge–Ampère step, the path
//! identity at solved nodes, monotonicity of I−J along the path, the E_0
//! path reconstruction and the t → 1 extrapolation helpers.

use kef_core::functionals::{closed_energies, form_cache, pair_moments};
use kef_core::solvers::{
    aubin_step, calabi_yau_segment, continuity_run, extrapolate_to_one, integral_i_minus_j,
    integrate_samples, ContinuitySolveConfig,
};
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{SphereForm, SphereModel};

fn model() -> SphereModel {
    SphereModel::new(48).unwrap()
}

/// Base metric ω' = ω + i∂∂̄ψ with ‖i∂∂̄ψ‖∞ = amp.
fn perturbed_base(m: &SphereModel, seed: u64, amp: f64) -> ScalarField {
    let raw = m.random_band_limited(seed, 6, true);
    let scale = amp / m.iddbar(&raw).sup_norm();
    ScalarField::lincomb(&[(scale, &raw)])
}

fn base_cache(m: &SphereModel, pot: &ScalarField) -> kef_core::functionals::FormCache<SphereForm> {
    form_cache(m, &m.form_from_potential(pot)).unwrap()
}

#[test]
fn config_validation_rejects_bad_configs() {
    let mut c = ContinuitySolveConfig::default();
    assert!(c.validate().is_ok());
    c.dt = 0.0;
    assert!(c.validate().is_err());
    c = ContinuitySolveConfig::default();
    c.t_end = 1.0;
    assert!(c.validate().is_err());
    c = ContinuitySolveConfig::default();
    c.cy_nodes = 1;
    assert!(c.validate().is_err());
    c = ContinuitySolveConfig::default();
    c.newton_tol = -1.0;
    assert!(c.validate().is_err());
}

#[test]
fn ke_base_gives_a_trivial_trajectory() {
    let m = model();
    let mut cfg = ContinuitySolveConfig::default();
    cfg.dt = 0.25;
    cfg.t_end = 0.75;
    let traj = continuity_run(&m, &ScalarField::zero(&m.grid), &cfg).unwrap();
    for n in &traj.nodes {
        assert!(n.phi.sup_norm() < 1e-9, "φ not 0 at t={}", n.t);
        if let Some(c) = n.c_t {
            assert!(c.abs() < 1e-12, "c_t = {c} at t={}", n.t);
        }
        assert!(n.diagnostics.i_minus_j.abs() < 1e-12);
        assert!(n.diagnostics.ding_f.abs() < 1e-10);
        for e in &n.diagnostics.e_k {
            assert!(e.abs() < 1e-10);
        }
        assert!((n.margin - 1.0).abs() < 1e-9);
    }
}

#[test]
fn calabi_yau_segment_endpoints() {
    let m = model();
    let base = base_cache(&m, &perturbed_base(&m, 3, 0.3));
    let cfg = ContinuitySolveConfig::default();
    // t = −1: the equation reads ω_φⁿ = ωⁿ
    let (phi, c, res) = calabi_yau_segment(&m, &base, -1.0, &cfg).unwrap();
    assert!(phi.sup_norm() < 1e-12 && c.abs() < 1e-12 && res < 1e-12);
    // t = 0: c_t = −log((1/V)∫e^f ωⁿ) = 0 by f's normalisation
    let (_, c0, res0) = calabi_yau_segment(&m, &base, 0.0, &cfg).unwrap();
    assert!(c0.abs() < 1e-12, "c_0 = {c0}");
    assert!(res0 < 1e-10, "CY residual {res0:.3e} at t = 0");
    // out-of-segment t rejected
    assert!(calabi_yau_segment(&m, &base, 0.5, &cfg).is_err());
}

#[test]
fn aubin_step_converges_quadratically_and_satisfies_the_path_identity() {
    let m = model();
    let base_pot = perturbed_base(&m, 4, 0.3);
    let base = base_cache(&m, &base_pot);
    let cfg = ContinuitySolveConfig::default();
    let t = 0.5;
    let step = aubin_step(&m, &base, t, &ScalarField::zero(&m.grid), &cfg).unwrap();
    assert!(step.residual < 1e-10, "residual {:.3e}", step.residual);
    assert!(step.iterations <= 8, "{} iterations", step.iterations);
    // quadratic convergence below 1e−2: exponent > 1.7 on the residual tail
    let h = &step.residual_history;
    let mut checked = false;
    for w in h.windows(3) {
        if w[0] < 1e-2 && w[1] > 0.0 && w[2] > 0.0 && w[1] < w[0] {
            let p = (w[2] / w[1]).ln() / (w[1] / w[0]).ln();
            assert!(p > 1.7, "convergence exponent {p:.2} on {w:?}");
            checked = true;
        }
    }
    assert!(checked, "no quadratic-regime window in {h:?}");
    // AubPatheq: Ric ω_φt − ω_φt + (1−t) i∂∂̄φ_t = 0 pointwise
    let abs_pot = ScalarField::lincomb(&[(1.0, &base_pot), (1.0, &step.phi)]);
    let form = m.form_from_potential(&abs_pot);
    let ric = m.ricci_of_form(&form).unwrap();
    let pphi = m.iddbar(&step.phi);
    let sup = ric
        .dens
        .values
        .iter()
        .zip(&form.dens.values)
        .zip(&pphi.values)
        .fold(0.0_f64, |a, ((r, d), p)| a.max((r - d + (1.0 - t) * p).abs()));
    assert!(sup < 1e-8, "path identity residual {sup:.3e}");
    // t outside (0, 1) rejected
    assert!(aubin_step(&m, &base, 0.0, &ScalarField::zero(&m.grid), &cfg).is_err());
}

#[test]
fn doubled_resolution_reproduces_the_solution() {
    let coarse = model();
    let fine = SphereModel::new(96).unwrap();
    let cfg = ContinuitySolveConfig::default();
    let t = 0.5;
    // one base potential, represented exactly on both grids by its
    // harmonic coefficients (the sup-norm scale is fixed on the coarse grid
    // so the two bases agree to machine precision)
    let coarse_pot = perturbed_base(&coarse, 4, 0.3);
    let mut fine_coeffs = vec![0.0; fine.grid.n_coeffs()];
    fine_coeffs[..coarse_pot.coeffs.len()].copy_from_slice(&coarse_pot.coeffs);
    let fine_pot = ScalarField::from_coeffs(&fine.grid, fine_coeffs);
    let mut phis = Vec::new();
    for (m, pot) in [(&coarse, &coarse_pot), (&fine, &fine_pot)] {
        let base = base_cache(m, pot);
        phis.push(aubin_step(m, &base, t, &ScalarField::zero(&m.grid), &cfg).unwrap());
    }
    // compare on the shared coefficient range
    let ca = &phis[0].phi.coeffs;
    let cb = &phis[1].phi.coeffs;
    let diff = ca
        .iter()
        .zip(cb.iter())
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    let tail = cb[ca.len()..]
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()));
    assert!(diff < 1e-8, "coefficient drift {diff:.3e} under doubling");
    assert!(tail < 1e-8, "fine-grid tail {tail:.3e}");
}

#[test]
fn continuity_run_diagnostics_and_e0_reconstruction() {
    let m = model();
    let base_pot = perturbed_base(&m, 7, 0.3);
    let mut cfg = ContinuitySolveConfig::default();
    cfg.dt = 0.05;
    cfg.t_end = 0.9;
    let traj = continuity_run(&m, &base_pot, &cfg).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for n in &traj.nodes {
        assert!(n.margin > 0.0, "positivity lost at t={}", n.t);
        assert!(n.residual < 1e-8, "residual {:.3e} at t={}", n.residual, n.t);
        if let Some(a) = n.diagnostics.aubin_residual {
            assert!(a < 1e-8, "path identity residual {a:.3e} at t={}", n.t);
        } else {
            assert!(n.t < 0.0);
            assert!(n.c_t.is_some());
        }
        if n.t >= 0.0 {
            assert!(
                n.diagnostics.i_minus_j >= prev - 1e-10,
                "I−J not monotone at t={}",
                n.t
            );
            prev = n.diagnostics.i_minus_j;
        }
    }
    // Ezeroteq at τ = t_end: E_0(ω_φ0, ω_φτ) = −(1−τ)(I−J)(ω,ω_φτ)
    // + (I−J)(ω,ω_φ0) − ∫₀^τ (I−J)(ω,ω_φt) dt
    let base_form = m.form_from_potential(&base_pot);
    let node0 = traj.nodes.iter().find(|n| n.t == 0.0).unwrap();
    let last = traj.nodes.last().unwrap();
    let form_at = |n: &kef_core::solvers::TrajectoryNode| {
        m.form_from_potential(&ScalarField::lincomb(&[(1.0, &base_pot), (1.0, &n.phi)]))
    };
    let c0 = form_cache(&m, &form_at(node0)).unwrap();
    let ct = form_cache(&m, &form_at(last)).unwrap();
    let e0 = closed_energies(&m, &c0, &ct).e0;
    let imj = |f: &SphereForm| {
        let mm = pair_moments(&m, &base_form, f);
        mm.aubin_i() - mm.aubin_j()
    };
    let pts: Vec<(f64, f64)> = traj
        .nodes
        .iter()
        .filter(|n| n.t >= 0.0)
        .map(|n| (n.t, n.diagnostics.i_minus_j))
        .collect();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let integral = integrate_samples(&ts, &vs);
    let recon = -(1.0 - last.t) * imj(&ct.form) + imj(&c0.form) - integral;
    assert!(
        (e0 - recon).abs() < 1e-6,
        "E_0 reconstruction residual {:.3e}",
        (e0 - recon).abs()
    );
    // lzeroeq consistency at this coarse Δt (2e−2 is the truncated-limit
    // tolerance used for all t → 1 limits)
    let fs: Vec<f64> = traj.ma_nodes().map(|n| n.diagnostics.ding_f).collect();
    let mts: Vec<f64> = traj.ma_nodes().map(|n| n.t).collect();
    let lhat = extrapolate_to_one(&mts, &fs, 5);
    let l_integral = -integral_i_minus_j(&traj, 5);
    assert!(
        (lhat - l_integral).abs() < 2e-2,
        "lim F {lhat:.4e} vs −∫(I−J) {l_integral:.4e}"
    );
}

#[test]
fn extrapolation_and_quadrature_helpers_are_exact_on_polynomials() {
    // quadratic in s = 1 − t is reproduced exactly at s = 0
    let ts: Vec<f64> = (0..6).map(|i| 0.8 + 0.03 * i as f64).collect();
    let vals: Vec<f64> = ts
        .iter()
        .map(|t| {
            let s = 1.0 - t;
            3.0 + 2.0 * s - 7.0 * s * s
        })
        .collect();
    assert!((extrapolate_to_one(&ts, &vals, 5) - 3.0).abs() < 1e-10);
    // composite quadratic rule integrates quadratics exactly, even on
    // non-uniform nodes with an odd leftover interval
    let ts = [0.0, 0.1, 0.25, 0.3, 0.52, 0.6, 0.85];
    let vs: Vec<f64> = ts.iter().map(|t| 1.0 + t - 3.0 * t * t).collect();
    let exact = 0.85 + 0.85_f64.powi(2) / 2.0 - 0.85_f64.powi(3);
    assert!((integrate_samples(&ts, &vs) - exact).abs() < 1e-12);
}
