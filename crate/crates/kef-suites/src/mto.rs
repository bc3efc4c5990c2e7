//! Moser–Trudinger–Onofri suite on the sphere: the classical inequality on
//! random smooth fields (not restricted to Kähler potentials), exact
//! equality on Möbius pullbacks of ω, and the generalized inequality with
//! a = 0 for targets in Ric(A_n) — potentials φ whose form is the Ricci
//! form of some ω_ψ, membership certified by E_n(ω, ω_ψ) ≥ 0.

use std::time::Instant;

use kef_core::functionals::membership::a_k_margin;
use kef_core::functionals::mto::{mto_classical, mto_generalized};
use kef_core::functionals::form_cache;
use kef_core::model::KahlerModel;
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{MobiusMap, SphereModel};

use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

fn classical_case(m: &SphereModel, seed: u64, tol: f64) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("field-{seed}"));
    rec.input("seed", seed as f64);
    // arbitrary smooth fields: the inequality is unconditional on S²
    let phi = m.random_band_limited(seed, 16, false);
    let r = mto_classical(m, &phi);
    rec.value("bound", r.bound);
    rec.value("log_moment", r.log_moment);
    rec.margin("classical_slack", r.slack, tol);
    rec
}

fn mobius_case(m: &SphereModel, idx: usize, tol: f64) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("mobius-{idx}"));
    let lam = 1.15 + 0.35 * idx as f64;
    rec.input("dilation", lam);
    let map = MobiusMap::dilation(lam).compose(&MobiusMap::rotation_z(0.21 * idx as f64));
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    match m.mobius_pullback(&map, &zero) {
        Ok(p) => {
            let r = mto_classical(m, &p.phi);
            rec.value("bound", r.bound);
            rec.residual("equality_slack", r.slack, tol);
        }
        Err(e) => rec.fail(format!("pullback error: {e}")),
    }
    rec
}

/// A_n-member case: sample a Kähler target ω_φ, solve Ric ω_ψ = ω_φ for ψ,
/// certify ω_ψ ∈ A_n via E_n(ω, ω_ψ) ≥ 0, then check the generalized
/// inequality for the target potential φ with a = 0 (KE base).
fn generalized_case(m: &SphereModel, seed: u64, tol: f64) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("ricci-preimage-{seed}"));
    rec.input("seed", seed as f64);
    let phi = m.random_band_limited(seed, 10, true);
    let psi = match m.prescribe_ricci(&phi) {
        Ok(p) => p,
        Err(e) => {
            rec.fail(format!("prescribe_ricci: {e}"));
            return rec;
        }
    };
    let base_cache = form_cache(m, &KahlerModel::base_form(m)).expect("base cache");
    match form_cache(m, &m.form_from_potential(&psi.phi)) {
        Ok(cpsi) => {
            let en_margin = a_k_margin(m, &base_cache, &cpsi, m.dim());
            rec.value("e_n_membership", en_margin);
            if en_margin < 0.0 {
                // outside A_n the theorem makes no claim; record and skip
                rec.value("skipped", 1.0);
                return rec;
            }
        }
        Err(e) => {
            rec.fail(format!("cache error: {e}"));
            return rec;
        }
    }
    let r = mto_generalized(m, &phi);
    rec.value("bound", r.bound);
    rec.margin("generalized_slack", r.slack, tol);
    rec
}

pub fn mto_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let l = match config.model {
        ModelSelector::Sphere { l } => l,
        ModelSelector::Toric { .. } => {
            return Err(SuiteError::Config(
                "the MTO suite runs on the sphere model".to_string(),
            ))
        }
    };
    let m = SphereModel::new(l)?;
    let (n_classical, n_mobius, n_generalized) = (config.samples, 10, 20);
    let classical_tol = config.tol("classical_slack");
    let mobius_tol = config.tol("mobius_equality");
    let generalized_tol = config.tol("generalized_slack");
    let cases = crate::run_cases(config, n_classical + n_mobius + n_generalized, |i| {
        if i < n_classical {
            classical_case(&m, config.seed + i as u64, classical_tol)
        } else if i < n_classical + n_mobius {
            mobius_case(&m, i - n_classical, mobius_tol)
        } else {
            let j = (i - n_classical - n_mobius) as u64;
            generalized_case(&m, config.seed + 10_000 + j, generalized_tol)
        }
    })?;
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
