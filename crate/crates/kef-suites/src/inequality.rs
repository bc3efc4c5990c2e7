//! Inequality suite: signed margins for the full I/J inequality chain
//!
//!   (1/n²)(I−J) ≤ I/(n(n+1)) ≤ J/n ≤ I−J ≤ nI/(n+1) ≤ nJ,
//!
//! the I_k growth chain ((k+2)/(k+1))I_{k+1} ≥ ((k+1)/k)I_k and J_k
//! monotonicity, the exact specializations at the model dimension, the
//! nonpositive Ricci-potential mean, the Jensen floor, and — on the sphere —
//! Möbius-orbit equality cases (E_0 = E_1 = 0) plus the Ding lower bound;
//! on the toric models the A_k ⊇ B_k containment on random Kähler samples.

use std::time::Instant;

use kef_core::functionals::membership::{a_k_margin, b_k_margin};
use kef_core::functionals::moments::{pair_moments, PairMoments};
use kef_core::functionals::mto::mto_classical;
use kef_core::functionals::{closed_energies, form_cache};
use kef_core::model::KahlerModel;
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{MobiusMap, SphereModel};
use kef_core::toric::model::ToricModel;

use crate::identity::toric_random_form;
use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

/// Record the chain margins of one pair-moment table.
fn chain_margins(mom: &PairMoments, n: usize, tol: f64, rec: &mut CaseRecord) {
    let nf = n as f64;
    let (i, j) = (mom.aubin_i(), mom.aubin_j());
    let chain = [
        ("imj_over_n2_vs_i", i / (nf * (nf + 1.0)) - (i - j) / (nf * nf)),
        ("i_vs_j_over_n", j / nf - i / (nf * (nf + 1.0))),
        ("j_over_n_vs_imj", (i - j) - j / nf),
        ("imj_vs_ni", nf * i / (nf + 1.0) - (i - j)),
        ("ni_vs_nj", nf * j - nf * i / (nf + 1.0)),
    ];
    for (name, m) in chain {
        rec.margin(name, m, tol);
    }
    for k in 0..=n {
        rec.margin(&format!("i_{k}_nonneg"), mom.i_k(k), tol);
        rec.margin(&format!("i_{k}_below_j"), j - mom.i_k(k), tol);
        if k >= 1 && k < n {
            let lhs = (k as f64 + 2.0) / (k as f64 + 1.0) * mom.i_k(k + 1);
            let rhs = (k as f64 + 1.0) / k as f64 * mom.i_k(k);
            rec.margin(&format!("i_{k}_growth"), lhs - rhs, tol);
        }
        if k < n {
            rec.margin(
                &format!("j_{k}_monotone"),
                mom.j_k(k) - mom.j_k(k + 1),
                tol,
            );
        }
    }
}

fn sphere_case(m: &SphereModel, seed: u64, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("sample-{seed}"));
    rec.input("seed", seed as f64);
    let chain_tol = config.tol("chain_margin");
    let exact_tol = config.tol("exactness");
    let base = KahlerModel::base_form(m);
    let phi = m.random_band_limited(seed, 10, true);
    let b = m.form_from_potential(&phi);
    let mom = pair_moments(m, &base, &b);
    chain_margins(&mom, 1, chain_tol, &mut rec);
    // exact specializations at n = 1
    let (i, j) = (mom.aubin_i(), mom.aubin_j());
    rec.residual("i_equals_2j", i - 2.0 * j, exact_tol);
    rec.residual("i_0", mom.i_k(0), exact_tol);
    rec.residual("i_n_equals_j", mom.i_k(1) - j, exact_tol);
    rec.residual("j_n", mom.j_k(1), exact_tol);
    // Ricci-potential mean bound and the Jensen floor
    match form_cache(m, &b) {
        Ok(cb) => {
            rec.margin("f_mean_nonpositive", -cb.f_mean, config.tol("f_mean"));
            let base_cache = form_cache(m, &base).expect("base cache");
            let f = closed_energies(m, &base_cache, &cb).f;
            rec.margin("ding_lower_bound", f, config.tol("ding_lower"));
        }
        Err(e) => rec.fail(format!("cache error: {e}")),
    }
    let jensen = mto_classical(m, &phi).jensen_moment;
    rec.value("jensen_moment", jensen);
    rec.margin("jensen_floor", jensen - 1.0, config.tol("jensen"));
    rec
}

/// Möbius-orbit equality case: the pullback of ω is Kähler–Einstein, so
/// every energy vanishes on it.
fn mobius_case(m: &SphereModel, idx: usize, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("mobius-{idx}"));
    let lam = 1.2 + 0.25 * idx as f64;
    let theta = 0.37 * idx as f64;
    rec.input("dilation", lam);
    rec.input("rotation", theta);
    let map = MobiusMap::dilation(lam).compose(&MobiusMap::rotation_z(theta));
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    let tol = config.tol("mobius_equality");
    match m.mobius_pullback(&map, &zero) {
        Ok(p) => {
            let b = m.form_from_potential(&p.phi);
            let ca = form_cache(m, &KahlerModel::base_form(m)).expect("base cache");
            match form_cache(m, &b) {
                Ok(cb) => {
                    let en = closed_energies(m, &ca, &cb);
                    rec.residual("e_0_equality", en.e_k_via_e0(0), tol);
                    rec.residual("e_1_equality", en.e_k_via_e0(1), tol);
                    rec.residual("ding_equality", en.f, tol);
                }
                Err(e) => rec.fail(format!("cache error: {e}")),
            }
        }
        Err(e) => rec.fail(format!("pullback error: {e}")),
    }
    rec
}

fn toric_case(m: &ToricModel, seed: u64, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("sample-{seed}"));
    rec.input("seed", seed as f64);
    let chain_tol = config.tol("chain_margin");
    let n = m.n();
    let a = toric_random_form(m, seed * 2, 0.15);
    let b = toric_random_form(m, seed * 2 + 1, 0.15);
    chain_margins(&pair_moments(m, &a, &b), n, chain_tol, &mut rec);
    // A_k ⊇ B_k containment
    let base_cache = form_cache(m, &KahlerModel::base_form(m)).expect("base cache");
    match form_cache(m, &b) {
        Ok(cb) => {
            rec.margin("f_mean_nonpositive", -cb.f_mean, config.tol("f_mean_toric"));
            for k in 1..=n {
                let bk = b_k_margin(m, &cb, k);
                rec.value(&format!("b_{k}_margin"), bk);
                if bk >= 0.0 {
                    rec.margin(
                        &format!("a_{k}_contains_b_{k}"),
                        a_k_margin(m, &base_cache, &cb, k),
                        config.tol("a_k_margin"),
                    );
                }
            }
        }
        Err(e) => rec.fail(format!("cache error: {e}")),
    }
    rec
}

pub fn inequality_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let cases = match config.model {
        ModelSelector::Sphere { l } => {
            let m = SphereModel::new(l)?;
            let n_mobius = 10;
            crate::run_cases(config, config.samples + n_mobius, |i| {
                if i < config.samples {
                    sphere_case(&m, config.seed + i as u64, config)
                } else {
                    mobius_case(&m, i - config.samples, config)
                }
            })?
        }
        ModelSelector::Toric {
            n,
            lbox,
            points_per_axis,
        } => {
            let m = ToricModel::new(n, lbox, points_per_axis)
                .map_err(SuiteError::Model)?;
            crate::run_cases(config, config.samples, |i| {
                toric_case(&m, config.seed + i as u64, config)
            })?
        }
    };
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
