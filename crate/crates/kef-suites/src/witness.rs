//! Witness suite: explicit parameter sweeps exhibiting the unboundedness
//! trends of the energies. Three families:
//!
//! * sphere upward — I(ω, σ_λ*ω) along Möbius dilations grows monotonically
//!   past 10× its first sweep value;
//! * toric n=2 downward on the closed (1,1)-class — ω_b = ω₀ + b·i∂∂̄g for a
//!   Gaussian g leaves the Kähler cone and drives I below −10× its first
//!   sweep value (I(b) = −2Ab² − sBb³ exactly, with A, B moment integrals of
//!   g, so the sweep range is set from the computed root of the cubic);
//! * toric n=2 downward for E_n — a convex family u_b = u₀ + b·ψ with ψ a
//!   balanced ± pair of translated log-terms, direction chosen so that
//!   E_n = F(Ric ω₀, Ric ω_b) decreases strictly across the sweep.
//!
//! These are trend checks on constructed families, not proofs.

use std::time::Instant;

use kef_core::functionals::moments::pair_moments;
use kef_core::functionals::{closed_energies, form_cache};
use kef_core::model::KahlerModel;
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{MobiusMap, SphereModel};
use kef_core::toric::function::{Term, ToricFunction};
use kef_core::toric::model::{ToricForm, ToricModel};

use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

/// Dilation factors λ_b = 2^{b/2}: resolvable at the default band limit
/// while spanning enough growth for the 10× check.
const SPHERE_LAMBDA_STEP: f64 = std::f64::consts::SQRT_2;

/// Gaussian witness for the closed-class sweep.
const GAUSSIAN_AMP: f64 = 1.0;
const GAUSSIAN_WIDTH: f64 = 6.0;

/// Balanced log-term pair for the E_n sweep: amplitude within the uniform
/// positivity margin for b ∈ [0, 1], so every sweep form is Kähler.
const EN_PAIR_AMP: f64 = 0.2;

/// Least-squares slope of ys against xs.
fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Record the strict-monotonicity margin of a sweep: the minimum consecutive
/// increment (`sign` = +1 increasing, −1 decreasing).
fn monotone_margin(rec: &mut CaseRecord, key: &str, vals: &[f64], sign: f64, tol: f64) {
    let m = vals
        .windows(2)
        .map(|w| sign * (w[1] - w[0]))
        .fold(f64::INFINITY, f64::min);
    rec.margin(key, m, tol);
}

fn sphere_upward_case(l: usize, points: usize, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new("sphere-upward");
    let m = match SphereModel::new(l) {
        Ok(m) => m,
        Err(e) => {
            rec.fail(format!("model error: {e}"));
            return rec;
        }
    };
    let base = KahlerModel::base_form(&m);
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    let mut bs = Vec::new();
    let mut is = Vec::new();
    for b in 0..=points {
        let lam = SPHERE_LAMBDA_STEP.powi(b as i32);
        match m.mobius_pullback(&MobiusMap::dilation(lam), &zero) {
            Ok(p) => {
                let form = m.form_from_potential(&p.phi);
                bs.push(b as f64);
                is.push(pair_moments(&m, &base, &form).aubin_i());
            }
            Err(e) => {
                rec.fail(format!("pullback error at b={b}: {e}"));
                return rec;
            }
        }
    }
    rec.residual("baseline_zero", is[0], config.tol("baseline_zero"));
    monotone_margin(&mut rec, "strictly_increasing", &is, 1.0, config.tol("monotone"));
    let baseline = is[1];
    rec.value("baseline", baseline);
    rec.value("final", *is.last().unwrap());
    rec.value("fitted_slope_vs_loglambda", {
        let lnl: Vec<f64> = bs[1..]
            .iter()
            .map(|b| b * SPHERE_LAMBDA_STEP.ln())
            .collect();
        fitted_slope(&lnl, &is[1..])
    });
    rec.margin(
        "growth_past_baseline",
        is.last().unwrap() / baseline - config.tol("growth_factor"),
        config.tol("monotone"),
    );
    rec.series.insert("b".into(), bs);
    rec.series.insert("i".into(), is);
    rec
}

fn toric_closed_class_case(m: &ToricModel, points: usize, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new("toric-closed-class-downward");
    let n = m.n();
    let vol = KahlerModel::volume(m);
    let g_fun = ToricFunction::zero(n).with_term(Term::Gaussian {
        amp: GAUSSIAN_AMP,
        center: vec![0.0; n],
        width: GAUSSIAN_WIDTH,
    });
    let g_form = m.form_from_function(&g_fun);
    let base = KahlerModel::base_form(m);
    let g_vals: Vec<f64> = (0..m.grid.n_nodes())
        .map(|p| g_fun.value(&m.grid.point(p)))
        .collect();
    // I(b) = −2Ab² − sBb³ along ω_b = ω₀ + b·s·i∂∂̄g (n = 2)
    let a_mom = m.weighted_wedge(&g_vals, &[&base, &g_form]) / vol;
    let b_mom = m.weighted_wedge(&g_vals, &[&g_form, &g_form]) / vol;
    let s = if b_mom >= 0.0 { 1.0 } else { -1.0 };
    rec.value("quadratic_coeff", -2.0 * a_mom);
    rec.value("cubic_coeff", -s * b_mom);
    if !(a_mom < 0.0) {
        rec.fail("quadratic coefficient not positive; witness family degenerate");
        return rec;
    }
    let b_root = -2.0 * a_mom / (s * b_mom);
    let b_max = 4.0 * b_root;
    rec.value("sign_change_at", b_root);
    let mut bs = vec![0.0];
    let mut is = vec![0.0];
    let mut final_margin = 0.0;
    for j in 1..=points {
        let b = b_max * j as f64 / points as f64;
        let u = ToricFunction::lincomb(&[(1.0, &m.u0), (b * s, &g_fun)]);
        let form = m.form_from_function(&u);
        bs.push(b);
        is.push(pair_moments(m, &base, &form).aubin_i());
        final_margin = form.min_eig;
    }
    rec.value("final_kahler_margin", final_margin);
    let baseline = is[1];
    rec.margin("baseline_positive", baseline, config.tol("monotone"));
    rec.value("baseline", baseline);
    rec.value("final", *is.last().unwrap());
    rec.margin(
        "drop_past_baseline",
        -is.last().unwrap() / baseline - config.tol("growth_factor"),
        config.tol("monotone"),
    );
    rec.series.insert("b".into(), bs);
    rec.series.insert("i".into(), is);
    rec
}

fn toric_en_case(m: &ToricModel, points: usize, config: &SuiteConfig) -> CaseRecord {
    let mut rec = CaseRecord::new("toric-en-downward");
    let n = m.n();
    // balanced ± pair: Kähler for the whole sweep, class-preserving
    let center: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 0.6 } else { -0.4 })
        .collect();
    let psi = ToricFunction::zero(n)
        .with_term(Term::LogSumExp {
            amp: EN_PAIR_AMP,
            center: center.clone(),
        })
        .with_term(Term::LogSumExp {
            amp: -EN_PAIR_AMP,
            center: center.iter().map(|v| -v).collect(),
        });
    let base_cache = match form_cache(m, &KahlerModel::base_form(m)) {
        Ok(c) => c,
        Err(e) => {
            rec.fail(format!("base cache error: {e}"));
            return rec;
        }
    };
    let en_at = |b: f64| -> kef_core::error::Result<(f64, ToricForm)> {
        let u = ToricFunction::lincomb(&[(1.0, &m.u0), (b, &psi)]);
        let form = m.form_from_function(&u);
        let cache = form_cache(m, &form)?;
        Ok((closed_energies(m, &base_cache, &cache).en, form))
    };
    // pick the direction in which E_n moves down from E_n(0) = 0
    let b1 = 1.0 / points as f64;
    let s = match en_at(b1) {
        Ok((e, _)) => {
            if e < 0.0 {
                1.0
            } else {
                -1.0
            }
        }
        Err(e) => {
            rec.fail(format!("direction probe error: {e}"));
            return rec;
        }
    };
    rec.value("direction", s);
    let mut bs = vec![0.0];
    let mut ens = vec![0.0];
    let mut min_kahler = f64::INFINITY;
    for j in 1..=points {
        let b = s * j as f64 / points as f64;
        match en_at(b) {
            Ok((e, form)) => {
                bs.push(b.abs());
                ens.push(e);
                min_kahler = min_kahler.min(form.min_eig);
            }
            Err(e) => {
                rec.fail(format!("sweep error at b={b}: {e}"));
                return rec;
            }
        }
    }
    rec.value("min_kahler_margin", min_kahler);
    rec.value("final", *ens.last().unwrap());
    rec.value("fitted_slope", fitted_slope(&bs, &ens));
    monotone_margin(&mut rec, "strictly_decreasing", &ens, -1.0, config.tol("monotone"));
    rec.series.insert("b".into(), bs);
    rec.series.insert("e_n".into(), ens);
    rec
}

pub fn witness_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    // the three families are fixed; the selector only retunes resolutions
    let (sphere_l, toric_params) = match config.model {
        ModelSelector::Sphere { l } => (l, (40.0, 64)),
        ModelSelector::Toric {
            n: 2,
            lbox,
            points_per_axis,
        } => (48, (lbox, points_per_axis)),
        ModelSelector::Toric { n, .. } => {
            return Err(SuiteError::Config(format!(
                "the toric witness families are n=2 constructions (got n={n})"
            )))
        }
    };
    let m2 = ToricModel::new(2, toric_params.0, toric_params.1)?;
    let points = config.samples;
    let cases = crate::run_cases(config, 3, |i| match i {
        0 => sphere_upward_case(sphere_l, points, config),
        1 => toric_closed_class_case(&m2, points, config),
        _ => toric_en_case(&m2, points, config),
    })?;
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
