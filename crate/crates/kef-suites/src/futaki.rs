//! Futaki suite on the sphere: for every generator in the standard sl(2,C)
//! basis, the characters F_k (k = 0..n) must vanish — the base metric is
//! Kähler–Einstein — and must agree with each other far more tightly than
//! they vanish, since the k-dependence cancels along a KE orbit.

use std::time::Instant;

use kef_core::functionals::futaki::{futaki_character, FutakiContext};
use kef_core::model::KahlerModel;
use kef_core::sphere::model::{Sl2Generator, SphereModel};

use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

const STENCIL_H: f64 = 1e-3;

fn generator_case(
    m: &SphereModel,
    ctx: &FutakiContext,
    idx: usize,
    x: &Sl2Generator,
    config: &SuiteConfig,
) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("generator-{idx}"));
    rec.input("stencil_h", STENCIL_H);
    let n = m.dim();
    let f_k_tol = config.tol("f_k");
    let spread_tol = config.tol("f_k_spread");
    let mut chars = Vec::new();
    for k in 0..=n {
        match futaki_character(m, ctx, x, k, STENCIL_H) {
            Ok((re, im)) => {
                rec.residual(&format!("f_{k}_re"), re, f_k_tol);
                rec.residual(&format!("f_{k}_im"), im, f_k_tol);
                chars.push((re, im));
            }
            Err(e) => rec.fail(format!("character error at k={k}: {e}")),
        }
    }
    if let Some(&(re0, im0)) = chars.first() {
        for (k, &(re, im)) in chars.iter().enumerate().skip(1) {
            let spread = ((re - re0).powi(2) + (im - im0).powi(2)).sqrt();
            rec.residual(&format!("f_{k}_minus_f_0"), spread, spread_tol);
        }
    }
    rec
}

pub fn futaki_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let l = match config.model {
        ModelSelector::Sphere { l } => l,
        ModelSelector::Toric { .. } => {
            return Err(SuiteError::Config(
                "the futaki suite runs on the sphere model".to_string(),
            ))
        }
    };
    let m = SphereModel::new(l)?;
    let ctx = FutakiContext::new(&m)?;
    let generators = Sl2Generator::standard_set();
    let n_cases = generators.len() + 1;
    let cases = crate::run_cases(config, n_cases, |i| {
        if i < generators.len() {
            generator_case(&m, &ctx, i, &generators[i], config)
        } else {
            // X = 0 must give exactly (0, 0) at every k
            let mut rec = CaseRecord::new("generator-zero");
            for k in 0..=m.dim() {
                match futaki_character(&m, &ctx, &Sl2Generator::zero(), k, STENCIL_H) {
                    Ok((re, im)) => rec.residual(&format!("f_{k}_zero"), re.abs() + im.abs(), 0.0),
                    Err(e) => rec.fail(format!("character error: {e}")),
                }
            }
            rec
        }
    })?;
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
