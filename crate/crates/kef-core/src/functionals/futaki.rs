//! Futaki-type characters F_k on the sphere: complex Lie-algebra
//! homomorphisms obtained from t-derivatives of E_k along the Möbius flows
//! exp(tX), with the imaginary part read off the J-rotated flow:
//! F_k(X; ω) = d/dt|₀ E_k(ω, (exp tX)*ω) − i · d/dt|₀ E_k(ω, (exp tJX)*ω).

use crate::error::Result;
use crate::model::KahlerModel;
use crate::sphere::field::ScalarField;
use crate::sphere::model::{MobiusMap, Sl2Generator, SphereModel};

use super::{closed_energies, form_cache, FormCache};

/// Precomputed base-form cache for repeated character evaluations.
pub struct FutakiContext {
    pub base_cache: FormCache<crate::sphere::model::SphereForm>,
}

impl FutakiContext {
    pub fn new(model: &SphereModel) -> Result<FutakiContext> {
        let base = KahlerModel::base_form(model);
        Ok(FutakiContext {
            base_cache: form_cache(model, &base)?,
        })
    }
}

/// E_k(ω, (exp tX)*ω) by the via-E₀ closed route. The flow endpoints are
/// Kähler–Einstein, so the I_k(ω_φ, Ric ω_φ) correction terms are at
/// quadrature level and F_k − F_0 stays far below the finite-difference
/// error of the characters themselves.
fn e_k_along_flow(
    model: &SphereModel,
    ctx: &FutakiContext,
    x: &Sl2Generator,
    t: f64,
    k: usize,
) -> Result<f64> {
    let m = MobiusMap::exp_generator(x, t);
    let zero = model.kahler_potential(ScalarField::zero(&model.grid));
    let pulled = model.mobius_pullback(&m, &zero)?;
    let form = model.form_from_potential(&pulled.phi);
    let cache = form_cache(model, &form)?;
    Ok(closed_energies(model, &ctx.base_cache, &cache).e_k_via_e0(k))
}

/// d/dt|₀ E_k along the flow of X, by the fourth-order centered stencil
/// (−E(2h) + 8E(h) − 8E(−h) + E(−2h)) / (12h).
fn flow_derivative(
    model: &SphereModel,
    ctx: &FutakiContext,
    x: &Sl2Generator,
    k: usize,
    h: f64,
) -> Result<f64> {
    let e = |t: f64| e_k_along_flow(model, ctx, x, t, k);
    Ok((-e(2.0 * h)? + 8.0 * e(h)? - 8.0 * e(-h)? + e(-2.0 * h)?) / (12.0 * h))
}

/// F_k(X; ω) as (re, im). X = 0 short-circuits to 0.
pub fn futaki_character(
    model: &SphereModel,
    ctx: &FutakiContext,
    x: &Sl2Generator,
    k: usize,
    h: f64,
) -> Result<(f64, f64)> {
    if x.is_zero() {
        return Ok((0.0, 0.0));
    }
    let re = flow_derivative(model, ctx, x, k, h)?;
    let im = -flow_derivative(model, ctx, &x.j_rotated(), k, h)?;
    Ok((re, im))
}
