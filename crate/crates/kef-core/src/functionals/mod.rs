//! The energy functionals of the laboratory: Aubin I/J, the families I_k
//! and J_k, the Ding functional F, the Chen–Tian energies E_k (closed and
//! path routes), Ricci potentials, Futaki characters, the
//! Moser–Trudinger–Onofri inequalities, and the membership predicates for
//! the sets H⁺, A_k, B_k. Everything is written against the
//! [`KahlerModel`](crate::model::KahlerModel) interface and is therefore
//! shared verbatim by the sphere and toric models.

pub mod futaki;
pub mod membership;
pub mod moments;
pub mod mto;
pub mod paths;
pub mod report;

pub use moments::{aubin_i_direct, aubin_j_direct, pair_moments, PairMoments};
pub use paths::PathSpec;

use crate::error::{KefError, Result};
use crate::model::KahlerModel;

/// Positivity guard for logs of densities: a hard error, never clamping
/// (clamping would corrupt identity residuals invisibly).
pub const LOG_MARGIN: f64 = 1e-8;

/// Ding moment M(α) = (1/V) ∫ e^{−pot_α} ω₀ⁿ. Because ω₀ is exactly
/// Kähler–Einstein in both models, e^{f_α} αⁿ = e^{−pot_α} ω₀ⁿ / M(α) for
/// the normalised Ricci potential f_α, so the Ding functional's log term is
/// log(M(β)/M(α)) — a form in which F telescopes exactly over triples.
pub fn ding_moment<M: KahlerModel>(m: &M, f: &M::Form) -> f64 {
    let n = m.dim();
    let pot = m.rel_pot(f);
    let e: Vec<f64> = pot.iter().map(|p| (-p).exp()).collect();
    let base = m.base_form();
    let forms: Vec<&M::Form> = (0..n).map(|_| &base).collect();
    m.weighted_wedge(Some(&e), &forms) / m.volume()
}

/// Ding functional F(α,β) = J(α,β) − (1/V)∫φ αⁿ − log((1/V)∫e^{f_α−φ} αⁿ),
/// defined for base α ∈ H and target β ∈ D (β need not be Kähler).
pub fn ding_f<M: KahlerModel>(m: &M, a: &M::Form, b: &M::Form) -> f64 {
    ding_f_with(m, a, b, ding_moment(m, a), ding_moment(m, b))
}

/// `ding_f` with precomputed Ding moments (see [`ding_moment`]).
pub fn ding_f_with<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    moment_a: f64,
    moment_b: f64,
) -> f64 {
    let mom = pair_moments(m, a, b);
    mom.aubin_j() - mom.phi_mean_base() - (moment_b / moment_a).ln()
}

/// Everything the closed-route energies need per form: its Ricci form, the
/// normalised Ricci potential f (with (1/V)∫e^f αⁿ = 1, normalised against
/// the same discrete measure, so the discrete Jensen bound (1/V)∫f αⁿ ≤ 0
/// is exact), and the Ding moments of the form and its Ricci form.
pub struct FormCache<F> {
    pub form: F,
    pub ricci: F,
    pub kahler_margin: f64,
    pub ricci_margin: f64,
    /// Normalised Ricci potential f_α at the nodes.
    pub f_pot: Vec<f64>,
    /// (1/V) ∫ f_α αⁿ (≤ 0 by Jensen).
    pub f_mean: f64,
    pub ding_moment: f64,
    pub ricci_ding_moment: f64,
}

pub fn form_cache<M: KahlerModel>(m: &M, form: &M::Form) -> Result<FormCache<M::Form>> {
    let n = m.dim();
    let v = m.volume();
    let ricci = m.ricci_form(form)?;
    let pa = m.rel_pot(form);
    let pr = m.rel_pot(&ricci);
    // i∂∂̄(pot_Ric − pot) = Ric α − α, so f = (pot_Ric − pot) + c.
    let raw: Vec<f64> = pr.iter().zip(&pa).map(|(r, p)| r - p).collect();
    let eraw: Vec<f64> = raw.iter().map(|x| x.exp()).collect();
    let forms: Vec<&M::Form> = (0..n).map(|_| form).collect();
    let moment = m.weighted_wedge(Some(&eraw), &forms) / v;
    if !(moment > 0.0) {
        return Err(KefError::Inconsistency(format!(
            "ricci potential normalisation moment {moment:.3e} not positive"
        )));
    }
    let c = -moment.ln();
    let f_pot: Vec<f64> = raw.iter().map(|x| x + c).collect();
    let f_mean = m.weighted_wedge(Some(&f_pot), &forms) / v;
    Ok(FormCache {
        kahler_margin: m.kahler_margin(form),
        ricci_margin: m.kahler_margin(&ricci),
        ding_moment: ding_moment(m, form),
        ricci_ding_moment: ding_moment(m, &ricci),
        form: form.clone(),
        ricci,
        f_pot,
        f_mean,
    })
}

/// (1/V) ∫ f_α (Ric α)^k ∧ α^{n−k} — the moment appearing in the appendix
/// derivative identity for (k+1)E_k − kE_{k−1}.
pub fn f_moment<M: KahlerModel>(m: &M, cache: &FormCache<M::Form>, k: usize) -> f64 {
    let n = m.dim();
    assert!(k <= n);
    let mut forms: Vec<&M::Form> = Vec::with_capacity(n);
    for _ in 0..k {
        forms.push(&cache.ricci);
    }
    for _ in 0..n - k {
        forms.push(&cache.form);
    }
    m.weighted_wedge(Some(&cache.f_pot), &forms) / m.volume()
}

/// μ_k = c₁^{k+1} ∪ [ω]^{n−k−1} / [ω]ⁿ = 1 in the anticanonical class; the
/// numerical cohomology cross-check wedge(Ric ω^{k+1}, ω^{n−1−k})/V is in
/// the test suite.
pub fn mu_k(k: usize) -> f64 {
    let _ = k;
    1.0
}

/// The closed-route exact energies of a pair, with the per-pair moment
/// tables cached so every (k, l) evaluation is a cheap algebraic read-off.
pub struct ClosedEnergies {
    pub n: usize,
    /// Ding F(α,β).
    pub f: f64,
    /// E_0 = F − (1/V)∫f_β βⁿ + (1/V)∫f_α αⁿ.
    pub e0: f64,
    /// E_n = F(Ric α, Ric β).
    pub en: f64,
    mom_a_ric: PairMoments,
    mom_b_ric: PairMoments,
}

pub fn closed_energies<M: KahlerModel>(
    m: &M,
    ca: &FormCache<M::Form>,
    cb: &FormCache<M::Form>,
) -> ClosedEnergies {
    let f = ding_f_with(m, &ca.form, &cb.form, ca.ding_moment, cb.ding_moment);
    let e0 = f - cb.f_mean + ca.f_mean;
    let en = ding_f_with(
        m,
        &ca.ricci,
        &cb.ricci,
        ca.ricci_ding_moment,
        cb.ricci_ding_moment,
    );
    ClosedEnergies {
        n: m.dim(),
        f,
        e0,
        en,
        mom_a_ric: pair_moments(m, &ca.form, &ca.ricci),
        mom_b_ric: pair_moments(m, &cb.form, &cb.ricci),
    }
}

impl ClosedEnergies {
    /// E_k by the interpolated closed formula, l ∈ {0,…,k+1}:
    /// (1−λ)E_0 + λE_n + (I_k − λJ)(β,Ric β) − (I_k − λJ)(α,Ric α),
    /// λ = l/(k+1). l = 0 is the via-E_0 route, l = k+1 the via-E_n route.
    pub fn e_k(&self, k: usize, l: usize) -> f64 {
        assert!(k <= self.n, "E_k: k = {k} out of 0..={}", self.n);
        assert!(l <= k + 1, "E_k: l = {l} out of 0..={}", k + 1);
        let lam = l as f64 / (k + 1) as f64;
        (1.0 - lam) * self.e0
            + lam * self.en
            + (self.mom_b_ric.i_k(k) - lam * self.mom_b_ric.aubin_j())
            - (self.mom_a_ric.i_k(k) - lam * self.mom_a_ric.aubin_j())
    }

    pub fn e_k_via_e0(&self, k: usize) -> f64 {
        self.e_k(k, 0)
    }

    pub fn e_k_via_en(&self, k: usize) -> f64 {
        self.e_k(k, k + 1)
    }
}
