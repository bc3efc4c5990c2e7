//! Membership predicates with signed margins: H⁺ (positive Ricci),
//! A_k = {ω_φ : E_k(ω,ω_φ) ≥ 0}, B_k = {ω_φ : I_k(ω_φ, Ric ω_φ) ≥ 0},
//! the fast sufficient pre-filters Ric + 2ω ≥ 0 (k = 2) and Ric + ω ≥ 0
//! (k = 3), and Λ₁-orthogonality on the sphere.

use crate::model::KahlerModel;

use super::moments::pair_moments;
use super::{closed_energies, FormCache};

/// Signed margin of Ric α > 0 (model positivity scale).
pub fn h_plus_margin<M: KahlerModel>(_m: &M, cache: &FormCache<M::Form>) -> f64 {
    cache.ricci_margin
}

/// B_k margin: I_k(α, Ric α); nonnegative iff α ∈ B_k.
pub fn b_k_margin<M: KahlerModel>(m: &M, cache: &FormCache<M::Form>, k: usize) -> f64 {
    pair_moments(m, &cache.form, &cache.ricci).i_k(k)
}

/// A_k margin: E_k(ω₀-side base, α) by the via-E₀ closed route;
/// nonnegative iff α ∈ A_k.
pub fn a_k_margin<M: KahlerModel>(
    m: &M,
    base_cache: &FormCache<M::Form>,
    cache: &FormCache<M::Form>,
    k: usize,
) -> f64 {
    closed_energies(m, base_cache, cache).e_k_via_e0(k)
}

/// Signed margin of Ric α + c·ω₀ > 0 — the sufficient B_k pre-filters use
/// c = 2 (k = 2) and c = 1 (k = 3).
pub fn ric_plus_margin<M: KahlerModel>(
    m: &M,
    cache: &FormCache<M::Form>,
    c: f64,
) -> f64 {
    let base = m.base_form();
    m.kahler_margin(&m.form_lincomb(&[(1.0, &cache.ricci), (c, &base)]))
}

/// Λ₁-orthogonality margin on the sphere: the largest |c_{1,m}| coefficient
/// of the potential (zero iff the potential is orthogonal to the first
/// eigenspace).
pub fn lambda1_defect(phi: &crate::sphere::field::ScalarField) -> f64 {
    (-1i64..=1)
        .map(|mm| phi.coeffs[crate::sphere::grid::coeff_index(1, mm)].abs())
        .fold(0.0_f64, f64::max)
}
