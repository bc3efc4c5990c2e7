//! Model-independent Kähler interface shared by the functionals layer.
//!
//! Both concrete models (the spectral sphere and the toric log-coordinate
//! CP^n) expose their geometry through this trait: closed (1,1)-forms with
//! global potentials relative to a fixed Kähler–Einstein base ω₀, wedge
//! integrals against scalar node weights, Ricci forms, and the two direct
//! pairings (Dirichlet and trace-Laplacian) that do not reduce to weighted
//! wedges. The functionals layer is written once against this interface.

use crate::error::Result;

pub trait KahlerModel {
    /// A closed (1,1)-form carrying a global potential relative to ω₀.
    type Form: Clone;

    fn dim(&self) -> usize;

    /// V = ∫ ω₀ⁿ.
    fn volume(&self) -> f64;

    /// Number of quadrature nodes; scalar weights are node-value vectors.
    fn n_points(&self) -> usize;

    fn base_form(&self) -> Self::Form;

    fn form_lincomb(&self, parts: &[(f64, &Self::Form)]) -> Self::Form;

    /// Global potential relative to ω₀ at the nodes. The potential
    /// difference of two forms is an honest global function; every
    /// functional is insensitive to the additive constant of a single
    /// potential, so no canonical normalisation is imposed here.
    fn rel_pot(&self, f: &Self::Form) -> Vec<f64>;

    /// Positivity margin on the model's own scale: min density on the
    /// sphere, min Hessian eigenvalue on the toric models. Kähler iff
    /// margin > margin_floor().
    fn kahler_margin(&self, f: &Self::Form) -> f64;

    /// Rounding floor below which a margin counts as genuine positivity
    /// loss (the toric models use −1e−12 because true corner eigenvalues
    /// sit far below the entry-wise rounding noise).
    fn margin_floor(&self) -> f64 {
        0.0
    }

    fn is_kahler(&self, f: &Self::Form) -> bool {
        self.kahler_margin(f) > self.margin_floor()
    }

    /// Ric of a Kähler form, with its global relative potential. Because ω₀
    /// is exactly Kähler–Einstein in both models, the relative potential
    /// obeys log(αⁿ/ω₀ⁿ) = −rel_pot(Ric α); the functionals layer derives
    /// every density ratio from this identity instead of forming pointwise
    /// determinant ratios.
    fn ricci_form(&self, f: &Self::Form) -> Result<Self::Form>;

    /// ∫ h · γ₁ ∧ … ∧ γ_n (h omitted = 1). Not normalised by V.
    fn weighted_wedge(&self, h: Option<&[f64]>, forms: &[&Self::Form]) -> f64;

    /// Direct route ∫ i∂φ ∧ ∂̄φ ∧ γ₂ ∧ … ∧ γ_n with φ = pot(b) − pot(a):
    /// a spectral Parseval sum on the sphere, gradient rank-one mixed
    /// discriminants on the toric models. Cross-checks the
    /// integration-by-parts (weighted-wedge) route.
    fn dirichlet_direct(
        &self,
        a: &Self::Form,
        b: &Self::Form,
        rest: &[&Self::Form],
    ) -> Result<f64>;

    /// ∫ h · Δ_target(ψ) · γ₁ ∧ … ∧ γ_n where
    /// Δ_target ψ = n (i∂∂̄ψ ∧ target^{n−1}) / targetⁿ and i∂∂̄ψ is passed
    /// as the form difference `dpsi`. Requires `target` Kähler.
    fn laplace_weighted_wedge(
        &self,
        h: Option<&[f64]>,
        dpsi: &Self::Form,
        target: &Self::Form,
        rest: &[&Self::Form],
    ) -> Result<f64>;
}
