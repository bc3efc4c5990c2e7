//! Shared discrete wedge moments of a pair of forms, and the closed-form
//! Aubin-type functionals built from them.
//!
//! Every closed route is expressed through the moments
//! W_l = (1/V) ∫ φ · α^{n−l} ∧ β^l (l = 0..n, φ = pot_β − pot_α), so the
//! purely algebraic relations between I, J, I_k and J_k (I_0 = 0, I_n = J,
//! J_k = J − I_k, I_{n−1} = ((n+1)J − I)/n, J_0 = J, J_n = 0) hold
//! *discretely exactly*: they are rearrangements of the same finite sums,
//! not separate quadratures. The genuinely independent cross-checks are the
//! Dirichlet direct route and the path routes.

use crate::model::KahlerModel;

pub struct PairMoments {
    pub n: usize,
    /// w[l] = (1/V) ∫ φ α^{n−l} ∧ β^l.
    pub w: Vec<f64>,
}

pub fn pair_moments<M: KahlerModel>(m: &M, a: &M::Form, b: &M::Form) -> PairMoments {
    let n = m.dim();
    let pa = m.rel_pot(a);
    let pb = m.rel_pot(b);
    let phi: Vec<f64> = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
    let v = m.volume();
    let mut w = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut forms: Vec<&M::Form> = Vec::with_capacity(n);
        for _ in 0..n - l {
            forms.push(a);
        }
        for _ in 0..l {
            forms.push(b);
        }
        w.push(m.weighted_wedge(Some(&phi), &forms) / v);
    }
    PairMoments { n, w }
}

impl PairMoments {
    /// P_l = (1/V) ∫ i∂φ∧∂̄φ ∧ α^{n−1−l} ∧ β^l, by parts: W_l − W_{l+1}.
    pub fn p(&self, l: usize) -> f64 {
        self.w[l] - self.w[l + 1]
    }

    /// (1/V) ∫ φ αⁿ.
    pub fn phi_mean_base(&self) -> f64 {
        self.w[0]
    }

    /// I(α,β) = (1/V) ∫ φ (αⁿ − βⁿ).
    pub fn aubin_i(&self) -> f64 {
        self.w[0] - self.w[self.n]
    }

    /// J(α,β) = (1/(V(n+1))) ∫ i∂φ∧∂̄φ ∧ Σ_{l<n} (n−l) α^{n−1−l} ∧ β^l.
    pub fn aubin_j(&self) -> f64 {
        let n = self.n;
        (0..n).map(|l| (n - l) as f64 * self.p(l)).sum::<f64>() / (n + 1) as f64
    }

    /// I_k = Σ_{l<k} ((k−l)/(k+1)) P_l, 0 ≤ k ≤ n.
    pub fn i_k(&self, k: usize) -> f64 {
        assert!(k <= self.n, "I_k: k = {k} out of 0..={}", self.n);
        (0..k)
            .map(|l| (k - l) as f64 / (k + 1) as f64 * self.p(l))
            .sum()
    }

    /// J_k closed form, 0 ≤ k ≤ n:
    /// (1/(n+1)) [ ((n−k)/(k+1)) Σ_{l<k} (l+1) P_l + Σ_{l=k}^{n−1} (n−l) P_l ].
    pub fn j_k(&self, k: usize) -> f64 {
        let n = self.n;
        assert!(k <= n, "J_k: k = {k} out of 0..={n}");
        let mut s = 0.0;
        for l in 0..k {
            s += (n - k) as f64 / (k + 1) as f64 * (l + 1) as f64 * self.p(l);
        }
        for l in k..n {
            s += (n - l) as f64 * self.p(l);
        }
        s / (n + 1) as f64
    }
}

/// Direct (non-parts) route for I: (1/V) Σ_l ∫ i∂φ∧∂̄φ ∧ α^{n−1−l} ∧ β^l.
pub fn aubin_i_direct<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
) -> crate::error::Result<f64> {
    let n = m.dim();
    let v = m.volume();
    let mut acc = 0.0;
    for l in 0..n {
        let mut rest: Vec<&M::Form> = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 - l {
            rest.push(a);
        }
        for _ in 0..l {
            rest.push(b);
        }
        acc += m.dirichlet_direct(a, b, &rest)? / v;
    }
    Ok(acc)
}

/// Direct route for J: (1/(V(n+1))) Σ_l (n−l) ∫ i∂φ∧∂̄φ ∧ α^{n−1−l} ∧ β^l.
pub fn aubin_j_direct<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
) -> crate::error::Result<f64> {
    let n = m.dim();
    let v = m.volume();
    let mut acc = 0.0;
    for l in 0..n {
        let mut rest: Vec<&M::Form> = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 - l {
            rest.push(a);
        }
        for _ in 0..l {
            rest.push(b);
        }
        acc += (n - l) as f64 * m.dirichlet_direct(a, b, &rest)? / v;
    }
    Ok(acc / (n + 1) as f64)
}
