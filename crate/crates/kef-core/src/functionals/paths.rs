//! Path-integral routes: Gauss–Legendre integration in t over piecewise
//! affine families connecting a pair, with the paper's integrands evaluated
//! from weighted wedges (and, for E_k, the trace-Laplacian pairing).

use crate::error::{KefError, Result};
use crate::model::KahlerModel;
use crate::util::gauss_legendre_on;

/// Family connecting a pair. Endpoints always reproduce the pair exactly.
pub enum PathSpec<F> {
    /// φ_t = t·φ (the default).
    Affine { nodes: usize },
    /// φ_t = t²·φ — the affine image reparametrised; path-route values must
    /// be invariant under this change.
    Reparam { nodes: usize },
    /// Two affine legs through an intermediate form.
    TwoLeg { mid: F, nodes: usize },
}

impl<F> PathSpec<F> {
    pub fn affine() -> Self {
        PathSpec::Affine { nodes: 33 }
    }
}

/// ∫₀¹ g(β_t, dβ_t/dt, φ̇_t) dt over the chosen family. The i∂∂̄ of φ̇_t is
/// exactly the derivative form dβ_t/dt, which is passed alongside the node
/// values of φ̇_t. Node order is fixed, so the reduction is deterministic.
pub fn integrate_path<M, G>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    spec: &PathSpec<M::Form>,
    mut g: G,
) -> Result<f64>
where
    M: KahlerModel,
    G: FnMut(&M::Form, &M::Form, &[f64]) -> Result<f64>,
{
    let mut acc = 0.0;
    let mut leg = |p: &M::Form, q: &M::Form, nodes: usize| -> Result<()> {
        let (ts, ws) = gauss_legendre_on(nodes, 0.0, 1.0);
        let pp = m.rel_pot(p);
        let pq = m.rel_pot(q);
        let phidot: Vec<f64> = pq.iter().zip(&pp).map(|(x, y)| x - y).collect();
        let dform = m.form_lincomb(&[(-1.0, p), (1.0, q)]);
        for (t, w) in ts.iter().zip(&ws) {
            let cur = m.form_lincomb(&[(1.0 - t, p), (*t, q)]);
            acc += w * g(&cur, &dform, &phidot)?;
        }
        Ok(())
    };
    match spec {
        PathSpec::Affine { nodes } => leg(a, b, *nodes)?,
        PathSpec::TwoLeg { mid, nodes } => {
            leg(a, mid, *nodes)?;
            leg(mid, b, *nodes)?;
        }
        PathSpec::Reparam { nodes } => {
            let (ts, ws) = gauss_legendre_on(*nodes, 0.0, 1.0);
            let pa = m.rel_pot(a);
            let pb = m.rel_pot(b);
            let phi: Vec<f64> = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
            let dfab = m.form_lincomb(&[(-1.0, a), (1.0, b)]);
            for (t, w) in ts.iter().zip(&ws) {
                let s = t * t;
                let cur = m.form_lincomb(&[(1.0 - s, a), (s, b)]);
                let dform = m.form_lincomb(&[(2.0 * t, &dfab)]);
                let phidot: Vec<f64> = phi.iter().map(|x| 2.0 * t * x).collect();
                acc += w * g(&cur, &dform, &phidot)?;
            }
        }
    }
    Ok(acc)
}

fn repeat<'f, F>(x: &'f F, k: usize) -> Vec<&'f F> {
    (0..k).map(|_| x).collect()
}

/// J path route: (1/V) ∫∫ φ̇ (αⁿ − β_tⁿ) dt.
pub fn aubin_j_path<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    spec: &PathSpec<M::Form>,
) -> Result<f64> {
    let n = m.dim();
    let v = m.volume();
    integrate_path(m, a, b, spec, |cur, _df, pd| {
        Ok((m.weighted_wedge(Some(pd), &repeat(a, n))
            - m.weighted_wedge(Some(pd), &repeat(cur, n)))
            / v)
    })
}

/// (I − J) path route: −(n/V) ∫∫ φ_t · i∂∂̄φ̇_t ∧ β_t^{n−1} dt, with
/// φ_t = pot(β_t) − pot(α).
pub fn i_minus_j_path<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    spec: &PathSpec<M::Form>,
) -> Result<f64> {
    let n = m.dim();
    let v = m.volume();
    let pa = m.rel_pot(a);
    integrate_path(m, a, b, spec, |cur, df, _pd| {
        let pc = m.rel_pot(cur);
        let phit: Vec<f64> = pc.iter().zip(&pa).map(|(x, y)| x - y).collect();
        let mut forms = vec![df];
        forms.extend(repeat(cur, n - 1));
        Ok(-(n as f64) * m.weighted_wedge(Some(&phit), &forms) / v)
    })
}

/// I_k path route: (1/V) ∫∫ φ̇ (αⁿ − α^{n−k} ∧ β_t^k) dt.
pub fn i_k_path<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    k: usize,
    spec: &PathSpec<M::Form>,
) -> Result<f64> {
    let n = m.dim();
    assert!(k <= n);
    let v = m.volume();
    integrate_path(m, a, b, spec, |cur, _df, pd| {
        let mut forms = repeat(a, n - k);
        forms.extend(repeat(cur, k));
        Ok((m.weighted_wedge(Some(pd), &repeat(a, n)) - m.weighted_wedge(Some(pd), &forms))
            / v)
    })
}

/// J_k path route: (1/V) ∫∫ φ̇ (β_t^k ∧ α^{n−k} − β_tⁿ) dt. The path
/// definition presumes a family of Kähler metrics, so non-Kähler endpoints
/// are refused (the closed route accepts them).
pub fn j_k_path<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    k: usize,
    spec: &PathSpec<M::Form>,
) -> Result<f64> {
    let n = m.dim();
    assert!(k <= n);
    if !m.is_kahler(a) || !m.is_kahler(b) {
        return Err(KefError::Domain(
            "J_k path route requires Kähler endpoints".to_string(),
        ));
    }
    let v = m.volume();
    integrate_path(m, a, b, spec, |cur, _df, pd| {
        let mut forms = repeat(cur, k);
        forms.extend(repeat(a, n - k));
        Ok((m.weighted_wedge(Some(pd), &forms) - m.weighted_wedge(Some(pd), &repeat(cur, n)))
            / v)
    })
}

/// The E_k path integrand at a single family point (exposed for the
/// variational finite-difference checks):
/// (1/V) ∫ Δ_t φ̇ · Ric(β_t)^k ∧ β_t^{n−k}
/// − ((n−k)/(k+1)) (1/V) ∫ φ̇ (Ric(β_t)^{k+1} − μ_k β_t^{k+1}) ∧ β_t^{n−1−k},
/// with μ_k = 1 in the anticanonical class.
pub fn e_k_integrand<M: KahlerModel>(
    m: &M,
    cur: &M::Form,
    dform: &M::Form,
    phidot: &[f64],
    k: usize,
) -> Result<f64> {
    let n = m.dim();
    assert!(k <= n);
    if !m.is_kahler(cur) {
        return Err(KefError::Domain(format!(
            "E_k path: positivity lost along the path (margin {:.3e})",
            m.kahler_margin(cur)
        )));
    }
    let v = m.volume();
    let ric = m.ricci_form(cur)?;
    let term1 = if k == 0 {
        // Δφ̇ · β_tⁿ = n · i∂∂̄φ̇ ∧ β_t^{n−1}: ratio-free.
        let mut forms = vec![dform];
        forms.extend(repeat(cur, n - 1));
        n as f64 * m.weighted_wedge(None, &forms) / v
    } else {
        let mut rest = repeat(&ric, k);
        rest.extend(repeat(cur, n - k));
        m.laplace_weighted_wedge(None, dform, cur, &rest)? / v
    };
    let term2 = if k == n {
        0.0
    } else {
        let mut forms_r = repeat(&ric, k + 1);
        forms_r.extend(repeat(cur, n - 1 - k));
        let moment_r = m.weighted_wedge(Some(phidot), &forms_r);
        let moment_c = m.weighted_wedge(Some(phidot), &repeat(cur, n));
        -((n - k) as f64 / (k + 1) as f64) * (moment_r - moment_c) / v
    };
    Ok(term1 + term2)
}

/// E_k path route. Aborts with a diagnostic if positivity is lost at a
/// t-node (possible only on two-leg detours; affine segments between Kähler
/// endpoints stay Kähler by convexity).
pub fn e_k_path<M: KahlerModel>(
    m: &M,
    a: &M::Form,
    b: &M::Form,
    k: usize,
    spec: &PathSpec<M::Form>,
) -> Result<f64> {
    if !m.is_kahler(a) || !m.is_kahler(b) {
        return Err(KefError::Domain(
            "E_k path route requires Kähler endpoints".to_string(),
        ));
    }
    integrate_path(m, a, b, spec, |cur, df, pd| e_k_integrand(m, cur, df, pd, k))
}

/// Mid-path integrand values for the variational consistency checks of
/// I, J and I_k: the time derivatives of the closed functionals along the
/// affine family at parameter t.
pub struct VariationalIntegrands;

impl VariationalIntegrands {
    /// d/dt I(α, β_t) is not displayed in closed form by the theory; the
    /// finite-difference checks use J, I−J, I_k and E_k below.
    /// d/dt J = (1/V) ∫ φ̇ (αⁿ − β_tⁿ).
    pub fn j<M: KahlerModel>(m: &M, a: &M::Form, cur: &M::Form, phidot: &[f64]) -> f64 {
        let n = m.dim();
        (m.weighted_wedge(Some(phidot), &repeat(a, n))
            - m.weighted_wedge(Some(phidot), &repeat(cur, n)))
            / m.volume()
    }

    /// d/dt (I−J) = −(n/V) ∫ φ_t · i∂∂̄φ̇ ∧ β_t^{n−1}.
    pub fn i_minus_j<M: KahlerModel>(
        m: &M,
        a: &M::Form,
        cur: &M::Form,
        dform: &M::Form,
    ) -> f64 {
        let n = m.dim();
        let pa = m.rel_pot(a);
        let pc = m.rel_pot(cur);
        let phit: Vec<f64> = pc.iter().zip(&pa).map(|(x, y)| x - y).collect();
        let mut forms = vec![dform];
        forms.extend(repeat(cur, n - 1));
        -(n as f64) * m.weighted_wedge(Some(&phit), &forms) / m.volume()
    }

    /// d/dt I_k = (1/V) ∫ φ̇ (αⁿ − α^{n−k} ∧ β_t^k).
    pub fn i_k<M: KahlerModel>(
        m: &M,
        a: &M::Form,
        cur: &M::Form,
        phidot: &[f64],
        k: usize,
    ) -> f64 {
        let n = m.dim();
        let mut forms = repeat(a, n - k);
        forms.extend(repeat(cur, k));
        (m.weighted_wedge(Some(phidot), &repeat(a, n))
            - m.weighted_wedge(Some(phidot), &forms))
            / m.volume()
    }

    /// d/dt J_k = (1/V) ∫ φ̇ (β_t^k ∧ α^{n−k} − β_tⁿ).
    pub fn j_k<M: KahlerModel>(
        m: &M,
        a: &M::Form,
        cur: &M::Form,
        phidot: &[f64],
        k: usize,
    ) -> f64 {
        let n = m.dim();
        let mut forms = repeat(cur, k);
        forms.extend(repeat(a, n - k));
        (m.weighted_wedge(Some(phidot), &forms)
            - m.weighted_wedge(Some(phidot), &repeat(cur, n)))
            / m.volume()
    }
}
