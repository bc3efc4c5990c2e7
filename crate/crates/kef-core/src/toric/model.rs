//! Torus-invariant CP^n in log coordinates (n = 1, 2, 3).
//!
//! Conventions (fixed once, verified by oracles in tests):
//!   base potential u₀ = (n+1) log(1 + Σ e^{x_i}), exactly Kähler-Einstein:
//!   −log det D²u₀ = u₀ − Σ x_i − n log(n+1);
//!   V = ∫ ωⁿ = (n+1)ⁿ; the torus-volume normaliser c_n relating
//!   ∫ α₁∧…∧α_n to ∫ D(D²u₁,…,D²u_n) dx is *measured* by the calibration
//!   wedge(ω,…,ω) = V (analytically c_n = n!).
//!
//! Quadrature is a uniform midpoint tensor grid on [−L, L]ⁿ: for analytic
//! integrands decaying like e^{−|x|} it is spectrally accurate in 2L/h,
//! whereas Gauss–Legendre on a box this large stalls near 1e−4 because of
//! the integrand's poles at Im x_i = π.

use std::sync::Arc;

use super::function::{lse_jet, Term, ToricFunction};
use super::jet::{jet_det_lu, jet_mixed_discriminant, Jet, JetSpace};
use crate::error::{KefError, Result};
use crate::util::pairwise_sum_fn;

/// Uniform midpoint tensor-product quadrature on [−lbox, lbox]ⁿ.
#[derive(Clone)]
pub struct BoxGrid {
    pub n: usize,
    pub lbox: f64,
    pub points_per_axis: usize,
    pub nodes_1d: Vec<f64>,
    /// Quadrature weight per node: hⁿ.
    pub node_weight: f64,
}

impl BoxGrid {
    pub fn new(n: usize, lbox: f64, points_per_axis: usize) -> Result<BoxGrid> {
        if !(1..=3).contains(&n) {
            return Err(KefError::Config(format!("toric dimension {n} not in 1..=3")));
        }
        if points_per_axis < 8 || lbox <= 0.0 {
            return Err(KefError::Config(format!(
                "degenerate toric box: {points_per_axis} points on [−{lbox}, {lbox}]"
            )));
        }
        let h = 2.0 * lbox / points_per_axis as f64;
        let nodes_1d = (0..points_per_axis)
            .map(|k| -lbox + (k as f64 + 0.5) * h)
            .collect();
        Ok(BoxGrid {
            n,
            lbox,
            points_per_axis,
            nodes_1d,
            node_weight: h.powi(n as i32),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    /// Coordinates of flat node index p (row-major over axes).
    pub fn point(&self, p: usize) -> Vec<f64> {
        let mut rem = p;
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            x[i] = self.nodes_1d[rem % self.points_per_axis];
            rem /= self.points_per_axis;
        }
        x
    }
}

/// A symmetric n×n matrix per grid node (row-major, stride n²).
#[derive(Clone)]
pub struct MatrixField {
    pub n: usize,
    pub data: Vec<f64>,
}

impl MatrixField {
    pub fn zero(n: usize, n_nodes: usize) -> MatrixField {
        MatrixField {
            n,
            data: vec![0.0; n * n * n_nodes],
        }
    }

    pub fn at(&self, p: usize) -> &[f64] {
        let s = self.n * self.n;
        &self.data[p * s..(p + 1) * s]
    }

    pub fn at_mut(&mut self, p: usize) -> &mut [f64] {
        let s = self.n * self.n;
        &mut self.data[p * s..(p + 1) * s]
    }

    pub fn n_nodes(&self) -> usize {
        self.data.len() / (self.n * self.n)
    }

    pub fn lincomb(parts: &[(f64, &MatrixField)]) -> MatrixField {
        assert!(!parts.is_empty());
        let mut out = MatrixField::zero(parts[0].1.n, parts[0].1.n_nodes());
        for (s, m) in parts {
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += s * v;
            }
        }
        out
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut min = f64::INFINITY;
        for p in 0..self.n_nodes() {
            min = min.min(sym_min_eig(self.at(p), self.n));
        }
        min
    }
}

/// Determinant of a symmetric n×n matrix, n ≤ 3.
pub fn sym_det(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => panic!("sym_det supports n in 1..=3"),
    }
}

/// Smallest eigenvalue of a symmetric n×n matrix, n ≤ 3 (trig closed forms).
pub fn sym_min_eig(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => {
            let tr = m[0] + m[3];
            let disc = ((m[0] - m[3]) * (m[0] - m[3]) / 4.0 + m[1] * m[2]).max(0.0);
            tr / 2.0 - disc.sqrt()
        }
        3 => {
            // The trigonometric closed form is only √eps-accurate when the
            // spectrum spans many decades (an absolute ~1e−8 error on the
            // near-zero corner eigenvalues); use the iterative solver.
            let eig = nalgebra::Matrix3::from_row_slice(m).symmetric_eigen();
            eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v))
        }
        _ => panic!("sym_min_eig supports n in 1..=3"),
    }
}

/// Mixed discriminant D(A₁,…,A_n) by inclusion–exclusion polarisation:
/// D = (1/n!) Σ_{S ⊆ [n], S≠∅} (−1)^{n−|S|} det(Σ_{i∈S} A_i),
/// normalised so D(A,…,A) = det A.
pub fn mixed_discriminant(mats: &[&[f64]], n: usize) -> f64 {
    debug_assert_eq!(mats.len(), n);
    let mut acc = 0.0;
    let mut sum = [0.0; 9];
    for s in 1u32..(1 << n) {
        sum[..n * n].fill(0.0);
        for (i, m) in mats.iter().enumerate() {
            if s & (1 << i) != 0 {
                for (a, b) in sum[..n * n].iter_mut().zip(*m) {
                    *a += b;
                }
            }
        }
        let sign = if (n - s.count_ones() as usize) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += sign * sym_det(&sum, n);
    }
    let nfact: f64 = (1..=n as u64).product::<u64>() as f64;
    acc / nfact
}

/// A torus-invariant (1,1)-form: Hessian field of its potential, together
/// with the global potential relative to ω₀ sampled on the grid. `gen` holds
/// the full analytic potential when the form is i∂∂̄ of one (needed for
/// Ricci); Ricci forms carry `gen = None`.
#[derive(Clone)]
pub struct ToricForm {
    pub hess: MatrixField,
    /// Global potential relative to ω₀ at the nodes (form = ω₀ + i∂∂̄pot).
    pub pot: Vec<f64>,
    /// Gradient of the relative potential at the nodes (node-major,
    /// stride n). Used by the direct Dirichlet route, where i∂φ∧∂̄φ enters
    /// through the rank-one matrix ∇φ∇φᵀ.
    pub grad: Vec<f64>,
    pub gen: Option<ToricFunction>,
    /// min over nodes of the smallest Hessian eigenvalue: Kähler margin.
    pub min_eig: f64,
}

impl ToricForm {
    pub fn lincomb(parts: &[(f64, &ToricForm)]) -> ToricForm {
        let hess = MatrixField::lincomb(
            &parts.iter().map(|(s, f)| (*s, &f.hess)).collect::<Vec<_>>(),
        );
        let mut pot = vec![0.0; parts[0].1.pot.len()];
        for (s, f) in parts {
            for (o, v) in pot.iter_mut().zip(&f.pot) {
                *o += s * v;
            }
        }
        let mut grad = vec![0.0; parts[0].1.grad.len()];
        for (s, f) in parts {
            for (o, v) in grad.iter_mut().zip(&f.grad) {
                *o += s * v;
            }
        }
        let gen = if parts.iter().all(|(_, f)| f.gen.is_some()) {
            Some(ToricFunction::lincomb(
                &parts
                    .iter()
                    .map(|(s, f)| (*s, f.gen.as_ref().unwrap()))
                    .collect::<Vec<_>>(),
            ))
        } else {
            None
        };
        let min_eig = hess.min_eigenvalue();
        ToricForm {
            hess,
            pot,
            grad,
            gen,
            min_eig,
        }
    }
}

#[derive(Clone)]
pub struct ToricModel {
    pub grid: BoxGrid,
    pub u0: ToricFunction,
    /// Measured torus-volume normaliser: V / ∫_box det D²u₀ dx (≈ n!).
    pub c_norm: f64,
    /// Relative deviation of c_norm from n!.
    pub c_norm_deviation: f64,
    base: ToricForm,
    /// v₀ = −log det D²u₀ at the nodes.
    v0: Vec<f64>,
    sp2: Arc<JetSpace>,
    sp4: Arc<JetSpace>,
}

impl ToricModel {
    pub fn new(n: usize, lbox: f64, points_per_axis: usize) -> Result<ToricModel> {
        let grid = BoxGrid::new(n, lbox, points_per_axis)?;
        let sp2 = JetSpace::new(n, 2);
        let sp4 = JetSpace::new(n, 4);
        let u0 = ToricFunction::base(n);
        let n_nodes = grid.n_nodes();
        let mut hess = MatrixField::zero(n, n_nodes);
        let mut v0 = vec![0.0; n_nodes];
        for p in 0..n_nodes {
            let x = grid.point(p);
            let j = u0.jet_eval(&sp2, &x);
            let h = hess.at_mut(p);
            for i in 0..n {
                for k in 0..n {
                    h[i * n + k] = j.hess(i, k);
                }
            }
            // closed form −log det D²u₀ = u₀ − Σ x_i − n log(n+1): exact
            // where the entry-wise determinant would cancel to rounding noise
            // in the far corners (det D²u₀ ∼ e^{−2L} there).
            v0[p] = j.value()
                - x.iter().sum::<f64>()
                - n as f64 * ((n + 1) as f64).ln();
            if !v0[p].is_finite() {
                return Err(KefError::Inconsistency(format!(
                    "base Ricci potential not finite at node {p}"
                )));
            }
        }
        let raw = pairwise_sum_fn(n_nodes, &mut |p| (-v0[p]).exp()) * grid.node_weight;
        let volume = ((n + 1) as f64).powi(n as i32);
        let c_norm = volume / raw;
        let nfact: f64 = (1..=n as u64).product::<u64>() as f64;
        let min_eig = hess.min_eigenvalue();
        let base = ToricForm {
            hess,
            pot: vec![0.0; n_nodes],
            grad: vec![0.0; n * n_nodes],
            gen: Some(u0.clone()),
            min_eig,
        };
        Ok(ToricModel {
            grid,
            u0,
            c_norm,
            c_norm_deviation: (c_norm - nfact).abs() / nfact,
            base,
            v0,
            sp2,
            sp4,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn volume(&self) -> f64 {
        ((self.grid.n + 1) as f64).powi(self.grid.n as i32)
    }

    pub fn base_form(&self) -> ToricForm {
        self.base.clone()
    }

    /// The form ω_u = i∂∂̄u of a global convex (or not) potential u.
    pub fn form_from_function(&self, u: &ToricFunction) -> ToricForm {
        let n = self.grid.n;
        let n_nodes = self.grid.n_nodes();
        let mut hess = MatrixField::zero(n, n_nodes);
        let mut pot = vec![0.0; n_nodes];
        let mut grad = vec![0.0; n * n_nodes];
        let rel = ToricFunction::lincomb(&[(1.0, u), (-1.0, &self.u0)]);
        for p in 0..n_nodes {
            let x = self.grid.point(p);
            let j = u.jet_eval(&self.sp2, &x);
            let h = hess.at_mut(p);
            for i in 0..n {
                for k in 0..n {
                    h[i * n + k] = j.hess(i, k);
                }
            }
            let relj = rel.jet_eval(&self.sp2, &x);
            pot[p] = relj.value();
            for i in 0..n {
                grad[p * n + i] = relj.grad(i);
            }
        }
        let min_eig = hess.min_eigenvalue();
        ToricForm {
            hess,
            pot,
            grad,
            gen: Some(u.clone()),
            min_eig,
        }
    }

    /// Perturbed Kähler potential u = u₀ + ψ for a list of terms.
    pub fn potential_with_terms(&self, terms: &[Term]) -> ToricFunction {
        let mut u = self.u0.clone();
        for t in terms {
            u = u.with_term(t.clone());
        }
        u
    }

    /// Ric ω_u: Hessian field of v = −log det D²u (degree-2/4 jets; exact),
    /// with global relative potential v − v₀. Requires an analytic generator
    /// with a positive base coefficient and a positive-definite Hessian.
    ///
    /// The determinant is never formed entry-wise: entry-wise determinants
    /// cancel catastrophically in the far field (det ∼ e^{−2L} from O(1)
    /// entries). The log-sum-exp content of u — the base term plus any
    /// `Term::LogSumExp` — contributes Hessians diag(p_j) − p_j p_jᵀ, so with
    /// D = Σ_j a_j diag(p_j) the determinant lemma gives
    ///   det(D − Σ a_j p_j p_jᵀ) = det D · det(I_m − C),
    ///   C_{jk} = a_k Σ_i p_{j,i} p_{k,i} / D_i.
    /// The row sums of C obey the exact identity Σ_k C_{jk} = 1 − σ_j with
    /// σ_j = e^{−lse_j}, so adding all other columns into the first replaces
    /// the first column of I − C by (σ_1,…,σ_m): the "1 minus nearly 1"
    /// cancellation is eliminated analytically and the tiny factor is carried
    /// by a stable exponential. Compactly decaying terms (Gaussians, bumps)
    /// enter through mixed discriminants divided by this stable determinant;
    /// that ratio is safe because they decay faster than the e^{−‖x‖∞} scale
    /// on which the base degenerates.
    pub fn ricci(&self, form: &ToricForm) -> Result<ToricForm> {
        let u = form.gen.as_ref().ok_or_else(|| {
            KefError::Domain(
                "ricci: form has no analytic generating potential".to_string(),
            )
        })?;
        // Rounding floor rather than strict 0: the true corner eigenvalues of
        // Kähler forms are ∼e^{−2L} (far below the ±1e−16 noise of the entry
        // computation), so a strict sign test would reject the base form
        // itself on large boxes. Genuine positivity loss is caught pointwise
        // below through the structured determinant factors.
        if form.min_eig <= -1e-12 {
            return Err(KefError::Domain(format!(
                "ricci: form not Kähler (min Hessian eigenvalue {:.3e})",
                form.min_eig
            )));
        }
        let n = self.grid.n;
        if u.base_coeff <= 0.0 {
            return Err(KefError::Domain(format!(
                "ricci: base coefficient {} not positive",
                u.base_coeff
            )));
        }
        // Partition the generator: log-sum-exp pieces (base + translates) go
        // through the rank-one determinant structure; affine pieces have zero
        // Hessian; everything else is the compact part.
        let mut amps = vec![u.base_coeff];
        let mut centers = vec![vec![0.0; n]];
        let mut compact = Vec::new();
        for t in &u.terms {
            match t {
                Term::LogSumExp { amp, center } => {
                    amps.push(*amp);
                    centers.push(center.clone());
                }
                Term::Affine { .. } => {}
                other => compact.push(other.clone()),
            }
        }
        let gcomp = ToricFunction {
            n,
            base_coeff: 0.0,
            terms: compact,
        };
        let has_compact = !gcomp.terms.is_empty();
        let m = amps.len();
        let binom = |k: usize| -> f64 {
            (0..k).map(|j| (n - j) as f64 / (j + 1) as f64).product()
        };
        let n_nodes = self.grid.n_nodes();
        let mut hess = MatrixField::zero(n, n_nodes);
        let mut pot = vec![0.0; n_nodes];
        let mut grad = vec![0.0; n * n_nodes];
        for p in 0..n_nodes {
            let x = self.grid.point(p);
            let xs: Vec<Jet> = (0..n)
                .map(|i| Jet::variable(&self.sp2, i, x[i]))
                .collect();
            // softmax weights p_{j,i} = e^{x_i − c_{j,i} − lse_j} (exponents
            // of nonpositive well-conditioned arguments) and σ_j = e^{−lse_j}
            let mut pj: Vec<Vec<Jet>> = Vec::with_capacity(m);
            let mut sigma: Vec<Jet> = Vec::with_capacity(m);
            for j in 0..m {
                let l = lse_jet(&xs, &centers[j]);
                pj.push(
                    (0..n)
                        .map(|i| {
                            xs[i]
                                .add(&Jet::constant(&self.sp2, -centers[j][i]))
                                .add(&l.scale(-1.0))
                                .exp()
                        })
                        .collect(),
                );
                sigma.push(l.scale(-1.0).exp());
            }
            let di: Vec<Jet> = (0..n)
                .map(|i| {
                    let mut d = Jet::constant(&self.sp2, 0.0);
                    for j in 0..m {
                        d.add_assign_scaled(amps[j], &pj[j][i]);
                    }
                    d
                })
                .collect();
            if di.iter().any(|d| d.value() <= 0.0) {
                return Err(KefError::Domain(format!(
                    "ricci: diagonal factor lost positivity at node {p}"
                )));
            }
            let mut ln_det_d = Jet::constant(&self.sp2, 0.0);
            let dinv: Vec<Jet> = di.iter().map(|d| d.recip()).collect();
            for d in &di {
                ln_det_d = ln_det_d.add(&d.ln());
            }
            // I_m − C with the first column replaced by (σ_1,…,σ_m)
            let mut sys: Vec<Jet> = Vec::with_capacity(m * m);
            for j in 0..m {
                for k in 0..m {
                    if k == 0 {
                        sys.push(sigma[j].clone());
                    } else {
                        let mut c = Jet::constant(&self.sp2, 0.0);
                        for i in 0..n {
                            c = c.add(&pj[j][i].mul(&pj[k][i]).mul(&dinv[i]));
                        }
                        let mut e = c.scale(-amps[k]);
                        if j == k {
                            e = e.add(&Jet::constant(&self.sp2, 1.0));
                        }
                        sys.push(e);
                    }
                }
            }
            let det_sys = jet_det_lu(&sys, m);
            if det_sys.value() <= 0.0 {
                return Err(KefError::Domain(format!(
                    "ricci: det D²u lost positivity at node {p} \
                     (structured factor {:.3e})",
                    det_sys.value()
                )));
            }
            let mut v = ln_det_d.add(&det_sys.ln()).scale(-1.0);
            if has_compact {
                // det(A + G) = det A · (1 + Σ_{k≥1} C(n,k) D(A^{n−k},G^k)/det A)
                let mut a_ent: Vec<Jet> = Vec::with_capacity(n * n);
                for i in 0..n {
                    for k in 0..n {
                        let mut e = if i == k {
                            di[i].clone()
                        } else {
                            Jet::constant(&self.sp2, 0.0)
                        };
                        for j in 0..m {
                            e.add_assign_scaled(-amps[j], &pj[j][i].mul(&pj[j][k]));
                        }
                        a_ent.push(e);
                    }
                }
                let gj = self.entry_jets(&gcomp, &x);
                let det_a_inv = {
                    let mut d = det_sys.clone();
                    for f in &di {
                        d = d.mul(f);
                    }
                    d.recip()
                };
                let mut mixed = Jet::constant(&self.sp2, 0.0);
                for k in 1..=n {
                    let mut mats: Vec<&[Jet]> = Vec::with_capacity(n);
                    for _ in 0..n - k {
                        mats.push(&a_ent);
                    }
                    for _ in 0..k {
                        mats.push(&gj);
                    }
                    mixed.add_assign_scaled(
                        binom(k),
                        &jet_mixed_discriminant(&mats, n),
                    );
                }
                let one_plus =
                    Jet::constant(&self.sp2, 1.0).add(&mixed.mul(&det_a_inv));
                if one_plus.value() <= 0.0 {
                    return Err(KefError::Domain(format!(
                        "ricci: det D²u lost positivity at node {p} \
                         (relative correction {:.3e})",
                        one_plus.value() - 1.0
                    )));
                }
                v = v.add(&one_plus.ln().scale(-1.0));
            }
            let h = hess.at_mut(p);
            for i in 0..n {
                for k in 0..n {
                    h[i * n + k] = v.hess(i, k);
                }
            }
            pot[p] = v.value() - self.v0[p];
            // ∂_i v₀ = (n+1)·softmax₀ᵢ − 1 (pj[0] is the centre-0 softmax
            // regardless of the generator's base coefficient).
            for i in 0..n {
                grad[p * n + i] =
                    v.grad(i) - ((n + 1) as f64 * pj[0][i].value() - 1.0);
            }
        }
        let min_eig = hess.min_eigenvalue();
        Ok(ToricForm {
            hess,
            pot,
            grad,
            gen: None,
            min_eig,
        })
    }

    /// ∫ i∂φ∧∂̄φ ∧ γ₂∧…∧γ_n with φ = pot(b) − pot(a), via the rank-one
    /// identity ∫ φ D(D²φ, A₂,…,A_n) dx = −∫ D(∇φ∇φᵀ, A₂,…,A_n) dx
    /// (the mixed-discriminant cofactor rows of Hessian arguments are
    /// divergence-free, and the relative potentials decay).
    pub fn dirichlet_direct(
        &self,
        a: &ToricForm,
        b: &ToricForm,
        rest: &[&ToricForm],
    ) -> f64 {
        let n = self.grid.n;
        debug_assert_eq!(rest.len(), n - 1);
        let s = pairwise_sum_fn(self.grid.n_nodes(), &mut |p| {
            let mut g = [0.0; 9];
            for i in 0..n {
                for k in 0..n {
                    g[i * n + k] =
                        (b.grad[p * n + i] - a.grad[p * n + i])
                            * (b.grad[p * n + k] - a.grad[p * n + k]);
                }
            }
            let mut mats: Vec<&[f64]> = vec![&g[..n * n]];
            for r in rest {
                mats.push(r.hess.at(p));
            }
            mixed_discriminant(&mats, n)
        });
        self.c_norm * self.grid.node_weight * s
    }

    /// Hessian-entry jets (degree 2) of a potential at x, via one degree-4 jet.
    fn entry_jets(&self, f: &ToricFunction, x: &[f64]) -> Vec<Jet> {
        let n = self.grid.n;
        let j4 = f.jet_eval(&self.sp4, x);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                out.push(j4.hessian_entry_jet(i, k, &self.sp2));
            }
        }
        out
    }

    /// ∫ α₁ ∧ … ∧ α_n over CP^n (box quadrature + measured normaliser);
    /// wedge(ω,…,ω) = V by calibration.
    pub fn wedge(&self, forms: &[&ToricForm]) -> f64 {
        let n = self.grid.n;
        debug_assert_eq!(forms.len(), n);
        let s = pairwise_sum_fn(self.grid.n_nodes(), &mut |p| {
            let mats: Vec<&[f64]> = forms.iter().map(|f| f.hess.at(p)).collect();
            mixed_discriminant(&mats, n)
        });
        self.c_norm * self.grid.node_weight * s
    }

    /// ∫ h · α₁ ∧ … ∧ α_n for a scalar grid function h.
    pub fn weighted_wedge(&self, h: &[f64], forms: &[&ToricForm]) -> f64 {
        let n = self.grid.n;
        debug_assert_eq!(forms.len(), n);
        let s = pairwise_sum_fn(self.grid.n_nodes(), &mut |p| {
            let mats: Vec<&[f64]> = forms.iter().map(|f| f.hess.at(p)).collect();
            h[p] * mixed_discriminant(&mats, n)
        });
        self.c_norm * self.grid.node_weight * s
    }

    /// Upper estimate of the wedge mass outside the box for forms generated
    /// by the given potentials: base-Hessian determinant decay
    /// det D²u₀ ≤ (n+1)ⁿ e^{−‖x‖∞} in closed (incomplete-gamma) form, plus
    /// Gaussian/bump perturbation envelopes with an e^{−(r−L)} rate valid
    /// beyond each term's decay onset (a penalty factor covers onsets that
    /// sit outside the box).
    pub fn tail_bound(&self, funcs: &[&ToricFunction]) -> f64 {
        let n = self.grid.n;
        let l = self.grid.lbox;
        let nfact: f64 = (1..=n as u64).product::<u64>() as f64;
        // operator-norm bounds: base piece ≤ |base_coeff| globally
        let mut a_prod = 1.0;
        let mut ab_prod = 1.0;
        for f in funcs {
            let mut a = f.base_coeff.abs();
            let mut b = 0.0;
            for t in &f.terms {
                b += match t {
                    Term::LogSumExp { amp, center } => {
                        // same e^{−‖x‖∞} decay as the base, delayed by the
                        // translation: fold into the base-like factor
                        let c_inf = center.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                        a += amp.abs() * c_inf.exp();
                        0.0
                    }
                    Term::Gaussian { amp, center, width } => {
                        let c_inf = center.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                        let onset = c_inf + width * width;
                        let penalty = (onset - l).max(0.0).exp();
                        let rho = (l - c_inf).max(0.0);
                        let q = rho * rho / (width * width);
                        amp.abs() * (1.0 + q) * (-q / 2.0).exp() / (width * width)
                            * penalty
                    }
                    Term::Bump {
                        amp,
                        center,
                        radius,
                    } => {
                        let c_inf = center.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                        if c_inf + radius <= l {
                            0.0
                        } else {
                            // sup of the mollifier Hessian entries is a few
                            // units of amp/radius²
                            10.0 * amp.abs() / (radius * radius)
                        }
                    }
                    Term::Affine { .. } => 0.0,
                };
            }
            a_prod *= a;
            ab_prod *= a + b;
        }
        // ∫_{‖x‖∞>L} e^{−‖x‖∞} dx = n 2ⁿ ∫_L^∞ r^{n−1} e^{−r} dr
        let gamma_inc = {
            let nm1fact: f64 = (1..n as u64).product::<u64>() as f64;
            let mut s = 0.0;
            let mut kfact = 1.0;
            for k in 0..n {
                if k > 0 {
                    kfact *= k as f64;
                }
                s += nm1fact / kfact * l.powi(k as i32);
            }
            (-l).exp() * s
        };
        // ∫_L^∞ r^{n−1} e^{−(r−L)} dr = Σ_k C(n−1,k) L^{n−1−k} k!
        let shifted_poly = {
            let mut s = 0.0;
            for k in 0..n {
                let binom: f64 = (0..k).map(|j| (n - 1 - j) as f64 / (j + 1) as f64).product();
                let kfact: f64 = (1..=k as u64).product::<u64>() as f64;
                s += binom * l.powi((n - 1 - k) as i32) * kfact;
            }
            s
        };
        let surface = n as f64 * 2f64.powi(n as i32);
        // all-base term: D(a₁P,…,a_nP) = (Π a_i) det P with det P ≤ e^{−‖x‖∞}
        let base_piece = a_prod * surface * gamma_inc;
        let pert_piece =
            nfact * (n as f64).powf(n as f64 / 2.0) * (ab_prod - a_prod) * surface
                * shifted_poly;
        self.c_norm * (base_piece + pert_piece)
    }
}

impl crate::model::KahlerModel for ToricModel {
    type Form = ToricForm;

    fn dim(&self) -> usize {
        self.grid.n
    }

    fn volume(&self) -> f64 {
        ToricModel::volume(self)
    }

    fn n_points(&self) -> usize {
        self.grid.n_nodes()
    }

    fn base_form(&self) -> ToricForm {
        ToricModel::base_form(self)
    }

    fn form_lincomb(&self, parts: &[(f64, &ToricForm)]) -> ToricForm {
        ToricForm::lincomb(parts)
    }

    fn rel_pot(&self, f: &ToricForm) -> Vec<f64> {
        f.pot.clone()
    }

    fn kahler_margin(&self, f: &ToricForm) -> f64 {
        f.min_eig
    }

    /// True corner eigenvalues of Kähler forms are ∼e^{−2L}, below the
    /// rounding noise of the entry computation.
    fn margin_floor(&self) -> f64 {
        -1e-12
    }

    fn ricci_form(&self, f: &ToricForm) -> Result<ToricForm> {
        ToricModel::ricci(self, f)
    }

    fn weighted_wedge(&self, h: Option<&[f64]>, forms: &[&ToricForm]) -> f64 {
        match h {
            Some(h) => ToricModel::weighted_wedge(self, h, forms),
            None => ToricModel::wedge(self, forms),
        }
    }

    fn dirichlet_direct(
        &self,
        a: &ToricForm,
        b: &ToricForm,
        rest: &[&ToricForm],
    ) -> Result<f64> {
        Ok(ToricModel::dirichlet_direct(self, a, b, rest))
    }

    fn laplace_weighted_wedge(
        &self,
        h: Option<&[f64]>,
        dpsi: &ToricForm,
        target: &ToricForm,
        rest: &[&ToricForm],
    ) -> Result<f64> {
        let n = self.grid.n;
        debug_assert_eq!(rest.len(), n);
        if target.min_eig <= -1e-12 {
            return Err(KefError::Domain(format!(
                "laplace_weighted_wedge: target not Kähler (min eigenvalue {:.3e})",
                target.min_eig
            )));
        }
        let s = pairwise_sum_fn(self.grid.n_nodes(), &mut |p| {
            let t = target.hess.at(p);
            let tmats: Vec<&[f64]> = (0..n).map(|_| t).collect();
            let det_t = mixed_discriminant(&tmats, n);
            // Rounding-floor truncation: where the entry-wise det has decayed
            // to (or below) the noise scale, the true integrand contribution
            // is below 1e−13·hⁿ per node; dividing by the noisy determinant
            // there would inject O(1) garbage, so the node is dropped.
            let tnorm = t.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
            if det_t <= 1e-13 * (1.0 + tnorm).powi(n as i32) {
                return 0.0;
            }
            let mut nmats: Vec<&[f64]> = vec![dpsi.hess.at(p)];
            for _ in 1..n {
                nmats.push(t);
            }
            let lap = n as f64 * mixed_discriminant(&nmats, n) / det_t;
            let rmats: Vec<&[f64]> = rest.iter().map(|r| r.hess.at(p)).collect();
            let base = lap * mixed_discriminant(&rmats, n);
            match h {
                Some(h) => h[p] * base,
                None => base,
            }
        });
        Ok(self.c_norm * self.grid.node_weight * s)
    }
}
