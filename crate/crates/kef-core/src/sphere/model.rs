//! Geometry operations of the n = 1 model: the i∂∂̄ density operator, Ricci
//! forms and potentials, Poisson solves, Möbius pullbacks.
//!
//! Conventions (fixed once, verified by oracles in tests):
//!   ω = ω_FS,1, V = 2, Ric ω = ω (Kähler-Einstein base);
//!   P(h) := i∂∂̄h / ω = (1/2) Δ_S² h, so P(Y_lm) = −l(l+1)/2 · Y_lm.
//!
//! The factor 1/2 (rather than the chart-level π of i∂∂̄h/ω taken literally)
//! is the unique normalisation of the i∂∂̄ operator under which
//! Ric ω_φ = ω − i∂∂̄ log(ω_φ/ω) maps Möbius pullbacks of ω to themselves
//! (KE condition preserved), the Ricci potential is f = −log(1+P(φ)) − φ + c,
//! and the substitution identities of the E_k theory close. The degree-1
//! eigenvalue λ₁ = 1 is *measured* against a finite-difference stencil on the
//! stereographic chart rather than asserted; the relation to the unit-sphere
//! Laplace-Beltrami operator (Δ_ω = Δ_S²/2) is recorded here and never used.

use std::sync::Arc;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::ScalarField;
use super::grid::{coeff_index, SphericalGrid, V_SPHERE};
use crate::error::{KefError, Result};

/// Eigenvalue of −P on degree-l harmonics: λ_l = l(l+1)/2.
pub fn lambda_l(l: usize) -> f64 {
    (l * (l + 1)) as f64 / 2.0
}

/// A Kähler potential on S² together with its positivity margin
/// m(φ) = min over the grid of (1 + P(φ)).
#[derive(Clone)]
pub struct KahlerPotentialS2 {
    pub phi: ScalarField,
    pub margin: f64,
}

/// A (1,1)-form α = dens·ω with a global potential. For genuine metrics
/// α = ω + i∂∂̄ pot (dens = 1 + P(pot)); linear combinations keep
/// dens − P(pot) equal to the matching multiple of the base density, so
/// form differences (dens = P(pot)) live in the same struct.
#[derive(Clone)]
pub struct SphereForm {
    pub dens: ScalarField,
    pub pot: ScalarField,
}

impl SphereForm {
    pub fn lincomb(parts: &[(f64, &SphereForm)]) -> SphereForm {
        SphereForm {
            dens: ScalarField::lincomb(
                &parts.iter().map(|(s, f)| (*s, &f.dens)).collect::<Vec<_>>(),
            ),
            pot: ScalarField::lincomb(
                &parts.iter().map(|(s, f)| (*s, &f.pot)).collect::<Vec<_>>(),
            ),
        }
    }
}

#[derive(Clone)]
pub struct SphereModel {
    pub grid: Arc<SphericalGrid>,
}

impl SphereModel {
    pub fn new(l: usize) -> Result<SphereModel> {
        Ok(SphereModel {
            grid: Arc::new(SphericalGrid::new(l)?),
        })
    }

    pub fn volume(&self) -> f64 {
        V_SPHERE
    }

    /// Density of i∂∂̄φ relative to ω: diagonal in the SH basis.
    pub fn iddbar(&self, phi: &ScalarField) -> ScalarField {
        let mut coeffs = phi.coeffs.clone();
        for l in 0..=self.grid.l_max {
            let lam = lambda_l(l);
            for m in -(l as i64)..=(l as i64) {
                coeffs[coeff_index(l, m)] *= -lam;
            }
        }
        ScalarField::from_coeffs(&self.grid, coeffs)
    }

    /// Unique mean-zero ψ with P(ψ) = ρ; requires ∫ ρ ω = 0.
    pub fn poisson_solve(&self, rho: &ScalarField) -> Result<ScalarField> {
        let mass = rho.integrate_omega();
        if mass.abs() > 1e-9 {
            return Err(KefError::Inconsistency(format!(
                "poisson source has nonzero mass {mass:.3e}"
            )));
        }
        let mut coeffs = rho.coeffs.clone();
        coeffs[0] = 0.0;
        for l in 1..=self.grid.l_max {
            let lam = lambda_l(l);
            for m in -(l as i64)..=(l as i64) {
                coeffs[coeff_index(l, m)] /= -lam;
            }
        }
        Ok(ScalarField::from_coeffs(&self.grid, coeffs))
    }

    pub fn kahler_potential(&self, phi: ScalarField) -> KahlerPotentialS2 {
        let margin = 1.0 + self.iddbar(&phi).min_value();
        KahlerPotentialS2 { phi, margin }
    }

    /// Density of ω_φ = (1 + P(φ))·ω.
    pub fn target_density(&self, target: &KahlerPotentialS2) -> ScalarField {
        let p = self.iddbar(&target.phi);
        p.add_constant(1.0)
    }

    /// Δ_φ h := n (i∂∂̄h ∧ ω_φ^{n−1}) / ω_φ^n = P(h)/(1 + P(φ)) at n = 1.
    pub fn trace_laplacian(
        &self,
        h: &ScalarField,
        target: &KahlerPotentialS2,
    ) -> Result<ScalarField> {
        if target.margin <= 0.0 {
            return Err(KefError::Domain(format!(
                "trace_laplacian: target not Kähler (margin {:.3e})",
                target.margin
            )));
        }
        let num = self.iddbar(h);
        let den = self.target_density(target);
        Ok(ScalarField::from_values(
            &self.grid,
            num.values
                .iter()
                .zip(&den.values)
                .map(|(a, b)| a / b)
                .collect(),
        ))
    }

    /// Density of Ric ω_φ relative to ω: r = 1 − P(log(1 + P(φ))).
    pub fn ricci(&self, target: &KahlerPotentialS2) -> Result<ScalarField> {
        if target.margin <= 0.0 {
            return Err(KefError::Domain(format!(
                "ricci: target not Kähler (margin {:.3e})",
                target.margin
            )));
        }
        let logu = self.target_density(target).map(f64::ln);
        let p = self.iddbar(&logu);
        Ok(p.map(|v| 1.0 - v))
    }

    /// Normalized Ricci potential: f = −log(1+P(φ)) − φ + c with
    /// (1/V) ∫ e^f ω_φ = 1.
    pub fn ricci_potential(&self, target: &KahlerPotentialS2) -> Result<ScalarField> {
        if target.margin <= 0.0 {
            return Err(KefError::Domain(format!(
                "ricci_potential: target not Kähler (margin {:.3e})",
                target.margin
            )));
        }
        let u = self.target_density(target);
        let raw: Vec<f64> = u
            .values
            .iter()
            .zip(&target.phi.values)
            .map(|(uu, ph)| -uu.ln() - ph)
            .collect();
        // c = −log((1/V) ∫ e^{raw} ω_φ)
        let moment = crate::util::pairwise_sum_fn(raw.len(), &mut |i| {
            self.grid.w_omega[i] * raw[i].exp() * u.values[i]
        }) / V_SPHERE;
        let c = -moment.ln();
        Ok(ScalarField::from_values(
            &self.grid,
            raw.iter().map(|v| v + c).collect(),
        ))
    }

    /// Deterministic random band-limited field with (1+l)^{−2} coefficient
    /// decay; with `require_kahler` the field is halved until margin > 0.05.
    pub fn random_band_limited(
        &self,
        seed: u64,
        l_cut: usize,
        require_kahler: bool,
    ) -> ScalarField {
        assert!(l_cut <= self.grid.l_max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![0.0; self.grid.n_coeffs()];
        for l in 0..=l_cut {
            let decay = (1.0 + l as f64).powi(-2);
            for m in -(l as i64)..=(l as i64) {
                coeffs[coeff_index(l, m)] = decay * rng.gen_range(-1.0..1.0);
            }
        }
        coeffs[0] = 0.0; // mean zero
        let mut f = ScalarField::from_coeffs(&self.grid, coeffs);
        if require_kahler {
            for _ in 0..60 {
                let margin = 1.0 + self.iddbar(&f).min_value();
                if margin > 0.05 {
                    break;
                }
                f = ScalarField::lincomb(&[(0.5, &f)]);
            }
        }
        f
    }

    /// The form ω_φ = ω + i∂∂̄φ of a global potential.
    pub fn form_from_potential(&self, phi: &ScalarField) -> SphereForm {
        SphereForm {
            dens: self.iddbar(phi).add_constant(1.0),
            pot: phi.clone(),
        }
    }

    /// Ric α = ω − i∂∂̄ log(α/ω) for a positive form, with the consistent
    /// global potential −log(dens) projected to the spectral band and
    /// canonicalised to mean zero.
    pub fn ricci_of_form(&self, f: &SphereForm) -> Result<SphereForm> {
        let margin = f.dens.min_value();
        if margin <= 0.0 {
            return Err(KefError::Domain(format!(
                "ricci: form not positive (min density {margin:.3e})"
            )));
        }
        let pot = ScalarField::lincomb(&[(-1.0, &f.dens.map(f64::ln))]).demean();
        Ok(self.form_from_potential(&pot))
    }

    /// ψ with Ric ω_ψ = ω_φ (n = 1): ω_ψ = e^{−φ+c} ω with c fixing the
    /// volume, ψ recovered by a mean-zero Poisson solve. Direct check:
    /// Ric ω_ψ = ω − i∂∂̄ log(ω_ψ/ω) = ω + i∂∂̄φ.
    pub fn prescribe_ricci(&self, phi: &ScalarField) -> Result<KahlerPotentialS2> {
        let raw = phi.map(|v| (-v).exp());
        let c = -(raw.integrate_omega() / V_SPHERE).ln();
        let dens = raw.map(|v| v * c.exp());
        let rho = dens.add_constant(-1.0);
        let excess = rho.integrate_omega() / V_SPHERE;
        let psi = self.poisson_solve(&rho.add_constant(-excess))?;
        Ok(self.kahler_potential(psi.demean()))
    }

    /// Pullback potential: φ' with ω_{φ'} = m*ω_φ, via density transport and
    /// Poisson recovery; mean zero.
    pub fn mobius_pullback(
        &self,
        m: &MobiusMap,
        source: &KahlerPotentialS2,
    ) -> Result<KahlerPotentialS2> {
        let dens = self.target_density(source);
        let g = &self.grid;
        let mut new_dens = vec![0.0; g.n_nodes()];
        for i in 0..g.n_lat {
            let mu = g.mu[i];
            // Half-angle homogeneous coordinates: (z1, z0), |z1|²+|z0|² = 1.
            let s_half = ((1.0 - mu) / 2.0).sqrt(); // sin(θ/2)
            let c_half = ((1.0 + mu) / 2.0).sqrt(); // cos(θ/2)
            for j in 0..g.n_lon {
                let lam = g.lon[j];
                let z1 = Complex::new(s_half * lam.cos(), s_half * lam.sin());
                let z0 = Complex::new(c_half, 0.0);
                let w1 = m.a * z1 + m.b * z0;
                let w0 = m.c * z1 + m.d * z0;
                let n = w1.norm_sqr() + w0.norm_sqr();
                // conformal density of m*ω relative to ω
                let q = 1.0 / (n * n);
                let mu_p = (w0.norm_sqr() - w1.norm_sqr()) / n;
                let lam_p = (w1 * w0.conj()).arg();
                new_dens[i * g.n_lon + j] = dens.evaluate_at(mu_p, lam_p) * q;
            }
        }
        let dens_f = ScalarField::from_values(g, new_dens);
        let rho = dens_f.add_constant(-1.0);
        // Total mass V is preserved by pullback up to quadrature error; the
        // Poisson solve requires it to vanish to 1e−9, re-centre exactly.
        let excess = rho.integrate_omega() / V_SPHERE;
        let phi = self.poisson_solve(&rho.add_constant(-excess))?;
        Ok(self.kahler_potential(phi.demean()))
    }
}

impl crate::model::KahlerModel for SphereModel {
    type Form = SphereForm;

    fn dim(&self) -> usize {
        1
    }

    fn volume(&self) -> f64 {
        V_SPHERE
    }

    fn n_points(&self) -> usize {
        self.grid.n_nodes()
    }

    fn base_form(&self) -> SphereForm {
        self.form_from_potential(&ScalarField::zero(&self.grid))
    }

    fn form_lincomb(&self, parts: &[(f64, &SphereForm)]) -> SphereForm {
        SphereForm::lincomb(parts)
    }

    fn rel_pot(&self, f: &SphereForm) -> Vec<f64> {
        f.pot.values.clone()
    }

    fn kahler_margin(&self, f: &SphereForm) -> f64 {
        f.dens.min_value()
    }

    fn ricci_form(&self, f: &SphereForm) -> Result<SphereForm> {
        self.ricci_of_form(f)
    }

    fn weighted_wedge(&self, h: Option<&[f64]>, forms: &[&SphereForm]) -> f64 {
        debug_assert_eq!(forms.len(), 1);
        let dens = &forms[0].dens.values;
        let w = &self.grid.w_omega;
        crate::util::pairwise_sum_fn(dens.len(), &mut |i| match h {
            Some(h) => w[i] * h[i] * dens[i],
            None => w[i] * dens[i],
        })
    }

    /// ∫ i∂φ∧∂̄φ = −∫ φ P(φ) ω, evaluated as a Parseval sum: exact for the
    /// band-limited potentials the model produces.
    fn dirichlet_direct(
        &self,
        a: &SphereForm,
        b: &SphereForm,
        rest: &[&SphereForm],
    ) -> Result<f64> {
        debug_assert!(rest.is_empty());
        let phi = ScalarField::lincomb(&[(1.0, &b.pot), (-1.0, &a.pot)]);
        Ok(-phi.parseval_inner(&self.iddbar(&phi)))
    }

    fn laplace_weighted_wedge(
        &self,
        h: Option<&[f64]>,
        dpsi: &SphereForm,
        target: &SphereForm,
        rest: &[&SphereForm],
    ) -> Result<f64> {
        debug_assert_eq!(rest.len(), 1);
        let tmin = target.dens.min_value();
        if tmin <= 0.0 {
            return Err(KefError::Domain(format!(
                "laplace_weighted_wedge: target not Kähler (min density {tmin:.3e})"
            )));
        }
        let num = &dpsi.dens.values;
        let den = &target.dens.values;
        let g = &rest[0].dens.values;
        let w = &self.grid.w_omega;
        Ok(crate::util::pairwise_sum_fn(num.len(), &mut |i| {
            let lap = num[i] / den[i];
            match h {
                Some(h) => w[i] * h[i] * lap * g[i],
                None => w[i] * lap * g[i],
            }
        }))
    }
}

/// An element of PSL(2,C) acting on CP¹, z ↦ (az+b)/(cz+d), ad−bc = 1.
#[derive(Clone, Copy, Debug)]
pub struct MobiusMap {
    pub a: Complex<f64>,
    pub b: Complex<f64>,
    pub c: Complex<f64>,
    pub d: Complex<f64>,
}

impl MobiusMap {
    pub fn identity() -> MobiusMap {
        MobiusMap {
            a: Complex::new(1.0, 0.0),
            b: Complex::new(0.0, 0.0),
            c: Complex::new(0.0, 0.0),
            d: Complex::new(1.0, 0.0),
        }
    }

    pub fn new(
        a: Complex<f64>,
        b: Complex<f64>,
        c: Complex<f64>,
        d: Complex<f64>,
    ) -> Result<MobiusMap> {
        let det = a * d - b * c;
        if (det - Complex::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(KefError::Config(format!(
                "Möbius matrix determinant {det} != 1"
            )));
        }
        Ok(MobiusMap { a, b, c, d })
    }

    /// Dilation z ↦ λ z (normalised to determinant 1).
    pub fn dilation(lambda: f64) -> MobiusMap {
        let s = lambda.sqrt();
        MobiusMap {
            a: Complex::new(s, 0.0),
            b: Complex::new(0.0, 0.0),
            c: Complex::new(0.0, 0.0),
            d: Complex::new(1.0 / s, 0.0),
        }
    }

    /// Rotation about the polar axis by angle t.
    pub fn rotation_z(t: f64) -> MobiusMap {
        let e = Complex::new(0.0, t / 2.0).exp();
        MobiusMap {
            a: e,
            b: Complex::new(0.0, 0.0),
            c: Complex::new(0.0, 0.0),
            d: e.inv(),
        }
    }

    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// exp(t·X) for a traceless 2×2 generator X (closed form: X² = −det X · I).
    pub fn exp_generator(x: &Sl2Generator, t: f64) -> MobiusMap {
        let m = [
            x.m[0] * Complex::new(t, 0.0),
            x.m[1] * Complex::new(t, 0.0),
            x.m[2] * Complex::new(t, 0.0),
            x.m[3] * Complex::new(t, 0.0),
        ];
        let det = m[0] * m[3] - m[1] * m[2];
        let s = (-det).sqrt();
        // cosh(s) I + sinh(s)/s · A, with the s → 0 limit handled by series.
        let (ch, shs) = if s.norm() < 1e-8 {
            let s2 = s * s;
            (
                Complex::new(1.0, 0.0) + s2 * 0.5,
                Complex::new(1.0, 0.0) + s2 / 6.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        MobiusMap {
            a: ch + shs * m[0],
            b: shs * m[1],
            c: shs * m[2],
            d: ch + shs * m[3],
        }
    }
}

/// A traceless complex 2×2 matrix: a holomorphic vector field on CP¹.
#[derive(Clone, Copy, Debug)]
pub struct Sl2Generator {
    /// Row-major [a, b, c, d] with a + d = 0.
    pub m: [Complex<f64>; 4],
}

impl Sl2Generator {
    pub fn zero() -> Sl2Generator {
        Sl2Generator {
            m: [Complex::new(0.0, 0.0); 4],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|c| c.norm() == 0.0)
    }

    /// Multiply by i: the J-rotated companion field used by the Futaki
    /// character's imaginary part.
    pub fn j_rotated(&self) -> Sl2Generator {
        let i = Complex::new(0.0, 1.0);
        Sl2Generator {
            m: [self.m[0] * i, self.m[1] * i, self.m[2] * i, self.m[3] * i],
        }
    }

    /// The standard 6-element generator set: 3 rotations (su(2)) and
    /// 3 dilation-type fields (i·su(2)).
    pub fn standard_set() -> Vec<Sl2Generator> {
        let o = Complex::new(0.0, 0.0);
        let one = Complex::new(1.0, 0.0);
        let i = Complex::new(0.0, 1.0);
        let h = 0.5;
        let pauli: [[Complex<f64>; 4]; 3] = [
            [o, one, one, o],      // σ₁
            [o, -i, i, o],         // σ₂
            [one, o, o, -one],     // σ₃
        ];
        let mut out = Vec::new();
        for p in &pauli {
            // rotation: (i/2)σ
            out.push(Sl2Generator {
                m: [p[0] * i * h, p[1] * i * h, p[2] * i * h, p[3] * i * h],
            });
        }
        for p in &pauli {
            // dilation-type: (1/2)σ
            out.push(Sl2Generator {
                m: [p[0] * h, p[1] * h, p[2] * h, p[3] * h],
            });
        }
        out
    }
}
