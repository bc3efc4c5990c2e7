//! Identity suite: per random Kähler pair (plus a third form for the
//! cocycle checks) every closed-form identity of the energy family is
//! evaluated by two genuinely independent routes and the residual recorded:
//!
//! * `ikjk`      — I_k = J − J_k and the exact specializations (I_0 = 0,
//!   I_n = J, J_n = 0, I_{n−1} = ((n+1)J − I)/n), comparing the two
//!   distinct closed coefficient forms.
//! * `dtlemma`   — F = E_0 + (1/V)∫f_β βⁿ − (1/V)∫f_α αⁿ, with F computed
//!   from its literal definition (log of the explicit exponential moment)
//!   against the telescoped Ding-moment form used by the library.
//! * `fzeroen`   — E_n = F(Ric α, Ric β) against the path-integral
//!   definition of E_n.
//! * `bmprop`    — E_n = E_0 + J(β, Ric β) − J(α, Ric α) with E_n and E_0
//!   from their independent closed routes.
//! * `bmrprop`   — mutual residual of the interpolated closed forms of E_k
//!   over all k and all l ∈ {0,…,k+1}.
//! * `cocycle`   — F and E_k cocycle defects on the (α,β,γ) triple.
//! * `jk_path`   — path-route J_k against the closed route.
//! * `ekdiff`    — the derivative identity
//!   d/dt((k+1)E_k − kE_{k−1}) = −(1/V)∫φ̇ ω_tⁿ − d/dt((1/V)∫f_t Ric_tᵏ ∧ ω_t^{n−k}),
//!   finite-differenced with a fourth-order stencil along the affine path.
//!   With the per-t normalization (1/V)∫e^{f_t}ω_tⁿ = 1 the Ricci potential
//!   drifts by the constant rate c(t) = (1/V)∫φ̇ e^{f_t}ω_tⁿ, which the
//!   f-moment term picks up with unit weight; the residual accounts for it.
//!
//! Toric cases additionally run the mixed-discriminant property test:
//! inclusion–exclusion polarization against a characteristic-polynomial
//! oracle (coefficients of det(A + tB) interpolated at integer nodes).

use std::time::Instant;

use kef_core::functionals::moments::pair_moments;
use kef_core::functionals::paths::{e_k_path, j_k_path, PathSpec};
use kef_core::functionals::{closed_energies, f_moment, form_cache, FormCache};
use kef_core::model::KahlerModel;
use kef_core::toric::model::{mixed_discriminant, sym_det, ToricModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CaseRecord, ModelSelector, Result, SuiteConfig, SuiteError, SuiteReport};

/// Relative scale for a residual between routes reporting `vals`.
fn scale(vals: &[f64]) -> f64 {
    vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()))
}

/// All identity residuals of one (α, β, γ) triple, recorded into `rec`
/// against tolerance `tol`.
fn identity_residuals<M: KahlerModel>(
    m: &M,
    ca: &FormCache<M::Form>,
    cb: &FormCache<M::Form>,
    cc: &FormCache<M::Form>,
    tol: f64,
    rec: &mut CaseRecord,
) -> kef_core::error::Result<()> {
    let n = m.dim();
    let v = m.volume();
    let (a, b) = (&ca.form, &cb.form);
    let mom = pair_moments(m, a, b);
    let (i, j) = (mom.aubin_i(), mom.aubin_j());
    rec.value("aubin_i", i);
    rec.value("aubin_j", j);

    // ikjk: the J_k closed form vs the J − I_k rearrangement, plus the
    // exact specializations
    let mut ikjk = 0.0_f64;
    for k in 0..=n {
        ikjk = ikjk.max((mom.j_k(k) - (j - mom.i_k(k))).abs());
    }
    ikjk = ikjk
        .max(mom.i_k(0).abs())
        .max((mom.i_k(n) - j).abs())
        .max(mom.j_k(n).abs());
    if n >= 1 {
        ikjk = ikjk.max((mom.i_k(n - 1) - ((n as f64 + 1.0) * j - i) / n as f64).abs());
    }
    rec.residual("ikjk", ikjk / scale(&[i, j]), tol);

    let closed = closed_energies(m, ca, cb);

    // dtlemma: F from its definition J − (1/V)∫φ αⁿ − log((1/V)∫e^{f_α−φ} αⁿ)
    let pa = m.rel_pot(a);
    let pb = m.rel_pot(b);
    let weight: Vec<f64> = ca
        .f_pot
        .iter()
        .zip(pb.iter().zip(&pa))
        .map(|(f, (x, y))| (f - (x - y)).exp())
        .collect();
    let aforms: Vec<&M::Form> = (0..n).map(|_| a).collect();
    let log_moment = (m.weighted_wedge(Some(&weight), &aforms) / v).ln();
    let f_def = j - mom.phi_mean_base() - log_moment;
    let dt_rhs = closed.e0 + cb.f_mean - ca.f_mean;
    rec.value("ding_f", closed.f);
    rec.residual("dtlemma", (f_def - dt_rhs) / scale(&[closed.f]), tol);

    // fzeroen: the Ding form of E_n vs the path definition
    let en_path = e_k_path(m, a, b, n, &PathSpec::affine())?;
    rec.residual("fzeroen", (closed.en - en_path) / scale(&[closed.en]), tol);

    // bmprop: E_n = E_0 + J(β, Ric β) − J(α, Ric α)
    let ja = pair_moments(m, a, &ca.ricci).aubin_j();
    let jb = pair_moments(m, b, &cb.ricci).aubin_j();
    rec.residual(
        "bmprop",
        (closed.en - closed.e0 - (jb - ja)) / scale(&[closed.e0, closed.en]),
        tol,
    );

    // bmrprop: mutual residual of the interpolated closed forms
    let mut bmr = 0.0_f64;
    let mut emax = 1.0_f64;
    for k in 0..=n {
        let reference = closed.e_k(k, 0);
        emax = emax.max(reference.abs());
        for l in 1..=k + 1 {
            bmr = bmr.max((closed.e_k(k, l) - reference).abs());
        }
    }
    rec.residual("bmrprop", bmr / emax, tol);

    // cocycle on the triple
    let bc = closed_energies(m, cb, cc);
    let ac = closed_energies(m, ca, cc);
    let mut coc = (closed.f + bc.f - ac.f).abs();
    for k in 0..=n {
        coc = coc.max((closed.e_k_via_e0(k) + bc.e_k_via_e0(k) - ac.e_k_via_e0(k)).abs());
    }
    rec.residual("cocycle", coc / emax, tol);

    // path-vs-closed J_k
    let mut jkp = 0.0_f64;
    for k in 0..=n {
        jkp = jkp.max((j_k_path(m, a, b, k, &PathSpec::affine())? - mom.j_k(k)).abs());
    }
    rec.residual("jk_path", jkp / scale(&[j]), tol);

    // ekdiff: fourth-order finite differences along the affine path at t₀
    let t0 = 0.45;
    let h = 1e-3;
    let phidot: Vec<f64> = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
    let cache_at = |t: f64| -> kef_core::error::Result<FormCache<M::Form>> {
        form_cache(m, &m.form_lincomb(&[(1.0 - t, a), (t, b)]))
    };
    let stencil = [
        (t0 - 2.0 * h, 1.0),
        (t0 - h, -8.0),
        (t0 + h, 8.0),
        (t0 + 2.0 * h, -1.0),
    ];
    let caches: Vec<FormCache<M::Form>> = stencil
        .iter()
        .map(|(t, _)| cache_at(*t))
        .collect::<kef_core::error::Result<Vec<_>>>()?;
    let c0 = cache_at(t0)?;
    let forms0: Vec<&M::Form> = (0..n).map(|_| &c0.form).collect();
    let rhs_exact = -m.weighted_wedge(Some(&phidot), &forms0) / v;
    // The normalization (1/V)∫e^{f_t}ω_tⁿ = 1 makes f_t drift by the
    // constant rate c(t) = (1/V)∫φ̇ e^{f_t}ω_tⁿ, which the f-moment term
    // picks up with unit weight (μ_k = 1).
    let drift_w: Vec<f64> = c0
        .f_pot
        .iter()
        .zip(&phidot)
        .map(|(f, p)| p * f.exp())
        .collect();
    let f_drift = m.weighted_wedge(Some(&drift_w), &forms0) / v;
    let mut ekdiff = 0.0_f64;
    for k in 1..=n {
        let mut lhs = 0.0;
        for ((_, w), ct) in stencil.iter().zip(&caches) {
            let e = closed_energies(m, ca, ct);
            let g = (k as f64 + 1.0) * e.e_k_via_e0(k) - k as f64 * e.e_k_via_e0(k - 1)
                + f_moment(m, ct, k);
            lhs += w * g / (12.0 * h);
        }
        ekdiff = ekdiff.max((lhs - rhs_exact - f_drift).abs());
    }
    rec.residual("ekdiff", ekdiff / scale(&[rhs_exact]), tol);
    Ok(())
}

fn sphere_case(m: &kef_core::sphere::model::SphereModel, seed: u64, tol: f64) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("pair-{seed}"));
    rec.input("seed", seed as f64);
    let forms: Vec<_> = (0..3)
        .map(|j| m.form_from_potential(&m.random_band_limited(seed * 3 + j, 10, true)))
        .collect();
    let caches: Vec<_> = forms
        .iter()
        .map(|f| form_cache(m, f))
        .collect::<kef_core::error::Result<Vec<_>>>()
        .expect("sphere cache");
    if let Err(e) = identity_residuals(m, &caches[0], &caches[1], &caches[2], tol, &mut rec) {
        rec.fail(format!("evaluation error: {e}"));
    }
    rec
}

/// Balanced ± pairs of translated log-terms: Kähler, class-preserving.
pub fn toric_random_form(
    m: &ToricModel,
    seed: u64,
    amp: f64,
) -> kef_core::toric::model::ToricForm {
    use kef_core::toric::function::Term;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.n();
    let mut terms = Vec::new();
    for _ in 0..2 {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let a = amp * rng.gen_range(0.5..1.0);
        terms.push(Term::LogSumExp {
            amp: a,
            center: c.clone(),
        });
        terms.push(Term::LogSumExp {
            amp: -a,
            center: c.iter().map(|v| -v).collect(),
        });
    }
    m.form_from_function(&m.potential_with_terms(&terms))
}

/// Mixed discriminant D(A^{n−k}, B^k) by the characteristic-polynomial
/// oracle: interpolate det(A + tB) = Σ_k C(n,k) D(A^{n−k},B^k) tᵏ at the
/// integer nodes t = 0..=n and compare each coefficient against the
/// polarization route.
fn mixed_discriminant_residual(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let mut rand_sym = |d: f64| -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-0.3..0.3);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
            m[i * n + i] += d;
        }
        m
    };
    let a = rand_sym(1.0);
    let b = rand_sym(1.0);
    // Newton-free exact solve of the (n+1)-point Vandermonde system at
    // t = 0..n via Lagrange coefficient expansion
    let dets: Vec<f64> = (0..=n)
        .map(|t| {
            let s: Vec<f64> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| x + t as f64 * y)
                .collect();
            sym_det(&s, n)
        })
        .collect();
    let mut coeffs = vec![0.0_f64; n + 1];
    for (i, d) in dets.iter().enumerate() {
        // Lagrange basis polynomial through node i, expanded in monomials
        let mut poly = vec![0.0_f64; n + 1];
        poly[0] = 1.0;
        let mut denom = 1.0;
        let mut deg = 0;
        for t in 0..=n {
            if t == i {
                continue;
            }
            denom *= (i as f64) - t as f64;
            for p in (0..=deg).rev() {
                poly[p + 1] += poly[p];
                poly[p] *= -(t as f64);
            }
            deg += 1;
        }
        for (c, p) in coeffs.iter_mut().zip(&poly) {
            *c += d / denom * p;
        }
    }
    let binom = |n: usize, k: usize| -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        v
    };
    let mut res = 0.0_f64;
    for k in 0..=n {
        let mut mats: Vec<&[f64]> = Vec::with_capacity(n);
        for _ in 0..n - k {
            mats.push(&a);
        }
        for _ in 0..k {
            mats.push(&b);
        }
        let polar = mixed_discriminant(&mats, n);
        res = res.max((coeffs[k] - binom(n, k) * polar).abs());
    }
    res
}

fn toric_case(m: &ToricModel, seed: u64, tol: f64, mixed_tol: f64) -> CaseRecord {
    let mut rec = CaseRecord::new(format!("pair-{seed}"));
    rec.input("seed", seed as f64);
    let amp = 0.05;
    rec.input("amplitude", amp);
    let forms: Vec<_> = (0..3)
        .map(|j| toric_random_form(m, seed * 3 + j, amp))
        .collect();
    match forms
        .iter()
        .map(|f| form_cache(m, f))
        .collect::<kef_core::error::Result<Vec<_>>>()
    {
        Ok(caches) => {
            if let Err(e) =
                identity_residuals(m, &caches[0], &caches[1], &caches[2], tol, &mut rec)
            {
                rec.fail(format!("evaluation error: {e}"));
            }
        }
        Err(e) => rec.fail(format!("cache error: {e}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d69_7865_6464);
    let mut mres = 0.0_f64;
    for _ in 0..5 {
        mres = mres.max(mixed_discriminant_residual(&mut rng, m.n()));
    }
    rec.residual("mixed_discriminant", mres, mixed_tol);
    rec
}

pub fn identity_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let started = Instant::now();
    let cases = match config.model {
        ModelSelector::Sphere { l } => {
            let m = kef_core::sphere::model::SphereModel::new(l)?;
            let tol = config.tol("sphere_identity");
            crate::run_cases(config, config.samples, |i| {
                sphere_case(&m, config.seed + i as u64, tol)
            })?
        }
        ModelSelector::Toric {
            n,
            lbox,
            points_per_axis,
        } => {
            let m = ToricModel::new(n, lbox, points_per_axis)
                .map_err(SuiteError::Model)?;
            let tol = config.tol("toric_identity");
            let mixed_tol = config.tol("mixed_discriminant");
            crate::run_cases(config, config.samples, |i| {
                toric_case(&m, config.seed + i as u64, tol, mixed_tol)
            })?
        }
    };
    let report = SuiteReport::assemble(config, cases, started);
    crate::io::maybe_write(&report)?;
    Ok(report)
}
