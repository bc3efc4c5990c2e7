//! Oracles for the sphere model: quadrature exactness, harmonic
//! normalization, the measured λ₁ convention, Poisson inversion, Ricci
//! equivariance under Möbius pullback.

use std::f64::consts::PI;

use kef_core::sphere::{
    coeff_index, KahlerPotentialS2, MobiusMap, ScalarField, SphereModel, V_SPHERE,
};

fn model(l: usize) -> SphereModel {
    SphereModel::new(l).unwrap()
}

fn harmonic(m: &SphereModel, l: usize, mm: i64) -> ScalarField {
    let mut coeffs = vec![0.0; m.grid.n_coeffs()];
    coeffs[coeff_index(l, mm)] = 1.0;
    ScalarField::from_coeffs(&m.grid, coeffs)
}

#[test]
fn quadrature_of_constant_is_volume() {
    for l in [8, 48] {
        let m = model(l);
        let one = ScalarField::constant(&m.grid, 1.0);
        assert!(
            (one.integrate_omega() - V_SPHERE).abs() < 1e-12,
            "L={l}: ∫1·ω = {}",
            one.integrate_omega()
        );
    }
}

#[test]
fn harmonics_integrate_to_zero() {
    let m = model(8);
    let y32 = harmonic(&m, 3, 2);
    assert!(y32.integrate_omega().abs() < 1e-12);
}

#[test]
fn harmonic_normalization_matches_analytic_value() {
    // ∫ (Y_10)² ω = (V/4π) ∫ (Y_10)² dA = V/4π for an orthonormal basis.
    let m = model(48);
    let y10 = harmonic(&m, 1, 0);
    let sq = y10.pointwise_mul(&y10);
    let expected = V_SPHERE / (4.0 * PI);
    assert!((sq.integrate_omega() - expected).abs() < 1e-12);
}

#[test]
fn grid_spectral_round_trip() {
    let m = model(24);
    let f = m.random_band_limited(3, 24, false);
    let back = ScalarField::from_values(&m.grid, f.values.clone());
    let max_c: f64 = f
        .coeffs
        .iter()
        .zip(&back.coeffs)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    let scale = f.sup_norm();
    assert!(max_c / scale < 1e-11, "round-trip drift {max_c:.3e}");
    assert!(back.projection_loss / scale < 1e-11);
}

#[test]
fn parseval_matches_quadrature() {
    let m = model(32);
    let f = m.random_band_limited(11, 16, false);
    let g = m.random_band_limited(12, 16, false);
    let quad = f.pointwise_mul(&g).integrate_omega();
    let spectral = f.parseval_inner(&g);
    assert!((quad - spectral).abs() < 1e-11);
}

/// Pin the degree-1 eigenvalue of P by a finite-difference stencil on the
/// stereographic chart: P(h) = (1/2)Δ_S² h = (1/8)(1+|z|²)²(h_xx + h_yy).
/// This measures the λ₁ = 1 convention rather than asserting it.
#[test]
fn lambda_1_measured_by_stereographic_stencil() {
    let y10 = |x: f64, y: f64| {
        let r2 = x * x + y * y;
        (3.0 / (4.0 * PI)).sqrt() * (1.0 - r2) / (1.0 + r2)
    };
    let h = 1e-4;
    for (x, y) in [(0.3, -0.2), (0.7, 0.4), (-1.1, 0.5)] {
        let lap = (y10(x + h, y) + y10(x - h, y) + y10(x, y + h) + y10(x, y - h)
            - 4.0 * y10(x, y))
            / (h * h);
        let p_fd = (1.0 + x * x + y * y).powi(2) * lap / 8.0;
        let expected = -kef_core::sphere::lambda_l(1) * y10(x, y);
        assert!(
            (p_fd - expected).abs() < 1e-5,
            "FD {p_fd} vs spectral {expected}"
        );
    }
}

#[test]
fn iddbar_is_diagonal_with_measured_eigenvalue() {
    let m = model(16);
    let y10 = harmonic(&m, 1, 0);
    let d = m.iddbar(&y10);
    for (i, c) in d.coeffs.iter().enumerate() {
        let expect = if i == coeff_index(1, 0) {
            -kef_core::sphere::lambda_l(1)
        } else {
            0.0
        };
        assert!((c - expect).abs() < 1e-10, "coeff {i}: {c}");
    }
}

#[test]
fn iddbar_exactness_and_self_adjointness() {
    let m = model(24);
    for seed in 0..20 {
        let f = m.random_band_limited(100 + seed, 12, false);
        assert!(m.iddbar(&f).integrate_omega().abs() < 1e-10);
    }
    // self-adjoint + negative semidefinite in the ω-inner product
    let f = m.random_band_limited(1, 12, false).demean();
    let g = m.random_band_limited(2, 12, false).demean();
    let a = m.iddbar(&f).pointwise_mul(&g).integrate_omega();
    let b = m.iddbar(&g).pointwise_mul(&f).integrate_omega();
    assert!((a - b).abs() < 1e-10);
    let q = m.iddbar(&f).pointwise_mul(&f).integrate_omega();
    assert!(q <= 1e-12);
}

#[test]
fn poisson_inverts_iddbar() {
    let m = model(32);
    let phi = m.random_band_limited(7, 20, false).demean();
    let rho = m.iddbar(&phi);
    let psi = m.poisson_solve(&rho).unwrap();
    let drift: f64 = phi
        .coeffs
        .iter()
        .zip(&psi.coeffs)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(drift < 1e-10);
    // Applying iddbar to the output is the residual oracle.
    let res: f64 = m
        .iddbar(&psi)
        .values
        .iter()
        .zip(&rho.values)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(res < 1e-10);
    // nonzero mass must be rejected
    let bad = ScalarField::constant(&m.grid, 0.1);
    assert!(m.poisson_solve(&bad).is_err());
}

#[test]
fn ricci_of_base_is_base() {
    let m = model(16);
    let kp = m.kahler_potential(ScalarField::zero(&m.grid));
    let r = m.ricci(&kp).unwrap();
    for v in &r.values {
        assert!((v - 1.0).abs() < 1e-12);
    }
    let f = m.ricci_potential(&kp).unwrap();
    assert!(f.sup_norm() < 1e-12);
}

#[test]
fn ricci_mass_is_volume() {
    let m = model(48);
    let phi = m.random_band_limited(42, 12, true);
    let kp = m.kahler_potential(phi);
    assert!(kp.margin > 0.0);
    let r = m.ricci(&kp).unwrap();
    assert!((r.integrate_omega() - V_SPHERE).abs() < 1e-9);
}

#[test]
fn ricci_potential_contract() {
    let m = model(48);
    let phi = m.random_band_limited(5, 12, true);
    let kp = m.kahler_potential(phi);
    let f = m.ricci_potential(&kp).unwrap();
    // normalization (1/V)∫ e^f ω_φ = 1
    let u = m.target_density(&kp);
    let mom = u
        .values
        .iter()
        .zip(&f.values)
        .zip(&m.grid.w_omega)
        .map(|((uu, ff), w)| w * ff.exp() * uu)
        .sum::<f64>()
        / V_SPHERE;
    assert!((mom - 1.0).abs() < 1e-11);
    // defining equation i∂∂̄f = Ric ω_φ − ω_φ, with Ric from the independent
    // ricci operation
    let lhs = m.iddbar(&f);
    let r = m.ricci(&kp).unwrap();
    let res: f64 = lhs
        .values
        .iter()
        .zip(r.values.iter().zip(&u.values))
        .fold(0.0, |a, (l, (rr, uu))| a.max((l - (rr - uu)).abs()));
    assert!(res < 1e-9, "defining-equation residual {res:.3e}");
    // mean bound (1/V)∫ f ω_φ ≤ 0
    let mean_f = f
        .values
        .iter()
        .zip(u.values.iter().zip(&m.grid.w_omega))
        .map(|(ff, (uu, w))| w * ff * uu)
        .sum::<f64>()
        / V_SPHERE;
    assert!(mean_f <= 1e-12);
}

#[test]
fn trace_laplacian_contract() {
    let m = model(32);
    let phi = m.random_band_limited(9, 10, true);
    let kp = m.kahler_potential(phi);
    let h = m.random_band_limited(10, 10, false);
    let lap = m.trace_laplacian(&h, &kp).unwrap();
    // ∫ Δ_φ h ω_φ = 0
    let u = m.target_density(&kp);
    let int = lap.pointwise_mul(&u).integrate_omega();
    assert!(int.abs() < 1e-10);
    // φ = 0 specialisation: Δ_ω h = P(h)
    let base = m.kahler_potential(ScalarField::zero(&m.grid));
    let l0 = m.trace_laplacian(&h, &base).unwrap();
    let p = m.iddbar(&h);
    let d: f64 = l0
        .values
        .iter()
        .zip(&p.values)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(d < 1e-10);
}

#[test]
fn mobius_identity_and_rotation_are_trivial() {
    let m = model(32);
    let phi = m.random_band_limited(21, 10, true);
    let kp = m.kahler_potential(phi.demean());
    let pulled = m.mobius_pullback(&MobiusMap::identity(), &kp).unwrap();
    let d: f64 = pulled
        .phi
        .values
        .iter()
        .zip(&kp.phi.values)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(d < 1e-9, "identity pullback drift {d:.3e}");

    let rot = MobiusMap::rotation_z(0.7);
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    let r = m.mobius_pullback(&rot, &zero).unwrap();
    assert!(r.phi.sup_norm() < 1e-9);
}

#[test]
fn mobius_dilation_preserves_ke_condition() {
    // Ric ω_{φ_m} = ω_{φ_m} pointwise: the appendix-closure check that pins
    // every constant in the P/Ricci conventions simultaneously.
    let m = model(48);
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    let dil = MobiusMap::dilation(1.5);
    let kp = m.mobius_pullback(&dil, &zero).unwrap();
    assert!(kp.margin > 0.0);
    let r = m.ricci(&kp).unwrap();
    let u = m.target_density(&kp);
    let res: f64 = r
        .values
        .iter()
        .zip(&u.values)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(res < 1e-8, "KE residual after pullback {res:.3e}");
}

#[test]
fn ricci_commutes_with_pullback() {
    let m = model(48);
    // Moderate amplitude: the residual is spectral-truncation noise amplified
    // by λ_L, so wild densities degrade it (measured: 1e−3 at amplitude 0.5,
    // 1e−10 at 0.05).
    let phi = m.random_band_limited(17, 8, true);
    let kp = m.kahler_potential(ScalarField::lincomb(&[(0.08, &phi)]).demean());
    let map = MobiusMap::dilation(1.3).compose(&MobiusMap::rotation_z(0.4));

    // pullback ∘ ricci: transport the Ricci density like any (1,1)-form.
    // ricci ∘ pullback:
    let pulled = m.mobius_pullback(&map, &kp).unwrap();
    let ric_of_pulled = m.ricci(&pulled).unwrap();

    // Transport Ric ω_φ by writing it as ω + i∂∂̄(pot) and pulling back the
    // potential construction through the same density-transport route.
    let ric = m.ricci(&kp).unwrap();
    let rho = ric.add_constant(-1.0);
    let pot = m.poisson_solve(&rho.add_constant(-rho.integrate_omega() / V_SPHERE)).unwrap();
    // Pull back as a "form with potential" by pulling its density.
    let fake = KahlerPotentialS2 {
        phi: pot.clone(),
        margin: 1.0 + m.iddbar(&pot).min_value(),
    };
    let pulled_ric = m.mobius_pullback(&map, &fake).unwrap();
    let transported = m.target_density(&pulled_ric);

    let res: f64 = ric_of_pulled
        .values
        .iter()
        .zip(&transported.values)
        .fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(res < 1e-8, "equivariance residual {res:.3e}");
}

#[test]
fn random_fields_are_deterministic_and_kahler() {
    let m = model(24);
    let a = m.random_band_limited(7, 12, true);
    let b = m.random_band_limited(7, 12, true);
    assert_eq!(a.coeffs, b.coeffs);
    let margin = 1.0 + m.iddbar(&a).min_value();
    assert!(margin > 0.05);
    let c = m.random_band_limited(0, 0, false);
    assert!(c.sup_norm() < 1e-15); // L'=0 mean-zero field is identically 0
}

#[test]
fn grid_rejects_small_l() {
    assert!(SphereModel::new(3).is_err());
}
