//! Oracle tests for the functionals layer on the spectral sphere (n = 1):
//! algebraic relations, route cross-validation, cocycle behaviour,
//! variational consistency, inequalities, pullback invariance, Futaki
//! characters and the Moser–Trudinger–Onofri inequality.

use kef_core::functionals::futaki::{futaki_character, FutakiContext};
use kef_core::functionals::membership::{a_k_margin, b_k_margin};
use kef_core::functionals::moments::{aubin_i_direct, pair_moments};
use kef_core::functionals::mto::{mto_classical, mto_generalized};
use kef_core::functionals::paths::{
    aubin_j_path, e_k_integrand, e_k_path, i_minus_j_path, j_k_path, PathSpec,
};
use kef_core::functionals::{closed_energies, ding_f, form_cache, FormCache};
use kef_core::model::KahlerModel;
use kef_core::sphere::field::ScalarField;
use kef_core::sphere::model::{MobiusMap, Sl2Generator, SphereForm, SphereModel};

fn model() -> SphereModel {
    SphereModel::new(32).unwrap()
}

fn random_form(m: &SphereModel, seed: u64) -> SphereForm {
    let phi = m.random_band_limited(seed, 10, true);
    m.form_from_potential(&phi)
}

fn cache(m: &SphereModel, f: &SphereForm) -> FormCache<SphereForm> {
    form_cache(m, f).unwrap()
}

#[test]
fn ke_base_pair_vanishes_identically() {
    let m = model();
    let base = KahlerModel::base_form(&m);
    let cb = cache(&m, &base);
    let mom = pair_moments(&m, &base, &base);
    assert!(mom.aubin_i().abs() < 1e-14);
    assert!(mom.aubin_j().abs() < 1e-14);
    assert!(ding_f(&m, &base, &base).abs() < 1e-12);
    let en = closed_energies(&m, &cb, &cb);
    for k in 0..=1 {
        for l in 0..=k + 1 {
            assert!(en.e_k(k, l).abs() < 1e-12, "E_{k} (l={l}) not zero");
        }
    }
    // the base's Ricci potential is identically zero up to rounding
    assert!(cb.f_mean.abs() < 1e-12);
    assert!(cb.f_pot.iter().fold(0.0_f64, |a, &v| a.max(v.abs())) < 1e-10);
}

#[test]
fn n1_algebraic_relations_are_discretely_exact() {
    let m = model();
    let a = random_form(&m, 11);
    let b = random_form(&m, 12);
    let mom = pair_moments(&m, &a, &b);
    let (i, j) = (mom.aubin_i(), mom.aubin_j());
    assert!(j > 0.0 && i > 0.0);
    assert!((i - 2.0 * j).abs() < 1e-14 * i.abs().max(1.0), "I = 2J at n=1");
    assert!(mom.i_k(0) == 0.0, "I_0 = 0 exactly");
    assert!((mom.i_k(1) - j).abs() < 1e-14, "I_n = J");
    assert!((mom.j_k(0) - j).abs() < 1e-14, "J_0 = J");
    assert!(mom.j_k(1).abs() < 1e-14, "J_n = 0");
    // identity route J_k = J − I_k is a rearrangement of the same sums
    assert!((mom.j_k(1) - (j - mom.i_k(1))).abs() < 1e-14);
}

#[test]
fn aubin_i_direct_route_agrees() {
    let m = model();
    for seed in [3, 4, 5] {
        let a = random_form(&m, 100 + seed);
        let b = random_form(&m, 200 + seed);
        let mom = pair_moments(&m, &a, &b);
        let direct = aubin_i_direct(&m, &a, &b).unwrap();
        assert!(
            (mom.aubin_i() - direct).abs() < 1e-9,
            "I parts vs direct: {} vs {}",
            mom.aubin_i(),
            direct
        );
    }
}

#[test]
fn j_path_routes_agree_and_are_family_invariant() {
    let m = model();
    let a = random_form(&m, 21);
    let b = random_form(&m, 22);
    let j = pair_moments(&m, &a, &b).aubin_j();
    let affine = aubin_j_path(&m, &a, &b, &PathSpec::affine()).unwrap();
    let reparam = aubin_j_path(&m, &a, &b, &PathSpec::Reparam { nodes: 33 }).unwrap();
    let mid = random_form(&m, 23);
    let twoleg = aubin_j_path(&m, &a, &b, &PathSpec::TwoLeg { mid, nodes: 33 }).unwrap();
    assert!((j - affine).abs() < 1e-8, "closed {j} vs affine path {affine}");
    assert!((affine - reparam).abs() < 1e-7);
    assert!((affine - twoleg).abs() < 1e-7);
    // I − J path form (the second-variation route)
    let imj = pair_moments(&m, &a, &b).aubin_i() - j;
    let imj_path = i_minus_j_path(&m, &a, &b, &PathSpec::affine()).unwrap();
    assert!((imj - imj_path).abs() < 1e-8, "I−J {imj} vs path {imj_path}");
    // J_k path routes
    for k in 0..=1 {
        let p = j_k_path(&m, &a, &b, k, &PathSpec::affine()).unwrap();
        assert!((pair_moments(&m, &a, &b).j_k(k) - p).abs() < 1e-8);
    }
}

#[test]
fn e_k_closed_routes_agree_with_path_route() {
    let m = model();
    let a = random_form(&m, 31);
    let b = random_form(&m, 32);
    let (ca, cb) = (cache(&m, &a), cache(&m, &b));
    let en = closed_energies(&m, &ca, &cb);
    for k in 0..=1 {
        let path = e_k_path(&m, &a, &b, k, &PathSpec::affine()).unwrap();
        for l in 0..=k + 1 {
            let closed = en.e_k(k, l);
            assert!(
                (closed - path).abs() < 1e-7,
                "E_{k} route l={l}: closed {closed} vs path {path}"
            );
        }
    }
    // BMProp at n=1: E_1 − E_0 = J(ω_φ,Ric ω_φ) − J(ω,Ric ω)
    let jb = pair_moments(&m, &b, &cb.ricci).aubin_j();
    let ja = pair_moments(&m, &a, &ca.ricci).aubin_j();
    assert!(
        ((en.e_k(1, 0) - en.e_k(0, 0)) - (jb - ja)).abs() < 1e-8,
        "BMProp n=1"
    );
}

#[test]
fn mobius_pullback_target_has_zero_energies() {
    let m = model();
    let base = KahlerModel::base_form(&m);
    let ca = cache(&m, &base);
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    let map = MobiusMap::dilation(1.7).compose(&MobiusMap::rotation_z(0.9));
    let pulled = m.mobius_pullback(&map, &zero).unwrap();
    let b = m.form_from_potential(&pulled.phi);
    let cb = cache(&m, &b);
    let en = closed_energies(&m, &ca, &cb);
    for k in 0..=1 {
        for l in 0..=k + 1 {
            assert!(
                en.e_k(k, l).abs() < 1e-7,
                "E_{k}(ω, pullback) = {} (l={l})",
                en.e_k(k, l)
            );
        }
    }
    assert!(en.f.abs() < 1e-7, "F(ω, KE pullback) = {}", en.f);
}

#[test]
fn f_and_e_k_satisfy_cocycle_i_minus_j_defect_is_controlled() {
    let m = model();
    let a = random_form(&m, 41);
    let b = random_form(&m, 42);
    let c = random_form(&m, 43);
    // F cocycle
    let f_defect = ding_f(&m, &a, &b) + ding_f(&m, &b, &c) - ding_f(&m, &a, &c);
    assert!(f_defect.abs() < 1e-8, "F cocycle defect {f_defect}");
    // E_k cocycle
    let (ca, cb, cc) = (cache(&m, &a), cache(&m, &b), cache(&m, &c));
    let ab = closed_energies(&m, &ca, &cb);
    let bc = closed_energies(&m, &cb, &cc);
    let ac = closed_energies(&m, &ca, &cc);
    for k in 0..=1 {
        let d = ab.e_k_via_e0(k) + bc.e_k_via_e0(k) - ac.e_k_via_e0(k);
        assert!(d.abs() < 1e-7, "E_{k} cocycle defect {d}");
    }
    // I − J fails the cocycle by exactly the controlled defect:
    // (I−J)(a,c) − (I−J)(b,c) − (I−J)(a,b) + (1/V)∫φ_ab (cⁿ − bⁿ) = 0
    let imj = |x: &SphereForm, y: &SphereForm| {
        let mm = pair_moments(&m, x, y);
        mm.aubin_i() - mm.aubin_j()
    };
    let phi_ab: Vec<f64> = {
        let pa = m.rel_pot(&a);
        let pb = m.rel_pot(&b);
        pb.iter().zip(&pa).map(|(x, y)| x - y).collect()
    };
    let corr = (m.weighted_wedge(Some(&phi_ab), &[&c]) - m.weighted_wedge(Some(&phi_ab), &[&b]))
        / m.volume();
    let defect = imj(&a, &c) - imj(&b, &c) - imj(&a, &b) + corr;
    assert!(defect.abs() < 1e-8, "I−J controlled defect {defect}");
}

#[test]
fn variational_finite_differences_match_integrands() {
    let m = model();
    let a = random_form(&m, 51);
    let b = random_form(&m, 52);
    let t0 = 0.45;
    let phidot: Vec<f64> = {
        let pa = m.rel_pot(&a);
        let pb = m.rel_pot(&b);
        pb.iter().zip(&pa).map(|(x, y)| x - y).collect()
    };
    let at = |t: f64| m.form_lincomb(&[(1.0 - t, &a), (t, &b)]);
    let dform = m.form_lincomb(&[(-1.0, &a), (1.0, &b)]);
    let cur = at(t0);
    let ca = cache(&m, &a);

    let check = |name: &str, f: &dyn Fn(f64) -> f64, integrand: f64| {
        let mut res = [0.0; 2];
        for (i, h) in [1e-3, 5e-4].iter().enumerate() {
            let fd = (f(t0 + h) - f(t0 - h)) / (2.0 * h);
            res[i] = (fd - integrand).abs();
            assert!(res[i] < 1e-6, "{name}: FD residual {} at h={h}", res[i]);
        }
        // order ≥ 1.9 unless already at rounding level
        if res[0] > 1e-11 {
            let order = (res[0] / res[1]).log2();
            assert!(order > 1.9, "{name}: FD order {order}");
        }
    };

    use kef_core::functionals::paths::VariationalIntegrands as VI;
    check(
        "J",
        &|t| pair_moments(&m, &a, &at(t)).aubin_j(),
        VI::j(&m, &a, &cur, &phidot),
    );
    check(
        "I-J",
        &|t| {
            let mm = pair_moments(&m, &a, &at(t));
            mm.aubin_i() - mm.aubin_j()
        },
        VI::i_minus_j(&m, &a, &cur, &dform),
    );
    for k in 0..=1 {
        check(
            &format!("I_{k}"),
            &|t| pair_moments(&m, &a, &at(t)).i_k(k),
            VI::i_k(&m, &a, &cur, &phidot, k),
        );
        check(
            &format!("J_{k}"),
            &|t| pair_moments(&m, &a, &at(t)).j_k(k),
            VI::j_k(&m, &a, &cur, &phidot, k),
        );
        check(
            &format!("E_{k}"),
            &|t| {
                let cb = cache(&m, &at(t));
                closed_energies(&m, &ca, &cb).e_k_via_e0(k)
            },
            e_k_integrand(&m, &cur, &dform, &phidot, k).unwrap(),
        );
    }
}

#[test]
fn jensen_bounds_and_ding_lower_bound() {
    let m = model();
    let base = KahlerModel::base_form(&m);
    for seed in 0..10 {
        let b = random_form(&m, 400 + seed);
        let cb = cache(&m, &b);
        assert!(cb.f_mean <= 1e-12, "(1/V)∫f ω_φ = {} > 0", cb.f_mean);
        let phi = m.random_band_limited(500 + seed, 10, true);
        let r = mto_classical(&m, &phi);
        assert!(r.jensen_moment >= 1.0 - 1e-12, "Jensen floor {}", r.jensen_moment);
        // KE base: F ≥ 0 (Ding bounded below with a = 0)
        let f = ding_f(&m, &base, &b);
        assert!(f >= -1e-9, "F(ω, random Kähler) = {f}");
    }
}

#[test]
fn pullback_invariance_of_aubin_functionals() {
    let m = model();
    let map = MobiusMap::dilation(1.4).compose(&MobiusMap::rotation_z(0.4));
    let phi_a = m.random_band_limited(61, 8, true);
    let phi_b = m.random_band_limited(62, 8, true);
    let a = m.form_from_potential(&phi_a);
    let b = m.form_from_potential(&phi_b);
    let pull = |phi: &ScalarField| {
        let p = m
            .mobius_pullback(&map, &m.kahler_potential(phi.clone()))
            .unwrap();
        m.form_from_potential(&p.phi)
    };
    let (ap, bp) = (pull(&phi_a), pull(&phi_b));
    let m1 = pair_moments(&m, &a, &b);
    let m2 = pair_moments(&m, &ap, &bp);
    assert!((m1.aubin_i() - m2.aubin_i()).abs() < 1e-8, "I pullback");
    assert!((m1.aubin_j() - m2.aubin_j()).abs() < 1e-8, "J pullback");
    for k in 0..=1 {
        assert!((m1.i_k(k) - m2.i_k(k)).abs() < 1e-8, "I_{k} pullback");
        assert!((m1.j_k(k) - m2.j_k(k)).abs() < 1e-8, "J_{k} pullback");
    }
}

#[test]
fn membership_margins_and_mu_k() {
    let m = model();
    let base = KahlerModel::base_form(&m);
    let cb = cache(&m, &base);
    // numerical μ_0 on the base: ∫ Ric ω / V = 1
    let mu = m.weighted_wedge(None, &[&cb.ricci]) / m.volume();
    assert!((mu - 1.0).abs() < 1e-9, "numerical μ_0 = {mu}");
    // A_k ⊇ B_k on random Kähler samples
    for seed in 0..10 {
        let f = random_form(&m, 700 + seed);
        let cf = cache(&m, &f);
        for k in 1..=1 {
            if b_k_margin(&m, &cf, k) >= 0.0 {
                let ak = a_k_margin(&m, &cb, &cf, k);
                assert!(ak >= -1e-8, "A_{k} margin {ak} with B_{k} ≥ 0");
            }
        }
    }
}

#[test]
fn futaki_characters_vanish_on_the_ke_sphere() {
    let m = model();
    let ctx = FutakiContext::new(&m).unwrap();
    // degenerate flow
    let (re, im) = futaki_character(&m, &ctx, &Sl2Generator::zero(), 0, 1e-3).unwrap();
    assert_eq!((re, im), (0.0, 0.0));
    for (g, gen) in Sl2Generator::standard_set().into_iter().enumerate() {
        let mut fk = Vec::new();
        for k in 0..=1 {
            let (re, im) = futaki_character(&m, &ctx, &gen, k, 1e-3).unwrap();
            assert!(
                re.abs() < 1e-6 && im.abs() < 1e-6,
                "F_{k}(gen {g}) = ({re}, {im})"
            );
            fk.push((re, im));
        }
        let d = ((fk[1].0 - fk[0].0).abs()).max((fk[1].1 - fk[0].1).abs());
        assert!(d < 1e-8, "F_1 − F_0 = {d} on generator {g}");
    }
}

#[test]
fn mto_classical_slack_and_mobius_equality() {
    let m = model();
    for seed in 0..20 {
        let phi = m.random_band_limited(800 + seed, 12, false);
        let r = mto_classical(&m, &phi);
        assert!(r.slack >= -1e-10, "MTO slack {} (seed {seed})", r.slack);
        let g = mto_generalized(&m, &phi);
        // n = 1: the generalized exponent J coincides with the classical one
        assert!((g.bound - r.bound).abs() < 1e-10);
    }
    // equality on Möbius pullbacks of ω
    let zero = m.kahler_potential(ScalarField::zero(&m.grid));
    for lam in [1.3, 2.0, 3.5] {
        let p = m
            .mobius_pullback(&MobiusMap::dilation(lam), &zero)
            .unwrap();
        let r = mto_classical(&m, &p.phi);
        assert!(
            r.slack.abs() < 1e-7,
            "MTO equality slack {} at λ={lam}",
            r.slack
        );
    }
}

#[test]
fn prescribe_ricci_inverts_the_ricci_map() {
    let m = model();
    let phi = m.random_band_limited(91, 10, true);
    let target = m.form_from_potential(&phi);
    let psi = m.prescribe_ricci(&phi).unwrap();
    let ric = m
        .ricci_of_form(&m.form_from_potential(&psi.phi))
        .unwrap();
    let sup = ric
        .dens
        .values
        .iter()
        .zip(&target.dens.values)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
    assert!(sup < 1e-8, "Ric ω_ψ vs ω_φ sup distance {sup}");
}
