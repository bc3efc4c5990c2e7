use kef_core::functionals::{closed_energies, f_moment, form_cache};
use kef_core::model::KahlerModel;
use kef_core::sphere::model::SphereModel;

fn main() {
    exact_probe();
    let m = SphereModel::new(48).unwrap();
    let pa = m.random_band_limited(64, 10, true);
    let pb = m.random_band_limited(65, 10, true);
    let a = m.form_from_potential(&pa);
    let ca = form_cache(&m, &a).unwrap();
    let pav = m.rel_pot(&a);
    let b = m.form_from_potential(&pb);
    let pbv = m.rel_pot(&b);
    let phidot: Vec<f64> = pbv.iter().zip(&pav).map(|(x, y)| x - y).collect();
    let n = 1usize;
    let t0 = 0.45;
    let cache_at = |t: f64| form_cache(&m, &m.form_lincomb(&[(1.0 - t, &a), (t, &b)])).unwrap();
    let c0 = cache_at(t0);
    let forms0: Vec<&_> = (0..n).map(|_| &c0.form).collect();
    let rhs = -m.weighted_wedge(Some(&phidot), &forms0) / m.volume();
    println!("rhs = {rhs:.12e}");
    // c(t0) = (1/V) \int phidot e^{f_t} omega_t^n
    let c0f = cache_at(t0);
    let w: Vec<f64> = c0f.f_pot.iter().zip(&phidot).map(|(f, p)| p * f.exp()).collect();
    let fl: Vec<&_> = (0..n).map(|_| &c0f.form).collect();
    let c_t = m.weighted_wedge(Some(&w), &fl) / m.volume();
    println!("c(t0) = {c_t:.10e}");

    for h in [1e-2, 3e-3, 1e-3, 3e-4] {
        let st = [
            (t0 - 2.0 * h, 1.0),
            (t0 - h, -8.0),
            (t0 + h, 8.0),
            (t0 + 2.0 * h, -1.0),
        ];
        for k in 1..=n {
            let mut d_g = 0.0;
            let mut d_fm = 0.0;
            let mut d_e0 = 0.0;
            for (t, w) in st {
                let ct = cache_at(t);
                let e = closed_energies(&m, &ca, &ct);
                let g = (k as f64 + 1.0) * e.e_k_via_e0(k) - k as f64 * e.e_k_via_e0(k - 1);
                d_g += w * g / (12.0 * h);
                d_fm += w * f_moment(&m, &ct, k) / (12.0 * h);
                d_e0 += w * e.e0 / (12.0 * h);
            }
            println!(
                "h={h:.0e} k={k} dG={d_g:.10e} dFm={d_fm:.10e} dG+dFm-rhs={:.3e}  dE0={d_e0:.10e} dE0-rhs={:.3e}",
                d_g + d_fm - rhs,
                d_e0 - rhs
            );
        }
    }
}
// appended exact-route probe

fn exact_probe() {
    use kef_core::functionals::paths::e_k_integrand;
    let m = SphereModel::new(48).unwrap();
    let pa = m.random_band_limited(64, 10, true);
    let pb = m.random_band_limited(65, 10, true);
    let a = m.form_from_potential(&pa);
    let b = m.form_from_potential(&pb);
    let pav = m.rel_pot(&a);
    let pbv = m.rel_pot(&b);
    let phidot: Vec<f64> = pbv.iter().zip(&pav).map(|(x, y)| x - y).collect();
    let t0 = 0.45;
    let cur = m.form_lincomb(&[(1.0 - t0, &a), (t0, &b)]);
    let dform = m.form_lincomb(&[(1.0, &b), (-1.0, &a)]);
    let n = 1usize;
    for k in 1..=n {
        let dek = e_k_integrand(&m, &cur, &dform, &phidot, k).unwrap();
        let dekm1 = e_k_integrand(&m, &cur, &dform, &phidot, k - 1).unwrap();
        let dg_exact = (k as f64 + 1.0) * dek - k as f64 * dekm1;
        println!("exact dG (k={k}) = {dg_exact:.10e}");
    }
}
