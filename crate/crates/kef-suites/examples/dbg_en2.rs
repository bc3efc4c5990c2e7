use kef_core::functionals::moments::pair_moments;
use kef_core::functionals::{closed_energies, form_cache};
use kef_core::model::KahlerModel;
use kef_core::toric::function::{Term, ToricFunction};
use kef_core::toric::model::ToricModel;

fn main() {
    let m = ToricModel::new(2, 40.0, 64).unwrap();
    let n = 2;
    let amp: f64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let radius: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(3.0);
    let bump = ToricFunction::zero(n).with_term(Term::Bump {
        amp,
        center: vec![0.0; n],
        radius,
    });
    let base_cache = form_cache(&m, &KahlerModel::base_form(&m)).unwrap();
    for j in 1..=12 {
        let b = 0.25 * j as f64;
        for s in [1.0f64, -1.0] {
            let u = ToricFunction::lincomb(&[(1.0, &m.u0), (s * b, &bump)]);
            let form = m.form_from_function(&u);
            if !KahlerModel::is_kahler(&m, &form) {
                println!("b={:+.3} min_eig={:.3e} NOT KAHLER", s * b, form.min_eig);
                continue;
            }
            match form_cache(&m, &form) {
                Ok(c) => {
                    let e = closed_energies(&m, &base_cache, &c);
                    let jr = pair_moments(&m, &c.form, &c.ricci).aubin_j();
                    println!(
                        "b={:+.3} min_eig={:.3e} en={:+.6e} e0={:+.6e} j_b_ric={:+.6e} ric_margin={:+.3e}",
                        s * b, form.min_eig, e.en, e.e0, jr, c.ricci_margin
                    );
                }
                Err(e) => println!("b={:+.3} cache err: {e}", s * b),
            }
        }
    }
}
