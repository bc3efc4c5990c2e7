use kef_core::functionals::{closed_energies, form_cache};
use kef_core::model::KahlerModel;
use kef_core::toric::function::{Term, ToricFunction};
use kef_core::toric::model::ToricModel;

fn main() {
    let m = ToricModel::new(2, 40.0, 64).unwrap();
    let n = 2;
    let amp: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(0.2);
    let center = vec![0.6, -0.4];
    let psi = ToricFunction::zero(n)
        .with_term(Term::LogSumExp {
            amp,
            center: center.clone(),
        })
        .with_term(Term::LogSumExp {
            amp: -amp,
            center: center.iter().map(|v| -v).collect(),
        });
    let base_cache = form_cache(&m, &KahlerModel::base_form(&m)).unwrap();
    for j in 1..=16 {
        let b = 0.75 * j as f64;
        for s in [1.0f64, -1.0] {
            let u = ToricFunction::lincomb(&[(1.0, &m.u0), (s * b, &psi)]);
            let form = m.form_from_function(&u);
            if !KahlerModel::is_kahler(&m, &form) {
                println!("b={:+.3} min_eig={:.3e} NOT KAHLER", s * b, form.min_eig);
                continue;
            }
            match form_cache(&m, &form) {
                Ok(c) => {
                    let e = closed_energies(&m, &base_cache, &c);
                    println!(
                        "b={:+.3} min_eig={:.3e} en={:+.6e} e0={:+.6e} f={:+.6e}",
                        s * b,
                        form.min_eig,
                        e.en,
                        e.e0,
                        e.f
                    );
                }
                Err(e) => println!("b={:+.3} cache err: {e}", s * b),
            }
        }
    }
}
