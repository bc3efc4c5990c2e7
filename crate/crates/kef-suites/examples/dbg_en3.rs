use kef_core::functionals::{closed_energies, form_cache};
use kef_core::model::KahlerModel;
use kef_core::toric::function::{Term, ToricFunction};
use kef_core::toric::model::ToricModel;

fn main() {
    let m = ToricModel::new(2, 40.0, 64).unwrap();
    let n = 2usize;
    let c: f64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(3.0);
    let base_cache = form_cache(&m, &KahlerModel::base_form(&m)).unwrap();
    let kappa = (n + 1) as f64;
    for j in 0..=10 {
        let b = 0.1 * j as f64;
        // u_b = (1-b) u0 + b * binomial-weighted average of diagonal translates
        let k = 8i32;
        let delta = c; // spacing read from argv slot 1
        let mut u = ToricFunction::zero(n);
        u.base_coeff = kappa * (1.0 - b);
        let mut binom = vec![1.0f64];
        for _ in 0..k {
            let mut nb = vec![1.0];
            for w in binom.windows(2) {
                nb.push(w[0] + w[1]);
            }
            nb.push(1.0);
            binom = nb;
        }
        let tot: f64 = binom.iter().sum();
        for (j, w) in binom.iter().enumerate() {
            let off = (j as i32 - k / 2) as f64 * delta;
            u = u.with_term(Term::LogSumExp {
                amp: kappa * b * w / tot,
                center: vec![-off; n],
            });
        }
        let form = m.form_from_function(&u);
        if !KahlerModel::is_kahler(&m, &form) {
            println!("b={b:.2} NOT KAHLER min_eig={:.3e}", form.min_eig);
            continue;
        }
        match form_cache(&m, &form) {
            Ok(cc) => {
                let e = closed_energies(&m, &base_cache, &cc);
                println!(
                    "b={b:.2} en={:+.6e} e0={:+.6e} f={:+.6e} ric_margin={:+.3e}",
                    e.en, e.e0, e.f, cc.ricci_margin
                );
            }
            Err(e) => println!("b={b:.2} cache err: {e}"),
        }
    }
}
