//! Analytic torus-invariant potential families on R^n (log coordinates).
//!
//! A `ToricFunction` is base_coeff · log(1 + Σ e^{x_i}) plus a finite list of
//! perturbation terms (Gaussians, compact C^∞ bumps, affine pieces). All
//! evaluation goes through jet arithmetic, so values, gradients, Hessians and
//! — via degree-4 jets — Hessians of log det D²u are closed-form.

use std::sync::Arc;

use super::jet::{Jet, JetSpace};

#[derive(Clone, Debug)]
pub enum Term {
    /// amp · exp(−|x−center|² / (2 width²))
    Gaussian {
        amp: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// amp · exp(1 − 1/(1 − r²)), r = |x−center|/radius, supported in r < 1.
    Bump {
        amp: f64,
        center: Vec<f64>,
        radius: f64,
    },
    /// c0 + Σ c_i x_i (changes the potential, not the form).
    Affine { c0: f64, c: Vec<f64> },
    /// amp · log(1 + Σ e^{x_i − center_i}): a translated copy of the base
    /// log-term. Its Hessian decays exactly like the base Hessian in every
    /// direction, so these perturbations keep a uniform *relative* positivity
    /// margin — unlike Gaussians, whose tails overwhelm the base's
    /// exponentially degenerate directions at any useful amplitude. Balanced
    /// ± pairs leave the asymptotic growth (the Kähler class) unchanged.
    LogSumExp { amp: f64, center: Vec<f64> },
}

impl Term {
    fn scaled(&self, s: f64) -> Term {
        match self {
            Term::Gaussian { amp, center, width } => Term::Gaussian {
                amp: s * amp,
                center: center.clone(),
                width: *width,
            },
            Term::Bump {
                amp,
                center,
                radius,
            } => Term::Bump {
                amp: s * amp,
                center: center.clone(),
                radius: *radius,
            },
            Term::Affine { c0, c } => Term::Affine {
                c0: s * c0,
                c: c.iter().map(|v| s * v).collect(),
            },
            Term::LogSumExp { amp, center } => Term::LogSumExp {
                amp: s * amp,
                center: center.clone(),
            },
        }
    }

    fn jet_eval(&self, x: &[Jet]) -> Jet {
        let sp = &x[0].space;
        match self {
            Term::Gaussian { amp, center, width } => {
                let mut q = Jet::constant(sp, 0.0);
                for (xi, ci) in x.iter().zip(center) {
                    let d = xi.add(&Jet::constant(sp, -ci));
                    q = q.add(&d.mul(&d));
                }
                q.scale(-0.5 / (width * width)).exp().scale(*amp)
            }
            Term::Bump {
                amp,
                center,
                radius,
            } => {
                let mut q = Jet::constant(sp, 0.0);
                for (xi, ci) in x.iter().zip(center) {
                    let d = xi.add(&Jet::constant(sp, -ci));
                    q = q.add(&d.mul(&d));
                }
                let t = Jet::constant(sp, 1.0).add(&q.scale(-1.0 / (radius * radius)));
                if t.value() <= 1e-10 {
                    return Jet::constant(sp, 0.0);
                }
                Jet::constant(sp, 1.0)
                    .add(&t.recip().scale(-1.0))
                    .exp()
                    .scale(*amp)
            }
            Term::Affine { c0, c } => {
                let mut out = Jet::constant(sp, *c0);
                for (xi, ci) in x.iter().zip(c) {
                    out.add_assign_scaled(*ci, xi);
                }
                out
            }
            Term::LogSumExp { amp, center } => lse_jet(x, center).scale(*amp),
        }
    }
}

/// Jet of log(1 + Σ e^{x_i − c_i}) at the base point carried by `x`,
/// as a log-sum-exp with a *variable* shift by the dominant slot: the
/// dominant exponential becomes the constant 1 (zero jet in the exponent),
/// so the derivative content of ln(s) lives entirely in the genuinely small
/// remainder terms. A constant shift would leave two ≈1 contributions whose
/// difference is the (∼e^{−‖x‖}) far-field answer, and the Hessian would
/// cancel to rounding garbage.
pub(crate) fn lse_jet(x: &[Jet], center: &[f64]) -> Jet {
    let space = &x[0].space;
    let n = x.len();
    let shifted_val = |i: usize| x[i].value() - center[i];
    let kmax = (0..n).fold(None, |best: Option<usize>, i| match best {
        Some(b) if shifted_val(b) >= shifted_val(i) => Some(b),
        _ if shifted_val(i) > 0.0 => Some(i),
        other => other,
    });
    match kmax {
        None => {
            // all x_i − c_i ≤ 0: s = 1 + Σ e^{x_i − c_i} is well conditioned
            let mut s = Jet::constant(space, 1.0);
            for (xi, ci) in x.iter().zip(center) {
                s = s.add(&xi.add(&Jet::constant(space, -ci)).exp());
            }
            s.ln()
        }
        Some(k) => {
            let xk = x[k].add(&Jet::constant(space, -center[k]));
            let mut s = xk.scale(-1.0).exp();
            for (i, xi) in x.iter().enumerate() {
                if i == k {
                    s = s.add(&Jet::constant(space, 1.0));
                } else {
                    s = s.add(
                        &xi.add(&Jet::constant(space, -center[i]))
                            .add(&xk.scale(-1.0))
                            .exp(),
                    );
                }
            }
            s.ln().add(&xk)
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToricFunction {
    pub n: usize,
    /// Coefficient of log(1 + Σ e^{x_i}); κ_n = n+1 for the base potential.
    pub base_coeff: f64,
    pub terms: Vec<Term>,
}

impl ToricFunction {
    /// The reference potential u₀ = (n+1) log(1 + Σ e^{x_i}).
    pub fn base(n: usize) -> ToricFunction {
        ToricFunction {
            n,
            base_coeff: (n + 1) as f64,
            terms: Vec::new(),
        }
    }

    pub fn zero(n: usize) -> ToricFunction {
        ToricFunction {
            n,
            base_coeff: 0.0,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, t: Term) -> ToricFunction {
        self.terms.push(t);
        self
    }

    pub fn lincomb(parts: &[(f64, &ToricFunction)]) -> ToricFunction {
        assert!(!parts.is_empty());
        let n = parts[0].1.n;
        let mut out = ToricFunction::zero(n);
        for (s, f) in parts {
            assert_eq!(f.n, n);
            out.base_coeff += s * f.base_coeff;
            for t in &f.terms {
                out.terms.push(t.scaled(*s));
            }
        }
        out
    }

    /// Jet of the function at base point x, in the given space.
    pub fn jet_eval(&self, space: &Arc<JetSpace>, x: &[f64]) -> Jet {
        let xs: Vec<Jet> = (0..self.n)
            .map(|i| Jet::variable(space, i, x[i]))
            .collect();
        let mut out = Jet::constant(space, 0.0);
        if self.base_coeff != 0.0 {
            out.add_assign_scaled(self.base_coeff, &lse_jet(&xs, &vec![0.0; self.n]));
        }
        for t in &self.terms {
            out = out.add(&t.jet_eval(&xs));
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let sp = JetSpace::new(self.n, 1);
        self.jet_eval(&sp, x).value()
    }

    /// Value, gradient and row-major n×n Hessian at x (one degree-2 jet pass).
    pub fn value_grad_hess(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let sp = JetSpace::new(self.n, 2);
        let j = self.jet_eval(&sp, x);
        let grad = (0..self.n).map(|i| j.grad(i)).collect();
        let mut hess = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for k in 0..self.n {
                hess[i * self.n + k] = j.hess(i, k);
            }
        }
        (j.value(), grad, hess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_hessian(f: &ToricFunction, x: &[f64], h: f64) -> Vec<f64> {
        let n = f.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut xpp = x.to_vec();
                let mut xpm = x.to_vec();
                let mut xmp = x.to_vec();
                let mut xmm = x.to_vec();
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                out[i * n + j] = (f.value(&xpp) - f.value(&xpm) - f.value(&xmp)
                    + f.value(&xmm))
                    / (4.0 * h * h);
            }
        }
        out
    }

    #[test]
    fn jet_hessian_matches_finite_differences() {
        let f = ToricFunction::base(2)
            .with_term(Term::Gaussian {
                amp: 0.3,
                center: vec![0.5, -1.0],
                width: 1.7,
            })
            .with_term(Term::Bump {
                amp: -0.2,
                center: vec![-0.4, 0.8],
                radius: 2.5,
            })
            .with_term(Term::Affine {
                c0: 1.0,
                c: vec![0.2, -0.1],
            })
            .with_term(Term::LogSumExp {
                amp: -0.4,
                center: vec![1.2, -0.7],
            });
        for x in [[0.3, 0.4], [-1.2, 0.9], [2.0, -2.0]] {
            let (_, _, hess) = f.value_grad_hess(&x);
            let fd = fd_hessian(&f, &x, 1e-4);
            for (a, b) in hess.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6, "jet {a} vs fd {b}");
            }
        }
    }

    #[test]
    fn base_potential_is_stable_far_out() {
        let f = ToricFunction::base(3);
        // u₀ ≈ 4·x_max for large positive coordinates; no overflow.
        let (v, g, _) = f.value_grad_hess(&[700.0, -5.0, 0.0]);
        assert!((v - 4.0 * 700.0).abs() < 1e-9);
        assert!((g[0] - 4.0).abs() < 1e-12);
        assert!(g[1].abs() < 1e-12);
    }

    #[test]
    fn bump_vanishes_identically_outside_support() {
        let f = ToricFunction::zero(1).with_term(Term::Bump {
            amp: 2.0,
            center: vec![0.0],
            radius: 1.0,
        });
        let (v, g, h) = f.value_grad_hess(&[1.5]);
        assert_eq!(v, 0.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(h[0], 0.0);
        // and at the center it attains amp·e^0 = amp·1·... = 2·exp(1−1) = 2·1
        assert!((f.value(&[0.0]) - 2.0).abs() < 1e-14);
    }
}
