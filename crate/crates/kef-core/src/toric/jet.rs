//! Truncated multivariate Taylor arithmetic ("jets") in n ≤ 3 variables.
//!
//! A degree-d jet stores the Taylor coefficients c_α = ∂^α f / α! for
//! |α| ≤ d. Arithmetic on jets is the exact chain rule, so Hessians of
//! analytic toric potentials — and, via degree-4 jets, Hessians of
//! v = −log det D²u (the Ricci potential data) — come out closed-form,
//! with no finite-difference noise.

use std::sync::Arc;

/// Monomial bookkeeping for a fixed (n, degree).
pub struct JetSpace {
    pub n: usize,
    pub degree: usize,
    /// Multi-indices, graded order (total degree, then lex).
    pub alphas: Vec<[u8; 3]>,
    /// prod[i * len + j] = position of alphas[i] + alphas[j], or usize::MAX
    /// if the sum exceeds the degree cap.
    prod: Vec<usize>,
    /// α! per entry.
    pub factorial: Vec<f64>,
}

fn multi_indices(n: usize, degree: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut emit = |a: [u8; 3]| {
            if a.iter().map(|&x| x as usize).sum::<usize>() == total {
                out.push(a);
            }
        };
        let d = degree as u8;
        match n {
            1 => {
                for i in 0..=d {
                    emit([i, 0, 0]);
                }
            }
            2 => {
                for i in 0..=d {
                    for j in 0..=d {
                        emit([i, j, 0]);
                    }
                }
            }
            3 => {
                for i in 0..=d {
                    for j in 0..=d {
                        for k in 0..=d {
                            emit([i, j, k]);
                        }
                    }
                }
            }
            _ => panic!("jet spaces support n in 1..=3"),
        }
    }
    out
}

impl JetSpace {
    pub fn new(n: usize, degree: usize) -> Arc<JetSpace> {
        let alphas = multi_indices(n, degree);
        let len = alphas.len();
        let pos = |a: &[u8; 3]| alphas.iter().position(|b| b == a);
        let mut prod = vec![usize::MAX; len * len];
        for i in 0..len {
            for j in 0..len {
                let s = [
                    alphas[i][0] + alphas[j][0],
                    alphas[i][1] + alphas[j][1],
                    alphas[i][2] + alphas[j][2],
                ];
                if s.iter().map(|&x| x as usize).sum::<usize>() <= degree {
                    prod[i * len + j] = pos(&s).unwrap();
                }
            }
        }
        let fact = |k: u8| (1..=k as u64).product::<u64>() as f64;
        let factorial = alphas
            .iter()
            .map(|a| fact(a[0]) * fact(a[1]) * fact(a[2]))
            .collect();
        Arc::new(JetSpace {
            n,
            degree,
            alphas,
            prod,
            factorial,
        })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn position(&self, a: [u8; 3]) -> Option<usize> {
        self.alphas.iter().position(|b| *b == a)
    }
}

#[derive(Clone)]
pub struct Jet {
    pub space: Arc<JetSpace>,
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet {
            space: space.clone(),
            c,
        }
    }

    /// The coordinate function x_i expanded at base point x0_i.
    pub fn variable(space: &Arc<JetSpace>, i: usize, x0: f64) -> Jet {
        let mut j = Jet::constant(space, x0);
        let mut e = [0u8; 3];
        e[i] = 1;
        let p = space.position(e).unwrap();
        j.c[p] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn grad(&self, i: usize) -> f64 {
        let mut e = [0u8; 3];
        e[i] = 1;
        self.c[self.space.position(e).unwrap()]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        let mut e = [0u8; 3];
        e[i] += 1;
        e[j] += 1;
        let p = self.space.position(e).unwrap();
        // ∂^α f = c_α α!; for i=j that is 2·c, for i≠j just c.
        self.c[p] * self.space.factorial[p]
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&other.c) {
            *a += b;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, s: f64, other: &Jet) {
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for a in out.c.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let len = self.space.len();
        let mut c = vec![0.0; len];
        for i in 0..len {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            let row = &self.space.prod[i * len..(i + 1) * len];
            for j in 0..len {
                let k = row[j];
                if k != usize::MAX {
                    c[k] += a * other.c[j];
                }
            }
        }
        Jet {
            space: self.space.clone(),
            c,
        }
    }

    /// Compose with a scalar analytic function given its derivatives at the
    /// jet's value: f(u) = Σ_k derivs[k]/k! · (u − u0)^k (ũ is nilpotent).
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let mut tilde = self.clone();
        tilde.c[0] = 0.0;
        let mut out = Jet::constant(&self.space, derivs[0]);
        let mut pow = Jet::constant(&self.space, 1.0);
        let mut kfact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1) {
            kfact *= k as f64;
            pow = pow.mul(&tilde);
            out.add_assign_scaled(d / kfact, &pow);
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let derivs = vec![e; self.space.degree + 1];
        self.compose(&derivs)
    }

    /// Natural log; caller guarantees positive value part.
    pub fn ln(&self) -> Jet {
        let u = self.value();
        debug_assert!(u > 0.0);
        let mut derivs = vec![0.0; self.space.degree + 1];
        derivs[0] = u.ln();
        let mut p = 1.0; // (k-1)! / u^k with sign
        for (k, d) in derivs.iter_mut().enumerate().skip(1) {
            p *= -((k as f64) - 1.0).max(1.0) / u;
            if k == 1 {
                p = 1.0 / u;
            }
            *d = p;
        }
        self.compose(&derivs)
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        debug_assert!(u != 0.0);
        let mut derivs = vec![0.0; self.space.degree + 1];
        let mut p = 1.0 / u;
        derivs[0] = p;
        for (k, d) in derivs.iter_mut().enumerate().skip(1) {
            p *= -(k as f64) / u;
            *d = p;
        }
        self.compose(&derivs)
    }

    /// View the Hessian entry H_ij = ∂_i∂_j(self) as a jet of degree
    /// (self.degree − 2) in `target` space: Taylor shift of the coefficients.
    pub fn hessian_entry_jet(&self, i: usize, j: usize, target: &Arc<JetSpace>) -> Jet {
        debug_assert_eq!(target.degree + 2, self.space.degree);
        let mut a0 = [0u8; 3];
        a0[i] += 1;
        a0[j] += 1;
        let mut c = vec![0.0; target.len()];
        for (p, beta) in target.alphas.iter().enumerate() {
            let g = [a0[0] + beta[0], a0[1] + beta[1], a0[2] + beta[2]];
            let q = self.space.position(g).unwrap();
            // t_β = ∂^β H / β! = c_γ γ! / β!
            c[p] = self.c[q] * self.space.factorial[q] / target.factorial[p];
        }
        Jet {
            space: target.clone(),
            c,
        }
    }
}

/// Determinant of a symmetric n×n matrix of jets (n ≤ 3), by expansion.
pub fn jet_det(m: &[Jet], n: usize) -> Jet {
    match n {
        1 => m[0].clone(),
        2 => m[0].mul(&m[3]).add(&m[1].mul(&m[2]).scale(-1.0)),
        3 => {
            let a = |i: usize, j: usize| &m[3 * i + j];
            let c0 = a(1, 1).mul(a(2, 2)).add(&a(1, 2).mul(a(2, 1)).scale(-1.0));
            let c1 = a(1, 0).mul(a(2, 2)).add(&a(1, 2).mul(a(2, 0)).scale(-1.0));
            let c2 = a(1, 0).mul(a(2, 1)).add(&a(1, 1).mul(a(2, 0)).scale(-1.0));
            a(0, 0)
                .mul(&c0)
                .add(&a(0, 1).mul(&c1).scale(-1.0))
                .add(&a(0, 2).mul(&c2))
        }
        _ => panic!("jet_det supports n in 1..=3"),
    }
}

/// Determinant of a general (not necessarily symmetric) m×m matrix of jets
/// by LU elimination with value-based partial pivoting: O(m³) jet products.
/// The auxiliary structured systems grow with the number of log-sum-exp
/// structures in a generator (affine path midpoints merge two term lists),
/// so a Laplace expansion's O(m!) cost is prohibitive there.
pub fn jet_det_lu(m: &[Jet], dim: usize) -> Jet {
    debug_assert_eq!(m.len(), dim * dim);
    let sp = &m[0].space;
    let mut a: Vec<Jet> = m.to_vec();
    let mut det = Jet::constant(sp, 1.0);
    let mut sign = 1.0;
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|x, y| {
                a[x * dim + col]
                    .value()
                    .abs()
                    .total_cmp(&a[y * dim + col].value().abs())
            })
            .unwrap();
        if piv != col {
            for c in 0..dim {
                a.swap(piv * dim + c, col * dim + c);
            }
            sign = -sign;
        }
        let pivot = a[col * dim + col].clone();
        if pivot.value() == 0.0 {
            // Singular at the value level: the caller's positivity check
            // rejects this (the jet's derivative content is not recoverable
            // without division, so only the zero value is reported).
            return det.mul(&pivot).scale(sign);
        }
        det = det.mul(&pivot);
        let inv = pivot.recip();
        for r in col + 1..dim {
            let factor = a[r * dim + col].mul(&inv);
            for c in col + 1..dim {
                let sub = factor.mul(&a[col * dim + c]);
                a[r * dim + c] = a[r * dim + c].add(&sub.scale(-1.0));
            }
        }
    }
    det.scale(sign)
}

/// Mixed discriminant of n jet matrices (row-major, n ≤ 3) by the
/// column-permutation formula D = (1/n!) Σ_σ det[col_j of M_{σ(j)}].
///
/// Deliberately *not* the det-of-sums polarisation: that formula contains a
/// pure det(M₁) term, and when M₁ is the near-degenerate far-field base
/// Hessian its determinant cancels to rounding garbage. Here every product
/// mixes columns of different arguments, so each term carries at least one
/// factor of each matrix and the absolute error stays at the scale of the
/// smallest factor.
pub fn jet_mixed_discriminant(mats: &[&[Jet]], n: usize) -> Jet {
    debug_assert_eq!(mats.len(), n);
    let sp = &mats[0][0].space;
    match n {
        1 => mats[0][0].clone(),
        2 => {
            // (1/2)[det(col0 of A, col1 of B) + det(col0 of B, col1 of A)]
            let (a, b) = (mats[0], mats[1]);
            a[0].mul(&b[3])
                .add(&b[0].mul(&a[3]))
                .add(&a[2].mul(&b[1]).scale(-1.0))
                .add(&b[2].mul(&a[1]).scale(-1.0))
                .scale(0.5)
        }
        3 => {
            let perms: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let mut acc = Jet::constant(sp, 0.0);
            for perm in &perms {
                // column j comes from mats[perm[j]]
                let e = |i: usize, j: usize| &mats[perm[j]][3 * i + j];
                let m0 = e(1, 1).mul(e(2, 2)).add(&e(1, 2).mul(e(2, 1)).scale(-1.0));
                let m1 = e(1, 0).mul(e(2, 2)).add(&e(1, 2).mul(e(2, 0)).scale(-1.0));
                let m2 = e(1, 0).mul(e(2, 1)).add(&e(1, 1).mul(e(2, 0)).scale(-1.0));
                acc = acc
                    .add(&e(0, 0).mul(&m0))
                    .add(&e(0, 1).mul(&m1).scale(-1.0))
                    .add(&e(0, 2).mul(&m2));
            }
            acc.scale(1.0 / 6.0)
        }
        _ => panic!("jet_mixed_discriminant supports n in 1..=3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_reproduces_partial_derivatives() {
        // f(x,y) = exp(x) * ln(1 + y²) at (0.3, 0.7)
        let sp = JetSpace::new(2, 4);
        let x = Jet::variable(&sp, 0, 0.3);
        let y = Jet::variable(&sp, 1, 0.7);
        let f = x.exp().mul(&y.mul(&y).add(&Jet::constant(&sp, 1.0)).ln());
        let (x0, y0): (f64, f64) = (0.3, 0.7);
        let v = x0.exp() * (1.0 + y0 * y0).ln();
        assert!((f.value() - v).abs() < 1e-14);
        assert!((f.grad(0) - v).abs() < 1e-14);
        let gy = x0.exp() * 2.0 * y0 / (1.0 + y0 * y0);
        assert!((f.grad(1) - gy).abs() < 1e-14);
        let hyy = x0.exp() * (2.0 * (1.0 + y0 * y0) - 4.0 * y0 * y0)
            / (1.0 + y0 * y0).powi(2);
        assert!((f.hess(1, 1) - hyy).abs() < 1e-13);
        assert!((f.hess(0, 1) - gy).abs() < 1e-13);
    }

    #[test]
    fn hessian_entry_jet_matches_direct_differentiation() {
        // u = exp(x+2y); H_01 = 2 exp(x+2y); its own hessian is 4·2·exp = ...
        let sp4 = JetSpace::new(2, 4);
        let sp2 = JetSpace::new(2, 2);
        let x = Jet::variable(&sp4, 0, 0.1);
        let y = Jet::variable(&sp4, 1, -0.2);
        let u = x.add(&y.scale(2.0)).exp();
        let h01 = u.hessian_entry_jet(0, 1, &sp2);
        let e = (0.1f64 - 0.4).exp();
        assert!((h01.value() - 2.0 * e).abs() < 1e-14);
        assert!((h01.grad(0) - 2.0 * e).abs() < 1e-14);
        assert!((h01.grad(1) - 4.0 * e).abs() < 1e-14);
        assert!((h01.hess(0, 0) - 2.0 * e).abs() < 1e-13);
        assert!((h01.hess(1, 1) - 8.0 * e).abs() < 1e-13);
    }

    #[test]
    fn jet_mixed_discriminant_matches_det_and_symmetry() {
        let sp = JetSpace::new(3, 2);
        let c = |v: f64| Jet::constant(&sp, v);
        let a: Vec<Jet> = [2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 1.1]
            .iter()
            .map(|&v| c(v))
            .collect();
        let b: Vec<Jet> = [0.7, -0.2, 0.4, -0.2, 1.9, 0.1, 0.4, 0.1, 0.6]
            .iter()
            .map(|&v| c(v))
            .collect();
        let daaa = jet_mixed_discriminant(&[&a, &a, &a], 3);
        assert!((daaa.value() - jet_det(&a, 3).value()).abs() < 1e-13);
        let dab = jet_mixed_discriminant(&[&a, &a, &b], 3);
        let dba = jet_mixed_discriminant(&[&a, &b, &a], 3);
        assert!((dab.value() - dba.value()).abs() < 1e-13);
        // det(A + tB) expansion at t=1: det(A+B) = Σ C(3,k) D(A^{3−k},B^k)
        let sum: Vec<Jet> = a.iter().zip(&b).map(|(x, y)| x.add(y)).collect();
        let dbb = jet_mixed_discriminant(&[&a, &b, &b], 3);
        let dbbb = jet_mixed_discriminant(&[&b, &b, &b], 3);
        let lhs = jet_det(&sum, 3).value();
        let rhs = daaa.value() + 3.0 * dab.value() + 3.0 * dbb.value() + dbbb.value();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn recip_is_multiplicative_inverse() {
        let sp = JetSpace::new(3, 2);
        let x = Jet::variable(&sp, 0, 0.4);
        let y = Jet::variable(&sp, 2, 1.1);
        let f = x.mul(&y).add(&Jet::constant(&sp, 2.0));
        let prod = f.mul(&f.recip());
        assert!((prod.value() - 1.0).abs() < 1e-14);
        for k in 1..sp.len() {
            assert!(prod.c[k].abs() < 1e-14);
        }
    }
}
