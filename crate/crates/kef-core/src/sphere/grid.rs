//! Gauss-Legendre x equispaced-longitude grid on S² with spherical-harmonic
//! synthesis/analysis tables.
//!
//! Base form: ω = ω_FS,1 with total mass V = 2; real orthonormal spherical
//! harmonics w.r.t. the unit-sphere area measure dA (so ∫ Y_lm Y_l'm' ω =
//! (V/4π) δ). Coefficients are stored degree-major: idx(l,m) = l² + l + m.

use std::f64::consts::PI;

use crate::error::{KefError, Result};
use crate::util::{gauss_legendre, pairwise_sum_fn};

/// Total mass of the base form ω_FS,1 on S².
pub const V_SPHERE: f64 = 2.0;

pub fn coeff_index(l: usize, m: i64) -> usize {
    (l * l) as usize + (l as i64 + m) as usize
}

pub struct SphericalGrid {
    /// Spectral truncation degree.
    pub l_max: usize,
    pub n_lat: usize,
    pub n_lon: usize,
    /// Gauss-Legendre nodes μ = cos θ, ascending.
    pub mu: Vec<f64>,
    /// Gauss-Legendre weights in μ (sum to 2).
    pub w_mu: Vec<f64>,
    /// Longitude nodes (equispaced, starting at 0).
    pub lon: Vec<f64>,
    /// ω-measure quadrature weight per grid node, flattened lat-major;
    /// here constant in longitude: w_omega[i·n_lon + j] = w_mu[i]/n_lon·(V/2).
    pub w_omega: Vec<f64>,
    /// Orthonormal associated Legendre Q_lm(μ_i) for m ≥ 0,
    /// layout: plm[i_lat * n_lm + tri(l,m)].
    plm: Vec<f64>,
    n_lm: usize,
    /// cos(mφ_j), sin(mφ_j), layout [m * n_lon + j] for m = 0..=l_max.
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

/// Triangular index for (l, m), m ≥ 0, m ≤ l.
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl SphericalGrid {
    /// Build a grid for truncation degree `l` with 3/2-rule de-aliasing.
    pub fn new(l: usize) -> Result<SphericalGrid> {
        if l < 4 {
            return Err(KefError::Config(format!(
                "spectral truncation L = {l} too small (need L >= 4)"
            )));
        }
        // 3/2 de-aliasing: resolve quadratic products of band-limited fields.
        let n_lat = (3 * l) / 2 + 1;
        let n_lon = 3 * l + 1;
        debug_assert!(n_lat >= l + 1 && n_lon >= 2 * l + 1);

        let (mu, w_mu) = gauss_legendre(n_lat);
        let lon: Vec<f64> = (0..n_lon)
            .map(|j| 2.0 * PI * j as f64 / n_lon as f64)
            .collect();
        let mut w_omega = Vec::with_capacity(n_lat * n_lon);
        for i in 0..n_lat {
            let w = (V_SPHERE / 2.0) * w_mu[i] / n_lon as f64;
            for _ in 0..n_lon {
                w_omega.push(w);
            }
        }

        let n_lm = tri(l, l) + 1;
        let mut plm = vec![0.0; n_lat * n_lm];
        for (i, &x) in mu.iter().enumerate() {
            legendre_row(l, x, &mut plm[i * n_lm..(i + 1) * n_lm]);
        }

        let mut cos_m = vec![0.0; (l + 1) * n_lon];
        let mut sin_m = vec![0.0; (l + 1) * n_lon];
        for m in 0..=l {
            for j in 0..n_lon {
                cos_m[m * n_lon + j] = (m as f64 * lon[j]).cos();
                sin_m[m * n_lon + j] = (m as f64 * lon[j]).sin();
            }
        }

        Ok(SphericalGrid {
            l_max: l,
            n_lat,
            n_lon,
            mu,
            w_mu,
            lon,
            w_omega,
            plm,
            n_lm,
            cos_m,
            sin_m,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_lat * self.n_lon
    }

    pub fn n_coeffs(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// ∫ f ω by quadrature of grid values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_nodes());
        pairwise_sum_fn(values.len(), &mut |i| self.w_omega[i] * values[i])
    }

    /// Spherical-harmonic analysis: coefficients c_lm = ∫ f Y_lm dA.
    /// Exact for fields band-limited at l_max.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let (n_lat, n_lon, l_max) = (self.n_lat, self.n_lon, self.l_max);
        debug_assert_eq!(values.len(), n_lat * n_lon);
        // Longitude transform per latitude ring.
        let mut fc = vec![0.0; n_lat * (l_max + 1)];
        let mut fs = vec![0.0; n_lat * (l_max + 1)];
        for i in 0..n_lat {
            let row = &values[i * n_lon..(i + 1) * n_lon];
            for m in 0..=l_max {
                let (cm, sm) = (
                    &self.cos_m[m * n_lon..(m + 1) * n_lon],
                    &self.sin_m[m * n_lon..(m + 1) * n_lon],
                );
                fc[i * (l_max + 1) + m] =
                    pairwise_sum_fn(n_lon, &mut |j| row[j] * cm[j]);
                if m > 0 {
                    fs[i * (l_max + 1) + m] =
                        pairwise_sum_fn(n_lon, &mut |j| row[j] * sm[j]);
                }
            }
        }
        // Latitude transform: c = (2π/n_lon) Σ_i w_i Q_lm(μ_i) · (√2·)f_{c,s}.
        let lon_fac = 2.0 * PI / n_lon as f64;
        let mut coeffs = vec![0.0; self.n_coeffs()];
        for l in 0..=l_max {
            for m in 0..=l {
                let t = tri(l, m);
                let sc = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                let c = pairwise_sum_fn(n_lat, &mut |i| {
                    self.w_mu[i] * self.plm[i * self.n_lm + t] * fc[i * (l_max + 1) + m]
                });
                coeffs[coeff_index(l, m as i64)] = lon_fac * sc * c;
                if m > 0 {
                    let s = pairwise_sum_fn(n_lat, &mut |i| {
                        self.w_mu[i] * self.plm[i * self.n_lm + t] * fs[i * (l_max + 1) + m]
                    });
                    coeffs[coeff_index(l, -(m as i64))] = lon_fac * sc * s;
                }
            }
        }
        coeffs
    }

    /// Spherical-harmonic synthesis onto the grid.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let (n_lat, n_lon, l_max) = (self.n_lat, self.n_lon, self.l_max);
        debug_assert_eq!(coeffs.len(), self.n_coeffs());
        // Latitude part: g_{c,s}[i][m] = Σ_l c_{l,±m} √2· Q_lm(μ_i).
        let mut gc = vec![0.0; n_lat * (l_max + 1)];
        let mut gs = vec![0.0; n_lat * (l_max + 1)];
        for i in 0..n_lat {
            let p = &self.plm[i * self.n_lm..(i + 1) * self.n_lm];
            for m in 0..=l_max {
                let sc = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                let mut ac = 0.0;
                let mut as_ = 0.0;
                for l in m..=l_max {
                    ac += coeffs[coeff_index(l, m as i64)] * p[tri(l, m)];
                    if m > 0 {
                        as_ += coeffs[coeff_index(l, -(m as i64))] * p[tri(l, m)];
                    }
                }
                gc[i * (l_max + 1) + m] = sc * ac;
                gs[i * (l_max + 1) + m] = sc * as_;
            }
        }
        let mut values = vec![0.0; n_lat * n_lon];
        for i in 0..n_lat {
            for j in 0..n_lon {
                let mut v = 0.0;
                for m in 0..=l_max {
                    v += gc[i * (l_max + 1) + m] * self.cos_m[m * n_lon + j];
                    if m > 0 {
                        v += gs[i * (l_max + 1) + m] * self.sin_m[m * n_lon + j];
                    }
                }
                values[i * n_lon + j] = v;
            }
        }
        values
    }

    /// Evaluate a coefficient vector at an arbitrary point (μ, φ).
    pub fn evaluate_at(&self, coeffs: &[f64], mu: f64, lon: f64) -> f64 {
        let l_max = self.l_max;
        let n_lm = tri(l_max, l_max) + 1;
        let mut q = vec![0.0; n_lm];
        legendre_row(l_max, mu, &mut q);
        let mut v = 0.0;
        for m in 0..=l_max {
            let sc = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let (cm, sm) = ((m as f64 * lon).cos(), (m as f64 * lon).sin());
            for l in m..=l_max {
                v += sc * q[tri(l, m)] * cm * coeffs[coeff_index(l, m as i64)];
                if m > 0 {
                    v += sc * q[tri(l, m)] * sm * coeffs[coeff_index(l, -(m as i64))];
                }
            }
        }
        v
    }

    /// Orthonormal Q_lm(μ) for a single point (used by the arbitrary-point
    /// evaluator and by tests).
    pub fn q_lm(&self, l: usize, m: usize, mu: f64) -> f64 {
        let mut q = vec![0.0; tri(self.l_max, self.l_max) + 1];
        legendre_row(self.l_max, mu, &mut q);
        q[tri(l, m)]
    }
}

/// Fill `out[tri(l,m)]` with the orthonormal associated Legendre functions
/// Q_lm(x) for 0 ≤ m ≤ l ≤ l_max (no Condon-Shortley phase), normalised so the
/// complex harmonics Q_lm e^{imφ} are orthonormal on the unit sphere.
fn legendre_row(l_max: usize, x: f64, out: &mut [f64]) {
    let s = (1.0 - x * x).sqrt();
    out[tri(0, 0)] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=l_max {
        // Q_mm = Q_{m-1,m-1} · sqrt((2m+1)/(2m)) · s
        out[tri(m, m)] =
            out[tri(m - 1, m - 1)] * ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt() * s;
    }
    for m in 0..l_max {
        out[tri(m + 1, m)] = x * (2.0 * m as f64 + 3.0).sqrt() * out[tri(m, m)];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((2.0 * lf + 1.0) * (lf - 1.0 + mf) * (lf - 1.0 - mf))
                / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                .sqrt();
            out[tri(l, m)] = a * x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)];
        }
    }
}
