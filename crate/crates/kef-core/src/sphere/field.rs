//! Dual grid/spectral scalar fields on the sphere.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::SphericalGrid;
use crate::util::pairwise_sum_fn;

#[derive(Clone)]
pub struct ScalarField {
    pub grid: Arc<SphericalGrid>,
    /// Degree-major real SH coefficients, idx(l,m) = l² + l + m.
    pub coeffs: Vec<f64>,
    /// Grid values, lat-major.
    pub values: Vec<f64>,
    /// sup |values − synthesis(coeffs)|: zero for band-limited fields,
    /// the monitored truncation loss for fields born on the grid
    /// (exp/log/products of resolved fields).
    pub projection_loss: f64,
}

impl ScalarField {
    pub fn zero(grid: &Arc<SphericalGrid>) -> ScalarField {
        ScalarField {
            grid: grid.clone(),
            coeffs: vec![0.0; grid.n_coeffs()],
            values: vec![0.0; grid.n_nodes()],
            projection_loss: 0.0,
        }
    }

    pub fn constant(grid: &Arc<SphericalGrid>, c: f64) -> ScalarField {
        let mut f = ScalarField::zero(grid);
        // Y_00 = 1/sqrt(4π)
        f.coeffs[0] = c * (4.0 * std::f64::consts::PI).sqrt();
        for v in f.values.iter_mut() {
            *v = c;
        }
        f
    }

    pub fn from_coeffs(grid: &Arc<SphericalGrid>, coeffs: Vec<f64>) -> ScalarField {
        let values = grid.synthesize(&coeffs);
        ScalarField {
            grid: grid.clone(),
            coeffs,
            values,
            projection_loss: 0.0,
        }
    }

    /// Build from grid values; coefficients are the L²(dA) projection and the
    /// sup-norm distance between the values and their band-limited projection
    /// is recorded, never silently discarded.
    pub fn from_values(grid: &Arc<SphericalGrid>, values: Vec<f64>) -> ScalarField {
        let coeffs = grid.analyze(&values);
        let synth = grid.synthesize(&coeffs);
        let mut loss: f64 = 0.0;
        for (a, b) in values.iter().zip(&synth) {
            loss = loss.max((a - b).abs());
        }
        ScalarField {
            grid: grid.clone(),
            coeffs,
            values,
            projection_loss: loss,
        }
    }

    /// (1/V) ∫ f ω.
    pub fn omega_mean(&self) -> f64 {
        self.grid.integrate(&self.values) / super::grid::V_SPHERE
    }

    pub fn integrate_omega(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// Pointwise map on grid values with re-projection.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise product with re-projection.
    pub fn pointwise_mul(&self, other: &ScalarField) -> ScalarField {
        ScalarField::from_values(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn lincomb(terms: &[(f64, &ScalarField)]) -> ScalarField {
        assert!(!terms.is_empty());
        let grid = terms[0].1.grid.clone();
        let mut out = ScalarField::zero(&grid);
        for (c, f) in terms {
            for (o, v) in out.coeffs.iter_mut().zip(&f.coeffs) {
                *o += c * v;
            }
            for (o, v) in out.values.iter_mut().zip(&f.values) {
                *o += c * v;
            }
            out.projection_loss += c.abs() * f.projection_loss;
        }
        out
    }

    pub fn add_constant(&self, c: f64) -> ScalarField {
        let mut out = self.clone();
        out.coeffs[0] += c * (4.0 * std::f64::consts::PI).sqrt();
        for v in out.values.iter_mut() {
            *v += c;
        }
        out
    }

    /// Mean-zero canonicalisation (w.r.t. ω, equivalently dA).
    pub fn demean(&self) -> ScalarField {
        self.add_constant(-self.omega_mean())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
    }

    /// ∫ f g ω via Parseval: (V/4π) Σ c_lm d_lm. Exact for band-limited
    /// factors; used as the quadrature-exactness oracle.
    pub fn parseval_inner(&self, other: &ScalarField) -> f64 {
        let s = pairwise_sum_fn(self.coeffs.len(), &mut |i| {
            self.coeffs[i] * other.coeffs[i]
        });
        super::grid::V_SPHERE / (4.0 * std::f64::consts::PI) * s
    }

    pub fn evaluate_at(&self, mu: f64, lon: f64) -> f64 {
        self.grid.evaluate_at(&self.coeffs, mu, lon)
    }
}

/// Serialisable form of a field (degree-major coefficient list).
#[derive(Serialize, Deserialize)]
pub struct FieldArchive {
    pub l_max: usize,
    pub coeffs: Vec<f64>,
}

impl From<&ScalarField> for FieldArchive {
    fn from(f: &ScalarField) -> FieldArchive {
        FieldArchive {
            l_max: f.grid.l_max,
            coeffs: f.coeffs.clone(),
        }
    }
}
