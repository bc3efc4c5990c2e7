//! Serializable per-pair energy reports: every functional with every
//! computed route and the cross-route residuals, so convention drift can
//! never pass silently — acceptance gates on the max residual.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::KahlerModel;

use super::moments::{aubin_i_direct, aubin_j_direct, pair_moments};
use super::paths::{aubin_j_path, e_k_path, i_minus_j_path, j_k_path, PathSpec};
use super::{closed_energies, FormCache};

pub const SCHEMA_VERSION: u32 = 1;

/// One functional computed by several routes; the residual is the max
/// pairwise disagreement.
#[derive(Clone, Serialize, Deserialize)]
pub struct RouteTable {
    pub values: BTreeMap<String, f64>,
    pub max_residual: f64,
}

impl RouteTable {
    pub fn new(entries: &[(&str, f64)]) -> RouteTable {
        let mut max_residual = 0.0_f64;
        for (i, (_, a)) in entries.iter().enumerate() {
            for (_, b) in entries.iter().skip(i + 1) {
                max_residual = max_residual.max((a - b).abs());
            }
        }
        RouteTable {
            values: entries.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            max_residual,
        }
    }

    pub fn value(&self, route: &str) -> Option<f64> {
        self.values.get(route).copied()
    }
}

#[derive(Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub grid: String,
    pub seeds: Vec<u64>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub schema_version: u32,
    pub n: usize,
    pub volume: f64,
    pub provenance: Provenance,
    pub i: RouteTable,
    pub j: RouteTable,
    pub i_minus_j: RouteTable,
    /// I_k for k = 0..=n (single closed route; both displayed expressions
    /// are the same discrete sum).
    pub i_k: Vec<f64>,
    /// J_k for k = 0..=n: closed / identity / (optionally) path routes.
    pub j_k: Vec<RouteTable>,
    /// E_k for k = 0..=n: via_E0 / via_En / interpolated(l) / (opt.) path.
    pub e_k: Vec<RouteTable>,
    pub ding_f: f64,
    /// (1/V)∫ f_α αⁿ and (1/V)∫ f_β βⁿ (each ≤ 0 by Jensen).
    pub f_mean_a: f64,
    pub f_mean_b: f64,
    /// Numerical μ_k = wedge(Ric α^{k+1}, α^{n−1−k})/V for k = 0..=n−1
    /// (exact value 1 in the anticanonical class).
    pub mu_k: Vec<f64>,
    /// Max residual over all route tables.
    pub max_residual: f64,
}

pub struct ReportOptions {
    /// Include the Gauss–Legendre path routes (J, I−J, J_k, E_k).
    pub include_paths: bool,
    /// Include the (more expensive) E_k path route.
    pub include_e_k_path: bool,
    pub path_nodes: usize,
}

impl Default for ReportOptions {
    fn default() -> ReportOptions {
        ReportOptions {
            include_paths: true,
            include_e_k_path: false,
            path_nodes: 33,
        }
    }
}

pub fn energy_report<M: KahlerModel>(
    m: &M,
    provenance: Provenance,
    ca: &FormCache<M::Form>,
    cb: &FormCache<M::Form>,
    opts: &ReportOptions,
) -> Result<EnergyReport> {
    let n = m.dim();
    let a = &ca.form;
    let b = &cb.form;
    let mom = pair_moments(m, a, b);
    let spec: PathSpec<M::Form> = PathSpec::Affine {
        nodes: opts.path_nodes,
    };
    let kahler = m.is_kahler(a) && m.is_kahler(b);

    let i_entries = vec![("closed", mom.aubin_i()), ("direct", aubin_i_direct(m, a, b)?)];
    let mut j_entries = vec![("closed", mom.aubin_j()), ("direct", aubin_j_direct(m, a, b)?)];
    let mut imj_entries = vec![("closed", mom.aubin_i() - mom.aubin_j())];
    if opts.include_paths {
        j_entries.push(("path", aubin_j_path(m, a, b, &spec)?));
        imj_entries.push(("path", i_minus_j_path(m, a, b, &spec)?));
    }

    let i_k: Vec<f64> = (0..=n).map(|k| mom.i_k(k)).collect();
    let mut j_k = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut entries = vec![
            ("closed", mom.j_k(k)),
            ("identity", mom.aubin_j() - mom.i_k(k)),
        ];
        if opts.include_paths && kahler {
            entries.push(("path", j_k_path(m, a, b, k, &spec)?));
        }
        j_k.push(RouteTable::new(&entries));
    }

    let closed = closed_energies(m, ca, cb);
    let mut e_k = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut entries: Vec<(String, f64)> = Vec::new();
        entries.push(("via_E0".to_string(), closed.e_k_via_e0(k)));
        entries.push(("via_En".to_string(), closed.e_k_via_en(k)));
        for l in 1..=k {
            entries.push((format!("interpolated_{l}"), closed.e_k(k, l)));
        }
        if opts.include_e_k_path && kahler {
            entries.push(("path".to_string(), e_k_path(m, a, b, k, &spec)?));
        }
        let refs: Vec<(&str, f64)> = entries.iter().map(|(s, v)| (s.as_str(), *v)).collect();
        e_k.push(RouteTable::new(&refs));
    }

    let mut mu_k = Vec::with_capacity(n);
    for k in 0..n {
        let mut forms: Vec<&M::Form> = Vec::with_capacity(n);
        for _ in 0..k + 1 {
            forms.push(&ca.ricci);
        }
        for _ in 0..n - 1 - k {
            forms.push(a);
        }
        mu_k.push(m.weighted_wedge(None, &forms) / m.volume());
    }

    let i = RouteTable::new(&i_entries);
    let j = RouteTable::new(&j_entries);
    let i_minus_j = RouteTable::new(&imj_entries);
    let max_residual = [&i, &j, &i_minus_j]
        .into_iter()
        .chain(j_k.iter())
        .chain(e_k.iter())
        .map(|t| t.max_residual)
        .fold(0.0_f64, f64::max);

    Ok(EnergyReport {
        schema_version: SCHEMA_VERSION,
        n,
        volume: m.volume(),
        provenance,
        i,
        j,
        i_minus_j,
        i_k,
        j_k,
        e_k,
        ding_f: closed.f,
        f_mean_a: ca.f_mean,
        f_mean_b: cb.f_mean,
        mu_k,
        max_residual,
    })
}
