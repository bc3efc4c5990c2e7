//! The continuity-method machinery on the sphere model: the Calabi–Yau
//! segment t ∈ [−1, 0] (direct density assignment plus Poisson recovery) and
//! the Monge–Ampère segment t ∈ (0, 1) (damped Newton continuation with warm
//! starts and automatic Δt bisection), producing trajectories on which the
//! path identities are tested.
//!
//! The path, for a base metric ω with normalised Ricci potential f:
//!   ω_φtⁿ = e^{(t+1)f + c_t} ωⁿ   on [−1, 0]  (c_t fixed by volume),
//!   ω_φtⁿ = e^{f − t·φ_t} ωⁿ      on (0, 1)   (the t·φ term fixes the
//!                                               additive constant).
//! Solved nodes satisfy Ric ω_φt − ω_φt = −(1−t) i∂∂̄ φ_t.

use crate::error::{KefError, Result};
use crate::functionals::{closed_energies, form_cache, FormCache};
use crate::model::KahlerModel;
use crate::sphere::field::ScalarField;
use crate::sphere::grid::coeff_index;
use crate::sphere::model::{lambda_l, SphereForm, SphereModel};
use crate::util::pairwise_sum_fn;

#[derive(Clone, Debug)]
pub struct ContinuitySolveConfig {
    /// Number of Calabi–Yau nodes on [−1, 0] (endpoints included).
    pub cy_nodes: usize,
    /// Step of the Monge–Ampère segment.
    pub dt: f64,
    /// Terminal t (< 1; the t → 1 limits are extrapolated, never solved).
    pub t_end: f64,
    /// Newton residual tolerance (sup-norm).
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Δt bisection depth on step failure.
    pub max_bisections: usize,
    /// Inner linear-solve tolerance and iteration cap.
    pub linear_tol: f64,
    pub max_linear_iters: usize,
}

impl Default for ContinuitySolveConfig {
    fn default() -> ContinuitySolveConfig {
        ContinuitySolveConfig {
            cy_nodes: 8,
            dt: 0.02,
            t_end: 0.99,
            newton_tol: 1e-10,
            max_newton_iters: 30,
            max_bisections: 8,
            linear_tol: 1e-12,
            max_linear_iters: 2000,
        }
    }
}

impl ContinuitySolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cy_nodes < 2 {
            return Err(KefError::Config("cy_nodes must be ≥ 2".to_string()));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0 && self.t_end < 1.0) {
            return Err(KefError::Config(format!(
                "need 0 < dt and 0 < t_end < 1, got dt={} t_end={}",
                self.dt, self.t_end
            )));
        }
        if !(self.newton_tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(KefError::Config("tolerances must be positive".to_string()));
        }
        Ok(())
    }
}

/// Per-node functional diagnostics, all taken against the run's base form.
#[derive(Clone, Debug)]
pub struct NodeDiagnostics {
    pub i_minus_j: f64,
    /// E_k(ω, ω_φt) for k = 0..=n, closed route.
    pub e_k: Vec<f64>,
    pub ding_f: f64,
    /// sup |Ric ω_φt − ω_φt + (1−t) i∂∂̄φ_t| as an ω₀-relative density —
    /// the path identity of the Monge–Ampère segment, so only reported for
    /// nodes with t ≥ 0 (the Calabi–Yau segment solves a different
    /// equation and records its own residual).
    pub aubin_residual: Option<f64>,
}

#[derive(Clone)]
pub struct TrajectoryNode {
    pub t: f64,
    /// Path potential relative to the run's base metric, mean zero.
    pub phi: ScalarField,
    /// Normalising constant (Calabi–Yau segment only).
    pub c_t: Option<f64>,
    pub newton_iters: usize,
    /// Equation residual (sup-norm).
    pub residual: f64,
    /// Positivity margin of ω_φt (min ω₀-relative density).
    pub margin: f64,
    pub diagnostics: NodeDiagnostics,
}

pub struct ContinuityTrajectory {
    /// Potential of the run's base metric relative to ω₀.
    pub base_pot: ScalarField,
    pub nodes: Vec<TrajectoryNode>,
}

impl ContinuityTrajectory {
    /// Nodes of the Monge–Ampère segment (t > 0).
    pub fn ma_nodes(&self) -> impl Iterator<Item = &TrajectoryNode> {
        self.nodes.iter().filter(|n| n.t > 0.0)
    }
}

/// One Calabi–Yau node: ω_φtⁿ = e^{(t+1)f + c_t} ωⁿ with ∫ e^{(t+1)f+c_t} ωⁿ
/// = V fixing c_t. On the sphere the density is assigned directly and φ_t is
/// recovered by a Poisson solve; the returned residual is the sup-norm
/// equation defect (spectral projection loss only).
pub fn calabi_yau_segment(
    m: &SphereModel,
    base: &FormCache<SphereForm>,
    t: f64,
    config: &ContinuitySolveConfig,
) -> Result<(ScalarField, f64, f64)> {
    if !(-1.0..=0.0).contains(&t) {
        return Err(KefError::Config(format!(
            "Calabi–Yau segment needs t ∈ [−1, 0], got {t}"
        )));
    }
    let b = &base.form.dens.values;
    let w = &m.grid.w_omega;
    let e1: Vec<f64> = base.f_pot.iter().map(|f| ((t + 1.0) * f).exp()).collect();
    let moment =
        pairwise_sum_fn(b.len(), &mut |i| w[i] * e1[i] * b[i]) / m.volume();
    let c_t = -moment.ln();
    let target: Vec<f64> = e1
        .iter()
        .zip(b)
        .map(|(e, bb)| e * c_t.exp() * bb)
        .collect();
    let rho = ScalarField::from_values(
        &m.grid,
        target.iter().zip(b).map(|(x, y)| x - y).collect(),
    );
    // mass vanishes by the choice of c_t up to quadrature; re-centre exactly
    let excess = rho.integrate_omega() / m.volume();
    let phi = m.poisson_solve(&rho.add_constant(-excess))?.demean();
    let achieved = m.iddbar(&phi);
    let residual = achieved
        .values
        .iter()
        .zip(&rho.values)
        .fold(0.0_f64, |acc, (a, r)| acc.max((a - (r - excess)).abs()))
        .max(excess.abs());
    if residual > config.newton_tol.max(1e-8) {
        return Err(KefError::Inconsistency(format!(
            "Calabi–Yau node t={t}: projection residual {residual:.3e} \
             exceeds tolerance (band limit too low for this base)"
        )));
    }
    Ok((phi, c_t, residual))
}

/// Apply the Newton linearization (Δ_φ + t)δ, with Δ_φ h = P(h)/u_φ and
/// u_φ the ω₀-relative density of ω_φt.
fn linearized_apply(m: &SphereModel, u: &[f64], t: f64, delta: &ScalarField) -> ScalarField {
    let p = m.iddbar(delta);
    ScalarField::from_values(
        &m.grid,
        p.values
            .iter()
            .zip(u)
            .zip(&delta.values)
            .map(|((pv, uv), dv)| pv / uv + t * dv)
            .collect(),
    )
}

/// Flat preconditioner K = (Δ_ω₀ + t)^{-1}: diagonal 1/(t − λ_l) in the
/// spherical-harmonic basis (invertible for 0 < t < 1 since λ_l ≥ 1).
fn flat_inverse(m: &SphereModel, t: f64, r: &ScalarField) -> ScalarField {
    let mut coeffs = r.coeffs.clone();
    coeffs[0] /= t;
    for l in 1..=m.grid.l_max {
        let d = t - lambda_l(l);
        for mm in -(l as i64)..=(l as i64) {
            coeffs[coeff_index(l, mm)] /= d;
        }
    }
    ScalarField::from_coeffs(&m.grid, coeffs)
}

/// Solve (Δ_φ + t)δ = rhs by the flat-preconditioned minimal-residual
/// iteration: δ ← δ + α K r with α chosen to minimise the new residual
/// norm, so the residual is nonincreasing even when the density is far from
/// flat (plain Richardson can diverge near t → 1, where the preconditioner
/// amplifies the degree-1 band by 1/(t − 1)).
fn solve_linearized(
    m: &SphereModel,
    u: &[f64],
    t: f64,
    rhs: &ScalarField,
    config: &ContinuitySolveConfig,
) -> ScalarField {
    let mut delta = ScalarField::zero(&m.grid);
    let mut r = rhs.clone();
    let scale = rhs.sup_norm().max(1e-300);
    for _ in 0..config.max_linear_iters {
        if r.sup_norm() < config.linear_tol * scale {
            break;
        }
        let p = flat_inverse(m, t, &r);
        let ap = linearized_apply(m, u, t, &p);
        let num = r.parseval_inner(&ap);
        let den = ap.parseval_inner(&ap);
        if !(den > 0.0) || !num.is_finite() {
            break;
        }
        let alpha = num / den;
        delta = ScalarField::lincomb(&[(1.0, &delta), (alpha, &p)]);
        r = ScalarField::lincomb(&[(1.0, &r), (-alpha, &ap)]);
    }
    delta
}

pub struct AubinStep {
    pub phi: ScalarField,
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm residual after each accepted Newton iterate (for the
    /// quadratic-convergence diagnostics).
    pub residual_history: Vec<f64>,
}

/// One Monge–Ampère node: Newton iteration on
/// N(φ) = log(ω_φⁿ/ωⁿ) − f + tφ from a warm start.
pub fn aubin_step(
    m: &SphereModel,
    base: &FormCache<SphereForm>,
    t: f64,
    warm_start: &ScalarField,
    config: &ContinuitySolveConfig,
) -> Result<AubinStep> {
    if !(t > 0.0 && t < 1.0) {
        return Err(KefError::Config(format!(
            "Monge–Ampère segment needs t ∈ (0, 1), got {t}"
        )));
    }
    let b = &base.form.dens.values;
    let residual_of = |phi: &ScalarField| -> (Vec<f64>, Option<Vec<f64>>, f64) {
        // u = ω₀-density of ω_φt = b + P(φ); N = log(u/b) − f + tφ
        let p = m.iddbar(phi);
        let u: Vec<f64> = p.values.iter().zip(b).map(|(pv, bv)| pv + bv).collect();
        if u.iter().any(|&v| v <= 0.0) {
            return (u, None, f64::INFINITY);
        }
        let nvals: Vec<f64> = u
            .iter()
            .zip(b)
            .zip(base.f_pot.iter().zip(&phi.values))
            .map(|((uv, bv), (fv, pv))| (uv / bv).ln() - fv + t * pv)
            .collect();
        let sup = nvals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        (u, Some(nvals), sup)
    };

    let mut phi = warm_start.clone();
    let (mut u, mut nvals, mut res) = residual_of(&phi);
    if nvals.is_none() {
        return Err(KefError::Domain(format!(
            "aubin_step t={t}: warm start is not Kähler"
        )));
    }
    let mut history = vec![res];
    for iter in 0..config.max_newton_iters {
        if res < config.newton_tol {
            return Ok(AubinStep {
                phi,
                iterations: iter,
                residual: res,
                residual_history: history,
            });
        }
        let rhs = ScalarField::from_values(
            &m.grid,
            nvals.as_ref().unwrap().iter().map(|v| -v).collect(),
        );
        let delta = solve_linearized(m, &u, t, &rhs, config);
        // damping: halve on positivity loss or residual increase
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = ScalarField::lincomb(&[(1.0, &phi), (s, &delta)]);
            let (cu, cn, cres) = residual_of(&cand);
            if cn.is_some() && cres < res {
                phi = cand;
                u = cu;
                nvals = cn;
                res = cres;
                history.push(res);
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(KefError::Inconsistency(format!(
                "aubin_step t={t}: Newton stalled at residual {res:.3e} \
                 after {iter} iterations"
            )));
        }
    }
    if res < config.newton_tol {
        Ok(AubinStep {
            phi,
            iterations: config.max_newton_iters,
            residual: res,
            residual_history: history,
        })
    } else {
        Err(KefError::Inconsistency(format!(
            "aubin_step t={t}: residual {res:.3e} after {} iterations",
            config.max_newton_iters
        )))
    }
}

fn diagnostics(
    m: &SphereModel,
    base: &FormCache<SphereForm>,
    base_pot: &ScalarField,
    t: f64,
    phi: &ScalarField,
) -> Result<(NodeDiagnostics, f64)> {
    let abs_pot = ScalarField::lincomb(&[(1.0, base_pot), (1.0, phi)]);
    let form = m.form_from_potential(&abs_pot);
    let margin = form.dens.min_value();
    let cache = form_cache(m, &form)?;
    let mom = crate::functionals::pair_moments(m, &base.form, &form);
    let closed = closed_energies(m, base, &cache);
    let n = m.dim();
    let e_k: Vec<f64> = (0..=n).map(|k| closed.e_k_via_e0(k)).collect();
    // Ric ω_φt − ω_φt + (1−t) i∂∂̄φ_t as an ω₀-relative density (t ≥ 0)
    let aubin_residual = if t >= 0.0 {
        let pphi = m.iddbar(phi);
        Some(
            cache
                .ricci
                .dens
                .values
                .iter()
                .zip(&form.dens.values)
                .zip(&pphi.values)
                .fold(0.0_f64, |acc, ((r, d), p)| {
                    acc.max((r - d + (1.0 - t) * p).abs())
                }),
        )
    } else {
        None
    };
    Ok((
        NodeDiagnostics {
            i_minus_j: mom.aubin_i() - mom.aubin_j(),
            e_k,
            ding_f: closed.f,
            aubin_residual,
        },
        margin,
    ))
}

/// Full continuity run for a base metric given by its ω₀-relative potential.
pub fn continuity_run(
    m: &SphereModel,
    base_pot: &ScalarField,
    config: &ContinuitySolveConfig,
) -> Result<ContinuityTrajectory> {
    config.validate()?;
    let base_form = m.form_from_potential(base_pot);
    if base_form.dens.min_value() <= 0.0 {
        return Err(KefError::Domain(
            "continuity_run: base metric is not Kähler".to_string(),
        ));
    }
    let base = form_cache(m, &base_form)?;
    let mut nodes = Vec::new();

    // Calabi–Yau segment on [−1, 0]
    for j in 0..config.cy_nodes {
        let t = -1.0 + j as f64 / (config.cy_nodes - 1) as f64;
        let (phi, c_t, residual) = calabi_yau_segment(m, &base, t, config)?;
        let (diag, margin) = diagnostics(m, &base, base_pot, t, &phi)?;
        nodes.push(TrajectoryNode {
            t,
            phi,
            c_t: Some(c_t),
            newton_iters: 0,
            residual,
            margin,
            diagnostics: diag,
        });
    }

    // Monge–Ampère segment with warm starts and Δt bisection
    let mut warm = nodes.last().unwrap().phi.clone();
    let mut t = 0.0;
    while t < config.t_end - 1e-12 {
        let target = (t + config.dt).min(config.t_end);
        let mut next = target;
        let mut step = None;
        for _ in 0..=config.max_bisections {
            match aubin_step(m, &base, next, &warm, config) {
                Ok(s) => {
                    step = Some((next, s));
                    break;
                }
                Err(_) if (next - t) > 1e-6 => next = t + (next - t) / 2.0,
                Err(e) => {
                    return Err(KefError::Inconsistency(format!(
                        "continuity_run: trajectory aborted at t={next}: {e}"
                    )))
                }
            }
        }
        let (tn, s) = step.ok_or_else(|| {
            KefError::Inconsistency(format!(
                "continuity_run: Δt bisection exhausted between t={t} and {target}"
            ))
        })?;
        let (diag, margin) = diagnostics(m, &base, base_pot, tn, &s.phi)?;
        warm = s.phi.clone();
        nodes.push(TrajectoryNode {
            t: tn,
            phi: s.phi,
            c_t: None,
            newton_iters: s.iterations,
            residual: s.residual,
            margin,
            diagnostics: diag,
        });
        t = tn;
    }

    Ok(ContinuityTrajectory {
        base_pot: base_pot.clone(),
        nodes,
    })
}

/// Least-squares quadratic fit in s = 1 − t over the last `window` nodes,
/// read off at s = 0: the t → 1 extrapolation used for every limit quantity
/// (the path is never solved at t = 1).
pub fn extrapolate_to_one(ts: &[f64], vals: &[f64], window: usize) -> f64 {
    assert_eq!(ts.len(), vals.len());
    assert!(!ts.is_empty());
    let k = ts.len().saturating_sub(window);
    let (ts, vals) = (&ts[k..], &vals[k..]);
    let m = ts.len();
    if m < 3 {
        return vals[m - 1];
    }
    // normal equations for v ≈ a + b·s + c·s², s = 1 − t
    let mut g = [[0.0_f64; 3]; 3];
    let mut rhs = [0.0_f64; 3];
    for (t, v) in ts.iter().zip(vals) {
        let s = 1.0 - t;
        let row = [1.0, s, s * s];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * v;
        }
    }
    // 3×3 Gaussian elimination with partial pivoting
    let mut a = g;
    let mut b = rhs;
    for col in 0..3 {
        let piv = (col..3).max_by(|x, y| a[*x][col].abs().total_cmp(&a[*y][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0_f64; 3];
    for r in (0..3).rev() {
        let mut v = b[r];
        for c in r + 1..3 {
            v -= a[r][c] * x[c];
        }
        x[r] = v / a[r][r];
    }
    x[0]
}

/// ∫ v dt over sampled nodes by composite quadratic (Simpson-type)
/// quadrature on possibly non-uniform spacing: pairs of consecutive
/// intervals integrate the parabola through their three nodes; a leftover
/// final interval uses the parabola through the last three nodes. Exact for
/// quadratics; O(h⁴) on smooth data — the trapezoid rule's O(h²) error at
/// Δt = 0.02 would dominate the 1e−6 path-identity budgets.
pub fn integrate_samples(ts: &[f64], vs: &[f64]) -> f64 {
    assert_eq!(ts.len(), vs.len());
    let m = ts.len();
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return 0.5 * (ts[1] - ts[0]) * (vs[0] + vs[1]);
    }
    // integral of the parabola through (t0,v0),(t1,v1),(t2,v2) over [a, b]
    let parab = |i: usize, a: f64, b: f64| -> f64 {
        let (t0, t1, t2) = (ts[i], ts[i + 1], ts[i + 2]);
        let (v0, v1, v2) = (vs[i], vs[i + 1], vs[i + 2]);
        let quad = |num: f64, c0: f64, c1: f64| -> f64 {
            // ∫ (t−c0)(t−c1) dt / num over [a, b]
            let f = |t: f64| {
                t * t * t / 3.0 - (c0 + c1) * t * t / 2.0 + c0 * c1 * t
            };
            (f(b) - f(a)) / num
        };
        v0 * quad((t0 - t1) * (t0 - t2), t1, t2)
            + v1 * quad((t1 - t0) * (t1 - t2), t0, t2)
            + v2 * quad((t2 - t0) * (t2 - t1), t0, t1)
    };
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < m {
        acc += parab(i, ts[i], ts[i + 2]);
        i += 2;
    }
    if i + 1 < m {
        // odd leftover interval: parabola through the last three nodes
        acc += parab(m - 3, ts[m - 2], ts[m - 1]);
    }
    acc
}

/// ∫₀¹ (I−J)(ω, ω_φt) dt from the Monge–Ampère nodes: composite quadratic
/// quadrature on the solved range plus the extrapolated tail to t = 1.
pub fn integral_i_minus_j(traj: &ContinuityTrajectory, window: usize) -> f64 {
    // the t = 0 endpoint of the Calabi–Yau segment starts the integrand:
    // φ_0 is nonzero whenever f_ω is, so (I−J)(ω, ω_φ0) ≠ 0 in general
    let pts: Vec<(f64, f64)> = traj
        .nodes
        .iter()
        .filter(|n| n.t >= 0.0)
        .map(|n| (n.t, n.diagnostics.i_minus_j))
        .collect();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let acc = integrate_samples(&ts, &vs);
    let tail_v = extrapolate_to_one(&ts, &vs, window);
    let last = pts.last().unwrap();
    acc + 0.5 * (1.0 - last.0) * (last.1 + tail_v)
}
