//! Projected least-squares solver for the blown-up equations
//!
//! ```text
//! ‖Ψ‖_{L²} = 1,   D_{A⊗B} Ψ = 0,   sin²(α) F_A = cos²(α) μ(Ψ)
//! ```
//!
//! at fixed `α`, and the continuation driver along decreasing `α`.
//!
//! The energy `E = ½(‖Dψ‖² + ‖sin²α f − cos²α m‖²)` is minimized by gradient
//! descent with Barzilai–Borwein steps and Armijo backtracking. `ψ` moves on
//! the unit `L²` sphere (tangent gradient, then renormalization); the links
//! are rotated multiplicatively, `u ↦ u e^{iδθ}`. Gradients use the `L²`
//! metric for both `ψ` and the connection one-form `a = θ / h`.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirac::{dirac_raw, Transport};
use crate::gauge::{self, SUnConnection, SpinorField, U1Connection, PLANES};
use crate::lattice::TorusLattice;
use crate::linalg::{self, ZERO};
use crate::spin::{pauli, GammaRep, TracelessHermitian2, TwoForm};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Target for the residual norm `(‖Dψ‖² + ‖curvature part‖²)^{1/2}`.
    pub tolerance: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Stop early once the gradient norm falls below this multiple of the
    /// residual norm: the iterate is stationary with a positive residual.
    pub stationary_ratio: f64,
    /// Number of stored curvature pairs; zero gives plain Barzilai–Borwein steps.
    pub memory: usize,
    /// Bring the connection to Coulomb gauge before returning.
    pub gauge_fix: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 5000,
            tolerance: 1e-6,
            armijo: 1e-4,
            max_backtracks: 40,
            memory: 8,
            stationary_ratio: 1e-5,
            gauge_fix: true,
        }
    }
}

/// A triple `(A, Ψ, α)` with its recomputed residual.
#[derive(Clone, Debug, PartialEq)]
pub struct SWState {
    pub a: U1Connection,
    pub psi: SpinorField,
    pub alpha: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SWState {
    /// Normalizes `psi` and evaluates the residual.
    pub fn new(
        a: U1Connection,
        psi: SpinorField,
        alpha: f64,
        b: &SUnConnection,
        g: &GammaRep,
        lat: &TorusLattice,
    ) -> Result<Self> {
        let psi = gauge::normalize(&psi)?;
        let r = residual(&a, &psi, alpha, b, g, lat)?;
        Ok(SWState {
            a,
            psi,
            alpha,
            residual: r.norm,
            iterations: 0,
            converged: false,
        })
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.residual * self.residual
    }

    pub fn record(&self) -> StageRecord {
        StageRecord {
            alpha: self.alpha,
            residual: self.residual,
            energy: self.energy(),
            sup_psi: self.psi.sup_norm(),
            l2_mu: gauge::mu_l2_norm(&self.psi),
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Per-stage summary emitted by the runner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub alpha: f64,
    pub residual: f64,
    pub energy: f64,
    pub sup_psi: f64,
    pub l2_mu: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub dirac_part: SpinorField,
    pub curvature_part: Vec<TwoForm>,
    pub norm: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= FRAC_PI_2 + 1e-15 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `μ(Ψ)` at every site as the two-form `m` with `Σ m_p σ_p = μ(Ψ)`.
pub fn mu_two_forms(psi: &SpinorField) -> Vec<TwoForm> {
    (0..psi.num_sites())
        .map(|x| {
            TracelessHermitian2::new_unchecked(linalg::moment_map_slice(psi.at(x), psi.rank()))
                .to_two_form()
        })
        .collect()
}

fn curvature_part(
    a: &U1Connection,
    psi: &SpinorField,
    alpha: f64,
    lat: &TorusLattice,
) -> Result<Vec<TwoForm>> {
    let (s2, c2) = (alpha.sin().powi(2), alpha.cos().powi(2));
    let f = gauge::curvature(a, lat)?;
    let m = mu_two_forms(psi);
    Ok(f.iter()
        .zip(&m)
        .map(|(f, m)| {
            TwoForm([
                s2 * f.0[0] - c2 * m.0[0],
                s2 * f.0[1] - c2 * m.0[1],
                s2 * f.0[2] - c2 * m.0[2],
            ])
        })
        .collect())
}

/// `Dψ`, `sin²α F_A − cos²α μ(Ψ)` (as two-forms) and the combined `L²` norm.
pub fn residual(
    a: &U1Connection,
    psi: &SpinorField,
    alpha: f64,
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<Residual> {
    check_alpha(alpha)?;
    let dirac_part = crate::dirac::dirac(a, b, psi, g, lat)?;
    let curvature_part = curvature_part(a, psi, alpha, lat)?;
    let dv = lat.cell_volume();
    let d2 = linalg::norm_sq(dirac_part.data()) * dv;
    let c2 = linalg::neumaier_sum(curvature_part.iter().map(TwoForm::norm_sqr)) * dv;
    Ok(Residual {
        dirac_part,
        curvature_part,
        norm: (d2 + c2).sqrt(),
    })
}

/// `½ ‖residual‖²`.
pub fn energy(
    a: &U1Connection,
    psi: &SpinorField,
    alpha: f64,
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<f64> {
    let r = residual(a, psi, alpha, b, g, lat)?.norm;
    Ok(0.5 * r * r)
}

/// Energy with raw spinor data, `+∞` when a plaquette reaches the branch cut.
struct Evaluation {
    energy: f64,
    dirac: Vec<C64>,
    curv: Vec<TwoForm>,
}

struct Problem<'a> {
    b: &'a SUnConnection,
    g: &'a GammaRep,
    lat: &'a TorusLattice,
    alpha: f64,
    n: usize,
}

impl Problem<'_> {
    fn evaluate(&self, a: &U1Connection, psi: &SpinorField) -> Result<Option<Evaluation>> {
        let curv = match curvature_part(a, psi, self.alpha, self.lat) {
            Ok(c) => c,
            Err(Error::CurvatureBranch { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let dirac = dirac_raw(a, self.b, psi.data(), self.n, self.g, self.lat)?;
        let dv = self.lat.cell_volume();
        let e = linalg::norm_sq(&dirac) + linalg::neumaier_sum(curv.iter().map(TwoForm::norm_sqr));
        Ok(Some(Evaluation {
            energy: 0.5 * e * dv,
            dirac,
            curv,
        }))
    }

    /// `L²` gradient in `ψ` and `∂E/∂θ` for every link.
    fn gradient(
        &self,
        a: &U1Connection,
        psi: &SpinorField,
        ev: &Evaluation,
    ) -> (Vec<C64>, Vec<f64>) {
        let lat = self.lat;
        let n = self.n;
        let w = 2 * n;
        let h = lat.spacing();
        let dv = lat.cell_volume();
        let (s2, c2) = (self.alpha.sin().powi(2), self.alpha.cos().powi(2));
        let sigma = pauli();

        let mut gpsi = dirac_raw(a, self.b, &ev.dirac, n, self.g, lat).expect("shapes checked");
        gpsi.par_chunks_mut(w).enumerate().for_each_init(
            || vec![ZERO; w],
            |tmp, (x, o)| {
                let r = ev.curv[x];
                let m = sigma[0] * r.0[0] + sigma[1] * r.0[1] + sigma[2] * r.0[2];
                linalg::mat2_mul_hom(&m, psi.at(x), n, tmp);
                for e in 0..w {
                    o[e] -= tmp[e] * c2;
                }
            },
        );

        let tr = Transport::new(a, self.b, lat);
        let mut gtheta = vec![0.0; 3 * lat.num_sites()];
        gtheta.par_chunks_mut(3).enumerate().for_each_init(
            || vec![ZERO; 2 * w],
            |buf, (x, o)| {
                let (t, gt) = buf.split_at_mut(w);
                for j in 0..3 {
                    let y = lat.shift(x, j, true);
                    // d/dθ of u is i·u: forward term of Dψ(x), backward term of Dψ(x+ĵ)
                    tr.forward(psi.data(), x, j, t);
                    linalg::mat2_mul_hom(&self.g.gamma[j], t, n, gt);
                    let mut acc = im_inner(&ev.dirac[x * w..(x + 1) * w], gt);
                    tr.backward(psi.data(), y, j, t);
                    linalg::mat2_mul_hom(&self.g.gamma[j], t, n, gt);
                    acc += im_inner(&ev.dirac[y * w..(y + 1) * w], gt);
                    let mut grad = acc * dv / (2.0 * h);

                    let mut curv = 0.0;
                    for (c, &(p, q)) in PLANES.iter().enumerate() {
                        if p == j {
                            curv += ev.curv[x].0[c] - ev.curv[lat.shift(x, q, false)].0[c];
                        } else if q == j {
                            curv += ev.curv[lat.shift(x, p, false)].0[c] - ev.curv[x].0[c];
                        }
                    }
                    grad += curv * s2 * dv / (h * h);
                    o[j] = grad;
                }
            },
        );
        (gpsi, gtheta)
    }
}

/// `Re ⟨r, i t⟩ = Im Σ r t̄`.
fn im_inner(r: &[C64], t: &[C64]) -> f64 {
    r.iter().zip(t).map(|(r, t)| (r * t.conj()).im).sum()
}

/// Removes the radial component so the step stays tangent to the unit sphere.
fn project_tangent(grad: &mut [C64], psi: &[C64], dv: f64) {
    let radial = linalg::re_inner(grad, psi) * dv;
    let norm2 = linalg::norm_sq(psi) * dv;
    let c = radial / norm2;
    for (g, p) in grad.iter_mut().zip(psi) {
        *g -= p * c;
    }
}

/// Curvature pairs of the limited-memory quasi-Newton model.
struct Memory {
    cap: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl Memory {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if self.cap == 0 || sy <= 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// `−H g` by the two-loop recursion with initial scaling `gamma`.
    fn direction(&self, g: &[f64], gamma: f64) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            axpy(&mut q, -a, y);
            alphas.push(a);
        }
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            axpy(&mut q, a - b, s);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], t: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += t * x);
}

/// Packs a spinor part and a connection part into one real vector.
fn pack(psi: &[C64], a: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * psi.len() + a.len());
    for z in psi {
        v.push(z.re);
        v.push(z.im);
    }
    v.extend_from_slice(a);
    v
}

/// Solves at fixed `α`. Non-convergence is not an error: the best state is
/// returned with `converged = false`.
///
/// Variables are `(ψ, a)` with `a = θ / h`, both in the `L²` metric. The
/// search direction is limited-memory BFGS scaled by the Barzilai–Borwein
/// ratio `sᵀy / yᵀy`; `memory = 0` gives plain Barzilai–Borwein steps.
pub fn solve_fixed_alpha(
    init: SWState,
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
    opts: &SolverOptions,
) -> Result<SWState> {
    check_alpha(init.alpha)?;
    let prob = Problem {
        b,
        g,
        lat,
        alpha: init.alpha,
        n: init.psi.rank(),
    };
    let dv = lat.cell_volume();
    let h = lat.spacing();
    let len_psi = 2 * init.psi.data().len();
    let mut a = init.a;
    let mut psi = gauge::normalize(&init.psi)?;
    let mut ev = prob.evaluate(&a, &psi)?.ok_or(Error::CurvatureBranch {
        site: 0,
        angle: std::f64::consts::PI,
    })?;
    let mut iterations = 0;
    let mut converged = (2.0 * ev.energy).sqrt() <= opts.tolerance;

    let mut memory = Memory {
        cap: opts.memory,
        pairs: VecDeque::new(),
    };
    let mut gamma = 0.1 * h * h;
    let mut pending: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut last_step: f64 = 1.0;
    while !converged && iterations < opts.max_iterations {
        let (mut gpsi, gtheta) = prob.gradient(&a, &psi, &ev);
        project_tangent(&mut gpsi, psi.data(), dv);
        let ga: Vec<f64> = gtheta.iter().map(|d| d / (h * h)).collect();
        let grad = pack(&gpsi, &ga);
        if (dot(&grad, &grad) * dv).sqrt() <= opts.stationary_ratio * (2.0 * ev.energy).sqrt() {
            break;
        }
        if let Some((step, old)) = pending.take() {
            let y: Vec<f64> = grad.iter().zip(&old).map(|(a, b)| a - b).collect();
            let sy = dot(&step, &y);
            let yy = dot(&y, &y);
            if sy > 0.0 && yy > 0.0 {
                gamma = sy / yy;
            }
            memory.push(step, y);
        }

        let mut dir = memory.direction(&grad, gamma);
        // keep the spinor part tangent to the sphere at the current point
        let mut radial = 0.0;
        for (k, z) in psi.data().iter().enumerate() {
            radial += dir[2 * k] * z.re + dir[2 * k + 1] * z.im;
        }
        let c = radial / linalg::norm_sq(psi.data());
        for (k, z) in psi.data().iter().enumerate() {
            dir[2 * k] -= c * z.re;
            dir[2 * k + 1] -= c * z.im;
        }
        let mut slope = dot(&grad, &dir) * dv;
        if !(slope < 0.0) {
            memory.pairs.clear();
            dir = grad.iter().map(|x| -gamma * x).collect();
            slope = dot(&grad, &dir) * dv;
        }
        let dpsi: Vec<C64> = (0..len_psi / 2)
            .map(|k| C64::new(dir[2 * k], dir[2 * k + 1]))
            .collect();
        let dpsi = SpinorField::from_vec(lat, prob.n, dpsi)?;

        let mut accepted = false;
        let mut t = (4.0 * last_step).min(1.0);
        for _ in 0..=opts.max_backtracks {
            let trial_psi = match gauge::normalize(&psi.axpy(t, &dpsi)) {
                Ok(p) => p,
                Err(_) => {
                    t *= 0.5;
                    continue;
                }
            };
            let delta: Vec<f64> = dir[len_psi..].iter().map(|d| t * d * h).collect();
            let trial_a = a.rotated(&delta);
            if let Some(trial) = prob.evaluate(&trial_a, &trial_psi)? {
                if trial.energy <= ev.energy + opts.armijo * t * slope {
                    let mut step: Vec<f64> = Vec::with_capacity(dir.len());
                    for (new, old) in trial_psi.data().iter().zip(psi.data()) {
                        step.push(new.re - old.re);
                        step.push(new.im - old.im);
                    }
                    step.extend(delta.iter().map(|d| d / h));
                    pending = Some((step, grad.clone()));
                    psi = trial_psi;
                    a = trial_a;
                    ev = trial;
                    accepted = true;
                    last_step = t;
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            if memory.pairs.is_empty() {
                break;
            }
            memory.pairs.clear();
            continue;
        }
        converged = (2.0 * ev.energy).sqrt() <= opts.tolerance;
    }

    if opts.gauge_fix {
        let (gt, fixed) = gauge::coulomb_gauge_fix(&a, lat)?;
        psi = gauge::gauge_spinor(&gt, &psi);
        a = fixed;
    }
    let r = residual(&a, &psi, prob.alpha, b, g, lat)?;
    Ok(SWState {
        a,
        psi,
        alpha: prob.alpha,
        residual: r.norm,
        iterations,
        converged: r.norm <= opts.tolerance,
    })
}

/// Ordered solved states along a decreasing `α` schedule.
#[derive(Clone, Debug)]
pub struct ContinuationTrace {
    pub states: Vec<SWState>,
    /// Set when two consecutive stages failed and the schedule was cut short.
    pub aborted: bool,
}

impl ContinuationTrace {
    pub fn records(&self) -> Vec<StageRecord> {
        self.states.iter().map(SWState::record).collect()
    }

    pub fn converged(&self) -> impl Iterator<Item = &SWState> {
        self.states.iter().filter(|s| s.converged)
    }
}

/// Checks that a schedule is strictly decreasing inside `(0, π/2]`.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidSchedule("schedule is empty".into()));
    }
    for &a in schedule {
        check_alpha(a)
            .map_err(|_| Error::InvalidSchedule(format!("angle {a} outside (0, π/2]")))?;
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSchedule(
            "angles must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Solves along `schedule`, warm-starting each stage from the previous one.
pub fn continue_alpha(
    start: SWState,
    schedule: &[f64],
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
    opts: &SolverOptions,
) -> Result<ContinuationTrace> {
    validate_schedule(schedule)?;
    let mut states: Vec<SWState> = Vec::with_capacity(schedule.len());
    let mut current = start;
    let mut failures = 0;
    for &alpha in schedule {
        let init = SWState::new(current.a.clone(), current.psi.clone(), alpha, b, g, lat)?;
        let solved = solve_fixed_alpha(init, b, g, lat, opts)?;
        failures = if solved.converged { 0 } else { failures + 1 };
        current = solved.clone();
        states.push(solved);
        if failures == 2 {
            return Ok(ContinuationTrace {
                states,
                aborted: true,
            });
        }
    }
    Ok(ContinuationTrace {
        states,
        aborted: false,
    })
}
