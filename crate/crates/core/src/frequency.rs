//! Frequency-function diagnostics around a base point.
//!
//! ```text
//! h_x(r) = ∫_{∂B_r(x)} |Ψ|²
//! H_x(r) = ∫_{B_r(x)} |∇Ψ|² + tan(α)⁻² |μ(Ψ)|²
//! n_x(r) = r H_x(r) / h_x(r)
//! ```
//!
//! All radii are shell radii `k h`; nothing is interpolated between shells.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirac::{covariant_derivative, gradient_density};
use crate::gauge::{self, SUnConnection, SpinorField, U1Connection};
use crate::lattice::{torus_distance, TorusLattice};
use crate::linalg;
use crate::solver::{ContinuationTrace, SWState};
use crate::spin::{GammaRep, TwoForm};
use crate::{Error, Result};

/// Radial profile of `h`, `H` and `n` about one base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub center: usize,
    pub radii: Vec<f64>,
    pub h_vals: Vec<f64>,
    #[serde(rename = "H_vals")]
    pub big_h_vals: Vec<f64>,
    /// `None` where `h = 0`.
    pub n_vals: Vec<Option<f64>>,
    pub rho: f64,
    pub alpha: f64,
}

impl FrequencyProfile {
    /// Columns `r, h, H, n`; undefined `n` is written as `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,h,H,n\n");
        for k in 0..self.radii.len() {
            let n = self.n_vals[k].unwrap_or(f64::NAN);
            writeln!(
                out,
                "{:e},{:e},{:e},{:e}",
                self.radii[k], self.h_vals[k], self.big_h_vals[k], n
            )
            .unwrap();
        }
        out
    }

    /// Shell indices where `n` is defined.
    pub fn valid(&self) -> Vec<usize> {
        (0..self.radii.len())
            .filter(|&k| self.n_vals[k].is_some())
            .collect()
    }
}

/// `|μ(Ψ)|²` per site (Frobenius norm).
pub fn mu_density(psi: &SpinorField) -> Vec<f64> {
    (0..psi.num_sites())
        .map(|x| linalg::moment_map_slice(psi.at(x), psi.rank()).norm_sqr())
        .collect()
}

/// `h_x(r_k)` for every shell radius.
pub fn compute_h(psi: &SpinorField, x: usize, lat: &TorusLattice) -> Vec<f64> {
    let h = lat.spacing();
    lat.shell_masses(&psi.pointwise_norm_sq(), x)
        .into_iter()
        .map(|m| m / h)
        .collect()
}

/// Weight of the `μ` term: `tan(α)⁻²`, and `0` for the `α = 0` limit
/// convention where only the derivative term is kept.
fn mu_weight(alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        Ok(0.0)
    } else if alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_2 + 1e-15 {
        Ok((alpha.cos() / alpha.sin()).powi(2))
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Integrand of `H`: `|∇Ψ|² + tan(α)⁻² |μ(Ψ)|²` per site.
pub fn energy_density(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
    lat: &TorusLattice,
) -> Result<Vec<f64>> {
    let w = mu_weight(alpha)?;
    let grad = gradient_density(a, b, psi, lat)?;
    if w == 0.0 {
        return Ok(grad);
    }
    Ok(grad
        .iter()
        .zip(mu_density(psi))
        .map(|(g, m)| g + w * m)
        .collect())
}

fn cumulative(masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    masses
        .iter()
        .map(|m| {
            acc += m;
            acc
        })
        .collect()
}

/// `H_x(r_k)` for every shell radius. The Clifford representation is not
/// needed by the integrand and is accepted for interface symmetry.
pub fn compute_big_h(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
    x: usize,
    lat: &TorusLattice,
    _g: &GammaRep,
) -> Result<Vec<f64>> {
    let density = energy_density(a, b, psi, alpha, lat)?;
    Ok(cumulative(&lat.shell_masses(&density, x)))
}

fn assemble(
    center: usize,
    alpha: f64,
    h_vals: Vec<f64>,
    big_h_vals: Vec<f64>,
    rho: f64,
    lat: &TorusLattice,
) -> FrequencyProfile {
    let radii = lat.shell_radii();
    let n_vals = radii
        .iter()
        .zip(h_vals.iter().zip(&big_h_vals))
        .map(|(r, (h, big))| (*h > 0.0).then(|| r * big / h))
        .collect();
    FrequencyProfile {
        center,
        radii,
        h_vals,
        big_h_vals,
        n_vals,
        rho,
        alpha,
    }
}

pub fn frequency(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
    x: usize,
    lat: &TorusLattice,
    g: &GammaRep,
) -> Result<FrequencyProfile> {
    let h_vals = compute_h(psi, x, lat);
    let big_h_vals = compute_big_h(a, b, psi, alpha, x, lat, g)?;
    let rho = critical_radius(a, x, lat)?;
    Ok(assemble(x, alpha, h_vals, big_h_vals, rho, lat))
}

/// Profiles at many base points sharing one evaluation of the densities.
pub fn frequency_profiles(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
    centers: &[usize],
    lat: &TorusLattice,
) -> Result<Vec<FrequencyProfile>> {
    let density = energy_density(a, b, psi, alpha, lat)?;
    let norm2 = psi.pointwise_norm_sq();
    let f2 = curvature_density(a, lat)?;
    let h = lat.spacing();
    Ok(centers
        .iter()
        .map(|&x| {
            let h_vals = lat
                .shell_masses(&norm2, x)
                .into_iter()
                .map(|m| m / h)
                .collect();
            let big = cumulative(&lat.shell_masses(&density, x));
            let rho = rho_from_density(&f2, x, lat);
            assemble(x, alpha, h_vals, big, rho, lat)
        })
        .collect())
}

/// `|F_A|²` per site from the plaquette curvature.
pub fn curvature_density(a: &U1Connection, lat: &TorusLattice) -> Result<Vec<f64>> {
    Ok(gauge::curvature(a, lat)?
        .iter()
        .map(TwoForm::norm_sqr)
        .collect())
}

fn rho_from_density(f2: &[f64], x: usize, lat: &TorusLattice) -> f64 {
    let radii = lat.shell_radii();
    let ball = cumulative(&lat.shell_masses(f2, x));
    let mut rho = 0.0;
    for (r, m) in radii.iter().zip(ball) {
        if r.sqrt() * m.sqrt() <= 1.0 {
            rho = *r;
        } else {
            break;
        }
    }
    rho
}

/// Largest shell radius `r ≤ r_max` with `r^{1/2} ‖F_A‖_{L²(B_r(x))} ≤ 1`.
pub fn critical_radius(a: &U1Connection, x: usize, lat: &TorusLattice) -> Result<f64> {
    Ok(rho_from_density(&curvature_density(a, lat)?, x, lat))
}

/// Smallest `c` (to `1e−3`) with
/// `n(s) ≤ e^{c(r²−s²)} n(r) + c(r²−s²)` for all valid `s < r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub c: f64,
    /// Pairs `(s, r)` of radii still violating the bound when the search cap
    /// was reached; empty otherwise.
    pub violations: Vec<(f64, f64)>,
}

const MONOTONICITY_CAP: f64 = 1e8;

fn violations_at(c: f64, pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &(s, ns)) in pts.iter().enumerate() {
        for &(r, nr) in &pts[i + 1..] {
            let d = r * r - s * s;
            let rhs = (c * d).exp() * nr + c * d;
            if ns > rhs * (1.0 + 1e-12) + 1e-300 {
                out.push((s, r));
            }
        }
    }
    out
}

pub fn monotonicity_report(profile: &FrequencyProfile) -> Result<MonotonicityReport> {
    let pts: Vec<(f64, f64)> = profile
        .valid()
        .into_iter()
        .map(|k| (profile.radii[k], profile.n_vals[k].unwrap()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateProfile(format!(
            "{} radii with h > 0, need at least 3",
            pts.len()
        )));
    }
    if violations_at(0.0, &pts).is_empty() {
        return Ok(MonotonicityReport {
            c: 0.0,
            violations: Vec::new(),
        });
    }
    let mut hi = 1.0;
    while !violations_at(hi, &pts).is_empty() {
        hi *= 2.0;
        if hi > MONOTONICITY_CAP {
            return Ok(MonotonicityReport {
                c: MONOTONICITY_CAP,
                violations: violations_at(MONOTONICITY_CAP, &pts),
            });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if violations_at(mid, &pts).is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MonotonicityReport {
        c: hi,
        violations: Vec::new(),
    })
}

fn shell_index(profile: &FrequencyProfile, r: f64) -> Result<usize> {
    let h = profile.radii.get(1).copied().unwrap_or(1.0);
    let k = (r / h).round();
    if k < 0.0 || (r - k * h).abs() > 1e-9 * h.max(r) || k as usize >= profile.radii.len() {
        return Err(Error::NotShellRadius(r));
    }
    Ok(k as usize)
}

/// Maximum over pairs of `|log h(r) − log((r/s)² exp(2∫_s^r n/t dt) h(s))|`,
/// with the integral by the trapezoid rule over shell radii.
pub fn growth_law_check(profile: &FrequencyProfile, pairs: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(s, r) in pairs {
        let (ks, kr) = (shell_index(profile, s)?, shell_index(profile, r)?);
        if ks == 0 || kr < ks {
            return Err(Error::RadiusOutOfRange {
                radius: s,
                r_max: r,
            });
        }
        for k in ks..=kr {
            if profile.h_vals[k] <= 0.0 {
                return Err(Error::ZeroH(profile.radii[k]));
            }
        }
        let integrand = |k: usize| profile.n_vals[k].unwrap() / profile.radii[k];
        let mut integral = 0.0;
        for k in ks..kr {
            integral +=
                0.5 * (integrand(k) + integrand(k + 1)) * (profile.radii[k + 1] - profile.radii[k]);
        }
        let lhs = profile.h_vals[kr].ln();
        let rhs = 2.0 * (profile.radii[kr] / profile.radii[ks]).ln()
            + 2.0 * integral
            + profile.h_vals[ks].ln();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// All pairs of shell radii `s < r` with `k_min h ≤ s` and `r ≤ r_max / 2`.
pub fn growth_pairs(lat: &TorusLattice, k_min: usize) -> Vec<(f64, f64)> {
    let radii = lat.shell_radii();
    let k_hi = lat.num_shells().saturating_sub(1) / 2;
    let mut out = Vec::new();
    for ks in k_min.max(1)..=k_hi {
        for kr in ks + 1..=k_hi {
            out.push((radii[ks], radii[kr]));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub gamma: f64,
    pub seminorm: f64,
    pub witness: (usize, usize),
}

/// `max ||Ψ|(x) − |Ψ|(y)| / d(x, y)^γ` over all nearest-neighbor pairs and
/// `samples` seeded random pairs.
pub fn holder_seminorm(
    psi: &SpinorField,
    gamma: f64,
    lat: &TorusLattice,
    samples: usize,
    seed: u64,
) -> Result<HolderReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidExponent(gamma));
    }
    let abs: Vec<f64> = psi.pointwise_norm_sq().iter().map(|v| v.sqrt()).collect();
    let m = lat.num_sites();
    let mut best = HolderReport {
        gamma,
        seminorm: 0.0,
        witness: (0, 0),
    };
    let mut consider = |x: usize, y: usize| {
        if x == y {
            return;
        }
        let q = (abs[x] - abs[y]).abs() / torus_distance(x, y, lat).powf(gamma);
        if q > best.seminorm {
            best.seminorm = q;
            best.witness = (x, y);
        }
    };
    for x in 0..m {
        for j in 0..3 {
            consider(x, lat.shift(x, j, true));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = rng.gen_range(0..m);
        let y = rng.gen_range(0..m);
        consider(x, y);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetReport {
    pub threshold: f64,
    pub sites: Vec<usize>,
    pub volume_fraction: f64,
    /// The complement is nonempty and 6-connected.
    pub complement_connected: bool,
}

pub fn zero_set(psi: &SpinorField, threshold: f64, lat: &TorusLattice) -> ZeroSetReport {
    let abs: Vec<f64> = psi.pointwise_norm_sq().iter().map(|v| v.sqrt()).collect();
    let m = lat.num_sites();
    let inside: Vec<bool> = abs.iter().map(|&v| v <= threshold).collect();
    let sites: Vec<usize> = (0..m).filter(|&x| inside[x]).collect();
    let outside = m - sites.len();
    let complement_connected = match (0..m).find(|&x| !inside[x]) {
        None => false,
        Some(start) => {
            let mut seen = vec![false; m];
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            let mut count = 1;
            while let Some(x) = queue.pop_front() {
                for j in 0..3 {
                    for fwd in [true, false] {
                        let y = lat.shift(x, j, fwd);
                        if !inside[y] && !seen[y] {
                            seen[y] = true;
                            count += 1;
                            queue.push_back(y);
                        }
                    }
                }
            }
            count == outside
        }
    };
    ZeroSetReport {
        threshold,
        volume_fraction: sites.len() as f64 / m as f64,
        sites,
        complement_connected,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformConvergenceReport {
    pub alphas: Vec<f64>,
    /// `sup_r |h_i(r) − h_last(r)|` per converged stage.
    pub h_deviation: Vec<f64>,
    #[serde(rename = "H_deviation")]
    pub big_h_deviation: Vec<f64>,
    /// Both deviation sequences are nonincreasing over the final half.
    pub final_half_nonincreasing: bool,
}

fn sup_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn nonincreasing_tail(v: &[f64]) -> bool {
    let start = v.len() / 2;
    v[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15)
}

/// Per-stage sup-deviations of `h_i`, `H_i` from the last converged stage.
pub fn uniform_convergence_experiment(
    trace: &ContinuationTrace,
    x: usize,
    b: &SUnConnection,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<UniformConvergenceReport> {
    let states: Vec<&SWState> = trace.converged().collect();
    if states.len() < 3 {
        return Err(Error::InsufficientStages {
            needed: 3,
            have: states.len(),
        });
    }
    let mut hs = Vec::new();
    let mut big = Vec::new();
    for s in &states {
        hs.push(compute_h(&s.psi, x, lat));
        big.push(compute_big_h(&s.a, b, &s.psi, s.alpha, x, lat, g)?);
    }
    let last = states.len() - 1;
    let h_deviation: Vec<f64> = hs.iter().map(|h| sup_dev(h, &hs[last])).collect();
    let big_h_deviation: Vec<f64> = big.iter().map(|h| sup_dev(h, &big[last])).collect();
    Ok(UniformConvergenceReport {
        alphas: states.iter().map(|s| s.alpha).collect(),
        final_half_nonincreasing: nonincreasing_tail(&h_deviation)
            && nonincreasing_tail(&big_h_deviation),
        h_deviation,
        big_h_deviation,
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// sample is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Seeded base points, distinct where possible.
pub fn sample_sites(lat: &TorusLattice, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = lat.num_sites();
    let mut out: Vec<usize> = Vec::with_capacity(count);
    while out.len() < count.min(m) {
        let x = rng.gen_range(0..m);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointValueReport {
    pub samples: usize,
    /// Rank correlation of `|Ψ|(x)` with `ρ(x)`; `None` when either is constant.
    pub spearman_psi_rho: Option<f64>,
    /// Rank correlation of `−n_x(R)` with `ρ(x)` at the largest radius `R`.
    pub spearman_n_rho: Option<f64>,
    /// `R / h`, the stand-in for the factor between the two radii.
    pub radius_ratio: f64,
    /// Pairs with `|Ψ|(x) > |Ψ|(y) + 0.1 sup|Ψ|` but `ρ(x) < ρ(y) − h`.
    pub discordant_pairs: usize,
    pub pass: bool,
}

/// Pools base points sampled from every state and correlates `|Ψ|(x)` and
/// `n_x(R)` with `ρ(x)`.
pub fn frequency_vs_pointvalue_check(
    states: &[&SWState],
    b: &SUnConnection,
    lat: &TorusLattice,
    samples_per_state: usize,
    seed: u64,
) -> Result<PointValueReport> {
    let mut abs = Vec::new();
    let mut rho = Vec::new();
    let mut neg_n = Vec::new();
    let mut discordant = 0;
    let k_big = lat.num_shells() - 1;
    for (i, s) in states.iter().enumerate() {
        let sites = sample_sites(lat, samples_per_state, seed.wrapping_add(i as u64));
        let profiles = frequency_profiles(&s.a, b, &s.psi, s.alpha, &sites, lat)?;
        let norm2 = s.psi.pointwise_norm_sq();
        let sup = s.psi.sup_norm();
        let local: Vec<(f64, f64)> = sites
            .iter()
            .zip(&profiles)
            .map(|(&x, p)| (norm2[x].sqrt(), p.rho))
            .collect();
        for (p, q) in local.iter().flat_map(|p| local.iter().map(move |q| (p, q))) {
            if p.0 > q.0 + 0.1 * sup && p.1 < q.1 - lat.spacing() {
                discordant += 1;
            }
        }
        for (p, l) in profiles.iter().zip(&local) {
            abs.push(l.0);
            rho.push(p.rho);
            neg_n.push(-p.n_vals[k_big].unwrap_or(0.0));
        }
    }
    let spearman_psi_rho = spearman(&abs, &rho);
    let spearman_n_rho = spearman(&neg_n, &rho);
    Ok(PointValueReport {
        samples: abs.len(),
        pass: spearman_psi_rho.map_or(true, |c| c >= 0.0)
            && spearman_n_rho.map_or(true, |c| c >= 0.0),
        spearman_psi_rho,
        spearman_n_rho,
        radius_ratio: k_big as f64,
        discordant_pairs: discordant,
    })
}

/// Fitted `C` in `h_x(r) ≤ C ((2r + d)/r) h_y(R)`, `R` the first shell radius
/// at or beyond `2r + d(x, y)`, over sampled `(x, y, r)`.
pub fn base_point_constant(psi: &SpinorField, lat: &TorusLattice, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = lat.num_sites();
    let radii = lat.shell_radii();
    let h = lat.spacing();
    let mut c: f64 = 0.0;
    for _ in 0..pairs {
        let x = rng.gen_range(0..m);
        let y = rng.gen_range(0..m);
        let d = torus_distance(x, y, lat);
        let hx = compute_h(psi, x, lat);
        let hy = compute_h(psi, y, lat);
        for k in 1..radii.len() {
            let r = radii[k];
            let big = ((2.0 * r + d) / h - 1e-9).ceil() as usize;
            if big >= radii.len() {
                break;
            }
            let denom = (2.0 * r + d) / r * hy[big];
            if denom > 0.0 {
                c = c.max(hx[k] / denom);
            } else if hx[k] > 0.0 {
                return f64::INFINITY;
            }
        }
    }
    c
}

/// Second covariant derivatives `∇_k ∇_j Ψ` (central differences applied
/// twice), squared and summed per site.
pub fn hessian_density(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> Result<Vec<f64>> {
    let n = psi.rank();
    let w = 2 * n;
    let first = covariant_derivative(a, b, psi, lat)?;
    let mut out = vec![0.0; lat.num_sites()];
    for j in 0..3 {
        let comp: Vec<_> = (0..lat.num_sites())
            .flat_map(|x| first[(3 * x + j) * w..(3 * x + j + 1) * w].iter().copied())
            .collect();
        let field = SpinorField::from_vec(lat, n, comp)?;
        let second = covariant_derivative(a, b, &field, lat)?;
        for (x, o) in out.iter_mut().enumerate() {
            *o += linalg::norm_sq(&second[3 * w * x..3 * w * (x + 1)]);
        }
    }
    Ok(out)
}

/// `ρ^{1/2} ‖∇²Ψ‖_{L²(B_{ρ/2}(x))}` with `ρ/2` rounded down to a shell.
pub fn renormalized_hessian(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    x: usize,
    lat: &TorusLattice,
) -> Result<f64> {
    let rho = critical_radius(a, x, lat)?;
    let k = ((0.5 * rho) / lat.spacing() + 1e-9).floor() as usize;
    let ball = cumulative(&lat.shell_masses(&hessian_density(a, b, psi, lat)?, x))[k];
    Ok(rho.sqrt() * ball.sqrt())
}

/// `r ∫_{B_r(x)} |F_A|²` at `r = ρ(x)/2` rounded down to a shell.
pub fn interior_curvature(a: &U1Connection, x: usize, lat: &TorusLattice) -> Result<f64> {
    let f2 = curvature_density(a, lat)?;
    let rho = rho_from_density(&f2, x, lat);
    let k = ((0.5 * rho) / lat.spacing() + 1e-9).floor() as usize;
    let ball = cumulative(&lat.shell_masses(&f2, x))[k];
    Ok(k as f64 * lat.spacing() * ball)
}

/// Per-state JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub rho: f64,
    pub holder_gamma: f64,
    pub holder_seminorm: f64,
    pub z_fraction: f64,
    pub monotonicity_c: Option<f64>,
    pub growth_discrepancy: Option<f64>,
}

/// Default Hölder exponent.
pub const HOLDER_GAMMA: f64 = 0.25;

/// Summary at base point `x`; the growth law uses pairs from shell `k_min`.
pub fn summarize(
    state: &SWState,
    b: &SUnConnection,
    x: usize,
    lat: &TorusLattice,
    g: &GammaRep,
    k_min: usize,
    seed: u64,
) -> Result<(FrequencyProfile, StateSummary)> {
    let profile = frequency(&state.a, b, &state.psi, state.alpha, x, lat, g)?;
    let holder = holder_seminorm(&state.psi, HOLDER_GAMMA, lat, 1000, seed)?;
    let z = zero_set(&state.psi, 0.05 * state.psi.sup_norm(), lat);
    let monotonicity_c = monotonicity_report(&profile).ok().map(|m| m.c);
    let growth_discrepancy = growth_law_check(&profile, &growth_pairs(lat, k_min)).ok();
    Ok((
        profile.clone(),
        StateSummary {
            rho: profile.rho,
            holder_gamma: HOLDER_GAMMA,
            holder_seminorm: holder.seminorm,
            z_fraction: z.volume_fraction,
            monotonicity_c,
            growth_discrepancy,
        },
    ))
}
