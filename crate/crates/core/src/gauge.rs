//! Link variables, spinor fields, gauge transformations and curvature.
//!
//! A `U(1)` link `u_j(x) = exp(i h a_j)` transports the line-bundle factor
//! from `x + ĵ` back to `x`; an `SU(n)` link `v_j(x)` does the same on `E`,
//! and acts on `Hom(E, S ⊗ ℒ)` by right composition with its adjoint. With
//! this convention the covariant derivative is `∂ + i a` on `ℒ` and the
//! curvature two-form of `A` is `F_A = i f` with `f_{ab} = arg(P_{ab}) / h²`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lattice::TorusLattice;
use crate::linalg::{self, ONE, ZERO};
use crate::spin::{SpinorMatrix, TracelessHermitian2, TwoForm};
use crate::{Error, Result};

/// Plane of each two-form component: `(e²∧e³, e³∧e¹, e¹∧e²)`.
pub const PLANES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// `U(1)` link field, one unit complex number per site and positive axis.
#[derive(Clone, Debug, PartialEq)]
pub struct U1Connection {
    links: Vec<C64>,
}

impl U1Connection {
    pub fn trivial(lat: &TorusLattice) -> Self {
        U1Connection {
            links: vec![ONE; 3 * lat.num_sites()],
        }
    }

    /// Validates length and `|u| = 1` to `1e−12`.
    pub fn from_links(lat: &TorusLattice, links: Vec<C64>) -> Result<Self> {
        if links.len() != 3 * lat.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} U(1) links, got {}",
                3 * lat.num_sites(),
                links.len()
            )));
        }
        if let Some(i) = links.iter().position(|u| (u.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidLinks(format!(
                "U(1) link {i} has modulus {}",
                links[i].norm()
            )));
        }
        Ok(U1Connection { links })
    }

    /// Links `exp(i θ)` from per-link phases.
    pub fn from_phases(phases: &[f64]) -> Self {
        U1Connection {
            links: phases.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        }
    }

    #[inline]
    pub fn link(&self, site: usize, axis: usize) -> C64 {
        self.links[3 * site + axis]
    }

    pub fn links(&self) -> &[C64] {
        &self.links
    }

    pub fn num_sites(&self) -> usize {
        self.links.len() / 3
    }

    pub fn phases(&self) -> Vec<f64> {
        self.links.iter().map(|u| u.arg()).collect()
    }

    /// Multiplies every link by `exp(i δθ)`.
    pub fn rotated(&self, delta: &[f64]) -> Self {
        U1Connection {
            links: self
                .links
                .iter()
                .zip(delta)
                .map(|(u, &d)| {
                    let v = u * C64::from_polar(1.0, d);
                    v / v.norm()
                })
                .collect(),
        }
    }
}

/// `SU(n)` link field, one row-major `n × n` matrix per site and axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SUnConnection {
    n: usize,
    links: Vec<C64>,
}

impl SUnConnection {
    pub fn trivial(lat: &TorusLattice, n: usize) -> Self {
        let id = linalg::identity(n);
        SUnConnection {
            n,
            links: (0..3 * lat.num_sites()).flat_map(|_| id.clone()).collect(),
        }
    }

    /// Validates `U*U = 1` and `det U = 1` to `1e−10` on every link.
    pub fn from_links(lat: &TorusLattice, n: usize, links: Vec<C64>) -> Result<Self> {
        let nn = n * n;
        if n == 0 || links.len() != 3 * lat.num_sites() * nn {
            return Err(Error::ShapeMismatch(format!(
                "expected {} SU({n}) entries, got {}",
                3 * lat.num_sites() * nn,
                links.len()
            )));
        }
        let id = linalg::identity(n);
        for (i, v) in links.chunks_exact(nn).enumerate() {
            let vv = linalg::matmul(&linalg::adjoint(v, n), v, n);
            let unitary_defect = vv
                .iter()
                .zip(&id)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let det_defect = (linalg::determinant(v, n) - ONE).norm();
            if unitary_defect > 1e-10 || det_defect > 1e-10 {
                return Err(Error::InvalidLinks(format!(
                    "SU({n}) link {i}: unitarity defect {unitary_defect:.2e}, det defect {det_defect:.2e}"
                )));
            }
        }
        Ok(SUnConnection { n, links })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn link(&self, site: usize, axis: usize) -> &[C64] {
        let nn = self.n * self.n;
        &self.links[(3 * site + axis) * nn..(3 * site + axis + 1) * nn]
    }

    pub fn links(&self) -> &[C64] {
        &self.links
    }

    pub fn is_trivial(&self) -> bool {
        let id = linalg::identity(self.n);
        self.links
            .chunks_exact(self.n * self.n)
            .all(|v| v == id.as_slice())
    }
}

/// Discrete section of `Hom(E, S ⊗ ℒ)`: a row-major `2 × n` matrix per site.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    n: usize,
    cell_volume: f64,
    data: Vec<C64>,
    l2_norm: f64,
}

impl SpinorField {
    pub fn zeros(lat: &TorusLattice, n: usize) -> Self {
        SpinorField {
            n,
            cell_volume: lat.cell_volume(),
            data: vec![ZERO; 2 * n * lat.num_sites()],
            l2_norm: 0.0,
        }
    }

    pub fn from_vec(lat: &TorusLattice, n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 || data.len() != 2 * n * lat.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} spinor entries, got {}",
                2 * n * lat.num_sites(),
                data.len()
            )));
        }
        let cell_volume = lat.cell_volume();
        let l2_norm = (linalg::norm_sq(&data) * cell_volume).sqrt();
        Ok(SpinorField {
            n,
            cell_volume,
            data,
            l2_norm,
        })
    }

    /// The same `2 × n` matrix at every site.
    pub fn constant(lat: &TorusLattice, value: &SpinorMatrix) -> Self {
        let data = (0..lat.num_sites())
            .flat_map(|_| value.as_slice().to_vec())
            .collect();
        SpinorField::from_vec(lat, value.n(), data).expect("shape is consistent")
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn num_sites(&self) -> usize {
        self.data.len() / (2 * self.n)
    }

    #[inline]
    pub fn at(&self, site: usize) -> &[C64] {
        let w = 2 * self.n;
        &self.data[site * w..(site + 1) * w]
    }

    pub fn matrix_at(&self, site: usize) -> SpinorMatrix {
        SpinorMatrix::from_vec(self.n, self.at(site).to_vec())
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Cached `(Σ_x |ψ(x)|² h³)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// `|ψ(x)|²` per site.
    pub fn pointwise_norm_sq(&self) -> Vec<f64> {
        self.data
            .chunks_exact(2 * self.n)
            .map(linalg::norm_sq)
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.pointwise_norm_sq()
            .into_iter()
            .fold(0.0, f64::max)
            .sqrt()
    }

    fn with_data(&self, data: Vec<C64>) -> Self {
        let l2_norm = (linalg::norm_sq(&data) * self.cell_volume).sqrt();
        SpinorField {
            n: self.n,
            cell_volume: self.cell_volume,
            data,
            l2_norm,
        }
    }

    /// `self + t·other`, entrywise.
    pub fn axpy(&self, t: f64, other: &SpinorField) -> Self {
        self.with_data(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b * t)
                .collect(),
        )
    }

    pub fn scaled(&self, t: C64) -> Self {
        self.with_data(self.data.iter().map(|z| z * t).collect())
    }
}

/// Pointwise `U(1)` gauge transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    u: Vec<C64>,
}

impl GaugeTransform {
    pub fn identity(lat: &TorusLattice) -> Self {
        GaugeTransform {
            u: vec![ONE; lat.num_sites()],
        }
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        GaugeTransform {
            u: phases.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        }
    }

    pub fn from_values(u: Vec<C64>) -> Result<Self> {
        if let Some(i) = u.iter().position(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidLinks(format!(
                "gauge value {i} is not unit modulus"
            )));
        }
        Ok(GaugeTransform { u })
    }

    pub fn values(&self) -> &[C64] {
        &self.u
    }
}

/// `u_j(x) ↦ g(x) u_j(x) g(x+ĵ)⁻¹`, `ψ(x) ↦ g(x) ψ(x)`.
pub fn apply_gauge(
    g: &GaugeTransform,
    a: &U1Connection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> (U1Connection, SpinorField) {
    (gauge_links(g, a, lat), gauge_spinor(g, psi))
}

pub fn gauge_links(g: &GaugeTransform, a: &U1Connection, lat: &TorusLattice) -> U1Connection {
    let links = (0..3 * lat.num_sites())
        .map(|i| {
            let (s, j) = (i / 3, i % 3);
            g.u[s] * a.links[i] * g.u[lat.shift(s, j, true)].conj()
        })
        .collect();
    U1Connection { links }
}

pub fn gauge_spinor(g: &GaugeTransform, psi: &SpinorField) -> SpinorField {
    let w = 2 * psi.n;
    psi.with_data(
        psi.data
            .iter()
            .enumerate()
            .map(|(i, z)| g.u[i / w] * z)
            .collect(),
    )
}

/// Plaquette `u_a(x) u_b(x+â) u_a(x+b̂)⁻¹ u_b(x)⁻¹` for plane `(a, b)`.
#[inline]
pub fn plaquette(a: &U1Connection, lat: &TorusLattice, s: usize, plane: (usize, usize)) -> C64 {
    let (p, q) = plane;
    a.link(s, p)
        * a.link(lat.shift(s, p, true), q)
        * a.link(lat.shift(s, q, true), p).conj()
        * a.link(s, q).conj()
}

/// Plaquette angles per site and two-form component, in `(−π, π]`.
pub fn plaquette_angles(a: &U1Connection, lat: &TorusLattice) -> Result<Vec<[f64; 3]>> {
    let angles: Vec<[f64; 3]> = (0..lat.num_sites())
        .into_par_iter()
        .map(|s| {
            let mut t = [0.0; 3];
            for (c, plane) in PLANES.iter().enumerate() {
                t[c] = plaquette(a, lat, s, *plane).arg();
            }
            t
        })
        .collect();
    for (s, t) in angles.iter().enumerate() {
        for &angle in t {
            if angle.abs() >= PI * (1.0 - 1e-9) {
                return Err(Error::CurvatureBranch { site: s, angle });
            }
        }
    }
    Ok(angles)
}

/// Real curvature two-form `f` per site, `F_A = i f`, `f = arg(P) / h²`.
pub fn curvature(a: &U1Connection, lat: &TorusLattice) -> Result<Vec<TwoForm>> {
    let h2 = lat.spacing() * lat.spacing();
    Ok(plaquette_angles(a, lat)?
        .into_iter()
        .map(|t| TwoForm([t[0] / h2, t[1] / h2, t[2] / h2]))
        .collect())
}

/// `‖F_A‖_{L²}` from the plaquette curvature.
pub fn curvature_l2(a: &U1Connection, lat: &TorusLattice) -> Result<f64> {
    let sum: f64 = curvature(a, lat)?.iter().map(TwoForm::norm_sqr).sum();
    Ok((sum * lat.cell_volume()).sqrt())
}

/// Step sequences of the four plaquettes of plane `(a, b)` based at a site,
/// all with the orientation of `a ∧ b`.
fn clover_leaves(a: usize, b: usize) -> [[(usize, bool); 4]; 4] {
    [
        [(a, true), (b, true), (a, false), (b, false)],
        [(b, true), (a, false), (b, false), (a, true)],
        [(a, false), (b, false), (a, true), (b, true)],
        [(b, false), (a, true), (b, true), (a, false)],
    ]
}

/// Clover-averaged curvature of `A` at `s`.
pub fn u1_clover(a: &U1Connection, lat: &TorusLattice, s: usize) -> Result<TwoForm> {
    let h2 = lat.spacing() * lat.spacing();
    let mut w = [0.0; 3];
    for (c, &(p, q)) in PLANES.iter().enumerate() {
        let mut acc = 0.0;
        for leaf in clover_leaves(p, q) {
            let mut x = s;
            let mut hol = ONE;
            for (axis, fwd) in leaf {
                if fwd {
                    hol *= a.link(x, axis);
                    x = lat.shift(x, axis, true);
                } else {
                    x = lat.shift(x, axis, false);
                    hol *= a.link(x, axis).conj();
                }
            }
            let angle = hol.arg();
            if angle.abs() >= PI * (1.0 - 1e-9) {
                return Err(Error::CurvatureBranch { site: s, angle });
            }
            acc += angle;
        }
        w[c] = acc / (4.0 * h2);
    }
    Ok(TwoForm(w))
}

/// `SU(n)` holonomy of a step sequence starting at `s`, composed as transports
/// back to `s`.
fn sun_path(b: &SUnConnection, lat: &TorusLattice, s: usize, steps: &[(usize, bool)]) -> Vec<C64> {
    let n = b.n;
    let mut x = s;
    let mut hol = linalg::identity(n);
    for &(axis, fwd) in steps {
        if fwd {
            hol = linalg::matmul(&hol, b.link(x, axis), n);
            x = lat.shift(x, axis, true);
        } else {
            x = lat.shift(x, axis, false);
            hol = linalg::matmul(&hol, &linalg::adjoint(b.link(x, axis), n), n);
        }
    }
    hol
}

/// Plaquette `v_a(x) v_b(x+â) v_a(x+b̂)* v_b(x)*` of `B`.
pub fn sun_plaquette(
    b: &SUnConnection,
    lat: &TorusLattice,
    s: usize,
    plane: (usize, usize),
) -> Vec<C64> {
    let (p, q) = plane;
    sun_path(b, lat, s, &[(p, true), (q, true), (p, false), (q, false)])
}

/// Clover-averaged `su(n)` curvature `G_p` of `B` at `s`, one generator per
/// two-form component, to first order in the plaquette angle.
pub fn sun_clover(b: &SUnConnection, lat: &TorusLattice, s: usize) -> [Vec<C64>; 3] {
    let n = b.n;
    let h2 = lat.spacing() * lat.spacing();
    let mut out: [Vec<C64>; 3] = Default::default();
    for (c, &(p, q)) in PLANES.iter().enumerate() {
        let mut acc = vec![ZERO; n * n];
        for leaf in clover_leaves(p, q) {
            let g = linalg::su_generator(&sun_path(b, lat, s, &leaf), n);
            for (x, y) in acc.iter_mut().zip(g) {
                *x += y;
            }
        }
        out[c] = acc.into_iter().map(|z| z / (4.0 * h2)).collect();
    }
    out
}

/// Largest eigen-angle over all plaquettes of `B`.
pub fn max_plaquette_angle_sun(b: &SUnConnection, lat: &TorusLattice) -> f64 {
    (0..lat.num_sites())
        .into_par_iter()
        .map(|s| {
            PLANES
                .iter()
                .map(|&pl| linalg::max_unitary_angle(&sun_plaquette(b, lat, s, pl), b.n))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Discrete divergence `Σ_j (θ_j(x) − θ_j(x − ĵ))` of the link phases.
pub fn link_divergence(a: &U1Connection, lat: &TorusLattice) -> Vec<f64> {
    (0..lat.num_sites())
        .map(|s| {
            (0..3)
                .map(|j| a.link(s, j).arg() - a.link(lat.shift(s, j, false), j).arg())
                .sum()
        })
        .collect()
}

/// `max_x |div θ(x)|`.
pub fn coulomb_residual(a: &U1Connection, lat: &TorusLattice) -> f64 {
    link_divergence(a, lat)
        .into_iter()
        .fold(0.0, |m, d| m.max(d.abs()))
}

#[derive(Clone, Copy, Debug)]
pub struct CoulombOptions {
    pub tolerance: f64,
    pub max_cg_iterations: usize,
    pub max_outer: usize,
}

impl Default for CoulombOptions {
    fn default() -> Self {
        CoulombOptions {
            tolerance: 1e-8,
            max_cg_iterations: 5000,
            max_outer: 30,
        }
    }
}

/// Positive lattice Laplacian `Σ_j (2φ(x) − φ(x+ĵ) − φ(x−ĵ))`.
fn scalar_laplacian(phi: &[f64], lat: &TorusLattice, out: &mut [f64]) {
    out.par_iter_mut().enumerate().for_each(|(s, o)| {
        let mut v = 6.0 * phi[s];
        for j in 0..3 {
            v -= phi[lat.shift(s, j, true)] + phi[lat.shift(s, j, false)];
        }
        *o = v;
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Conjugate gradients for `L φ = rhs` on zero-mean fields.
fn solve_poisson(rhs: &[f64], lat: &TorusLattice, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let m = rhs.len();
    let mut b = rhs.to_vec();
    remove_mean(&mut b);
    let mut x = vec![0.0; m];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut lp = vec![0.0; m];
    let mut rr = dot(&r, &r);
    let target = (tol * tol).max(1e-30 * dot(&b, &b));
    for _ in 0..max_iter {
        if rr <= target {
            return Ok(x);
        }
        scalar_laplacian(&p, lat, &mut lp);
        let step = rr / dot(&p, &lp);
        for i in 0..m {
            x[i] += step * p[i];
            r[i] -= step * lp[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr <= target {
        return Ok(x);
    }
    Err(Error::GaugeFixing {
        residual: rr.sqrt(),
        iterations: max_iter,
    })
}

/// Gauge transformation to the discrete Coulomb gauge `div θ = 0`, using
/// the default budget.
pub fn coulomb_gauge_fix(
    a: &U1Connection,
    lat: &TorusLattice,
) -> Result<(GaugeTransform, U1Connection)> {
    coulomb_gauge_fix_with(a, lat, &CoulombOptions::default())
}

pub fn coulomb_gauge_fix_with(
    a: &U1Connection,
    lat: &TorusLattice,
    opts: &CoulombOptions,
) -> Result<(GaugeTransform, U1Connection)> {
    let mut phase = vec![0.0; lat.num_sites()];
    let mut current = a.clone();
    let mut residual = coulomb_residual(&current, lat);
    let mut outer = 0;
    while residual > opts.tolerance {
        if outer == opts.max_outer {
            return Err(Error::GaugeFixing {
                residual,
                iterations: outer,
            });
        }
        // θ'_j(x) = θ_j(x) + φ(x) − φ(x+ĵ), so div θ' = div θ + L φ.
        let rhs: Vec<f64> = link_divergence(&current, lat).iter().map(|d| -d).collect();
        let phi = solve_poisson(&rhs, lat, 1e-3 * opts.tolerance, opts.max_cg_iterations)?;
        let step = GaugeTransform::from_phases(&phi);
        current = gauge_links(&step, &current, lat);
        for (t, p) in phase.iter_mut().zip(&phi) {
            *t += p;
        }
        residual = coulomb_residual(&current, lat);
        outer += 1;
    }
    Ok((GaugeTransform::from_phases(&phase), current))
}

/// Recomputed discrete `L²` norm `(Σ_x |ψ(x)|²_F h³)^{1/2}`.
pub fn l2_norm(psi: &SpinorField, lat: &TorusLattice) -> f64 {
    let sum: f64 = psi.data.iter().map(|z| z.norm_sqr()).sum();
    (sum * lat.cell_volume()).sqrt()
}

/// Rescales to unit `L²` norm.
pub fn normalize(psi: &SpinorField) -> Result<SpinorField> {
    let norm = psi.l2_norm;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroField);
    }
    Ok(psi.scaled(C64::new(1.0 / norm, 0.0)))
}

/// Pointwise moment map.
pub fn mu_field(psi: &SpinorField) -> Vec<TracelessHermitian2> {
    (0..psi.num_sites())
        .map(|s| TracelessHermitian2::new_unchecked(linalg::moment_map_slice(psi.at(s), psi.n)))
        .collect()
}

/// `‖μ(Ψ)‖_{L²}`.
pub fn mu_l2_norm(psi: &SpinorField) -> f64 {
    let sum: f64 = (0..psi.num_sites())
        .map(|s| linalg::moment_map_slice(psi.at(s), psi.n).norm_sqr())
        .sum();
    (sum * psi.cell_volume).sqrt()
}

/// Ordered product of transporters along a closed site path. A step from `x`
/// to `x + ĵ` contributes `u_j(x)`, a step to `x − ĵ` contributes
/// `u_j(x − ĵ)⁻¹`.
pub fn loop_holonomy(a: &U1Connection, path: &[usize], lat: &TorusLattice) -> Result<C64> {
    if path.len() < 2 || path.first() != path.last() {
        return Err(Error::InvalidLoop("path is not closed".into()));
    }
    let mut hol = ONE;
    for (i, w) in path.windows(2).enumerate() {
        let (x, y) = (w[0], w[1]);
        let step = (0..3).find_map(|j| {
            if lat.shift(x, j, true) == y {
                Some(a.link(x, j))
            } else if lat.shift(x, j, false) == y {
                Some(a.link(y, j).conj())
            } else {
                None
            }
        });
        hol *= step.ok_or_else(|| {
            Error::InvalidLoop(format!("sites {x} and {y} at step {i} are not neighbors"))
        })?;
    }
    Ok(hol)
}

/// Straight loop winding once around the torus along `axis`, starting at `s`.
pub fn axis_loop(lat: &TorusLattice, s: usize, axis: usize) -> Vec<usize> {
    let mut path = vec![s];
    let mut x = s;
    for _ in 0..lat.n_per_axis() {
        x = lat.shift(x, axis, true);
        path.push(x);
    }
    path
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A low-frequency Fourier mode on the torus.
#[derive(Clone, Debug)]
struct Mode {
    k: [f64; 3],
}

impl Mode {
    fn random_set(rng: &mut ChaCha8Rng, count: usize) -> Vec<Mode> {
        (0..count)
            .map(|_| {
                let mut k = [0.0; 3];
                while k == [0.0; 3] {
                    for c in k.iter_mut() {
                        *c = rng.gen_range(-1i32..=1) as f64;
                    }
                }
                Mode { k }
            })
            .collect()
    }

    fn phase(&self, x: [f64; 3], side: f64) -> f64 {
        2.0 * PI * (self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2]) / side
    }
}

fn link_midpoint(lat: &TorusLattice, s: usize, axis: usize) -> [f64; 3] {
    let mut x = lat.position(s);
    x[axis] += 0.5 * lat.spacing();
    x
}

/// Smooth `U(1)` connection `u_j = exp(i h a_j)` with `a_j` a random
/// combination of three low Fourier modes of size `amplitude`, sampled at link
/// midpoints. The underlying continuum field does not depend on `N`.
pub fn smooth_u1(lat: &TorusLattice, amplitude: f64, seed: u64) -> U1Connection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = Mode::random_set(&mut rng, 3);
    let coef: Vec<[(f64, f64); 3]> = modes
        .iter()
        .map(|_| {
            let mut c = [(0.0, 0.0); 3];
            for e in c.iter_mut() {
                *e = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            c
        })
        .collect();
    let h = lat.spacing();
    let links = (0..3 * lat.num_sites())
        .map(|i| {
            let (s, j) = (i / 3, i % 3);
            let x = link_midpoint(lat, s, j);
            let a: f64 = modes
                .iter()
                .zip(&coef)
                .map(|(m, c)| {
                    let t = m.phase(x, lat.side_length());
                    c[j].0 * t.cos() + c[j].1 * t.sin()
                })
                .sum();
            C64::from_polar(1.0, h * amplitude * a)
        })
        .collect();
    U1Connection { links }
}

fn random_su(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let m: Vec<C64> = (0..n * n).map(|_| random_c64(rng)).collect();
    linalg::su_generator(&m, n)
}

/// Smooth `SU(n)` connection `v_j = exp(h b_j)` with `b_j` a random
/// `su(n)`-valued combination of three low Fourier modes of size `amplitude`.
pub fn smooth_sun(lat: &TorusLattice, n: usize, amplitude: f64, seed: u64) -> SUnConnection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = Mode::random_set(&mut rng, 3);
    let coef: Vec<Vec<(Vec<C64>, Vec<C64>)>> = modes
        .iter()
        .map(|_| {
            (0..3)
                .map(|_| (random_su(&mut rng, n), random_su(&mut rng, n)))
                .collect()
        })
        .collect();
    let h = lat.spacing();
    let nn = n * n;
    let links: Vec<C64> = (0..3 * lat.num_sites())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (s, j) = (i / 3, i % 3);
            let x = link_midpoint(lat, s, j);
            let mut gen = vec![ZERO; nn];
            for (m, c) in modes.iter().zip(&coef) {
                let t = m.phase(x, lat.side_length());
                let (ct, st) = (t.cos(), t.sin());
                for e in 0..nn {
                    gen[e] += (c[j].0[e] * ct + c[j].1[e] * st) * (h * amplitude);
                }
            }
            linalg::expm(&gen, n)
        })
        .collect();
    SUnConnection { n, links }
}

/// Random smooth background `B` whose plaquette angles stay below
/// `max_angle`: the continuum field of [`smooth_sun`] at `amplitude`, shrunk
/// until the bound holds.
pub fn random_background(
    lat: &TorusLattice,
    n: usize,
    amplitude: f64,
    max_angle: f64,
    seed: u64,
) -> SUnConnection {
    let mut amp = amplitude;
    loop {
        let b = smooth_sun(lat, n, amp, seed);
        let worst = max_plaquette_angle_sun(&b, lat);
        if worst <= max_angle || amp == 0.0 {
            return b;
        }
        amp *= 0.95 * max_angle / worst;
    }
}

/// Smooth spinor field: a random constant plus `modes` random low Fourier
/// modes, defined in the continuum so it can be sampled at any `N`.
pub fn smooth_spinor(lat: &TorusLattice, n: usize, modes: usize, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks = Mode::random_set(&mut rng, modes);
    let base: Vec<C64> = (0..2 * n).map(|_| random_c64(&mut rng)).collect();
    let coef: Vec<Vec<C64>> = ks
        .iter()
        .map(|_| (0..2 * n).map(|_| random_c64(&mut rng)).collect())
        .collect();
    let mut data = Vec::with_capacity(2 * n * lat.num_sites());
    for s in 0..lat.num_sites() {
        let x = lat.position(s);
        let waves: Vec<C64> = ks
            .iter()
            .map(|m| C64::from_polar(1.0, m.phase(x, lat.side_length())))
            .collect();
        for e in 0..2 * n {
            let mut v = base[e];
            for (w, c) in waves.iter().zip(&coef) {
                v += w * c[e];
            }
            data.push(v);
        }
    }
    SpinorField::from_vec(lat, n, data).expect("shape is consistent")
}

/// Gauge transformation with independent uniformly random phases.
pub fn random_gauge(lat: &TorusLattice, seed: u64) -> GaugeTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..lat.num_sites())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    GaugeTransform::from_phases(&phases)
}

/// Spinor field with independent random entries (not smooth).
pub fn random_spinor(lat: &TorusLattice, n: usize, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..2 * n * lat.num_sites())
        .map(|_| random_c64(&mut rng))
        .collect();
    SpinorField::from_vec(lat, n, data).expect("shape is consistent")
}

/// `U(1)` connection with independent random link phases of size `spread`.
pub fn random_u1(lat: &TorusLattice, spread: f64, seed: u64) -> U1Connection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..3 * lat.num_sites())
        .map(|_| rng.gen_range(-spread..spread))
        .collect();
    U1Connection::from_phases(&phases)
}

/// `SU(n)` links with independent random generators of size `spread`.
pub fn random_sun(lat: &TorusLattice, n: usize, spread: f64, seed: u64) -> SUnConnection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let links = (0..3 * lat.num_sites())
        .flat_map(|_| {
            let g: Vec<C64> = random_su(&mut rng, n).iter().map(|z| z * spread).collect();
            linalg::expm(&g, n)
        })
        .collect();
    SUnConnection { n, links }
}

/// Connection with constant flux `2πk / L²` through every `(e¹, e²)` plaquette
/// (component `e¹∧e²`), in the Landau-type gauge `u₂(i, j) = e^{iφi}`,
/// `u₁(N−1, j) = e^{−iφNj}`, `φ = 2πk / N²`.
pub fn constant_flux(lat: &TorusLattice, k: i64) -> U1Connection {
    let n = lat.n_per_axis();
    let phi = 2.0 * PI * k as f64 / (n * n) as f64;
    let mut links = vec![ONE; 3 * lat.num_sites()];
    for s in 0..lat.num_sites() {
        let [i, j, _] = lat.coords(s);
        links[3 * s + 1] = C64::from_polar(1.0, phi * i as f64);
        if i == n - 1 {
            links[3 * s] = C64::from_polar(1.0, -phi * (n * j) as f64);
        }
    }
    U1Connection { links }
}
