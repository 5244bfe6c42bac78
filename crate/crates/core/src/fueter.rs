//! The quotient `μ⁻¹(0) / U(1)` of `2 × n` complex matrices, its canonical
//! connection (orthogonal projection along the orbits), the Fueter residual of
//! sections over the torus, and the lift of a section to `(A, Ψ)`.
//!
//! `μ(ψ) = 0` means `ψψ* = ½|ψ|² id`: the two rows of `ψ` are orthogonal with
//! equal norm. For `n = 1` the zero set is `{0}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gauge::{self, SpinorField, U1Connection};
use crate::lattice::TorusLattice;
use crate::linalg::ZERO;
use crate::spin::{moment_map, pauli, GammaRep, Mat2, SpinorMatrix};
use crate::{Error, Result};

/// Algebraic tolerance for membership in `μ⁻¹(0)`.
pub const ZERO_SET_TOL: f64 = 1e-10;
/// Tolerance on transport holonomies.
pub const TRANSPORT_TOL: f64 = 1e-6;
/// Tolerance on reconstructed curvature.
pub const LIFT_TOL: f64 = 1e-8;

/// A nonzero representative of a point of the quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientPoint {
    rep: SpinorMatrix,
    norm: f64,
}

impl QuotientPoint {
    pub fn new(rep: SpinorMatrix) -> Result<Self> {
        let norm = rep.norm();
        let mu = moment_map(&rep).norm();
        if norm == 0.0 || !(mu <= ZERO_SET_TOL * norm * norm) {
            return Err(Error::Infeasible {
                reason: "representative is not a nonzero point of the zero set".into(),
                mu_norm: mu,
            });
        }
        Ok(QuotientPoint { rep, norm })
    }

    pub fn rep(&self) -> &SpinorMatrix {
        &self.rep
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn rank(&self) -> usize {
        self.rep.n()
    }

    /// The same quotient point with representative `e^{iθ} rep`.
    pub fn rephased(&self, theta: f64) -> Self {
        QuotientPoint {
            rep: self.rep.scale(C64::from_polar(1.0, theta)),
            norm: self.norm,
        }
    }
}

/// `√P` for a positive definite Hermitian `2 × 2` matrix.
fn sqrt_psd2(p: &Mat2) -> Mat2 {
    let det = (p.0[0][0] * p.0[1][1] - p.0[0][1] * p.0[1][0]).re.max(0.0);
    let s = det.sqrt();
    let t = (p.trace().re + 2.0 * s).sqrt();
    (*p + Mat2::identity() * s) * (1.0 / t)
}

fn inverse2(m: &Mat2) -> Mat2 {
    let [[a, b], [c, d]] = m.0;
    let det = a * d - b * c;
    Mat2([[d / det, -b / det], [-c / det, a / det]])
}

/// Nearest point of `μ⁻¹(0)` in the Frobenius norm.
///
/// With `ψψ* = P`, the nearest point is `c V` with `V = P^{−1/2} ψ` (the
/// polar factor, `VV* = id`) and `c = ½ tr P^{1/2}`, the mean singular value.
/// Rank-deficient input, in particular every `n = 1` input, has no unique
/// nearest point and is reported as infeasible.
pub fn project_to_zero_set(psi: &SpinorMatrix) -> Result<QuotientPoint> {
    let mu_norm = moment_map(psi).norm();
    if psi.n() < 2 {
        return Err(Error::Infeasible {
            reason: "a rank-one 2 × 1 matrix cannot satisfy ψψ* = ½|ψ|² id".into(),
            mu_norm,
        });
    }
    let p = SpinorMatrix::outer(psi, psi);
    let root = sqrt_psd2(&p);
    let det = (root.0[0][0] * root.0[1][1] - root.0[0][1] * root.0[1][0]).re;
    let tr = root.trace().re;
    if !(tr > 0.0) || det <= 1e-12 * tr * tr {
        return Err(Error::Infeasible {
            reason: "input has rank below two".into(),
            mu_norm,
        });
    }
    let v = psi.left_mul(&inverse2(&root));
    let out = v.scale(C64::new(0.5 * tr, 0.0));
    QuotientPoint::new(out).map_err(|_| Error::Infeasible {
        reason: "projection did not reach the zero set".into(),
        mu_norm,
    })
}

fn realify(m: &SpinorMatrix) -> Vec<f64> {
    m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Normal directions of the horizontal space at `ψ`: the gradients `σ_p ψ`
/// of the moment map components and the orbit direction `iψ`.
fn normal_directions(psi: &SpinorMatrix) -> [SpinorMatrix; 4] {
    let s = pauli();
    [
        psi.left_mul(&s[0]),
        psi.left_mul(&s[1]),
        psi.left_mul(&s[2]),
        psi.scale(C64::new(0.0, 1.0)),
    ]
}

/// Real dimension of the quotient at `p`: `4n` minus the numerical rank of
/// the stacked constraint and orbit differentials (singular values at least
/// `1e−8` of the largest). The rank must be 4.
pub fn quotient_dimension_probe(p: &QuotientPoint) -> Result<usize> {
    let n = p.rank();
    let rows: Vec<Vec<f64>> = normal_directions(&p.rep).iter().map(realify).collect();
    let m = DMatrix::from_fn(4, 4 * n, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let largest = sv.max();
    let rank = sv.iter().filter(|&&s| s >= 1e-8 * largest).count();
    if rank != 4 {
        return Err(Error::RankDeficiency {
            expected: 4,
            found: rank,
        });
    }
    Ok(4 * n - rank)
}

/// A seeded point of the quotient from a Gaussian `2 × n` matrix.
pub fn random_quotient_point(n: usize, rng: &mut ChaCha8Rng) -> Result<QuotientPoint> {
    let data = (0..2 * n).map(|_| gaussian_c64(rng)).collect();
    project_to_zero_set(&SpinorMatrix::from_vec(n, data))
}

/// Phase `e^{iφ}` making `⟨e^{iφ} b, a⟩` real and positive.
fn align_phase(a: &SpinorMatrix, b: &SpinorMatrix) -> C64 {
    let z = b.inner(a);
    if z.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z.conj() / z.norm()
    }
}

/// Distance from `b` to the orbit of `a`.
fn orbit_distance(a: &SpinorMatrix, b: &SpinorMatrix) -> f64 {
    b.scale(align_phase(a, b)).sub(a).norm()
}

/// Horizontal transport along a closed path of quotient points, starting
/// from `lift0` on the orbit of the first point. Returns the holonomy `e^{iχ}`
/// with final lift `e^{iχ} lift0`.
pub fn canonical_transport(path: &[QuotientPoint], lift0: &SpinorMatrix) -> Result<C64> {
    let first = path
        .first()
        .ok_or_else(|| Error::InvalidLoop("empty path".into()))?;
    let overlap0 = lift0.inner(first.rep()).norm() / (lift0.norm() * first.norm());
    if !(overlap0 >= 1.0 - 1e-10) {
        return Err(Error::InvalidLoop(format!(
            "initial lift is not on the orbit of the first point (overlap {overlap0:.3e})"
        )));
    }
    let last = path.last().unwrap();
    let overlap = last.rep().inner(first.rep()).norm() / (last.norm() * first.norm());
    if !(overlap >= 1.0 - 1e-10) {
        return Err(Error::OpenPath { overlap });
    }
    let mut lift = lift0.clone();
    for (k, w) in path.windows(2).enumerate() {
        let limit = 0.1 * w[0].norm();
        let distance = orbit_distance(w[0].rep(), w[1].rep());
        if distance > limit {
            return Err(Error::LargeStep {
                step: k,
                distance,
                limit,
            });
        }
        lift = w[1].rep().scale(align_phase(&lift, w[1].rep()));
    }
    let z = lift.inner(lift0);
    Ok(z / z.norm())
}

/// `exp(iπtσ₃) rep` for `t = k / steps`, a horizontal path from `rep` to
/// `−rep` whose image in the quotient is a closed loop generating `π₁`.
pub fn pi1_generator(p: &QuotientPoint, steps: usize) -> Vec<QuotientPoint> {
    (0..=steps)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / steps as f64;
            let d = Mat2([
                [C64::from_polar(1.0, t), ZERO],
                [ZERO, C64::from_polar(1.0, -t)],
            ]);
            let rep = p.rep().left_mul(&d);
            QuotientPoint {
                norm: rep.norm(),
                rep,
            }
        })
        .collect()
}

/// A closed loop in `μ⁻¹(0)`: a seeded smooth periodic curve through `2 × n`
/// matrices, projected pointwise, optionally twisted along the orbits.
pub fn random_loop(
    n: usize,
    modes: usize,
    radius: f64,
    steps: usize,
    twist: f64,
    seed: u64,
) -> Result<Vec<QuotientPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_quotient_point(n, &mut rng)?;
    let mut coeffs = Vec::new();
    for _ in 0..modes {
        let c: Vec<C64> = (0..4 * n).map(|_| gaussian_c64(&mut rng)).collect();
        coeffs.push(c);
    }
    (0..=steps)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k % steps) as f64 / steps as f64;
            let mut data = base.rep().as_slice().to_vec();
            for (m, c) in coeffs.iter().enumerate() {
                let f = (m + 1) as f64;
                for e in 0..2 * n {
                    data[e] += (c[e] * (f * t).cos() + c[2 * n + e] * (f * t).sin())
                        * (radius / (modes as f64));
                }
            }
            let q = project_to_zero_set(&SpinorMatrix::from_vec(n, data))?;
            Ok(q.rephased(twist * (t.sin() + (2.0 * t).cos())))
        })
        .collect()
}

/// A map from the torus to the quotient, one representative per site.
#[derive(Clone, Debug)]
pub struct SectionOfM {
    points: Vec<QuotientPoint>,
    n: usize,
}

impl SectionOfM {
    pub fn new(points: Vec<QuotientPoint>, lat: &TorusLattice) -> Result<Self> {
        if points.len() != lat.num_sites() || points.is_empty() {
            return Err(Error::ShapeMismatch(
                "section does not fit the lattice".into(),
            ));
        }
        let n = points[0].rank();
        if points.iter().any(|p| p.rank() != n) {
            return Err(Error::ShapeMismatch("mixed ranks in section".into()));
        }
        Ok(SectionOfM { points, n })
    }

    /// The section induced by a nowhere-vanishing `Ψ` with `μ(Ψ) = 0`.
    pub fn from_spinor(psi: &SpinorField, lat: &TorusLattice) -> Result<Self> {
        let points = (0..psi.num_sites())
            .map(|x| QuotientPoint::new(psi.matrix_at(x)))
            .collect::<Result<Vec<_>>>()?;
        SectionOfM::new(points, lat)
    }

    /// Pointwise projection of `Ψ` onto the zero set.
    pub fn project(psi: &SpinorField, lat: &TorusLattice) -> Result<Self> {
        let points = (0..psi.num_sites())
            .map(|x| project_to_zero_set(&psi.matrix_at(x)))
            .collect::<Result<Vec<_>>>()?;
        SectionOfM::new(points, lat)
    }

    pub fn points(&self) -> &[QuotientPoint] {
        &self.points
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Representatives multiplied by `e^{iφ(x)}`.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        SectionOfM {
            points: self
                .points
                .iter()
                .zip(phases)
                .map(|(p, &t)| p.rephased(t))
                .collect(),
            n: self.n,
        }
    }

    /// Representatives as a spinor field.
    pub fn to_spinor(&self, lat: &TorusLattice) -> Result<SpinorField> {
        let data = self
            .points
            .iter()
            .flat_map(|p| p.rep().as_slice().iter().copied())
            .collect();
        SpinorField::from_vec(lat, self.n, data)
    }
}

/// Orthogonal projection onto the horizontal space at `psi`.
fn project_horizontal(v: &SpinorMatrix, psi: &SpinorMatrix) -> SpinorMatrix {
    let mut basis: Vec<SpinorMatrix> = Vec::with_capacity(4);
    for d in normal_directions(psi) {
        let mut u = d;
        for b in &basis {
            u = u.sub(&b.scale(C64::new(u.re_inner(b), 0.0)));
        }
        let nrm = u.norm();
        if nrm > 1e-14 * psi.norm() {
            basis.push(u.scale(C64::new(1.0 / nrm, 0.0)));
        }
    }
    let mut out = v.clone();
    for b in &basis {
        out = out.sub(&b.scale(C64::new(v.re_inner(b), 0.0)));
    }
    out
}

/// `L²` norm of the horizontal part of `Σ_j γ_j ∂_j 𝔍`, with central
/// differences of neighbor representatives phase-aligned to the center.
pub fn fueter_residual(section: &SectionOfM, g: &GammaRep, lat: &TorusLattice) -> Result<f64> {
    if section.points.len() != lat.num_sites() {
        return Err(Error::ShapeMismatch(
            "section does not fit the lattice".into(),
        ));
    }
    let inv = 1.0 / (2.0 * lat.spacing());
    let mut total = 0.0;
    for x in 0..lat.num_sites() {
        let center = section.points[x].rep();
        let mut acc = SpinorMatrix::zeros(section.n);
        for j in 0..3 {
            let f = section.points[lat.shift(x, j, true)].rep();
            let b = section.points[lat.shift(x, j, false)].rep();
            let f = f.scale(align_phase(center, f));
            let b = b.scale(align_phase(center, b));
            let d = f.sub(&b).scale(C64::new(inv, 0.0));
            acc = acc.add(&d.left_mul(&g.gamma[j]));
        }
        total += project_horizontal(&acc, center).norm_sqr();
    }
    Ok((total * lat.cell_volume()).sqrt())
}

/// Lift of a section: representatives aligned along a spanning tree, the
/// induced links, and the flatness and monodromy report.
#[derive(Clone, Debug)]
pub struct Lift {
    pub a: U1Connection,
    pub psi: SpinorField,
    /// `max |arg P| / h²` over plaquettes.
    pub curvature_sup: f64,
    /// Holonomies around the three coordinate circles through site 0.
    pub holonomies: [C64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftSummary {
    pub flatness_sup: f64,
    pub holonomies: [f64; 3],
    pub holonomies_in_z2: bool,
}

impl Lift {
    pub fn summary(&self) -> LiftSummary {
        LiftSummary {
            flatness_sup: self.curvature_sup,
            holonomies: self.holonomies.map(|z| z.re),
            holonomies_in_z2: self
                .holonomies
                .iter()
                .all(|z| (z - 1.0).norm() <= TRANSPORT_TOL || (z + 1.0).norm() <= TRANSPORT_TOL),
        }
    }
}

/// Tree parent in lexicographic order: along axis 0, then down the `(0, ·, ·)`
/// face, then down the `(0, 0, ·)` edge.
fn tree_parent(lat: &TorusLattice, x: usize) -> Option<usize> {
    let [i, j, k] = lat.coords(x);
    if i > 0 {
        Some(lat.site(i - 1, j, k))
    } else if j > 0 {
        Some(lat.site(0, j - 1, k))
    } else if k > 0 {
        Some(lat.site(0, 0, k - 1))
    } else {
        None
    }
}

/// Lifts a section; fails with an obstruction when the induced connection
/// has plaquette curvature above `tolerance`.
pub fn lift_section(section: &SectionOfM, lat: &TorusLattice, tolerance: f64) -> Result<Lift> {
    let m = lat.num_sites();
    if section.points.len() != m {
        return Err(Error::ShapeMismatch(
            "section does not fit the lattice".into(),
        ));
    }
    // sites in lexicographic order visit each parent first
    let mut reps: Vec<SpinorMatrix> = Vec::with_capacity(m);
    let order: Vec<usize> = {
        let n = lat.n_per_axis();
        let mut v = Vec::with_capacity(m);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    v.push(lat.site(i, j, k));
                }
            }
        }
        v
    };
    let mut lifted: Vec<Option<SpinorMatrix>> = vec![None; m];
    for &x in &order {
        let rep = section.points[x].rep();
        let value = match tree_parent(lat, x) {
            None => rep.clone(),
            Some(p) => {
                let parent = lifted[p].as_ref().expect("parent visited first");
                rep.scale(align_phase(parent, rep))
            }
        };
        lifted[x] = Some(value);
    }
    reps.extend(lifted.into_iter().map(Option::unwrap));

    let mut links = Vec::with_capacity(3 * m);
    for x in 0..m {
        for j in 0..3 {
            let y = lat.shift(x, j, true);
            links.push(align_phase(&reps[x], &reps[y]));
        }
    }
    let a = U1Connection::from_links(lat, links)?;
    let h2 = lat.spacing() * lat.spacing();
    // a plaquette at the branch cut encloses a rank-one point of the section
    let angles = gauge::plaquette_angles(&a, lat).map_err(|_| Error::LiftObstruction {
        curvature: std::f64::consts::PI / h2,
    })?;
    let curvature_sup = angles
        .iter()
        .flat_map(|t| t.iter().map(|v| v.abs() / h2))
        .fold(0.0, f64::max);
    if curvature_sup > tolerance {
        return Err(Error::LiftObstruction {
            curvature: curvature_sup,
        });
    }
    let mut holonomies = [C64::new(1.0, 0.0); 3];
    for (axis, hol) in holonomies.iter_mut().enumerate() {
        *hol = gauge::loop_holonomy(&a, &gauge::axis_loop(lat, 0, axis), lat)?;
    }
    let data = reps
        .iter()
        .flat_map(|r| r.as_slice().iter().copied())
        .collect();
    Ok(Lift {
        a,
        psi: SpinorField::from_vec(lat, section.n, data)?,
        curvature_sup,
        holonomies,
    })
}

/// Section `exp(iπ i/N σ₃) rep` at site `(i, j, k)`: constant in the other
/// directions and winding once around the generator along axis 0.
pub fn winding_section(p: &QuotientPoint, lat: &TorusLattice) -> Result<SectionOfM> {
    let n = lat.n_per_axis();
    let path = pi1_generator(p, n);
    let points = (0..lat.num_sites())
        .map(|x| path[lat.coords(x)[0]].clone())
        .collect();
    SectionOfM::new(points, lat)
}

/// JSON report of the quotient and section checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FueterReport {
    pub dimension_probe: Vec<usize>,
    pub loop_holonomies: Vec<[f64; 2]>,
    pub flatness_sup: f64,
    pub fueter_residual: f64,
}

pub(crate) fn max_z2_deviation(holonomies: &[C64]) -> f64 {
    holonomies
        .iter()
        .map(|z| (z - 1.0).norm().min((z + 1.0).norm()))
        .fold(0.0, f64::max)
}

/// Box-Muller complex Gaussian with unit variance per component.
pub(crate) fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    C64::from_polar((-2.0 * u.ln()).sqrt(), 2.0 * std::f64::consts::PI * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::spin::make_gamma;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn orthonormal2() -> SpinorMatrix {
        SpinorMatrix::from_vec(2, vec![C64::new(1.0, 0.0), ZERO, ZERO, C64::new(0.0, 1.0)])
    }

    #[test]
    fn projection_fixes_zero_set_points() {
        let p = orthonormal2();
        let q = project_to_zero_set(&p).unwrap();
        assert!(q.rep().sub(&p).norm() < 1e-14);
        let mut r = rng(1);
        for n in 2..=4 {
            let q = random_quotient_point(n, &mut r).unwrap();
            let again = project_to_zero_set(q.rep()).unwrap();
            assert!(again.rep().sub(q.rep()).norm() < 1e-12 * q.norm());
        }
    }

    #[test]
    fn projection_of_rank_one_is_infeasible() {
        let p = SpinorMatrix::from_vec(1, vec![C64::new(1.0, 0.0), C64::new(0.3, 0.2)]);
        assert!(matches!(
            project_to_zero_set(&p),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn projection_is_locally_nearest() {
        let mut r = rng(2);
        for n in [2, 3] {
            let data: Vec<C64> = (0..2 * n).map(|_| gaussian_c64(&mut r)).collect();
            let psi = SpinorMatrix::from_vec(n, data);
            let q = project_to_zero_set(&psi).unwrap();
            assert!(moment_map(q.rep()).norm() <= 1e-12 * q.norm() * q.norm());
            let d0 = psi.sub(q.rep()).norm();
            for _ in 0..50 {
                let pert: Vec<C64> = (0..2 * n).map(|_| gaussian_c64(&mut r) * 1e-3).collect();
                let other =
                    project_to_zero_set(&q.rep().add(&SpinorMatrix::from_vec(n, pert))).unwrap();
                assert!(psi.sub(other.rep()).norm() >= d0 - 1e-12);
            }
        }
    }

    #[test]
    fn dimension_probe_is_4n_minus_4() {
        let mut r = rng(3);
        for n in 2..=4 {
            for _ in 0..100 {
                let q = random_quotient_point(n, &mut r).unwrap();
                assert_eq!(quotient_dimension_probe(&q).unwrap(), 4 * n - 4);
            }
        }
    }

    #[test]
    fn orbit_action_preserves_zero_set() {
        let q = random_quotient_point(3, &mut rng(4)).unwrap();
        let before = moment_map(q.rep()).norm();
        let after = moment_map(q.rephased(1.234).rep()).norm();
        assert!((before - after).abs() < 1e-14);
    }

    #[test]
    fn transport_of_trivial_and_orbit_loops() {
        let q = random_quotient_point(2, &mut rng(5)).unwrap();
        let constant = vec![q.clone(); 10];
        assert!((canonical_transport(&constant, q.rep()).unwrap() - 1.0).norm() < 1e-14);
        let orbit: Vec<QuotientPoint> = (0..=64)
            .map(|k| q.rephased(2.0 * std::f64::consts::PI * k as f64 / 64.0 * 0.9))
            .collect();
        let hol = canonical_transport(&orbit, q.rep()).unwrap();
        assert!((hol - 1.0).norm() < 1e-12);
    }

    #[test]
    fn generator_loop_has_holonomy_minus_one() {
        let mut r = rng(6);
        for n in [2, 3, 4] {
            let q = random_quotient_point(n, &mut r).unwrap();
            let hol = canonical_transport(&pi1_generator(&q, 64), q.rep()).unwrap();
            assert!((hol + 1.0).norm() < TRANSPORT_TOL);
        }
    }

    #[test]
    fn transport_rejects_bad_paths() {
        let q = random_quotient_point(2, &mut rng(7)).unwrap();
        let coarse = pi1_generator(&q, 4);
        assert!(matches!(
            canonical_transport(&coarse, q.rep()),
            Err(Error::LargeStep { .. })
        ));
        let open = &pi1_generator(&q, 64)[..40];
        assert!(matches!(
            canonical_transport(open, q.rep()),
            Err(Error::OpenPath { .. })
        ));
    }

    #[test]
    fn random_loops_are_z2_for_n2() {
        for seed in 0..10 {
            let path = random_loop(2, 3, 0.3, 2000, 0.7, seed).unwrap();
            let hol = canonical_transport(&path, path[0].rep()).unwrap();
            assert!(
                max_z2_deviation(&[hol]) < TRANSPORT_TOL,
                "seed {seed}: {hol}"
            );
        }
    }

    #[test]
    fn small_loop_for_n3_picks_up_curvature() {
        // horizontal directions X and iX with X moving the first row into the
        // third column span a curved plane of the canonical connection
        let base = SpinorMatrix::from_vec(
            3,
            vec![
                C64::new(1.0, 0.0),
                ZERO,
                ZERO,
                ZERO,
                C64::new(1.0, 0.0),
                ZERO,
            ],
        );
        let eps = 0.05;
        let steps = 400;
        let path: Vec<QuotientPoint> = (0..=steps)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k % steps) as f64 / steps as f64;
                let mut data = base.as_slice().to_vec();
                data[2] = C64::new(eps * t.cos(), eps * t.sin());
                project_to_zero_set(&SpinorMatrix::from_vec(3, data)).unwrap()
            })
            .collect();
        let hol = canonical_transport(&path, path[0].rep()).unwrap();
        assert!(max_z2_deviation(&[hol]) > 1e-3, "{hol}");
    }

    #[test]
    fn fueter_residual_of_constant_and_rephased_sections() {
        let lat = build_lattice(6, 1.0).unwrap();
        let g = make_gamma();
        let q = random_quotient_point(2, &mut rng(8)).unwrap();
        let constant = SectionOfM::new(vec![q.clone(); lat.num_sites()], &lat).unwrap();
        assert!(fueter_residual(&constant, &g, &lat).unwrap() <= 1e-10);
        let phases: Vec<f64> = (0..lat.num_sites())
            .map(|x| (x as f64 * 0.37).sin() * 3.0)
            .collect();
        let twisted = constant.rephased(&phases);
        assert!(fueter_residual(&twisted, &g, &lat).unwrap() <= 1e-8);

        let psi = gauge::smooth_spinor(&lat, 3, 2, 9);
        let section = SectionOfM::project(&psi, &lat).unwrap();
        let r0 = fueter_residual(&section, &g, &lat).unwrap();
        let r1 = fueter_residual(&section.rephased(&phases), &g, &lat).unwrap();
        assert!(r0 > 0.0);
        assert!((r0 - r1).abs() <= 1e-8 * r0.max(1.0));
    }

    #[test]
    fn section_from_manufactured_solution() {
        let lat = build_lattice(6, 1.0).unwrap();
        let g = make_gamma();
        let psi = gauge::normalize(&SpinorField::constant(&lat, &orthonormal2())).unwrap();
        let section = SectionOfM::from_spinor(&psi, &lat).unwrap();
        assert!(fueter_residual(&section, &g, &lat).unwrap() <= 1e-10);
    }

    #[test]
    fn lifts_of_constant_and_winding_sections() {
        let lat = build_lattice(6, 1.0).unwrap();
        for n in [2, 3] {
            let q = random_quotient_point(n, &mut rng(10 + n as u64)).unwrap();
            let constant = SectionOfM::new(vec![q.clone(); lat.num_sites()], &lat).unwrap();
            let lift = lift_section(&constant, &lat, LIFT_TOL).unwrap();
            assert!(lift.curvature_sup <= 1e-12);
            for hol in lift.holonomies {
                assert!((hol - 1.0).norm() < 1e-12);
            }
            let winding = winding_section(&q, &lat).unwrap();
            let lift = lift_section(&winding, &lat, LIFT_TOL).unwrap();
            assert!(lift.curvature_sup <= LIFT_TOL);
            assert!((lift.holonomies[0] + 1.0).norm() < TRANSPORT_TOL);
            assert!((lift.holonomies[1] - 1.0).norm() < TRANSPORT_TOL);
            assert!((lift.holonomies[2] - 1.0).norm() < TRANSPORT_TOL);
            assert!(lift.summary().holonomies_in_z2);
        }
    }

    #[test]
    fn generic_n3_section_does_not_lift_flat() {
        let lat = build_lattice(6, 1.0).unwrap();
        let psi = gauge::smooth_spinor(&lat, 3, 4, 5);
        let section = SectionOfM::project(&psi, &lat).unwrap();
        assert!(matches!(
            lift_section(&section, &lat, LIFT_TOL),
            Err(Error::LiftObstruction { .. })
        ));

        // away from the rank-one locus an n = 2 section lifts flat
        let shift = orthonormal2().scale(C64::new(4.0, 0.0));
        let psi2 =
            gauge::smooth_spinor(&lat, 2, 4, 5).axpy(1.0, &SpinorField::constant(&lat, &shift));
        let section2 = SectionOfM::project(&psi2, &lat).unwrap();
        let lift = lift_section(&section2, &lat, LIFT_TOL).unwrap();
        assert!(lift.summary().holonomies_in_z2);
    }
}
