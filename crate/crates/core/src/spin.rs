//! Clifford algebra of `Spin(3)` and the moment map.
//!
//! Conventions: `γ_j = −i σ_j`, the oriented coframe `(e¹, e², e³)` has
//! `ε₁₂₃ = +1`, and two-forms are stored in the basis
//! `(e²∧e³, e³∧e¹, e¹∧e²)`, so that `e^i∧e^j ↦ ½[γ_i, γ_j] = ε_{ijk} γ_k`
//! sends basis element `p` to `γ_p`. Matrices are paired with
//! `⟨M, N⟩ = Re tr(M N*)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, ONE, ZERO};
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// A `2 × 2` complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// `Re tr(self · other*)`.
    pub fn re_inner(&self, other: &Mat2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        self.scale(C64::new(rhs, 0.0))
    }
}

/// The Pauli matrices `σ₁, σ₂, σ₃`.
pub fn pauli() -> [Mat2; 3] {
    [
        Mat2([[ZERO, ONE], [ONE, ZERO]]),
        Mat2([[ZERO, -I], [I, ZERO]]),
        Mat2([[ONE, ZERO], [ZERO, -ONE]]),
    ]
}

/// Clifford action of the oriented orthonormal coframe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRep {
    pub gamma: [Mat2; 3],
}

/// `γ_j = −i σ_j`.
pub fn make_gamma() -> GammaRep {
    let s = pauli();
    GammaRep {
        gamma: [s[0].scale(-I), s[1].scale(-I), s[2].scale(-I)],
    }
}

impl Default for GammaRep {
    fn default() -> Self {
        make_gamma()
    }
}

/// Real two-form with coefficients of `(e²∧e³, e³∧e¹, e¹∧e²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoForm(pub [f64; 3]);

impl TwoForm {
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// Image of `w` under the dictionary `Λ² → su(S)`.
pub fn two_form_to_su(w: TwoForm, g: &GammaRep) -> Mat2 {
    (0..3).fold(Mat2::zero(), |acc, p| acc + g.gamma[p] * w.0[p])
}

/// Inverse of [`two_form_to_su`]. Rejects matrices that are not
/// anti-Hermitian and traceless to `1e−10` (relative to `max(1, |m|)`).
pub fn su_to_two_form(m: &Mat2, g: &GammaRep) -> Result<TwoForm> {
    let scale = m.norm().max(1.0);
    let defect = (*m + m.adjoint()).norm() + m.trace().norm();
    if defect > 1e-10 * scale {
        return Err(Error::NotAntiHermitianTraceless { defect });
    }
    Ok(su_coefficients(m, g))
}

/// `w_p = −½ Re tr(γ_p m)`, without validation.
pub(crate) fn su_coefficients(m: &Mat2, g: &GammaRep) -> TwoForm {
    let mut w = [0.0; 3];
    for (p, c) in w.iter_mut().enumerate() {
        *c = -0.5 * (g.gamma[p] * *m).trace().re;
    }
    TwoForm(w)
}

/// Hermitian matrix `i · two_form_to_su(w) = Σ_p w_p σ_p`. This is how an
/// imaginary-valued curvature `F = i w` acts on spinors.
pub fn curvature_action(w: TwoForm) -> Mat2 {
    let s = pauli();
    (0..3).fold(Mat2::zero(), |acc, p| acc + s[p] * w.0[p])
}

/// A `2 × n` complex matrix, an element of `Hom(E, S ⊗ ℒ)` at one point.
/// Rows index the spinor factor, columns the `E` factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorMatrix {
    n: usize,
    data: Vec<C64>,
}

impl SpinorMatrix {
    pub fn zeros(n: usize) -> Self {
        SpinorMatrix {
            n,
            data: vec![ZERO; 2 * n],
        }
    }

    /// Builds from row-major entries; panics unless `data.len() == 2n`.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), 2 * n, "a 2×n matrix needs 2n entries");
        SpinorMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.n + col]
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sq(&self.data)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        SpinorMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &SpinorMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SpinorMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SpinorMatrix) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// `m · self` for a `2×2` matrix acting on the spinor factor.
    pub fn left_mul(&self, m: &Mat2) -> Self {
        let mut out = SpinorMatrix::zeros(self.n);
        linalg::mat2_mul_hom(m, &self.data, self.n, &mut out.data);
        out
    }

    /// `Re tr(self · other*)`.
    pub fn re_inner(&self, other: &SpinorMatrix) -> f64 {
        linalg::re_inner(&self.data, &other.data)
    }

    /// `tr(self · other*)`.
    pub fn inner(&self, other: &SpinorMatrix) -> C64 {
        linalg::inner(&self.data, &other.data)
    }

    /// `a · b*`, a `2 × 2` matrix.
    pub fn outer(a: &SpinorMatrix, b: &SpinorMatrix) -> Mat2 {
        assert_eq!(a.n, b.n);
        let n = a.n;
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (s, entry) in row.iter_mut().enumerate() {
                *entry = (0..n)
                    .map(|k| a.data[r * n + k] * b.data[s * n + k].conj())
                    .sum();
            }
        }
        Mat2(m)
    }
}

/// Traceless Hermitian `2 × 2` matrix, the value of the moment map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracelessHermitian2(Mat2);

impl TracelessHermitian2 {
    /// Validates Hermiticity and tracelessness to `1e−12` relative.
    pub fn new(m: Mat2) -> Result<Self> {
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let defect = (m - m.adjoint()).norm() + m.trace().norm();
        if defect > 1e-12 * scale.max(1.0) {
            return Err(Error::NotAntiHermitianTraceless { defect });
        }
        Ok(TracelessHermitian2(m))
    }

    pub(crate) fn new_unchecked(m: Mat2) -> Self {
        TracelessHermitian2(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// The two-form `w` with `curvature_action(w) = self`, i.e. the preimage
    /// under the dictionary after identifying `i·su(S)` with Hermitian
    /// matrices.
    pub fn to_two_form(&self) -> TwoForm {
        let s = pauli();
        let mut w = [0.0; 3];
        for (p, c) in w.iter_mut().enumerate() {
            *c = 0.5 * (s[p] * self.0).trace().re;
        }
        TwoForm(w)
    }
}

/// `μ(Ψ) = ΨΨ* − ½|Ψ|² id`.
pub fn moment_map(psi: &SpinorMatrix) -> TracelessHermitian2 {
    TracelessHermitian2(linalg::moment_map_slice(&psi.data, psi.n))
}

/// Polarization `μ(Φ, Ψ) = ½(ΦΨ* + ΨΦ*) − ½ Re tr(ΨΦ*) id`, the symmetric
/// bilinear form with `μ(Ψ, Ψ) = μ(Ψ)`.
pub fn moment_map_polarized(phi: &SpinorMatrix, psi: &SpinorMatrix) -> TracelessHermitian2 {
    let sym = (SpinorMatrix::outer(phi, psi) + SpinorMatrix::outer(psi, phi)) * 0.5;
    let t = 0.5 * psi.re_inner(phi);
    TracelessHermitian2(sym - Mat2::identity() * t)
}

/// Worst defects of the pointwise algebraic identities over a seeded sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `γ_j² = −1`, anticommutation, `½[γ_i, γ_j] = γ_k`, anti-Hermitian.
    pub clifford_defect: f64,
    /// Dictionary round trips in both directions.
    pub dictionary_defect: f64,
    /// `|⟨μ(Ψ)Ψ, Ψ⟩ − |μ(Ψ)|²| / |Ψ|⁴`, per rank `1..=4`.
    pub contraction_defect: Vec<f64>,
    /// `|μ(μ(Ψ)Ψ, Ψ) − ½|Ψ|²μ − μ² + ½ tr(μ²)| / |Ψ|⁴`, per rank `1..=4`.
    pub quadratic_defect: Vec<f64>,
    pub samples: usize,
    pub passed: bool,
}

pub const CLIFFORD_TOL: f64 = 1e-14;
pub const IDENTITY_TOL: f64 = 1e-12;

fn sample_spinor(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> SpinorMatrix {
    use rand::Rng;
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let data = (0..2 * n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
        .collect();
    SpinorMatrix::from_vec(n, data)
}

/// Checks the Clifford relations, the dictionary, and the two moment map
/// identities on `samples` seeded random `Ψ` for each rank `n = 1..=4`.
/// Sample magnitudes span four decades; defects are relative to the natural
/// power of `|Ψ|`.
pub fn identity_suite(samples: usize, seed: u64) -> IdentityReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let gr = make_gamma();
    let g = gr.gamma;
    let mut clifford = 0.0f64;
    for j in 0..3 {
        clifford = clifford.max((g[j] * g[j] + Mat2::identity()).norm());
        clifford = clifford.max((g[j].adjoint() + g[j]).norm());
        for k in 0..3 {
            if j != k {
                clifford = clifford.max((g[j] * g[k] + g[k] * g[j]).norm());
            }
        }
    }
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        clifford = clifford.max((g[i].commutator(&g[j]) * 0.5 - g[k]).norm());
    }
    let mut dictionary = 0.0f64;
    for _ in 0..samples {
        let w = TwoForm([
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ]);
        let m = two_form_to_su(w, &gr);
        let back = su_to_two_form(&m, &gr)
            .map(|v| (0..3).map(|p| (v.0[p] - w.0[p]).abs()).fold(0.0, f64::max));
        dictionary = dictionary.max(back.unwrap_or(f64::INFINITY));
        dictionary = dictionary.max((two_form_to_su(su_coefficients(&m, &gr), &gr) - m).norm());
    }
    let mut contraction = Vec::new();
    let mut quadratic = Vec::new();
    for n in 1..=4 {
        let (mut c, mut q) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let psi = sample_spinor(&mut rng, n);
            let r2 = psi.norm_sqr();
            let mu = moment_map(&psi);
            let lhs = psi.left_mul(mu.matrix()).re_inner(&psi);
            c = c.max((lhs - mu.norm_sqr()).abs() / (r2 * r2));
            let m = *mu.matrix();
            let left = moment_map_polarized(&psi.left_mul(&m), &psi);
            let sq = m * m;
            let right = m * (0.5 * r2) + sq - Mat2::identity() * (0.5 * sq.trace().re);
            q = q.max((*left.matrix() - right).norm() / (r2 * r2));
        }
        contraction.push(c);
        quadratic.push(q);
    }
    let passed = clifford <= CLIFFORD_TOL
        && dictionary <= CLIFFORD_TOL
        && contraction
            .iter()
            .chain(&quadratic)
            .all(|&d| d <= IDENTITY_TOL);
    IdentityReport {
        clifford_defect: clifford,
        dictionary_defect: dictionary,
        contraction_defect: contraction,
        quadratic_defect: quadratic,
        samples,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut ChaCha8Rng, n: usize) -> SpinorMatrix {
        SpinorMatrix::from_vec(
            n,
            (0..2 * n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).norm() <= tol
    }

    #[test]
    fn gamma_three_written_out() {
        let g = make_gamma();
        let expected = Mat2([[C64::new(0.0, -1.0), ZERO], [ZERO, C64::new(0.0, 1.0)]]);
        assert_eq!(g.gamma[2], expected);
    }

    #[test]
    fn clifford_relations() {
        let g = make_gamma().gamma;
        for j in 0..3 {
            assert!(close(&(g[j] * g[j]), &-Mat2::identity(), 0.0));
            assert!(close(&g[j].adjoint(), &-g[j], 0.0));
            let det = g[j].0[0][0] * g[j].0[1][1] - g[j].0[0][1] * g[j].0[1][0];
            assert_eq!(det.norm(), 1.0);
            for k in 0..3 {
                if j != k {
                    assert!(close(&(g[j] * g[k] + g[k] * g[j]), &Mat2::zero(), 0.0));
                }
            }
        }
        // ½[γ_i, γ_j] = ε_ijk γ_k, cyclic
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            assert!(close(&(g[i].commutator(&g[j]) * 0.5), &g[k], 0.0));
        }
    }

    #[test]
    fn dictionary_basis_cases() {
        let g = make_gamma();
        assert_eq!(two_form_to_su(TwoForm([0.0, 0.0, 1.0]), &g), g.gamma[2]);
        assert_eq!(two_form_to_su(TwoForm::default(), &g), Mat2::zero());
        assert_eq!(
            su_to_two_form(&g.gamma[0], &g).unwrap(),
            TwoForm([1.0, 0.0, 0.0])
        );
        assert_eq!(
            su_to_two_form(&Mat2::zero(), &g).unwrap(),
            TwoForm::default()
        );
    }

    #[test]
    fn dictionary_rejects_hermitian_input() {
        let g = make_gamma();
        assert!(matches!(
            su_to_two_form(&Mat2::identity(), &g),
            Err(Error::NotAntiHermitianTraceless { .. })
        ));
        assert!(su_to_two_form(&pauli()[0], &g).is_err());
    }

    #[test]
    fn moment_map_of_unit_column() {
        let psi = SpinorMatrix::from_vec(1, vec![ONE, ZERO]);
        let mu = moment_map(&psi);
        let expected = Mat2([[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(-0.5, 0.0)]]);
        assert!(close(mu.matrix(), &expected, 1e-15));
        assert_eq!(moment_map(&SpinorMatrix::zeros(3)).norm(), 0.0);
    }

    #[test]
    fn polarization_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random_spinor(&mut rng, 3);
        let phi = random_spinor(&mut rng, 3);
        assert!(close(
            moment_map_polarized(&psi, &psi).matrix(),
            moment_map(&psi).matrix(),
            1e-14
        ));
        assert_eq!(
            moment_map_polarized(&phi, &SpinorMatrix::zeros(3)).norm(),
            0.0
        );
        assert!(close(
            moment_map_polarized(&phi, &psi).matrix(),
            moment_map_polarized(&psi, &phi).matrix(),
            1e-15
        ));
    }

    #[test]
    fn hermitian_two_form_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let psi = random_spinor(&mut rng, 2);
            let mu = moment_map(&psi);
            let back = curvature_action(mu.to_two_form());
            assert!(close(&back, mu.matrix(), 1e-14));
            // i · two_form_to_su agrees with curvature_action
            let w = mu.to_two_form();
            assert!(close(
                &two_form_to_su(w, &make_gamma()).scale(I),
                &curvature_action(w),
                1e-15
            ));
        }
    }

    #[test]
    fn identity_suite_passes() {
        let r = identity_suite(1000, 11);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.contraction_defect.len(), 4);
    }
}
