//! Twisted Dirac operator, covariant derivative and connection Laplacian on
//! the lattice, plus the Weitzenböck and integration-by-parts verifiers.
//!
//! All first derivatives are central differences with parallel transport, so
//! `D` is exactly symmetric under the discrete `L²` pairing. The connection
//! Laplacian is the 7-point covariant stencil, whose quadratic form is a sum
//! of squared forward differences and therefore nonnegative.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::gauge::{self, SUnConnection, SpinorField, U1Connection};
use crate::lattice::{self, TorusLattice};
use crate::linalg::{self, ZERO};
use crate::spin::{curvature_action, GammaRep};
use crate::{Error, Result};

/// Difference scheme used for first derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Central,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorStencil {
    pub scheme: Scheme,
    pub spacing: f64,
}

impl OperatorStencil {
    pub fn new(lat: &TorusLattice) -> Self {
        OperatorStencil {
            scheme: Scheme::Central,
            spacing: lat.spacing(),
        }
    }
}

/// Parallel transport of spinor values between neighboring sites.
pub(crate) struct Transport<'a> {
    pub a: &'a U1Connection,
    pub b: &'a SUnConnection,
    pub lat: &'a TorusLattice,
    n: usize,
    trivial_b: bool,
}

impl<'a> Transport<'a> {
    pub fn new(a: &'a U1Connection, b: &'a SUnConnection, lat: &'a TorusLattice) -> Self {
        Transport {
            a,
            b,
            lat,
            n: b.rank(),
            trivial_b: b.is_trivial(),
        }
    }

    /// `u_j(x) ψ(x+ĵ) v_j(x)*`, the value at `x + ĵ` carried back to `x`.
    #[inline]
    pub fn forward(&self, psi: &[C64], x: usize, j: usize, out: &mut [C64]) {
        let w = 2 * self.n;
        let y = self.lat.shift(x, j, true);
        let u = self.a.link(x, j);
        let src = &psi[y * w..(y + 1) * w];
        if self.trivial_b {
            for (o, s) in out.iter_mut().zip(src) {
                *o = u * s;
            }
        } else {
            linalg::hom_mul_adj(src, self.b.link(x, j), self.n, out);
            out.iter_mut().for_each(|o| *o *= u);
        }
    }

    /// `u_j(x−ĵ)⁻¹ ψ(x−ĵ) v_j(x−ĵ)`, the value at `x − ĵ` carried to `x`.
    #[inline]
    pub fn backward(&self, psi: &[C64], x: usize, j: usize, out: &mut [C64]) {
        let w = 2 * self.n;
        let y = self.lat.shift(x, j, false);
        let u = self.a.link(y, j).conj();
        let src = &psi[y * w..(y + 1) * w];
        if self.trivial_b {
            for (o, s) in out.iter_mut().zip(src) {
                *o = u * s;
            }
        } else {
            linalg::hom_mul(src, self.b.link(y, j), self.n, out);
            out.iter_mut().for_each(|o| *o *= u);
        }
    }
}

fn check_shapes(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> Result<()> {
    let m = lat.num_sites();
    if a.num_sites() != m || psi.num_sites() != m || b.links().len() != 3 * m * b.rank() * b.rank()
    {
        return Err(Error::ShapeMismatch(
            "fields live on different lattices".into(),
        ));
    }
    if b.rank() != psi.rank() {
        return Err(Error::ShapeMismatch(format!(
            "B has rank {} but Ψ has {} columns",
            b.rank(),
            psi.rank()
        )));
    }
    Ok(())
}

/// Central covariant derivative, laid out as `[site][axis][2 × n]`.
pub fn covariant_derivative(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> Result<Vec<C64>> {
    check_shapes(a, b, psi, lat)?;
    let tr = Transport::new(a, b, lat);
    let w = 2 * psi.rank();
    let inv = 1.0 / (2.0 * lat.spacing());
    let mut out = vec![ZERO; 3 * w * lat.num_sites()];
    out.par_chunks_mut(3 * w)
        .enumerate()
        .for_each(|(x, chunk)| {
            let mut fwd = vec![ZERO; w];
            let mut bwd = vec![ZERO; w];
            for j in 0..3 {
                tr.forward(psi.data(), x, j, &mut fwd);
                tr.backward(psi.data(), x, j, &mut bwd);
                for e in 0..w {
                    chunk[j * w + e] = (fwd[e] - bwd[e]) * inv;
                }
            }
        });
    Ok(out)
}

/// `D ψ = Σ_j γ_j ∇_j ψ`.
pub fn dirac(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<SpinorField> {
    let data = dirac_raw(a, b, psi.data(), psi.rank(), g, lat)?;
    SpinorField::from_vec(lat, psi.rank(), data)
}

pub(crate) fn dirac_raw(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &[C64],
    n: usize,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<Vec<C64>> {
    if psi.len() != 2 * n * lat.num_sites() || b.rank() != n {
        return Err(Error::ShapeMismatch(
            "spinor data does not fit the lattice".into(),
        ));
    }
    let tr = Transport::new(a, b, lat);
    let w = 2 * n;
    let inv = 1.0 / (2.0 * lat.spacing());
    let mut out = vec![ZERO; psi.len()];
    out.par_chunks_mut(w).enumerate().for_each_init(
        || vec![ZERO; 4 * w],
        |buf, (x, o)| {
            let (fwd, rest) = buf.split_at_mut(w);
            let (bwd, rest) = rest.split_at_mut(w);
            let (diff, tmp) = rest.split_at_mut(w);
            for j in 0..3 {
                tr.forward(psi, x, j, fwd);
                tr.backward(psi, x, j, bwd);
                for e in 0..w {
                    diff[e] = (fwd[e] - bwd[e]) * inv;
                }
                linalg::mat2_mul_hom(&g.gamma[j], diff, n, tmp);
                for e in 0..w {
                    o[e] += tmp[e];
                }
            }
        },
    );
    Ok(out)
}

/// 7-point covariant Laplacian `Σ_j (2ψ − T₊ψ − T₋ψ) / h²`.
pub fn connection_laplacian(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> Result<SpinorField> {
    check_shapes(a, b, psi, lat)?;
    let tr = Transport::new(a, b, lat);
    let w = 2 * psi.rank();
    let inv = 1.0 / (lat.spacing() * lat.spacing());
    let mut out = vec![ZERO; psi.data().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(x, o)| {
        let mut fwd = vec![ZERO; w];
        let mut bwd = vec![ZERO; w];
        let own = psi.at(x);
        for j in 0..3 {
            tr.forward(psi.data(), x, j, &mut fwd);
            tr.backward(psi.data(), x, j, &mut bwd);
            for e in 0..w {
                o[e] += (own[e] * 2.0 - fwd[e] - bwd[e]) * inv;
            }
        }
    });
    SpinorField::from_vec(lat, psi.rank(), out)
}

/// Pointwise `|∇ψ|²` as the average of squared forward and backward
/// transported differences. Its total integral equals `⟨∇*∇ψ, ψ⟩`.
pub fn gradient_density(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    lat: &TorusLattice,
) -> Result<Vec<f64>> {
    check_shapes(a, b, psi, lat)?;
    let tr = Transport::new(a, b, lat);
    let w = 2 * psi.rank();
    let inv = 1.0 / (lat.spacing() * lat.spacing());
    Ok((0..lat.num_sites())
        .into_par_iter()
        .map(|x| {
            let mut fwd = vec![ZERO; w];
            let mut bwd = vec![ZERO; w];
            let own = psi.at(x);
            let mut acc = 0.0;
            for j in 0..3 {
                tr.forward(psi.data(), x, j, &mut fwd);
                tr.backward(psi.data(), x, j, &mut bwd);
                for e in 0..w {
                    acc += 0.5 * ((fwd[e] - own[e]).norm_sqr() + (bwd[e] - own[e]).norm_sqr());
                }
            }
            acc * inv
        })
        .collect())
}

/// `F_B ψ = Σ_p γ_p ψ (−G_p)` with clover generators `G_p` of `B`.
fn f_b_action(
    b: &SUnConnection,
    psi: &[C64],
    x: usize,
    g: &GammaRep,
    lat: &TorusLattice,
    out: &mut [C64],
) {
    let n = b.rank();
    let w = 2 * n;
    let gens = gauge::sun_clover(b, lat, x);
    let mut tmp = vec![ZERO; w];
    let mut tmp2 = vec![ZERO; w];
    out.iter_mut().for_each(|o| *o = ZERO);
    for (p, gen) in gens.iter().enumerate() {
        linalg::hom_mul(psi, gen, n, &mut tmp);
        linalg::mat2_mul_hom(&g.gamma[p], &tmp, n, &mut tmp2);
        for e in 0..w {
            out[e] -= tmp2[e];
        }
    }
}

/// `(F_A + F_B) ψ` with clover-averaged curvatures, `F_A` acting through the
/// two-form dictionary on the spinor factor.
pub fn curvature_term(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<SpinorField> {
    check_shapes(a, b, psi, lat)?;
    let n = psi.rank();
    let w = 2 * n;
    let trivial_b = b.is_trivial();
    let fa: Vec<_> = (0..lat.num_sites())
        .map(|x| gauge::u1_clover(a, lat, x))
        .collect::<Result<_>>()?;
    let mut out = vec![ZERO; psi.data().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(x, o)| {
        linalg::mat2_mul_hom(&curvature_action(fa[x]), psi.at(x), n, o);
        if !trivial_b {
            let mut fb = vec![ZERO; w];
            f_b_action(b, psi.at(x), x, g, lat, &mut fb);
            for e in 0..w {
                o[e] += fb[e];
            }
        }
    });
    SpinorField::from_vec(lat, n, out)
}

/// `‖D(Dψ) − (∇*∇ψ + F_A ψ + F_B ψ)‖_{L²}` on the flat torus.
pub fn weitzenbock_residual(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<f64> {
    let dd = dirac(a, b, &dirac(a, b, psi, g, lat)?, g, lat)?;
    let lap = connection_laplacian(a, b, psi, lat)?;
    let curv = curvature_term(a, b, psi, g, lat)?;
    let sum: f64 = dd
        .data()
        .iter()
        .zip(lap.data())
        .zip(curv.data())
        .map(|((x, y), z)| (x - y - z).norm_sqr())
        .sum();
    Ok((sum * lat.cell_volume()).sqrt())
}

/// Fraction of `‖ψ‖²` carried by lattice Fourier modes with some
/// `|k_a| > N/4`. Large values signal doubler contamination.
pub fn high_frequency_fraction(psi: &SpinorField, lat: &TorusLattice) -> f64 {
    let n = lat.n_per_axis();
    let w = 2 * psi.rank();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut total = 0.0;
    let mut high = 0.0;
    let mut buf = vec![ZERO; lat.num_sites()];
    let mut line = vec![ZERO; n];
    for e in 0..w {
        for (s, v) in buf.iter_mut().enumerate() {
            *v = psi.at(s)[e];
        }
        for axis in 0..3 {
            let stride = [1, n, n * n][axis];
            for base in 0..lat.num_sites() {
                if lat.coords(base)[axis] != 0 {
                    continue;
                }
                for (t, l) in line.iter_mut().enumerate() {
                    *l = buf[base + t * stride];
                }
                fft.process(&mut line);
                for (t, l) in line.iter().enumerate() {
                    buf[base + t * stride] = *l;
                }
            }
        }
        for (s, v) in buf.iter().enumerate() {
            let c = lat.coords(s);
            let folded = |k: usize| k.min(n - k);
            let e2 = v.norm_sqr();
            total += e2;
            if c.iter().any(|&k| 4 * folded(k) > n) {
                high += e2;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        high / total
    }
}

/// Integration domain for [`integration_by_parts_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// The whole torus, which has no boundary.
    Torus,
    /// Shell-bounded ball `B_r(center)`, `r` a shell radius.
    Ball { center: usize, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IbpCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / (|lhs| + |rhs| + 1)`.
    pub discrepancy: f64,
}

impl IbpCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        IbpCheck {
            lhs,
            rhs,
            discrepancy: (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0),
        }
    }
}

/// Positive lattice Laplacian of a scalar field.
fn positive_laplacian(f: &[f64], lat: &TorusLattice) -> Vec<f64> {
    let inv = 1.0 / (lat.spacing() * lat.spacing());
    (0..lat.num_sites())
        .map(|x| {
            let mut v = 6.0 * f[x];
            for j in 0..3 {
                v -= f[lat.shift(x, j, true)] + f[lat.shift(x, j, false)];
            }
            v * inv
        })
        .collect()
}

/// Pointwise `⟨F_B ψ, ψ⟩` with clover generators.
pub fn f_b_density(
    b: &SUnConnection,
    psi: &SpinorField,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Vec<f64> {
    if b.is_trivial() {
        return vec![0.0; lat.num_sites()];
    }
    let w = 2 * psi.rank();
    (0..lat.num_sites())
        .into_par_iter()
        .map(|x| {
            let mut fb = vec![ZERO; w];
            f_b_action(b, psi.at(x), x, g, lat, &mut fb);
            linalg::re_inner(&fb, psi.at(x))
        })
        .collect()
}

/// Both sides of
/// `∫_U Δf |Ψ|² + f (2⟨F_BΨ,Ψ⟩ + 2 cot²α |μ|² + 2|∇Ψ|²) = ∫_{∂U} f ∂_ν|Ψ|² − ∂_ν f |Ψ|²`
/// on the flat torus, with `Δ` the positive Laplacian.
#[allow(clippy::too_many_arguments)]
pub fn integration_by_parts_check(
    a: &U1Connection,
    b: &SUnConnection,
    psi: &SpinorField,
    alpha: f64,
    f: &[f64],
    region: Region,
    g: &GammaRep,
    lat: &TorusLattice,
) -> Result<IbpCheck> {
    if !(alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if f.len() != lat.num_sites() {
        return Err(Error::ShapeMismatch(
            "weight field does not fit the lattice".into(),
        ));
    }
    let cot2 = (alpha.cos() / alpha.sin()).powi(2);
    let grad = gradient_density(a, b, psi, lat)?;
    let fb = f_b_density(b, psi, g, lat);
    let norm2 = psi.pointwise_norm_sq();
    let lap_f = positive_laplacian(f, lat);
    let integrand: Vec<f64> = (0..lat.num_sites())
        .map(|x| {
            let mu2 = linalg::moment_map_slice(psi.at(x), psi.rank()).norm_sqr();
            lap_f[x] * norm2[x] + f[x] * (2.0 * fb[x] + 2.0 * cot2 * mu2 + 2.0 * grad[x])
        })
        .collect();
    match region {
        Region::Torus => {
            let lhs = linalg::neumaier_sum(integrand.iter().copied()) * lat.cell_volume();
            Ok(IbpCheck::new(lhs, 0.0))
        }
        Region::Ball { center, radius } => {
            lat.shell_of_radius(radius)?;
            let lhs = lattice::ball_sum(&integrand, center, radius, lat)?;
            let rhs =
                lattice::weighted_radial_derivative_sum(Some(f), &norm2, center, radius, lat)?
                    - lattice::weighted_radial_derivative_sum(
                        Some(&norm2),
                        f,
                        center,
                        radius,
                        lat,
                    )?;
            Ok(IbpCheck::new(lhs, rhs))
        }
    }
}
