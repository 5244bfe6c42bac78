//! Periodic cubic lattice on the flat 3-torus `(ℝ/Lℤ)³` and the radial
//! quadrature used by the frequency machinery.
//!
//! Sites are indexed `i + N (j + N k)`. Shell `k` around a center holds the
//! sites whose torus distance lies in `[(k − ½)h, (k + ½)h)`, so shells are
//! centered at the radii `r_k = k h` and partition balls exactly.

use crate::{Error, Result};

/// Periodic `N × N × N` lattice with spacing `h = L / N`.
#[derive(Clone, Debug)]
pub struct TorusLattice {
    n: usize,
    side: f64,
    h: f64,
    // shell_offsets[k]: integer offsets belonging to shell k
    shell_offsets: Vec<Vec<[i64; 3]>>,
    // neighbors[6 s + 2 axis + forward]
    neighbors: Vec<usize>,
}

/// Builds the lattice; `N ≥ 4` so every axis has enough distinct points for
/// the stencils.
pub fn build_lattice(n: usize, side: f64) -> Result<TorusLattice> {
    if n < 4 {
        return Err(Error::InvalidLattice(format!("N = {n} < 4")));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidLattice(format!(
            "L = {side} must be positive"
        )));
    }
    let kmax = n / 2;
    let half = (n / 2) as i64;
    let lo = -(((n - 1) / 2) as i64);
    let mut shell_offsets = vec![Vec::new(); kmax + 1];
    for dk in lo..=half {
        for dj in lo..=half {
            for di in lo..=half {
                let d2 = di * di + dj * dj + dk * dk;
                let k = shell_index(d2);
                if k <= kmax {
                    shell_offsets[k].push([di, dj, dk]);
                }
            }
        }
    }
    let m = n * n * n;
    let mut neighbors = vec![0; 6 * m];
    for s in 0..m {
        let c = [s % n, (s / n) % n, s / (n * n)];
        for axis in 0..3 {
            for (f, step) in [n - 1, 1].into_iter().enumerate() {
                let mut d = c;
                d[axis] = (d[axis] + step) % n;
                neighbors[6 * s + 2 * axis + f] = d[0] + n * (d[1] + n * d[2]);
            }
        }
    }
    Ok(TorusLattice {
        n,
        side,
        h: side / n as f64,
        shell_offsets,
        neighbors,
    })
}

/// The shell `k` with `(k − ½)² ≤ d2 < (k + ½)²`, i.e. `(2k − 1)² ≤ 4 d2 < (2k + 1)²`.
fn shell_index(d2: i64) -> usize {
    let mut k = ((d2 as f64).sqrt() + 0.5).floor() as i64;
    while (2 * k + 1) * (2 * k + 1) <= 4 * d2 {
        k += 1;
    }
    while k > 0 && (2 * k - 1) * (2 * k - 1) > 4 * d2 {
        k -= 1;
    }
    k as usize
}

impl TorusLattice {
    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn side_length(&self) -> f64 {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn num_sites(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn site(&self, i: usize, j: usize, k: usize) -> usize {
        (i % self.n) + self.n * ((j % self.n) + self.n * (k % self.n))
    }

    #[inline]
    pub fn coords(&self, s: usize) -> [usize; 3] {
        [s % self.n, (s / self.n) % self.n, s / (self.n * self.n)]
    }

    /// Continuum position of a site in `[0, L)³`.
    pub fn position(&self, s: usize) -> [f64; 3] {
        let c = self.coords(s);
        [
            c[0] as f64 * self.h,
            c[1] as f64 * self.h,
            c[2] as f64 * self.h,
        ]
    }

    /// Neighbor of `s` one step along `axis` in direction `+1` or `−1`.
    #[inline]
    pub fn shift(&self, s: usize, axis: usize, forward: bool) -> usize {
        self.neighbors[6 * s + 2 * axis + forward as usize]
    }

    /// Site at `s + offset` with periodic wrap.
    pub fn translate(&self, s: usize, offset: [i64; 3]) -> usize {
        let c = self.coords(s);
        let n = self.n as i64;
        let w = |a: usize, d: i64| (a as i64 + d).rem_euclid(n) as usize;
        self.site(w(c[0], offset[0]), w(c[1], offset[1]), w(c[2], offset[2]))
    }

    /// Minimal-image integer offset from `x` to `y`.
    pub fn offset(&self, x: usize, y: usize) -> [i64; 3] {
        let (cx, cy) = (self.coords(x), self.coords(y));
        let n = self.n as i64;
        let mut d = [0i64; 3];
        for a in 0..3 {
            let mut v = (cy[a] as i64 - cx[a] as i64).rem_euclid(n);
            if 2 * v > n {
                v -= n;
            }
            d[a] = v;
        }
        d
    }

    /// Minimal-image displacement vector from `x` to `y`.
    pub fn displacement(&self, x: usize, y: usize) -> [f64; 3] {
        let d = self.offset(x, y);
        [
            d[0] as f64 * self.h,
            d[1] as f64 * self.h,
            d[2] as f64 * self.h,
        ]
    }

    /// Largest shell radius, `⌊N/2⌋ h ≤ L/2`.
    pub fn r_max(&self) -> f64 {
        (self.n / 2) as f64 * self.h
    }

    pub fn num_shells(&self) -> usize {
        self.shell_offsets.len()
    }

    /// Shell radii `r_k = k h` for `k = 0..=⌊N/2⌋`.
    pub fn shell_radii(&self) -> Vec<f64> {
        (0..self.num_shells()).map(|k| k as f64 * self.h).collect()
    }

    /// Integer offsets making up shell `k`.
    pub fn shell_offsets(&self, k: usize) -> &[[i64; 3]] {
        &self.shell_offsets[k]
    }

    /// Shell decomposition around `center`.
    pub fn shells(&self, center: usize) -> ShellDecomposition {
        let members = self
            .shell_offsets
            .iter()
            .map(|offs| offs.iter().map(|&o| self.translate(center, o)).collect())
            .collect();
        ShellDecomposition {
            center,
            radii: self.shell_radii(),
            members,
        }
    }

    /// Index `k` with `r = r_k`, if `r` is a shell radius.
    pub fn shell_of_radius(&self, r: f64) -> Result<usize> {
        self.check_radius(r)?;
        let k = (r / self.h).round();
        if (r - k * self.h).abs() > 1e-9 * self.h || k as usize >= self.num_shells() {
            return Err(Error::NotShellRadius(r));
        }
        Ok(k as usize)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(0.0..=self.side / 2.0 + 1e-12 * self.side).contains(&r) {
            return Err(Error::RadiusOutOfRange {
                radius: r,
                r_max: self.side / 2.0,
            });
        }
        Ok(())
    }

    /// `Σ_{y ∈ shell k} f(y) h³` for every shell around `x`.
    pub fn shell_masses(&self, f: &[f64], x: usize) -> Vec<f64> {
        let dv = self.cell_volume();
        self.shell_offsets
            .iter()
            .map(|offs| offs.iter().map(|&o| f[self.translate(x, o)]).sum::<f64>() * dv)
            .collect()
    }
}

/// Sites around a center grouped by shell.
#[derive(Clone, Debug)]
pub struct ShellDecomposition {
    pub center: usize,
    pub radii: Vec<f64>,
    pub members: Vec<Vec<usize>>,
}

/// Euclidean torus distance with per-axis wraparound.
pub fn torus_distance(x: usize, y: usize, lat: &TorusLattice) -> f64 {
    let d = lat.offset(x, y);
    lat.spacing() * ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt()
}

/// Quadrature of `f` over the ball of radius `r` around `x`, built from whole
/// shells with `r_k ≤ r`.
pub fn ball_sum(f: &[f64], x: usize, r: f64, lat: &TorusLattice) -> Result<f64> {
    lat.check_radius(r)?;
    let masses = lat.shell_masses(f, x);
    let kmax = ((r / lat.spacing()) * (1.0 + 1e-12)).floor() as usize;
    Ok(masses.iter().take(kmax + 1).sum())
}

/// Shell mass per unit thickness at the shell radius `r`.
pub fn sphere_sum(f: &[f64], x: usize, r: f64, lat: &TorusLattice) -> Result<f64> {
    let k = lat.shell_of_radius(r)?;
    let dv = lat.cell_volume();
    let sum: f64 = lat
        .shell_offsets(k)
        .iter()
        .map(|&o| f[lat.translate(x, o)])
        .sum();
    Ok(sum * dv / lat.spacing())
}

/// Shell quadrature of `∂_ν f`, the radial component of the centered gradient.
pub fn radial_derivative_sum(f: &[f64], x: usize, r: f64, lat: &TorusLattice) -> Result<f64> {
    weighted_radial_derivative_sum(None, f, x, r, lat)
}

/// Shell quadrature of `w ∂_ν f`; `None` means `w ≡ 1`.
pub fn weighted_radial_derivative_sum(
    w: Option<&[f64]>,
    f: &[f64],
    x: usize,
    r: f64,
    lat: &TorusLattice,
) -> Result<f64> {
    let k = lat.shell_of_radius(r)?;
    let h = lat.spacing();
    let mut sum = 0.0;
    for &o in lat.shell_offsets(k) {
        let len = ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt();
        if len == 0.0 {
            continue;
        }
        let y = lat.translate(x, o);
        let mut dot = 0.0;
        for (a, &oa) in o.iter().enumerate() {
            let g = (f[lat.shift(y, a, true)] - f[lat.shift(y, a, false)]) / (2.0 * h);
            dot += g * oa as f64 / len;
        }
        sum += dot * w.map_or(1.0, |w| w[y]);
    }
    Ok(sum * h * h)
}
