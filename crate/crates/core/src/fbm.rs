//! Scalar fractional Brownian motion on dyadic grids of [0,1].
//!
//! Exact Gaussian sampling via a Cholesky factor of the Gram matrix for
//! short grids and circulant embedding (Davies-Harte) for long ones, with a
//! fast independent-increment path at H = 1/2.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Largest grid level accepted anywhere; 2^20 + 1 points per path.
pub const MAX_GRID_LEVEL: u32 = 20;

/// Point count above which sampling switches from Cholesky to circulant embedding.
const CHOLESKY_MAX_POINTS: usize = 1 << 10;

/// Hurst index, restricted to (0,1) at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidHurst(h));
        }
        Ok(HurstIndex(h))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    /// Exact Brownian case; triggers the independent-increment sampler.
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }

    /// Rough-path machinery needs H > 1/3 (two-level expansions suffice).
    pub fn require_rough(self) -> Result<()> {
        if self.0 <= 1.0 / 3.0 {
            return Err(Error::domain(format!(
                "rough operations need H > 1/3, got {}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Dyadic grid {i/2^level : i = 0..2^level} on [0,1].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicGrid {
    level: u32,
}

impl DyadicGrid {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_GRID_LEVEL {
            return Err(Error::domain(format!(
                "grid level {level} exceeds maximum {MAX_GRID_LEVEL}"
            )));
        }
        Ok(DyadicGrid { level })
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn num_steps(self) -> usize {
        1usize << self.level
    }

    pub fn num_points(self) -> usize {
        self.num_steps() + 1
    }

    pub fn mesh(self) -> f64 {
        1.0 / self.num_steps() as f64
    }

    pub fn point(self, i: usize) -> f64 {
        debug_assert!(i <= self.num_steps());
        i as f64 * self.mesh()
    }

    /// Index multiplier mapping this grid's indices into a finer grid's.
    pub fn stride_to(self, finer: DyadicGrid) -> Result<usize> {
        if finer.level < self.level {
            return Err(Error::GridMismatch(format!(
                "level {} is not a refinement of level {}",
                finer.level, self.level
            )));
        }
        Ok(1usize << (finer.level - self.level))
    }
}

/// One scalar path sampled on a dyadic grid; values[0] = 0.
#[derive(Clone, Debug)]
pub struct ScalarPath {
    grid: DyadicGrid,
    values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(grid: DyadicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_points(),
                got: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::domain("scalar path must start at 0"));
        }
        Ok(ScalarPath { grid, values })
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increment(&self, a: usize, b: usize) -> f64 {
        self.values[b] - self.values[a]
    }
}

/// fBm covariance kernel c_H(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2 for s,t >= 0.
pub fn fbm_covariance(h: HurstIndex, s: f64, t: f64) -> f64 {
    debug_assert!(s >= 0.0 && t >= 0.0);
    let p = h.two_h();
    0.5 * (s.powf(p) + t.powf(p) - (t - s).abs().powf(p))
}

/// Covariance matrix of (X_{t_1},...,X_{t_M}) over the grid's nonzero points.
pub fn gram_matrix(h: HurstIndex, grid: DyadicGrid) -> Vec<Vec<f64>> {
    let m = grid.num_steps();
    let mut g = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let v = fbm_covariance(h, grid.point(i + 1), grid.point(j + 1));
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// Lower-triangular Cholesky factor; `None` when a pivot is not positive.
fn cholesky(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = matrix.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = matrix[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Cholesky with a single ridge retry, mirroring the sampler's regularization.
pub fn cholesky_with_ridge(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(l) = cholesky(matrix) {
        return Ok(l);
    }
    let max_diag = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(0.0f64, f64::max);
    let ridge = 1e-12 * max_diag.max(1.0);
    let mut bumped = matrix.to_vec();
    for (i, row) in bumped.iter_mut().enumerate() {
        row[i] += ridge;
    }
    cholesky(&bumped).ok_or_else(|| {
        Error::Factorization("Gram matrix is not positive definite even after ridge".into())
    })
}

fn draw_normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn sample_brownian<R: Rng + ?Sized>(grid: DyadicGrid, rng: &mut R) -> ScalarPath {
    let step_sd = grid.mesh().sqrt();
    let mut values = Vec::with_capacity(grid.num_points());
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid.num_steps() {
        let z: f64 = rng.sample(StandardNormal);
        acc += step_sd * z;
        values.push(acc);
    }
    ScalarPath { grid, values }
}

fn sample_cholesky<R: Rng + ?Sized>(
    h: HurstIndex,
    grid: DyadicGrid,
    rng: &mut R,
) -> Result<ScalarPath> {
    let m = grid.num_steps();
    let l = cholesky_with_ridge(&gram_matrix(h, grid))?;
    let z = draw_normals(rng, m);
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    for i in 0..m {
        let mut v = 0.0;
        for k in 0..=i {
            v += l[i][k] * z[k];
        }
        values.push(v);
    }
    Ok(ScalarPath { grid, values })
}

/// Unit-lag fractional Gaussian noise autocovariance.
fn fgn_autocov(h: HurstIndex, k: usize) -> f64 {
    let p = h.two_h();
    let k = k as f64;
    0.5 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

/// Davies-Harte circulant embedding: exact in distribution when the embedding
/// eigenvalues are nonnegative, which holds for fGn across H in (0,1).
fn sample_circulant<R: Rng + ?Sized>(
    h: HurstIndex,
    grid: DyadicGrid,
    rng: &mut R,
) -> Result<ScalarPath> {
    let n = grid.num_steps();
    let m = 2 * n;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);

    let mut buf: Vec<Complex64> = Vec::with_capacity(m);
    for k in 0..=n {
        buf.push(Complex64::new(fgn_autocov(h, k), 0.0));
    }
    for k in (1..n).rev() {
        buf.push(Complex64::new(fgn_autocov(h, k), 0.0));
    }
    fft.process(&mut buf);

    let lambda: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let max_l = lambda.iter().cloned().fold(0.0f64, f64::max);
    let mut lam = Vec::with_capacity(m);
    for &l in &lambda {
        if l < -1e-10 * max_l.max(1.0) {
            return Err(Error::Factorization(format!(
                "circulant embedding has negative eigenvalue {l}"
            )));
        }
        lam.push(l.max(0.0));
    }

    // Hermitian-symmetric Gaussian spectrum; draw order is fixed for determinism.
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    let z0: f64 = rng.sample(StandardNormal);
    w[0] = Complex64::new(lam[0].sqrt() * z0, 0.0);
    let zn: f64 = rng.sample(StandardNormal);
    w[n] = Complex64::new(lam[n].sqrt() * zn, 0.0);
    for k in 1..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let scale = (lam[k] / 2.0).sqrt();
        w[k] = Complex64::new(scale * a, scale * b);
        w[m - k] = w[k].conj();
    }
    fft.process(&mut w);

    let scale = grid.mesh().powf(h.value()) / (m as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for item in w.iter().take(n) {
        acc += scale * item.re;
        values.push(acc);
    }
    Ok(ScalarPath { grid, values })
}

/// Sample one fBm path on the grid. Dispatch: exact independent increments at
/// H = 1/2, Cholesky of the Gram matrix up to 2^10 points, circulant embedding
/// beyond. Deterministic given the RNG state.
pub fn sample_fbm<R: Rng + ?Sized>(
    h: HurstIndex,
    grid: DyadicGrid,
    rng: &mut R,
) -> Result<ScalarPath> {
    if h.is_brownian() {
        return Ok(sample_brownian(grid, rng));
    }
    if grid.num_steps() <= CHOLESKY_MAX_POINTS {
        sample_cholesky(h, grid, rng)
    } else {
        sample_circulant(h, grid, rng)
    }
}
