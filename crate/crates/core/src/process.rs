//! The Hermitian matrix path built from independent scalar fBm coordinates.
//!
//! For 0-based indices and dimension d, entry (i,j) with i > j is
//! (x^{ij} + i xt^{ij}) / sqrt(2d), entry (i,i) is x^{ii} / sqrt(d), and the
//! upper triangle is the conjugate mirror, so every time slice is Hermitian
//! by construction.  The resulting entry covariance is
//! E[X_s(i,j) X_t(k,l)] = c_H(s,t)/d 1_{i=l} 1_{j=k}.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};

use crate::algebra::MatrixD;
use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, sample_fbm, DyadicGrid, HurstIndex, ScalarPath};

/// SplitMix64 finalizer; spreads structured tags into seed material.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the scalar coordinate (kind, i, j); kind 0 = x, kind 1 = x-tilde.
pub fn path_stream_seed(master: u64, kind: u8, i: usize, j: usize) -> u64 {
    let tag = ((kind as u64) << 40) | ((i as u64) << 20) | j as u64;
    master ^ mix64(tag)
}

/// Seed for an independent replication substream (Monte-Carlo path index).
pub fn substream_seed(master: u64, index: u64) -> u64 {
    master ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))
}

/// The d(d+1)/2 + d(d-1)/2 independent scalar fBm coordinates of one matrix path.
#[derive(Clone, Debug)]
pub struct ScalarPathBundle {
    dim: usize,
    h: HurstIndex,
    grid: DyadicGrid,
    master_seed: u64,
    /// x^{ij} for j <= i, at position i(i+1)/2 + j.
    x: Vec<ScalarPath>,
    /// x-tilde^{ij} for j < i, at position i(i-1)/2 + j.
    tilde: Vec<ScalarPath>,
}

impl ScalarPathBundle {
    /// Sample all coordinates; each gets its own deterministic substream, so
    /// the result is independent of sampling order and worker count.
    pub fn sample(dim: usize, h: HurstIndex, grid: DyadicGrid, master_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("matrix dimension must be positive"));
        }
        let mut specs: Vec<(u8, usize, usize)> = Vec::new();
        for i in 0..dim {
            for j in 0..=i {
                specs.push((0, i, j));
            }
        }
        for i in 0..dim {
            for j in 0..i {
                specs.push((1, i, j));
            }
        }
        let paths: Result<Vec<ScalarPath>> = specs
            .par_iter()
            .map(|&(kind, i, j)| {
                let mut rng = ChaCha8Rng::seed_from_u64(path_stream_seed(master_seed, kind, i, j));
                sample_fbm(h, grid, &mut rng)
            })
            .collect();
        let mut paths = paths?;
        let tilde = paths.split_off(dim * (dim + 1) / 2);
        Ok(ScalarPathBundle {
            dim,
            h,
            grid,
            master_seed,
            x: paths,
            tilde,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hurst(&self) -> HurstIndex {
        self.h
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Coordinate x^{ij}, j <= i.
    pub fn x_path(&self, i: usize, j: usize) -> &ScalarPath {
        assert!(j <= i && i < self.dim);
        &self.x[i * (i + 1) / 2 + j]
    }

    /// Coordinate x-tilde^{ij}, j < i.
    pub fn tilde_path(&self, i: usize, j: usize) -> &ScalarPath {
        assert!(j < i && i < self.dim);
        &self.tilde[i * (i - 1) / 2 + j]
    }
}

fn lower_pos(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// Hermitian matrix path on a dyadic grid.  Only the diagonal (real) and the
/// strict lower triangle are stored; full matrices are materialized on demand.
#[derive(Clone, Debug)]
pub struct HermitianPath {
    dim: usize,
    h: HurstIndex,
    grid: DyadicGrid,
    seed: u64,
    /// diag[t * dim + i] = X_t(i,i), real by construction.
    diag: Vec<f64>,
    /// lower[t * d(d-1)/2 + lower_pos(i,j)] = X_t(i,j) for j < i.
    lower: Vec<Complex64>,
}

impl HermitianPath {
    /// Combine the scalar coordinates into the matrix path.
    pub fn assemble(bundle: &ScalarPathBundle) -> Self {
        let d = bundle.dim;
        let grid = bundle.grid;
        let points = grid.num_points();
        let off_scale = 1.0 / (2.0 * d as f64).sqrt();
        let diag_scale = 1.0 / (d as f64).sqrt();
        let npairs = d * (d - 1) / 2;
        let mut diag = vec![0.0; points * d];
        let mut lower = vec![Complex64::new(0.0, 0.0); points * npairs];
        for t in 0..points {
            for i in 0..d {
                diag[t * d + i] = diag_scale * bundle.x_path(i, i).value(t);
            }
            for i in 0..d {
                for j in 0..i {
                    lower[t * npairs + lower_pos(i, j)] = Complex64::new(
                        off_scale * bundle.x_path(i, j).value(t),
                        off_scale * bundle.tilde_path(i, j).value(t),
                    );
                }
            }
        }
        HermitianPath {
            dim: d,
            h: bundle.h,
            grid,
            seed: bundle.master_seed,
            diag,
            lower,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hurst(&self) -> HurstIndex {
        self.h
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// X_t(i,j) at grid index t, 0-based entries.
    pub fn entry(&self, t: usize, i: usize, j: usize) -> Complex64 {
        let d = self.dim;
        debug_assert!(i < d && j < d);
        if i == j {
            Complex64::new(self.diag[t * d + i], 0.0)
        } else if i > j {
            self.lower[t * (d * (d - 1) / 2) + lower_pos(i, j)]
        } else {
            self.lower[t * (d * (d - 1) / 2) + lower_pos(j, i)].conj()
        }
    }

    /// Materialize the full matrix at grid index t.
    pub fn matrix(&self, t: usize) -> MatrixD {
        MatrixD::from_fn(self.dim, |i, j| self.entry(t, i, j))
    }

    /// X_b - X_a as a matrix.
    pub fn increment(&self, a: usize, b: usize) -> MatrixD {
        MatrixD::from_fn(self.dim, |i, j| {
            self.entry(b, i, j) - self.entry(a, i, j)
        })
    }

    /// Binary cache layout: magic, version, d, grid level, H, seed, then
    /// row-major complex64 matrices for every grid point, little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"HFBM")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&self.grid.level().to_le_bytes())?;
        w.write_all(&self.h.value().to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for t in 0..self.grid.num_points() {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let v = self.entry(t, i, j);
                    w.write_all(&v.re.to_le_bytes())?;
                    w.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"HFBM" {
            return Err(Error::Format("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        if u32::from_le_bytes(u32buf) != 1 {
            return Err(Error::Format("unsupported version".into()));
        }
        r.read_exact(&mut u32buf)?;
        let dim = u32::from_le_bytes(u32buf) as usize;
        if dim == 0 {
            return Err(Error::Format("dimension must be positive".into()));
        }
        r.read_exact(&mut u32buf)?;
        let level = u32::from_le_bytes(u32buf);
        let grid = DyadicGrid::new(level).map_err(|_| Error::Format("bad grid level".into()))?;
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let h = HurstIndex::new(f64::from_le_bytes(f64buf))
            .map_err(|_| Error::Format("Hurst index out of range".into()))?;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);

        let points = grid.num_points();
        let npairs = dim * (dim - 1) / 2;
        let mut diag = vec![0.0; points * dim];
        let mut lower = vec![Complex64::new(0.0, 0.0); points * npairs];
        for t in 0..points {
            let mut slice = vec![Complex64::new(0.0, 0.0); dim * dim];
            for v in slice.iter_mut() {
                r.read_exact(&mut f64buf)?;
                let re = f64::from_le_bytes(f64buf);
                r.read_exact(&mut f64buf)?;
                let im = f64::from_le_bytes(f64buf);
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Format("non-finite entry".into()));
                }
                *v = Complex64::new(re, im);
            }
            for i in 0..dim {
                for j in 0..dim {
                    let v = slice[i * dim + j];
                    if i == j {
                        if v.im != 0.0 {
                            return Err(Error::Format("diagonal entry not real".into()));
                        }
                        diag[t * dim + i] = v.re;
                    } else if i > j {
                        lower[t * npairs + lower_pos(i, j)] = v;
                    } else if slice[j * dim + i].conj() != v {
                        return Err(Error::Format("matrix slice not Hermitian".into()));
                    }
                }
            }
        }
        Ok(HermitianPath {
            dim,
            h,
            grid,
            seed,
            diag,
            lower,
        })
    }
}

/// Entry covariance E[X_s(i,j) X_t(k,l)] = c_H(s,t)/d 1_{i=l} 1_{j=k}
/// (0-based indices).
pub fn hfbm_covariance(
    h: HurstIndex,
    s: f64,
    t: f64,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    dim: usize,
) -> Result<f64> {
    if dim == 0 {
        return Err(Error::domain("matrix dimension must be positive"));
    }
    if i >= dim || j >= dim || k >= dim || l >= dim {
        return Err(Error::domain("entry index out of range"));
    }
    if i == l && j == k {
        Ok(fbm_covariance(h, s, t) / dim as f64)
    } else {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_closed_forms() {
        let h7 = HurstIndex::new(0.7).unwrap();
        // E[X_s(0,1) X_t(1,0)] = c_H(s,t)/d.
        let v = hfbm_covariance(h7, 0.5, 1.0, 0, 1, 1, 0, 4).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
        let v = hfbm_covariance(h7, 1.0, 1.0, 0, 1, 1, 0, 4).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        // Mismatched index pattern vanishes.
        let v = hfbm_covariance(h7, 0.5, 1.0, 0, 1, 0, 1, 4).unwrap();
        assert_eq!(v, 0.0);
        assert!(hfbm_covariance(h7, 0.5, 1.0, 0, 1, 4, 0, 4).is_err());
    }

    #[test]
    fn slices_are_exactly_hermitian() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = DyadicGrid::new(4).unwrap();
        let bundle = ScalarPathBundle::sample(3, h, grid, 123).unwrap();
        let path = HermitianPath::assemble(&bundle);
        for t in 0..grid.num_points() {
            let m = path.matrix(t);
            assert_eq!(m.sub(&m.adjoint()).norm(), 0.0, "slice {t} not Hermitian");
        }
        // Path starts at the zero matrix.
        assert_eq!(path.matrix(0).norm(), 0.0);
    }

    #[test]
    fn assembly_matches_coordinates() {
        let h = HurstIndex::new(0.5).unwrap();
        let grid = DyadicGrid::new(2).unwrap();
        let d = 3usize;
        let bundle = ScalarPathBundle::sample(d, h, grid, 7).unwrap();
        let path = HermitianPath::assemble(&bundle);
        let t = 2usize;
        let off = 1.0 / (2.0 * d as f64).sqrt();
        let dia = 1.0 / (d as f64).sqrt();
        let e21 = path.entry(t, 2, 1);
        assert!((e21.re - off * bundle.x_path(2, 1).value(t)).abs() < 1e-15);
        assert!((e21.im - off * bundle.tilde_path(2, 1).value(t)).abs() < 1e-15);
        assert_eq!(path.entry(t, 1, 2), e21.conj());
        let e11 = path.entry(t, 1, 1);
        assert!((e11.re - dia * bundle.x_path(1, 1).value(t)).abs() < 1e-15);
        assert_eq!(e11.im, 0.0);
    }

    #[test]
    fn sampling_is_reproducible_and_seed_sensitive() {
        let h = HurstIndex::new(0.7).unwrap();
        let grid = DyadicGrid::new(3).unwrap();
        let a = ScalarPathBundle::sample(2, h, grid, 99).unwrap();
        let b = ScalarPathBundle::sample(2, h, grid, 99).unwrap();
        let c = ScalarPathBundle::sample(2, h, grid, 100).unwrap();
        assert_eq!(
            HermitianPath::assemble(&a).matrix(3).entries(),
            HermitianPath::assemble(&b).matrix(3).entries()
        );
        assert_ne!(
            HermitianPath::assemble(&a).matrix(3).entries(),
            HermitianPath::assemble(&c).matrix(3).entries()
        );
    }

    #[test]
    fn coordinate_streams_are_distinct() {
        assert_ne!(path_stream_seed(5, 0, 1, 0), path_stream_seed(5, 1, 1, 0));
        assert_ne!(path_stream_seed(5, 0, 1, 0), path_stream_seed(5, 0, 0, 1));
        assert_ne!(substream_seed(5, 0), substream_seed(5, 1));
    }

    #[test]
    fn empirical_entry_moments() {
        // E[|X_1(1,0)|^2] = 1/d at t = 1 and E[X_s(0,1) X_t(1,0)] = c_H(s,t)/d.
        let h = HurstIndex::new(0.7).unwrap();
        let grid = DyadicGrid::new(1).unwrap();
        let d = 4usize;
        let n_samples = 20_000usize;
        let mut abs_acc = 0.0;
        let mut cross_acc = 0.0;
        for k in 0..n_samples {
            let bundle = ScalarPathBundle::sample(d, h, grid, substream_seed(777, k as u64)).unwrap();
            let path = HermitianPath::assemble(&bundle);
            let x10_t1 = path.entry(2, 1, 0);
            abs_acc += x10_t1.norm_sqr();
            let cross = path.entry(1, 0, 1) * path.entry(2, 1, 0);
            cross_acc += cross.re;
        }
        let abs_est = abs_acc / n_samples as f64;
        let se = (2.0f64 / d as f64 / d as f64 / n_samples as f64).sqrt() * 2.0;
        assert!(
            (abs_est - 0.25).abs() < 5.0 * se,
            "E|X_1(1,0)|^2 = {abs_est}, expected 0.25"
        );
        let cross_est = cross_acc / n_samples as f64;
        let expected = fbm_covariance(h, 0.5, 1.0) / d as f64;
        assert!(
            (cross_est - expected).abs() < 0.01,
            "cross covariance {cross_est} vs {expected}"
        );
    }

    #[test]
    fn cache_round_trip() {
        let h = HurstIndex::new(0.4).unwrap();
        let grid = DyadicGrid::new(3).unwrap();
        let bundle = ScalarPathBundle::sample(3, h, grid, 2024).unwrap();
        let path = HermitianPath::assemble(&bundle);
        let mut buf: Vec<u8> = Vec::new();
        path.write_to(&mut buf).unwrap();
        let back = HermitianPath::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.grid().level(), 3);
        assert_eq!(back.seed(), 2024);
        assert_eq!(back.hurst().value(), 0.4);
        for t in 0..grid.num_points() {
            assert_eq!(path.matrix(t).entries(), back.matrix(t).entries());
        }
    }

    #[test]
    fn cache_rejects_corruption() {
        let h = HurstIndex::new(0.5).unwrap();
        let grid = DyadicGrid::new(1).unwrap();
        let bundle = ScalarPathBundle::sample(2, h, grid, 1).unwrap();
        let path = HermitianPath::assemble(&bundle);
        let mut buf: Vec<u8> = Vec::new();
        path.write_to(&mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(HermitianPath::read_from(&mut bad_magic.as_slice()).is_err());

        // Corrupt one off-diagonal entry so the slice is no longer Hermitian.
        let header = 4 + 4 + 4 + 4 + 8 + 8;
        let entry01 = header + (2 * 2 * 16) + 16; // t=1 slice, entry (0,1)
        let mut bad_herm = buf.clone();
        bad_herm[entry01] ^= 0x40;
        assert!(HermitianPath::read_from(&mut bad_herm.as_slice()).is_err());

        let mut truncated = buf.clone();
        truncated.truncate(buf.len() - 8);
        assert!(HermitianPath::read_from(&mut truncated.as_slice()).is_err());
    }
}
