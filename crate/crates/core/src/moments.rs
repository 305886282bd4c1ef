//! Exact mixed moments of the matrix process through pairings and genus.
//!
//! For jointly Gaussian Hermitian matrices built from a scalar kernel c,
//! the normalized trace phi_d(M_{t_1} ... M_{t_r}) = (1/d) E[sum_i diag]
//! expands as sum over pair partitions pi of d^{-2 genus(pi)} prod_{(p,q) in pi}
//! c(t_p, t_q).  The d -> infinity limit keeps the non-crossing (genus 0)
//! pairings only.  Letters may be path values X_t or increments X_t - X_s;
//! the kernel extends bilinearly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, HurstIndex};
use crate::algebra::NCPolynomial;
use crate::pairing::{for_each_pairing, Pairing, MAX_PAIRING_LETTERS};

/// Compensated accumulator for long float sums.
#[derive(Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(self) -> f64 {
        self.sum
    }
}

/// One Gaussian letter of a trace word.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Letter {
    /// X_t
    Point(f64),
    /// X_t - X_s
    Increment(f64, f64),
}

/// A trace word together with the kernel parameters.
#[derive(Clone, Debug)]
pub struct MomentQuery {
    h: HurstIndex,
    letters: Vec<Letter>,
}

impl MomentQuery {
    pub fn new(h: HurstIndex, letters: Vec<Letter>) -> Result<Self> {
        for l in &letters {
            let ok = match *l {
                Letter::Point(t) => t >= 0.0 && t.is_finite(),
                Letter::Increment(s, t) => s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite(),
            };
            if !ok {
                return Err(Error::domain("letter times must be finite and nonnegative"));
            }
        }
        Ok(MomentQuery { h, letters })
    }

    /// Word of plain path values X_{t_1} ... X_{t_r}.
    pub fn word(h: HurstIndex, times: &[f64]) -> Result<Self> {
        MomentQuery::new(h, times.iter().map(|&t| Letter::Point(t)).collect())
    }

    pub fn hurst(&self) -> HurstIndex {
        self.h
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Scalar covariance of two letters, extending c_H bilinearly.
    pub fn kernel(&self, a: usize, b: usize) -> f64 {
        kernel_value(self.h, self.letters[a], self.letters[b])
    }
}

fn kernel_value(h: HurstIndex, a: Letter, b: Letter) -> f64 {
    match (a, b) {
        (Letter::Point(s), Letter::Point(t)) => fbm_covariance(h, s, t),
        (Letter::Point(s), Letter::Increment(u, v)) => {
            fbm_covariance(h, s, v) - fbm_covariance(h, s, u)
        }
        (Letter::Increment(u, v), Letter::Point(t)) => {
            fbm_covariance(h, v, t) - fbm_covariance(h, u, t)
        }
        (Letter::Increment(u, v), Letter::Increment(p, q)) => {
            fbm_covariance(h, v, q) - fbm_covariance(h, v, p) - fbm_covariance(h, u, q)
                + fbm_covariance(h, u, p)
        }
    }
}

fn kernel_matrix(q: &MomentQuery) -> Vec<Vec<f64>> {
    let r = q.len();
    let mut k = vec![vec![0.0; r]; r];
    for a in 0..r {
        for b in a..r {
            let v = q.kernel(a, b);
            k[a][b] = v;
            k[b][a] = v;
        }
    }
    k
}

/// Sum over all pairings of genus_weight[genus] * prod kernel, with the
/// convention that the empty word contributes 1.
fn pairing_weighted_sum(kernel: &[Vec<f64>], genus_weight: &[f64]) -> Result<f64> {
    let r = kernel.len();
    if r % 2 != 0 {
        return Ok(0.0);
    }
    if r == 0 {
        return Ok(genus_weight[0]);
    }
    if r > MAX_PAIRING_LETTERS {
        return Err(Error::guard(format!(
            "moment word length {r} exceeds pairing cap {MAX_PAIRING_LETTERS}"
        )));
    }
    let mut acc = Kahan::default();
    for_each_pairing(r, |p: &Pairing| {
        let mut prod = 1.0;
        for (a, b) in p.blocks() {
            prod *= kernel[a][b];
        }
        acc.add(genus_weight[p.genus() as usize] * prod);
    })?;
    Ok(acc.value())
}

fn genus_weights_finite(r: usize, d: usize) -> Vec<f64> {
    let gmax = r / 4;
    (0..=gmax)
        .map(|g| (d as f64).powi(-2 * g as i32))
        .collect()
}

fn genus_weights_indicator(r: usize, g: u32) -> Vec<f64> {
    let gmax = r / 4;
    (0..=gmax).map(|k| if k as u32 == g { 1.0 } else { 0.0 }).collect()
}

/// Exact phi_d of the word: sum over pairings of d^{-2 genus} prod kernel.
pub fn genus_expansion_moment(q: &MomentQuery, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("matrix dimension must be positive"));
    }
    let k = kernel_matrix(q);
    pairing_weighted_sum(&k, &genus_weights_finite(q.len().max(1), d))
}

/// Large-d limit: the non-crossing pairings only (semicircular family).
pub fn nc_moment(q: &MomentQuery) -> Result<f64> {
    let k = kernel_matrix(q);
    let r = q.len();
    pairing_weighted_sum(&k, &genus_weights_indicator(r.max(1), 0))
}

/// Genus-g slice of the expansion (the coefficient of d^{-2g}).
pub fn genus_g_functional(q: &MomentQuery, g: u32) -> Result<f64> {
    let k = kernel_matrix(q);
    let r = q.len();
    if r == 0 {
        return Ok(if g == 0 { 1.0 } else { 0.0 });
    }
    pairing_weighted_sum(&k, &genus_weights_indicator(r, g))
}

/// Matrix size for exact trace moments: a finite d or the d -> infinity limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentDim {
    Finite(usize),
    Infinite,
}

/// Guard: letters per trace factor times the power r.
const RIEMANN_LETTER_CAP: usize = 12;
/// Guard: dyadic level of the Riemann partition.
const RIEMANN_LEVEL_CAP: u32 = 6;

/// Exact phi_d (or phi_infinity) of the r-th power of the left-point Riemann
/// integrand  sum_i P(X_{t_i}) (X_{t_{i+1}} - X_{t_i}) Q(X_{t_i})  on the
/// level-n dyadic grid.  Expands both polynomials into monomials, sums over
/// time multi-indices, and evaluates each resulting Gaussian word through the
/// genus engine.
pub fn riemann_integrand_moment(
    p: &NCPolynomial,
    q: &NCPolynomial,
    r: usize,
    n: u32,
    h: HurstIndex,
    dim: MomentDim,
) -> Result<f64> {
    if r == 0 {
        return Ok(1.0);
    }
    if p.is_zero() || q.is_zero() {
        return Ok(0.0);
    }
    if let MomentDim::Finite(0) = dim {
        return Err(Error::domain("matrix dimension must be positive"));
    }
    let letters_per_factor = p.degree() + q.degree() + 1;
    if r * letters_per_factor > RIEMANN_LETTER_CAP {
        return Err(Error::guard(format!(
            "r * (deg P + deg Q + 1) = {} exceeds {RIEMANN_LETTER_CAP}",
            r * letters_per_factor
        )));
    }
    if n > RIEMANN_LEVEL_CAP {
        return Err(Error::guard(format!(
            "partition level {n} exceeds {RIEMANN_LEVEL_CAP}"
        )));
    }

    let cells = 1usize << n;
    let mesh = 1.0 / cells as f64;

    // Nonzero monomials of each polynomial.
    let monos = |poly: &NCPolynomial| -> Vec<(usize, f64)> {
        poly.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| (m, c))
            .collect()
    };
    let p_mono = monos(p);
    let q_mono = monos(q);

    // Monomial tuple choices across the r factors, enumerated once.
    let mut tuples: Vec<(f64, Vec<(usize, usize)>)> = vec![(1.0, Vec::new())];
    for _ in 0..r {
        let mut next = Vec::with_capacity(tuples.len() * p_mono.len() * q_mono.len());
        for (w, degs) in &tuples {
            for &(pm, pc) in &p_mono {
                for &(qm, qc) in &q_mono {
                    let mut d2 = degs.clone();
                    d2.push((pm, qm));
                    next.push((w * pc * qc, d2));
                }
            }
        }
        tuples = next;
    }

    let max_letters = r * letters_per_factor;
    let genus_weight: Vec<f64> = match dim {
        MomentDim::Finite(d) => genus_weights_finite(max_letters, d),
        MomentDim::Infinite => genus_weights_indicator(max_letters, 0),
    };

    // Static split over the first time index keeps the reduction order fixed
    // regardless of worker count.
    let partials: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Kahan::default();
            let mut idx = vec![0usize; r];
            idx[0] = i0;
            loop {
                for (w, degs) in &tuples {
                    let mut letters = Vec::with_capacity(max_letters);
                    for (k, &(pm, qm)) in degs.iter().enumerate() {
                        let t = idx[k] as f64 * mesh;
                        for _ in 0..pm {
                            letters.push(Letter::Point(t));
                        }
                        letters.push(Letter::Increment(t, t + mesh));
                        for _ in 0..qm {
                            letters.push(Letter::Point(t));
                        }
                    }
                    if letters.len() % 2 != 0 {
                        continue;
                    }
                    let query = MomentQuery { h, letters };
                    let km = kernel_matrix(&query);
                    let gw = &genus_weight[..query.len() / 4 + 1];
                    let m = pairing_weighted_sum(&km, gw).expect("guarded length");
                    acc.add(w * m);
                }
                // Odometer over the trailing r-1 indices.
                let mut k = 1;
                loop {
                    if k == r {
                        return acc.value();
                    }
                    idx[k] += 1;
                    if idx[k] < cells {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .collect();

    let mut total = Kahan::default();
    for v in partials {
        total.add(v);
    }
    Ok(total.value())
}
