//! Dense complex matrices and the small tensor calculus over them.
//!
//! Conventions, with A the d x d matrix algebra:
//!   (U1 (x) U2) # Y = Y # (U1 (x) U2) = U1 Y U2,
//!   Y # (U1 (x) U2 (x) U3) = (U1 Y U2) (x) U3,
//!   (U1 (x) U2 (x) U3) # Y = U1 (x) (U2 Y U3).
//! Second-order tensors exist in two shapes: a dense d^4 coefficient array
//! (what Levy areas produce) and a weighted list of simple tensors (what
//! polynomial integrands produce); conversions between them are explicit.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense d x d complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixD {
    dim: usize,
    entries: Vec<Complex64>,
}

impl MatrixD {
    pub fn zeros(dim: usize) -> Self {
        MatrixD {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = MatrixD::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Matrix unit E_{ij} (0-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = MatrixD::zeros(dim);
        m.set(i, j, Complex64::new(1.0, 0.0));
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = MatrixD::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        MatrixD::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let a = MatrixD::random(dim, rng);
        a.add(&a.adjoint()).scale_re(0.5)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    #[inline]
    pub fn add_entry(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] += v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, rhs: &MatrixD) -> MatrixD {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(rhs.entries.iter()) {
            *a += b;
        }
        out
    }

    pub fn add_assign(&mut self, rhs: &MatrixD) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries.iter_mut().zip(rhs.entries.iter()) {
            *a += b;
        }
    }

    /// self += w * rhs
    pub fn add_scaled(&mut self, rhs: &MatrixD, w: Complex64) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries.iter_mut().zip(rhs.entries.iter()) {
            *a += w * b;
        }
    }

    pub fn sub(&self, rhs: &MatrixD) -> MatrixD {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(rhs.entries.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, w: Complex64) -> MatrixD {
        let mut out = self.clone();
        for a in out.entries.iter_mut() {
            *a *= w;
        }
        out
    }

    pub fn scale_re(&self, w: f64) -> MatrixD {
        self.scale(Complex64::new(w, 0.0))
    }

    pub fn mul(&self, rhs: &MatrixD) -> MatrixD {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = MatrixD::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * rhs.at(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> MatrixD {
        let d = self.dim;
        MatrixD::from_fn(d, |i, j| self.at(j, i).conj())
    }

    pub fn pow(&self, k: usize) -> MatrixD {
        let mut out = MatrixD::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Normalized trace Tr_d(A) = (1/d) sum_i A(i,i).
    pub fn trace_normalized(&self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            s += self.at(i, i);
        }
        s / self.dim as f64
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).norm() <= tol
    }
}

/// Powers [I, X, X^2, ..., X^k].
pub fn matrix_powers(x: &MatrixD, k: usize) -> Vec<MatrixD> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(MatrixD::identity(x.dim()));
    for i in 1..=k {
        let next = out[i - 1].mul(x);
        out.push(next);
    }
    out
}

/// Dense second-order tensor over A (x) A, coefficients indexed ((i,j),(k,l)).
#[derive(Clone, Debug)]
pub struct Tensor2 {
    dim: usize,
    coeffs: Vec<Complex64>,
}

impl Tensor2 {
    pub fn zeros(dim: usize) -> Self {
        Tensor2 {
            dim,
            coeffs: vec![Complex64::new(0.0, 0.0); dim * dim * dim * dim],
        }
    }

    /// Dense form of U (x) V.
    pub fn simple(u: &MatrixD, v: &MatrixD) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                got: v.dim(),
            });
        }
        let d = u.dim();
        let mut t = Tensor2::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let a = u.at(i, j);
                for k in 0..d {
                    for l in 0..d {
                        let idx = t.idx(i, j, k, l);
                        t.coeffs[idx] = a * v.at(k, l);
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.coeffs[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn add_entry(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let idx = self.idx(i, j, k, l);
        self.coeffs[idx] += v;
    }

    pub fn add_assign(&mut self, rhs: &Tensor2) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }

    pub fn sub(&self, rhs: &Tensor2) -> Tensor2 {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, w: Complex64) -> Tensor2 {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a *= w;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// T # Y = sum_{b,c} T((i,b),(c,j)) Y(b,c) in entry (i,j).
    pub fn sharp(&self, y: &MatrixD) -> Result<MatrixD> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.dim(),
            });
        }
        let d = self.dim;
        let mut out = MatrixD::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for b in 0..d {
                    for c in 0..d {
                        s += self.at(i, b, c, j) * y.at(b, c);
                    }
                }
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    /// Antilinear dual, extending (U (x) V)* = V* (x) U*.
    pub fn dual(&self) -> Tensor2 {
        let d = self.dim;
        let mut out = Tensor2::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let idx = out.idx(i, j, k, l);
                        out.coeffs[idx] = self.at(l, k, j, i).conj();
                    }
                }
            }
        }
        out
    }

    /// Expansion over matrix units; mostly a test bridge to the list form.
    pub fn to_sum(&self) -> Tensor2Sum {
        let d = self.dim;
        let mut sum = Tensor2Sum::new(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let w = self.at(i, j, k, l);
                        if w != Complex64::new(0.0, 0.0) {
                            sum.push(w, MatrixD::unit(d, i, j), MatrixD::unit(d, k, l))
                                .expect("unit dims agree");
                        }
                    }
                }
            }
        }
        sum
    }
}

/// Weighted list of simple tensors sum_k w_k U_k (x) V_k.
#[derive(Clone, Debug)]
pub struct Tensor2Sum {
    dim: usize,
    terms: Vec<(Complex64, MatrixD, MatrixD)>,
}

impl Tensor2Sum {
    pub fn new(dim: usize) -> Self {
        Tensor2Sum {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn simple(u: MatrixD, v: MatrixD) -> Result<Self> {
        let mut s = Tensor2Sum::new(u.dim());
        s.push(Complex64::new(1.0, 0.0), u, v)?;
        Ok(s)
    }

    pub fn push(&mut self, w: Complex64, u: MatrixD, v: MatrixD) -> Result<()> {
        if u.dim() != self.dim || v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if u.dim() != self.dim { u.dim() } else { v.dim() },
            });
        }
        self.terms.push((w, u, v));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Complex64, MatrixD, MatrixD)] {
        &self.terms
    }

    pub fn extend(&mut self, rhs: &Tensor2Sum) {
        assert_eq!(self.dim, rhs.dim);
        self.terms.extend(rhs.terms.iter().cloned());
    }

    pub fn scale(&self, w: Complex64) -> Tensor2Sum {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.0 *= w;
        }
        out
    }

    /// (sum w U (x) V) # Y = sum w U Y V.
    pub fn sharp(&self, y: &MatrixD) -> Result<MatrixD> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.dim(),
            });
        }
        let mut out = MatrixD::zeros(self.dim);
        for (w, u, v) in &self.terms {
            out.add_scaled(&u.mul(y).mul(v), *w);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Tensor2 {
        let d = self.dim;
        let mut t = Tensor2::zeros(d);
        for (w, u, v) in &self.terms {
            for i in 0..d {
                for j in 0..d {
                    let a = *w * u.at(i, j);
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for k in 0..d {
                        for l in 0..d {
                            t.add_entry(i, j, k, l, a * v.at(k, l));
                        }
                    }
                }
            }
        }
        t
    }

    /// Termwise antilinear dual: (w U (x) V)* = conj(w) V* (x) U*.
    pub fn dual(&self) -> Tensor2Sum {
        let mut out = Tensor2Sum::new(self.dim);
        for (w, u, v) in &self.terms {
            out.terms.push((w.conj(), v.adjoint(), u.adjoint()));
        }
        out
    }

    /// (sum w U (x) V) (x) M as a third-order list.
    pub fn tensor_matrix(&self, m: &MatrixD) -> Result<Tensor3> {
        let mut out = Tensor3::new(self.dim);
        for (w, u, v) in &self.terms {
            out.push(*w, u.clone(), v.clone(), m.clone())?;
        }
        Ok(out)
    }

    /// M (x) (sum w U (x) V) as a third-order list.
    pub fn matrix_tensor(m: &MatrixD, s: &Tensor2Sum) -> Result<Tensor3> {
        let mut out = Tensor3::new(s.dim);
        for (w, u, v) in &s.terms {
            out.push(*w, m.clone(), u.clone(), v.clone())?;
        }
        Ok(out)
    }
}

/// Weighted list of simple third-order tensors sum_k w_k U1 (x) U2 (x) U3.
#[derive(Clone, Debug)]
pub struct Tensor3 {
    dim: usize,
    terms: Vec<(Complex64, MatrixD, MatrixD, MatrixD)>,
}

impl Tensor3 {
    pub fn new(dim: usize) -> Self {
        Tensor3 {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, w: Complex64, u1: MatrixD, u2: MatrixD, u3: MatrixD) -> Result<()> {
        for m in [&u1, &u2, &u3] {
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: m.dim(),
                });
            }
        }
        self.terms.push((w, u1, u2, u3));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Complex64, MatrixD, MatrixD, MatrixD)] {
        &self.terms
    }

    pub fn extend(&mut self, rhs: &Tensor3) {
        assert_eq!(self.dim, rhs.dim);
        self.terms.extend(rhs.terms.iter().cloned());
    }

    pub fn scale(&self, w: Complex64) -> Tensor3 {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.0 *= w;
        }
        out
    }

    /// Y # (U1 (x) U2 (x) U3) = (U1 Y U2) (x) U3.
    pub fn sharp_left(&self, y: &MatrixD) -> Result<Tensor2Sum> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.dim(),
            });
        }
        let mut out = Tensor2Sum::new(self.dim);
        for (w, u1, u2, u3) in &self.terms {
            out.push(*w, u1.mul(y).mul(u2), u3.clone())?;
        }
        Ok(out)
    }

    /// (U1 (x) U2 (x) U3) # Y = U1 (x) (U2 Y U3).
    pub fn sharp_right(&self, y: &MatrixD) -> Result<Tensor2Sum> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.dim(),
            });
        }
        let mut out = Tensor2Sum::new(self.dim);
        for (w, u1, u2, u3) in &self.terms {
            out.push(*w, u1.clone(), u2.mul(y).mul(u3))?;
        }
        Ok(out)
    }

    /// [Id x Tr_d x Id]: U1 (x) U2 (x) U3 -> Tr_d(U2) U1 U3.
    pub fn id_tr_id(&self) -> MatrixD {
        let mut out = MatrixD::zeros(self.dim);
        for (w, u1, u2, u3) in &self.terms {
            out.add_scaled(&u1.mul(u3), *w * u2.trace_normalized());
        }
        out
    }

    /// Coefficient on E_{i j} (x) E_{k l} (x) E_{m n}; test accessor.
    pub fn coefficient(&self, i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (w, u1, u2, u3) in &self.terms {
            s += *w * u1.at(i, j) * u2.at(k, l) * u3.at(m, n);
        }
        s
    }
}

/// Polynomial with real coefficients in one noncommuting variable,
/// coeffs[m] multiplying X^m.
#[derive(Clone, Debug, PartialEq)]
pub struct NCPolynomial {
    coeffs: Vec<f64>,
}

impl NCPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        NCPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        NCPolynomial { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        NCPolynomial::new(vec![c])
    }

    pub fn one() -> Self {
        NCPolynomial::constant(1.0)
    }

    pub fn x() -> Self {
        NCPolynomial::new(vec![0.0, 1.0])
    }

    /// X^m.
    pub fn monomial(m: usize) -> Self {
        let mut c = vec![0.0; m + 1];
        c[m] = 1.0;
        NCPolynomial { coeffs: c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_scalar(&self, x: f64) -> f64 {
        let mut v = 0.0;
        for &c in self.coeffs.iter().rev() {
            v = v * x + c;
        }
        v
    }

    pub fn eval(&self, x: &MatrixD) -> MatrixD {
        let d = x.dim();
        let mut v = MatrixD::zeros(d);
        for &c in self.coeffs.iter().rev() {
            v = v.mul(x);
            for i in 0..d {
                v.add_entry(i, i, Complex64::new(c, 0.0));
            }
        }
        v
    }

    /// Classical derivative, used by the d = 1 oracles.
    pub fn derivative(&self) -> NCPolynomial {
        if self.coeffs.len() <= 1 {
            return NCPolynomial::zero();
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, &a)| m as f64 * a)
            .collect();
        NCPolynomial::new(c)
    }

    /// Noncommutative derivative evaluated at X:
    /// dP(X) = sum_m a_m sum_{i=0}^{m-1} X^i (x) X^{m-1-i}.
    pub fn nc_derivative(&self, x: &MatrixD) -> Tensor2Sum {
        let mut out = Tensor2Sum::new(x.dim());
        if self.coeffs.len() <= 1 {
            return out;
        }
        let pows = matrix_powers(x, self.degree().saturating_sub(1));
        for (m, &a) in self.coeffs.iter().enumerate().skip(1) {
            if a == 0.0 {
                continue;
            }
            for i in 0..m {
                out.push(
                    Complex64::new(a, 0.0),
                    pows[i].clone(),
                    pows[m - 1 - i].clone(),
                )
                .expect("power dims agree");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &MatrixD, b: &MatrixD, tol: f64) -> bool {
        a.sub(b).norm() <= tol
    }

    #[test]
    fn sharp_on_matrix_units() {
        // (E01 (x) E10) # Y = Y(1,1) E00.
        let d = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = MatrixD::random(d, &mut rng);
        let t = Tensor2Sum::simple(MatrixD::unit(d, 0, 1), MatrixD::unit(d, 1, 0)).unwrap();
        let out = t.sharp(&y).unwrap();
        let expected = MatrixD::unit(d, 0, 0).scale(y.at(1, 1));
        assert!(close(&out, &expected, 1e-14));
    }

    #[test]
    fn dense_and_list_sharp_agree() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sum = Tensor2Sum::new(d);
        for _ in 0..4 {
            sum.push(
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
                MatrixD::random(d, &mut rng),
                MatrixD::random(d, &mut rng),
            )
            .unwrap();
        }
        let y = MatrixD::random(d, &mut rng);
        let a = sum.sharp(&y).unwrap();
        let b = sum.to_dense().sharp(&y).unwrap();
        assert!(close(&a, &b, 1e-10), "dense vs list sharp: {}", a.sub(&b).norm());
    }

    #[test]
    fn sharp_dimension_mismatch_errors() {
        let t = Tensor2Sum::simple(MatrixD::identity(2), MatrixD::identity(2)).unwrap();
        assert!(t.sharp(&MatrixD::identity(3)).is_err());
        assert!(Tensor2::simple(&MatrixD::identity(2), &MatrixD::identity(3)).is_err());
    }

    #[test]
    fn third_order_sharp_matches_triple_products() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (u1, u2, u3) = (
            MatrixD::random(d, &mut rng),
            MatrixD::random(d, &mut rng),
            MatrixD::random(d, &mut rng),
        );
        let y = MatrixD::random(d, &mut rng);
        let mut t = Tensor3::new(d);
        t.push(Complex64::new(1.0, 0.0), u1.clone(), u2.clone(), u3.clone())
            .unwrap();

        let left = t.sharp_left(&y).unwrap();
        assert_eq!(left.terms().len(), 1);
        assert!(close(&left.terms()[0].1, &u1.mul(&y).mul(&u2), 1e-12));
        assert!(close(&left.terms()[0].2, &u3, 1e-12));

        let right = t.sharp_right(&y).unwrap();
        assert!(close(&right.terms()[0].1, &u1, 1e-12));
        assert!(close(&right.terms()[0].2, &u2.mul(&y).mul(&u3), 1e-12));
    }

    #[test]
    fn id_tr_id_on_simple_tensor() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (u1, u2, u3) = (
            MatrixD::random(d, &mut rng),
            MatrixD::random(d, &mut rng),
            MatrixD::random(d, &mut rng),
        );
        let mut t = Tensor3::new(d);
        t.push(Complex64::new(2.0, 0.5), u1.clone(), u2.clone(), u3.clone())
            .unwrap();
        let out = t.id_tr_id();
        let expected = u1
            .mul(&u3)
            .scale(Complex64::new(2.0, 0.5) * u2.trace_normalized());
        assert!(close(&out, &expected, 1e-12));
    }

    #[test]
    fn trace_normalized_identity_is_one() {
        let id = MatrixD::identity(5);
        let t = id.trace_normalized();
        assert!((t - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dual_swaps_and_conjugates_simple_tensors() {
        let d = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (u, v) = (MatrixD::random(d, &mut rng), MatrixD::random(d, &mut rng));
        let dense = Tensor2::simple(&u, &v).unwrap();
        let dual = dense.dual();
        let expected = Tensor2::simple(&v.adjoint(), &u.adjoint()).unwrap();
        assert!(dual.sub(&expected).norm() < 1e-12);
    }

    #[test]
    fn dual_is_an_involution() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut t = Tensor2::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        t.add_entry(
                            i,
                            j,
                            k,
                            l,
                            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
                        );
                    }
                }
            }
        }
        assert!(t.dual().dual().sub(&t).norm() < 1e-12);
    }

    #[test]
    fn dense_round_trip_through_list_form() {
        let d = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = MatrixD::random(d, &mut rng);
        let v = MatrixD::random(d, &mut rng);
        let dense = Tensor2::simple(&u, &v).unwrap();
        let back = dense.to_sum().to_dense();
        assert!(back.sub(&dense).norm() < 1e-12);
    }

    #[test]
    fn nc_derivative_of_cube() {
        // d(X^3) = 1 (x) X^2 + X (x) X + X^2 (x) 1.
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = MatrixD::random_hermitian(d, &mut rng);
        let p = NCPolynomial::monomial(3);
        let dv = p.nc_derivative(&x);
        assert_eq!(dv.terms().len(), 3);
        let terms = dv.terms();
        assert!(close(&terms[0].1, &MatrixD::identity(d), 1e-12));
        assert!(close(&terms[0].2, &x.pow(2), 1e-12));
        assert!(close(&terms[1].1, &x, 1e-12));
        assert!(close(&terms[1].2, &x, 1e-12));
        assert!(close(&terms[2].1, &x.pow(2), 1e-12));
        assert!(close(&terms[2].2, &MatrixD::identity(d), 1e-12));
    }

    #[test]
    fn polynomial_eval_matches_power_expansion() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = MatrixD::random_hermitian(d, &mut rng);
        let p = NCPolynomial::new(vec![1.5, -2.0, 0.0, 3.0]);
        let direct = MatrixD::identity(d)
            .scale_re(1.5)
            .add(&x.scale_re(-2.0))
            .add(&x.pow(3).scale_re(3.0));
        assert!(close(&p.eval(&x), &direct, 1e-12));
        assert_eq!(p.degree(), 3);
        assert!((p.eval_scalar(2.0) - (1.5 - 4.0 + 24.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = NCPolynomial::zero();
        assert!(p.is_zero());
        assert_eq!(p.eval(&MatrixD::identity(2)).norm(), 0.0);
        assert!(p.nc_derivative(&MatrixD::identity(2)).terms().is_empty());
    }

    #[test]
    fn pow_and_adjoint_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = MatrixD::random(3, &mut rng);
        assert!(close(&x.pow(0), &MatrixD::identity(3), 1e-15));
        assert!(close(&x.pow(2), &x.mul(&x), 1e-12));
        let h = MatrixD::random_hermitian(3, &mut rng);
        assert!(h.is_hermitian(1e-12));
    }

    proptest! {
        #[test]
        fn sharp_is_linear_in_y(seed in 0u64..1000) {
            let d = 2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = Tensor2Sum::simple(
                MatrixD::random(d, &mut rng),
                MatrixD::random(d, &mut rng),
            ).unwrap();
            let y1 = MatrixD::random(d, &mut rng);
            let y2 = MatrixD::random(d, &mut rng);
            let lhs = t.sharp(&y1.add(&y2)).unwrap();
            let rhs = t.sharp(&y1).unwrap().add(&t.sharp(&y2).unwrap());
            prop_assert!(lhs.sub(&rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn dense_dual_matches_list_dual(seed in 0u64..1000) {
            let d = 2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = Tensor2Sum::new(d);
            sum.push(
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
                MatrixD::random(d, &mut rng),
                MatrixD::random(d, &mut rng),
            ).unwrap();
            let a = sum.dual().to_dense();
            let b = sum.to_dense().dual();
            prop_assert!(a.sub(&b).norm() <= 1e-10);
        }
    }
}
