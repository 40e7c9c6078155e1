//! Dense matrices and polynomials over the rationals.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::arith::{fmt_q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return None;
        }
        Some(QMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        QMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
            .expect("ragged matrix literal")
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, c: &Q) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square() && *self == -self.transpose()
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> QMat {
        let mut m = QMat::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &QMat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    /// Row echelon form by exact Gaussian elimination; returns the pivot columns.
    fn echelon(&mut self) -> (Vec<usize>, Q) {
        let mut pivots = Vec::new();
        let mut det = Q::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                det = Q::zero();
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
                det = -det;
            }
            let piv = self[(r, c)].clone();
            det *= &piv;
            for i in (r + 1)..self.rows {
                if self[(i, c)].is_zero() {
                    continue;
                }
                let f = &self[(i, c)] / &piv;
                for j in c..self.cols {
                    let v = &self[(r, j)] * &f;
                    self[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (pivots, det)
    }

    pub fn rank(&self) -> usize {
        self.clone().echelon().0.len()
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square(), "det of a non-square matrix");
        if self.rows == 0 {
            return Q::one();
        }
        let mut m = self.clone();
        let (piv, det) = m.echelon();
        if piv.len() < self.rows {
            Q::zero()
        } else {
            det
        }
    }

    pub fn inverse(&self) -> Option<QMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = QMat::zeros(n, 2 * n);
        a.set_block(0, 0, self);
        a.set_block(0, n, &QMat::identity(n));
        for c in 0..n {
            let p = (c..n).find(|&i| !a[(i, c)].is_zero())?;
            if p != c {
                for j in 0..2 * n {
                    a.data.swap(p * 2 * n + j, c * 2 * n + j);
                }
            }
            let piv = a[(c, c)].clone();
            for j in 0..2 * n {
                a[(c, j)] = &a[(c, j)] / &piv;
            }
            for i in 0..n {
                if i != c && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    for j in 0..2 * n {
                        let v = &a[(c, j)] * &f;
                        a[(i, j)] -= v;
                    }
                }
            }
        }
        Some(a.submatrix(0, n, n, 2 * n))
    }

    /// Basis of the right null space `{x : A x = 0}`, as columns.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let (pivots, _) = m.echelon();
        // back-substitute to reduced form
        for (r, &c) in pivots.iter().enumerate().rev() {
            let piv = m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = &m[(r, j)] / &piv;
            }
            for i in 0..r {
                if !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
        }
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); m.cols];
                v[f] = Q::one();
                for (r, &c) in pivots.iter().enumerate() {
                    v[c] = -m[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Characteristic polynomial `det(T·I − A)` by the Faddeev–LeVerrier recursion.
    pub fn char_poly(&self) -> Poly {
        assert!(self.is_square(), "char_poly of a non-square matrix");
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = QMat::zeros(n, n);
        let id = QMat::identity(n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            m = &(self * &m) + &id.scale(&coeffs[n - k + 1]);
            let am = self * &m;
            let tr = (0..n).fold(Q::zero(), |acc, i| acc + &am[(i, i)]);
            coeffs[n - k] = -tr / qi(k as i64);
        }
        Poly::new(coeffs)
    }

    pub fn pow(&self, e: u32) -> QMat {
        let mut acc = QMat::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl core::ops::Index<(usize, usize)> for QMat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &QMat {
    type Output = QMat;
    fn mul(self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        let mut m = QMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = a * &rhs[(k, j)];
                    m[(i, j)] += v;
                }
            }
        }
        m
    }
}

impl Add for &QMat {
    type Output = QMat;
    fn add(self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &QMat {
    type Output = QMat;
    fn sub(self, rhs: &QMat) -> QMat {
        self + &(-rhs.clone())
    }
}

impl Neg for QMat {
    type Output = QMat;
    fn neg(self) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.into_iter().map(|x| -x).collect() }
    }
}

impl fmt::Display for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", fmt_q(&self[(i, j)]))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| qi(x)).collect())
    }

    /// `T - a`
    pub fn linear(a: Q) -> Self {
        Poly::new(vec![-a, Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// `p(-T)`
    pub fn reflect(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::from_i64(&[1]);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division by `T - a`; `None` if there is a remainder.
    pub fn div_linear(&self, a: &Q) -> Option<Poly> {
        let n = self.coeffs.len();
        if n == 0 {
            return Some(self.clone());
        }
        let mut out = vec![Q::zero(); n - 1];
        let mut carry = Q::zero();
        for i in (0..n).rev() {
            let v = &self.coeffs[i] + &carry * a;
            if i == 0 {
                return v.is_zero().then(|| Poly::new(out));
            }
            out[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    /// Multiplicity of the root `a`.
    pub fn root_multiplicity(&self, a: &Q) -> usize {
        let mut p = self.clone();
        let mut k = 0;
        while p.degree().is_some_and(|d| d > 0) {
            match p.div_linear(a) {
                Some(r) => {
                    p = r;
                    k += 1;
                }
                None => break,
            }
        }
        k
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.coeffs.is_empty() {
            return String::from("0");
        }
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Q::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if a.is_one() && i > 0 { String::new() } else { fmt_q(&a) };
            s.push_str(&coef);
            match i {
                0 => {}
                1 => s.push_str(var),
                _ => s.push_str(&alloc::format!("{var}^{i}")),
            }
        }
        s
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::new(Vec::new());
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("T"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;

    #[test]
    fn det_and_inverse() {
        let a = QMat::from_i64(&[&[2, 1], &[7, 4]]);
        assert_eq!(a.det(), qi(1));
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, QMat::identity(2));
        assert!(QMat::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(QMat::from_i64(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn char_poly_small() {
        let a = QMat::from_i64(&[&[-1, 0], &[2, -1]]);
        assert_eq!(a.char_poly(), Poly::from_i64(&[1, 2, 1]));
        let b = QMat::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[6, -11, 6]]);
        // companion of T^3 - 6T^2 + 11T - 6
        assert_eq!(b.char_poly(), Poly::from_i64(&[-6, 11, -6, 1]));
    }

    #[test]
    fn kernel_is_annihilated() {
        let a = QMat::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for v in k {
            let col = QMat::from_rows(v.into_iter().map(|x| vec![x]).collect()).unwrap();
            assert!((&a * &col).is_zero());
        }
    }

    #[test]
    fn poly_ops() {
        let p = Poly::from_i64(&[1, 1]).pow(3);
        assert_eq!(p.root_multiplicity(&qi(-1)), 3);
        assert_eq!(p.div_linear(&qi(1)), None);
        assert_eq!(Poly::from_i64(&[-1, 1]).reflect(), Poly::from_i64(&[-1, -1]));
        assert_eq!(Poly::from_i64(&[1, 0, 1]).eval(&qr(1, 2)), qr(5, 4));
        assert_eq!(Poly::from_i64(&[1, 2, 1]).to_string(), "T^2 + 2T + 1");
    }
}
