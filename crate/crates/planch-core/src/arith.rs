//! Exact rational helpers shared by every module.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rationals.
pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `a`, `-a`, `a/b`. Whitespace around the parts is ignored.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        alloc::format!("{}", x.numer())
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `base^e` for an integer exponent of either sign.
pub fn pow_q(base: &Q, e: i64) -> Q {
    let mut acc = Q::one();
    let b = if e < 0 { base.recip() } else { base.clone() };
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    acc
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `(p, f)` with `q = p^f`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let mut f = 0u32;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        f += 1;
    }
    (r == 1).then_some((p, f))
}

pub fn isqrt_exact(n: u64) -> Option<u64> {
    let r = libm::sqrt(n as f64) as u64;
    for c in r.saturating_sub(1)..=r + 1 {
        if c * c == n {
            return Some(c);
        }
    }
    None
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// An element `a + b·sqrt(q)` of the quadratic field generated by `sqrt(q)`.
/// When `q` is a perfect square the radical is folded into `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrt {
    pub a: Q,
    pub b: Q,
    pub q: u64,
}

impl QSqrt {
    pub fn new(a: Q, b: Q, q: u64) -> Self {
        match isqrt_exact(q) {
            Some(r) => QSqrt { a: a + b * qi(r as i64), b: Q::zero(), q },
            None => QSqrt { a, b, q },
        }
    }

    pub fn rational(a: Q, q: u64) -> Self {
        QSqrt { a, b: Q::zero(), q }
    }

    pub fn one(q: u64) -> Self {
        QSqrt::rational(Q::one(), q)
    }

    /// `q^(k/2)`
    pub fn sqrt_q_pow(q: u64, k: i64) -> Self {
        let base = pow_q(&qi(q as i64), k.div_euclid(2));
        if k.rem_euclid(2) == 1 {
            QSqrt::new(Q::zero(), base, q)
        } else {
            QSqrt::rational(base, q)
        }
    }

    pub fn add(&self, o: &QSqrt) -> QSqrt {
        QSqrt { a: &self.a + &o.a, b: &self.b + &o.b, q: self.q }
    }

    pub fn neg(&self) -> QSqrt {
        QSqrt { a: -self.a.clone(), b: -self.b.clone(), q: self.q }
    }

    pub fn sub(&self, o: &QSqrt) -> QSqrt {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &QSqrt) -> QSqrt {
        debug_assert_eq!(self.q, o.q);
        let qq = qi(self.q as i64);
        QSqrt {
            a: &self.a * &o.a + &self.b * &o.b * qq,
            b: &self.a * &o.b + &self.b * &o.a,
            q: self.q,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn recip(&self) -> Option<QSqrt> {
        // (a + b r)^{-1} = (a - b r) / (a^2 - b^2 q)
        let n = &self.a * &self.a - &self.b * &self.b * qi(self.q as i64);
        if n.is_zero() {
            return None;
        }
        Some(QSqrt { a: &self.a / &n, b: -(&self.b / &n), q: self.q })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * libm::sqrt(self.q as f64)
    }

    pub fn abs(&self) -> QSqrt {
        if self.to_f64() < 0.0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.b.is_zero().then_some(&self.a)
    }
}

impl fmt::Display for QSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.a)),
            (true, false) => write!(f, "{}*sqrt({})", fmt_q(&self.b), self.q),
            (false, false) => write!(f, "{} + {}*sqrt({})", fmt_q(&self.a), fmt_q(&self.b), self.q),
        }
    }
}

/// Extended gcd column reduction: returns a unimodular integer matrix `u`
/// (columns) with `k · u = (g, 0, ..., 0)`.
pub fn unimodular_completion(k: &[i64]) -> (i64, Vec<Vec<i64>>) {
    let r = k.len();
    let mut row: Vec<i64> = k.to_vec();
    let mut u: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| (i == j) as i64).collect())
        .collect();
    // u[i][j]: entry (i, j); columns are the transformed basis vectors
    for j in 1..r {
        while row[j] != 0 {
            let qt = row[0].div_euclid(row[j]);
            row[0] -= qt * row[j];
            for i in 0..r {
                u[i][0] -= qt * u[i][j];
            }
            row.swap(0, j);
            for ui in u.iter_mut() {
                ui.swap(0, j);
            }
        }
    }
    if row[0] < 0 {
        row[0] = -row[0];
        for ui in u.iter_mut() {
            ui[0] = -ui[0];
        }
    }
    (row[0], u)
}

/// Sign of a rational as -1, 0, 1.
pub fn sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        assert_eq!(parse_q("3/6").unwrap(), qr(1, 2));
        assert_eq!(parse_q(" -4 ").unwrap(), qi(-4));
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
        assert_eq!(fmt_q(&qr(-2, 4)), "-1/2");
    }

    #[test]
    fn quadratic_field_arithmetic() {
        assert_eq!(QSqrt::sqrt_q_pow(4, -1), QSqrt::rational(qr(1, 2), 4));
        let b = QSqrt::sqrt_q_pow(3, 3);
        assert_eq!(b, QSqrt { a: qi(0), b: qi(3), q: 3 });
        assert_eq!(b.mul(&b.recip().unwrap()), QSqrt::one(3));
        let c = QSqrt::new(qi(1), qi(-1), 5);
        assert_eq!(c.mul(&c.recip().unwrap()), QSqrt::one(5));
        assert!(QSqrt::new(qi(2), qi(-1), 4).recip().is_none());
    }

    #[test]
    fn completion_kills_row() {
        for k in [vec![1i64, 1, 1], vec![2, 4], vec![3, 2, 2], vec![6, 10, 15]] {
            let (g, u) = unimodular_completion(&k);
            let expect_g = k.iter().fold(0i64, |a, &b| a.gcd(&b));
            assert_eq!(g, expect_g);
            for j in 0..k.len() {
                let s: i64 = (0..k.len()).map(|i| k[i] * u[i][j]).sum();
                assert_eq!(s, if j == 0 { g } else { 0 });
            }
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(2), Some((2, 1)));
    }
}
