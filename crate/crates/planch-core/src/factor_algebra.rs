//! Closed arithmetic for the functions of `s` in which every local factor of an
//! unramified Weil–Deligne representation lives:
//!
//! `c · q^{-a s} · ∏ (1 − e^{2πiθ} q^{-(σ s + r)})^{±1}`
//!
//! with `θ` a rational angle in turns, `r` a rational shift and `σ = ±1`.
//! Zeros and poles at `s = 0` are decided exactly from the angle and shift.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::arith::{fmt_q, frac, is_integer, parse_q, qi, qr, to_f64, QSqrt, Q};

/// A rational angle modulo 1, measured in turns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TurnAngle(Q);

impl TurnAngle {
    pub fn new(x: Q) -> Self {
        TurnAngle(frac(&x))
    }

    pub fn zero() -> Self {
        TurnAngle(Q::zero())
    }

    pub fn half() -> Self {
        TurnAngle(qr(1, 2))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        TurnAngle::new(qr(n, d))
    }

    pub fn parse(s: &str) -> Option<Self> {
        parse_q(s).map(TurnAngle::new)
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `2θ ≡ 0`
    pub fn is_real(&self) -> bool {
        (&self.0 * qi(2)).is_integer()
    }

    pub fn times(&self, k: i64) -> TurnAngle {
        TurnAngle::new(&self.0 * qi(k))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }

    /// `e^{2πiθ}`
    pub fn cis(&self) -> Complex64 {
        cis(self.to_f64())
    }
}

impl Add for &TurnAngle {
    type Output = TurnAngle;
    fn add(self, o: &TurnAngle) -> TurnAngle {
        TurnAngle::new(&self.0 + &o.0)
    }
}

impl Sub for &TurnAngle {
    type Output = TurnAngle;
    fn sub(self, o: &TurnAngle) -> TurnAngle {
        TurnAngle::new(&self.0 - &o.0)
    }
}

impl Neg for &TurnAngle {
    type Output = TurnAngle;
    fn neg(self) -> TurnAngle {
        TurnAngle::new(-self.0.clone())
    }
}

impl fmt::Display for TurnAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(&self.0))
    }
}

pub fn cis(turns: f64) -> Complex64 {
    let (s, c) = libm::sincos(2.0 * PI * turns);
    Complex64::new(c, s)
}

/// `(1 − e^{2πi·angle} q^{-(s_sign·s + shift)})`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeometricFactor {
    pub angle: TurnAngle,
    pub shift: Q,
    pub s_sign: i8,
}

impl GeometricFactor {
    pub fn new(angle: TurnAngle, shift: Q) -> Self {
        GeometricFactor { angle, shift, s_sign: 1 }
    }

    pub fn reflected(angle: TurnAngle, shift: Q) -> Self {
        GeometricFactor { angle, shift, s_sign: -1 }
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.angle.is_zero() && self.shift.is_zero()
    }

    pub fn eval(&self, q: u64, s: Complex64) -> Complex64 {
        let z = Complex64::new(self.s_sign as f64, 0.0) * s + to_f64(&self.shift);
        let lq = libm::log(q as f64);
        Complex64::new(1.0, 0.0) - self.angle.cis() * (-z * lq).exp()
    }

    fn sort_key(&self) -> (&Q, &TurnAngle, i8) {
        (&self.shift, &self.angle, self.s_sign)
    }
}

impl PartialOrd for GeometricFactor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GeometricFactor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// An exact scalar `e^{2πi·phase} · modulus`, with `modulus ∈ ℚ(√q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactScalar {
    pub phase: TurnAngle,
    pub modulus: QSqrt,
}

impl ExactScalar {
    pub fn one(q: u64) -> Self {
        ExactScalar { phase: TurnAngle::zero(), modulus: QSqrt::one(q) }
    }

    pub fn mul(&self, o: &ExactScalar) -> ExactScalar {
        ExactScalar { phase: &self.phase + &o.phase, modulus: self.modulus.mul(&o.modulus) }
    }

    pub fn recip(&self) -> Option<ExactScalar> {
        Some(ExactScalar { phase: -&self.phase, modulus: self.modulus.recip()? })
    }

    pub fn to_complex(&self) -> Complex64 {
        self.phase.cis() * self.modulus.to_f64()
    }

    /// The value as an element of `ℚ(√q)`, when the phase is `±1`.
    pub fn real_value(&self) -> Option<QSqrt> {
        if self.phase.is_zero() {
            Some(self.modulus.clone())
        } else if self.phase == TurnAngle::half() {
            Some(self.modulus.neg())
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(ExactScalar),
    Approx(Complex64),
}

impl Scalar {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(e) => e.to_complex(),
            Scalar::Approx(z) => *z,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            _ => Scalar::Approx(self.to_complex() * o.to_complex()),
        }
    }

    fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => match a.recip() {
                Some(r) => Scalar::Exact(r),
                None => Scalar::Approx(Complex64::new(f64::INFINITY, 0.0)),
            },
            Scalar::Approx(z) => Scalar::Approx(z.inv()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorError {
    /// The function has a pole at the requested point.
    Pole,
    /// Regularization was requested for a function with a pole of this order at 0.
    RegularizingPole { order: i64 },
    /// `limit_with_power` was called with a power different from the pole order.
    OrderMismatch { expected: i64, found: i64 },
    /// Factors built for different residue fields were combined.
    FieldMismatch { left: u64, right: u64 },
}

impl fmt::Display for FactorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorError::Pole => write!(f, "pole at the evaluation point"),
            FactorError::RegularizingPole { order } => {
                write!(f, "regularization undefined for poles (pole of order {order} at s = 0)")
            }
            FactorError::OrderMismatch { expected, found } => {
                write!(f, "pole order mismatch: asked for {expected}, function has {found}")
            }
            FactorError::FieldMismatch { left, right } => {
                write!(f, "residue field mismatch: q = {left} vs q = {right}")
            }
        }
    }
}

/// `scalar · q^{-exponent·s} · ∏ num / ∏ den`
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    pub q: u64,
    pub scalar: Scalar,
    pub exponent: Q,
    pub num: Vec<GeometricFactor>,
    pub den: Vec<GeometricFactor>,
}

impl SpectralFunction {
    pub fn one(q: u64) -> Self {
        SpectralFunction {
            q,
            scalar: Scalar::Exact(ExactScalar::one(q)),
            exponent: Q::zero(),
            num: Vec::new(),
            den: Vec::new(),
        }
    }

    /// `ζ_F(s) = (1 − q^{-s})^{-1}`
    pub fn zeta(q: u64) -> Self {
        let mut z = SpectralFunction::one(q);
        z.den.push(GeometricFactor::new(TurnAngle::zero(), Q::zero()));
        z
    }

    pub fn factor(q: u64, g: GeometricFactor) -> Self {
        let mut f = SpectralFunction::one(q);
        f.num.push(g);
        f
    }

    pub fn monomial(q: u64, scalar: ExactScalar, exponent: Q) -> Self {
        SpectralFunction { q, scalar: Scalar::Exact(scalar), exponent, num: Vec::new(), den: Vec::new() }
    }

    pub fn try_multiply(&self, g: &SpectralFunction) -> Result<SpectralFunction, FactorError> {
        if self.q != g.q {
            return Err(FactorError::FieldMismatch { left: self.q, right: g.q });
        }
        let mut num = self.num.clone();
        num.extend(g.num.iter().cloned());
        let mut den = self.den.clone();
        den.extend(g.den.iter().cloned());
        Ok(SpectralFunction {
            q: self.q,
            scalar: self.scalar.mul(&g.scalar),
            exponent: &self.exponent + &g.exponent,
            num,
            den,
        })
    }

    /// Pointwise product. Matching factors are not cancelled; see [`normalize`](Self::normalize).
    pub fn multiply(&self, g: &SpectralFunction) -> SpectralFunction {
        self.try_multiply(g).expect("residue field mismatch")
    }

    pub fn inverse(&self) -> SpectralFunction {
        SpectralFunction {
            q: self.q,
            scalar: self.scalar.recip(),
            exponent: -self.exponent.clone(),
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    /// Cancels equal numerator/denominator factors and sorts both lists by (shift, angle).
    pub fn normalize(&self) -> SpectralFunction {
        let mut num = self.num.clone();
        let mut den = Vec::new();
        for d in &self.den {
            match num.iter().position(|n| n == d) {
                Some(i) => {
                    num.swap_remove(i);
                }
                None => den.push(d.clone()),
            }
        }
        num.sort();
        den.sort();
        SpectralFunction { q: self.q, scalar: self.scalar.clone(), exponent: self.exponent.clone(), num, den }
    }

    pub fn is_one(&self) -> bool {
        let n = self.normalize();
        n.num.is_empty()
            && n.den.is_empty()
            && n.exponent.is_zero()
            && matches!(&n.scalar, Scalar::Exact(e) if e.phase.is_zero() && e.modulus == QSqrt::one(self.q))
    }

    pub fn ord_zero_at_zero(&self) -> i64 {
        let z = |v: &[GeometricFactor]| v.iter().filter(|g| g.vanishes_at_zero()).count() as i64;
        z(&self.num) - z(&self.den)
    }

    /// Product of the `σ`-signs of vanishing factors (numerator over denominator);
    /// the leading coefficient of `∏ vanishing` in powers of `s·log q`.
    fn vanishing_sign(&self) -> f64 {
        let mut sg = 1.0;
        for g in self.num.iter().chain(self.den.iter()) {
            if g.vanishes_at_zero() && g.s_sign < 0 {
                sg = -sg;
            }
        }
        sg
    }

    /// Value of all non-vanishing parts at `s = 0`.
    fn regular_part_at_zero(&self) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let mut v = self.scalar.to_complex() * self.vanishing_sign();
        for g in self.num.iter().filter(|g| !g.vanishes_at_zero()) {
            v *= g.eval(self.q, zero);
        }
        for g in self.den.iter().filter(|g| !g.vanishes_at_zero()) {
            v /= g.eval(self.q, zero);
        }
        v
    }

    /// `lim_{s→0} ζ_F(s)^n f(s)` where `n = ord_zero_at_zero(f) ≥ 0`.
    pub fn regularized_value(&self) -> Result<Complex64, FactorError> {
        let n = self.ord_zero_at_zero();
        if n < 0 {
            return Err(FactorError::RegularizingPole { order: -n });
        }
        Ok(self.regular_part_at_zero())
    }

    /// Exact regularized value, available when every angle is `0` or `1/2`,
    /// every shift lies in `½ℤ` and the scalar is exact with phase `±1`.
    pub fn regularized_value_exact(&self) -> Result<Option<QSqrt>, FactorError> {
        let n = self.ord_zero_at_zero();
        if n < 0 {
            return Err(FactorError::RegularizingPole { order: -n });
        }
        let Scalar::Exact(sc) = &self.scalar else { return Ok(None) };
        let Some(mut v) = sc.real_value() else { return Ok(None) };
        if self.vanishing_sign() < 0.0 {
            v = v.neg();
        }
        let mut dens = QSqrt::one(self.q);
        for (g, is_num) in self.num.iter().map(|g| (g, true)).chain(self.den.iter().map(|g| (g, false))) {
            if g.vanishes_at_zero() {
                continue;
            }
            let Some(x) = exact_factor_at_zero(self.q, g) else { return Ok(None) };
            if is_num {
                v = v.mul(&x);
            } else {
                dens = dens.mul(&x);
            }
        }
        Ok(dens.recip().map(|d| v.mul(&d)))
    }

    pub fn evaluate(&self, s: Complex64) -> Result<Complex64, FactorError> {
        let lq = libm::log(self.q as f64);
        let mut v = self.scalar.to_complex() * (-s * lq * to_f64(&self.exponent)).exp();
        for g in &self.num {
            v *= g.eval(self.q, s);
        }
        for g in &self.den {
            let d = g.eval(self.q, s);
            if d.norm() < 1e-13 {
                return Err(FactorError::Pole);
            }
            v /= d;
        }
        Ok(v)
    }

    /// The function `s ↦ f(1 − s)`.
    pub fn reflect_s(&self) -> SpectralFunction {
        let flip = |g: &GeometricFactor| GeometricFactor {
            angle: g.angle.clone(),
            shift: &g.shift + qi(g.s_sign as i64),
            s_sign: -g.s_sign,
        };
        // q^{-a(1-s)} = q^{-a} · q^{as}
        let scalar = match (&self.scalar, exact_q_power(self.q, &-self.exponent.clone())) {
            (Scalar::Exact(e), Some(m)) => {
                Scalar::Exact(e.mul(&ExactScalar { phase: TurnAngle::zero(), modulus: m }))
            }
            (sc, _) => Scalar::Approx(
                sc.to_complex() * libm::pow(self.q as f64, -to_f64(&self.exponent)),
            ),
        };
        SpectralFunction {
            q: self.q,
            scalar,
            exponent: -self.exponent.clone(),
            num: self.num.iter().map(flip).collect(),
            den: self.den.iter().map(flip).collect(),
        }
    }

    /// `lim_{s→0} s^k f(s)` for `f` with a pole of order exactly `k` at 0.
    pub fn limit_with_power(&self, k: i64) -> Result<Complex64, FactorError> {
        let ord = self.ord_zero_at_zero();
        if ord != -k {
            return Err(FactorError::OrderMismatch { expected: k, found: -ord });
        }
        let lq = libm::log(self.q as f64);
        Ok(self.regular_part_at_zero() * libm::pow(lq, -(k as f64)))
    }
}

/// `(1 − e^{2πiθ} q^{-r})` as an element of `ℚ(√q)`, when `θ ∈ {0, 1/2}` and `2r ∈ ℤ`.
fn exact_factor_at_zero(q: u64, g: &GeometricFactor) -> Option<QSqrt> {
    if !g.angle.is_real() {
        return None;
    }
    let two_r = &g.shift * qi(2);
    if !is_integer(&two_r) {
        return None;
    }
    let k: i64 = num_traits::ToPrimitive::to_i64(two_r.numer())?;
    let mut t = QSqrt::sqrt_q_pow(q, -k);
    if !g.angle.is_zero() {
        t = t.neg();
    }
    Some(QSqrt::one(q).sub(&t))
}

/// `q^e` as an element of `ℚ(√q)` when `2e ∈ ℤ`.
fn exact_q_power(q: u64, e: &Q) -> Option<QSqrt> {
    let two = e * qi(2);
    if !is_integer(&two) {
        return None;
    }
    Some(QSqrt::sqrt_q_pow(q, num_traits::ToPrimitive::to_i64(two.numer())?))
}

impl fmt::Display for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scalar {
            Scalar::Exact(e) => {
                if e.phase.is_zero() {
                    write!(f, "({})", e.modulus)?;
                } else {
                    write!(f, "e^(2πi·{})·({})", e.phase, e.modulus)?;
                }
            }
            Scalar::Approx(z) => write!(f, "({}{:+}i)", z.re, z.im)?,
        }
        if !self.exponent.is_zero() {
            write!(f, "·q^(-{}s)", fmt_q(&self.exponent))?;
        }
        let show = |f: &mut fmt::Formatter<'_>, g: &GeometricFactor| -> fmt::Result {
            let s = if g.s_sign < 0 { "-s" } else { "s" };
            let ph = if g.angle.is_zero() { alloc::string::String::new() } else { alloc::format!("e^(2πi·{})·", g.angle) };
            if g.shift.is_zero() {
                write!(f, "(1 - {ph}q^(-{s}))")
            } else {
                write!(f, "(1 - {ph}q^(-({s}+{})))", fmt_q(&g.shift))
            }
        };
        for g in &self.num {
            write!(f, "·")?;
            show(f, g)?;
        }
        if !self.den.is_empty() {
            write!(f, " / [")?;
            for (i, g) in self.den.iter().enumerate() {
                if i > 0 {
                    write!(f, "·")?;
                }
                show(f, g)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl Default for TurnAngle {
    fn default() -> Self {
        TurnAngle::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zeta_basics() {
        let z = SpectralFunction::zeta(3);
        assert_eq!(z.ord_zero_at_zero(), -1);
        assert!((z.evaluate(c(1.0)).unwrap() - c(1.5)).norm() < 1e-15);
        assert_eq!(z.evaluate(c(0.0)), Err(FactorError::Pole));
        let l = z.limit_with_power(1).unwrap();
        assert!((l.re - 1.0 / libm::log(3.0)).abs() < 1e-15);
        let l2 = z.multiply(&z).limit_with_power(2).unwrap();
        assert!((l2.re - libm::pow(libm::log(3.0), -2.0)).abs() < 1e-15);
        assert!(matches!(z.limit_with_power(2), Err(FactorError::OrderMismatch { .. })));
        assert!(matches!(z.regularized_value(), Err(FactorError::RegularizingPole { order: 1 })));
    }

    #[test]
    fn zeta_times_factor_is_one() {
        let z = SpectralFunction::zeta(5);
        let f = SpectralFunction::factor(5, GeometricFactor::new(TurnAngle::zero(), Q::zero()));
        assert!(z.multiply(&f).is_one());
        assert!(f.multiply(&f.inverse()).is_one());
        assert!((f.regularized_value().unwrap() - c(1.0)).norm() < 1e-15);
        let g = SpectralFunction::factor(5, GeometricFactor::new(TurnAngle::from_ratio(1, 3), Q::zero()));
        assert_eq!(g.ord_zero_at_zero(), 0);
    }

    #[test]
    fn reflected_vanishing_factor_contributes_minus_one() {
        let f = SpectralFunction::factor(3, GeometricFactor::reflected(TurnAngle::zero(), Q::zero()));
        assert_eq!(f.ord_zero_at_zero(), 1);
        assert!((f.regularized_value().unwrap() - c(-1.0)).norm() < 1e-15);
        // numerical check: (1 - 3^{s}) / (1 - 3^{-s}) -> -1
        let s = 1e-7;
        let num = f.evaluate(c(s)).unwrap() / (1.0 - libm::pow(3.0, -s));
        assert!((num - c(-1.0)).norm() < 1e-6);
    }

    #[test]
    fn exact_regularization() {
        // (1 - q^{-s}) / (1 - q^{-(1-s)}) at q = 3: regularized value 1/(1 - 1/3) = 3/2
        let mut f = SpectralFunction::factor(3, GeometricFactor::new(TurnAngle::zero(), Q::zero()));
        f.den.push(GeometricFactor::reflected(TurnAngle::zero(), qi(1)));
        assert_eq!(f.regularized_value_exact().unwrap(), Some(QSqrt::rational(qr(3, 2), 3)));
        let g = SpectralFunction::factor(3, GeometricFactor::new(TurnAngle::from_ratio(1, 3), Q::zero()));
        assert_eq!(g.regularized_value_exact().unwrap(), None);
    }

    fn arb_factor() -> impl Strategy<Value = GeometricFactor> {
        (0i64..6, 1i64..6, 0i64..4, any::<bool>()).prop_map(|(n, d, r, refl)| GeometricFactor {
            angle: TurnAngle::from_ratio(n, d),
            shift: qr(r, 2),
            s_sign: if refl { -1 } else { 1 },
        })
    }

    prop_compose! {
        fn arb_sf()(num in proptest::collection::vec(arb_factor(), 0..4),
                    den in proptest::collection::vec(arb_factor(), 0..4),
                    ph in 0i64..8, a in -3i64..4) -> SpectralFunction {
            SpectralFunction {
                q: 3,
                scalar: Scalar::Exact(ExactScalar { phase: TurnAngle::from_ratio(ph, 8), modulus: QSqrt::sqrt_q_pow(3, a) }),
                exponent: qr(a, 2),
                num,
                den,
            }
        }
    }

    proptest! {
        #[test]
        fn reflection_is_involutive(f in arb_sf(), t in 0.05f64..0.95) {
            let g = f.reflect_s();
            let s = Complex64::new(t, 0.3);
            let one = Complex64::new(1.0, 0.0);
            if let (Ok(a), Ok(b)) = (f.evaluate(one - s), g.evaluate(s)) {
                prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
            }
            prop_assert_eq!(g.reflect_s(), f);
        }

        #[test]
        fn order_is_additive(f in arb_sf(), g in arb_sf()) {
            prop_assert_eq!(f.multiply(&g).ord_zero_at_zero(), f.ord_zero_at_zero() + g.ord_zero_at_zero());
        }

        #[test]
        fn regularization_is_multiplicative(f in arb_sf(), g in arb_sf()) {
            if f.ord_zero_at_zero() >= 0 && g.ord_zero_at_zero() >= 0 {
                let a = f.multiply(&g).regularized_value().unwrap();
                let b = f.regularized_value().unwrap() * g.regularized_value().unwrap();
                prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));
            }
        }

        #[test]
        fn limit_matches_numerics(f in arb_sf()) {
            // Only well-conditioned instances: no non-vanishing factor close to zero at s = 0.
            let k = -f.ord_zero_at_zero();
            let near_zero = f.num.iter().chain(f.den.iter())
                .any(|g| !g.vanishes_at_zero() && g.eval(3, c(0.0)).norm() < 1e-9);
            if k >= 0 && !near_zero {
                let lim = f.limit_with_power(k).unwrap();
                let s = 1e-4;
                let num = f.evaluate(c(s)).unwrap() * libm::pow(s, k as f64);
                prop_assert!((num - lim).norm() <= 1e-3 * lim.norm().max(1e-12));
            }
        }

        #[test]
        fn log_periodic_modulus(f in arb_sf(), t in -3.0f64..3.0) {
            if f.ord_zero_at_zero() == 0 {
                let per = 2.0 * PI / libm::log(3.0);
                let s1 = Complex64::new(0.0, t);
                let s2 = Complex64::new(0.0, t + per);
                if let (Ok(a), Ok(b)) = (f.evaluate(s1), f.evaluate(s2)) {
                    prop_assert!((a.norm() - b.norm()).abs() <= 1e-8 * (1.0 + a.norm()));
                }
            }
        }
    }
}
