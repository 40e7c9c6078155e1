//! Non-Archimedean field data: valuations, square classes, quadratic
//! characters and the factors of the trivial character.
//!
//! Field elements are exact rationals read inside an unramified extension
//! `F/ℚ_p` of residue degree `f`, so the uniformizer is `ϖ = p` and `q = p^f`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{is_prime, pow_q, qi, QSqrt, Q};
use crate::factor_algebra::{ExactScalar, GeometricFactor, SpectralFunction, TurnAngle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    ZeroInput,
    NotPrime(u64),
    BadDegree,
    PrimeMismatch { expected: u64, found: u64 },
    NotMultiplicative,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::ZeroInput => write!(f, "valuation undefined for zero"),
            FieldError::NotPrime(p) => write!(f, "{p} is not prime"),
            FieldError::BadDegree => write!(f, "residue degree must be at least 1"),
            FieldError::PrimeMismatch { expected, found } => {
                write!(f, "square class for p = {found} used with p = {expected}")
            }
            FieldError::NotMultiplicative => write!(f, "character table is not multiplicative"),
        }
    }
}

/// Residue characteristic `p`, residue degree `f` (so `q = p^f`) and the
/// conductor exponent `n(ψ)` of the additive character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalFieldSpec {
    pub p: u64,
    pub f: u32,
    pub psi_level: i64,
}

impl LocalFieldSpec {
    pub fn new(p: u64, f: u32, psi_level: i64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if f == 0 {
            return Err(FieldError::BadDegree);
        }
        Ok(LocalFieldSpec { p, f, psi_level })
    }

    /// From the residue cardinality, which must be a prime power.
    pub fn from_q(q: u64, psi_level: i64) -> Result<Self, FieldError> {
        let (p, f) = crate::arith::prime_power(q).ok_or(FieldError::NotPrime(q))?;
        LocalFieldSpec::new(p, f, psi_level)
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.f)
    }

    /// `|x| = q^{-v(x)}`
    pub fn abs(&self, x: &Q) -> Result<Q, FieldError> {
        let v = valuation(self.p, x)?;
        Ok(pow_q(&qi(self.q() as i64), -v))
    }
}

fn big_valuation(p: &BigInt, n: &BigInt) -> (i64, BigInt) {
    let mut v = 0;
    let mut m = n.clone();
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    (v, m)
}

/// `x = p^v · (unit)`; returns `v`.
pub fn valuation(p: u64, x: &Q) -> Result<i64, FieldError> {
    Ok(unit_decomposition(p, x)?.0)
}

/// `(v, a, b)` with `x = p^v · a/b`, `a, b` prime to `p`.
fn unit_decomposition(p: u64, x: &Q) -> Result<(i64, BigInt, BigInt), FieldError> {
    if x.is_zero() {
        return Err(FieldError::ZeroInput);
    }
    let pb = BigInt::from(p);
    let (vn, a) = big_valuation(&pb, x.numer());
    let (vd, b) = big_valuation(&pb, x.denom());
    Ok((vn - vd, a, b))
}

/// Element of `F^×/F^{×2}`.
///
/// For odd `p` the unit part is a bit (non-residue or not); for `p = 2` it is
/// the residue of the unit part modulo 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    pub p: u64,
    pub unit: u8,
    pub odd_valuation: bool,
}

impl SquareClass {
    pub fn one(p: u64) -> Self {
        SquareClass { p, unit: if p == 2 { 1 } else { 0 }, odd_valuation: false }
    }

    /// All classes, in a fixed order.
    pub fn all(p: u64) -> Vec<SquareClass> {
        let units: &[u8] = if p == 2 { &[1, 3, 5, 7] } else { &[0, 1] };
        let mut v = Vec::new();
        for &ov in &[false, true] {
            for &u in units {
                v.push(SquareClass { p, unit: u, odd_valuation: ov });
            }
        }
        v
    }

    pub fn mul(&self, o: &SquareClass) -> SquareClass {
        debug_assert_eq!(self.p, o.p);
        let unit = if self.p == 2 { (self.unit * o.unit) % 8 } else { self.unit ^ o.unit };
        SquareClass { p: self.p, unit, odd_valuation: self.odd_valuation ^ o.odd_valuation }
    }

    /// Canonical representative: `{1, u, p, u·p}` for odd `p`, with `u` the
    /// smallest positive non-residue; `{1, -1, 5, -5} · {1, 2}` for `p = 2`.
    pub fn representative(&self) -> Q {
        let unit = if self.p == 2 {
            match self.unit {
                1 => 1,
                3 => -5,
                5 => 5,
                _ => -1,
            }
        } else if self.unit == 1 {
            smallest_nonresidue(self.p) as i64
        } else {
            1
        };
        let pi = if self.odd_valuation { self.p as i64 } else { 1 };
        qi(unit * pi)
    }

    pub fn label(&self) -> alloc::string::String {
        use alloc::string::ToString;
        if self.p == 2 {
            return crate::arith::fmt_q(&self.representative());
        }
        match (self.unit, self.odd_valuation) {
            (0, false) => "1".to_string(),
            (_, false) => "u".to_string(),
            (0, true) => "ϖ".to_string(),
            _ => "uϖ".to_string(),
        }
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn legendre(a: &BigInt, p: u64) -> i8 {
    let pb = BigInt::from(p);
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return 0;
    }
    let e = BigInt::from((p - 1) / 2);
    if r.modpow(&e, &pb).is_one() {
        1
    } else {
        -1
    }
}

pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre(&BigInt::from(a), p) == -1).unwrap_or(1)
}

/// Square class via valuation parity plus the Hensel criterion on the unit part.
pub fn square_class(p: u64, x: &Q) -> Result<SquareClass, FieldError> {
    let (v, a, b) = unit_decomposition(p, x)?;
    let odd_valuation = v.rem_euclid(2) == 1;
    let ab = a * b;
    let unit = if p == 2 {
        // b^{-1} ≡ b (mod 8) for odd b
        ab.mod_floor(&BigInt::from(8)).to_u8().unwrap_or(1)
    } else if legendre(&ab, p) == 1 {
        0
    } else {
        1
    };
    Ok(SquareClass { p, unit, odd_valuation })
}

/// A quadratic character of `F^×`, as a table on square classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticCharacter {
    pub p: u64,
    table: Vec<(SquareClass, i8)>,
}

impl QuadraticCharacter {
    /// Builds a character from its values; the table must cover every class and be multiplicative.
    pub fn from_table(p: u64, table: Vec<(SquareClass, i8)>) -> Result<Self, FieldError> {
        let chi = QuadraticCharacter { p, table };
        let all = SquareClass::all(p);
        for a in &all {
            for b in &all {
                if chi.at_class(&a.mul(b))? != chi.at_class(a)? * chi.at_class(b)? {
                    return Err(FieldError::NotMultiplicative);
                }
            }
        }
        Ok(chi)
    }

    pub fn trivial(p: u64) -> Self {
        QuadraticCharacter { p, table: SquareClass::all(p).into_iter().map(|c| (c, 1)).collect() }
    }

    /// `χ(ϖ) = −1`, trivial on units.
    pub fn unramified(p: u64) -> Self {
        QuadraticCharacter {
            p,
            table: SquareClass::all(p)
                .into_iter()
                .map(|c| (c, if c.odd_valuation { -1 } else { 1 }))
                .collect(),
        }
    }

    /// The character `x ↦ (x, a)` for odd `p`, given by its values on `u` and `ϖ`.
    pub fn from_generators_odd(p: u64, at_u: i8, at_pi: i8) -> Result<Self, FieldError> {
        let table = SquareClass::all(p)
            .into_iter()
            .map(|c| {
                let mut v = 1;
                if c.unit == 1 {
                    v *= at_u;
                }
                if c.odd_valuation {
                    v *= at_pi;
                }
                (c, v)
            })
            .collect();
        QuadraticCharacter::from_table(p, table)
    }

    pub fn at_class(&self, c: &SquareClass) -> Result<i8, FieldError> {
        if c.p != self.p {
            return Err(FieldError::PrimeMismatch { expected: self.p, found: c.p });
        }
        Ok(self.table.iter().find(|(k, _)| k == c).map_or(1, |(_, v)| *v))
    }

    pub fn is_unramified(&self) -> bool {
        self.table.iter().all(|(c, v)| c.odd_valuation || *v == 1)
    }

    /// Angle of `χ(ϖ)` in turns, for unramified characters.
    pub fn unramified_angle(&self) -> Option<TurnAngle> {
        if !self.is_unramified() {
            return None;
        }
        let pi = SquareClass { odd_valuation: true, ..SquareClass::one(self.p) };
        Some(if self.at_class(&pi).ok()? == 1 { TurnAngle::zero() } else { TurnAngle::half() })
    }

    /// `χ(−1)`
    pub fn at_minus_one(&self) -> i8 {
        char_eval(self, &qi(-1)).unwrap_or(1)
    }
}

pub fn char_eval(chi: &QuadraticCharacter, x: &Q) -> Result<i8, FieldError> {
    chi.at_class(&square_class(chi.p, x)?)
}

/// `γ(s, 𝟏, ψ) = q^{n(ψ)(1/2 − s)} (1 − q^{-s}) / (1 − q^{-(1−s)})`
pub fn gamma_trivial(spec: &LocalFieldSpec) -> SpectralFunction {
    let q = spec.q();
    let n = spec.psi_level;
    let mut f = SpectralFunction::monomial(
        q,
        ExactScalar { phase: TurnAngle::zero(), modulus: QSqrt::sqrt_q_pow(q, n) },
        qi(n),
    );
    f.num.push(GeometricFactor::new(TurnAngle::zero(), Q::zero()));
    f.den.push(GeometricFactor::reflected(TurnAngle::zero(), Q::one()));
    f
}

/// `γ*(𝟏, ψ) = q^{n(ψ)/2} (1 − q^{-1})^{-1}`, exactly.
pub fn gamma_star_trivial(spec: &LocalFieldSpec) -> QSqrt {
    let q = spec.q();
    let qq = qi(q as i64);
    let inv = QSqrt::rational(&qq / (&qq - Q::one()), q);
    QSqrt::sqrt_q_pow(q, spec.psi_level).mul(&inv)
}
