//! Weil–Deligne representations built from atoms `χ ⊗ Sp(m)` with `χ` an
//! unramified character, their plethysms, local factors, self-duality and
//! centralizer component groups.
//!
//! # Compact text form
//!
//! A representation may be written as a `+`-separated list of atoms, each
//! `angle * Sp(m)`, where `angle` is a rational number of turns:
//!
//! ```text
//! 0 * Sp(1) + 1/2 * Sp(1)
//! 1/3*Sp(2) + 2/3*Sp(2)
//! Sp(3)            (angle 0)
//! 1/4              (Sp(1))
//! ```

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::arith::{qi, qr, QSqrt};
use crate::factor_algebra::{ExactScalar, GeometricFactor, SpectralFunction, TurnAngle};
use crate::field_model::LocalFieldSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WdError {
    NoTrivialAtom,
    NotOrthogonal,
    Parse { pos: usize, msg: String },
}

impl fmt::Display for WdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WdError::NoTrivialAtom => write!(f, "no trivial atom to remove"),
            WdError::NotOrthogonal => write!(f, "representation is not orthogonal"),
            WdError::Parse { pos, msg } => write!(f, "parse error at byte {pos}: {msg}"),
        }
    }
}

/// Clebsch–Gordan: `Sp(m) ⊗ Sp(n) = ⊕ Sp(m + n − 1 − 2j)`.
pub fn sp_tensor(m: u32, n: u32) -> Vec<u32> {
    (0..m.min(n)).map(|j| m + n - 1 - 2 * j).collect()
}

/// `Sym² Sp(m) = ⊕_{j} Sp(2m − 1 − 4j)`
pub fn sp_sym2(m: u32) -> Vec<u32> {
    let top = 2 * m as i64 - 1;
    (0..).map(|j| top - 4 * j).take_while(|&k| k >= 1).map(|k| k as u32).collect()
}

/// `∧² Sp(m) = ⊕_{j} Sp(2m − 3 − 4j)`
pub fn sp_wedge2(m: u32) -> Vec<u32> {
    let top = 2 * m as i64 - 3;
    (0..).map(|j| top - 4 * j).take_while(|&k| k >= 1).map(|k| k as u32).collect()
}

/// Angle arithmetic needed by the plethysm rules, shared by exact angles and
/// by the affine angles of the spectral-limit integrands.
pub trait AngleLike: Clone {
    fn plus(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn doubled(&self) -> Self {
        self.plus(self)
    }
    fn is_trivial(&self) -> bool;
}

impl AngleLike for TurnAngle {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_trivial(&self) -> bool {
        self.is_zero()
    }
}

pub fn tensor_atoms<A: AngleLike>(x: &[(A, u32)], y: &[(A, u32)]) -> Vec<(A, u32)> {
    let mut out = Vec::new();
    for (a, m) in x {
        for (b, n) in y {
            let c = a.plus(b);
            out.extend(sp_tensor(*m, *n).into_iter().map(|k| (c.clone(), k)));
        }
    }
    out
}

pub fn dual_atoms<A: AngleLike>(x: &[(A, u32)]) -> Vec<(A, u32)> {
    x.iter().map(|(a, m)| (a.negated(), *m)).collect()
}

fn square_atoms<A: AngleLike>(x: &[(A, u32)], inner: fn(u32) -> Vec<u32>) -> Vec<(A, u32)> {
    let mut out = Vec::new();
    for (i, (a, m)) in x.iter().enumerate() {
        let d = a.doubled();
        out.extend(inner(*m).into_iter().map(|k| (d.clone(), k)));
        for (b, n) in &x[i + 1..] {
            let c = a.plus(b);
            out.extend(sp_tensor(*m, *n).into_iter().map(|k| (c.clone(), k)));
        }
    }
    out
}

pub fn sym2_atoms<A: AngleLike>(x: &[(A, u32)]) -> Vec<(A, u32)> {
    square_atoms(x, sp_sym2)
}

pub fn wedge2_atoms<A: AngleLike>(x: &[(A, u32)]) -> Vec<(A, u32)> {
    square_atoms(x, sp_wedge2)
}

pub fn ad_over_a_atoms<A: AngleLike>(x: &[(A, u32)]) -> Option<Vec<(A, u32)>> {
    let mut ad = tensor_atoms(x, &dual_atoms(x));
    let i = ad.iter().position(|(a, k)| *k == 1 && a.is_trivial())?;
    ad.remove(i);
    Some(ad)
}

/// `(unramified character with angle u) ⊗ Sp(m)`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WDAtom {
    // field order gives the canonical (sp, angle) sort
    pub sp: u32,
    pub angle: TurnAngle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelfDualityType {
    None,
    Orthogonal,
    Symplectic,
    OrthogonalAndSymplectic,
}

impl SelfDualityType {
    pub fn is_orthogonal(self) -> bool {
        matches!(self, SelfDualityType::Orthogonal | SelfDualityType::OrthogonalAndSymplectic)
    }
    pub fn is_symplectic(self) -> bool {
        matches!(self, SelfDualityType::Symplectic | SelfDualityType::OrthogonalAndSymplectic)
    }
}

impl WDAtom {
    pub fn new(angle: TurnAngle, sp: u32) -> Self {
        assert!(sp >= 1, "Sp(m) needs m >= 1");
        WDAtom { sp, angle }
    }

    pub fn dim(&self) -> u32 {
        self.sp
    }

    pub fn dual(&self) -> WDAtom {
        WDAtom { sp: self.sp, angle: -&self.angle }
    }

    pub fn self_duality(&self) -> SelfDualityType {
        if !self.angle.is_real() {
            SelfDualityType::None
        } else if self.sp % 2 == 1 {
            SelfDualityType::Orthogonal
        } else {
            SelfDualityType::Symplectic
        }
    }

    /// `L(s) = (1 − e^{2πiu} q^{-(s + (m−1)/2)})^{-1}`
    pub fn l_factor(&self, q: u64) -> SpectralFunction {
        let mut f = SpectralFunction::one(q);
        f.den.push(GeometricFactor::new(self.angle.clone(), qr(self.sp as i64 - 1, 2)));
        f
    }

    /// `ε(s) = e^{2πi u n m} (−e^{2πiu})^{m−1} q^{(nm + m − 1)(1/2 − s)}`
    pub fn eps_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        let q = spec.q();
        let m = self.sp as i64;
        let n = spec.psi_level;
        let a = n * m + m - 1;
        let phase = &self.angle.times(n * m) + &(&TurnAngle::half() + &self.angle).times(m - 1);
        SpectralFunction::monomial(q, ExactScalar { phase, modulus: QSqrt::sqrt_q_pow(q, a) }, qi(a))
    }

    /// `γ(s) = ε(s) L(1 − s, dual) / L(s)`
    pub fn gamma_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        let mut g = self.eps_factor(spec);
        g.num.push(GeometricFactor::new(self.angle.clone(), qr(self.sp as i64 - 1, 2)));
        g.den.push(GeometricFactor::reflected(-&self.angle, qr(self.sp as i64 + 1, 2)));
        g
    }
}

impl fmt::Display for WDAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*Sp({})", self.angle, self.sp)
    }
}

/// A multiset of atoms, kept sorted by `(sp, angle)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WDRep {
    atoms: Vec<WDAtom>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentGroups {
    pub s_plus: u64,
    pub s: u64,
    pub fiber_ratio: u64,
}

impl WDRep {
    pub fn new(mut atoms: Vec<WDAtom>) -> Self {
        atoms.sort();
        WDRep { atoms }
    }

    pub fn from_pairs(p: &[(TurnAngle, u32)]) -> Self {
        WDRep::new(p.iter().map(|(a, m)| WDAtom::new(a.clone(), *m)).collect())
    }

    pub fn atoms(&self) -> &[WDAtom] {
        &self.atoms
    }

    pub fn pairs(&self) -> Vec<(TurnAngle, u32)> {
        self.atoms.iter().map(|a| (a.angle.clone(), a.sp)).collect()
    }

    pub fn dim(&self) -> u32 {
        self.atoms.iter().map(|a| a.sp).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dual(&self) -> WDRep {
        WDRep::new(self.atoms.iter().map(WDAtom::dual).collect())
    }

    pub fn direct_sum(&self, o: &WDRep) -> WDRep {
        WDRep::new(self.atoms.iter().chain(o.atoms.iter()).cloned().collect())
    }

    pub fn tensor(&self, o: &WDRep) -> WDRep {
        WDRep::from_pairs(&tensor_atoms(&self.pairs(), &o.pairs()))
    }

    pub fn sym2(&self) -> WDRep {
        WDRep::from_pairs(&sym2_atoms(&self.pairs()))
    }

    pub fn wedge2(&self) -> WDRep {
        WDRep::from_pairs(&wedge2_atoms(&self.pairs()))
    }

    pub fn ad_m(&self) -> WDRep {
        self.tensor(&self.dual())
    }

    pub fn ad_m_over_a(&self) -> Result<WDRep, WdError> {
        ad_over_a_atoms(&self.pairs()).map(|v| WDRep::from_pairs(&v)).ok_or(WdError::NoTrivialAtom)
    }

    fn product(&self, q: u64, f: impl Fn(&WDAtom) -> SpectralFunction) -> SpectralFunction {
        self.atoms.iter().fold(SpectralFunction::one(q), |acc, a| acc.multiply(&f(a)))
    }

    pub fn l_factor(&self, q: u64) -> SpectralFunction {
        self.product(q, |a| a.l_factor(q))
    }

    pub fn eps_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        self.product(spec.q(), |a| a.eps_factor(spec))
    }

    pub fn gamma_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        self.product(spec.q(), |a| a.gamma_factor(spec))
    }

    /// `γ*`: the regularized value at `s = 0` of the γ-factor.
    pub fn gamma_star(&self, spec: &LocalFieldSpec) -> num_complex::Complex64 {
        self.gamma_factor(spec).regularized_value().expect("γ-factors of bounded parameters have no pole at 0")
    }

    fn multiplicities(&self) -> BTreeMap<&WDAtom, usize> {
        let mut m = BTreeMap::new();
        for a in &self.atoms {
            *m.entry(a).or_insert(0) += 1;
        }
        m
    }

    pub fn self_duality(&self) -> SelfDualityType {
        if *self != self.dual() {
            return SelfDualityType::None;
        }
        let mult = self.multiplicities();
        let even_for = |t: SelfDualityType| {
            mult.iter().filter(|(a, _)| a.self_duality() == t).all(|(_, &k)| k % 2 == 0)
        };
        match (even_for(SelfDualityType::Symplectic), even_for(SelfDualityType::Orthogonal)) {
            (true, true) => SelfDualityType::OrthogonalAndSymplectic,
            (true, false) => SelfDualityType::Orthogonal,
            (false, true) => SelfDualityType::Symplectic,
            (false, false) => SelfDualityType::None,
        }
    }

    /// `det ρ` as an unramified character: `Σ m·u`.
    pub fn determinant(&self) -> TurnAngle {
        self.atoms.iter().fold(TurnAngle::zero(), |acc, a| &acc + &a.angle.times(a.sp as i64))
    }

    /// Distinct orthogonal-type atoms with their multiplicities.
    pub fn orthogonal_constituents(&self) -> Vec<(WDAtom, usize)> {
        self.multiplicities()
            .into_iter()
            .filter(|(a, _)| a.self_duality() == SelfDualityType::Orthogonal)
            .map(|(a, k)| (a.clone(), k))
            .collect()
    }

    /// Orders of the component groups in `SO_d(ℂ)` and `O_d(ℂ)` of the centralizer.
    pub fn component_groups(&self) -> Result<ComponentGroups, WdError> {
        if !self.self_duality().is_orthogonal() {
            return Err(WdError::NotOrthogonal);
        }
        let orth = self.orthogonal_constituents();
        let k = orth.len() as u32;
        let s_plus = 1u64 << k;
        let s = if k == 0 {
            1
        } else if orth.iter().any(|(a, _)| a.sp % 2 == 1) {
            1u64 << (k - 1)
        } else {
            1u64 << k
        };
        Ok(ComponentGroups { s_plus, s, fiber_ratio: 2 * s / s_plus })
    }

    pub fn parse(text: &str) -> Result<WDRep, WdError> {
        parse_rep(text)
    }
}

impl fmt::Display for WDRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "0");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

fn parse_rep(text: &str) -> Result<WDRep, WdError> {
    let mut atoms = Vec::new();
    let mut offset = 0;
    if text.trim().is_empty() || text.trim() == "0" {
        return Ok(WDRep::default());
    }
    for term in text.split('+') {
        let pos = offset + term.len() - term.trim_start().len();
        offset += term.len() + 1;
        let t = term.trim();
        let err = |msg: &str| WdError::Parse { pos, msg: String::from(msg) };
        if t.is_empty() {
            return Err(err("empty term"));
        }
        let (angle_s, sp_s) = match t.split_once('*') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None if t.starts_with("Sp") => ("0", Some(t)),
            None => (t, None),
        };
        let angle = TurnAngle::parse(angle_s).ok_or_else(|| err("expected a rational angle"))?;
        let sp = match sp_s {
            None => 1,
            Some(s) => {
                let inner = s
                    .strip_prefix("Sp(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| err("expected Sp(m)"))?;
                let m: u32 = inner.trim().parse().map_err(|_| err("expected a positive integer in Sp(m)"))?;
                if m == 0 {
                    return Err(err("Sp(0) is not a representation"));
                }
                m
            }
        };
        atoms.push(WDAtom::new(angle, sp));
    }
    Ok(WDRep::new(atoms))
}

/// Local factors of a parameter. Implemented for the built-in unramified
/// representations and for [`AbstractParameter`], which carries user data.
pub trait LocalFactors {
    fn dim(&self) -> u32;
    fn l_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction;
    fn eps_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction;
    fn dual_l_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction;

    /// `γ(s) = ε(s) L(1 − s, dual) / L(s)`
    fn gamma_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        self.eps_factor(spec)
            .multiply(&self.dual_l_factor(spec).reflect_s())
            .multiply(&self.l_factor(spec).inverse())
    }
}

impl LocalFactors for WDRep {
    fn dim(&self) -> u32 {
        WDRep::dim(self)
    }
    fn l_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        WDRep::l_factor(self, spec.q())
    }
    fn eps_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        WDRep::eps_factor(self, spec)
    }
    fn dual_l_factor(&self, spec: &LocalFieldSpec) -> SpectralFunction {
        self.dual().l_factor(spec.q())
    }
}

/// A parameter known only through its local factors, e.g. a ramified
/// discrete series with externally computed L- and ε-data.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractParameter {
    pub dim: u32,
    pub l: SpectralFunction,
    pub eps: SpectralFunction,
    pub dual_l: SpectralFunction,
}

impl LocalFactors for AbstractParameter {
    fn dim(&self) -> u32 {
        self.dim
    }
    fn l_factor(&self, _: &LocalFieldSpec) -> SpectralFunction {
        self.l.clone()
    }
    fn eps_factor(&self, _: &LocalFieldSpec) -> SpectralFunction {
        self.eps.clone()
    }
    fn dual_l_factor(&self, _: &LocalFieldSpec) -> SpectralFunction {
        self.dual_l.clone()
    }
}

/// Exact check that an atom list has the trivial atom `(0, Sp(1))`.
pub fn has_trivial_atom(r: &WDRep) -> bool {
    r.atoms.iter().any(|a| a.sp == 1 && a.angle.value().is_zero())
}
