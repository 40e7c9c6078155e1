//! Tempered points of `GL_d` built from twisted Steinberg blocks, their
//! Plancherel densities, the orthogonal locus and its combinatorial
//! constants, and the formal-degree right-hand sides.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::arith::{factorial, QSqrt};
use crate::factor_algebra::{FactorError, SpectralFunction, TurnAngle};
use crate::field_model::{gamma_star_trivial, LocalFieldSpec, QuadraticCharacter};
use crate::wd_engine::{SelfDualityType, WDAtom, WDRep, WdError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TempError {
    CentralCharacterMismatch { point: TurnAngle, chi: TurnAngle },
    NotOrthogonal,
    OddSymplecticMultiplicity,
    EmptyParameter,
    NotDiscrete { order: i64 },
    Factor(FactorError),
    Wd(WdError),
}

impl fmt::Display for TempError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TempError::CentralCharacterMismatch { point, chi } => {
                write!(f, "central character of the point ({point}) differs from χ ({chi})")
            }
            TempError::NotOrthogonal => write!(f, "parameter is not orthogonal"),
            TempError::OddSymplecticMultiplicity => write!(f, "symplectic-type atom with odd multiplicity"),
            TempError::EmptyParameter => write!(f, "parameter has dimension 0"),
            TempError::NotDiscrete { order } => {
                write!(f, "adjoint γ-factor has order {order} at s = 0; parameter is not discrete")
            }
            TempError::Factor(e) => write!(f, "{e}"),
            TempError::Wd(e) => write!(f, "{e}"),
        }
    }
}

impl From<FactorError> for TempError {
    fn from(e: FactorError) -> Self {
        TempError::Factor(e)
    }
}

impl From<WdError> for TempError {
    fn from(e: WdError) -> Self {
        TempError::Wd(e)
    }
}

/// A composition `(k_1, …, k_r)` of `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LeviShape {
    pub blocks: Vec<u32>,
}

impl LeviShape {
    pub fn d(&self) -> u32 {
        self.blocks.iter().sum()
    }
}

/// One block `St_k(angle) ⊗ |det|^{twist}` of a tempered point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TempBlock {
    pub k: u32,
    pub angle: TurnAngle,
    pub twist: TurnAngle,
}

impl TempBlock {
    pub fn new(k: u32, angle: TurnAngle, twist: TurnAngle) -> Self {
        assert!(k >= 1, "blocks have size at least 1");
        TempBlock { k, angle, twist }
    }

    pub fn effective_angle(&self) -> TurnAngle {
        &self.angle + &self.twist
    }

    pub fn atom(&self) -> WDAtom {
        WDAtom::new(self.effective_angle(), self.k)
    }
}

/// A point `I_L^M(σ_λ)` of the tempered dual of `GL_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TempPoint {
    pub blocks: Vec<TempBlock>,
}

impl TempPoint {
    pub fn new(blocks: Vec<TempBlock>) -> Self {
        TempPoint { blocks }
    }

    /// Untwisted blocks `(angle, k)`.
    pub fn from_atoms(atoms: &[(TurnAngle, u32)]) -> Self {
        TempPoint::new(atoms.iter().map(|(a, k)| TempBlock::new(*k, a.clone(), TurnAngle::zero())).collect())
    }

    pub fn shape(&self) -> LeviShape {
        LeviShape { blocks: self.blocks.iter().map(|b| b.k).collect() }
    }

    pub fn d(&self) -> u32 {
        self.shape().d()
    }

    /// `Σ k_i (u_i + λ_i)` mod 1.
    pub fn central_angle(&self) -> TurnAngle {
        self.blocks.iter().fold(TurnAngle::zero(), |acc, b| &acc + &b.effective_angle().times(b.k as i64))
    }

    pub fn dual(&self) -> TempPoint {
        TempPoint::new(
            self.blocks.iter().map(|b| TempBlock::new(b.k, -&b.angle, -&b.twist)).collect(),
        )
    }

    /// Equality up to permutation of blocks.
    pub fn equivalent(&self, o: &TempPoint) -> bool {
        parameter_of(self) == parameter_of(o)
    }
}

/// A central character `χ` seen through its value at a uniformizer, its
/// value at `−1` and whether it is trivial on units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralCharacter {
    pub angle: TurnAngle,
    pub at_minus_one: i8,
    pub unramified: bool,
}

impl CentralCharacter {
    pub fn unramified(angle: TurnAngle) -> Self {
        CentralCharacter { angle, at_minus_one: 1, unramified: true }
    }

    pub fn from_quadratic(chi: &QuadraticCharacter) -> Self {
        let pi = crate::field_model::SquareClass { odd_valuation: true, ..crate::field_model::SquareClass::one(chi.p) };
        let at_pi = chi.at_class(&pi).unwrap_or(1);
        CentralCharacter {
            angle: if at_pi == 1 { TurnAngle::zero() } else { TurnAngle::half() },
            at_minus_one: chi.at_minus_one(),
            unramified: chi.is_unramified(),
        }
    }
}

pub fn parameter_of(pt: &TempPoint) -> WDRep {
    WDRep::new(pt.blocks.iter().map(TempBlock::atom).collect())
}

fn multiplicity_factorials<K: Ord>(keys: impl Iterator<Item = K>) -> u64 {
    let mut m: BTreeMap<K, u64> = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m.values().map(|&c| factorial(c)).product()
}

/// `|W(M, σ)|`: the product over distinct blocks of the factorial of their multiplicity.
pub fn weyl_order(pt: &TempPoint) -> u64 {
    multiplicity_factorials(pt.blocks.iter().map(|b| (b.k, b.effective_angle())))
}

/// `ω_π(−1)^{d−1} γ*(π, Ad_M, ψ)`, with `ω_π(−1) = 1` for unramified blocks.
pub fn plancherel_density(pt: &TempPoint, spec: &LocalFieldSpec) -> Result<Complex64, TempError> {
    Ok(parameter_of(pt).ad_m().gamma_factor(spec).regularized_value()?)
}

/// `χ(−1)^{d−1} · gamma_star / d`
pub fn density_chi_formula(gamma_star_ad_over_a: Complex64, d: u32, chi_at_minus_one: i8) -> Complex64 {
    let sign = if chi_at_minus_one < 0 && d.is_multiple_of(2) { -1.0 } else { 1.0 };
    gamma_star_ad_over_a * (sign / d as f64)
}

fn check_central(pt: &TempPoint, chi: &CentralCharacter) -> Result<(), TempError> {
    let point = pt.central_angle();
    if !chi.unramified || point != chi.angle {
        return Err(TempError::CentralCharacterMismatch { point, chi: chi.angle.clone() });
    }
    Ok(())
}

/// `χ(−1)^{d−1} γ*(π, Ad_{M/A}, ψ) / d`
pub fn plancherel_density_chi(
    pt: &TempPoint,
    chi: &CentralCharacter,
    spec: &LocalFieldSpec,
) -> Result<Complex64, TempError> {
    check_central(pt, chi)?;
    let g = parameter_of(pt).ad_m_over_a()?.gamma_factor(spec).regularized_value()?;
    Ok(density_chi_formula(g, pt.d(), chi.at_minus_one))
}

/// Exact value of `μ_{M,χ}` when all relevant angles are `0` or `1/2`.
pub fn plancherel_density_chi_exact(
    pt: &TempPoint,
    chi: &CentralCharacter,
    spec: &LocalFieldSpec,
) -> Result<Option<QSqrt>, TempError> {
    check_central(pt, chi)?;
    let g = parameter_of(pt).ad_m_over_a()?.gamma_factor(spec).regularized_value_exact()?;
    let d = pt.d();
    let sign: i64 = if chi.at_minus_one < 0 && d.is_multiple_of(2) { -1 } else { 1 };
    Ok(g.map(|v| v.mul(&QSqrt::rational(crate::arith::qr(sign, d as i64), spec.q()))))
}

/// Checks `μ_{M,χ}(π) = γ*(𝟏)^{-1} μ_M(π) / d`, exactly when the point has
/// real angles and otherwise to a relative tolerance of `1e-12`.
pub fn central_quotient_relation_check(
    pt: &TempPoint,
    chi: &CentralCharacter,
    spec: &LocalFieldSpec,
) -> Result<bool, TempError> {
    check_central(pt, chi)?;
    let rho = parameter_of(pt);
    let d = pt.d() as i64;
    let g1 = gamma_star_trivial(spec);
    let ad = rho.ad_m().gamma_factor(spec);
    if let (Some(lhs), Some(full)) = (plancherel_density_chi_exact(pt, chi, spec)?, ad.regularized_value_exact()?) {
        let rhs = full.mul(&QSqrt::rational(crate::arith::qr(1, d), spec.q())).mul(&g1.recip().expect("γ*(𝟏) ≠ 0"));
        return Ok(lhs == rhs);
    }
    let lhs = plancherel_density_chi(pt, chi, spec)?;
    let rhs = ad.regularized_value()? / (g1.to_f64() * d as f64);
    Ok((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()))
}

/// Dual pair entry of an orthogonal triple: `ρ^{m} ⊠ (ρ^∨)^{n}`, `dim ρ = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairEntry {
    pub atom: WDAtom,
    pub m: u32,
    pub n: u32,
    pub dim: u32,
}

/// Self-dual entry: atom with multiplicity `mult` and dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfDualEntry {
    pub atom: WDAtom,
    pub mult: u32,
    pub dim: u32,
}

/// The data `(I^n, I^s, I^o)` describing a point of the orthogonal locus.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OrthTriple {
    pub pairs: Vec<PairEntry>,
    pub symplectic: Vec<SelfDualEntry>,
    pub orthogonal: Vec<SelfDualEntry>,
}

impl OrthTriple {
    pub fn d(&self) -> u32 {
        self.pairs.iter().map(|p| (p.m + p.n) * p.dim).sum::<u32>()
            + self.symplectic.iter().map(|e| e.mult * e.dim).sum::<u32>()
            + self.orthogonal.iter().map(|e| e.mult * e.dim).sum::<u32>()
    }

    pub fn parameter(&self) -> WDRep {
        let mut atoms = Vec::new();
        for p in &self.pairs {
            atoms.extend(core::iter::repeat_n(p.atom.clone(), p.m as usize));
            atoms.extend(core::iter::repeat_n(p.atom.dual(), p.n as usize));
        }
        for e in self.symplectic.iter().chain(self.orthogonal.iter()) {
            atoms.extend(core::iter::repeat_n(e.atom.clone(), e.mult as usize));
        }
        WDRep::new(atoms)
    }

    /// `|W(M, σ)|`
    pub fn weyl_order(&self) -> u64 {
        self.pairs.iter().map(|p| factorial(p.m as u64) * factorial(p.n as u64)).product::<u64>()
            * self.symplectic.iter().map(|e| factorial(e.mult as u64)).product::<u64>()
            * self.orthogonal.iter().map(|e| factorial(e.mult as u64)).product::<u64>()
    }

    /// `|W′|` for `∏ 𝔖_{n_i} × ∏ 𝔖_{p_j/2} ⋉ (ℤ/2)^{p_j/2} × ∏ 𝔖_{⌊q_k/2⌋} ⋉ (ℤ/2)^{⌊q_k/2⌋}`.
    pub fn weyl_order_prime(&self) -> u64 {
        let hyper = |h: u32| factorial(h as u64) << h;
        self.pairs.iter().map(|p| factorial(p.n as u64)).product::<u64>()
            * self.symplectic.iter().map(|e| hyper(e.mult / 2)).product::<u64>()
            * self.orthogonal.iter().map(|e| hyper(e.mult / 2)).product::<u64>()
    }
}

/// Groups the blocks of an orthogonal point with determinant `χ` into dual
/// pairs, symplectic-type and orthogonal-type atoms.
pub fn orth_triple_of(pt: &TempPoint, chi: &TurnAngle) -> Option<OrthTriple> {
    let rho = parameter_of(pt);
    if !rho.self_duality().is_orthogonal() || rho.determinant() != *chi {
        return None;
    }
    let mut mult: BTreeMap<WDAtom, u32> = BTreeMap::new();
    for a in rho.atoms() {
        *mult.entry(a.clone()).or_insert(0) += 1;
    }
    let mut t = OrthTriple::default();
    for (a, &m) in &mult {
        match a.self_duality() {
            SelfDualityType::Orthogonal => t.orthogonal.push(SelfDualEntry { atom: a.clone(), mult: m, dim: a.sp }),
            SelfDualityType::Symplectic => t.symplectic.push(SelfDualEntry { atom: a.clone(), mult: m, dim: a.sp }),
            _ => {
                let dual = a.dual();
                if *a < dual {
                    let n = mult.get(&dual).copied().unwrap_or(0);
                    t.pairs.push(PairEntry { atom: a.clone(), m, n, dim: a.sp });
                }
            }
        }
    }
    Some(t)
}

/// The constants `P, S, D, N, c, |W|, |W′|` attached to an orthogonal triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AppendixConstants {
    pub p: u64,
    pub s: u32,
    pub d: u64,
    pub n: u32,
    pub c: u32,
    pub w: u64,
    pub w_prime: u64,
}

pub fn appendix_constants(t: &OrthTriple) -> Result<AppendixConstants, TempError> {
    if t.symplectic.iter().any(|e| e.mult % 2 == 1) {
        return Err(TempError::OddSymplecticMultiplicity);
    }
    let pw = |b: u32, e: u32| (b as u64).pow(e);
    let p = t.pairs.iter().map(|x| pw(x.dim, x.m + x.n)).product::<u64>()
        * t.symplectic.iter().map(|e| pw(e.dim, e.mult)).product::<u64>()
        * t.orthogonal.iter().map(|e| pw(e.dim, e.mult)).product::<u64>();
    let s = t.pairs.iter().map(|x| x.m + x.n).sum::<u32>()
        + t.symplectic.iter().map(|e| e.mult).sum::<u32>()
        + t.orthogonal.iter().map(|e| e.mult).sum::<u32>();
    let d = t.pairs.iter().map(|x| pw(x.dim, x.n)).product::<u64>()
        * t.symplectic.iter().map(|e| pw(e.dim, e.mult / 2)).product::<u64>()
        * t.orthogonal.iter().map(|e| pw(e.dim, e.mult.div_ceil(2))).product::<u64>();
    let n = t.pairs.iter().map(|x| x.n).sum::<u32>()
        + t.symplectic.iter().map(|e| e.mult / 2).sum::<u32>()
        + t.orthogonal.iter().map(|e| e.mult.div_ceil(2)).sum::<u32>();
    let c = t.orthogonal.iter().filter(|e| e.mult % 2 == 1).count() as u32;
    Ok(AppendixConstants { p, s, d, n, c, w: t.weyl_order(), w_prime: t.weyl_order_prime() })
}

/// `|γ*(σ, ∧²)| / |S_σ|` together with its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalDegree {
    pub gamma_star: Complex64,
    pub gamma_star_exact: Option<QSqrt>,
    pub s: u64,
    pub value: f64,
    pub value_exact: Option<QSqrt>,
}

pub fn formal_degree_rhs(param: &WDRep, spec: &LocalFieldSpec) -> Result<FormalDegree, TempError> {
    if param.is_empty() {
        return Err(TempError::EmptyParameter);
    }
    let cg = param.component_groups().map_err(|_| TempError::NotOrthogonal)?;
    let g = param.wedge2().gamma_factor(spec);
    let gamma_star = g.regularized_value()?;
    let gamma_star_exact = g.regularized_value_exact()?;
    let inv_s = QSqrt::rational(crate::arith::qr(1, cg.s as i64), spec.q());
    Ok(FormalDegree {
        gamma_star,
        value: gamma_star.norm() / cg.s as f64,
        value_exact: gamma_star_exact.as_ref().map(|v| v.abs().mul(&inv_s)),
        gamma_star_exact,
        s: cg.s,
    })
}

/// The adjoint representation of the dual group through which `φ` factors:
/// `∧²` for orthogonal, `Sym²` for symplectic and `Ad_{M/A}` otherwise.
pub fn adjoint_rep(phi: &WDRep) -> Result<WDRep, TempError> {
    let t = phi.self_duality();
    if t.is_orthogonal() {
        Ok(phi.wedge2())
    } else if t.is_symplectic() {
        Ok(phi.sym2())
    } else {
        Ok(phi.ad_m_over_a()?)
    }
}

/// Order of the component group of the centralizer of `φ` in its dual group.
pub fn centralizer_components(phi: &WDRep) -> u64 {
    let t = phi.self_duality();
    if t.is_orthogonal() {
        phi.component_groups().map(|c| c.s).unwrap_or(1)
    } else if t.is_symplectic() {
        let mut seen: Vec<&WDAtom> = phi
            .atoms()
            .iter()
            .filter(|a| a.self_duality() == SelfDualityType::Orthogonal)
            .collect();
        seen.dedup();
        1u64 << seen.len()
    } else {
        1
    }
}

/// `deg ρ · |γ(0, Ad∘φ)| / ([X*(A_G) : X*(G)] · |S_φ|)`
pub fn hii_rhs(phi: &WDRep, index_xstar: u64, deg_rho: u64, spec: &LocalFieldSpec) -> Result<f64, TempError> {
    if phi.is_empty() {
        return Err(TempError::EmptyParameter);
    }
    let g = adjoint_rep(phi)?.gamma_factor(spec);
    let ord = g.ord_zero_at_zero();
    if ord != 0 {
        return Err(TempError::NotDiscrete { order: ord });
    }
    let v = g.evaluate(Complex64::new(0.0, 0.0)).or_else(|_| g.regularized_value())?;
    Ok(deg_rho as f64 * v.norm() / (index_xstar as f64 * centralizer_components(phi) as f64))
}

/// Regularized value of a spectral function as an element of `ℚ(√q)` when available.
pub fn gamma_star_exact(f: &SpectralFunction) -> Result<Option<QSqrt>, TempError> {
    Ok(f.regularized_value_exact()?)
}
