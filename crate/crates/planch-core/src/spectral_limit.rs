//! Numerical check of the singular spectral limit for `GL_d`: the
//! `s → 0⁺` limit of a Plancherel integral weighted by the inverse
//! symmetric-square γ-factor equals an exterior-square integral over the
//! orthogonal locus.
//!
//! # Coordinates
//!
//! A triple `(I^n, I^s, I^o)` fixes blocks `(k_b, u_b)`; the connected
//! component of `Temp_χ(GL_d)` through it is the torus of block angles
//! `a = u + B t`, `t ∈ [0, 1)^{r−1}`, where the columns of `B` span the integer
//! kernel of `k = (k_b)`. Permutations of equal-size blocks act on the angle
//! space, and both sides are computed on the angle space with the common
//! factor `1/F`, `F = ∏ (number of blocks of size k)!`.
//!
//! Left side: `χ(−1)^{d−1}/F · γ(s, 𝟏) · (d/g) · ∫ Φ γ(s, Sym²)^{-1} γ*(Ad_{M/A}) dt`
//! with `g = gcd(k)`. Right side: a sum over families of orthogonal points
//! (dual pairs of equal-size blocks with angles `±v` and fixed blocks with
//! angle `0` or `1/2`) of `χ(−1)^{d−1}/F · 2^{1−J} ∫ Φ γ*(∧²) dv`, `J` the
//! number of fixed blocks.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::arith::{factorial, frac, qi, qr, to_f64, unimodular_completion, Q};
use crate::factor_algebra::{cis, FactorError, TurnAngle};
use crate::field_model::{gamma_star_trivial, gamma_trivial, LocalFieldSpec};
use crate::linalg::QMat;
use crate::temp_spectrum::{appendix_constants, OrthTriple, TempError};
use crate::wd_engine::{
    ad_over_a_atoms, sym2_atoms, wedge2_atoms, AngleLike, WDAtom, WDRep,
};

#[derive(Clone, Debug, PartialEq)]
pub enum LimitError {
    Precondition(String),
    NonGeneric { found: i64, expected: i64 },
    Budget { needed: u64, budget: u64 },
    NotInvariant { deviation: f64 },
    Factor(FactorError),
    Temp(TempError),
}

impl fmt::Display for LimitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitError::Precondition(m) => write!(f, "precondition violated: {m}"),
            LimitError::NonGeneric { found, expected } => {
                write!(f, "point is not generic: symmetric-square zero of order {found}, expected {expected}")
            }
            LimitError::Budget { needed, budget } => {
                write!(f, "quadrature budget exhausted: {needed} nodes needed, budget {budget}")
            }
            LimitError::NotInvariant { deviation } => {
                write!(f, "test function is not Weyl invariant (deviation {deviation:e})")
            }
            LimitError::Factor(e) => write!(f, "{e}"),
            LimitError::Temp(e) => write!(f, "{e}"),
        }
    }
}

impl From<FactorError> for LimitError {
    fn from(e: FactorError) -> Self {
        LimitError::Factor(e)
    }
}

impl From<TempError> for LimitError {
    fn from(e: TempError) -> Self {
        LimitError::Temp(e)
    }
}

/// An angle `Σ c_j t_j + constant` (mod 1) in the torus coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineAngle {
    pub coeffs: Vec<i64>,
    pub constant: Q,
}

impl AffineAngle {
    pub fn constant(dim: usize, c: Q) -> Self {
        AffineAngle { coeffs: vec![0; dim], constant: frac(&c) }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.is_constant() && self.constant.is_zero()
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        self.coeffs.iter().zip(t).map(|(&c, &x)| c as f64 * x).sum::<f64>() + to_f64(&self.constant)
    }

    pub fn eval_exact(&self, t: &[Q]) -> TurnAngle {
        let v = self.coeffs.iter().zip(t).fold(self.constant.clone(), |acc, (&c, x)| acc + qi(c) * x);
        TurnAngle::new(v)
    }
}

impl AngleLike for AffineAngle {
    fn plus(&self, o: &Self) -> Self {
        AffineAngle {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
            constant: frac(&(&self.constant + &o.constant)),
        }
    }
    fn negated(&self) -> Self {
        AffineAngle { coeffs: self.coeffs.iter().map(|c| -c).collect(), constant: frac(&-self.constant.clone()) }
    }
    fn is_trivial(&self) -> bool {
        self.is_identically_zero()
    }
}

/// `γ(s, χ_α ⊗ Sp(m), ψ)` in floating point, `α` in turns.
pub fn gamma_atom(q: f64, psi_level: i64, alpha: f64, m: u32, s: f64) -> Complex64 {
    let mf = m as f64;
    let n = psi_level as f64;
    let a = n * mf + mf - 1.0;
    let phase = alpha * n * mf + (mf - 1.0) * (0.5 + alpha);
    let eps = cis(phase) * libm::pow(q, a * (0.5 - s));
    let c = cis(alpha);
    let num = Complex64::new(1.0, 0.0) - c * libm::pow(q, -(s + (mf - 1.0) / 2.0));
    let den = Complex64::new(1.0, 0.0) - c.conj() * libm::pow(q, s - (mf + 1.0) / 2.0);
    eps * num / den
}

/// A smooth function on the angle torus, invariant under permutations of
/// equal-size blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `c0 + c1 Σ_b cos(2π · freq · a_b)`
    CosSum { c0: f64, c1: f64, freq: i64 },
    /// `Σ c · cos(2π n·a)` over the listed terms.
    TrigPoly { terms: Vec<(f64, Vec<i64>)> },
    /// `Σ_b Σ_{|n| ≤ terms} e^{−2π² n² width²} cos(2π n (a_b − center))`
    Gaussian { width: f64, center: f64, terms: u32 },
}

impl TestFunction {
    pub fn eval(&self, a: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::CosSum { c0, c1, freq } => {
                c0 + c1 * a.iter().map(|&x| libm::cos(2.0 * PI * *freq as f64 * x)).sum::<f64>()
            }
            TestFunction::TrigPoly { terms } => terms
                .iter()
                .map(|(c, n)| c * libm::cos(2.0 * PI * n.iter().zip(a).map(|(&k, &x)| k as f64 * x).sum::<f64>()))
                .sum(),
            TestFunction::Gaussian { width, center, terms } => a
                .iter()
                .map(|&x| {
                    (-(*terms as i64)..=*terms as i64)
                        .map(|n| {
                            let nf = n as f64;
                            libm::exp(-2.0 * PI * PI * nf * nf * width * width) * libm::cos(2.0 * PI * nf * (x - center))
                        })
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    /// Average of a trigonometric polynomial over the permutations of
    /// equal-size blocks.
    pub fn symmetrize(terms: &[(f64, Vec<i64>)], k: &[u32]) -> TestFunction {
        let perms = block_permutations(k);
        let w = 1.0 / perms.len() as f64;
        let mut out = Vec::new();
        for (c, n) in terms {
            for p in &perms {
                let mut m = vec![0; n.len()];
                for (i, &pi) in p.iter().enumerate() {
                    m[pi] = n[i];
                }
                out.push((c * w, m));
            }
        }
        TestFunction::TrigPoly { terms: out }
    }

    /// Largest deviation `|Φ(a) − Φ(w·a)|` over `samples` pseudo-random points
    /// and all block permutations `w`.
    pub fn invariance_defect(&self, k: &[u32], samples: usize, seed: u64) -> f64 {
        let perms = block_permutations(k);
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let a: Vec<f64> = k.iter().map(|_| next()).collect();
            let base = self.eval(&a);
            for p in &perms {
                let mut b = vec![0.0; a.len()];
                for (i, &pi) in p.iter().enumerate() {
                    b[pi] = a[i];
                }
                worst = worst.max((self.eval(&b) - base).abs());
            }
        }
        worst
    }

    pub fn check_invariant(&self, k: &[u32]) -> Result<(), LimitError> {
        let dev = self.invariance_defect(k, 16, 0x9e37_79b9_7f4a_7c15);
        if dev > 1e-12 {
            return Err(LimitError::NotInvariant { deviation: dev });
        }
        Ok(())
    }
}

/// All permutations of indices preserving the block sizes `k`.
pub fn block_permutations(k: &[u32]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let r = k.len();
    for i in 0..r {
        let mut next = Vec::new();
        for p in &out {
            for j in 0..r {
                if k[j] == k[i] && !p.contains(&j) {
                    let mut q = p.clone();
                    q.push(j);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// Runs independent jobs and returns their results in index order.
pub trait Executor: Sync {
    fn run(&self, n: usize, job: &(dyn Fn(usize) -> Integral + Sync)) -> Vec<Integral>;
}

/// Runs every job on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run(&self, n: usize, job: &(dyn Fn(usize) -> Integral + Sync)) -> Vec<Integral> {
        (0..n).map(job).collect()
    }
}

/// Quadrature value with its error estimate and node count.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub nodes: u64,
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(v: &[Integral]) -> Integral {
    match v.len() {
        0 => Integral::default(),
        1 => v[0],
        n => {
            let (a, b) = (pairwise_sum(&v[..n / 2]), pairwise_sum(&v[n / 2..]));
            Integral { value: a.value + b.value, error: a.error + b.error, nodes: a.nodes + b.nodes }
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 Kronrod nodes of `[a, b]` with Kronrod and Gauss weights.
fn gk_nodes(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let g = if i % 2 == 1 { WG[i / 2] * h } else { 0.0 };
        out[2 * i] = (c - h * XGK[i], WGK[i] * h, g);
        out[2 * i + 1] = (c + h * XGK[i], WGK[i] * h, g);
    }
    out[14] = (c, WGK[7] * h, WG[3] * h);
    out
}

/// A linear form `Σ c_j t_j + c0` whose vanishing mod 1 marks a peak.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SingularForm {
    coeffs: Vec<i64>,
    constant: Q,
}

impl SingularForm {
    fn normalized(mut self) -> Option<Self> {
        let lead = self.coeffs.iter().rev().find(|&&c| c != 0).copied()?;
        if lead < 0 {
            self.coeffs.iter_mut().for_each(|c| *c = -*c);
            self.constant = -self.constant;
        }
        self.constant = frac(&self.constant);
        Some(self)
    }
}

/// Forms relevant to each integration variable, innermost last.
fn forms_per_level(base: &[SingularForm], dim: usize) -> Vec<Vec<(Vec<f64>, f64)>> {
    let mut levels = vec![Vec::new(); dim];
    let mut cur: BTreeSet<SingularForm> = base.iter().cloned().filter_map(SingularForm::normalized).collect();
    for l in (0..dim).rev() {
        let (here, rest): (Vec<_>, Vec<_>) = cur.iter().cloned().partition(|f| f.coeffs[l] != 0);
        levels[l] = here
            .iter()
            .map(|f| (f.coeffs.iter().map(|&c| c as f64).collect(), to_f64(&f.constant)))
            .collect();
        let mut next: BTreeSet<SingularForm> = rest.into_iter().collect();
        for (i, f) in here.iter().enumerate() {
            for g in &here[i + 1..] {
                let (cf, cg) = (f.coeffs[l], g.coeffs[l]);
                let e = SingularForm {
                    coeffs: f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| cg * a - cf * b).collect(),
                    constant: &f.constant * qi(cg) - &g.constant * qi(cf),
                };
                if let Some(e) = e.normalized() {
                    next.insert(e);
                }
            }
        }
        cur = next;
    }
    levels
}

/// Graded panels on the circle `[0, 1)`: geometric refinement with ratio 2
/// towards each breakpoint, from `h_min` up to `h0`.
fn graded_panels(breaks: &mut Vec<f64>, h_min: f64, h0: f64) -> Vec<(f64, f64)> {
    let mut panels = Vec::new();
    if breaks.is_empty() {
        let n = libm::ceil(1.0 / h0) as usize;
        for i in 0..n {
            panels.push((i as f64 / n as f64, (i + 1) as f64 / n as f64));
        }
        return panels;
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let nb = breaks.len();
    for i in 0..nb {
        let a = breaks[i];
        let b = if i + 1 < nb { breaks[i + 1] } else { breaks[0] + 1.0 };
        let len = b - a;
        if len <= 1e-15 {
            continue;
        }
        let half = 0.5 * len;
        let mut edges = vec![0.0];
        let mut h = h_min;
        while edges[edges.len() - 1] + h < half {
            let e = edges[edges.len() - 1] + h;
            edges.push(e);
            h = (2.0 * h).min(h0);
        }
        edges.push(half);
        let mut all: Vec<f64> = edges.clone();
        for e in edges.iter().rev().skip(1) {
            all.push(len - e);
        }
        for w in all.windows(2) {
            panels.push((a + w[0], a + w[1]));
        }
    }
    panels
}

/// Breakpoints of variable `l` given the outer coordinates.
fn breakpoints(forms: &[(Vec<f64>, f64)], outer: &[f64], l: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for (c, c0) in forms {
        let rest: f64 = c0 + outer.iter().zip(c).map(|(x, cj)| x * cj).sum::<f64>();
        let cl = c[l];
        let n = cl.abs() as i64;
        for j in 0..n {
            let t = (j as f64 - rest) / cl;
            out.push(t - libm::floor(t));
        }
    }
    out
}

/// Quadrature settings for the left-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Base panels per unit length.
    pub grid: u32,
    /// Largest number of integrand evaluations.
    pub max_nodes: u64,
    /// Ratio of the peak width `s log q / (2π |c|)` to the smallest panel.
    pub refine: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { grid: 16, max_nodes: 1 << 22, refine: 8.0 }
    }
}

/// Blocks, component parametrization and symbolic atoms for one triple.
#[derive(Clone, Debug)]
pub struct LimitProblem {
    pub triple: OrthTriple,
    pub spec: LocalFieldSpec,
    pub k: Vec<u32>,
    pub u: Vec<Q>,
    pub g: i64,
    pub k_prime: Vec<i64>,
    /// `r × D` integer matrix with `a = u + B t`.
    pub basis: Vec<Vec<i64>>,
    pub weyl_f: u64,
    pub chi_minus_one: i8,
    sym2: Vec<(AffineAngle, u32)>,
    ad: Vec<(AffineAngle, u32)>,
}

impl LimitProblem {
    pub fn new(triple: &OrthTriple, spec: &LocalFieldSpec) -> Result<Self, LimitError> {
        let mut k = Vec::new();
        let mut u = Vec::new();
        for p in &triple.pairs {
            for _ in 0..p.m {
                k.push(p.dim);
                u.push(frac(p.atom.angle.value()));
            }
            for _ in 0..p.n {
                k.push(p.dim);
                u.push(frac(p.atom.dual().angle.value()));
            }
        }
        for e in triple.symplectic.iter().chain(triple.orthogonal.iter()) {
            for _ in 0..e.mult {
                k.push(e.dim);
                u.push(frac(e.atom.angle.value()));
            }
        }
        if k.is_empty() {
            return Err(LimitError::Precondition(String::from("empty triple")));
        }
        let ki: Vec<i64> = k.iter().map(|&x| x as i64).collect();
        let (g, uni) = unimodular_completion(&ki);
        let r = k.len();
        let basis: Vec<Vec<i64>> = (0..r).map(|b| (1..r).map(|j| uni[b][j]).collect()).collect();
        let k_prime = ki.iter().map(|x| x / g).collect();
        let mut counts = alloc::collections::BTreeMap::new();
        for &x in &k {
            *counts.entry(x).or_insert(0u64) += 1;
        }
        let weyl_f = counts.values().map(|&c| factorial(c)).product();
        let dim = r - 1;
        let atoms: Vec<(AffineAngle, u32)> = (0..r)
            .map(|b| (AffineAngle { coeffs: basis[b].clone(), constant: u[b].clone() }, k[b]))
            .collect();
        let sym2 = sym2_atoms(&atoms);
        let ad = ad_over_a_atoms(&atoms).ok_or_else(|| LimitError::Precondition(String::from("no trivial atom")))?;
        debug_assert!(sym2.iter().all(|(a, _)| a.coeffs.len() == dim));
        Ok(LimitProblem { triple: triple.clone(), spec: *spec, k, u, g, k_prime, basis, weyl_f, chi_minus_one: 1, sym2, ad })
    }

    pub fn d(&self) -> u32 {
        self.k.iter().sum()
    }

    pub fn rank(&self) -> usize {
        self.k.len()
    }

    /// Dimension of the component torus.
    pub fn dim(&self) -> usize {
        self.k.len() - 1
    }

    fn q(&self) -> f64 {
        self.spec.q() as f64
    }

    pub fn block_angles(&self, t: &[f64]) -> Vec<f64> {
        (0..self.rank())
            .map(|b| to_f64(&self.u[b]) + self.basis[b].iter().zip(t).map(|(&c, &x)| c as f64 * x).sum::<f64>())
            .collect()
    }

    pub fn block_angles_exact(&self, t: &[Q]) -> Vec<Q> {
        (0..self.rank())
            .map(|b| self.basis[b].iter().zip(t).fold(self.u[b].clone(), |acc, (&c, x)| acc + qi(c) * x))
            .collect()
    }

    /// `true` iff the block angles `a` lie on the component through the base point.
    pub fn on_component(&self, a: &[Q]) -> bool {
        let s = a.iter().zip(&self.u).zip(&self.k_prime).fold(Q::zero(), |acc, ((x, y), &c)| acc + (x - y) * qi(c));
        crate::arith::is_integer(&s)
    }

    pub fn parameter_at(&self, a: &[Q]) -> WDRep {
        WDRep::new(a.iter().zip(&self.k).map(|(x, &k)| WDAtom::new(TurnAngle::new(x.clone()), k)).collect())
    }

    /// `Φ(a) γ(s, Sym²)^{-1} γ*(Ad_{M/A})` at torus coordinates `t`.
    pub fn lhs_integrand(&self, phi: &TestFunction, s: f64, t: &[f64]) -> Complex64 {
        let q = self.q();
        let n = self.spec.psi_level;
        let mut v = Complex64::new(phi.eval(&self.block_angles(t)), 0.0);
        for (a, m) in &self.sym2 {
            v /= gamma_atom(q, n, a.eval(t), *m, s);
        }
        let g1 = gamma_star_trivial(&self.spec).to_f64();
        for (a, m) in &self.ad {
            if *m == 1 && a.is_identically_zero() {
                v *= g1;
            } else {
                v *= gamma_atom(q, n, a.eval(t), *m, 0.0);
            }
        }
        v
    }

    fn singular_forms(&self) -> Vec<SingularForm> {
        self.sym2
            .iter()
            .filter(|(a, m)| *m == 1 && !a.is_constant())
            .map(|(a, _)| SingularForm { coeffs: a.coeffs.clone(), constant: a.constant.clone() })
            .collect()
    }

    fn prefactor(&self, s: f64) -> Complex64 {
        let g = gamma_trivial(&self.spec).evaluate(Complex64::new(s, 0.0)).expect("γ(s, 𝟏) is finite for s > 0");
        let sign = if self.chi_minus_one < 0 && self.d().is_multiple_of(2) { -1.0 } else { 1.0 };
        g * (sign * self.d() as f64 / (self.g as f64 * self.weyl_f as f64))
    }

    /// `∫ f(t) dt` over the component torus with panels graded at the peaks of width `s`.
    pub fn integrate_torus(
        &self,
        f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
        s: f64,
        cfg: &QuadConfig,
        exec: &dyn Executor,
    ) -> Result<Integral, LimitError> {
        let dim = self.dim();
        if dim == 0 {
            return Ok(Integral { value: f(&[]), error: 0.0, nodes: 1 });
        }
        let levels = forms_per_level(&self.singular_forms(), dim);
        let lq = libm::log(self.q());
        let h0 = 1.0 / cfg.grid.max(1) as f64;
        let h_min: Vec<f64> = levels
            .iter()
            .map(|fs| {
                let cmax = fs.iter().map(|(c, _)| c.iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(1.0, f64::max);
                (s * lq / (2.0 * PI * cmax) / cfg.refine).min(h0)
            })
            .collect();
        let needed = count_nodes(&levels, &h_min, h0, &mut Vec::new(), 0);
        if needed > cfg.max_nodes {
            return Err(LimitError::Budget { needed, budget: cfg.max_nodes });
        }
        let mut b0 = breakpoints(&levels[0], &[], 0);
        let panels = graded_panels(&mut b0, h_min[0], h0);
        let nodes: Vec<(f64, f64, f64)> = panels.iter().flat_map(|&(a, b)| gk_nodes(a, b)).collect();
        let inner = |i: usize| -> Integral {
            let x = nodes[i].0 - libm::floor(nodes[i].0);
            let mut pre = vec![x];
            integrate_level(f, &levels, &h_min, h0, &mut pre, 1)
        };
        let vals = exec.run(nodes.len(), &inner);
        Ok(combine_panels(&nodes, &vals))
    }

    /// `lhs_value(s)` with its error estimate and node count.
    pub fn lhs_value(
        &self,
        phi: &TestFunction,
        s: f64,
        cfg: &QuadConfig,
        exec: &dyn Executor,
    ) -> Result<Integral, LimitError> {
        if !(s > 0.0) {
            return Err(LimitError::Precondition(String::from("s must be positive")));
        }
        let f = |t: &[f64]| self.lhs_integrand(phi, s, t);
        let i = self.integrate_torus(&f, s, cfg, exec)?;
        let c = self.prefactor(s);
        Ok(Integral { value: i.value * c, error: i.error * c.norm(), nodes: i.nodes })
    }

    /// Families of orthogonal points on the component.
    pub fn families(&self) -> Vec<Family> {
        let r = self.rank();
        let mut out = Vec::new();
        let mut assign: Vec<Slot> = vec![Slot::Free; r];
        enumerate_families(self, 0, &mut assign, &mut out);
        out
    }

    /// `χ(−1)^{d−1}/F · Σ_families 2^{1−J} ∫ Φ γ*(∧²) dv`, trapezoid with `n`
    /// points per pair coordinate.
    pub fn rhs_value_with(&self, phi: &TestFunction, n: usize) -> Complex64 {
        let q = self.q();
        let psi = self.spec.psi_level;
        let g1 = gamma_star_trivial(&self.spec).to_f64();
        let sign = if self.chi_minus_one < 0 && self.d().is_multiple_of(2) { -1.0 } else { 1.0 };
        let mut total = Complex64::new(0.0, 0.0);
        for fam in self.families() {
            let np = fam.pairs.len();
            let atoms = fam.affine_atoms(self);
            let wedge = wedge2_atoms(&atoms);
            let weight = sign * libm::pow(2.0, 1.0 - fam.fixed.len() as f64) / self.weyl_f as f64;
            let count = n.pow(np as u32);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut v = vec![0.0; np];
            for idx in 0..count {
                let mut rem = idx;
                for x in v.iter_mut() {
                    *x = (rem % n) as f64 / n as f64;
                    rem /= n;
                }
                let a = fam.block_angles(self, &v);
                let mut val = Complex64::new(phi.eval(&a), 0.0);
                for (w, m) in &wedge {
                    if *m == 1 && w.is_identically_zero() {
                        val *= g1;
                    } else {
                        val *= gamma_atom(q, psi, w.eval(&v), *m, 0.0);
                    }
                }
                acc += val;
            }
            total += acc * (weight / count as f64);
        }
        total
    }

    /// Right side with a grid-doubling error estimate.
    pub fn rhs_value(&self, phi: &TestFunction, grid: usize) -> (Complex64, f64) {
        let a = self.rhs_value_with(phi, grid.max(1));
        let b = self.rhs_value_with(phi, 2 * grid.max(1));
        (b, (a - b).norm())
    }

    /// Pole order at `s = 0` of `γ(s, π_a, Sym²)^{-1}` at exact block angles.
    pub fn singular_exponent(&self, a: &[Q]) -> i64 {
        self.parameter_at(a).sym2().gamma_factor(&self.spec).ord_zero_at_zero()
    }
}

fn count_nodes(levels: &[Vec<(Vec<f64>, f64)>], h_min: &[f64], h0: f64, outer: &mut Vec<f64>, l: usize) -> u64 {
    let mut b = breakpoints(&levels[l], outer, l);
    let panels = graded_panels(&mut b, h_min[l], h0);
    if l + 1 == levels.len() {
        return 15 * panels.len() as u64;
    }
    let mut total = 0;
    for (a, bb) in panels {
        // the inner panel count varies slowly; sample the panel midpoint
        outer.push(0.5 * (a + bb));
        total += 15 * count_nodes(levels, h_min, h0, outer, l + 1);
        outer.pop();
    }
    total
}

fn combine_panels(nodes: &[(f64, f64, f64)], vals: &[Integral]) -> Integral {
    let mut panel_results = Vec::with_capacity(nodes.len() / 15);
    for (chunk_n, chunk_v) in nodes.chunks(15).zip(vals.chunks(15)) {
        let mut k = Complex64::new(0.0, 0.0);
        let mut g = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut cnt = 0;
        for (&(_, wk, wg), v) in chunk_n.iter().zip(chunk_v) {
            k += v.value * wk;
            g += v.value * wg;
            err += v.error * wk;
            cnt += v.nodes;
        }
        panel_results.push(Integral { value: k, error: err + (k - g).norm(), nodes: cnt });
    }
    pairwise_sum(&panel_results)
}

fn integrate_level(
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    levels: &[Vec<(Vec<f64>, f64)>],
    h_min: &[f64],
    h0: f64,
    outer: &mut Vec<f64>,
    l: usize,
) -> Integral {
    if l == levels.len() {
        return Integral { value: f(outer), error: 0.0, nodes: 1 };
    }
    let mut b = breakpoints(&levels[l], outer, l);
    let panels = graded_panels(&mut b, h_min[l], h0);
    let mut nodes = Vec::with_capacity(15 * panels.len());
    let mut vals = Vec::with_capacity(15 * panels.len());
    for (a, bb) in panels {
        for nd in gk_nodes(a, bb) {
            outer.push(nd.0 - libm::floor(nd.0));
            vals.push(integrate_level(f, levels, h_min, h0, outer, l + 1));
            outer.pop();
            nodes.push(nd);
        }
    }
    combine_panels(&nodes, &vals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Free,
    /// First block of pair number `i`, angle `v_i`.
    PairFirst(usize),
    /// Second block of pair number `i`, angle `−v_i`.
    PairSecond(usize),
    /// Fixed angle `0` (`false`) or `1/2` (`true`).
    Fixed(bool),
}

/// A family of orthogonal points: blocks matched in pairs `(v, −v)` and
/// fixed blocks with angle `0` or `1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub pairs: Vec<(usize, usize)>,
    pub fixed: Vec<(usize, bool)>,
    slots: Vec<Slot>,
}

impl Family {
    pub fn block_angles(&self, pb: &LimitProblem, v: &[f64]) -> Vec<f64> {
        let _ = pb;
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::PairFirst(i) => v[i],
                Slot::PairSecond(i) => -v[i],
                Slot::Fixed(h) => if h { 0.5 } else { 0.0 },
                Slot::Free => unreachable!("families assign every block"),
            })
            .collect()
    }

    pub fn affine_atoms(&self, pb: &LimitProblem) -> Vec<(AffineAngle, u32)> {
        let np = self.pairs.len();
        self.slots
            .iter()
            .zip(&pb.k)
            .map(|(s, &k)| {
                let mut c = vec![0; np];
                let constant = match *s {
                    Slot::PairFirst(i) => {
                        c[i] = 1;
                        Q::zero()
                    }
                    Slot::PairSecond(i) => {
                        c[i] = -1;
                        Q::zero()
                    }
                    Slot::Fixed(h) => if h { qr(1, 2) } else { Q::zero() },
                    Slot::Free => unreachable!("families assign every block"),
                };
                (AffineAngle { coeffs: c, constant }, k)
            })
            .collect()
    }
}

fn enumerate_families(pb: &LimitProblem, b: usize, slots: &mut Vec<Slot>, out: &mut Vec<Family>) {
    let r = pb.rank();
    if b == r {
        // fixed blocks must be pairwise distinct and land on the component
        let mut fixed = Vec::new();
        let mut pairs = Vec::new();
        for (i, s) in slots.iter().enumerate() {
            match *s {
                Slot::Fixed(h) => fixed.push((i, h)),
                Slot::PairFirst(_) => {
                    let j = slots.iter().position(|t| *t == Slot::PairSecond(pairs.len())).expect("paired");
                    pairs.push((i, j));
                }
                _ => {}
            }
        }
        for (x, (i, h)) in fixed.iter().enumerate() {
            if fixed[x + 1..].iter().any(|(j, h2)| pb.k[*j] == pb.k[*i] && h2 == h) {
                return;
            }
        }
        let mut a = Vec::with_capacity(r);
        for s in slots.iter() {
            a.push(match *s {
                Slot::Fixed(true) => qr(1, 2),
                _ => Q::zero(),
            });
        }
        if !pb.on_component(&a) {
            return;
        }
        out.push(Family { pairs, fixed, slots: slots.clone() });
        return;
    }
    if slots[b] != Slot::Free {
        enumerate_families(pb, b + 1, slots, out);
        return;
    }
    if pb.k[b] % 2 == 1 {
        for h in [false, true] {
            slots[b] = Slot::Fixed(h);
            enumerate_families(pb, b + 1, slots, out);
        }
    }
    let pair_index = slots.iter().filter(|s| matches!(s, Slot::PairFirst(_))).count();
    for c in b + 1..r {
        if slots[c] == Slot::Free && pb.k[c] == pb.k[b] {
            slots[b] = Slot::PairFirst(pair_index);
            slots[c] = Slot::PairSecond(pair_index);
            enumerate_families(pb, b + 1, slots, out);
            slots[c] = Slot::Free;
        }
    }
    slots[b] = Slot::Free;
}

/// Richardson extrapolation for values at `s_0, s_0/2, s_0/4, …`, assuming an
/// expansion in integer powers of `s`. Returns the entry whose difference to
/// its predecessor in the same row is smallest, with that difference.
pub fn richardson(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len();
    if n == 0 {
        return (Complex64::new(0.0, 0.0), f64::INFINITY);
    }
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut table: Vec<Vec<Complex64>> = vec![values.to_vec()];
    let mut best = (values[n - 1], (values[n - 1] - values[n - 2]).norm());
    for j in 1..n {
        let prev = &table[j - 1];
        let f = libm::pow(2.0, j as f64) - 1.0;
        let row: Vec<Complex64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / f).collect();
        for i in 0..row.len() {
            let diff = (row[i] - prev[i + 1]).norm();
            if diff < best.1 {
                best = (row[i], diff);
            }
        }
        table.push(row);
    }
    best
}

/// Least-squares slope of `log|y|` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(v.abs())).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub s0: f64,
    pub steps: usize,
    pub tol: f64,
    pub quad: QuadConfig,
    pub rhs_grid: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { s0: 0.1, steps: 6, tol: 1e-3, quad: QuadConfig::default(), rhs_grid: 64 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub s_values: Vec<f64>,
    pub lhs: Vec<Complex64>,
    pub lhs_errors: Vec<f64>,
    pub lhs_extrapolated: Complex64,
    pub extrapolation_error: f64,
    pub rhs: Complex64,
    pub rhs_error: f64,
    pub abs_discrepancy: f64,
    pub rel_discrepancy: f64,
    pub fit_exponent: Option<f64>,
    pub nodes_used: u64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify(
    triple: &OrthTriple,
    phi: &TestFunction,
    spec: &LocalFieldSpec,
    cfg: &VerifyConfig,
    exec: &dyn Executor,
) -> Result<LimitReport, LimitError> {
    let pb = LimitProblem::new(triple, spec)?;
    phi.check_invariant(&pb.k)?;
    let s_values: Vec<f64> = (0..cfg.steps.max(1)).map(|i| cfg.s0 / libm::pow(2.0, i as f64)).collect();
    let mut lhs = Vec::new();
    let mut lhs_errors = Vec::new();
    let mut nodes_used = 0;
    for &s in &s_values {
        let v = pb.lhs_value(phi, s, &cfg.quad, exec)?;
        lhs.push(v.value);
        lhs_errors.push(v.error);
        nodes_used += v.nodes;
    }
    let (lhs_extrapolated, extrapolation_error) = richardson(&lhs);
    let (rhs, rhs_error) = pb.rhs_value(phi, cfg.rhs_grid);
    let abs_discrepancy = (lhs_extrapolated - rhs).norm();
    let rel_discrepancy = abs_discrepancy / rhs.norm().max(1e-12);
    let fit_exponent = (s_values.len() >= 3 && pb.dim() > 0).then(|| {
        let raw: Vec<f64> = s_values
            .iter()
            .zip(&lhs)
            .map(|(&s, v)| (v / (pb.prefactor(s) * pb.d() as f64)).norm())
            .collect();
        loglog_slope(&s_values, &raw)
    });
    Ok(LimitReport {
        s_values,
        lhs,
        lhs_errors,
        lhs_extrapolated,
        extrapolation_error,
        rhs,
        rhs_error,
        abs_discrepancy,
        rel_discrepancy,
        fit_exponent,
        nodes_used,
        tol: cfg.tol,
        pass: rel_discrepancy < cfg.tol,
    })
}

/// Free coordinates of the subtorus: `x_{i,ℓ}` (`ℓ ≤ m_i`), `y_{j,ℓ}`
/// (`ℓ ≤ p_j/2`), `z_{k,ℓ}` (`ℓ ≤ ⌊q_k/2⌋`), in the triple's order.
pub fn subtorus_dim(t: &OrthTriple) -> usize {
    t.pairs.iter().map(|p| p.m as usize).sum::<usize>()
        + t.symplectic.iter().map(|e| e.mult as usize / 2).sum::<usize>()
        + t.orthogonal.iter().map(|e| e.mult as usize / 2).sum::<usize>()
}

/// The parameter at a subtorus point, with the mirrored coordinates filled in;
/// a coordinate `x` on a block of size `k` twists its angle by `x / k`.
pub fn subtorus_parameter(t: &OrthTriple, mu: &[Q]) -> Result<WDRep, LimitError> {
    if mu.len() != subtorus_dim(t) {
        return Err(LimitError::Precondition(alloc::format!(
            "expected {} subtorus coordinates, got {}",
            subtorus_dim(t),
            mu.len()
        )));
    }
    let mut it = mu.iter();
    let mut atoms = Vec::new();
    let tw = |a: &WDAtom, x: &Q| WDAtom::new(&a.angle + &TurnAngle::new(x / qi(a.sp as i64)), a.sp);
    for p in &t.pairs {
        if p.m != p.n {
            return Err(LimitError::Precondition(String::from("subtorus needs m_i = n_i")));
        }
        for _ in 0..p.m {
            let x = it.next().expect("length checked");
            atoms.push(tw(&p.atom, x));
            atoms.push(tw(&p.atom.dual(), &-x.clone()));
        }
    }
    for e in t.symplectic.iter().chain(t.orthogonal.iter()) {
        for _ in 0..e.mult / 2 {
            let x = it.next().expect("length checked");
            atoms.push(tw(&e.atom, x));
            atoms.push(tw(&e.atom, &-x.clone()));
        }
        if e.mult % 2 == 1 {
            atoms.push(e.atom.clone());
        }
    }
    Ok(WDRep::new(atoms))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueIdentityReport {
    pub order: i64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub deviation: f64,
}

/// `γ*(𝟏) lim s^N γ(s, Sym²)^{-1} γ*(Ad_{M/A}) = log(q)^{-N} γ*(∧²)` at a subtorus point.
pub fn residue_identity_check(t: &OrthTriple, mu: &[Q], spec: &LocalFieldSpec) -> Result<ResidueIdentityReport, LimitError> {
    let rho = subtorus_parameter(t, mu)?;
    let n = appendix_constants(t)?.n as i64;
    let sym = rho.sym2().gamma_factor(spec);
    let order = sym.ord_zero_at_zero();
    if order != n {
        return Err(LimitError::NonGeneric { found: order, expected: n });
    }
    let g1 = gamma_star_trivial(spec).to_f64();
    let lim = sym.inverse().limit_with_power(n)?;
    let ad = rho.ad_m_over_a().map_err(TempError::from)?.gamma_factor(spec).regularized_value()?;
    let lhs = lim * ad * g1;
    let lq = libm::log(spec.q() as f64);
    let rhs = rho.wedge2().gamma_factor(spec).regularized_value()? * libm::pow(lq, -(n as f64));
    let deviation = (lhs - rhs).norm() / rhs.norm().max(1e-300);
    Ok(ResidueIdentityReport { order, lhs, rhs, deviation })
}

/// Number of vanishing linear forms `x_ℓ + x^∨_{ℓ'}`, `y_ℓ + y_{ℓ'}` (`ℓ < ℓ'`)
/// and `z_ℓ + z_{ℓ'}` (`ℓ ≤ ℓ'`) for local coordinates listed in block order
/// (pairs: `m_i` then `n_i` coordinates; then each self-dual atom's copies).
pub fn linear_form_count(t: &OrthTriple, coords: &[Q]) -> i64 {
    let mut it = coords.iter();
    let mut count = 0;
    for p in &t.pairs {
        let x: Vec<&Q> = (0..p.m).map(|_| it.next().expect("coordinates")).collect();
        let xv: Vec<&Q> = (0..p.n).map(|_| it.next().expect("coordinates")).collect();
        for a in &x {
            for b in &xv {
                if (*a + *b).is_zero() {
                    count += 1;
                }
            }
        }
    }
    for (e, strict) in t.symplectic.iter().map(|e| (e, true)).chain(t.orthogonal.iter().map(|e| (e, false))) {
        let y: Vec<&Q> = (0..e.mult).map(|_| it.next().expect("coordinates")).collect();
        for i in 0..y.len() {
            for j in i..y.len() {
                if (i < j || !strict) && (y[i] + y[j]).is_zero() {
                    count += 1;
                }
            }
        }
    }
    count
}

/// The parameter at local coordinates in block order (see [`linear_form_count`]).
pub fn local_parameter(t: &OrthTriple, coords: &[Q]) -> WDRep {
    let mut it = coords.iter();
    let mut atoms = Vec::new();
    let tw = |a: &WDAtom, x: &Q| WDAtom::new(&a.angle + &TurnAngle::new(x / qi(a.sp as i64)), a.sp);
    for p in &t.pairs {
        for _ in 0..p.m {
            atoms.push(tw(&p.atom, it.next().expect("coordinates")));
        }
        for _ in 0..p.n {
            atoms.push(tw(&p.atom.dual(), it.next().expect("coordinates")));
        }
    }
    for e in t.symplectic.iter().chain(t.orthogonal.iter()) {
        for _ in 0..e.mult {
            atoms.push(tw(&e.atom, it.next().expect("coordinates")));
        }
    }
    WDRep::new(atoms)
}

/// Masses of one component under the measures used on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationCheck {
    /// `∫ 1` over the component torus with the left-side quadrature, times `d/g`.
    pub component_mass: f64,
    /// Number of component points over one point of the quotient torus.
    pub covering_degree: u64,
    /// `vol(quotient torus)` in sum-zero coordinates, `P/d` in closed form.
    pub quotient_volume: Q,
    /// `d · vol / (P |W|)`, exact.
    pub unfolded_mass: Q,
    /// `component_mass / covering_degree / |W|`.
    pub quadrature_mass: f64,
    pub weyl: u64,
}

pub fn normalization_check(
    t: &OrthTriple,
    spec: &LocalFieldSpec,
    cfg: &QuadConfig,
    exec: &dyn Executor,
) -> Result<NormalizationCheck, LimitError> {
    let pb = LimitProblem::new(t, spec)?;
    let one = |_: &[f64]| Complex64::new(1.0, 0.0);
    let i = pb.integrate_torus(&one, 1.0, cfg, exec)?;
    let d = pb.d() as i64;
    let component_mass = i.value.re * d as f64 / pb.g as f64;
    // points u + (j/d)(1, …, 1) of the component over the base point of the quotient torus
    let covering_degree = (0..d)
        .filter(|&j| {
            let a: Vec<Q> = pb.u.iter().map(|x| x + qr(j, d)).collect();
            pb.on_component(&a)
        })
        .count() as u64;
    let r = pb.rank();
    let kk: Vec<Q> = pb.k.iter().map(|&x| qi(x as i64)).collect();
    let mut m = QMat::zeros(r, r);
    for (col, b) in (1..r).enumerate() {
        // projection of k_b e_b along (k_1, …, k_r) onto the sum-zero hyperplane
        for i in 0..r {
            let e = if i == b { kk[b].clone() } else { Q::zero() };
            m[(i, col)] = e - &kk[i] * &kk[b] / qi(d);
        }
    }
    m[(0, r - 1)] = Q::from_integer(1.into());
    let vol = num_traits::Signed::abs(&m.det());
    let p: i64 = pb.k.iter().map(|&x| x as i64).product();
    let weyl = t.weyl_order();
    let unfolded_mass = qi(d) * &vol / qi(p * weyl as i64);
    Ok(NormalizationCheck {
        component_mass,
        covering_degree,
        quotient_volume: vol,
        unfolded_mass,
        quadrature_mass: component_mass / covering_degree as f64 / weyl as f64,
        weyl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temp_spectrum::{PairEntry, SelfDualEntry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> LocalFieldSpec {
        LocalFieldSpec::from_q(3, 0).unwrap()
    }

    fn orth(n: i64, d: i64, k: u32, mult: u32) -> SelfDualEntry {
        SelfDualEntry { atom: WDAtom::new(TurnAngle::from_ratio(n, d), k), mult, dim: k }
    }

    fn pair(n: i64, d: i64, k: u32, m: u32) -> PairEntry {
        PairEntry { atom: WDAtom::new(TurnAngle::from_ratio(n, d), k), m, n: m, dim: k }
    }

    fn triple_a() -> OrthTriple {
        OrthTriple { orthogonal: vec![orth(0, 1, 1, 1), orth(1, 2, 1, 1)], ..Default::default() }
    }

    fn triple_b() -> OrthTriple {
        OrthTriple { pairs: vec![pair(1, 5, 1, 1)], ..Default::default() }
    }

    fn triple_c() -> OrthTriple {
        OrthTriple { pairs: vec![pair(1, 5, 1, 1)], orthogonal: vec![orth(0, 1, 1, 1)], ..Default::default() }
    }

    #[test]
    fn fast_gamma_matches_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(-2..3);
            let sp = LocalFieldSpec::from_q(5, n).unwrap();
            let num = rng.gen_range(0..36);
            let m = rng.gen_range(1..4);
            let atom = WDAtom::new(TurnAngle::from_ratio(num, 37), m);
            let s = rng.gen_range(0.01..0.9);
            let exact = WDRep::new(vec![atom]).gamma_factor(&sp).evaluate(Complex64::new(s, 0.0)).unwrap();
            let fast = gamma_atom(5.0, n, num as f64 / 37.0, m, s);
            assert!((exact - fast).norm() < 1e-12 * (1.0 + exact.norm()));
        }
    }

    #[test]
    fn integrand_matches_engine() {
        let pb = LimitProblem::new(&triple_c(), &spec()).unwrap();
        let t = [qr(3, 17), qr(5, 19)];
        let a = pb.block_angles_exact(&t);
        assert!(pb.on_component(&a));
        let rho = pb.parameter_at(&a);
        let s = 0.2;
        let want = rho.sym2().gamma_factor(&spec()).evaluate(Complex64::new(s, 0.0)).unwrap().inv()
            * rho.ad_m_over_a().unwrap().gamma_factor(&spec()).regularized_value().unwrap();
        let tf: Vec<f64> = t.iter().map(to_f64).collect();
        let got = pb.lhs_integrand(&TestFunction::Constant(1.0), s, &tf);
        assert!((got - want).norm() < 1e-10 * want.norm(), "{got} vs {want}");
    }

    #[test]
    fn d1_is_exact() {
        for (n, d) in [(0, 1), (1, 2)] {
            let t = OrthTriple { orthogonal: vec![orth(n, d, 1, 1)], ..Default::default() };
            let pb = LimitProblem::new(&t, &spec()).unwrap();
            let phi = TestFunction::CosSum { c0: 0.5, c1: 0.25, freq: 1 };
            let want = phi.eval(&[n as f64 / d as f64]);
            for s in [0.3, 0.1, 0.01, 1e-4] {
                let v = pb.lhs_value(&phi, s, &QuadConfig::default(), &Sequential).unwrap();
                assert!((v.value - want).norm() < 1e-12);
            }
            let (r, _) = pb.rhs_value(&phi, 4);
            assert!((r - want).norm() < 1e-12);
        }
    }

    #[test]
    fn families_of_small_triples() {
        assert_eq!(LimitProblem::new(&triple_a(), &spec()).unwrap().families().len(), 2);
        assert_eq!(LimitProblem::new(&triple_b(), &spec()).unwrap().families().len(), 1);
        let c = LimitProblem::new(&triple_c(), &spec()).unwrap().families();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|f| f.pairs.len() == 1 && f.fixed.len() == 1));
    }

    #[test]
    fn rhs_closed_forms() {
        // one dual pair: ∧² = 𝟏, weight 2/2
        let pb = LimitProblem::new(&triple_b(), &spec()).unwrap();
        let (r, _) = pb.rhs_value(&TestFunction::Constant(1.0), 16);
        assert!((r - Complex64::new(1.5, 0.0)).norm() < 1e-12);
        // 𝟏 ⊕ η: ∧² = η, two orderings, weight 2^{-1}/2 each
        let pb = LimitProblem::new(&triple_a(), &spec()).unwrap();
        let (r, _) = pb.rhs_value(&TestFunction::Constant(1.0), 4);
        assert!((r - Complex64::new(0.75, 0.0)).norm() < 1e-12);
        assert_eq!(pb.rhs_value(&TestFunction::Constant(0.0), 4).0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_linear_and_relabel_invariant() {
        let t = triple_a();
        let swapped = OrthTriple { orthogonal: vec![t.orthogonal[1].clone(), t.orthogonal[0].clone()], ..Default::default() };
        let f1 = TestFunction::CosSum { c0: 1.0, c1: 0.5, freq: 1 };
        let f2 = TestFunction::CosSum { c0: 2.0, c1: 1.0, freq: 1 };
        let a = LimitProblem::new(&t, &spec()).unwrap();
        let b = LimitProblem::new(&swapped, &spec()).unwrap();
        assert!((a.rhs_value(&f1, 8).0 - b.rhs_value(&f1, 8).0).norm() < 1e-14);
        assert!((a.rhs_value(&f2, 8).0 - a.rhs_value(&f1, 8).0 * 2.0).norm() < 1e-14);
    }

    #[test]
    fn test_function_invariance() {
        let k = [1u32, 1, 2];
        assert_eq!(TestFunction::Constant(1.0).invariance_defect(&k, 8, 1), 0.0);
        assert!(TestFunction::CosSum { c0: 0.0, c1: 1.0, freq: 2 }.invariance_defect(&k, 8, 1) < 1e-14);
        let raw = vec![(1.0, vec![1, 0, 2]), (0.5, vec![0, -1, 1])];
        let sym = TestFunction::symmetrize(&raw, &k);
        assert!(sym.invariance_defect(&k, 32, 3) < 1e-14);
        assert!(TestFunction::TrigPoly { terms: raw }.check_invariant(&k).is_err());
    }

    #[test]
    fn residue_identity_small_cases() {
        let sp = spec();
        let r = residue_identity_check(&OrthTriple { orthogonal: vec![orth(0, 1, 1, 1)], ..Default::default() }, &[], &sp).unwrap();
        assert!(r.deviation < 1e-12);
        let r = residue_identity_check(&triple_a(), &[], &sp).unwrap();
        assert!(r.deviation < 1e-10);
        let r = residue_identity_check(&triple_b(), &[qr(1, 7)], &sp).unwrap();
        assert!(r.deviation < 1e-10);
        // x = −1/5 makes the pair trivial: extra zeros
        assert!(matches!(residue_identity_check(&triple_b(), &[qr(-1, 5)], &sp), Err(LimitError::NonGeneric { .. })));
    }

    #[test]
    fn singular_exponent_examples() {
        let t = OrthTriple { orthogonal: vec![orth(0, 1, 1, 1)], ..Default::default() };
        let pb = LimitProblem::new(&t, &spec()).unwrap();
        assert_eq!(pb.singular_exponent(&[Q::zero()]), 1);
        let pb = LimitProblem::new(&triple_c(), &spec()).unwrap();
        let generic = pb.block_angles_exact(&[qr(1, 7), qr(2, 11)]);
        assert_eq!(pb.singular_exponent(&generic), 0);
        let mu = subtorus_parameter(&triple_c(), &[qr(1, 9)]).unwrap();
        assert_eq!(mu.sym2().gamma_factor(&spec()).ord_zero_at_zero(), 2);
    }

    #[test]
    fn linear_form_count_matches_pole_order() {
        let sp = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let triples = [
            triple_c(),
            OrthTriple { orthogonal: vec![orth(0, 1, 1, 3)], ..Default::default() },
            OrthTriple { symplectic: vec![orth(0, 1, 2, 2)], orthogonal: vec![orth(1, 2, 1, 1)], ..Default::default() },
        ];
        for t in &triples {
            let r = t.parameter().atoms().len();
            for _ in 0..50 {
                let mut c: Vec<Q> = (0..r).map(|_| qr(rng.gen_range(-40..41), 1000)).collect();
                // impose a few relations to land on singular loci
                for _ in 0..rng.gen_range(0..3) {
                    let i = rng.gen_range(0..r);
                    let j = rng.gen_range(0..r);
                    c[j] = -c[i].clone();
                }
                let want = linear_form_count(t, &c);
                let got = local_parameter(t, &c).sym2().gamma_factor(&sp).ord_zero_at_zero();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn normalization_small() {
        for t in [triple_a(), triple_b(), triple_c()] {
            let n = normalization_check(&t, &spec(), &QuadConfig::default(), &Sequential).unwrap();
            assert_eq!(n.unfolded_mass, qr(1, n.weyl as i64));
            assert!((n.quadrature_mass * n.weyl as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn richardson_recovers_polynomial_limit() {
        let s: Vec<f64> = (0..6).map(|i| 0.1 / libm::pow(2.0, i as f64)).collect();
        let v: Vec<Complex64> = s.iter().map(|&x| Complex64::new(2.0 + 3.0 * x - 5.0 * x * x + 7.0 * x * x * x, 0.0)).collect();
        let (l, e) = richardson(&v);
        assert!((l.re - 2.0).abs() < 1e-12 && e < 1e-10);
        assert!((loglog_slope(&s, &s.iter().map(|x| 3.0 / x).collect::<Vec<_>>()) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_peaked_integrand() {
        // one dual pair: integrand is smooth; the left side at small s is close to the right side
        let pb = LimitProblem::new(&triple_b(), &spec()).unwrap();
        let phi = TestFunction::Constant(1.0);
        let v = pb.lhs_value(&phi, 1e-3, &QuadConfig::default(), &Sequential).unwrap();
        assert!((v.value.re - 1.5).abs() < 1e-2, "{}", v.value);
        assert!(v.error < 1e-6);
    }

    #[test]
    fn grid_doubling_within_error_estimate() {
        let pb = LimitProblem::new(&triple_a(), &spec()).unwrap();
        let phi = TestFunction::CosSum { c0: 1.0, c1: 0.3, freq: 1 };
        for s in [0.1, 0.03, 0.01] {
            let c1 = QuadConfig { grid: 16, ..Default::default() };
            let c2 = QuadConfig { grid: 32, ..Default::default() };
            let a = pb.lhs_value(&phi, s, &c1, &Sequential).unwrap();
            let b = pb.lhs_value(&phi, s, &c2, &Sequential).unwrap();
            assert!((a.value - b.value).norm() <= a.error.max(1e-13), "s={s}: {} vs {} (err {})", a.value, b.value, a.error);
        }
    }

    #[test]
    fn verify_d2_pair_and_orthogonal() {
        let cfg = VerifyConfig { s0: 0.1, steps: 6, ..Default::default() };
        for t in [triple_a(), triple_b()] {
            let rep = verify(&t, &TestFunction::Constant(1.0), &spec(), &cfg, &Sequential).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let pb = LimitProblem::new(&triple_c(), &spec()).unwrap();
        let cfg = QuadConfig { max_nodes: 1000, ..Default::default() };
        assert!(matches!(
            pb.lhs_value(&TestFunction::Constant(1.0), 0.01, &cfg, &Sequential),
            Err(LimitError::Budget { .. })
        ));
    }
}
