//! Bilinear forms on `V = F^d` as points of the twisted space of `GL(V)`:
//! the split into symmetric and alternating parts, the classification of
//! the orbits `γ_t` and `γ_0`, discriminants, twisted characteristic
//! polynomials, the twisted Weyl discriminant, and the embedding of the
//! twisted space into `SO(2d + 1)`.
//!
//! Matrices act on column vectors and `B(x, y) = ᵗx Γ y`. The group acts by
//! change of basis, `Γ ↦ ᵗg Γ g`.

use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::arith::{pow_q, qi, qr, Q};
use crate::field_model::{square_class, valuation, FieldError, QuadraticCharacter, SquareClass};
use crate::linalg::{Poly, QMat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormError {
    NotSquare { rows: usize, cols: usize },
    Degenerate,
    NotRegular { fixed_dim: usize, expected: usize, multiplicity: usize },
    NotMonic,
    NotSymmetric,
    OddDimension(usize),
    NotInGroup(&'static str),
    NotInNbar(&'static str),
    Field(FieldError),
}

impl fmt::Display for FormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormError::NotSquare { rows, cols } => write!(f, "matrix is {rows}×{cols}, expected square"),
            FormError::Degenerate => write!(f, "form is degenerate (det = 0)"),
            FormError::NotRegular { fixed_dim, expected, multiplicity } => write!(
                f,
                "form is not regular: eigenvalue 1 of θ has geometric multiplicity {fixed_dim} and algebraic multiplicity {multiplicity}, both must equal {expected}"
            ),
            FormError::NotMonic => write!(f, "polynomial is not monic"),
            FormError::NotSymmetric => write!(f, "Gram matrix is not symmetric"),
            FormError::OddDimension(n) => write!(f, "quadratic space of odd dimension {n}"),
            FormError::NotInGroup(why) => write!(f, "matrix is not in SO(U, Q): {why}"),
            FormError::NotInNbar(why) => write!(f, "matrix is not in the opposite unipotent radical: {why}"),
            FormError::Field(e) => write!(f, "{e}"),
        }
    }
}

impl From<FieldError> for FormError {
    fn from(e: FieldError) -> Self {
        FormError::Field(e)
    }
}

/// A bilinear form given by its Gram matrix `Γ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilForm {
    pub gram: QMat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitLabel {
    GammaT(SquareClass),
    Gamma0,
    OutsideSharp,
}

impl fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitLabel::GammaT(t) => write!(f, "gamma_t({})", t.label()),
            OrbitLabel::Gamma0 => write!(f, "gamma_0"),
            OrbitLabel::OutsideSharp => write!(f, "outside_sharp"),
        }
    }
}

impl BilForm {
    pub fn new(gram: QMat) -> Result<Self, FormError> {
        if !gram.is_square() {
            return Err(FormError::NotSquare { rows: gram.rows, cols: gram.cols });
        }
        Ok(BilForm { gram })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        BilForm::new(QMat::from_i64(rows)).expect("square literal")
    }

    pub fn dim(&self) -> usize {
        self.gram.rows
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.gram.det().is_zero()
    }

    fn require_nondegenerate(&self) -> Result<(), FormError> {
        if self.is_nondegenerate() {
            Ok(())
        } else {
            Err(FormError::Degenerate)
        }
    }

    /// `(Γ + ᵗΓ, Γ − ᵗΓ)`
    pub fn split_sym_alt(&self) -> (QMat, QMat) {
        let t = self.gram.transpose();
        (&self.gram + &t, &self.gram - &t)
    }

    /// `Γ ↦ ᵗg Γ g`
    pub fn act(&self, g: &QMat) -> BilForm {
        BilForm { gram: &(&g.transpose() * &self.gram) * g }
    }

    pub fn scale(&self, a: &Q) -> BilForm {
        BilForm { gram: self.gram.scale(a) }
    }

    pub fn classify_sharp(&self, p: u64) -> Result<OrbitLabel, FormError> {
        self.require_nondegenerate()?;
        let d = self.dim();
        let (s, a) = self.split_sym_alt();
        let alt_max = if d.is_multiple_of(2) { d } else { d - 1 };
        if s.is_zero() {
            return Ok(if d.is_multiple_of(2) { OrbitLabel::Gamma0 } else { OrbitLabel::OutsideSharp });
        }
        if s.rank() != 1 || a.rank() != alt_max {
            return Ok(OrbitLabel::OutsideSharp);
        }
        let diag = congruence_diagonalize(&s);
        let t = diag.iter().find(|x| !x.is_zero()).expect("rank one");
        Ok(OrbitLabel::GammaT(square_class(p, t)?))
    }

    /// Square class of `det Γ`.
    pub fn disc_twisted(&self, p: u64) -> Result<SquareClass, FormError> {
        self.require_nondegenerate()?;
        Ok(square_class(p, &self.gram.det())?)
    }

    /// `det(T − ᵗΓ^{-1} Γ)`
    pub fn char_poly_twisted(&self) -> Result<Poly, FormError> {
        let inv = self.gram.transpose().inverse().ok_or(FormError::Degenerate)?;
        Ok((&inv * &self.gram).char_poly())
    }

    /// Matrix of `X ↦ −Γ^{-1} ᵗX Γ` on `𝔤𝔩_d` in the basis `E_{ij}` ordered row by row.
    pub fn theta_matrix(&self) -> Result<QMat, FormError> {
        let d = self.dim();
        let g = &self.gram;
        let gi = g.inverse().ok_or(FormError::Degenerate)?;
        let mut th = QMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // image of E_ij: −Γ^{-1} E_ji Γ, entry (a, b) = −Γ^{-1}[a][j] Γ[i][b]
                for a in 0..d {
                    for b in 0..d {
                        th[(a * d + b, i * d + j)] = -(&gi[(a, j)] * &g[(i, b)]);
                    }
                }
            }
        }
        Ok(th)
    }

    pub fn weyl_discriminant_twisted(&self, p: u64, f: u32) -> Result<WeylDiscriminant, FormError> {
        let d = self.dim();
        let th = self.theta_matrix()?;
        let n = d * d;
        let fixed_dim = n - (&th - &QMat::identity(n)).rank();
        let cp = th.char_poly();
        let multiplicity = cp.root_multiplicity(&Q::one());
        let expected = d / 2;
        if fixed_dim != expected || multiplicity != expected {
            return Err(FormError::NotRegular { fixed_dim, expected, multiplicity });
        }
        let mut rest = cp;
        for _ in 0..multiplicity {
            rest = rest.div_linear(&Q::one()).expect("root of known multiplicity");
        }
        let det = rest.eval(&Q::one());
        let v = valuation(p, &det)?;
        let value = pow_q(&qi(p as i64), -v * f as i64);
        Ok(WeylDiscriminant { fixed_dim, det, value })
    }
}

impl fmt::Display for BilForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gram)
    }
}

/// `D(γ) = |det(1 − θ_Γ | 𝔪/𝔪_γ)|` with the determinant itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylDiscriminant {
    pub fixed_dim: usize,
    pub det: Q,
    pub value: Q,
}

/// Diagonal entries of a congruence diagonalization `ᵗP S P` of a symmetric matrix.
pub fn congruence_diagonalize(s: &QMat) -> Vec<Q> {
    let n = s.rows;
    let mut m = s.clone();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        if m[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                swap_sym(&mut m, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !m[(k, j)].is_zero()) {
                // row/column j added to k gives diagonal 2·m[k][j]
                add_sym(&mut m, k, j, &Q::one());
            }
        }
        let piv = m[(k, k)].clone();
        if !piv.is_zero() {
            for i in k + 1..n {
                if !m[(i, k)].is_zero() {
                    let c = -(&m[(i, k)] / &piv);
                    add_sym(&mut m, i, k, &c);
                }
            }
        }
        out.push(piv);
    }
    out
}

fn swap_sym(m: &mut QMat, a: usize, b: usize) {
    let n = m.rows;
    for j in 0..n {
        let t = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = t;
    }
}

/// Row `dst += c · row src`, then column `dst += c · column src`.
fn add_sym(m: &mut QMat, dst: usize, src: usize, c: &Q) {
    let n = m.rows;
    for j in 0..n {
        let v = &m[(src, j)] * c;
        m[(dst, j)] += v;
    }
    for i in 0..n {
        let v = &m[(i, src)] * c;
        m[(i, dst)] += v;
    }
}

/// `J = [[0, 1], [−1, 0]]` repeated along the diagonal.
fn symplectic_blocks(m: &mut QMat, from: usize, pairs: usize) {
    for k in 0..pairs {
        let i = from + 2 * k;
        m[(i, i + 1)] = Q::one();
        m[(i + 1, i)] = -Q::one();
    }
}

/// A form in the orbit `γ_t`: `[[t/2, 1], [−1, 0]] ⊕ J ⊕ …` for even `d`,
/// `[t/2] ⊕ J ⊕ …` for odd `d`.
pub fn gamma_t_representative(t: &SquareClass, d: usize) -> BilForm {
    assert!(d >= 1, "forms need d >= 1");
    let half_t = t.representative() * qr(1, 2);
    let mut m = QMat::zeros(d, d);
    m[(0, 0)] = half_t;
    if d.is_multiple_of(2) {
        symplectic_blocks(&mut m, 0, d / 2);
    } else {
        symplectic_blocks(&mut m, 1, d / 2);
    }
    BilForm { gram: m }
}

/// The standard alternating form `J ⊕ … ⊕ J` (even `d`).
pub fn gamma_0_representative(d: usize) -> BilForm {
    assert!(d.is_multiple_of(2) && d > 0, "alternating forms need even d");
    let mut m = QMat::zeros(d, d);
    symplectic_blocks(&mut m, 0, d / 2);
    BilForm { gram: m }
}

/// `a_λ = diag(λ, λ^{-1}, 1, …, 1)` for even `d`. Acting on the
/// representative of `γ_t` it keeps the orbit and tends to `γ_0` as `λ → 0`.
pub fn closure_family(d: usize, lambda: &Q) -> QMat {
    assert!(d.is_multiple_of(2) && d > 0, "closure family needs even d");
    let mut a = QMat::identity(d);
    a[(0, 0)] = lambda.clone();
    a[(1, 1)] = lambda.recip();
    a
}

/// The limit of `ᵗa_λ Γ a_λ` as `λ → 0` for `Γ = gamma_t_representative(t, d)`.
pub fn closure_limit(t: &SquareClass, d: usize) -> BilForm {
    let mut g = gamma_t_representative(t, d).gram;
    g[(0, 0)] = Q::zero();
    BilForm { gram: g }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharPolyFlavor {
    /// `χ(−T)`, for a symmetric form of even dimension.
    OrthogonalEven,
    /// `χ(T)(T − 1)`, for an alternating form.
    SymplecticOdd,
}

pub fn correspond_char_poly(chi: &Poly, flavor: CharPolyFlavor) -> Result<Poly, FormError> {
    if !chi.is_monic() {
        return Err(FormError::NotMonic);
    }
    Ok(match flavor {
        CharPolyFlavor::OrthogonalEven => {
            let r = chi.reflect();
            if r.is_monic() {
                r
            } else {
                Poly::new(r.coeffs().iter().map(|x| -x.clone()).collect())
            }
        }
        CharPolyFlavor::SymplecticOdd => chi * &Poly::linear(Q::one()),
    })
}

/// A quadratic space of even dimension `2n` with `disc = (−1)^n det`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSpace {
    pub gram: QMat,
    pub disc: SquareClass,
}

impl QuadSpace {
    pub fn new(gram: QMat, p: u64) -> Result<Self, FormError> {
        if !gram.is_square() {
            return Err(FormError::NotSquare { rows: gram.rows, cols: gram.cols });
        }
        if !gram.is_symmetric() {
            return Err(FormError::NotSymmetric);
        }
        let dim = gram.rows;
        if dim % 2 == 1 {
            return Err(FormError::OddDimension(dim));
        }
        let det = gram.det();
        if det.is_zero() {
            return Err(FormError::Degenerate);
        }
        let sign = if (dim / 2).is_multiple_of(2) { Q::one() } else { -Q::one() };
        let disc = square_class(p, &(sign * det))?;
        Ok(QuadSpace { gram, disc })
    }

    pub fn dim(&self) -> usize {
        self.gram.rows
    }
}

/// One term `χ(−t) · O(γ_t, ·)` of the distribution `I_χ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IChiTerm {
    pub t: SquareClass,
    pub sign: i8,
}

pub fn i_chi_terms(chi: &QuadraticCharacter) -> Result<Vec<IChiTerm>, FormError> {
    let minus_one = square_class(chi.p, &qi(-1))?;
    SquareClass::all(chi.p)
        .into_iter()
        .map(|t| Ok(IChiTerm { t, sign: chi.at_class(&minus_one.mul(&t))? }))
        .collect()
}

/// `U = V ⊕ L ⊕ V*` with `Q((x, λ, x*), (y, μ, y*)) = ⟨x, y*⟩ + ⟨y, x*⟩ + λμ`,
/// coordinates ordered `(V, L, V*)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddSOEmbedding {
    pub d: usize,
    pub q: QMat,
}

/// `ū = n_1 · w · n_2` with `n_1, n_2 ∈ N` and `w` in the non-identity coset
/// of `M` in its normalizer; `form` is the point of the twisted space given by `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruhatFactors {
    pub n1: QMat,
    pub w: QMat,
    pub n2: QMat,
    pub form: BilForm,
}

pub fn build_odd_so(d: usize) -> OddSOEmbedding {
    let n = 2 * d + 1;
    let mut q = QMat::zeros(n, n);
    for i in 0..d {
        q[(i, d + 1 + i)] = Q::one();
        q[(d + 1 + i, i)] = Q::one();
    }
    q[(d, d)] = Q::one();
    OddSOEmbedding { d, q }
}

impl OddSOEmbedding {
    pub fn dim(&self) -> usize {
        2 * self.d + 1
    }

    pub fn check_in_group(&self, g: &QMat) -> Result<(), FormError> {
        if g.rows != self.dim() || g.cols != self.dim() {
            return Err(FormError::NotInGroup("wrong size"));
        }
        if &(&g.transpose() * &self.q) * g != self.q {
            return Err(FormError::NotInGroup("ᵗg Q g ≠ Q"));
        }
        if !g.det().is_one() {
            return Err(FormError::NotInGroup("det g ≠ 1"));
        }
        Ok(())
    }

    /// `B_g(x, y) = Q(gx, y)` on `V`.
    pub fn b_of_g(&self, g: &QMat) -> Result<BilForm, FormError> {
        self.check_in_group(g)?;
        let full = &g.transpose() * &self.q;
        Ok(BilForm { gram: full.submatrix(0, self.d, 0, self.d) })
    }

    pub fn in_g_prime(&self, g: &QMat) -> Result<bool, FormError> {
        Ok(self.b_of_g(g)?.is_nondegenerate())
    }

    /// Element of `N̄` with `V → L` given by the row `c` and `V → V*` by
    /// `b = −½ ᵗc c + A`, `A` antisymmetric.
    pub fn nbar_element(&self, c: &[Q], a: &QMat) -> QMat {
        let d = self.d;
        assert!(c.len() == d && a.is_antisymmetric());
        let mut u = QMat::identity(self.dim());
        for j in 0..d {
            u[(d, j)] = c[j].clone();
            u[(d + 1 + j, d)] = -c[j].clone();
            for i in 0..d {
                u[(d + 1 + i, j)] = &a[(i, j)] - &c[i] * &c[j] * qr(1, 2);
            }
        }
        u
    }

    /// Element of `N` with `L → V` given by the column `a` and `V* → V` by
    /// `b = −½ a ᵗa + A`, `A` antisymmetric.
    pub fn n_element(&self, a_col: &[Q], a: &QMat) -> QMat {
        let d = self.d;
        assert!(a_col.len() == d && a.is_antisymmetric());
        let mut u = QMat::identity(self.dim());
        for i in 0..d {
            u[(i, d)] = a_col[i].clone();
            u[(d, d + 1 + i)] = -a_col[i].clone();
            for j in 0..d {
                u[(i, d + 1 + j)] = &a[(i, j)] - &a_col[i] * &a_col[j] * qr(1, 2);
            }
        }
        u
    }

    fn blocks_are(&self, g: &QMat, lower: bool) -> bool {
        let d = self.d;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let bi = if i < d { 0 } else if i == d { 1 } else { 2 };
                let bj = if j < d { 0 } else if j == d { 1 } else { 2 };
                let v = &g[(i, j)];
                let ok = if bi == bj {
                    if i == j { v.is_one() } else { v.is_zero() }
                } else if (bi > bj) == lower {
                    true
                } else {
                    v.is_zero()
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_in_n(&self, g: &QMat) -> bool {
        self.check_in_group(g).is_ok() && self.blocks_are(g, false)
    }

    pub fn is_in_nbar(&self, g: &QMat) -> bool {
        self.check_in_group(g).is_ok() && self.blocks_are(g, true)
    }

    /// `ℓ_ū(x)`: the `L`-component of `ū x` for `x ∈ V`.
    pub fn ell(&self, u: &QMat) -> Vec<Q> {
        (0..self.d).map(|j| u[(self.d, j)].clone()).collect()
    }

    /// The element of `Norm_G(M) ∖ M` attached to a nondegenerate form, with
    /// `B_w = Γ`.
    pub fn w_of_form(&self, form: &BilForm) -> Result<QMat, FormError> {
        let d = self.d;
        let x = form.gram.transpose();
        let y = form.gram.inverse().ok_or(FormError::Degenerate)?;
        let mut w = QMat::zeros(self.dim(), self.dim());
        w.set_block(0, d + 1, &y);
        w.set_block(d + 1, 0, &x);
        w[(d, d)] = Q::one();
        if !w.det().is_one() {
            w[(d, d)] = -Q::one();
        }
        Ok(w)
    }

    /// Solves `ū = n_1 w n_2`; `None` when `B_ū` is degenerate.
    pub fn m_tilde_of(&self, u: &QMat) -> Result<Option<BruhatFactors>, FormError> {
        if !self.is_in_nbar(u) {
            return Err(FormError::NotInNbar("expected a lower block-unipotent element of SO(U, Q)"));
        }
        let d = self.d;
        let b = u.submatrix(d + 1, 2 * d + 1, 0, d);
        let Some(bt_inv) = b.transpose().inverse() else { return Ok(None) };
        let c = self.ell(u);
        // n_1^{-1} has V* → V block ᵗb^{-1} and L → V column ᵗb^{-1} ᵗc
        let a1: Vec<Q> = (0..d).map(|i| (0..d).map(|k| &bt_inv[(i, k)] * &c[k]).sum()).collect();
        let mut n1_inv = QMat::identity(self.dim());
        n1_inv.set_block(0, d + 1, &bt_inv);
        for i in 0..d {
            n1_inv[(i, d)] = a1[i].clone();
            n1_inv[(d, d + 1 + i)] = -a1[i].clone();
        }
        debug_assert!(self.is_in_n(&n1_inv));
        let n1 = n1_inv.inverse().expect("unipotent");
        let rest = &n1_inv * u;
        let form = BilForm { gram: self.b_of_g(u)?.gram };
        let w = self.w_of_form(&form)?;
        let n2 = &w.inverse().expect("group element") * &rest;
        if !self.is_in_n(&n2) {
            return Err(FormError::NotInNbar("Bruhat factorization left N"));
        }
        Ok(Some(BruhatFactors { n1, w, n2, form }))
    }
}

/// `(T + 1)^a (T − 1)^b`
pub fn unipotent_fiber_poly(plus: u32, minus: u32) -> Poly {
    &Poly::from_i64(&[1, 1]).pow(plus) * &Poly::from_i64(&[-1, 1]).pow(minus)
}

/// Random-looking exact invertible matrices for conjugation tests.
pub fn unimodular_from_seed(d: usize, seed: &[i64]) -> QMat {
    let mut lo = QMat::identity(d);
    let mut up = QMat::identity(d);
    let mut k = 0;
    for i in 0..d {
        for j in 0..d {
            let v = seed.get(k % seed.len().max(1)).copied().unwrap_or(0);
            k += 1;
            if i > j {
                lo[(i, j)] = qi(v);
            } else if i < j {
                up[(i, j)] = qi(v);
            }
        }
    }
    &lo * &up
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    fn class(p: u64, x: i64) -> SquareClass {
        square_class(p, &qi(x)).unwrap()
    }

    #[test]
    fn split_examples() {
        let g = BilForm::from_i64(&[&[-1, 1], &[-1, 0]]);
        let (s, a) = g.split_sym_alt();
        assert_eq!(s, QMat::from_i64(&[&[-2, 0], &[0, 0]]));
        assert_eq!(a, QMat::from_i64(&[&[0, 2], &[-2, 0]]));
        let sym = BilForm::from_i64(&[&[1, 2], &[2, 5]]);
        assert_eq!(sym.split_sym_alt(), (sym.gram.scale(&qi(2)), QMat::zeros(2, 2)));
        let alt = gamma_0_representative(2);
        assert_eq!(alt.split_sym_alt(), (QMat::zeros(2, 2), alt.gram.scale(&qi(2))));
    }

    #[test]
    fn classify_examples() {
        let g = BilForm::from_i64(&[&[-1, 1], &[-1, 0]]);
        assert_eq!(g.classify_sharp(3).unwrap(), OrbitLabel::GammaT(SquareClass::one(3)));
        assert_eq!(gamma_0_representative(2).classify_sharp(3).unwrap(), OrbitLabel::Gamma0);
        assert_eq!(BilForm::from_i64(&[&[1, 0], &[0, 1]]).classify_sharp(3).unwrap(), OrbitLabel::OutsideSharp);
        assert_eq!(BilForm::from_i64(&[&[1, 1], &[1, 1]]).classify_sharp(3), Err(FormError::Degenerate));
        // at p = 5, −2 is a non-square
        assert_eq!(g.classify_sharp(5).unwrap(), OrbitLabel::GammaT(class(5, -2)));
        assert_ne!(class(5, -2), SquareClass::one(5));
    }

    #[test]
    fn representatives_round_trip() {
        for p in [2u64, 3, 5, 7] {
            for t in SquareClass::all(p) {
                for d in 1..6 {
                    let g = gamma_t_representative(&t, d);
                    assert_eq!(g.classify_sharp(p).unwrap(), OrbitLabel::GammaT(t), "p={p} d={d} t={t}");
                }
            }
        }
    }

    #[test]
    fn disc_examples() {
        assert_eq!(BilForm::from_i64(&[&[-1, 1], &[-1, 0]]).disc_twisted(3).unwrap(), SquareClass::one(3));
        assert_eq!(gamma_0_representative(2).disc_twisted(3).unwrap(), SquareClass::one(3));
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(gamma_0_representative(4).char_poly_twisted().unwrap(), unipotent_fiber_poly(4, 0));
        assert_eq!(BilForm::from_i64(&[&[2, 1], &[1, 3]]).char_poly_twisted().unwrap(), unipotent_fiber_poly(0, 2));
        let cp = BilForm::from_i64(&[&[-1, 1], &[-1, 0]]).char_poly_twisted().unwrap();
        assert_eq!(cp.coeffs()[0], qi(1));
        assert_eq!(cp, unipotent_fiber_poly(2, 0));
    }

    #[test]
    fn correspondence_examples() {
        for n in 1..4u32 {
            let eps_sp = unipotent_fiber_poly(2 * n, 0);
            assert_eq!(
                correspond_char_poly(&eps_sp, CharPolyFlavor::SymplecticOdd).unwrap(),
                unipotent_fiber_poly(2 * n, 1)
            );
            let eps_o = unipotent_fiber_poly(0, 2 * n);
            let c = correspond_char_poly(&eps_o, CharPolyFlavor::OrthogonalEven).unwrap();
            assert_eq!(c, unipotent_fiber_poly(2 * n, 0));
            assert_eq!(c.degree(), eps_o.degree());
        }
        assert_eq!(correspond_char_poly(&Poly::from_i64(&[1, 2]), CharPolyFlavor::SymplecticOdd), Err(FormError::NotMonic));
    }

    #[test]
    fn gamma_t_lands_in_unipotent_fiber() {
        for t in SquareClass::all(3) {
            for n in 1..4usize {
                let even = gamma_t_representative(&t, 2 * n).char_poly_twisted().unwrap();
                let target = correspond_char_poly(&unipotent_fiber_poly(0, 2 * n as u32), CharPolyFlavor::OrthogonalEven).unwrap();
                assert_eq!(even, target);
                let odd = gamma_t_representative(&t, 2 * n + 1).char_poly_twisted().unwrap();
                let target = correspond_char_poly(&unipotent_fiber_poly(2 * n as u32, 0), CharPolyFlavor::SymplecticOdd).unwrap();
                assert_eq!(odd, target);
            }
        }
    }

    #[test]
    fn weyl_discriminant_examples() {
        // d = 1: θ = −1 on a line, det(1 − θ) = 2
        let w = BilForm::from_i64(&[&[3]]).weyl_discriminant_twisted(3, 1).unwrap();
        assert_eq!((w.fixed_dim, w.det.clone(), w.value.clone()), (0, qi(2), qi(1)));
        let w2 = BilForm::from_i64(&[&[5]]).weyl_discriminant_twisted(2, 1).unwrap();
        assert_eq!(w2.value, qr(1, 2));
        let g = BilForm::from_i64(&[&[1, 2], &[0, 3]]);
        let w = g.weyl_discriminant_twisted(3, 1).unwrap();
        assert_eq!(w.fixed_dim, 1);
        let m = unimodular_from_seed(2, &[2, -1, 3]);
        assert_eq!(g.act(&m).weyl_discriminant_twisted(3, 1).unwrap().det, w.det);
        assert!(matches!(gamma_0_representative(2).weyl_discriminant_twisted(3, 1), Err(FormError::NotRegular { .. })));
    }

    #[test]
    fn closure_witness() {
        for p in [3u64, 5] {
            let t = class(p, -1);
            for d in [2usize, 4] {
                let g = gamma_t_representative(&t, d);
                for k in 1..6 {
                    let lam = qr(1, 10i64.pow(k));
                    let moved = g.act(&closure_family(d, &lam));
                    assert_eq!(moved.classify_sharp(p).unwrap(), OrbitLabel::GammaT(t));
                }
                let lim = closure_limit(&t, d);
                assert_eq!(lim.classify_sharp(p).unwrap(), OrbitLabel::Gamma0);
                // entries of ᵗa_λ Γ a_λ − limit are O(λ²)
                let lam = qr(1, 1000);
                let diff = &g.act(&closure_family(d, &lam)).gram - &lim.gram;
                assert!(diff.to_rows().iter().flatten().all(|x| num_traits::Signed::abs(x) <= qr(1, 1_000_000)));
            }
        }
    }

    #[test]
    fn quad_space_disc() {
        let h = QuadSpace::new(QMat::from_i64(&[&[0, 1], &[1, 0]]), 3).unwrap();
        assert_eq!(h.disc, SquareClass::one(3));
        assert_eq!(QuadSpace::new(QMat::from_i64(&[&[1]]), 3), Err(FormError::OddDimension(1)));
        assert_eq!(QuadSpace::new(QMat::from_i64(&[&[1, 1], &[0, 1]]), 3), Err(FormError::NotSymmetric));
    }

    #[test]
    fn i_chi_signs() {
        let triv = QuadraticCharacter::trivial(3);
        assert!(i_chi_terms(&triv).unwrap().iter().all(|t| t.sign == 1));
        let unr = QuadraticCharacter::unramified(3);
        let terms = i_chi_terms(&unr).unwrap();
        assert_eq!(terms.len(), 4);
        assert!(terms.iter().all(|t| t.sign == if t.t.odd_valuation { -1 } else { 1 }));
    }

    #[test]
    fn odd_so_examples() {
        let emb = build_odd_so(2);
        assert!(emb.q.is_symmetric());
        assert!(!emb.q.det().is_zero());
        let id = QMat::identity(5);
        assert!(!emb.in_g_prime(&id).unwrap());
        assert_eq!(emb.m_tilde_of(&id).unwrap(), None);
        let gam = BilForm::from_i64(&[&[-1, 1], &[-1, 0]]);
        let w = emb.w_of_form(&gam).unwrap();
        assert_eq!(emb.b_of_g(&w).unwrap(), gam);
        assert!(emb.in_g_prime(&w).unwrap());
        assert!(emb.check_in_group(&QMat::identity(5).scale(&qi(2))).is_err());
    }

    #[test]
    fn odd_so_worked_point() {
        let emb = build_odd_so(2);
        let a = QMat::from_i64(&[&[0, 1], &[-1, 0]]);
        let u = emb.nbar_element(&qv(&[1, 2]), &a);
        assert!(emb.is_in_nbar(&u));
        let f = emb.m_tilde_of(&u).unwrap().unwrap();
        assert_eq!(&(&f.n1 * &f.w) * &f.n2, u);
        let (s, _) = f.form.split_sym_alt();
        let l = emb.ell(&u);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(s[(i, j)], -(&l[i] * &l[j]));
            }
        }
    }

    fn small_mat(d: usize) -> impl Strategy<Value = QMat> {
        prop::collection::vec(-4i64..5, d * d).prop_map(move |v| {
            let rows: Vec<Vec<Q>> = v.chunks(d).map(|r| r.iter().map(|&x| qi(x)).collect()).collect();
            QMat::from_rows(rows).unwrap()
        })
    }

    fn invertible(d: usize) -> impl Strategy<Value = QMat> {
        prop::collection::vec(-3i64..4, d * d).prop_map(move |v| unimodular_from_seed(d, &v)).prop_flat_map(move |m| {
            (Just(m), prop::collection::vec(1i64..4, d)).prop_map(|(m, diag)| {
                let mut dm = QMat::identity(m.rows);
                for (i, x) in diag.iter().enumerate() {
                    dm[(i, i)] = qi(*x);
                }
                &m * &dm
            })
        })
    }

    fn sharp_form(d: usize) -> impl Strategy<Value = BilForm> {
        (0usize..4, prop::bool::ANY).prop_map(move |(ti, zero)| {
            let t = SquareClass::all(3)[ti];
            if zero && d.is_multiple_of(2) {
                gamma_0_representative(d)
            } else {
                gamma_t_representative(&t, d)
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn classification_is_invariant(d in 1usize..5, seed in any::<u64>()) {
            let mut rng = seed;
            let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 33) % 7) as i64 - 3 };
            let v: Vec<i64> = (0..d * d).map(|_| next()).collect();
            let m = unimodular_from_seed(d, &v);
            let mut g = QMat::zeros(d, d);
            for i in 0..d { for j in 0..d { g[(i, j)] = qi(next()); } }
            let b = BilForm { gram: g };
            prop_assume!(b.is_nondegenerate());
            let moved = b.act(&m);
            prop_assert_eq!(moved.classify_sharp(3).unwrap(), b.classify_sharp(3).unwrap());
            prop_assert_eq!(moved.char_poly_twisted().unwrap(), b.char_poly_twisted().unwrap());
            prop_assert_eq!(moved.disc_twisted(3).unwrap(), b.disc_twisted(3).unwrap());
        }
    }

    proptest! {
        #[test]
        fn sharp_orbits_invariant(b in (1usize..5).prop_flat_map(sharp_form), m in (1usize..2).prop_flat_map(|_| invertible(4))) {
            let d = b.dim();
            let m = m.submatrix(0, d, 0, d);
            prop_assume!(!m.det().is_zero());
            prop_assert_eq!(b.act(&m).classify_sharp(5).unwrap(), b.classify_sharp(5).unwrap());
        }

        #[test]
        fn scaling_covariance(d in 1usize..5, ti in 0usize..4, a in prop::sample::select(vec![1i64, 2, 3, 5, 6, 9, 10, 15])) {
            let p = 3;
            let t = SquareClass::all(p)[ti];
            let b = gamma_t_representative(&t, d);
            let ca = class(p, a);
            prop_assert_eq!(b.scale(&qi(a)).classify_sharp(p).unwrap(), OrbitLabel::GammaT(ca.mul(&t)));
        }

        #[test]
        fn twisted_char_poly_palindromic(g in small_mat(3)) {
            let b = BilForm { gram: g };
            prop_assume!(b.is_nondegenerate());
            // ᵗΓ^{-1}Γ is conjugate to its inverse: coefficients reverse up to the sign det
            let cp = b.char_poly_twisted().unwrap();
            let c = cp.coeffs();
            let n = c.len() - 1;
            let s = c[0].clone();
            prop_assert!(s == qi(1) || s == qi(-1));
            for i in 0..=n {
                prop_assert_eq!(c[i].clone(), &s * &c[n - i]);
            }
        }

        #[test]
        fn nbar_rank_one_property(d in 2usize..4, c in prop::collection::vec(-5i64..6, 3), a in prop::collection::vec(-5i64..6, 3)) {
            let emb = build_odd_so(d);
            let c: Vec<Q> = c[..d].iter().map(|&x| qr(x, 2)).collect();
            let mut am = QMat::zeros(d, d);
            let mut k = 0;
            for i in 0..d { for j in i + 1..d { am[(i, j)] = qi(a[k]); am[(j, i)] = -qi(a[k]); k += 1; } }
            let u = emb.nbar_element(&c, &am);
            prop_assert!(emb.is_in_nbar(&u));
            let b = emb.b_of_g(&u).unwrap();
            let (s, _) = b.split_sym_alt();
            let l = emb.ell(&u);
            for i in 0..d { for j in 0..d { prop_assert_eq!(s[(i, j)].clone(), -(&l[i] * &l[j])); } }
            prop_assert!(s.rank() <= 1);
            match emb.m_tilde_of(&u).unwrap() {
                Some(f) => {
                    prop_assert!(b.is_nondegenerate());
                    prop_assert!(emb.is_in_n(&f.n1) && emb.is_in_n(&f.n2));
                    prop_assert_eq!(&(&f.n1 * &f.w) * &f.n2, u);
                    prop_assert_eq!(f.form, b.clone());
                    if let OrbitLabel::GammaT(t) = b.classify_sharp(3).unwrap() {
                        prop_assert_eq!(t, class(3, -1));
                    }
                }
                None => prop_assert!(!b.is_nondegenerate()),
            }
        }
    }
}
