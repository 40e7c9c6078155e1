//! Command-line definitions and the command implementations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use planch_core::arith::fmt_q;
use planch_core::factor_algebra::TurnAngle;
use planch_core::field_model::LocalFieldSpec;
use planch_core::forms_orbits::{
    build_odd_so, correspond_char_poly, BilForm, CharPolyFlavor, FormError,
};
use planch_core::linalg::QMat;
use planch_core::spectral_limit::{self, LimitError, QuadConfig, VerifyConfig};
use planch_core::temp_spectrum::{
    central_quotient_relation_check, formal_degree_rhs, parameter_of, plancherel_density,
    plancherel_density_chi, weyl_order, CentralCharacter, TempError,
};
use planch_core::wd_engine::WDRep;
use thiserror::Error;

use crate::exec::RayonExecutor;
use crate::formats::{self, InputError};
use crate::report::{Field, Format, Report};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    VerificationFailed = 1,
    InputError = 2,
    Precondition = 3,
    Budget = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(#[from] InputError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) | CliError::Argument(_) => ExitCode::InputError,
            CliError::Precondition(_) => ExitCode::Precondition,
            CliError::Budget(_) => ExitCode::Budget,
        }
    }
}

impl From<TempError> for CliError {
    fn from(e: TempError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<LimitError> for CliError {
    fn from(e: LimitError) -> Self {
        match e {
            LimitError::Budget { .. } => CliError::Budget(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "planch", version, about = "Local γ-factors, Plancherel densities, spectral limits and twisted forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, alias = "report")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct FieldArgs {
    /// Residue field size q = p^f.
    #[arg(long, default_value_t = 3)]
    pub q: u64,
    /// Conductor exponent of the additive character.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub psi_level: i64,
}

impl FieldArgs {
    pub fn spec(&self) -> Result<LocalFieldSpec, CliError> {
        LocalFieldSpec::from_q(self.q, self.psi_level).map_err(|e| CliError::Argument(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepKind {
    Std,
    Sym2,
    Wedge2,
    Ad,
    AdOverA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Flavor {
    Orthogonal,
    Symplectic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// γ-factor of r∘ρ: exact form, order at 0, regularized value and values at s.
    Gamma {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long, value_enum, default_value_t = RepKind::Std)]
        r: RepKind,
        /// Comma-separated real points s at which to evaluate.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<f64>,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Plancherel densities of a tempered point of a Levi.
    Density {
        #[arg(long)]
        point: PathBuf,
        /// Angle (in turns) of the unramified central character to fix.
        #[arg(long)]
        chi: Option<String>,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Component groups of an orthogonal parameter.
    ComponentGroup {
        #[arg(long)]
        rep: PathBuf,
    },
    /// |γ*(∧²)| / |S| for a discrete orthogonal parameter.
    FdRhs {
        #[arg(long)]
        rep: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Numerical check of the singular spectral limit on one triple.
    LimitVerify {
        #[arg(long)]
        triple: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        /// `s0,steps`: evaluate at s0, s0/2, …, s0/2^(steps-1).
        #[arg(long, default_value = "0.1,6")]
        s_seq: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Base panels per unit length (at most 65536).
        #[arg(long, default_value_t = 16)]
        grid: u32,
        /// Points per coordinate on the orthogonal side.
        #[arg(long, default_value_t = 64)]
        rhs_grid: usize,
        /// Largest number of integrand evaluations per s value (at most 2^26).
        #[arg(long, default_value_t = 1 << 22)]
        max_nodes: u64,
    },
    /// Orbit, discriminant, twisted characteristic polynomial and Weyl discriminant of a form.
    ClassifyForm {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: u64,
        /// Residue degree of the field.
        #[arg(long, default_value_t = 1)]
        f: u32,
    },
    /// Characteristic polynomial of a matrix, and of ᵗΓ^{-1}Γ when invertible.
    Charpoly {
        #[arg(long)]
        matrix: PathBuf,
        /// Also report the corresponding polynomial for this flavor.
        #[arg(long, value_enum)]
        flavor: Option<Flavor>,
    },
    /// Form, ℓ and Bruhat factors of an element of N̄ in SO(2d+1).
    SoEmbed {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        ubar: PathBuf,
    },
}

fn complex(z: Complex64) -> Field {
    z.into()
}

fn read<T>(path: &PathBuf, f: impl FnOnce(&str, serde_json::Value) -> Result<T, InputError>) -> Result<T, CliError> {
    let (name, v) = formats::read_json(path)?;
    Ok(f(&name, v)?)
}

fn qmat_field(m: &QMat) -> Field {
    Field::List(m.to_rows().iter().map(|r| Field::List(r.iter().map(|x| Field::Str(fmt_q(x))).collect())).collect())
}

fn parse_angle(s: &str) -> Result<TurnAngle, CliError> {
    TurnAngle::parse(s.trim()).ok_or_else(|| CliError::Argument(format!("not a rational angle: {s:?}")))
}

/// Runs one command and returns its report and exit status.
pub fn run(cmd: &Command) -> Result<(Report, ExitCode), CliError> {
    match cmd {
        Command::Gamma { rep, r, s, field } => gamma(rep, *r, s, field).map(|r| (r, ExitCode::Ok)),
        Command::Density { point, chi, field } => density(point, chi.as_deref(), field).map(|r| (r, ExitCode::Ok)),
        Command::ComponentGroup { rep } => component_group(rep).map(|r| (r, ExitCode::Ok)),
        Command::FdRhs { rep, field } => fd_rhs(rep, field).map(|r| (r, ExitCode::Ok)),
        Command::LimitVerify { triple, phi, field, s_seq, tol, grid, rhs_grid, max_nodes } => {
            limit_verify(triple, phi, field, s_seq, *tol, *grid, *rhs_grid, *max_nodes)
        }
        Command::ClassifyForm { matrix, p, f } => classify_form(matrix, *p, *f).map(|r| (r, ExitCode::Ok)),
        Command::Charpoly { matrix, flavor } => charpoly(matrix, *flavor).map(|r| (r, ExitCode::Ok)),
        Command::SoEmbed { d, ubar } => so_embed(*d, ubar),
    }
}

fn gamma(path: &PathBuf, r: RepKind, s: &[f64], field: &FieldArgs) -> Result<Report, CliError> {
    let spec = field.spec()?;
    let rho = read(path, formats::rep_from_value)?;
    let target = match r {
        RepKind::Std => rho.clone(),
        RepKind::Sym2 => rho.sym2(),
        RepKind::Wedge2 => rho.wedge2(),
        RepKind::Ad => rho.ad_m(),
        RepKind::AdOverA => rho.ad_m_over_a().map_err(|e| CliError::Precondition(e.to_string()))?,
    };
    let g = target.gamma_factor(&spec);
    let mut rep = Report::new("gamma", "gamma factor from local L- and epsilon-factors").with_field(&spec);
    rep.set("representation", rho.to_string());
    rep.set("applied", target.to_string());
    rep.set("gamma", g.to_string());
    rep.set("ord_at_zero", g.ord_zero_at_zero());
    match g.regularized_value() {
        Ok(v) => rep.set("gamma_star", complex(v)),
        Err(e) => rep.set("gamma_star_error", e.to_string()),
    }
    if let Ok(Some(x)) = g.regularized_value_exact() {
        rep.set("gamma_star_exact", x.to_string());
    }
    let mut vals = Vec::new();
    for &x in s {
        let mut m = std::collections::BTreeMap::new();
        m.insert("s".to_string(), Field::Float(x));
        match g.evaluate(Complex64::new(x, 0.0)) {
            Ok(v) => m.insert("value".to_string(), complex(v)),
            Err(e) => m.insert("error".to_string(), Field::Str(e.to_string())),
        };
        vals.push(Field::Map(m));
    }
    rep.set("values", Field::List(vals));
    Ok(rep)
}

fn density(path: &PathBuf, chi: Option<&str>, field: &FieldArgs) -> Result<Report, CliError> {
    let spec = field.spec()?;
    let pt = read(path, formats::point_from_value)?;
    let chi = match chi {
        Some(a) => CentralCharacter::unramified(parse_angle(a)?),
        None => CentralCharacter::unramified(pt.central_angle()),
    };
    let mu = plancherel_density(&pt, &spec)?;
    let mu_chi = plancherel_density_chi(&pt, &chi, &spec)?;
    let check = central_quotient_relation_check(&pt, &chi, &spec)?;
    let mut rep = Report::new("density", "adjoint gamma value at zero on a Levi, and on the central fibre").with_field(&spec);
    rep.set("parameter", parameter_of(&pt).to_string());
    rep.set("d", pt.d() as u64);
    rep.set("central_angle", pt.central_angle().to_string());
    rep.set("weyl_order", weyl_order(&pt));
    rep.set("mu", complex(mu));
    rep.set("mu_chi", complex(mu_chi));
    rep.set("central_quotient_check", check);
    Ok(rep)
}

fn component_group(path: &PathBuf) -> Result<Report, CliError> {
    let rho: WDRep = read(path, formats::rep_from_value)?;
    let cg = rho.component_groups().map_err(|e| CliError::Precondition(e.to_string()))?;
    let mut rep = Report::new("component-group", "component groups of the centralizer in O and SO");
    rep.set("representation", rho.to_string());
    rep.set("s_plus", cg.s_plus);
    rep.set("s", cg.s);
    rep.set("ratio", cg.fiber_ratio);
    Ok(rep)
}

fn fd_rhs(path: &PathBuf, field: &FieldArgs) -> Result<Report, CliError> {
    let spec = field.spec()?;
    let rho: WDRep = read(path, formats::rep_from_value)?;
    let fd = formal_degree_rhs(&rho, &spec)?;
    let mut rep = Report::new("fd-rhs", "exterior-square gamma value over the centralizer component group").with_field(&spec);
    rep.set("representation", rho.to_string());
    rep.set("gamma_star_wedge2", complex(fd.gamma_star));
    rep.set("s", fd.s);
    rep.set("value", fd.value);
    if let Some(x) = &fd.value_exact {
        rep.set("value_exact", x.to_string());
    }
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn limit_verify(
    triple: &PathBuf,
    phi: &PathBuf,
    field: &FieldArgs,
    s_seq: &str,
    tol: f64,
    grid: u32,
    rhs_grid: usize,
    max_nodes: u64,
) -> Result<(Report, ExitCode), CliError> {
    let spec = field.spec()?;
    let t = read(triple, formats::triple_from_value)?;
    let pb = spectral_limit::LimitProblem::new(&t, &spec)?;
    let phi = read(phi, |n, v| formats::phi_from_value(n, v, &pb.k))?;
    let parts: Vec<&str> = s_seq.split(',').collect();
    let (s0, steps) = match parts.as_slice() {
        [a, b] => (
            a.trim().parse::<f64>().map_err(|_| CliError::Argument(format!("bad s0 in {s_seq:?}")))?,
            b.trim().parse::<usize>().map_err(|_| CliError::Argument(format!("bad step count in {s_seq:?}")))?,
        ),
        _ => return Err(CliError::Argument(format!("--s-seq expects s0,steps, got {s_seq:?}"))),
    };
    if !(s0 > 0.0) || steps == 0 || steps > 16 {
        return Err(CliError::Argument("--s-seq needs s0 > 0 and 1 ≤ steps ≤ 16".into()));
    }
    if !(tol > 0.0) {
        return Err(CliError::Argument("--tol must be positive".into()));
    }
    if grid == 0 || grid > 1 << 16 || rhs_grid == 0 || rhs_grid > 1 << 16 || max_nodes > 1 << 26 {
        return Err(CliError::Argument("grid sizes out of range (grid ≤ 65536, rhs-grid ≤ 65536, max-nodes ≤ 2^26)".into()));
    }
    let cfg = VerifyConfig { s0, steps, tol, quad: QuadConfig { grid, max_nodes, ..Default::default() }, rhs_grid };
    let exec = RayonExecutor::from_env();
    let r = spectral_limit::verify(&t, &phi, &spec, &cfg, &exec)?;
    let mut rep = Report::new("limit-verify", "symmetric-square singular limit against the orthogonal-locus integral").with_field(&spec);
    rep.set("d", t.d() as u64);
    rep.set("s", r.s_values.clone());
    rep.set("lhs", Field::List(r.lhs.iter().map(|&z| complex(z)).collect()));
    rep.set("lhs_quadrature_error", r.lhs_errors.clone());
    rep.set("lhs_extrapolated", complex(r.lhs_extrapolated));
    rep.set("extrapolation_error", r.extrapolation_error);
    rep.set("rhs", complex(r.rhs));
    rep.set("rhs_error", r.rhs_error);
    rep.set("abs_discrepancy", r.abs_discrepancy);
    rep.set("rel_discrepancy", r.rel_discrepancy);
    if let Some(e) = r.fit_exponent {
        rep.set("fit_exponent", e);
    }
    rep.set("nodes", r.nodes_used);
    rep.set("tol", r.tol);
    rep.set("pass", r.pass);
    Ok((rep, if r.pass { ExitCode::Ok } else { ExitCode::VerificationFailed }))
}

fn classify_form(path: &PathBuf, p: u64, f: u32) -> Result<Report, CliError> {
    if !planch_core::arith::is_prime(p) {
        return Err(CliError::Argument(format!("p = {p} is not prime")));
    }
    let m = read(path, formats::matrix_from_value)?;
    let form = BilForm::new(m)?;
    let label = form.classify_sharp(p)?;
    let mut rep = Report::new("classify-form", "orbit of the twisted action g·Γ = ᵗgΓg");
    rep.set("p", p);
    rep.set("matrix", qmat_field(&form.gram));
    rep.set("orbit", label.to_string());
    rep.set("discriminant", form.disc_twisted(p)?.label());
    rep.set("char_poly", form.char_poly_twisted()?.to_string());
    match form.weyl_discriminant_twisted(p, f) {
        Ok(w) => {
            rep.set("weyl_discriminant", fmt_q(&w.value));
            rep.set("weyl_det", fmt_q(&w.det));
        }
        Err(e) => rep.set("weyl_discriminant_error", e.to_string()),
    }
    Ok(rep)
}

fn charpoly(path: &PathBuf, flavor: Option<Flavor>) -> Result<Report, CliError> {
    let m = read(path, formats::matrix_from_value)?;
    if !m.is_square() {
        return Err(CliError::Precondition("matrix is not square".into()));
    }
    let mut rep = Report::new("charpoly", "characteristic polynomial det(T − X)");
    let cp = m.char_poly();
    rep.set("char_poly", cp.to_string());
    if let Ok(form) = BilForm::new(m.clone()) {
        if let Ok(t) = form.char_poly_twisted() {
            rep.set("char_poly_twisted", t.to_string());
        }
    }
    if let Some(fl) = flavor {
        let fl = match fl {
            Flavor::Orthogonal => CharPolyFlavor::OrthogonalEven,
            Flavor::Symplectic => CharPolyFlavor::SymplecticOdd,
        };
        rep.set("corresponding", correspond_char_poly(&cp, fl)?.to_string());
    }
    Ok(rep)
}

fn so_embed(d: usize, path: &PathBuf) -> Result<(Report, ExitCode), CliError> {
    if d == 0 || d > 16 {
        return Err(CliError::Argument("--d must be between 1 and 16".into()));
    }
    let u = read(path, formats::matrix_from_value)?;
    let emb = build_odd_so(d);
    if u.rows != emb.dim() || u.cols != emb.dim() {
        return Err(CliError::Precondition(format!("expected a {0}×{0} matrix", emb.dim())));
    }
    if !emb.is_in_nbar(&u) {
        return Err(CliError::Precondition("matrix is not in the lower unipotent radical N̄".into()));
    }
    let form = emb.b_of_g(&u)?;
    let ell = emb.ell(&u);
    let (sym, _) = form.split_sym_alt();
    let mut ok = true;
    for i in 0..d {
        for j in 0..d {
            if sym[(i, j)] != -(&ell[i] * &ell[j]) {
                ok = false;
            }
        }
    }
    let mut rep = Report::new("so-embed", "form of an element of N̄ and its Bruhat factorization");
    rep.set("d", d);
    rep.set("form", qmat_field(&form.gram));
    rep.set("ell", Field::List(ell.iter().map(|x| Field::Str(fmt_q(x))).collect()));
    rep.set("symmetric_part_is_minus_ell_squared", ok);
    match emb.m_tilde_of(&u)? {
        Some(b) => {
            let round = &(&b.n1 * &b.w) * &b.n2 == u;
            ok &= round;
            rep.set("n1", qmat_field(&b.n1));
            rep.set("w", qmat_field(&b.w));
            rep.set("n2", qmat_field(&b.n2));
            rep.set("m_tilde", qmat_field(&b.form.gram));
            rep.set("round_trip", round);
        }
        None => rep.set("bruhat", "form is degenerate"),
    }
    Ok((rep, if ok { ExitCode::Ok } else { ExitCode::VerificationFailed }))
}
