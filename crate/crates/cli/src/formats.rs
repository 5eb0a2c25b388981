//! JSON file formats. Exact numbers are `"p/q"` strings (Gaussian rationals
//! as `"a + b i"`), floats are base-10 strings, polynomials and words use the
//! algebra text format. See `docs/formats.md`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use certibound_core::ncalgebra::{parse_polynomial, parse_word, RuleFamily};
use certibound_core::rationalize::PreCertificate;
use certibound_core::relaxation::{AffineConstraint, BlockRole, GramStructure, NpoProblem, SdpBlock, SdpData, SdpEntry, Sense};
use certibound_core::scalar::parse_rational;
use certibound_core::sdpsolve::{FloatBlock, NumericSolution, SolveStatus};
use certibound_core::verifier::{
    CertBlock, CertPath, Certificate, ConstantWitness, ConstraintFamily, LocalizerCert, MomentCert, SpectralRecord,
    WitnessFactor, WitnessTerm,
};
use certibound_core::{HermitianMatrix, Polynomial, Rational, RewriteSystem, Scalar, VarId, VariableSet, Word};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(e: impl std::fmt::Display) -> FormatError {
    FormatError::Invalid(e.to_string())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io { path: p.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json { path: p, source })
}

/// Pretty JSON with a trailing newline; byte-stable for equal values.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), FormatError> {
    fs::write(path, to_json(v)).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn rational(s: &str) -> Result<Rational, FormatError> {
    parse_rational(s).map_err(|e| invalid(format!("{s:?}: {e}")))
}

pub fn scalar(s: &str) -> Result<Scalar, FormatError> {
    Scalar::parse(s).map_err(|e| invalid(format!("{s:?}: {e}")))
}

/// Shortest round-tripping decimal form.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_float(s: &str) -> Result<f64, FormatError> {
    s.trim().parse::<f64>().map_err(|_| invalid(format!("bad float {s:?}")))
}

fn polynomial(s: &str, vars: &VariableSet) -> Result<Polynomial, FormatError> {
    parse_polynomial(s, vars).map_err(invalid)
}

fn word(s: &str, vars: &VariableSet) -> Result<Word, FormatError> {
    parse_word(s, vars).map_err(invalid)
}

fn var_id(label: &str, vars: &VariableSet) -> Result<VarId, FormatError> {
    vars.id_of(label).ok_or_else(|| invalid(format!("unknown variable {label}")))
}

// ---------------------------------------------------------------- problems

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RuleDecl {
    Unipotent { vars: Vec<String> },
    Projector { vars: Vec<String> },
    CommutingPartition,
    PauliSite { x: String, y: String, z: String },
    Binomial { lhs: String, coeff: String, rhs: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDecl {
    pub poly: String,
    pub lower: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub rules: Vec<RuleDecl>,
    pub objective: String,
    pub sense: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inequalities: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moment_inequalities: Vec<MomentDecl>,
    /// Image label of each variable under an involutive symmetry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl ProblemFile {
    pub fn vars(&self) -> Result<VariableSet, FormatError> {
        let mut vars = VariableSet::new();
        for v in &self.variables {
            vars.push(&v.label, v.group).map_err(invalid)?;
        }
        Ok(vars)
    }

    pub fn to_problem(&self) -> Result<NpoProblem, FormatError> {
        let vars = self.vars()?;
        let mut fams = Vec::new();
        for r in &self.rules {
            let ids = |v: &[String]| v.iter().map(|l| var_id(l, &vars)).collect::<Result<Vec<_>, _>>();
            fams.push(match r {
                RuleDecl::Unipotent { vars: v } => RuleFamily::Unipotent(ids(v)?),
                RuleDecl::Projector { vars: v } => RuleFamily::Projector(ids(v)?),
                RuleDecl::CommutingPartition => RuleFamily::CommutingPartition,
                RuleDecl::PauliSite { x, y, z } => {
                    RuleFamily::PauliSite { x: var_id(x, &vars)?, y: var_id(y, &vars)?, z: var_id(z, &vars)? }
                }
                RuleDecl::Binomial { lhs, coeff, rhs } => {
                    RuleFamily::Binomial { lhs: word(lhs, &vars)?, coeff: scalar(coeff)?, rhs: word(rhs, &vars)? }
                }
            });
        }
        let objective = polynomial(&self.objective, &vars)?;
        let sense = match self.sense.as_str() {
            "maximize" | "max" => Sense::Maximize,
            "minimize" | "min" => Sense::Minimize,
            s => return Err(invalid(format!("unknown sense {s:?}"))),
        };
        let ineqs = self.inequalities.iter().map(|g| polynomial(g, &vars)).collect::<Result<Vec<_>, _>>()?;
        let moments = self
            .moment_inequalities
            .iter()
            .map(|m| Ok((polynomial(&m.poly, &vars)?, rational(&m.lower)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let rs = RewriteSystem::new(vars, fams).map_err(invalid)?;
        let mut p = NpoProblem::new(&self.name, rs, &objective, sense).map_err(invalid)?;
        for g in &ineqs {
            p = p.with_inequality(g).map_err(invalid)?;
        }
        for (m, lo) in moments {
            p = p.with_moment_inequality(&m, lo).map_err(invalid)?;
        }
        for (k, v) in &self.metadata {
            p = p.with_metadata(k, v);
        }
        Ok(p)
    }

    pub fn from_problem(p: &NpoProblem) -> Self {
        let vars = p.vars();
        let label = |x: &VarId| vars.label(*x).to_string();
        let rules = p
            .rewrite
            .families()
            .iter()
            .map(|f| match f {
                RuleFamily::Unipotent(v) => RuleDecl::Unipotent { vars: v.iter().map(label).collect() },
                RuleFamily::Projector(v) => RuleDecl::Projector { vars: v.iter().map(label).collect() },
                RuleFamily::CommutingPartition => RuleDecl::CommutingPartition,
                RuleFamily::PauliSite { x, y, z } => RuleDecl::PauliSite { x: label(x), y: label(y), z: label(z) },
                RuleFamily::Binomial { lhs, coeff, rhs } => {
                    RuleDecl::Binomial { lhs: lhs.display(vars), coeff: coeff.to_string(), rhs: rhs.display(vars) }
                }
            })
            .collect();
        ProblemFile {
            name: p.name.clone(),
            variables: vars.iter().map(|v| VariableDecl { label: v.label.clone(), group: v.group }).collect(),
            rules,
            objective: p.objective.display(vars),
            sense: String::from(match p.sense {
                Sense::Maximize => "maximize",
                Sense::Minimize => "minimize",
            }),
            inequalities: p.inequalities.iter().map(|g| g.display(vars)).collect(),
            moment_inequalities: p
                .moment_inequalities
                .iter()
                .map(|m| MomentDecl { poly: m.poly.display(vars), lower: m.lower.to_string() })
                .collect(),
            symmetry: None,
            metadata: p.metadata.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// The symmetry as a variable map, if declared.
    pub fn symmetry_map(&self) -> Result<Option<Vec<VarId>>, FormatError> {
        let Some(s) = &self.symmetry else {
            return Ok(None);
        };
        let vars = self.vars()?;
        if s.len() != vars.len() {
            return Err(invalid("symmetry must list one image per variable"));
        }
        s.iter().map(|l| var_id(l, &vars)).collect::<Result<Vec<_>, _>>().map(Some)
    }
}

pub fn read_problem(path: &Path) -> Result<(ProblemFile, NpoProblem), FormatError> {
    let f: ProblemFile = read_json(path)?;
    let p = f.to_problem().map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((f, p))
}

// ------------------------------------------------------------ relaxations

/// How the blocks were built; carried from the SDP file into the solution
/// so `certify` can rebuild the same structures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxDecl {
    pub order: usize,
    /// `dense`, `sparse` or `symmetric`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chordal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpBlockDecl {
    pub label: String,
    pub dim: usize,
    pub complex: bool,
    /// `gram:<sector>`, `localizer:<i>` or `moment:<i>`.
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDecl {
    pub word: String,
    pub lambda: bool,
    pub rhs: String,
    /// `(block, row, col, coeff)`.
    pub entries: Vec<(usize, usize, usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpFile {
    pub problem: String,
    pub relaxation: RelaxDecl,
    pub variables: Vec<VariableDecl>,
    pub blocks: Vec<SdpBlockDecl>,
    pub constraints: Vec<ConstraintDecl>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

pub fn role_string(r: &BlockRole) -> String {
    match r {
        BlockRole::Gram { sector } => format!("gram:{sector}"),
        BlockRole::Localizer { inequality } => format!("localizer:{inequality}"),
        BlockRole::Moment { index } => format!("moment:{index}"),
    }
}

pub fn parse_role(s: &str) -> Result<BlockRole, FormatError> {
    let (kind, k) = s.split_once(':').ok_or_else(|| invalid(format!("bad block role {s:?}")))?;
    let k: usize = k.parse().map_err(|_| invalid(format!("bad block role {s:?}")))?;
    match kind {
        "gram" => Ok(BlockRole::Gram { sector: k }),
        "localizer" => Ok(BlockRole::Localizer { inequality: k }),
        "moment" => Ok(BlockRole::Moment { index: k }),
        _ => Err(invalid(format!("bad block role {s:?}"))),
    }
}

impl SdpFile {
    pub fn from_sdp(problem: &str, relax: RelaxDecl, sdp: &SdpData, vars: &VariableSet) -> Self {
        SdpFile {
            problem: problem.to_string(),
            relaxation: relax,
            variables: vars.iter().map(|v| VariableDecl { label: v.label.clone(), group: v.group }).collect(),
            blocks: sdp
                .blocks
                .iter()
                .map(|b| SdpBlockDecl { label: b.label.clone(), dim: b.dim, complex: b.complex, role: role_string(&b.role) })
                .collect(),
            constraints: sdp
                .constraints
                .iter()
                .map(|c| ConstraintDecl {
                    word: c.word.display(vars),
                    lambda: c.lambda,
                    rhs: c.rhs.to_string(),
                    entries: c.entries.iter().map(|e| (e.block, e.row, e.col, e.coeff.to_string())).collect(),
                })
                .collect(),
            metadata: sdp.metadata.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn to_sdp(&self) -> Result<SdpData, FormatError> {
        let mut vars = VariableSet::new();
        for v in &self.variables {
            vars.push(&v.label, v.group).map_err(invalid)?;
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| Ok(SdpBlock { label: b.label.clone(), dim: b.dim, complex: b.complex, role: parse_role(&b.role)? }))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let mut constraints = Vec::new();
        for c in &self.constraints {
            let mut entries = Vec::new();
            for (block, row, col, coeff) in &c.entries {
                let dim = blocks.get(*block).map(|b| b.dim).ok_or_else(|| invalid(format!("entry names block {block}")))?;
                if *row >= dim || *col >= dim {
                    return Err(invalid(format!("entry ({row},{col}) outside block {block}")));
                }
                entries.push(SdpEntry { block: *block, row: *row, col: *col, coeff: scalar(coeff)? });
            }
            constraints.push(AffineConstraint { word: word(&c.word, &vars)?, entries, rhs: scalar(&c.rhs)?, lambda: c.lambda });
        }
        Ok(SdpData {
            blocks,
            constraints,
            order: self.relaxation.order,
            metadata: self.metadata.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        })
    }
}

// -------------------------------------------------------------- solutions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDecl {
    pub dim: usize,
    pub complex: bool,
    /// Row-major real part.
    pub re: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDecl {
    pub eps_feas: String,
    pub gap_tol: String,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub problem: String,
    pub relaxation: RelaxDecl,
    pub status: String,
    /// `λ_d` in maximization form.
    pub bound: String,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default = "nan_string")]
    pub primal_infeasibility: String,
    #[serde(default = "nan_string")]
    pub dual_infeasibility: String,
    #[serde(default = "nan_string")]
    pub gap: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub blocks: Vec<MatrixDecl>,
}

fn nan_string() -> String {
    String::from("NaN")
}

fn float_rows(a: &[f64], n: usize) -> Vec<Vec<String>> {
    (0..n).map(|r| (0..n).map(|c| float(a[r * n + c])).collect()).collect()
}

fn parse_rows(rows: &[Vec<String>], n: usize) -> Result<Vec<f64>, FormatError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("matrix is not {n}×{n}")));
    }
    rows.iter().flatten().map(|s| parse_float(s)).collect()
}

impl SolutionFile {
    pub fn from_solution(problem: &str, relax: RelaxDecl, sol: &NumericSolution) -> Self {
        let blocks = sol
            .blocks
            .iter()
            .map(|b| {
                let (re, im) = b.hermitian_parts();
                MatrixDecl { dim: b.dim, complex: b.complex, re: float_rows(&re, b.dim), im: b.complex.then(|| float_rows(&im, b.dim)) }
            })
            .collect();
        SolutionFile {
            problem: problem.to_string(),
            relaxation: relax,
            status: sol.status.as_str().to_string(),
            bound: float(sol.bound),
            iterations: sol.iterations,
            primal_infeasibility: float(sol.primal_infeasibility),
            dual_infeasibility: float(sol.dual_infeasibility),
            gap: float(sol.gap),
            solver: None,
            elapsed_ms: None,
            blocks,
        }
    }

    pub fn float_blocks(&self) -> Result<Vec<FloatBlock>, FormatError> {
        self.blocks
            .iter()
            .map(|m| {
                let re = parse_rows(&m.re, m.dim)?;
                let im = match (&m.im, m.complex) {
                    (Some(rows), true) => Some(parse_rows(rows, m.dim)?),
                    (None, true) => Some(vec![0.0; m.dim * m.dim]),
                    (_, false) => None,
                };
                Ok(FloatBlock::from_hermitian(&re, im.as_deref(), m.dim))
            })
            .collect()
    }

    pub fn to_solution(&self) -> Result<NumericSolution, FormatError> {
        Ok(NumericSolution {
            bound: parse_float(&self.bound)?,
            blocks: self.float_blocks()?,
            status: SolveStatus::parse(&self.status).ok_or_else(|| invalid(format!("unknown status {:?}", self.status)))?,
            iterations: self.iterations,
            primal_infeasibility: parse_float(&self.primal_infeasibility)?,
            dual_infeasibility: parse_float(&self.dual_infeasibility)?,
            gap: parse_float(&self.gap)?,
        })
    }
}

// ----------------------------------------------------------- certificates

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDecl {
    pub variable: String,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequality: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertBlockDecl {
    pub label: String,
    pub sector: usize,
    pub basis: Vec<String>,
    pub gram: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizerDecl {
    pub inequality: usize,
    pub multipliers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaDecl {
    pub index: usize,
    pub kappa: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDecl {
    pub weight: String,
    pub poly: String,
    /// `square`, `inequality:<i>` or `ideal:<polynomial>`.
    pub factor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDecl {
    pub epsilon: String,
    pub words: Vec<String>,
    pub terms: Vec<TermDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralDecl {
    pub block: String,
    pub mu_low: String,
    pub gap: String,
    pub psd: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub problem: String,
    pub order: usize,
    pub sense: String,
    /// `λ_rat` for the maximization form.
    pub bound: String,
    /// The bound in the problem's own sense (negated for minimization).
    pub user_bound: String,
    pub lambda_tilde: String,
    pub path: String,
    pub families: Vec<FamilyDecl>,
    pub blocks: Vec<CertBlockDecl>,
    #[serde(default)]
    pub localizers: Vec<LocalizerDecl>,
    #[serde(default)]
    pub moments: Vec<KappaDecl>,
    #[serde(default)]
    pub witnesses: Vec<WitnessDecl>,
    #[serde(default)]
    pub spectral: Vec<SpectralDecl>,
}

fn matrix_rows(m: &HermitianMatrix) -> Vec<Vec<String>> {
    (0..m.dim()).map(|r| (0..m.dim()).map(|c| m.get(r, c).to_string()).collect()).collect()
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<HermitianMatrix, FormatError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(invalid("Gram matrix is not square"));
    }
    let data = rows.iter().flatten().map(|s| scalar(s)).collect::<Result<Vec<_>, _>>()?;
    HermitianMatrix::from_row_major(n, data).ok_or_else(|| invalid("Gram matrix is not square"))
}

impl CertificateFile {
    pub fn from_certificate(c: &Certificate, p: &NpoProblem) -> Self {
        let vars = p.vars();
        let show = |q: &Polynomial| q.display(vars);
        CertificateFile {
            problem: c.problem.clone(),
            order: c.order,
            sense: String::from(match p.sense {
                Sense::Maximize => "maximize",
                Sense::Minimize => "minimize",
            }),
            bound: c.bound.to_string(),
            user_bound: p.user_bound(&c.bound).to_string(),
            lambda_tilde: c.lambda_tilde.to_string(),
            path: c.path.as_str().to_string(),
            families: c
                .families
                .iter()
                .map(|(x, f)| FamilyDecl {
                    variable: vars.label(*x).to_string(),
                    family: f.name().to_string(),
                    inequality: match f {
                        ConstraintFamily::Box { inequality } | ConstraintFamily::Ball { inequality } => Some(*inequality),
                        _ => None,
                    },
                })
                .collect(),
            blocks: c
                .blocks
                .iter()
                .map(|b| CertBlockDecl {
                    label: b.label.clone(),
                    sector: b.sector,
                    basis: b.basis.iter().map(show).collect(),
                    gram: matrix_rows(&b.gram),
                })
                .collect(),
            localizers: c
                .localizers
                .iter()
                .map(|l| LocalizerDecl { inequality: l.inequality, multipliers: l.multipliers.iter().map(show).collect() })
                .collect(),
            moments: c.moments.iter().map(|m| KappaDecl { index: m.index, kappa: m.kappa.to_string() }).collect(),
            witnesses: c
                .witnesses
                .iter()
                .map(|w| WitnessDecl {
                    epsilon: w.epsilon.to_string(),
                    words: w.words.iter().map(|x| x.display(vars)).collect(),
                    terms: w
                        .terms
                        .iter()
                        .map(|t| TermDecl {
                            weight: t.weight.to_string(),
                            poly: show(&t.poly),
                            factor: match &t.factor {
                                WitnessFactor::Square => String::from("square"),
                                WitnessFactor::Inequality(i) => format!("inequality:{i}"),
                                WitnessFactor::Ideal(q) => format!("ideal:{}", show(q)),
                            },
                        })
                        .collect(),
                })
                .collect(),
            spectral: c
                .spectral
                .iter()
                .map(|s| SpectralDecl { block: s.block.clone(), mu_low: s.mu_low.to_string(), gap: s.gap.to_string(), psd: s.psd })
                .collect(),
        }
    }

    pub fn to_certificate(&self, p: &NpoProblem) -> Result<Certificate, FormatError> {
        let vars = p.vars();
        let families = self
            .families
            .iter()
            .map(|f| {
                let x = var_id(&f.variable, vars)?;
                let need = || f.inequality.ok_or_else(|| invalid(format!("{} family needs an inequality index", f.family)));
                let fam = match f.family.as_str() {
                    "unipotent" => ConstraintFamily::Unipotent,
                    "projector" => ConstraintFamily::Projector,
                    "box" => ConstraintFamily::Box { inequality: need()? },
                    "ball" => ConstraintFamily::Ball { inequality: need()? },
                    s => return Err(invalid(format!("unknown constraint family {s:?}"))),
                };
                Ok((x, fam))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(CertBlock {
                    label: b.label.clone(),
                    sector: b.sector,
                    basis: b.basis.iter().map(|s| polynomial(s, vars)).collect::<Result<_, _>>()?,
                    gram: parse_matrix(&b.gram)?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let localizers = self
            .localizers
            .iter()
            .map(|l| {
                Ok(LocalizerCert {
                    inequality: l.inequality,
                    multipliers: l.multipliers.iter().map(|s| polynomial(s, vars)).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let moments = self
            .moments
            .iter()
            .map(|m| Ok(MomentCert { index: m.index, kappa: rational(&m.kappa)? }))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let witnesses = self
            .witnesses
            .iter()
            .map(|w| {
                let terms = w
                    .terms
                    .iter()
                    .map(|t| {
                        let factor = match t.factor.split_once(':') {
                            None if t.factor == "square" => WitnessFactor::Square,
                            Some(("inequality", i)) => {
                                WitnessFactor::Inequality(i.parse().map_err(|_| invalid(format!("bad factor {:?}", t.factor)))?)
                            }
                            Some(("ideal", q)) => WitnessFactor::Ideal(polynomial(q, vars)?),
                            _ => return Err(invalid(format!("bad factor {:?}", t.factor))),
                        };
                        Ok(WitnessTerm { weight: rational(&t.weight)?, poly: polynomial(&t.poly, vars)?, factor })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()?;
                Ok(ConstantWitness {
                    epsilon: rational(&w.epsilon)?,
                    words: w.words.iter().map(|s| word(s, vars)).collect::<Result<_, _>>()?,
                    terms,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let spectral = self
            .spectral
            .iter()
            .map(|s| Ok(SpectralRecord { block: s.block.clone(), mu_low: rational(&s.mu_low)?, gap: rational(&s.gap)?, psd: s.psd }))
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(Certificate {
            problem: self.problem.clone(),
            order: self.order,
            bound: rational(&self.bound)?,
            lambda_tilde: rational(&self.lambda_tilde)?,
            path: CertPath::parse(&self.path).ok_or_else(|| invalid(format!("unknown path {:?}", self.path)))?,
            blocks,
            localizers,
            moments,
            witnesses,
            families,
            spectral,
        })
    }
}

// ------------------------------------------------------- pre-certificates

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreBlockDecl {
    pub label: String,
    pub basis: Vec<String>,
    pub gram: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreCertificateFile {
    pub problem: String,
    pub lambda_tilde: String,
    pub blocks: Vec<PreBlockDecl>,
    pub localizers: Vec<LocalizerDecl>,
    pub moments: Vec<KappaDecl>,
    pub lhs: String,
}

impl PreCertificateFile {
    pub fn from_pre(pre: &PreCertificate, structures: &[GramStructure], p: &NpoProblem) -> Self {
        let vars = p.vars();
        PreCertificateFile {
            problem: p.name.clone(),
            lambda_tilde: pre.lambda.to_string(),
            blocks: pre
                .grams
                .iter()
                .map(|(k, g)| PreBlockDecl {
                    label: structures[*k].label.clone(),
                    basis: structures[*k].basis().iter().map(|b| b.display(vars)).collect(),
                    gram: matrix_rows(g),
                })
                .collect(),
            localizers: pre
                .localizers
                .iter()
                .map(|(k, c)| LocalizerDecl {
                    inequality: match structures[*k].role {
                        BlockRole::Localizer { inequality } => inequality,
                        _ => usize::MAX,
                    },
                    multipliers: certibound_core::rationalize::multiplier_polynomials(c, structures[*k].basis())
                        .iter()
                        .map(|q| q.display(vars))
                        .collect(),
                })
                .collect(),
            moments: pre
                .moments
                .iter()
                .map(|(k, kappa)| KappaDecl {
                    index: match structures[*k].role {
                        BlockRole::Moment { index } => index,
                        _ => usize::MAX,
                    },
                    kappa: kappa.to_string(),
                })
                .collect(),
            lhs: pre.lhs.display(vars),
        }
    }
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub order: usize,
    pub mode: String,
    /// Ambient basis size `s` per lifting sector.
    pub sizes: Vec<usize>,
    pub block_dims: Vec<usize>,
    pub solver_status: String,
    pub lambda_d: f64,
    /// Numerical certificate error `D_d`.
    pub d_d: f64,
    pub lambda_tilde: String,
    pub mu_low: Vec<String>,
    pub delta: String,
    pub lambda_rat: String,
    pub lambda_rat_f64: f64,
    pub user_bound: String,
    pub path: String,
    pub eta: String,
    pub gap: String,
    /// Stage timings in milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
}
