//! Both sides of each discrete Poincaré / trace inequality as quadratic forms
//! over the dof vector x = [u; û], with sharp constants from the generalized
//! eigenproblem and a boundedness verdict across refinement levels.

mod audit;
mod form;
mod forms;
mod local;
mod terms;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fields::{FieldError, HybridSpace};
use crate::linalg::{gen_eig_max_dense, GenEig, LinalgError, DEFAULT_NULL_TOL};
use crate::mesh::{build_structured, Mesh, TagRule};
use crate::polybasis::BasisError;
use crate::report::{fmt_f, loglog_slope};

pub use audit::{eigen_condensed, sample_max};
pub use form::{part_value, Layout, Part, QuadraticForm, Term};
pub use forms::{global_forms, IneqId, ALL_IDS};
pub use local::{form_simplex_poincare, form_simplex_trace, simplex_trace_coefficient, PoincareMode, POINCARE_MODES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IneqError {
    #[error("unknown inequality `{name}` (valid: {valid})")]
    UnknownId { name: String, valid: String },
    #[error("Γ is empty: choose at least one boundary face")]
    EmptyGamma,
    #[error("face {0} in Γ is not a boundary face")]
    NotBoundary(usize),
    #[error("`{0}` is a per-cell inequality and has no global form")]
    LocalOnly(&'static str),
    #[error("sample mode needs a seed")]
    MissingSeed,
    #[error("condensation failed: {0}")]
    Condensation(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Which boundary faces make up Γ on the unit square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GammaRule {
    /// x = 0
    #[default]
    Left,
    /// y = 0
    Bottom,
    /// all of ∂Ω
    All,
}

impl GammaRule {
    pub fn name(self) -> &'static str {
        match self {
            GammaRule::Left => "left",
            GammaRule::Bottom => "bottom",
            GammaRule::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<GammaRule> {
        [GammaRule::Left, GammaRule::Bottom, GammaRule::All]
            .into_iter()
            .find(|g| g.name() == s)
    }

    pub fn faces(self, mesh: &Mesh) -> Vec<usize> {
        match self {
            GammaRule::Left => mesh.boundary_faces_where(|p| p[0] < 1e-12),
            GammaRule::Bottom => mesh.boundary_faces_where(|p| p[1] < 1e-12),
            GammaRule::All => mesh.boundary_faces().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Eigen,
    Sample,
}

impl AuditMode {
    pub fn name(self) -> &'static str {
        match self {
            AuditMode::Eigen => "eigen",
            AuditMode::Sample => "sample",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub max_ratio: f64,
    pub max_slope: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            max_ratio: 4.0,
            max_slope: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub mode: AuditMode,
    /// Random draws; in eigen mode they are an extra cross-check when `seed` is set.
    pub samples: usize,
    pub seed: Option<u64>,
    pub null_tol: f64,
    pub gamma: GammaRule,
    pub thresholds: Thresholds,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            mode: AuditMode::Eigen,
            samples: 0,
            seed: None,
            null_tol: DEFAULT_NULL_TOL,
            gamma: GammaRule::Left,
            thresholds: Thresholds::default(),
        }
    }
}

/// Sharp constant of one inequality on one mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Lambda {
    Bounded(f64),
    /// B vanishes on a direction where A does not; `ratio` is A/B on the
    /// witness after round-off (typically huge or infinite).
    Unbounded {
        ratio: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditResult {
    pub id: IneqId,
    pub k: usize,
    pub level: usize,
    pub h_max: f64,
    pub n_dof: usize,
    pub mode: AuditMode,
    pub lambda: Option<Lambda>,
    /// Maximizer (or null direction) of the pencil; empty for local audits.
    pub witness: Vec<f64>,
    /// Lanczos estimate of the same eigenvalue.
    pub krylov: Option<f64>,
    pub sample_max: Option<f64>,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl AuditResult {
    /// The number the sweep verdict is built on.
    pub fn value(&self) -> Option<f64> {
        match (&self.lambda, self.sample_max) {
            (Some(Lambda::Bounded(l)), _) => Some(*l),
            (Some(Lambda::Unbounded { .. }), _) => None,
            (None, s) => s,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.lambda, Some(Lambda::Unbounded { .. }))
    }
}

/// Structured unit-square mesh with n = 2^level.
pub fn audit_mesh(level: usize) -> Mesh {
    build_structured(1 << level, TagRule::AllDirichlet)
}

fn lambda_of(g: GenEig) -> (Lambda, Vec<f64>, Option<f64>) {
    match g {
        GenEig::Bounded {
            lambda,
            witness,
            krylov,
        } => (Lambda::Bounded(lambda), witness, Some(krylov)),
        GenEig::Unbounded { witness, ratio } => (Lambda::Unbounded { ratio }, witness, None),
    }
}

/// (λ, witness, Lanczos estimate, sampled maximum) of one form pair.
pub type FormAudit = (Option<Lambda>, Vec<f64>, Option<f64>, Option<f64>);

/// Audit of a global form pair.
pub fn audit_forms(a: &QuadraticForm, b: &QuadraticForm, cfg: &AuditConfig) -> Result<FormAudit, IneqError> {
    let (lambda, witness, krylov) = match cfg.mode {
        AuditMode::Eigen => {
            let (l, w, k) = lambda_of(eigen_condensed(a, b, cfg.null_tol)?);
            (Some(l), w, k)
        }
        AuditMode::Sample => (None, vec![], None),
    };
    let sample = match (cfg.mode, cfg.seed) {
        (AuditMode::Sample, None) => return Err(IneqError::MissingSeed),
        (_, Some(seed)) if cfg.samples > 0 => Some(sample_max(a, b, cfg.samples, seed).0),
        _ => None,
    };
    Ok((lambda, witness, krylov, sample))
}

/// Per-cell audits report the worst normalized constant over the mesh:
/// λ·|K|/|e| for the trace inequality, λ/diam(K)² for Poincaré.
fn audit_local(id: IneqId, space: &HybridSpace, cfg: &AuditConfig) -> Result<(Option<Lambda>, Option<f64>), IneqError> {
    let m = space.mesh();
    let mut pencils = Vec::new();
    for c in 0..m.n_cells() {
        if id == IneqId::SimplexTrace {
            for l in 0..3 {
                let (a, b) = form_simplex_trace(space, c, l);
                let f = m.cell_faces(c)[l].face;
                pencils.push((a, b, m.area(c) / m.face_length(f)));
            }
        } else {
            for mode in POINCARE_MODES {
                let (a, b) = form_simplex_poincare(space, c, mode);
                pencils.push((a, b, m.diameter(c).powi(-2)));
            }
        }
    }
    let mut lambda = None;
    if cfg.mode == AuditMode::Eigen {
        let mut worst = Lambda::Bounded(0.0);
        for (a, b, scale) in &pencils {
            match lambda_of(gen_eig_max_dense(a.as_ref(), b.as_ref(), cfg.null_tol)?).0 {
                Lambda::Bounded(l) => {
                    if let Lambda::Bounded(w) = worst {
                        worst = Lambda::Bounded(w.max(l * scale));
                    }
                }
                u => worst = u,
            }
        }
        lambda = Some(worst);
    }
    let sample = match (cfg.mode, cfg.seed) {
        (AuditMode::Sample, None) => return Err(IneqError::MissingSeed),
        (_, Some(seed)) if cfg.samples > 0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let best = pencils
                .iter()
                .map(|(a, b, s)| s * audit::sample_max_dense(a, b, cfg.samples, &mut rng))
                .fold(0.0, f64::max);
            Some(best)
        }
        _ => None,
    };
    Ok((lambda, sample))
}

/// Audit inequality `id` with degree `k` on level `level`.
pub fn audit(id: IneqId, k: usize, level: usize, cfg: &AuditConfig) -> Result<AuditResult, IneqError> {
    let space = HybridSpace::new(audit_mesh(level), k)?;
    let h_max = space.h();
    let mut res = AuditResult {
        id,
        k,
        level,
        h_max,
        n_dof: 0,
        mode: cfg.mode,
        lambda: None,
        witness: vec![],
        krylov: None,
        sample_max: None,
        samples: cfg.samples,
        seed: cfg.seed,
    };
    if id.is_local() {
        res.n_dof = space.nb();
        let (l, s) = audit_local(id, &space, cfg)?;
        res.lambda = l;
        res.sample_max = s;
    } else {
        let gamma = cfg.gamma.faces(space.mesh());
        let (a, b) = global_forms(id, &space, &gamma)?;
        res.n_dof = a.n();
        let (l, w, kr, s) = audit_forms(&a, &b, cfg)?;
        res.lambda = l;
        res.witness = w;
        res.krylov = kr;
        res.sample_max = s;
    }
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub ratio: f64,
    pub slope: f64,
    pub unbounded: usize,
    pub pass: bool,
}

/// Boundedness certificate: at least four levels, no unbounded audit,
/// max/min ≤ max_ratio and |slope of log λ vs log h| ≤ max_slope.
pub fn verdict(rows: &[AuditResult], th: Thresholds) -> Verdict {
    let unbounded = rows.iter().filter(|r| r.is_unbounded()).count();
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.value().map(|v| (r.h_max, v))).collect();
    let max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ratio = if pts.is_empty() {
        f64::NAN
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    };
    let slope = if pts.iter().all(|p| p.1 > 0.0) {
        loglog_slope(&pts)
    } else {
        f64::NAN
    };
    Verdict {
        ratio,
        slope,
        unbounded,
        pass: unbounded == 0 && rows.len() >= 4 && ratio <= th.max_ratio && slope.abs() <= th.max_slope,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub rows: Vec<AuditResult>,
    pub verdict: Verdict,
}

/// Audits on levels 1..=levels (n = 2, 4, …, 2^levels).
pub fn sweep(id: IneqId, k: usize, levels: usize, cfg: &AuditConfig) -> Result<Sweep, IneqError> {
    let rows = (1..=levels)
        .map(|l| audit(id, k, l, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = verdict(&rows, cfg.thresholds);
    Ok(Sweep { rows, verdict })
}

pub const CSV_HEADER: &str = "inequality,k,level,h_max,n_dof,mode,lambda,sample_max,samples,seed,verdict";

impl Sweep {
    pub fn csv_lines(&self) -> Vec<String> {
        let v = if self.verdict.pass { "pass" } else { "fail" };
        self.rows
            .iter()
            .map(|r| {
                let lambda = match &r.lambda {
                    Some(Lambda::Bounded(l)) => fmt_f(*l),
                    Some(Lambda::Unbounded { .. }) => "unbounded".into(),
                    None => String::new(),
                };
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.id.name(),
                    r.k,
                    r.level,
                    fmt_f(r.h_max),
                    r.n_dof,
                    r.mode.name(),
                    lambda,
                    r.sample_max.map(fmt_f).unwrap_or_default(),
                    r.samples,
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    v
                )
            })
            .collect()
    }
}
