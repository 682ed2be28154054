//! HDG discretization of the mixed-boundary Poisson problem
//!
//! ```text
//!   p = -∇u,  ∇·p = f  in Ω,   u = u_D on Γ_D,   -p·n = u_N on Γ_N,
//! ```
//!
//! with numerical flux p̂·n = p·n + τ(u − û). Cell unknowns (p, u) are
//! eliminated per cell, leaving a symmetric positive definite system in the
//! skeleton unknown û. Dirichlet faces are eliminated strongly with the face
//! L² projection of u_D.

mod checks;
mod experiments;
mod problems;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use thiserror::Error;

use crate::fields::{CellField, FieldError, HybridSpace, SkeletonField, VectorCellField};
use crate::linalg::{LinalgError, SolveInfo, SparseSymmetric, TripletBuilder};
use crate::mesh::{BoundaryTag, Point};
use crate::polybasis::{quad_triangle, BasisError};

pub use checks::{
    dirichlet_estimate_check, energy_check, residual_check, stability_energy, EnergyReport, ResidualReport,
};
pub use experiments::{
    converge, solve_level, stability_sweep, stability_verdict, HdgRow, StabilityThresholds, StabilityVerdict,
    CSV_HEADER,
};
pub use problems::{problem, problem_names, Exact, Problem, ProblemKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HdgError {
    #[error("stabilization τ must be positive and finite (got {0})")]
    Tau(f64),
    #[error("local solve failed on cell {0}: block is not positive definite")]
    SingularLocal(usize),
    #[error("pure Neumann problem needs a gauge: use gauge=skeleton-mean-zero")]
    MissingGauge,
    #[error("gauge requested but the problem has Dirichlet faces")]
    UnneededGauge,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown problem `{name}` (valid: {valid})")]
    UnknownProblem { name: String, valid: String },
}

pub type ScalarFn = Box<dyn Fn(Point) -> f64 + Send + Sync>;

/// Data of the boundary value problem. `f` is projected onto U_h^k with a
/// rule of exactness `f_exactness` (2k+2 when `None`).
pub struct BvpData {
    pub f: ScalarFn,
    pub u_d: ScalarFn,
    pub u_n: ScalarFn,
    pub tau: f64,
    pub f_exactness: Option<usize>,
}

impl BvpData {
    pub fn new(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        u_d: impl Fn(Point) -> f64 + Send + Sync + 'static,
        u_n: impl Fn(Point) -> f64 + Send + Sync + 'static,
        tau: f64,
    ) -> Self {
        BvpData {
            f: Box::new(f),
            u_d: Box::new(u_d),
            u_n: Box::new(u_n),
            tau,
            f_exactness: None,
        }
    }

    pub fn zero(tau: f64) -> Self {
        BvpData::new(|_| 0.0, |_| 0.0, |_| 0.0, tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    None,
    /// ∫_{∂Ω} û ds = 0, imposed through a rank-one bordered system.
    SkeletonMeanZero,
}

/// p = Cᵀu − Σ_l E_l û_l per cell: the exact local solve of
/// (p, q)_K = (u, ∇·q)_K − ⟨û, q·n⟩_{∂K} with orthonormal mass.
pub fn flux_from_primal(space: &HybridSpace, u: &CellField, uh: &SkeletonField) -> VectorCellField {
    let m = space.mesh();
    let nb = space.nb();
    let mut p = VectorCellField::zeros(space.k(), m.n_cells());
    for c in 0..m.n_cells() {
        let kr = space.kernels(c);
        let ub = u.block(c);
        let out = p.block_mut(c);
        for (r, o) in out.iter_mut().enumerate().take(2 * nb) {
            *o = (0..nb).map(|j| kr.div[(j, r)] * ub[j]).sum();
        }
        for l in 0..3 {
            let t = &kr.trace[l];
            let n = kr.normals[l];
            let ul = uh.block(kr.faces[l]);
            for i in 0..nb {
                let s: f64 = ul.iter().enumerate().map(|(mm, v)| t[(mm, i)] * v).sum();
                out[i] -= n[0] * s;
                out[nb + i] -= n[1] * s;
            }
        }
    }
    p
}

/// Per-cell matrices of the condensation.
#[derive(Clone, Debug)]
struct Local {
    /// A_K⁻¹ B_K (nb × 3nf).
    ainv_b: Mat<f64>,
    /// A_K⁻¹ F_K.
    ainv_f: Vec<f64>,
}

/// Skeleton system after static condensation, restricted to free face dofs.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// Global face dof → free index.
    free_index: Vec<Option<usize>>,
    /// Dirichlet values (projection of u_D) on Γ_D dofs, zero elsewhere.
    pub dirichlet: SkeletonField,
    /// Load vector of f_h per cell.
    pub load: CellField,
    /// ⟨u_N, ψ_m⟩ on Neumann faces.
    pub neumann: SkeletonField,
    pub tau: f64,
    locals: Vec<Local>,
    pure_neumann: bool,
}

impl CondensedSystem {
    pub fn n_free(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_pure_neumann(&self) -> bool {
        self.pure_neumann
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: CellField,
    pub uhat: SkeletonField,
    pub p: VectorCellField,
    pub info: SolveInfo,
    /// Multiplier of the gauge constraint (zero without gauge).
    pub gauge_multiplier: f64,
}

/// Local matrices A_K, B_K and the face-coupling Gram EᵀE.
pub(crate) fn local_blocks(space: &HybridSpace, c: usize, tau: f64) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
    let kr = space.kernels(c);
    let nb = space.nb();
    let nf = space.nf();
    let e = Mat::from_fn(2 * nb, 3 * nf, |r, col| {
        let l = col / nf;
        kr.normals[l][r / nb] * kr.trace[l][(col % nf, r % nb)]
    });
    let mut a = &kr.div * kr.div.transpose();
    let mut b = &kr.div * &e;
    for l in 0..3 {
        let t = &kr.trace[l];
        a += (t.transpose() * t) * tau;
        for i in 0..nb {
            for mm in 0..nf {
                b[(i, l * nf + mm)] += tau * t[(mm, i)];
            }
        }
    }
    let ete = e.transpose() * &e;
    (a, b, ete)
}

pub fn assemble_condensed(space: &HybridSpace, data: &BvpData) -> Result<CondensedSystem, HdgError> {
    let tau = data.tau;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(HdgError::Tau(tau));
    }
    let m = space.mesh();
    let (nb, nf) = (space.nb(), space.nf());
    let k = space.k();
    let load = match data.f_exactness {
        Some(deg) => space.project_cell_with(&quad_triangle(deg)?, &data.f),
        None => space.project_cell(&data.f),
    };
    let dir_faces: Vec<usize> = m.faces_with_tag(BoundaryTag::Dirichlet).collect();
    let neu_faces: Vec<usize> = m.faces_with_tag(BoundaryTag::Neumann).collect();
    let dirichlet = space.project_faces(dir_faces.iter().copied(), &data.u_d);
    let neumann = space.project_faces(neu_faces.iter().copied(), &data.u_n);

    let mut free_index = vec![None; m.n_faces() * nf];
    let mut n_free = 0;
    for f in 0..m.n_faces() {
        if m.face(f).tag != BoundaryTag::Dirichlet {
            for mm in 0..nf {
                free_index[f * nf + mm] = Some(n_free);
                n_free += 1;
            }
        }
    }
    let mut trip = TripletBuilder::new(n_free);
    let mut rhs = vec![0.0; n_free];
    for f in &neu_faces {
        for mm in 0..nf {
            rhs[free_index[f * nf + mm].unwrap()] += neumann.block(*f)[mm];
        }
    }
    let mut locals = Vec::with_capacity(m.n_cells());
    for c in 0..m.n_cells() {
        let (a, b, ete) = local_blocks(space, c, tau);
        let llt = a.llt(Side::Lower).map_err(|_| HdgError::SingularLocal(c))?;
        let ainv_b = llt.solve(&b);
        let fk = Mat::from_fn(nb, 1, |i, _| load.block(c)[i]);
        let ainv_f_m = llt.solve(&fk);
        let ainv_f: Vec<f64> = (0..nb).map(|i| ainv_f_m[(i, 0)]).collect();
        // S_K = EᵀE + τI − BᵀA⁻¹B, r_K = BᵀA⁻¹F
        let mut s = ete - b.transpose() * &ainv_b;
        for i in 0..3 * nf {
            s[(i, i)] += tau;
        }
        let r: Vec<f64> = (0..3 * nf)
            .map(|a_| (0..nb).map(|i| b[(i, a_)] * ainv_f[i]).sum())
            .collect();
        let faces = space.kernels(c).faces;
        let gidx = |a_: usize| faces[a_ / nf] * nf + a_ % nf;
        for a_ in 0..3 * nf {
            let ga = gidx(a_);
            let Some(ia) = free_index[ga] else { continue };
            rhs[ia] += r[a_];
            for b_ in 0..3 * nf {
                let gb = gidx(b_);
                match free_index[gb] {
                    Some(ib) if ib <= ia => trip.add(ia, ib, 0.5 * (s[(a_, b_)] + s[(b_, a_)])),
                    Some(_) => {}
                    None => {
                        let ud = dirichlet.coef[gb];
                        rhs[ia] -= s[(a_, b_)] * ud;
                    }
                }
            }
        }
        locals.push(Local { ainv_b, ainv_f });
    }
    debug_assert_eq!(load.k, k);
    Ok(CondensedSystem {
        matrix: trip.build(),
        rhs,
        free_index,
        dirichlet,
        load,
        neumann,
        tau,
        locals,
        pure_neumann: dir_faces.is_empty(),
    })
}

pub fn solve(space: &HybridSpace, sys: &CondensedSystem, gauge: Gauge) -> Result<Solution, HdgError> {
    let m = space.mesh();
    let nf = space.nf();
    let (x, info, mult) = match (sys.pure_neumann, gauge) {
        (true, Gauge::None) => return Err(HdgError::MissingGauge),
        (false, Gauge::SkeletonMeanZero) => return Err(HdgError::UnneededGauge),
        (false, Gauge::None) => {
            let (x, info) = sys.matrix.solve_spd(&sys.rhs)?;
            (x, info, 0.0)
        }
        (true, Gauge::SkeletonMeanZero) => {
            // Bordered system [M c; cᵀ 0][x; λ] = [b; 0] with M z = 0 for the
            // constant mode z. Then λ = zᵀb / zᵀc, and cᵀx = 0 lets us solve
            // (M + ccᵀ) x = b − λc instead, which is SPD and keeps M sparse.
            let n = sys.n_free();
            let mut c = vec![0.0; n];
            let mut z = vec![0.0; n];
            for f in 0..m.n_faces() {
                let i = sys.free_index[f * nf].unwrap();
                let s = m.face_length(f).sqrt();
                z[i] = s;
                if !m.face(f).is_interior() {
                    c[i] = s;
                }
            }
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let lambda = dot(&z, &sys.rhs) / dot(&z, &c);
            let b: Vec<f64> = sys.rhs.iter().zip(&c).map(|(bi, ci)| bi - lambda * ci).collect();
            let (x, info) = sys.matrix.solve_spd_rank_one(&c, &b)?;
            (x, info, lambda)
        }
    };
    let mut uhat = sys.dirichlet.clone();
    for (g, idx) in sys.free_index.iter().enumerate() {
        if let Some(i) = idx {
            uhat.coef[g] = x[*i];
        }
    }
    let u = recover_u(space, sys, &uhat);
    let p = flux_from_primal(space, &u, &uhat);
    Ok(Solution {
        u,
        uhat,
        p,
        info,
        gauge_multiplier: mult,
    })
}

/// u_K = A_K⁻¹(F_K + B_K û_K).
fn recover_u(space: &HybridSpace, sys: &CondensedSystem, uhat: &SkeletonField) -> CellField {
    let m = space.mesh();
    let (nb, nf) = (space.nb(), space.nf());
    let mut u = CellField::zeros(space.k(), m.n_cells());
    for c in 0..m.n_cells() {
        let loc = &sys.locals[c];
        let faces = space.kernels(c).faces;
        let out = u.block_mut(c);
        for (i, o) in out.iter_mut().enumerate().take(nb) {
            let mut s = loc.ainv_f[i];
            for a_ in 0..3 * nf {
                s += loc.ainv_b[(i, a_)] * uhat.block(faces[a_ / nf])[a_ % nf];
            }
            *o = s;
        }
    }
    u
}

/// Assemble and solve in one go, picking the gauge from the boundary tags.
pub fn solve_bvp(space: &HybridSpace, data: &BvpData) -> Result<(CondensedSystem, Solution), HdgError> {
    let sys = assemble_condensed(space, data)?;
    let gauge = if sys.pure_neumann {
        Gauge::SkeletonMeanZero
    } else {
        Gauge::None
    };
    let sol = solve(space, &sys, gauge)?;
    Ok((sys, sol))
}

#[cfg(test)]
mod tests;
