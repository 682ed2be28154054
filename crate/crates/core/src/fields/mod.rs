//! Coefficient containers for (u_h, û_h, p_h) and the norms, jumps, averages
//! and integrals that appear in the inequalities.
//!
//! Norms here are evaluated by quadrature on purpose: the quadratic forms in
//! `inequalities` use the Parseval shortcut, and these are the independent
//! path they are checked against.

mod csv;
mod space;

use thiserror::Error;

use crate::mesh::{BoundaryTag, Point};
use crate::polybasis::{cell_dim, face_dim, BasisError, CellMap};

pub use csv::{fields_to_csv, write_field_csv};
pub use space::HybridSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("degree mismatch: {0} vs {1}")]
    Degree(usize, usize),
    #[error("face {0} is a boundary face; jumps live on interior faces")]
    BoundaryFace(usize),
    #[error("boundary subset has zero measure")]
    EmptyGamma,
    #[error("face {0} is not a boundary face")]
    NotBoundary(usize),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// u_h ∈ U_h^k: one block of (k+1)(k+2)/2 coefficients per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    pub k: usize,
    pub coef: Vec<f64>,
}

/// û_h ∈ F_h^k: one block of k+1 coefficients per face.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonField {
    pub k: usize,
    pub coef: Vec<f64>,
}

/// p_h ∈ V_h^k: per cell, the x-component block followed by the y-component block.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorCellField {
    pub k: usize,
    pub coef: Vec<f64>,
}

/// How interior faces enter a skeleton norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counting {
    Once,
    /// Interior faces twice, i.e. Σ_K ‖·‖²_{∂K}.
    Hdg,
}

impl CellField {
    pub fn zeros(k: usize, n_cells: usize) -> Self {
        CellField {
            k,
            coef: vec![0.0; n_cells * cell_dim(k)],
        }
    }

    pub fn nb(&self) -> usize {
        cell_dim(self.k)
    }

    pub fn block(&self, c: usize) -> &[f64] {
        let nb = self.nb();
        &self.coef[c * nb..(c + 1) * nb]
    }

    pub fn block_mut(&mut self, c: usize) -> &mut [f64] {
        let nb = self.nb();
        &mut self.coef[c * nb..(c + 1) * nb]
    }

    /// ‖u‖ from coefficients alone (orthonormal bases).
    pub fn coef_norm(&self) -> f64 {
        self.coef.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl SkeletonField {
    pub fn zeros(k: usize, n_faces: usize) -> Self {
        SkeletonField {
            k,
            coef: vec![0.0; n_faces * face_dim(k)],
        }
    }

    pub fn nf(&self) -> usize {
        face_dim(self.k)
    }

    pub fn block(&self, f: usize) -> &[f64] {
        let nf = self.nf();
        &self.coef[f * nf..(f + 1) * nf]
    }

    pub fn block_mut(&mut self, f: usize) -> &mut [f64] {
        let nf = self.nf();
        &mut self.coef[f * nf..(f + 1) * nf]
    }
}

impl VectorCellField {
    pub fn zeros(k: usize, n_cells: usize) -> Self {
        VectorCellField {
            k,
            coef: vec![0.0; n_cells * 2 * cell_dim(k)],
        }
    }

    pub fn nb(&self) -> usize {
        cell_dim(self.k)
    }

    pub fn block(&self, c: usize) -> &[f64] {
        let nb = self.nb();
        &self.coef[c * 2 * nb..(c + 1) * 2 * nb]
    }

    pub fn block_mut(&mut self, c: usize) -> &mut [f64] {
        let nb = self.nb();
        &mut self.coef[c * 2 * nb..(c + 1) * 2 * nb]
    }

    pub fn coef_norm(&self) -> f64 {
        self.coef.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl HybridSpace {
    fn check_cell(&self, u: &CellField) -> Result<(), FieldError> {
        if u.k != self.k() {
            return Err(FieldError::Degree(u.k, self.k()));
        }
        Ok(())
    }

    fn check_skel(&self, u: &SkeletonField) -> Result<(), FieldError> {
        if u.k != self.k() {
            return Err(FieldError::Degree(u.k, self.k()));
        }
        Ok(())
    }

    /// Value of u at physical point `x` of cell `c`.
    pub fn eval_cell(&self, u: &CellField, c: usize, x: Point) -> f64 {
        dot(u.block(c), &self.basis().eval_cell(self.map(c), x))
    }

    /// Gradient of u at physical point `x` of cell `c`.
    pub fn grad_cell(&self, u: &CellField, c: usize, x: Point) -> [f64; 2] {
        let g = self.basis().grad_cell(self.map(c), x);
        let b = u.block(c);
        let mut r = [0.0; 2];
        for (gi, bi) in g.iter().zip(b) {
            r[0] += gi[0] * bi;
            r[1] += gi[1] * bi;
        }
        r
    }

    /// Value of û at parameter `t` of face `f`.
    pub fn eval_face(&self, u: &SkeletonField, f: usize, t: f64) -> f64 {
        dot(u.block(f), &self.basis().eval_face(self.mesh().face_length(f), t))
    }

    /// ∫_e g(x(t)) dt-weighted quadrature helper: Σ_q w_q |e| g(t_q, x_q).
    fn face_quad(&self, f: usize, mut g: impl FnMut(f64, Point) -> f64) -> f64 {
        let m = self.mesh();
        let len = m.face_length(f);
        self.basis()
            .face_rule()
            .iter()
            .map(|(t, w)| w * len * g(t, m.face_point(f, t)))
            .sum()
    }

    fn cell_quad(&self, c: usize, mut g: impl FnMut(Point) -> f64) -> f64 {
        self.basis()
            .cell_quadrature(self.map(c))
            .into_iter()
            .map(|(x, w)| w * g(x))
            .sum()
    }

    pub fn norm_l2_cells(&self, u: &CellField) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        let s: f64 = (0..self.mesh().n_cells())
            .map(|c| self.cell_quad(c, |x| self.eval_cell(u, c, x).powi(2)))
            .sum();
        Ok(s.sqrt())
    }

    pub fn seminorm_h1_broken(&self, u: &CellField) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        let s: f64 = (0..self.mesh().n_cells())
            .map(|c| {
                self.cell_quad(c, |x| {
                    let g = self.grad_cell(u, c, x);
                    g[0] * g[0] + g[1] * g[1]
                })
            })
            .sum();
        Ok(s.sqrt())
    }

    /// Σ_K ‖u|_K‖²_{∂K}, interior faces seen from both sides.
    pub fn trace_norm_skeleton(&self, u: &CellField) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        let m = self.mesh();
        let mut s = 0.0;
        for f in 0..m.n_faces() {
            for &c in m.face(f).adjacent() {
                s += self.face_quad(f, |_, x| self.eval_cell(u, c, x).powi(2));
            }
        }
        Ok(s.sqrt())
    }

    /// ‖u‖ on the boundary skeleton ∂T_h^b only.
    pub fn trace_norm_boundary(&self, u: &CellField) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        let m = self.mesh();
        let s: f64 = m
            .boundary_faces()
            .map(|f| {
                let c = m.face(f).cells[0];
                self.face_quad(f, |_, x| self.eval_cell(u, c, x).powi(2))
            })
            .sum();
        Ok(s.sqrt())
    }

    pub fn norm_skeleton(&self, u: &SkeletonField, counting: Counting) -> Result<f64, FieldError> {
        self.check_skel(u)?;
        let m = self.mesh();
        let s: f64 = (0..m.n_faces())
            .map(|f| {
                let mult = if counting == Counting::Hdg && m.face(f).is_interior() {
                    2.0
                } else {
                    1.0
                };
                mult * self.face_quad(f, |t, _| self.eval_face(u, f, t).powi(2))
            })
            .sum();
        Ok(s.sqrt())
    }

    /// ‖û‖ over the given faces, each counted once.
    pub fn norm_skeleton_on(&self, u: &SkeletonField, faces: &[usize]) -> Result<f64, FieldError> {
        self.check_skel(u)?;
        let s: f64 = faces
            .iter()
            .map(|&f| self.face_quad(f, |t, _| self.eval_face(u, f, t).powi(2)))
            .sum();
        Ok(s.sqrt())
    }

    /// ∫_e [[u]] ds = ∫_e (u⁺n⁺ + u⁻n⁻) ds, with K⁺ the lower-indexed cell.
    pub fn jump_integral(&self, u: &CellField, f: usize) -> Result<[f64; 2], FieldError> {
        self.check_cell(u)?;
        let m = self.mesh();
        let face = m.face(f);
        if !face.is_interior() {
            return Err(FieldError::BoundaryFace(f));
        }
        let n = m.face_normal(f);
        let [cp, cm] = face.cells;
        let d = self.face_quad(f, |_, x| self.eval_cell(u, cp, x) - self.eval_cell(u, cm, x));
        Ok([d * n[0], d * n[1]])
    }

    /// Piecewise-constant field of face means (1/|e|)∫_e û ds.
    pub fn face_average(&self, u: &SkeletonField) -> Result<SkeletonField, FieldError> {
        self.check_skel(u)?;
        let m = self.mesh();
        let mut out = SkeletonField::zeros(0, m.n_faces());
        for f in 0..m.n_faces() {
            let len = m.face_length(f);
            let mean = self.face_quad(f, |t, _| self.eval_face(u, f, t)) / len;
            // degree-0 face basis is |e|^{-1/2}
            out.coef[f] = mean * len.sqrt();
        }
        Ok(out)
    }

    pub fn integral_domain(&self, u: &CellField) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        Ok((0..self.mesh().n_cells())
            .map(|c| self.cell_quad(c, |x| self.eval_cell(u, c, x)))
            .sum())
    }

    fn check_gamma(&self, gamma: &[usize]) -> Result<(), FieldError> {
        let m = self.mesh();
        for &f in gamma {
            if m.face(f).is_interior() {
                return Err(FieldError::NotBoundary(f));
            }
        }
        if gamma.iter().map(|&f| m.face_length(f)).sum::<f64>() <= 0.0 {
            return Err(FieldError::EmptyGamma);
        }
        Ok(())
    }

    /// ∫_Γ û ds over a set of boundary faces.
    pub fn integral_boundary_subset(&self, u: &SkeletonField, gamma: &[usize]) -> Result<f64, FieldError> {
        self.check_skel(u)?;
        self.check_gamma(gamma)?;
        Ok(gamma
            .iter()
            .map(|&f| self.face_quad(f, |t, _| self.eval_face(u, f, t)))
            .sum())
    }

    /// ∫_Γ u ds of the cell field's boundary trace.
    pub fn integral_boundary_trace(&self, u: &CellField, gamma: &[usize]) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        self.check_gamma(gamma)?;
        let m = self.mesh();
        Ok(gamma
            .iter()
            .map(|&f| {
                let c = m.face(f).cells[0];
                self.face_quad(f, |_, x| self.eval_cell(u, c, x))
            })
            .sum())
    }

    /// ‖u − û‖ on ∂T_h with interior faces counted from both sides.
    pub fn diff_norm_skeleton(&self, u: &CellField, uh: &SkeletonField) -> Result<f64, FieldError> {
        self.diff_norm_on(u, uh, 0..self.mesh().n_faces())
    }

    /// Same as [`Self::diff_norm_skeleton`] restricted to boundary faces.
    pub fn diff_norm_boundary(&self, u: &CellField, uh: &SkeletonField) -> Result<f64, FieldError> {
        self.diff_norm_on(u, uh, self.mesh().boundary_faces())
    }

    fn diff_norm_on(
        &self,
        u: &CellField,
        uh: &SkeletonField,
        faces: impl Iterator<Item = usize>,
    ) -> Result<f64, FieldError> {
        self.check_cell(u)?;
        self.check_skel(uh)?;
        let m = self.mesh();
        let mut s = 0.0;
        for f in faces {
            for &c in m.face(f).adjacent() {
                s += self.face_quad(f, |t, x| (self.eval_cell(u, c, x) - self.eval_face(uh, f, t)).powi(2));
            }
        }
        Ok(s.sqrt())
    }

    pub fn norm_l2_vector(&self, p: &VectorCellField) -> Result<f64, FieldError> {
        if p.k != self.k() {
            return Err(FieldError::Degree(p.k, self.k()));
        }
        let nb = p.nb();
        let mut s = 0.0;
        for c in 0..self.mesh().n_cells() {
            let b = p.block(c);
            s += self.cell_quad(c, |x| {
                let v = self.basis().eval_cell(self.map(c), x);
                dot(&b[..nb], &v).powi(2) + dot(&b[nb..], &v).powi(2)
            });
        }
        Ok(s.sqrt())
    }

    /// L² projection of `g` onto U_h^k using the space's cell rule.
    pub fn project_cell(&self, g: impl Fn(Point) -> f64) -> CellField {
        self.project_cell_with(self.basis().cell_rule(), g)
    }

    /// L² projection with an explicit reference rule (e.g. a high-order one
    /// for discontinuous data).
    pub fn project_cell_with(
        &self,
        rule: &crate::polybasis::QuadratureRule<Point>,
        g: impl Fn(Point) -> f64,
    ) -> CellField {
        let m = self.mesh();
        let mut u = CellField::zeros(self.k(), m.n_cells());
        for c in 0..m.n_cells() {
            let map: &CellMap = self.map(c);
            let s = map.scale();
            let vals: Vec<Vec<f64>> = rule.points.iter().map(|&p| self.basis().triangle().eval(p)).collect();
            let blk = u.block_mut(c);
            for ((p, w), v) in rule.iter().zip(&vals) {
                let gx = g(map.to_physical(p));
                let wt = 2.0 * map.area * w * gx * s;
                for (b, vi) in blk.iter_mut().zip(v) {
                    *b += wt * vi;
                }
            }
        }
        u
    }

    pub fn project_vector(&self, g: impl Fn(Point) -> [f64; 2]) -> VectorCellField {
        let px = self.project_cell(|x| g(x)[0]);
        let py = self.project_cell(|x| g(x)[1]);
        let nb = px.nb();
        let mut p = VectorCellField::zeros(self.k(), self.mesh().n_cells());
        for c in 0..self.mesh().n_cells() {
            let b = p.block_mut(c);
            b[..nb].copy_from_slice(px.block(c));
            b[nb..].copy_from_slice(py.block(c));
        }
        p
    }

    /// Face-wise L² projection of `g` onto F_h^k on the listed faces (others zero).
    pub fn project_faces(&self, faces: impl IntoIterator<Item = usize>, g: impl Fn(Point) -> f64) -> SkeletonField {
        let m = self.mesh();
        let mut u = SkeletonField::zeros(self.k(), m.n_faces());
        for f in faces {
            self.project_face_into(&mut u, f, &g);
        }
        u
    }

    pub(crate) fn project_face_into(&self, u: &mut SkeletonField, f: usize, g: &impl Fn(Point) -> f64) {
        let m = self.mesh();
        let len = m.face_length(f);
        let mut acc = vec![0.0; u.nf()];
        for (t, w) in self.basis().face_rule().iter() {
            let psi = self.basis().eval_face(len, t);
            let gx = g(m.face_point(f, t));
            for (a, p) in acc.iter_mut().zip(psi) {
                *a += w * len * gx * p;
            }
        }
        u.block_mut(f).copy_from_slice(&acc);
    }

    pub fn project_skeleton(&self, g: impl Fn(Point) -> f64) -> SkeletonField {
        self.project_faces(0..self.mesh().n_faces(), g)
    }

    /// Trace of u projected onto F_h^k, taken from the lower-indexed cell.
    /// Exact for fields that are continuous across faces.
    pub fn trace_of(&self, u: &CellField) -> SkeletonField {
        let m = self.mesh();
        let mut out = SkeletonField::zeros(self.k(), m.n_faces());
        for f in 0..m.n_faces() {
            let c = m.face(f).cells[0];
            let l = m.local_face(c, f).expect("face of its own cell");
            let t = &self.kernels(c).trace[l];
            let b = u.block(c);
            for (mm, o) in out.block_mut(f).iter_mut().enumerate() {
                *o = (0..b.len()).map(|i| t[(mm, i)] * b[i]).sum();
            }
        }
        out
    }

    pub fn faces_tagged(&self, tag: BoundaryTag) -> Vec<usize> {
        self.mesh().faces_with_tag(tag).collect()
    }
}

#[cfg(test)]
mod tests;
