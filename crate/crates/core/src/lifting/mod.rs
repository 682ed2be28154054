//! The Crouzeix-Raviart lift of face-constant skeleton data and the local
//! boundary lift G^{∂K}, plus predicates for their norm estimates.

use faer::Mat;

use crate::fields::{CellField, FieldError, HybridSpace, SkeletonField, VectorCellField};
use crate::linalg::{sym_eig, SymmetricDense};
use crate::mesh::{Mesh, Point};
use crate::polybasis::quad_segment;

/// Nonconforming P1 function given by its value at every face midpoint.
/// Single-valued face dofs make the zero mean-jump property structural.
#[derive(Clone, Debug, PartialEq)]
pub struct CRField {
    pub values: Vec<f64>,
}

/// Barycentric coordinates of `x` in cell `c`, ordered like its vertices.
pub fn barycentric(mesh: &Mesh, c: usize, x: Point) -> [f64; 3] {
    let [p0, p1, p2] = mesh.cell_points(c);
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det;
    let l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// L^CR(μ̂): requires degree-0 data, read as face means.
pub fn cr_lift(mesh: &Mesh, mu: &SkeletonField) -> Result<CRField, FieldError> {
    if mu.k != 0 {
        return Err(FieldError::Degree(mu.k, 0));
    }
    Ok(CRField {
        values: (0..mesh.n_faces())
            .map(|f| mu.coef[f] / mesh.face_length(f).sqrt())
            .collect(),
    })
}

/// L^CR(ū̂) for skeleton data of any degree: the lift of its face means.
pub fn cr_lift_of_mean(space: &HybridSpace, uh: &SkeletonField) -> Result<CRField, FieldError> {
    cr_lift(space.mesh(), &space.face_average(uh)?)
}

impl CRField {
    /// Midpoint values of the three local faces of cell `c`.
    pub fn local(&self, mesh: &Mesh, c: usize) -> [f64; 3] {
        mesh.cell_faces(c).map(|cf| self.values[cf.face])
    }

    /// Σ_i μ_i (1 - 2λ_i(x)), with λ_i the coordinate of the vertex opposite face i.
    pub fn eval(&self, mesh: &Mesh, c: usize, x: Point) -> f64 {
        let lam = barycentric(mesh, c, x);
        let mu = self.local(mesh, c);
        (0..3).map(|i| mu[i] * (1.0 - 2.0 * lam[i])).sum()
    }

    /// Constant gradient on cell `c`: Σ_i μ_i |e_i| n_i / |K|.
    pub fn grad(&self, mesh: &Mesh, c: usize) -> [f64; 2] {
        let mu = self.local(mesh, c);
        let a = mesh.area(c);
        let mut g = [0.0; 2];
        for (l, cf) in mesh.cell_faces(c).iter().enumerate() {
            let n = mesh.outward_normal(c, l);
            let s = mu[l] * mesh.face_length(cf.face) / a;
            g[0] += s * n[0];
            g[1] += s * n[1];
        }
        g
    }

    pub fn seminorm_h1(&self, mesh: &Mesh) -> f64 {
        (0..mesh.n_cells())
            .map(|c| {
                let g = self.grad(mesh, c);
                mesh.area(c) * (g[0] * g[0] + g[1] * g[1])
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cell average of an affine function is the mean of its midpoint values.
    pub fn integral_domain(&self, mesh: &Mesh) -> f64 {
        (0..mesh.n_cells())
            .map(|c| mesh.area(c) * self.local(mesh, c).iter().sum::<f64>() / 3.0)
            .sum()
    }

    /// ‖w‖ over the given boundary faces, by two-point Gauss on each face.
    pub fn norm_on_faces(&self, mesh: &Mesh, faces: &[usize]) -> f64 {
        let q = quad_segment(2);
        faces
            .iter()
            .map(|&f| {
                let c = mesh.face(f).cells[0];
                let len = mesh.face_length(f);
                q.iter()
                    .map(|(t, w)| w * len * self.eval(mesh, c, mesh.face_point(f, t)).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_boundary(&self, mesh: &Mesh) -> f64 {
        let b: Vec<usize> = mesh.boundary_faces().collect();
        self.norm_on_faces(mesh, &b)
    }

    /// ∫_Γ w ds over boundary faces; equals Σ |e| μ_e since w is affine.
    pub fn integral_on_faces(&self, mesh: &Mesh, faces: &[usize]) -> f64 {
        let q = quad_segment(1);
        faces
            .iter()
            .map(|&f| {
                let c = mesh.face(f).cells[0];
                let len = mesh.face_length(f);
                q.iter()
                    .map(|(t, w)| w * len * self.eval(mesh, c, mesh.face_point(f, t)))
                    .sum::<f64>()
            })
            .sum()
    }

    /// The lift as a degree-k cell field (exact for k ≥ 1).
    pub fn to_cell_field(&self, space: &HybridSpace) -> CellField {
        assert!(space.k() >= 1, "affine functions need k >= 1");
        let m = space.mesh();
        let mut u = CellField::zeros(space.k(), m.n_cells());
        let basis = space.basis();
        for c in 0..m.n_cells() {
            let map = space.map(c);
            let blk = u.block_mut(c);
            for (x, w) in basis.cell_quadrature(map) {
                let v = self.eval(m, c, x);
                for (b, phi) in blk.iter_mut().zip(basis.eval_cell(map, x)) {
                    *b += w * v * phi;
                }
            }
        }
        u
    }
}

/// (‖μ̂‖²_{∂K}, ‖L^CR(μ̂)‖²_{∂K}) for degree-0 data on cell `c`.
pub fn restriction_estimate_check(mesh: &Mesh, mu: &SkeletonField, c: usize) -> Result<(f64, f64), FieldError> {
    let w = cr_lift(mesh, mu)?;
    let q = quad_segment(2);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for cf in mesh.cell_faces(c) {
        let f = cf.face;
        let len = mesh.face_length(f);
        lhs += len * w.values[f].powi(2);
        rhs += q
            .iter()
            .map(|(t, wt)| wt * len * w.eval(mesh, c, mesh.face_point(f, t)).powi(2))
            .sum::<f64>();
    }
    Ok((lhs, rhs))
}

/// G^{∂K}(μ) for face data given per local face in the face bases:
/// (G, ω)_K = ⟨μ, ω·n⟩_{∂K}. Mass matrices are identities, so G = Σ_l E_l μ_l.
pub fn boundary_lift(space: &HybridSpace, c: usize, mu: &[Vec<f64>; 3]) -> Vec<f64> {
    let kr = space.kernels(c);
    let nb = kr.nb();
    let mut g = vec![0.0; 2 * nb];
    for (l, ml) in mu.iter().enumerate() {
        let t = &kr.trace[l];
        let n = kr.normals[l];
        for i in 0..nb {
            let s: f64 = ml.iter().enumerate().map(|(m, v)| t[(m, i)] * v).sum();
            g[i] += n[0] * s;
            g[nb + i] += n[1] * s;
        }
    }
    g
}

/// Face data of u|_K − û on the three local faces of cell `c`.
pub fn local_mismatch(space: &HybridSpace, u: &CellField, uh: &SkeletonField, c: usize) -> [Vec<f64>; 3] {
    let kr = space.kernels(c);
    let b = u.block(c);
    std::array::from_fn(|l| {
        let t = &kr.trace[l];
        let f = kr.faces[l];
        (0..t.nrows())
            .map(|m| (0..b.len()).map(|i| t[(m, i)] * b[i]).sum::<f64>() - uh.block(f)[m])
            .collect()
    })
}

/// Smallest C with ‖G(μ)‖_K ≤ C h_K^{-1/2} ‖μ‖_{∂K} on cell `c`.
pub fn boundary_lift_constant(space: &HybridSpace, c: usize) -> f64 {
    let kr = space.kernels(c);
    let nf = space.nf();
    let e: Vec<Mat<f64>> = (0..3).map(|l| kr.normal_coupling(l)).collect();
    let n = 3 * nf;
    let gram = SymmetricDense::from_fn(n, |i, j| {
        let (ei, ej) = (&e[i / nf], &e[j / nf]);
        (0..ei.nrows()).map(|r| ei[(r, i % nf)] * ej[(r, j % nf)]).sum()
    });
    let lmax = *sym_eig(&gram).expect("finite gram").values.last().unwrap();
    (space.mesh().diameter(c) * lmax.max(0.0)).sqrt()
}

/// Per-cell ‖∇u + p − G^{∂K}(u − û)‖_{L²(K)}, by quadrature.
pub fn gradient_identity_check(
    space: &HybridSpace,
    u: &CellField,
    uh: &SkeletonField,
    p: &VectorCellField,
) -> Result<Vec<f64>, FieldError> {
    let k = space.k();
    for d in [u.k, uh.k, p.k] {
        if d != k {
            return Err(FieldError::Degree(d, k));
        }
    }
    let m = space.mesh();
    let nb = space.nb();
    let basis = space.basis();
    let mut out = Vec::with_capacity(m.n_cells());
    for c in 0..m.n_cells() {
        let map = space.map(c);
        let g = boundary_lift(space, c, &local_mismatch(space, u, uh, c));
        let pb = p.block(c);
        let mut s = 0.0;
        for (x, w) in basis.cell_quadrature(map) {
            let phi = basis.eval_cell(map, x);
            let gu = space.grad_cell(u, c, x);
            for d in 0..2 {
                let pv: f64 = (0..nb).map(|i| pb[d * nb + i] * phi[i]).sum();
                let gv: f64 = (0..nb).map(|i| g[d * nb + i] * phi[i]).sum();
                s += w * (gu[d] + pv - gv).powi(2);
            }
        }
        out.push(s.sqrt());
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
