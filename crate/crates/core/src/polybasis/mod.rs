//! Orthonormal polynomial bases, quadrature and the per-cell matrix kernels
//! that every other module is assembled from.
//!
//! Physical bases are the reference orthonormal bases pulled back through the
//! affine map and rescaled by (2|K|)^{-1/2} on cells and |e|^{-1/2} on faces,
//! so both are L²-orthonormal on the physical element. Coefficient vectors
//! therefore carry L² norms directly.

mod quadrature;
mod reference;

use faer::Mat;
use thiserror::Error;

use crate::mesh::{Mesh, Point};

pub use quadrature::{quad_segment, quad_triangle, QuadratureRule, MAX_TRIANGLE_DEGREE};
pub use reference::{SegmentBasis, TriangleBasis, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("polynomial degree {k} not supported (max {max})")]
    Degree { k: usize, max: usize },
    #[error("triangle quadrature of exactness {deg} not available (max {max})")]
    QuadratureDegree { deg: usize, max: usize },
    #[error("cell {cell} is degenerate (|K| <= 0)")]
    DegenerateCell { cell: usize },
}

pub fn cell_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

pub fn face_dim(k: usize) -> usize {
    k + 1
}

const REF_VERTS: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Affine map from the reference triangle onto cell K.
#[derive(Clone, Copy, Debug)]
pub struct CellMap {
    pub origin: Point,
    jac: [[f64; 2]; 2],
    jinv_t: [[f64; 2]; 2],
    pub area: f64,
}

impl CellMap {
    pub fn new(mesh: &Mesh, c: usize) -> Result<CellMap, BasisError> {
        let [p0, p1, p2] = mesh.cell_points(c);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() <= 0.0 || !det.is_finite() {
            return Err(BasisError::DegenerateCell { cell: c });
        }
        let jinv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        Ok(CellMap {
            origin: p0,
            jac,
            jinv_t,
            area: 0.5 * det.abs(),
        })
    }

    pub fn to_physical(&self, xi: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // J^{-1} = (J^{-T})^T
        [
            self.jinv_t[0][0] * d[0] + self.jinv_t[1][0] * d[1],
            self.jinv_t[0][1] * d[0] + self.jinv_t[1][1] * d[1],
        ]
    }

    pub fn grad_to_physical(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv_t[0][0] * g[0] + self.jinv_t[0][1] * g[1],
            self.jinv_t[1][0] * g[0] + self.jinv_t[1][1] * g[1],
        ]
    }

    /// Factor turning reference orthonormal values into physical ones.
    pub fn scale(&self) -> f64 {
        (2.0 * self.area).sqrt().recip()
    }
}

/// Whether the global parameter of the face runs against the cell's local
/// orientation (local vertex (l+1)%3 towards (l+2)%3).
pub fn face_reversed(mesh: &Mesh, c: usize, l: usize) -> bool {
    let f = mesh.cell_faces(c)[l].face;
    mesh.face(f).vertices[0] != mesh.cell(c)[(l + 1) % 3]
}

/// Reference coordinates of parameter `t` on local face `l`.
pub fn face_ref_point(l: usize, reversed: bool, t: f64) -> Point {
    let (mut a, mut b) = (REF_VERTS[(l + 1) % 3], REF_VERTS[(l + 2) % 3]);
    if reversed {
        std::mem::swap(&mut a, &mut b);
    }
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Degree-k bases with tabulated values on fixed quadrature rules.
#[derive(Clone, Debug)]
pub struct Basis {
    k: usize,
    tri: TriangleBasis,
    seg: SegmentBasis,
    cell_rule: QuadratureRule<Point>,
    face_rule: QuadratureRule<f64>,
    cell_vals: Vec<Vec<f64>>,
    cell_grads: Vec<Vec<[f64; 2]>>,
    // [local face][reversed][qp][i]
    trace_vals: [[Vec<Vec<f64>>; 2]; 3],
    seg_vals: Vec<Vec<f64>>,
}

/// Dense local matrices of one cell in the physical orthonormal bases.
#[derive(Clone, Debug)]
pub struct CellKernels {
    pub cell: usize,
    pub faces: [usize; 3],
    /// (φ_i, φ_j)_K, the identity up to round-off.
    pub mass: Mat<f64>,
    /// (∇φ_i, ∇φ_j)_K.
    pub gradgrad: Mat<f64>,
    /// C[j, d*nb + i] = (φ_j, ∂_d φ_i)_K, so (u, ∇·q)_K = uᵀ C q.
    pub div: Mat<f64>,
    /// T_l[m, i] = ⟨ψ_m, φ_i⟩_{e_l}.
    pub trace: [Mat<f64>; 3],
    /// Unit outward normals of the three local faces.
    pub normals: [Point; 3],
}

impl CellKernels {
    pub fn nb(&self) -> usize {
        self.mass.nrows()
    }

    /// E_l[d*nb + i, m] = ⟨ψ_m, φ_i n_d⟩_{e_l}, so ⟨û, q·n⟩_{e_l} = qᵀ E_l û.
    pub fn normal_coupling(&self, l: usize) -> Mat<f64> {
        let nb = self.nb();
        let t = &self.trace[l];
        let n = self.normals[l];
        Mat::from_fn(2 * nb, t.nrows(), |r, m| n[r / nb] * t[(m, r % nb)])
    }
}

impl Basis {
    /// Rules exact for products of two degree-k functions, with two degrees
    /// of headroom.
    pub fn new(k: usize) -> Result<Basis, BasisError> {
        Basis::with_exactness(k, 2 * k + 2, 2 * k + 2)
    }

    pub fn with_exactness(k: usize, cell_deg: usize, face_deg: usize) -> Result<Basis, BasisError> {
        let tri = TriangleBasis::new(k)?;
        let seg = SegmentBasis::new(k)?;
        let cell_rule = quad_triangle(cell_deg.max(2 * k))?;
        let face_rule = quad_segment(face_deg.max(2 * k));
        let cell_vals = cell_rule.points.iter().map(|&p| tri.eval(p)).collect();
        let cell_grads = cell_rule.points.iter().map(|&p| tri.grad(p)).collect();
        let trace_vals = std::array::from_fn(|l| {
            std::array::from_fn(|r| {
                face_rule
                    .points
                    .iter()
                    .map(|&t| tri.eval(face_ref_point(l, r == 1, t)))
                    .collect()
            })
        });
        let seg_vals = face_rule.points.iter().map(|&t| seg.eval(t)).collect();
        Ok(Basis {
            k,
            tri,
            seg,
            cell_rule,
            face_rule,
            cell_vals,
            cell_grads,
            trace_vals,
            seg_vals,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn nb(&self) -> usize {
        self.tri.dim()
    }

    pub fn nf(&self) -> usize {
        self.seg.dim()
    }

    pub fn triangle(&self) -> &TriangleBasis {
        &self.tri
    }

    pub fn segment(&self) -> &SegmentBasis {
        &self.seg
    }

    pub fn cell_rule(&self) -> &QuadratureRule<Point> {
        &self.cell_rule
    }

    pub fn face_rule(&self) -> &QuadratureRule<f64> {
        &self.face_rule
    }

    /// Reference basis values at the cell quadrature points.
    pub fn cell_values(&self) -> &[Vec<f64>] {
        &self.cell_vals
    }

    /// Reference basis values along local face `l` at the face quadrature
    /// points, in the face's global orientation.
    pub fn trace_values(&self, l: usize, reversed: bool) -> &[Vec<f64>] {
        &self.trace_vals[l][reversed as usize]
    }

    /// Reference face basis values at the face quadrature points.
    pub fn face_values(&self) -> &[Vec<f64>] {
        &self.seg_vals
    }

    /// Physical value of the cell basis at physical point `x`.
    pub fn eval_cell(&self, map: &CellMap, x: Point) -> Vec<f64> {
        let s = map.scale();
        self.tri.eval(map.to_reference(x)).into_iter().map(|v| s * v).collect()
    }

    /// Physical gradients of the cell basis at physical point `x`.
    pub fn grad_cell(&self, map: &CellMap, x: Point) -> Vec<[f64; 2]> {
        let s = map.scale();
        self.tri
            .grad(map.to_reference(x))
            .into_iter()
            .map(|g| {
                let p = map.grad_to_physical(g);
                [s * p[0], s * p[1]]
            })
            .collect()
    }

    /// Physical value of the face basis at parameter `t` of a face of length `len`.
    pub fn eval_face(&self, len: f64, t: f64) -> Vec<f64> {
        let s = len.sqrt().recip();
        self.seg.eval(t).into_iter().map(|v| s * v).collect()
    }

    pub fn kernels(&self, mesh: &Mesh, c: usize) -> Result<CellKernels, BasisError> {
        let map = CellMap::new(mesh, c)?;
        let nb = self.nb();
        let nf = self.nf();
        // physical gradients with the (2|K|)^{-1/2} factor kept aside: the
        // cell measure 2|K| cancels it in every product below
        let grads: Vec<Vec<[f64; 2]>> = self
            .cell_grads
            .iter()
            .map(|g| g.iter().map(|&v| map.grad_to_physical(v)).collect())
            .collect();
        let mut mass = Mat::<f64>::zeros(nb, nb);
        let mut gradgrad = Mat::<f64>::zeros(nb, nb);
        let mut div = Mat::<f64>::zeros(nb, 2 * nb);
        for (q, &w) in self.cell_rule.weights.iter().enumerate() {
            let (v, g) = (&self.cell_vals[q], &grads[q]);
            for i in 0..nb {
                for j in 0..nb {
                    mass[(i, j)] += w * v[i] * v[j];
                    gradgrad[(i, j)] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    div[(j, i)] += w * v[j] * g[i][0];
                    div[(j, nb + i)] += w * v[j] * g[i][1];
                }
            }
        }
        let cf = mesh.cell_faces(c);
        let scale = map.scale();
        let trace = std::array::from_fn(|l| {
            let f = cf[l].face;
            let len = mesh.face_length(f);
            let rev = face_reversed(mesh, c, l);
            let tv = &self.trace_vals[l][rev as usize];
            let s = len * len.sqrt().recip() * scale;
            let mut t = Mat::<f64>::zeros(nf, nb);
            for (q, &w) in self.face_rule.weights.iter().enumerate() {
                for m in 0..nf {
                    for i in 0..nb {
                        t[(m, i)] += s * w * self.seg_vals[q][m] * tv[q][i];
                    }
                }
            }
            t
        });
        Ok(CellKernels {
            cell: c,
            faces: cf.map(|x| x.face),
            mass,
            gradgrad,
            div,
            trace,
            normals: std::array::from_fn(|l| mesh.outward_normal(c, l)),
        })
    }

    /// Physical quadrature points and weights of cell `c`.
    pub fn cell_quadrature(&self, map: &CellMap) -> Vec<(Point, f64)> {
        self.cell_rule
            .iter()
            .map(|(p, w)| (map.to_physical(p), 2.0 * map.area * w))
            .collect()
    }

    /// Physical quadrature points and weights of face `f`, in its global
    /// parameter order.
    pub fn face_quadrature(&self, mesh: &Mesh, f: usize) -> Vec<(Point, f64)> {
        let len = mesh.face_length(f);
        self.face_rule
            .iter()
            .map(|(t, w)| (mesh.face_point(f, t), len * w))
            .collect()
    }
}
