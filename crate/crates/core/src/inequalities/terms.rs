//! Matrices of the scalar functionals that appear in the audited inequalities.
//! Every term is written in the orthonormal coefficients of `Layout`.

use super::form::{add_block, Layout, Part};
use crate::fields::HybridSpace;
use crate::linalg::TripletBuilder;

fn sparse(layout: &Layout, fill: impl FnOnce(&mut TripletBuilder)) -> Part {
    let mut b = TripletBuilder::new(layout.n());
    fill(&mut b);
    Part::Sparse(b.build())
}

fn cell_faces(space: &HybridSpace, c: usize) -> [usize; 3] {
    space.kernels(c).faces
}

/// ‖u‖² (identity: the cell basis is orthonormal).
pub fn l2_cells(space: &HybridSpace, lay: &Layout) -> Part {
    sparse(lay, |b| {
        for c in 0..space.mesh().n_cells() {
            for i in 0..lay.nb {
                b.add(lay.u(c, i), lay.u(c, i), 1.0);
            }
        }
    })
}

/// |u|²_{H¹(T_h)}, broken.
pub fn h1_cells(space: &HybridSpace, lay: &Layout) -> Part {
    sparse(lay, |b| {
        for c in 0..space.mesh().n_cells() {
            let g = &space.kernels(c).gradgrad;
            let idx: Vec<usize> = (0..lay.nb).map(|i| lay.u(c, i)).collect();
            add_block(b, &idx, |a, d| g[(a, d)]);
        }
    })
}

/// ‖u − û‖² summed over (cell, face) pairs; `boundary_only` keeps ∂T_h^b.
pub fn mismatch(space: &HybridSpace, lay: &Layout, boundary_only: bool) -> Part {
    let m = space.mesh();
    sparse(lay, |b| {
        for c in 0..m.n_cells() {
            let kr = space.kernels(c);
            for l in 0..3 {
                let f = kr.faces[l];
                if boundary_only && m.face(f).is_interior() {
                    continue;
                }
                let t = &kr.trace[l];
                let mut idx: Vec<usize> = (0..lay.nb).map(|i| lay.u(c, i)).collect();
                idx.extend((0..lay.nf).map(|mm| lay.uh(f, mm)));
                let nb = lay.nb;
                // [Tᵀ T, −Tᵀ; −T, I]
                add_block(b, &idx, |a, d| match (a < nb, d < nb) {
                    (true, true) => (0..lay.nf).map(|mm| t[(mm, a)] * t[(mm, d)]).sum(),
                    (false, true) => -t[(a - nb, d)],
                    (true, false) => -t[(d - nb, a)],
                    (false, false) => f64::from(a == d),
                });
            }
        }
    })
}

/// ‖u‖²_{∂T_h^b}.
pub fn trace_u_boundary(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    sparse(lay, |b| {
        for f in m.boundary_faces() {
            let c = m.face(f).cells[0];
            let l = m.local_face(c, f).unwrap();
            let t = &space.kernels(c).trace[l];
            let idx: Vec<usize> = (0..lay.nb).map(|i| lay.u(c, i)).collect();
            add_block(b, &idx, |a, d| (0..t.nrows()).map(|mm| t[(mm, a)] * t[(mm, d)]).sum());
        }
    })
}

/// ‖û‖²_{∂T_h^b}.
pub fn uhat_boundary(space: &HybridSpace, lay: &Layout) -> Part {
    sparse(lay, |b| {
        for f in space.mesh().boundary_faces() {
            for mm in 0..lay.nf {
                b.add(lay.uh(f, mm), lay.uh(f, mm), 1.0);
            }
        }
    })
}

/// |L^CR(ū̂)|²_{H¹}. On K the lift has gradient Σ_i ū̂_i |e_i| n_i / |K|, and the
/// mean of û on e_i is its degree-0 coefficient over √|e_i|.
pub fn cr_seminorm(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    sparse(lay, |b| {
        for c in 0..m.n_cells() {
            let faces = cell_faces(space, c);
            let sk = m.area(c).sqrt();
            let w: Vec<[f64; 2]> = (0..3)
                .map(|l| {
                    let n = m.outward_normal(c, l);
                    let s = m.face_length(faces[l]).sqrt() / sk;
                    [s * n[0], s * n[1]]
                })
                .collect();
            let idx: Vec<usize> = faces.iter().map(|&f| lay.uh(f, 0)).collect();
            add_block(b, &idx, |a, d| w[a][0] * w[d][0] + w[a][1] * w[d][1]);
        }
    })
}

/// ∫_Ω L^CR(ū̂) dx: on K the integral is |K| times the mean of the midpoint values.
pub fn cr_integral(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    let mut r = vec![0.0; m.n_faces()];
    for c in 0..m.n_cells() {
        for f in cell_faces(space, c) {
            r[f] += m.area(c) / (3.0 * m.face_length(f).sqrt());
        }
    }
    Part::RankOne(r.into_iter().enumerate().map(|(f, v)| (lay.uh(f, 0), v)).collect())
}

/// ∫_Γ û ds.
pub fn gamma_uhat(space: &HybridSpace, lay: &Layout, gamma: &[usize]) -> Part {
    let m = space.mesh();
    Part::RankOne(gamma.iter().map(|&f| (lay.uh(f, 0), m.face_length(f).sqrt())).collect())
}

/// ∫_Ω u dx.
pub fn u_integral(space: &HybridSpace, lay: &Layout) -> Part {
    let basis = space.basis();
    let mut r = Vec::new();
    for c in 0..space.mesh().n_cells() {
        let map = space.map(c);
        let mut s = vec![0.0; lay.nb];
        for (x, w) in basis.cell_quadrature(map) {
            for (si, v) in s.iter_mut().zip(basis.eval_cell(map, x)) {
                *si += w * v;
            }
        }
        r.extend(
            s.into_iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > 1e-15)
                .map(|(i, v)| (lay.u(c, i), v)),
        );
    }
    Part::RankOne(r)
}

/// Coefficients of v ↦ ∫_e v|_K ds on the cell block of K.
fn face_integral_row(space: &HybridSpace, c: usize, l: usize) -> Vec<f64> {
    let m = space.mesh();
    let kr = space.kernels(c);
    let s = m.face_length(kr.faces[l]).sqrt();
    (0..kr.nb()).map(|i| s * kr.trace[l][(0, i)]).collect()
}

/// ∫_Γ u ds (trace of the cell field).
pub fn gamma_u(space: &HybridSpace, lay: &Layout, gamma: &[usize]) -> Part {
    let m = space.mesh();
    let mut r = Vec::new();
    for &f in gamma {
        let c = m.face(f).cells[0];
        let l = m.local_face(c, f).unwrap();
        r.extend(
            face_integral_row(space, c, l)
                .into_iter()
                .enumerate()
                .map(|(i, v)| (lay.u(c, i), v)),
        );
    }
    Part::RankOne(r)
}

/// Σ_{e interior} |e|^{d/(1−d)} |∫_e [[u]] ds|² with d = 2.
pub fn jumps(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    sparse(lay, |b| {
        for f in m.interior_faces() {
            let [c0, c1] = m.face(f).cells;
            let r0 = face_integral_row(space, c0, m.local_face(c0, f).unwrap());
            let r1 = face_integral_row(space, c1, m.local_face(c1, f).unwrap());
            let mut idx: Vec<usize> = (0..lay.nb).map(|i| lay.u(c0, i)).collect();
            idx.extend((0..lay.nb).map(|i| lay.u(c1, i)));
            let r: Vec<f64> = r0.into_iter().chain(r1.into_iter().map(|v| -v)).collect();
            let w = m.face_length(f).powi(-2);
            add_block(b, &idx, |a, d| w * r[a] * r[d]);
        }
    })
}

/// ‖p_h‖² with p_h = Cᵀu − Σ_l E_l û_l, the exact local flux solve.
pub fn flux(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    let (nb, nf) = (lay.nb, lay.nf);
    sparse(lay, |b| {
        for c in 0..m.n_cells() {
            let kr = space.kernels(c);
            // P is 2nb × (nb + 3nf), columns [u_K, û_0, û_1, û_2]
            let ncol = nb + 3 * nf;
            let p = faer::Mat::from_fn(2 * nb, ncol, |r, col| {
                if col < nb {
                    kr.div[(col, r)]
                } else {
                    let l = (col - nb) / nf;
                    let mm = (col - nb) % nf;
                    -kr.normals[l][r / nb] * kr.trace[l][(mm, r % nb)]
                }
            });
            let ptp = p.transpose() * &p;
            let mut idx: Vec<usize> = (0..nb).map(|i| lay.u(c, i)).collect();
            for f in kr.faces {
                idx.extend((0..nf).map(|mm| lay.uh(f, mm)));
            }
            add_block(b, &idx, |a, d| ptp[(a, d)]);
        }
    })
}

/// ‖ω‖²_{∂T_h^b} for a CR field ω given by its face coefficients. On the face
/// opposite vertex l, ω = μ_l + (μ_a − μ_b)(1 − 2t), so
/// ∫_e ω² = |e| (μ_l² + (μ_a − μ_b)²/3).
pub fn cr_boundary_l2(space: &HybridSpace, lay: &Layout) -> Part {
    let m = space.mesh();
    sparse(lay, |b| {
        for f in m.boundary_faces() {
            let c = m.face(f).cells[0];
            let l = m.local_face(c, f).unwrap();
            let faces = cell_faces(space, c);
            let (fa, fb) = (faces[(l + 1) % 3], faces[(l + 2) % 3]);
            let len = m.face_length(f);
            let s = |g: usize| m.face_length(g).sqrt().recip();
            let idx = [lay.uh(f, 0), lay.uh(fa, 0), lay.uh(fb, 0)];
            let v1 = [s(f), 0.0, 0.0];
            let v2 = [0.0, s(fa), -s(fb)];
            add_block(b, &idx, |a, d| len * (v1[a] * v1[d] + v2[a] * v2[d] / 3.0));
        }
    })
}
