//! Single-simplex inequalities: discrete trace and the three Poincaré forms.

use faer::Mat;

use crate::fields::HybridSpace;

/// (A, B) = (‖·‖²_{e_l}, ‖·‖²_K) on P^k(K).
pub fn form_simplex_trace(space: &HybridSpace, c: usize, l: usize) -> (Mat<f64>, Mat<f64>) {
    let t = &space.kernels(c).trace[l];
    let nb = space.nb();
    (t.transpose() * t, Mat::identity(nb, nb))
}

/// ((k+1)(k+d)/d) with d = 2, the coefficient of |e|/|K| in the trace bound.
pub fn simplex_trace_coefficient(k: usize) -> f64 {
    ((k + 1) * (k + 2)) as f64 / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoincareMode {
    /// ‖f − f_K‖²_K
    Mean,
    /// ‖f − f_e‖²_K for the local face e
    FaceMean(usize),
    /// |K| (f_K − f_e)²
    MeanDiff(usize),
}

/// (A, B) with B = |f|²_{H¹(K)} on P^k(K).
pub fn form_simplex_poincare(space: &HybridSpace, c: usize, mode: PoincareMode) -> (Mat<f64>, Mat<f64>) {
    let m = space.mesh();
    let kr = space.kernels(c);
    let nb = space.nb();
    let area = m.area(c);
    // f_K = s·f / |K| with s_i = ∫_K φ_i
    let basis = space.basis();
    let map = space.map(c);
    let mut s = vec![0.0; nb];
    for (x, w) in basis.cell_quadrature(map) {
        for (si, v) in s.iter_mut().zip(basis.eval_cell(map, x)) {
            *si += w * v;
        }
    }
    // f_e = t·f with t_i = (1/|e|)∫_e φ_i = T[0,i]/√|e|
    let face_mean = |l: usize| -> Vec<f64> {
        let r = m.face_length(kr.faces[l]).sqrt().recip();
        (0..nb).map(|i| kr.trace[l][(0, i)] * r).collect()
    };
    let a = match mode {
        PoincareMode::Mean => Mat::from_fn(nb, nb, |i, j| f64::from(i == j) - s[i] * s[j] / area),
        PoincareMode::FaceMean(l) => {
            let t = face_mean(l);
            Mat::from_fn(nb, nb, |i, j| {
                f64::from(i == j) - s[i] * t[j] - t[i] * s[j] + area * t[i] * t[j]
            })
        }
        PoincareMode::MeanDiff(l) => {
            let t = face_mean(l);
            let d: Vec<f64> = (0..nb).map(|i| s[i] / area - t[i]).collect();
            Mat::from_fn(nb, nb, |i, j| area * d[i] * d[j])
        }
    };
    (a, kr.gradgrad.clone())
}

pub const POINCARE_MODES: [PoincareMode; 7] = [
    PoincareMode::Mean,
    PoincareMode::FaceMean(0),
    PoincareMode::FaceMean(1),
    PoincareMode::FaceMean(2),
    PoincareMode::MeanDiff(0),
    PoincareMode::MeanDiff(1),
    PoincareMode::MeanDiff(2),
];
