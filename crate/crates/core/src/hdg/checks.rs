use super::{BvpData, CondensedSystem, Solution};
use crate::fields::HybridSpace;
use crate::mesh::BoundaryTag;
use crate::polybasis::quad_segment;

/// Residuals of the discrete equations, evaluated by quadrature against every
/// local test function. Values are relative to `scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// max over cells/tests of the flux equation residual.
    pub flux: f64,
    /// max over cells/tests of the balance equation residual.
    pub balance: f64,
    /// max over interior faces of |Σ_K ⟨p̂·n, ψ⟩_e|.
    pub transmission: f64,
    /// max over Neumann faces of |⟨p̂·n + u_N, ψ⟩_e|.
    pub neumann: f64,
    pub scale: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.flux.max(self.balance).max(self.transmission).max(self.neumann)
    }
}

pub fn residual_check(space: &HybridSpace, sys: &CondensedSystem, sol: &Solution) -> ResidualReport {
    let m = space.mesh();
    let basis = space.basis();
    let (nb, nf) = (space.nb(), space.nf());
    let tau = sys.tau;
    let scale = 1.0
        + sys.load.coef_norm()
        + sol.u.coef_norm()
        + sol.p.coef_norm()
        + sol.uhat.coef.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut flux, mut balance) = (0.0f64, 0.0f64);
    // ⟨p̂·n_K, ψ_m⟩_e accumulated per face
    let mut face_flux = vec![0.0; m.n_faces() * nf];
    for c in 0..m.n_cells() {
        let map = space.map(c);
        let pb = sol.p.block(c);
        let mut r_flux = vec![0.0; 2 * nb];
        let mut r_bal = vec![0.0; nb];
        for (x, w) in basis.cell_quadrature(map) {
            let phi = basis.eval_cell(map, x);
            let gphi = basis.grad_cell(map, x);
            let u = space.eval_cell(&sol.u, c, x);
            let p = [
                (0..nb).map(|i| pb[i] * phi[i]).sum::<f64>(),
                (0..nb).map(|i| pb[nb + i] * phi[i]).sum::<f64>(),
            ];
            for i in 0..nb {
                // (p, q) − (u, ∇·q) for q = φ_i e_d
                r_flux[i] += w * (p[0] * phi[i] - u * gphi[i][0]);
                r_flux[nb + i] += w * (p[1] * phi[i] - u * gphi[i][1]);
                // −(p, ∇v) − (f_h, v)
                r_bal[i] += w * (-(p[0] * gphi[i][0] + p[1] * gphi[i][1]));
            }
        }
        for (i, r) in r_bal.iter_mut().enumerate() {
            *r -= sys.load.block(c)[i];
        }
        for l in 0..3 {
            let f = space.kernels(c).faces[l];
            let n = m.outward_normal(c, l);
            let len = m.face_length(f);
            for (t, w) in basis.face_rule().iter() {
                let x = m.face_point(f, t);
                let phi = basis.eval_cell(map, x);
                let psi = basis.eval_face(len, t);
                let uh = space.eval_face(&sol.uhat, f, t);
                let u = space.eval_cell(&sol.u, c, x);
                let pn = n[0] * (0..nb).map(|i| pb[i] * phi[i]).sum::<f64>()
                    + n[1] * (0..nb).map(|i| pb[nb + i] * phi[i]).sum::<f64>();
                let phat = pn + tau * (u - uh);
                for i in 0..nb {
                    r_flux[i] += w * len * uh * phi[i] * n[0];
                    r_flux[nb + i] += w * len * uh * phi[i] * n[1];
                    r_bal[i] += w * len * phat * phi[i];
                }
                for mm in 0..nf {
                    face_flux[f * nf + mm] += w * len * phat * psi[mm];
                }
            }
        }
        flux = flux.max(r_flux.iter().fold(0.0, |a, v| a.max(v.abs())));
        balance = balance.max(r_bal.iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    let (mut transmission, mut neumann) = (0.0f64, 0.0f64);
    for f in 0..m.n_faces() {
        for mm in 0..nf {
            let v = face_flux[f * nf + mm];
            match m.face(f).tag {
                BoundaryTag::Interior => transmission = transmission.max(v.abs()),
                BoundaryTag::Neumann => {
                    neumann = neumann.max((v + sys.neumann.block(f)[mm] + neumann_multiplier(space, sol, f, mm)).abs())
                }
                BoundaryTag::Dirichlet => {}
            }
        }
    }
    ResidualReport {
        flux: flux / scale,
        balance: balance / scale,
        transmission: transmission / scale,
        neumann: neumann / scale,
        scale,
    }
}

/// The gauge multiplier enters the Neumann rows through c = √|e| on the
/// constant face mode.
fn neumann_multiplier(space: &HybridSpace, sol: &Solution, f: usize, mm: usize) -> f64 {
    if mm == 0 {
        -sol.gauge_multiplier * space.mesh().face_length(f).sqrt()
    } else {
        0.0
    }
}

/// Both sides of the energy identity. `rhs` is the u_D = 0 form
/// (f_h, u) + ⟨u_N, û⟩_{Γ_N}; `generalized_rhs` subtracts ⟨p̂·n, û⟩_{Γ_D}.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub generalized_rhs: f64,
    /// ‖p‖².
    pub flux_sq: f64,
    /// τ‖u − û‖²_{∂T_h}.
    pub mismatch_sq: f64,
}

pub fn energy_check(space: &HybridSpace, sys: &CondensedSystem, sol: &Solution) -> EnergyReport {
    let m = space.mesh();
    let nb = space.nb();
    let tau = sys.tau;
    let flux_sq: f64 = sol.p.coef.iter().map(|v| v * v).sum();
    let mut mismatch = 0.0;
    let mut dir_term = 0.0;
    for c in 0..m.n_cells() {
        let kr = space.kernels(c);
        let ub = sol.u.block(c);
        let pb = sol.p.block(c);
        for l in 0..3 {
            let t = &kr.trace[l];
            let f = kr.faces[l];
            let uh = sol.uhat.block(f);
            let n = kr.normals[l];
            for (mm, &uhm) in uh.iter().enumerate() {
                let tu: f64 = (0..nb).map(|i| t[(mm, i)] * ub[i]).sum();
                let d = tu - uhm;
                mismatch += d * d;
                if m.face(f).tag == BoundaryTag::Dirichlet {
                    let pn: f64 = (0..nb).map(|i| t[(mm, i)] * (n[0] * pb[i] + n[1] * pb[nb + i])).sum();
                    dir_term += (pn + tau * d) * uhm;
                }
            }
        }
    }
    let fu: f64 = sys.load.coef.iter().zip(&sol.u.coef).map(|(a, b)| a * b).sum();
    let nu: f64 = sys.neumann.coef.iter().zip(&sol.uhat.coef).map(|(a, b)| a * b).sum();
    // the gauge multiplier acts like an extra Neumann datum on ∂Ω
    let gauge: f64 = if sol.gauge_multiplier != 0.0 {
        -sol.gauge_multiplier
            * m.boundary_faces()
                .map(|f| m.face_length(f).sqrt() * sol.uhat.block(f)[0])
                .sum::<f64>()
    } else {
        0.0
    };
    let rhs = fu + nu + gauge;
    EnergyReport {
        lhs: flux_sq + tau * mismatch,
        rhs,
        generalized_rhs: rhs - dir_term,
        flux_sq,
        mismatch_sq: tau * mismatch,
    }
}

/// (‖û‖²_{Γ_D}, ‖u_D‖²_{Γ_D}); the datum is integrated with a 20th-order rule.
pub fn dirichlet_estimate_check(space: &HybridSpace, sol: &Solution, data: &BvpData) -> (f64, f64) {
    let m = space.mesh();
    let q = quad_segment(20);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for f in m.faces_with_tag(BoundaryTag::Dirichlet) {
        lhs += sol.uhat.block(f).iter().map(|v| v * v).sum::<f64>();
        let len = m.face_length(f);
        rhs += q
            .iter()
            .map(|(t, w)| w * len * (data.u_d)(m.face_point(f, t)).powi(2))
            .sum::<f64>();
    }
    (lhs, rhs)
}

/// E(h) = ‖p‖² + τ‖u − û‖²_{∂T_h} + ‖û‖²_{Γ_D}.
pub fn stability_energy(space: &HybridSpace, sys: &CondensedSystem, sol: &Solution) -> f64 {
    let e = energy_check(space, sys, sol);
    let d: f64 = space
        .mesh()
        .faces_with_tag(BoundaryTag::Dirichlet)
        .map(|f| sol.uhat.block(f).iter().map(|v| v * v).sum::<f64>())
        .sum();
    e.lhs + d
}
