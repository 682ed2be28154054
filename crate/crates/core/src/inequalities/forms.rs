use super::form::{Layout, QuadraticForm};
use super::terms::*;
use super::IneqError;
use crate::fields::HybridSpace;

/// Every inequality the audit engine knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IneqId {
    SimplexTrace,
    SimplexPoincare,
    BrennerMean,
    BrennerBoundary,
    HybridPoincareMeanCr,
    HybridPoincareBoundary,
    HybridPoincareMeanU,
    CrTraceMean,
    CrTraceBoundary,
    HybridTraceU,
    HybridTraceUhat,
    PhPoincareMean,
    PhPoincareBoundary,
    PhPoincareMeanU,
    PhTraceU,
    PhTraceUhat,
    /// hybrid-poincare-boundary with the mismatch term removed from B.
    NegativeControl,
}

pub const ALL_IDS: [IneqId; 17] = [
    IneqId::SimplexTrace,
    IneqId::SimplexPoincare,
    IneqId::BrennerMean,
    IneqId::BrennerBoundary,
    IneqId::HybridPoincareMeanCr,
    IneqId::HybridPoincareBoundary,
    IneqId::HybridPoincareMeanU,
    IneqId::CrTraceMean,
    IneqId::CrTraceBoundary,
    IneqId::HybridTraceU,
    IneqId::HybridTraceUhat,
    IneqId::PhPoincareMean,
    IneqId::PhPoincareBoundary,
    IneqId::PhPoincareMeanU,
    IneqId::PhTraceU,
    IneqId::PhTraceUhat,
    IneqId::NegativeControl,
];

impl IneqId {
    pub fn name(self) -> &'static str {
        match self {
            IneqId::SimplexTrace => "simplex-trace",
            IneqId::SimplexPoincare => "simplex-poincare",
            IneqId::BrennerMean => "brenner-mean",
            IneqId::BrennerBoundary => "brenner-boundary",
            IneqId::HybridPoincareMeanCr => "hybrid-poincare-mean-cr",
            IneqId::HybridPoincareBoundary => "hybrid-poincare-boundary",
            IneqId::HybridPoincareMeanU => "hybrid-poincare-mean-u",
            IneqId::CrTraceMean => "cr-trace-mean",
            IneqId::CrTraceBoundary => "cr-trace-boundary",
            IneqId::HybridTraceU => "hybrid-trace-u",
            IneqId::HybridTraceUhat => "hybrid-trace-uhat",
            IneqId::PhPoincareMean => "ph-poincare-mean",
            IneqId::PhPoincareBoundary => "ph-poincare-boundary",
            IneqId::PhPoincareMeanU => "ph-poincare-mean-u",
            IneqId::PhTraceU => "ph-trace-u",
            IneqId::PhTraceUhat => "ph-trace-uhat",
            IneqId::NegativeControl => "negative-control",
        }
    }

    pub fn parse(s: &str) -> Result<IneqId, IneqError> {
        ALL_IDS
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| IneqError::UnknownId {
                name: s.into(),
                valid: ALL_IDS.map(|i| i.name()).join(", "),
            })
    }

    /// Per-cell inequalities, audited cell by cell rather than as one global form.
    pub fn is_local(self) -> bool {
        matches!(self, IneqId::SimplexTrace | IneqId::SimplexPoincare)
    }

    /// Mutated forms that must not pass.
    pub fn is_negative_control(self) -> bool {
        self == IneqId::NegativeControl
    }

    pub fn uses_gamma(self) -> bool {
        matches!(
            self,
            IneqId::BrennerBoundary
                | IneqId::HybridPoincareBoundary
                | IneqId::CrTraceBoundary
                | IneqId::HybridTraceU
                | IneqId::HybridTraceUhat
                | IneqId::PhPoincareBoundary
                | IneqId::PhTraceU
                | IneqId::PhTraceUhat
                | IneqId::NegativeControl
        )
    }
}

/// (A, B) of a global inequality A ≲ B on `space`, with h = h_max and Γ given
/// as a list of boundary faces.
pub fn global_forms(
    id: IneqId,
    space: &HybridSpace,
    gamma: &[usize],
) -> Result<(QuadraticForm, QuadraticForm), IneqError> {
    if id.is_local() {
        return Err(IneqError::LocalOnly(id.name()));
    }
    if id.uses_gamma() {
        let m = space.mesh();
        if gamma.is_empty() {
            return Err(IneqError::EmptyGamma);
        }
        if let Some(&f) = gamma.iter().find(|&&f| m.face(f).is_interior()) {
            return Err(IneqError::NotBoundary(f));
        }
    }
    let h = space.h();
    let hy = Layout::hybrid(space);
    let ce = Layout::cells(space);
    let cr = Layout::cr(space);
    let q = QuadraticForm::new;
    let forms = match id {
        IneqId::BrennerMean | IneqId::BrennerBoundary => {
            let a = q(ce).with("l2", 1.0, l2_cells(space, &ce));
            let b = q(ce)
                .with("h1", 1.0, h1_cells(space, &ce))
                .with("jump", 1.0, jumps(space, &ce));
            let b = if id == IneqId::BrennerMean {
                b.with("u_integral", 1.0, u_integral(space, &ce))
            } else {
                b.with("gamma_u", 1.0, gamma_u(space, &ce, gamma))
            };
            (a, b)
        }
        IneqId::HybridPoincareMeanCr
        | IneqId::HybridPoincareBoundary
        | IneqId::HybridPoincareMeanU
        | IneqId::NegativeControl => {
            let a = q(hy).with("l2", 1.0, l2_cells(space, &hy));
            let b = q(hy)
                .with("h1", h * h, h1_cells(space, &hy))
                .with("mismatch", h, mismatch(space, &hy, false))
                .with("cr_h1", 1.0, cr_seminorm(space, &hy));
            let b = match id {
                IneqId::HybridPoincareMeanCr => b.with("cr_integral", 1.0, cr_integral(space, &hy)),
                IneqId::HybridPoincareMeanU => b.with("u_integral", 1.0, u_integral(space, &hy)),
                IneqId::NegativeControl => b
                    .with("gamma_uhat", 1.0, gamma_uhat(space, &hy, gamma))
                    .without("mismatch"),
                _ => b.with("gamma_uhat", 1.0, gamma_uhat(space, &hy, gamma)),
            };
            (a, b)
        }
        IneqId::CrTraceMean => (
            q(cr).with("cr_boundary", 1.0, cr_boundary_l2(space, &cr)),
            q(cr)
                .with("cr_h1", 1.0 + h * h, cr_seminorm(space, &cr))
                .with("cr_integral", 1.0, cr_integral(space, &cr)),
        ),
        IneqId::CrTraceBoundary => (
            q(cr).with("cr_boundary", 1.0, cr_boundary_l2(space, &cr)),
            q(cr).with("cr_h1", 1.0 + h, cr_seminorm(space, &cr)).with(
                "gamma_uhat",
                1.0,
                gamma_uhat(space, &cr, gamma),
            ),
        ),
        IneqId::HybridTraceU | IneqId::HybridTraceUhat => {
            let a = if id == IneqId::HybridTraceU {
                q(hy).with("trace_u_boundary", 1.0, trace_u_boundary(space, &hy))
            } else {
                q(hy).with("uhat_boundary", 1.0, uhat_boundary(space, &hy))
            };
            let b = q(hy)
                .with("h1", h, h1_cells(space, &hy))
                .with("mismatch_boundary", 1.0, mismatch(space, &hy, true))
                .with("cr_h1", 1.0 + h, cr_seminorm(space, &hy))
                .with("gamma_uhat", 1.0, gamma_uhat(space, &hy, gamma));
            (a, b)
        }
        IneqId::PhPoincareMean | IneqId::PhPoincareBoundary | IneqId::PhPoincareMeanU => {
            let a = q(hy).with("l2", 1.0, l2_cells(space, &hy));
            let b = q(hy)
                .with("flux", 1.0 + h * h, flux(space, &hy))
                .with("mismatch", h, mismatch(space, &hy, false));
            let b = match id {
                IneqId::PhPoincareMean => b.with("cr_integral", 1.0, cr_integral(space, &hy)),
                IneqId::PhPoincareMeanU => b.with("u_integral", 1.0, u_integral(space, &hy)),
                _ => b.with("gamma_uhat", 1.0, gamma_uhat(space, &hy, gamma)),
            };
            (a, b)
        }
        IneqId::PhTraceU | IneqId::PhTraceUhat => {
            let a = if id == IneqId::PhTraceU {
                q(hy).with("trace_u_boundary", 1.0, trace_u_boundary(space, &hy))
            } else {
                q(hy).with("uhat_boundary", 1.0, uhat_boundary(space, &hy))
            };
            let b = q(hy)
                .with("flux", 1.0 + h, flux(space, &hy))
                .with("mismatch", 1.0, mismatch(space, &hy, false))
                .with("gamma_uhat", 1.0, gamma_uhat(space, &hy, gamma));
            (a, b)
        }
        IneqId::SimplexTrace | IneqId::SimplexPoincare => unreachable!(),
    };
    Ok(forms)
}
