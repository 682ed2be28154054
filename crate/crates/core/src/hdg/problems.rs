use std::f64::consts::PI;

use super::{BvpData, HdgError};
use crate::mesh::{build_structured, Mesh, Point, TagRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    /// u = sin πx sin πy, homogeneous Dirichlet.
    ManufacturedSine,
    /// u = 1 + 2x − 3y, Dirichlet on x = 0, Neumann elsewhere.
    AffineExact,
    /// f = indicator of the disk |x − (½,½)| < 0.3, zero boundary data.
    RoughIndicator,
    /// f = 0, u_D = sign(x − ½) on y = 0 and zero on the other sides.
    RoughDirichlet,
    /// u = x² + y² + x³ − 3xy² with Neumann data on all of ∂Ω.
    PureNeumann,
}

/// Entry of the problem registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub name: &'static str,
    pub tags: TagRule,
}

const REGISTRY: [Problem; 5] = [
    Problem {
        kind: ProblemKind::ManufacturedSine,
        name: "manufactured-sine",
        tags: TagRule::AllDirichlet,
    },
    Problem {
        kind: ProblemKind::AffineExact,
        name: "affine-exact",
        tags: TagRule::LeftDirichlet,
    },
    Problem {
        kind: ProblemKind::RoughIndicator,
        name: "rough-indicator",
        tags: TagRule::LeftDirichlet,
    },
    Problem {
        kind: ProblemKind::RoughDirichlet,
        name: "rough-dirichlet",
        tags: TagRule::AllDirichlet,
    },
    Problem {
        kind: ProblemKind::PureNeumann,
        name: "pure-neumann",
        tags: TagRule::AllNeumann,
    },
];

pub fn problem_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|p| p.name).collect()
}

pub fn problem(name: &str) -> Result<Problem, HdgError> {
    REGISTRY
        .iter()
        .find(|p| p.name == name)
        .copied()
        .ok_or_else(|| HdgError::UnknownProblem {
            name: name.into(),
            valid: problem_names().join(", "),
        })
}

/// Outward unit normal of the unit square at a point interior to one of its sides.
fn square_normal(p: Point) -> [f64; 2] {
    let d = [p[1], 1.0 - p[0], 1.0 - p[1], p[0]];
    let side = (0..4).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
    [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]][side]
}

pub type Exact = (Box<dyn Fn(Point) -> f64>, Box<dyn Fn(Point) -> [f64; 2]>);

impl Problem {
    /// Structured mesh with n = 2^level.
    pub fn mesh(&self, level: usize) -> Mesh {
        build_structured(1 << level, self.tags)
    }

    pub fn data(&self, tau: f64) -> BvpData {
        match self.kind {
            ProblemKind::ManufacturedSine => BvpData::new(
                |p| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin(),
                |_| 0.0,
                |_| 0.0,
                tau,
            ),
            ProblemKind::AffineExact => BvpData::new(
                |_| 0.0,
                |p| 1.0 + 2.0 * p[0] - 3.0 * p[1],
                |p| {
                    let n = square_normal(p);
                    2.0 * n[0] - 3.0 * n[1]
                },
                tau,
            ),
            ProblemKind::RoughIndicator => {
                let mut d = BvpData::new(
                    |p| {
                        let r2 = (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2);
                        if r2 < 0.09 {
                            1.0
                        } else {
                            0.0
                        }
                    },
                    |_| 0.0,
                    |_| 0.0,
                    tau,
                );
                d.f_exactness = Some(20);
                d
            }
            ProblemKind::RoughDirichlet => BvpData::new(
                |_| 0.0,
                |p| {
                    if p[1] < 1e-12 {
                        (p[0] - 0.5).signum()
                    } else {
                        0.0
                    }
                },
                |_| 0.0,
                tau,
            ),
            ProblemKind::PureNeumann => BvpData::new(
                |_| -4.0,
                |_| 0.0,
                |p| {
                    let g = neumann_grad(p);
                    let n = square_normal(p);
                    g[0] * n[0] + g[1] * n[1]
                },
                tau,
            ),
        }
    }

    /// Exact solution and gradient when known. For the pure Neumann problem
    /// the solution is fixed only up to a constant; see [`Problem::gauge_shift`].
    pub fn exact(&self) -> Option<Exact> {
        match self.kind {
            ProblemKind::ManufacturedSine => Some((
                Box::new(|p: Point| (PI * p[0]).sin() * (PI * p[1]).sin()),
                Box::new(|p: Point| {
                    [
                        PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                        PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                    ]
                }),
            )),
            ProblemKind::AffineExact => Some((
                Box::new(|p: Point| 1.0 + 2.0 * p[0] - 3.0 * p[1]),
                Box::new(|_| [2.0, -3.0]),
            )),
            ProblemKind::PureNeumann => Some((Box::new(neumann_u), Box::new(neumann_grad))),
            ProblemKind::RoughIndicator | ProblemKind::RoughDirichlet => None,
        }
    }

    /// Constant to subtract from the exact solution so that it satisfies the
    /// gauge ∫_{∂Ω} u ds = 0 (boundary mean of u, by exact quadrature).
    pub fn gauge_shift(&self) -> f64 {
        if self.kind != ProblemKind::PureNeumann {
            return 0.0;
        }
        let q = crate::polybasis::quad_segment(6);
        let sides: [(Point, Point); 4] = [
            ([0.0, 0.0], [1.0, 0.0]),
            ([1.0, 0.0], [1.0, 1.0]),
            ([1.0, 1.0], [0.0, 1.0]),
            ([0.0, 1.0], [0.0, 0.0]),
        ];
        let total: f64 = sides
            .iter()
            .map(|(a, b)| {
                q.iter()
                    .map(|(t, w)| w * neumann_u([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))
                    .sum::<f64>()
            })
            .sum();
        total / 4.0
    }
}

fn neumann_u(p: Point) -> f64 {
    let (x, y) = (p[0], p[1]);
    x * x + y * y + x * x * x - 3.0 * x * y * y
}

fn neumann_grad(p: Point) -> [f64; 2] {
    let (x, y) = (p[0], p[1]);
    [2.0 * x + 3.0 * x * x - 3.0 * y * y, 2.0 * y - 6.0 * x * y]
}
