use super::problems::Problem;
use super::{residual_check, solve_bvp, stability_energy, BvpData, HdgError};
use crate::fields::HybridSpace;
use crate::polybasis::quad_triangle;
use crate::report::{fmt_f, loglog_slope};

/// One row of the hdg CSV. Errors are `None` when no exact solution is known,
/// orders are `None` on the coarsest level.
#[derive(Clone, Debug, PartialEq)]
pub struct HdgRow {
    pub experiment: String,
    pub k: usize,
    pub level: usize,
    pub h_max: f64,
    pub n_dof: usize,
    /// E(h) = ‖p‖² + τ‖u − û‖²_{∂T_h} + ‖û‖²_{Γ_D}.
    pub energy: f64,
    pub err_u: Option<f64>,
    pub err_p: Option<f64>,
    pub order_u: Option<f64>,
    pub order_p: Option<f64>,
    /// Largest relative residual of the discrete equations.
    pub residual: f64,
    /// ‖Π_20 f − Π_40 f‖ when f is integrated with a fixed rule.
    pub quadrature_error: Option<f64>,
}

pub const CSV_HEADER: &str = "experiment,k,level,h_max,n_dof,energy,err_u,err_p,order_u,order_p,residual";

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

impl HdgRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.k,
            self.level,
            fmt_f(self.h_max),
            self.n_dof,
            fmt_f(self.energy),
            opt(self.err_u),
            opt(self.err_p),
            opt(self.order_u),
            opt(self.order_p),
            fmt_f(self.residual)
        )
    }
}

/// Solve `problem` on level `level` (n = 2^level) and measure everything.
pub fn solve_level(problem: &Problem, k: usize, level: usize, tau: f64) -> Result<HdgRow, HdgError> {
    let space = HybridSpace::new(problem.mesh(level), k)?;
    let data = problem.data(tau);
    let (sys, sol) = solve_bvp(&space, &data)?;
    let res = residual_check(&space, &sys, &sol);
    let (err_u, err_p) = match problem.exact() {
        Some((u, gu)) => {
            let shift = problem.gauge_shift();
            let (eu, ep) = errors(&space, &sol, |x| u(x) - shift, gu)?;
            (Some(eu), Some(ep))
        }
        None => (None, None),
    };
    Ok(HdgRow {
        experiment: problem.name.to_string(),
        k,
        level,
        h_max: space.h(),
        n_dof: sys.n_free(),
        energy: stability_energy(&space, &sys, &sol),
        err_u,
        err_p,
        order_u: None,
        order_p: None,
        residual: res.max(),
        quadrature_error: quadrature_error(&space, &data)?,
    })
}

fn quadrature_error(space: &HybridSpace, data: &BvpData) -> Result<Option<f64>, HdgError> {
    let Some(deg) = data.f_exactness else { return Ok(None) };
    let lo = space.project_cell_with(&quad_triangle(deg)?, &data.f);
    let hi = space.project_cell_with(&quad_triangle(2 * deg)?, &data.f);
    let d: f64 = lo.coef.iter().zip(&hi.coef).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Some(d.sqrt()))
}

/// (‖u − u_h‖, ‖p + ∇u‖) with a rule well above the discrete degree.
fn errors(
    space: &HybridSpace,
    sol: &super::Solution,
    u: impl Fn([f64; 2]) -> f64,
    grad: impl Fn([f64; 2]) -> [f64; 2],
) -> Result<(f64, f64), HdgError> {
    let k = space.k();
    let rule = quad_triangle(2 * k + 8)?;
    let basis = space.basis();
    let nb = space.nb();
    let (mut eu, mut ep) = (0.0, 0.0);
    for c in 0..space.mesh().n_cells() {
        let map = space.map(c);
        let ub = sol.u.block(c);
        let pb = sol.p.block(c);
        for (xi, w) in rule.iter() {
            let x = map.to_physical(xi);
            let phi = basis.eval_cell(map, x);
            let (mut uh, mut px, mut py) = (0.0, 0.0, 0.0);
            for i in 0..nb {
                uh += ub[i] * phi[i];
                px += pb[i] * phi[i];
                py += pb[nb + i] * phi[i];
            }
            let g = grad(x);
            let wa = w * 2.0 * map.area;
            eu += wa * (u(x) - uh).powi(2);
            ep += wa * ((px + g[0]).powi(2) + (py + g[1]).powi(2));
        }
    }
    Ok((eu.sqrt(), ep.sqrt()))
}

/// Fill in observed orders log2(e_{l−1}/e_l) from consecutive rows.
fn fill_orders(rows: &mut [HdgRow]) {
    for i in 1..rows.len() {
        let ratio = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
            _ => None,
        };
        rows[i].order_u = ratio(rows[i - 1].err_u, rows[i].err_u);
        rows[i].order_p = ratio(rows[i - 1].err_p, rows[i].err_p);
    }
}

/// Convergence table over levels 1..=levels.
pub fn converge(problem: &Problem, k: usize, levels: usize, tau: f64) -> Result<Vec<HdgRow>, HdgError> {
    let mut rows = (1..=levels)
        .map(|l| solve_level(problem, k, l, tau))
        .collect::<Result<Vec<_>, _>>()?;
    fill_orders(&mut rows);
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityThresholds {
    pub max_ratio: f64,
    pub max_slope: f64,
}

impl Default for StabilityThresholds {
    fn default() -> Self {
        StabilityThresholds {
            max_ratio: 2.0,
            max_slope: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    /// max E / min E over the levels.
    pub ratio: f64,
    /// Least-squares slope of log E against log h.
    pub slope: f64,
    pub pass: bool,
}

pub fn stability_verdict(rows: &[HdgRow], th: StabilityThresholds) -> StabilityVerdict {
    let e: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    let max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    let slope = loglog_slope(&rows.iter().map(|r| (r.h_max, r.energy)).collect::<Vec<_>>());
    StabilityVerdict {
        ratio,
        slope,
        pass: rows.len() >= 4 && ratio <= th.max_ratio && slope.abs() <= th.max_slope,
    }
}

/// Energy table over levels 1..=levels with the boundedness verdict.
pub fn stability_sweep(
    problem: &Problem,
    k: usize,
    levels: usize,
    tau: f64,
    th: StabilityThresholds,
) -> Result<(Vec<HdgRow>, StabilityVerdict), HdgError> {
    let rows = converge(problem, k, levels, tau)?;
    let v = stability_verdict(&rows, th);
    Ok((rows, v))
}
