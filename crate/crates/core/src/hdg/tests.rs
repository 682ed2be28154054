use super::*;
use crate::lifting::cr_lift_of_mean;
use crate::mesh::{build_structured, TagRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(n: usize, rule: TagRule, k: usize) -> HybridSpace {
    HybridSpace::new(build_structured(n, rule), k).unwrap()
}

fn affine(p: Point) -> f64 {
    0.5 - 1.5 * p[0] + 2.0 * p[1]
}

#[test]
fn single_square_has_two_free_dofs() {
    let s = space(1, TagRule::AllDirichlet, 1);
    let sys = assemble_condensed(&s, &BvpData::zero(1.0)).unwrap();
    assert_eq!(sys.n_free(), 2);
    let (_, info) = sys.matrix.solve_spd(&[1.0, 0.0]).unwrap();
    assert!(info.min_pivot > 0.0);
}

#[test]
fn condensed_matrix_symmetric() {
    let s = space(4, TagRule::LeftDirichlet, 2);
    let sys = assemble_condensed(&s, &BvpData::zero(1.0)).unwrap();
    // symmetry is structural in storage, so compare the dense local Schur blocks
    for c in 0..s.mesh().n_cells() {
        let (a, b, ete) = local_blocks(&s, c, 1.0);
        let sk = ete - b.transpose() * a.llt(Side::Lower).unwrap().solve(&b);
        let asym = (&sk - sk.transpose()).norm_max();
        assert!(asym <= 1e-12 * sk.norm_max(), "cell {c}: {asym}");
    }
    assert!(sys.matrix.norm_max() > 0.0);
}

#[test]
fn zero_data_zero_solution() {
    let s = space(3, TagRule::AllDirichlet, 2);
    let (sys, sol) = solve_bvp(&s, &BvpData::zero(1.0)).unwrap();
    assert!(sys.rhs.iter().all(|&v| v == 0.0));
    assert_eq!(sol.u.coef_norm(), 0.0);
    assert_eq!(sol.p.coef_norm(), 0.0);
}

#[test]
fn bad_tau_rejected() {
    let s = space(1, TagRule::AllDirichlet, 1);
    for tau in [0.0, -1.0, f64::NAN] {
        assert!(matches!(
            assemble_condensed(&s, &BvpData::zero(tau)),
            Err(HdgError::Tau(_))
        ));
    }
}

fn affine_errors(rule: TagRule, k: usize) -> (f64, f64) {
    let s = space(4, rule, k);
    let data = BvpData::new(
        |_| 0.0,
        affine,
        |p| {
            // -p·n = ∇g·n; only the left side is Dirichlet under LeftDirichlet
            let n = if p[1] < 1e-12 {
                [0.0, -1.0]
            } else if p[1] > 1.0 - 1e-12 {
                [0.0, 1.0]
            } else if p[0] > 0.5 {
                [1.0, 0.0]
            } else {
                [-1.0, 0.0]
            };
            -1.5 * n[0] + 2.0 * n[1]
        },
        1.0,
    );
    let (_, sol) = solve_bvp(&s, &data).unwrap();
    let exact = s.project_cell(affine);
    let eu = sol
        .u
        .coef
        .iter()
        .zip(&exact.coef)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ep = (0..s.mesh().n_cells())
        .map(|c| {
            let centroid = s.mesh().centroid(c);
            let pv = {
                let b = sol.p.block(c);
                let phi = s.basis().eval_cell(s.map(c), centroid);
                let nb = s.nb();
                let px: f64 = (0..nb).map(|i| b[i] * phi[i]).sum();
                let py: f64 = (0..nb).map(|i| b[nb + i] * phi[i]).sum();
                [px, py]
            };
            (pv[0] - 1.5).abs().max((pv[1] + 2.0).abs())
        })
        .fold(0.0, f64::max);
    (eu, ep)
}

#[test]
fn affine_solution_reproduced() {
    for k in 1..=3 {
        for rule in [TagRule::AllDirichlet, TagRule::LeftDirichlet] {
            let (eu, ep) = affine_errors(rule, k);
            assert!(eu <= 1e-10 && ep <= 1e-10, "k={k} {rule:?}: {eu} {ep}");
        }
    }
}

fn neumann_data() -> BvpData {
    crate::hdg::problem("pure-neumann").unwrap().data(1.0)
}

#[test]
fn pure_neumann_needs_gauge() {
    let s = space(2, TagRule::AllNeumann, 1);
    let sys = assemble_condensed(&s, &neumann_data()).unwrap();
    assert!(sys.is_pure_neumann());
    assert_eq!(solve(&s, &sys, Gauge::None).unwrap_err(), HdgError::MissingGauge);
    let d = space(2, TagRule::AllDirichlet, 1);
    let sys_d = assemble_condensed(&d, &BvpData::zero(1.0)).unwrap();
    assert_eq!(
        solve(&d, &sys_d, Gauge::SkeletonMeanZero).unwrap_err(),
        HdgError::UnneededGauge
    );
}

#[test]
fn pure_neumann_gauge_holds() {
    for k in 1..=2 {
        let s = space(4, TagRule::AllNeumann, k);
        let (sys, sol) = solve_bvp(&s, &neumann_data()).unwrap();
        let bnd: Vec<usize> = s.mesh().boundary_faces().collect();
        let mean = s.integral_boundary_subset(&sol.uhat, &bnd).unwrap();
        assert!(mean.abs() <= 1e-10, "k={k}: {mean}");
        let r = residual_check(&s, &sys, &sol);
        assert!(r.max() <= 1e-10, "{r:?}");
        // compatible data: the multiplier is a discretization-level quantity, not O(1)
        assert!(sol.gauge_multiplier.abs() < 1e-8, "λ = {}", sol.gauge_multiplier);
    }
}

#[test]
fn residuals_for_two_taus() {
    let prob = crate::hdg::problem("manufactured-sine").unwrap();
    for tau in [1.0, 10.0] {
        for k in 1..=2 {
            let s = HybridSpace::new(prob.mesh(2), k).unwrap();
            let (sys, sol) = solve_bvp(&s, &prob.data(tau)).unwrap();
            let r = residual_check(&s, &sys, &sol);
            assert!(r.max() <= 1e-10, "τ={tau} k={k}: {r:?}");
            assert!(sol.info.residual <= 1e-10);
        }
    }
}

#[test]
fn energy_identity_homogeneous_dirichlet() {
    let s = space(4, TagRule::AllDirichlet, 1);
    let (sys, sol) = solve_bvp(&s, &BvpData::new(|_| 1.0, |_| 0.0, |_| 0.0, 1.0)).unwrap();
    let e = energy_check(&s, &sys, &sol);
    assert!(e.lhs > 0.0);
    assert!((e.lhs - e.rhs).abs() <= 1e-12 * e.lhs, "{e:?}");
}

#[test]
fn energy_identity_mixed_and_pure_neumann() {
    for (rule, k) in [(TagRule::LeftDirichlet, 2), (TagRule::AllNeumann, 3)] {
        let s = space(3, rule, k);
        let data = if rule == TagRule::AllNeumann {
            neumann_data()
        } else {
            BvpData::new(|p| p[0] * p[1], |_| 0.0, |p| p[0] - p[1], 1.0)
        };
        let (sys, sol) = solve_bvp(&s, &data).unwrap();
        let e = energy_check(&s, &sys, &sol);
        assert!((e.lhs - e.rhs).abs() <= 1e-10 * e.lhs, "{rule:?}: {e:?}");
    }
}

#[test]
fn energy_identity_needs_dirichlet_term() {
    let s = space(4, TagRule::AllDirichlet, 1);
    let (sys, sol) = solve_bvp(&s, &BvpData::new(|_| 0.0, |p| p[0], |_| 0.0, 1.0)).unwrap();
    let e = energy_check(&s, &sys, &sol);
    assert!((e.lhs - e.rhs).abs() > 1e-3 * e.lhs, "{e:?}");
    assert!((e.lhs - e.generalized_rhs).abs() <= 1e-10 * e.lhs, "{e:?}");
}

#[test]
fn zero_energy_for_zero_data() {
    let s = space(2, TagRule::AllDirichlet, 2);
    let (sys, sol) = solve_bvp(&s, &BvpData::zero(1.0)).unwrap();
    let e = energy_check(&s, &sys, &sol);
    assert_eq!((e.lhs, e.rhs), (0.0, 0.0));
}

#[test]
fn dirichlet_estimate() {
    let s = space(4, TagRule::AllDirichlet, 1);
    let zero = BvpData::zero(1.0);
    let (_, sol) = solve_bvp(&s, &zero).unwrap();
    assert_eq!(dirichlet_estimate_check(&s, &sol, &zero), (0.0, 0.0));

    let poly = BvpData::new(|_| 0.0, affine, |_| 0.0, 1.0);
    let (_, sol) = solve_bvp(&s, &poly).unwrap();
    let (l, r) = dirichlet_estimate_check(&s, &sol, &poly);
    assert!((l - r).abs() <= 1e-12 * r.max(1.0), "{l} {r}");

    // s runs along each side, so sin(3πs) is sin(3πx) or sin(3πy)
    let wavy = BvpData::new(
        |_| 0.0,
        |p| {
            let s = if p[1] < 1e-12 || p[1] > 1.0 - 1e-12 { p[0] } else { p[1] };
            (3.0 * std::f64::consts::PI * s).sin()
        },
        |_| 0.0,
        1.0,
    );
    let (_, sol) = solve_bvp(&s, &wavy).unwrap();
    let (l, r) = dirichlet_estimate_check(&s, &sol, &wavy);
    assert!(l < r - 1e-6, "{l} {r}");
}

#[test]
fn flux_of_constants_and_affine() {
    let s = space(3, TagRule::AllDirichlet, 2);
    let u = s.project_cell(|_| 2.5);
    let uh = s.project_skeleton(|_| 2.5);
    assert!(flux_from_primal(&s, &u, &uh).coef_norm() <= 1e-12);
    let u = s.project_cell(|p| p[0]);
    let uh = s.trace_of(&u);
    let p = flux_from_primal(&s, &u, &uh);
    let expect = s.project_vector(|_| [-1.0, 0.0]);
    let d: f64 = p
        .coef
        .iter()
        .zip(&expect.coef)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(d <= 1e-12, "{d}");
}

#[test]
fn cr_lift_gradient_bounded_by_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=2 {
        let s = space(2, TagRule::AllDirichlet, k);
        let m = s.mesh();
        for _ in 0..50 {
            let mut u = CellField::zeros(k, m.n_cells());
            let mut uh = SkeletonField::zeros(k, m.n_faces());
            u.coef.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            uh.coef.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            let p = flux_from_primal(&s, &u, &uh);
            let lift = cr_lift_of_mean(&s, &uh).unwrap();
            for c in 0..m.n_cells() {
                let g = lift.grad(m, c);
                let lhs = (g[0] * g[0] + g[1] * g[1]) * m.area(c);
                let rhs: f64 = p.block(c).iter().map(|v| v * v).sum();
                assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-14, "k={k} c={c}: {lhs} > {rhs}");
            }
        }
    }
}

#[test]
fn problems_converge_and_report() {
    let prob = problem("manufactured-sine").unwrap();
    let rows = converge(&prob, 1, 3, 1.0).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].order_u.is_none());
    let o = rows[2].order_u.unwrap();
    assert!(o > 1.5, "order {o}");
    assert!(rows[2].csv_line().starts_with("manufactured-sine,1,3,"));
    let rough = solve_level(&problem("rough-indicator").unwrap(), 1, 2, 1.0).unwrap();
    assert!(
        rough.err_u.is_none() && rough.quadrature_error.unwrap() < 5e-2,
        "{rough:?}"
    );
}
