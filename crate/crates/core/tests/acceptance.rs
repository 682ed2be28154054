//! Acceptance suite. Each test evaluates one criterion, prints a single
//! `criterion N ... PASS|FAIL` line to stderr and then asserts it. Tests hold a shared
//! lock so the wall-clock budgets are measured without contention.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use faer::Mat;
use hdgkit::fields::{CellField, HybridSpace, SkeletonField};
use hdgkit::hdg::{self, energy_check, flux_from_primal, solve_bvp, BvpData, StabilityThresholds};
use hdgkit::inequalities::{form_simplex_trace, simplex_trace_coefficient, sweep, AuditConfig, IneqId, Sweep};
use hdgkit::lifting::cr_lift_of_mean;
use hdgkit::linalg::{gen_eig_max_dense, sym_eig, SymmetricDense, TripletBuilder, DEFAULT_NULL_TOL};
use hdgkit::mesh::{build_structured, TagRule};
use hdgkit::polybasis::{quad_triangle, Basis, CellMap, TriangleBasis, MAX_DEGREE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static LOCK: Mutex<()> = Mutex::new(());

fn report(n: usize, title: &str, pass: bool, detail: &str, elapsed: Duration, budget: Duration) {
    let ok = pass && elapsed <= budget;
    // written straight to the stream so the line survives output capture
    let _ = writeln!(
        std::io::stderr(),
        "criterion {n:>2} {title}: {} ({detail}; {:.1} s of {} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(elapsed <= budget, "criterion {n} over budget: {elapsed:?} > {budget:?}");
}

fn sweeps_verdict(ids: &[IneqId], ks: &[usize], levels: usize) -> (bool, String) {
    let cfg = AuditConfig::default();
    let mut all = true;
    let mut parts = Vec::new();
    for &id in ids {
        for &k in ks {
            let s: Sweep = sweep(id, k, levels, &cfg).unwrap();
            all &= s.verdict.pass;
            parts.push(format!(
                "{} k={k} ratio {:.3} slope {:.3}{}",
                id.name(),
                s.verdict.ratio,
                s.verdict.slope,
                if s.verdict.pass { "" } else { " FAIL" }
            ));
        }
    }
    (all, parts.join(", "))
}

#[test]
fn criterion_01_simplex_trace() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut k0_dev: f64 = 0.0;
    let mut violations = 0;
    for k in 0..=3 {
        let space = HybridSpace::new(build_structured(8, TagRule::AllDirichlet), k).unwrap();
        let m = space.mesh();
        for c in 0..m.n_cells() {
            for l in 0..3 {
                let (a, b) = form_simplex_trace(&space, c, l);
                let lam = gen_eig_max_dense(a.as_ref(), b.as_ref(), DEFAULT_NULL_TOL)
                    .unwrap()
                    .lambda()
                    .unwrap();
                let e = m.face_length(m.cell_faces(c)[l].face);
                let ratio = e / m.area(c);
                let bound = simplex_trace_coefficient(k) * ratio;
                if lam > bound * (1.0 + 1e-10) {
                    violations += 1;
                }
                worst = worst.max(lam / bound);
                if k == 0 {
                    k0_dev = k0_dev.max((lam - ratio).abs() / ratio);
                }
            }
        }
    }
    let pass = violations == 0 && k0_dev <= 1e-10;
    let detail = format!("max λ/bound {worst:.6}, k=0 deviation {k0_dev:.1e}, {violations} violations");
    report(
        1,
        "simplex trace bound",
        pass,
        &detail,
        t.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_02_energy_identity() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let configs = [
            (
                TagRule::AllDirichlet,
                BvpData::new(|p| 1.0 + p[0] * p[1].sin(), |_| 0.0, |_| 0.0, 1.0),
            ),
            (
                TagRule::LeftDirichlet,
                BvpData::new(|p| (3.0 * p[0]).cos() - p[1], |_| 0.0, |p| p[0] - 2.0 * p[1], 2.5),
            ),
        ];
        for (tags, data) in configs {
            let space = HybridSpace::new(build_structured(8, tags), k).unwrap();
            let (sys, sol) = solve_bvp(&space, &data).unwrap();
            let e = energy_check(&space, &sys, &sol);
            worst = worst.max((e.lhs - e.rhs).abs() / e.lhs);
        }
    }
    let detail = format!("max |lhs - rhs|/lhs {worst:.2e} over 6 configurations");
    report(
        2,
        "energy identity",
        worst <= 1e-10,
        &detail,
        t.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_03_cr_lift_below_flux() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for k in 1..=2 {
        let space = HybridSpace::new(build_structured(4, TagRule::AllDirichlet), k).unwrap();
        let m = space.mesh();
        for _ in 0..1000 {
            let mut u = CellField::zeros(k, m.n_cells());
            let mut uh = SkeletonField::zeros(k, m.n_faces());
            u.coef.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            uh.coef.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            let p = flux_from_primal(&space, &u, &uh);
            let lift = cr_lift_of_mean(&space, &uh).unwrap();
            for c in 0..m.n_cells() {
                let g = lift.grad(m, c);
                let lhs = ((g[0] * g[0] + g[1] * g[1]) * m.area(c)).sqrt();
                let rhs = p.block(c).iter().map(|v| v * v).sum::<f64>().sqrt();
                if lhs > rhs * (1.0 + 1e-12) {
                    violations += 1;
                }
                tightest = tightest.max(lhs / rhs);
            }
        }
    }
    let detail = format!("{violations} violations in 2000 pairs, max ratio {tightest:.6}");
    report(
        3,
        "CR lift gradient below flux",
        violations == 0,
        &detail,
        t.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_hybrid_poincare() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let ids = [
        IneqId::HybridPoincareMeanCr,
        IneqId::HybridPoincareBoundary,
        IneqId::HybridPoincareMeanU,
    ];
    let (pass, detail) = sweeps_verdict(&ids, &[1, 2], 4);
    report(
        4,
        "hybrid Poincaré boundedness",
        pass,
        &detail,
        t.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_05_trace() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let (a, da) = sweeps_verdict(&[IneqId::HybridTraceU, IneqId::HybridTraceUhat], &[1, 2], 4);
    // the CR forms do not depend on k
    let (b, db) = sweeps_verdict(&[IneqId::CrTraceMean, IneqId::CrTraceBoundary], &[1], 4);
    report(
        5,
        "hybrid and CR trace boundedness",
        a && b,
        &format!("{da}, {db}"),
        t.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_06_flux_forms() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let ids = [
        IneqId::PhPoincareMean,
        IneqId::PhPoincareBoundary,
        IneqId::PhPoincareMeanU,
        IneqId::PhTraceU,
        IneqId::PhTraceUhat,
    ];
    let (pass, detail) = sweeps_verdict(&ids, &[1, 2], 4);
    report(
        6,
        "flux-form Poincaré and trace",
        pass,
        &detail,
        t.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_07_stability() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["rough-indicator", "rough-dirichlet"] {
        let p = hdg::problem(name).unwrap();
        let (rows, v) = hdg::stability_sweep(&p, 1, 5, 1.0, StabilityThresholds::default()).unwrap();
        pass &= v.pass;
        let e: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.energy)).collect();
        parts.push(format!(
            "{name} E=[{}] ratio {:.3} slope {:.3}{}",
            e.join(" "),
            v.ratio,
            v.slope,
            if v.pass { "" } else { " FAIL" }
        ));
    }
    report(
        7,
        "stability under minimal regularity",
        pass,
        &parts.join(", "),
        t.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_08_negative_control() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let s = sweep(IneqId::NegativeControl, 1, 4, &AuditConfig::default()).unwrap();
    let unbounded = s.rows.iter().filter(|r| r.is_unbounded()).count();
    let rejected = !s.verdict.pass;
    let detail = format!(
        "{unbounded}/4 levels unbounded, verdict {}",
        if rejected { "fail" } else { "pass" }
    );
    report(
        8,
        "negative control rejected",
        rejected,
        &detail,
        t.elapsed(),
        Duration::from_secs(60),
    );
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[test]
fn criterion_09_kernel_oracles() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();

    // quadrature: ∫_T̂ x^a y^b = a! b! / (a+b+2)!
    let q = quad_triangle(10).unwrap();
    let mut quad_err: f64 = 0.0;
    for a in 0..=10 {
        for b in 0..=10 - a {
            let v: f64 = q
                .iter()
                .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                .sum();
            quad_err = quad_err.max((v - fact(a) * fact(b) / fact(a + b + 2)).abs());
        }
    }

    // symmetric eigendecomposition reconstruction
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut eig_err: f64 = 0.0;
    for n in [1, 5, 17, 40] {
        let g = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = SymmetricDense::from_mat((&g + g.transpose()).as_ref());
        let e = sym_eig(&a).unwrap();
        let lam = Mat::from_fn(n, n, |i, j| if i == j { e.values[i] } else { 0.0 });
        let am = a.to_mat();
        let r = &e.vectors * &lam * e.vectors.transpose() - &am;
        eig_err = eig_err.max(r.norm_l2() / am.norm_l2());
    }

    // sparse direct solve on a shifted 5-point Laplacian
    let n = 30;
    let mut tb = TripletBuilder::new(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = i * n + j;
            tb.add(d, d, 4.0 + 1e-3);
            if i + 1 < n {
                tb.add(d + n, d, -1.0);
            }
            if j + 1 < n {
                tb.add(d + 1, d, -1.0);
            }
        }
    }
    let m = tb.build();
    let rhs: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (x, _) = m.solve_spd(&rhs).unwrap();
    let mx = m.matvec(&x);
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let res: Vec<f64> = mx.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let solve_res = norm(&res) / norm(&rhs);

    // basis gradients against central differences, reference and physical
    let h = 1e-6;
    let mut grad_err: f64 = 0.0;
    for k in 1..=MAX_DEGREE {
        let tb = TriangleBasis::new(k).unwrap();
        for p in [[0.2, 0.3], [0.6, 0.1], [0.1, 0.7]] {
            let g = tb.grad(p);
            for dir in [[1.0, 0.0], [0.0, 1.0]] {
                let fp = tb.eval([p[0] + h * dir[0], p[1] + h * dir[1]]);
                let fm = tb.eval([p[0] - h * dir[0], p[1] - h * dir[1]]);
                for i in 0..tb.dim() {
                    let an = g[i][0] * dir[0] + g[i][1] * dir[1];
                    grad_err = grad_err.max(((fp[i] - fm[i]) / (2.0 * h) - an).abs() / an.abs().max(1.0));
                }
            }
        }
    }
    let mesh = build_structured(3, TagRule::AllDirichlet);
    let basis = Basis::new(3).unwrap();
    for c in [0, 7, 17] {
        let map = CellMap::new(&mesh, c).unwrap();
        let x = mesh.centroid(c);
        let g = basis.grad_cell(&map, x);
        for dir in [[1.0, 0.0], [0.0, 1.0]] {
            let fp = basis.eval_cell(&map, [x[0] + h * dir[0], x[1] + h * dir[1]]);
            let fm = basis.eval_cell(&map, [x[0] - h * dir[0], x[1] - h * dir[1]]);
            for i in 0..basis.nb() {
                let an = g[i][0] * dir[0] + g[i][1] * dir[1];
                grad_err = grad_err.max(((fp[i] - fm[i]) / (2.0 * h) - an).abs() / an.abs().max(1.0));
            }
        }
    }

    let pass = quad_err <= 1e-13 && eig_err <= 1e-10 && solve_res <= 1e-10 && grad_err <= 1e-6;
    let detail = format!(
        "quadrature {quad_err:.1e}, eig reconstruction {eig_err:.1e}, sparse residual {solve_res:.1e}, gradient {grad_err:.1e}"
    );
    report(9, "kernel oracles", pass, &detail, t.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_10_convergence() {
    let _g = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let sine = hdg::problem("manufactured-sine").unwrap();
    let affine = hdg::problem("affine-exact").unwrap();
    for k in 1..=2 {
        let rows = hdg::converge(&sine, k, 4, 1.0).unwrap();
        let o = rows.last().unwrap().order_u.unwrap();
        pass &= o >= k as f64 + 0.8;
        parts.push(format!("sine k={k} order_u {o:.3}"));
        let rows = hdg::converge(&affine, k, 4, 1.0).unwrap();
        let e = rows.iter().map(|r| r.err_u.unwrap()).fold(0.0, f64::max);
        pass &= e <= 1e-10;
        parts.push(format!("affine k={k} max err_u {e:.1e}"));
    }
    report(
        10,
        "HDG convergence",
        pass,
        &parts.join(", "),
        t.elapsed(),
        Duration::from_secs(120),
    );
}
