use super::*;
use crate::hdg::flux_from_primal;
use crate::mesh::{build_structured, refine_uniform, BoundaryTag, MeshSource, TagRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn skewed_mesh() -> Mesh {
    let m = Mesh::new(MeshSource {
        vertices: vec![[0.0, 0.0], [1.2, 0.1], [0.3, 0.9], [1.4, 1.3]],
        cells: vec![[0, 1, 2], [3, 2, 1]],
        tags: vec![
            ([0, 1], BoundaryTag::Dirichlet),
            ([1, 3], BoundaryTag::Neumann),
            ([3, 2], BoundaryTag::Dirichlet),
            ([2, 0], BoundaryTag::Neumann),
        ],
        ..Default::default()
    })
    .unwrap();
    refine_uniform(&refine_uniform(&m))
}

fn p0(mesh: &Mesh, g: impl Fn(Point) -> f64) -> SkeletonField {
    let mut s = SkeletonField::zeros(0, mesh.n_faces());
    for f in 0..mesh.n_faces() {
        s.coef[f] = g(mesh.face_midpoint(f)) * mesh.face_length(f).sqrt();
    }
    s
}

fn random_p0(mesh: &Mesh, rng: &mut ChaCha8Rng) -> SkeletonField {
    let mut s = SkeletonField::zeros(0, mesh.n_faces());
    s.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
    s
}

#[test]
fn reproduces_constants_and_affine() {
    let m = skewed_mesh();
    let w = cr_lift(&m, &p0(&m, |_| 2.5)).unwrap();
    for c in 0..m.n_cells() {
        for x in m.cell_points(c) {
            assert!((w.eval(&m, c, x) - 2.5).abs() < 1e-13);
        }
    }
    assert!(w.seminorm_h1(&m) < 1e-12);
    assert!((w.integral_domain(&m) - 2.5 * m.total_area()).abs() < 1e-13);
    let g = |p: Point| 0.7 * p[0] - 1.3 * p[1] + 0.2;
    let w = cr_lift(&m, &p0(&m, g)).unwrap();
    for c in 0..m.n_cells() {
        for x in m.cell_points(c) {
            assert!((w.eval(&m, c, x) - g(x)).abs() < 1e-13);
        }
        let gr = w.grad(&m, c);
        assert!((gr[0] - 0.7).abs() < 1e-12 && (gr[1] + 1.3).abs() < 1e-12);
    }
    let unit = build_structured(4, TagRule::AllDirichlet);
    let x = cr_lift(&unit, &p0(&unit, |p| p[0])).unwrap();
    assert!((x.seminorm_h1(&unit) - 1.0).abs() < 1e-13);
}

#[test]
fn degree_must_be_zero() {
    let m = build_structured(1, TagRule::AllDirichlet);
    assert_eq!(cr_lift(&m, &SkeletonField::zeros(1, 5)), Err(FieldError::Degree(1, 0)));
}

#[test]
fn face_means_recovered_and_integrals() {
    let m = skewed_mesh();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mu = random_p0(&m, &mut rng);
    let w = cr_lift(&m, &mu).unwrap();
    let q = quad_segment(1);
    for f in 0..m.n_faces() {
        for &c in m.face(f).adjacent() {
            let mean: f64 = q.iter().map(|(t, wt)| wt * w.eval(&m, c, m.face_point(f, t))).sum();
            assert!((mean - w.values[f]).abs() < 1e-13);
        }
    }
    let want: f64 = (0..m.n_cells())
        .map(|c| m.area(c) / 3.0 * m.cell_faces(c).iter().map(|cf| w.values[cf.face]).sum::<f64>())
        .sum();
    assert!((w.integral_domain(&m) - want).abs() < 1e-14);
    let space = HybridSpace::new(m.clone(), 1).unwrap();
    let as_cell = w.to_cell_field(&space);
    assert!((space.integral_domain(&as_cell).unwrap() - want).abs() < 1e-13);
    // zero mean-jump across every interior face
    for f in m.interior_faces() {
        let j = space.jump_integral(&as_cell, f).unwrap();
        assert!(j[0].abs() < 1e-12 && j[1].abs() < 1e-12);
    }
    // the seminorm agrees with the cell-field path
    assert!((space.seminorm_h1_broken(&as_cell).unwrap() - w.seminorm_h1(&m)).abs() < 1e-11);
}

#[test]
fn boundary_integral_of_lift_matches_data() {
    let m = skewed_mesh();
    let space = HybridSpace::new(m.clone(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut uh = SkeletonField::zeros(2, m.n_faces());
    uh.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
    let w = cr_lift_of_mean(&space, &uh).unwrap();
    let gamma = m.boundary_faces_where(|p| p[1] < 0.2);
    assert!(!gamma.is_empty());
    let a = w.integral_on_faces(&m, &gamma);
    let b = space.integral_boundary_subset(&uh, &gamma).unwrap();
    assert!((a - b).abs() < 1e-13);
}

#[test]
fn restriction_estimate() {
    let m = skewed_mesh();
    let (l, r) = restriction_estimate_check(&m, &p0(&m, |_| 1.5), 3).unwrap();
    let perim: f64 = m.cell_faces(3).iter().map(|cf| m.face_length(cf.face)).sum();
    assert!((l - 2.25 * perim).abs() < 1e-13 && (r - l).abs() < 1e-13);
    // (1, 0, 0) on the faces of one cell
    let mut mu = SkeletonField::zeros(0, m.n_faces());
    let f0 = m.cell_faces(0)[0].face;
    mu.coef[f0] = m.face_length(f0).sqrt();
    let (l, r) = restriction_estimate_check(&m, &mu, 0).unwrap();
    assert!(l < r - 1e-3 * l);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut violations = 0;
    for _ in 0..1000 {
        let mu = random_p0(&m, &mut rng);
        for c in 0..m.n_cells() {
            let (l, r) = restriction_estimate_check(&m, &mu, c).unwrap();
            if l > r + 1e-12 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn boundary_lift_pairs_with_divergence() {
    let m = skewed_mesh();
    let space = HybridSpace::new(m.clone(), 2).unwrap();
    let nb = space.nb();
    let zero: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; 3]);
    assert!(boundary_lift(&space, 0, &zero).iter().all(|&v| v == 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for c in [0, 5, 17] {
        // μ ≡ 1 on every face: coefficient sqrt|e| on the constant mode
        let one: [Vec<f64>; 3] = std::array::from_fn(|l| {
            let f = m.cell_faces(c)[l].face;
            vec![m.face_length(f).sqrt(), 0.0, 0.0]
        });
        let g = boundary_lift(&space, c, &one);
        let map = space.map(c);
        for _ in 0..20 {
            let omega: Vec<f64> = (0..2 * nb).map(|_| rng.random::<f64>() - 0.5).collect();
            let lhs: f64 = g.iter().zip(&omega).map(|(a, b)| a * b).sum();
            let rhs: f64 = space
                .basis()
                .cell_quadrature(map)
                .into_iter()
                .map(|(x, w)| {
                    let gr = space.basis().grad_cell(map, x);
                    w * (0..nb)
                        .map(|i| omega[i] * gr[i][0] + omega[nb + i] * gr[i][1])
                        .sum::<f64>()
                })
                .sum();
            assert!((lhs - rhs).abs() < 1e-11 * rhs.abs().max(1.0));
        }
    }
}

#[test]
fn boundary_lift_constant_is_mesh_independent() {
    for k in 1..=2 {
        let consts: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| {
                let s = HybridSpace::new(build_structured(n, TagRule::AllDirichlet), k).unwrap();
                (0..s.mesh().n_cells())
                    .map(|c| boundary_lift_constant(&s, c))
                    .fold(0.0, f64::max)
            })
            .collect();
        for c in &consts {
            assert!((c - consts[0]).abs() < 1e-10 * consts[0], "{consts:?}");
        }
    }
}

#[test]
fn gradient_identity() {
    let m = skewed_mesh();
    for k in 1..=3 {
        let space = HybridSpace::new(m.clone(), k).unwrap();
        let u0 = CellField::zeros(k, m.n_cells());
        let uh0 = SkeletonField::zeros(k, m.n_faces());
        let p0 = flux_from_primal(&space, &u0, &uh0);
        assert!(gradient_identity_check(&space, &u0, &uh0, &p0)
            .unwrap()
            .iter()
            .all(|&r| r == 0.0));
        let u = space.project_cell(|p| 2.0 * p[0] - p[1] + 0.5);
        let uh = space.trace_of(&u);
        let p = flux_from_primal(&space, &u, &uh);
        let minus_grad = space.project_vector(|_| [-2.0, 1.0]);
        for (a, b) in p.coef.iter().zip(&minus_grad.coef) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = gradient_identity_check(&space, &u, &uh, &p).unwrap();
        assert!(r.iter().all(|&v| v < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..100 / 3 + 1 {
            let mut u = CellField::zeros(k, m.n_cells());
            let mut uh = SkeletonField::zeros(k, m.n_faces());
            u.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
            uh.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
            let p = flux_from_primal(&space, &u, &uh);
            let r = gradient_identity_check(&space, &u, &uh, &p).unwrap();
            worst = worst.max(r.iter().cloned().fold(0.0, f64::max));
        }
        assert!(worst <= 1e-10, "k={k} {worst:e}");
    }
}
