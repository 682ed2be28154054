use super::*;
use crate::mesh::{build_structured, refine_uniform, MeshSource, TagRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(n: usize, k: usize) -> HybridSpace {
    HybridSpace::new(build_structured(n, TagRule::AllDirichlet), k).unwrap()
}

fn skewed(k: usize) -> HybridSpace {
    let m = crate::mesh::Mesh::new(MeshSource {
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
    HybridSpace::new(refine_uniform(&m), k).unwrap()
}

fn random_cell(s: &HybridSpace, rng: &mut ChaCha8Rng) -> CellField {
    let mut u = CellField::zeros(s.k(), s.mesh().n_cells());
    u.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
    u
}

fn random_skel(s: &HybridSpace, rng: &mut ChaCha8Rng) -> SkeletonField {
    let mut u = SkeletonField::zeros(s.k(), s.mesh().n_faces());
    u.coef.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
    u
}

#[test]
fn l2_norm_examples() {
    let s = space(4, 2);
    assert!((s.norm_l2_cells(&s.project_cell(|_| 1.0)).unwrap() - 1.0).abs() < 1e-13);
    assert_eq!(s.norm_l2_cells(&CellField::zeros(2, s.mesh().n_cells())).unwrap(), 0.0);
    let x = s.project_cell(|p| p[0]);
    assert!((s.norm_l2_cells(&x).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-13);
    assert!((s.seminorm_h1_broken(&x).unwrap() - 1.0).abs() < 1e-12);
    assert!(s.seminorm_h1_broken(&s.project_cell(|_| 2.5)).unwrap() < 1e-12);
}

#[test]
fn parseval_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..=3 {
        let s = skewed(k);
        let u = random_cell(&s, &mut rng);
        let q = s.norm_l2_cells(&u).unwrap();
        assert!((q - u.coef_norm()).abs() < 1e-12 * q.max(1.0));
        // broken seminorm against the gradgrad kernel
        let mut g = 0.0;
        for c in 0..s.mesh().n_cells() {
            let kk = &s.kernels(c).gradgrad;
            let b = u.block(c);
            for i in 0..b.len() {
                for j in 0..b.len() {
                    g += b[i] * kk[(i, j)] * b[j];
                }
            }
        }
        let sq = s.seminorm_h1_broken(&u).unwrap();
        assert!((sq * sq - g).abs() < 1e-12 * g.max(1.0));
        // skeleton norm against coefficients
        let uh = random_skel(&s, &mut rng);
        let once: f64 = uh.coef.iter().map(|v| v * v).sum();
        assert!((s.norm_skeleton(&uh, Counting::Once).unwrap().powi(2) - once).abs() < 1e-12);
    }
}

#[test]
fn skeleton_norm_examples() {
    let s = space(1, 1);
    let one_u = s.project_cell(|_| 1.0);
    let want = (4.0 + 2.0 * 2f64.sqrt()).sqrt();
    assert!((s.trace_norm_skeleton(&one_u).unwrap() - want).abs() < 1e-13);
    let one = s.project_skeleton(|_| 1.0);
    assert!((s.norm_skeleton(&one, Counting::Once).unwrap() - (4.0 + 2f64.sqrt()).sqrt()).abs() < 1e-13);
    assert!((s.norm_skeleton(&one, Counting::Hdg).unwrap() - want).abs() < 1e-13);
    let z = SkeletonField::zeros(1, s.mesh().n_faces());
    assert_eq!(s.norm_skeleton(&z, Counting::Hdg).unwrap(), 0.0);
}

#[test]
fn continuous_trace_norm_counts_interior_twice() {
    let s = space(3, 2);
    let u = s.project_cell(|p| p[0] * p[1] + p[1]);
    let tr = s.trace_of(&u);
    let m = s.mesh();
    let mut want = 0.0;
    for f in 0..m.n_faces() {
        let e2: f64 = tr.block(f).iter().map(|v| v * v).sum();
        want += if m.face(f).is_interior() { 2.0 * e2 } else { e2 };
    }
    assert!((s.trace_norm_skeleton(&u).unwrap().powi(2) - want).abs() < 1e-12);
    assert!(s.diff_norm_skeleton(&u, &tr).unwrap() < 1e-12);
}

#[test]
fn jumps() {
    let s = space(3, 2);
    let u = s.project_cell(|p| p[0] * p[0] - p[1]);
    for f in s.mesh().interior_faces() {
        let j = s.jump_integral(&u, f).unwrap();
        assert!(j[0].abs() < 1e-13 && j[1].abs() < 1e-13);
    }
    let f = s.mesh().interior_faces().next().unwrap();
    let [_, cm] = s.mesh().face(f).cells;
    let mut ind = CellField::zeros(2, s.mesh().n_cells());
    ind.block_mut(cm)[0] = s.mesh().area(cm).sqrt();
    let j = s.jump_integral(&ind, f).unwrap();
    let lm = s.mesh().local_face(cm, f).unwrap();
    let nm = s.mesh().outward_normal(cm, lm);
    let len = s.mesh().face_length(f);
    assert!((j[0] - len * nm[0]).abs() < 1e-13 && (j[1] - len * nm[1]).abs() < 1e-13);
    let b = s.mesh().boundary_faces().next().unwrap();
    assert_eq!(s.jump_integral(&u, b), Err(FieldError::BoundaryFace(b)));
}

#[test]
fn face_averages() {
    let s = skewed(2);
    let c = s.project_skeleton(|_| 3.0);
    let avg = s.face_average(&c).unwrap();
    for f in 0..s.mesh().n_faces() {
        assert!((avg.coef[f] / s.mesh().face_length(f).sqrt() - 3.0).abs() < 1e-13);
    }
    let s1 = skewed(1);
    let lin = s1.project_skeleton(|p| 2.0 * p[0] - p[1]);
    let avg = s1.face_average(&lin).unwrap();
    for f in 0..s1.mesh().n_faces() {
        let mid = s1.mesh().face_midpoint(f);
        let want = 2.0 * mid[0] - mid[1];
        assert!((avg.coef[f] / s1.mesh().face_length(f).sqrt() - want).abs() < 1e-13);
    }
    // random k=2 data against 3-point Gauss
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let uh = random_skel(&s, &mut rng);
    let avg = s.face_average(&uh).unwrap();
    let g = crate::polybasis::quad_segment(5);
    assert_eq!(g.len(), 3);
    for f in 0..s.mesh().n_faces() {
        let mean: f64 = g.iter().map(|(t, w)| w * s.eval_face(&uh, f, t)).sum();
        assert!((avg.coef[f] / s.mesh().face_length(f).sqrt() - mean).abs() < 1e-12);
    }
}

#[test]
fn integrals() {
    let s = space(2, 1);
    assert!((s.integral_domain(&s.project_cell(|_| 1.0)).unwrap() - 1.0).abs() < 1e-14);
    let left = s.mesh().boundary_faces_where(|p| p[0] == 0.0);
    let three = s.project_skeleton(|_| 3.0);
    assert!((s.integral_boundary_subset(&three, &left).unwrap() - 3.0).abs() < 1e-14);
    assert_eq!(s.integral_boundary_subset(&three, &[]), Err(FieldError::EmptyGamma));
    let int = s.mesh().interior_faces().next().unwrap();
    assert_eq!(
        s.integral_boundary_subset(&three, &[int]),
        Err(FieldError::NotBoundary(int))
    );
    let y = s.project_cell(|p| p[1]);
    assert!((s.integral_boundary_trace(&y, &left).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn csv_rows() {
    let s = space(1, 0);
    let u = s.project_cell(|_| 1.0);
    let csv = fields_to_csv(Some(&u), None, None);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kind,k,block_id,c0");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("cell,0,0,"));
}
