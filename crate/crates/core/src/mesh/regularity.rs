use super::{Mesh, Point};

/// Shape-regularity figures of a mesh. `kappa` is the smallest |K|/h_K², and
/// `theta` the largest h_K over inscribed-circle diameter.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub kappa: f64,
    pub theta: f64,
    pub min_angle: f64,
    pub hanging_node_free: bool,
}

impl RegularityReport {
    pub fn ok(&self) -> bool {
        self.kappa > 0.0 && self.hanging_node_free
    }
}

fn angle_at(p: Point, q: Point, r: Point) -> f64 {
    let (u, v) = ([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot)
}

pub fn check_regularity(m: &Mesh) -> RegularityReport {
    let mut kappa = f64::INFINITY;
    let mut theta: f64 = 0.0;
    let mut min_angle = f64::INFINITY;
    for c in 0..m.n_cells() {
        let [p, q, r] = m.cell_points(c);
        let (area, h) = (m.area(c), m.diameter(c));
        let perim: f64 = m.cell_faces(c).iter().map(|cf| m.face_length(cf.face)).sum();
        kappa = kappa.min(area / (h * h));
        theta = theta.max(h / (4.0 * area / perim));
        min_angle = min_angle
            .min(angle_at(p, q, r))
            .min(angle_at(q, r, p))
            .min(angle_at(r, p, q));
    }
    RegularityReport {
        kappa,
        theta,
        min_angle,
        hanging_node_free: hanging_node_free(m),
    }
}

/// A hanging node shows up as a vertex lying strictly inside a face that only
/// one cell sees.
fn hanging_node_free(m: &Mesh) -> bool {
    for f in m.boundary_faces() {
        let [a, b] = m.face_points(f);
        let len = m.face_length(f);
        let [va, vb] = m.face(f).vertices;
        let (lo, hi) = ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])]);
        let tol = 1e-12 * len;
        for (v, p) in m.vertices().iter().enumerate() {
            if v == va || v == vb {
                continue;
            }
            if p[0] < lo[0] - tol || p[0] > hi[0] + tol || p[1] < lo[1] - tol || p[1] > hi[1] + tol {
                continue;
            }
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            if cross.abs() <= tol * len {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, BoundaryTag, MeshSource, TagRule};
    use std::f64::consts::PI;

    fn single(vertices: Vec<Point>) -> Mesh {
        Mesh::new(MeshSource {
            vertices,
            cells: vec![[0, 1, 2]],
            tags: vec![
                ([0, 1], BoundaryTag::Dirichlet),
                ([1, 2], BoundaryTag::Dirichlet),
                ([2, 0], BoundaryTag::Dirichlet),
            ],
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn right_and_equilateral() {
        let r = check_regularity(&single(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]));
        assert!((r.kappa - 0.25).abs() < 1e-15);
        assert!((r.min_angle - PI / 4.0).abs() < 1e-15);
        assert!(r.ok());
        let e = check_regularity(&single(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]));
        assert!((e.min_angle - PI / 3.0).abs() < 1e-14);
        // inscribed diameter of a unit equilateral triangle is 1/sqrt(3)
        assert!((e.theta - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn structured_levels_share_kappa() {
        let k1 = check_regularity(&build_structured(1, TagRule::AllDirichlet)).kappa;
        for n in [2, 4, 8, 16] {
            let r = check_regularity(&build_structured(n, TagRule::AllDirichlet));
            assert!((r.kappa - k1).abs() < 1e-12);
            assert!(r.hanging_node_free);
        }
    }

    #[test]
    fn detects_hanging_node() {
        // big triangle next to two small ones sharing a split edge
        let m = Mesh::new(MeshSource {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [1.0, 1.0]],
            cells: vec![[0, 1, 2], [1, 4, 3], [3, 4, 2]],
            tags: vec![
                ([0, 1], BoundaryTag::Dirichlet),
                ([0, 2], BoundaryTag::Dirichlet),
                ([1, 2], BoundaryTag::Dirichlet),
                ([1, 3], BoundaryTag::Dirichlet),
                ([3, 2], BoundaryTag::Dirichlet),
                ([1, 4], BoundaryTag::Dirichlet),
                ([4, 2], BoundaryTag::Dirichlet),
            ],
            ..Default::default()
        })
        .unwrap();
        assert!(!check_regularity(&m).hanging_node_free);
    }
}
