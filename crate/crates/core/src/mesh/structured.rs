use std::collections::BTreeMap;

use super::{BoundaryTag, Mesh, MeshSource, Point};

/// Boundary tagging policy for generated meshes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TagRule {
    #[default]
    AllDirichlet,
    /// Dirichlet on x = 0, Neumann elsewhere.
    LeftDirichlet,
    AllNeumann,
}

impl TagRule {
    pub fn tag(self, mid: Point) -> BoundaryTag {
        match self {
            TagRule::AllDirichlet => BoundaryTag::Dirichlet,
            TagRule::AllNeumann => BoundaryTag::Neumann,
            TagRule::LeftDirichlet if mid[0] < 1e-12 => BoundaryTag::Dirichlet,
            TagRule::LeftDirichlet => BoundaryTag::Neumann,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TagRule::AllDirichlet => "dirichlet",
            TagRule::LeftDirichlet => "left-dirichlet",
            TagRule::AllNeumann => "neumann",
        }
    }

    pub fn parse(s: &str) -> Option<TagRule> {
        match s {
            "dirichlet" => Some(TagRule::AllDirichlet),
            "left-dirichlet" => Some(TagRule::LeftDirichlet),
            "neumann" => Some(TagRule::AllNeumann),
            _ => None,
        }
    }
}

/// Unit square split into `n`×`n` squares, each cut along the
/// (1,0)-(0,1) diagonal.
pub fn build_structured(n: usize, rule: TagRule) -> Mesh {
    assert!(n >= 1, "structured mesh needs n >= 1");
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push([v(i, j), v(i + 1, j), v(i, j + 1)]);
            cells.push([v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    let mut tags = Vec::with_capacity(4 * n);
    for t in 0..n {
        for (a, b) in [
            (v(t, 0), v(t + 1, 0)),
            (v(n, t), v(n, t + 1)),
            (v(t, n), v(t + 1, n)),
            (v(0, t), v(0, t + 1)),
        ] {
            let (pa, pb) = (vertices[a], vertices[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            tags.push(([a, b], rule.tag(mid)));
        }
    }
    Mesh::new(MeshSource {
        vertices,
        cells,
        tags,
        ..Default::default()
    })
    .expect("structured mesh is valid by construction")
}

/// Red refinement: every triangle is split into four similar children through
/// its edge midpoints. Midpoint of face `f` becomes vertex `n_vertices + f`.
pub fn refine_uniform(m: &Mesh) -> Mesh {
    let nv = m.n_vertices();
    let mut vertices = m.vertices().to_vec();
    vertices.extend((0..m.n_faces()).map(|f| m.face_midpoint(f)));
    let mut by_pair = BTreeMap::new();
    for (f, face) in m.faces().iter().enumerate() {
        by_pair.insert(face.vertices, nv + f);
    }
    let mid = |a: usize, b: usize| by_pair[&if a < b { [a, b] } else { [b, a] }];
    let mut cells = Vec::with_capacity(4 * m.n_cells());
    for &[a, b, c] in m.cells() {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        cells.push([a, ab, ca]);
        cells.push([ab, b, bc]);
        cells.push([ca, bc, c]);
        cells.push([ab, bc, ca]);
    }
    let mut tags = Vec::new();
    for f in m.boundary_faces() {
        let face = m.face(f);
        let [a, b] = face.vertices;
        tags.push(([a, nv + f], face.tag));
        tags.push(([nv + f, b], face.tag));
    }
    Mesh::new(MeshSource {
        vertices,
        cells,
        tags,
        ..Default::default()
    })
    .expect("refinement of a valid mesh is valid")
}
