//! Conforming triangle meshes with face adjacency, boundary tags and a
//! geometry cache.
//!
//! Cells store their vertices in the given order; local face `i` of a cell is
//! the edge opposite local vertex `i`. Faces are keyed by their sorted vertex
//! pair and numbered in lexicographic order of that key, so two builds from
//! the same input produce identical meshes.

mod io;
mod regularity;
mod structured;

use std::collections::BTreeMap;

pub use io::{load_mesh, save_mesh};
pub use regularity::{check_regularity, RegularityReport};
pub use structured::{build_structured, refine_uniform, TagRule};

use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl BoundaryTag {
    pub fn is_boundary(self) -> bool {
        !matches!(self, BoundaryTag::Interior)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: dangling vertex index {index} (mesh has {count} vertices)")]
    DanglingVertex { line: usize, index: usize, count: usize },
    #[error("line {line}: duplicated cell {cell:?}")]
    DuplicateCell { line: usize, cell: [usize; 3] },
    #[error("line {line}: degenerate cell {cell:?} (zero area)")]
    DegenerateCell { line: usize, cell: [usize; 3] },
    #[error("line {line}: edge ({a}, {b}) is shared by more than two cells")]
    NonManifoldEdge { line: usize, a: usize, b: usize },
    #[error("line {line}: boundary face ({a}, {b}) carries no Dirichlet/Neumann tag")]
    UntaggedBoundaryFace { line: usize, a: usize, b: usize },
    #[error("line {line}: face ({a}, {b}) is tagged more than once")]
    DuplicateTag { line: usize, a: usize, b: usize },
    #[error("line {line}: tagged face ({a}, {b}) is not a boundary face")]
    NotBoundaryFace { line: usize, a: usize, b: usize },
}

/// One edge of the triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Sorted vertex pair; the face parameter runs from `vertices[0]` to
    /// `vertices[1]`.
    pub vertices: [usize; 2],
    /// Adjacent cells, lower index first.
    pub cells: [usize; 2],
    pub n_cells: usize,
    pub tag: BoundaryTag,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.n_cells == 2
    }

    pub fn adjacent(&self) -> &[usize] {
        &self.cells[..self.n_cells]
    }
}

/// A face as seen from one of its cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellFace {
    pub face: usize,
    /// `+1` when the cell's outward normal equals the face's canonical normal.
    pub sign: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Geometry {
    cell_area: Vec<f64>,
    cell_diam: Vec<f64>,
    centroid: Vec<Point>,
    face_len: Vec<f64>,
    face_mid: Vec<Point>,
    face_normal: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    faces: Vec<Face>,
    cell_faces: Vec<[CellFace; 3]>,
    geom: Geometry,
}

/// Raw mesh input: boundary tags keyed by (unordered) vertex pair. Line
/// numbers are only used to annotate errors and may be zero.
#[derive(Clone, Debug, Default)]
pub struct MeshSource {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub cell_lines: Vec<usize>,
    pub tags: Vec<([usize; 2], BoundaryTag)>,
    pub tag_lines: Vec<usize>,
}

fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn signed_area(p: Point, q: Point, r: Point) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

impl Mesh {
    /// Builds and validates a mesh. Every face adjacent to exactly one cell
    /// must be tagged Dirichlet or Neumann.
    pub fn new(src: MeshSource) -> Result<Mesh, MeshError> {
        let line_of_cell = |c: usize| src.cell_lines.get(c).copied().unwrap_or(0);
        let line_of_tag = |t: usize| src.tag_lines.get(t).copied().unwrap_or(0);
        let nv = src.vertices.len();

        let mut seen = BTreeMap::new();
        for (c, cell) in src.cells.iter().enumerate() {
            for &v in cell {
                if v >= nv {
                    return Err(MeshError::DanglingVertex {
                        line: line_of_cell(c),
                        index: v,
                        count: nv,
                    });
                }
            }
            let mut key = *cell;
            key.sort_unstable();
            if key[0] == key[1] || key[1] == key[2] {
                return Err(MeshError::DegenerateCell {
                    line: line_of_cell(c),
                    cell: *cell,
                });
            }
            if seen.insert(key, c).is_some() {
                return Err(MeshError::DuplicateCell {
                    line: line_of_cell(c),
                    cell: *cell,
                });
            }
            let [p, q, r] = cell.map(|v| src.vertices[v]);
            if signed_area(p, q, r).abs() <= 0.0 {
                return Err(MeshError::DegenerateCell {
                    line: line_of_cell(c),
                    cell: *cell,
                });
            }
        }

        // edge -> adjacent cells, in increasing cell order
        let mut edges: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (c, cell) in src.cells.iter().enumerate() {
            for i in 0..3 {
                let key = sorted(cell[(i + 1) % 3], cell[(i + 2) % 3]);
                let adj = edges.entry(key).or_default();
                adj.push(c);
                if adj.len() > 2 {
                    return Err(MeshError::NonManifoldEdge {
                        line: line_of_cell(c),
                        a: key[0],
                        b: key[1],
                    });
                }
            }
        }

        let mut tags: BTreeMap<[usize; 2], BoundaryTag> = BTreeMap::new();
        for (t, &(pair, tag)) in src.tags.iter().enumerate() {
            let key = sorted(pair[0], pair[1]);
            if key[1] >= nv {
                return Err(MeshError::DanglingVertex {
                    line: line_of_tag(t),
                    index: key[1],
                    count: nv,
                });
            }
            match edges.get(&key) {
                Some(adj) if adj.len() == 1 => {}
                _ => {
                    return Err(MeshError::NotBoundaryFace {
                        line: line_of_tag(t),
                        a: key[0],
                        b: key[1],
                    })
                }
            }
            if !tag.is_boundary() {
                return Err(MeshError::Parse {
                    line: line_of_tag(t),
                    msg: "boundary tag must be D or N".into(),
                });
            }
            if tags.insert(key, tag).is_some() {
                return Err(MeshError::DuplicateTag {
                    line: line_of_tag(t),
                    a: key[0],
                    b: key[1],
                });
            }
        }

        let mut faces = Vec::with_capacity(edges.len());
        let mut face_id = BTreeMap::new();
        for (key, adj) in &edges {
            let tag = if adj.len() == 2 {
                BoundaryTag::Interior
            } else {
                match tags.get(key) {
                    Some(t) => *t,
                    None => {
                        return Err(MeshError::UntaggedBoundaryFace {
                            line: line_of_cell(adj[0]),
                            a: key[0],
                            b: key[1],
                        })
                    }
                }
            };
            face_id.insert(*key, faces.len());
            faces.push(Face {
                vertices: *key,
                cells: [adj[0], *adj.get(1).unwrap_or(&adj[0])],
                n_cells: adj.len(),
                tag,
            });
        }

        let cell_faces = src
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                std::array::from_fn(|i| {
                    let key = sorted(cell[(i + 1) % 3], cell[(i + 2) % 3]);
                    let f = face_id[&key];
                    let sign = if faces[f].cells[0] == c { 1.0 } else { -1.0 };
                    CellFace { face: f, sign }
                })
            })
            .collect();

        let geom = Geometry::compute(&src.vertices, &src.cells, &faces);
        Ok(Mesh {
            vertices: src.vertices,
            cells: src.cells,
            faces,
            cell_faces,
            geom,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> [usize; 3] {
        self.cells[c]
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn cell_faces(&self, c: usize) -> &[CellFace; 3] {
        &self.cell_faces[c]
    }

    /// Local index (0..3) of face `f` within cell `c`.
    pub fn local_face(&self, c: usize, f: usize) -> Option<usize> {
        self.cell_faces[c].iter().position(|cf| cf.face == f)
    }

    pub fn face_points(&self, f: usize) -> [Point; 2] {
        self.faces[f].vertices.map(|v| self.vertices[v])
    }

    /// Point on face `f` at parameter `t` in [0, 1].
    pub fn face_point(&self, f: usize, t: f64) -> Point {
        let [a, b] = self.face_points(f);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    pub fn area(&self, c: usize) -> f64 {
        self.geom.cell_area[c]
    }

    pub fn diameter(&self, c: usize) -> f64 {
        self.geom.cell_diam[c]
    }

    pub fn centroid(&self, c: usize) -> Point {
        self.geom.centroid[c]
    }

    pub fn face_length(&self, f: usize) -> f64 {
        self.geom.face_len[f]
    }

    pub fn face_midpoint(&self, f: usize) -> Point {
        self.geom.face_mid[f]
    }

    /// Canonical unit normal: outward on the boundary, from the lower- to the
    /// higher-indexed cell on interior faces.
    pub fn face_normal(&self, f: usize) -> Point {
        self.geom.face_normal[f]
    }

    /// Unit outward normal of cell `c` on its local face `local`.
    pub fn outward_normal(&self, c: usize, local: usize) -> Point {
        let cf = self.cell_faces[c][local];
        let n = self.geom.face_normal[cf.face];
        [cf.sign * n[0], cf.sign * n[1]]
    }

    pub fn h_max(&self) -> f64 {
        self.geom.cell_diam.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.geom.cell_area.iter().sum()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| !self.faces[f].is_interior())
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_interior())
    }

    pub fn faces_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(move |&f| self.faces[f].tag == tag)
    }

    /// Boundary faces whose midpoint satisfies `pred`.
    pub fn boundary_faces_where(&self, pred: impl Fn(Point) -> bool) -> Vec<usize> {
        self.boundary_faces().filter(|&f| pred(self.face_midpoint(f))).collect()
    }

    /// Copy of the mesh with boundary tags reassigned by `tag_of(midpoint)`.
    pub fn retagged(&self, tag_of: impl Fn(Point) -> BoundaryTag) -> Mesh {
        let mut m = self.clone();
        for f in 0..m.faces.len() {
            if !m.faces[f].is_interior() {
                let t = tag_of(m.geom.face_mid[f]);
                assert!(t.is_boundary(), "boundary faces need a D/N tag");
                m.faces[f].tag = t;
            }
        }
        m
    }
}

impl Geometry {
    fn compute(vertices: &[Point], cells: &[[usize; 3]], faces: &[Face]) -> Geometry {
        let mut cell_area = Vec::with_capacity(cells.len());
        let mut cell_diam = Vec::with_capacity(cells.len());
        let mut centroid = Vec::with_capacity(cells.len());
        for cell in cells {
            let [p, q, r] = cell.map(|v| vertices[v]);
            cell_area.push(signed_area(p, q, r).abs());
            cell_diam.push(dist(p, q).max(dist(q, r)).max(dist(r, p)));
            centroid.push([(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]);
        }
        let mut face_len = Vec::with_capacity(faces.len());
        let mut face_mid = Vec::with_capacity(faces.len());
        let mut face_normal = Vec::with_capacity(faces.len());
        for face in faces {
            let [a, b] = face.vertices.map(|v| vertices[v]);
            let len = dist(a, b);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
            // orient outward from the first adjacent cell
            let c = centroid[face.cells[0]];
            if n[0] * (mid[0] - c[0]) + n[1] * (mid[1] - c[1]) < 0.0 {
                n = [-n[0], -n[1]];
            }
            face_len.push(len);
            face_mid.push(mid);
            face_normal.push(n);
        }
        Geometry {
            cell_area,
            cell_diam,
            centroid,
            face_len,
            face_mid,
            face_normal,
        }
    }
}
