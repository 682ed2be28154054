use faer::Mat;

use crate::fields::{CellField, HybridSpace, SkeletonField};
use crate::linalg::{SparseSymmetric, TripletBuilder};

/// Ordering of the dof vector x = [u; û]. Either block may be absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub k: usize,
    pub n_cells: usize,
    pub nb: usize,
    pub n_faces: usize,
    pub nf: usize,
}

impl Layout {
    /// Cell and face unknowns of degree k.
    pub fn hybrid(space: &HybridSpace) -> Layout {
        let m = space.mesh();
        Layout {
            k: space.k(),
            n_cells: m.n_cells(),
            nb: space.nb(),
            n_faces: m.n_faces(),
            nf: space.nf(),
        }
    }

    /// Cell unknowns only.
    pub fn cells(space: &HybridSpace) -> Layout {
        Layout {
            n_faces: 0,
            nf: 0,
            ..Layout::hybrid(space)
        }
    }

    /// One unknown per face: the degree-0 coefficient, i.e. a CR field.
    pub fn cr(space: &HybridSpace) -> Layout {
        Layout {
            k: 0,
            n_cells: 0,
            nb: 0,
            n_faces: space.mesh().n_faces(),
            nf: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.n_cells * self.nb + self.n_faces * self.nf
    }

    pub fn u(&self, c: usize, i: usize) -> usize {
        debug_assert!(i < self.nb);
        c * self.nb + i
    }

    pub fn uh(&self, f: usize, m: usize) -> usize {
        debug_assert!(m < self.nf);
        self.n_cells * self.nb + f * self.nf + m
    }

    /// Unpack x into fields (absent blocks give `None`).
    pub fn split(&self, x: &[f64]) -> (Option<CellField>, Option<SkeletonField>) {
        let nu = self.n_cells * self.nb;
        let u = (self.nb > 0).then(|| CellField {
            k: self.k,
            coef: x[..nu].to_vec(),
        });
        let uh = (self.nf > 0).then(|| SkeletonField {
            k: if self.nf == 1 && self.nb == 0 { 0 } else { self.k },
            coef: x[nu..].to_vec(),
        });
        (u, uh)
    }
}

/// Sparse symmetric part or rank-one (r·x)² part of a form.
#[derive(Clone, Debug)]
pub enum Part {
    Sparse(SparseSymmetric),
    /// Nonzero entries of r.
    RankOne(Vec<(usize, f64)>),
}

#[derive(Clone, Debug)]
pub struct Term {
    pub name: &'static str,
    pub weight: f64,
    pub part: Part,
}

/// x ↦ Σ weight·(term value), each term a named scalar functional.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub layout: Layout,
    pub terms: Vec<Term>,
}

impl QuadraticForm {
    pub fn new(layout: Layout) -> Self {
        QuadraticForm { layout, terms: vec![] }
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn with(mut self, name: &'static str, weight: f64, part: Part) -> Self {
        self.terms.push(Term { name, weight, part });
        self
    }

    pub fn without(&self, name: &str) -> Self {
        QuadraticForm {
            layout: self.layout,
            terms: self.terms.iter().filter(|t| t.name != name).cloned().collect(),
        }
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.weight * part_value(&t.part, x)).sum()
    }

    /// Weighted sum of the sparse parts.
    pub fn sparse_sum(&self) -> SparseSymmetric {
        let mut b = TripletBuilder::new(self.n());
        for t in &self.terms {
            if let Part::Sparse(s) = &t.part {
                for i in 0..s.n() {
                    for (j, v) in s.row(i) {
                        b.add(i, j, t.weight * v);
                    }
                }
            }
        }
        b.build()
    }

    /// Rank-one parts with the weight folded in: Σ r rᵀ.
    pub fn rank_ones(&self) -> Vec<Vec<(usize, f64)>> {
        self.terms
            .iter()
            .filter_map(|t| match &t.part {
                Part::RankOne(r) => {
                    let s = t.weight.sqrt();
                    Some(r.iter().map(|&(i, v)| (i, s * v)).collect())
                }
                Part::Sparse(_) => None,
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.n();
        let mut m = Mat::<f64>::zeros(n, n);
        let s = self.sparse_sum();
        for i in 0..n {
            for (j, v) in s.row(i) {
                m[(i, j)] += v;
                if i != j {
                    m[(j, i)] += v;
                }
            }
        }
        for r in self.rank_ones() {
            for &(i, a) in &r {
                for &(j, b) in &r {
                    m[(i, j)] += a * b;
                }
            }
        }
        m
    }
}

pub fn part_value(p: &Part, x: &[f64]) -> f64 {
    match p {
        Part::Sparse(s) => s.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum(),
        Part::RankOne(r) => r.iter().map(|&(i, v)| v * x[i]).sum::<f64>().powi(2),
    }
}

/// Adds a dense symmetric local block on global indices `idx`.
pub(crate) fn add_block(b: &mut TripletBuilder, idx: &[usize], m: impl Fn(usize, usize) -> f64) {
    for a in 0..idx.len() {
        for c in 0..=a {
            let v = m(a, c);
            if v != 0.0 {
                b.add(idx[a], idx[c], v);
            }
        }
    }
}
