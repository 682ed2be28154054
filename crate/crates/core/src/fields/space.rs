use crate::mesh::Mesh;
use crate::polybasis::{Basis, BasisError, CellKernels, CellMap};

/// A mesh together with the degree-k bases and the cached local kernels of
/// every cell: the discrete setting X_h^k = U_h^k × F_h^k.
#[derive(Clone, Debug)]
pub struct HybridSpace {
    mesh: Mesh,
    basis: Basis,
    maps: Vec<CellMap>,
    kernels: Vec<CellKernels>,
}

impl HybridSpace {
    pub fn new(mesh: Mesh, k: usize) -> Result<Self, BasisError> {
        Self::with_basis(mesh, Basis::new(k)?)
    }

    pub fn with_basis(mesh: Mesh, basis: Basis) -> Result<Self, BasisError> {
        let maps = (0..mesh.n_cells())
            .map(|c| CellMap::new(&mesh, c))
            .collect::<Result<Vec<_>, _>>()?;
        let kernels = (0..mesh.n_cells())
            .map(|c| basis.kernels(&mesh, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HybridSpace {
            mesh,
            basis,
            maps,
            kernels,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.degree()
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn map(&self, c: usize) -> &CellMap {
        &self.maps[c]
    }

    pub fn kernels(&self, c: usize) -> &CellKernels {
        &self.kernels[c]
    }

    /// Cell dofs per cell.
    pub fn nb(&self) -> usize {
        self.basis.nb()
    }

    /// Face dofs per face.
    pub fn nf(&self) -> usize {
        self.basis.nf()
    }

    pub fn n_cell_dofs(&self) -> usize {
        self.mesh.n_cells() * self.nb()
    }

    pub fn n_face_dofs(&self) -> usize {
        self.mesh.n_faces() * self.nf()
    }

    /// h = max_K h_K, the global factor used in mesh-wide statements.
    pub fn h(&self) -> f64 {
        self.mesh.h_max()
    }
}
