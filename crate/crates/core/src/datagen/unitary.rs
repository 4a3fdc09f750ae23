use rand::Rng;

use crate::criteria::Witness;
use crate::qcore::{haar_unitary, kron, BipartiteDims, CMatrix, DensityMatrix};

/// `U = U_A ⊗ U_B` with Haar-random factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    u_a: CMatrix,
    u_b: CMatrix,
    full: CMatrix,
    dims: BipartiteDims,
}

impl LocalUnitary {
    pub fn u_a(&self) -> &CMatrix {
        &self.u_a
    }

    pub fn u_b(&self) -> &CMatrix {
        &self.u_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.full
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// `U ρ U†`.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        assert_eq!(rho.dims(), self.dims, "local unitary dims mismatch");
        let m = &self.full * rho.entries() * self.full.adjoint();
        DensityMatrix::from_construction(m, self.dims)
    }

    /// `U W U†`, which detects `U ρ U†` whenever `W` detects `ρ`.
    pub fn apply_witness(&self, w: &Witness) -> Witness {
        assert_eq!(w.dims(), self.dims, "local unitary dims mismatch");
        w.conjugated(&self.full)
    }
}

pub fn random_local_unitary<R: Rng + ?Sized>(dims: BipartiteDims, rng: &mut R) -> LocalUnitary {
    let u_a = haar_unitary(dims.p_a(), rng);
    let u_b = haar_unitary(dims.p_b(), rng);
    let full = kron(&u_a, &u_b);
    LocalUnitary { u_a, u_b, full, dims }
}

pub fn random_local_unitary_transform<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> DensityMatrix {
    random_local_unitary(rho.dims(), rng).apply(rho)
}
