//! Conversions between relaxation and creep kernels.
//!
//! Everything is done in coefficient space: the Laplace image of one kernel
//! is inverted exactly (roots plus residues) and read back as the other.

use crate::error::{invalid, Result};
use crate::kernel::{Kernel, MatrixCreep, MatrixRelaxation, ScalarCreep, ScalarRelaxation};
use crate::pencil::{invert_matrix_cbf, MatrixCbf};
use crate::rational::{invert_cbf, ScalarCbf};

/// `p·h̃(p) = 1/[p·f̃(p)]`.
pub fn dualize_relaxation_to_creep(k: &ScalarRelaxation) -> Result<ScalarCreep> {
    invert_cbf(&ScalarCbf::from_relaxation(k))?.to_creep()
}

/// `p·f̃(p) = 1/[p·h̃(p)]`.
pub fn dualize_creep_to_relaxation(c: &ScalarCreep) -> Result<ScalarRelaxation> {
    invert_cbf(&ScalarCbf::from_creep(c))?.to_relaxation()
}

/// `p·C̃(p) = [p·R̃(p)]⁻¹`. Requires `N + B + Σ Gₖ ≻ 0`.
pub fn dualize_matrix_relaxation_to_creep(k: &MatrixRelaxation) -> Result<MatrixCreep> {
    invert_matrix_cbf(&MatrixCbf::from_relaxation(k))?.to_creep()
}

/// `p·R̃(p) = [p·C̃(p)]⁻¹`. Requires `A + D + Σ Hⱼ ≻ 0`, the same
/// nondegeneracy condition stated on the creep data.
pub fn dualize_matrix_creep_to_relaxation(c: &MatrixCreep) -> Result<MatrixRelaxation> {
    invert_matrix_cbf(&MatrixCbf::from_creep(c))?.to_relaxation()
}

/// Dual of any kernel.
pub fn dualize(k: &Kernel) -> Result<Kernel> {
    Ok(match k {
        Kernel::ScalarRelaxation(k) => Kernel::ScalarCreep(dualize_relaxation_to_creep(k)?),
        Kernel::ScalarCreep(c) => Kernel::ScalarRelaxation(dualize_creep_to_relaxation(c)?),
        Kernel::MatrixRelaxation(k) => Kernel::MatrixCreep(dualize_matrix_relaxation_to_creep(k)?),
        Kernel::MatrixCreep(c) => Kernel::MatrixRelaxation(dualize_matrix_creep_to_relaxation(c)?),
    })
}

/// Splits a kernel pair into `(relaxation, creep)` regardless of order.
pub fn order_pair<'a>(a: &'a Kernel, b: &'a Kernel) -> Result<(&'a Kernel, &'a Kernel)> {
    if a.is_matrix() != b.is_matrix() {
        return Err(crate::Error::Incompatible("scalar and matrix kernels cannot be paired".into()));
    }
    match (a.is_relaxation(), b.is_relaxation()) {
        (true, false) => Ok((a, b)),
        (false, true) => Ok((b, a)),
        _ => Err(invalid("a dual pair needs one relaxation and one creep kernel")),
    }
}
