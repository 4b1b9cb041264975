//! Relaxation/creep duality for completely monotone viscoelastic kernels,
//! scalar and 6×6 (Voigt) matrix valued.
//!
//! A relaxation kernel `R(t) = N·δ(t) + B + Σ Gₖ e^(−rₖ t)` and a creep
//! kernel `C(t) = A + D·t + Σ (Hⱼ/sⱼ)(1 − e^(−sⱼ t))` are dual when
//! `R̃(p)·C̃(p) = p⁻²`, or equivalently `(R ∗ C)(t) = t`.

pub mod cli;
pub mod convolution;
pub mod duality;
pub mod eigenstress;
pub mod error;
pub mod io;
pub mod kernel;
pub mod matrix6;
pub mod pencil;
pub mod rational;
pub mod response;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{
    Creep, Kernel, Limit, LimitReport, MatrixCreep, MatrixRelaxation, Mode, Relaxation, ScalarCreep,
    ScalarRelaxation,
};
pub use matrix6::Matrix6;
