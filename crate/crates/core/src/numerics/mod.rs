//! Dense linear algebra kernels shared by the separation methods.

pub mod eigen;
pub mod jointdiag;
pub mod matrix;
pub mod rng;
pub mod svd;
pub mod tensor;

pub use eigen::{inv_sqrt_spd, sym_eig, EigenDecomposition};
pub use jointdiag::{joint_diagonalize, total_off_energy, JointDiagonalization};
pub use matrix::{canonical_sign, dot, norm, orthonormalize_columns, Matrix};
pub use rng::{derive_seed, SeededRng};
pub use svd::{svd, Svd};
pub use tensor::Tensor3;
