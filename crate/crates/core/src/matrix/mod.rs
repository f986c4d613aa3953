//! Hermitian matrices under the normalized trace, in floating point. All
//! comparisons go through an explicit tolerance.

pub mod dense;
pub mod eigen;
pub mod hermitian;
pub mod random;
pub mod stochastic;
pub mod suite;

pub use dense::CMatrix;
pub use eigen::{hermitian_eigen, hermitian_eigenvalues, Eigen};
pub use hermitian::{
    check_extreme_diag, diag_expectation, eig_scale, majorise_spectral, matrix_majorise, parse_matrix,
    schur_horn_check, snap_rational, DiagExtremality, HermitianOperator, MatrixDoc, NumberOrRat,
    SpectralScale, SpectralStep,
};
pub use random::{random_doubly_stochastic, random_hermitian, random_projection, random_unitary};
pub use stochastic::{
    birkhoff_decompose, t_transform_chain, vector_majorises, BirkhoffDecomposition, BirkhoffTerm,
    DoublyStochastic, TTransform, TTransformChain,
};
pub use suite::{identity_suite, CheckTally, SuiteReport};
