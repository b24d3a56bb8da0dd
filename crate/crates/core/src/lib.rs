//! Exact computations around the finitely supported signed measures `mu_n`
//! on `K_n x L_n`: rectangle and tensor suprema with certified bounds,
//! strongly normal subsequences, triangular bases in the sequence space,
//! and finite-section basis constants.
//!
//! All arithmetic is over big rationals. Comparisons that involve `sqrt(pi)`
//! are certified by squaring against a rational enclosure of `pi`.

pub mod combo;
pub mod diag;
pub mod error;
pub mod exactnum;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod rect;
pub mod schauder;
pub mod subseq;
pub mod tensor;
pub mod verify;

pub use combo::{reference_family, ColFactor, RowFactor, TensorCombo, TensorTerm};
pub use diag::{basis_constant, section_of_ks, BasisConstantReport, FiniteSection};
pub use error::{Error, Result};
pub use exactnum::{Certified, PiEnclosure, Rational, Verdict};
pub use measure::{Bijection, KsMeasure, Representation};
pub use rect::{certify_bound2, sup_rect_bruteforce, sup_rect_fast, Rectangle, RectangleSupReport};
pub use schauder::{
    build_triangular_basis, coefficient_functional, density_check, expand, verify_stabilization,
    CoeffExpansion, Density, GeneratorSet, SparseSeq, TriangularBasis,
};
pub use subseq::{extract, strongly_normal_report, SubseqCertificate};
pub use tensor::{certify_bound3, random_tensor_probe, tensor_sup_exact};
pub use verify::{run_verification, VerificationRun, VerifyConfig};
