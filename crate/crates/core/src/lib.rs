//! Exact rational cohomology of unordered configuration spaces `C_k(M)` of
//! closed oriented even-dimensional manifolds.
//!
//! The cohomology of `C_k(M)` is computed from the bigraded
//! Chevalley-Eilenberg complex `Sym(V) (x) Sym(W)` built out of `H^*(M; Q)`.
//! For `M = CP^m` the crate also builds the reduced complex obtained by
//! dividing out the acyclic ideal `(v_{2m}^2, w_{4m-1})`, and checks the
//! extremal vanishing ranges `H^{k(2m-2)+i}(C_k(CP^m)) = 0`.
//!
//! ```
//! use confcoh::{Engine, Mode};
//!
//! let engine = Engine::cpm(1).unwrap();
//! let table = engine.betti(3, Mode::Full).unwrap();
//! assert_eq!(table.dim(0), 1);
//! assert_eq!(table.dim(3), 1);
//! ```

pub mod complex;
pub mod error;
pub mod extremal;
pub mod generators;
pub mod homology;
pub mod linalg;
pub mod rational;
pub mod ring;

pub use complex::{
    assemble_blocks, differential_of_monomial, enumerate_basis, homotopy_check, reduce_complex,
    Bidegree, BigradedBasis, CeComplex, DifferentialBlock, HomotopyCheck, Monomial,
};
pub use error::{Error, Result};
pub use extremal::{
    detect_quasi_polynomial, hilbert_ray, structural_facts, verify_vanishing_ranges,
    verify_vanishing_ranges_with, HilbertRay, QuasiPolynomial, Status, StructuralFacts,
    VerifyReport, DEFAULT_DEG_MAX, DEFAULT_P_MAX,
};
pub use generators::{build_generators, Generator, GeneratorSet, Parity};
pub use homology::{betti, consistency_report, BettiTable, ConsistencyReport, Engine, Mode};
pub use linalg::SparseExactMatrix;
pub use rational::Rational;
pub use ring::{
    diagonal_comultiplication, make_cpm, validate_ring, RingDiagnostics, RingOrigin,
    RingPresentation,
};
