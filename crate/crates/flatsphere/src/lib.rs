// Negated comparisons like `!(x > 0.0)` are domain guards that must also
// reject NaN; the direct comparison would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Uniformly bounded orthonormal systems of spherical polynomials.
//!
//! The pipeline: pick well-separated nodes on the sphere by greedy
//! approximate-Fekete selection ([`points`]), attach a smoothly cut off
//! reproducing kernel to each node ([`cutoff`]), certify that the node
//! kernels form a Riesz sequence through the spectrum of their Gramian
//! ([`gramian`]), then orthonormalize and mix them through a discrete-Fourier
//! unitary ([`system`]). The functions that come out are orthonormal, span
//! almost all of the polynomial space, and — the point of the construction —
//! have sup norms that stay bounded as the degree grows.
//!
//! [`harmonic`] supplies the spherical-harmonic arithmetic, [`diagnostics`]
//! the independent oracles (exact quadrature, brute-force kernels, sampling
//! sums), and [`io`] the versioned file formats.

pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod gramian;
pub mod harmonic;
pub mod io;
pub mod points;
pub mod system;

pub use cutoff::{beta, br_kernel, kernel_norm_sq, normalized_kernel, CutoffProfile, KernelSpec};
pub use diagnostics::{
    brute_force_kernel, gauss_sphere_rule, plancherel_polya, propbound_sum, QuadratureRule,
};
pub use error::{Error, Result};
pub use gramian::{build_gram, linf_row_norm, offdiag_decay_fit, DecayFit, Gramian};
pub use harmonic::{
    degree_dimension, eigenvalue, space_dimension, surface_area, HarmonicSpace, ZonalKernelTable,
};
pub use points::{
    approximate_fekete, candidate_mesh, geodesic_distance, separation, shrink_degree,
    target_fraction_to_epsilon, CandidateMesh, PointSet,
};
pub use system::{build_system, dft_unitary, FlatSystem, ProbeSummary};
