//! Numerical model of the deformation space of Kleinian punctured-torus
//! groups near a Maskit-slice cusp: matrix families, Farey trace recursion,
//! a graded slice classifier, cusp location, rasters of the slices, and the
//! rectangle construction that exhibits bounded components of `A_{σ_z}`.

// `!(a < b)` also rejects NaN, which every validation here relies on
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cusp;
pub mod error;
pub mod exact;
pub mod exec;
pub mod farey;
pub mod moebius;
pub mod poly;
pub mod raster;
pub mod witness;

pub use classify::{
    a_membership, classify_point, AMembership, ASlice, Classification, ClassifierConfig, Evidence, MembershipVerdict,
    PointClassifier, SyntheticClassifier, TraceTreeClassifier, Verdict,
};
pub use error::{Error, Result};
pub use exact::exact_word_trace;
pub use farey::{farey_parents, slope_word, trace_of_slope, FareySlope, TraceCache};
pub use moebius::{make_sigma_z, make_sigma_zw, normalized_length, ExtendedRep, Moebius, PuncturedTorusRep};
pub use num_complex::Complex64;
pub use poly::{trace_polynomial, TracePolynomial};
