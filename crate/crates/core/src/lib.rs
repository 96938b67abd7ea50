//! Multifractal cross wavelet analysis of time-series pairs.
//!
//! The pipeline: continuous wavelet transforms of both series
//! ([`wavelet`]), joint partition functions over a grid of moment orders
//! with mass-exponent and spectrum estimators ([`engine`]), an independent
//! box-counting route for conservative measures ([`boxcount`]), analytic
//! binomial-cascade references ([`theory`]), synthetic generators
//! ([`generate`]), and surrogate/shift significance tests ([`surrogate`]).

pub mod boxcount;
pub mod engine;
pub mod error;
pub mod fit;
pub mod generate;
pub mod surrogate;
pub mod theory;
pub mod wavelet;

pub use boxcount::{box_measures, compare_wt_pf, joint_partition_pf, BoxMeasureField};
pub use engine::{
    default_diagonal_orders, diagonal_analysis, direct_estimate, fit_mass_exponents,
    joint_partition, legendre_spectrum, scaled_partition_for_comparison, DiagonalSpectrum,
    EngineOptions, JointSpectrum, MassExponentSurface, OrderGrid, PartitionTable, SpectrumMethod,
};
pub use error::{Error, Result};
pub use generate::{
    gen_bfbm, gen_bfbm_increments, gen_binomial, pearson, BfbmSpec, BinomialSpec,
};
pub use surrogate::{
    make_surrogate, pair_width, shift_scan, surrogate_ensemble, SurrogateKind, SurrogateReport,
    WidthConfig,
};
pub use theory::{mass_exponent, pf_to_wt, scaling_exponent, BinomialTheory, WaveletQuantities};
pub use wavelet::{cwt, kernel_value, KernelSpec, ScaleGrid, WaveletField};
