//! Numerical harmonic analysis of radial functions on free groups.
//!
//! The free group `F_r` acts on its Cayley graph, the `2r`-regular
//! homogeneous tree. Radial functions (functions of the word length alone)
//! form a commutative algebra whose spectral theory is completely
//! explicit: spherical functions satisfy a three-term recurrence, the
//! spherical transform diagonalizes the radial convolution structure, and
//! for rank 2 the dual convolution on the spectral interval `[0, pi]` has
//! a closed-form kernel, with an extra atom appearing for complex
//! spectral parameters.
//!
//! The crate provides, layer by layer:
//!
//! - [`words`]: exact word arithmetic and deterministic ball enumeration;
//! - [`radial`]: tree/radial function spaces, radialization, norms, tails;
//! - [`spherical`]: spherical sequences, the transform, Gauss quadrature
//!   for the Plancherel measure, inversion and Parseval checks;
//! - [`hypergroup`]: the dual convolution for rank 2, including the
//!   atomic part for complex parameters;
//! - [`opnorm`]: sparse left-regular-representation operators on
//!   truncated balls, norm estimation, and sphere-wise coefficient
//!   inequalities;
//! - [`verify`]: the executable verification suites behind
//!   `treeharm verify`.
//!
//! A worked guide lives in the `book/` directory of the repository; its
//! code snippets are the doc-tests of this crate.
//!
//! # Examples
//!
//! The closed form at the bottom of the spectrum: the spherical sequence
//! at `theta = 0` is the extremal radial function `Xi`.
//!
//! ```
//! use tree_harmonics::radial::xi;
//! use tree_harmonics::spherical::{spherical_values_gamma, SphericalParameter};
//!
//! let param = SphericalParameter::real(2, 0.0).unwrap();
//! let p = spherical_values_gamma(2, param.gamma(), 30);
//! for (n, &value) in p.iter().enumerate() {
//!     assert!((value - xi(2, n)).abs() <= 1e-12);
//! }
//! ```

pub mod config;
pub mod error;
pub mod hypergroup;
pub mod io;
pub mod opnorm;
pub mod radial;
pub mod spherical;
pub mod svg;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
