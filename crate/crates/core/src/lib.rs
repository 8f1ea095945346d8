//! Numerical toolkit for rough singular integral operators with kernels
//! Ω(y)/|y|^n · h(|y|), built around the star-shaped set
//! S_Ω = {x : |x| ≤ |Ω(x)|^{1/n}}.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod error;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod maximal;
pub mod operators;
pub mod par;
pub mod quad;
pub mod sphere;
pub mod starset;
pub mod trend;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
