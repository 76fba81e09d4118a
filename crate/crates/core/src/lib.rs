//! Vector-valued Fourier analysis on finite abelian groups and truncated
//! profinite towers, with estimators for the norm constants that separate
//! Hilbert spaces from general Banach spaces.

pub mod constants;
pub mod experiments;
mod fft;
pub mod function;
pub mod group;
pub mod norms;
pub mod tower;
pub mod transform;

pub use function::{simple_function, Measure, SimpleTensor, VectorFunction};
pub use group::{Character, FiniteAbelianGroup, GroupElement, Subgroup};
pub use norms::{Exponent, NormSpec, XVector};
pub use transform::{dft, idft, reflect, Strategy, TransformPlan};
