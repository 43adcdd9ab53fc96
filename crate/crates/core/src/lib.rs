//! Critical orbits of one-parameter polynomial families: symbolic iterates, escape rates and
//! Green's functions, Böttcher coordinates, bifurcation measures on parameter windows,
//! post-critically finite parameters, equidistribution diagnostics, the `Per_1(λ)` curves,
//! and orbit relations.

pub mod coeff;
pub mod equidist;
pub mod escape;
pub mod error;
pub mod family;
pub mod map;
pub mod parse;
pub mod per1;
pub mod plane;
pub mod poly;
pub mod preperiodic;
pub mod orbit;
pub mod relations;
pub mod roots;
pub mod series;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use coeff::{Coeff, GaussRat};
pub use error::{Error, Result};
pub use family::{AnyFamily, Family, NumericFamily};
pub use map::PolyMap;
pub use num_complex::Complex64;
pub use poly::{BiPoly, TPoly};
