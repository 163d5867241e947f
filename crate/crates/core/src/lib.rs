//! Rank-one cutting-and-stacking transformations built from comb height
//! sets, exhaustive descendant-set certificates for their products, and
//! diagnostics for the Kakutani–Parry family of Markov shifts.

pub mod descendants;
pub mod error;
pub mod heights;
pub mod markov;
pub mod tower;
pub mod value;

pub use error::{Error, Result};
pub use heights::{build_family, comb_construct, HeightSet, RankOneSpec};
