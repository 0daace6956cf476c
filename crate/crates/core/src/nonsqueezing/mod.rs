//! The nonsqueezing skeleton: product moduli spaces and continuation in
//! `S² × T²`, monotonicity in `C^n`, Hofer's lemma and bubbling.

mod hofer;
mod monotonicity;
mod product;

pub use hofer::*;
pub use monotonicity::*;
pub use product::*;
