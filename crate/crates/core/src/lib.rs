//! Four-valued non-deterministic matrix semantics for modal logic, with
//! Kripke correspondence checking, tableau decision procedures and a Hilbert
//! proof checker.

pub mod formula;
pub mod hilbert;
pub mod kripke;
pub mod nmatrix;
pub mod tableau;

pub use formula::{parse, print, Formula, Schema};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/nmatrices.md")]
    mod nmatrices {}
    #[doc = include_str!("../../../book/src/strengthenings.md")]
    mod strengthenings {}
    #[doc = include_str!("../../../book/src/kripke.md")]
    mod kripke {}
    #[doc = include_str!("../../../book/src/tableaux.md")]
    mod tableaux {}
    #[doc = include_str!("../../../book/src/hilbert.md")]
    mod hilbert {}
}
