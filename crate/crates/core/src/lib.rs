//! Negacyclic NTT-based polynomial multiplication over word-size primes.
//!
//! Modular products use a Barrett reduction whose quotient estimate needs
//! at most one correction for moduli up to 62 bits. Transforms are the
//! merged Cooley-Tukey / Gentleman-Sande pair (no pre/post scaling passes),
//! with radix-4 and four-step variants, and a fused multiplication that
//! skips the last forward stage and first inverse stage.

pub mod bench;
pub mod counter;
pub mod error;
pub mod io;
pub mod modarith;
pub mod ntt;
pub mod params;
pub mod polymul;
pub mod rns;
pub mod verify;

pub use counter::{Counter, NoCount, OpCounter};
pub use error::{Error, Result};
pub use modarith::{Modulus, Variant};
pub use ntt::{Order, Polynomial};
pub use params::{build_plan, NttPlan, PrimeSource};
pub use polymul::{Backend, FusedPlan, Method};
