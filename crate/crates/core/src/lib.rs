//! Explicit Serre weight subspaces of mod p Galois cohomology.
//!
//! Exact arithmetic over finite fields and truncated Laurent series, the
//! Artin-Hasse exponential, the Vostokov form of the Hilbert pairing, the
//! (J, x) weight combinatorics, and a comparison against an explicit basis
//! of Kummer classes built from Artin-Hasse units.

pub mod ahpairing;
pub mod checks;
pub mod cli;
pub mod ddrcmp;
pub mod ffield;
pub mod linalg;
pub mod localfield;
pub mod psi;
pub mod series;
pub mod weights;
