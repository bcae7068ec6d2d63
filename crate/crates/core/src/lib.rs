//! Exact computations with the rank-two Heisenberg-Virasoro algebra and its
//! graded weight modules: brackets, PBW straightening, Laurent, Fock and
//! Verma-type modules, induced modules, radicals and window-sweep experiments.

pub mod cli;
pub mod constructions;
pub mod exactla;
pub mod experiments;
pub mod exppoly;
pub mod gradmod;
pub mod hvr2;
pub mod lattice;
