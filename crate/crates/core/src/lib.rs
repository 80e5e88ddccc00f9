//! Cutting-plane engine and verification toolkit for the bipartite boolean
//! quadric polytope with multiple-choice constraints.
//!
//! The crate models bipartite instances whose X side carries a partition
//! into multiple-choice subsets, generates the known facet families of the
//! associated polytope, separates them against fractional LP points,
//! certifies convex-hull completeness on cycle-free dependency structures
//! via interval certificates, and builds pooling-problem formulations
//! strengthened by these cuts.

pub mod families;
pub mod hull;
pub mod instance;
pub mod io;
pub mod netflow;
pub mod oracle;
pub mod pooling;
pub mod rng;
pub mod separators;
pub mod simplex;
pub mod transforms;
