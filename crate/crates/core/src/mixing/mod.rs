//! Partitions, d-bar distances and finite-depth mixing diagnostics.

pub mod dbar;
pub mod filter;
pub mod partition;
pub mod scans;

pub use dbar::{dbar, hamming, Coupling, DbarResult, LabelDistribution, SolverStats, MAX_SUPPORT};
pub use filter::{eps_ae_filter, FilterReport};
pub use partition::{join_partitions, Atom, Label, Partition, TestSet, MASS_FLOOR};
pub use scans::{k_scan, vwb_scan, KAtomRecord, KScanReport, VwbAtomRecord, VwbScanReport};
