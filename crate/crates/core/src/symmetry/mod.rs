//! Rotation symmetry of spectra: orbit partitions, the multiplicity and
//! trace criteria, and the orbit algebra relating them.

mod analyze;
mod gcd;
mod orbit;
mod trace;
mod vandermonde;

pub use analyze::{analyze, analyze_scan, AnalyzeConfig, SymmetryReport, Tolerances};
pub use gcd::{gcd_decompose, orbit_trace_sum, GcdDecomposition, OrbitSum};
pub use orbit::{partition_orbits, root_of_unity, spectral_symmetry_check, Orbit, OrbitPartition};
pub use trace::{trace_symmetry_check, PowerScan, TraceCheck, TraceConfig, TraceEntry};
pub use vandermonde::{orbit_character_sums, vandermonde_recover, vandermonde_recover_with_tol};
