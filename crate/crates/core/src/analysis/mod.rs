//! Observables, fits, spectrum matching and equilibrium scans.

pub mod fit;
pub mod observables;
pub mod scan;
pub mod spectrum;

pub use fit::{fit_damped_cosine, fit_power_law, fit_quadratic, FitModel, FitResult};
pub use observables::{error_rate, observables, reduced_observables, series_observables, ObservableSample};
pub use scan::{coupling_reduction_scan, equilibrium_point, equilibrium_scan, CouplingPoint, HorizonRule, ScanPoint};
pub use spectrum::{match_table1, reduced_spectrum, EigenPair, Table1Match};
