//! Pole sweeps and rate fits, the blow-up comparison with the limit profile and the
//! random-matrix check of the eigenvalue lemma.

mod blowup;
mod fit;
mod matrix;
mod sweep;

pub use blowup::{blowup_compare, BlowupReport, EXCLUDED_RADIUS};
pub use fit::{fit_rate, least_squares, GapSign, RateFit, CONCLUSIVE_R2};
pub use matrix::{lemma_matrix, matrix_lemma_check, MatrixNoise, MatrixReport};
pub use sweep::{
    alternate_cut, nodal_direction, records_from_csv, records_to_csv, run_sweep, thread_cap, GaugeCheck, PathSpec,
    SweepFailure, SweepOutcome, SweepRecord, SweepSpec, CSV_HEADER,
};
