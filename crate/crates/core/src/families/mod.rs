//! Builders for the solvable model families.

pub mod bowtie;
pub mod dtcm;
pub mod two_band;
pub mod two_by_three;

pub use bowtie::{build_bowtie_family, BowtieSpec};
pub use dtcm::{build_dtcm, DtcmSpec};
pub use two_band::{
    build_two_band, solve_coupling_closure, two_band_residuals, two_band_spec_from_model, TwoBandResiduals, TwoBandSpec,
};
pub use two_by_three::{build_2x3, TwoByThreeSpec};
