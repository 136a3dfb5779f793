//! Physical constants and decibel conversions.
//!
//! Powers are kept in watts (or plain linear ratios) inside the library;
//! dB and dBm appear only at configuration boundaries.

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Linear power ratio from decibels.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decibels from a linear power ratio.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Watts from dBm.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// dBm from watts.
#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}
