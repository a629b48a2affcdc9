//! dBm / watt conversion. Everything inside the library is linear watts.

use crate::error::{Error, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> Result<f64> {
    if !(watts > 0.0) || !watts.is_finite() {
        return Err(Error::invalid("watts", format!("must be positive and finite, got {watts}")));
    }
    Ok(10.0 * watts.log10() + 30.0)
}

/// Linear ratio from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
