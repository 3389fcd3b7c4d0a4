//! dB helpers and a small frequency newtype.

use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier frequency, stored in Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_hz(hz: f64) -> Self {
        Frequency(hz)
    }

    pub fn from_ghz(ghz: f64) -> Self {
        Frequency(ghz * 1e9)
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        self.0 / 1e9
    }
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
