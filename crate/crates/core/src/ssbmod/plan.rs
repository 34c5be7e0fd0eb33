use crate::error::{Error, Result};
use crate::sigcore::{integer_ratio, WIFI_CHIP_RATE};

/// Shift frequency and the clocks derived from it.
///
/// The master clock runs at four times |Δf| (one tick per quarter cycle) and
/// is divided down to the symbol clock. The default plan shifts by
/// 35.75 MHz with a 143 MHz master clock divided by 13 to the 11 MHz chip
/// clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPlan {
    /// Signed shift; negative moves the tone down.
    pub delta_f: f64,
    pub master_clock: f64,
    /// Master-clock ticks per symbol.
    pub divider: usize,
}

impl Default for FrequencyPlan {
    fn default() -> Self {
        Self { delta_f: 35.75e6, master_clock: 143e6, divider: 13 }
    }
}

impl FrequencyPlan {
    /// Plan for shift `delta_f` carrying symbols at `symbol_rate`.
    pub fn new(delta_f: f64, symbol_rate: f64) -> Result<Self> {
        let master_clock = 4.0 * delta_f.abs();
        let divider = integer_ratio(master_clock, symbol_rate).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "4·|Δf| = {master_clock} Hz is not an integer multiple of the symbol rate {symbol_rate} Hz"
            ))
        })?;
        Ok(Self { delta_f, master_clock, divider })
    }

    /// 802.11b plan (11 Mchip/s) for `delta_f`.
    pub fn wifi(delta_f: f64) -> Result<Self> {
        Self::new(delta_f, WIFI_CHIP_RATE)
    }

    pub fn baseband_clock(&self) -> f64 {
        self.master_clock / self.divider as f64
    }

    pub fn sign(&self) -> i32 {
        if self.delta_f < 0.0 {
            -1
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_clock_relationship() {
        let p = FrequencyPlan::default();
        assert_eq!(p.master_clock, 4.0 * p.delta_f);
        assert_eq!(p.baseband_clock(), 11e6);
        assert_eq!(FrequencyPlan::wifi(35.75e6).unwrap(), p);
    }

    #[test]
    fn alternative_plans() {
        let p = FrequencyPlan::wifi(11e6).unwrap();
        assert_eq!((p.master_clock, p.divider), (44e6, 4));
        let z = FrequencyPlan::new(-6e6, 2e6).unwrap();
        assert_eq!((z.master_clock, z.divider, z.sign()), (24e6, 12, -1));
        assert!(FrequencyPlan::wifi(10e6).is_err());
    }
}
