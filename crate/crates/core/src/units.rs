//! dB and dBm conversions. Everything outside this module works in linear
//! watts and ratios.

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_dbm_is_a_tenth_of_a_watt() {
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(0.1) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_noise_psd() {
        // -174 dBm/Hz over 180 kHz
        let n = dbm_to_watts(-174.0) * 180e3;
        assert!((n - 7.166e-16).abs() / 7.166e-16 < 1e-3);
    }

    #[test]
    fn minus_three_db() {
        assert!((db_to_linear(-3.0) - 0.501187).abs() < 1e-6);
        assert!((linear_to_db(2.0) - 3.0103).abs() < 1e-4);
    }
}
