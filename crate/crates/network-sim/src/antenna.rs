/// Peak element gain of the sectorized pattern, dBi.
pub const ELEMENT_PEAK_GAIN_DBI: f64 = 8.0;

const BEAMWIDTH_3DB_DEG: f64 = 65.0;
const SLA_DB: f64 = 30.0;
const FRONT_BACK_FLOOR_DB: f64 = 30.0;

/// Sectorized element gain in dBi toward a bearing given in the sector frame.
///
/// `azimuth_deg` in [-180, 180] relative to the boresight azimuth,
/// `zenith_deg` in [0, 180] measured from the vertical, `downtilt_deg` the
/// boresight zenith angle (100 means 10 degrees below the horizon). The
/// maximum sits on the boresight and attenuation is capped at the front-back
/// floor.
pub fn antenna_gain_db(azimuth_deg: f64, zenith_deg: f64, downtilt_deg: f64) -> f64 {
    let av = -f64::min(
        12.0 * ((zenith_deg - downtilt_deg) / BEAMWIDTH_3DB_DEG).powi(2),
        SLA_DB,
    );
    let ah = -f64::min(
        12.0 * (azimuth_deg / BEAMWIDTH_3DB_DEG).powi(2),
        SLA_DB,
    );
    let attenuation = -f64::min(-(av + ah), FRONT_BACK_FLOOR_DB);
    ELEMENT_PEAK_GAIN_DBI + attenuation
}
