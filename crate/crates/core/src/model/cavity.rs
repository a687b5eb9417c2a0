use super::params::CavityParams;
use crate::error::Result;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free spectral range of a ring cavity whose round trip equals its stated
/// length, in Hz.
pub fn cavity_fsr(cav: &CavityParams) -> Result<f64> {
    cav.validate()?;
    Ok(SPEED_OF_LIGHT / cav.length)
}

/// Cavity linewidth (FWHM) of each arm, `FSR / F`, in Hz.
pub fn cavity_linewidths(cav: &CavityParams) -> Result<(f64, f64)> {
    let fsr = cavity_fsr(cav)?;
    Ok((fsr / cav.finesse_left, fsr / cav.finesse_right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_metre_ring_is_fifty_megahertz() {
        let f = cavity_fsr(&CavityParams::experimental()).unwrap();
        assert!((f - 49.97e6).abs() < 0.01e6, "{f}");
        let half = CavityParams {
            length: 3.0,
            ..CavityParams::experimental()
        };
        let f3 = cavity_fsr(&half).unwrap();
        assert!((f3 - 99.93e6).abs() < 0.01e6);
        assert!((f3 / f - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linewidths_near_three_megahertz() {
        let (l, r) = cavity_linewidths(&CavityParams::experimental()).unwrap();
        assert!(l > r);
        assert!((l - 2.957e6).abs() < 1e3);
    }
}
