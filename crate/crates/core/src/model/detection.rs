use super::params::DetectionChain;
use crate::error::Result;

/// Fraction of intracavity light leaving through the output coupler,
/// `T_OCM / (T_OCM + L)`.
pub fn escape_efficiency(chain: &DetectionChain) -> Result<f64> {
    chain.validate()?;
    Ok(chain.t_ocm / (chain.t_ocm + chain.cavity_loss))
}

/// Product of the escape efficiency and every downstream factor of the chain
/// (frequency conversion included; it is 1.0 for a node without one).
pub fn total_detection_efficiency(chain: &DetectionChain) -> Result<f64> {
    let esc = escape_efficiency(chain)?;
    Ok(esc * chain.eta_smf * chain.eta_filter * chain.eta_mmf * chain.eta_det * chain.eta_fc)
}

/// Cavity-to-detector transmission `η_SMF · η_Filter · η_MMF`.
pub fn transmission_efficiency(chain: &DetectionChain) -> Result<f64> {
    chain.validate()?;
    Ok(chain.eta_smf * chain.eta_filter * chain.eta_mmf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_values() {
        let mut c = DetectionChain::experimental();
        assert!((escape_efficiency(&c).unwrap() - 0.606).abs() < 5e-4);
        c.cavity_loss = 0.0;
        assert_eq!(escape_efficiency(&c).unwrap(), 1.0);
        c.cavity_loss = 0.005;
        assert!((escape_efficiency(&c).unwrap() - 0.20 / 0.205).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator_rejected() {
        let c = DetectionChain {
            t_ocm: 0.0,
            cavity_loss: 0.0,
            ..DetectionChain::experimental()
        };
        assert!(escape_efficiency(&c).is_err());
    }

    #[test]
    fn budgets() {
        let e = total_detection_efficiency(&DetectionChain::experimental()).unwrap();
        assert!((e - 0.150).abs() < 0.003, "{e}");
        let e = total_detection_efficiency(&DetectionChain::improved()).unwrap();
        assert!((e - 0.90).abs() < 0.01, "{e}");
        let t = transmission_efficiency(&DetectionChain::experimental()).unwrap();
        assert!((t - 0.36).abs() < 0.01);
    }

    #[test]
    fn perfect_chain() {
        let c = DetectionChain {
            t_ocm: 0.37,
            cavity_loss: 0.0,
            eta_smf: 1.0,
            eta_filter: 1.0,
            eta_mmf: 1.0,
            eta_det: 1.0,
            eta_fc: 1.0,
        };
        assert_eq!(total_detection_efficiency(&c).unwrap(), 1.0);
    }
}
