use crate::error::{Error, Result};

/// All rates and couplings of the cavity system, in a single consistent
/// frequency unit. Shipped configs express everything in units of the
/// source decay rate `gamma`, but the engines are unit-agnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Source-cavity decay rate.
    pub gamma: f64,
    /// Mode-a (single-photon mode) decay rate.
    pub kappa_a: f64,
    /// Mode-b (probe mode) decay rate.
    pub kappa_b: f64,
    /// Cross-Kerr strength.
    pub chi: f64,
    /// Coherent drive amplitude (real, non-negative).
    pub epsilon: f64,
    /// Mode-a detuning.
    pub delta_a: f64,
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { field });
    }
    if value <= 0.0 {
        return Err(Error::NonPositive { field, value });
    }
    Ok(())
}

fn check_finite(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { field });
    }
    Ok(())
}

impl SystemParams {
    pub fn new(
        gamma: f64,
        kappa_a: f64,
        kappa_b: f64,
        chi: f64,
        epsilon: f64,
        delta_a: f64,
    ) -> Result<Self> {
        SystemParams {
            gamma,
            kappa_a,
            kappa_b,
            chi,
            epsilon,
            delta_a,
        }
        .validated()
    }

    /// Checks all field invariants, returning the params unchanged on success.
    pub fn validated(self) -> Result<Self> {
        check_positive("gamma", self.gamma)?;
        check_positive("kappa_a", self.kappa_a)?;
        check_positive("kappa_b", self.kappa_b)?;
        check_finite("chi", self.chi)?;
        check_finite("epsilon", self.epsilon)?;
        if self.epsilon < 0.0 {
            return Err(Error::Negative {
                field: "epsilon",
                value: self.epsilon,
            });
        }
        check_finite("delta_a", self.delta_a)?;
        Ok(self)
    }

    /// Peak conditional displacement magnitude B = 4 chi epsilon / kappa_b^2.
    ///
    /// This is the single place the derived quantity is computed.
    pub fn displacement_scale(&self) -> f64 {
        4.0 * self.chi * self.epsilon / (self.kappa_b * self.kappa_b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_params() -> SystemParams {
        SystemParams {
            gamma: 1.0,
            kappa_a: 0.5,
            kappa_b: 4.0,
            chi: 0.1,
            epsilon: 1.0,
            delta_a: 0.0,
        }
    }

    #[test]
    fn fig2_params_validate() {
        assert!(fig2_params().validated().is_ok());
    }

    #[test]
    fn zero_gamma_rejected() {
        let p = SystemParams {
            gamma: 0.0,
            ..fig2_params()
        };
        let msg = p.validated().unwrap_err().to_string();
        assert!(msg.contains("gamma must be positive"), "{msg}");
    }

    #[test]
    fn negative_kappa_b_rejected() {
        let p = SystemParams {
            kappa_b: -1.0,
            ..fig2_params()
        };
        let msg = p.validated().unwrap_err().to_string();
        assert!(msg.contains("kappa_b must be positive"), "{msg}");
    }

    #[test]
    fn non_finite_rejected() {
        let p = SystemParams {
            chi: f64::NAN,
            ..fig2_params()
        };
        let msg = p.validated().unwrap_err().to_string();
        assert!(msg.contains("chi must be finite"), "{msg}");
        let p = SystemParams {
            kappa_a: f64::INFINITY,
            ..fig2_params()
        };
        assert!(p.validated().is_err());
    }

    #[test]
    fn negative_epsilon_rejected() {
        let p = SystemParams {
            epsilon: -0.5,
            ..fig2_params()
        };
        assert!(p.validated().is_err());
    }

    #[test]
    fn displacement_scale_value() {
        let p = SystemParams {
            kappa_b: 4.0,
            chi: 4.0,
            epsilon: 1.0,
            ..fig2_params()
        };
        assert_eq!(p.displacement_scale(), 1.0);
    }
}
