use crate::error::{Error, Result};

/// Single-photon envelope nu(t), normalized so that the integral of
/// |nu(t)|^2 over all time is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Photon emitted from a source cavity with damping constant `gamma`,
    /// prepared in a one-photon state at time `t0`:
    /// nu(t) = sqrt(gamma) exp(-gamma (t - t0) / 2) for t >= t0, else 0.
    ExponentialDecay { gamma: f64, t0: f64 },
}

impl PulseShape {
    /// Exponential-decay pulse starting at t0 = 0.
    pub fn exponential(gamma: f64) -> Self {
        PulseShape::ExponentialDecay { gamma, t0: 0.0 }
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            PulseShape::ExponentialDecay { gamma, t0 } => {
                if !gamma.is_finite() {
                    return Err(Error::NonFinite {
                        field: "pulse gamma",
                    });
                }
                if gamma <= 0.0 {
                    return Err(Error::NonPositive {
                        field: "pulse gamma",
                        value: gamma,
                    });
                }
                if !t0.is_finite() {
                    return Err(Error::NonFinite { field: "pulse t0" });
                }
                Ok(self)
            }
        }
    }

    /// Envelope amplitude nu(t).
    pub fn nu(&self, t: f64) -> f64 {
        match *self {
            PulseShape::ExponentialDecay { gamma, t0 } => {
                if t < t0 {
                    0.0
                } else {
                    gamma.sqrt() * (-gamma * (t - t0) / 2.0).exp()
                }
            }
        }
    }

    /// Start time of the pulse.
    pub fn t0(&self) -> f64 {
        match *self {
            PulseShape::ExponentialDecay { t0, .. } => t0,
        }
    }

    /// Characteristic decay rate of the envelope.
    pub fn rate(&self) -> f64 {
        match *self {
            PulseShape::ExponentialDecay { gamma, .. } => gamma,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;

    #[test]
    fn zero_before_start() {
        let p = PulseShape::exponential(1.0);
        assert_eq!(p.nu(-0.5), 0.0);
    }

    #[test]
    fn boundary_value_is_sqrt_gamma() {
        let p = PulseShape::exponential(1.0);
        assert_eq!(p.nu(0.0), 1.0);
        let p = PulseShape::exponential(4.0);
        assert_eq!(p.nu(0.0), 2.0);
    }

    #[test]
    fn normalized_to_quadrature_tolerance() {
        // Independent quadrature oracle over [t0, t0 + 40/gamma].
        for gamma in [0.3, 1.0, 2.5] {
            let p = PulseShape::ExponentialDecay { gamma, t0: 0.7 };
            let norm = quad::integrate(|t| p.nu(t) * p.nu(t), 0.7, 0.7 + 40.0 / gamma, 1e-12)
                .unwrap();
            assert!((norm - 1.0).abs() < 1e-9, "gamma={gamma}: norm={norm}");
        }
    }

    #[test]
    fn invalid_rates_rejected() {
        assert!(PulseShape::exponential(0.0).validated().is_err());
        assert!(PulseShape::exponential(f64::NAN).validated().is_err());
    }

    proptest! {
        #[test]
        fn non_negative_and_non_increasing(
            gamma in 0.05f64..10.0,
            t0 in -2.0f64..2.0,
            t1 in 0.0f64..20.0,
            dt in 0.0f64..5.0,
        ) {
            let p = PulseShape::ExponentialDecay { gamma, t0 };
            let a = p.nu(t0 + t1);
            let b = p.nu(t0 + t1 + dt);
            prop_assert!(a >= 0.0);
            prop_assert!(b <= a + 1e-15);
        }
    }
}
