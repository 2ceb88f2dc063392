//! The nine identifiable parameter groups and the physical constants the
//! model needs alongside them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grouped parameters.
pub const N_PARAMS: usize = 9;

/// Component names in vector order.
pub const PARAM_NAMES: [&str; N_PARAMS] = [
    "alpha_neg",
    "alpha_pos",
    "q_neg",
    "q_pos",
    "d_neg",
    "d_pos",
    "soc0_neg",
    "soc0_pos",
    "r0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Electrode {
    Negative,
    Positive,
}

impl fmt::Display for Electrode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Electrode::Negative => "negative",
            Electrode::Positive => "positive",
        })
    }
}

/// Grouped-parameter vector of the single particle model.
///
/// Vector order is `[α⁻, α⁺, Q⁻, Q⁺, d⁻, d⁺, SOC₀⁻, SOC₀⁺, R₀]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupedParameters {
    /// Negative-particle diffusion time constant `R_s² / D_s`, s.
    pub alpha_neg: f64,
    /// Positive-particle diffusion time constant, s.
    pub alpha_pos: f64,
    /// Negative electrode capacity, C.
    pub q_neg: f64,
    /// Positive electrode capacity, C.
    pub q_pos: f64,
    /// Negative grouped kinetic constant `r_eff √c_e / (F R_s)`.
    pub d_neg: f64,
    /// Positive grouped kinetic constant.
    pub d_pos: f64,
    /// Negative stoichiometry at full charge.
    pub soc0_neg: f64,
    /// Positive stoichiometry at full charge.
    pub soc0_pos: f64,
    /// Ohmic resistance, Ω.
    pub r0: f64,
}

impl GroupedParameters {
    /// Reference cell: NMC/graphite 18650, 2.9 Ah nominal.
    pub const REFERENCE: GroupedParameters = GroupedParameters {
        alpha_neg: 3105.3457,
        alpha_pos: 1865.8674,
        q_neg: 10765.6853,
        q_pos: 11117.7742,
        d_neg: 3.3407e-5,
        d_pos: 7.3545e-4,
        soc0_neg: 0.9472,
        soc0_pos: 0.0188,
        r0: 0.0218,
    };

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [
            self.alpha_neg,
            self.alpha_pos,
            self.q_neg,
            self.q_pos,
            self.d_neg,
            self.d_pos,
            self.soc0_neg,
            self.soc0_pos,
            self.r0,
        ]
    }

    /// Builds a parameter set from vector order without validating it.
    pub fn from_array(v: [f64; N_PARAMS]) -> Self {
        GroupedParameters {
            alpha_neg: v[0],
            alpha_pos: v[1],
            q_neg: v[2],
            q_pos: v[3],
            d_neg: v[4],
            d_pos: v[5],
            soc0_neg: v[6],
            soc0_pos: v[7],
            r0: v[8],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_array();
        for (i, (&x, name)) in v.iter().zip(PARAM_NAMES).enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: x,
                    reason: "must be finite",
                });
            }
            if i == 6 || i == 7 {
                if x <= 0.0 || x >= 1.0 {
                    return Err(Error::InvalidParameter {
                        name,
                        value: x,
                        reason: "must lie strictly inside (0, 1)",
                    });
                }
            } else if x <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: x,
                    reason: "must be strictly positive",
                });
            }
        }
        Ok(())
    }

    pub fn alpha(&self, e: Electrode) -> f64 {
        match e {
            Electrode::Negative => self.alpha_neg,
            Electrode::Positive => self.alpha_pos,
        }
    }

    pub fn capacity(&self, e: Electrode) -> f64 {
        match e {
            Electrode::Negative => self.q_neg,
            Electrode::Positive => self.q_pos,
        }
    }

    pub fn kinetic(&self, e: Electrode) -> f64 {
        match e {
            Electrode::Negative => self.d_neg,
            Electrode::Positive => self.d_pos,
        }
    }

    pub fn soc0(&self, e: Electrode) -> f64 {
        match e {
            Electrode::Negative => self.soc0_neg,
            Electrode::Positive => self.soc0_pos,
        }
    }
}

impl Default for GroupedParameters {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConstants {
    /// J/(mol·K)
    pub gas_constant: f64,
    /// C/mol
    pub faraday: f64,
    /// K
    pub temperature: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            gas_constant: 8.314,
            faraday: 96485.33,
            temperature: 298.15,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                value: self.temperature,
                reason: "must be strictly positive",
            });
        }
        if !(self.gas_constant > 0.0) || !(self.faraday > 0.0) {
            return Err(Error::InvalidConfig(
                "gas constant and Faraday constant must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `2RT/F`, the prefactor of the symmetric Butler–Volmer overpotential.
    pub fn kinetic_prefactor(&self) -> f64 {
        2.0 * self.gas_constant * self.temperature / self.faraday
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        GroupedParameters::REFERENCE.validate().unwrap();
    }

    #[test]
    fn array_round_trip() {
        let p = GroupedParameters::REFERENCE;
        assert_eq!(GroupedParameters::from_array(p.to_array()), p);
    }

    #[test]
    fn rejects_soc_outside_unit_interval() {
        let mut p = GroupedParameters::REFERENCE;
        p.soc0_neg = 1.2;
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter { name: "soc0_neg", .. })
        ));
        p.soc0_neg = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_nonpositive() {
        let mut p = GroupedParameters::REFERENCE;
        p.r0 = 0.0;
        assert!(p.validate().is_err());
        let mut p = GroupedParameters::REFERENCE;
        p.alpha_pos = -1.0;
        assert!(p.validate().is_err());
        let mut p = GroupedParameters::REFERENCE;
        p.d_neg = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn constants_reject_zero_temperature() {
        let c = PhysicalConstants {
            temperature: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
