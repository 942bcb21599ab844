use serde::Deserialize;
use std::sync::OnceLock;

use super::Isotope;
use crate::error::{Error, Result};
use crate::units::hz_to_rad;

const BUILTIN: &str = include_str!("../../data/constants.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct IsotopeData {
    pub wavelength_m: f64,
    pub abundance: f64,
    pub transition: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Defaults {
    /// Excited-state decay rate, cyclic.
    pub gamma_hz: f64,
    /// Ground coherence decay rate, cyclic.
    pub gamma0_hz: f64,
    pub branch_plus: f64,
    pub saturation_intensity_w_m2: f64,
}

impl Defaults {
    pub fn gamma(&self) -> f64 {
        hz_to_rad(self.gamma_hz)
    }

    pub fn gamma0(&self) -> f64 {
        hz_to_rad(self.gamma0_hz)
    }
}

/// Isotope data and model defaults, as read from a constants file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ConstantsTable {
    pub defaults: Defaults,
    pub rb85: IsotopeData,
    pub rb87: IsotopeData,
}

impl ConstantsTable {
    /// The table shipped inside the crate.
    pub fn builtin() -> &'static ConstantsTable {
        static TABLE: OnceLock<ConstantsTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::from_toml_str(BUILTIN).expect("embedded constants table is valid")
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: ConstantsTable =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn isotope(&self, isotope: Isotope) -> &IsotopeData {
        match isotope {
            Isotope::Rb85 => &self.rb85,
            Isotope::Rb87 => &self.rb87,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, iso) in [("rb85", &self.rb85), ("rb87", &self.rb87)] {
            if !(iso.abundance > 0.0 && iso.abundance < 1.0) {
                return Err(Error::Parse(format!(
                    "{name}: abundance must lie in (0, 1), got {}",
                    iso.abundance
                )));
            }
            if !(iso.wavelength_m > 0.0) {
                return Err(Error::Parse(format!("{name}: wavelength must be positive")));
            }
        }
        let sum = self.rb85.abundance + self.rb87.abundance;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parse(format!(
                "isotope abundances must sum to 1, got {sum}"
            )));
        }
        let d = &self.defaults;
        if !(d.gamma_hz > 0.0 && d.gamma0_hz >= 0.0 && d.saturation_intensity_w_m2 > 0.0) {
            return Err(Error::Parse("defaults must be positive".into()));
        }
        if !(0.0..=1.0).contains(&d.branch_plus) {
            return Err(Error::Parse("branch_plus must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_values() {
        let t = ConstantsTable::builtin();
        assert_eq!(t.rb87.wavelength_m, 794.987e-9);
        assert_eq!(t.rb85.wavelength_m, 794.984e-9);
        assert_eq!(t.rb87.abundance, 0.28);
        assert_eq!(t.rb85.abundance, 0.72);
        assert_eq!(t.defaults.gamma_hz, 5.75e6);
    }

    #[test]
    fn rejects_bad_abundances() {
        let text = BUILTIN.replace("abundance = 0.28", "abundance = 0.30");
        assert!(ConstantsTable::from_toml_str(&text).is_err());
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(ConstantsTable::from_toml_str("[rb87\nwavelength_m = 1").is_err());
    }
}
