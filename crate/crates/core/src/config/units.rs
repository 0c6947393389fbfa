//! Unit-tagged quantities such as "0.15 um", "30 kHz" or "1e-3 gamma".

use std::f64::consts::PI;

use super::ConfigError;

/// How Hz-family tags are turned into angular rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    /// A value tagged Hz is a frequency in cycles/s and is multiplied by 2π.
    #[default]
    Cycles,
    /// The number tagged Hz is already the angular rate.
    Angular,
}

impl FrequencyConvention {
    pub fn parse(field: &str, s: &str) -> Result<Self, ConfigError> {
        match s {
            "cycles" => Ok(Self::Cycles),
            "angular" => Ok(Self::Angular),
            _ => Err(ConfigError::invalid(field, format!("unknown frequency convention {s:?} (cycles | angular)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cycles => "cycles",
            Self::Angular => "angular",
        }
    }
}

fn split(field: &str, s: &str) -> Result<(f64, String), ConfigError> {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|(i, c)| {
            c.is_whitespace() || (c.is_alphabetic() && !(matches!(c, 'e' | 'E') && number_continues(&s[i + 1..])))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(end);
    let value: f64 =
        num.trim().parse().map_err(|_| ConfigError::invalid(field, format!("cannot parse a number from {s:?}")))?;
    let unit = unit.trim().to_string();
    if unit.is_empty() {
        return Err(ConfigError::MissingUnit { field: field.to_string(), value: s.to_string() });
    }
    Ok((value, unit))
}

fn number_continues(rest: &str) -> bool {
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

fn unknown(field: &str, unit: &str, expected: &str) -> ConfigError {
    ConfigError::UnknownUnit { field: field.to_string(), unit: unit.to_string(), expected: expected.to_string() }
}

/// Length in metres. Accepts m, mm, um, µm, nm.
pub fn length(field: &str, s: &str) -> Result<f64, ConfigError> {
    let (v, u) = split(field, s)?;
    let scale = match u.as_str() {
        "m" => 1.0,
        "mm" => 1e-3,
        "um" | "µm" | "μm" => 1e-6,
        "nm" => 1e-9,
        _ => return Err(unknown(field, &u, "m, mm, um, nm")),
    };
    Ok(v * scale)
}

/// Angular rate in rad/s. Hz-family tags follow `convention`; "gamma" is
/// relative to `gamma` when given.
pub fn rate(field: &str, s: &str, convention: FrequencyConvention, gamma: Option<f64>) -> Result<f64, ConfigError> {
    let (v, u) = split(field, s)?;
    let cycles = match convention {
        FrequencyConvention::Cycles => 2.0 * PI,
        FrequencyConvention::Angular => 1.0,
    };
    let value = match u.as_str() {
        "rad/s" | "s^-1" | "1/s" => v,
        "Hz" => v * cycles,
        "kHz" => v * 1e3 * cycles,
        "MHz" => v * 1e6 * cycles,
        "GHz" => v * 1e9 * cycles,
        "gamma" => match gamma {
            Some(g) => v * g,
            None => return Err(ConfigError::invalid(field, "a rate relative to gamma is not allowed here")),
        },
        _ => return Err(unknown(field, &u, "rad/s, Hz, kHz, MHz, GHz, gamma")),
    };
    Ok(value)
}

/// Number density in m^-3.
pub fn density(field: &str, s: &str) -> Result<f64, ConfigError> {
    let (v, u) = split(field, s)?;
    match u.as_str() {
        "m^-3" | "1/m^3" => Ok(v),
        "cm^-3" | "1/cm^3" => Ok(v * 1e6),
        _ => Err(unknown(field, &u, "m^-3, cm^-3")),
    }
}

/// Dipole moment in C·m.
pub fn dipole(field: &str, s: &str) -> Result<f64, ConfigError> {
    let (v, u) = split(field, s)?;
    match u.as_str() {
        "C m" | "C*m" | "Cm" => Ok(v),
        "D" | "debye" => Ok(v * 3.335_640_951_981_52e-30),
        _ => Err(unknown(field, &u, "C m, D")),
    }
}

/// Electric field in V/m.
pub fn field_strength(field: &str, s: &str) -> Result<f64, ConfigError> {
    let (v, u) = split(field, s)?;
    match u.as_str() {
        "V/m" => Ok(v),
        "kV/m" => Ok(v * 1e3),
        "V/cm" => Ok(v * 1e2),
        _ => Err(unknown(field, &u, "V/m, kV/m, V/cm")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(length("r", "0.15 um").unwrap(), 0.15e-6);
        assert_eq!(length("r", "780nm").unwrap(), 780e-9);
        assert_eq!(length("r", "1.5e-7 m").unwrap(), 1.5e-7);
        assert!(matches!(length("r", "0.15"), Err(ConfigError::MissingUnit { .. })));
        assert!(matches!(length("r", "3 furlong"), Err(ConfigError::UnknownUnit { .. })));
    }

    #[test]
    fn rates_follow_convention() {
        let c = rate("g", "1 MHz", FrequencyConvention::Cycles, None).unwrap();
        assert!((c - 2.0 * PI * 1e6).abs() < 1e-6);
        let a = rate("g", "20 MHz", FrequencyConvention::Angular, None).unwrap();
        assert_eq!(a, 2e7);
        assert_eq!(rate("g", "5 rad/s", FrequencyConvention::Cycles, None).unwrap(), 5.0);
        assert_eq!(rate("g", "-1e-3 gamma", FrequencyConvention::Cycles, Some(2.0)).unwrap(), -2e-3);
        assert!(rate("g", "1 gamma", FrequencyConvention::Cycles, None).is_err());
    }

    #[test]
    fn exponent_is_not_a_unit() {
        assert_eq!(density("n", "1.3e27 m^-3").unwrap(), 1.3e27);
        assert_eq!(dipole("d", "7.3e-34 C m").unwrap(), 7.3e-34);
    }
}
