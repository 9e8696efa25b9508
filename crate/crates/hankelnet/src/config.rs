//! Sweep configuration and its flat `key = value` file format.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hankelnet_core::{DesignKind, Integrand, PrimeBase, RMode, WeightMode};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: invalid value {value:?}")]
    Value { key: &'static str, value: String },
    #[error("{0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegrandKind {
    ProductPower,
    Lognormal,
    TExp,
}

impl IntegrandKind {
    pub fn name(self) -> &'static str {
        match self {
            IntegrandKind::ProductPower => "product_power",
            IntegrandKind::Lognormal => "lognormal",
            IntegrandKind::TExp => "t_exp",
        }
    }

    /// The integrand in `s` dimensions. Weights only apply to the product-power family.
    pub fn build(self, s: usize, c: f64, weights: WeightMode, base: PrimeBase) -> hankelnet_core::Result<Integrand> {
        match self {
            IntegrandKind::ProductPower => Integrand::product_power(c, weights.weights(s, c)),
            IntegrandKind::Lognormal => Ok(Integrand::Lognormal { s, base }),
            IntegrandKind::TExp => Ok(Integrand::TExp { s }),
        }
    }
}

impl fmt::Display for IntegrandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegrandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "product_power" | "power" => Ok(IntegrandKind::ProductPower),
            "lognormal" => Ok(IntegrandKind::Lognormal),
            "t_exp" | "texp" => Ok(IntegrandKind::TExp),
            _ => Err(format!("unknown integrand {s:?} (expected product_power, lognormal or t_exp)")),
        }
    }
}

/// `fixed`, `m_log_m`, or a fixed odd replicate count.
pub fn parse_r_mode(s: &str) -> Result<RMode, String> {
    if let Ok(r) = s.trim().parse::<usize>() {
        return Ok(RMode::Fixed(r));
    }
    s.trim().parse::<RMode>().map_err(|e| e.to_string())
}

pub fn parse_base(s: &str) -> Result<PrimeBase, String> {
    let b: u32 = s.trim().parse().map_err(|_| format!("base {s:?} is not an integer"))?;
    PrimeBase::new(b).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub designs: Vec<DesignKind>,
    pub bases: Vec<PrimeBase>,
    pub m_min: usize,
    pub m_max: usize,
    pub s: usize,
    pub integrand: IntegrandKind,
    pub c: f64,
    pub weight_mode: WeightMode,
    pub r_mode: RMode,
    pub batches: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            designs: vec![DesignKind::Hrd, DesignKind::Urd],
            bases: vec![PrimeBase::new(2).expect("2 is prime")],
            m_min: 6,
            m_max: 12,
            s: 50,
            integrand: IntegrandKind::ProductPower,
            c: 1.5,
            weight_mode: WeightMode::Exponential,
            r_mode: RMode::default(),
            batches: 64,
            seed: 0,
            out: None,
        }
    }
}

fn list<T>(key: &'static str, value: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, ConfigError> {
    let items: Result<Vec<T>, String> = value.split(',').map(|v| parse(v.trim())).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(ConfigError::Value { key, value: value.to_string() }),
    }
}

fn scalar<T: FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value { key, value: value.to_string() })
}

impl SweepConfig {
    pub fn ms(&self) -> std::ops::RangeInclusive<usize> {
        self.m_min..=self.m_max
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.m_min > self.m_max {
            return Err(ConfigError::Invalid("m range is empty"));
        }
        if self.m_min == 0 {
            return Err(ConfigError::Invalid("m must be at least 1"));
        }
        if self.designs.is_empty() || self.bases.is_empty() {
            return Err(ConfigError::Invalid("at least one design and one base are required"));
        }
        if self.s == 0 {
            return Err(ConfigError::Invalid("s must be at least 1"));
        }
        if self.batches == 0 {
            return Err(ConfigError::Invalid("batches must be at least 1"));
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SweepConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: line_no });
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::DuplicateKey { line: line_no, key: key.to_string() });
            }
            seen.push(key.to_string());
            match key {
                "design" => {
                    cfg.designs = list("design", value, |v| v.parse::<DesignKind>().map_err(|e| e.to_string()))?
                }
                "base" => cfg.bases = list("base", value, parse_base)?,
                "m_min" => cfg.m_min = scalar("m_min", value)?,
                "m_max" => cfg.m_max = scalar("m_max", value)?,
                "s" => cfg.s = scalar("s", value)?,
                "integrand" => cfg.integrand = scalar("integrand", value)?,
                "c" => cfg.c = scalar("c", value)?,
                "weight_mode" => cfg.weight_mode = scalar("weight_mode", value)?,
                "r_mode" => {
                    cfg.r_mode = parse_r_mode(value)
                        .map_err(|_| ConfigError::Value { key: "r_mode", value: value.to_string() })?
                }
                "batches" => cfg.batches = scalar("batches", value)?,
                "seed" => cfg.seed = scalar("seed", value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                _ => return Err(ConfigError::UnknownKey { line: line_no, key: key.to_string() }),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let text = "# desk sweep\n\
                    design = hrd, urd\n\
                    base = 2\n\
                    m_min = 4\n\
                    m_max = 6\n\
                    s = 3\n\
                    integrand = t_exp\n\
                    c = 2.5\n\
                    weight_mode = equal\n\
                    r_mode = m_log_m\n\
                    batches = 8\n\
                    seed = 42   # master\n\
                    out = sweep.csv\n";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.designs, vec![DesignKind::Hrd, DesignKind::Urd]);
        assert_eq!(cfg.ms(), 4..=6);
        assert_eq!(cfg.s, 3);
        assert_eq!(cfg.integrand, IntegrandKind::TExp);
        assert_eq!(cfg.c, 2.5);
        assert_eq!(cfg.weight_mode, WeightMode::Equal);
        assert_eq!(cfg.r_mode, RMode::m_log_m());
        assert_eq!(cfg.batches, 8);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.out, Some(PathBuf::from("sweep.csv")));
    }

    #[test]
    fn defaults_and_numeric_r() {
        let cfg = SweepConfig::parse("r_mode = 7\n").unwrap();
        assert_eq!(cfg.r_mode, RMode::Fixed(7));
        assert_eq!(cfg.batches, 64);
        assert_eq!(cfg.s, 50);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SweepConfig::parse("m_min 3"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(SweepConfig::parse("colour = red"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(SweepConfig::parse("s = 2\ns = 3"), Err(ConfigError::DuplicateKey { line: 2, .. })));
        assert!(matches!(SweepConfig::parse("base = 4"), Err(ConfigError::Value { key: "base", .. })));
        assert_eq!(SweepConfig::parse("m_min = 8\nm_max = 7"), Err(ConfigError::Invalid("m range is empty")));
    }
}
