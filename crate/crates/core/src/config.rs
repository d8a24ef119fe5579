//! Apparatus parameterization and its plain-text file format.
//!
//! The file is TOML. Every field is optional and defaults to the values of
//! the reference apparatus. Numeric fields accept either a bare SI number or
//! a string with a unit suffix, e.g. `window_width = "350ps"` or
//! `dark_rate = "180 kHz"`. Unknown keys are rejected.
//!
//! ```toml
//! visibility = 0.957
//! wavelength1 = "704nm"
//!
//! [source]
//! pair_rate = "9GHz"
//! model = "quantum"      # or "lhv"
//!
//! [detector_stop]
//! efficiency = "17%"
//! jitter_fwhm = "200ps"
//!
//! [tphc]
//! window_width = "350ps"
//! ```

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quantum::{Phase, Visibility};
use crate::sim::sampling;

/// Which probability law the source draws central-bin outcomes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairModel {
    #[default]
    Quantum,
    /// Square-wave local hidden variable strategy.
    Lhv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceParams {
    /// Created pairs per second. Zero gives a dark-count-only run.
    #[serde(deserialize_with = "de_rate")]
    pub pair_rate: f64,
    /// Probability that a created pair leaves the source in different fibers.
    #[serde(deserialize_with = "de_fraction")]
    pub split_efficiency: f64,
    /// Aggregate transmission from the source to detector 1, excluding
    /// the detector efficiency.
    #[serde(deserialize_with = "de_fraction")]
    pub arm1_transmission: f64,
    #[serde(deserialize_with = "de_fraction")]
    pub arm2_transmission: f64,
    pub model: PairModel,
}

impl Default for SourceParams {
    // Tuned so that each monitored output sees about 250 kHz (start) and
    // 380 kHz (stop) singles including dark counts, with a net central
    // coincidence rate of roughly 53 Hz at the fringe mean.
    fn default() -> Self {
        SourceParams {
            pair_rate: 9.0e9,
            split_efficiency: 0.05,
            arm1_transmission: 1.85e-3,
            arm2_transmission: 5.2e-3,
            model: PairModel::Quantum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferometerParams {
    #[serde(deserialize_with = "de_angle")]
    pub phase: f64,
    /// Long-minus-short arm traversal time, seconds.
    #[serde(deserialize_with = "de_time")]
    pub path_delay: f64,
    /// RMS of white phase noise applied independently to every pair, radians.
    #[serde(deserialize_with = "de_angle")]
    pub phase_noise: f64,
}

impl Default for InterferometerParams {
    fn default() -> Self {
        InterferometerParams {
            phase: 0.0,
            path_delay: 0.7e-9,
            phase_noise: 0.0,
        }
    }
}

impl InterferometerParams {
    pub fn phase(&self) -> Phase {
        Phase(self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    #[serde(deserialize_with = "de_fraction")]
    pub efficiency: f64,
    /// Dark counts per second, per output-port detector.
    #[serde(deserialize_with = "de_rate")]
    pub dark_rate: f64,
    #[serde(deserialize_with = "de_time")]
    pub jitter_fwhm: f64,
    /// Not modeled; must stay zero.
    #[serde(deserialize_with = "de_time")]
    pub dead_time: f64,
}

impl DetectorParams {
    /// Silicon SPCM at 704 nm, used as the TPHC start.
    pub fn silicon() -> Self {
        DetectorParams {
            efficiency: 0.6,
            dark_rate: 60.0,
            jitter_fwhm: 0.0,
            dead_time: 0.0,
        }
    }

    /// Passively quenched germanium APD at 1310 nm, used as the TPHC stop.
    pub fn germanium() -> Self {
        DetectorParams {
            efficiency: 0.17,
            dark_rate: 180e3,
            jitter_fwhm: 200e-12,
            dead_time: 0.0,
        }
    }

    pub fn ideal() -> Self {
        DetectorParams {
            efficiency: 1.0,
            dark_rate: 0.0,
            jitter_fwhm: 0.0,
            dead_time: 0.0,
        }
    }

    pub fn apply_jitter<R: rand::Rng + ?Sized>(&self, true_time: f64, rng: &mut R) -> f64 {
        sampling::apply_jitter(true_time, self.jitter_fwhm, rng)
    }
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self::silicon()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TphcParams {
    #[serde(deserialize_with = "de_time")]
    pub window_width: f64,
    /// Position of the central peak in `stop − start`, seconds.
    #[serde(deserialize_with = "de_time")]
    pub center_offset: f64,
}

impl Default for TphcParams {
    fn default() -> Self {
        TphcParams {
            window_width: 350e-12,
            center_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub visibility: Visibility,
    /// Wavelength of the photon analyzed by interferometer 1, meters.
    #[serde(deserialize_with = "de_length")]
    pub wavelength1: f64,
    pub seed: u64,
    pub source: SourceParams,
    pub analyzer1: InterferometerParams,
    pub analyzer2: InterferometerParams,
    pub detector_start: DetectorParams,
    pub detector_stop: DetectorParams,
    pub tphc: TphcParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            visibility: Visibility::new(0.957).expect("valid"),
            wavelength1: 704e-9,
            seed: 42,
            source: SourceParams::default(),
            analyzer1: InterferometerParams::default(),
            analyzer2: InterferometerParams::default(),
            detector_start: DetectorParams::silicon(),
            detector_stop: DetectorParams::germanium(),
            tphc: TphcParams::default(),
        }
    }
}

/// Largest tolerated mismatch of the two interferometer delays, seconds.
pub const DELAY_MATCH_TOLERANCE: f64 = 1e-12;

fn check_probability(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::config(key, format!("{value} is not a probability in [0, 1]")))
    }
}

fn check_non_negative(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("{value} must be finite and non-negative")))
    }
}

fn check_finite(key: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("{value} must be finite")))
    }
}

impl SourceParams {
    fn validate(&self) -> Result<()> {
        check_non_negative("source.pair_rate", self.pair_rate)?;
        check_probability("source.split_efficiency", self.split_efficiency)?;
        check_probability("source.arm1_transmission", self.arm1_transmission)?;
        check_probability("source.arm2_transmission", self.arm2_transmission)
    }
}

impl InterferometerParams {
    fn validate(&self, prefix: &str) -> Result<()> {
        check_finite(&format!("{prefix}.phase"), self.phase)?;
        check_non_negative(&format!("{prefix}.phase_noise"), self.phase_noise)?;
        if !(self.path_delay.is_finite() && self.path_delay > 0.0) {
            return Err(Error::config(
                format!("{prefix}.path_delay"),
                format!("{} must be positive", self.path_delay),
            ));
        }
        Ok(())
    }
}

impl DetectorParams {
    fn validate(&self, prefix: &str) -> Result<()> {
        check_probability(&format!("{prefix}.efficiency"), self.efficiency)?;
        check_non_negative(&format!("{prefix}.dark_rate"), self.dark_rate)?;
        check_non_negative(&format!("{prefix}.jitter_fwhm"), self.jitter_fwhm)?;
        if self.dead_time != 0.0 {
            return Err(Error::config(
                format!("{prefix}.dead_time"),
                "detector dead time is not modeled; it must be 0",
            ));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// An ideal apparatus: every pair is split and detected, no dark counts
    /// and no jitter.
    pub fn lossless() -> Self {
        ExperimentConfig {
            source: SourceParams {
                pair_rate: 1e5,
                split_efficiency: 1.0,
                arm1_transmission: 1.0,
                arm2_transmission: 1.0,
                model: PairModel::Quantum,
            },
            detector_start: DetectorParams::ideal(),
            detector_stop: DetectorParams::ideal(),
            ..Self::default()
        }
    }

    /// Shorter of the two interferometer delays.
    pub fn path_delay(&self) -> f64 {
        self.analyzer1.path_delay.min(self.analyzer2.path_delay)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength1.is_finite() && self.wavelength1 > 0.0) {
            return Err(Error::config("wavelength1", "must be positive"));
        }
        self.source.validate()?;
        self.analyzer1.validate("analyzer1")?;
        self.analyzer2.validate("analyzer2")?;
        let mismatch = (self.analyzer1.path_delay - self.analyzer2.path_delay).abs();
        if mismatch > DELAY_MATCH_TOLERANCE {
            return Err(Error::config(
                "analyzer2.path_delay",
                format!("differs from analyzer1.path_delay by {mismatch:e} s; the interferometers must be matched"),
            ));
        }
        self.detector_start.validate("detector_start")?;
        self.detector_stop.validate("detector_stop")?;
        check_finite("tphc.center_offset", self.tphc.center_offset)?;
        let w = self.tphc.window_width;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::config("tphc.window_width", format!("{w} must be positive")));
        }
        if w >= self.path_delay() {
            return Err(Error::config(
                "tphc.window_width",
                format!(
                    "{w:e} s is not shorter than the path delay {:e} s; side peaks would be accepted",
                    self.path_delay()
                ),
            ));
        }
        Ok(())
    }

    /// Detection probability of photon 1 and photon 2 for a split pair.
    pub fn detection_probabilities(&self) -> (f64, f64) {
        (
            self.source.arm1_transmission * self.detector_start.efficiency,
            self.source.arm2_transmission * self.detector_stop.efficiency,
        )
    }

    /// Stable digest of the canonical dump, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(dump_config(self).as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::ConfigParse {
        path: None,
        message: e.to_string(),
    })?;
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        Error::config(key, e.into_inner().message().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigParse { message, .. } => Error::ConfigParse {
            path: Some(path.to_path_buf()),
            message,
        },
        other => other,
    })
}

/// Canonical text form with every value in SI units.
pub fn dump_config(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("config is always representable")
}

/// Parses an angle such as `0.25pi`, `45deg` or `0.785`.
pub fn parse_angle(text: &str) -> std::result::Result<f64, String> {
    parse_quantity(text, Dimension::Angle)
}

/// Parses a duration such as `2s`, `500ms` or `1e-3`.
pub fn parse_duration(text: &str) -> std::result::Result<f64, String> {
    parse_quantity(text, Dimension::Time)
}

// --- unit-aware number parsing ---

#[derive(Debug, Clone, Copy)]
enum Dimension {
    Time,
    Rate,
    Length,
    Fraction,
    Angle,
}

/// Unit conversion: an SI power of ten, or an exact multiplier.
#[derive(Debug, Clone, Copy)]
enum Scale {
    Pow10(i32),
    Factor(f64),
}

impl Dimension {
    fn scale(self, unit: &str) -> Option<Scale> {
        use Scale::{Factor, Pow10};
        let s = match (self, unit) {
            (_, "") => Pow10(0),
            (Dimension::Time, "s") => Pow10(0),
            (Dimension::Time, "ms") => Pow10(-3),
            (Dimension::Time, "us") | (Dimension::Time, "µs") => Pow10(-6),
            (Dimension::Time, "ns") => Pow10(-9),
            (Dimension::Time, "ps") => Pow10(-12),
            (Dimension::Time, "fs") => Pow10(-15),
            (Dimension::Rate, "Hz") | (Dimension::Rate, "/s") => Pow10(0),
            (Dimension::Rate, "kHz") => Pow10(3),
            (Dimension::Rate, "MHz") => Pow10(6),
            (Dimension::Rate, "GHz") => Pow10(9),
            (Dimension::Length, "m") => Pow10(0),
            (Dimension::Length, "cm") => Pow10(-2),
            (Dimension::Length, "mm") => Pow10(-3),
            (Dimension::Length, "um") | (Dimension::Length, "µm") => Pow10(-6),
            (Dimension::Length, "nm") => Pow10(-9),
            (Dimension::Fraction, "%") => Pow10(-2),
            (Dimension::Angle, "rad") => Pow10(0),
            (Dimension::Angle, "deg") => Factor(std::f64::consts::PI / 180.0),
            (Dimension::Angle, "pi") => Factor(std::f64::consts::PI),
            _ => return None,
        };
        Some(s)
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Time => "time (s, ms, us, ns, ps, fs)",
            Dimension::Rate => "rate (Hz, kHz, MHz, GHz)",
            Dimension::Length => "length (m, cm, mm, um, nm)",
            Dimension::Fraction => "fraction (plain or %)",
            Dimension::Angle => "angle (rad, deg, pi)",
        }
    }
}

/// Parses `"350ps"`, `"180 kHz"`, `"17%"`, `"0.25pi"` and bare numbers.
fn parse_quantity(text: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(k, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || c == '_')
                && !((c == 'e' || c == 'E') && is_exponent(text, k))
        })
        .map(|(k, _)| k)
        .unwrap_or(text.len());
    let (number, unit) = text.split_at(split);
    let number = number.replace('_', "");
    let unit = unit.trim();
    let scale = dim
        .scale(unit)
        .ok_or_else(|| format!("unknown unit `{unit}` for a {}", dim.name()))?;
    let bad = || format!("`{text}` is not a number with an optional unit");
    let value: f64 = number.parse().map_err(|_| bad())?;
    match scale {
        // shift the decimal exponent instead of multiplying, so "704nm"
        // is exactly 704e-9
        Scale::Pow10(0) => Ok(value),
        Scale::Pow10(k) => {
            let (mantissa, exp) = match number.find(['e', 'E']) {
                Some(at) => (&number[..at], number[at + 1..].parse::<i32>().map_err(|_| bad())?),
                None => (number.as_str(), 0),
            };
            format!("{mantissa}e{}", exp + k).parse().map_err(|_| bad())
        }
        Scale::Factor(f) => Ok(value * f),
    }
}

fn is_exponent(text: &str, k: usize) -> bool {
    let bytes = text.as_bytes();
    k > 0
        && bytes[k - 1].is_ascii_digit()
        && bytes
            .get(k + 1)
            .is_some_and(|&b| b.is_ascii_digit() || b == b'-' || b == b'+')
}

struct QuantityVisitor(Dimension);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a number or a string with a {} unit", self.0.name())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }
}

fn de_quantity<'de, D: Deserializer<'de>>(d: D, dim: Dimension) -> std::result::Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor(dim))
}

fn de_time<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_quantity(d, Dimension::Time)
}

fn de_rate<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_quantity(d, Dimension::Rate)
}

fn de_length<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_quantity(d, Dimension::Length)
}

fn de_fraction<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_quantity(d, Dimension::Fraction)
}

fn de_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    de_quantity(d, Dimension::Angle)
}
