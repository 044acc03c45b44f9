//! Domain value types shared across the crate.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
    "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce",
    "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc",
    "Lv", "Ts", "Og",
];

pub const MAX_MASS_NUMBER: u16 = 300;

/// Atomic number for a case-insensitive element symbol.
pub fn element_z(symbol: &str) -> Option<u8> {
    ELEMENTS.iter().position(|s| s.eq_ignore_ascii_case(symbol)).map(|i| (i + 1) as u8)
}

pub fn element_symbol(z: u8) -> Option<&'static str> {
    ELEMENTS.get((z as usize).checked_sub(1)?).copied()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("unknown element symbol `{0}`")]
    UnknownElement(String),
    #[error("malformed nuclide id `{0}`")]
    MalformedId(String),
    #[error("mass number {0} out of range 1..=300")]
    MassOutOfRange(u32),
}

/// Level of a nuclide: ground, metastable ordinal (1 = "m"), or an explicit energy.
#[derive(Debug, Clone, Copy, Default)]
pub enum LevelSpec {
    #[default]
    Ground,
    Metastable(u8),
    Energy(f64),
}

impl LevelSpec {
    fn rank(&self) -> (u8, u64) {
        match *self {
            LevelSpec::Ground => (0, 0),
            LevelSpec::Metastable(m) => (1, m as u64),
            LevelSpec::Energy(e) => (2, e.to_bits()),
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, LevelSpec::Ground)
    }
}

impl PartialEq for LevelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.rank() == other.rank()
    }
}
impl Eq for LevelSpec {}

impl Hash for LevelSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state)
    }
}

impl Ord for LevelSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LevelSpec::Energy(a), LevelSpec::Energy(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}
impl PartialOrd for LevelSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A nuclear species: element, mass number and level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nuclide {
    z: u8,
    mass: u16,
    level: LevelSpec,
}

impl Nuclide {
    pub fn new(z: u8, mass: u16, level: LevelSpec) -> Result<Self, IdError> {
        if element_symbol(z).is_none() {
            return Err(IdError::UnknownElement(format!("Z={z}")));
        }
        if mass == 0 || mass > MAX_MASS_NUMBER {
            return Err(IdError::MassOutOfRange(mass as u32));
        }
        match level {
            LevelSpec::Metastable(0) => return Err(IdError::MalformedId("m0".into())),
            LevelSpec::Energy(e) if !(e.is_finite() && e >= 0.0) => return Err(IdError::MalformedId(format!("@{e}"))),
            _ => {}
        }
        // 0 keV is the ground state; keep one representation for it.
        let level = match level {
            LevelSpec::Energy(0.0) => LevelSpec::Ground,
            l => l,
        };
        Ok(Nuclide { z, mass, level })
    }

    pub fn ground(z: u8, mass: u16) -> Result<Self, IdError> {
        Self::new(z, mass, LevelSpec::Ground)
    }

    pub fn from_symbol(symbol: &str, mass: u16) -> Result<Self, IdError> {
        let z = element_z(symbol).ok_or_else(|| IdError::UnknownElement(symbol.to_string()))?;
        Self::ground(z, mass)
    }

    pub fn z(&self) -> u8 {
        self.z
    }
    pub fn n(&self) -> u16 {
        self.mass - self.z as u16
    }
    pub fn mass_number(&self) -> u16 {
        self.mass
    }
    pub fn element(&self) -> &'static str {
        element_symbol(self.z).expect("validated at construction")
    }
    pub fn level(&self) -> LevelSpec {
        self.level
    }

    /// Same species with the level information dropped.
    pub fn erased(&self) -> Nuclide {
        Nuclide { level: LevelSpec::Ground, ..*self }
    }

    pub fn with_level(&self, level: LevelSpec) -> Nuclide {
        Nuclide::new(self.z, self.mass, level).expect("species already validated")
    }

    /// Lowercase `<A><el>` without level, as used in dataset keys.
    pub fn stem(&self) -> String {
        format!("{}{}", self.mass, self.element().to_ascii_lowercase())
    }

    /// Human-readable label such as `Pa-234m` or `Lu-177m4`.
    pub fn label(&self) -> String {
        match self.level {
            LevelSpec::Ground => format!("{}-{}", self.element(), self.mass),
            LevelSpec::Metastable(1) => format!("{}-{}m", self.element(), self.mass),
            LevelSpec::Metastable(m) => format!("{}-{}m{}", self.element(), self.mass, m),
            LevelSpec::Energy(e) => format!("{}-{}({} keV)", self.element(), self.mass, e),
        }
    }
}

impl fmt::Display for Nuclide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_nuclide_id(self))
    }
}

impl FromStr for Nuclide {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_nuclide_id(s)
    }
}

impl Serialize for Nuclide {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_nuclide_id(self))
    }
}

impl<'de> Deserialize<'de> for Nuclide {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_nuclide_id(&s).map_err(serde::de::Error::custom)
    }
}

/// Canonical id: `225ac`, `234pa@m`, `177lu@m4`, `99tc@142.6836`.
pub fn format_nuclide_id(n: &Nuclide) -> String {
    let stem = n.stem();
    match n.level {
        LevelSpec::Ground => stem,
        LevelSpec::Metastable(1) => format!("{stem}@m"),
        LevelSpec::Metastable(m) => format!("{stem}@m{m}"),
        LevelSpec::Energy(e) => format!("{stem}@{e}"),
    }
}

fn superscript_to_ascii(c: char) -> Option<char> {
    Some(match c {
        '⁰' => '0',
        '¹' => '1',
        '²' => '2',
        '³' => '3',
        '⁴' => '4',
        '⁵' => '5',
        '⁶' => '6',
        '⁷' => '7',
        '⁸' => '8',
        '⁹' => '9',
        'ᵐ' => 'm',
        _ => return None,
    })
}

fn parse_ordinal(s: &str, whole: &str) -> Result<u8, IdError> {
    if s.is_empty() {
        return Ok(1);
    }
    match s.parse::<u8>() {
        Ok(m) if m >= 1 => Ok(m),
        _ => Err(IdError::MalformedId(whole.to_string())),
    }
}

fn parse_suffix(s: &str, whole: &str) -> Result<LevelSpec, IdError> {
    let lower = s.to_ascii_lowercase();
    if lower == "g" || lower == "gs" {
        return Ok(LevelSpec::Ground);
    }
    if let Some(rest) = lower.strip_prefix('m') {
        return parse_ordinal(rest, whole).map(LevelSpec::Metastable);
    }
    let kev = lower
        .strip_suffix("kev")
        .unwrap_or(&lower)
        .parse::<f64>()
        .map_err(|_| IdError::MalformedId(whole.to_string()))?;
    if !kev.is_finite() || kev < 0.0 {
        return Err(IdError::MalformedId(whole.to_string()));
    }
    Ok(LevelSpec::Energy(kev))
}

fn parse_mass(digits: &str, whole: &str) -> Result<u16, IdError> {
    let a: u32 = digits.parse().map_err(|_| IdError::MalformedId(whole.to_string()))?;
    if a == 0 || a > MAX_MASS_NUMBER as u32 {
        return Err(IdError::MassOutOfRange(a));
    }
    Ok(a as u16)
}

/// Parses `U-238`, `238U`, `u238`, `Pa-234m`, `234mPa`, `Tc-99m`, `Ac-225@m2`, `177Lu@970.1757`.
pub fn parse_nuclide_id(text: &str) -> Result<Nuclide, IdError> {
    let whole = text.trim();
    if whole.is_empty() {
        return Err(IdError::MalformedId(text.to_string()));
    }
    let (main, suffix) = match whole.split_once('@') {
        Some((m, s)) => (m, Some(s.trim())),
        None => (whole, None),
    };
    let compact: String = main
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .map(|c| superscript_to_ascii(c).unwrap_or(c))
        .collect();
    if compact.is_empty() || !compact.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(IdError::MalformedId(whole.to_string()));
    }

    let (symbol, mass, inline): (String, u16, Option<u8>) = if compact.starts_with(|c: char| c.is_ascii_digit()) {
        // <A>[m[N]]<El>
        let split =
            compact.find(|c: char| !c.is_ascii_digit()).ok_or_else(|| IdError::MalformedId(whole.to_string()))?;
        let (digits, rest) = compact.split_at(split);
        let mass = parse_mass(digits, whole)?;
        if element_z(rest).is_some() {
            (rest.to_string(), mass, None)
        } else if let Some(after_m) = rest.strip_prefix(['m', 'M']) {
            let d =
                after_m.find(|c: char| !c.is_ascii_digit()).ok_or_else(|| IdError::MalformedId(whole.to_string()))?;
            let ord = parse_ordinal(&after_m[..d], whole)?;
            (after_m[d..].to_string(), mass, Some(ord))
        } else {
            (rest.to_string(), mass, None)
        }
    } else {
        // <El><A>[m[N]]
        let split =
            compact.find(|c: char| c.is_ascii_digit()).ok_or_else(|| IdError::MalformedId(whole.to_string()))?;
        let (sym, rest) = compact.split_at(split);
        let d = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let mass = parse_mass(&rest[..d], whole)?;
        let tail = &rest[d..];
        let inline = if tail.is_empty() {
            None
        } else if let Some(ord) = tail.strip_prefix(['m', 'M']) {
            Some(parse_ordinal(ord, whole)?)
        } else {
            return Err(IdError::MalformedId(whole.to_string()));
        };
        (sym.to_string(), mass, inline)
    };

    if symbol.is_empty() || !symbol.chars().all(|c| c.is_ascii_alphabetic()) || symbol.len() > 3 {
        return Err(IdError::MalformedId(whole.to_string()));
    }
    let z = element_z(&symbol).ok_or(IdError::UnknownElement(symbol))?;
    let level = match (inline, suffix) {
        (Some(_), Some(_)) => return Err(IdError::MalformedId(whole.to_string())),
        (Some(m), None) => LevelSpec::Metastable(m),
        (None, Some(s)) => parse_suffix(s, whole)?,
        (None, None) => LevelSpec::Ground,
    };
    Nuclide::new(z, mass, level)
}

/// The six decay-radiation kinds served by the data source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiationType {
    Alpha,
    BetaMinus,
    BetaPlusEc,
    Gamma,
    Electron,
    Xray,
}

impl RadiationType {
    /// Query order used when walking chains; alpha first keeps discovery order stable.
    pub const ALL: [RadiationType; 6] = [
        RadiationType::Alpha,
        RadiationType::BetaMinus,
        RadiationType::BetaPlusEc,
        RadiationType::Gamma,
        RadiationType::Electron,
        RadiationType::Xray,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            RadiationType::Alpha => "a",
            RadiationType::BetaMinus => "bm",
            RadiationType::BetaPlusEc => "bp",
            RadiationType::Gamma => "g",
            RadiationType::Electron => "e",
            RadiationType::Xray => "x",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadiationType::Alpha => "alpha",
            RadiationType::BetaMinus => "beta_minus",
            RadiationType::BetaPlusEc => "beta_plus_ec",
            RadiationType::Gamma => "gamma",
            RadiationType::Electron => "electron",
            RadiationType::Xray => "xray",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.code() == code)
    }

    /// Particle kinds define which level of the daughter a decay feeds.
    pub fn is_particle(&self) -> bool {
        matches!(self, RadiationType::Alpha | RadiationType::BetaMinus | RadiationType::BetaPlusEc)
    }
}

impl fmt::Display for RadiationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RadiationType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let l = s.trim().to_ascii_lowercase();
        RadiationType::ALL
            .into_iter()
            .find(|r| r.name() == l || r.code() == l)
            .ok_or_else(|| format!("unknown radiation type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    Alpha,
    BetaMinus,
    BetaPlusEc,
    It,
    Sf,
}

impl DecayMode {
    /// Maps data-source mode codes (`A`, `B-`, `EC`, `B+`, `EC+B+`, `IT`, `SF`).
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim().to_ascii_uppercase().as_str() {
            "A" | "ALPHA" => Some(DecayMode::Alpha),
            "B-" | "BM" | "BETA-" => Some(DecayMode::BetaMinus),
            "EC" | "B+" | "EC+B+" | "B+EC" | "ECB+" | "BP" => Some(DecayMode::BetaPlusEc),
            "IT" => Some(DecayMode::It),
            "SF" => Some(DecayMode::Sf),
            _ => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            DecayMode::Alpha => "A",
            DecayMode::BetaMinus => "B-",
            DecayMode::BetaPlusEc => "EC",
            DecayMode::It => "IT",
            DecayMode::Sf => "SF",
        }
    }
}

impl fmt::Display for DecayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

pub const SECONDS_PER_MINUTE: f64 = 60.0;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_YEAR: f64 = 365.2422;
pub const SECONDS_PER_YEAR: f64 = DAYS_PER_YEAR * SECONDS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    Picosecond,
    Nanosecond,
    Microsecond,
    Millisecond,
    Second,
    Minute,
    Hour,
    Day,
    Year,
}

impl TimeUnit {
    pub fn seconds(&self) -> f64 {
        match self {
            TimeUnit::Picosecond => 1e-12,
            TimeUnit::Nanosecond => 1e-9,
            TimeUnit::Microsecond => 1e-6,
            TimeUnit::Millisecond => 1e-3,
            TimeUnit::Second => 1.0,
            TimeUnit::Minute => SECONDS_PER_MINUTE,
            TimeUnit::Hour => SECONDS_PER_HOUR,
            TimeUnit::Day => SECONDS_PER_DAY,
            TimeUnit::Year => SECONDS_PER_YEAR,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "ps" => TimeUnit::Picosecond,
            "ns" => TimeUnit::Nanosecond,
            "us" | "µs" => TimeUnit::Microsecond,
            "ms" => TimeUnit::Millisecond,
            "s" => TimeUnit::Second,
            "m" | "min" => TimeUnit::Minute,
            "h" => TimeUnit::Hour,
            "d" => TimeUnit::Day,
            "y" | "a" => TimeUnit::Year,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfLife {
    Stable,
    Finite { seconds: f64, uncertainty_seconds: f64 },
}

impl HalfLife {
    pub fn seconds(seconds: f64, uncertainty_seconds: f64) -> Option<Self> {
        (seconds > 0.0 && seconds.is_finite() && uncertainty_seconds >= 0.0)
            .then_some(HalfLife::Finite { seconds, uncertainty_seconds })
    }

    pub fn from_unit(value: f64, uncertainty: f64, unit: TimeUnit) -> Option<Self> {
        Self::seconds(value * unit.seconds(), uncertainty * unit.seconds())
    }

    /// Value in `unit`; `None` for a stable nuclide.
    pub fn in_unit(&self, unit: TimeUnit) -> Option<f64> {
        match self {
            HalfLife::Stable => None,
            HalfLife::Finite { seconds, .. } => Some(seconds / unit.seconds()),
        }
    }

    /// Seconds, with stable mapped to infinity.
    pub fn as_seconds(&self) -> f64 {
        match self {
            HalfLife::Stable => f64::INFINITY,
            HalfLife::Finite { seconds, .. } => *seconds,
        }
    }
}

/// Tolerance rule for matching two energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub sigma_factor: f64,
    pub floor_kev: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { sigma_factor: 3.0, floor_kev: 1.0 }
    }
}

impl Tolerance {
    pub fn window(&self, a: &EnergyValue, b: &EnergyValue) -> f64 {
        let combined = (a.uncertainty_kev.powi(2) + b.uncertainty_kev.powi(2)).sqrt();
        (self.sigma_factor * combined).max(self.floor_kev)
    }

    pub fn matches(&self, a: &EnergyValue, b: &EnergyValue) -> bool {
        (a.kev - b.kev).abs() <= self.window(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyValue {
    pub kev: f64,
    pub uncertainty_kev: f64,
}

impl EnergyValue {
    pub fn new(kev: f64, uncertainty_kev: f64) -> Self {
        EnergyValue { kev, uncertainty_kev }
    }

    pub fn exact(kev: f64) -> Self {
        EnergyValue { kev, uncertainty_kev: 0.0 }
    }

    pub const GROUND: EnergyValue = EnergyValue { kev: 0.0, uncertainty_kev: 0.0 };

    pub fn is_valid(&self) -> bool {
        self.kev.is_finite() && self.kev >= 0.0 && self.uncertainty_kev >= 0.0
    }
}
