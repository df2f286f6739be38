//! Shared vocabulary: processes, capability levels, process attributes,
//! rating bands, participant roles and answer options.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Short stable identifier of a process, e.g. `"PRB"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessId(pub String);

impl ProcessId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ProcessId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// A process declared in a content bank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessRef {
    pub id: ProcessId,
    pub name: String,
}

/// Capability level CL0 (incomplete) through CL5 (optimising).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CapabilityLevel(u8);

impl CapabilityLevel {
    pub const CL0: Self = Self(0);
    pub const CL1: Self = Self(1);
    pub const CL2: Self = Self(2);
    pub const CL3: Self = Self(3);
    pub const CL4: Self = Self(4);
    pub const CL5: Self = Self(5);

    pub const ALL: [Self; 6] = [
        Self::CL0,
        Self::CL1,
        Self::CL2,
        Self::CL3,
        Self::CL4,
        Self::CL5,
    ];

    pub fn new(level: u8) -> Result<Self, InvalidLevel> {
        if level <= 5 {
            Ok(Self(level))
        } else {
            Err(InvalidLevel(level))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl Default for CapabilityLevel {
    fn default() -> Self {
        Self::CL5
    }
}

impl TryFrom<u8> for CapabilityLevel {
    type Error = InvalidLevel;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<CapabilityLevel> for u8 {
    fn from(l: CapabilityLevel) -> u8 {
        l.0
    }
}

impl fmt::Display for CapabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CL{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("capability level {0} is outside 0..=5")]
pub struct InvalidLevel(pub u8);

/// One of the nine process attributes PA1.1 .. PA5.2.
///
/// Declaration order is the canonical attribute order used everywhere
/// (PA1.1 first, then by level, then by index within the level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessAttribute {
    PA1_1,
    PA2_1,
    PA2_2,
    PA3_1,
    PA3_2,
    PA4_1,
    PA4_2,
    PA5_1,
    PA5_2,
}

impl ProcessAttribute {
    pub const ALL: [Self; 9] = [
        Self::PA1_1,
        Self::PA2_1,
        Self::PA2_2,
        Self::PA3_1,
        Self::PA3_2,
        Self::PA4_1,
        Self::PA4_2,
        Self::PA5_1,
        Self::PA5_2,
    ];

    pub fn level(self) -> CapabilityLevel {
        use ProcessAttribute::*;
        match self {
            PA1_1 => CapabilityLevel::CL1,
            PA2_1 | PA2_2 => CapabilityLevel::CL2,
            PA3_1 | PA3_2 => CapabilityLevel::CL3,
            PA4_1 | PA4_2 => CapabilityLevel::CL4,
            PA5_1 | PA5_2 => CapabilityLevel::CL5,
        }
    }

    pub fn id(self) -> &'static str {
        use ProcessAttribute::*;
        match self {
            PA1_1 => "PA1.1",
            PA2_1 => "PA2.1",
            PA2_2 => "PA2.2",
            PA3_1 => "PA3.1",
            PA3_2 => "PA3.2",
            PA4_1 => "PA4.1",
            PA4_2 => "PA4.2",
            PA5_1 => "PA5.1",
            PA5_2 => "PA5.2",
        }
    }

    /// Conventional attribute name, used in rendered reports.
    pub fn title(self) -> &'static str {
        use ProcessAttribute::*;
        match self {
            PA1_1 => "Process performance",
            PA2_1 => "Performance management",
            PA2_2 => "Work product management",
            PA3_1 => "Process definition",
            PA3_2 => "Process deployment",
            PA4_1 => "Process measurement",
            PA4_2 => "Process control",
            PA5_1 => "Process innovation",
            PA5_2 => "Process optimisation",
        }
    }

    /// Index in [`ProcessAttribute::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ProcessAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ProcessAttribute {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown process attribute `{0}` (expected PA1.1 .. PA5.2)")]
pub struct UnknownAttribute(pub String);

impl Serialize for ProcessAttribute {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for ProcessAttribute {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Attributes whose level is at or below `level`, in canonical order.
pub fn attributes_at_or_below(level: CapabilityLevel) -> Vec<ProcessAttribute> {
    ProcessAttribute::ALL
        .into_iter()
        .filter(|a| a.level() <= level)
        .collect()
}

/// NPLF achievement band. Ordered `N < P < L < F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RatingBand {
    N,
    P,
    L,
    F,
}

impl RatingBand {
    pub const ALL: [Self; 4] = [Self::N, Self::P, Self::L, Self::F];

    pub fn label(self) -> &'static str {
        match self {
            RatingBand::N => "Not achieved",
            RatingBand::P => "Partially achieved",
            RatingBand::L => "Largely achieved",
            RatingBand::F => "Fully achieved",
        }
    }

    /// Whether a question in this band signals risk.
    pub fn is_risk(self) -> bool {
        matches!(self, RatingBand::N | RatingBand::P)
    }
}

impl fmt::Display for RatingBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RatingBand::N => "N",
            RatingBand::P => "P",
            RatingBand::L => "L",
            RatingBand::F => "F",
        };
        f.write_str(s)
    }
}

pub fn compare_bands(a: RatingBand, b: RatingBand) -> std::cmp::Ordering {
    a.cmp(&b)
}

/// A band, or `Unassessed` when no scorable evidence exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rating {
    Rated(RatingBand),
    Unassessed,
}

impl Rating {
    pub fn band(self) -> Option<RatingBand> {
        match self {
            Rating::Rated(b) => Some(b),
            Rating::Unassessed => None,
        }
    }

    pub fn is(self, band: RatingBand) -> bool {
        self == Rating::Rated(band)
    }
}

impl From<Option<RatingBand>> for Rating {
    fn from(b: Option<RatingBand>) -> Self {
        b.map_or(Rating::Unassessed, Rating::Rated)
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rating::Rated(b) => b.fmt(f),
            Rating::Unassessed => f.write_str("Unassessed"),
        }
    }
}

impl Serialize for Rating {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rating {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(match s.as_str() {
            "N" => Rating::Rated(RatingBand::N),
            "P" => Rating::Rated(RatingBand::P),
            "L" => Rating::Rated(RatingBand::L),
            "F" => Rating::Rated(RatingBand::F),
            "Unassessed" => Rating::Unassessed,
            other => {
                return Err(serde::de::Error::custom(format!(
                    "unknown rating `{other}`"
                )))
            }
        })
    }
}

/// Process role of a participant for one process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    ProcessManager,
    ProcessPerformer,
    ExternalStakeholder,
}

impl Role {
    pub const ALL: [Self; 3] = [
        Self::ProcessManager,
        Self::ProcessPerformer,
        Self::ExternalStakeholder,
    ];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::ProcessManager => "ProcessManager",
            Role::ProcessPerformer => "ProcessPerformer",
            Role::ExternalStakeholder => "ExternalStakeholder",
        };
        f.write_str(s)
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| format!("unknown role `{s}`"))
    }
}

/// Answer to a close-ended question. `Unable` means the respondent could
/// not answer; it counts toward completion but never toward scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnswerOption {
    N,
    P,
    L,
    F,
    Unable,
}

impl AnswerOption {
    pub const ALL: [Self; 5] = [Self::N, Self::P, Self::L, Self::F, Self::Unable];

    pub fn band(self) -> Option<RatingBand> {
        match self {
            AnswerOption::N => Some(RatingBand::N),
            AnswerOption::P => Some(RatingBand::P),
            AnswerOption::L => Some(RatingBand::L),
            AnswerOption::F => Some(RatingBand::F),
            AnswerOption::Unable => None,
        }
    }
}

impl FromStr for AnswerOption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Self::N),
            "P" => Ok(Self::P),
            "L" => Ok(Self::L),
            "F" => Ok(Self::F),
            "Unable" => Ok(Self::Unable),
            other => Err(format!("unknown answer `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn attributes_below_levels() {
        assert_eq!(attributes_at_or_below(CapabilityLevel::CL0), vec![]);
        assert_eq!(
            attributes_at_or_below(CapabilityLevel::CL1),
            vec![ProcessAttribute::PA1_1]
        );
        assert_eq!(
            attributes_at_or_below(CapabilityLevel::CL5),
            ProcessAttribute::ALL.to_vec()
        );
        let ids: Vec<_> = attributes_at_or_below(CapabilityLevel::CL3)
            .into_iter()
            .map(|a| a.id())
            .collect();
        assert_eq!(ids, ["PA1.1", "PA2.1", "PA2.2", "PA3.1", "PA3.2"]);
    }

    #[test]
    fn attribute_shape_is_one_two_two_two_two() {
        let per_level: Vec<usize> = (1..=5)
            .map(|l| {
                ProcessAttribute::ALL
                    .iter()
                    .filter(|a| a.level().value() == l)
                    .count()
            })
            .collect();
        assert_eq!(per_level, [1, 2, 2, 2, 2]);
        assert!(ProcessAttribute::ALL.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn band_order() {
        assert_eq!(compare_bands(RatingBand::N, RatingBand::F), Ordering::Less);
        assert_eq!(compare_bands(RatingBand::L, RatingBand::L), Ordering::Equal);
        assert_eq!(compare_bands(RatingBand::F, RatingBand::P), Ordering::Greater);
        let mut v = vec![RatingBand::F, RatingBand::N, RatingBand::L, RatingBand::P];
        v.sort();
        assert_eq!(v, RatingBand::ALL);
    }

    #[test]
    fn level_bounds() {
        assert!(CapabilityLevel::new(5).is_ok());
        assert_eq!(CapabilityLevel::new(6), Err(InvalidLevel(6)));
        assert!(serde_json::from_str::<CapabilityLevel>("7").is_err());
        assert_eq!(
            serde_json::from_str::<CapabilityLevel>("3").unwrap(),
            CapabilityLevel::CL3
        );
    }

    #[test]
    fn serde_forms() {
        assert_eq!(
            serde_json::to_string(&ProcessAttribute::PA4_2).unwrap(),
            "\"PA4.2\""
        );
        assert_eq!(
            serde_json::from_str::<ProcessAttribute>("\"PA2.1\"").unwrap(),
            ProcessAttribute::PA2_1
        );
        assert!(serde_json::from_str::<ProcessAttribute>("\"PA6.1\"").is_err());
        assert_eq!(serde_json::to_string(&Rating::Unassessed).unwrap(), "\"Unassessed\"");
        let r: Rating = serde_json::from_str("\"L\"").unwrap();
        assert!(r.is(RatingBand::L));
    }
}
