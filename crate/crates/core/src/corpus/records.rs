use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Measures that are counts (or amounts) and therefore never negative.
pub const NONNEGATIVE_MEASURES: &[&str] = &[
    "deaths",
    "death_rate",
    "percentage_share_deaths",
    "internally_displaced",
    "affected",
    "homeless",
    "injured",
    "economic_damage",
    "gdp_loss_share",
    "news_coverage_share",
    "count",
    "population",
];

/// Measures that add up across entities, so an aggregate row bounds the sum
/// of its members.
pub const ADDITIVE_MEASURES: &[&str] = &[
    "deaths",
    "internally_displaced",
    "affected",
    "homeless",
    "injured",
    "economic_damage",
    "count",
];

/// One (entity, year) row of the region table.
#[derive(Debug, Clone, PartialEq)]
pub struct DisasterRecord {
    pub entity: String,
    pub iso: Option<String>,
    pub aggregate: bool,
    pub year: i32,
    pub measures: BTreeMap<String, Option<f64>>,
    pub attributes: BTreeMap<String, Option<String>>,
}

/// One (disaster type, year) row of the type table.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRecord {
    pub disaster_type: DisasterType,
    pub year: i32,
    pub measures: BTreeMap<String, Option<f64>>,
}

/// One global temperature anomaly observation, in °C relative to the
/// source's own baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyRecord {
    pub year: i32,
    pub month: Option<u8>,
    pub anomaly: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DisasterType {
    Drought,
    Earthquake,
    ExtremeTemperature,
    ExtremeWeather,
    Flood,
    Landslide,
    VolcanicActivity,
    Wildfire,
    AllNaturalDisasters,
}

impl DisasterType {
    /// Individual types in display order, without the aggregate.
    pub const INDIVIDUAL: [DisasterType; 8] = [
        Self::Drought,
        Self::Earthquake,
        Self::ExtremeTemperature,
        Self::ExtremeWeather,
        Self::Flood,
        Self::Landslide,
        Self::VolcanicActivity,
        Self::Wildfire,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Drought => "Drought",
            Self::Earthquake => "Earthquake",
            Self::ExtremeTemperature => "Extreme temperature",
            Self::ExtremeWeather => "Extreme weather",
            Self::Flood => "Flood",
            Self::Landslide => "Landslide",
            Self::VolcanicActivity => "Volcanic activity",
            Self::Wildfire => "Wildfire",
            Self::AllNaturalDisasters => "All natural disasters",
        }
    }

    pub fn is_aggregate(self) -> bool {
        self == Self::AllNaturalDisasters
    }
}

impl fmt::Display for DisasterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for DisasterType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = s
            .trim()
            .to_lowercase()
            .replace(['-', '_'], " ")
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let t = match folded.as_str() {
            "drought" | "droughts" => Self::Drought,
            "earthquake" | "earthquakes" => Self::Earthquake,
            "extreme temperature" | "extreme temperatures" => Self::ExtremeTemperature,
            "extreme weather" | "storm" | "storms" => Self::ExtremeWeather,
            "flood" | "floods" => Self::Flood,
            "landslide" | "landslides" => Self::Landslide,
            "volcanic activity" | "volcano" | "volcanic" => Self::VolcanicActivity,
            "wildfire" | "wildfires" => Self::Wildfire,
            "all natural disasters" | "all disasters" | "all" => Self::AllNaturalDisasters,
            _ => return Err(format!("unknown disaster type `{s}`")),
        };
        Ok(t)
    }
}
