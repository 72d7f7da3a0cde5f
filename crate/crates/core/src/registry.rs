//! Built-in chart-type registry and topic vocabulary.
//!
//! Both lists are defaults; configs may select a subset of chart types or
//! register extra ones against an existing layout family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Payload layout shared by several chart types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartFamily {
    /// Named series over shared categories: `data[].values` aligned with `x_axis.categories`.
    Series,
    /// One value per label.
    Proportion,
    /// `x`/`y` points, optionally sized.
    Point,
    /// Binned counts.
    Histogram,
    /// Five-number summaries.
    BoxPlot,
    /// Open/high/low/close per period.
    Candlestick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartTypeDef {
    pub name: String,
    pub family: ChartFamily,
    /// Number of series drawn (series family only).
    #[serde(default = "default_series")]
    pub series: (usize, usize),
    /// Whether points carry a `size` value (point family only).
    #[serde(default)]
    pub sized: bool,
}

fn default_series() -> (usize, usize) {
    (1, 2)
}

impl ChartTypeDef {
    fn new(name: &str, family: ChartFamily, series: (usize, usize)) -> Self {
        ChartTypeDef {
            name: name.to_string(),
            family,
            series,
            sized: false,
        }
    }

    /// Human-readable name, e.g. `stacked_bar` -> `stacked bar`.
    pub fn display_name(&self) -> String {
        match self.name.as_str() {
            "bar_3d" => "3D bar".to_string(),
            "multi_axis_line" => "multi-axis line".to_string(),
            other => other.replace('_', " "),
        }
    }
}

/// The default 20 chart types.
pub fn default_chart_types() -> Vec<ChartTypeDef> {
    use ChartFamily::*;
    let mut types = vec![
        ChartTypeDef::new("bar", Series, (1, 1)),
        ChartTypeDef::new("line", Series, (1, 2)),
        ChartTypeDef::new("pie", Proportion, (1, 1)),
        ChartTypeDef::new("scatter", Point, (1, 1)),
        ChartTypeDef::new("area", Series, (1, 2)),
        ChartTypeDef::new("histogram", Histogram, (1, 1)),
        ChartTypeDef::new("box", BoxPlot, (1, 1)),
        ChartTypeDef::new("bubble", Point, (1, 1)),
        ChartTypeDef::new("radar", Series, (2, 3)),
        ChartTypeDef::new("heatmap", Series, (3, 4)),
        ChartTypeDef::new("rose", Proportion, (1, 1)),
        ChartTypeDef::new("treemap", Proportion, (1, 1)),
        ChartTypeDef::new("funnel", Proportion, (1, 1)),
        ChartTypeDef::new("ring", Proportion, (1, 1)),
        ChartTypeDef::new("candlestick", Candlestick, (1, 1)),
        ChartTypeDef::new("stacked_bar", Series, (2, 3)),
        ChartTypeDef::new("grouped_bar", Series, (2, 3)),
        ChartTypeDef::new("multi_axis_line", Series, (2, 2)),
        ChartTypeDef::new("bar_3d", Series, (1, 2)),
        ChartTypeDef::new("step_line", Series, (1, 2)),
    ];
    for t in &mut types {
        if t.name == "bubble" {
            t.sized = true;
        }
    }
    types
}

/// Basic chart types for the basic/advanced accuracy split.
pub const BASIC_CHART_TYPES: [&str; 3] = ["bar", "line", "pie"];

#[derive(Debug, Clone, Default)]
pub struct ChartRegistry {
    types: Vec<ChartTypeDef>,
}

impl ChartRegistry {
    pub fn with_defaults() -> Self {
        ChartRegistry {
            types: default_chart_types(),
        }
    }

    /// Adds or replaces a definition; names must be non-empty.
    pub fn register(&mut self, def: ChartTypeDef) -> Result<()> {
        if def.name.trim().is_empty() {
            return Err(Error::Config("chart type name is empty".into()));
        }
        if let Some(existing) = self.types.iter_mut().find(|t| t.name == def.name) {
            *existing = def;
        } else {
            self.types.push(def);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&ChartTypeDef> {
        self.types
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownChartType(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(|t| t.name.as_str())
    }
}

/// Vocabulary the offline data expert draws from for one topic.
#[derive(Debug, Clone, Copy)]
pub struct TopicVocab {
    pub name: &'static str,
    pub measure: &'static str,
    pub unit: &'static str,
    pub dimension: &'static str,
    pub categories: &'static [&'static str],
    pub series: &'static [&'static str],
    pub range: (f64, f64),
}

const YEARS: &[&str] = &[
    "2016", "2017", "2018", "2019", "2020", "2021", "2022", "2023",
];
const QUARTERS: &[&str] = &[
    "Q1 2022", "Q2 2022", "Q3 2022", "Q4 2022", "Q1 2023", "Q2 2023", "Q3 2023", "Q4 2023",
];
const MONTHS: &[&str] = &["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug"];
const REGIONS: &[&str] = &[
    "North America",
    "Europe",
    "Asia Pacific",
    "Latin America",
    "Middle East",
    "Africa",
    "Oceania",
    "Central Asia",
];

macro_rules! topic {
    ($name:expr, $measure:expr, $unit:expr, $dim:expr, $cats:expr, $series:expr, $lo:expr, $hi:expr) => {
        TopicVocab {
            name: $name,
            measure: $measure,
            unit: $unit,
            dimension: $dim,
            categories: $cats,
            series: $series,
            range: ($lo, $hi),
        }
    };
}

/// The default 25-topic set.
pub const DEFAULT_TOPICS: &[TopicVocab] = &[
    topic!(
        "market share",
        "Market Share",
        "%",
        "Company",
        &["Apex", "Borealis", "Cobalt", "Dynamo", "Everest", "Fjord", "Granite", "Helix"],
        &["Smartphones", "Tablets", "Laptops", "Wearables"],
        2.0,
        40.0
    ),
    topic!(
        "energy production",
        "Energy Output",
        "TWh",
        "Year",
        YEARS,
        &["Solar", "Wind", "Hydro", "Nuclear"],
        10.0,
        400.0
    ),
    topic!(
        "healthcare trends",
        "Patient Visits",
        "thousand",
        "Year",
        YEARS,
        &["Outpatient", "Emergency", "Telehealth", "Inpatient"],
        20.0,
        900.0
    ),
    topic!(
        "education statistics",
        "Enrollment",
        "thousand",
        "Year",
        YEARS,
        &["Primary", "Secondary", "Tertiary", "Vocational"],
        50.0,
        800.0
    ),
    topic!(
        "retail sales",
        "Sales",
        "million USD",
        "Month",
        MONTHS,
        &["Online", "In-store", "Wholesale", "Catalog"],
        5.0,
        250.0
    ),
    topic!(
        "climate data",
        "Average Temperature",
        "°C",
        "Month",
        MONTHS,
        &["Oslo", "Madrid", "Cairo", "Lima"],
        -5.0,
        35.0
    ),
    topic!(
        "transportation",
        "Passenger Trips",
        "million",
        "Year",
        YEARS,
        &["Rail", "Bus", "Air", "Ferry"],
        10.0,
        600.0
    ),
    topic!(
        "agriculture yields",
        "Crop Yield",
        "t/ha",
        "Region",
        REGIONS,
        &["Wheat", "Rice", "Maize", "Soybean"],
        1.0,
        12.0
    ),
    topic!(
        "tourism",
        "Visitor Arrivals",
        "million",
        "Region",
        REGIONS,
        &["Leisure", "Business", "Education", "Medical"],
        1.0,
        90.0
    ),
    topic!(
        "employment rates",
        "Employment Rate",
        "%",
        "Year",
        YEARS,
        &["Manufacturing", "Services", "Construction", "Agriculture"],
        40.0,
        95.0
    ),
    topic!(
        "technology adoption",
        "Adoption Rate",
        "%",
        "Year",
        YEARS,
        &["Cloud", "AI Tools", "5G", "IoT"],
        5.0,
        90.0
    ),
    topic!(
        "sports performance",
        "Points Scored",
        "points",
        "Team",
        &["Falcons", "Tigers", "Wolves", "Sharks", "Eagles", "Bears", "Comets", "Rangers"],
        &["Home", "Away", "Playoffs", "Preseason"],
        20.0,
        130.0
    ),
    topic!(
        "real estate prices",
        "Median Price",
        "thousand USD",
        "City",
        &["Austin", "Denver", "Boston", "Seattle", "Miami", "Phoenix", "Chicago", "Portland"],
        &["Condo", "Townhouse", "Detached", "Studio"],
        150.0,
        950.0
    ),
    topic!(
        "public finance",
        "Expenditure",
        "billion USD",
        "Year",
        YEARS,
        &["Defense", "Health", "Education", "Infrastructure"],
        20.0,
        700.0
    ),
    topic!(
        "manufacturing output",
        "Units Produced",
        "thousand",
        "Quarter",
        QUARTERS,
        &["Plant A", "Plant B", "Plant C", "Plant D"],
        10.0,
        500.0
    ),
    topic!(
        "internet usage",
        "Daily Usage",
        "minutes",
        "Age Group",
        &["13-17", "18-24", "25-34", "35-44", "45-54", "55-64", "65-74", "75+"],
        &["Social Media", "Streaming", "Gaming", "News"],
        10.0,
        300.0
    ),
    topic!(
        "air quality",
        "PM2.5 Level",
        "µg/m³",
        "Month",
        MONTHS,
        &["Delhi", "Beijing", "Paris", "Denver"],
        5.0,
        180.0
    ),
    topic!(
        "population growth",
        "Population",
        "million",
        "Year",
        YEARS,
        &["Urban", "Suburban", "Rural", "Coastal"],
        5.0,
        320.0
    ),
    topic!(
        "consumer spending",
        "Spending",
        "USD",
        "Category",
        &[
            "Housing",
            "Food",
            "Transport",
            "Health",
            "Leisure",
            "Apparel",
            "Utilities",
            "Savings"
        ],
        &["Low Income", "Middle Income", "High Income", "Students"],
        50.0,
        2500.0
    ),
    topic!(
        "stock performance",
        "Share Price",
        "USD",
        "Quarter",
        QUARTERS,
        &["Alpha Corp", "Beta Inc", "Gamma Ltd", "Delta Co"],
        15.0,
        320.0
    ),
    topic!(
        "water usage",
        "Water Consumption",
        "million m³",
        "Sector",
        &[
            "Irrigation",
            "Households",
            "Industry",
            "Energy",
            "Mining",
            "Livestock",
            "Commerce",
            "Public"
        ],
        &["Surface", "Groundwater", "Recycled", "Desalinated"],
        5.0,
        600.0
    ),
    topic!(
        "crime statistics",
        "Reported Incidents",
        "per 100k",
        "Year",
        YEARS,
        &["Burglary", "Fraud", "Vandalism", "Theft"],
        20.0,
        900.0
    ),
    topic!(
        "scientific publications",
        "Papers Published",
        "papers",
        "Field",
        &[
            "Physics",
            "Biology",
            "Chemistry",
            "Computing",
            "Medicine",
            "Geology",
            "Economics",
            "Astronomy"
        ],
        &["Journals", "Conferences", "Preprints", "Books"],
        100.0,
        9000.0
    ),
    topic!(
        "renewable investment",
        "Investment",
        "billion USD",
        "Year",
        YEARS,
        &["Solar", "Wind", "Storage", "Hydrogen"],
        2.0,
        180.0
    ),
    topic!(
        "food consumption",
        "Per Capita Consumption",
        "kg",
        "Food",
        &["Rice", "Wheat", "Potatoes", "Poultry", "Beef", "Fish", "Dairy", "Fruit"],
        &["Asia", "Europe", "Americas", "Africa"],
        5.0,
        160.0
    ),
];

pub fn default_topic_names() -> Vec<String> {
    DEFAULT_TOPICS.iter().map(|t| t.name.to_string()).collect()
}

/// Vocabulary for a topic name; unknown topics fall back to a generic set.
pub fn topic_vocab(name: &str) -> TopicVocab {
    DEFAULT_TOPICS
        .iter()
        .copied()
        .find(|t| t.name == name)
        .unwrap_or(TopicVocab {
            name: "general",
            measure: "Value",
            unit: "units",
            dimension: "Category",
            categories: &[
                "Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot", "Golf", "Hotel",
            ],
            series: &["Series A", "Series B", "Series C", "Series D"],
            range: (10.0, 100.0),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_unique_default_types() {
        let types = default_chart_types();
        assert_eq!(types.len(), 20);
        let mut names: Vec<_> = types.iter().map(|t| t.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 20);
    }

    #[test]
    fn twenty_five_topics_with_enough_vocabulary() {
        assert_eq!(DEFAULT_TOPICS.len(), 25);
        for t in DEFAULT_TOPICS {
            assert!(t.categories.len() >= 8, "{}", t.name);
            assert!(t.series.len() >= 4, "{}", t.name);
            assert!(t.range.0 < t.range.1);
        }
    }

    #[test]
    fn register_replaces_and_rejects_empty() {
        let mut reg = ChartRegistry::with_defaults();
        assert!(reg
            .register(ChartTypeDef::new("", ChartFamily::Series, (1, 1)))
            .is_err());
        reg.register(ChartTypeDef::new("waterfall", ChartFamily::Series, (1, 1)))
            .unwrap();
        assert_eq!(reg.get("waterfall").unwrap().family, ChartFamily::Series);
        assert!(matches!(reg.get("nope"), Err(Error::UnknownChartType(_))));
    }
}
