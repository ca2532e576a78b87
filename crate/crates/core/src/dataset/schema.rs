//! Catalogue of flow features and the CSV header spellings that map to them.
//!
//! Exported flow CSVs are inconsistent about naming: the same feature shows
//! up as `Flow Bytes/s`, ` Flow Bytes/s`, or `Flow Byts/s` depending on the
//! extractor version. The schema pins a canonical snake_case name per
//! feature and resolves headers through an alias table, so the rest of the
//! crate only ever sees canonical names in a fixed order.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Built-in feature table; `assets/feature_schema.csv` documents the format.
const STANDARD_TABLE: &str = include_str!("../../assets/feature_schema.csv");

/// Header spellings accepted for the label column, lowercased.
pub(crate) const LABEL_HEADERS: [&str; 2] = ["label", "class"];

/// Coarse grouping of flow features by what they measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureFamily {
    /// Endpoint identity: addresses, ports, transport protocol.
    CoarseGrained,
    /// Durations and inter-arrival statistics.
    TimeBased,
    /// Whole-flow rates and subflow counters.
    FlowBased,
    /// Packet counts and packet-length statistics.
    PacketBased,
    /// Byte counters: bulk rates, window sizes, header lengths.
    ByteBased,
    /// TCP flag counters.
    FlagBased,
}

impl FeatureFamily {
    pub fn parse(s: &str) -> Option<FeatureFamily> {
        match s.trim().to_lowercase().as_str() {
            "coarse_grained" => Some(FeatureFamily::CoarseGrained),
            "time_based" => Some(FeatureFamily::TimeBased),
            "flow_based" => Some(FeatureFamily::FlowBased),
            "packet_based" => Some(FeatureFamily::PacketBased),
            "byte_based" => Some(FeatureFamily::ByteBased),
            "flag_based" => Some(FeatureFamily::FlagBased),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::CoarseGrained => "coarse_grained",
            FeatureFamily::TimeBased => "time_based",
            FeatureFamily::FlowBased => "flow_based",
            FeatureFamily::PacketBased => "packet_based",
            FeatureFamily::ByteBased => "byte_based",
            FeatureFamily::FlagBased => "flag_based",
        }
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One feature: canonical name plus the header spellings that resolve to it.
#[derive(Debug, Clone)]
pub struct FeatureDef {
    name: String,
    family: FeatureFamily,
    /// Lowercased alias spellings; the canonical name always matches too.
    aliases: Vec<String>,
}

impl FeatureDef {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> FeatureFamily {
        self.family
    }

    /// True when a CSV header cell refers to this feature. Matching trims
    /// whitespace and ignores case, which absorbs the stray leading spaces
    /// common in exported flow CSVs.
    pub fn matches_header(&self, header: &str) -> bool {
        let h = header.trim().to_lowercase();
        h == self.name || self.aliases.iter().any(|a| *a == h)
    }
}

/// Ordered feature catalogue used to resolve raw CSV columns.
#[derive(Debug, Clone)]
pub struct FeatureSchema {
    features: Vec<FeatureDef>,
}

impl FeatureSchema {
    /// The built-in 78-feature catalogue.
    pub fn standard() -> &'static FeatureSchema {
        static STANDARD: OnceLock<FeatureSchema> = OnceLock::new();
        STANDARD.get_or_init(|| {
            FeatureSchema::from_csv_str(STANDARD_TABLE)
                .expect("embedded feature table is well-formed")
        })
    }

    /// Loads a custom table, e.g. when an extractor needs different aliases.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<FeatureSchema> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(path.to_path_buf())
            } else {
                Error::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        FeatureSchema::from_csv_str(&text)
    }

    /// Builds a schema from a data file's own header row: every column
    /// except the label becomes one feature under its trimmed, lowercased
    /// spelling, with no aliases. Endpoint identity columns keep their
    /// usual family; everything else is grouped as flow-based.
    pub fn from_header(headers: &[String]) -> Result<FeatureSchema> {
        let mut features: Vec<FeatureDef> = Vec::new();
        for h in headers {
            let name = h.trim().to_lowercase();
            if name.is_empty() {
                return Err(Error::Schema("header has an empty column name".into()));
            }
            if LABEL_HEADERS.contains(&name.as_str()) {
                continue;
            }
            if features.iter().any(|f| f.name == name) {
                return Err(Error::Schema(format!("duplicate column '{name}' in header")));
            }
            let family = match name.as_str() {
                "source_ip" | "destination_ip" | "source_port" | "destination_port"
                | "protocol" => FeatureFamily::CoarseGrained,
                _ => FeatureFamily::FlowBased,
            };
            features.push(FeatureDef { name, family, aliases: Vec::new() });
        }
        if features.is_empty() {
            return Err(Error::Schema("header has no feature columns".into()));
        }
        Ok(FeatureSchema { features })
    }

    /// Parses a feature table from CSV text with `name,family,aliases`
    /// columns. Aliases are `|`-separated; `#` starts a comment line.
    pub fn from_csv_str(table: &str) -> Result<FeatureSchema> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(table.as_bytes());

        let mut features: Vec<FeatureDef> = Vec::new();
        for row in reader.records() {
            let row = row?;
            let name = row
                .get(0)
                .unwrap_or("")
                .trim()
                .to_lowercase();
            if name.is_empty() {
                return Err(Error::Schema("feature with empty name".into()));
            }
            if features.iter().any(|f| f.name == name) {
                return Err(Error::Schema(format!("duplicate feature name '{name}'")));
            }
            let family_cell = row.get(1).unwrap_or("");
            let family = FeatureFamily::parse(family_cell).ok_or_else(|| {
                Error::Schema(format!("feature '{name}': unknown family '{family_cell}'"))
            })?;
            let aliases = row
                .get(2)
                .unwrap_or("")
                .split('|')
                .map(|a| a.trim().to_lowercase())
                .filter(|a| !a.is_empty())
                .collect();
            features.push(FeatureDef {
                name,
                family,
                aliases,
            });
        }
        if features.is_empty() {
            return Err(Error::Schema("feature table has no rows".into()));
        }
        Ok(FeatureSchema { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Canonical names in schema order.
    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Number of features in the given family.
    pub fn family_count(&self, family: FeatureFamily) -> usize {
        self.features.iter().filter(|f| f.family == family).count()
    }
}
