use std::collections::HashMap;

use super::IngestError;

const BUNDLED: &str = include_str!("../../data/iso3166.csv");

#[derive(Debug, Clone)]
struct Entry {
    canonical: String,
    code: Option<String>,
}

/// Country names and aliases mapped to ISO 3166-1 alpha-3 codes.
///
/// Rows with an empty code are aggregates ("World", "All natural disasters",
/// continents, income groups).
#[derive(Debug, Clone)]
pub struct IsoCodeTable {
    by_key: HashMap<String, Entry>,
}

/// Result of resolving an entity name against an [`IsoCodeTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMatch {
    pub name: String,
    pub code: Option<String>,
    pub aggregate: bool,
}

fn key(name: &str) -> String {
    name.trim().to_lowercase()
}

fn valid_code(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

impl IsoCodeTable {
    /// The table shipped in `data/iso3166.csv`.
    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED).expect("bundled iso table is valid")
    }

    /// Parses `name,code,aliases` rows; aliases are `|`-separated.
    pub fn from_csv(text: &str) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut by_key = HashMap::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| IngestError::InvalidIsoTable {
                line,
                message: e.to_string(),
            })?;
            let canonical = rec.get(0).unwrap_or("").trim();
            if canonical.is_empty() {
                return Err(IngestError::InvalidIsoTable {
                    line,
                    message: "empty name".into(),
                });
            }
            let code = rec.get(1).map(str::trim).filter(|c| !c.is_empty());
            if let Some(c) = code {
                if !valid_code(c) {
                    return Err(IngestError::InvalidIsoTable {
                        line,
                        message: format!("`{c}` is not a 3-letter uppercase code"),
                    });
                }
            }
            let entry = Entry {
                canonical: canonical.to_string(),
                code: code.map(str::to_string),
            };
            let aliases = rec.get(2).unwrap_or("");
            let names = std::iter::once(canonical)
                .chain(aliases.split('|').map(str::trim).filter(|a| !a.is_empty()));
            for name in names {
                if let Some(prev) = by_key.insert(key(name), entry.clone()) {
                    if prev.canonical != entry.canonical {
                        return Err(IngestError::InvalidIsoTable {
                            line,
                            message: format!("`{name}` already maps to `{}`", prev.canonical),
                        });
                    }
                }
            }
        }
        Ok(Self { by_key })
    }

    pub fn lookup(&self, name: &str) -> Option<EntityMatch> {
        self.by_key.get(&key(name)).map(|e| EntityMatch {
            name: e.canonical.clone(),
            code: e.code.clone(),
            aggregate: e.code.is_none(),
        })
    }

    pub fn is_aggregate(&self, name: &str) -> bool {
        self.lookup(name).is_some_and(|m| m.aggregate)
    }
}

/// Resolves a raw entity name to its canonical form and ISO code.
///
/// Names missing from the table pass through trimmed, with no code and not
/// flagged as aggregate.
pub fn normalize_entity(name: &str, codes: &IsoCodeTable) -> EntityMatch {
    codes.lookup(name).unwrap_or_else(|| EntityMatch {
        name: name.trim().to_string(),
        code: None,
        aggregate: false,
    })
}
