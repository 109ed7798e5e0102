//! The market file format.
//!
//! ```json
//! {
//!   "workers": ["w1", "w2"],
//!   "firms": ["f1", "f2"],
//!   "contracts": [{"id": "a", "worker": "w1", "firm": "f1", "terms": ""}],
//!   "choices": {
//!     "w1": {"kind": "greedy", "quota": 1, "priority": ["a"], "acceptable": ["a"]},
//!     "f1": {"kind": "table", "ranking": [["a"], []]}
//!   }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::choice::ChoiceSpec;
use crate::error::{Error, Result};
use crate::model::Market;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractEntry {
    pub id: String,
    pub worker: String,
    pub firm: String,
    #[serde(default)]
    pub terms: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub workers: Vec<String>,
    pub firms: Vec<String>,
    pub contracts: Vec<ContractEntry>,
    #[serde(default)]
    pub choices: BTreeMap<String, ChoiceSpec>,
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    let location = format!("line {}, column {}", e.line(), e.column());
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let message = text.strip_suffix(&suffix).unwrap_or(&text).to_string();
    Error::Format { location, message }
}

pub fn parse_market(text: &str) -> Result<Market> {
    let file: MarketFile = serde_json::from_str(text).map_err(json_error)?;
    Market::from_file(file)
}

pub fn load_market(path: impl AsRef<Path>) -> Result<Market> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_market(&text).map_err(|e| match e {
        Error::Format { location, message } => Error::Format {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

/// Pretty JSON with a trailing newline. Byte-identical for equal markets.
pub fn market_to_string(market: &Market) -> String {
    let mut s = serde_json::to_string_pretty(&market.to_file()).expect("market files always serialize");
    s.push('\n');
    s
}

pub fn save_market(market: &Market, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, market_to_string(market))?;
    Ok(())
}
