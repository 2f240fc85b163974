//! Versioned JSON report envelope shared by every command.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Config;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything in here is a function of the config and the input, so equal
/// runs serialize to identical bytes. Timing is reported out of band.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Config,
    pub input: Value,
    pub sections: Map<String, Value>,
}

impl Report {
    pub fn new(command: impl Into<String>, config: &Config, input: Value) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "schwartz",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config: config.clone(),
            input,
            sections: Map::new(),
        }
    }

    pub fn section(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report sections serialize");
        self.sections.insert(name.into(), v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
