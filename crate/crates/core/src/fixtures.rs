//! Models shipped with the crate.

use crate::error::{Error, Result};
use crate::io::parse_model;
use crate::model::Model;

/// The chain `a - b - c` with three levels for `b`.
pub const CHAIN: &str = include_str!("../fixtures/chain.json");
/// Cliques `abc, bcd, cde, ef` in that order, all binary.
pub const SIX: &str = include_str!("../fixtures/six.json");
/// Eleven binary variables; `{1,2,3,4}` is a cut.
pub const ELEVEN: &str = include_str!("../fixtures/eleven.json");
/// The chordless four-cycle.
pub const CYCLE4: &str = include_str!("../fixtures/cycle4.json");

pub const NAMES: [&str; 4] = ["chain", "six", "eleven", "cycle4"];

pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "chain" => Some(CHAIN),
        "six" => Some(SIX),
        "eleven" => Some(ELEVEN),
        "cycle4" => Some(CYCLE4),
        _ => None,
    }
}

pub fn load(name: &str) -> Result<Model> {
    let text = text(name).ok_or_else(|| Error::Format {
        path: name.to_string(),
        message: format!("no built-in fixture `{name}` (known: {})", NAMES.join(", ")),
    })?;
    parse_model(text, &format!("fixture {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposable_fixtures_load() {
        for name in ["chain", "six", "eleven"] {
            load(name).unwrap();
        }
        assert!(matches!(load("cycle4"), Err(Error::Format { .. })));
    }
}
