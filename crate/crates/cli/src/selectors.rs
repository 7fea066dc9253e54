//! Label selectors for picking record groups from an archive, e.g.
//! `expression=Scream`, `species=japanese`, `split=test`, `age>=4`, `age<4`.

use latentlens::types::LatentRecord;
use latentlens::LatentArchive;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Expression(String),
    Species(String),
    Sex(String),
    Split(String),
    Origin(String),
    AgeAtLeast(f64),
    AgeBelow(f64),
}

impl Selector {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if let Some(value) = text.strip_prefix("age>=") {
            let years: f64 = value
                .parse()
                .map_err(|_| CliError::usage(format!("bad age threshold {value:?}")))?;
            return Ok(Selector::AgeAtLeast(years));
        }
        if let Some(value) = text.strip_prefix("age<") {
            let years: f64 = value
                .parse()
                .map_err(|_| CliError::usage(format!("bad age threshold {value:?}")))?;
            return Ok(Selector::AgeBelow(years));
        }
        let (key, value) = text.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "selector {text:?} must be key=value or age>=N / age<N"
            ))
        })?;
        let value = value.to_string();
        Ok(match key {
            "expression" => Selector::Expression(value),
            "species" => Selector::Species(value),
            "sex" => Selector::Sex(value),
            "split" => Selector::Split(value),
            "origin" => Selector::Origin(value),
            other => {
                return Err(CliError::usage(format!(
                    "unknown selector key {other:?} (expression, species, sex, split, origin, age)"
                )))
            }
        })
    }

    pub fn matches(&self, record: &LatentRecord) -> bool {
        fn enum_tag<T: serde::Serialize>(v: &T) -> String {
            serde_json::to_value(v)
                .ok()
                .and_then(|j| j.as_str().map(str::to_string))
                .unwrap_or_default()
        }
        match self {
            Selector::Expression(want) => record.expression.as_deref() == Some(want),
            Selector::Species(want) => {
                record.species.as_ref().map(enum_tag).as_deref() == Some(want)
            }
            Selector::Sex(want) => record.sex.as_ref().map(enum_tag).as_deref() == Some(want),
            Selector::Split(want) => enum_tag(&record.split) == *want,
            Selector::Origin(want) => enum_tag(&record.origin) == *want,
            Selector::AgeAtLeast(years) => record.age.is_some_and(|a| a >= *years),
            Selector::AgeBelow(years) => record.age.is_some_and(|a| a < *years),
        }
    }
}

/// Codes of the records matching a selector; errors when nothing matches.
pub fn select_codes(
    archive: &LatentArchive,
    selector: &Selector,
    what: &str,
) -> Result<Vec<latentlens::StyleCode>, CliError> {
    let codes: Vec<_> = archive
        .records()
        .iter()
        .filter(|r| selector.matches(r))
        .map(|r| r.code.clone())
        .collect();
    if codes.is_empty() {
        return Err(CliError::new(
            "selector",
            format!("{what} selector matched no records"),
        ));
    }
    Ok(codes)
}
