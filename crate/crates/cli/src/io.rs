//! Output guards and small file helpers shared by the subcommands.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::CliError;

/// Refuses to clobber an existing file unless `--force` was given.
pub fn guard_output(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::new(
            "overwrite",
            format!("{} exists; pass --force to overwrite", path.display()),
        ));
    }
    Ok(())
}

/// Same guard for archive directories (keyed on the manifest file).
pub fn guard_archive_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    guard_output(&dir.join(latentlens::archive::MANIFEST_FILE), force)
}

pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file =
        File::open(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Reads a JSONL file into typed rows, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file =
        File::open(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| {
            CliError::new(
                "json",
                format!("{} line {}: {e}", path.display(), index + 1),
            )
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a comma/range layer list like `0-2,6` into sorted unique indices.
pub fn parse_layer_list(text: &str) -> Result<Vec<usize>, CliError> {
    let mut layers = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad layer range {part:?}")))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad layer range {part:?}")))?;
            if hi < lo {
                return Err(CliError::usage(format!("bad layer range {part:?}")));
            }
            layers.extend(lo..=hi);
        } else {
            layers.push(
                part.parse()
                    .map_err(|_| CliError::usage(format!("bad layer index {part:?}")))?,
            );
        }
    }
    layers.sort_unstable();
    layers.dedup();
    Ok(layers)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::usage(format!("bad {what} value {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_lists_parse_ranges_and_singles() {
        assert_eq!(parse_layer_list("0-2,6").unwrap(), vec![0, 1, 2, 6]);
        assert_eq!(parse_layer_list("3").unwrap(), vec![3]);
        assert_eq!(parse_layer_list("2,0-1,2").unwrap(), vec![0, 1, 2]);
        assert!(parse_layer_list("5-2").is_err());
        assert!(parse_layer_list("x").is_err());
    }
}
