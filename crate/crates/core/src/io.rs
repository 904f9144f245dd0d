//! Persistence helpers shared by every artifact type.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

/// Version stamped into every file this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("empty input")]
    Empty,
    #[error("schema mismatch: expected {expected} v{expected_version}, found {found} v{found_version}")]
    SchemaMismatch {
        expected: String,
        expected_version: u32,
        found: String,
        found_version: u32,
    },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn check_schema(expected: &str, found: &str, version: u32) -> Result<(), FormatError> {
    if found != expected || version != SCHEMA_VERSION {
        return Err(FormatError::SchemaMismatch {
            expected: expected.to_string(),
            expected_version: SCHEMA_VERSION,
            found: found.to_string(),
            found_version: version,
        });
    }
    Ok(())
}

/// Write `contents` to `path` through a temporary sibling and a rename, so a
/// crash never leaves a half-written file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Leading comment line that carries the schema of a CSV file.
pub fn csv_schema_line(schema: &str) -> String {
    format!("# schema={schema} version={SCHEMA_VERSION}\n")
}

/// Check and strip the schema comment of a CSV document.
pub fn strip_csv_schema<'a>(schema: &str, text: &'a str) -> Result<&'a str, FormatError> {
    let (first, rest) = text.split_once('\n').ok_or(FormatError::Empty)?;
    let meta = first
        .strip_prefix("# ")
        .ok_or_else(|| FormatError::Malformed("missing schema comment".into()))?;
    let mut found = "";
    let mut version = 0;
    for part in meta.split_whitespace() {
        if let Some(s) = part.strip_prefix("schema=") {
            found = s;
        } else if let Some(v) = part.strip_prefix("version=") {
            version = v.parse().map_err(|_| FormatError::Malformed(format!("bad version {v:?}")))?;
        }
    }
    check_schema(schema, found, version)?;
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn csv_schema_checked() {
        let doc = format!("{}a,b\n1,2\n", csv_schema_line("x"));
        assert_eq!(strip_csv_schema("x", &doc).unwrap(), "a,b\n1,2\n");
        assert!(matches!(strip_csv_schema("y", &doc), Err(FormatError::SchemaMismatch { .. })));
        assert!(strip_csv_schema("x", "a,b\n").is_err());
    }
}
