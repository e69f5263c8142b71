//! Structured failures and exit codes.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use wiretap_core::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE_LIMIT: i32 = 3;

/// Printed as one JSON object on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Field path inside the document, e.g. `resource.matrix[2][1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    /// Byte offset of the last byte read before the error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl Failure {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
            file: None,
            path: None,
            line: None,
            column: None,
            offset: None,
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn in_file(mut self, file: &Path) -> Self {
        self.file = Some(file.display().to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("failure serialises")
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let mut f = Failure::new(e.kind(), e.to_string());
        if e.is_resource_limit() {
            f.exit_code = EXIT_RESOURCE_LIMIT;
        }
        f
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses `text` as `T`, reporting the field path and position of the first
/// error.
pub fn parse_json<T: DeserializeOwned>(text: &str, file: &Path) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: Result<T, _> = serde_path_to_error::deserialize(&mut de);
    let value = parsed.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let kind = match inner.classify() {
            serde_json::error::Category::Data => "invalid_input",
            _ => "parse",
        };
        let mut f = Failure::new(kind, inner.to_string()).in_file(file);
        f.path = (path != ".").then_some(path);
        if inner.line() > 0 {
            f.line = Some(inner.line());
            f.column = Some(inner.column());
            f.offset = Some(byte_offset(text, inner.line(), inner.column()));
        }
        f
    })?;
    de.end().map_err(|e| Failure::new("parse", e.to_string()).in_file(file))?;
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(file: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::new("io", e.to_string()).in_file(file))?;
    parse_json(&text, file)
}

pub fn write_file(file: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::new("io", e.to_string()).in_file(dir))?;
    }
    std::fs::write(file, contents).map_err(|e| Failure::new("io", e.to_string()).in_file(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_count_bytes_from_the_start() {
        let text = "{\n  \"a\": 1,\n  \"b\": x\n}";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(&text[byte_offset(text, 3, 8)..byte_offset(text, 3, 8) + 1], "x");
    }

    #[test]
    fn parse_errors_carry_path_and_position() {
        #[derive(Debug, serde::Deserialize)]
        struct Inner {
            #[allow(dead_code)]
            v: Vec<u32>,
        }
        #[derive(Debug, serde::Deserialize)]
        struct Outer {
            #[allow(dead_code)]
            inner: Inner,
        }
        let text = "{\"inner\": {\"v\": [1, \"two\"]}}";
        let f = parse_json::<Outer>(text, Path::new("x.json")).unwrap_err();
        assert_eq!(f.kind, "invalid_input");
        assert_eq!(f.path.as_deref(), Some("inner.v[1]"));
        assert_eq!(f.line, Some(1));
        let off = f.offset.unwrap();
        assert!(text[..=off].ends_with("\"two\""), "{off}");
        assert_eq!(f.exit_code, EXIT_VALIDATION);
    }

    #[test]
    fn resource_limits_map_to_their_own_exit_code() {
        let f: Failure = Error::ResourceLimit { what: "x".into(), requested: 10, cap: 1 }.into();
        assert_eq!(f.exit_code, EXIT_RESOURCE_LIMIT);
        assert_eq!(f.kind, "resource_limit");
    }
}
