//! Artifact files.
//!
//! JSON-lines files open with a header line `{"header": {...}}` naming the
//! producing stage and the manifest hash; single-object JSON files carry the
//! same header as a top-level `"header"` field; plain-text files carry it as
//! `#` comment lines. All writers go through [`write_if_changed`], so
//! re-running a stage with unchanged inputs leaves its outputs untouched.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Origin stamp carried by every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHeader {
    pub stage: String,
    pub manifest_sha256: String,
}

impl FileHeader {
    pub fn new(stage: &str, manifest_sha256: &str) -> Self {
        FileHeader {
            stage: stage.to_string(),
            manifest_sha256: manifest_sha256.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: FileHeader,
}

#[derive(Serialize, Deserialize)]
struct MatrixHeaderLine {
    header: FileHeader,
    dimension: usize,
}

#[derive(Serialize, Deserialize)]
struct MatrixEntry {
    i: u32,
    j: u32,
    score: f64,
}

/// Write `bytes` unless the file already holds exactly those bytes.
/// Returns whether the file changed on disk.
pub fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<bool> {
    if let Ok(existing) = fs::read(path) {
        if existing == bytes {
            return Ok(false);
        }
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, bytes)?;
    Ok(true)
}

/// Read a required input, mapping "not found" to a hint naming the stage
/// that produces the file.
pub fn read_input(path: &Path, producer: &'static str) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingInput {
            path: path.display().to_string(),
            stage: producer,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Write a JSON-lines artifact: header line, then one item per line.
pub fn write_jsonl<T: Serialize>(path: &Path, header: &FileHeader, items: &[T]) -> Result<bool> {
    let mut out = serde_json::to_string(&HeaderLine {
        header: header.clone(),
    })?;
    out.push('\n');
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    write_if_changed(path, out.as_bytes())
}

/// Read a JSON-lines artifact produced by `write_jsonl`.
pub fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    producer: &'static str,
) -> Result<(FileHeader, Vec<T>)> {
    let text = read_input(path, producer)?;
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::config("artifact", format!("{}: empty file", path.display())))?;
    let head: HeaderLine = serde_json::from_str(first)?;
    let mut items = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(line)?);
    }
    Ok((head.header, items))
}

/// Write a single JSON object with the header injected as a top-level
/// `"header"` field. The value itself must serialize to an object.
pub fn write_json<T: Serialize>(path: &Path, header: &FileHeader, value: &T) -> Result<bool> {
    let mut v = serde_json::to_value(value)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Error::config("artifact", "top-level JSON value must be an object"))?;
    obj.insert("header".to_string(), serde_json::to_value(header)?);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_if_changed(path, text.as_bytes())
}

/// Read a single JSON object; the extra `"header"` field is ignored by
/// the target type's deserializer.
pub fn read_json<T: DeserializeOwned>(path: &Path, producer: &'static str) -> Result<T> {
    let text = read_input(path, producer)?;
    Ok(serde_json::from_str(&text)?)
}

/// Write a similarity matrix: header line carrying the dimension, then one
/// `{"i", "j", "score"}` entry per line with scores at 9 decimals so reruns
/// are byte-identical.
pub fn write_matrix(path: &Path, header: &FileHeader, matrix: &SimilarityMatrix) -> Result<bool> {
    let head = MatrixHeaderLine {
        header: header.clone(),
        dimension: matrix.dimension,
    };
    let mut out = serde_json::to_string(&head)?;
    out.push('\n');
    for (i, j, score) in matrix.entries() {
        out.push_str(&format!("{{\"i\":{i},\"j\":{j},\"score\":{score:.9}}}\n"));
    }
    write_if_changed(path, out.as_bytes())
}

/// Read a similarity matrix written by `write_matrix`.
pub fn read_matrix(path: &Path, producer: &'static str) -> Result<(FileHeader, SimilarityMatrix)> {
    let text = read_input(path, producer)?;
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::config("artifact", format!("{}: empty file", path.display())))?;
    let head: MatrixHeaderLine = serde_json::from_str(first)?;
    let mut matrix = SimilarityMatrix::new(head.dimension);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let e: MatrixEntry = serde_json::from_str(line)?;
        if e.i == e.j
            || (e.i as usize) >= head.dimension
            || (e.j as usize) >= head.dimension
            || !(0.0..=1.0).contains(&e.score)
        {
            return Err(Error::config(
                "artifact",
                format!(
                    "{}: invalid entry ({}, {}, {})",
                    path.display(),
                    e.i,
                    e.j,
                    e.score
                ),
            ));
        }
        matrix.set(e.i, e.j, e.score);
    }
    Ok((head.header, matrix))
}

/// Write a plain-text artifact with the header as leading `#` comments.
pub fn write_text(path: &Path, header: &FileHeader, body: &str) -> Result<bool> {
    let text = format!(
        "# stage: {}\n# manifest_sha256: {}\n{body}",
        header.stage, header.manifest_sha256
    );
    write_if_changed(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    struct Row {
        name: String,
        value: u32,
    }

    fn header() -> FileHeader {
        FileHeader::new("test", "deadbeef")
    }

    #[test]
    fn jsonl_round_trips_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![
            Row {
                name: "a".into(),
                value: 1,
            },
            Row {
                name: "b".into(),
                value: 2,
            },
        ];
        assert!(write_jsonl(&path, &header(), &rows).unwrap());
        let (head, back): (FileHeader, Vec<Row>) = read_jsonl(&path, "test").unwrap();
        assert_eq!(head, header());
        assert_eq!(back, rows);
    }

    #[test]
    fn rewriting_identical_content_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![Row {
            name: "a".into(),
            value: 1,
        }];
        assert!(write_jsonl(&path, &header(), &rows).unwrap());
        let before = std::fs::metadata(&path).unwrap().modified().unwrap();
        assert!(!write_jsonl(&path, &header(), &rows).unwrap());
        let after = std::fs::metadata(&path).unwrap().modified().unwrap();
        assert_eq!(before, after);
        assert!(write_jsonl(&path, &header(), &[] as &[Row]).unwrap());
    }

    #[test]
    fn missing_input_names_the_producing_stage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("absent.jsonl");
        let err = read_jsonl::<Row>(&path, "generate").unwrap_err();
        match err {
            Error::MissingInput { stage, .. } => assert_eq!(stage, "generate"),
            other => panic!("expected MissingInput, got {other}"),
        }
    }

    #[test]
    fn json_object_carries_header_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("row.json");
        let row = Row {
            name: "a".into(),
            value: 5,
        };
        write_json(&path, &header(), &row).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"header\""));
        assert!(text.contains("deadbeef"));
        let back: Row = read_json(&path, "test").unwrap();
        assert_eq!(back, row);
    }

    #[test]
    fn matrix_round_trips_and_pins_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let mut m = SimilarityMatrix::new(4);
        m.set(0, 2, 1.0 / 3.0);
        m.set(1, 3, 0.5);
        write_matrix(&path, &header(), &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("0.333333333"), "{text}");
        assert!(text.contains("0.500000000"), "{text}");
        let (_, back) = read_matrix(&path, "featurize").unwrap();
        assert_eq!(back.dimension, 4);
        assert!((back.get(0, 2) - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(back.get(1, 3), 0.5);
    }

    #[test]
    fn corrupt_matrix_entries_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let head = serde_json::to_string(&MatrixHeaderLine {
            header: header(),
            dimension: 2,
        })
        .unwrap();
        std::fs::write(
            &path,
            format!("{head}\n{{\"i\":0,\"j\":0,\"score\":0.5}}\n"),
        )
        .unwrap();
        assert!(read_matrix(&path, "featurize").is_err());
        std::fs::write(
            &path,
            format!("{head}\n{{\"i\":0,\"j\":5,\"score\":0.5}}\n"),
        )
        .unwrap();
        assert!(read_matrix(&path, "featurize").is_err());
    }

    #[test]
    fn text_artifacts_open_with_comment_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("list.txt");
        write_text(&path, &header(), "alpha beast\n").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# stage: test\n# manifest_sha256: deadbeef\nalpha beast\n"));
    }
}
