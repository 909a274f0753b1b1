//! TOML run configuration.
//!
//! ```toml
//! [presolenoid]
//! edges = ["a", "b"]
//!
//! [substitution]
//! a = "aab"
//! b = "ab"
//!
//! [options]
//! zeta_max_n = 8
//! ```

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use solenoidk::{Orientation, SubstitutionSystem, SystemError};
use solenoidk_abelian::IntMatrix;
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown edge {edge} at line {line}, column {column}")]
    UnknownEdge {
        edge: String,
        line: usize,
        column: usize,
    },
    #[error("invalid system: {0}")]
    System(SystemError),
    #[error("invalid option: {0}")]
    Option(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

/// Tunables for every pipeline stage. All have defaults.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub zeta_max_n: usize,
    pub cover_level: usize,
    pub n_max: usize,
    pub grid_density: u64,
    pub k_max: usize,
    pub seed: u64,
    /// Interior points for the shift-equivalence identities.
    pub samples: usize,
    /// Sampled pairs and balls per Wieler parameter triple.
    pub wieler_samples: usize,
    /// Entropy enclosure width is `10^-entropy_digits`.
    pub entropy_digits: u32,
    pub a0: Option<Vec<Vec<i64>>>,
    pub a1: Option<Vec<Vec<i64>>>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            zeta_max_n: 8,
            cover_level: 3,
            n_max: 20,
            grid_density: 64,
            k_max: 3,
            seed: 0,
            samples: 1000,
            wieler_samples: 256,
            entropy_digits: 9,
            a0: None,
            a1: None,
        }
    }
}

impl Options {
    fn check(&self) -> Result<(), ConfigError> {
        let positive = [
            ("zeta_max_n", self.zeta_max_n as u64),
            ("cover_level", self.cover_level as u64),
            ("k_max", self.k_max as u64),
            ("samples", self.samples as u64),
            ("wieler_samples", self.wieler_samples as u64),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError::Option(format!("{name} must be at least 1")));
        }
        if self.grid_density < 2 {
            return Err(ConfigError::Option(
                "grid_density must be at least 2".into(),
            ));
        }
        if self.entropy_digits > 300 {
            return Err(ConfigError::Option(
                "entropy_digits must be at most 300".into(),
            ));
        }
        if self.a0.is_some() != self.a1.is_some() {
            return Err(ConfigError::Option(
                "a0 and a1 must be given together".into(),
            ));
        }
        for (name, m) in [("a0", &self.a0), ("a1", &self.a1)] {
            if let Some(rows) = m {
                matrix_from_rows(rows).map_err(|e| ConfigError::Option(format!("{name}: {e}")))?;
            }
        }
        Ok(())
    }

    /// User wrong-way matrices, when both are present.
    pub fn user_matrices(&self) -> Option<(IntMatrix, IntMatrix)> {
        match (&self.a0, &self.a1) {
            (Some(a0), Some(a1)) => Some((matrix_from_rows(a0).ok()?, matrix_from_rows(a1).ok()?)),
            _ => None,
        }
    }
}

fn matrix_from_rows(rows: &[Vec<i64>]) -> Result<IntMatrix, String> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err("matrix must be nonempty".into());
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err("rows have different lengths".into());
    }
    Ok(IntMatrix::from_rows(rows, cols))
}

/// Parses `"2,1;1,1"` (rows separated by `;`) into integer rows.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<i64>>, String> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    matrix_from_rows(&rows)?;
    Ok(rows)
}

pub fn parse_matrix(text: &str) -> Result<IntMatrix, String> {
    matrix_from_rows(&parse_rows(text)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub json: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub format: ReportFormat,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresolenoid {
    edges: Vec<Spanned<String>>,
    #[serde(default)]
    orientation: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    presolenoid: RawPresolenoid,
    substitution: Spanned<BTreeMap<Spanned<String>, Spanned<String>>>,
    #[serde(default)]
    options: Options,
    #[serde(default)]
    output: Output,
}

/// A parsed and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub edges: Vec<String>,
    /// `(edge, word)` in edge declaration order.
    pub rules: Vec<(String, String)>,
    pub orientation: Orientation,
    pub options: Options,
    pub output: Output,
    pub system: SubstitutionSystem,
}

impl RunConfig {
    /// Word for `edge` as written in the config.
    pub fn word(&self, edge: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|(e, _)| e == edge)
            .map(|(_, w)| w.as_str())
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
    let (line, column) = span.map_or((1, 1), |s| line_col(text, s.start));
    ConfigError::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| parse_error(text, e.span(), e.message()))?;

    let edges: Vec<String> = raw
        .presolenoid
        .edges
        .iter()
        .map(|e| e.get_ref().clone())
        .collect();
    if edges.is_empty() {
        return Err(parse_error(text, None, "presolenoid.edges is empty"));
    }
    let orientation = match raw.presolenoid.orientation {
        None => Orientation::Preserving,
        Some(o) => match o.get_ref().as_str() {
            "preserving" => Orientation::Preserving,
            "reversing" => Orientation::Reversing,
            other => {
                return Err(parse_error(
                    text,
                    Some(o.span()),
                    format!("orientation must be \"preserving\" or \"reversing\", not {other:?}"),
                ))
            }
        },
    };

    let table = raw.substitution.get_ref();
    if table.is_empty() {
        return Err(parse_error(
            text,
            Some(raw.substitution.span()),
            "substitution table is empty",
        ));
    }
    for (key, word) in table {
        let single = || {
            SubstitutionSystem::from_rules(
                &edges.iter().map(String::as_str).collect::<Vec<_>>(),
                &[(key.get_ref().as_str(), word.get_ref().as_str())],
            )
        };
        // only the offending rule is checked here, so MissingImage is expected
        match single() {
            Err(SystemError::UnknownEdge(edge)) => {
                let span = if edges.contains(key.get_ref()) {
                    word.span()
                } else {
                    key.span()
                };
                let (line, column) = line_col(text, span.start);
                return Err(ConfigError::UnknownEdge { edge, line, column });
            }
            Err(SystemError::MissingImage(_)) | Ok(_) => {}
            Err(e) => return Err(ConfigError::System(e)),
        }
    }

    let rules: Vec<(String, String)> = edges
        .iter()
        .filter_map(|e| {
            table
                .iter()
                .find(|(k, _)| k.get_ref() == e)
                .map(|(_, w)| (e.clone(), w.get_ref().clone()))
        })
        .collect();
    let edge_refs: Vec<&str> = edges.iter().map(String::as_str).collect();
    let rule_refs: Vec<(&str, &str)> = rules
        .iter()
        .map(|(e, w)| (e.as_str(), w.as_str()))
        .collect();
    let system = SubstitutionSystem::from_rules(&edge_refs, &rule_refs)
        .map_err(ConfigError::System)?
        .with_orientation(orientation);
    raw.options.check()?;

    Ok(RunConfig {
        edges,
        rules,
        orientation,
        options: raw.options,
        output: raw.output,
        system,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const AAB: &str =
        "[presolenoid]\nedges = [\"a\", \"b\"]\n\n[substitution]\na = \"aab\"\nb = \"ab\"\n";

    #[test]
    fn reads_aab_ab() {
        let c = parse_config_str(AAB).unwrap();
        assert_eq!(c.edges, ["a", "b"]);
        assert_eq!(c.word("a"), Some("aab"));
        assert_eq!(c.word("b"), Some("ab"));
        assert_eq!(c.options, Options::default());
    }

    #[test]
    fn undeclared_letter_is_unknown_edge() {
        let text = AAB.replace("\"ab\"", "\"ac\"");
        match parse_config_str(&text) {
            Err(ConfigError::UnknownEdge { edge, line, .. }) => {
                assert_eq!(edge, "c");
                assert_eq!(line, 6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_key_is_unknown_edge() {
        let text = format!("{AAB}c = \"a\"\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::UnknownEdge { edge, line: 7, column: 1 }) if edge == "c"
        ));
    }

    #[test]
    fn empty_substitution_is_parse_error() {
        let text = "[presolenoid]\nedges = [\"a\"]\n\n[substitution]\n";
        assert!(matches!(
            parse_config_str(text),
            Err(ConfigError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "[presolenoid]\nedges = [\"a\"\n";
        match parse_config_str(text) {
            Err(ConfigError::Parse { line, .. }) => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_image_is_rejected() {
        let text = AAB.replace("b = \"ab\"\n", "");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::System(SystemError::MissingImage(e))) if e == "b"
        ));
    }

    #[test]
    fn user_matrices_need_each_other() {
        let text = format!("{AAB}\n[options]\na0 = [[2, 1], [1, 1]]\n");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Option(_))
        ));
        let text = format!("{AAB}\n[options]\na0 = [[2, 1], [1, 1]]\na1 = [[1]]\n");
        let c = parse_config_str(&text).unwrap();
        let (a0, a1) = c.options.user_matrices().unwrap();
        assert_eq!(a0, IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert_eq!(a1, IntMatrix::identity(1));
    }

    #[test]
    fn matrix_flag_syntax() {
        assert_eq!(
            parse_matrix("2,1; 1,1").unwrap(),
            IntMatrix::from_i64(&[&[2, 1], &[1, 1]])
        );
        assert!(parse_matrix("1,2;3").is_err());
        assert!(parse_matrix("x").is_err());
    }
}
