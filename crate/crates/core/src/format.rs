//! Line-oriented graph file format.
//!
//! ```text
//! # comment
//! graph <N> <D>
//! edge <i> <j>     # constraint edge, both directions
//! sense <j> <i>    # i senses j
//! ```

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graphs::{ConstraintGraph, GraphError, Palette, SensingGraph};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `graph <N> <D>` header")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A problem instance as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFile {
    pub graph: ConstraintGraph,
    pub sensing: SensingGraph,
    pub palette: Palette,
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut senses = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| FormatError::Parse { line, msg };
            let mut toks = body.split_whitespace();
            let kw = toks.next().unwrap_or_default();
            let nums = toks
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| err(format!("expected a non-negative integer, got `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() != 2 {
                return Err(err(format!("`{kw}` takes 2 arguments, got {}", nums.len())));
            }
            match kw {
                "graph" => {
                    if header.is_some() {
                        return Err(err("duplicate header".into()));
                    }
                    header = Some((nums[0], nums[1]));
                }
                "edge" | "sense" if header.is_none() => {
                    return Err(err(format!("`{kw}` before header")));
                }
                "edge" => edges.push((nums[0], nums[1], line)),
                "sense" => senses.push((nums[0], nums[1], line)),
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let (n, d) = header.ok_or(FormatError::MissingHeader)?;
        let palette = Palette::new(d)?;
        // Validate per line so errors carry the offending line number.
        for &(a, b, line) in edges.iter().chain(senses.iter()) {
            if a >= n || b >= n || a == b {
                return Err(FormatError::Parse {
                    line,
                    msg: format!("invalid edge ({a}, {b}) for {n} vertices"),
                });
            }
        }
        let graph = ConstraintGraph::from_edges(n, edges.iter().map(|&(i, j, _)| (i, j)))?;
        let sensing = SensingGraph::from_edges(n, senses.iter().map(|&(j, i, _)| (j, i)))?;
        sensing.validate_subset(&graph)?;
        Ok(Self {
            graph,
            sensing,
            palette,
        })
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graph {} {}",
            self.graph.n_vertices(),
            self.palette.n_colors()
        );
        for (i, j) in self.graph.edges() {
            let _ = writeln!(out, "edge {i} {j}");
        }
        for (j, i) in self.sensing.edges() {
            let _ = writeln!(out, "sense {j} {i}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.render()).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# hidden terminal pair plus a bystander
graph 3 2
edge 0 1
edge 1 2   # trailing comment

sense 0 1
sense 1 2
sense 2 1
";

    #[test]
    fn parses_sample() {
        let f = GraphFile::parse(SAMPLE).unwrap();
        assert_eq!(f.graph.n_vertices(), 3);
        assert_eq!(f.palette.n_colors(), 2);
        assert_eq!(f.graph.n_edges(), 2);
        assert!(f.sensing.has_edge(0, 1));
        assert!(!f.sensing.has_edge(1, 0));
        assert_eq!(GraphFile::parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn reports_line_numbers() {
        let err = GraphFile::parse("graph 2 2\nedge 0 x\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }), "{err}");
        let err = GraphFile::parse("graph 2 2\n\nedge 0 2\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 3, .. }), "{err}");
        let err = GraphFile::parse("edge 0 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 1, .. }));
        let err = GraphFile::parse("graph 2 2\ncolor 0 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }));
    }

    #[test]
    fn rejects_missing_header_and_unsensed_direction() {
        assert!(matches!(
            GraphFile::parse("# nothing\n"),
            Err(FormatError::MissingHeader)
        ));
        assert!(matches!(
            GraphFile::parse("graph 3 2\nedge 0 1\nsense 1 2\n"),
            Err(FormatError::Graph(GraphError::NotSubset { from: 1, to: 2 }))
        ));
    }
}
