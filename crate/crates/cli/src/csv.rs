//! CSV emission: `#` comment lines, one column-name line, then rows of
//! numbers with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `{:.16e}`: 17 significant digits, round-trips every f64.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { comments: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Adds every line of `text` as a comment.
    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.comments.extend(text.lines().map(str::to_string));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            if c.is_empty() {
                s.push_str("#\n");
            } else {
                let _ = writeln!(s, "# {c}");
            }
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| number(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        let path = dir.join(name);
        std::fs::write(&path, self.render())
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }

    /// Parses text produced by [`Table::render`].
    pub fn parse(text: &str) -> CliResult<Table> {
        let mut comments = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    comments.push(l.trim_start_matches('#').trim_start().to_string());
                }
                Some(l) => break l,
                None => return Err(CliError::config("csv: missing column header")),
            }
        };
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, l) in lines.enumerate() {
            let row = l
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| CliError::config(format!("csv row {n}: {e}")))?;
            if row.len() != columns.len() {
                return Err(CliError::config(format!("csv row {n}: width {} != {}", row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Table { comments, columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}
