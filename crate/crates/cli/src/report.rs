//! Tabular reports and their Markdown, CSV and JSON renderings.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// No reference value attached.
    Value,
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub golden: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Cell {
    pub fn plain(value: impl Into<String>) -> Cell {
        Cell { value: value.into(), golden: None, status: Status::Value, note: None }
    }

    pub fn checked(value: impl Into<String>, golden: &str, pass: bool) -> Cell {
        Cell {
            value: value.into(),
            golden: Some(golden.to_string()),
            status: if pass { Status::Pass } else { Status::Fail },
            note: None,
        }
    }

    pub fn skipped(golden: Option<&str>, reason: impl Into<String>) -> Cell {
        Cell {
            value: String::new(),
            golden: golden.map(str::to_string),
            status: Status::Skipped,
            note: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

impl Report {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Report {
        Report {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            summary: None,
        }
    }

    /// Counts checked cells and stores the tally.
    pub fn tally(&mut self) -> &Summary {
        let mut s = Summary::default();
        for cell in self.rows.iter().flatten() {
            match cell.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Skipped => s.skipped += 1,
                Status::Value => {}
            }
        }
        self.summary = Some(s);
        self.summary.as_ref().expect("just set")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Md => self.markdown(),
            Format::Csv => self.csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn markdown(&self) -> String {
        let mut out = format!("## {}\n\n", self.title);
        out.push_str(&format!("| {} |\n", self.columns.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(self.columns.len())));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c.status {
                    Status::Value => c.value.clone(),
                    Status::Pass => format!("{} ✓", c.value),
                    Status::Fail => format!("{} ✗ (ref {})", c.value, c.golden.as_deref().unwrap_or("")),
                    Status::Skipped => format!("skipped: {}", c.note.as_deref().unwrap_or("")),
                })
                .collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        if let Some(s) = &self.summary {
            out.push_str(&format!("\n{} passed, {} failed, {} skipped\n", s.passed, s.failed, s.skipped));
        }
        for note in &self.notes {
            out.push_str(&format!("\n> {note}\n"));
        }
        out
    }

    /// Long format: one line per cell.
    fn csv(&self) -> String {
        let mut out = String::from("row,column,value,reference,status,note\n");
        for (i, row) in self.rows.iter().enumerate() {
            let key = row.first().map(|c| c.value.as_str()).unwrap_or("");
            for (col, cell) in self.columns.iter().zip(row) {
                let status = match cell.status {
                    Status::Value => "value",
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Skipped => "skipped",
                };
                let fields = [
                    if key.is_empty() { i.to_string() } else { key.to_string() },
                    col.clone(),
                    cell.value.clone(),
                    cell.golden.clone().unwrap_or_default(),
                    status.to_string(),
                    cell.note.clone().unwrap_or_default(),
                ];
                let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
