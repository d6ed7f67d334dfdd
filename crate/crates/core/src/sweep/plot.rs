use std::fmt::Write as _;

use super::table::SeriesTable;

/// Which columns to draw. Rows sharing the values of `groups` form one
/// curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    pub groups: Vec<String>,
    pub log_y: bool,
    /// column that the script can divide by its first value per curve
    pub normalizable: Option<String>,
}

impl PlotSpec {
    pub fn new(x: &str, ys: &[&str], groups: &[&str]) -> Self {
        Self {
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            groups: groups.iter().map(|s| s.to_string()).collect(),
            log_y: false,
            normalizable: None,
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn normalizable(mut self, column: &str) -> Self {
        self.normalizable = Some(column.into());
        self
    }

    /// Gnuplot script reading `csv_name` from its own directory.
    pub fn script(&self, table: &SeriesTable, csv_name: &str) -> String {
        let col = |label: &str| table.column_index(label).map(|i| i + 1).unwrap_or(0);
        let group_cols: Vec<usize> = self.groups.iter().map(|g| col(g)).collect();

        // distinct group keys in first-appearance order, each with the first
        // value of the normalizable column
        let mut curves: Vec<(Vec<String>, f64)> = Vec::new();
        let norm_idx = self.normalizable.as_deref().and_then(|c| table.column_index(c));
        for row in table.rows() {
            let key: Vec<String> = group_cols.iter().map(|&c| row[c - 1].to_field()).collect();
            if !curves.iter().any(|(k, _)| *k == key) {
                let first = norm_idx.and_then(|i| row[i].as_f64()).unwrap_or(1.0);
                curves.push((key, first));
            }
        }

        let mut s = String::new();
        writeln!(s, "# gnuplot script for {csv_name}").unwrap();
        writeln!(s, "set datafile separator ','").unwrap();
        writeln!(s, "set datafile missing ''").unwrap();
        writeln!(s, "set key outside right").unwrap();
        writeln!(s, "set xlabel '{}'", header(table, &self.x)).unwrap();
        if self.log_y {
            writeln!(s, "set logscale y").unwrap();
        }
        if self.normalizable.is_some() {
            writeln!(s, "normalize = 0  # set to 1 to scale each curve by its first value").unwrap();
        }
        let x = col(&self.x);
        let mut clauses = Vec::new();
        for y in &self.ys {
            let yc = col(y);
            for (key, first) in &curves {
                let cond: Vec<String> = group_cols.iter().zip(key).map(|(c, v)| format!("${c}=={v}")).collect();
                let mut value = format!("${yc}");
                if self.normalizable.as_deref() == Some(y.as_str()) && *first != 0.0 {
                    value = format!("(normalize ? ${yc}/{first:.12e} : ${yc})");
                }
                let using = if cond.is_empty() {
                    format!("{x}:{value}")
                } else {
                    format!("{x}:({} ? {value} : 1/0)", cond.join(" && "))
                };
                let title: Vec<String> = self.groups.iter().zip(key).map(|(g, v)| format!("{g}={v}")).collect();
                let title = if title.is_empty() {
                    y.clone()
                } else {
                    format!("{y} {}", title.join(" "))
                };
                clauses.push(format!("'{csv_name}' skip 1 using {using} with lines title '{title}'"));
            }
        }
        writeln!(s, "plot {}", clauses.join(", \\\n     ")).unwrap();
        writeln!(s, "pause mouse close").unwrap();
        s
    }
}

fn header(table: &SeriesTable, label: &str) -> String {
    table
        .columns
        .iter()
        .find(|c| c.label == label)
        .map(|c| {
            if c.unit.is_empty() {
                c.label.clone()
            } else {
                format!("{} [{}]", c.label, c.unit)
            }
        })
        .unwrap_or_else(|| label.to_string())
}
