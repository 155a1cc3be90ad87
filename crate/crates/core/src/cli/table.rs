//! Result tables, their CSV form and gnuplot scripts.

use std::fmt::Write as _;

/// Rounds to 12 significant digits and prints the shortest string that
/// reads back to the rounded value.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:?}")
}

/// How the emitted script draws the table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub y: Vec<String>,
    /// Column mapped to point colour, for two-parameter grids.
    pub color: Option<String>,
    pub log_x: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    metadata: Vec<(String, String)>,
    pub plot: Option<PlotSpec>,
}

impl ResultTable {
    /// Panics on repeated column names; columns are fixed by each command.
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        for (i, c) in columns.iter().enumerate() {
            assert!(!columns[..i].contains(c), "duplicate column `{c}`");
        }
        Self {
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    /// Puts `items` ahead of the existing metadata.
    pub fn prepend_meta(&mut self, items: Vec<(String, String)>) {
        let rest = std::mem::take(&mut self.metadata);
        self.metadata = items.into_iter().chain(rest).collect();
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `# key: value` lines, then the header and the rows.
    pub fn to_csv(&self, wall_time: Option<f64>) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for line in v.lines() {
                writeln!(out, "# {k}: {line}").unwrap();
            }
        }
        if let Some(w) = wall_time {
            writeln!(out, "# wall_time_s: {w:.3}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    /// A gnuplot script carrying its own data that renders `svg_path`.
    pub fn plot_script(&self, svg_path: &str) -> Option<String> {
        let spec = self.plot.as_ref()?;
        let col = |name: &str| self.columns.iter().position(|c| c == name).map(|i| i + 1);
        let x = col(&spec.x)?;
        let mut s = String::new();
        writeln!(s, "set terminal svg size 800,560 dynamic enhanced").unwrap();
        writeln!(s, "set output '{svg_path}'").unwrap();
        writeln!(s, "set datafile separator ','").unwrap();
        writeln!(s, "set title '{}' noenhanced", spec.title).unwrap();
        writeln!(s, "set xlabel '{}' noenhanced", spec.x).unwrap();
        writeln!(s, "set key outside right noenhanced").unwrap();
        if spec.log_x {
            writeln!(s, "set logscale x").unwrap();
        }
        writeln!(s, "$data << EOD").unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        writeln!(s, "EOD").unwrap();
        let curves: Vec<String> = spec
            .y
            .iter()
            .filter_map(|y| {
                let yi = col(y)?;
                Some(match spec.color.as_deref().and_then(col) {
                    Some(ci) => format!("$data using {x}:{yi}:{ci} with points pt 7 ps 0.6 palette title '{y}'"),
                    None => format!("$data using {x}:{yi} with linespoints pt 7 ps 0.5 title '{y}'"),
                })
            })
            .collect();
        if let Some(c) = &spec.color {
            writeln!(s, "set cblabel '{c}' noenhanced").unwrap();
        }
        writeln!(s, "plot {}", curves.join(", \\\n     ")).unwrap();
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(0.1405), "0.1405");
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_value(2.0), "2.0");
        assert_eq!(format_value(-0.0), "0.0");
        assert_eq!(format_value(1.234567890123456e-20), "1.23456789012e-20");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(["x", "y"]);
        t.meta("command", "demo");
        t.push(vec![1.0, 0.5]);
        let csv = t.to_csv(Some(0.25));
        assert_eq!(csv, "# command: demo\n# wall_time_s: 0.250\nx,y\n1.0,0.5\n");
        assert_eq!(t.column("y"), Some(vec![0.5]));
    }

    #[test]
    fn plot_script_embeds_data() {
        let mut t = ResultTable::new(["x", "y"]);
        t.push(vec![1.0, 2.0]);
        assert!(t.plot_script("a.svg").is_none());
        t.plot = Some(PlotSpec {
            title: "demo".into(),
            x: "x".into(),
            y: vec!["y".into()],
            color: None,
            log_x: false,
        });
        let s = t.plot_script("a.svg").unwrap();
        assert!(s.contains("set output 'a.svg'") && s.contains("1.0,2.0\nEOD"));
    }
}
