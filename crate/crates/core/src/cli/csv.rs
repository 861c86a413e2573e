//! Comma-separated tables with `%.12g`-style numbers.

use std::fmt::Write as _;

pub const SIG_DIGITS: usize = 12;

/// Format `v` with 12 significant digits, shortest of fixed or exponent
/// notation as C's `%.12g` would choose, independent of locale.
pub fn fmt_g(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn parse_number(field: &str) -> Option<f64> {
    match field.trim() {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_g(*v),
            Cell::Text(t) => t.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn parse(field: &str) -> Self {
        parse_number(field).map_or_else(|| Cell::Text(field.to_string()), Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Written as a `# label` line above the header when present.
    pub label: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `header` + values block after the rows (scaling fit).
    pub footer: Option<(Vec<String>, Vec<f64>)>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            label: None,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            footer: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.push_cells(row.into_iter().map(Cell::Num).collect());
    }

    pub fn push_cells(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Numeric view of a column; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[k].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    fn write_into(&self, out: &mut String) {
        if let Some(label) = &self.label {
            let _ = writeln!(out, "# {label}");
        }
        write_line(out, self.header.iter().cloned());
        for row in &self.rows {
            write_line(out, row.iter().map(Cell::render));
        }
        if let Some((names, values)) = &self.footer {
            write_line(out, names.iter().cloned());
            write_line(out, values.iter().map(|v| fmt_g(*v)));
        }
    }
}

fn write_line(out: &mut String, fields: impl Iterator<Item = String>) {
    let line: Vec<String> = fields.collect();
    out.push_str(&line.join(","));
    out.push('\n');
}

/// Comments starting with this word are run metadata, not table labels.
pub const META_PREFIX: &str = "cavsq ";

/// Render tables separated by blank lines, preceded by an optional
/// metadata comment (which should start with [`META_PREFIX`]).
pub fn render(tables: &[CsvTable], meta: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(m) = meta {
        let _ = writeln!(out, "# {m}");
    }
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        t.write_into(&mut out);
    }
    out
}

/// Parse what [`render`] wrote. A comment line before a header becomes the
/// table label; an all-text line inside a table starts the footer.
pub fn parse(text: &str) -> Result<Vec<CsvTable>, String> {
    let mut tables = Vec::new();
    let mut current: Option<CsvTable> = None;
    let mut label: Option<String> = None;
    let mut footer_names: Option<Vec<String>> = None;

    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            if let Some(t) = current.take() {
                tables.push(t);
            }
            footer_names = None;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if !comment.starts_with(META_PREFIX) {
                label = Some(comment.to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let cells: Vec<Cell> = fields.iter().map(|f| Cell::parse(f)).collect();
        let all_text = cells.iter().all(|c| c.as_f64().is_none());
        match (&mut current, all_text) {
            (None, _) => {
                let mut t = CsvTable::new(&fields);
                t.label = label.take();
                current = Some(t);
            }
            (Some(t), false) => {
                if let Some(names) = footer_names.take() {
                    let values: Option<Vec<f64>> = cells.iter().map(Cell::as_f64).collect();
                    match values {
                        Some(v) if v.len() == names.len() => t.footer = Some((names, v)),
                        _ => return Err(format!("line {}: malformed footer values", n + 1)),
                    }
                } else if t.footer.is_some() || cells.len() != t.header.len() {
                    return Err(format!(
                        "line {}: expected {} fields",
                        n + 1,
                        t.header.len()
                    ));
                } else {
                    t.rows.push(cells);
                }
            }
            (Some(_), true) => {
                if footer_names.is_some() {
                    return Err(format!("line {}: unexpected text row", n + 1));
                }
                footer_names = Some(fields.iter().map(|s| s.to_string()).collect());
            }
        }
    }
    if footer_names.is_some() {
        return Err("footer header without values".into());
    }
    if let Some(t) = current {
        tables.push(t);
    }
    Ok(tables)
}
