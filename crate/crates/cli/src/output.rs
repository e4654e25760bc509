//! Artifact formatting: CSV tables, two-column `.dat` series, aligned text.

use anyhow::Result;

/// Formats a float with 6 significant digits, `%g` style.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Rows keyed by an integer case id; rows are emitted sorted by that id.
#[derive(Debug, Clone)]
pub struct Table {
    experiment: String,
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    /// `columns` follow the fixed `experiment,case_id` prefix.
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Table {
            experiment: experiment.to_string(),
            header: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, case_id: u64, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width must match the header");
        self.rows.push((case_id, cells));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self, name: &str) -> Result<Artifact> {
        let mut rows: Vec<&(u64, Vec<String>)> = self.rows.iter().collect();
        rows.sort_by_key(|(id, _)| *id);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["experiment".to_string(), "case_id".to_string()];
        header.extend(self.header.iter().cloned());
        w.write_record(&header)?;
        for (id, cells) in rows {
            let mut rec = vec![self.experiment.clone(), id.to_string()];
            rec.extend(cells.iter().cloned());
            w.write_record(&rec)?;
        }
        Ok(Artifact {
            name: name.to_string(),
            bytes: w.into_inner().map_err(|e| e.into_error())?,
        })
    }
}

/// Whitespace-separated `x y` pairs with a `#` header line.
pub fn dat(name: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> Artifact {
    let mut s = format!("# {x_label} {y_label}\n");
    for &(x, y) in points {
        s.push_str(&num(x));
        s.push(' ');
        s.push_str(&num(y));
        s.push('\n');
    }
    Artifact {
        name: name.to_string(),
        bytes: s.into_bytes(),
    }
}

/// Left-aligned first column, right-aligned others.
pub fn aligned_text(name: &str, header: &[&str], rows: &[Vec<String>]) -> Artifact {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate().take(cols) {
            if i == 0 {
                s.push_str(&format!("{c:<w$}", w = widths[i]));
            } else {
                s.push_str(&format!("  {c:>w$}", w = widths[i]));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    Artifact {
        name: name.to_string(),
        bytes: out.into_bytes(),
    }
}
