//! Report headers and unit-aware formatting.

use std::fmt::Write;

use clap::ValueEnum;
use cwrdm_core::Rational;

/// Display units. Computation always uses doubled weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Units {
    /// Integer weights, 2 x spin for SU(2).
    #[default]
    Doubled,
    /// Half the doubled values.
    Spin,
}

impl Units {
    fn factor(self) -> i128 {
        match self {
            Units::Doubled => 1,
            Units::Spin => 2,
        }
    }

    pub fn rational(self, r: Rational) -> String {
        (r / self.factor()).to_string()
    }

    pub fn integer(self, x: i64) -> String {
        self.rational(Rational::from_integer(x as i128))
    }

    pub fn real(self, x: f64) -> String {
        fmt_real(x / self.factor() as f64)
    }

    /// A weight vector: bare for one component, comma-separated otherwise.
    pub fn weight(self, w: &[i64]) -> String {
        w.iter()
            .map(|&x| self.integer(x))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn reals(self, v: &[f64]) -> String {
        v.iter()
            .map(|&x| self.real(x))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Doubled => "doubled",
            Units::Spin => "spin",
        }
    }
}

pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// 1-based multi-index, space-separated.
pub fn fmt_index(digits: &[usize]) -> String {
    digits
        .iter()
        .map(|d| (d + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Key-value lines opening every report.
#[derive(Debug, Clone)]
pub struct Provenance {
    lines: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        let mut p = Self { lines: Vec::new() };
        p.push("tool", format!("cwrdm {}", env!("CARGO_PKG_VERSION")));
        p.push("command", command);
        p
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            writeln!(s, "# {k}: {v}").unwrap();
        }
        s
    }
}

/// Renders rows as CSV with a header.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
