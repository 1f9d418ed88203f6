use std::fmt::Write as _;
use std::time::Duration;

use binlab::size::{decimal, fmt_q, Q};

pub const DECIMAL_DIGITS: usize = 13;

/// Longer exact fractions are summarized in text output.
pub const EXACT_TEXT_LIMIT: usize = 160;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Tsv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    pub name: String,
    pub exact: Option<String>,
    pub decimal: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a command prints, rendered as text or TSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub values: Vec<Value>,
    pub checks: Vec<Check>,
    pub lines: Vec<String>,
    pub seed: Option<u64>,
    pub wall_time: Duration,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            ..Report::default()
        }
    }

    pub fn param(&mut self, name: &str, value: impl ToString) {
        self.params.push((name.to_string(), value.to_string()));
    }

    pub fn exact(&mut self, name: impl Into<String>, x: &Q) {
        self.values.push(Value {
            name: name.into(),
            exact: Some(fmt_q(x)),
            decimal: decimal(x, DECIMAL_DIGITS),
        });
    }

    pub fn float(&mut self, name: impl Into<String>, x: f64) {
        self.values.push(Value {
            name: name.into(),
            exact: None,
            decimal: format!("{x:.12}"),
        });
    }

    pub fn count(&mut self, name: impl Into<String>, n: u64) {
        self.values.push(Value {
            name: name.into(),
            exact: Some(n.to_string()),
            decimal: n.to_string(),
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.render_text(),
            OutputFormat::Tsv => self.render_tsv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for v in &self.values {
            match &v.exact {
                Some(e) if e.len() > EXACT_TEXT_LIMIT => {
                    let (n, d) = e.split_once('/').unwrap_or((e, "1"));
                    let _ = writeln!(
                        out,
                        "{} = {} (exact fraction, {} / {} digits; see --format tsv)",
                        v.name,
                        v.decimal,
                        n.len(),
                        d.len()
                    );
                }
                Some(e) if e != &v.decimal => {
                    let _ = writeln!(out, "{} = {} (exact {e})", v.name, v.decimal);
                }
                _ => {
                    let _ = writeln!(out, "{} = {}", v.name, v.decimal);
                }
            }
        }
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{verdict} {}: {}", c.name, c.detail);
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed: {s}");
        }
        let _ = writeln!(out, "wall-time: {:.3}s", self.wall_time.as_secs_f64());
        out
    }

    fn render_tsv(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n'], " ");
        let mut out = String::new();
        let _ = writeln!(out, "command\t{}", clean(&self.command));
        for (k, v) in &self.params {
            let _ = writeln!(out, "param\t{}\t{}", clean(k), clean(v));
        }
        for v in &self.values {
            let _ = writeln!(
                out,
                "value\t{}\t{}\t{}",
                clean(&v.name),
                v.exact.as_deref().unwrap_or(""),
                v.decimal
            );
        }
        for l in &self.lines {
            let _ = writeln!(out, "line\t{}", clean(l));
        }
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "check\t{}\t{verdict}\t{}", clean(&c.name), clean(&c.detail));
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed\t{s}");
        }
        let _ = writeln!(out, "wall_time\t{:.3}", self.wall_time.as_secs_f64());
        out
    }
}

/// Drops the wall-time line so reports can be compared byte for byte.
pub fn without_wall_time(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.starts_with("wall-time:") && !l.starts_with("wall_time\t"))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use binlab::size::q;

    #[test]
    fn renders_both_formats() {
        let mut r = Report::new("binlab k3-limit");
        r.exact("ratio", &q(3, 2));
        r.check("demo", true, "ok");
        r.seed = Some(5);
        let text = r.render(OutputFormat::Text);
        assert!(text.contains("ratio = 1.5000000000000 (exact 3/2)"));
        assert!(text.contains("PASS demo: ok"));
        let tsv = r.render(OutputFormat::Tsv);
        assert!(tsv.contains("value\tratio\t3/2\t1.5000000000000\n"));
        assert!(tsv.contains("seed\t5\n"));
        assert_eq!(without_wall_time(&tsv).lines().last(), Some("seed\t5"));
    }
}
