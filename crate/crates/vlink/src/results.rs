//! Query results as JSON Lines: `{"query":ID,"hits":[{"id":ID,"distance":D}]}`, distances
//! printed with 9 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use vlink_core::{Index, NeighborList, Top1Link};

use crate::{Error, Result};

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros dropped, exponent notation
/// outside `1e-4 ≤ |x| < 1e9`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exponent) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exponent: i32 = exponent.parse().unwrap_or(0);
    if !(-4..9).contains(&exponent) {
        return format!("{}e{exponent}", trim_fraction(mantissa));
    }
    let decimals = (8 - exponent) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_else(|_| String::from("\"\""))
}

pub fn neighbor_list_line(list: &NeighborList) -> String {
    let mut line = format!("{{\"query\":{},\"hits\":[", json_string(&list.query_id));
    for (i, hit) in list.hits.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{{\"id\":{},\"distance\":{}}}", json_string(&hit.painting_id), format_sig9(hit.distance));
    }
    line.push_str("]}");
    line
}

pub fn top1_line(index: &Index, link: &Top1Link) -> String {
    format!(
        "{{\"query\":{},\"hits\":[{{\"id\":{},\"distance\":{}}}]}}",
        json_string(index.painting_id(link.query_row)),
        json_string(index.painting_id(link.matched_row)),
        format_sig9(link.distance)
    )
}

pub fn write_lines(lines: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        text.push_str(line);
        text.push('\n');
    }
    fs::write(path, text).map_err(Error::io(path))
}
