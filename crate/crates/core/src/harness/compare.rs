#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::HarnessError;

/// Difference of one column between two logs.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: usize,
    pub columns: Vec<ColumnDiff>,
    /// Every value bit-identical (NaN payloads included).
    pub identical: bool,
}

impl CompareReport {
    pub fn max_abs(&self) -> f64 {
        self.columns.iter().map(|c| c.max_abs).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("rows: {}\n", self.rows);
        for c in &self.columns {
            s.push_str(&format!("  {}: max {:e}, rms {:e}\n", c.name, c.max_abs, c.rms));
        }
        s.push_str(&format!("identical: {}\n", self.identical));
        s
    }
}

/// Column-wise comparison of two logs with the same header and length.
pub fn compare_runs(
    header_a: &[String],
    rows_a: &[Vec<f64>],
    header_b: &[String],
    rows_b: &[Vec<f64>],
) -> Result<CompareReport, HarnessError> {
    let schema = |m: String| Err(HarnessError::InvalidScenario(m));
    if header_a != header_b {
        return schema(format!("column mismatch: {header_a:?} vs {header_b:?}"));
    }
    if rows_a.len() != rows_b.len() {
        return schema(format!("row count mismatch: {} vs {}", rows_a.len(), rows_b.len()));
    }
    let n = header_a.len();
    for (i, (a, b)) in rows_a.iter().zip(rows_b).enumerate() {
        if a.len() != n || b.len() != n {
            return schema(format!("row {i} does not have {n} columns"));
        }
    }
    let mut identical = true;
    let columns = header_a
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (mut max_abs, mut ss) = (0.0f64, 0.0);
            for (a, b) in rows_a.iter().zip(rows_b) {
                if a[j].to_bits() != b[j].to_bits() {
                    identical = false;
                }
                let d = if a[j] == b[j] || (a[j].is_nan() && b[j].is_nan()) { 0.0 } else { (a[j] - b[j]).abs() };
                max_abs = if d.is_nan() { f64::INFINITY } else { max_abs.max(d) };
                ss += if d.is_finite() { d * d } else { f64::INFINITY };
            }
            let rms = if rows_a.is_empty() { 0.0 } else { (ss / rows_a.len() as f64).sqrt() };
            ColumnDiff {
                name: name.clone(),
                max_abs,
                rms,
            }
        })
        .collect();
    Ok(CompareReport {
        rows: rows_a.len(),
        columns,
        identical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn h(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| String::from(*s)).collect()
    }

    #[test]
    fn identical_and_different() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 2.0]];
        let r = compare_runs(&h(&["t", "x"]), &a, &h(&["t", "x"]), &a).unwrap();
        assert!(r.identical);
        assert_eq!(r.max_abs(), 0.0);
        let b = vec![vec![0.0, 1.0], vec![1.0, 2.5]];
        let r = compare_runs(&h(&["t", "x"]), &a, &h(&["t", "x"]), &b).unwrap();
        assert!(!r.identical);
        assert_eq!(r.columns[1].max_abs, 0.5);
        assert!((r.columns[1].rms - 0.125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let a = vec![vec![0.0, 1.0]];
        assert!(compare_runs(&h(&["t", "x"]), &a, &h(&["t", "y"]), &a).is_err());
        assert!(compare_runs(&h(&["t", "x"]), &a, &h(&["t", "x"]), &[]).is_err());
    }
}
