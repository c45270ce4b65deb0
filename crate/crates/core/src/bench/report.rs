//! Summary tables: one row per instance plus averages by family, dimension
//! count and size class. Cells are mean relative errors in percent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::RunRecord;
use crate::error::{MapError, Result};
use crate::instances::size_class;
use crate::model::{Family, InstanceId};

const CLASS_NAMES: [&str; 3] = ["Small", "Moderate", "Large"];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    /// One value per column; `None` where the row has no data.
    pub values: Vec<Option<f64>>,
    /// Whether the value is the smallest among columns with the same budget.
    pub best: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// (heuristic, budget) per column, ordered by budget then heuristic.
    pub columns: Vec<(String, f64)>,
    pub rows: Vec<TableRow>,
}

/// Sum in a fixed order so that results do not depend on record order.
fn mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn flag_best(columns: &[(String, f64)], values: &[Option<f64>]) -> Vec<bool> {
    let mut best = vec![false; values.len()];
    for (k, &(_, tau)) in columns.iter().enumerate() {
        let Some(v) = values[k] else { continue };
        best[k] = columns
            .iter()
            .zip(values)
            .filter(|((_, t), _)| *t == tau)
            .all(|(_, other)| other.is_none_or(|o| v <= o));
    }
    best
}

/// Builds the summary table. Errors are recomputed from each record's
/// weights. Averages are over instance rows.
pub fn aggregate(records: &[RunRecord]) -> Result<Table> {
    let mut cols: Vec<(String, f64)> = records
        .iter()
        .map(|r| (r.heuristic.clone(), r.tau_s))
        .collect::<Vec<_>>();
    cols.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    cols.dedup();

    // Per instance and column: all errors over repetitions.
    let mut cells: BTreeMap<InstanceId, Vec<Vec<f64>>> = BTreeMap::new();
    for r in records {
        let id = r.id()?;
        let err = r.relative_error()?;
        let k = cols
            .iter()
            .position(|(h, t)| *h == r.heuristic && *t == r.tau_s)
            .ok_or_else(|| MapError::Integrity("column vanished".into()))?;
        cells.entry(id).or_insert_with(|| vec![Vec::new(); cols.len()])[k].push(err);
    }
    let instance_rows: Vec<(InstanceId, Vec<Option<f64>>)> = cells
        .into_iter()
        .map(|(id, mut per_col)| {
            let values = per_col
                .iter_mut()
                .map(|v| (!v.is_empty()).then(|| mean(v)))
                .collect();
            (id, values)
        })
        .collect();

    let mut rows: Vec<TableRow> = instance_rows
        .iter()
        .map(|(id, values)| TableRow { label: id.to_string(), best: flag_best(&cols, values), values: values.clone() })
        .collect();

    let average = |label: String, keep: &dyn Fn(&InstanceId) -> bool| -> Option<TableRow> {
        let members: Vec<&Vec<Option<f64>>> = instance_rows.iter().filter(|(id, _)| keep(id)).map(|(_, v)| v).collect();
        if members.is_empty() {
            return None;
        }
        let values: Vec<Option<f64>> = (0..cols.len())
            .map(|k| {
                let mut v: Vec<f64> = members.iter().filter_map(|m| m[k]).collect();
                (!v.is_empty()).then(|| mean(&mut v))
            })
            .collect();
        Some(TableRow { label, best: flag_best(&cols, &values), values })
    };

    rows.extend(average("All avg.".into(), &|_| true));
    let families: BTreeSet<Family> = instance_rows.iter().map(|(id, _)| id.family).collect();
    for f in families {
        rows.extend(average(format!("{} avg.", family_name(f)), &|id| id.family == f));
    }
    let dims: BTreeSet<usize> = instance_rows.iter().map(|(id, _)| id.s).collect();
    for s in dims {
        rows.extend(average(format!("{s}-AP avg."), &|id| id.s == s));
    }
    for (class, name) in CLASS_NAMES.iter().enumerate() {
        rows.extend(average(format!("{name} avg."), &|id| size_class(id.s, id.n) == Some(class)));
    }
    Ok(Table { columns: cols, rows })
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Random => "Random",
        Family::Clique => "Clique",
        Family::SquareRoot => "SquareRoot",
        Family::Geometric => "Geometric",
        Family::Product => "Product",
    }
}

/// Aligned plain-text rendering; the best value per budget is starred.
pub fn render_text(table: &Table) -> String {
    let headers: Vec<String> = table.columns.iter().map(|(h, t)| format!("{h}@{t}s")).collect();
    let cell = |row: &TableRow, k: usize| match row.values[k] {
        Some(v) => format!("{v:.2}{}", if row.best[k] { "*" } else { " " }),
        None => "-".to_string(),
    };
    let label_w = table.rows.iter().map(|r| r.label.len()).chain([8]).max().unwrap();
    let widths: Vec<usize> = (0..headers.len())
        .map(|k| table.rows.iter().map(|r| cell(r, k).len()).chain([headers[k].len()]).max().unwrap())
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:<label_w$}", "instance");
    for (h, w) in headers.iter().zip(&widths) {
        let _ = write!(out, "  {h:>w$}");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "{:<label_w$}", row.label);
        for (k, w) in widths.iter().enumerate() {
            let _ = write!(out, "  {:>w$}", cell(row, k));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    row: &'a str,
    heuristic: &'a str,
    tau_s: f64,
    mean_rel_err_pct: f64,
    best: bool,
}

/// Long-format CSV of the table (empty cells omitted).
pub fn write_table_csv<W: std::io::Write>(out: W, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &table.rows {
        for (k, (h, tau)) in table.columns.iter().enumerate() {
            if let Some(v) = row.values[k] {
                w.serialize(CsvRow { row: &row.label, heuristic: h, tau_s: *tau, mean_rel_err_pct: v, best: row.best[k] })
                    .map_err(|e| MapError::Io(e.to_string()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, h: &str, tau: f64, weight: f64, best: f64) -> RunRecord {
        RunRecord {
            instance_id: id.into(),
            heuristic: h.into(),
            tau_s: tau,
            weight,
            best_known: best,
            rel_err_pct: -1.0,
            generations: 0,
            pop_size: 2,
            ls_time_s: 0.0,
            elapsed_s: 0.0,
        }
    }

    fn row<'a>(t: &'a Table, label: &str) -> &'a TableRow {
        t.rows.iter().find(|r| r.label == label).unwrap()
    }

    #[test]
    fn all_average_is_the_mean() {
        let t = aggregate(&[rec("3r40-1", "gk", 1.0, 44.0, 40.0), rec("3r40-2", "gk", 1.0, 48.0, 40.0)]).unwrap();
        for label in ["All avg.", "Small avg.", "3-AP avg.", "Random avg."] {
            assert!((row(&t, label).values[0].unwrap() - 15.0).abs() < 1e-12, "{label}");
        }
    }

    #[test]
    fn stored_error_is_ignored() {
        let t = aggregate(&[rec("4cq20-1", "gk", 1.0, 110.0, 100.0)]).unwrap();
        assert!((row(&t, "4cq20-1").values[0].unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_record_fills_every_average() {
        let t = aggregate(&[rec("5cq18-3", "gk", 3.0, 105.0, 100.0)]).unwrap();
        let v = row(&t, "5cq18-3").values.clone();
        for label in ["All avg.", "Clique avg.", "5-AP avg.", "Moderate avg."] {
            assert_eq!(row(&t, label).values, v);
        }
        assert!(t.rows.iter().all(|r| r.label != "Small avg."));
    }

    #[test]
    fn best_is_flagged_per_budget() {
        let t = aggregate(&[
            rec("3r40-1", "gk", 1.0, 41.0, 40.0),
            rec("3r40-1", "sDV", 1.0, 44.0, 40.0),
            rec("3r40-1", "sDV", 3.0, 42.0, 40.0),
        ])
        .unwrap();
        assert_eq!(t.columns, vec![("gk".into(), 1.0), ("sDV".into(), 1.0), ("sDV".into(), 3.0)]);
        assert_eq!(row(&t, "3r40-1").best, vec![true, false, true]);
        let text = render_text(&t);
        assert!(text.lines().next().unwrap().contains("gk@1s"));
        assert!(text.contains("2.50*"));
    }

    #[test]
    fn order_does_not_matter() {
        let mut recs = vec![
            rec("3r40-1", "gk", 1.0, 41.0, 40.0),
            rec("3r40-1", "gk", 1.0, 43.0, 40.0),
            rec("3r40-2", "gk", 1.0, 47.0, 40.0),
            rec("4cq20-1", "gk", 1.0, 1003.0, 1000.0),
        ];
        let a = aggregate(&recs).unwrap();
        recs.reverse();
        assert_eq!(aggregate(&recs).unwrap(), a);
        assert_eq!(aggregate(&[]).unwrap().rows.len(), 0);
    }
}
