//! Sweeps over edge/attention widths and the final aggregator.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use super::config::TrainConfig;
use super::dataset::Dataset;
use super::predict::predict_ensemble;
use super::train::cross_validate;
use crate::corefhead::Label;
use crate::corefmetrics::micro_f1;
use crate::error::Result;
use crate::rgat::FinalAggregator;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationCell {
    pub m: usize,
    pub n: usize,
    pub aggregator: FinalAggregator,
    /// Column heading in the summary table.
    pub column: String,
}

pub const DEFAULT_SIZES: [(usize, usize); 3] = [(5, 10), (10, 20), (30, 60)];

/// The (m, n) × aggregator grid. Mean and Sum feed identical widths into
/// the head and share one column unless `split_mean_sum` is set.
pub fn ablation_grid(sizes: &[(usize, usize)], split_mean_sum: bool) -> Vec<AblationCell> {
    let columns: Vec<(FinalAggregator, &str)> = if split_mean_sum {
        vec![
            (FinalAggregator::Mean, "Mean"),
            (FinalAggregator::Sum, "Sum"),
            (FinalAggregator::Concat, "Concat"),
        ]
    } else {
        vec![(FinalAggregator::Sum, "Mean/Sum"), (FinalAggregator::Concat, "Concat")]
    };
    sizes
        .iter()
        .flat_map(|&(m, n)| {
            columns.iter().map(move |&(aggregator, column)| AblationCell {
                m,
                n,
                aggregator,
                column: column.to_string(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub m: usize,
    pub n: usize,
    pub column: String,
    pub aggregator: FinalAggregator,
    pub blend_dim: usize,
    /// Fold-averaged test micro-F1 if a test set was given, else
    /// out-of-fold micro-F1.
    pub micro_f1: f64,
    pub seconds: f64,
}

/// Trains every cell with `base` otherwise unchanged.
pub fn run_ablation(
    data: &Dataset,
    base: &TrainConfig,
    cells: &[AblationCell],
    test: Option<&Dataset>,
    on_cell: &mut dyn FnMut(&AblationRow),
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let cfg = TrainConfig {
            m: cell.m,
            n: cell.n,
            aggregator: cell.aggregator,
            ..base.clone()
        };
        cfg.validate()?;
        let start = Instant::now();
        let cv = cross_validate(data, &cfg, &mut |_, _| {})?;
        let micro = match test {
            Some(t) => {
                let models: Vec<_> = cv.folds.iter().map(|f| f.model.clone()).collect();
                let preds = predict_ensemble(&models, t, cfg.seed)?;
                let pred: Vec<Label> = preds.iter().map(|p| p.1).collect();
                micro_f1(&t.labels(), &pred)?.f1
            }
            None => cv.oof_f1,
        };
        let row = AblationRow {
            m: cell.m,
            n: cell.n,
            column: cell.column.clone(),
            aggregator: cell.aggregator,
            blend_dim: cfg.rgat(data.d_bert()).blend_dim(),
            micro_f1: micro,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_cell(&row);
        rows.push(row);
    }
    Ok(rows)
}

/// One line per (m, n), one F1 column (percent) per aggregator heading.
pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !columns.contains(&r.column.as_str()) {
            columns.push(&r.column);
        }
        if !sizes.contains(&(r.m, r.n)) {
            sizes.push((r.m, r.n));
        }
    }
    let mut s = format!("{:<12}", "m/n");
    for c in &columns {
        let _ = write!(s, " {c:>10}");
    }
    s.push('\n');
    for &(m, n) in &sizes {
        let _ = write!(s, "{:<12}", format!("{m}/{n}"));
        for c in &columns {
            match rows.iter().find(|r| (r.m, r.n) == (m, n) && r.column == *c) {
                Some(r) => {
                    let _ = write!(s, " {:>10.2}", 100.0 * r.micro_f1);
                }
                None => {
                    let _ = write!(s, " {:>10}", "-");
                }
            }
        }
        s.push('\n');
    }
    s
}

/// Tab-separated rows with a header, one line per cell.
pub fn ablation_tsv(rows: &[AblationRow]) -> String {
    let mut s = String::from("m\tn\tcolumn\taggregator\tblend_dim\tmicro_f1\tseconds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.3}",
            r.m,
            r.n,
            r.column,
            r.aggregator.name(),
            r.blend_dim,
            r.micro_f1,
            r.seconds
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_layout() {
        let g = ablation_grid(&DEFAULT_SIZES, false);
        assert_eq!(g.len(), 6);
        assert_eq!(g.iter().filter(|c| c.column == "Concat").count(), 3);
        assert_eq!(ablation_grid(&DEFAULT_SIZES, true).len(), 9);
    }

    #[test]
    fn table_has_a_line_per_size() {
        let rows: Vec<AblationRow> = ablation_grid(&DEFAULT_SIZES, false)
            .into_iter()
            .map(|c| AblationRow {
                m: c.m,
                n: c.n,
                column: c.column,
                aggregator: c.aggregator,
                blend_dim: 0,
                micro_f1: 0.5,
                seconds: 0.0,
            })
            .collect();
        let t = ablation_table(&rows);
        assert_eq!(t.lines().count(), 4);
        assert!(t.contains("30/60"));
        assert!(t.lines().next().unwrap().contains("Mean/Sum"));
        assert_eq!(ablation_tsv(&rows).lines().count(), 7);
    }
}
