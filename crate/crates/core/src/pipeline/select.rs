use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PropertyMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSelection {
    pub index: usize,
    /// Mean |Spearman ρ| of each column with the other columns.
    pub mean_abs_correlation: Vec<f64>,
    /// Constant columns; their correlations are taken as 0.
    pub constant_columns: Vec<usize>,
}

/// Ranks with ties sharing their average rank (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation (Pearson on average ranks); `None` if either
/// input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// The column with the highest mean absolute Spearman correlation to the
/// other columns; ties go to the lowest index.
pub fn select_split_property(props: &PropertyMatrix) -> Result<SplitSelection> {
    let m = props.num_properties();
    if m < 2 || props.len() < 3 {
        return Err(Error::Config(format!(
            "split-property selection needs at least 2 properties and 3 graphs, got {m} and {}",
            props.len()
        )));
    }
    let ranks: Vec<Vec<f64>> = (0..m).map(|l| average_ranks(&props.column(l))).collect();
    let constant_columns: Vec<usize> = (0..m)
        .filter(|&l| ranks[l].iter().all(|&r| r == ranks[l][0]))
        .collect();
    for &l in &constant_columns {
        log::warn!("{}", Error::ConstantProperty { index: l });
    }
    let mut corr = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let r = pearson(&ranks[a], &ranks[b]).unwrap_or(0.0).abs();
            corr[a][b] = r;
            corr[b][a] = r;
        }
    }
    let mean_abs_correlation: Vec<f64> = corr
        .iter()
        .map(|row| row.iter().sum::<f64>() / (m - 1) as f64)
        .collect();
    let mut index = 0;
    for l in 1..m {
        if mean_abs_correlation[l] > mean_abs_correlation[index] {
            index = l;
        }
    }
    Ok(SplitSelection {
        index,
        mean_abs_correlation,
        constant_columns,
    })
}
