//! Joint multifractal analysis by box counting over dyadic boxes, used as
//! an independent reference against the wavelet route on conservative
//! measures.

use crate::engine::{OrderGrid, PartitionTable};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use rayon::prelude::*;

/// Box-aggregated measure at a ladder of dyadic box sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMeasureField {
    sizes: Vec<usize>,
    /// One vector of box masses per size, boxes in series order.
    levels: Vec<Vec<f64>>,
    total_mass: f64,
    series_len: usize,
}

impl BoxMeasureField {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn level(&self, idx: usize) -> &[f64] {
        &self.levels[idx]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }
}

/// Longest power-of-two prefix of a length; callers warn when truncation
/// is needed.
pub fn dyadic_prefix_len(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1usize << (usize::BITS - 1 - n.leading_zeros())
    }
}

/// Aggregates a nonnegative series over boxes of each requested dyadic size.
pub fn box_measures(series: &[f64], sizes: &[usize]) -> Result<BoxMeasureField> {
    if let Some(index) = series.iter().position(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::NegativeMeasure { index });
    }
    if sizes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sizes",
            reason: "need at least one box size".to_string(),
        });
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sizes.len() || sorted != sizes {
        return Err(Error::InvalidParameter {
            name: "sizes",
            reason: "box sizes must be strictly increasing".to_string(),
        });
    }
    for &s in sizes {
        if s == 0 || !s.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "sizes",
                reason: format!("box size {s} is not a power of two"),
            });
        }
    }
    let max = *sizes.last().unwrap();
    if series.len() % max != 0 {
        return Err(Error::IndivisibleLength {
            length: series.len(),
            box_size: max,
        });
    }
    let levels: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&s| series.chunks_exact(s).map(|c| c.iter().sum()).collect())
        .collect();
    Ok(BoxMeasureField {
        sizes: sizes.to_vec(),
        levels,
        total_mass: series.iter().sum(),
        series_len: series.len(),
    })
}

/// Joint box-counting partition function, with the same half-order
/// convention as the wavelet route.
pub fn joint_partition_pf(
    mx: &BoxMeasureField,
    my: &BoxMeasureField,
    grid: &OrderGrid,
) -> Result<PartitionTable> {
    if mx.sizes != my.sizes || mx.series_len != my.series_len {
        return Err(Error::ShapeMismatch {
            context: "box measure fields differ in sizes or length".to_string(),
        });
    }
    const FLOOR: f64 = 1e-300;
    let log_levels = |field: &BoxMeasureField| -> Result<Vec<Vec<f64>>> {
        field
            .levels
            .iter()
            .zip(&field.sizes)
            .map(|(level, &s)| {
                if level.iter().all(|v| *v == 0.0) {
                    return Err(Error::DegenerateField { scale: s as f64 });
                }
                Ok(level.iter().map(|v| v.max(FLOOR).ln()).collect())
            })
            .collect()
    };
    let lx = log_levels(mx)?;
    let ly = log_levels(my)?;

    let s_len = mx.sizes.len();
    let cells: Vec<(usize, usize)> = (0..grid.p_values().len())
        .flat_map(|ip| (0..grid.q_values().len()).map(move |iq| (ip, iq)))
        .collect();
    let chunks: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(ip, iq)| {
            let hp = grid.p_values()[ip] / 2.0;
            let hq = grid.q_values()[iq] / 2.0;
            (0..s_len)
                .map(|js| {
                    lx[js]
                        .iter()
                        .zip(&ly[js])
                        .map(|(a, b)| (hp * a + hq * b).exp())
                        .sum()
                })
                .collect()
        })
        .collect();
    let chi: Vec<f64> = chunks.into_iter().flatten().collect();
    PartitionTable::from_parts(
        chi,
        grid.clone(),
        mx.sizes.iter().map(|&s| s as f64).collect(),
        mx.levels.iter().map(Vec::len).collect(),
        Vec::new(),
    )
}

/// Per-cell difference of log-log slopes between two partition tables over
/// their common scale span.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeComparison {
    order_grid: OrderGrid,
    left_slopes: Vec<f64>,
    right_slopes: Vec<f64>,
    differences: Vec<f64>,
    max_abs_difference: f64,
}

impl SlopeComparison {
    pub fn order_grid(&self) -> &OrderGrid {
        &self.order_grid
    }

    pub fn left_slopes(&self) -> &[f64] {
        &self.left_slopes
    }

    pub fn right_slopes(&self) -> &[f64] {
        &self.right_slopes
    }

    pub fn differences(&self) -> &[f64] {
        &self.differences
    }

    pub fn max_abs_difference(&self) -> f64 {
        self.max_abs_difference
    }
}

/// Compares scaling slopes of a (rescaled) wavelet table against a
/// box-counting table on the overlap of their scale spans.
pub fn compare_wt_pf(
    chi_wt_scaled: &PartitionTable,
    chi_pf: &PartitionTable,
) -> Result<SlopeComparison> {
    if chi_wt_scaled.order_grid() != chi_pf.order_grid() {
        return Err(Error::ShapeMismatch {
            context: "partition tables use different order grids".to_string(),
        });
    }
    let lo = chi_wt_scaled.scales()[0].max(chi_pf.scales()[0]);
    let hi = chi_wt_scaled
        .scales()
        .last()
        .unwrap()
        .min(*chi_pf.scales().last().unwrap());
    let slopes = |table: &PartitionTable| -> Result<Vec<f64>> {
        let idx: Vec<usize> = table
            .scales()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= lo * (1.0 - 1e-12) && s <= hi * (1.0 + 1e-12))
            .map(|(j, _)| j)
            .collect();
        if idx.len() < 2 {
            return Err(Error::NoCommonScales);
        }
        let lns: Vec<f64> = idx.iter().map(|&j| table.scales()[j].ln()).collect();
        let grid = table.order_grid();
        let mut out = Vec::with_capacity(grid.num_cells());
        for ip in 0..grid.p_values().len() {
            for iq in 0..grid.q_values().len() {
                let y: Vec<f64> = idx.iter().map(|&j| table.chi(ip, iq, j).ln()).collect();
                out.push(fit_line(&lns, &y).slope);
            }
        }
        Ok(out)
    };
    let left = slopes(chi_wt_scaled)?;
    let right = slopes(chi_pf)?;
    let differences: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a - b).collect();
    let max_abs = differences.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(SlopeComparison {
        order_grid: chi_wt_scaled.order_grid().clone(),
        left_slopes: left,
        right_slopes: right,
        differences,
        max_abs_difference: max_abs,
    })
}
