//! Surrogate pair construction (shuffles, co-shuffles, circular shifts),
//! shift scans, and ensemble width distributions with bootstrap p-values.

use crate::engine::{
    default_diagonal_orders, diagonal_analysis_opts, EngineOptions,
};
use crate::error::{Error, Result};
use crate::wavelet::{cwt, KernelSpec, ScaleGrid, WaveletField};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The six surrogate constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurrogateKind {
    /// Shuffle x, keep y: destroys x's auto-correlation and the cross
    /// correlation.
    ShuffleX,
    /// Keep x, shuffle y.
    ShuffleY,
    /// One shared permutation applied to both series: zero-lag pairs stay
    /// bound, everything else is destroyed.
    CoShuffle,
    /// Two independent permutations: all correlations destroyed.
    IndependentShuffles,
    /// x leads: y is rotated back by the shift so x(t) pairs with
    /// y(t + shift); auto-correlations survive intact.
    XLeads,
    /// y leads: x is rotated back by the shift.
    YLeads,
}

impl SurrogateKind {
    pub fn is_lead(&self) -> bool {
        matches!(self, SurrogateKind::XLeads | SurrogateKind::YLeads)
    }

    /// Conventional short label (Srg 1-4, Lead 1-2).
    pub fn label(&self) -> &'static str {
        match self {
            SurrogateKind::ShuffleX => "srg1",
            SurrogateKind::ShuffleY => "srg2",
            SurrogateKind::CoShuffle => "srg3",
            SurrogateKind::IndependentShuffles => "srg4",
            SurrogateKind::XLeads => "lead1",
            SurrogateKind::YLeads => "lead2",
        }
    }
}

/// splitmix-style stream: the i-th sub-seed of a master seed, addressable
/// by index so replicates can run in any order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shuffled(series: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = series.to_vec();
    out.shuffle(rng);
    out
}

fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

fn rotated_back(series: &[f64], shift: usize) -> Vec<f64> {
    let mut out = series.to_vec();
    out.rotate_left(shift);
    out
}

/// Builds one surrogate pair. Shuffle kinds draw from the seed; lead kinds
/// rotate circularly by `n_shift` (0 returns the pair unchanged).
pub fn make_surrogate(
    x: &[f64],
    y: &[f64],
    kind: SurrogateKind,
    n_shift: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            context: format!("surrogate inputs: lengths {} vs {}", x.len(), y.len()),
        });
    }
    if kind.is_lead() && n_shift >= x.len() {
        return Err(Error::ShiftOutOfRange {
            shift: n_shift,
            length: x.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        SurrogateKind::ShuffleX => (shuffled(x, &mut rng), y.to_vec()),
        SurrogateKind::ShuffleY => (x.to_vec(), shuffled(y, &mut rng)),
        SurrogateKind::CoShuffle => {
            let perm = permutation(x.len(), &mut rng);
            (
                perm.iter().map(|&i| x[i]).collect(),
                perm.iter().map(|&i| y[i]).collect(),
            )
        }
        SurrogateKind::IndependentShuffles => {
            let sx = shuffled(x, &mut rng);
            let sy = shuffled(y, &mut rng);
            (sx, sy)
        }
        SurrogateKind::XLeads => (x.to_vec(), rotated_back(y, n_shift)),
        SurrogateKind::YLeads => (rotated_back(x, n_shift), y.to_vec()),
    })
}

/// Everything needed to turn a raw pair into a diagonal spectrum width.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthConfig {
    pub kernel: KernelSpec,
    pub scale_grid: ScaleGrid,
    pub q_values: Vec<f64>,
    /// Scaling range for the slope fits; defaults to the full grid span.
    pub scaling_range: (f64, f64),
    pub options: EngineOptions,
}

impl WidthConfig {
    /// Defaults for a series of length n: Mexican hat kernel, 30 scales in
    /// [4, n/8], diagonal orders [0, 10] step 0.25, full-range fit.
    pub fn default_for(n: usize) -> Result<Self> {
        let scale_grid = ScaleGrid::default_for(n)?;
        let scaling_range = (scale_grid.min(), scale_grid.max());
        Ok(Self {
            kernel: KernelSpec::mexican_hat(),
            scale_grid,
            q_values: default_diagonal_orders(),
            scaling_range,
            options: EngineOptions::default(),
        })
    }

    fn width_from_fields(&self, wx: &WaveletField, wy: &WaveletField) -> Result<f64> {
        Ok(diagonal_analysis_opts(
            wx,
            wy,
            &self.q_values,
            self.scaling_range.0,
            self.scaling_range.1,
            &self.options,
        )?
        .width())
    }
}

/// Diagonal spectrum width of a pair under the given analysis config.
pub fn pair_width(x: &[f64], y: &[f64], cfg: &WidthConfig) -> Result<f64> {
    let wx = cwt(x, &cfg.scale_grid, &cfg.kernel)?;
    let wy = cwt(y, &cfg.scale_grid, &cfg.kernel)?;
    cfg.width_from_fields(&wx, &wy)
}

/// Widths of the pair under relative circular shifts, both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScan {
    pub shifts: Vec<usize>,
    pub width_x_leads: Vec<f64>,
    pub width_y_leads: Vec<f64>,
    pub width_original: f64,
}

/// Shifts the two series relative to each other and records the diagonal
/// width per shift and direction.
pub fn shift_scan(x: &[f64], y: &[f64], shifts: &[usize], cfg: &WidthConfig) -> Result<ShiftScan> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            context: format!("shift scan inputs: lengths {} vs {}", x.len(), y.len()),
        });
    }
    let n = x.len();
    if let Some(&bad) = shifts.iter().find(|&&s| s >= n / 10) {
        return Err(Error::ShiftOutOfRange {
            shift: bad,
            length: n,
        });
    }
    let wx = cwt(x, &cfg.scale_grid, &cfg.kernel)?;
    let wy = cwt(y, &cfg.scale_grid, &cfg.kernel)?;
    let width_original = cfg.width_from_fields(&wx, &wy)?;

    let results: Result<Vec<(f64, f64)>> = shifts
        .par_iter()
        .map(|&shift| {
            let wy_shifted = cwt(&rotated_back(y, shift), &cfg.scale_grid, &cfg.kernel)?;
            let wx_shifted = cwt(&rotated_back(x, shift), &cfg.scale_grid, &cfg.kernel)?;
            Ok((
                cfg.width_from_fields(&wx, &wy_shifted)?,
                cfg.width_from_fields(&wx_shifted, &wy)?,
            ))
        })
        .collect();
    let results = results?;
    Ok(ShiftScan {
        shifts: shifts.to_vec(),
        width_x_leads: results.iter().map(|r| r.0).collect(),
        width_y_leads: results.iter().map(|r| r.1).collect(),
        width_original,
    })
}

/// Width distribution of a surrogate ensemble with summary statistics and
/// a one-sided bootstrap p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateReport {
    pub kind: SurrogateKind,
    pub count: usize,
    /// Replicate widths, sorted ascending.
    pub widths: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub observed_width: f64,
    /// One-sided: (1 + #{width >= observed}) / (1 + count).
    pub p_value: f64,
}

/// First shift used by lead-kind ensembles; replicate i uses
/// `LEAD_SHIFT_BASE + i`.
pub const LEAD_SHIFT_BASE: usize = 101;

/// Runs `count` surrogate replicates and summarizes their widths.
///
/// Replicate seeds are derived from the master seed by index, so the
/// ensemble is reproducible and insensitive to execution order. Lead kinds
/// use shifts LEAD_SHIFT_BASE + 0 .. LEAD_SHIFT_BASE + count - 1.
pub fn surrogate_ensemble(
    x: &[f64],
    y: &[f64],
    kind: SurrogateKind,
    count: usize,
    seed: u64,
    cfg: &WidthConfig,
) -> Result<SurrogateReport> {
    if count < 50 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: format!("ensemble size {count} is below the minimum of 50"),
        });
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            context: format!("ensemble inputs: lengths {} vs {}", x.len(), y.len()),
        });
    }
    if kind.is_lead() && LEAD_SHIFT_BASE + count > x.len() {
        return Err(Error::ShiftOutOfRange {
            shift: LEAD_SHIFT_BASE + count - 1,
            length: x.len(),
        });
    }

    let wx = cwt(x, &cfg.scale_grid, &cfg.kernel)?;
    let wy = cwt(y, &cfg.scale_grid, &cfg.kernel)?;
    let observed_width = cfg.width_from_fields(&wx, &wy)?;

    // One side of the pair survives unchanged for four of the six kinds;
    // reuse its transform across all replicates.
    let keep_x = matches!(kind, SurrogateKind::ShuffleY | SurrogateKind::XLeads);
    let keep_y = matches!(kind, SurrogateKind::ShuffleX | SurrogateKind::YLeads);

    let mut widths: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let n_shift = LEAD_SHIFT_BASE + i;
            let (sx, sy) = make_surrogate(x, y, kind, n_shift, derive_seed(seed, i as u64))?;
            let fx = if keep_x {
                wx.clone()
            } else {
                cwt(&sx, &cfg.scale_grid, &cfg.kernel)?
            };
            let fy = if keep_y {
                wy.clone()
            } else {
                cwt(&sy, &cfg.scale_grid, &cfg.kernel)?
            };
            cfg.width_from_fields(&fx, &fy)
        })
        .collect::<Result<Vec<f64>>>()?;
    widths.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mean = widths.iter().sum::<f64>() / count as f64;
    let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (count as f64 - 1.0);
    let std = var.sqrt();
    let exceed = widths.iter().filter(|&&w| w >= observed_width).count();
    Ok(SurrogateReport {
        kind,
        count,
        widths,
        mean,
        std,
        std_error: std / (count as f64).sqrt(),
        observed_width,
        p_value: (1.0 + exceed as f64) / (1.0 + count as f64),
    })
}
