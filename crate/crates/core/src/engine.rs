//! Joint partition functions of two wavelet coefficient fields and the
//! estimators built on them: mass-exponent surfaces, Legendre and direct
//! (canonical) joint spectra, and diagonal spectrum widths.

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::wavelet::WaveletField;
use rayon::prelude::*;

/// Fit-quality threshold below which a cell is flagged (never dropped).
pub const R2_FLAG_THRESHOLD: f64 = 0.95;

/// Engine knobs shared by the partition-based estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Coefficient magnitudes below this are lifted to it before powers and
    /// logarithms are taken.
    pub coefficient_floor: f64,
    /// Restrict position sums to indices farther than the kernel support
    /// from either edge.
    pub exclude_boundary: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            coefficient_floor: 1e-300,
            exclude_boundary: false,
        }
    }
}

/// Fraction of floored positions at one scale above which a data-quality
/// warning is recorded.
const FLOOR_WARN_FRACTION: f64 = 1e-3;

/// Moment orders (p along one axis, q along the other), nonnegative and
/// uniformly stepped with both axes anchored at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderGrid {
    p_values: Vec<f64>,
    q_values: Vec<f64>,
}

impl OrderGrid {
    pub fn new(p_values: Vec<f64>, q_values: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("p_values", &p_values), ("q_values", &q_values)] {
            Self::check_axis(name, axis)?;
        }
        Ok(Self { p_values, q_values })
    }

    fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
        if axis.len() < 2 {
            return Err(Error::InvalidParameter {
                name,
                reason: "need at least two orders".to_string(),
            });
        }
        if axis[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: "axis must start at 0".to_string(),
            });
        }
        let step = axis[1] - axis[0];
        if step <= 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: "axis must be strictly increasing".to_string(),
            });
        }
        for w in axis.windows(2) {
            if ((w[1] - w[0]) / step - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "axis must be uniformly stepped".to_string(),
                });
            }
        }
        Ok(())
    }

    /// `[0, max]` with the given step on both axes.
    pub fn square(max: f64, step: f64) -> Result<Self> {
        let axis = uniform_axis(max, step)?;
        Self::new(axis.clone(), axis)
    }

    /// Default surface grid: both orders in [0, 10], step 0.5.
    pub fn default_surface() -> Self {
        Self::square(10.0, 0.5).expect("default grid is valid")
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn p_step(&self) -> f64 {
        self.p_values[1] - self.p_values[0]
    }

    pub fn q_step(&self) -> f64 {
        self.q_values[1] - self.q_values[0]
    }

    pub fn num_cells(&self) -> usize {
        self.p_values.len() * self.q_values.len()
    }

    fn cell(&self, ip: usize, iq: usize) -> usize {
        ip * self.q_values.len() + iq
    }
}

/// Diagonal order list used by spectrum-width analyses: [0, 10], step 0.25.
pub fn default_diagonal_orders() -> Vec<f64> {
    uniform_axis(10.0, 0.25).expect("default diagonal axis is valid")
}

fn uniform_axis(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max >= step) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("cannot span [0, {max}] with step {step}"),
        });
    }
    let count = (max / step).round() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

/// Per-scale logs of floored coefficient magnitudes for one field, with the
/// position window actually summed over.
struct LogField {
    rows: Vec<Vec<f64>>,
    floored: Vec<usize>,
}

fn log_abs_field(field: &WaveletField, opts: &EngineOptions) -> Result<LogField> {
    let n = field.series_len();
    let mut rows = Vec::with_capacity(field.num_scales());
    let mut floored = Vec::with_capacity(field.num_scales());
    for j in 0..field.num_scales() {
        let (lo, hi) = if opts.exclude_boundary {
            let b = field.boundary_width(j);
            if 2 * b >= n {
                return Err(Error::InvalidParameter {
                    name: "exclude_boundary",
                    reason: format!(
                        "no interior positions at scale {}",
                        field.grid().scales()[j]
                    ),
                });
            }
            (b, n - b)
        } else {
            (0, n)
        };
        let mut max_abs = 0.0f64;
        let mut count = 0usize;
        let row: Vec<f64> = field.row(j)[lo..hi]
            .iter()
            .map(|&w| {
                let a = w.abs();
                max_abs = max_abs.max(a);
                if a < opts.coefficient_floor {
                    count += 1;
                    opts.coefficient_floor.ln()
                } else {
                    a.ln()
                }
            })
            .collect();
        if max_abs == 0.0 {
            return Err(Error::DegenerateField {
                scale: field.grid().scales()[j],
            });
        }
        rows.push(row);
        floored.push(count);
    }
    Ok(LogField { rows, floored })
}

/// Joint partition values over (p, q, scale).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    chi: Vec<f64>,
    order_grid: OrderGrid,
    scales: Vec<f64>,
    positions_per_scale: Vec<usize>,
    warnings: Vec<String>,
}

impl PartitionTable {
    pub fn chi(&self, ip: usize, iq: usize, js: usize) -> f64 {
        self.chi[self.order_grid.cell(ip, iq) * self.scales.len() + js]
    }

    pub fn order_grid(&self) -> &OrderGrid {
        &self.order_grid
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Number of positions (or boxes) summed at each scale.
    pub fn positions_per_scale(&self) -> &[usize] {
        &self.positions_per_scale
    }

    /// Data-quality notes collected while the table was built.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Assembles a table from raw values; used by the box-counting side.
    pub(crate) fn from_parts(
        chi: Vec<f64>,
        order_grid: OrderGrid,
        scales: Vec<f64>,
        positions_per_scale: Vec<usize>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        if chi.len() != order_grid.num_cells() * scales.len() {
            return Err(Error::ShapeMismatch {
                context: "partition table size".to_string(),
            });
        }
        if let Some(bad) = chi.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Numerical {
                context: format!("partition value {bad} is not a positive real"),
            });
        }
        Ok(Self {
            chi,
            order_grid,
            scales,
            positions_per_scale,
            warnings,
        })
    }
}

fn check_compatible(wx: &WaveletField, wy: &WaveletField) -> Result<()> {
    if wx.grid() != wy.grid() || wx.series_len() != wy.series_len() {
        return Err(Error::ShapeMismatch {
            context: "wavelet fields differ in scale grid or length".to_string(),
        });
    }
    Ok(())
}

fn floor_warnings(tag: &str, lf: &LogField, scales: &[f64]) -> Vec<String> {
    let mut out = Vec::new();
    for (j, &count) in lf.floored.iter().enumerate() {
        let total = lf.rows[j].len();
        if count as f64 > FLOOR_WARN_FRACTION * total as f64 {
            out.push(format!(
                "{tag}: {count} of {total} coefficients floored at scale {}",
                scales[j]
            ));
        }
    }
    out
}

/// Joint partition function with default options.
pub fn joint_partition(
    wx: &WaveletField,
    wy: &WaveletField,
    grid: &OrderGrid,
) -> Result<PartitionTable> {
    joint_partition_opts(wx, wy, grid, &EngineOptions::default())
}

/// chi(p, q, s) = sum_i |w_x(s,i)|^{p/2} |w_y(s,i)|^{q/2}.
pub fn joint_partition_opts(
    wx: &WaveletField,
    wy: &WaveletField,
    grid: &OrderGrid,
    opts: &EngineOptions,
) -> Result<PartitionTable> {
    check_compatible(wx, wy)?;
    let lx = log_abs_field(wx, opts)?;
    let ly = log_abs_field(wy, opts)?;
    let scales: Vec<f64> = wx.grid().scales().to_vec();
    let s_len = scales.len();

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
                    let (rx, ry) = (&lx.rows[js], &ly.rows[js]);
                    let mut acc = 0.0;
                    for i in 0..rx.len() {
                        acc += (hp * rx[i] + hq * ry[i]).exp();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let chi: Vec<f64> = chunks.into_iter().flatten().collect();

    let mut warnings = floor_warnings("x", &lx, &scales);
    warnings.extend(floor_warnings("y", &ly, &scales));
    PartitionTable::from_parts(
        chi,
        grid.clone(),
        scales,
        lx.rows.iter().map(Vec::len).collect(),
        warnings,
    )
}

/// Rescales a wavelet partition table by s^{p/2 + q/2 - 1} so it can be
/// overlaid on a box-counting table.
pub fn scaled_partition_for_comparison(table: &PartitionTable) -> Result<PartitionTable> {
    let s_len = table.scales.len();
    let q_len = table.order_grid.q_values().len();
    let mut chi = Vec::with_capacity(table.chi.len());
    for (cell, value) in table.chi.iter().enumerate() {
        let js = cell % s_len;
        let iq = (cell / s_len) % q_len;
        let ip = cell / (s_len * q_len);
        let p = table.order_grid.p_values()[ip];
        let q = table.order_grid.q_values()[iq];
        chi.push(value * table.scales[js].powf(p / 2.0 + q / 2.0 - 1.0));
    }
    PartitionTable::from_parts(
        chi,
        table.order_grid.clone(),
        table.scales.clone(),
        table.positions_per_scale.clone(),
        table.warnings.clone(),
    )
}

/// Indices of scales inside [s_lo, s_hi], inclusive up to rounding.
fn range_mask(scales: &[f64], s_lo: f64, s_hi: f64, required: usize) -> Result<Vec<usize>> {
    let idx: Vec<usize> = scales
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= s_lo * (1.0 - 1e-12) && s <= s_hi * (1.0 + 1e-12))
        .map(|(j, _)| j)
        .collect();
    if idx.len() < required {
        return Err(Error::RangeTooNarrow {
            lo: s_lo,
            hi: s_hi,
            required,
            actual: idx.len(),
        });
    }
    Ok(idx)
}

/// Joint mass exponents fitted per (p, q) cell, with fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct MassExponentSurface {
    t: Vec<f64>,
    r2: Vec<f64>,
    order_grid: OrderGrid,
    scaling_range: (f64, f64),
}

impl MassExponentSurface {
    pub fn t(&self, ip: usize, iq: usize) -> f64 {
        self.t[self.order_grid.cell(ip, iq)]
    }

    pub fn r2(&self, ip: usize, iq: usize) -> f64 {
        self.r2[self.order_grid.cell(ip, iq)]
    }

    pub fn order_grid(&self) -> &OrderGrid {
        &self.order_grid
    }

    pub fn scaling_range(&self) -> (f64, f64) {
        self.scaling_range
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t
    }

    pub fn r2_values(&self) -> &[f64] {
        &self.r2
    }

    /// Cells whose scaling fit fell below [`R2_FLAG_THRESHOLD`].
    pub fn flagged_cells(&self) -> Vec<(usize, usize)> {
        let q_len = self.order_grid.q_values().len();
        self.r2
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < R2_FLAG_THRESHOLD)
            .map(|(cell, _)| (cell / q_len, cell % q_len))
            .collect()
    }

    /// Builds a surface from explicit values (synthetic inputs, tests).
    pub fn from_values(
        order_grid: OrderGrid,
        t: Vec<f64>,
        scaling_range: (f64, f64),
    ) -> Result<Self> {
        if t.len() != order_grid.num_cells() {
            return Err(Error::ShapeMismatch {
                context: "surface size".to_string(),
            });
        }
        let r2 = vec![1.0; t.len()];
        Ok(Self {
            t,
            r2,
            order_grid,
            scaling_range: (scaling_range.0, scaling_range.1),
        })
    }

    /// Least-squares plane through the surface, `T ~ a p + b q + c`.
    pub fn plane_fit(&self) -> crate::fit::PlaneFit {
        let q_len = self.order_grid.q_values().len();
        let mut ps = Vec::with_capacity(self.t.len());
        let mut qs = Vec::with_capacity(self.t.len());
        for ip in 0..self.order_grid.p_values().len() {
            for iq in 0..q_len {
                ps.push(self.order_grid.p_values()[ip]);
                qs.push(self.order_grid.q_values()[iq]);
            }
        }
        crate::fit::fit_plane(&ps, &qs, &self.t)
    }
}

/// Per-cell regression of ln chi against ln s over the scaling range.
pub fn fit_mass_exponents(
    table: &PartitionTable,
    s_lo: f64,
    s_hi: f64,
) -> Result<MassExponentSurface> {
    let idx = range_mask(&table.scales, s_lo, s_hi, 5)?;
    let lns: Vec<f64> = idx.iter().map(|&j| table.scales[j].ln()).collect();
    let cells = table.order_grid.num_cells();
    let s_len = table.scales.len();
    let fits: Vec<LineFit> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let y: Vec<f64> = idx
                .iter()
                .map(|&j| table.chi[cell * s_len + j].ln())
                .collect();
            fit_line(&lns, &y)
        })
        .collect();
    Ok(MassExponentSurface {
        t: fits.iter().map(|f| f.slope).collect(),
        r2: fits.iter().map(|f| f.r2).collect(),
        order_grid: table.order_grid.clone(),
        scaling_range: (s_lo, s_hi),
    })
}

/// Which estimation route produced a joint spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Legendre,
    Direct,
}

/// Joint singularity strengths and spectrum over an order grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    h_x: Vec<f64>,
    h_y: Vec<f64>,
    d: Vec<f64>,
    order_grid: OrderGrid,
    method: SpectrumMethod,
}

impl JointSpectrum {
    pub fn h_x(&self, ip: usize, iq: usize) -> f64 {
        self.h_x[self.order_grid.cell(ip, iq)]
    }

    pub fn h_y(&self, ip: usize, iq: usize) -> f64 {
        self.h_y[self.order_grid.cell(ip, iq)]
    }

    pub fn d(&self, ip: usize, iq: usize) -> f64 {
        self.d[self.order_grid.cell(ip, iq)]
    }

    pub fn h_x_values(&self) -> &[f64] {
        &self.h_x
    }

    pub fn h_y_values(&self) -> &[f64] {
        &self.h_y
    }

    pub fn d_values(&self) -> &[f64] {
        &self.d
    }

    pub fn order_grid(&self) -> &OrderGrid {
        &self.order_grid
    }

    pub fn method(&self) -> SpectrumMethod {
        self.method
    }
}

/// Double Legendre transform of a mass-exponent surface by finite
/// differences: central in the interior, one-sided at the edges.
pub fn legendre_spectrum(surface: &MassExponentSurface) -> JointSpectrum {
    let grid = surface.order_grid.clone();
    let (np, nq) = (grid.p_values().len(), grid.q_values().len());
    let (dp, dq) = (grid.p_step(), grid.q_step());
    let mut h_x = vec![0.0; np * nq];
    let mut h_y = vec![0.0; np * nq];
    let mut d = vec![0.0; np * nq];
    for ip in 0..np {
        for iq in 0..nq {
            let cell = grid.cell(ip, iq);
            // h = 2 dT/d(order)
            h_x[cell] = if ip == 0 {
                2.0 * (surface.t(1, iq) - surface.t(0, iq)) / dp
            } else if ip == np - 1 {
                2.0 * (surface.t(np - 1, iq) - surface.t(np - 2, iq)) / dp
            } else {
                (surface.t(ip + 1, iq) - surface.t(ip - 1, iq)) / dp
            };
            h_y[cell] = if iq == 0 {
                2.0 * (surface.t(ip, 1) - surface.t(ip, 0)) / dq
            } else if iq == nq - 1 {
                2.0 * (surface.t(ip, nq - 1) - surface.t(ip, nq - 2)) / dq
            } else {
                (surface.t(ip, iq + 1) - surface.t(ip, iq - 1)) / dq
            };
            let p = grid.p_values()[ip];
            let q = grid.q_values()[iq];
            d[cell] = p * h_x[cell] / 2.0 + q * h_y[cell] / 2.0 - surface.t(ip, iq);
        }
    }
    JointSpectrum {
        h_x,
        h_y,
        d,
        order_grid: grid,
        method: SpectrumMethod::Legendre,
    }
}

/// Per-scale sums entering the canonical estimator at one (p, q):
/// the measure-weighted logs of each field and the measure entropy.
fn canonical_sums(
    lx: &[f64],
    ly: &[f64],
    hp: f64,
    hq: f64,
) -> (f64, f64, f64) {
    // Shift by the max exponent so the weights stay in range for any order.
    let mut m = f64::NEG_INFINITY;
    for i in 0..lx.len() {
        m = m.max(hp * lx[i] + hq * ly[i]);
    }
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..lx.len() {
        let arg = hp * lx[i] + hq * ly[i];
        let e = (arg - m).exp();
        s0 += e;
        s1 += e * lx[i];
        s2 += e * ly[i];
        s3 += e * (arg - m);
    }
    (s1 / s0, s2 / s0, s3 / s0 - s0.ln())
}

/// Direct (canonical) estimation of the joint spectrum: regression of the
/// measure-weighted log sums against ln s over the scaling range.
pub fn direct_estimate(
    wx: &WaveletField,
    wy: &WaveletField,
    grid: &OrderGrid,
    s_lo: f64,
    s_hi: f64,
) -> Result<JointSpectrum> {
    direct_estimate_opts(wx, wy, grid, s_lo, s_hi, &EngineOptions::default())
}

pub fn direct_estimate_opts(
    wx: &WaveletField,
    wy: &WaveletField,
    grid: &OrderGrid,
    s_lo: f64,
    s_hi: f64,
    opts: &EngineOptions,
) -> Result<JointSpectrum> {
    check_compatible(wx, wy)?;
    let lx = log_abs_field(wx, opts)?;
    let ly = log_abs_field(wy, opts)?;
    let scales = wx.grid().scales();
    let idx = range_mask(scales, s_lo, s_hi, 5)?;
    let lns: Vec<f64> = idx.iter().map(|&j| scales[j].ln()).collect();

    let cells: Vec<(usize, usize)> = (0..grid.p_values().len())
        .flat_map(|ip| (0..grid.q_values().len()).map(move |iq| (ip, iq)))
        .collect();
    let rows: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&(ip, iq)| {
            let hp = grid.p_values()[ip] / 2.0;
            let hq = grid.q_values()[iq] / 2.0;
            let mut wlx = Vec::with_capacity(idx.len());
            let mut wly = Vec::with_capacity(idx.len());
            let mut ent = Vec::with_capacity(idx.len());
            for &j in &idx {
                let (a, b, c) = canonical_sums(&lx.rows[j], &ly.rows[j], hp, hq);
                wlx.push(a);
                wly.push(b);
                ent.push(c);
            }
            (
                fit_line(&lns, &wlx).slope,
                fit_line(&lns, &wly).slope,
                fit_line(&lns, &ent).slope,
            )
        })
        .collect();
    Ok(JointSpectrum {
        h_x: rows.iter().map(|r| r.0).collect(),
        h_y: rows.iter().map(|r| r.1).collect(),
        d: rows.iter().map(|r| r.2).collect(),
        order_grid: grid.clone(),
        method: SpectrumMethod::Direct,
    })
}

/// Diagonal (p = q) spectrum with its width.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpectrum {
    q_values: Vec<f64>,
    h: Vec<f64>,
    d: Vec<f64>,
    width: f64,
}

impl DiagonalSpectrum {
    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    /// Joint singularity strength h(q) along the diagonal.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Joint spectrum values D(q) along the diagonal.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// max h - min h over the diagonal grid.
    pub fn width(&self) -> f64 {
        self.width
    }
}

/// Runs the p = q slice of the canonical estimator: h from the slope of
/// sum mu ln|w_x w_y|^{1/2}, D from the slope of sum mu ln mu.
pub fn diagonal_analysis(
    wx: &WaveletField,
    wy: &WaveletField,
    q_values: &[f64],
    s_lo: f64,
    s_hi: f64,
) -> Result<DiagonalSpectrum> {
    diagonal_analysis_opts(wx, wy, q_values, s_lo, s_hi, &EngineOptions::default())
}

pub fn diagonal_analysis_opts(
    wx: &WaveletField,
    wy: &WaveletField,
    q_values: &[f64],
    s_lo: f64,
    s_hi: f64,
    opts: &EngineOptions,
) -> Result<DiagonalSpectrum> {
    check_compatible(wx, wy)?;
    if q_values.is_empty() || q_values.iter().any(|q| *q < 0.0 || !q.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "q_values",
            reason: "orders must be nonnegative reals".to_string(),
        });
    }
    let lx = log_abs_field(wx, opts)?;
    let ly = log_abs_field(wy, opts)?;
    let scales = wx.grid().scales();
    let idx = range_mask(scales, s_lo, s_hi, 5)?;
    let lns: Vec<f64> = idx.iter().map(|&j| scales[j].ln()).collect();

    let rows: Vec<(f64, f64)> = q_values
        .par_iter()
        .map(|&q| {
            let hq = q / 2.0;
            let mut joint = Vec::with_capacity(idx.len());
            let mut ent = Vec::with_capacity(idx.len());
            for &j in &idx {
                let (a, b, c) = canonical_sums(&lx.rows[j], &ly.rows[j], hq, hq);
                joint.push(0.5 * (a + b));
                ent.push(c);
            }
            (fit_line(&lns, &joint).slope, fit_line(&lns, &ent).slope)
        })
        .collect();
    let h: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let width = h.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - h.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    Ok(DiagonalSpectrum {
        q_values: q_values.to_vec(),
        h,
        d,
        width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_binomial, BinomialSpec};
    use crate::wavelet::{cwt, KernelSpec, ScaleGrid};
    use approx::assert_relative_eq;

    fn binomial_fields(k: u32) -> (WaveletField, WaveletField) {
        let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: k }).unwrap();
        let y = gen_binomial(&BinomialSpec { p_z: 0.4, iterations: k }).unwrap();
        let grid = ScaleGrid::default_for(x.len()).unwrap();
        let spec = KernelSpec::mexican_hat();
        (
            cwt(&x, &grid, &spec).unwrap(),
            cwt(&y, &grid, &spec).unwrap(),
        )
    }

    #[test]
    fn order_grid_validation() {
        assert!(OrderGrid::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).is_ok());
        assert!(OrderGrid::new(vec![0.5, 1.0], vec![0.0, 1.0]).is_err());
        assert!(OrderGrid::new(vec![0.0, 0.5, 1.2], vec![0.0, 1.0]).is_err());
        let g = OrderGrid::default_surface();
        assert_eq!(g.p_values().len(), 21);
        assert_eq!(g.q_step(), 0.5);
        assert_eq!(default_diagonal_orders().len(), 41);
    }

    #[test]
    fn zeroth_moment_counts_positions() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(2.0, 1.0).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        for js in 0..table.scales().len() {
            assert_eq!(table.chi(0, 0, js), 1024.0);
        }
    }

    #[test]
    fn equal_fields_reduce_to_single_series_partition() {
        let (wx, _) = binomial_fields(10);
        let grid = OrderGrid::square(4.0, 0.5).unwrap();
        let table = joint_partition(&wx, &wx, &grid).unwrap();
        // Independently coded single-series partition sum_i |w|^q at q = p.
        for (iq, &q) in grid.q_values().iter().enumerate() {
            for js in 0..table.scales().len() {
                let single: f64 = wx.row(js)
                    .iter()
                    .map(|w| (q * w.abs().max(1e-300).ln()).exp())
                    .sum();
                assert_eq!(table.chi(iq, iq, js), single, "q={q} js={js}");
            }
        }
    }

    #[test]
    fn fourth_order_cell_is_cross_spectrum_sum() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(4.0, 2.0).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        for js in 0..table.scales().len() {
            let direct: f64 = wx.row(js)
                .iter()
                .zip(wy.row(js))
                .map(|(a, b)| (a.abs() * b.abs()).powi(2))
                .sum();
            assert_relative_eq!(table.chi(2, 2, js), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn partition_is_symmetric_under_swap() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(3.0, 0.5).unwrap();
        let txy = joint_partition(&wx, &wy, &grid).unwrap();
        let tyx = joint_partition(&wy, &wx, &grid).unwrap();
        for ip in 0..grid.p_values().len() {
            for iq in 0..grid.q_values().len() {
                for js in 0..txy.scales().len() {
                    assert_eq!(txy.chi(ip, iq, js), tyx.chi(iq, ip, js));
                }
            }
        }
    }

    #[test]
    fn partition_rejects_mismatched_fields() {
        let (wx, _) = binomial_fields(10);
        let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: 9 }).unwrap();
        let grid9 = ScaleGrid::default_for(x.len()).unwrap();
        let other = cwt(&x, &grid9, &KernelSpec::mexican_hat()).unwrap();
        let grid = OrderGrid::square(2.0, 1.0).unwrap();
        assert!(matches!(
            joint_partition(&wx, &other, &grid),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn mass_exponent_at_origin_is_exactly_zero() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(2.0, 0.5).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        let surface =
            fit_mass_exponents(&table, table.scales()[0], *table.scales().last().unwrap())
                .unwrap();
        assert_eq!(surface.t(0, 0), 0.0);
        assert_eq!(surface.r2(0, 0), 1.0);
    }

    #[test]
    fn narrow_range_is_rejected() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(1.0, 0.5).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        assert!(matches!(
            fit_mass_exponents(&table, 4.0, 5.0),
            Err(Error::RangeTooNarrow { .. })
        ));
    }

    #[test]
    fn binomial_surface_tracks_theory_at_reduced_size() {
        // Same check as the full-size acceptance run, at k = 12 with a
        // correspondingly looser band.
        let (wx, wy) = binomial_fields(12);
        let grid = OrderGrid::square(6.0, 0.5).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        let surface =
            fit_mass_exponents(&table, table.scales()[0], *table.scales().last().unwrap())
                .unwrap();
        let th = crate::theory::BinomialTheory::new(0.3, 0.4).unwrap();
        let mut worst = 0.0f64;
        for (ip, &p) in grid.p_values().iter().enumerate() {
            for (iq, &q) in grid.q_values().iter().enumerate() {
                let expect = th.wavelet_quantities(p, q).t;
                worst = worst.max((surface.t(ip, iq) - expect).abs());
            }
        }
        assert!(worst <= 0.15, "max deviation {worst}");
    }

    #[test]
    fn legendre_of_linear_surface_is_constant() {
        let grid = OrderGrid::square(4.0, 0.5).unwrap();
        let (a, b, c) = (-0.485, -0.268, 0.135);
        let mut t = Vec::new();
        for &p in grid.p_values() {
            for &q in grid.q_values() {
                t.push(a * p + b * q + c);
            }
        }
        let surface = MassExponentSurface::from_values(grid.clone(), t, (4.0, 64.0)).unwrap();
        let spec = legendre_spectrum(&surface);
        for ip in 0..grid.p_values().len() {
            for iq in 0..grid.q_values().len() {
                assert_relative_eq!(spec.h_x(ip, iq), 2.0 * a, max_relative = 1e-10);
                assert_relative_eq!(spec.h_y(ip, iq), 2.0 * b, max_relative = 1e-10);
                assert_relative_eq!(spec.d(ip, iq), -c, max_relative = 1e-9);
            }
        }
        // Means match the values read off the plane coefficients.
        let mean_hx = spec.h_x_values().iter().sum::<f64>() / spec.h_x_values().len() as f64;
        assert_relative_eq!(mean_hx, -0.970, max_relative = 1e-12);
    }

    #[test]
    fn legendre_matches_quadratic_derivatives() {
        let grid = OrderGrid::square(4.0, 0.25).unwrap();
        let (a, b) = (0.05, -0.03);
        let mut t = Vec::new();
        for &p in grid.p_values() {
            for &q in grid.q_values() {
                t.push(a * p * p + b * q * q);
            }
        }
        let surface = MassExponentSurface::from_values(grid.clone(), t, (4.0, 64.0)).unwrap();
        let spec = legendre_spectrum(&surface);
        let step = grid.p_step();
        let tol = 10.0 * step * step;
        for (ip, &p) in grid.p_values().iter().enumerate() {
            for (iq, &q) in grid.q_values().iter().enumerate() {
                // Interior central differences are exact for quadratics; the
                // one-sided edges carry the O(step) error the bound covers.
                assert!((spec.h_x(ip, iq) - 4.0 * a * p).abs() <= tol.max(2.0 * a.abs() * step));
                assert!((spec.h_y(ip, iq) - 4.0 * b * q).abs() <= tol.max(2.0 * b.abs() * step));
            }
        }
    }

    #[test]
    fn direct_normalization_and_origin() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(3.0, 0.5).unwrap();
        let (lo, hi) = (wx.grid().min(), wx.grid().max());
        let spec = direct_estimate(&wx, &wy, &grid, lo, hi).unwrap();
        assert_eq!(spec.method(), SpectrumMethod::Direct);
        // mu at p = q = 0 is uniform; its entropy sum is constant in s, so
        // the fitted D slope is exactly zero.
        assert_eq!(spec.d(0, 0), 0.0);

        // Explicit normalization check at a nontrivial cell.
        let floor = 1e-300f64;
        for js in [0usize, 5, 9] {
            let (p, q) = (2.0, 1.5);
            let terms: Vec<f64> = wx.row(js)
                .iter()
                .zip(wy.row(js))
                .map(|(a, b)| {
                    (p / 2.0 * a.abs().max(floor).ln() + q / 2.0 * b.abs().max(floor).ln()).exp()
                })
                .collect();
            let chi: f64 = terms.iter().sum();
            let total: f64 = terms.iter().map(|t| t / chi).sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn direct_and_legendre_agree_on_diagonal_at_reduced_size() {
        let (wx, wy) = binomial_fields(12);
        let (lo, hi) = (wx.grid().min(), wx.grid().max());
        let grid = OrderGrid::square(10.0, 0.5).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        let surface = fit_mass_exponents(&table, lo, hi).unwrap();
        let leg = legendre_spectrum(&surface);
        let dir = direct_estimate(&wx, &wy, &grid, lo, hi).unwrap();
        for (i, &q) in grid.q_values().iter().enumerate() {
            if q < 1.0 {
                continue;
            }
            let h_leg = 0.5 * (leg.h_x(i, i) + leg.h_y(i, i));
            let h_dir = 0.5 * (dir.h_x(i, i) + dir.h_y(i, i));
            assert!(
                (h_leg - h_dir).abs() <= 0.05,
                "q={q}: legendre {h_leg} direct {h_dir}"
            );
        }
    }

    #[test]
    fn diagonal_width_matches_extremes() {
        let (wx, wy) = binomial_fields(10);
        let (lo, hi) = (wx.grid().min(), wx.grid().max());
        let qs = default_diagonal_orders();
        let diag = diagonal_analysis(&wx, &wy, &qs, lo, hi).unwrap();
        let max = diag.h().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = diag.h().iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(diag.width(), max - min);
        assert!(diag.width() > 0.0);
        assert!(matches!(
            diagonal_analysis(&wx, &wy, &[-1.0], lo, hi),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn scaled_table_shifts_slopes_by_one() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(2.0, 1.0).unwrap();
        let table = joint_partition(&wx, &wy, &grid).unwrap();
        let scaled = scaled_partition_for_comparison(&table).unwrap();
        let n = wx.series_len() as f64;
        for (js, &s) in table.scales().iter().enumerate() {
            // p = q = 0: chi' = n / s.
            assert_relative_eq!(scaled.chi(0, 0, js), n / s, max_relative = 1e-12);
            // p = q = 2: chi' = chi * s.
            assert_relative_eq!(
                scaled.chi(2, 2, js),
                table.chi(2, 2, js) * s,
                max_relative = 1e-12
            );
        }
        let (lo, hi) = (wx.grid().min(), wx.grid().max());
        let t = fit_mass_exponents(&table, lo, hi).unwrap();
        let ts = fit_mass_exponents(&scaled, lo, hi).unwrap();
        assert_relative_eq!(ts.t(2, 2), t.t(2, 2) + 1.0, max_relative = 1e-9);
    }

    #[test]
    fn results_are_deterministic() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(4.0, 0.5).unwrap();
        let (lo, hi) = (wx.grid().min(), wx.grid().max());
        let a = fit_mass_exponents(&joint_partition(&wx, &wy, &grid).unwrap(), lo, hi).unwrap();
        let b = fit_mass_exponents(&joint_partition(&wx, &wy, &grid).unwrap(), lo, hi).unwrap();
        assert_eq!(a.t_values(), b.t_values());
        assert_eq!(a.r2_values(), b.r2_values());
    }

    #[test]
    fn boundary_exclusion_shrinks_the_window() {
        let (wx, wy) = binomial_fields(10);
        let grid = OrderGrid::square(1.0, 0.5).unwrap();
        let opts = EngineOptions {
            exclude_boundary: true,
            ..Default::default()
        };
        // The default grid reaches n/8, where the kernel support swallows
        // the whole row; a shorter grid keeps an interior.
        let sgrid = ScaleGrid::log_spaced(4.0, 16.0, 6).unwrap();
        let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: 10 }).unwrap();
        let y = gen_binomial(&BinomialSpec { p_z: 0.4, iterations: 10 }).unwrap();
        let spec = KernelSpec::mexican_hat();
        let fx = cwt(&x, &sgrid, &spec).unwrap();
        let fy = cwt(&y, &sgrid, &spec).unwrap();
        let table = joint_partition_opts(&fx, &fy, &grid, &opts).unwrap();
        for (js, &s) in table.scales().iter().enumerate() {
            let b = (8.0 * s).ceil() as usize;
            assert_eq!(table.positions_per_scale()[js], 1024 - 2 * b);
            assert_eq!(table.chi(0, 0, js), (1024 - 2 * b) as f64);
        }
        // Excluding everything is an error.
        assert!(matches!(
            joint_partition_opts(&wx, &wy, &grid, &opts),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
