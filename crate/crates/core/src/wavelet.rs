//! Gaussian-derivative wavelet kernels and the continuous wavelet transform.
//!
//! The transform of a series x at scale s and position i is
//! `w(s, i) = (1/s) * sum_t x(t) psi((t - i)/s)` with the series zero-padded
//! outside its support and the kernel truncated to `|x| <= L` scale units.

use crate::error::{Error, Result};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Default truncation half-width, in scale units. Wide enough that the
/// truncated kernel keeps its vanishing moments to ~1e-13.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;

/// Shortest series the transform accepts.
pub const MIN_SERIES_LEN: usize = 64;

/// Work threshold (series length times kernel support) above which a scale
/// row is evaluated by FFT convolution instead of direct summation.
const FFT_WORK_THRESHOLD: f64 = 1e6;

/// Analyzing kernel: derivative `order` of a Gaussian, truncated to
/// `|x| <= half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    order: u32,
    half_width: f64,
}

impl KernelSpec {
    pub fn new(order: u32, half_width: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: "kernel order must be at least 1".to_string(),
            });
        }
        if !(half_width >= 4.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "half_width",
                reason: format!("{half_width} must be a real >= 4"),
            });
        }
        Ok(Self { order, half_width })
    }

    /// Second Gaussian derivative with the default truncation.
    pub fn mexican_hat() -> Self {
        Self {
            order: 2,
            half_width: DEFAULT_HALF_WIDTH,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::mexican_hat()
    }
}

/// Evaluates the kernel at x: the m-th derivative of exp(-x^2/2), exactly 0
/// beyond the truncation half-width.
///
/// Uses d^m/dx^m exp(-x^2/2) = (-1)^m He_m(x) exp(-x^2/2) with the
/// probabilists' Hermite recurrence.
pub fn kernel_value(spec: &KernelSpec, x: f64) -> f64 {
    if x.abs() > spec.half_width {
        return 0.0;
    }
    let mut prev = 1.0; // He_0
    let mut cur = x; // He_1
    for j in 1..spec.order {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    let he_m = if spec.order == 0 { prev } else { cur };
    let sign = if spec.order % 2 == 0 { 1.0 } else { -1.0 };
    sign * he_m * (-x * x / 2.0).exp()
}

/// Strictly increasing, logarithmically spaced analysis scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
}

impl ScaleGrid {
    /// `count` scales with constant ratio spanning [s_min, s_max].
    pub fn log_spaced(s_min: f64, s_max: f64, count: usize) -> Result<Self> {
        if !(s_min > 0.0 && s_max > s_min) {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: format!("invalid span [{s_min}, {s_max}]"),
            });
        }
        if count < 2 {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: "need at least two scales".to_string(),
            });
        }
        let (a, b) = (s_min.ln(), s_max.ln());
        let scales = (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect();
        Ok(Self { scales })
    }

    /// Default grid for a series of length n: 30 scales in [4, n/8].
    pub fn default_for(n: usize) -> Result<Self> {
        Self::log_spaced(4.0, n as f64 / 8.0, 30)
    }

    /// Wraps an explicit scale list, checking order and log-spacing.
    pub fn from_scales(scales: Vec<f64>) -> Result<Self> {
        if scales.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: "need at least two scales".to_string(),
            });
        }
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: "scales must be positive reals".to_string(),
            });
        }
        let ratio = scales[1] / scales[0];
        for w in scales.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter {
                    name: "scales",
                    reason: "scales must be strictly increasing".to_string(),
                });
            }
            let r = w[1] / w[0];
            if (r / ratio - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter {
                    name: "scales",
                    reason: "scales must be logarithmically spaced".to_string(),
                });
            }
        }
        Ok(Self { scales })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.scales[0]
    }

    pub fn max(&self) -> f64 {
        *self.scales.last().unwrap()
    }

    /// Checks the grid against a series length: scales live in [4, n/8].
    pub fn validate_for_len(&self, n: usize) -> Result<()> {
        if self.min() < 4.0 || self.max() > n as f64 / 8.0 {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: format!(
                    "span [{}, {}] outside [4, {}] for series of length {n}",
                    self.min(),
                    self.max(),
                    n as f64 / 8.0
                ),
            });
        }
        Ok(())
    }
}

/// Wavelet coefficients of one series over a scale grid, one full row of
/// positions per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletField {
    coefficients: Vec<Vec<f64>>,
    grid: ScaleGrid,
    series_len: usize,
    boundary_widths: Vec<usize>,
}

impl WaveletField {
    pub fn row(&self, scale_idx: usize) -> &[f64] {
        &self.coefficients[scale_idx]
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn num_scales(&self) -> usize {
        self.coefficients.len()
    }

    /// Number of positions at either edge of a row whose kernel support
    /// reaches past the series boundary.
    pub fn boundary_width(&self, scale_idx: usize) -> usize {
        self.boundary_widths[scale_idx]
    }
}

/// Continuous wavelet transform of a series over a scale grid.
///
/// Each scale row is evaluated independently (in parallel) by direct
/// summation or FFT convolution depending on the work involved; the two
/// paths agree to rounding.
pub fn cwt(series: &[f64], grid: &ScaleGrid, spec: &KernelSpec) -> Result<WaveletField> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            required: MIN_SERIES_LEN,
            actual: n,
        });
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    grid.validate_for_len(n)?;

    let coefficients: Vec<Vec<f64>> = grid
        .scales()
        .par_iter()
        .map(|&s| transform_row(series, s, spec))
        .collect();
    let boundary_widths = grid
        .scales()
        .iter()
        .map(|&s| ((spec.half_width * s).ceil() as usize).min(n))
        .collect();
    Ok(WaveletField {
        coefficients,
        grid: grid.clone(),
        series_len: n,
        boundary_widths,
    })
}

fn sampled_kernel(s: f64, spec: &KernelSpec) -> (Vec<f64>, usize) {
    let half = (spec.half_width * s).floor() as usize;
    let kernel = (0..=2 * half)
        .map(|idx| kernel_value(spec, (idx as f64 - half as f64) / s))
        .collect();
    (kernel, half)
}

fn transform_row(series: &[f64], s: f64, spec: &KernelSpec) -> Vec<f64> {
    let (kernel, half) = sampled_kernel(s, spec);
    let work = series.len() as f64 * kernel.len() as f64;
    if work > FFT_WORK_THRESHOLD {
        fft_row(series, s, &kernel, half)
    } else {
        direct_row(series, s, &kernel, half)
    }
}

fn direct_row(series: &[f64], s: f64, kernel: &[f64], half: usize) -> Vec<f64> {
    let n = series.len();
    let inv_s = 1.0 / s;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let mut acc = 0.0;
            for t in lo..=hi {
                acc += series[t] * kernel[t + half - i];
            }
            acc * inv_s
        })
        .collect()
}

fn fft_row(series: &[f64], s: f64, kernel: &[f64], half: usize) -> Vec<f64> {
    let n = series.len();
    let m = n + kernel.len() - 1;
    let size = m.next_power_of_two();

    let (fft, ifft) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(size), p.plan_fft_inverse(size))
    });

    let mut fx: Vec<Complex<f64>> = Vec::with_capacity(size);
    fx.extend(series.iter().map(|&v| Complex::new(v, 0.0)));
    fx.resize(size, Complex::new(0.0, 0.0));
    // Reversed kernel turns the correlation into a plain convolution.
    let mut fk: Vec<Complex<f64>> = Vec::with_capacity(size);
    fk.extend(kernel.iter().rev().map(|&v| Complex::new(v, 0.0)));
    fk.resize(size, Complex::new(0.0, 0.0));

    fft.process(&mut fx);
    fft.process(&mut fk);
    for (a, b) in fx.iter_mut().zip(&fk) {
        *a *= *b;
    }
    ifft.process(&mut fx);

    let scale = 1.0 / (size as f64 * s);
    fx[half..half + n].iter().map(|v| v.re * scale).collect()
}
