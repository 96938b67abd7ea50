//! Synthetic inputs: deterministic binomial cascades and exact Gaussian
//! simulation of bivariate fractional Brownian motion.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};

/// Parameters of a deterministic binomial cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    /// Mass fraction sent to the left child at each refinement.
    pub p_z: f64,
    /// Number of dyadic refinements; output length is `2^iterations`.
    pub iterations: u32,
}

/// Largest supported refinement depth (2^26 values, ~0.5 GiB as f64).
pub const MAX_CASCADE_ITERATIONS: u32 = 26;

/// Generates the binomial measure by iterated mass splitting, starting from
/// a single unit of mass.
pub fn gen_binomial(spec: &BinomialSpec) -> Result<Vec<f64>> {
    if !(spec.p_z > 0.0 && spec.p_z < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p_z",
            reason: format!("{} is outside (0, 1)", spec.p_z),
        });
    }
    if spec.iterations == 0 {
        return Err(Error::InvalidParameter {
            name: "iterations",
            reason: "need at least one refinement".to_string(),
        });
    }
    if spec.iterations > MAX_CASCADE_ITERATIONS {
        return Err(Error::KTooLarge {
            k: spec.iterations,
            max: MAX_CASCADE_ITERATIONS,
        });
    }
    let mut measure = vec![1.0];
    for _ in 0..spec.iterations {
        let mut next = Vec::with_capacity(measure.len() * 2);
        for &m in &measure {
            next.push(spec.p_z * m);
            next.push((1.0 - spec.p_z) * m);
        }
        measure = next;
    }
    Ok(measure)
}

/// Sample Pearson correlation of two equal-length series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            context: format!("pearson: lengths {} vs {}", x.len(), y.len()),
        });
    }
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            required: 2,
            actual: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Auto-covariance of fractional Gaussian noise at integer lag.
pub fn fgn_auto_cov(lag: i64, h: f64, sigma: f64) -> f64 {
    let t = lag.unsigned_abs() as f64;
    0.5 * sigma
        * sigma
        * ((t + 1.0).powf(2.0 * h) + (t - 1.0).abs().powf(2.0 * h) - 2.0 * t.powf(2.0 * h))
}

/// Cross-covariance of the two increment streams at integer lag
/// (time-reversible case: even in the lag).
pub fn fgn_cross_cov(lag: i64, h_xx: f64, h_yy: f64, rho: f64, sigma_x: f64, sigma_y: f64) -> f64 {
    let t = lag.unsigned_abs() as f64;
    let hs = h_xx + h_yy;
    0.5 * rho
        * sigma_x
        * sigma_y
        * ((t + 1.0).powf(hs) + (t - 1.0).abs().powf(hs) - 2.0 * t.powf(hs))
}

/// Parameters of a bivariate fractional Brownian motion realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfbmSpec {
    pub h_xx: f64,
    pub h_yy: f64,
    /// Instantaneous cross-correlation of the two components.
    pub rho: f64,
    /// Path length (number of increments generated).
    pub len: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub seed: u64,
}

impl BfbmSpec {
    pub fn new(h_xx: f64, h_yy: f64, rho: f64, len: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            h_xx,
            h_yy,
            rho,
            len,
            sigma_x: 1.0,
            sigma_y: 1.0,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for (name, h) in [("h_xx", self.h_xx), ("h_yy", self.h_yy)] {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{h} is outside (0, 1)"),
                });
            }
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("{} is outside (-1, 1)", self.rho),
            });
        }
        if self.len < 2 {
            return Err(Error::SeriesTooShort {
                required: 2,
                actual: self.len,
            });
        }
        for (name, s) in [("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{s} is not a positive real"),
                });
            }
        }
        Ok(())
    }
}

/// Cutoff below which the dense Cholesky route is used by default.
const CHOLESKY_MAX_LEN: usize = 2048;

/// Generates a bFBM realization (paths, i.e. cumulative sums of the
/// increment pair). Deterministic in the spec's seed.
pub fn gen_bfbm(spec: &BfbmSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let (gx, gy) = gen_bfbm_increments(spec)?;
    Ok((cumsum(&gx), cumsum(&gy)))
}

/// Generates the stationary increment pair of a bFBM realization.
pub fn gen_bfbm_increments(spec: &BfbmSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.len <= CHOLESKY_MAX_LEN {
        Ok(CholeskySampler::new(spec)?.sample(spec.seed))
    } else {
        Ok(CirculantSampler::new(spec)?.sample(spec.seed))
    }
}

fn cumsum(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

/// Exact sampler backed by a dense Cholesky factor of the full 2n x 2n
/// increment covariance. Factorization cost is cubic; sampling is cheap, so
/// build once and draw many seeds.
pub struct CholeskySampler {
    factor: DMatrix<f64>,
    len: usize,
}

impl CholeskySampler {
    pub fn new(spec: &BfbmSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.len;
        let cov = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (si, i) = if r < n { (0, r) } else { (1, r - n) };
            let (sj, j) = if c < n { (0, c) } else { (1, c - n) };
            let lag = j as i64 - i as i64;
            match (si, sj) {
                (0, 0) => fgn_auto_cov(lag, spec.h_xx, spec.sigma_x),
                (1, 1) => fgn_auto_cov(lag, spec.h_yy, spec.sigma_y),
                _ => fgn_cross_cov(
                    lag,
                    spec.h_xx,
                    spec.h_yy,
                    spec.rho,
                    spec.sigma_x,
                    spec.sigma_y,
                ),
            }
        });
        let factor = cov
            .cholesky()
            .ok_or(Error::InfeasibleCorrelation { eigenvalue: f64::NAN })?
            .unpack();
        Ok(Self { factor, len: n })
    }

    pub fn sample(&self, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 2 * self.len;
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; m];
        // Lower-triangular multiply.
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.factor.row(r);
            let mut acc = 0.0;
            for c in 0..=r {
                acc += row[c] * z[c];
            }
            *o = acc;
        }
        let y = out.split_off(self.len);
        (out, y)
    }
}

/// Sampler backed by block-circulant embedding of the 2 x 2 increment
/// cross-covariance, with a per-frequency matrix square root.
pub struct CirculantSampler {
    // Entries of the symmetric PSD square root at each frequency.
    b11: Vec<f64>,
    b12: Vec<f64>,
    b22: Vec<f64>,
    embed_len: usize,
    len: usize,
}

impl CirculantSampler {
    pub fn new(spec: &BfbmSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.len;
        let mut m = 1usize;
        while m < 2 * (n - 1) {
            m *= 2;
        }
        // One extra doubling keeps the embedding comfortably inside the PSD
        // cone for the covariances used here.
        m *= 2;

        let signed_lag = |j: usize| -> i64 {
            if j <= m / 2 {
                j as i64
            } else {
                j as i64 - m as i64
            }
        };
        let mut cxx: Vec<Complex<f64>> = Vec::with_capacity(m);
        let mut cyy: Vec<Complex<f64>> = Vec::with_capacity(m);
        let mut cxy: Vec<Complex<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            let lag = signed_lag(j);
            cxx.push(Complex::new(fgn_auto_cov(lag, spec.h_xx, spec.sigma_x), 0.0));
            cyy.push(Complex::new(fgn_auto_cov(lag, spec.h_yy, spec.sigma_y), 0.0));
            cxy.push(Complex::new(
                fgn_cross_cov(lag, spec.h_xx, spec.h_yy, spec.rho, spec.sigma_x, spec.sigma_y),
                0.0,
            ));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut cxx);
        fft.process(&mut cyy);
        fft.process(&mut cxy);

        // The covariance sequences are real and even, so the spectra are
        // real; per frequency we get a symmetric 2x2 matrix to factor.
        let a: Vec<f64> = cxx.iter().map(|v| v.re).collect();
        let b: Vec<f64> = cyy.iter().map(|v| v.re).collect();
        let c: Vec<f64> = cxy.iter().map(|v| v.re).collect();

        let mut eig_max: f64 = 0.0;
        let mut eig_min: f64 = f64::INFINITY;
        let mut eigs = Vec::with_capacity(m);
        for f in 0..m {
            let tr = a[f] + b[f];
            let disc = ((a[f] - b[f]).powi(2) + 4.0 * c[f] * c[f]).sqrt();
            let e1 = 0.5 * (tr + disc);
            let e2 = 0.5 * (tr - disc);
            eig_max = eig_max.max(e1);
            eig_min = eig_min.min(e2);
            eigs.push((e1, e2));
        }
        let tol = 1e-9 * eig_max.max(1.0);
        if eig_min < -tol {
            return Err(Error::InfeasibleCorrelation { eigenvalue: eig_min });
        }

        let mut b11 = vec![0.0; m];
        let mut b12 = vec![0.0; m];
        let mut b22 = vec![0.0; m];
        for f in 0..m {
            let (e1, e2) = eigs[f];
            let (s1, s2) = (e1.max(0.0).sqrt(), e2.max(0.0).sqrt());
            if c[f] == 0.0 {
                // Decoupled components at this frequency.
                b11[f] = a[f].max(0.0).sqrt();
                b22[f] = b[f].max(0.0).sqrt();
            } else {
                let (mut vx, mut vy) = (c[f], e1 - a[f]);
                let nrm = vx.hypot(vy);
                vx /= nrm;
                vy /= nrm;
                b11[f] = s1 * vx * vx + s2 * vy * vy;
                b12[f] = (s1 - s2) * vx * vy;
                b22[f] = s1 * vy * vy + s2 * vx * vx;
            }
        }
        Ok(Self {
            b11,
            b12,
            b22,
            embed_len: m,
            len: n,
        })
    }

    pub fn sample(&self, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let m = self.embed_len;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let mut w1: Vec<Complex<f64>> = Vec::with_capacity(m);
        let mut w2: Vec<Complex<f64>> = Vec::with_capacity(m);
        for f in 0..m {
            let z1 = Complex::new(
                half * rng.sample::<f64, _>(StandardNormal),
                half * rng.sample::<f64, _>(StandardNormal),
            );
            let z2 = Complex::new(
                half * rng.sample::<f64, _>(StandardNormal),
                half * rng.sample::<f64, _>(StandardNormal),
            );
            w1.push(self.b11[f] * z1 + self.b12[f] * z2);
            w2.push(self.b12[f] * z1 + self.b22[f] * z2);
        }
        let mut planner = FftPlanner::new();
        let ifft = planner.plan_fft_inverse(m);
        ifft.process(&mut w1);
        ifft.process(&mut w2);
        // Inverse transform is unnormalized; the real part of sqrt(2/M) * W
        // has exactly the embedded covariance.
        let scale = (2.0 / m as f64).sqrt();
        let gx = w1[..self.len].iter().map(|v| v.re * scale).collect();
        let gy = w2[..self.len].iter().map(|v| v.re * scale).collect();
        (gx, gy)
    }
}
