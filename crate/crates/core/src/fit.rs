//! Least-squares line and plane fits used by the scaling estimators.

/// Result of a univariate least-squares fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1.0 for an exactly constant response.
    pub r2: f64,
}

/// Ordinary least squares on `(x, y)` pairs.
///
/// The response is shifted by `y[0]` before fitting so that an exactly
/// constant series yields an exactly zero slope, with no rounding residue
/// from the mean. The shift leaves slope and r² unchanged.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len(), "fit_line: mismatched lengths");
    assert!(x.len() >= 2, "fit_line: need at least two points");
    let n = x.len() as f64;
    let y0 = y[0];
    let x_mean = x.iter().sum::<f64>() / n;
    let ys_mean = y.iter().map(|v| v - y0).sum::<f64>() / n;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        let dy = (yi - y0) - ys_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    assert!(sxx > 0.0, "fit_line: degenerate abscissa");

    let slope = sxy / sxx;
    let intercept = (ys_mean - slope * x_mean) + y0;
    let r2 = if syy > 0.0 {
        let explained = slope * sxy;
        (explained / syy).clamp(0.0, 1.0)
    } else {
        // Constant response: the fit reproduces it exactly.
        1.0
    };
    LineFit {
        slope,
        intercept,
        r2,
    }
}

/// Result of a bivariate least-squares fit `z = a * p + b * q + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub coeff_p: f64,
    pub coeff_q: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `z` on the two regressors plus a constant,
/// solved through the centered 2x2 normal equations.
pub fn fit_plane(p: &[f64], q: &[f64], z: &[f64]) -> PlaneFit {
    assert!(p.len() == q.len() && q.len() == z.len(), "fit_plane: mismatched lengths");
    assert!(p.len() >= 3, "fit_plane: need at least three points");
    let n = p.len() as f64;
    let pm = p.iter().sum::<f64>() / n;
    let qm = q.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<f64>() / n;

    let (mut spp, mut sqq, mut spq, mut spz, mut sqz, mut szz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..p.len() {
        let dp = p[i] - pm;
        let dq = q[i] - qm;
        let dz = z[i] - zm;
        spp += dp * dp;
        sqq += dq * dq;
        spq += dp * dq;
        spz += dp * dz;
        sqz += dq * dz;
        szz += dz * dz;
    }
    let det = spp * sqq - spq * spq;
    assert!(det.abs() > 0.0, "fit_plane: collinear regressors");

    let a = (sqq * spz - spq * sqz) / det;
    let b = (spp * sqz - spq * spz) / det;
    let c = zm - a * pm - b * qm;
    let r2 = if szz > 0.0 {
        ((a * spz + b * sqz) / szz).clamp(0.0, 1.0)
    } else {
        1.0
    };
    PlaneFit {
        coeff_p: a,
        coeff_q: b,
        intercept: c,
        r2,
    }
}
