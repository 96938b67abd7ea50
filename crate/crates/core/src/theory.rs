//! Closed-form joint multifractal quantities of dual binomial measures.
//!
//! A binomial measure with weight `p_z` has analytic scaling and mass
//! exponents; a pair of such measures built from the same dyadic refinement
//! has closed-form joint mass exponents, singularity strengths, and a joint
//! spectrum, all functions of a single combined order `Q`. This module also
//! provides the affine mapping between those box-counting quantities and the
//! ones produced by wavelet partition functions.

use crate::error::{Error, Result};
use std::f64::consts::LN_2;

/// ln(p^q + (1-p)^q), factored around the dominant term so large |q| does
/// not underflow.
fn ln_bracket(p: f64, q: f64) -> f64 {
    let a = q * p.ln();
    let b = q * (1.0 - p).ln();
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Weighted mean of ln p and ln (1-p) under weights p^q, (1-p)^q.
fn weighted_log(p: f64, q: f64) -> f64 {
    let a = q * p.ln();
    let b = q * (1.0 - p).ln();
    let m = a.max(b);
    let wa = (a - m).exp();
    let wb = (b - m).exp();
    (wa * p.ln() + wb * (1.0 - p).ln()) / (wa + wb)
}

/// Generalized scaling exponent of a single binomial measure at order `q`.
pub fn scaling_exponent(q: f64, p_z: f64) -> Result<f64> {
    if q == 0.0 {
        return Err(Error::ZeroOrder);
    }
    Ok(1.0 / q - ln_bracket(p_z, q) / LN_2 / q)
}

/// Mass exponent of a single binomial measure at order `q`.
pub fn mass_exponent(q: f64, p_z: f64) -> f64 {
    -(ln_bracket(p_z, q) / LN_2)
}

/// Joint multifractal quantities re-expressed for wavelet partition
/// functions, where positions are summed instead of boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletQuantities {
    pub t: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub d: f64,
}

/// Maps box-counting quantities (tau, alpha_x, alpha_y, f) at orders (p, q)
/// onto their wavelet counterparts.
pub fn pf_to_wt(tau: f64, alpha_x: f64, alpha_y: f64, f: f64, p: f64, q: f64) -> WaveletQuantities {
    WaveletQuantities {
        t: tau - p / 2.0 - q / 2.0 + 1.0,
        h_x: alpha_x - 1.0,
        h_y: alpha_y - 1.0,
        d: f - 1.0,
    }
}

/// Analytic evaluator for the joint multifractal structure of a pair of
/// binomial measures with weights `p_x` and `p_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTheory {
    p_x: f64,
    p_y: f64,
    beta: f64,
    gamma: f64,
    z: f64,
}

impl BinomialTheory {
    pub fn new(p_x: f64, p_y: f64) -> Result<Self> {
        for (name, v) in [("p_x", p_x), ("p_y", p_y)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is outside (0, 1)"),
                });
            }
        }
        // Equal weights make the ratio of log-odds exactly 1 and the offset
        // exactly 0; computing them would divide 0 by 0 at p = 1/2.
        let (beta, gamma) = if p_x == p_y {
            (1.0, 0.0)
        } else {
            let beta = (p_x.ln() - (1.0 - p_x).ln()) / (p_y.ln() - (1.0 - p_y).ln());
            let gamma = beta * (1.0 - p_y).ln() - (1.0 - p_x).ln();
            (beta, gamma)
        };
        if !(beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p_y",
                reason: format!("log-odds ratio is not finite for p_x={p_x}, p_y={p_y}"),
            });
        }
        Ok(Self {
            p_x,
            p_y,
            beta,
            gamma,
            z: (1.0 - p_y) / p_y,
        })
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn p_y(&self) -> f64 {
        self.p_y
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Combined order `Q` at moment orders (p, q).
    pub fn order_index(&self, p: f64, q: f64) -> f64 {
        self.beta * p / 2.0 + q / 2.0
    }

    /// Joint mass exponent tau(p, q) of the measure pair.
    pub fn joint_mass_exponent(&self, p: f64, q: f64) -> f64 {
        let big_q = self.order_index(p, q);
        p * self.gamma / (2.0 * LN_2) - ln_bracket(self.p_y, big_q) / LN_2
    }

    /// Joint singularity strengths (alpha_x, alpha_y) at orders (p, q).
    ///
    /// Both share the same weighted-log term, so the identity
    /// `alpha_x = gamma/ln 2 + beta * alpha_y` holds bit-for-bit.
    pub fn joint_singularity_strengths(&self, p: f64, q: f64) -> (f64, f64) {
        let big_q = self.order_index(p, q);
        let alpha_y = -(weighted_log(self.p_y, big_q) / LN_2);
        let alpha_x = self.gamma / LN_2 + self.beta * alpha_y;
        (alpha_x, alpha_y)
    }

    /// Joint multifractal spectrum value at orders (p, q).
    ///
    /// Written in terms of u = Q ln Z through the sigmoid and softplus so
    /// that Z^Q never overflows; equals Q alpha_y - tau_yy-style Legendre
    /// duals of the joint mass exponent.
    pub fn joint_spectrum(&self, p: f64, q: f64) -> f64 {
        let big_q = self.order_index(p, q);
        let ln_z = self.z.ln();
        let u = big_q * ln_z;
        let sigmoid = if u >= 0.0 {
            1.0 / (1.0 + (-u).exp())
        } else {
            let e = u.exp();
            e / (1.0 + e)
        };
        let softplus = u.max(0.0) + (-u.abs()).exp().ln_1p();
        (-big_q * ln_z * sigmoid + softplus) / LN_2
    }

    /// All four wavelet-side quantities at orders (p, q).
    pub fn wavelet_quantities(&self, p: f64, q: f64) -> WaveletQuantities {
        let tau = self.joint_mass_exponent(p, q);
        let (ax, ay) = self.joint_singularity_strengths(p, q);
        let f = self.joint_spectrum(p, q);
        pf_to_wt(tau, ax, ay, f, p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn theory() -> BinomialTheory {
        BinomialTheory::new(0.3, 0.4).unwrap()
    }

    #[test]
    fn derived_constants() {
        let th = theory();
        assert_relative_eq!(th.beta(), 2.0896936467371034, max_relative = 1e-14);
        assert_relative_eq!(th.gamma(), -0.7107941166355762, max_relative = 1e-14);
        assert_relative_eq!(th.z, 1.5, max_relative = 1e-14);
    }

    #[test]
    fn equal_weights_give_unit_beta_zero_gamma() {
        let th = BinomialTheory::new(0.37, 0.37).unwrap();
        assert_eq!(th.beta(), 1.0);
        assert_eq!(th.gamma(), 0.0);
        let th = BinomialTheory::new(0.5, 0.5).unwrap();
        assert_eq!(th.beta(), 1.0);
        assert_eq!(th.gamma(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_weights() {
        assert!(BinomialTheory::new(0.0, 0.4).is_err());
        assert!(BinomialTheory::new(0.3, 1.0).is_err());
        // One weight at 1/2 with the other away from it has no finite
        // log-odds ratio.
        assert!(BinomialTheory::new(0.3, 0.5).is_err());
    }

    #[test]
    fn scaling_exponent_examples() {
        assert_relative_eq!(scaling_exponent(1.0, 0.3).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(scaling_exponent(1.0, 0.7).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            scaling_exponent(2.0, 0.3).unwrap(),
            0.8929375973235764,
            max_relative = 1e-13
        );
        assert_relative_eq!(scaling_exponent(2.0, 0.5).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(scaling_exponent(0.0, 0.3), Err(Error::ZeroOrder));
    }

    #[test]
    fn mass_exponent_examples() {
        assert_relative_eq!(mass_exponent(0.0, 0.3), -1.0, epsilon = 1e-15);
        assert!(mass_exponent(1.0, 0.3).abs() < 1e-14);
        assert_relative_eq!(
            mass_exponent(2.0, 0.3),
            0.7858751946471527,
            max_relative = 1e-13
        );
    }

    #[test]
    fn joint_mass_exponent_examples() {
        let th = theory();
        assert_relative_eq!(th.joint_mass_exponent(0.0, 0.0), -1.0, epsilon = 1e-15);
        assert_relative_eq!(
            th.joint_mass_exponent(2.0, 2.0),
            0.8889686876112564,
            max_relative = 1e-12
        );
    }

    #[test]
    fn equal_weight_pair_reduces_to_single_measure_exactly() {
        for p_z in [0.3, 0.4, 0.5, 0.72] {
            let th = BinomialTheory::new(p_z, p_z).unwrap();
            for i in 0..=40 {
                let q = i as f64 * 0.25;
                // Q = (q + q)/2 = q, beta = 1, gamma = 0: bitwise identical.
                assert_eq!(th.joint_mass_exponent(q, q), mass_exponent(q, p_z));
            }
        }
    }

    #[test]
    fn singularity_strength_examples() {
        let th = theory();
        let (ax, ay) = th.joint_singularity_strengths(0.0, 0.0);
        assert_relative_eq!(ay, 1.0294468445267841, max_relative = 1e-13);
        assert_relative_eq!(ax, 1.1257693834979823, max_relative = 1e-13);
        // Structural identity holds bit-for-bit at arbitrary orders.
        for (p, q) in [(0.5, 1.5), (2.0, 2.0), (6.0, 1.0), (9.5, 8.0)] {
            let (ax, ay) = th.joint_singularity_strengths(p, q);
            assert_eq!(ax, th.gamma() / LN_2 + th.beta() * ay);
        }
    }

    #[test]
    fn singularity_strength_large_order_limit() {
        // As Q grows the weights collapse onto the larger of p_y, 1-p_y.
        let th = theory();
        let q = 100.0; // Q = 50 at p = 0
        let (_, ay) = th.joint_singularity_strengths(0.0, q);
        assert_relative_eq!(ay, -(0.6f64.log2()), epsilon = 1e-8);
    }

    #[test]
    fn spectrum_apex_is_one() {
        let th = theory();
        assert_relative_eq!(th.joint_spectrum(0.0, 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spectrum_satisfies_double_legendre_identity() {
        let th = theory();
        for i in 0..=20 {
            for j in 0..=20 {
                let p = i as f64 * 0.5;
                let q = j as f64 * 0.5;
                let tau = th.joint_mass_exponent(p, q);
                let (ax, ay) = th.joint_singularity_strengths(p, q);
                let f = th.joint_spectrum(p, q);
                assert!(
                    (f - (p * ax / 2.0 + q * ay / 2.0 - tau)).abs() <= 1e-10,
                    "legendre identity violated at ({p}, {q})"
                );
            }
        }
    }

    #[test]
    fn spectrum_is_univariate_in_combined_order() {
        let th = theory();
        // Pick (p, q) pairs sharing the same Q.
        let p1 = 2.0;
        let q1 = 1.0;
        let target = th.order_index(p1, q1);
        let p2 = 1.0;
        let q2 = 2.0 * target - th.beta() * p2;
        assert_relative_eq!(th.order_index(p2, q2), target, max_relative = 1e-14);
        assert_relative_eq!(
            th.joint_spectrum(p1, q1),
            th.joint_spectrum(p2, q2),
            max_relative = 1e-9
        );
    }

    #[test]
    fn legendre_identity_against_finite_differences() {
        let th = theory();
        for step in [0.5, 0.1] {
            let tol = 10.0 * step * step;
            for (p, q) in [(1.0, 1.0), (2.0, 4.0), (5.0, 2.5)] {
                let ax_fd =
                    (th.joint_mass_exponent(p + step, q) - th.joint_mass_exponent(p - step, q))
                        / step;
                let ay_fd =
                    (th.joint_mass_exponent(p, q + step) - th.joint_mass_exponent(p, q - step))
                        / step;
                let (ax, ay) = th.joint_singularity_strengths(p, q);
                assert!((ax_fd - ax).abs() <= tol, "alpha_x fd mismatch at ({p},{q})");
                assert!((ay_fd - ay).abs() <= tol, "alpha_y fd mismatch at ({p},{q})");
            }
        }
    }

    #[test]
    fn joint_mass_exponent_is_strictly_increasing() {
        let th = theory();
        for i in 0..40 {
            let v = i as f64 * 0.25;
            assert!(th.joint_mass_exponent(v + 0.25, 3.0) > th.joint_mass_exponent(v, 3.0));
            assert!(th.joint_mass_exponent(3.0, v + 0.25) > th.joint_mass_exponent(3.0, v));
        }
    }

    #[test]
    fn wavelet_mapping_examples() {
        let th = theory();
        let wt = th.wavelet_quantities(0.0, 0.0);
        assert_relative_eq!(wt.t, 0.0, epsilon = 1e-15);
        assert_eq!(pf_to_wt(0.0, 1.0, 0.5, 1.0, 0.0, 0.0).h_x, 0.0);
        let wt22 = th.wavelet_quantities(2.0, 2.0);
        assert_relative_eq!(wt22.t, -0.1110313123887436, max_relative = 1e-11);
    }
}
