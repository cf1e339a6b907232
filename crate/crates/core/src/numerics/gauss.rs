//! Gauss–Legendre and Gauss–Jacobi rules built with the Golub–Welsch algorithm.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::special::ln_gamma;
use crate::error::{Error, Result};

/// A Gauss rule on `[-1, 1]` for the weight `(1 + x)^left * (1 - x)^right`.
///
/// `left` is the exponent at `-1`, `right` the exponent at `+1`. Mapped onto `[a, b]`
/// the rule integrates `f(x) (x - a)^left (b - x)^right`, which is how every call site
/// reads its endpoint singularities.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    left: f64,
    right: f64,
}

impl GaussRule {
    pub fn legendre(n: usize) -> Self {
        Self::jacobi(n, 0.0, 0.0).expect("Legendre parameters are always valid")
    }

    pub fn jacobi(n: usize, left: f64, right: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("a Gauss rule needs at least one node"));
        }
        if !(left > -1.0 && right > -1.0) {
            return Err(Error::InvalidSpec("Jacobi exponents must exceed -1"));
        }
        // Monic recurrence for the classical weight (1 - x)^a (1 + x)^b.
        let (a, b) = (right, left);
        let ab = a + b;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        diag[0] = (b - a) / (ab + 2.0);
        for k in 1..n {
            let kf = k as f64;
            let m = 2.0 * kf + ab;
            diag[k] = (b * b - a * a) / (m * (m + 2.0));
        }
        for k in 1..n {
            let kf = k as f64;
            let m = 2.0 * kf + ab;
            // k = 1 has a removable (ab + 1) factor; write it out so a + b = -1 works.
            let sq = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (m * m * (m + 1.0) * (m - 1.0))
            };
            off[k - 1] = sq.sqrt();
        }
        let ln_mu0 = (ab + 1.0) * core::f64::consts::LN_2 + ln_gamma(a + 1.0)? + ln_gamma(b + 1.0)?
            - ln_gamma(ab + 2.0)?;
        let mu0 = ln_mu0.exp();

        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiagonal_eigen(&mut diag, &mut off, &mut first)?;

        let mut pairs: Vec<(f64, f64)> = diag
            .iter()
            .zip(&first)
            .map(|(&x, &z)| (x, mu0 * z * z))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self {
            nodes,
            weights,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f(x) (x - a)^left (b - x)^right dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.integrate_gaps(a, b, |x, _, _| f(x))
    }

    /// Same as [`GaussRule::integrate`], but `f` also receives the node's distances to
    /// `a` and `b`, computed without cancellation.
    pub fn integrate_gaps<F: FnMut(f64, f64, f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let scale = half.powf(1.0 + self.left + self.right);
        let mut acc = 0.0;
        for (&xi, &w) in self.nodes.iter().zip(&self.weights) {
            let from_a = half * (1.0 + xi);
            let to_b = half * (1.0 - xi);
            let x = if xi <= 0.0 { a + from_a } else { b - to_b };
            acc += w * f(x, from_a, to_b);
        }
        scale * acc
    }
}

/// Implicit QL iteration for a symmetric tridiagonal matrix.
///
/// On return `diag` holds the eigenvalues and `first` the first components of the
/// normalized eigenvectors (it must start as the first unit vector). `off[i]` couples
/// rows `i` and `i + 1`; its last slot is scratch.
fn tridiagonal_eigen(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Degenerate("QL iteration failed to converge"));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let z = first[i + 1];
                first[i + 1] = s * first[i] + c * z;
                first[i] = c * first[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(5);
        // degree 9 is the limit for 5 nodes
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(8) + x.powi(9));
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_nodes_are_recovered() {
        // (1+x)^-1/2 (1-x)^-1/2 exercises the a + b = -1 recurrence branch.
        let n = 7;
        let rule = GaussRule::jacobi(n, -0.5, -0.5).unwrap();
        for (k, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let expect = -(core::f64::consts::PI * (2 * k + 1) as f64 / (2 * n) as f64).cos();
            assert!((x - expect).abs() < 1e-13, "{x} vs {expect}");
            assert!((w - core::f64::consts::PI / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn single_node_rule() {
        let rule = GaussRule::jacobi(1, 0.5, 0.0).unwrap();
        // ∫_0^1 x^{1/2} dx = 2/3
        assert!((rule.integrate(0.0, 1.0, |_| 1.0) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(GaussRule::jacobi(4, -1.0, 0.0).is_err());
        assert!(GaussRule::jacobi(0, 0.0, 0.0).is_err());
    }
}
