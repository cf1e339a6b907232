#[allow(unused_imports)]
use num_traits::Float;

use super::gauss::GaussRule;
use super::tanh_sinh::{tanh_sinh, Point};
use crate::error::{Error, Result};

/// Relative tolerance for smooth integrands.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Relative tolerance for integrands singular at both ends.
pub const SINGULAR_REL_TOL: f64 = 1e-8;

const MAX_JACOBI_NODES: usize = 1024;
const MAX_DE_LEVEL: u32 = 12;
const MAX_DEPTH: u32 = 48;

/// Which rule [`integrate_weighted`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Gauss–Jacobi with node doubling; exact for polynomial `f` of degree < nodes.
    JacobiWeighted,
    /// Tanh-sinh on the full weighted integrand.
    DoubleExponential,
    /// Bisection; panels touching a singular end keep the Jacobi weight.
    AdaptiveSubdivision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub nodes: usize,
    /// Exponent of `(x - a)`.
    pub alpha: f64,
    /// Exponent of `(b - x)`.
    pub beta: f64,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(rule: Rule, nodes: usize, alpha: f64, beta: f64, rel_tol: f64) -> Result<Self> {
        let spec = Self {
            rule,
            nodes,
            alpha,
            beta,
            rel_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Jacobi-weighted rule with 16 starting nodes and the default tolerance.
    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Rule::JacobiWeighted, 16, alpha, beta, DEFAULT_REL_TOL)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0 && self.beta > -1.0) {
            return Err(Error::InvalidSpec("endpoint exponents must exceed -1"));
        }
        if self.nodes < 2 {
            return Err(Error::InvalidSpec("at least two nodes are required"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidSpec("rel_tol must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: Rule::DoubleExponential,
            nodes: 16,
            alpha: 0.0,
            beta: 0.0,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// A quadrature value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub(crate) fn failed(value: f64) -> Self {
        Self {
            value,
            error: f64::INFINITY,
        }
    }

    fn into_failure(self) -> Error {
        Error::QuadratureFailure {
            estimate: self.value,
            error: self.error,
        }
    }
}

/// `∫_a^b f(x) (x - a)^alpha (b - x)^beta dx` using the rule named in `spec`.
pub fn integrate_weighted<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !(a < b) {
        return Err(Error::Domain("integration bounds must satisfy a < b"));
    }
    match spec.rule {
        Rule::JacobiWeighted => jacobi_doubling(&f, a, b, spec),
        Rule::DoubleExponential => {
            let (alpha, beta) = (spec.alpha, spec.beta);
            let mut g = |p: Point| f(p.x) * p.from_a.powf(alpha) * p.to_b.powf(beta);
            tanh_sinh(&mut g, a, b, spec.rel_tol, MAX_DE_LEVEL).map_err(Estimate::into_failure)
        }
        Rule::AdaptiveSubdivision => adaptive(&f, a, b, spec),
    }
}

fn jacobi_doubling<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut n = spec.nodes;
    let mut coarse = GaussRule::jacobi(n, spec.alpha, spec.beta)?.integrate(a, b, f);
    loop {
        n *= 2;
        let fine = GaussRule::jacobi(n, spec.alpha, spec.beta)?.integrate(a, b, f);
        let error = (fine - coarse).abs();
        let est = Estimate { value: fine, error };
        if !fine.is_finite() {
            return Err(Estimate::failed(fine).into_failure());
        }
        if error <= spec.rel_tol * fine.abs() {
            return Ok(est);
        }
        if n >= MAX_JACOBI_NODES {
            return Err(est.into_failure());
        }
        coarse = fine;
    }
}

struct PanelRules {
    coarse: [GaussRule; 4],
    fine: [GaussRule; 4],
}

impl PanelRules {
    fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        let make = |m: usize| -> Result<[GaussRule; 4]> {
            Ok([
                GaussRule::jacobi(m, 0.0, 0.0)?,
                GaussRule::jacobi(m, alpha, 0.0)?,
                GaussRule::jacobi(m, 0.0, beta)?,
                GaussRule::jacobi(m, alpha, beta)?,
            ])
        };
        Ok(Self {
            coarse: make(n)?,
            fine: make(2 * n)?,
        })
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let rules = PanelRules::new(spec.nodes, spec.alpha, spec.beta)?;
    let panel = |lo: f64, hi: f64| -> (f64, f64) {
        let idx = usize::from(lo == a) + 2 * usize::from(hi == b);
        // weight factors not absorbed by the rule are multiplied in explicitly
        let explicit_alpha = if lo == a { 0.0 } else { spec.alpha };
        let explicit_beta = if hi == b { 0.0 } else { spec.beta };
        let g = |x: f64, from_lo: f64, to_hi: f64| {
            let wa = if explicit_alpha == 0.0 {
                1.0
            } else {
                ((lo - a) + from_lo).powf(explicit_alpha)
            };
            let wb = if explicit_beta == 0.0 {
                1.0
            } else {
                ((b - hi) + to_hi).powf(explicit_beta)
            };
            f(x) * wa * wb
        };
        let c = rules.coarse[idx].integrate_gaps(lo, hi, g);
        let fi = rules.fine[idx].integrate_gaps(lo, hi, g);
        (fi, (fi - c).abs())
    };

    let (whole, whole_err) = panel(a, b);
    if !whole.is_finite() {
        return Err(Estimate::failed(whole).into_failure());
    }
    if whole_err <= spec.rel_tol * whole.abs() {
        return Ok(Estimate {
            value: whole,
            error: whole_err,
        });
    }

    // Explicit stack keeps this usable without recursion limits on deep grading.
    let scale = whole.abs();
    let mut stack: alloc::vec::Vec<(f64, f64, u32)> = alloc::vec![(a, b, 0)];
    let (mut value, mut error) = (0.0, 0.0);
    let mut failed = false;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (q, e) = panel(lo, hi);
        let budget = spec.rel_tol * q.abs().max(scale * (hi - lo) / (b - a));
        if e <= budget || !(hi - lo > 4.0 * f64::EPSILON * hi.abs().max(1.0)) || depth >= MAX_DEPTH {
            if e > budget {
                failed = true;
            }
            value += q;
            error += e;
            continue;
        }
        let mid = lo + 0.5 * (hi - lo);
        stack.push((lo, mid, depth + 1));
        stack.push((mid, hi, depth + 1));
    }
    let est = Estimate { value, error };
    if failed || !value.is_finite() {
        Err(est.into_failure())
    } else {
        Ok(est)
    }
}

/// Tanh-sinh with bisection fallback; `f` receives exact distances to the original ends.
///
/// This is the workhorse for kernel products, whose endpoint behavior mixes several
/// power laws and cannot be absorbed by a single Jacobi weight.
pub fn integrate_with_gaps<F: FnMut(Point) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if !(a < b) {
        return Err(Error::Domain("integration bounds must satisfy a < b"));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidSpec("rel_tol must lie in (0, 1)"));
    }
    subdivide(&mut f, a, b, 0.0, 0.0, rel_tol, 0.0, 0)
}

#[allow(clippy::too_many_arguments)]
fn subdivide<F: FnMut(Point) -> f64>(
    f: &mut F,
    lo: f64,
    hi: f64,
    off_a: f64,
    off_b: f64,
    rel_tol: f64,
    abs_floor: f64,
    depth: u32,
) -> Result<Estimate> {
    let mut g = |p: Point| {
        f(Point {
            x: p.x,
            from_a: off_a + p.from_a,
            to_b: off_b + p.to_b,
        })
    };
    let level = if depth == 0 { 9 } else { 8 };
    match tanh_sinh(&mut g, lo, hi, rel_tol, level) {
        Ok(est) => Ok(est),
        Err(best) if best.value.is_finite() && best.error <= abs_floor => Ok(best),
        Err(best) if depth < 16 && best.value.is_finite() => {
            let mid = lo + 0.5 * (hi - lo);
            let floor = 0.5 * rel_tol * best.value.abs().max(abs_floor / rel_tol);
            let left = subdivide(f, lo, mid, off_a, off_b + (hi - mid), rel_tol, floor, depth + 1)?;
            let right = subdivide(f, mid, hi, off_a + (mid - lo), off_b, rel_tol, floor, depth + 1)?;
            Ok(Estimate {
                value: left.value + right.value,
                error: left.error + right.error,
            })
        }
        Err(best) => Err(best.into_failure()),
    }
}

/// `∫_a^b f(x, x - a) (x - a)^alpha dx` on panels `[a, a+w], [a+w, a+2w], [a+2w, a+4w], …`.
///
/// The first panel carries the Jacobi weight; the geometric panels resolve a
/// singularity sitting at distance `~w` to the left of `a`. `jacobi` must be a rule with
/// `left = alpha` and `right = 0`; `legendre` a plain Gauss–Legendre rule.
pub fn integrate_graded<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    first_width: f64,
    jacobi: &GaussRule,
    legendre: &GaussRule,
) -> f64 {
    let alpha = jacobi.left();
    let len = b - a;
    let w0 = first_width.min(len);
    let mut acc = jacobi.integrate_gaps(0.0, w0, |y, _, _| f(a + y, y));
    let mut lo = w0;
    while lo < len {
        let hi = (2.0 * lo).min(len);
        acc += legendre.integrate_gaps(lo, hi, |y, _, _| f(a + y, y) * y.powf(alpha));
        lo = hi;
    }
    acc
}
