//! Double-exponential (tanh-sinh) quadrature on finite, semi-infinite and
//! infinite intervals, with bisection when a panel does not converge.
//!
//! Nodes are generated from the complement `1 - |x|` directly so that
//! integrable endpoint singularities are sampled down to ~1e-300 from the
//! endpoint without cancellation.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn finite(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Result of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const T_MAX: f64 = 6.1;
const MAX_LEVEL: usize = 9;

struct Node {
    t: f64,
    /// 1 - |x| on the canonical interval [-1, 1].
    complement: f64,
    /// dx/dt at this node.
    weight: f64,
}

fn node(t: f64) -> Node {
    let s = std::f64::consts::FRAC_PI_2 * t.sinh();
    let e = (-2.0 * s).exp();
    let complement = 2.0 * e / (1.0 + e);
    let weight = std::f64::consts::FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    Node {
        t,
        complement,
        weight,
    }
}

/// Level 0 holds t = 0, 1, 2, ...; level L > 0 holds the odd multiples of 2^-L.
fn levels() -> &'static [Vec<Node>] {
    static TABLE: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(MAX_LEVEL + 1);
        table.push((0..=(T_MAX as usize)).map(|k| node(k as f64)).collect());
        for level in 1..=MAX_LEVEL {
            let h = 0.5f64.powi(level as i32);
            let mut nodes = Vec::new();
            let mut k = 1usize;
            while (k as f64) * h <= T_MAX {
                nodes.push(node(k as f64 * h));
                k += 2;
            }
            table.push(nodes);
        }
        table
    })
}

/// Tanh-sinh integrator.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_level: usize,
    /// Maximum bisection depth for panels that fail to converge.
    pub max_depth: usize,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_level: 7,
            max_depth: 6,
        }
    }
}

impl TanhSinh {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`; either bound may be infinite.
    pub fn integrate<T, F>(&self, mut f: F, a: f64, b: f64) -> Estimate<T>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        if a == b {
            return Estimate {
                value: T::zero(),
                error: 0.0,
                evaluations: 0,
                converged: true,
            };
        }
        if a > b {
            let e = self.integrate(f, b, a);
            return Estimate {
                value: e.value * -1.0,
                ..e
            };
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.adaptive(&mut |x, _, _| f(x), (a, b), a, b, self.abs_tol, 0),
            (true, false) => {
                // x = a + u / (1 - u), u in [0, 1]
                self.canonical(
                    &mut |lo: f64, hi: f64| {
                        let x = a + lo / hi;
                        f(x) * (1.0 / (hi * hi))
                    },
                    1.0,
                    self.abs_tol,
                )
            }
            (false, true) => self.canonical(
                &mut |lo: f64, hi: f64| {
                    let x = b - lo / hi;
                    f(x) * (1.0 / (hi * hi))
                },
                1.0,
                self.abs_tol,
            ),
            (false, false) => {
                // x = u / (1 - u^2), u in [-1, 1]
                self.canonical(
                    &mut |lo: f64, hi: f64| {
                        let u = if lo < hi { lo - 1.0 } else { 1.0 - hi };
                        let q = lo * hi;
                        let x = u / q;
                        f(x) * ((1.0 + u * u) / (q * q))
                    },
                    2.0,
                    self.abs_tol,
                )
            }
        }
    }

    /// Integrate over the finite interval `[a, b]`, passing the integrand
    /// the node together with its exact distances from `a` and from `b`.
    /// Use this when the integrand is singular at an endpoint and needs
    /// `x - a` or `b - x` without cancellation.
    pub fn integrate_with_distances<T, F>(&self, mut f: F, a: f64, b: f64) -> Estimate<T>
    where
        T: QuadValue,
        F: FnMut(f64, f64, f64) -> T,
    {
        assert!(a.is_finite() && b.is_finite(), "finite interval required");
        if a == b {
            return Estimate {
                value: T::zero(),
                error: 0.0,
                evaluations: 0,
                converged: true,
            };
        }
        assert!(a < b, "integrate_with_distances needs a < b");
        self.adaptive(&mut f, (a, b), a, b, self.abs_tol, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn adaptive<T, F>(
        &self,
        f: &mut F,
        whole: (f64, f64),
        pa: f64,
        pb: f64,
        abs_tol: f64,
        depth: usize,
    ) -> Estimate<T>
    where
        T: QuadValue,
        F: FnMut(f64, f64, f64) -> T,
    {
        let (a, b) = whole;
        let (off_a, off_b) = (pa - a, b - pb);
        let est = self.canonical(
            &mut |lo: f64, hi: f64| {
                let x = if lo <= hi { pa + lo } else { pb - hi };
                f(x, off_a + lo, off_b + hi)
            },
            pb - pa,
            abs_tol,
        );
        if est.converged || depth >= self.max_depth {
            return est;
        }
        let mid = 0.5 * (pa + pb);
        let left = self.adaptive(f, whole, pa, mid, 0.5 * abs_tol, depth + 1);
        let right = self.adaptive(f, whole, mid, pb, 0.5 * abs_tol, depth + 1);
        Estimate {
            value: left.value + right.value,
            error: left.error + right.error,
            evaluations: est.evaluations + left.evaluations + right.evaluations,
            converged: left.converged && right.converged,
        }
    }

    /// Core rule on an interval of length `len`; `g(lo, hi)` receives the
    /// exact distances of the node from the two ends.
    fn canonical<T, G>(&self, g: &mut G, len: f64, abs_tol: f64) -> Estimate<T>
    where
        T: QuadValue,
        G: FnMut(f64, f64) -> T,
    {
        let half = 0.5 * len;
        let table = levels();
        let max_level = self.max_level.min(MAX_LEVEL);
        let mut evaluations = 0usize;
        let mut sum = T::zero();
        let mut previous: Option<T> = None;
        let mut error = f64::INFINITY;
        let mut h = 1.0;

        for (level, nodes) in table.iter().enumerate().take(max_level + 1) {
            if level > 0 {
                h *= 0.5;
            }
            for nd in nodes {
                let term = if nd.t == 0.0 {
                    evaluations += 1;
                    let v = g(half, half);
                    if v.finite() {
                        v * (nd.weight * half)
                    } else {
                        T::zero()
                    }
                } else {
                    let d = half * nd.complement;
                    if d <= 0.0 {
                        break;
                    }
                    evaluations += 2;
                    let left = g(d, len - d);
                    let right = g(len - d, d);
                    let mut t = T::zero();
                    if left.finite() {
                        t = t + left;
                    }
                    if right.finite() {
                        t = t + right;
                    }
                    t * (nd.weight * half)
                };
                sum = sum + term;
                if nd.t > 2.0 && term.magnitude() <= 1e-18 * sum.magnitude() {
                    break;
                }
            }
            let estimate = sum * h;
            if let Some(prev) = previous {
                error = (estimate - prev).magnitude();
                if level >= 3 && error <= abs_tol.max(self.rel_tol * estimate.magnitude()) {
                    return Estimate {
                        value: estimate,
                        error,
                        evaluations,
                        converged: true,
                    };
                }
            }
            previous = Some(estimate);
        }
        Estimate {
            value: previous.unwrap_or_else(T::zero),
            error,
            evaluations,
            converged: false,
        }
    }
}

/// Integrate with the default rule.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    TanhSinh::default().integrate(f, a, b).value
}

/// Integrate a complex-valued function with the default rule.
pub fn integrate_complex<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64) -> Complex64 {
    TanhSinh::default().integrate(f, a, b).value
}
