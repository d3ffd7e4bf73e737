//! Composite Gauss-Legendre quadrature.
//!
//! Integrands in this crate are smooth between coefficient breakpoints, so
//! every integral is split at the breakpoints first and each smooth piece is
//! covered by equal-width panels, each integrated with a fixed-order rule.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Order of the default per-panel rule.
pub const DEFAULT_ORDER: usize = 10;
/// Default panel density (panels per unit of integration length).
pub const DEFAULT_PANELS_PER_UNIT: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// The `n`-point rule.
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n).expect("Gauss-Legendre order must be positive");
        let rule = gauss_quad::GaussLegendre::new(n);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
}

/// A quadrature value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Panelled Gauss-Legendre rule with mandatory splits.
#[derive(Debug, Clone, Copy)]
pub struct CompositeRule {
    rule: &'static GaussLegendre,
    panels_per_unit: usize,
}

impl Default for CompositeRule {
    fn default() -> Self {
        Self::with_panels(DEFAULT_PANELS_PER_UNIT)
    }
}

impl CompositeRule {
    pub fn with_panels(panels_per_unit: usize) -> Self {
        Self {
            rule: default_rule(),
            panels_per_unit: panels_per_unit.max(1),
        }
    }

    pub fn panels_per_unit(&self) -> usize {
        self.panels_per_unit
    }

    /// Integrates `f` over `[a, b]`, splitting at every point of `splits`
    /// that falls strictly inside the interval. `splits` must be sorted.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, splits: &[f64], f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut left = a;
        for &s in splits.iter().filter(|&&s| s > a && s < b) {
            total += self.integrate_smooth(left, s, &f);
            left = s;
        }
        total + self.integrate_smooth(left, b, &f)
    }

    /// Like [`CompositeRule::integrate`] but also reports the change against
    /// the same integral at half the panel density as an error estimate.
    pub fn integrate_with_estimate<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        splits: &[f64],
        f: F,
    ) -> Estimate {
        let value = self.integrate(a, b, splits, &f);
        let coarse = Self::with_panels((self.panels_per_unit / 2).max(1)).integrate(a, b, splits, &f);
        let floor = 64.0 * f64::EPSILON * value.abs();
        Estimate {
            value,
            error: (value - coarse).abs().max(floor),
        }
    }

    fn integrate_smooth<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: &F) -> f64 {
        let len = b - a;
        let panels = ((self.panels_per_unit as f64 * len).ceil() as usize).max(1);
        let width = len / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + width * i as f64;
                let hi = if i + 1 == panels { b } else { lo + width };
                self.rule.integrate(lo, hi, f)
            })
            .sum()
    }
}
