//! Orientation-preserving circle homeomorphisms, represented through
//! monotone degree-one lifts `F: R -> R` with `F(t + 1) = F(t) + 1`.
//!
//! Three parametric families are provided: rigid rotations, the Arnold
//! family `F(t) = t + theta + eps/(2 pi) sin(2 pi t)` and piecewise-linear
//! lifts through a list of breakpoints. Inverses are closed form for rotations
//! and piecewise-linear maps and computed by bisection on the lift otherwise.
//!
//! Words compose in application order: the first symbol of a word is applied
//! first, so the word `(i1, ..., in)` acts as `g_in ∘ ... ∘ g_i1`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle::{Arc, CirclePoint};
use crate::error::{IfsError, Result};

const BISECTION_TOL: f64 = 1e-13;
const BISECTION_BUDGET: usize = 200;

/// An orientation-preserving circle homeomorphism.
#[derive(Clone, Debug, PartialEq)]
pub enum Homeo {
    Rotation { theta: f64 },
    Arnold { theta: f64, eps: f64 },
    PiecewiseLinear(PwlLift),
    /// The inverse of another map, evaluated by inverting its lift.
    Inverse(Box<Homeo>),
}

/// Lift knots: `xs` strictly increasing with `xs.last() < xs[0] + 1`, `ys`
/// nondecreasing; the lift interpolates linearly and closes up with the knot
/// `(xs[0] + 1, ys[0] + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlLift {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PwlLift {
    /// Builds the lift through circle pairs `(input, output)`. Inputs are
    /// sorted; outputs are unwrapped so the lift increases between knots.
    pub fn from_circle_pairs(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(IfsError::Invalid("piecewise-linear map needs at least 2 breakpoints".into()));
        }
        let mut pairs: Vec<(f64, f64)> = points
            .iter()
            .map(|[a, b]| (CirclePoint::new(*a).value(), CirclePoint::new(*b).value()))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(IfsError::Invalid("piecewise-linear breakpoints have repeated inputs".into()));
        }
        let mut xs = Vec::with_capacity(pairs.len());
        let mut ys = Vec::with_capacity(pairs.len());
        let mut prev = f64::NEG_INFINITY;
        for (a, b) in pairs {
            let mut y = b;
            while y <= prev {
                y += 1.0;
            }
            xs.push(a);
            ys.push(y);
            prev = y;
        }
        Ok(PwlLift { xs, ys })
    }

    fn inverse(&self) -> PwlLift {
        PwlLift { xs: self.ys.clone(), ys: self.xs.clone() }
    }

    fn eval(&self, t: f64) -> f64 {
        let x0 = self.xs[0];
        let base = (t - x0).floor();
        let s = t - base;
        let n = self.xs.len();
        // index of the segment [xs[i], xs[i+1]) containing s, with a closing knot at x0 + 1
        let i = self.xs.partition_point(|&x| x <= s) - 1;
        let (xa, ya) = (self.xs[i], self.ys[i]);
        let (xb, yb) = if i + 1 < n { (self.xs[i + 1], self.ys[i + 1]) } else { (x0 + 1.0, self.ys[0] + 1.0) };
        let y = if xb > xa { ya + (yb - ya) * (s - xa) / (xb - xa) } else { ya };
        y + base
    }

    /// Circle pairs describing this lift (inputs and outputs reduced mod 1).
    pub fn circle_pairs(&self) -> Vec<[f64; 2]> {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(&a, &b)| [CirclePoint::new(a).value(), CirclePoint::new(b).value()])
            .collect()
    }
}

impl Homeo {
    pub fn rotation(theta: f64) -> Self {
        Homeo::Rotation { theta }
    }

    pub fn arnold(theta: f64, eps: f64) -> Self {
        Homeo::Arnold { theta, eps }
    }

    pub fn identity() -> Self {
        Homeo::Rotation { theta: 0.0 }
    }

    pub fn piecewise_linear(points: &[[f64; 2]]) -> Result<Self> {
        Ok(Homeo::PiecewiseLinear(PwlLift::from_circle_pairs(points)?))
    }

    /// The lift `F` evaluated at a real `t`.
    pub fn lift(&self, t: f64) -> f64 {
        match self {
            Homeo::Rotation { theta } => t + theta,
            Homeo::Arnold { theta, eps } => t + theta + eps / TAU * (TAU * t).sin(),
            Homeo::PiecewiseLinear(p) => p.eval(t),
            // a valid lift always converges; keep the best bracket midpoint otherwise
            Homeo::Inverse(h) => h.lift_inverse(t).unwrap_or_else(|_| h.bisect_lift(t).1),
        }
    }

    /// Solves `F(t) = s` on the lift.
    pub fn lift_inverse(&self, s: f64) -> Result<f64> {
        match self {
            Homeo::Rotation { theta } => Ok(s - theta),
            Homeo::PiecewiseLinear(p) => Ok(p.inverse().eval(s)),
            Homeo::Inverse(h) => Ok(h.lift(s)),
            Homeo::Arnold { .. } => {
                let (width, mid) = self.bisect_lift(s);
                if width <= BISECTION_TOL {
                    Ok(mid)
                } else {
                    Err(IfsError::ConvergenceFailure { width, iterations: BISECTION_BUDGET })
                }
            }
        }
    }

    /// Bisection for `F(t) = s`; returns the final bracket width and midpoint.
    fn bisect_lift(&self, s: f64) -> (f64, f64) {
        let spread = match self {
            Homeo::Arnold { eps, .. } => eps.abs() / TAU,
            _ => 1.0,
        };
        let shift = match self {
            Homeo::Arnold { theta, .. } | Homeo::Rotation { theta } => *theta,
            _ => 0.0,
        };
        let mut lo = s - shift - spread - 1e-9;
        let mut hi = s - shift + spread + 1e-9;
        if self.lift(lo) > s || self.lift(hi) < s {
            return (f64::INFINITY, 0.5 * (lo + hi));
        }
        for _ in 0..BISECTION_BUDGET {
            if hi - lo <= BISECTION_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.lift(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (hi - lo, 0.5 * (lo + hi))
    }

    #[inline]
    pub fn apply(&self, x: CirclePoint) -> CirclePoint {
        match self {
            Homeo::Rotation { theta } => x.shifted(*theta),
            _ => CirclePoint::new(self.lift(x.value())),
        }
    }

    pub fn apply_inverse(&self, y: CirclePoint) -> Result<CirclePoint> {
        Ok(CirclePoint::new(self.lift_inverse(y.value())?))
    }

    /// The inverse homeomorphism; closed form where available.
    pub fn inverse(&self) -> Homeo {
        match self {
            Homeo::Rotation { theta } => Homeo::Rotation { theta: CirclePoint::new(-theta).value() },
            Homeo::PiecewiseLinear(p) => Homeo::PiecewiseLinear(p.inverse()),
            Homeo::Inverse(h) => (**h).clone(),
            Homeo::Arnold { .. } => Homeo::Inverse(Box::new(self.clone())),
        }
    }

    /// True when the map is a rigid rotation (an isometry of the circle).
    pub fn is_rotation(&self) -> bool {
        match self {
            Homeo::Rotation { .. } => true,
            Homeo::Arnold { eps, .. } => *eps == 0.0,
            Homeo::Inverse(h) => h.is_rotation(),
            Homeo::PiecewiseLinear(_) => false,
        }
    }

    /// Image of an arc; valid because the map preserves orientation.
    pub fn image_arc(&self, a: &Arc) -> Arc {
        Arc { start: self.apply(a.start), end: self.apply(a.end) }
    }

    /// Checks strict monotonicity of the lift on `grid_n` steps of `[0, 1]`
    /// and the degree-one identity at the grid points.
    pub fn validate(&self, grid_n: usize) -> ValidationReport {
        let grid_n = grid_n.max(2);
        let values: Vec<f64> = (0..=grid_n).map(|i| self.lift(i as f64 / grid_n as f64)).collect();
        let margin = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let degree_error = (0..grid_n)
            .map(|i| {
                let t = i as f64 / grid_n as f64;
                (self.lift(t + 1.0) - self.lift(t) - 1.0).abs()
            })
            .fold(0.0, f64::max);
        let mut reason = None;
        if let Homeo::Arnold { eps, .. } = self {
            if eps.abs() >= 1.0 {
                reason = Some(format!("Arnold map with |eps| = {} >= 1 is not a diffeomorphism", eps.abs()));
            }
        }
        if reason.is_none() && !(margin > 0.0) {
            reason = Some(format!("lift is not strictly increasing on the grid (margin {margin:e})"));
        }
        if reason.is_none() && degree_error > 1e-9 {
            reason = Some(format!("lift violates F(t+1) = F(t) + 1 by {degree_error:e}"));
        }
        ValidationReport { passed: reason.is_none(), grid_n, monotonicity_margin: margin, degree_error, reason }
    }
}

pub fn apply(h: &Homeo, x: CirclePoint) -> CirclePoint {
    h.apply(x)
}

pub fn apply_inverse(h: &Homeo, y: CirclePoint) -> Result<CirclePoint> {
    h.apply_inverse(y)
}

pub fn image_arc(h: &Homeo, a: &Arc) -> Arc {
    h.image_arc(a)
}

pub fn validate_homeo(h: &Homeo, grid_n: usize) -> ValidationReport {
    h.validate(grid_n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub grid_n: usize,
    pub monotonicity_margin: f64,
    pub degree_error: f64,
    pub reason: Option<String>,
}

/// A finite word over the symbols `0..k`; symbol `i` selects map `i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The word with the given rank in lexicographic order on `k^len` words.
    pub fn from_rank(mut rank: u64, k: usize, len: usize) -> Word {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = (rank % k as u64) as usize;
            rank /= k as u64;
        }
        Word(v)
    }

    /// Lexicographic rank among words of the same length over `k` symbols.
    pub fn rank(&self, k: usize) -> u64 {
        self.0.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

/// Applies the symbols of `word` to `x` in order, `maps[word[0]]` first.
pub fn compose_symbols(maps: &[Homeo], word: &[usize], x: CirclePoint) -> Result<CirclePoint> {
    let k = maps.len();
    word.iter().try_fold(x, |p, &s| maps.get(s).map(|g| g.apply(p)).ok_or(IfsError::SymbolOutOfRange { symbol: s, k }))
}
