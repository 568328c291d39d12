//! Observables: real functions on the circle with a declared Lipschitz
//! constant and an optional centering offset.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle::{circ_dist, CirclePoint};
use crate::error::{IfsError, Result};

/// Anything that can be evaluated on the circle and shared across threads.
pub trait CircleFn: Sync {
    fn eval(&self, x: CirclePoint) -> f64;
}

impl<F: Fn(CirclePoint) -> f64 + Sync> CircleFn for F {
    fn eval(&self, x: CirclePoint) -> f64 {
        self(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableShape {
    /// `sum_j cos[j-1] cos(2 pi j x) + sin[j-1] sin(2 pi j x)`
    Harmonic {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Periodic linear interpolation through `(position, value)` points.
    Pwl { points: Vec<[f64; 2]> },
}

/// An observable `phi - offset` with a declared Lipschitz constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    #[serde(flatten)]
    pub shape: ObservableShape,
    pub lipschitz: f64,
    #[serde(default)]
    pub offset: f64,
}

impl Observable {
    /// Harmonic observable with the Lipschitz bound `2 pi sum_j j |(a_j, b_j)|`.
    pub fn harmonic(cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let j_max = cos.len().max(sin.len());
        let lipschitz = (0..j_max)
            .map(|j| {
                let a = cos.get(j).copied().unwrap_or(0.0);
                let b = sin.get(j).copied().unwrap_or(0.0);
                TAU * (j + 1) as f64 * a.hypot(b)
            })
            .sum();
        Observable { shape: ObservableShape::Harmonic { cos, sin }, lipschitz, offset: 0.0 }
    }

    /// `cos(2 pi x)`.
    pub fn cos1() -> Self {
        Self::harmonic(vec![1.0], vec![])
    }

    pub fn constant(c: f64) -> Self {
        Observable { shape: ObservableShape::Harmonic { cos: vec![], sin: vec![] }, lipschitz: 0.0, offset: -c }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Piecewise-linear periodic observable; the Lipschitz constant is the
    /// steepest segment slope.
    pub fn piecewise_linear(points: &[[f64; 2]]) -> Result<Self> {
        let pts = Self::sorted_points(points)?;
        let n = pts.len();
        let mut lip: f64 = 0.0;
        for i in 0..n {
            let (x0, v0) = pts[i];
            let (x1, v1) = if i + 1 < n { pts[i + 1] } else { (pts[0].0 + 1.0, pts[0].1) };
            lip = lip.max((v1 - v0).abs() / (x1 - x0));
        }
        let points = pts.iter().map(|&(x, v)| [x, v]).collect();
        Ok(Observable { shape: ObservableShape::Pwl { points }, lipschitz: lip, offset: 0.0 })
    }

    fn sorted_points(points: &[[f64; 2]]) -> Result<Vec<(f64, f64)>> {
        if points.is_empty() {
            return Err(IfsError::Invalid("piecewise-linear observable needs at least one point".into()));
        }
        let mut pts: Vec<(f64, f64)> = points.iter().map(|[x, v]| (CirclePoint::new(*x).value(), *v)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(IfsError::Invalid("piecewise-linear observable has repeated positions".into()));
        }
        Ok(pts)
    }

    /// The same function minus `c` (accumulates with any existing offset).
    pub fn centered(&self, c: f64) -> Self {
        let mut o = self.clone();
        o.offset += c;
        o
    }

    /// `factor * (phi - offset)`.
    pub fn scaled(&self, factor: f64) -> Self {
        let shape = match &self.shape {
            ObservableShape::Harmonic { cos, sin } => ObservableShape::Harmonic {
                cos: cos.iter().map(|a| a * factor).collect(),
                sin: sin.iter().map(|b| b * factor).collect(),
            },
            ObservableShape::Pwl { points } => {
                ObservableShape::Pwl { points: points.iter().map(|&[x, v]| [x, v * factor]).collect() }
            }
        };
        Observable { shape, lipschitz: self.lipschitz * factor.abs(), offset: self.offset * factor }
    }

    /// Rescaled to Lipschitz constant one (unchanged if the constant is zero).
    pub fn lipschitz_normalized(&self) -> Self {
        if self.lipschitz > 0.0 { self.scaled(1.0 / self.lipschitz) } else { self.clone() }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.shape {
            ObservableShape::Harmonic { cos, sin } => {
                let mut s = 0.0;
                for (j, a) in cos.iter().enumerate() {
                    s += a * (TAU * (j + 1) as f64 * x).cos();
                }
                for (j, b) in sin.iter().enumerate() {
                    s += b * (TAU * (j + 1) as f64 * x).sin();
                }
                s
            }
            ObservableShape::Pwl { points: pts } => {
                // points are sorted by position in [0, 1), see `validate`
                let n = pts.len();
                if n == 1 {
                    return pts[0][1];
                }
                let i = pts.partition_point(|p| p[0] <= x);
                let ([x0, v0], [x1, v1]) = if i == 0 {
                    ([pts[n - 1][0] - 1.0, pts[n - 1][1]], pts[0])
                } else if i == n {
                    (pts[n - 1], [pts[0][0] + 1.0, pts[0][1]])
                } else {
                    (pts[i - 1], pts[i])
                };
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    #[inline]
    pub fn value(&self, x: CirclePoint) -> f64 {
        self.raw(x.value()) - self.offset
    }

    /// Upper bound on the sup norm of `phi - offset`.
    pub fn sup_norm(&self) -> f64 {
        match &self.shape {
            ObservableShape::Harmonic { cos, sin } => {
                let coef_bound: f64 = cos.iter().chain(sin.iter()).map(|c| c.abs()).sum::<f64>() + self.offset.abs();
                let g = 4096;
                let grid_max = (0..g).map(|i| self.value(CirclePoint::new(i as f64 / g as f64)).abs()).fold(0.0, f64::max);
                coef_bound.min(grid_max + self.lipschitz / (2.0 * g as f64))
            }
            ObservableShape::Pwl { points } => points.iter().map(|p| (p[1] - self.offset).abs()).fold(0.0, f64::max),
        }
    }

    /// Checks the declared Lipschitz constant on a grid of `grid_n` points.
    pub fn validate(&self, grid_n: usize) -> Result<()> {
        if let ObservableShape::Pwl { points } = &self.shape {
            let sorted = Self::sorted_points(points)?;
            if sorted.iter().zip(points).any(|(s, p)| s.0 != p[0]) {
                return Err(IfsError::Validation("observable points must be sorted by position in [0, 1)".into()));
            }
        }
        if !(self.lipschitz >= 0.0) || !self.lipschitz.is_finite() {
            return Err(IfsError::Validation("observable Lipschitz constant must be finite and nonnegative".into()));
        }
        let grid_n = grid_n.max(2);
        let pts: Vec<CirclePoint> = (0..grid_n).map(|i| CirclePoint::new(i as f64 / grid_n as f64)).collect();
        for i in 0..grid_n {
            let (x, y) = (pts[i], pts[(i + 1) % grid_n]);
            let slope = (self.value(x) - self.value(y)).abs() / circ_dist(x, y);
            if slope > self.lipschitz * (1.0 + 1e-9) + 1e-12 {
                return Err(IfsError::Validation(format!(
                    "observable slope {slope} near {x} exceeds declared Lipschitz constant {}",
                    self.lipschitz
                )));
            }
        }
        Ok(())
    }
}

impl CircleFn for Observable {
    #[inline]
    fn eval(&self, x: CirclePoint) -> f64 {
        self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(t: f64) -> CirclePoint {
        CirclePoint::new(t)
    }

    #[test]
    fn harmonic_values_and_bounds() {
        let f = Observable::harmonic(vec![1.0, 0.5], vec![0.0, -0.25]);
        let x = 0.3;
        let expected = (TAU * x).cos() + 0.5 * (2.0 * TAU * x).cos() - 0.25 * (2.0 * TAU * x).sin();
        assert!((f.value(p(x)) - expected).abs() < 1e-14);
        assert!(f.validate(2000).is_ok());
        assert!(f.sup_norm() <= 1.75 + 1e-12);
        assert!(f.sup_norm() >= f.value(p(0.0)).abs());
    }

    #[test]
    fn constants_and_centering() {
        let c = Observable::constant(2.5);
        assert_eq!(c.value(p(0.77)), 2.5);
        assert_eq!(c.centered(2.5).value(p(0.1)), 0.0);
        let f = Observable::cos1().centered(0.1);
        assert!((f.value(p(0.0)) - 0.9).abs() < 1e-15);
        assert!((f.negated().value(p(0.0)) + 0.9).abs() < 1e-15);
    }

    #[test]
    fn pwl_observable() {
        let f = Observable::piecewise_linear(&[[0.0, 0.0], [0.5, 1.0]]).unwrap();
        assert_eq!(f.lipschitz, 2.0);
        assert!((f.value(p(0.25)) - 0.5).abs() < 1e-15);
        assert!((f.value(p(0.75)) - 0.5).abs() < 1e-15);
        assert!((f.value(p(0.9)) - 0.2).abs() < 1e-12);
        assert!(f.validate(1000).is_ok());
        assert_eq!(f.sup_norm(), 1.0);
    }

    #[test]
    fn understated_lipschitz_is_rejected() {
        let mut f = Observable::cos1();
        f.lipschitz = 1.0;
        assert!(f.validate(1000).is_err());
        let g = Observable::cos1().lipschitz_normalized();
        assert!((g.lipschitz - 1.0).abs() < 1e-15);
        assert!(g.validate(1000).is_ok());
    }
}
