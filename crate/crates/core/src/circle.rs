//! Geometry of the unit circle `R/Z`: points, closed counterclockwise arcs and
//! the wraparound distance.
//!
//! The circle has circumference one, so arc lengths, measures of arcs and
//! cumulative distribution functions all live on the same scale.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of the circle, stored as its representative in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct CirclePoint(f64);

impl CirclePoint {
    /// Reduces any finite real modulo one.
    #[inline]
    pub fn new(t: f64) -> Self {
        let r = t.rem_euclid(1.0);
        // rem_euclid of a tiny negative number rounds up to exactly 1.0
        if r >= 1.0 {
            CirclePoint(0.0)
        } else {
            CirclePoint(r)
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Counterclockwise displacement from `self` to `other`, in `[0, 1)`.
    #[inline]
    pub fn ccw_to(self, other: CirclePoint) -> f64 {
        CirclePoint::new(other.0 - self.0).0
    }

    #[inline]
    pub fn shifted(self, by: f64) -> Self {
        CirclePoint::new(self.0 + by)
    }
}

impl From<f64> for CirclePoint {
    fn from(t: f64) -> Self {
        CirclePoint::new(t)
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Length of the shorter of the two arcs joining `x` and `y`; lies in `[0, 1/2]`.
#[inline]
pub fn circ_dist(x: CirclePoint, y: CirclePoint) -> f64 {
    let d = (x.0 - y.0).abs();
    d.min(1.0 - d)
}

/// The closed counterclockwise arc from `start` to `end`.
///
/// An arc with `start == end` is degenerate: it has length zero and contains
/// exactly its single point. The full circle is not representable as an `Arc`
/// and is handled by callers that need it (see [`Region`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: CirclePoint,
    pub end: CirclePoint,
}

impl Arc {
    pub fn new(start: impl Into<CirclePoint>, end: impl Into<CirclePoint>) -> Self {
        Arc { start: start.into(), end: end.into() }
    }

    /// Arc of the given length starting at `start`; `length` is reduced mod 1.
    pub fn from_start_len(start: CirclePoint, length: f64) -> Self {
        Arc { start, end: start.shifted(length) }
    }

    /// Arc of the given length centred at `center`.
    pub fn centered(center: CirclePoint, length: f64) -> Self {
        Arc { start: center.shifted(-length / 2.0), end: center.shifted(length / 2.0) }
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.start.ccw_to(self.end)
    }

    /// Endpoint-inclusive membership.
    #[inline]
    pub fn contains(&self, z: CirclePoint) -> bool {
        self.start.ccw_to(z) <= self.length()
    }

    /// The complementary arc `[end, start]`; shares both endpoints with `self`.
    pub fn complement(&self) -> Arc {
        Arc { start: self.end, end: self.start }
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.start.shifted(self.length() / 2.0)
    }
}

pub fn arc_length(a: &Arc) -> f64 {
    a.length()
}

pub fn arc_contains(a: &Arc, z: CirclePoint) -> bool {
    a.contains(z)
}

/// A target set for hitting and steering: either a closed arc or the whole circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Full,
    Arc(Arc),
}

impl Region {
    #[inline]
    pub fn contains(&self, z: CirclePoint) -> bool {
        match self {
            Region::Full => true,
            Region::Arc(a) => a.contains(z),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Region::Full => 1.0,
            Region::Arc(a) => a.length(),
        }
    }
}

impl From<Arc> for Region {
    fn from(a: Arc) -> Self {
        Region::Arc(a)
    }
}

/// `n` equally spaced points `i/n`.
pub fn uniform_grid(n: usize) -> Vec<CirclePoint> {
    (0..n).map(|i| CirclePoint::new(i as f64 / n as f64)).collect()
}
