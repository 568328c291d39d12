//! Finitely supported probability measures on the circle and the metrics
//! built on them: the exact circular Wasserstein-1 distance and the arc-mass
//! metric `chi(x, y) = min(mu([x, y]), mu([y, x]))`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::circle::{Arc, CirclePoint};
use crate::error::{IfsError, Result};
use crate::observable::CircleFn;

/// Weighted atoms on the circle, sorted by position, weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct EmpiricalMeasure {
    atoms: Vec<(CirclePoint, f64)>,
}

impl EmpiricalMeasure {
    /// Normalizes positive weights and sorts by position.
    pub fn from_weighted(atoms: Vec<(CirclePoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(IfsError::Invalid("measure needs at least one atom".into()));
        }
        if atoms.iter().any(|&(_, w)| !(w > 0.0) || !w.is_finite()) {
            return Err(IfsError::Invalid("atom weights must be positive and finite".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let mut atoms: Vec<_> = atoms.into_iter().map(|(x, w)| (x, w / total)).collect();
        atoms.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
        Ok(EmpiricalMeasure { atoms })
    }

    /// Equal weights on the given points.
    pub fn from_points(points: &[CirclePoint]) -> Result<Self> {
        Self::from_weighted(points.iter().map(|&x| (x, 1.0)).collect())
    }

    pub fn dirac(x: CirclePoint) -> Self {
        EmpiricalMeasure { atoms: vec![(x, 1.0)] }
    }

    /// Equal weights on `i/n`.
    pub fn uniform_grid(n: usize) -> Self {
        let w = 1.0 / n as f64;
        EmpiricalMeasure { atoms: (0..n).map(|i| (CirclePoint::new(i as f64 / n as f64), w)).collect() }
    }

    /// Builds from atoms that are already sorted and normalized.
    pub(crate) fn from_sorted_unchecked(atoms: Vec<(CirclePoint, f64)>) -> Self {
        EmpiricalMeasure { atoms }
    }

    pub fn atoms(&self) -> &[(CirclePoint, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `<f, mu>`, summed in position order.
    pub fn integrate<F: CircleFn + ?Sized>(&self, f: &F) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * f.eval(x)).sum()
    }

    /// Same measure with coincident atoms merged.
    pub fn merged(&self) -> Self {
        let mut out: Vec<(CirclePoint, f64)> = Vec::with_capacity(self.atoms.len());
        for &(x, w) in &self.atoms {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => out.push((x, w)),
            }
        }
        EmpiricalMeasure { atoms: out }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["position", "weight"])?;
        for &(x, m) in &self.atoms {
            wr.write_record([format!("{}", x.value()), format!("{m}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut atoms = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| IfsError::Parse(format!("row {}: column {} is not a number", line + 2, i + 1)))
            };
            atoms.push((CirclePoint::new(parse(0)?), parse(1)?));
        }
        Self::from_weighted(atoms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl TryFrom<Vec<[f64; 2]>> for EmpiricalMeasure {
    type Error = IfsError;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_weighted(v.into_iter().map(|[x, w]| (CirclePoint::new(x), w)).collect())
    }
}

impl From<EmpiricalMeasure> for Vec<[f64; 2]> {
    fn from(m: EmpiricalMeasure) -> Self {
        m.atoms.into_iter().map(|(x, w)| [x.value(), w]).collect()
    }
}

/// Exact Wasserstein-1 distance on the circle with the arc-length cost.
///
/// On the circle `W1(mu, nu) = min_s ∫ |F_mu(t) - F_nu(t) - s| dt`; the
/// integrand is piecewise constant between atom positions, so the optimal `s`
/// is a length-weighted median of the difference and the integral is a finite
/// sum.
pub fn w1_circle(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(mu.len() + nu.len());
    events.extend(mu.atoms.iter().map(|&(x, w)| (x.value(), w)));
    events.extend(nu.atoms.iter().map(|&(x, w)| (x.value(), -w)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    // (value of F_mu - F_nu, length of the interval where it holds)
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(events.len() + 1);
    // the two CDFs are accumulated separately so identical inputs cancel exactly
    let (mut f_mu, mut f_nu) = (0.0, 0.0);
    let mut prev = 0.0;
    let mut i = 0;
    while i < events.len() {
        let pos = events[i].0;
        if pos > prev {
            pieces.push((f_mu - f_nu, pos - prev));
        }
        while i < events.len() && events[i].0 == pos {
            let w = events[i].1;
            if w > 0.0 { f_mu += w } else { f_nu -= w }
            i += 1;
        }
        prev = pos;
    }
    if prev < 1.0 {
        pieces.push((f_mu - f_nu, 1.0 - prev));
    }

    let shift = weighted_median(&mut pieces.clone());
    pieces.iter().map(|&(d, len)| len * (d - shift).abs()).sum()
}

/// Lower weighted median of `(value, weight)` pairs.
fn weighted_median(pieces: &mut [(f64, f64)]) -> f64 {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(v, w) in pieces.iter() {
        acc += w;
        if acc >= 0.5 * total {
            return v;
        }
    }
    pieces.last().map(|p| p.0).unwrap_or(0.0)
}

/// The arc-mass metric of a reference measure.
#[derive(Clone, Debug)]
pub struct ChiMetric {
    positions: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ChiMetric {
    pub fn new(base: &EmpiricalMeasure) -> Self {
        let base = base.merged();
        let positions = base.atoms.iter().map(|a| a.0.value()).collect();
        let mut acc = 0.0;
        let cumulative = base
            .atoms
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        ChiMetric { positions, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    /// Mass of atoms at positions `<= t`.
    fn mass_le(&self, t: f64) -> f64 {
        let i = self.positions.partition_point(|&p| p <= t);
        if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    /// Mass of atoms at positions `< t`.
    fn mass_lt(&self, t: f64) -> f64 {
        let i = self.positions.partition_point(|&p| p < t);
        if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    /// Mass of the closed arc, endpoints included.
    pub fn arc_mass(&self, arc: &Arc) -> f64 {
        let (a, b) = (arc.start.value(), arc.end.value());
        if a <= b {
            self.mass_le(b) - self.mass_lt(a)
        } else {
            self.total() - self.mass_lt(a) + self.mass_le(b)
        }
    }

    pub fn eval(&self, x: CirclePoint, y: CirclePoint) -> f64 {
        if x == y {
            return 0.0;
        }
        self.arc_mass(&Arc { start: x, end: y }).min(self.arc_mass(&Arc { start: y, end: x }))
    }
}

pub fn chi_eval(chi: &ChiMetric, x: CirclePoint, y: CirclePoint) -> f64 {
    chi.eval(x, y)
}

/// `f(z) = chi(z, z0)`, a function that is 1-Lipschitz for `chi`.
#[derive(Clone, Copy, Debug)]
pub struct ChiProbe<'a> {
    pub chi: &'a ChiMetric,
    pub anchor: CirclePoint,
}

impl CircleFn for ChiProbe<'_> {
    fn eval(&self, x: CirclePoint) -> f64 {
        self.chi.eval(x, self.anchor)
    }
}

pub fn chi_lipschitz_probe(chi: &ChiMetric, z0: CirclePoint) -> ChiProbe<'_> {
    ChiProbe { chi, anchor: z0 }
}

/// Longest arc free of atoms (its endpoints are atoms) and its length.
pub fn max_gap(mu: &EmpiricalMeasure) -> (f64, Arc) {
    let pos: Vec<CirclePoint> = mu.merged().atoms.iter().map(|a| a.0).collect();
    if pos.len() == 1 {
        return (1.0, Arc { start: pos[0], end: pos[0] });
    }
    max_gap_of_sorted(&pos)
}

pub(crate) fn max_gap_of_sorted(pos: &[CirclePoint]) -> (f64, Arc) {
    let n = pos.len();
    let mut best = (pos[0].value() + 1.0 - pos[n - 1].value(), Arc { start: pos[n - 1], end: pos[0] });
    for w in pos.windows(2) {
        let g = w[1].value() - w[0].value();
        if g > best.0 {
            best = (g, Arc { start: w[0], end: w[1] });
        }
    }
    best
}

/// Windows of length `window` whose mass exceeds `threshold`, reported by
/// their left end; overlapping detections keep only the heaviest window.
pub fn atom_scan(mu: &EmpiricalMeasure, window: f64, threshold: f64) -> Vec<(CirclePoint, f64)> {
    let atoms = mu.merged().atoms;
    let n = atoms.len();
    let mut candidates = Vec::new();
    let mut j = 0usize; // exclusive end, counted on the doubled sequence
    let mut mass = 0.0;
    for i in 0..n {
        if j < i {
            j = i;
            mass = 0.0;
        }
        let start = atoms[i].0.value();
        while j < i + n {
            let (p, w) = atoms[j % n];
            let offset = if j >= n { p.value() + 1.0 } else { p.value() } - start;
            if offset > window {
                break;
            }
            mass += w;
            j += 1;
        }
        if mass > threshold {
            candidates.push((atoms[i].0, mass));
        }
        mass -= atoms[i].1;
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.value().total_cmp(&b.0.value())));
    let mut accepted: Vec<(CirclePoint, f64)> = Vec::new();
    for c in candidates {
        if accepted.iter().all(|a| crate::circle::circ_dist(a.0, c.0) > window) {
            accepted.push(c);
        }
    }
    accepted.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::circ_dist;

    fn p(t: f64) -> CirclePoint {
        CirclePoint::new(t)
    }

    #[test]
    fn w1_two_diracs_is_distance() {
        for (x, y) in [(0.1, 0.9), (0.0, 0.5), (0.3, 0.35), (0.7, 0.2)] {
            let d = w1_circle(&EmpiricalMeasure::dirac(p(x)), &EmpiricalMeasure::dirac(p(y)));
            assert!((d - circ_dist(p(x), p(y))).abs() < 1e-15, "{x} {y} {d}");
        }
    }

    #[test]
    fn w1_self_is_zero_and_grid_shift() {
        let g = EmpiricalMeasure::uniform_grid(10);
        assert_eq!(w1_circle(&g, &g), 0.0);
        let shifted = EmpiricalMeasure::from_points(&(0..10).map(|i| p(i as f64 / 10.0 + 0.03)).collect::<Vec<_>>()).unwrap();
        assert!((w1_circle(&g, &shifted) - 0.03).abs() < 1e-12);
    }

    #[test]
    fn chi_on_uniform_base_is_distance() {
        let chi = ChiMetric::new(&EmpiricalMeasure::uniform_grid(10_000));
        for (x, y) in [(0.1, 0.9), (0.2, 0.45), (0.0, 0.5), (0.123, 0.87)] {
            assert!((chi.eval(p(x), p(y)) - circ_dist(p(x), p(y))).abs() < 2e-4);
        }
        assert_eq!(chi.eval(p(0.3), p(0.3)), 0.0);
    }

    #[test]
    fn chi_jumps_across_heavy_atom() {
        let mut atoms: Vec<_> = (0..100).map(|i| (p(i as f64 / 100.0 + 0.005), 0.007)).collect();
        atoms.push((p(0.5), 0.3));
        let base = EmpiricalMeasure::from_weighted(atoms).unwrap();
        let chi = ChiMetric::new(&base);
        let heavy = 0.3;
        // direct counting: points straddling 0.5 versus points on the same side
        let across = chi.eval(p(0.49), p(0.51));
        let same_side = chi.eval(p(0.51), p(0.53));
        let light = 0.007 / (100.0 * 0.007 + heavy);
        let w = heavy / (100.0 * 0.007 + heavy);
        assert!((across - (w + 2.0 * light)).abs() < 1e-12);
        assert!((same_side - 2.0 * light).abs() < 1e-12);
    }

    #[test]
    fn probe_is_chi_lipschitz() {
        let base = EmpiricalMeasure::from_weighted((0..50).map(|i| (p((i as f64 * 0.618).fract()), 1.0 + (i % 3) as f64)).collect()).unwrap();
        let chi = ChiMetric::new(&base);
        let probe = chi_lipschitz_probe(&chi, p(0.3));
        assert_eq!(probe.eval(p(0.3)), 0.0);
        for i in 0..40 {
            for j in 0..40 {
                let (x, y) = (p(i as f64 / 40.0 + 0.001), p(j as f64 / 40.0 + 0.002));
                assert!((probe.eval(x) - probe.eval(y)).abs() <= chi.eval(x, y) + 1e-12);
            }
        }
    }

    #[test]
    fn gaps() {
        let (g, _) = max_gap(&EmpiricalMeasure::uniform_grid(8));
        assert!((g - 0.125).abs() < 1e-15);
        let (g, arc) = max_gap(&EmpiricalMeasure::dirac(p(0.4)));
        assert_eq!(g, 1.0);
        assert_eq!(arc.start, p(0.4));
        let m = EmpiricalMeasure::from_points(&[p(0.1), p(0.2), p(0.9)]).unwrap();
        let (g, arc) = max_gap(&m);
        assert!((g - 0.7).abs() < 1e-12);
        assert_eq!((arc.start, arc.end), (p(0.2), p(0.9)));
    }

    #[test]
    fn atoms_detected() {
        assert!(atom_scan(&EmpiricalMeasure::uniform_grid(1000), 1e-4, 0.01).is_empty());
        let mut atoms: Vec<_> = (0..1000).map(|i| (p(i as f64 / 1000.0 + 0.0005), 0.7 / 1000.0)).collect();
        atoms.push((p(0.25), 0.3));
        let found = atom_scan(&EmpiricalMeasure::from_weighted(atoms).unwrap(), 1e-4, 0.01);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].0, p(0.25));
        assert!((found[0].1 - 0.3).abs() < 1e-12);
        // an atom right before 1 is found through the wraparound window
        let m = EmpiricalMeasure::from_weighted(vec![(p(0.99995), 0.5), (p(0.00002), 0.1), (p(0.5), 0.4)]).unwrap();
        let found = atom_scan(&m, 1e-4, 0.55);
        assert_eq!(found.len(), 1);
        assert!((found[0].1 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let m = EmpiricalMeasure::from_weighted(vec![(p(0.25), 1.0), (p(0.75), 3.0)]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("position,weight\n"));
        assert_eq!(EmpiricalMeasure::read_csv(buf.as_slice()).unwrap(), m);
        let js = m.to_json().unwrap();
        assert_eq!(js, "[[0.25,0.25],[0.75,0.75]]");
        assert_eq!(EmpiricalMeasure::from_json(&js).unwrap(), m);
        assert!(EmpiricalMeasure::from_json("[[0.1,-1.0]]").is_err());
    }
}
