//! The iterated function system `(maps, probs)`, its Markov operator on
//! measures, the dual operator on functions (exact tree traversal and Monte
//! Carlo), chain simulation and the derived systems (inverse, uniformized).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{circ_dist, CirclePoint};
use crate::error::{IfsError, Result};
use crate::homeo::{compose_symbols, Homeo, Word};
use crate::measure::EmpiricalMeasure;
use crate::observable::CircleFn;
use crate::rng::{Streams, SymbolSampler};
use crate::stats::Moments;

/// Default cap on the number of nodes of an exact composition tree.
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 24;
/// Default cap on the atom count produced by an exact push-forward.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

const MC_CHUNK: usize = 1024;
// trees at least this large are split into independent subtrees
const PARALLEL_TREE_NODES: u128 = 1 << 14;
const SUBTREE_TARGET: u128 = 256;

/// A finite family of circle homeomorphisms with positive probabilities.
#[derive(Clone, Debug)]
pub struct Ifs {
    maps: Vec<Homeo>,
    probs: Vec<f64>,
    sampler: SymbolSampler,
}

impl PartialEq for Ifs {
    fn eq(&self, other: &Self) -> bool {
        self.maps == other.maps && self.probs == other.probs
    }
}

/// Number of nodes below the root of a full `k`-ary tree of depth `n`.
pub fn tree_nodes(k: usize, n: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..n {
        level = level.saturating_mul(k as u128);
        total = total.saturating_add(level);
    }
    total
}

impl Ifs {
    pub fn new(maps: Vec<Homeo>, probs: Vec<f64>) -> Result<Self> {
        if maps.is_empty() {
            return Err(IfsError::Invalid("an IFS needs at least one map".into()));
        }
        if maps.len() != probs.len() {
            return Err(IfsError::Invalid(format!("{} maps but {} probabilities", maps.len(), probs.len())));
        }
        if let Some(p) = probs.iter().find(|&&p| !(p > 0.0)) {
            return Err(IfsError::Invalid(format!("probabilities must be strictly positive, got {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(IfsError::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        let sampler = SymbolSampler::new(&probs);
        Ok(Ifs { maps, probs, sampler })
    }

    /// Equal probabilities `1/k`.
    pub fn equal_weight(maps: Vec<Homeo>) -> Self {
        let k = maps.len();
        Ifs::new(maps, vec![1.0 / k as f64; k]).expect("equal weights are valid")
    }

    pub fn k(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[Homeo] {
        &self.maps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_equal_weight(&self) -> bool {
        let k = self.k() as f64;
        self.probs.iter().all(|&p| (p - 1.0 / k).abs() < 1e-15)
    }

    /// True when every map is a rotation, so Lebesgue measure is invariant for all of them.
    pub fn all_rotations(&self) -> bool {
        self.maps.iter().all(Homeo::is_rotation)
    }

    #[inline]
    pub fn apply_symbol(&self, i: usize, x: CirclePoint) -> CirclePoint {
        self.maps[i].apply(x)
    }

    #[inline]
    pub fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// One random step of the chain; returns the symbol used and the new state.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, x: CirclePoint, rng: &mut R) -> (usize, CirclePoint) {
        let i = self.sampler.sample(rng);
        (i, self.maps[i].apply(x))
    }

    /// Applies the word to `x`, first symbol first.
    pub fn compose_word(&self, w: &Word, x: CirclePoint) -> Result<CirclePoint> {
        compose_symbols(&self.maps, w.symbols(), x)
    }

    /// Probability of a word under the product measure.
    pub fn word_prob(&self, w: &Word) -> f64 {
        w.symbols().iter().map(|&s| self.probs[s]).product()
    }

    /// `P mu = sum_i p_i mu∘g_i^{-1}`: every atom splits into `k` atoms.
    pub fn markov_push(&self, mu: &EmpiricalMeasure, atom_cap: usize) -> Result<EmpiricalMeasure> {
        let needed = mu.len() as u128 * self.k() as u128;
        if needed > atom_cap as u128 {
            return Err(IfsError::AtomBudgetExceeded { needed, cap: atom_cap });
        }
        let mut atoms = Vec::with_capacity(needed as usize);
        for &(x, w) in mu.atoms() {
            for (g, &p) in self.maps.iter().zip(&self.probs) {
                atoms.push((g.apply(x), p * w));
            }
        }
        atoms.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
        Ok(EmpiricalMeasure::from_sorted_unchecked(atoms))
    }

    fn check_budget(&self, n: usize, budget: u64) -> Result<()> {
        let needed = tree_nodes(self.k(), n);
        if needed > budget as u128 {
            return Err(IfsError::NodeBudgetExceeded { depth: n, needed, budget });
        }
        Ok(())
    }

    /// Sums `prob(w) * value(g_w(root))` over all words `w` of each length
    /// `d = 0..=n`, by full traversal of the composition tree.
    ///
    /// Large trees are cut at a fixed depth into subtrees traversed in
    /// parallel and summed in prefix order, so the result does not depend on
    /// the number of workers.
    pub fn tree_level_sums<const P: usize, V>(&self, root: [CirclePoint; P], n: usize, budget: u64, value: &V) -> Result<Vec<f64>>
    where
        V: Fn(&[CirclePoint; P]) -> f64 + Sync,
    {
        self.check_budget(n, budget)?;
        let mut sums = vec![0.0; n + 1];
        sums[0] = value(&root);
        if n == 0 {
            return Ok(sums);
        }
        let k = self.k();
        if tree_nodes(k, n) < PARALLEL_TREE_NODES || k == 1 {
            self.visit(root, 1.0, 0, n, value, &mut sums);
            return Ok(sums);
        }
        let mut split = 1;
        while split < n - 1 && (k as u128).pow(split as u32) < SUBTREE_TARGET {
            split += 1;
        }
        // breadth-first frontier at depth `split`, in lexicographic order
        let mut frontier: Vec<([CirclePoint; P], f64)> = vec![(root, 1.0)];
        for d in 1..=split {
            let mut next = Vec::with_capacity(frontier.len() * k);
            for (state, w) in &frontier {
                for (g, &p) in self.maps.iter().zip(&self.probs) {
                    let child = state.map(|x| g.apply(x));
                    next.push((child, w * p));
                }
            }
            sums[d] = next.iter().map(|(s, w)| w * value(s)).sum();
            frontier = next;
        }
        let parts: Vec<Vec<f64>> = frontier
            .par_iter()
            .map(|(state, w)| {
                let mut local = vec![0.0; n + 1];
                self.visit(*state, *w, split, n, value, &mut local);
                local
            })
            .collect();
        for part in parts {
            for d in split + 1..=n {
                sums[d] += part[d];
            }
        }
        Ok(sums)
    }

    fn visit<const P: usize, V>(&self, state: [CirclePoint; P], weight: f64, depth: usize, n: usize, value: &V, sums: &mut [f64])
    where
        V: Fn(&[CirclePoint; P]) -> f64,
    {
        for (g, &p) in self.maps.iter().zip(&self.probs) {
            let child = state.map(|x| g.apply(x));
            let w = weight * p;
            sums[depth + 1] += w * value(&child);
            if depth + 1 < n {
                self.visit(child, w, depth + 1, n, value, sums);
            }
        }
    }

    /// `[U^0 f(x), U^1 f(x), ..., U^n f(x)]`.
    pub fn dual_levels<F: CircleFn + ?Sized>(&self, f: &F, x: CirclePoint, n: usize, budget: u64) -> Result<Vec<f64>> {
        self.tree_level_sums([x], n, budget, &|s: &[CirclePoint; 1]| f.eval(s[0]))
    }

    /// `U^n f(x)` by exact traversal.
    pub fn dual_exact<F: CircleFn + ?Sized>(&self, f: &F, x: CirclePoint, n: usize, budget: u64) -> Result<f64> {
        Ok(self.dual_levels(f, x, n, budget)?[n])
    }

    /// Partial sums `sum_{j=1..m} U^j f(x)` for `m = 1..=n`, from one traversal.
    pub fn dual_sum_exact<F: CircleFn + ?Sized>(&self, f: &F, x: CirclePoint, n: usize, budget: u64) -> Result<Vec<f64>> {
        let levels = self.dual_levels(f, x, n, budget)?;
        Ok(partial_sums(&levels[1..]))
    }

    /// `[U^d f(x) - U^d f(y)]_{d=0..=n}` from one shared tree: both points
    /// follow the same words and differences are taken pointwise.
    pub fn paired_dual_levels<F: CircleFn + ?Sized>(&self, f: &F, x: CirclePoint, y: CirclePoint, n: usize, budget: u64) -> Result<Vec<f64>> {
        self.tree_level_sums([x, y], n, budget, &|s: &[CirclePoint; 2]| f.eval(s[0]) - f.eval(s[1]))
    }

    /// Monte Carlo estimate of `U^n f(x)`: sample `i` follows stream `i`.
    pub fn dual_mc<F: CircleFn + ?Sized>(&self, f: &F, x: CirclePoint, n: usize, samples: usize, streams: &Streams) -> McEstimate {
        let chunks: Vec<Moments> = (0..samples.div_ceil(MC_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut m = Moments::default();
                for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                    let mut rng = streams.stream(i as u64);
                    let mut p = x;
                    for _ in 0..n {
                        p = self.step(p, &mut rng).1;
                    }
                    m.push(f.eval(p));
                }
                m
            })
            .collect();
        let mut total = Moments::default();
        chunks.iter().for_each(|m| total.merge(m));
        McEstimate { estimate: total.mean, stderr: total.stderr(), samples }
    }

    /// `X_0 = x0, X_{t+1} = g_{i_t}(X_t)`; returns `n + 1` states.
    pub fn simulate_chain<R: Rng + ?Sized>(&self, x0: CirclePoint, n: usize, rng: &mut R) -> Vec<CirclePoint> {
        let mut out = Vec::with_capacity(n + 1);
        let mut x = x0;
        out.push(x);
        for _ in 0..n {
            x = self.step(x, rng).1;
            out.push(x);
        }
        out
    }

    /// Empirical approximation of the stationary law: after `burn_in` steps
    /// from `x0`, every `thinning`-th state is kept. The `count` states are
    /// split over `chains` independent chains (chain `j` uses stream `j`).
    pub fn stationary_sample(&self, opts: &StationaryOptions, streams: &Streams) -> Result<EmpiricalMeasure> {
        if opts.count == 0 {
            return Err(IfsError::Invalid("stationary sample needs count >= 1".into()));
        }
        let chains = opts.chains.clamp(1, opts.count);
        let thinning = opts.thinning.max(1);
        let per: Vec<usize> = (0..chains).map(|j| opts.count / chains + usize::from(j < opts.count % chains)).collect();
        let parts: Vec<Vec<CirclePoint>> = per
            .par_iter()
            .enumerate()
            .map(|(j, &m)| {
                let mut rng = streams.stream(j as u64);
                let mut x = opts.x0;
                for _ in 0..opts.burn_in {
                    x = self.step(x, &mut rng).1;
                }
                let mut out = Vec::with_capacity(m);
                for _ in 0..m {
                    for _ in 0..thinning {
                        x = self.step(x, &mut rng).1;
                    }
                    out.push(x);
                }
                out
            })
            .collect();
        let mut points: Vec<CirclePoint> = parts.into_iter().flatten().collect();
        points.sort_by(|a, b| a.value().total_cmp(&b.value()));
        let w = 1.0 / points.len() as f64;
        Ok(EmpiricalMeasure::from_sorted_unchecked(points.into_iter().map(|x| (x, w)).collect()))
    }

    /// Same probabilities, every map replaced by its inverse.
    pub fn inverse_system(&self) -> Ifs {
        Ifs { maps: self.maps.iter().map(Homeo::inverse).collect(), probs: self.probs.clone(), sampler: self.sampler.clone() }
    }

    /// Rewrites rational probabilities `m_i / n` as `N = sum m_i` equally
    /// likely symbols, map `i` repeated `m_i` times. `denominators` holds one
    /// denominator per probability (or a single common one).
    pub fn uniformize(&self, denominators: &[u64]) -> Result<Ifs> {
        if denominators.is_empty() || denominators.contains(&0) {
            return Err(IfsError::Invalid("denominators must be positive".into()));
        }
        let common = denominators.iter().fold(1u64, |acc, &d| lcm(acc, d));
        let mut counts = Vec::with_capacity(self.k());
        for &p in &self.probs {
            let m = (p * common as f64).round();
            if m < 1.0 || (p - m / common as f64).abs() >= 1e-12 {
                return Err(IfsError::NotRational { prob: p, denominator: common });
            }
            counts.push(m as u64);
        }
        let g = counts.iter().fold(0u64, |acc, &m| gcd(acc, m));
        let mut maps = Vec::new();
        for (h, &m) in self.maps.iter().zip(&counts) {
            for _ in 0..m / g {
                maps.push(h.clone());
            }
        }
        Ok(Ifs::equal_weight(maps))
    }

    /// `{g_i(x) : x in A, i = 1..k}`, sorted, duplicates within 1e-12 removed.
    pub fn support_step(&self, points: &[CirclePoint]) -> Vec<CirclePoint> {
        let mut out: Vec<CirclePoint> = points.iter().flat_map(|&x| self.maps.iter().map(move |g| g.apply(x))).collect();
        dedup_circle(&mut out, 1e-12);
        out
    }
}

/// Sorts and removes points within `tol` of their predecessor, including
/// across the `1 -> 0` seam.
pub fn dedup_circle(points: &mut Vec<CirclePoint>, tol: f64) {
    points.sort_by(|a, b| a.value().total_cmp(&b.value()));
    points.dedup_by(|b, a| b.value() - a.value() <= tol);
    if points.len() > 1 && circ_dist(points[0], *points.last().unwrap()) <= tol {
        points.pop();
    }
}

pub(crate) fn partial_sums(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    pub x0: CirclePoint,
    pub burn_in: usize,
    pub count: usize,
    pub thinning: usize,
    pub chains: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions { x0: CirclePoint::new(0.0), burn_in: 1000, count: 100_000, thinning: 1, chains: 16 }
    }
}
