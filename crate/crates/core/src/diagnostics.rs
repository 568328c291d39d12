//! Empirical evidence for the structural hypotheses of the CLT: equicontinuity
//! of the dual iterates, contraction of arcs under random words, hitting
//! masses, dense orbits, stability and uniqueness of the invariant measure.
//!
//! Every verdict is evidence at a stated threshold and sample budget, never a
//! proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{Arc, CirclePoint, Region};
use crate::error::{IfsError, Result};
use crate::ifs::{dedup_circle, tree_nodes, Ifs};
use crate::measure::{max_gap_of_sorted, w1_circle, EmpiricalMeasure};
use crate::observable::CircleFn;
use crate::rng::Streams;
use crate::stats::{Proportion, Z95};

const PATH_CHUNK: usize = 512;

/// How dual iterates are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMode {
    /// Full composition tree shared by both points.
    Exact,
    /// Sampled paths, the same symbols driving both points.
    Mc,
}

/// Settings shared by the two equicontinuity profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub n_max: usize,
    pub mode: DualMode,
    /// Paths per point pair in `mc` mode; ignored in `exact` mode.
    pub samples: usize,
    pub node_budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub delta: f64,
    pub value: f64,
    /// Iterate count where the supremum was attained.
    pub argmax_n: usize,
}

/// `[U^n f(y) - U^n f(x)]_{n=0..=n_max}`.
pub fn difference_levels<F: CircleFn + ?Sized>(
    ifs: &Ifs,
    f: &F,
    x: CirclePoint,
    y: CirclePoint,
    opts: &ProfileOptions,
    streams: &Streams,
) -> Result<Vec<f64>> {
    match opts.mode {
        DualMode::Exact => ifs.paired_dual_levels(f, y, x, opts.n_max, opts.node_budget),
        DualMode::Mc => {
            if opts.samples < 2 {
                return Err(IfsError::Invalid("mc mode needs at least 2 samples".into()));
            }
            let n = opts.n_max;
            let chunks: Vec<Vec<f64>> = (0..opts.samples.div_ceil(PATH_CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; n + 1];
                    for i in c * PATH_CHUNK..((c + 1) * PATH_CHUNK).min(opts.samples) {
                        let mut rng = streams.stream(i as u64);
                        let (mut a, mut b) = (x, y);
                        acc[0] += f.eval(b) - f.eval(a);
                        for slot in acc.iter_mut().skip(1) {
                            let s = ifs.sample_symbol(&mut rng);
                            a = ifs.apply_symbol(s, a);
                            b = ifs.apply_symbol(s, b);
                            *slot += f.eval(b) - f.eval(a);
                        }
                    }
                    acc
                })
                .collect();
            let mut total = vec![0.0; n + 1];
            for c in &chunks {
                total.iter_mut().zip(c).for_each(|(t, v)| *t += v);
            }
            Ok(total.into_iter().map(|v| v / opts.samples as f64).collect())
        }
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    match deltas.iter().find(|&&d| !(d > 0.0 && d <= 0.25)) {
        Some(d) => Err(IfsError::Invalid(format!("deltas must lie in (0, 1/4], got {d}"))),
        None => Ok(()),
    }
}

fn profile<F, G>(ifs: &Ifs, f: &F, x: CirclePoint, deltas: &[f64], opts: &ProfileOptions, streams: &Streams, reduce: G) -> Result<Vec<ProfileRow>>
where
    F: CircleFn + ?Sized,
    G: Fn(&[f64]) -> (f64, usize),
{
    check_deltas(deltas)?;
    deltas
        .iter()
        .map(|&delta| {
            let mut best = (0.0, 0);
            for y in [x.shifted(delta), x.shifted(-delta)] {
                let d = difference_levels(ifs, f, x, y, opts, streams)?;
                let r = reduce(&d);
                if r.0 > best.0 {
                    best = r;
                }
            }
            Ok(ProfileRow { delta, value: best.0, argmax_n: best.1 })
        })
        .collect()
}

/// `delta -> sup_{n <= n_max} max_{y = x ± delta} |U^n f(y) - U^n f(x)|`.
pub fn e_property_profile<F: CircleFn + ?Sized>(
    ifs: &Ifs,
    f: &F,
    x: CirclePoint,
    deltas: &[f64],
    opts: &ProfileOptions,
    streams: &Streams,
) -> Result<Vec<ProfileRow>> {
    profile(ifs, f, x, deltas, opts, streams, |d| {
        d.iter().enumerate().fold((0.0, 0), |best, (n, v)| if v.abs() > best.0 { (v.abs(), n) } else { best })
    })
}

/// As [`e_property_profile`] for the averages `(1/n) sum_{j=1..n} U^j f`.
pub fn cesaro_profile<F: CircleFn + ?Sized>(
    ifs: &Ifs,
    f: &F,
    x: CirclePoint,
    deltas: &[f64],
    opts: &ProfileOptions,
    streams: &Streams,
) -> Result<Vec<ProfileRow>> {
    profile(ifs, f, x, deltas, opts, streams, |d| {
        let mut acc = 0.0;
        let mut best = (0.0, 0);
        for (n, v) in d.iter().enumerate().skip(1) {
            acc += v;
            let avg = (acc / n as f64).abs();
            if avg > best.0 {
                best = (avg, n);
            }
        }
        best
    })
}

/// Evidence that random words shrink some arc geometrically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub arc: Arc,
    pub q_hat: f64,
    /// 95% interval for `q_hat` (log-normal approximation over contracting paths).
    pub q_lower: f64,
    pub q_upper: f64,
    pub depth: usize,
    /// Fraction of paths whose image lengths stay below `q_hat^n` times the initial length.
    pub mass_hat: Proportion,
    /// Fraction of paths with an envelope rate below one.
    pub contracting: Proportion,
    /// Hitting time of `arc` and the least hitting mass over the start grid, once computed.
    pub m: Option<usize>,
    pub hit_mass_hat: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// Per-arc row of the certificate search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcScore {
    pub start: f64,
    pub end: f64,
    pub contracting_fraction: f64,
    pub q_hat: f64,
    pub mass_hat: f64,
}

/// `n` arcs of the given length centred on a uniform grid.
pub fn default_candidate_arcs(n: usize, length: f64) -> Vec<Arc> {
    (0..n).map(|i| Arc::centered(CirclePoint::new(i as f64 / n as f64), length)).collect()
}

// below this an image arc counts as collapsed to a point
const COLLAPSED: f64 = 1e-14;
// envelope rates this close to one are float noise on isometries
const RATE_TOLERANCE: f64 = 1e-9;

/// Smallest `r` with `L_n <= r^n L_0` for all `n <= depth` along one random path.
fn envelope_rate<R: rand::Rng>(ifs: &Ifs, arc: &Arc, depth: usize, rng: &mut R) -> f64 {
    let l0 = arc.length();
    let (mut a, mut b) = (arc.start, arc.end);
    let mut prev = l0;
    let mut rate: f64 = 0.0;
    for n in 1..=depth {
        let s = ifs.sample_symbol(rng);
        a = ifs.apply_symbol(s, a);
        b = ifs.apply_symbol(s, b);
        let mut len = a.ccw_to(b);
        // orientation is preserved, so a tiny arc cannot jump to nearly the full circle
        if prev < 0.25 && len > 0.75 {
            len = 0.0;
        }
        prev = len;
        rate = rate.max((len.max(COLLAPSED) / l0).powf(1.0 / n as f64));
    }
    rate
}

fn score_arc(ifs: &Ifs, arc: &Arc, depth: usize, trials: usize, streams: &Streams) -> Vec<f64> {
    (0..trials).into_par_iter().map(|t| envelope_rate(ifs, arc, depth, &mut streams.stream(t as u64))).collect()
}

struct ArcFit {
    contracting: u64,
    q_hat: f64,
    q_lower: f64,
    q_upper: f64,
    within: u64,
}

fn fit_rates(rates: &[f64]) -> ArcFit {
    let logs: Vec<f64> = rates.iter().filter(|&&r| r < 1.0 - RATE_TOLERANCE).map(|r| r.ln()).collect();
    if logs.is_empty() {
        return ArcFit { contracting: 0, q_hat: 1.0, q_lower: 1.0, q_upper: 1.0, within: 0 };
    }
    let m = crate::stats::Moments::from_slice(&logs);
    let q_hat = m.mean.exp();
    let half = Z95 * m.stderr();
    let within = rates.iter().filter(|&&r| r <= q_hat * (1.0 + 1e-12)).count() as u64;
    ArcFit { contracting: logs.len() as u64, q_hat, q_lower: (m.mean - half).exp(), q_upper: (m.mean + half).exp().min(1.0), within }
}

/// Searches `candidate_arcs` for the arc whose random images contract most
/// often. For each path the envelope rate `r = max_n (L_n / L_0)^{1/n}` is
/// recorded; paths with `r < 1` contract. `q_hat` is the geometric mean rate
/// over contracting paths and `mass_hat` the fraction of all paths with
/// `r <= q_hat`. Trial `t` uses stream `t` for every arc.
pub fn contraction_certificate(
    ifs: &Ifs,
    candidate_arcs: &[Arc],
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<(ContractionCertificate, Vec<ArcScore>)> {
    if depth < 8 || trials < 100 {
        return Err(IfsError::Invalid("contraction certificate needs depth >= 8 and trials >= 100".into()));
    }
    if candidate_arcs.is_empty() || candidate_arcs.iter().any(|a| a.length() <= 0.0) {
        return Err(IfsError::Invalid("candidate arcs must be nonempty with positive length".into()));
    }
    let streams = Streams::new(seed).derive_named("contraction");
    let mut scores = Vec::with_capacity(candidate_arcs.len());
    let mut best: Option<(usize, ArcFit)> = None;
    for (i, arc) in candidate_arcs.iter().enumerate() {
        let fit = fit_rates(&score_arc(ifs, arc, depth, trials, &streams));
        scores.push(ArcScore {
            start: arc.start.value(),
            end: arc.end.value(),
            contracting_fraction: fit.contracting as f64 / trials as f64,
            q_hat: fit.q_hat,
            mass_hat: fit.within as f64 / trials as f64,
        });
        if best.as_ref().is_none_or(|(_, b)| fit.contracting > b.contracting) {
            best = Some((i, fit));
        }
    }
    let (i, fit) = best.expect("at least one candidate");
    if fit.within == 0 {
        return Err(IfsError::NoContractionFound);
    }
    let cert = ContractionCertificate {
        arc: candidate_arcs[i],
        q_hat: fit.q_hat,
        q_lower: fit.q_lower,
        q_upper: fit.q_upper,
        depth,
        mass_hat: Proportion::new(fit.within, trials as u64, Z95),
        contracting: Proportion::new(fit.contracting, trials as u64, Z95),
        m: None,
        hit_mass_hat: None,
        trials,
        seed,
    };
    Ok((cert, scores))
}

/// Least `m` with positive hitting mass from every grid start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub m: usize,
    /// `min_x P^m delta_x(I)` over the grid.
    pub hit_mass_hat: f64,
    /// Whether `hit_mass_hat` came from exact word enumeration.
    pub exact: bool,
    /// Wilson lower bound of the worst grid start (equals `hit_mass_hat` when exact).
    pub hit_mass_lower: f64,
    pub x_grid: usize,
    /// Worst grid start.
    pub argmin_x: f64,
}

/// Finds the least `m <= m_max` such that `P^m delta_x(I) > 0` for all `x_grid`
/// equally spaced starts. Depths whose trees fit `node_budget` are enumerated
/// exactly; deeper ones are sampled with `mc_samples` paths per start.
pub fn hitting_parameters(
    ifs: &Ifs,
    target: &Region,
    m_max: usize,
    x_grid: usize,
    node_budget: u64,
    mc_samples: usize,
    streams: &Streams,
) -> Result<HittingReport> {
    if target.length() <= 0.0 {
        return Err(IfsError::Invalid("target arc must have positive length".into()));
    }
    if x_grid == 0 {
        return Err(IfsError::Invalid("x_grid must be positive".into()));
    }
    let grid = crate::circle::uniform_grid(x_grid);
    let mut exact_depth = 0;
    while exact_depth < m_max && tree_nodes(ifs.k(), exact_depth + 1) * x_grid as u128 <= node_budget as u128 * 64 {
        exact_depth += 1;
    }
    let indicator = |s: &[CirclePoint; 1]| if target.contains(s[0]) { 1.0 } else { 0.0 };
    // iterative deepening: most targets are reached long before the budget depth
    let mut searched = 0;
    let mut depth = exact_depth.min(4);
    loop {
        let levels: Vec<Vec<f64>> = grid
            .par_iter()
            .map(|&x| ifs.tree_level_sums([x], depth, node_budget, &indicator))
            .collect::<Result<_>>()?;
        for m in searched..=depth {
            let (argmin, worst) = levels.iter().enumerate().fold((0, f64::INFINITY), |b, (i, l)| if l[m] < b.1 { (i, l[m]) } else { b });
            if worst > 0.0 {
                return Ok(HittingReport { m, hit_mass_hat: worst, exact: true, hit_mass_lower: worst, x_grid, argmin_x: grid[argmin].value() });
            }
        }
        if depth == exact_depth {
            break;
        }
        searched = depth + 1;
        depth = (2 * depth).min(exact_depth);
    }
    if exact_depth == m_max || mc_samples == 0 {
        return Err(IfsError::NotReached { m_max });
    }
    // sampled depths: hits[x][m] counts paths inside the target at step m
    let hits: Vec<Vec<u64>> = grid
        .par_iter()
        .enumerate()
        .map(|(gi, &x)| {
            let s = streams.derive(gi as u64);
            let mut counts = vec![0u64; m_max + 1];
            for i in 0..mc_samples {
                let mut rng = s.stream(i as u64);
                let mut p = x;
                for c in counts.iter_mut().skip(1) {
                    p = ifs.step(p, &mut rng).1;
                    *c += u64::from(target.contains(p));
                }
            }
            counts
        })
        .collect();
    for m in exact_depth + 1..=m_max {
        let (argmin, worst) = hits.iter().enumerate().fold((0, u64::MAX), |b, (i, h)| if h[m] < b.1 { (i, h[m]) } else { b });
        if worst > 0 {
            let p = Proportion::new(worst, mc_samples as u64, Z95);
            return Ok(HittingReport { m, hit_mass_hat: p.estimate, exact: false, hit_mass_lower: p.lower, x_grid, argmin_x: grid[argmin].value() });
        }
    }
    Err(IfsError::NotReached { m_max })
}

/// Runs the contraction search and attaches the hitting parameters of the chosen arc.
pub fn certify_synchronization(
    ifs: &Ifs,
    candidate_arcs: &[Arc],
    depth: usize,
    trials: usize,
    m_max: usize,
    x_grid: usize,
    node_budget: u64,
    seed: u64,
) -> Result<(ContractionCertificate, Vec<ArcScore>)> {
    let (mut cert, scores) = contraction_certificate(ifs, candidate_arcs, depth, trials, seed)?;
    let streams = Streams::new(seed).derive_named("hitting");
    let hit = hitting_parameters(ifs, &Region::Arc(cert.arc), m_max, x_grid, node_budget, trials, &streams)?;
    cert.m = Some(hit.m);
    cert.hit_mass_hat = Some(hit.hit_mass_hat);
    Ok((cert, scores))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub max_gap: f64,
    pub gap_start: f64,
    pub gap_end: f64,
    pub verdict: bool,
    pub eps: f64,
    pub depth: usize,
    pub orbit_points: usize,
    /// False when the orbit was completed with random words.
    pub exact: bool,
}

/// Largest gap of the orbit `{g_w(x0) : |w| <= depth}`. Levels are enumerated
/// exactly (with duplicates merged) while the level fits `point_budget`;
/// deeper levels are represented by `point_budget` random words each.
pub fn minimality_evidence(ifs: &Ifs, x0: CirclePoint, depth: usize, eps: f64, point_budget: usize, streams: &Streams) -> MinimalityReport {
    let mut all = vec![x0];
    let mut level = vec![x0];
    let mut exact = true;
    for d in 1..=depth {
        if level.len() * ifs.k() <= point_budget {
            level = ifs.support_step(&level);
        } else {
            exact = false;
            let s = streams.derive(d as u64);
            level = (0..point_budget)
                .into_par_iter()
                .map(|i| {
                    let mut rng = s.stream(i as u64);
                    let mut p = x0;
                    for _ in 0..d {
                        p = ifs.step(p, &mut rng).1;
                    }
                    p
                })
                .collect();
        }
        all.extend_from_slice(&level);
    }
    dedup_circle(&mut all, 1e-12);
    let (max_gap, arc) = if all.len() == 1 { (1.0, Arc { start: all[0], end: all[0] }) } else { max_gap_of_sorted(&all) };
    MinimalityReport {
        max_gap,
        gap_start: arc.start.value(),
        gap_end: arc.end.value(),
        verdict: max_gap < eps,
        eps,
        depth,
        orbit_points: all.len(),
        exact,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub n: usize,
    pub w1: f64,
}

/// `n -> W1(law of X_n^x, law of X_n^y)` from `samples` paths. Path `i` uses
/// stream `i` from both starts, so the two empirical laws are coupled.
pub fn stability_gap(ifs: &Ifs, x: CirclePoint, y: CirclePoint, n_list: &[usize], samples: usize, streams: &Streams) -> Result<Vec<StabilityRow>> {
    if samples == 0 {
        return Err(IfsError::Invalid("stability gap needs samples >= 1".into()));
    }
    let lx = endpoint_laws(ifs, x, n_list, samples, streams);
    let ly = endpoint_laws(ifs, y, n_list, samples, streams);
    Ok(n_list.iter().zip(lx.iter().zip(&ly)).map(|(&n, (a, b))| StabilityRow { n, w1: w1_circle(a, b) }).collect())
}

/// W1 between two independent runs from `x`: the sampling noise of [`stability_gap`].
pub fn stability_noise_floor(ifs: &Ifs, x: CirclePoint, n_list: &[usize], samples: usize, streams: &Streams) -> Vec<StabilityRow> {
    let a = endpoint_laws(ifs, x, n_list, samples, &streams.derive_named("floor-a"));
    let b = endpoint_laws(ifs, x, n_list, samples, &streams.derive_named("floor-b"));
    n_list.iter().zip(a.iter().zip(&b)).map(|(&n, (a, b))| StabilityRow { n, w1: w1_circle(a, b) }).collect()
}

/// Empirical laws of `X_n^x` for each `n` in `n_list` (any order).
pub fn endpoint_laws(ifs: &Ifs, x: CirclePoint, n_list: &[usize], samples: usize, streams: &Streams) -> Vec<EmpiricalMeasure> {
    let mut order: Vec<usize> = (0..n_list.len()).collect();
    order.sort_by_key(|&j| n_list[j]);
    let paths: Vec<Vec<CirclePoint>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i as u64);
            let mut out = vec![x; n_list.len()];
            let (mut p, mut t) = (x, 0);
            for &j in &order {
                while t < n_list[j] {
                    p = ifs.step(p, &mut rng).1;
                    t += 1;
                }
                out[j] = p;
            }
            out
        })
        .collect();
    (0..n_list.len())
        .map(|j| EmpiricalMeasure::from_points(&paths.iter().map(|p| p[j]).collect::<Vec<_>>()).expect("samples >= 1"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub max_w1: f64,
    /// `(i, j, W1)` for every pair of starts.
    pub pairs: Vec<(usize, usize, f64)>,
    pub n: usize,
    pub burn_in: usize,
}

/// Occupation measures of one length-`n` trajectory per start (after a burn-in
/// of `n / 10` steps), compared pairwise in W1. All starts share stream 0.
pub fn uniqueness_evidence(ifs: &Ifs, starts: &[CirclePoint], n: usize, streams: &Streams) -> Result<UniquenessReport> {
    if starts.len() < 2 || n == 0 {
        return Err(IfsError::Invalid("uniqueness evidence needs at least 2 starts and n >= 1".into()));
    }
    let burn_in = n / 10;
    let measures: Vec<EmpiricalMeasure> = starts
        .par_iter()
        .map(|&x0| {
            let mut rng = streams.stream(0);
            let traj = ifs.simulate_chain(x0, burn_in + n, &mut rng);
            EmpiricalMeasure::from_points(&traj[burn_in + 1..]).expect("n >= 1")
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..starts.len() {
        for j in i + 1..starts.len() {
            pairs.push((i, j, 0.0));
        }
    }
    pairs.par_iter_mut().for_each(|(i, j, w)| *w = w1_circle(&measures[*i], &measures[*j]));
    let max_w1 = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(UniquenessReport { max_w1, pairs, n, burn_in })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeo::Homeo;
    use crate::ifs::DEFAULT_NODE_BUDGET;
    use crate::observable::Observable;

    fn p(t: f64) -> CirclePoint {
        CirclePoint::new(t)
    }

    fn rotations() -> Ifs {
        Ifs::equal_weight(vec![Homeo::rotation(2f64.sqrt() - 1.0), Homeo::rotation(3f64.sqrt() - 1.0)])
    }

    fn exact(n_max: usize) -> ProfileOptions {
        ProfileOptions { n_max, mode: DualMode::Exact, samples: 0, node_budget: DEFAULT_NODE_BUDGET }
    }

    #[test]
    fn isometries_keep_profiles_below_lipschitz_bound() {
        let ifs = rotations();
        let f = Observable::harmonic(vec![0.7], vec![0.0, 0.4]);
        let deltas = [0.1, 0.01, 1e-3];
        let s = Streams::new(1);
        for row in e_property_profile(&ifs, &f, p(0.3), &deltas, &exact(12), &s).unwrap() {
            assert!(row.value <= f.lipschitz * row.delta * (1.0 + 1e-12));
        }
        let c = Observable::constant(1.5);
        assert!(e_property_profile(&ifs, &c, p(0.3), &deltas, &exact(8), &s).unwrap().iter().all(|r| r.value == 0.0));
        assert!(cesaro_profile(&ifs, &c, p(0.3), &deltas, &exact(8), &s).unwrap().iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn cesaro_profile_is_bounded_by_e_profile() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let f = Observable::cos1();
        let s = Streams::new(2);
        let e = e_property_profile(&ifs, &f, p(0.1), &[0.1, 1e-3], &exact(12), &s).unwrap();
        let c = cesaro_profile(&ifs, &f, p(0.1), &[0.1, 1e-3], &exact(12), &s).unwrap();
        for (a, b) in e.iter().zip(&c) {
            assert!(b.value <= a.value + 1e-15);
        }
        // the exact mode never samples
        let mut o = exact(12);
        o.samples = 999;
        assert_eq!(e, e_property_profile(&ifs, &f, p(0.1), &[0.1, 1e-3], &o, &s).unwrap());
    }

    #[test]
    fn mc_mode_tracks_exact_differences() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let f = Observable::cos1();
        let s = Streams::new(3);
        let ex = difference_levels(&ifs, &f, p(0.2), p(0.25), &exact(10), &s).unwrap();
        let mc = difference_levels(&ifs, &f, p(0.2), p(0.25), &ProfileOptions { mode: DualMode::Mc, samples: 20_000, ..exact(10) }, &s).unwrap();
        for (a, b) in ex.iter().zip(&mc) {
            assert!((a - b).abs() < 0.02);
        }
        assert!((ex[0] - mc[0]).abs() < 1e-12);
    }

    #[test]
    fn rotations_never_contract() {
        let arcs = default_candidate_arcs(16, 0.1);
        assert!(matches!(contraction_certificate(&rotations(), &arcs, 32, 200, 7), Err(IfsError::NoContractionFound)));
    }

    #[test]
    fn attracting_fixed_point_rate() {
        // F(t) = t + (eps / 2 pi) sin(2 pi t) fixes 1/2 with derivative 1 - eps
        let eps = 0.4;
        let ifs = Ifs::new(vec![Homeo::arnold(0.0, eps)], vec![1.0]).unwrap();
        let arc = Arc::centered(p(0.5), 0.01);
        let (cert, _) = contraction_certificate(&ifs, &[arc], 32, 100, 1).unwrap();
        assert!(cert.q_hat < 1.0);
        assert!((cert.q_hat - (1.0 - eps)).abs() < 0.01, "q_hat = {}", cert.q_hat);
        assert!(cert.mass_hat.estimate > 0.5);
    }

    #[test]
    fn hitting_examples() {
        let s = Streams::new(4);
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let full = hitting_parameters(&ifs, &Region::Full, 5, 32, DEFAULT_NODE_BUDGET, 0, &s).unwrap();
        assert_eq!((full.m, full.hit_mass_hat), (0, 1.0));

        let quarter = Ifs::new(vec![Homeo::rotation(0.25)], vec![1.0]).unwrap();
        let r = hitting_parameters(&quarter, &Region::Arc(Arc::new(0.0, 0.1)), 20, 64, DEFAULT_NODE_BUDGET, 100, &s);
        assert!(matches!(r, Err(IfsError::NotReached { m_max: 20 })));

        // enlarging the target cannot increase m
        let mut last = usize::MAX;
        for len in [0.02, 0.05, 0.2] {
            let h = hitting_parameters(&ifs, &Region::Arc(Arc::centered(p(0.5), len)), 16, 64, DEFAULT_NODE_BUDGET, 0, &s).unwrap();
            assert!(h.m <= last && h.hit_mass_hat > 0.0);
            last = h.m;
        }
    }

    #[test]
    fn minimality_examples() {
        let s = Streams::new(5);
        let quarter = Ifs::new(vec![Homeo::rotation(0.25)], vec![1.0]).unwrap();
        let r = minimality_evidence(&quarter, p(0.1), 10, 0.01, 1 << 16, &s);
        assert_eq!(r.orbit_points, 4);
        assert!((r.max_gap - 0.25).abs() < 1e-12 && !r.verdict);

        // three-distance theorem: a linear rotation orbit has at most three gap lengths
        let golden = Ifs::new(vec![Homeo::rotation(2f64.sqrt() - 1.0)], vec![1.0]).unwrap();
        let r = minimality_evidence(&golden, p(0.0), 1024, 0.01, 1 << 16, &s);
        assert!(r.verdict && r.exact);
        let mut orbit: Vec<f64> = (0..=1024).map(|j| (j as f64 * (2f64.sqrt() - 1.0)).rem_euclid(1.0)).collect();
        orbit.sort_by(f64::total_cmp);
        let mut gaps: Vec<f64> = orbit.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.push(orbit[0] + 1.0 - orbit[orbit.len() - 1]);
        gaps.sort_by(f64::total_cmp);
        gaps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert!(gaps.len() <= 3);
        assert!((r.max_gap - gaps.last().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn stability_and_uniqueness_trivial_cases() {
        let s = Streams::new(6);
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let rows = stability_gap(&ifs, p(0.3), p(0.3), &[0, 5, 50], 1000, &s).unwrap();
        assert!(rows.iter().all(|r| r.w1 == 0.0));

        let id = Ifs::new(vec![Homeo::identity()], vec![1.0]).unwrap();
        let u = uniqueness_evidence(&id, &[p(0.1), p(0.3), p(0.95)], 100, &s).unwrap();
        assert!((u.max_w1 - 0.35).abs() < 1e-12);
        let same = uniqueness_evidence(&ifs, &[p(0.1), p(0.1)], 1000, &s).unwrap();
        assert_eq!(same.max_w1, 0.0);
    }

    #[test]
    fn rotation_stability_gap_persists() {
        let ifs = rotations();
        let s = Streams::new(7);
        let rows = stability_gap(&ifs, p(0.2), p(0.2001), &[0, 200], 2000, &s).unwrap();
        assert!((rows[0].w1 - 1e-4).abs() < 1e-12);
        assert!(rows[1].w1 > 0.5 * rows[0].w1);
    }
}
