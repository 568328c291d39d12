//! Block coupling of two chains on symbol space.
//!
//! Two chains start at `x` and `y` and are driven by words `omega` and
//! `omega'`. Blocks of `m` symbols try to steer both current points into a
//! contracting arc `I`: the `m`-words that succeed from each point are paired
//! by lexicographic rank, the remaining words are paired the same way, so
//! `omega' ` is a measure-preserving rearrangement of `omega` block by block.
//! After a success both chains follow identical symbols while the image of
//! `I` keeps contracting; a contraction failure closes the block and a new
//! one begins.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::circle::{Arc, CirclePoint};
use crate::error::{IfsError, Result};
use crate::homeo::Word;
use crate::ifs::Ifs;
use crate::observable::Observable;
use crate::rng::Streams;
use crate::stats::{loglog_slope, Moments, Proportion, Z95};

/// Success words are enumerated only while `k^m` stays below this.
pub const WORD_BUDGET: u64 = 1 << 20;

fn require_equal_weight(ifs: &Ifs) -> Result<()> {
    if ifs.is_equal_weight() {
        Ok(())
    } else {
        Err(IfsError::Invalid("the pairing needs equal probabilities; uniformize the system first".into()))
    }
}

fn word_count(k: usize, m: usize) -> Result<u64> {
    let needed = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if needed > WORD_BUDGET as u128 {
        return Err(IfsError::BudgetExceeded { needed, budget: WORD_BUDGET });
    }
    Ok(needed as u64)
}

/// Lexicographic ranks of the length-`m` words `w` with `g_w(x)` in `arc`.
fn success_ranks(ifs: &Ifs, x: CirclePoint, arc: &Arc, m: usize) -> Vec<u64> {
    fn visit(ifs: &Ifs, p: CirclePoint, depth: usize, m: usize, prefix: u64, arc: &Arc, out: &mut Vec<u64>) {
        if depth == m {
            if arc.contains(p) {
                out.push(prefix);
            }
            return;
        }
        for s in 0..ifs.k() {
            visit(ifs, ifs.apply_symbol(s, p), depth + 1, m, prefix * ifs.k() as u64 + s as u64, arc, out);
        }
    }
    let mut out = Vec::new();
    visit(ifs, x, 0, m, 0, arc, &mut out);
    out
}

/// All length-`m` words steering `x` into `arc`, in lexicographic order.
pub fn success_words(ifs: &Ifs, x: CirclePoint, arc: &Arc, m: usize) -> Result<Vec<Word>> {
    require_equal_weight(ifs)?;
    word_count(ifs.k(), m)?;
    let ranks = success_ranks(ifs, x, arc, m);
    if ranks.is_empty() {
        return Err(IfsError::EmptySuccessSet { m });
    }
    Ok(ranks.into_iter().map(|r| Word::from_rank(r, ifs.k(), m)).collect())
}

/// The rank bijection of one block: the first `G_c` success words of each
/// side are paired in order, and so are the complements.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPairing {
    words: u64,
    g: Vec<u64>,
    g_prime: Vec<u64>,
    /// Untruncated success cardinalities from the two points.
    pub full: (usize, usize),
}

impl BlockPairing {
    pub fn new(ifs: &Ifs, x: CirclePoint, y: CirclePoint, arc: &Arc, m: usize) -> Result<Self> {
        let words = word_count(ifs.k(), m)?;
        let mut g = success_ranks(ifs, x, arc, m);
        let mut g_prime = if x == y { g.clone() } else { success_ranks(ifs, y, arc, m) };
        let full = (g.len(), g_prime.len());
        let c = g.len().min(g_prime.len());
        g.truncate(c);
        g_prime.truncate(c);
        Ok(BlockPairing { words, g, g_prime, full })
    }

    pub fn common_cardinality(&self) -> usize {
        self.g.len()
    }

    /// Partner rank of `rank` and whether it is a success pair.
    pub fn forward(&self, rank: u64) -> (u64, bool) {
        match self.g.binary_search(&rank) {
            Ok(i) => (self.g_prime[i], true),
            Err(below) => (nth_outside(&self.g_prime, rank - below as u64), false),
        }
    }

    pub fn inverse(&self, rank: u64) -> u64 {
        match self.g_prime.binary_search(&rank) {
            Ok(i) => self.g[i],
            Err(below) => nth_outside(&self.g, rank - below as u64),
        }
    }

    pub fn words(&self) -> u64 {
        self.words
    }
}

/// The `idx`-th integer (from 0) not in the sorted set `taken`.
fn nth_outside(taken: &[u64], idx: u64) -> u64 {
    let mut r = idx;
    for &t in taken {
        if t <= r {
            r += 1;
        } else {
            break;
        }
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Position of the block's first symbol in `omega`.
    pub start: usize,
    pub word: Word,
    pub partner: Word,
    pub success: bool,
    /// Identical symbols appended after a success.
    pub tail: usize,
    /// Whether the tail ended on a contraction failure.
    pub violated: bool,
    pub common_cardinality: usize,
    pub success_cardinalities: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingParams {
    pub arc: Arc,
    pub m: usize,
    pub n: usize,
    pub q: f64,
    pub tail_horizon: usize,
}

impl PairingParams {
    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingTranscript {
    pub x: CirclePoint,
    pub y: CirclePoint,
    pub params: PairingParams,
    pub gamma: f64,
    pub blocks: Vec<Block>,
    /// Number of blocks begun.
    pub level: usize,
    pub omega: Word,
    pub omega_prime: Word,
    pub coupled: bool,
    /// 1-based index of the block after which the chains were declared coupled.
    pub coupled_block: Option<usize>,
}

impl CouplingTranscript {
    /// Level (blocks begun) at each prefix length `0..=n`.
    pub fn levels(&self) -> Vec<usize> {
        let n = self.omega.len();
        let mut out = vec![0; n + 1];
        for (b, block) in self.blocks.iter().enumerate() {
            for slot in out.iter_mut().take(n + 1).skip(block.start + 1) {
                *slot = b + 1;
            }
        }
        out
    }
}

/// Builds one transcript of length `params.n`, drawing every symbol of
/// `omega` in order from `rng`.
pub fn pairing_sampler<R: Rng>(ifs: &Ifs, x: CirclePoint, y: CirclePoint, params: &PairingParams, rng: &mut R) -> Result<CouplingTranscript> {
    require_equal_weight(ifs)?;
    if params.arc.length() <= 0.0 || !(params.q > 0.0 && params.q < 1.0) || params.m == 0 {
        return Err(IfsError::Invalid("pairing needs a nondegenerate arc, q in (0, 1) and m >= 1".into()));
    }
    let (k, m, n) = (ifs.k(), params.m, params.n);
    let mut omega = Vec::with_capacity(n + m);
    let mut omega_p = Vec::with_capacity(n + m);
    let mut blocks = Vec::new();
    let (mut a, mut b) = (x, y);
    let mut coupled_block = None;
    while omega.len() < n {
        let start = omega.len();
        if a == b {
            // identical points: the rank pairing is the identity from here on
            coupled_block = Some(blocks.len() + 1);
            let word: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
            omega.extend_from_slice(&word);
            omega_p.extend_from_slice(&word);
            blocks.push(Block {
                start,
                word: Word(word.clone()),
                partner: Word(word),
                // coupled without steering into the arc
                success: false,
                tail: 0,
                violated: false,
                common_cardinality: 0,
                success_cardinalities: (0, 0),
            });
            break;
        }
        let pairing = BlockPairing::new(ifs, a, b, &params.arc, m)?;
        if pairing.common_cardinality() == 0 {
            return Err(IfsError::NonPositiveCommonCardinality { block: blocks.len() + 1 });
        }
        let word: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
        let w = Word(word);
        let (rank_p, success) = pairing.forward(w.rank(k));
        let partner = Word::from_rank(rank_p, k, m);
        for (&s, &t) in w.symbols().iter().zip(partner.symbols()) {
            a = ifs.apply_symbol(s, a);
            b = ifs.apply_symbol(t, b);
        }
        omega.extend_from_slice(w.symbols());
        omega_p.extend_from_slice(partner.symbols());
        let mut block = Block {
            start,
            word: w,
            partner,
            success,
            tail: 0,
            violated: false,
            common_cardinality: pairing.common_cardinality(),
            success_cardinalities: pairing.full,
        };
        if success {
            debug_assert!(params.arc.contains(a) && params.arc.contains(b));
            let l0 = params.arc.length();
            let (mut s0, mut s1) = (params.arc.start, params.arc.end);
            let mut prev = l0;
            let mut envelope = l0;
            while omega.len() < n && block.tail < params.tail_horizon {
                let s = rng.random_range(0..k);
                omega.push(s);
                omega_p.push(s);
                a = ifs.apply_symbol(s, a);
                b = ifs.apply_symbol(s, b);
                s0 = ifs.apply_symbol(s, s0);
                s1 = ifs.apply_symbol(s, s1);
                block.tail += 1;
                envelope *= params.q;
                let mut len = s0.ccw_to(s1);
                if prev < 0.25 && len > 0.75 {
                    len = 0.0;
                }
                prev = len;
                if len > envelope {
                    block.violated = true;
                    break;
                }
            }
            if !block.violated {
                coupled_block = Some(blocks.len() + 1);
            }
        }
        let stop = coupled_block.is_some();
        blocks.push(block);
        if stop {
            break;
        }
    }
    // after coupling both chains follow the same symbols
    while omega.len() < n {
        let s = rng.random_range(0..k);
        omega.push(s);
        omega_p.push(s);
    }
    omega.truncate(n);
    omega_p.truncate(n);
    let level = blocks.len();
    Ok(CouplingTranscript {
        x,
        y,
        params: *params,
        gamma: params.gamma(),
        blocks,
        level,
        omega: Word(omega),
        omega_prime: Word(omega_p),
        coupled: coupled_block.is_some(),
        coupled_block,
    })
}

/// `count` transcripts; transcript `i` draws from stream `i`.
pub fn pairing_transcripts(ifs: &Ifs, x: CirclePoint, y: CirclePoint, params: &PairingParams, count: usize, streams: &Streams) -> Result<Vec<CouplingTranscript>> {
    (0..count).into_par_iter().map(|i| pairing_sampler(ifs, x, y, params, &mut streams.stream(i as u64))).collect()
}

/// True when `short` is a prefix of `long`: same words up to `short`'s length,
/// the same block pairs, and identical blocks wherever `short` began a later one.
pub fn prefix_consistent(short: &CouplingTranscript, long: &CouplingTranscript) -> bool {
    let n = short.omega.len();
    if long.omega.len() < n || long.omega.symbols()[..n] != *short.omega.symbols() || long.omega_prime.symbols()[..n] != *short.omega_prime.symbols() {
        return false;
    }
    if long.blocks.len() < short.blocks.len() {
        return false;
    }
    let last = short.blocks.len().saturating_sub(1);
    short.blocks.iter().zip(&long.blocks).enumerate().all(|(i, (s, l))| {
        if i < last { s == l } else { s.word == l.word && s.partner == l.partner && s.success == l.success }
    })
}

/// Birkhoff sums `S_j` for `j = 0..=len(word)` along `word` from `x`.
fn running_sums(ifs: &Ifs, f: &Observable, x: CirclePoint, word: &Word) -> Vec<f64> {
    let mut out = Vec::with_capacity(word.len() + 1);
    let (mut p, mut s) = (x, 0.0);
    out.push(0.0);
    for &i in word.symbols() {
        p = ifs.apply_symbol(i, p);
        s += f.value(p);
        out.push(s);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct P3Check {
    pub ok: bool,
    pub worst_ratio: f64,
    /// Prefix length attaining `worst_ratio`.
    pub worst_n: usize,
}

/// Checks `|S_n f(omega, x) - S_n f(omega', y)| <= j (2 (m + 1) |f|_inf + gamma)`
/// at every prefix, `j` being the number of blocks begun by then.
pub fn verify_p3(t: &CouplingTranscript, ifs: &Ifs, f: &Observable) -> Result<P3Check> {
    if f.lipschitz > 1.0 + 1e-12 {
        return Err(IfsError::Invalid("rescale the observable to Lipschitz constant at most 1".into()));
    }
    let sx = running_sums(ifs, f, t.x, &t.omega);
    let sy = running_sums(ifs, f, t.y, &t.omega_prime);
    let unit = 2.0 * (t.params.m + 1) as f64 * f.sup_norm() + t.gamma;
    let levels = t.levels();
    let mut check = P3Check { ok: true, worst_ratio: 0.0, worst_n: 0 };
    for j in 0..sx.len() {
        let gap = (sx[j] - sy[j]).abs();
        let bound = levels[j] as f64 * unit;
        let ratio = if gap == 0.0 { 0.0 } else { gap / bound };
        if ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_n = j;
        }
    }
    check.ok = check.worst_ratio <= 1.0;
    Ok(check)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub l: usize,
    pub survival: f64,
    pub lower: f64,
    pub upper: f64,
    pub envelope: f64,
}

/// Empirical `P(not coupled after l blocks)` for `l = 0..=l_max` with the
/// geometric envelope `(1 - alpha)^l`.
pub fn survival_curve(coupled_blocks: &[Option<usize>], l_max: usize, alpha: f64, z: f64) -> Vec<SurvivalRow> {
    let total = coupled_blocks.len() as u64;
    (0..=l_max)
        .map(|l| {
            let alive = coupled_blocks.iter().filter(|c| c.is_none_or(|b| b > l)).count() as u64;
            let p = Proportion::new(alive, total, z);
            SurvivalRow { l, survival: p.estimate, lower: p.lower, upper: p.upper, envelope: (1.0 - alpha).powi(l as i32) }
        })
        .collect()
}

/// Survival curve of a transcript set; transcripts that never coupled count
/// as uncoupled at every `l`.
pub fn block_tail_stats(transcripts: &[CouplingTranscript], l_max: usize, alpha_hat: f64) -> Result<Vec<SurvivalRow>> {
    if transcripts.len() < 100 {
        return Err(IfsError::Invalid("block tail statistics need at least 100 transcripts".into()));
    }
    let blocks: Vec<Option<usize>> = transcripts.iter().map(|t| t.coupled_block).collect();
    Ok(survival_curve(&blocks, l_max, alpha_hat, Z95))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Which word of a transcript to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Omega,
    Partner,
}

/// Pearson test that the first `len` symbols of one side are uniform on `k^len` cells.
pub fn prefix_uniformity(transcripts: &[CouplingTranscript], k: usize, len: usize, side: Side) -> Result<ChiSquareResult> {
    let cells = word_count(k, len)? as usize;
    let mut counts = vec![0u64; cells];
    let mut total = 0u64;
    for t in transcripts.iter().filter(|t| t.omega.len() >= len) {
        let w = match side {
            Side::Omega => &t.omega,
            Side::Partner => &t.omega_prime,
        };
        counts[Word(w.symbols()[..len].to_vec()).rank(k) as usize] += 1;
        total += 1;
    }
    chi_square_uniform(&counts, total)
}

pub fn chi_square_uniform(counts: &[u64], total: u64) -> Result<ChiSquareResult> {
    if counts.len() < 2 || total == 0 {
        return Err(IfsError::Invalid("chi-square test needs at least two cells and one observation".into()));
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = counts.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| IfsError::Invalid(e.to_string()))?;
    Ok(ChiSquareResult { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedGapRow {
    pub n: usize,
    /// Mean of `S_n f(omega, x) - S_n f(omega', y)`.
    pub mean_signed: f64,
    pub stderr_signed: f64,
    /// Mean of the absolute difference.
    pub mean_abs: f64,
    pub stderr_abs: f64,
}

/// Monte Carlo over transcripts of the paired Birkhoff-sum difference. Its
/// signed mean equals `sum_{k<=n} (U^k f(x) - U^k f(y))` because both words
/// are uniformly distributed.
pub fn paired_sum_gap(
    ifs: &Ifs,
    f: &Observable,
    x: CirclePoint,
    y: CirclePoint,
    n_list: &[usize],
    replicates: usize,
    params: &PairingParams,
    streams: &Streams,
) -> Result<Vec<PairedGapRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let p = PairingParams { n: n_max, ..*params };
    let diffs: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let t = pairing_sampler(ifs, x, y, &p, &mut streams.stream(i as u64))?;
            let sx = running_sums(ifs, f, x, &t.omega);
            let sy = running_sums(ifs, f, y, &t.omega_prime);
            Ok(n_list.iter().map(|&n| sx[n] - sy[n]).collect())
        })
        .collect::<Result<_>>()?;
    Ok(n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let signed = Moments::from_slice(&diffs.iter().map(|d| d[j]).collect::<Vec<_>>());
            let abs = Moments::from_slice(&diffs.iter().map(|d| d[j].abs()).collect::<Vec<_>>());
            PairedGapRow { n, mean_signed: signed.mean, stderr_signed: signed.stderr(), mean_abs: abs.mean, stderr_abs: abs.stderr() }
        })
        .collect())
}

/// Log-log slope of the mean absolute gap over rows with `lo <= n <= hi`.
pub fn paired_gap_slope(rows: &[PairedGapRow], lo: usize, hi: usize) -> f64 {
    let (ns, vs): (Vec<usize>, Vec<f64>) = rows.iter().filter(|r| r.n >= lo && r.n <= hi).map(|r| (r.n, r.mean_abs)).unzip();
    loglog_slope(&ns, &vs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeo::Homeo;

    fn p(t: f64) -> CirclePoint {
        CirclePoint::new(t)
    }

    fn toy() -> Ifs {
        Ifs::equal_weight(vec![Homeo::rotation(0.5), Homeo::identity()])
    }

    fn toy_params(n: usize) -> PairingParams {
        PairingParams { arc: Arc::new(0.4, 0.6), m: 1, n, q: 0.5, tail_horizon: 64 }
    }

    #[test]
    fn success_word_examples() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        assert!(matches!(success_words(&ifs, p(0.3), &Arc::new(0.123, 0.123), 3), Err(IfsError::EmptySuccessSet { m: 3 })));
        // an arc covering all but a tiny gap admits every word
        let all = success_words(&ifs, p(0.3), &Arc::centered(p(0.0), 1.0 - 1e-12), 3).unwrap();
        assert_eq!(all.len(), 8);
        let w = success_words(&toy(), p(0.0), &Arc::new(0.4, 0.6), 1).unwrap();
        assert_eq!(w, vec![Word(vec![0])]);
        let lopsided = Ifs::new(vec![Homeo::identity(), Homeo::rotation(0.5)], vec![0.25, 0.75]).unwrap();
        assert!(success_words(&lopsided, p(0.0), &Arc::new(0.4, 0.6), 1).is_err());
    }

    #[test]
    fn block_pairing_is_a_bijection() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let arc = Arc::centered(p(0.5), 0.2);
        let pairing = BlockPairing::new(&ifs, p(0.1), p(0.7), &arc, 6).unwrap();
        let mut images: Vec<u64> = (0..pairing.words()).map(|r| pairing.forward(r).0).collect();
        for r in 0..pairing.words() {
            assert_eq!(pairing.inverse(pairing.forward(r).0), r);
        }
        images.sort_unstable();
        assert!(images.iter().enumerate().all(|(i, &r)| i as u64 == r));
        let successes = (0..pairing.words()).filter(|&r| pairing.forward(r).1).count();
        assert_eq!(successes, pairing.common_cardinality());
    }

    #[test]
    fn identical_starts_couple_at_once() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let params = PairingParams { arc: Arc::centered(p(0.5), 0.1), m: 3, n: 40, q: 0.82, tail_horizon: 64 };
        let t = pairing_sampler(&ifs, p(0.2), p(0.2), &params, &mut Streams::new(1).stream(0)).unwrap();
        assert_eq!(t.coupled_block, Some(1));
        assert!(!t.blocks[0].success && t.blocks[0].word == t.blocks[0].partner);
        assert_eq!(t.omega, t.omega_prime);
        let check = verify_p3(&t, &ifs, &Observable::cos1().lipschitz_normalized()).unwrap();
        assert_eq!(check.worst_ratio, 0.0);
    }

    #[test]
    fn toy_system_matches_hand_enumeration() {
        // every outcome swaps the first symbol and copies the other two
        let ifs = toy();
        let streams = Streams::new(2);
        let draws = 100_000;
        let ts = pairing_transcripts(&ifs, p(0.0), p(0.5), &toy_params(3), draws, &streams).unwrap();
        let mut counts = vec![0u64; 8];
        for t in &ts {
            let mut expected = t.omega.0.clone();
            expected[0] = 1 - expected[0];
            assert_eq!(t.omega_prime.0, expected);
            counts[t.omega.rank(2) as usize] += 1;
        }
        let chi = chi_square_uniform(&counts, draws as u64).unwrap();
        assert!(chi.p_value > 0.001, "{chi:?}");
    }

    #[test]
    fn p3_trivial_cases() {
        let ifs = toy();
        let t = pairing_sampler(&ifs, p(0.0), p(0.5), &toy_params(10), &mut Streams::new(3).stream(0)).unwrap();
        let c = verify_p3(&t, &ifs, &Observable::zero()).unwrap();
        assert!(c.ok && c.worst_ratio == 0.0);
        assert!(verify_p3(&t, &ifs, &Observable::cos1()).is_err());
        let c = verify_p3(&t, &ifs, &Observable::cos1().lipschitz_normalized()).unwrap();
        assert!(c.ok);
    }

    #[test]
    fn transcripts_extend_consistently() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let params = PairingParams { arc: Arc::centered(p(0.5), 0.1), m: 3, n: 30, q: 0.82, tail_horizon: 64 };
        let s = Streams::new(4);
        for i in 0..50 {
            let short = pairing_sampler(&ifs, p(0.0), p(0.5), &params, &mut s.stream(i)).unwrap();
            let long = pairing_sampler(&ifs, p(0.0), p(0.5), &PairingParams { n: 300, ..params }, &mut s.stream(i)).unwrap();
            assert!(prefix_consistent(&short, &long));
            assert!(short.level <= long.level);
        }
    }

    #[test]
    fn survival_curve_examples() {
        let all_first = vec![Some(1); 200];
        let rows = survival_curve(&all_first, 5, 0.3, Z95);
        assert_eq!(rows[0].survival, 1.0);
        assert!(rows[1..].iter().all(|r| r.survival == 0.0));

        // synthetic geometric coupling times with success rate alpha
        let alpha = 0.3;
        let mut rng = Streams::new(5).stream(0);
        let blocks: Vec<Option<usize>> = (0..20_000)
            .map(|_| {
                let mut l = 1;
                while rng.random::<f64>() >= alpha {
                    l += 1;
                }
                Some(l)
            })
            .collect();
        // 99.9% intervals keep the 21 simultaneous checks from failing by chance
        for r in survival_curve(&blocks, 20, alpha, 3.29) {
            assert!(r.lower <= r.envelope + 1e-12 && r.envelope <= r.upper + 1e-3, "{r:?}");
        }
    }

    #[test]
    fn paired_gap_trivial_cases() {
        let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
        let params = PairingParams { arc: Arc::centered(p(0.5), 0.1), m: 3, n: 0, q: 0.82, tail_horizon: 64 };
        let s = Streams::new(6);
        let z = paired_sum_gap(&ifs, &Observable::zero(), p(0.0), p(0.5), &[5, 10], 50, &params, &s).unwrap();
        assert!(z.iter().all(|r| r.mean_abs == 0.0));
        let same = paired_sum_gap(&ifs, &Observable::cos1(), p(0.3), p(0.3), &[5, 10], 50, &params, &s).unwrap();
        assert!(same.iter().all(|r| r.mean_abs == 0.0));
    }
}
