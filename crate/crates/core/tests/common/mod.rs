#![allow(dead_code)]

use std::path::PathBuf;

use ifslab::circle::CirclePoint;
use ifslab::config::{load_config, SystemSpec};
use ifslab::measure::EmpiricalMeasure;
use rand::Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn demo_spec() -> SystemSpec {
    load_config(&config_path("demo.json")).expect("shipped demo config loads")
}

pub fn rotations_spec() -> SystemSpec {
    load_config(&config_path("rotations.json")).expect("shipped rotations config loads")
}

fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Optimal transport cost between two discrete measures under the circle
/// distance, by successive shortest paths on the bipartite flow network.
/// Independent of any CDF argument.
pub fn transport_oracle(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    struct Edge {
        to: usize,
        cap: f64,
        cost: f64,
    }
    let (n, m) = (a.len(), b.len());
    let (s, t) = (0, n + m + 1);
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj = vec![Vec::new(); n + m + 2];
    let mut add = |u: usize, v: usize, cap: f64, cost: f64| {
        adj[u].push(edges.len());
        edges.push(Edge { to: v, cap, cost });
        adj[v].push(edges.len());
        edges.push(Edge { to: u, cap: 0.0, cost: -cost });
    };
    for (i, &(_, w)) in a.iter().enumerate() {
        add(s, 1 + i, w, 0.0);
    }
    for (j, &(_, w)) in b.iter().enumerate() {
        add(1 + n + j, t, w, 0.0);
    }
    for (i, &(x, _)) in a.iter().enumerate() {
        for (j, &(y, _)) in b.iter().enumerate() {
            add(1 + i, 1 + n + j, f64::INFINITY, circ(x, y));
        }
    }
    const TINY: f64 = 1e-15;
    let nodes = n + m + 2;
    let mut total = 0.0;
    loop {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred = vec![usize::MAX; nodes];
        dist[s] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > TINY && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        pred[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t].is_infinite() {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            let e = pred[v];
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = t;
        while v != s {
            let e = pred[v];
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        total += push * dist[t];
    }
}

/// Between 1 and `max_atoms` atoms with positive weights summing to one.
pub fn random_atoms<R: Rng>(rng: &mut R, max_atoms: usize) -> Vec<(f64, f64)> {
    let n = rng.random_range(1..=max_atoms);
    let raw: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random_range(0.05..1.0))).collect();
    let total: f64 = raw.iter().map(|a| a.1).sum();
    raw.into_iter().map(|(x, w)| (x, w / total)).collect()
}

pub fn measure(atoms: &[(f64, f64)]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_weighted(atoms.iter().map(|&(x, w)| (CirclePoint::new(x), w)).collect()).expect("valid atoms")
}
