//! Exact earth mover's distance by successive shortest paths.
//!
//! Costs are integer mismatch counts, capacities are exact rationals, so the
//! only source of inexactness is gone. Shortest paths use Bellman-Ford on the
//! residual graph, which tolerates the negative reverse arcs directly.

use num::{Signed, Zero};
use serde::Serialize;

use crate::bitcore::mismatches;
use crate::dists::Dist;
use crate::exact::{self, Rational};
use crate::Result;

/// A coupling of two distributions, listed by support index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferPlan {
    pub entries: Vec<(usize, usize, Rational)>,
}

impl TransferPlan {
    /// Expected normalized distance under the plan.
    pub fn cost(&self, p: &Dist, q: &Dist) -> Rational {
        let n = p.n() as i64;
        self.entries
            .iter()
            .map(|(i, j, w)| w * exact::ratio(mismatches(&p.support()[*i].0, &q.support()[*j].0) as i64, n))
            .sum()
    }

    /// True when row sums equal `p` and column sums equal `q` exactly.
    pub fn has_marginals(&self, p: &Dist, q: &Dist) -> bool {
        let mut rows = vec![Rational::zero(); p.support_len()];
        let mut cols = vec![Rational::zero(); q.support_len()];
        for (i, j, w) in &self.entries {
            if !w.is_positive() {
                return false;
            }
            rows[*i] += w;
            cols[*j] += w;
        }
        rows.iter().zip(p.support()).all(|(r, (_, w))| r == w) && cols.iter().zip(q.support()).all(|(c, (_, w))| c == w)
    }

    pub fn to_json(&self, p: &Dist, q: &Dist) -> Vec<PlanEntry> {
        self.entries
            .iter()
            .map(|(i, j, w)| PlanEntry {
                from: p.support()[*i].0.to_string(),
                to: q.support()[*j].0.to_string(),
                mass: exact::format(w),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanEntry {
    pub from: String,
    pub to: String,
    pub mass: String,
}

struct Arc {
    to: usize,
    cap: Option<Rational>, // None is unbounded
    cost: i64,
    rev: usize,
}

struct Network {
    adj: Vec<Vec<Arc>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network { adj: (0..nodes).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, from: usize, to: usize, cap: Option<Rational>, cost: i64) {
        let rf = self.adj[to].len();
        let rt = self.adj[from].len();
        self.adj[from].push(Arc { to, cap, cost, rev: rf });
        self.adj[to].push(Arc { to: from, cap: Some(Rational::zero()), cost: -cost, rev: rt });
    }

    fn open(arc: &Arc) -> bool {
        arc.cap.as_ref().is_none_or(|c| c.is_positive())
    }

    /// Cheapest augmenting path as (node, arc) steps, or None.
    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<(usize, usize)>> {
        let nodes = self.adj.len();
        let mut dist: Vec<Option<i64>> = vec![None; nodes];
        let mut via: Vec<Option<(usize, usize)>> = vec![None; nodes];
        dist[s] = Some(0);
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                let Some(du) = dist[u] else { continue };
                for (k, arc) in self.adj[u].iter().enumerate() {
                    if !Self::open(arc) {
                        continue;
                    }
                    let nd = du + arc.cost;
                    if dist[arc.to].is_none_or(|d| nd < d) {
                        dist[arc.to] = Some(nd);
                        via[arc.to] = Some((u, k));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[t]?;
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let (u, k) = via[v].expect("reachable node has a predecessor");
            path.push((u, k));
            v = u;
        }
        path.reverse();
        Some(path)
    }
}

/// Exact EMD plus a witness plan achieving it.
pub fn emd(p: &Dist, q: &Dist) -> Result<(Rational, TransferPlan)> {
    p.same_shape(q)?;
    let (a, b) = (p.support_len(), q.support_len());
    let source = 0;
    let sink = a + b + 1;
    let mut net = Network::new(a + b + 2);
    for (i, (_, w)) in p.support().iter().enumerate() {
        net.add(source, 1 + i, Some(w.clone()), 0);
    }
    for (j, (_, w)) in q.support().iter().enumerate() {
        net.add(1 + a + j, sink, Some(w.clone()), 0);
    }
    for (i, (x, _)) in p.support().iter().enumerate() {
        for (j, (y, _)) in q.support().iter().enumerate() {
            net.add(1 + i, 1 + a + j, None, mismatches(x, y) as i64);
        }
    }
    while let Some(path) = net.shortest_path(source, sink) {
        let push = path
            .iter()
            .filter_map(|&(u, k)| net.adj[u][k].cap.clone())
            .min()
            .expect("source arcs are bounded");
        for &(u, k) in &path {
            let rev = net.adj[u][k].rev;
            let to = net.adj[u][k].to;
            if let Some(c) = net.adj[u][k].cap.as_mut() {
                *c -= &push;
            }
            if let Some(c) = net.adj[to][rev].cap.as_mut() {
                *c += &push;
            }
        }
    }
    let mut entries = Vec::new();
    for i in 0..a {
        for arc in &net.adj[1 + i] {
            if arc.to > a && arc.to <= a + b && arc.cost >= 0 {
                // flow on a forward arc sits on its reverse
                let back = &net.adj[arc.to][arc.rev];
                let flow = back.cap.clone().expect("reverse arcs are bounded");
                if flow.is_positive() {
                    entries.push((i, arc.to - 1 - a, flow));
                }
            }
        }
    }
    let plan = TransferPlan { entries };
    let cost = plan.cost(p, q);
    Ok((cost, plan))
}
