//! Exact discrete optimal transport by successive shortest paths.
//!
//! The transportation problem between `supply` (sources) and `demand` (sinks)
//! on the complete bipartite graph is solved as a min-cost flow with real
//! masses. Each round runs a multi-source Dijkstra on reduced costs (Johnson
//! potentials), stops at the first sink with remaining demand and pushes the
//! bottleneck mass along that path, after first saturating every direct arc
//! whose reduced cost is zero. Forward arcs are uncapacitated; backward arcs
//! exist where flow is positive.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Mass below this is treated as exhausted.
const MASS_EPS: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub cost: f64,
    /// `flow[i][j]`: mass moved from source `i` to sink `j`.
    pub flow: Vec<Vec<f64>>,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on distance, then node index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Minimum-cost plan moving `supply` onto `demand` under `cost[i][j] >= 0`.
///
/// Both mass vectors are expected to have equal totals; any residue below
/// `1e-14` per node is left unassigned.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    let n = supply.len();
    let k = demand.len();
    if n == 0 || k == 0 {
        return Err(Error::Empty("transport marginals".into()));
    }
    let mut flow = vec![vec![0.0; k]; n];
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();

    // potentials: sources at 0, sinks at their cheapest incoming arc
    let mut pot = vec![0.0; n + k];
    for j in 0..k {
        pot[n + j] = (0..n).map(|i| cost[i][j]).fold(f64::INFINITY, f64::min);
    }

    let mut dist = vec![f64::INFINITY; n + k];
    let mut done = vec![false; n + k];
    let mut parent = vec![usize::MAX; n + k];
    let mut heap = BinaryHeap::new();
    let max_rounds = 64 * (n + k) * (n + k) + 1024;

    for _ in 0..max_rounds {
        // direct arcs with zero reduced cost are shortest paths already;
        // saturating them keeps every residual reduced cost nonnegative
        for i in 0..n {
            for j in 0..k {
                if rem_s[i] <= MASS_EPS {
                    break;
                }
                if rem_d[j] > MASS_EPS && cost[i][j] + pot[i] - pot[n + j] <= 0.0 {
                    let delta = rem_s[i].min(rem_d[j]);
                    flow[i][j] += delta;
                    rem_s[i] -= delta;
                    rem_d[j] -= delta;
                }
            }
        }
        if !rem_s.iter().any(|&s| s > MASS_EPS) || !rem_d.iter().any(|&d| d > MASS_EPS) {
            let total = flow
                .iter()
                .zip(cost)
                .map(|(f, c)| f.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                .sum();
            return Ok(TransportPlan { cost: total, flow });
        }

        dist.fill(f64::INFINITY);
        done.fill(false);
        parent.fill(usize::MAX);
        heap.clear();
        for i in 0..n {
            if rem_s[i] > MASS_EPS {
                dist[i] = 0.0;
                heap.push(Entry { dist: 0.0, node: i });
            }
        }

        let mut target = None;
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            if u >= n {
                let j = u - n;
                if rem_d[j] > MASS_EPS {
                    target = Some(u);
                    break;
                }
                // backward arcs j -> i where flow is positive
                for i in 0..n {
                    if flow[i][j] > MASS_EPS && !done[i] {
                        let rc = (-cost[i][j] + pot[u] - pot[i]).max(0.0);
                        let nd = d + rc;
                        if nd < dist[i] {
                            dist[i] = nd;
                            parent[i] = u;
                            heap.push(Entry { dist: nd, node: i });
                        }
                    }
                }
            } else {
                let i = u;
                for j in 0..k {
                    let v = n + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[i][j] + pot[i] - pot[v]).max(0.0);
                    let nd = d + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = i;
                        heap.push(Entry { dist: nd, node: v });
                    }
                }
            }
        }

        let t = target.ok_or_else(|| Error::Solver("no augmenting path".into()))?;
        let dt = dist[t];
        for (p, &d) in pot.iter_mut().zip(&dist) {
            *p += d.min(dt);
        }

        // bottleneck along the path back to a start source
        let mut delta = rem_d[t - n];
        let mut v = t;
        let start = loop {
            let i = parent[v];
            if parent[i] == usize::MAX {
                break i;
            }
            let j = parent[i] - n;
            delta = delta.min(flow[i][j]);
            v = parent[i];
        };
        delta = delta.min(rem_s[start]);

        let mut v = t;
        loop {
            let i = parent[v];
            flow[i][v - n] += delta;
            if parent[i] == usize::MAX {
                break;
            }
            let j = parent[i] - n;
            flow[i][j] = (flow[i][j] - delta).max(0.0);
            v = parent[i];
        }
        rem_s[start] -= delta;
        rem_d[t - n] -= delta;
    }
    Err(Error::Solver("iteration cap reached".into()))
}
