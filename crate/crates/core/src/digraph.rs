//! Weighted digraph representations of the map and minimum cycle means.
//!
//! Graphs are stored in compressed sparse row form: the out-edges of each
//! vertex are contiguous and sorted by target, and each `(from, to)` pair
//! occurs at most once.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{deriv_log_inf, ParamInterval};
use crate::partition::PhasePartition;
use crate::rigor::Interval;
use crate::scalar::{self, Round, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Digraph<T> {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<T>,
}

/// Minimum cycle mean together with a cycle attaining (or nearly attaining)
/// it. `value` is `None` iff the graph is acyclic.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleMeanResult<T> {
    pub value: Option<T>,
    pub cycle: Option<Vec<usize>>,
}

impl<T> CycleMeanResult<T> {
    fn acyclic() -> Self {
        Self { value: None, cycle: None }
    }
}

impl<T: Scalar> Digraph<T> {
    /// Builds a graph from an edge list. Duplicate `(from, to)` pairs are
    /// merged, keeping the larger weight.
    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if num_vertices == 0 || num_vertices > u32::MAX as usize {
            return Err(Error::InvalidGraph(format!("unsupported vertex count {num_vertices}")));
        }
        let mut list: Vec<(usize, usize, T)> = edges.into_iter().collect();
        for &(u, v, w) in &list {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for {num_vertices} vertices")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has non-finite weight")));
            }
        }
        list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.partial_cmp(&a.2).unwrap()));
        list.dedup_by(|later, kept| later.0 == kept.0 && later.1 == kept.1);

        let mut offsets = vec![0usize; num_vertices + 1];
        for &(u, _, _) in &list {
            offsets[u + 1] += 1;
        }
        for i in 0..num_vertices {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            offsets,
            targets: list.iter().map(|e| e.1 as u32).collect(),
            weights: list.iter().map(|e| e.2).collect(),
        })
    }

    /// Assembles a graph from per-vertex adjacency rows already sorted by
    /// target without duplicates.
    fn from_rows(rows: Vec<Vec<(u32, T)>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for row in rows {
            for (v, w) in row {
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self { offsets, targets, weights }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Out-edges of `u` as `(target, weight)`.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()].iter().zip(&self.weights[r]).map(|(&v, &w)| (v as usize, w))
    }

    /// All edges in `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<T> {
        let r = self.offsets[u]..self.offsets[u + 1];
        let row = &self.targets[r.clone()];
        row.binary_search(&(v as u32)).ok().map(|i| self.weights[r.start + i])
    }

    /// Largest absolute edge weight (zero for an edgeless graph).
    pub fn max_abs_weight(&self) -> T {
        self.weights.iter().fold(T::zero(), |m, w| m.max(w.abs()))
    }

    fn edge_source(&self, e: usize) -> usize {
        self.offsets.partition_point(|&o| o <= e) - 1
    }

    /// True when the graph contains no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.num_vertices();
        let mut indegree = vec![0u32; n];
        for &v in &self.targets {
            indegree[v as usize] += 1;
        }
        let mut stack: Vec<u32> = (0..n as u32).filter(|&v| indegree[v as usize] == 0).collect();
        let mut removed = 0;
        while let Some(u) = stack.pop() {
            removed += 1;
            for &v in &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]] {
                indegree[v as usize] -= 1;
                if indegree[v as usize] == 0 {
                    stack.push(v);
                }
            }
        }
        removed == n
    }

    /// Text dump: `vertices <n>` followed by one `  <from> <to> <weight>`
    /// line per edge with the weight as a hex float.
    pub fn dump(&self) -> String {
        let mut out = format!("vertices {}\n", self.num_vertices());
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "  {u} {v} {}", w.to_hex());
        }
        out
    }

    /// Parses the format written by [`Digraph::dump`].
    pub fn parse_dump(reader: impl BufRead, path: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { path: path.to_string(), line, msg };
        let mut lines = reader.lines().enumerate();
        let n = loop {
            let Some((i, line)) = lines.next() else {
                return Err(perr(1, "missing `vertices <n>` header".into()));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next().map(str::parse::<usize>), parts.next()) {
                (Some("vertices"), Some(Ok(n)), None) => break n,
                _ => return Err(perr(i + 1, format!("expected `vertices <n>`, got {line:?}"))),
            }
        };
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [u, v, w] = parts[..] else {
                return Err(perr(i + 1, format!("expected `<from> <to> <weight>`, got {line:?}")));
            };
            let u = u.parse().map_err(|_| perr(i + 1, format!("bad vertex {u:?}")))?;
            let v = v.parse().map_err(|_| perr(i + 1, format!("bad vertex {v:?}")))?;
            let w = T::parse_literal(w).ok_or_else(|| perr(i + 1, format!("bad weight {w:?}")))?;
            edges.push((u, v, w));
        }
        Self::from_edges(n, edges).map_err(|e| perr(0, e.to_string()))
    }
}

/// Weight bound for the transition `source -> target`: the infimum of
/// `log|2x|` over the part of `source` that some `f_a` maps into `target`.
fn transition_weight<T: Scalar>(
    omega: &ParamInterval<T>,
    source: &Interval<T>,
    target: &Interval<T>,
) -> Result<T> {
    let pre = omega.preimage(target)?;
    let mut best: Option<T> = None;
    for branch in pre.branches() {
        if let Some(j) = source.intersect(&branch) {
            let w = deriv_log_inf(&j)?;
            best = Some(best.map_or(w, |b| b.min(w)));
        }
    }
    // an empty preimage means the edge is spurious; the whole-cell bound is
    // still valid
    match best {
        Some(w) => Ok(w),
        None => deriv_log_inf(source),
    }
}

fn cell_row<T: Scalar>(
    omega: &ParamInterval<T>,
    partition: &PhasePartition<T>,
    domain: &Interval<T>,
    source: &Interval<T>,
) -> Result<Vec<(u32, T)>> {
    let Some(image) = omega.image(source)?.intersect(domain) else {
        return Ok(Vec::new());
    };
    let cells = partition.cells();
    let range = partition.cells_meeting(&image);
    let mut row = Vec::with_capacity(range.len() + 1);
    for j in range {
        row.push((j as u32, transition_weight(omega, source, &cells[j])?));
    }
    let critical = partition.critical();
    if image.intersects(&critical) {
        row.push((cells.len() as u32, transition_weight(omega, source, &critical)?));
    }
    Ok(row)
}

/// Builds the representation graph of `f` on `I_omega \ (-delta, delta)`.
///
/// Vertices `0..k` are the partition cells in ascending order and vertex `k`
/// is the critical cell, which has no out-edges. A cell has an edge to every
/// vertex meeting its image (clamped to the phase interval).
pub fn build_representation<T: Scalar>(omega: &ParamInterval<T>, partition: &PhasePartition<T>) -> Result<Digraph<T>> {
    let domain = omega.phase_domain()?.interval();
    let mut rows: Vec<Vec<(u32, T)>> = partition
        .cells()
        .par_iter()
        .map(|c| cell_row(omega, partition, &domain, c))
        .collect::<Result<_>>()?;
    rows.push(Vec::new());
    Ok(Digraph::from_rows(rows))
}

/// Rotates a cycle so it starts at its smallest vertex.
fn canonical_cycle(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = cycle.iter().enumerate().min_by_key(|&(_, v)| *v).map(|(i, _)| i) {
        cycle.rotate_left(pos);
    }
    cycle
}

/// Minimum cycle mean by Karp's theorem
/// `mu* = min_v max_j (D_n(v) - D_j(v)) / (n - j)`.
///
/// Keeps the full `(n + 1) x n` table of walk weights twice, once rounded
/// down and once rounded up, so the reported value never exceeds the exact
/// minimum. Memory is quadratic in the vertex count.
pub fn min_cycle_mean_karp<T: Scalar>(g: &Digraph<T>) -> CycleMeanResult<T> {
    let n = g.num_vertices();
    let inf = T::infinity();
    let mut lo = vec![inf; (n + 1) * n];
    let mut hi = vec![inf; (n + 1) * n];
    lo[..n].fill(T::zero());
    hi[..n].fill(T::zero());
    for k in 1..=n {
        let (prev_lo, cur_lo) = lo[(k - 1) * n..(k + 1) * n].split_at_mut(n);
        let (prev_hi, cur_hi) = hi[(k - 1) * n..(k + 1) * n].split_at_mut(n);
        for u in 0..n {
            if prev_lo[u] == inf {
                continue;
            }
            for (v, w) in g.out_edges(u) {
                let a = scalar::add(prev_lo[u], w, Round::Down);
                if a < cur_lo[v] {
                    cur_lo[v] = a;
                }
                let b = scalar::add(prev_hi[u], w, Round::Up);
                if b < cur_hi[v] {
                    cur_hi[v] = b;
                }
            }
        }
    }
    let last = n * n;
    let mut best: Option<T> = None;
    for v in 0..n {
        if lo[last + v] == inf {
            continue;
        }
        let mut worst = T::neg_infinity();
        for j in 0..n {
            if hi[j * n + v] == inf {
                continue;
            }
            let diff = scalar::sub(lo[last + v], hi[j * n + v], Round::Down);
            let q = scalar::div(diff, T::from_usize_exact(n - j), Round::Down);
            worst = worst.max(q);
        }
        best = Some(best.map_or(worst, |b| b.min(worst)));
    }
    CycleMeanResult { value: best, cycle: None }
}

/// Bytes of working memory [`min_cycle_mean_karp`] allocates for a graph
/// with `n` vertices.
pub fn karp_working_bytes<T>(n: usize) -> usize {
    2 * (n + 1) * n * std::mem::size_of::<T>()
}

/// Tuning for [`min_cycle_mean_lowmem`].
#[derive(Clone, Copy, Debug)]
pub struct LowMemOptions<T> {
    /// Stop once the certified lower bound is within this distance of the
    /// best cycle mean found.
    pub epsilon: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for LowMemOptions<T> {
    fn default() -> Self {
        Self { epsilon: T::from_f64(1e-9).unwrap(), max_iterations: 400 }
    }
}

enum Probe {
    /// No cycle has mean below the probed value; the potentials prove it.
    Feasible,
    /// A cycle found in the shortest-path tree, as vertices and edge indices.
    Cycle(Vec<usize>, Vec<usize>),
}

/// O(|V|) scratch space for the negative-cycle probes.
struct Prober<'g, T> {
    g: &'g Digraph<T>,
    dist: Vec<T>,
    parent_edge: Vec<u32>,
    in_queue: Vec<bool>,
    stamp: Vec<u32>,
    queue: VecDeque<u32>,
}

const NO_PARENT: u32 = u32::MAX;

impl<'g, T: Scalar> Prober<'g, T> {
    fn new(g: &'g Digraph<T>) -> Self {
        let n = g.num_vertices();
        Self {
            g,
            dist: vec![T::zero(); n],
            parent_edge: vec![NO_PARENT; n],
            in_queue: vec![false; n],
            stamp: vec![0; n],
            queue: VecDeque::with_capacity(n),
        }
    }

    /// Decides whether some cycle has mean below `mu` using queue-based
    /// Bellman-Ford on the weights `w - mu`, warm-started from `start`.
    ///
    /// Relaxations round down, so on success `dist` satisfies
    /// `dist[v] <= dist[u] + w - mu` exactly for every edge.
    fn probe(&mut self, mu: T, start: &[T]) -> Probe {
        let g = self.g;
        let n = g.num_vertices();
        self.dist.copy_from_slice(start);
        self.parent_edge.fill(NO_PARENT);
        self.queue.clear();
        for u in 0..n {
            let has_edges = g.offsets[u] < g.offsets[u + 1];
            self.in_queue[u] = has_edges;
            if has_edges {
                self.queue.push_back(u as u32);
            }
        }
        let mut relaxations = 0usize;
        while let Some(u) = self.queue.pop_front() {
            let u = u as usize;
            self.in_queue[u] = false;
            let du = self.dist[u];
            for e in g.offsets[u]..g.offsets[u + 1] {
                let v = g.targets[e] as usize;
                let shifted = scalar::sub(g.weights[e], mu, Round::Down);
                let cand = scalar::add(du, shifted, Round::Down);
                if cand < self.dist[v] {
                    self.dist[v] = cand;
                    self.parent_edge[v] = e as u32;
                    relaxations += 1;
                    if !self.in_queue[v] && g.offsets[v] < g.offsets[v + 1] {
                        self.in_queue[v] = true;
                        self.queue.push_back(v as u32);
                    }
                    if relaxations >= n {
                        relaxations = 0;
                        if let Some(c) = self.parent_cycle() {
                            return c;
                        }
                    }
                }
            }
        }
        Probe::Feasible
    }

    /// Finds a cycle in the parent-pointer graph, if there is one.
    fn parent_cycle(&mut self) -> Option<Probe> {
        let g = self.g;
        let n = g.num_vertices();
        self.stamp.fill(0);
        for s in 0..n {
            if self.stamp[s] != 0 {
                continue;
            }
            let walk = s as u32 + 1;
            let mut v = s;
            while self.stamp[v] == 0 {
                self.stamp[v] = walk;
                let e = self.parent_edge[v];
                if e == NO_PARENT {
                    break;
                }
                v = g.edge_source(e as usize);
            }
            if self.stamp[v] == walk && self.parent_edge[v] != NO_PARENT {
                // v lies on a cycle; walk it once more to collect it
                let mut vertices = Vec::new();
                let mut edges = Vec::new();
                let mut x = v;
                loop {
                    let e = self.parent_edge[x] as usize;
                    edges.push(e);
                    x = g.edge_source(e);
                    vertices.push(x);
                    if x == v {
                        break;
                    }
                }
                vertices.reverse();
                edges.reverse();
                return Some(Probe::Cycle(vertices, edges));
            }
        }
        None
    }
}

/// Minimum cycle mean with working memory linear in the vertex count.
///
/// Parametric search on the candidate mean `mu`: a probe either finds a
/// cycle of mean below `mu` (lowering the upper estimate to that cycle's
/// mean) or produces potentials certifying that every cycle has mean at
/// least `mu`. Probes alternate between jumping just below the best cycle
/// found and bisecting. The returned value is always a certified lower
/// bound, within `epsilon` of the best cycle mean found.
pub fn min_cycle_mean_lowmem<T: Scalar>(g: &Digraph<T>, opts: &LowMemOptions<T>) -> CycleMeanResult<T> {
    if g.num_edges() == 0 || g.is_acyclic() {
        return CycleMeanResult::acyclic();
    }
    let (w_min, w_max) = g.weights.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &w| (a.min(w), b.max(w)));
    let mut prober = Prober::new(g);
    // zero potentials certify w_min
    let mut lo = w_min;
    let mut hi = w_max;
    let mut potentials = vec![T::zero(); g.num_vertices()];
    let mut witness: Option<Vec<usize>> = None;
    let mut witness_edges: Vec<usize> = Vec::new();
    let mut jump = true;
    let half_eps = opts.epsilon / T::two();

    for _ in 0..opts.max_iterations {
        if hi - lo <= opts.epsilon {
            break;
        }
        let mid = lo + (hi - lo) / T::two();
        let mu = if jump && witness.is_some() { (hi - half_eps).max(mid) } else { mid };
        if !(mu > lo && mu < hi) {
            break;
        }
        match prober.probe(mu, &potentials) {
            Probe::Feasible => {
                lo = mu;
                potentials.copy_from_slice(&prober.dist);
                jump = true;
            }
            Probe::Cycle(vertices, edges) => {
                let sum = edges.iter().fold(T::zero(), |s, &e| s + g.weights[e]);
                let mean = sum / T::from_usize_exact(edges.len());
                hi = hi.min(mean).min(mu);
                witness = Some(vertices);
                witness_edges = edges;
                jump = !jump;
            }
        }
    }

    // Every probe was feasible: probe just above the bracket for a witness.
    if witness.is_none() {
        let mut slack = opts.epsilon.max(T::epsilon() * (hi.abs() + g.max_abs_weight()));
        for _ in 0..8 {
            if let Probe::Cycle(vertices, edges) = prober.probe(hi + slack, &potentials) {
                witness = Some(vertices);
                witness_edges = edges;
                break;
            }
            slack = slack * T::two();
        }
    }

    // Snap to the witness mean itself when the potentials can certify it.
    if witness.is_some() {
        let sum = witness_edges.iter().fold(T::zero(), |s, &e| scalar::add(s, g.weights[e], Round::Down));
        let mean_lo = scalar::div(sum, T::from_usize_exact(witness_edges.len()), Round::Down);
        // directed rounding in the probe can make the witness itself look
        // slightly negative at its own mean, so also try a few ulps lower
        let len = T::from_usize_exact(witness_edges.len());
        let mut slack = T::epsilon() * len * (mean_lo.abs() + g.max_abs_weight());
        let mut candidate = mean_lo;
        for _ in 0..4 {
            if !(candidate > lo) {
                break;
            }
            if let Probe::Feasible = prober.probe(candidate, &potentials) {
                lo = candidate;
                break;
            }
            candidate = mean_lo - slack;
            slack = slack * T::two();
        }
    }
    CycleMeanResult { value: Some(lo), cycle: witness.map(canonical_cycle) }
}

/// Checks `pot[v] <= pot[u] + w - mu` for every edge with rounding
/// against the claim.
pub fn potentials_certify<T: Scalar>(g: &Digraph<T>, pot: &[T], mu: T) -> bool {
    g.edges().all(|(u, v, w)| {
        let rhs = scalar::add(pot[u], scalar::sub(w, mu, Round::Down), Round::Down);
        pot[v] <= rhs
    })
}

pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

/// Minimum cycle mean by enumerating every simple cycle. Test oracle for
/// small graphs.
pub fn brute_force_cycle_mean<T: Scalar>(g: &Digraph<T>) -> Result<CycleMeanResult<T>> {
    let n = g.num_vertices();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::TooManyVertices { max: BRUTE_FORCE_MAX_VERTICES, got: n });
    }
    struct Search<'a, T> {
        g: &'a Digraph<T>,
        start: usize,
        path: Vec<usize>,
        on_path: Vec<bool>,
        best: Option<(T, Vec<usize>)>,
    }
    impl<T: Scalar> Search<'_, T> {
        fn dfs(&mut self, u: usize, sum: T) {
            for (v, w) in self.g.out_edges(u) {
                let s = scalar::add(sum, w, Round::Down);
                if v == self.start {
                    let mean = scalar::div(s, T::from_usize_exact(self.path.len()), Round::Down);
                    if self.best.as_ref().is_none_or(|(b, _)| mean < *b) {
                        self.best = Some((mean, self.path.clone()));
                    }
                } else if v > self.start && !self.on_path[v] {
                    self.on_path[v] = true;
                    self.path.push(v);
                    self.dfs(v, s);
                    self.path.pop();
                    self.on_path[v] = false;
                }
            }
        }
    }
    let mut search = Search { g, start: 0, path: Vec::new(), on_path: vec![false; n], best: None };
    for s in 0..n {
        search.start = s;
        search.path = vec![s];
        search.on_path[s] = true;
        search.dfs(s, T::zero());
        search.on_path[s] = false;
    }
    Ok(match search.best {
        Some((mean, cycle)) => CycleMeanResult { value: Some(mean), cycle: Some(cycle) },
        None => CycleMeanResult::acyclic(),
    })
}
