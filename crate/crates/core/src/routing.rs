//! Heuristic TSP and CVRP solvers plus the analytic route-length bounds and
//! the continuous CVRP approximation.
//!
//! Exact solvers are deliberately avoided: the pricing model consumes route
//! lengths, and the acceptance tolerances absorb heuristic gaps. All solvers
//! are deterministic for a fixed input order.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("instance must contain at least one point")]
    EmptyInstance,
    #[error("vehicle capacity must be at least 1")]
    ZeroCapacity,
    #[error("neighbor density needs a tour over at least 2 points")]
    NeedTwoPoints,
}

/// Planar distance used throughout a run. The case studies use L1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    L2,
}

impl Metric {
    pub fn dist(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        match self {
            Metric::L1 => dx.abs() + dy.abs(),
            Metric::L2 => (dx * dx + dy * dy).sqrt(),
        }
    }
}

/// A cyclic visiting order over a point set, with its closed length.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Permutation of point indices (0-based).
    pub order: Vec<usize>,
    /// Cycle length including the closing edge.
    pub length: f64,
}

fn cycle_length(order: &[usize], points: &[[f64; 2]], metric: Metric) -> f64 {
    if order.len() < 2 {
        return 0.0;
    }
    let mut len = 0.0;
    for i in 0..order.len() {
        let a = points[order[i]];
        let b = points[order[(i + 1) % order.len()]];
        len += metric.dist(a, b);
    }
    len
}

/// Nearest-neighbor construction from point 0; ties break to the lowest
/// index so runs are reproducible.
fn nearest_neighbor(points: &[[f64; 2]], metric: Metric) -> Vec<usize> {
    let n = points.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut current = 0usize;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, &seen) in visited.iter().enumerate() {
            if !seen {
                let d = metric.dist(points[current], points[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        current = best;
    }
    order
}

/// First-improvement 2-opt sweeps on a cyclic tour until a full pass finds
/// nothing, capped at `50·n` applied moves.
fn two_opt_cycle(order: &mut [usize], points: &[[f64; 2]], metric: Metric) {
    let n = order.len();
    if n < 4 {
        return;
    }
    let d = |a: usize, b: usize| metric.dist(points[a], points[b]);
    let move_cap = 50 * n;
    let mut moves = 0usize;
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue; // the two edges share the wrap-around node
                }
                let delta = d(order[i], order[j]) + d(order[i + 1], order[(j + 1) % n])
                    - d(order[i], order[i + 1])
                    - d(order[j], order[(j + 1) % n]);
                if delta < -1e-12 {
                    order[i + 1..=j].reverse();
                    improved = true;
                    moves += 1;
                    if moves >= move_cap {
                        return;
                    }
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// One first-improvement Or-opt sweep on a cyclic tour: segments of 1–3
/// consecutive nodes are relocated (forward or reversed) wherever that
/// shortens the cycle. Returns whether anything moved.
fn or_opt_cycle(order: &mut Vec<usize>, points: &[[f64; 2]], metric: Metric) -> bool {
    let n = order.len();
    if n < 5 {
        return false;
    }
    let d = |a: usize, b: usize| metric.dist(points[a], points[b]);
    let mut improved_any = false;
    let move_cap = 50 * n;
    let mut moves = 0usize;
    for seg_len in 1..=3usize {
        let mut s = 0;
        while s < n {
            let e = s + seg_len - 1;
            if e >= n {
                break;
            }
            let prev = order[(s + n - 1) % n];
            let next = order[(e + 1) % n];
            if (e + 1) % n == (s + n - 1) % n {
                s += 1;
                continue;
            }
            let s0 = order[s];
            let s1 = order[e];
            let gain = d(prev, s0) + d(s1, next) - d(prev, next);
            if gain <= 1e-12 {
                s += 1;
                continue;
            }
            // Best insertion point among all remaining edges.
            let mut best: Option<(usize, bool, f64)> = None;
            let mut u_idx = (e + 1) % n;
            loop {
                let v_idx = (u_idx + 1) % n;
                if v_idx == s {
                    break;
                }
                let u = order[u_idx];
                let v = order[v_idx];
                let fwd = d(u, s0) + d(s1, v) - d(u, v);
                let rev = d(u, s1) + d(s0, v) - d(u, v);
                let (cost, reversed) = if fwd <= rev { (fwd, false) } else { (rev, true) };
                if cost < gain - 1e-12 && best.is_none_or(|(_, _, c)| cost < c) {
                    best = Some((u_idx, reversed, cost));
                }
                u_idx = v_idx;
            }
            if let Some((u_idx, reversed, _)) = best {
                let mut seg: Vec<usize> = order[s..=e].to_vec();
                if reversed {
                    seg.reverse();
                }
                let mut rest: Vec<usize> = Vec::with_capacity(n - seg_len);
                let mut idx = (e + 1) % n;
                while idx != s {
                    rest.push(order[idx]);
                    idx = (idx + 1) % n;
                }
                // `u_idx` counted in the old order; find u in `rest`.
                let u = order[u_idx];
                let pos = rest.iter().position(|&x| x == u).unwrap();
                let mut new_order = Vec::with_capacity(n);
                new_order.extend_from_slice(&rest[..=pos]);
                new_order.extend_from_slice(&seg);
                new_order.extend_from_slice(&rest[pos + 1..]);
                *order = new_order;
                improved_any = true;
                moves += 1;
                if moves >= move_cap {
                    return true;
                }
            } else {
                s += 1;
            }
        }
    }
    improved_any
}

/// Heuristic TSP tour: nearest-neighbor construction improved by alternating
/// 2-opt and Or-opt to a joint local optimum. The result is never longer
/// than the construction.
pub fn tsp_tour(points: &[[f64; 2]], metric: Metric) -> Result<Tour, RoutingError> {
    if points.is_empty() {
        return Err(RoutingError::EmptyInstance);
    }
    let mut order = nearest_neighbor(points, metric);
    let nn_len = cycle_length(&order, points, metric);
    for _ in 0..10 {
        two_opt_cycle(&mut order, points, metric);
        if !or_opt_cycle(&mut order, points, metric) {
            break;
        }
    }
    let length = cycle_length(&order, points, metric);
    debug_assert!(length <= nn_len + 1e-9);
    Ok(Tour { order, length })
}

/// Package destinations with the derived quantities the pricing model needs:
/// the tour order, per-package depot distances (long haul) and tour-adjacent
/// half-distances (local).
///
/// After construction, "location i" (1-based) always means the i-th point
/// along the tour; the wrap-around local distances make
/// `Σ local = tour length` exact.
#[derive(Debug, Clone)]
pub struct Instance {
    points: Vec<[f64; 2]>,
    depot: [f64; 2],
    metric: Metric,
    tour: Tour,
    ordered: Vec<[f64; 2]>,
    long_haul: Vec<f64>,
    local: Vec<f64>,
}

impl Instance {
    pub fn build(
        points: Vec<[f64; 2]>,
        depot: [f64; 2],
        metric: Metric,
    ) -> Result<Self, RoutingError> {
        let tour = tsp_tour(&points, metric)?;
        let n = points.len();
        let ordered: Vec<[f64; 2]> = tour.order.iter().map(|&i| points[i]).collect();
        let long_haul: Vec<f64> = ordered.iter().map(|&p| metric.dist(p, depot)).collect();
        let mut local = vec![0.0; n];
        if n >= 2 {
            for i in 0..n {
                let prev = ordered[(i + n - 1) % n];
                let next = ordered[(i + 1) % n];
                local[i] =
                    0.5 * (metric.dist(prev, ordered[i]) + metric.dist(ordered[i], next));
            }
        }
        Ok(Self { points, depot, metric, tour, ordered, long_haul, local })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn depot(&self) -> [f64; 2] {
        self.depot
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn tour(&self) -> &Tour {
        &self.tour
    }

    /// Destination of the package at tour location `loc` (1-based).
    pub fn ordered_point(&self, loc: usize) -> [f64; 2] {
        self.ordered[loc - 1]
    }

    /// Depot distance of the package at tour location `loc` (1-based).
    pub fn long_haul(&self, loc: usize) -> f64 {
        self.long_haul[loc - 1]
    }

    /// Average adjacent-gap distance at tour location `loc` (1-based).
    pub fn local_dist(&self, loc: usize) -> f64 {
        self.local[loc - 1]
    }

    pub fn long_hauls(&self) -> &[f64] {
        &self.long_haul
    }

    pub fn locals(&self) -> &[f64] {
        &self.local
    }

    /// Tour-edge distance from location `loc` to its successor (1-based,
    /// cyclic).
    pub fn gap_after(&self, loc: usize) -> f64 {
        let n = self.len();
        self.metric
            .dist(self.ordered[loc - 1], self.ordered[loc % n])
    }

    pub fn mean_long_haul(&self) -> f64 {
        if self.long_haul.is_empty() {
            0.0
        } else {
            self.long_haul.iter().sum::<f64>() / self.long_haul.len() as f64
        }
    }
}

/// A capacitated routing solution: depot-anchored routes of at most
/// `capacity` points each.
#[derive(Debug, Clone, Serialize)]
pub struct CvrpSolution {
    /// Point indices per route (0-based); routes start and end at the depot.
    pub routes: Vec<Vec<usize>>,
    pub total_length: f64,
    pub capacity: usize,
}

fn route_length(route: &[usize], points: &[[f64; 2]], depot: [f64; 2], metric: Metric) -> f64 {
    if route.is_empty() {
        return 0.0;
    }
    let mut len = metric.dist(depot, points[route[0]]);
    for w in route.windows(2) {
        len += metric.dist(points[w[0]], points[w[1]]);
    }
    len + metric.dist(points[*route.last().unwrap()], depot)
}

/// First-improvement 2-opt on an open depot-to-depot path (the depot
/// endpoints stay fixed).
fn two_opt_path(route: &mut [usize], points: &[[f64; 2]], depot: [f64; 2], metric: Metric) {
    let k = route.len();
    if k < 3 {
        return;
    }
    let pos = |r: &[usize], idx: isize| -> [f64; 2] {
        if idx < 0 || idx as usize >= r.len() {
            depot
        } else {
            points[r[idx as usize]]
        }
    };
    let move_cap = 50 * k;
    let mut moves = 0usize;
    loop {
        let mut improved = false;
        for x in 0..k - 1 {
            for y in x + 1..k {
                let before = metric.dist(pos(route, x as isize - 1), pos(route, x as isize))
                    + metric.dist(pos(route, y as isize), pos(route, y as isize + 1));
                let after = metric.dist(pos(route, x as isize - 1), pos(route, y as isize))
                    + metric.dist(pos(route, x as isize), pos(route, y as isize + 1));
                if after < before - 1e-12 {
                    route[x..=y].reverse();
                    improved = true;
                    moves += 1;
                    if moves >= move_cap {
                        return;
                    }
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Clarke–Wright parallel savings under a per-route point capacity.
fn clarke_wright(
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
) -> Vec<Vec<usize>> {
    let n = points.len();
    let depot_d: Vec<f64> = points.iter().map(|&p| metric.dist(depot, p)).collect();
    let mut savings: Vec<(f64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s = depot_d[i] + depot_d[j] - metric.dist(points[i], points[j]);
            savings.push((s, i as u32, j as u32));
        }
    }
    savings.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    // Each customer starts alone; merges happen only at route endpoints.
    let mut route_of: Vec<usize> = (0..n).collect();
    let mut routes: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for &(s, i, j) in &savings {
        if s <= 0.0 {
            break;
        }
        let (i, j) = (i as usize, j as usize);
        let ri = route_of[i];
        let rj = route_of[j];
        if ri == rj {
            continue;
        }
        let (len_i, len_j) = {
            let a = routes[ri].as_ref().unwrap();
            let b = routes[rj].as_ref().unwrap();
            (a.len(), b.len())
        };
        if len_i + len_j > capacity {
            continue;
        }
        let a = routes[ri].as_ref().unwrap();
        let b = routes[rj].as_ref().unwrap();
        let i_head = a[0] == i;
        let i_tail = *a.last().unwrap() == i;
        let j_head = b[0] == j;
        let j_tail = *b.last().unwrap() == j;
        if !(i_head || i_tail) || !(j_head || j_tail) {
            continue;
        }
        let mut a = routes[ri].take().unwrap();
        let mut b = routes[rj].take().unwrap();
        if !i_tail {
            a.reverse();
        }
        if !j_head {
            b.reverse();
        }
        a.append(&mut b);
        for &c in &a {
            route_of[c] = ri;
        }
        routes[ri] = Some(a);
    }
    routes.into_iter().flatten().collect()
}

/// Route-first cluster-second: split a TSP tour into capacity-feasible
/// consecutive segments by shortest-path dynamic programming, trying a few
/// tour rotations and keeping the best split.
fn split_tour(
    tour_order: &[usize],
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
) -> Vec<Vec<usize>> {
    let n = tour_order.len();
    let rotations = if n <= 8 { 1 } else { 8 };
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    for rot in 0..rotations {
        let shift = rot * n / rotations;
        let order: Vec<usize> = (0..n).map(|i| tour_order[(i + shift) % n]).collect();
        // pre[i] = open-path length along order[0..i]
        let mut pre = vec![0.0; n];
        for i in 1..n {
            pre[i] = pre[i - 1] + metric.dist(points[order[i - 1]], points[order[i]]);
        }
        let d0: Vec<f64> = order.iter().map(|&c| metric.dist(depot, points[c])).collect();
        let mut dp = vec![f64::INFINITY; n + 1];
        let mut parent = vec![0usize; n + 1];
        dp[0] = 0.0;
        for j in 1..=n {
            let lo = j.saturating_sub(capacity);
            for i in lo..j {
                let cost = d0[i] + (pre[j - 1] - pre[i]) + d0[j - 1];
                let cand = dp[i] + cost;
                if cand < dp[j] {
                    dp[j] = cand;
                    parent[j] = i;
                }
            }
        }
        let mut cuts = Vec::new();
        let mut j = n;
        while j > 0 {
            let i = parent[j];
            cuts.push((i, j));
            j = i;
        }
        let routes: Vec<Vec<usize>> = cuts
            .into_iter()
            .rev()
            .map(|(i, j)| order[i..j].to_vec())
            .collect();
        if best.as_ref().is_none_or(|(len, _)| dp[n] < *len) {
            best = Some((dp[n], routes));
        }
    }
    best.unwrap().1
}

/// One first-improvement Or-opt sweep on an open depot-to-depot path.
fn or_opt_path(route: &mut Vec<usize>, points: &[[f64; 2]], depot: [f64; 2], metric: Metric) -> bool {
    let k = route.len();
    if k < 3 {
        return false;
    }
    let at = |r: &[usize], idx: isize| -> [f64; 2] {
        if idx < 0 || idx as usize >= r.len() {
            depot
        } else {
            points[r[idx as usize]]
        }
    };
    let mut improved = false;
    for seg_len in 1..=3usize.min(k - 1) {
        let mut s = 0usize;
        while s + seg_len <= route.len() {
            let e = s + seg_len - 1;
            let p_prev = at(route, s as isize - 1);
            let p_next = at(route, e as isize + 1);
            let s0 = points[route[s]];
            let s1 = points[route[e]];
            let gain = metric.dist(p_prev, s0) + metric.dist(s1, p_next)
                - metric.dist(p_prev, p_next);
            if gain <= 1e-12 {
                s += 1;
                continue;
            }
            let seg: Vec<usize> = route[s..=e].to_vec();
            let mut rest: Vec<usize> = Vec::with_capacity(route.len() - seg_len);
            rest.extend_from_slice(&route[..s]);
            rest.extend_from_slice(&route[e + 1..]);
            let mut best: Option<(usize, bool, f64)> = None;
            for q in 0..=rest.len() {
                if q == s {
                    continue; // identity re-insertion
                }
                let u = at(&rest, q as isize - 1);
                let v = at(&rest, q as isize);
                let fwd = metric.dist(u, s0) + metric.dist(s1, v) - metric.dist(u, v);
                let rev = metric.dist(u, s1) + metric.dist(s0, v) - metric.dist(u, v);
                let (cost, reversed) = if fwd <= rev { (fwd, false) } else { (rev, true) };
                if cost < gain - 1e-12 && best.is_none_or(|(_, _, c)| cost < c) {
                    best = Some((q, reversed, cost));
                }
            }
            if let Some((q, reversed, _)) = best {
                let mut seg = seg;
                if reversed {
                    seg.reverse();
                }
                let mut new_route = Vec::with_capacity(route.len());
                new_route.extend_from_slice(&rest[..q]);
                new_route.extend_from_slice(&seg);
                new_route.extend_from_slice(&rest[q..]);
                *route = new_route;
                improved = true;
            } else {
                s += 1;
            }
        }
    }
    improved
}

/// Relocates single points across routes wherever the move shortens the
/// total length and respects capacity. First-improvement; one sweep.
#[allow(clippy::needless_range_loop)] // index b is compared against a and used for mutation
fn relocate_pass(
    routes: &mut Vec<Vec<usize>>,
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
) -> bool {
    let at = |r: &[usize], idx: isize| -> [f64; 2] {
        if idx < 0 || idx as usize >= r.len() {
            depot
        } else {
            points[r[idx as usize]]
        }
    };
    let mut improved = false;
    let mut a = 0;
    while a < routes.len() {
        let mut pos = 0;
        while pos < routes[a].len() {
            let c = routes[a][pos];
            let pc = points[c];
            let gain = metric.dist(at(&routes[a], pos as isize - 1), pc)
                + metric.dist(pc, at(&routes[a], pos as isize + 1))
                - metric.dist(
                    at(&routes[a], pos as isize - 1),
                    at(&routes[a], pos as isize + 1),
                );
            if gain <= 1e-12 {
                pos += 1;
                continue;
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for b in 0..routes.len() {
                if b == a || routes[b].len() >= capacity {
                    continue;
                }
                for q in 0..=routes[b].len() {
                    let u = at(&routes[b], q as isize - 1);
                    let v = at(&routes[b], q as isize);
                    let cost = metric.dist(u, pc) + metric.dist(pc, v) - metric.dist(u, v);
                    if cost < gain - 1e-12 && best.is_none_or(|(_, _, co)| cost < co) {
                        best = Some((b, q, cost));
                    }
                }
            }
            if let Some((b, q, _)) = best {
                routes[a].remove(pos);
                routes[b].insert(q, c);
                improved = true;
            } else {
                pos += 1;
            }
        }
        a += 1;
    }
    routes.retain(|r| !r.is_empty());
    improved
}

/// Exchanges point pairs between distinct routes when profitable.
/// First-improvement; one sweep.
fn swap_pass(
    routes: &mut [Vec<usize>],
    points: &[[f64; 2]],
    depot: [f64; 2],
    metric: Metric,
) -> bool {
    let at = |r: &[usize], idx: isize| -> [f64; 2] {
        if idx < 0 || idx as usize >= r.len() {
            depot
        } else {
            points[r[idx as usize]]
        }
    };
    let mut improved = false;
    for a in 0..routes.len() {
        for b in a + 1..routes.len() {
            let mut pa = 0;
            while pa < routes[a].len() {
                let mut applied = false;
                for pb in 0..routes[b].len() {
                    let ca = points[routes[a][pa]];
                    let cb = points[routes[b][pb]];
                    let (a_prev, a_next) =
                        (at(&routes[a], pa as isize - 1), at(&routes[a], pa as isize + 1));
                    let (b_prev, b_next) =
                        (at(&routes[b], pb as isize - 1), at(&routes[b], pb as isize + 1));
                    let old = metric.dist(a_prev, ca)
                        + metric.dist(ca, a_next)
                        + metric.dist(b_prev, cb)
                        + metric.dist(cb, b_next);
                    let new = metric.dist(a_prev, cb)
                        + metric.dist(cb, a_next)
                        + metric.dist(b_prev, ca)
                        + metric.dist(ca, b_next);
                    if new < old - 1e-12 {
                        let tmp = routes[a][pa];
                        routes[a][pa] = routes[b][pb];
                        routes[b][pb] = tmp;
                        improved = true;
                        applied = true;
                        break;
                    }
                }
                if !applied {
                    pa += 1;
                }
            }
        }
    }
    improved
}

fn total_route_length(
    routes: &[Vec<usize>],
    points: &[[f64; 2]],
    depot: [f64; 2],
    metric: Metric,
) -> f64 {
    routes
        .iter()
        .map(|r| route_length(r, points, depot, metric))
        .sum()
}

/// Alternates intra-route (2-opt, Or-opt) and inter-route (relocate, swap)
/// improvement until a full round finds nothing.
fn improve_routes(
    routes: &mut Vec<Vec<usize>>,
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
) {
    for _ in 0..15 {
        for r in routes.iter_mut() {
            two_opt_path(r, points, depot, metric);
            or_opt_path(r, points, depot, metric);
            two_opt_path(r, points, depot, metric);
        }
        let moved = relocate_pass(routes, points, depot, capacity, metric);
        let swapped = swap_pass(routes, points, depot, metric);
        if !moved && !swapped {
            break;
        }
    }
}

/// Heuristic CVRP: Clarke–Wright savings and a tour-split construction, each
/// polished with intra-route 2-opt/Or-opt and inter-route relocate/swap; the
/// shorter solution wins.
pub fn cvrp_solve(
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
) -> Result<CvrpSolution, RoutingError> {
    if capacity == 0 {
        return Err(RoutingError::ZeroCapacity);
    }
    if points.is_empty() {
        return Ok(CvrpSolution { routes: Vec::new(), total_length: 0.0, capacity });
    }
    // Canonicalize the input order so the solution depends only on the point
    // set, not its presentation order (the local search is order-sensitive).
    let mut perm: Vec<usize> = (0..points.len()).collect();
    perm.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .expect("point coordinates must not be NaN")
            .then(a.cmp(&b))
    });
    let canon: Vec<[f64; 2]> = perm.iter().map(|&i| points[i]).collect();
    let points = &canon[..];

    let polish = |mut routes: Vec<Vec<usize>>| -> (f64, Vec<Vec<usize>>) {
        improve_routes(&mut routes, points, depot, capacity, metric);
        (total_route_length(&routes, points, depot, metric), routes)
    };
    let (cw_len, cw_routes) = polish(clarke_wright(points, depot, capacity, metric));
    let tour = tsp_tour(points, metric)?;
    let (sp_len, sp_routes) = polish(split_tour(&tour.order, points, depot, capacity, metric));
    let (total_length, mut routes) = if cw_len <= sp_len {
        (cw_len, cw_routes)
    } else {
        (sp_len, sp_routes)
    };
    for route in routes.iter_mut() {
        for c in route.iter_mut() {
            *c = perm[*c];
        }
    }
    debug_assert!(routes.iter().all(|r| r.len() <= capacity));
    Ok(CvrpSolution { routes, total_length, capacity })
}

/// Analytic bracket for the optimal CVRP length:
///
/// ```text
/// max{ 2·n·r̄/V, tsp_len }  <=  L*  <=  2·(n/V + 1)·r̄ + tsp_len
/// ```
///
/// The radial term is a true lower bound for any feasible solution. The
/// `tsp_len` term bounds the optimum only when fed an optimal tour length;
/// with a heuristic tour it can slightly exceed a very good CVRP solution.
/// The upper bound holds for the optimum, so heuristics are only reported
/// against it, not asserted.
pub fn cvrp_bounds(
    points: &[[f64; 2]],
    depot: [f64; 2],
    capacity: usize,
    metric: Metric,
    tsp_len: f64,
) -> (f64, f64) {
    let n = points.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let r_bar = points.iter().map(|&p| metric.dist(depot, p)).sum::<f64>() / n as f64;
    let lower = (2.0 * n as f64 * r_bar / capacity as f64).max(tsp_len);
    let upper = 2.0 * (n as f64 / capacity as f64 + 1.0) * r_bar + tsp_len;
    (lower, upper)
}

/// Continuous approximation of the CVRP length for `k` points uniformly
/// spread over area `a`: `2k·r̄/V + β·√(k·a)`.
pub fn cvrp_continuous(k: f64, r_bar: f64, area: f64, capacity: usize, beta: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    2.0 * k * r_bar / capacity as f64 + beta * (k * area).sqrt()
}

/// Empirical density of the distance between tour neighbors.
#[derive(Debug, Clone, Serialize)]
pub struct NeighborDensity {
    /// `bins + 1` edges spanning `[0, max_distance]`.
    pub bin_edges: Vec<f64>,
    /// Per-bin density; integrates to 1 over the edges.
    pub density: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

/// Histogram and moments of the consecutive-edge distances of a tour
/// (cyclic, so `n` edges and `mean = length/n`).
pub fn neighbor_density(
    tour: &Tour,
    points: &[[f64; 2]],
    metric: Metric,
    bins: usize,
) -> Result<NeighborDensity, RoutingError> {
    let n = tour.order.len();
    if n < 2 || bins == 0 {
        return Err(RoutingError::NeedTwoPoints);
    }
    let dists: Vec<f64> = (0..n)
        .map(|i| {
            metric.dist(
                points[tour.order[i]],
                points[tour.order[(i + 1) % n]],
            )
        })
        .collect();
    let mean = dists.iter().sum::<f64>() / n as f64;
    let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
    let max = dists.iter().cloned().fold(0.0_f64, f64::max);
    let hi = if max > 0.0 { max } else { 1.0 };
    let width = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    for &d in &dists {
        let idx = ((d / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let density: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (n as f64 * width))
        .collect();
    let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    Ok(NeighborDensity { bin_edges, density, mean, std_dev: var.sqrt() })
}
