//! Brute-force ground truth at desk scale.
//!
//! Everything here is enumeration over immutable data and never touches a
//! MILP solver, so it can sit on the other side of every cross-check:
//! batching enumeration, a closed-form evaluation of the approximation
//! objective for a fixed batching, walk-level routing oracles, and the joint
//! batching-plus-routing optimum. Inputs beyond [`OracleLimits`] are refused
//! rather than approximated.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::approx::ModelConfig;
use crate::instance::{Batching, BatchingError, Instance};
use crate::router::RouteMode;
use crate::util::OrdF64;
use crate::warehouse::{GridPoint, LayoutError, SubaisleId, WarehouseGraph, WarehouseLayout};

/// Enumeration size guards. The defaults keep every oracle call well under a
/// second; anything bigger is refused.
#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_orders: usize,
    pub max_trolleys: usize,
    pub max_aisle_edges: usize,
    pub max_picks_per_trolley: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_orders: 6,
            max_trolleys: 3,
            // 2^16 subsets per trolley; admits the four-by-four worked example.
            max_aisle_edges: 16,
            max_picks_per_trolley: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the oracle limit {max}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("batching invalid: {0}")]
    Batching(#[from] BatchingError),
    #[error("layout error: {0}")]
    Layout(#[from] LayoutError),
    #[error("no feasible batching under the given capacity")]
    NoFeasibleBatching,
}

/// All capacity-feasible assignments, one canonical representative per
/// trolley-permutation class: the first order rides trolley 1 and each later
/// order may open at most one new trolley.
pub fn enumerate_batchings(
    instance: &Instance,
    limits: &OracleLimits,
) -> Result<Vec<Batching>, OracleError> {
    if instance.orders().len() > limits.max_orders {
        return Err(OracleError::LimitExceeded {
            what: "orders",
            value: instance.orders().len(),
            max: limits.max_orders,
        });
    }
    if instance.num_trolleys() > limits.max_trolleys {
        return Err(OracleError::LimitExceeded {
            what: "trolleys",
            value: instance.num_trolleys(),
            max: limits.max_trolleys,
        });
    }
    let mut out = Vec::new();
    let mut loads = vec![0u64; instance.num_trolleys()];
    let mut assignment = vec![0usize; instance.orders().len()];
    recurse_batchings(instance, 0, 0, &mut loads, &mut assignment, &mut out);
    Ok(out)
}

fn recurse_batchings(
    instance: &Instance,
    order_idx: usize,
    used: usize,
    loads: &mut Vec<u64>,
    assignment: &mut Vec<usize>,
    out: &mut Vec<Batching>,
) {
    if order_idx == instance.orders().len() {
        let mut b = Batching::default();
        for (oi, o) in instance.orders().iter().enumerate() {
            b.assign(&o.id, assignment[oi] + 1);
        }
        out.push(b);
        return;
    }
    let order = &instance.orders()[order_idx];
    let choices = if used < instance.num_trolleys() {
        used + 1
    } else {
        used
    };
    for t in 0..choices {
        if loads[t] + u64::from(order.baskets) > u64::from(instance.capacity()) {
            continue;
        }
        loads[t] += u64::from(order.baskets);
        assignment[order_idx] = t;
        recurse_batchings(
            instance,
            order_idx + 1,
            used.max(t + 1),
            loads,
            assignment,
            out,
        );
        loads[t] -= u64::from(order.baskets);
    }
}

/// Closed-form value of the approximation objective for a fixed batching.
///
/// For every trolley this minimizes, over all aisle-edge subsets that cover
/// each assigned product and touch block 1, the edge lengths plus the origin
/// legs and cross-aisle span the model would charge: with `F1`/`L1` the
/// extreme block-1 aisles and `F2`/`L2` the extreme aisles beyond block 1,
/// the span term is `d0(F1) + d0(L1) + (d1(L1) - d1(F1))`, extended by
/// `max(0, 2(d1(F1)-d1(F2))) + max(0, 2(d1(L2)-d1(L1)))` when the extension
/// is on and later blocks are used, and each block with an odd edge count
/// adds its shortest subaisle when the parity term is on.
pub fn eval_approx_objective(
    instance: &Instance,
    batching: &Batching,
    config: &ModelConfig,
    limits: &OracleLimits,
) -> Result<f64, OracleError> {
    batching.validate(instance)?;
    let layout = instance.layout();
    let edges = layout.all_subaisles();
    if edges.len() > limits.max_aisle_edges {
        return Err(OracleError::LimitExceeded {
            what: "aisle edges",
            value: edges.len(),
            max: limits.max_aisle_edges,
        });
    }

    let mut total = 0.0;
    for t in 1..=instance.num_trolleys() {
        let orders = batching.orders_on(instance, t);
        if orders.is_empty() {
            continue;
        }
        let mut coverage: Vec<u32> = Vec::new();
        for o in &orders {
            for pid in &o.product_ids {
                let p = instance.product(pid).expect("validated product");
                let mut mask = 0u32;
                for e in p.edge_set() {
                    let ei = edges.iter().position(|&x| x == e).expect("edge in layout");
                    mask |= 1 << ei;
                }
                coverage.push(mask);
            }
        }
        coverage.sort_unstable();
        coverage.dedup();
        total += best_completion(layout, &edges, &coverage, config)?;
    }
    Ok(total)
}

fn best_completion(
    layout: &WarehouseLayout,
    edges: &[SubaisleId],
    coverage: &[u32],
    config: &ModelConfig,
) -> Result<f64, OracleError> {
    let m = edges.len();
    let num_a = layout.num_aisles();
    let d1: Vec<f64> = (1..=num_a)
        .map(|a| layout.cross_distance(1, a).unwrap())
        .collect();
    let d0: Vec<f64> = (1..=num_a)
        .map(|a| layout.origin_to_aisle(a).unwrap())
        .collect();
    let len: Vec<f64> = edges
        .iter()
        .map(|&e| layout.subaisle_length(e).unwrap())
        .collect();
    let db: Vec<f64> = (1..=layout.num_blocks())
        .map(|b| layout.min_block_subaisle(b).unwrap())
        .collect();
    let block1: u32 = edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.block == 1)
        .map(|(i, _)| 1u32 << i)
        .sum();

    let mut best = f64::INFINITY;
    'subset: for x in 0u32..(1u32 << m) {
        if x & block1 == 0 {
            continue;
        }
        for &mask in coverage {
            if x & mask == 0 {
                continue 'subset;
            }
        }
        let mut cost = 0.0;
        let mut f1 = usize::MAX;
        let mut l1 = 0usize;
        let mut f2 = usize::MAX;
        let mut l2 = 0usize;
        let mut beyond = false;
        let mut block_counts = vec![0u32; layout.num_blocks()];
        for (i, e) in edges.iter().enumerate() {
            if x & (1 << i) == 0 {
                continue;
            }
            cost += len[i];
            block_counts[e.block - 1] += 1;
            if e.block == 1 {
                f1 = f1.min(e.aisle);
                l1 = l1.max(e.aisle);
            } else {
                beyond = true;
                f2 = f2.min(e.aisle);
                l2 = l2.max(e.aisle);
            }
        }
        cost += d0[f1 - 1] + d0[l1 - 1] + (d1[l1 - 1] - d1[f1 - 1]);
        if config.multiblock && beyond {
            cost += (2.0 * (d1[f1 - 1] - d1[f2 - 1])).max(0.0);
            cost += (2.0 * (d1[l2 - 1] - d1[l1 - 1])).max(0.0);
        }
        if config.parity {
            for (b, &count) in block_counts.iter().enumerate() {
                if count % 2 == 1 {
                    cost += db[b];
                }
            }
        }
        if cost < best {
            best = cost;
        }
    }
    Ok(best)
}

/// Exact no-reversal routing of one pick set: the length of the shortest
/// closed walk from the origin that fully traverses, for every product, at
/// least one subaisle it can be picked from. Solved as a shortest path over
/// (graph node, set of products already covered) states.
pub fn no_reversal_walk_oracle(
    layout: &WarehouseLayout,
    product_edges: &[BTreeSet<SubaisleId>],
) -> Result<f64, OracleError> {
    if product_edges.is_empty() {
        return Ok(0.0);
    }
    if product_edges.len() > 20 {
        return Err(OracleError::LimitExceeded {
            what: "products",
            value: product_edges.len(),
            max: 20,
        });
    }
    let graph = WarehouseGraph::new(layout, &[])?;
    let full: u32 = (1u32 << product_edges.len()) - 1;

    // Edge coverage masks, looked up via sorted endpoints of aisle edges.
    let mut edge_mask: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for (pi, q) in product_edges.iter().enumerate() {
        for &e in q {
            let (n, s) = layout.subaisle_endpoints(e)?;
            *edge_mask.entry((n, s)).or_insert(0) |= 1 << pi;
        }
    }

    let n = graph.node_count();
    let states = n * (full as usize + 1);
    let mut dist = vec![f64::INFINITY; states];
    let idx = |node: usize, mask: u32| node * (full as usize + 1) + mask as usize;
    let mut heap = alloc::collections::BinaryHeap::new();
    dist[idx(0, 0)] = 0.0;
    heap.push(Reverse((OrdF64(0.0), 0usize, 0u32)));
    while let Some(Reverse((OrdF64(d), node, mask))) = heap.pop() {
        if d > dist[idx(node, mask)] {
            continue;
        }
        if node == 0 && mask == full {
            return Ok(d);
        }
        for &(next, w) in graph.neighbors(node) {
            let key = (node.min(next), node.max(next));
            let new_mask = mask | edge_mask.get(&key).copied().unwrap_or(0);
            let nd = d + w;
            if nd < dist[idx(next, new_mask)] {
                dist[idx(next, new_mask)] = nd;
                heap.push(Reverse((OrdF64(nd), next, new_mask)));
            }
        }
    }
    Ok(dist[idx(0, full)])
}

/// Literal multigraph enumeration for no-reversal routing: every assignment
/// of 0, 1 or 2 copies to every edge of the warehouse graph is checked for
/// even degree, coverage and connectivity with the origin, and the cheapest
/// one wins. Exponential in the edge count, so only small layouts pass the
/// guard; exists as a second, structurally different ground truth.
pub fn no_reversal_multigraph_oracle(
    layout: &WarehouseLayout,
    product_edges: &[BTreeSet<SubaisleId>],
) -> Result<f64, OracleError> {
    if product_edges.is_empty() {
        return Ok(0.0);
    }
    // Expanded edge list: (u, v, length, coverage mask).
    let mut elist: Vec<(usize, usize, f64, u32)> = Vec::new();
    let num_a = layout.num_aisles();
    elist.push((0, 1, layout.origin_offset(), 0));
    for row in 0..=layout.num_blocks() {
        for a in 1..num_a {
            let west = row * num_a + a;
            elist.push((west, west + 1, layout.cross_gaps()[a - 1], 0));
        }
    }
    for e in layout.all_subaisles() {
        let (n, s) = layout.subaisle_endpoints(e)?;
        let mut mask = 0u32;
        for (pi, q) in product_edges.iter().enumerate() {
            if q.contains(&e) {
                mask |= 1 << pi;
            }
        }
        elist.push((n, s, layout.subaisle_length(e)?, mask));
    }
    let m = elist.len();
    if m > 13 {
        return Err(OracleError::LimitExceeded {
            what: "expanded edges",
            value: m,
            max: 13,
        });
    }
    let full: u32 = (1u32 << product_edges.len()) - 1;
    let nodes = layout.vertex_count() + 1;

    let mut copies = vec![0u8; m];
    let mut best = f64::INFINITY;
    loop {
        let mut cost = 0.0;
        let mut covered = 0u32;
        let mut parity = vec![0u8; nodes];
        let mut any = false;
        for (i, &(u, v, len, mask)) in elist.iter().enumerate() {
            let c = copies[i];
            if c == 0 {
                continue;
            }
            any = true;
            cost += f64::from(c) * len;
            covered |= mask;
            if c == 1 {
                parity[u] ^= 1;
                parity[v] ^= 1;
            }
        }
        if any
            && cost < best
            && covered == full
            && parity.iter().all(|&p| p == 0)
            && connected_with_origin(&elist, &copies, nodes)
        {
            best = cost;
        }
        // Base-3 odometer.
        let mut i = 0;
        loop {
            if i == m {
                return Ok(best);
            }
            copies[i] += 1;
            if copies[i] <= 2 {
                break;
            }
            copies[i] = 0;
            i += 1;
        }
    }
}

fn connected_with_origin(elist: &[(usize, usize, f64, u32)], copies: &[u8], nodes: usize) -> bool {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, &(u, v, _, _)) in elist.iter().enumerate() {
        if copies[i] > 0 {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            parent[ru] = rv;
        }
    }
    let origin_root = find(&mut parent, 0);
    for (i, &(u, _, _, _)) in elist.iter().enumerate() {
        if copies[i] > 0 && find(&mut parent, u) != origin_root {
            return false;
        }
    }
    true
}

/// Exact reversal routing by explicit permutation search: for every visiting
/// order of the products, the best pick location per product follows from a
/// layered shortest-path relaxation along that order.
#[allow(clippy::needless_range_loop)]
pub fn reversal_brute_force(
    layout: &WarehouseLayout,
    product_points: &[Vec<GridPoint>],
    limits: &OracleLimits,
) -> Result<f64, OracleError> {
    let k = product_points.len();
    if k == 0 {
        return Ok(0.0);
    }
    if k > limits.max_picks_per_trolley {
        return Err(OracleError::LimitExceeded {
            what: "picks",
            value: k,
            max: limits.max_picks_per_trolley,
        });
    }
    let mut all_points = vec![GridPoint::Origin];
    let mut ranges = Vec::with_capacity(k);
    for pts in product_points {
        let start = all_points.len();
        all_points.extend(pts.iter().copied());
        ranges.push(start..all_points.len());
    }
    let graph = WarehouseGraph::new(layout, &all_points)?;
    let n = all_points.len();
    let mut dmat = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        let (dist, _) = graph.dijkstra(graph.point_node(i));
        for j in 0..n {
            dmat[i][j] = dist[graph.point_node(j)];
        }
    }

    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |order: &[usize]| {
        // Layered relaxation: frontier of (candidate point, cost so far).
        let mut frontier: Vec<(usize, f64)> = vec![(0, 0.0)];
        for &prod in order {
            let mut next: Vec<(usize, f64)> = Vec::new();
            for cand in ranges[prod].clone() {
                let mut bestc = f64::INFINITY;
                for &(prev, cost) in &frontier {
                    let c = cost + dmat[prev][cand];
                    if c < bestc {
                        bestc = c;
                    }
                }
                next.push((cand, bestc));
            }
            frontier = next;
        }
        for &(last, cost) in &frontier {
            let total = cost + dmat[last][0];
            if total < best {
                best = total;
            }
        }
    });
    Ok(best)
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Minimum total routed distance over all canonical batchings, with the
/// per-trolley distances coming from the exhaustive routing oracles above
/// (never from the ILP routers). Returns the optimum and one argmin.
pub fn joint_optimal(
    instance: &Instance,
    mode: RouteMode,
    limits: &OracleLimits,
) -> Result<(f64, Batching), OracleError> {
    let batchings = enumerate_batchings(instance, limits)?;
    let mut best: Option<(f64, Batching)> = None;
    let mut cache: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    for b in batchings {
        let mut total = 0.0;
        for t in 1..=instance.num_trolleys() {
            let orders = b.orders_on(instance, t);
            if orders.is_empty() {
                continue;
            }
            let mut pids: Vec<String> = orders
                .iter()
                .flat_map(|o| o.product_ids.iter().cloned())
                .collect();
            pids.sort();
            pids.dedup();
            let dist = if let Some(&d) = cache.get(&pids) {
                d
            } else {
                let d = match mode {
                    RouteMode::NoReversal => {
                        let sets: Vec<BTreeSet<SubaisleId>> = pids
                            .iter()
                            .map(|pid| instance.product(pid).expect("validated").edge_set())
                            .collect();
                        no_reversal_walk_oracle(instance.layout(), &sets)?
                    }
                    RouteMode::Reversal => {
                        let pts: Vec<Vec<GridPoint>> = pids
                            .iter()
                            .map(|pid| {
                                instance
                                    .product(pid)
                                    .expect("validated")
                                    .locations
                                    .iter()
                                    .map(|l| GridPoint::SubaislePoint {
                                        subaisle: l.subaisle,
                                        offset: l.offset,
                                    })
                                    .collect()
                            })
                            .collect();
                        reversal_brute_force(instance.layout(), &pts, limits)?
                    }
                };
                cache.insert(pids.clone(), d);
                d
            };
            total += dist;
        }
        match &best {
            Some((cost, _)) if *cost <= total => {}
            _ => best = Some((total, b)),
        }
    }
    best.ok_or(OracleError::NoFeasibleBatching)
}
