//! Exact per-trolley routing once a batching is fixed.
//!
//! No-reversal routing (direction changes only at subaisle endpoints) is a
//! required-edge closed-walk problem: pick, for every product, a subaisle to
//! traverse end-to-end, and find the cheapest even connected multigraph
//! through the origin containing those edges. It is solved as an ILP over
//! edge-copy counts with connectivity enforced by a cut loop, then unwound
//! into a walk by an Euler tour. An optimal closed walk never needs an edge
//! more than twice, so copy counts live in {0, 1, 2}.
//!
//! Reversal routing (turning around mid-subaisle allowed) visits one pick
//! point per product and reduces exactly to a generalized TSP on the
//! shortest-path metric closure; it is solved by dynamic programming over
//! product subsets, which caps the per-trolley product count.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{Batching, BatchingError, Instance, PickLocation};
use crate::milp::{MilpModel, Sense, SolveError, Solver, VarCategory, VarId};
use crate::util::fabs;
use crate::warehouse::{GridPoint, LayoutError, SubaisleId, WarehouseGraph, WarehouseLayout};

/// Default cap on products per trolley for the reversal router.
pub const DEFAULT_REVERSAL_CAP: usize = 14;
/// Default cap on connectivity-cut rounds for the no-reversal router.
pub const DEFAULT_CUT_ROUNDS: usize = 1000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RouteMode {
    NoReversal,
    Reversal,
}

/// One product to pick: its id and candidate locations.
#[derive(Clone, Debug)]
pub struct TaskProduct {
    pub id: String,
    pub locations: Vec<PickLocation>,
}

/// Everything one trolley must collect.
#[derive(Clone, Debug)]
pub struct PickTask<'a> {
    pub layout: &'a WarehouseLayout,
    pub products: Vec<TaskProduct>,
}

/// A closed walk from the origin with its total length.
#[derive(Clone, Debug)]
pub struct Route {
    pub walk: Vec<GridPoint>,
    pub distance: f64,
    pub mode: RouteMode,
}

impl Route {
    fn empty(mode: RouteMode) -> Self {
        Route {
            walk: vec![GridPoint::Origin],
            distance: 0.0,
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("layout error: {0}")]
    Layout(#[from] LayoutError),
    #[error("solver error: {0}")]
    Solve(#[from] SolveError),
    #[error("product \"{0}\" has no pick locations")]
    NoLocations(String),
    #[error("{count} products exceed the reversal-routing cap {cap}; route without reversal or split the trolley")]
    TooManyPicks { count: usize, cap: usize },
    #[error("connectivity cuts did not converge within {0} rounds")]
    CutRoundsExceeded(usize),
    #[error("no usable connectivity cut on a disconnected solution")]
    CutLoopStalled,
    #[error("batching invalid: {0}")]
    Batching(#[from] BatchingError),
    #[error("trolley {trolley}: {source}")]
    OnTrolley {
        trolley: usize,
        source: Box<RouteError>,
    },
}

/// Edges of the warehouse graph the postman ILP ranges over: the origin
/// connector, every cross-aisle segment, and every subaisle.
struct ExpandedEdge {
    u: usize,
    v: usize,
    length: f64,
    subaisle: Option<SubaisleId>,
}

fn expanded_edges(layout: &WarehouseLayout) -> Vec<ExpandedEdge> {
    let num_a = layout.num_aisles();
    let mut edges = Vec::new();
    edges.push(ExpandedEdge {
        u: 0,
        v: 1,
        length: layout.origin_offset(),
        subaisle: None,
    });
    for row in 0..=layout.num_blocks() {
        for a in 1..num_a {
            let west = row * num_a + a;
            edges.push(ExpandedEdge {
                u: west,
                v: west + 1,
                length: layout.cross_gaps()[a - 1],
                subaisle: None,
            });
        }
    }
    for id in layout.all_subaisles() {
        let (n, s) = layout.subaisle_endpoints(id).expect("valid subaisle");
        edges.push(ExpandedEdge {
            u: n,
            v: s,
            length: layout.subaisle_length(id).expect("valid subaisle"),
            subaisle: Some(id),
        });
    }
    edges
}

/// Cheapest closed walk from the origin that traverses, for every product,
/// at least one of its subaisles end-to-end.
pub fn route_no_reversal<S: Solver>(task: &PickTask, solver: &S) -> Result<Route, RouteError> {
    route_no_reversal_capped(task, solver, DEFAULT_CUT_ROUNDS)
}

pub fn route_no_reversal_capped<S: Solver>(
    task: &PickTask,
    solver: &S,
    max_cut_rounds: usize,
) -> Result<Route, RouteError> {
    if task.products.is_empty() {
        return Ok(Route::empty(RouteMode::NoReversal));
    }
    for p in &task.products {
        if p.locations.is_empty() {
            return Err(RouteError::NoLocations(p.id.clone()));
        }
        for l in &p.locations {
            task.layout.check_point(&GridPoint::SubaislePoint {
                subaisle: l.subaisle,
                offset: l.offset,
            })?;
        }
    }

    let layout = task.layout;
    let edges = expanded_edges(layout);
    let nodes = layout.vertex_count() + 1;

    let mut model = MilpModel::new("postman");
    let mut copy_vars = Vec::with_capacity(edges.len());
    let mut use_vars: BTreeMap<SubaisleId, VarId> = BTreeMap::new();
    for (ei, e) in edges.iter().enumerate() {
        let c = model
            .add_var(format!("c_e{ei}"), VarCategory::Integer, 0.0, 2.0)
            .map_err(SolveError::from)?;
        model.add_objective_term(c, e.length);
        copy_vars.push(c);
        if let Some(id) = e.subaisle {
            let u = model
                .add_var(
                    format!("u_a{}_b{}", id.aisle, id.block),
                    VarCategory::Binary,
                    0.0,
                    1.0,
                )
                .map_err(SolveError::from)?;
            model.add_constraint(
                format!("link_a{}_b{}", id.aisle, id.block),
                vec![(c, 1.0), (u, -1.0)],
                Sense::Ge,
                0.0,
            );
            use_vars.insert(id, u);
        }
    }

    // One fully-traversed candidate subaisle per product.
    for (pi, p) in task.products.iter().enumerate() {
        let mut subs: BTreeSet<SubaisleId> = p.locations.iter().map(|l| l.subaisle).collect();
        let terms: Vec<(VarId, f64)> = subs
            .iter()
            .map(|id| (*use_vars.get(id).expect("subaisle in layout"), 1.0))
            .collect();
        subs.clear();
        model.add_constraint(format!("cover_p{pi}"), terms, Sense::Ge, 1.0);
    }

    // Even degree everywhere (walks enter as often as they leave).
    for v in 0..nodes {
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        for (ei, e) in edges.iter().enumerate() {
            if e.u == v || e.v == v {
                terms.push((copy_vars[ei], 1.0));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let k = model
            .add_var(
                format!("k_v{v}"),
                VarCategory::Integer,
                0.0,
                edges.len() as f64,
            )
            .map_err(SolveError::from)?;
        terms.push((k, -2.0));
        model.add_constraint(format!("even_v{v}"), terms, Sense::Eq, 0.0);
    }

    // The walk leaves the origin whenever anything is traversed.
    for (id, &u) in &use_vars {
        model.add_constraint(
            format!("orig_a{}_b{}", id.aisle, id.block),
            vec![(copy_vars[0], 1.0), (u, -2.0)],
            Sense::Ge,
            0.0,
        );
    }

    // Solve, then cut off components that float away from the origin.
    let mut rounds = 0;
    let copies: Vec<u8> = loop {
        let result = solver.solve(&model)?;
        if !result.has_values() {
            return Err(RouteError::Solve(SolveError::NoSolution(result.status)));
        }
        let copies: Vec<u8> = copy_vars
            .iter()
            .map(|&c| result.integral_value(c).map(|v| v as u8))
            .collect::<Result<_, _>>()?;

        let components = used_components(&edges, &copies, nodes);
        let origin_comp = components[0];
        let mut cut_added = false;
        let mut handled: BTreeSet<usize> = BTreeSet::new();
        for (ei, e) in edges.iter().enumerate() {
            if copies[ei] == 0 || components[e.u] == origin_comp {
                continue;
            }
            let comp = components[e.u];
            if !handled.insert(comp) {
                continue;
            }
            // delta(S) for the stray component S.
            let boundary: Vec<(VarId, f64)> = edges
                .iter()
                .enumerate()
                .filter(|(_, be)| (components[be.u] == comp) != (components[be.v] == comp))
                .map(|(bi, _)| (copy_vars[bi], 1.0))
                .collect();
            for (fi, f) in edges.iter().enumerate() {
                let Some(id) = f.subaisle else { continue };
                if components[f.u] != comp || components[f.v] != comp || copies[fi] == 0 {
                    continue;
                }
                let u = use_vars[&id];
                let mut terms = boundary.clone();
                terms.push((u, -2.0));
                model.add_constraint(
                    format!("cut{rounds}_c{comp}_a{}_b{}", id.aisle, id.block),
                    terms,
                    Sense::Ge,
                    0.0,
                );
                cut_added = true;
            }
        }
        if handled.is_empty() {
            break copies;
        }
        if !cut_added {
            return Err(RouteError::CutLoopStalled);
        }
        rounds += 1;
        if rounds > max_cut_rounds {
            return Err(RouteError::CutRoundsExceeded(max_cut_rounds));
        }
    };

    let distance: f64 = edges
        .iter()
        .zip(&copies)
        .map(|(e, &c)| f64::from(c) * e.length)
        .sum();
    let walk = euler_walk(&edges, &copies, nodes);
    Ok(Route {
        walk,
        distance,
        mode: RouteMode::NoReversal,
    })
}

/// Connected-component labels of the subgraph of used edges. Unused nodes
/// keep singleton labels; node 0 marks the origin component.
fn used_components(edges: &[ExpandedEdge], copies: &[u8], nodes: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (ei, e) in edges.iter().enumerate() {
        if copies[ei] > 0 {
            let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
            parent[ru] = rv;
        }
    }
    (0..nodes).map(|v| find(&mut parent, v)).collect()
}

/// Euler circuit through the used multigraph, starting at the origin and
/// preferring the smallest-labelled neighbor, mapped back to grid points.
fn euler_walk(edges: &[ExpandedEdge], copies: &[u8], nodes: usize) -> Vec<GridPoint> {
    let mut adj: Vec<BTreeMap<usize, u8>> = vec![BTreeMap::new(); nodes];
    let mut remaining = 0u32;
    for (ei, e) in edges.iter().enumerate() {
        if copies[ei] > 0 {
            *adj[e.u].entry(e.v).or_insert(0) += copies[ei];
            *adj[e.v].entry(e.u).or_insert(0) += copies[ei];
            remaining += u32::from(copies[ei]);
        }
    }
    if remaining == 0 {
        return vec![GridPoint::Origin];
    }
    let mut stack = vec![0usize];
    let mut circuit = Vec::new();
    while let Some(&v) = stack.last() {
        let next = adj[v].iter().find(|(_, &c)| c > 0).map(|(&n, _)| n);
        match next {
            Some(n) => {
                *adj[v].get_mut(&n).expect("edge present") -= 1;
                *adj[n].get_mut(&v).expect("edge present") -= 1;
                stack.push(n);
            }
            None => {
                circuit.push(stack.pop().expect("nonempty stack"));
            }
        }
    }
    circuit.reverse();
    circuit
        .into_iter()
        .map(|n| {
            if n == 0 {
                GridPoint::Origin
            } else {
                GridPoint::Vertex(n)
            }
        })
        .collect()
}

/// Cheapest closed walk visiting one candidate point per product, reversal
/// allowed anywhere. Exact dynamic programming over product subsets on the
/// shortest-path metric closure.
#[allow(clippy::needless_range_loop)]
pub fn route_reversal(task: &PickTask, cap: usize) -> Result<Route, RouteError> {
    if task.products.is_empty() {
        return Ok(Route::empty(RouteMode::Reversal));
    }
    let k = task.products.len();
    if k > cap {
        return Err(RouteError::TooManyPicks { count: k, cap });
    }

    let mut all_points = vec![GridPoint::Origin];
    let mut ranges = Vec::with_capacity(k);
    for p in &task.products {
        if p.locations.is_empty() {
            return Err(RouteError::NoLocations(p.id.clone()));
        }
        let start = all_points.len();
        for l in &p.locations {
            all_points.push(GridPoint::SubaislePoint {
                subaisle: l.subaisle,
                offset: l.offset,
            });
        }
        ranges.push(start..all_points.len());
    }
    let graph = WarehouseGraph::new(task.layout, &all_points)?;
    let n = all_points.len();

    // Metric closure plus predecessor trees for walk reconstruction.
    let mut dmat = vec![vec![0.0f64; n]; n];
    let mut prevs = Vec::with_capacity(n);
    for i in 0..n {
        let (dist, prev) = graph.dijkstra(graph.point_node(i));
        for j in 0..n {
            dmat[i][j] = dist[graph.point_node(j)];
        }
        prevs.push(prev);
    }

    let full: u32 = (1u32 << k) - 1;
    let mut dp = vec![vec![f64::INFINITY; n]; full as usize + 1];
    let mut parent: Vec<Vec<(u32, usize)>> = vec![vec![(0, usize::MAX); n]; full as usize + 1];
    for (pi, range) in ranges.iter().enumerate() {
        for cand in range.clone() {
            let mask = 1u32 << pi;
            if dmat[0][cand] < dp[mask as usize][cand] {
                dp[mask as usize][cand] = dmat[0][cand];
                parent[mask as usize][cand] = (0, 0);
            }
        }
    }
    for mask in 1..=full {
        for last in 0..n {
            let cur = dp[mask as usize][last];
            if !cur.is_finite() {
                continue;
            }
            for (pi, range) in ranges.iter().enumerate() {
                if mask & (1 << pi) != 0 {
                    continue;
                }
                let next_mask = mask | (1 << pi);
                for cand in range.clone() {
                    let cost = cur + dmat[last][cand];
                    if cost < dp[next_mask as usize][cand] {
                        dp[next_mask as usize][cand] = cost;
                        parent[next_mask as usize][cand] = (mask, last);
                    }
                }
            }
        }
    }

    let mut best = f64::INFINITY;
    let mut best_last = usize::MAX;
    for last in 1..n {
        let total = dp[full as usize][last] + dmat[last][0];
        if total < best {
            best = total;
            best_last = last;
        }
    }

    // Unwind the chosen candidate sequence.
    let mut seq = vec![best_last];
    let mut mask = full;
    let mut last = best_last;
    while last != 0 {
        let (pmask, plast) = parent[mask as usize][last];
        mask = pmask;
        last = plast;
        seq.push(last);
    }
    seq.reverse(); // starts at 0 (origin)
    seq.push(0);

    // Stitch shortest paths between consecutive stops.
    let mut walk: Vec<GridPoint> = vec![GridPoint::Origin];
    for win in seq.windows(2) {
        let (from, to) = (win[0], win[1]);
        let src = graph.point_node(from);
        let dst = graph.point_node(to);
        let mut nodes_rev = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = prevs[from][cur];
            nodes_rev.push(cur);
        }
        for &node in nodes_rev.iter().rev().skip(1) {
            let pt = graph.node_point(node);
            if walk.last() != Some(&pt) {
                walk.push(pt);
            }
        }
        let pt = graph.node_point(dst);
        if walk.last() != Some(&pt) {
            walk.push(pt);
        }
    }
    if walk.last() != Some(&GridPoint::Origin) {
        walk.push(GridPoint::Origin);
    }

    Ok(Route {
        walk,
        distance: best,
        mode: RouteMode::Reversal,
    })
}

/// Routes every trolley of a batching independently and sums the distances.
pub fn route_batching<S: Solver>(
    instance: &Instance,
    batching: &Batching,
    mode: RouteMode,
    solver: &S,
    reversal_cap: usize,
) -> Result<(Vec<(usize, Route)>, f64), RouteError> {
    batching.validate(instance)?;
    let mut routes = Vec::new();
    let mut total = 0.0;
    for t in 1..=instance.num_trolleys() {
        let orders = batching.orders_on(instance, t);
        if orders.is_empty() {
            continue;
        }
        let mut pids: Vec<&String> = orders.iter().flat_map(|o| o.product_ids.iter()).collect();
        pids.sort();
        pids.dedup();
        let products: Vec<TaskProduct> = pids
            .into_iter()
            .map(|pid| {
                let p = instance.product(pid).expect("validated product");
                TaskProduct {
                    id: p.id.clone(),
                    locations: p.locations.clone(),
                }
            })
            .collect();
        let task = PickTask {
            layout: instance.layout(),
            products,
        };
        let route = match mode {
            RouteMode::NoReversal => route_no_reversal(&task, solver),
            RouteMode::Reversal => route_reversal(&task, reversal_cap),
        }
        .map_err(|e| RouteError::OnTrolley {
            trolley: t,
            source: Box::new(e),
        })?;
        total += route.distance;
        routes.push((t, route));
    }
    Ok((routes, total))
}

/// Sum of step lengths along a walk; used to audit route payloads.
pub fn walk_length(layout: &WarehouseLayout, walk: &[GridPoint]) -> Result<f64, LayoutError> {
    let mut total = 0.0;
    for win in walk.windows(2) {
        total += layout.shortest_distance(&win[0], &win[1])?;
    }
    Ok(total)
}

/// Checks a route payload: consecutive points adjacent (their shortest-path
/// distance telescopes to the total) and the stated distance consistent.
pub fn audit_route(layout: &WarehouseLayout, route: &Route) -> Result<(), LayoutError> {
    let measured = walk_length(layout, &route.walk)?;
    debug_assert!(fabs(measured - route.distance) <= 1e-9 * (1.0 + measured));
    Ok(())
}
