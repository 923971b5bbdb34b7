//! Grid-warehouse geometry.
//!
//! A warehouse has `W_A` aisles running North-South and `W_B + 1` cross-aisles
//! running West-East, so `W_B` blocks of subaisles. Vertices sit at every
//! aisle / cross-aisle crossing and are labelled `1..=W_A*(W_B+1)`, row by
//! row: the first cross-aisle holds `1..=W_A` West to East, the second
//! `W_A+1..=2*W_A`, and so on. The aisle segment between two consecutive
//! cross-aisles is a *subaisle*, one graph edge; picks happen only there.
//! The origin (trolley start and return point) hangs off vertex 1 at distance
//! `origin_offset`.
//!
//! Cross-aisle gaps are given once per adjacent aisle pair and shared by
//! every cross-aisle, so the gap between aisles `a` and `a+1` is the same on
//! every row (gaps between different pairs may differ).

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::util::OrdF64;

/// Identifies one subaisle: the edge of `aisle` inside `block`, i.e. the
/// aisle edge `(a + (b-1)*W_A, a + b*W_A)`. Both indices are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SubaisleId {
    pub aisle: usize,
    pub block: usize,
}

impl SubaisleId {
    pub fn new(aisle: usize, block: usize) -> Self {
        SubaisleId { aisle, block }
    }
}

/// A position in the warehouse: the origin, a cross-aisle vertex, or a point
/// part-way down a subaisle (`offset` measured from the North end).
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum GridPoint {
    Origin,
    Vertex(usize),
    SubaislePoint { subaisle: SubaisleId, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("warehouse needs at least 2 aisles, got {0}")]
    TooFewAisles(usize),
    #[error("warehouse needs at least 1 block, got {0}")]
    NoBlocks(usize),
    #[error("subaisle_lengths must be {aisles} aisles x {blocks} blocks")]
    LengthShape { aisles: usize, blocks: usize },
    #[error("cross_gaps must have one entry per adjacent aisle pair ({0} expected)")]
    GapShape(usize),
    #[error("subaisle (aisle {aisle}, block {block}) has non-positive length {len}")]
    NonPositiveLength {
        aisle: usize,
        block: usize,
        len: f64,
    },
    #[error("cross gap between aisles {aisle} and {next} is non-positive ({gap})")]
    NonPositiveGap { aisle: usize, next: usize, gap: f64 },
    #[error("origin offset must be >= 0, got {0}")]
    NegativeOriginOffset(f64),
    #[error("aisle index {index} out of range 1..={max}")]
    AisleOutOfRange { index: usize, max: usize },
    #[error("block index {index} out of range 1..={max}")]
    BlockOutOfRange { index: usize, max: usize },
    #[error("cross-aisle index {index} out of range 1..={max}")]
    CrossAisleOutOfRange { index: usize, max: usize },
    #[error("vertex label {index} out of range 1..={max}")]
    VertexOutOfRange { index: usize, max: usize },
    #[error("offset {offset} outside [0, {len}] on aisle {aisle}, block {block}")]
    OffsetOutOfRange {
        aisle: usize,
        block: usize,
        offset: f64,
        len: f64,
    },
}

/// Immutable grid-warehouse geometry. Safe to share between threads.
#[derive(Clone, Debug, PartialEq)]
pub struct WarehouseLayout {
    num_aisles: usize,
    num_blocks: usize,
    /// Aisle-major: `subaisle_lengths[a-1][b-1]` is the length of (a, b).
    subaisle_lengths: Vec<Vec<f64>>,
    /// `cross_gaps[a-1]` is the West-East gap between aisles `a` and `a+1`.
    cross_gaps: Vec<f64>,
    origin_offset: f64,
    /// `cross_prefix[a-1]` = distance from aisle 1 to aisle a along a cross-aisle.
    cross_prefix: Vec<f64>,
}

impl WarehouseLayout {
    pub fn new(
        num_aisles: usize,
        num_blocks: usize,
        subaisle_lengths: Vec<Vec<f64>>,
        cross_gaps: Vec<f64>,
        origin_offset: f64,
    ) -> Result<Self, LayoutError> {
        if num_aisles < 2 {
            return Err(LayoutError::TooFewAisles(num_aisles));
        }
        if num_blocks < 1 {
            return Err(LayoutError::NoBlocks(num_blocks));
        }
        if subaisle_lengths.len() != num_aisles
            || subaisle_lengths.iter().any(|row| row.len() != num_blocks)
        {
            return Err(LayoutError::LengthShape {
                aisles: num_aisles,
                blocks: num_blocks,
            });
        }
        if cross_gaps.len() != num_aisles - 1 {
            return Err(LayoutError::GapShape(num_aisles - 1));
        }
        for (ai, row) in subaisle_lengths.iter().enumerate() {
            for (bi, &len) in row.iter().enumerate() {
                if !len.is_finite() || len <= 0.0 {
                    return Err(LayoutError::NonPositiveLength {
                        aisle: ai + 1,
                        block: bi + 1,
                        len,
                    });
                }
            }
        }
        for (ai, &gap) in cross_gaps.iter().enumerate() {
            if !gap.is_finite() || gap <= 0.0 {
                return Err(LayoutError::NonPositiveGap {
                    aisle: ai + 1,
                    next: ai + 2,
                    gap,
                });
            }
        }
        if !origin_offset.is_finite() || origin_offset < 0.0 {
            return Err(LayoutError::NegativeOriginOffset(origin_offset));
        }
        let mut cross_prefix = vec![0.0; num_aisles];
        for a in 1..num_aisles {
            cross_prefix[a] = cross_prefix[a - 1] + cross_gaps[a - 1];
        }
        Ok(WarehouseLayout {
            num_aisles,
            num_blocks,
            subaisle_lengths,
            cross_gaps,
            origin_offset,
            cross_prefix,
        })
    }

    /// Uniform layout: every subaisle and every gap of length 1, like the
    /// worked four-aisle example. `origin_offset` is still caller-chosen.
    pub fn uniform(
        num_aisles: usize,
        num_blocks: usize,
        origin_offset: f64,
    ) -> Result<Self, LayoutError> {
        WarehouseLayout::new(
            num_aisles,
            num_blocks,
            vec![vec![1.0; num_blocks]; num_aisles],
            vec![1.0; num_aisles - 1],
            origin_offset,
        )
    }

    pub fn num_aisles(&self) -> usize {
        self.num_aisles
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn origin_offset(&self) -> f64 {
        self.origin_offset
    }

    pub fn cross_gaps(&self) -> &[f64] {
        &self.cross_gaps
    }

    /// Number of grid vertices, `W_A * (W_B + 1)`. The origin is not counted.
    pub fn vertex_count(&self) -> usize {
        self.num_aisles * (self.num_blocks + 1)
    }

    /// Number of aisle edges, `W_A * W_B`.
    pub fn aisle_edge_count(&self) -> usize {
        self.num_aisles * self.num_blocks
    }

    /// Label of the vertex where `aisle` meets `cross_aisle` (both 1-based):
    /// `aisle + (cross_aisle - 1) * W_A`.
    pub fn vertex_id(&self, aisle: usize, cross_aisle: usize) -> Result<usize, LayoutError> {
        self.check_aisle(aisle)?;
        if cross_aisle < 1 || cross_aisle > self.num_blocks + 1 {
            return Err(LayoutError::CrossAisleOutOfRange {
                index: cross_aisle,
                max: self.num_blocks + 1,
            });
        }
        Ok(aisle + (cross_aisle - 1) * self.num_aisles)
    }

    /// Inverse of [`vertex_id`](Self::vertex_id): `(aisle, cross_aisle)` of a label.
    pub fn vertex_position(&self, vertex: usize) -> Result<(usize, usize), LayoutError> {
        if vertex < 1 || vertex > self.vertex_count() {
            return Err(LayoutError::VertexOutOfRange {
                index: vertex,
                max: self.vertex_count(),
            });
        }
        let aisle = (vertex - 1) % self.num_aisles + 1;
        let cross = (vertex - 1) / self.num_aisles + 1;
        Ok((aisle, cross))
    }

    /// The two vertices of a subaisle: `(a + (b-1)*W_A, a + b*W_A)`.
    pub fn subaisle_endpoints(&self, id: SubaisleId) -> Result<(usize, usize), LayoutError> {
        self.check_subaisle(id)?;
        let north = id.aisle + (id.block - 1) * self.num_aisles;
        Ok((north, north + self.num_aisles))
    }

    pub fn subaisle_length(&self, id: SubaisleId) -> Result<f64, LayoutError> {
        self.check_subaisle(id)?;
        Ok(self.subaisle_lengths[id.aisle - 1][id.block - 1])
    }

    /// The aisle edges of block `b`, West to East: `G_b`.
    pub fn block_edges(&self, block: usize) -> Result<Vec<SubaisleId>, LayoutError> {
        self.check_block(block)?;
        Ok((1..=self.num_aisles)
            .map(|a| SubaisleId::new(a, block))
            .collect())
    }

    /// The aisle edges of aisle `a`, North to South: `E_a`.
    pub fn aisle_edges(&self, aisle: usize) -> Result<Vec<SubaisleId>, LayoutError> {
        self.check_aisle(aisle)?;
        Ok((1..=self.num_blocks)
            .map(|b| SubaisleId::new(aisle, b))
            .collect())
    }

    /// All aisle edges in a fixed canonical order (block-major, then aisle).
    pub fn all_subaisles(&self) -> Vec<SubaisleId> {
        let mut out = Vec::with_capacity(self.aisle_edge_count());
        for block in 1..=self.num_blocks {
            for aisle in 1..=self.num_aisles {
                out.push(SubaisleId::new(aisle, block));
            }
        }
        out
    }

    /// West-East distance between two aisles along any cross-aisle.
    pub fn cross_distance(&self, a1: usize, a2: usize) -> Result<f64, LayoutError> {
        self.check_aisle(a1)?;
        self.check_aisle(a2)?;
        Ok(crate::util::fabs(
            self.cross_prefix[a1 - 1] - self.cross_prefix[a2 - 1],
        ))
    }

    /// Distance from the origin to the first-cross-aisle vertex of `aisle`:
    /// the origin leg plus the cross-aisle span from aisle 1.
    pub fn origin_to_aisle(&self, aisle: usize) -> Result<f64, LayoutError> {
        Ok(self.origin_offset + self.cross_distance(1, aisle)?)
    }

    /// Minimum subaisle length within a block (`D_b`).
    pub fn min_block_subaisle(&self, block: usize) -> Result<f64, LayoutError> {
        self.check_block(block)?;
        let mut best = f64::INFINITY;
        for a in 1..=self.num_aisles {
            let len = self.subaisle_lengths[a - 1][block - 1];
            if len < best {
                best = len;
            }
        }
        Ok(best)
    }

    /// Validates a point, including subaisle offsets.
    pub fn check_point(&self, point: &GridPoint) -> Result<(), LayoutError> {
        match point {
            GridPoint::Origin => Ok(()),
            GridPoint::Vertex(v) => self.vertex_position(*v).map(|_| ()),
            GridPoint::SubaislePoint { subaisle, offset } => {
                let len = self.subaisle_length(*subaisle)?;
                if !offset.is_finite() || *offset < 0.0 || *offset > len {
                    return Err(LayoutError::OffsetOutOfRange {
                        aisle: subaisle.aisle,
                        block: subaisle.block,
                        offset: *offset,
                        len,
                    });
                }
                Ok(())
            }
        }
    }

    /// Length of the shortest path between two points in the warehouse graph.
    pub fn shortest_distance(&self, p1: &GridPoint, p2: &GridPoint) -> Result<f64, LayoutError> {
        let graph = WarehouseGraph::new(self, &[*p1, *p2])?;
        let (dist, _) = graph.dijkstra(graph.point_node(0));
        Ok(dist[graph.point_node(1)])
    }

    fn check_aisle(&self, aisle: usize) -> Result<(), LayoutError> {
        if aisle < 1 || aisle > self.num_aisles {
            return Err(LayoutError::AisleOutOfRange {
                index: aisle,
                max: self.num_aisles,
            });
        }
        Ok(())
    }

    fn check_block(&self, block: usize) -> Result<(), LayoutError> {
        if block < 1 || block > self.num_blocks {
            return Err(LayoutError::BlockOutOfRange {
                index: block,
                max: self.num_blocks,
            });
        }
        Ok(())
    }

    fn check_subaisle(&self, id: SubaisleId) -> Result<(), LayoutError> {
        self.check_aisle(id.aisle)?;
        self.check_block(id.block)
    }
}

/// The warehouse graph expanded with a set of interior points inserted as
/// degree-2 nodes on their subaisles. Node 0 is the origin, nodes
/// `1..=vertex_count` are the grid vertices, and requested points follow.
pub struct WarehouseGraph {
    nodes: Vec<GridPoint>,
    adj: Vec<Vec<(usize, f64)>>,
    point_nodes: Vec<usize>,
}

impl WarehouseGraph {
    pub fn new(layout: &WarehouseLayout, points: &[GridPoint]) -> Result<Self, LayoutError> {
        for p in points {
            layout.check_point(p)?;
        }
        let base = layout.vertex_count() + 1;
        let mut nodes: Vec<GridPoint> = Vec::with_capacity(base + points.len());
        nodes.push(GridPoint::Origin);
        for v in 1..=layout.vertex_count() {
            nodes.push(GridPoint::Vertex(v));
        }

        // Interior points grouped per subaisle so each edge becomes a chain.
        let mut point_nodes = vec![0usize; points.len()];
        let mut interior: Vec<(SubaisleId, f64, usize)> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            match p {
                GridPoint::Origin => point_nodes[i] = 0,
                GridPoint::Vertex(v) => point_nodes[i] = *v,
                GridPoint::SubaislePoint { subaisle, offset } => {
                    let node = nodes.len();
                    nodes.push(*p);
                    point_nodes[i] = node;
                    interior.push((*subaisle, *offset, node));
                }
            }
        }
        // Same order as the `all_subaisles` chain loop below (block-major).
        interior.sort_by(|x, y| {
            ((x.0.block, x.0.aisle), OrdF64(x.1)).cmp(&((y.0.block, y.0.aisle), OrdF64(y.1)))
        });

        let mut adj = vec![Vec::new(); nodes.len()];
        let connect = |adj: &mut Vec<Vec<(usize, f64)>>, u: usize, v: usize, d: f64| {
            adj[u].push((v, d));
            adj[v].push((u, d));
        };

        connect(&mut adj, 0, 1, layout.origin_offset());

        // Cross-aisle rows.
        for row in 0..=layout.num_blocks() {
            for a in 1..layout.num_aisles() {
                let west = row * layout.num_aisles() + a;
                connect(&mut adj, west, west + 1, layout.cross_gaps()[a - 1]);
            }
        }

        // Subaisles, split where interior points land on them.
        let mut cursor = 0usize;
        for id in layout.all_subaisles() {
            let (north, south) = layout.subaisle_endpoints(id).expect("valid subaisle");
            let len = layout.subaisle_length(id).expect("valid subaisle");
            let mut prev_node = north;
            let mut prev_off = 0.0;
            while cursor < interior.len() && interior[cursor].0 == id {
                let (_, off, node) = interior[cursor];
                connect(&mut adj, prev_node, node, off - prev_off);
                prev_node = node;
                prev_off = off;
                cursor += 1;
            }
            connect(&mut adj, prev_node, south, len - prev_off);
        }

        Ok(WarehouseGraph {
            nodes,
            adj,
            point_nodes,
        })
    }

    /// Graph node index of the i-th point passed to [`new`](Self::new).
    pub fn point_node(&self, i: usize) -> usize {
        self.point_nodes[i]
    }

    pub fn node_point(&self, node: usize) -> GridPoint {
        self.nodes[node]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adj[node]
    }

    /// Distances and predecessor links from `src` to every node.
    pub fn dijkstra(&self, src: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse((OrdF64(0.0), src)));
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Reverse((OrdF64(nd), v)));
                }
            }
        }
        (dist, prev)
    }

    /// Node sequence of a shortest path from `src` to `dst` (inclusive).
    pub fn shortest_path(&self, src: usize, dst: usize) -> (f64, Vec<usize>) {
        let (dist, prev) = self.dijkstra(src);
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = prev[cur];
            debug_assert!(cur != usize::MAX, "unreachable node");
            path.push(cur);
        }
        path.reverse();
        (dist[dst], path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fig1() -> WarehouseLayout {
        // Four aisles, four blocks, all unit distances, origin on vertex 1.
        WarehouseLayout::uniform(4, 4, 0.0).unwrap()
    }

    #[test]
    fn vertex_labels() {
        let w = fig1();
        assert_eq!(w.vertex_id(1, 1).unwrap(), 1);
        assert_eq!(w.vertex_id(1, 2).unwrap(), 5);
        assert_eq!(w.vertex_id(3, 2).unwrap(), 7);
        // First aisle has edges (1,5),(5,9),(9,13),(13,17).
        for (b, (n, s)) in [(1, (1, 5)), (2, (5, 9)), (3, (9, 13)), (4, (13, 17))] {
            assert_eq!(w.subaisle_endpoints(SubaisleId::new(1, b)).unwrap(), (n, s));
        }
        assert!(w.vertex_id(5, 1).is_err());
        assert!(w.vertex_id(1, 6).is_err());
        assert_eq!(w.vertex_count(), 20);
        assert_eq!(w.aisle_edge_count(), 16);
    }

    #[test]
    fn vertex_position_inverts_vertex_id() {
        let w = fig1();
        for a in 1..=4 {
            for c in 1..=5 {
                let v = w.vertex_id(a, c).unwrap();
                assert_eq!(w.vertex_position(v).unwrap(), (a, c));
            }
        }
    }

    #[test]
    fn block_edge_sets() {
        let w = fig1();
        let b1: Vec<_> = w
            .block_edges(1)
            .unwrap()
            .into_iter()
            .map(|id| w.subaisle_endpoints(id).unwrap())
            .collect();
        assert_eq!(b1, vec![(1, 5), (2, 6), (3, 7), (4, 8)]);
        let b2: Vec<_> = w
            .block_edges(2)
            .unwrap()
            .into_iter()
            .map(|id| w.subaisle_endpoints(id).unwrap())
            .collect();
        assert_eq!(b2, vec![(5, 9), (6, 10), (7, 11), (8, 12)]);
        assert!(w.block_edges(5).is_err());
    }

    #[test]
    fn cross_distances() {
        let w = fig1();
        assert_eq!(w.cross_distance(2, 2).unwrap(), 0.0);
        assert_eq!(w.cross_distance(1, 3).unwrap(), 2.0);
        assert_eq!(w.cross_distance(3, 1).unwrap(), 2.0);

        let w2 = WarehouseLayout::new(4, 1, vec![vec![1.0]; 4], vec![1.5, 2.0, 1.0], 2.0).unwrap();
        assert_eq!(w2.cross_distance(2, 4).unwrap(), 3.0);
        assert_eq!(w2.origin_to_aisle(3).unwrap(), 2.0 + 3.5);
    }

    #[test]
    fn origin_distances() {
        let mut w = fig1();
        assert_eq!(w.origin_to_aisle(1).unwrap(), 0.0);
        w = WarehouseLayout::uniform(4, 4, 1.0).unwrap();
        assert_eq!(w.origin_to_aisle(1).unwrap(), 1.0);
        assert_eq!(w.origin_to_aisle(3).unwrap(), 3.0);
    }

    #[test]
    fn min_subaisle_lengths() {
        let w = WarehouseLayout::new(
            4,
            2,
            vec![
                vec![1.0, 3.0],
                vec![1.0, 2.0],
                vec![1.0, 5.0],
                vec![1.0, 4.0],
            ],
            vec![1.0; 3],
            1.0,
        )
        .unwrap();
        assert_eq!(w.min_block_subaisle(1).unwrap(), 1.0);
        assert_eq!(w.min_block_subaisle(2).unwrap(), 2.0);

        let narrow =
            WarehouseLayout::new(2, 1, vec![vec![7.0], vec![9.0]], vec![1.0], 0.0).unwrap();
        assert_eq!(narrow.min_block_subaisle(1).unwrap(), 7.0);
    }

    #[test]
    fn shortest_distances_on_fig1() {
        let w = WarehouseLayout::uniform(4, 4, 1.0).unwrap();
        // Origin-1-2-3.
        assert_eq!(
            w.shortest_distance(&GridPoint::Origin, &GridPoint::Vertex(3))
                .unwrap(),
            3.0
        );
        // 5 and 7 sit on the same cross-aisle.
        assert_eq!(
            w.shortest_distance(&GridPoint::Vertex(5), &GridPoint::Vertex(7))
                .unwrap(),
            2.0
        );
        let p = GridPoint::SubaislePoint {
            subaisle: SubaisleId::new(1, 1),
            offset: 0.25,
        };
        assert_eq!(w.shortest_distance(&GridPoint::Origin, &p).unwrap(), 1.25);
        assert_eq!(w.shortest_distance(&p, &p).unwrap(), 0.0);
        // Between two points of the same subaisle.
        let q = GridPoint::SubaislePoint {
            subaisle: SubaisleId::new(1, 1),
            offset: 0.75,
        };
        assert_eq!(w.shortest_distance(&p, &q).unwrap(), 0.5);
    }

    #[test]
    fn bad_offset_rejected() {
        let w = fig1();
        let p = GridPoint::SubaislePoint {
            subaisle: SubaisleId::new(1, 1),
            offset: 1.5,
        };
        assert!(matches!(
            w.shortest_distance(&GridPoint::Origin, &p),
            Err(LayoutError::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn construction_validation() {
        assert!(WarehouseLayout::uniform(1, 1, 0.0).is_err());
        assert!(WarehouseLayout::new(2, 1, vec![vec![1.0], vec![0.0]], vec![1.0], 0.0).is_err());
        assert!(WarehouseLayout::new(2, 1, vec![vec![1.0], vec![1.0]], vec![-1.0], 0.0).is_err());
        assert!(WarehouseLayout::new(2, 1, vec![vec![1.0], vec![1.0]], vec![1.0], -0.5).is_err());
        assert!(WarehouseLayout::new(2, 2, vec![vec![1.0], vec![1.0]], vec![1.0], 0.0).is_err());
    }
}
