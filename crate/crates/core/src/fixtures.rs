//! Sample data: the four-aisle worked example and a seeded generator of
//! desk-scale random instances. Both are deterministic, so expected values
//! frozen in tests and shipped fixture files stay reproducible.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{Instance, Order, PickLocation, Product};
use crate::router::TaskProduct;
use crate::warehouse::{SubaisleId, WarehouseLayout};

/// A four-aisle, four-block warehouse with every edge of distance 1, one
/// trolley, and two pinned picks on the block-1 edges of aisles 1 and 3.
/// The origin sits directly on vertex 1, which makes both origin legs cost
/// the cross-aisle span alone; the optimal tour Origin-1-5-6-7-3-Origin then
/// has length 6, and so does the optimum of the distance approximation.
pub fn worked_example() -> Instance {
    let layout = WarehouseLayout::uniform(4, 4, 0.0).expect("valid layout");
    Instance::new(
        layout,
        vec![
            Product {
                id: "west".to_string(),
                locations: vec![PickLocation {
                    subaisle: SubaisleId::new(1, 1),
                    offset: 0.5,
                }],
            },
            Product {
                id: "east".to_string(),
                locations: vec![PickLocation {
                    subaisle: SubaisleId::new(3, 1),
                    offset: 0.5,
                }],
            },
        ],
        vec![Order {
            id: "order-1".to_string(),
            product_ids: vec!["west".to_string(), "east".to_string()],
            baskets: 1,
        }],
        1,
        1,
    )
    .expect("valid instance")
}

/// SplitMix64; tiny, seedable, and stable across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + u * (hi - lo)
    }
}

/// A random desk-scale instance: at most 5 orders, 2 trolleys, 4 aisles,
/// 2 blocks and capacity 3, always valid. Cross gaps stay within
/// `[0.8, 1.2]`, where the extreme-aisle marker rows admit no fractional
/// shortcut, so the continuous marker variables are integral at the optimum
/// and the closed-form oracle matches the model exactly.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = Rng::new(seed);
    let num_aisles = 2 + rng.below(3); // 2..=4
    let num_blocks = 1 + rng.below(2); // 1..=2
    let lengths: Vec<Vec<f64>> = (0..num_aisles)
        .map(|_| (0..num_blocks).map(|_| rng.uniform(0.5, 2.5)).collect())
        .collect();
    let gaps: Vec<f64> = (0..num_aisles - 1).map(|_| rng.uniform(0.8, 1.2)).collect();
    let origin_offset = if rng.below(4) == 0 { 0.0 } else { 1.0 };
    let layout = WarehouseLayout::new(num_aisles, num_blocks, lengths, gaps, origin_offset)
        .expect("generated layout valid");

    let num_products = 2 + rng.below(4); // 2..=5
    let mut products = Vec::with_capacity(num_products);
    for pi in 0..num_products {
        let num_locs = if rng.below(3) == 0 { 2 } else { 1 };
        let mut locations: Vec<PickLocation> = Vec::new();
        let mut used = vec![false; num_aisles * num_blocks];
        while locations.len() < num_locs.min(num_aisles * num_blocks) {
            let a = 1 + rng.below(num_aisles);
            let b = 1 + rng.below(num_blocks);
            let slot = (a - 1) * num_blocks + (b - 1);
            if used[slot] {
                continue;
            }
            used[slot] = true;
            let id = SubaisleId::new(a, b);
            let len = layout.subaisle_length(id).expect("valid subaisle");
            locations.push(PickLocation {
                subaisle: id,
                offset: rng.uniform(0.0, len),
            });
        }
        products.push(Product {
            id: format!("p{pi}"),
            locations,
        });
    }

    let capacity = 1 + rng.below(3) as u32; // 1..=3
    let num_trolleys = 1 + rng.below(2); // 1..=2
                                         // Build orders inside per-trolley budgets so a feasible packing always
                                         // exists; the total-demand bound alone does not rule out bin-packing
                                         // dead ends.
    let mut orders = Vec::new();
    'fill: for _ in 0..num_trolleys {
        let mut room = capacity;
        while room > 0 && orders.len() < 5 {
            let baskets = 1 + rng.below(room as usize) as u32;
            let count = 1 + rng.below(2.min(num_products)); // 1..=2 products
            let mut ids: Vec<usize> = Vec::new();
            while ids.len() < count {
                let p = rng.below(num_products);
                if !ids.contains(&p) {
                    ids.push(p);
                }
            }
            orders.push(Order {
                id: format!("o{}", orders.len()),
                product_ids: ids.into_iter().map(|p| format!("p{p}")).collect(),
                baskets,
            });
            room -= baskets;
            if rng.below(3) == 0 {
                break;
            }
            if orders.len() >= 5 {
                break 'fill;
            }
        }
    }

    Instance::new(layout, products, orders, num_trolleys, capacity)
        .expect("generated instance valid")
}

/// A random pick task on a layout small enough for the multigraph routing
/// oracle (at most 13 expanded edges) with at most `max_products` products.
pub fn tiny_task(seed: u64, max_products: usize) -> (WarehouseLayout, Vec<TaskProduct>) {
    let mut rng = Rng::new(seed);
    // (W_A, W_B) keeping origin + cross segments + subaisles within 13 edges.
    let (num_aisles, num_blocks) = [(2, 1), (3, 1), (4, 1), (3, 2), (2, 2)][rng.below(5)];
    let lengths: Vec<Vec<f64>> = (0..num_aisles)
        .map(|_| (0..num_blocks).map(|_| rng.uniform(0.5, 2.0)).collect())
        .collect();
    let gaps: Vec<f64> = (0..num_aisles - 1).map(|_| rng.uniform(0.8, 1.2)).collect();
    let origin_offset = if rng.below(4) == 0 { 0.0 } else { 1.0 };
    let layout = WarehouseLayout::new(num_aisles, num_blocks, lengths, gaps, origin_offset)
        .expect("generated layout valid");

    let count = 1 + rng.below(max_products);
    let mut products = Vec::with_capacity(count);
    for pi in 0..count {
        let num_locs = if rng.below(3) == 0 { 2 } else { 1 };
        let mut locations: Vec<PickLocation> = Vec::new();
        let mut used = vec![false; num_aisles * num_blocks];
        while locations.len() < num_locs.min(num_aisles * num_blocks) {
            let a = 1 + rng.below(num_aisles);
            let b = 1 + rng.below(num_blocks);
            let slot = (a - 1) * num_blocks + (b - 1);
            if used[slot] {
                continue;
            }
            used[slot] = true;
            let id = SubaisleId::new(a, b);
            let len = layout.subaisle_length(id).expect("valid subaisle");
            locations.push(PickLocation {
                subaisle: id,
                offset: rng.uniform(0.0, len),
            });
        }
        products.push(TaskProduct {
            id: format!("p{pi}"),
            locations,
        });
    }
    (layout, products)
}
