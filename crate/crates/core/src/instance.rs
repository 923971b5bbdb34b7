//! Problem data: products with candidate pick locations, orders, trolleys.
//!
//! An [`Instance`] is validated on construction and immutable afterwards.
//! Each product can be picked from one or more subaisles (its edge set
//! `Q(p)`); each order needs a known number of baskets and a trolley carries
//! at most `B` baskets, baskets never mixing orders.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::util::ceil_div;
use crate::warehouse::{LayoutError, SubaisleId, WarehouseLayout};

/// One candidate pick position: a subaisle plus the offset from its North end.
#[derive(Clone, Debug, PartialEq)]
pub struct PickLocation {
    pub subaisle: SubaisleId,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub id: String,
    pub locations: Vec<PickLocation>,
}

impl Product {
    /// The set of subaisles this product can be picked from, `Q(p)`.
    pub fn edge_set(&self) -> BTreeSet<SubaisleId> {
        self.locations.iter().map(|l| l.subaisle).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Order {
    pub id: String,
    pub product_ids: Vec<String>,
    pub baskets: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("layout: {0}")]
    Layout(#[from] LayoutError),
    #[error("{path}: duplicate identifier \"{id}\"")]
    DuplicateId { path: String, id: String },
    #[error("{path}: product \"{id}\" has no pick locations")]
    EmptyLocations { path: String, id: String },
    #[error("{path}: repeated subaisle among the locations of product \"{id}\"")]
    RepeatedSubaisle { path: String, id: String },
    #[error("{path}: order \"{id}\" lists no products")]
    EmptyOrder { path: String, id: String },
    #[error("{path}: order \"{id}\" references unknown product \"{product}\"")]
    UnknownProduct {
        path: String,
        id: String,
        product: String,
    },
    #[error("{path}: order capacity: order \"{id}\" needs {baskets} baskets but a trolley holds {capacity}")]
    OrderExceedsCapacity {
        path: String,
        id: String,
        baskets: u32,
        capacity: u32,
    },
    #[error("{path}: order \"{id}\" must need at least one basket")]
    ZeroBaskets { path: String, id: String },
    #[error("total demand of {demand} baskets exceeds fleet capacity {trolleys} x {capacity}")]
    FleetTooSmall {
        demand: u64,
        trolleys: usize,
        capacity: u32,
    },
    #[error("trolleys must be >= 1")]
    NoTrolleys,
    #[error("capacity must be >= 1")]
    ZeroCapacity,
}

/// A validated batching problem. Orders keep the sequence they were given in;
/// [`sort_orders`](Instance::sort_orders) returns a reindexed copy.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    layout: WarehouseLayout,
    products: Vec<Product>,
    product_index: BTreeMap<String, usize>,
    orders: Vec<Order>,
    num_trolleys: usize,
    capacity: u32,
}

impl Instance {
    pub fn new(
        layout: WarehouseLayout,
        products: Vec<Product>,
        orders: Vec<Order>,
        num_trolleys: usize,
        capacity: u32,
    ) -> Result<Self, InstanceError> {
        if num_trolleys < 1 {
            return Err(InstanceError::NoTrolleys);
        }
        if capacity < 1 {
            return Err(InstanceError::ZeroCapacity);
        }

        let mut product_index = BTreeMap::new();
        for (i, p) in products.iter().enumerate() {
            let path = alloc::format!("products[{i}]");
            if product_index.insert(p.id.clone(), i).is_some() {
                return Err(InstanceError::DuplicateId {
                    path,
                    id: p.id.clone(),
                });
            }
            if p.locations.is_empty() {
                return Err(InstanceError::EmptyLocations {
                    path,
                    id: p.id.clone(),
                });
            }
            let mut seen = BTreeSet::new();
            for (j, loc) in p.locations.iter().enumerate() {
                layout
                    .check_point(&crate::warehouse::GridPoint::SubaislePoint {
                        subaisle: loc.subaisle,
                        offset: loc.offset,
                    })
                    .map_err(|e| match e {
                        LayoutError::OffsetOutOfRange { .. }
                        | LayoutError::AisleOutOfRange { .. }
                        | LayoutError::BlockOutOfRange { .. } => e,
                        other => other,
                    })?;
                if !seen.insert(loc.subaisle) {
                    return Err(InstanceError::RepeatedSubaisle {
                        path: alloc::format!("products[{i}].locations[{j}]"),
                        id: p.id.clone(),
                    });
                }
            }
        }

        let mut orders = orders;
        let mut order_ids = BTreeSet::new();
        let mut demand: u64 = 0;
        for (i, o) in orders.iter_mut().enumerate() {
            let path = alloc::format!("orders[{i}]");
            // Product lists are sets; drop repeats, keeping first mention.
            let mut mentioned = BTreeSet::new();
            o.product_ids.retain(|pid| mentioned.insert(pid.clone()));
            if !order_ids.insert(o.id.clone()) {
                return Err(InstanceError::DuplicateId {
                    path,
                    id: o.id.clone(),
                });
            }
            if o.product_ids.is_empty() {
                return Err(InstanceError::EmptyOrder {
                    path,
                    id: o.id.clone(),
                });
            }
            if o.baskets == 0 {
                return Err(InstanceError::ZeroBaskets {
                    path,
                    id: o.id.clone(),
                });
            }
            if o.baskets > capacity {
                return Err(InstanceError::OrderExceedsCapacity {
                    path,
                    id: o.id.clone(),
                    baskets: o.baskets,
                    capacity,
                });
            }
            for pid in &o.product_ids {
                if !product_index.contains_key(pid) {
                    return Err(InstanceError::UnknownProduct {
                        path: alloc::format!("orders[{i}].products"),
                        id: o.id.clone(),
                        product: pid.clone(),
                    });
                }
            }
            demand += u64::from(o.baskets);
        }

        if demand > num_trolleys as u64 * u64::from(capacity) {
            return Err(InstanceError::FleetTooSmall {
                demand,
                trolleys: num_trolleys,
                capacity,
            });
        }

        Ok(Instance {
            layout,
            products,
            product_index,
            orders,
            num_trolleys,
            capacity,
        })
    }

    pub fn layout(&self) -> &WarehouseLayout {
        &self.layout
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn num_trolleys(&self) -> usize {
        self.num_trolleys
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn product(&self, id: &str) -> Option<&Product> {
        self.product_index.get(id).map(|&i| &self.products[i])
    }

    pub fn order(&self, id: &str) -> Option<&Order> {
        self.orders.iter().find(|o| o.id == id)
    }

    pub fn total_baskets(&self) -> u64 {
        self.orders.iter().map(|o| u64::from(o.baskets)).sum()
    }

    /// Fewest trolleys any feasible batching can use: `ceil(sum b_o / B)`.
    pub fn min_trolleys(&self) -> usize {
        ceil_div(self.total_baskets(), u64::from(self.capacity)) as usize
    }

    /// Union of the edge sets of an order's products.
    pub fn order_edge_union(&self, order: &Order) -> BTreeSet<SubaisleId> {
        let mut union = BTreeSet::new();
        for pid in &order.product_ids {
            if let Some(p) = self.product(pid) {
                union.extend(p.edge_set());
            }
        }
        union
    }

    /// The order's products with dominated ones removed: product `p` goes
    /// whenever another product `q` of the same order has `Q(q) ⊆ Q(p)`,
    /// because any edge that can supply `q` then also supplies `p`. Only the
    /// coverage constraints shrink; pick positions are untouched.
    pub fn pruned_products(&self, order: &Order) -> Vec<&Product> {
        let prods: Vec<&Product> = order
            .product_ids
            .iter()
            .filter_map(|pid| self.product(pid))
            .collect();
        let sets: Vec<BTreeSet<SubaisleId>> = prods.iter().map(|p| p.edge_set()).collect();
        let mut keep = alloc::vec![true; prods.len()];
        for i in 0..prods.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..prods.len() {
                if i == j || !keep[j] {
                    continue;
                }
                if sets[j].is_subset(&sets[i]) {
                    keep[i] = false;
                    break;
                }
            }
        }
        prods
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect()
    }

    /// Copy with orders reindexed for the symmetry-breaking constraints:
    /// decreasing baskets, ties by decreasing `|⋃ Q(p)|`, then ascending id.
    pub fn sort_orders(&self) -> Instance {
        let mut keyed: Vec<(u32, usize, &Order)> = self
            .orders
            .iter()
            .map(|o| (o.baskets, self.order_edge_union(o).len(), o))
            .collect();
        keyed.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.id.cmp(&b.2.id)));
        Instance {
            layout: self.layout.clone(),
            products: self.products.clone(),
            product_index: self.product_index.clone(),
            orders: keyed.into_iter().map(|(_, _, o)| o.clone()).collect(),
            num_trolleys: self.num_trolleys,
            capacity: self.capacity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BatchingError {
    #[error("order \"{0}\" is not assigned to any trolley")]
    Unassigned(String),
    #[error("assignment references unknown order \"{0}\"")]
    UnknownOrder(String),
    #[error("trolley index {index} out of range 1..={max}")]
    TrolleyOutOfRange { index: usize, max: usize },
    #[error("trolley {trolley} carries {load} baskets, capacity is {capacity}")]
    OverCapacity {
        trolley: usize,
        load: u64,
        capacity: u32,
    },
}

/// An assignment of every order to exactly one trolley (1-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Batching {
    assignment: BTreeMap<String, usize>,
}

impl Batching {
    pub fn new(assignment: BTreeMap<String, usize>) -> Self {
        Batching { assignment }
    }

    pub fn assign(&mut self, order_id: &str, trolley: usize) {
        self.assignment.insert(order_id.to_owned(), trolley);
    }

    pub fn trolley_of(&self, order_id: &str) -> Option<usize> {
        self.assignment.get(order_id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignment.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Order ids on a trolley, in the instance's order sequence.
    pub fn orders_on<'a>(&self, instance: &'a Instance, trolley: usize) -> Vec<&'a Order> {
        instance
            .orders()
            .iter()
            .filter(|o| self.trolley_of(&o.id) == Some(trolley))
            .collect()
    }

    /// Checks the exactly-once and capacity invariants against an instance.
    pub fn validate(&self, instance: &Instance) -> Result<(), BatchingError> {
        for o in instance.orders() {
            if !self.assignment.contains_key(&o.id) {
                return Err(BatchingError::Unassigned(o.id.clone()));
            }
        }
        let mut loads: BTreeMap<usize, u64> = BTreeMap::new();
        for (oid, &t) in &self.assignment {
            let order = instance
                .order(oid)
                .ok_or_else(|| BatchingError::UnknownOrder(oid.clone()))?;
            if t < 1 || t > instance.num_trolleys() {
                return Err(BatchingError::TrolleyOutOfRange {
                    index: t,
                    max: instance.num_trolleys(),
                });
            }
            *loads.entry(t).or_insert(0) += u64::from(order.baskets);
        }
        for (&t, &load) in &loads {
            if load > u64::from(instance.capacity()) {
                return Err(BatchingError::OverCapacity {
                    trolley: t,
                    load,
                    capacity: instance.capacity(),
                });
            }
        }
        Ok(())
    }
}
