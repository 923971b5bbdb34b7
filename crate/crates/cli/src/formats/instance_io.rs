//! The canonical instance document: a JSON object carrying the layout grid,
//! the product catalog with pick locations, the orders, and the fleet.
//! Parsing validates through [`Instance::new`], so every schema violation
//! surfaces with the offending field path.

use pickbatch_core::instance::{Instance, InstanceError, Order, PickLocation, Product};
use pickbatch_core::warehouse::{SubaisleId, WarehouseLayout};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct LayoutDoc {
    pub aisles: usize,
    pub blocks: usize,
    /// One row per aisle, one entry per block.
    pub subaisle_lengths: Vec<Vec<f64>>,
    /// One entry per adjacent aisle pair.
    pub cross_gaps: Vec<f64>,
    pub origin_offset: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct LocationDoc {
    pub aisle: usize,
    pub block: usize,
    pub offset: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ProductDoc {
    pub id: String,
    pub locations: Vec<LocationDoc>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct OrderDoc {
    pub id: String,
    pub baskets: u32,
    pub products: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct InstanceDoc {
    pub layout: LayoutDoc,
    pub products: Vec<ProductDoc>,
    pub orders: Vec<OrderDoc>,
    pub trolleys: usize,
    pub capacity: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Validation(#[from] InstanceError),
    #[error("invalid layout: {0}")]
    Layout(#[from] pickbatch_core::warehouse::LayoutError),
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    instance_from_doc(&doc)
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<Instance, ParseError> {
    let layout = WarehouseLayout::new(
        doc.layout.aisles,
        doc.layout.blocks,
        doc.layout.subaisle_lengths.clone(),
        doc.layout.cross_gaps.clone(),
        doc.layout.origin_offset,
    )?;
    let products = doc
        .products
        .iter()
        .map(|p| Product {
            id: p.id.clone(),
            locations: p
                .locations
                .iter()
                .map(|l| PickLocation {
                    subaisle: SubaisleId::new(l.aisle, l.block),
                    offset: l.offset,
                })
                .collect(),
        })
        .collect();
    let orders = doc
        .orders
        .iter()
        .map(|o| Order {
            id: o.id.clone(),
            product_ids: o.products.clone(),
            baskets: o.baskets,
        })
        .collect();
    Ok(Instance::new(
        layout,
        products,
        orders,
        doc.trolleys,
        doc.capacity,
    )?)
}

pub fn instance_to_doc(instance: &Instance) -> InstanceDoc {
    let layout = instance.layout();
    InstanceDoc {
        layout: LayoutDoc {
            aisles: layout.num_aisles(),
            blocks: layout.num_blocks(),
            subaisle_lengths: (1..=layout.num_aisles())
                .map(|a| {
                    (1..=layout.num_blocks())
                        .map(|b| {
                            layout
                                .subaisle_length(SubaisleId::new(a, b))
                                .expect("valid")
                        })
                        .collect()
                })
                .collect(),
            cross_gaps: layout.cross_gaps().to_vec(),
            origin_offset: layout.origin_offset(),
        },
        products: instance
            .products()
            .iter()
            .map(|p| ProductDoc {
                id: p.id.clone(),
                locations: p
                    .locations
                    .iter()
                    .map(|l| LocationDoc {
                        aisle: l.subaisle.aisle,
                        block: l.subaisle.block,
                        offset: l.offset,
                    })
                    .collect(),
            })
            .collect(),
        orders: instance
            .orders()
            .iter()
            .map(|o| OrderDoc {
                id: o.id.clone(),
                baskets: o.baskets,
                products: o.product_ids.clone(),
            })
            .collect(),
        trolleys: instance.num_trolleys(),
        capacity: instance.capacity(),
    }
}

pub fn serialize_instance(instance: &Instance) -> String {
    serde_json::to_string_pretty(&instance_to_doc(instance)).expect("serializable document")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "layout": { "aisles": 2, "blocks": 1,
                    "subaisle_lengths": [[1.0], [1.0]],
                    "cross_gaps": [1.0], "origin_offset": 1.0 },
        "products": [ { "id": "p", "locations": [ { "aisle": 1, "block": 1, "offset": 0.5 } ] } ],
        "orders": [ { "id": "o", "baskets": 1, "products": ["p"] } ],
        "trolleys": 1, "capacity": 1
    }"#;

    #[test]
    fn minimal_round_trip() {
        let inst = parse_instance(MINIMAL).unwrap();
        let text = serialize_instance(&inst);
        let again = parse_instance(&text).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn capacity_violation_names_constraint() {
        let doc = MINIMAL.replace("\"baskets\": 1", "\"baskets\": 4");
        let err = parse_instance(&doc).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("order capacity"), "unexpected message: {msg}");
        assert!(msg.contains("orders[0]"), "unexpected message: {msg}");
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_instance("{ nope"), Err(ParseError::Json(_))));
    }

    #[test]
    fn bad_offset_is_a_validation_error() {
        let doc = MINIMAL.replace("\"offset\": 0.5", "\"offset\": 9.5");
        let err = parse_instance(&doc).unwrap_err();
        assert!(format!("{err}").contains("offset"));
    }
}
