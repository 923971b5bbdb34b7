//! Route serialization: `{trolley, distance, walk}` with walk points as
//! tagged descriptors.

use pickbatch_core::router::Route;
use pickbatch_core::warehouse::{GridPoint, SubaisleId};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PointDoc {
    Origin,
    Vertex {
        id: usize,
    },
    Point {
        aisle: usize,
        block: usize,
        offset: f64,
    },
}

impl From<&GridPoint> for PointDoc {
    fn from(p: &GridPoint) -> Self {
        match p {
            GridPoint::Origin => PointDoc::Origin,
            GridPoint::Vertex(v) => PointDoc::Vertex { id: *v },
            GridPoint::SubaislePoint { subaisle, offset } => PointDoc::Point {
                aisle: subaisle.aisle,
                block: subaisle.block,
                offset: *offset,
            },
        }
    }
}

impl From<&PointDoc> for GridPoint {
    fn from(p: &PointDoc) -> Self {
        match p {
            PointDoc::Origin => GridPoint::Origin,
            PointDoc::Vertex { id } => GridPoint::Vertex(*id),
            PointDoc::Point {
                aisle,
                block,
                offset,
            } => GridPoint::SubaislePoint {
                subaisle: SubaisleId::new(*aisle, *block),
                offset: *offset,
            },
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct RouteDoc {
    pub trolley: usize,
    pub distance: f64,
    pub walk: Vec<PointDoc>,
}

pub fn route_to_doc(trolley: usize, route: &Route) -> RouteDoc {
    RouteDoc {
        trolley,
        distance: route.distance,
        walk: route.walk.iter().map(PointDoc::from).collect(),
    }
}
