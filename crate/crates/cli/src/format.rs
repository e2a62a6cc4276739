//! Instance files.
//!
//! ```json
//! {
//!   "graph": { "vertices": 3, "edges": [ { "u": 0, "v": 1, "length": 1 } ] },
//!   "points": [
//!     { "weight": 1, "locations": [ { "edge": 0, "t": 0.25, "probability": "1/3" } ] }
//!   ],
//!   "settings": { "tolerance": 1e-9, "enforce_probability_sum": true, "exact_rational": false }
//! }
//! ```
//!
//! Offsets `t` are absolute lengths from the edge's `u` end. Every numeric
//! field accepts a JSON number or a string holding a decimal or a fraction;
//! numbers are read from their source text, so exact mode sees `0.1` as 1/10.

use std::fmt;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use ukcenter::{Edge, Graph, GraphPoint, Location, Scalar, UncertainPoint};

use crate::Failure;

/// A number kept as its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity(pub String);

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct QuantityVisitor;

        impl<'de> Visitor<'de> for QuantityVisitor {
            type Value = Quantity;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a string such as \"0.25\" or \"1/3\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
                Ok(Quantity(v.to_string()))
            }

            fn visit_map<A: de::MapAccess<'de>>(self, map: A) -> Result<Quantity, A::Error> {
                // Arbitrary-precision numbers arrive as a single-entry map.
                let n = serde_json::Number::deserialize(de::value::MapAccessDeserializer::new(map))?;
                Ok(Quantity(n.to_string()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                Ok(Quantity(v.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                Ok(Quantity(v.to_string()))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity(v.to_string()))
            }
        }

        deserializer.deserialize_any(QuantityVisitor)
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.parse::<serde_json::Number>() {
            Ok(n) if !self.0.contains('/') => n.serialize(serializer),
            _ => serializer.serialize_str(&self.0),
        }
    }
}

impl Quantity {
    /// Fractions whose denominators divide a power of ten are written as
    /// decimals.
    pub fn of<T: Scalar>(value: &T) -> Self {
        let text = value.to_string();
        Quantity(terminating_decimal(&text).unwrap_or(text))
    }

    fn parse<T: Scalar>(&self, path: &str) -> Result<T, Failure> {
        T::parse_decimal(&self.0).ok_or_else(|| Failure::parse(format!("{path}: `{}` is not a finite number", self.0)))
    }
}

fn terminating_decimal(text: &str) -> Option<String> {
    let (n, d) = text.split_once('/')?;
    let n: BigInt = n.parse().ok()?;
    let mut d: BigInt = d.parse().ok()?;
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = n * num::pow(two, (digits - twos) as usize) * num::pow(five, (digits - fives) as usize);
    let sign = if scaled.is_negative() { "-" } else { "" };
    let mag = scaled.abs().to_string();
    let width = digits as usize + 1;
    let mag = format!("{mag:0>width$}");
    let (int, frac) = mag.split_at(mag.len() - digits as usize);
    Some(format!("{sign}{int}.{frac}"))
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub length: Quantity,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: usize,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LocationSpec {
    pub edge: usize,
    pub t: Quantity,
    pub probability: Quantity,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub weight: Quantity,
    pub locations: Vec<LocationSpec>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforce_probability_sum: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_rational: Option<bool>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub graph: GraphSpec,
    pub points: Vec<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsSpec>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::parse(format!("instance file: {e}")))
    }

    pub fn settings(&self) -> SettingsSpec {
        self.settings.clone().unwrap_or_default()
    }

    pub fn graph<T: Scalar>(&self) -> Result<Graph<T>, Failure> {
        let edges = self
            .graph
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| Ok(Edge::new(e.u, e.v, e.length.parse(&format!("graph.edges[{id}].length"))?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        Graph::new(self.graph.vertices, edges).map_err(|e| Failure::from_core(e, "graph"))
    }

    pub fn points<T: Scalar>(&self) -> Result<Vec<UncertainPoint<T>>, Failure> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let weight = p.weight.parse(&format!("points[{i}].weight"))?;
                let locations = p
                    .locations
                    .iter()
                    .enumerate()
                    .map(|(j, l)| {
                        let path = format!("points[{i}].locations[{j}]");
                        Ok(Location::new(
                            GraphPoint::new(l.edge, l.t.parse(&format!("{path}.t"))?),
                            l.probability.parse(&format!("{path}.probability"))?,
                        ))
                    })
                    .collect::<Result<Vec<_>, Failure>>()?;
                Ok(UncertainPoint::new(weight, locations))
            })
            .collect()
    }

    pub fn from_parts<T: Scalar>(graph: &Graph<T>, points: &[UncertainPoint<T>]) -> Self {
        InstanceFile {
            graph: GraphSpec {
                vertices: graph.vertex_count(),
                edges: graph
                    .edges()
                    .iter()
                    .map(|e| EdgeSpec {
                        u: e.u,
                        v: e.v,
                        length: Quantity::of(&e.length),
                    })
                    .collect(),
            },
            points: points
                .iter()
                .map(|p| PointSpec {
                    weight: Quantity::of(&p.weight),
                    locations: p
                        .locations
                        .iter()
                        .map(|l| LocationSpec {
                            edge: l.point.edge,
                            t: Quantity::of(&l.point.t),
                            probability: Quantity::of(&l.probability),
                        })
                        .collect(),
                })
                .collect(),
            settings: None,
        }
    }
}
