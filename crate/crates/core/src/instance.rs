//! Bipartite market instances and their JSON form.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, serde_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Matching,
    Onbap,
    Ongap,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Matching => "matching",
            Kind::Onbap => "onbap",
            Kind::Ongap => "ongap",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Buyer {
    pub id: String,
    pub budget: Rational,
}

/// One (buyer, item) edge. `weight` is the budget the edge consumes per
/// unit of allocation, `bid` the value it contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub buyer: usize,
    pub item: usize,
    pub bid: Rational,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: String,
    /// Range into [`Instance::edges`].
    pub edges: Range<usize>,
}

/// Non-fatal validation findings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    /// Some bid exceeds its buyer's whole budget, so the random-order
    /// guarantee for OnBAP does not apply to this instance.
    BidExceedsBudget { buyer: String, item: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::BidExceedsBudget { buyer, item } => {
                write!(f, "b_{{i,j}} <= B_i violated on edge ({buyer}, {item})")
            }
        }
    }
}

/// Item-side description used to assemble an instance: item id plus
/// `(buyer index, bid, weight)` edges.
#[derive(Debug, Clone)]
pub struct ItemSpec {
    pub id: String,
    pub edges: Vec<(usize, Rational, Rational)>,
}

/// A validated, immutable bipartite market.
#[derive(Debug, Clone)]
pub struct Instance {
    kind: Kind,
    buyers: Vec<Buyer>,
    items: Vec<Item>,
    edges: Vec<Edge>,
    arrival: Vec<usize>,
    warnings: Vec<Warning>,
    budget_f: Vec<f64>,
    bid_f: Vec<f64>,
    weight_f: Vec<f64>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.buyers == other.buyers
            && self.items == other.items
            && self.edges == other.edges
            && self.arrival == other.arrival
    }
}

impl Instance {
    /// Assemble and validate. `arrival` lists item indices; `None` means
    /// item list order.
    pub fn new(
        kind: Kind,
        buyers: Vec<Buyer>,
        items: Vec<ItemSpec>,
        arrival: Option<Vec<usize>>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::Validation(msg));

        let mut seen = HashSet::new();
        for b in &buyers {
            if !seen.insert(b.id.as_str()) {
                return invalid(format!("duplicate buyer id `{}`", b.id));
            }
            if b.budget.is_negative() {
                return invalid(format!("negative budget for buyer `{}`", b.id));
            }
            if kind == Kind::Matching && !b.budget.is_one() {
                return invalid(format!("matching requires budget 1 (buyer `{}`)", b.id));
            }
        }

        let mut seen = HashSet::new();
        let mut flat = Vec::new();
        let mut item_list = Vec::with_capacity(items.len());
        let mut warnings = Vec::new();
        for (j, spec) in items.into_iter().enumerate() {
            if !seen.insert(spec.id.clone()) {
                return invalid(format!("duplicate item id `{}`", spec.id));
            }
            let start = flat.len();
            let mut neighbours = HashSet::new();
            for (buyer, bid, weight) in spec.edges {
                let Some(b) = buyers.get(buyer) else {
                    return invalid(format!("item `{}` references unknown buyer #{buyer}", spec.id));
                };
                if !neighbours.insert(buyer) {
                    return invalid(format!("item `{}` lists buyer `{}` twice", spec.id, b.id));
                }
                if bid.is_negative() || weight.is_negative() {
                    return invalid(format!("negative bid or weight on edge ({}, {})", b.id, spec.id));
                }
                match kind {
                    Kind::Matching => {
                        if !bid.is_one() || !weight.is_one() {
                            return invalid(format!(
                                "matching requires bid = weight = 1 on edge ({}, {})",
                                b.id, spec.id
                            ));
                        }
                    }
                    Kind::Onbap => {
                        if weight != bid {
                            return invalid(format!(
                                "onbap requires weight = bid on edge ({}, {})",
                                b.id, spec.id
                            ));
                        }
                        if bid > b.budget {
                            warnings.push(Warning::BidExceedsBudget {
                                buyer: b.id.clone(),
                                item: spec.id.clone(),
                            });
                        }
                    }
                    Kind::Ongap => {
                        // zero-bid edges are dead edges (truncated hard instances)
                        if weight > bid && !bid.is_zero() {
                            return invalid(format!(
                                "ongap requires w <= b on edge ({}, {})",
                                b.id, spec.id
                            ));
                        }
                    }
                }
                flat.push(Edge { buyer, item: j, bid, weight });
            }
            item_list.push(Item { id: spec.id, edges: start..flat.len() });
        }

        let arrival = match arrival {
            None => (0..item_list.len()).collect(),
            Some(order) => {
                let mut hit = vec![false; item_list.len()];
                for &j in &order {
                    match hit.get_mut(j) {
                        Some(h) if !*h => *h = true,
                        Some(_) => return invalid(format!("arrival repeats item #{j}")),
                        None => return invalid(format!("arrival references unknown item #{j}")),
                    }
                }
                if order.len() != item_list.len() {
                    return invalid("arrival is not a permutation of the items".into());
                }
                order
            }
        };

        let budget_f = buyers.iter().map(|b| rational::to_f64(&b.budget)).collect();
        let bid_f = flat.iter().map(|e| rational::to_f64(&e.bid)).collect();
        let weight_f = flat.iter().map(|e| rational::to_f64(&e.weight)).collect();
        Ok(Self {
            kind,
            buyers,
            items: item_list,
            edges: flat,
            arrival,
            warnings,
            budget_f,
            bid_f,
            weight_f,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn buyers(&self) -> &[Buyer] {
        &self.buyers
    }
    pub fn items(&self) -> &[Item] {
        &self.items
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn arrival(&self) -> &[usize] {
        &self.arrival
    }
    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }
    pub fn num_items(&self) -> usize {
        self.items.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn item_edges(&self, item: usize) -> Range<usize> {
        self.items[item].edges.clone()
    }

    pub fn budget_f64(&self, buyer: usize) -> f64 {
        self.budget_f[buyer]
    }
    pub fn bid_f64(&self, edge: usize) -> f64 {
        self.bid_f[edge]
    }
    pub fn weight_f64(&self, edge: usize) -> f64 {
        self.weight_f[edge]
    }

    /// Largest online degree.
    pub fn max_item_degree(&self) -> usize {
        self.items.iter().map(|it| it.edges.len()).max().unwrap_or(0)
    }

    /// `max b_ij / B_i` over edges with positive budget.
    pub fn max_bid_budget_ratio(&self) -> f64 {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| self.budget_f[e.buyer] > 0.0)
            .map(|(k, e)| self.bid_f[k] / self.budget_f[e.buyer])
            .fold(0.0, f64::max)
    }

    /// Same market, different arrival order.
    pub fn with_arrival(&self, order: Vec<usize>) -> Result<Self> {
        Self::new(self.kind, self.buyers.clone(), self.item_specs(), Some(order))
    }

    /// Rebuild with transformed edges. `f` returns the new `(bid, weight)`
    /// or `None` to drop the edge. Also returns, for each new edge, the
    /// index of the edge it came from.
    pub fn map_edges<F>(&self, kind: Kind, mut f: F) -> Result<(Self, Vec<usize>)>
    where
        F: FnMut(usize, &Edge) -> Option<(Rational, Rational)>,
    {
        let mut origin = Vec::new();
        let items = self
            .items
            .iter()
            .map(|it| ItemSpec {
                id: it.id.clone(),
                edges: it
                    .edges
                    .clone()
                    .filter_map(|k| {
                        let e = &self.edges[k];
                        f(k, e).map(|(b, w)| {
                            origin.push(k);
                            (e.buyer, b, w)
                        })
                    })
                    .collect(),
            })
            .collect();
        let inst = Self::new(kind, self.buyers.clone(), items, Some(self.arrival.clone()))?;
        Ok((inst, origin))
    }

    pub fn item_specs(&self) -> Vec<ItemSpec> {
        self.items
            .iter()
            .map(|it| ItemSpec {
                id: it.id.clone(),
                edges: it
                    .edges
                    .clone()
                    .map(|k| {
                        let e = &self.edges[k];
                        (e.buyer, e.bid.clone(), e.weight.clone())
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        load_instance(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance serializes")
    }

    fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            kind: self.kind,
            buyers: self
                .buyers
                .iter()
                .map(|b| BuyerDoc { id: b.id.clone(), budget: Some(b.budget.clone()) })
                .collect(),
            items: self
                .items
                .iter()
                .map(|it| ItemDoc {
                    id: it.id.clone(),
                    edges: it
                        .edges
                        .clone()
                        .map(|k| {
                            let e = &self.edges[k];
                            EdgeDoc {
                                buyer: self.buyers[e.buyer].id.clone(),
                                bid: Some(e.bid.clone()),
                                weight: Some(e.weight.clone()),
                            }
                        })
                        .collect(),
                })
                .collect(),
            arrival: Some(self.arrival.iter().map(|&j| self.items[j].id.clone()).collect()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    kind: Kind,
    buyers: Vec<BuyerDoc>,
    items: Vec<ItemDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arrival: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuyerDoc {
    id: String,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    budget: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDoc {
    id: String,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    buyer: String,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    bid: Option<Rational>,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    weight: Option<Rational>,
}

/// Parse and validate an instance document. Omitted budget and bid
/// default to 1, omitted weight to the bid, omitted arrival to item order.
pub fn load_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;

    let buyers: Vec<Buyer> = doc
        .buyers
        .into_iter()
        .map(|b| Buyer { id: b.id, budget: b.budget.unwrap_or_else(Rational::one) })
        .collect();
    let buyer_index: HashMap<&str, usize> =
        buyers.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();

    let mut items = Vec::with_capacity(doc.items.len());
    for it in doc.items {
        let mut edges = Vec::with_capacity(it.edges.len());
        for e in it.edges {
            let Some(&buyer) = buyer_index.get(e.buyer.as_str()) else {
                return Err(Error::Validation(format!(
                    "item `{}` references unknown buyer `{}`",
                    it.id, e.buyer
                )));
            };
            let bid = e.bid.unwrap_or_else(Rational::one);
            let weight = e.weight.unwrap_or_else(|| bid.clone());
            edges.push((buyer, bid, weight));
        }
        items.push(ItemSpec { id: it.id, edges });
    }

    let arrival = match doc.arrival {
        None => None,
        Some(ids) => {
            let index: HashMap<&str, usize> =
                items.iter().enumerate().map(|(j, it)| (it.id.as_str(), j)).collect();
            let mut order = Vec::with_capacity(ids.len());
            for id in &ids {
                match index.get(id.as_str()) {
                    Some(&j) => order.push(j),
                    None => {
                        return Err(Error::Validation(format!("arrival references unknown item `{id}`")))
                    }
                }
            }
            Some(order)
        }
    };

    Instance::new(doc.kind, buyers, items, arrival)
}
