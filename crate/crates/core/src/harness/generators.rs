use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Buyer, Instance, ItemSpec, Kind};
use crate::ongap::gen_hard_instance;
use crate::rational::{int, ratio, Rational};

/// Grid resolution for random rational parameters.
const STEPS: i64 = 100;

/// Closed interval sampled on a grid of `STEPS + 1` rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub lo: Rational,
    pub hi: Rational,
}

impl Range {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Range { lo, hi }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Rational {
        let k = rng.random_range(0..=STEPS);
        &self.lo + (&self.hi - &self.lo) * ratio(k, STEPS)
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.lo > self.hi || self.lo < int(0) {
            return Err(Error::InvalidParameter(format!("bad {what} range")));
        }
        Ok(())
    }
}

/// Instance families. All random families are deterministic given the
/// seed, and every item gets at least one edge.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Item `j` adjacent to buyers `j..n`.
    Triangular { n: usize },
    Complete { n: usize, m: usize },
    /// `n` buyers, `m` items, each edge present with probability `p`.
    RandomMatching { n: usize, m: usize, p: f64 },
    /// Every item picks between 1 and `d` distinct buyers; the first item
    /// picks exactly `d`.
    BoundedDegree { n: usize, m: usize, d: usize },
    /// Budgeted instance; with `cap` every bid is clipped to its budget.
    RandomOnbap { n: usize, m: usize, p: f64, bid: Range, budget: Range, cap: bool },
    /// Weights from `weight`, bid/weight ratios from `[1, eta]`.
    RandomOngap { n: usize, m: usize, p: f64, weight: Range, eta: Rational, budget: Range },
    OngapHard { k: usize },
}

impl Family {
    pub fn random_onbap(n: usize, m: usize, p: f64) -> Self {
        Family::RandomOnbap {
            n,
            m,
            p,
            bid: Range::new(ratio(1, 10), int(1)),
            budget: Range::new(int(1), int(3)),
            cap: true,
        }
    }

    pub fn random_ongap(n: usize, m: usize, p: f64, eta: i64) -> Self {
        Family::RandomOngap {
            n,
            m,
            p,
            weight: Range::new(ratio(1, 20), ratio(1, 2)),
            eta: int(eta),
            budget: Range::new(int(1), int(2)),
        }
    }
}

fn unit_buyers(n: usize) -> Vec<Buyer> {
    (1..=n).map(|i| Buyer { id: format!("b{i}"), budget: Rational::one() }).collect()
}

fn item_id(j: usize) -> String {
    format!("j{}", j + 1)
}

/// Neighbour sets with each edge present w.p. `p`; an item left empty gets
/// one uniformly random buyer.
fn random_neighbours(rng: &mut ChaCha8Rng, n: usize, m: usize, p: f64) -> Vec<Vec<usize>> {
    (0..m)
        .map(|_| {
            let mut nb: Vec<usize> = (0..n).filter(|_| rng.random_bool(p)).collect();
            if nb.is_empty() {
                nb.push(rng.random_range(0..n));
            }
            nb
        })
        .collect()
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("need at least one buyer and one item".into()));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn gen_family(family: &Family, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Rational::one;
    match family {
        Family::Triangular { n } => {
            check_dims(*n, *n)?;
            let items = (0..*n)
                .map(|j| ItemSpec { id: item_id(j), edges: (j..*n).map(|i| (i, one(), one())).collect() })
                .collect();
            Instance::new(Kind::Matching, unit_buyers(*n), items, None)
        }
        Family::Complete { n, m } => {
            check_dims(*n, *m)?;
            let items =
                (0..*m).map(|j| ItemSpec { id: item_id(j), edges: (0..*n).map(|i| (i, one(), one())).collect() }).collect();
            Instance::new(Kind::Matching, unit_buyers(*n), items, None)
        }
        Family::RandomMatching { n, m, p } => {
            check_dims(*n, *m)?;
            check_p(*p)?;
            let items = random_neighbours(&mut rng, *n, *m, *p)
                .into_iter()
                .enumerate()
                .map(|(j, nb)| ItemSpec { id: item_id(j), edges: nb.into_iter().map(|i| (i, one(), one())).collect() })
                .collect();
            Instance::new(Kind::Matching, unit_buyers(*n), items, None)
        }
        Family::BoundedDegree { n, m, d } => {
            check_dims(*n, *m)?;
            if *d == 0 || d > n {
                return Err(Error::InvalidParameter(format!("degree {d} must be in 1..={n}")));
            }
            let items = (0..*m)
                .map(|j| {
                    let size = if j == 0 { *d } else { rng.random_range(1..=*d) };
                    let mut nb = sample(&mut rng, *n, size).into_vec();
                    nb.sort_unstable();
                    ItemSpec { id: item_id(j), edges: nb.into_iter().map(|i| (i, one(), one())).collect() }
                })
                .collect();
            Instance::new(Kind::Matching, unit_buyers(*n), items, None)
        }
        Family::RandomOnbap { n, m, p, bid, budget, cap } => {
            check_dims(*n, *m)?;
            check_p(*p)?;
            bid.check("bid")?;
            budget.check("budget")?;
            let buyers: Vec<Buyer> =
                (1..=*n).map(|i| Buyer { id: format!("b{i}"), budget: budget.draw(&mut rng) }).collect();
            let items = random_neighbours(&mut rng, *n, *m, *p)
                .into_iter()
                .enumerate()
                .map(|(j, nb)| ItemSpec {
                    id: item_id(j),
                    edges: nb
                        .into_iter()
                        .map(|i| {
                            let mut b = bid.draw(&mut rng);
                            if *cap && b > buyers[i].budget {
                                b = buyers[i].budget.clone();
                            }
                            (i, b.clone(), b)
                        })
                        .collect(),
                })
                .collect();
            Instance::new(Kind::Onbap, buyers, items, None)
        }
        Family::RandomOngap { n, m, p, weight, eta, budget } => {
            check_dims(*n, *m)?;
            check_p(*p)?;
            weight.check("weight")?;
            budget.check("budget")?;
            if *eta < int(1) {
                return Err(Error::InvalidParameter("eta must be >= 1".into()));
            }
            let ratios = Range::new(int(1), eta.clone());
            let buyers: Vec<Buyer> =
                (1..=*n).map(|i| Buyer { id: format!("b{i}"), budget: budget.draw(&mut rng) }).collect();
            let items = random_neighbours(&mut rng, *n, *m, *p)
                .into_iter()
                .enumerate()
                .map(|(j, nb)| ItemSpec {
                    id: item_id(j),
                    edges: nb
                        .into_iter()
                        .map(|i| {
                            let w = weight.draw(&mut rng);
                            (i, &w * ratios.draw(&mut rng), w)
                        })
                        .collect(),
                })
                .collect();
            Instance::new(Kind::Ongap, buyers, items, None)
        }
        Family::OngapHard { k } => gen_hard_instance(*k),
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Triangular { n } => write!(f, "triangular:{n}"),
            Family::Complete { n, m } => write!(f, "complete:{n},{m}"),
            Family::RandomMatching { n, m, p } => write!(f, "random-matching:{n},{m},{p}"),
            Family::BoundedDegree { n, m, d } => write!(f, "bounded-degree:{n},{m},{d}"),
            Family::RandomOnbap { n, m, p, .. } => write!(f, "random-onbap:{n},{m},{p}"),
            Family::RandomOngap { n, m, p, eta, .. } => write!(f, "random-ongap:{n},{m},{p},{eta}"),
            Family::OngapHard { k } => write!(f, "ongap-hard:{k}"),
        }
    }
}

/// `name:arg,arg,...`, e.g. `triangular:10`, `random-onbap:4,6,0.5`,
/// `random-ongap:3,5,0.5,8`. Random budgeted families use default ranges.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse family `{s}`"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let u = |i: usize| args.get(i).and_then(|a| a.parse::<usize>().ok()).ok_or_else(bad);
        let p = |i: usize| args.get(i).and_then(|a| a.parse::<f64>().ok()).ok_or_else(bad);
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(bad()) };
        match name {
            "triangular" => arity(1).and(Ok(Family::Triangular { n: u(0)? })),
            "complete" => arity(2).and(Ok(Family::Complete { n: u(0)?, m: u(1)? })),
            "random-matching" => arity(3).and(Ok(Family::RandomMatching { n: u(0)?, m: u(1)?, p: p(2)? })),
            "bounded-degree" => arity(3).and(Ok(Family::BoundedDegree { n: u(0)?, m: u(1)?, d: u(2)? })),
            "random-onbap" => arity(3).and(Ok(Family::random_onbap(u(0)?, u(1)?, p(2)?))),
            "random-ongap" => arity(4).and(Ok(Family::random_ongap(u(0)?, u(1)?, p(2)?, u(3)? as i64))),
            "ongap-hard" => arity(1).and(Ok(Family::OngapHard { k: u(0)? })),
            _ => Err(bad()),
        }
    }
}
