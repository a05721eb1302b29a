//! Generalized assignment via bid-to-weight ratio buckets, and the
//! bundle family that forces any online algorithm down to `O(1/log η)`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::{Algo, Precision};
use crate::allocation::{primal_value, Allocation};
use crate::error::{Error, Result};
use crate::instance::{Buyer, Instance, ItemSpec, Kind};
use crate::lp::factor_revealing_lp;
use crate::rational::{self, floor_log2, pow2, Rational};

/// Edges grouped by `s = ⌊log₂(b/w)⌋`. Zero-bid edges belong to no bucket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketPartition {
    #[serde(with = "rational::serde_rational")]
    pub eta: Rational,
    /// `1 + ⌊log₂ η⌋`.
    pub num_buckets: usize,
    pub bucket: Vec<Option<u32>>,
    /// `b̃ = 2^s w`, with `b/2 < b̃ <= b`.
    #[serde(skip)]
    pub surrogate: Vec<Option<Rational>>,
}

impl BucketPartition {
    pub fn edges_in(&self, s: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.bucket.len()).filter(move |&k| self.bucket[k] == Some(s))
    }
}

pub fn bucketize(inst: &Instance) -> Result<BucketPartition> {
    let mut eta = Rational::one();
    let mut bucket = Vec::with_capacity(inst.num_edges());
    let mut surrogate = Vec::with_capacity(inst.num_edges());
    for e in inst.edges() {
        if e.bid.is_zero() {
            bucket.push(None);
            surrogate.push(None);
            continue;
        }
        if e.weight.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "edge ({}, {}) has positive bid and zero weight; η is undefined",
                inst.buyers()[e.buyer].id,
                inst.items()[e.item].id
            )));
        }
        let r = &e.bid / &e.weight;
        let s = floor_log2(&r)?;
        surrogate.push(Some(pow2(s as i64) * &e.weight));
        bucket.push(Some(s));
        if r > eta {
            eta = r;
        }
    }
    let num_buckets = floor_log2(&eta)? as usize + 1;
    Ok(BucketPartition { eta, num_buckets, bucket, surrogate })
}

/// The budgeted instance on bucket `s` with bids = weights = `w`, plus the
/// original edge of each kept edge.
pub fn bucket_instance(inst: &Instance, part: &BucketPartition, s: u32) -> Result<(Instance, Vec<usize>)> {
    inst.map_edges(Kind::Onbap, |k, e| (part.bucket[k] == Some(s)).then(|| (e.weight.clone(), e.weight.clone())))
}

fn run_bucket(inst: &Instance, part: &BucketPartition, s: u32, inner: &Algo) -> Result<Vec<f64>> {
    let mut x = vec![0.0; inst.num_edges()];
    if part.edges_in(s).next().is_none() {
        return Ok(x);
    }
    let (sub, origin) = bucket_instance(inst, part, s)?;
    let (alloc, _) = inner.run(&sub, Precision::Fast)?;
    for (k, v) in origin.into_iter().zip(alloc.x()) {
        x[k] = *v;
    }
    Ok(x)
}

/// Samples `s` uniformly from the buckets and runs `inner` on bucket `s`.
pub fn ongap_randomized(inst: &Instance, inner: &Algo, seed: u64) -> Result<(Allocation, u32)> {
    let part = bucketize(inst)?;
    let s = ChaCha8Rng::seed_from_u64(seed).random_range(0..part.num_buckets as u32);
    Ok((Allocation::from_f64(run_bucket(inst, &part, s, inner)?), s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandomizedRun {
    pub alloc: Allocation,
    /// Value of each bucket run on the original bids.
    pub bucket_values: Vec<f64>,
    pub value: f64,
}

/// Average of the allocations of every bucket run.
pub fn ongap_derandomized(inst: &Instance, inner: &Algo) -> Result<DerandomizedRun> {
    let buckets = bucketize(inst)?.num_buckets;
    ongap_derandomized_with_buckets(inst, inner, buckets)
}

/// As [`ongap_derandomized`], averaging over buckets `0..num_buckets`
/// chosen in advance (an online wrapper that is told `η` up front).
pub fn ongap_derandomized_with_buckets(inst: &Instance, inner: &Algo, num_buckets: usize) -> Result<DerandomizedRun> {
    let part = bucketize(inst)?;
    if num_buckets < part.num_buckets {
        return Err(Error::InvalidParameter(format!(
            "{num_buckets} buckets cannot cover η = {}",
            rational::format(&part.eta)
        )));
    }
    let mut avg = vec![0.0; inst.num_edges()];
    let mut bucket_values = Vec::with_capacity(num_buckets);
    for s in 0..num_buckets as u32 {
        let x = run_bucket(inst, &part, s, inner)?;
        bucket_values.push(primal_value(inst, &Allocation::from_f64(x.clone()))?);
        for (a, v) in avg.iter_mut().zip(&x) {
            *a += v / num_buckets as f64;
        }
    }
    let alloc = Allocation::from_f64(avg);
    let value = primal_value(inst, &alloc)?;
    Ok(DerandomizedRun { alloc, bucket_values, value })
}

/// One buyer with budget 1; bundle `t < k` has `2^t` items of bid 1 and
/// weight `2^-t`, bundles arriving in order.
pub fn gen_hard_instance(k: usize) -> Result<Instance> {
    if k == 0 || k > 30 {
        return Err(Error::InvalidParameter(format!("hard instance needs 1 <= k <= 30, got {k}")));
    }
    let buyers = vec![Buyer { id: "b".into(), budget: Rational::one() }];
    let mut items = Vec::new();
    for t in 0..k {
        for n in 0..1usize << t {
            items.push(ItemSpec { id: format!("t{t}-{n}"), edges: vec![(0, Rational::one(), pow2(-(t as i64)))] });
        }
    }
    Instance::new(Kind::Ongap, buyers, items, None)
}

/// Bundle index `t` of each item, read back from its weight `2^-t`.
pub fn hard_instance_bundles(inst: &Instance) -> Result<Vec<usize>> {
    let shape = || Error::InvalidParameter("not a hard instance".into());
    if inst.kind() != Kind::Ongap || inst.num_buyers() != 1 {
        return Err(shape());
    }
    (0..inst.num_items())
        .map(|j| {
            let mut edges = inst.item_edges(j);
            let (Some(k), None) = (edges.next(), edges.next()) else {
                return Err(shape());
            };
            let w = &inst.edges()[k].weight;
            if w.is_zero() {
                return Err(shape());
            }
            let t = floor_log2(&w.recip())?;
            if pow2(-(t as i64)) != *w {
                return Err(shape());
            }
            Ok(t as usize)
        })
        .collect()
}

/// Zeroes the bids of bundles after `s`; the optimum becomes `2^s`.
pub fn truncate_hard_instance(inst: &Instance, s: usize) -> Result<Instance> {
    let bundles = hard_instance_bundles(inst)?;
    let k = bundles.iter().max().map_or(0, |t| t + 1);
    if s >= k {
        return Err(Error::InvalidParameter(format!("bundle {s} out of range for k = {k}")));
    }
    let (out, _) = inst.map_edges(Kind::Ongap, |_, e| {
        let bid = if bundles[e.item] > s { Rational::zero() } else { e.bid.clone() };
        Some((bid, e.weight.clone()))
    })?;
    Ok(out)
}

/// `c_t = Σ_{j in bundle t} w_j x_j`, budget spent on each bundle.
pub fn bundle_usage(inst: &Instance, alloc: &Allocation) -> Result<Vec<f64>> {
    let bundles = hard_instance_bundles(inst)?;
    let k = bundles.iter().max().map_or(0, |t| t + 1);
    let mut c = vec![0.0; k];
    for (e, x) in inst.edges().iter().zip(alloc.x()) {
        c[bundles[e.item]] += rational::to_f64(&e.weight) * x;
    }
    Ok(c)
}

/// Outcome of an algorithm against the truncated hard family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub k: usize,
    /// `value(truncate(k, s)) / 2^s` for each `s < k`.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    /// Bundle usage on the full instance.
    pub c: Vec<f64>,
    /// `min_s Σ_{t<=s} c_t 2^{t-s}`, the ratio the usage vector certifies.
    pub usage_ratio: f64,
    pub alpha_star: f64,
}

/// Runs `run` on every truncation of the `k`-bundle instance.
pub fn adversary_check(k: usize, run: impl Fn(&Instance) -> Result<Allocation>) -> Result<AdversaryReport> {
    let full = gen_hard_instance(k)?;
    let mut ratios = Vec::with_capacity(k);
    for s in 0..k {
        let inst = truncate_hard_instance(&full, s)?;
        let alloc = run(&inst)?;
        ratios.push(primal_value(&inst, &alloc)? / f64::powi(2.0, s as i32));
    }
    let c = bundle_usage(&full, &run(&full)?)?;
    let mut prefix = 0.0;
    let mut usage_ratio = f64::INFINITY;
    for ct in &c {
        prefix = prefix / 2.0 + ct;
        usage_ratio = usage_ratio.min(prefix);
    }
    Ok(AdversaryReport {
        k,
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratios,
        c,
        usage_ratio,
        alpha_star: rational::to_f64(&factor_revealing_lp(k)?.alpha_star),
    })
}
