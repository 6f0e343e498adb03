//! Empirical ball laws, total variation, mass transport and independence checks.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::{derive_seed, Sample};
use crate::trees::{ball_key, BallKey, OrderedTree, VertexId};

/// A tree sampler: a deterministic function of its seed.
pub type Sampler<'a> = dyn Fn(u64) -> Sample + Sync + 'a;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub radius: usize,
    pub counts: BTreeMap<BallKey, u64>,
    pub total: u64,
    pub dropped: u64,
}

impl EmpiricalLaw {
    pub fn new(radius: usize) -> Self {
        EmpiricalLaw { radius, ..Default::default() }
    }

    pub fn add(&mut self, key: BallKey) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(mut self, other: EmpiricalLaw) -> Self {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
        self.dropped += other.dropped;
        self
    }

    pub fn prob(&self, key: &BallKey) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(key).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn dropped_fraction(&self) -> f64 {
        let all = self.total + self.dropped;
        if all == 0 {
            0.0
        } else {
            self.dropped as f64 / all as f64
        }
    }
}

/// Radius-`r` ball law of the root over `n` samples with seeds derived from `seed`.
pub fn empirical_local_law(sampler: &Sampler, r: usize, n: usize, seed: u64) -> EmpiricalLaw {
    (0..n as u64)
        .into_par_iter()
        .fold(
            || EmpiricalLaw::new(r),
            |mut law, idx| {
                let s = sampler(derive_seed(seed, idx));
                match ball_key(&s.tree, s.tree.root(), r) {
                    Ok(key) => law.add(key),
                    Err(_) => law.dropped += 1,
                }
                law
            },
        )
        .reduce(|| EmpiricalLaw::new(r), EmpiricalLaw::merge)
}

/// `(1/2) Σ |p_a - p_b|`.
pub fn tv_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<f64> {
    if a.radius != b.radius {
        return Err(Error::InvalidArgument(format!("radii differ: {} vs {}", a.radius, b.radius)));
    }
    let mut sum = 0.0;
    for k in a.counts.keys() {
        sum += (a.prob(k) - b.prob(k)).abs();
    }
    for k in b.counts.keys() {
        if !a.counts.contains_key(k) {
            sum += b.prob(k);
        }
    }
    Ok(0.5 * sum)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyDiff {
    pub key: BallKey,
    pub p_a: f64,
    pub p_b: f64,
}

/// Keys ordered by decreasing `|p_a - p_b|`.
pub fn largest_diffs(a: &EmpiricalLaw, b: &EmpiricalLaw, limit: usize) -> Vec<KeyDiff> {
    let mut keys: Vec<&BallKey> = a.counts.keys().chain(b.counts.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut out: Vec<KeyDiff> =
        keys.into_iter().map(|k| KeyDiff { key: k.clone(), p_a: a.prob(k), p_b: b.prob(k) }).collect();
    out.sort_by(|x, y| (y.p_a - y.p_b).abs().total_cmp(&(x.p_a - x.p_b).abs()).then(x.key.cmp(&y.key)));
    out.truncate(limit);
    out
}

/// How the second vertex of a transport pair sits relative to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Identity,
    Parent,
    Grandparent,
    Sibling,
    ElderSibling,
    EldestChild,
}

/// Weight attached to a related pair `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    One,
    SourceDegree,
    TargetDegree,
    SourceRank,
}

/// `h(T, u, v) = weight(u, v) · 1{v related to u}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportFunction {
    pub relation: Relation,
    pub weight: Weight,
}

/// Graph distance within which the check needs interior vertices.
pub const TRANSPORT_RADIUS: usize = 2;

impl TransportFunction {
    pub fn id(&self) -> String {
        format!("{:?}/{:?}", self.relation, self.weight).to_lowercase()
    }

    /// The twenty functions of the standard suite.
    pub fn suite() -> Vec<TransportFunction> {
        let relations = [Relation::Parent, Relation::Grandparent, Relation::Sibling, Relation::ElderSibling, Relation::EldestChild];
        let weights = [Weight::One, Weight::SourceDegree, Weight::TargetDegree, Weight::SourceRank];
        relations
            .iter()
            .flat_map(|&relation| weights.iter().map(move |&weight| TransportFunction { relation, weight }))
            .collect()
    }

    fn related(&self, t: &OrderedTree, u: VertexId) -> Option<Vec<VertexId>> {
        let need = |v: VertexId| if t.is_interior(v) { Some(()) } else { None };
        need(u)?;
        Some(match self.relation {
            Relation::Identity => vec![u],
            Relation::Parent => t.parent(u).into_iter().collect(),
            Relation::Grandparent => match t.parent(u) {
                Some(p) => {
                    need(p)?;
                    t.parent(p).into_iter().collect()
                }
                None => vec![],
            },
            Relation::Sibling | Relation::ElderSibling => match t.parent(u) {
                Some(p) => {
                    need(p)?;
                    let r = t.rank(u).unwrap();
                    let kids = t.children(p);
                    let upto = if self.relation == Relation::Sibling { kids.len() } else { r };
                    kids[..upto].iter().copied().filter(|&v| v != u).collect()
                }
                None => vec![],
            },
            Relation::EldestChild => t.children(u).first().copied().into_iter().collect(),
        })
    }

    /// Vertices `u` with `v` related to `u`.
    fn related_to(&self, t: &OrderedTree, v: VertexId) -> Option<Vec<VertexId>> {
        let need = |w: VertexId| if t.is_interior(w) { Some(()) } else { None };
        need(v)?;
        Some(match self.relation {
            Relation::Identity => vec![v],
            Relation::Parent => t.children(v).to_vec(),
            Relation::Grandparent => {
                let mut out = Vec::new();
                for &c in t.children(v) {
                    need(c)?;
                    out.extend_from_slice(t.children(c));
                }
                out
            }
            Relation::Sibling | Relation::ElderSibling => match t.parent(v) {
                Some(p) => {
                    need(p)?;
                    let r = t.rank(v).unwrap();
                    let kids = t.children(p);
                    let from = if self.relation == Relation::Sibling { 0 } else { r + 1 };
                    kids[from..].iter().copied().filter(|&u| u != v).collect()
                }
                None => vec![],
            },
            Relation::EldestChild => match t.parent(v) {
                Some(p) if t.rank(v) == Some(0) => vec![p],
                _ => vec![],
            },
        })
    }

    fn weight_of(&self, t: &OrderedTree, u: VertexId, v: VertexId) -> Option<f64> {
        let interior = |w: VertexId| if t.is_interior(w) { Some(()) } else { None };
        Some(match self.weight {
            Weight::One => 1.0,
            Weight::SourceDegree => {
                interior(u)?;
                t.d1(u) as f64
            }
            Weight::TargetDegree => {
                interior(v)?;
                t.d1(v) as f64
            }
            Weight::SourceRank => match t.parent(u) {
                Some(p) => {
                    interior(p)?;
                    t.rank(u).unwrap() as f64 + 1.0
                }
                None => 0.0,
            },
        })
    }

    /// Mass sent `Σ_v h(T, o, v)` and received `Σ_u h(T, u, o)` by `o`, or `None` when the
    /// tree does not resolve them.
    pub fn evaluate(&self, t: &OrderedTree, o: VertexId) -> Option<(f64, f64)> {
        let mut out = 0.0;
        for v in self.related(t, o)? {
            out += self.weight_of(t, o, v)?;
        }
        let mut inn = 0.0;
        for u in self.related_to(t, o)? {
            inn += self.weight_of(t, u, o)?;
        }
        Some((out, inn))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MtpReport {
    pub function: String,
    pub n: usize,
    pub dropped: usize,
    pub mean_out: f64,
    pub mean_in: f64,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub z_score: f64,
}

fn mtp_report(function: String, pairs: &[Option<(f64, f64)>]) -> MtpReport {
    let kept: Vec<(f64, f64)> = pairs.iter().flatten().copied().collect();
    let n = kept.len();
    let nf = n.max(1) as f64;
    let mean_out = kept.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_in = kept.iter().map(|p| p.1).sum::<f64>() / nf;
    let mean_diff = mean_out - mean_in;
    let var = kept.iter().map(|p| (p.0 - p.1 - mean_diff).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    let sd_diff = var.sqrt();
    let z_score = if sd_diff > 0.0 {
        mean_diff / (sd_diff / nf.sqrt())
    } else if mean_diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(mean_diff)
    };
    MtpReport { function, n, dropped: pairs.len() - n, mean_out, mean_in, mean_diff, sd_diff, z_score }
}

/// Mass-transport check of every function in `hs` on `n` shared samples.
pub fn mtp_suite(sampler: &Sampler, hs: &[TransportFunction], n: usize, seed: u64) -> Vec<MtpReport> {
    let rows: Vec<Vec<Option<(f64, f64)>>> = (0..n as u64)
        .into_par_iter()
        .map(|idx| {
            let s = sampler(derive_seed(seed, idx));
            let o = s.tree.root();
            hs.iter().map(|h| h.evaluate(&s.tree, o)).collect()
        })
        .collect();
    hs.iter()
        .enumerate()
        .map(|(k, h)| {
            let column: Vec<Option<(f64, f64)>> = rows.iter().map(|r| r[k]).collect();
            mtp_report(h.id(), &column)
        })
        .collect()
}

pub fn mtp_check(sampler: &Sampler, h: TransportFunction, n: usize, seed: u64) -> MtpReport {
    mtp_suite(sampler, &[h], n, seed).remove(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub dropped: usize,
    pub tv: f64,
    pub p_value: f64,
    pub permutations: usize,
}

fn joint_vs_product_tv(xs: &[u32], ys: &[u32], nx: usize, ny: usize) -> f64 {
    let n = xs.len() as f64;
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut mx = vec![0u64; nx];
    let mut my = vec![0u64; ny];
    for (&x, &y) in xs.iter().zip(ys) {
        *joint.entry((x, y)).or_insert(0) += 1;
        mx[x as usize] += 1;
        my[y as usize] += 1;
    }
    let mut sum = 0.0;
    for (x, &cx) in mx.iter().enumerate() {
        for (y, &cy) in my.iter().enumerate() {
            let p = joint.get(&(x as u32, y as u32)).map_or(0.0, |&c| c as f64 / n);
            sum += (p - (cx as f64 / n) * (cy as f64 / n)).abs();
        }
    }
    0.5 * sum
}

/// TV between the joint law of `(d, key)` and the product of its marginals, with a
/// permutation p-value.
pub fn independence_check(
    pair_sampler: &(dyn Fn(u64) -> Option<(usize, BallKey)> + Sync),
    n: usize,
    seed: u64,
    permutations: usize,
) -> IndependenceReport {
    let pairs: Vec<Option<(usize, BallKey)>> =
        (0..n as u64).into_par_iter().map(|idx| pair_sampler(derive_seed(seed, idx))).collect();
    let kept: Vec<(usize, BallKey)> = pairs.iter().flatten().cloned().collect();
    let mut dx: BTreeMap<usize, u32> = BTreeMap::new();
    let mut dy: BTreeMap<BallKey, u32> = BTreeMap::new();
    for (d, k) in &kept {
        let next = dx.len() as u32;
        dx.entry(*d).or_insert(next);
        let next = dy.len() as u32;
        dy.entry(k.clone()).or_insert(next);
    }
    let mut xs: Vec<u32> = kept.iter().map(|(d, _)| dx[d]).collect();
    let ys: Vec<u32> = kept.iter().map(|(_, k)| dy[k]).collect();
    let tv = if kept.is_empty() { 0.0 } else { joint_vs_product_tv(&xs, &ys, dx.len(), dy.len()) };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    let mut at_least = 0;
    for _ in 0..permutations {
        xs.shuffle(&mut rng);
        if joint_vs_product_tv(&xs, &ys, dx.len(), dy.len()) >= tv {
            at_least += 1;
        }
    }
    IndependenceReport {
        n: kept.len(),
        dropped: n - kept.len(),
        tv,
        p_value: (1 + at_least) as f64 / (1 + permutations) as f64,
        permutations,
    }
}

/// Scalar statistics of a rooted sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    D1Root,
    HasParent,
    /// Indicator that the root has at least this many ancestors.
    AncestorsAtLeast(usize),
    SubtreeSize,
}

impl Statistic {
    pub fn eval(&self, s: &Sample) -> Option<f64> {
        let t = &s.tree;
        let o = t.root();
        let interior = t.is_interior(o);
        match self {
            Statistic::D1Root => interior.then(|| t.d1(o) as f64),
            Statistic::HasParent => interior.then(|| t.parent(o).is_some() as u8 as f64),
            Statistic::AncestorsAtLeast(k) => {
                let chain = t.ancestors(o);
                if chain.len() > *k {
                    return Some(1.0);
                }
                chain.iter().all(|&v| t.is_interior(v)).then_some(0.0)
            }
            Statistic::SubtreeSize => {
                let sub = t.subtree(o);
                sub.iter().all(|&v| t.is_interior(v)).then_some(sub.len() as f64)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarEstimate {
    pub n: usize,
    pub dropped: usize,
    pub mean: f64,
    pub sd: f64,
    /// Half-width of the normal 95% interval.
    pub ci95: f64,
}

impl ScalarEstimate {
    pub fn from_values(values: &[f64], dropped: usize) -> Self {
        let n = values.len();
        let nf = n.max(1) as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
        let sd = var.sqrt();
        ScalarEstimate { n, dropped, mean, sd, ci95: 1.96 * sd / nf.sqrt() }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        self.sd / (self.n.max(1) as f64).sqrt()
    }
}

pub fn scalar_estimate(sampler: &Sampler, statistic: Statistic, n: usize, seed: u64) -> ScalarEstimate {
    let values: Vec<Option<f64>> =
        (0..n as u64).into_par_iter().map(|idx| statistic.eval(&sampler(derive_seed(seed, idx)))).collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    ScalarEstimate::from_values(&kept, n - kept.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{sample_gw, sample_tgwt, OffspringLaw, SampleMeta};
    use crate::trees::parse;

    fn law(atoms: &[(usize, f64)]) -> OffspringLaw {
        OffspringLaw::new(atoms.to_vec()).unwrap()
    }

    fn fixed(text: &'static str) -> impl Fn(u64) -> Sample + Sync {
        move |seed| Sample { tree: parse(text).unwrap(), meta: SampleMeta { seed, ..Default::default() } }
    }

    #[test]
    fn point_mass_law() {
        let l = empirical_local_law(&fixed("[]"), 2, 100, 1);
        assert_eq!(l.counts.len(), 1);
        assert_eq!(l.total, 100);
        assert_eq!(tv_distance(&l, &l).unwrap(), 0.0);
        let other = empirical_local_law(&fixed("[()]"), 2, 10, 1);
        assert_eq!(tv_distance(&l, &other).unwrap(), 1.0);
        assert!(tv_distance(&l, &empirical_local_law(&fixed("[]"), 1, 10, 1)).is_err());
    }

    #[test]
    fn law_is_thread_independent() {
        let pi = law(&[(0, 0.5), (1, 0.25), (2, 0.25)]);
        let sampler = |s: u64| sample_gw(&pi, s, 10_000);
        let a = empirical_local_law(&sampler, 2, 2000, 9);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| empirical_local_law(&sampler, 2, 2000, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn tv_triangle() {
        let mk = |p: &[(usize, f64)], seed| {
            let pi = law(p);
            empirical_local_law(&move |s: u64| sample_gw(&pi, s, 1000), 1, 500, seed)
        };
        let a = mk(&[(0, 0.5), (1, 0.5)], 1);
        let b = mk(&[(0, 0.3), (2, 0.7)], 2);
        let c = mk(&[(1, 0.5), (3, 0.5)], 3);
        let (ab, bc, ac) = (tv_distance(&a, &b).unwrap(), tv_distance(&b, &c).unwrap(), tv_distance(&a, &c).unwrap());
        assert_eq!(ab, tv_distance(&b, &a).unwrap());
        assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn identity_transport_is_exact() {
        let pi = law(&[(0, 0.5), (1, 0.5)]);
        let h = TransportFunction { relation: Relation::Identity, weight: Weight::SourceDegree };
        let r = mtp_check(&|s: u64| sample_tgwt(&pi, s, 1000).unwrap(), h, 500, 4);
        assert_eq!(r.mean_diff, 0.0);
        assert_eq!(r.z_score, 0.0);
    }

    #[test]
    fn gw_root_fails_parent_transport() {
        let pi = law(&[(0, 0.5), (1, 0.5)]);
        let h = TransportFunction { relation: Relation::Parent, weight: Weight::One };
        let r = mtp_check(&|s: u64| sample_gw(&pi, s, 1000), h, 2000, 4);
        assert_eq!(r.mean_out, 0.0);
        assert!(r.z_score < -10.0);
    }

    #[test]
    fn transport_weights_on_a_small_tree() {
        let t = parse("(([],(),()))").unwrap();
        let o = t.root();
        let sib = TransportFunction { relation: Relation::Sibling, weight: Weight::SourceRank };
        assert_eq!(sib.evaluate(&t, o), Some((2.0, 5.0)));
        let elder = TransportFunction { relation: Relation::ElderSibling, weight: Weight::One };
        assert_eq!(elder.evaluate(&t, o), Some((0.0, 2.0)));
        let gp = TransportFunction { relation: Relation::Grandparent, weight: Weight::TargetDegree };
        assert_eq!(gp.evaluate(&t, o), Some((1.0, 0.0)));
        assert_eq!(TransportFunction::suite().len(), 20);
    }

    #[test]
    fn constructed_dependence_is_detected() {
        let pair = |s: u64| {
            let d = (s % 3) as usize;
            Some((d, BallKey(format!("k{d}"))))
        };
        let r = independence_check(&pair, 3000, 1, 200);
        assert!(r.p_value < 0.01);
        let indep = |s: u64| Some(((s % 3) as usize, BallKey(format!("k{}", (s >> 20) % 2))));
        let r = independence_check(&indep, 3000, 1, 50);
        assert!(r.tv < 0.05);
    }

    #[test]
    fn scalar_examples() {
        let zero = law(&[(0, 1.0)]);
        let e = scalar_estimate(&|s: u64| sample_gw(&zero, s, 10), Statistic::D1Root, 100, 0);
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.ci95, 0.0);
    }
}
