//! Samplers for Galton–Watson trees and their eternal and re-rooted relatives.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::trees::{OrderedTree, VertexFlag, VertexId};

const PROB_TOLERANCE: f64 = 1e-12;

/// Finite-support law on `{0, 1, 2, ...}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringLaw {
    atoms: Vec<(usize, f64)>,
    cumulative: Vec<f64>,
    mean: f64,
}

impl OffspringLaw {
    pub fn new(mut atoms: Vec<(usize, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(_, p)| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidLaw("offspring probabilities must be finite and non-negative".into()));
        }
        atoms.sort_by_key(|a| a.0);
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidLaw("duplicate offspring values".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidLaw(format!("offspring probabilities sum to {total}")));
        }
        atoms.retain(|a| a.1 > 0.0);
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        let mean = atoms.iter().map(|&(k, p)| k as f64 * p).sum();
        Ok(OffspringLaw { atoms, cumulative, mean })
    }

    pub fn point_mass(k: usize) -> Self {
        Self::new(vec![(k, 1.0)]).unwrap()
    }

    pub fn atoms(&self) -> &[(usize, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.atoms
            .binary_search_by_key(&k, |a| a.0)
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.total();
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[k.min(self.atoms.len() - 1)].0
    }
}

impl Serialize for OffspringLaw {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.atoms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OffspringLaw {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let atoms = Vec::<(usize, f64)>::deserialize(d)?;
        OffspringLaw::new(atoms).map_err(serde::de::Error::custom)
    }
}

/// `π̂(k) = k π(k) / m(π)`.
pub fn size_biased(pi: &OffspringLaw) -> Result<OffspringLaw> {
    let m = pi.mean();
    if m <= 0.0 {
        return Err(Error::InvalidLaw("size-biasing needs a positive mean".into()));
    }
    let atoms: Vec<(usize, f64)> = pi.atoms().iter().map(|&(k, p)| (k, k as f64 * p / m)).collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    OffspringLaw::new(atoms.into_iter().map(|(k, p)| (k, p / total)).collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub node_budget: usize,
    pub rejected_count: u64,
    pub overflow_count: u64,
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub tree: OrderedTree,
    pub meta: SampleMeta,
}

/// Deterministic per-index seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Builder<R> {
    t: OrderedTree,
    rng: R,
    budget: usize,
    censored: bool,
}

impl<R: Rng> Builder<R> {
    fn new(rng: R, budget: usize) -> Self {
        Builder { t: OrderedTree::singleton(None), rng, budget, censored: false }
    }

    /// Grows independent `law` offspring below `v`, generation by generation, stopping
    /// `depth` generations below `v` when given.
    fn grow(&mut self, v: VertexId, law: &OffspringLaw, depth: Option<usize>) {
        let mut queue = VecDeque::from([(v, depth)]);
        while let Some((u, left)) = queue.pop_front() {
            if left == Some(0) {
                self.t.set_flag(u, VertexFlag::RadiusBoundary);
                continue;
            }
            if self.t.len() >= self.budget {
                self.t.set_flag(u, VertexFlag::Censored);
                self.censored = true;
                continue;
            }
            let k = law.sample(&mut self.rng);
            for _ in 0..k {
                let c = self.t.add_vertex(None, VertexFlag::Interior);
                self.t.push_child(u, c);
                queue.push_back((c, left.map(|l| l - 1)));
            }
        }
    }

    /// New vertex with `count` children; `existing` takes sibling position `slot` and the
    /// other children are returned.
    fn parent_with(&mut self, existing: VertexId, count: usize, slot: usize) -> (VertexId, Vec<VertexId>) {
        let a = self.t.add_vertex(None, VertexFlag::Interior);
        let mut kids = Vec::with_capacity(count);
        let mut fresh = Vec::with_capacity(count.saturating_sub(1));
        for s in 0..count {
            if s == slot {
                kids.push(existing);
            } else {
                let c = self.t.add_vertex(None, VertexFlag::Interior);
                kids.push(c);
                fresh.push(c);
            }
        }
        self.t.set_children(a, kids);
        (a, fresh)
    }

    fn finish(self, seed: u64) -> Sample {
        Sample {
            meta: SampleMeta {
                seed,
                node_budget: self.budget,
                censored: self.censored || self.t.has_censored(),
                ..Default::default()
            },
            tree: self.t,
        }
    }
}

/// Galton–Watson tree with offspring law `pi`.
pub fn sample_gw(pi: &OffspringLaw, seed: u64, node_budget: usize) -> Sample {
    let mut b = Builder::new(rng_for(seed), node_budget);
    b.grow(0, pi, None);
    b.finish(seed)
}

fn check_subcritical(pi: &OffspringLaw) -> Result<()> {
    if pi.mean() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("needs mean < 1, got {}", pi.mean())))
    }
}

/// Typically re-rooted Galton–Watson tree, built from the root upwards.
pub fn sample_tgwt(pi: &OffspringLaw, seed: u64, node_budget: usize) -> Result<Sample> {
    check_subcritical(pi)?;
    let m = pi.mean();
    let mut b = Builder::new(rng_for(seed), node_budget);
    let mut ancestors = 0;
    while b.rng.random::<f64>() < m {
        ancestors += 1;
    }
    let hat = if ancestors > 0 { Some(size_biased(pi)?) } else { None };
    let mut cur = 0;
    let mut others = vec![0];
    for _ in 0..ancestors {
        let z = hat.as_ref().unwrap().sample(&mut b.rng);
        let slot = b.rng.random_range(0..z);
        let (a, fresh) = b.parent_with(cur, z, slot);
        others.extend(fresh);
        cur = a;
    }
    for v in others {
        b.grow(v, pi, None);
    }
    Ok(b.finish(seed))
}

fn check_critical(pi: &OffspringLaw) -> Result<()> {
    if (pi.mean() - 1.0).abs() > 1e-9 || pi.prob(1) >= 1.0 {
        return Err(Error::InvalidLaw("needs mean 1 and pi(1) < 1".into()));
    }
    Ok(())
}

/// Eternal Galton–Watson tree truncated to the ball of radius `radius` around the root.
pub fn sample_egwt(pi: &OffspringLaw, radius: usize, seed: u64, node_budget: usize) -> Result<Sample> {
    check_critical(pi)?;
    let hat = size_biased(pi)?;
    let mut b = Builder::new(rng_for(seed), node_budget);
    b.grow(0, pi, Some(radius));
    let mut cur = 0;
    for k in 1..=radius {
        if k < radius {
            let z = hat.sample(&mut b.rng);
            let slot = b.rng.random_range(0..z);
            let (a, fresh) = b.parent_with(cur, z, slot);
            for v in fresh {
                b.grow(v, pi, Some(radius - k - 1));
            }
            cur = a;
        } else {
            let (a, _) = b.parent_with(cur, 1, 0);
            b.t.set_flag(a, VertexFlag::RadiusBoundary);
            cur = a;
        }
    }
    Ok(b.finish(seed))
}

/// Adds the bush of spine vertex `v` at distance `d` from the root: `alpha` children that
/// carry `beta` trees, truncated at `radius`.
fn spine_bush<R: Rng>(b: &mut Builder<R>, v: VertexId, alpha: &OffspringLaw, beta: &OffspringLaw, d: usize, radius: usize) {
    let a = alpha.sample(&mut b.rng);
    for _ in 0..a {
        let c = b.t.add_vertex(None, VertexFlag::Interior);
        b.t.push_child(v, c);
        b.grow(c, beta, Some(radius - d - 1));
    }
}

/// Bi-variate eternal Kesten tree with spine `o_n`, `n ∈ [-radius, radius]`.
pub fn sample_ekt(
    alpha: &OffspringLaw,
    beta: &OffspringLaw,
    radius: usize,
    ecs: bool,
    seed: u64,
    node_budget: usize,
) -> Result<Sample> {
    if beta.mean() > 1.0 {
        return Err(Error::InvalidLaw("bush law needs mean <= 1".into()));
    }
    let mut b = Builder::new(rng_for(seed), node_budget);
    b.t.set_spine(0, true);
    // o_n for n = radius, radius-1, ..., -radius
    let mut spine = Vec::with_capacity(2 * radius + 1);
    for n in (-(radius as i64)..=radius as i64).rev() {
        let v = if n == 0 { 0 } else { b.t.add_vertex(None, VertexFlag::Interior) };
        b.t.set_spine(v, true);
        spine.push(v);
    }
    for (idx, &v) in spine.iter().enumerate() {
        let n = radius as i64 - idx as i64;
        let d = n.unsigned_abs() as usize;
        let below = spine.get(idx + 1).copied();
        if d == radius {
            b.t.set_flag(v, VertexFlag::RadiusBoundary);
            if let Some(s) = below {
                b.t.push_child(v, s);
            }
            continue;
        }
        spine_bush(&mut b, v, alpha, beta, d, radius);
        let s = below.expect("spine continues below interior vertices");
        let slot = if ecs { b.t.d1(v) } else { b.rng.random_range(0..=b.t.d1(v)) };
        b.t.insert_child(v, s, slot);
    }
    Ok(b.finish(seed))
}

/// Size-biased draw from `sampler` by rejection, re-rooted at a uniform vertex.
pub fn typical_reroot(sampler: &dyn Fn(u64) -> Sample, seed: u64, size_cap: usize) -> Sample {
    let mut rng = rng_for(seed);
    rng.set_stream(5);
    let mut rejected = 0;
    let mut overflow = 0;
    let mut attempt = 0u64;
    loop {
        let s = sampler(derive_seed(seed, attempt));
        attempt += 1;
        let n = s.tree.len();
        if s.meta.censored || n > size_cap {
            overflow += 1;
            continue;
        }
        if rng.random::<f64>() * (size_cap as f64) < n as f64 {
            let v = rng.random_range(0..n);
            return Sample {
                tree: s.tree.rerooted(v),
                meta: SampleMeta {
                    seed,
                    node_budget: size_cap,
                    rejected_count: rejected,
                    overflow_count: overflow,
                    censored: false,
                },
            };
        }
        rejected += 1;
    }
}

/// Typically re-rooted joining of i.i.d. bushes along a spine in ECS order: the root's
/// bush is size-biased with a uniform root, the other bushes are plain.
pub fn unimodularised_ekt(
    alpha: &OffspringLaw,
    beta: &OffspringLaw,
    radius: usize,
    seed: u64,
    size_cap: usize,
) -> Result<Sample> {
    check_subcritical(beta)?;
    let bush = |s: u64| {
        let mut b = Builder::new(rng_for(s), size_cap + 1);
        spine_bush(&mut b, 0, alpha, beta, 0, usize::MAX);
        b.finish(s)
    };
    let picked = typical_reroot(&bush, seed, size_cap);
    let v = picked.tree.root();
    let dv = picked.tree.depth(v);
    let mut b = Builder::new(rng_for(derive_seed(seed, u64::MAX)), usize::MAX);
    b.t = picked.tree;
    b.t.set_spine(0, true);
    if dv < radius {
        let mut cur = 0;
        for k in 1..=radius - dv {
            let d = dv + k;
            let a = b.t.add_vertex(None, VertexFlag::Interior);
            b.t.set_spine(a, true);
            if d < radius {
                spine_bush(&mut b, a, alpha, beta, d, radius);
            } else {
                b.t.set_flag(a, VertexFlag::RadiusBoundary);
            }
            b.t.push_child(a, cur);
            cur = a;
        }
        cur = 0;
        for k in 1..=radius - dv {
            let d = dv + k;
            let s = b.t.add_vertex(None, VertexFlag::Interior);
            b.t.set_spine(s, true);
            b.t.push_child(cur, s);
            if d < radius {
                spine_bush(&mut b, s, alpha, beta, d, radius);
            } else {
                b.t.set_flag(s, VertexFlag::RadiusBoundary);
            }
            cur = s;
        }
    }
    let tree = b.t.ball(v, radius);
    Ok(Sample {
        tree,
        meta: SampleMeta { seed, node_budget: size_cap, ..picked.meta },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{count_succession_lines, SuccessionLines};

    fn law(atoms: &[(usize, f64)]) -> OffspringLaw {
        OffspringLaw::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn size_biased_examples() {
        assert_eq!(size_biased(&law(&[(0, 0.5), (2, 0.5)])).unwrap().atoms(), &[(2, 1.0)]);
        assert_eq!(size_biased(&law(&[(1, 1.0)])).unwrap().atoms(), &[(1, 1.0)]);
        assert!(size_biased(&law(&[(0, 1.0)])).is_err());
    }

    #[test]
    fn gw_point_mass_zero() {
        let s = sample_gw(&law(&[(0, 1.0)]), 3, 10);
        assert_eq!(s.tree.len(), 1);
        assert!(!s.meta.censored);
    }

    #[test]
    fn gw_budget_censors() {
        let s = sample_gw(&law(&[(2, 1.0)]), 3, 50);
        assert!(s.meta.censored);
        s.tree.validate().unwrap();
    }

    #[test]
    fn determinism() {
        let pi = law(&[(0, 0.5), (1, 0.2), (3, 0.3)]);
        assert_eq!(sample_gw(&pi, 9, 1000), sample_gw(&pi, 9, 1000));
        let crit = law(&[(0, 0.5), (2, 0.5)]);
        assert_eq!(sample_egwt(&crit, 3, 4, 1000).unwrap(), sample_egwt(&crit, 3, 4, 1000).unwrap());
    }

    #[test]
    fn egwt_spine_has_two_children() {
        let pi = law(&[(0, 0.5), (2, 0.5)]);
        for seed in 0..50 {
            let s = sample_egwt(&pi, 4, seed, 100_000).unwrap();
            s.tree.validate().unwrap();
            let anc = s.tree.ancestors(s.tree.root());
            assert_eq!(anc.len(), 5);
            for &a in &anc[1..4] {
                assert_eq!(s.tree.d1(a), 2);
            }
            assert_eq!(s.tree.flag(anc[4]), VertexFlag::RadiusBoundary);
        }
        assert!(sample_egwt(&law(&[(0, 0.5), (1, 0.5)]), 2, 0, 10).is_err());
    }

    #[test]
    fn ekt_bare_path_and_ecs() {
        let s = sample_ekt(&law(&[(0, 1.0)]), &law(&[(0, 1.0)]), 3, true, 1, 1000).unwrap();
        assert_eq!(s.tree.len(), 7);
        assert!(s.tree.vertices().all(|v| s.tree.d1(v) <= 1));
        let alpha = law(&[(0, 0.5), (1, 0.3), (2, 0.2)]);
        let beta = law(&[(0, 0.7), (1, 0.3)]);
        for seed in 0..20 {
            let s = sample_ekt(&alpha, &beta, 3, true, seed, 10_000).unwrap();
            s.tree.validate().unwrap();
            assert_eq!(count_succession_lines(&s.tree), SuccessionLines::One);
        }
    }

    #[test]
    fn tgwt_is_valid() {
        let pi = law(&[(0, 0.6), (1, 0.2), (2, 0.2)]);
        for seed in 0..100 {
            let s = sample_tgwt(&pi, seed, 100_000).unwrap();
            s.tree.validate().unwrap();
            assert!(s.tree.is_fully_resolved());
        }
        assert!(sample_tgwt(&law(&[(0, 0.5), (2, 0.5)]), 0, 10).is_err());
    }

    #[test]
    fn reroot_of_point_mass_is_identity() {
        let single = |s: u64| sample_gw(&law(&[(0, 1.0)]), s, 10);
        let s = typical_reroot(&single, 4, 8);
        assert_eq!(s.tree.len(), 1);
        assert_eq!(s.tree.root(), 0);
    }

    #[test]
    fn unimodular_ekt_without_bushes_is_a_path() {
        let s = unimodularised_ekt(&law(&[(0, 1.0)]), &law(&[(0, 0.5), (1, 0.5)]), 2, 7, 16).unwrap();
        assert_eq!(s.tree.len(), 5);
        s.tree.validate().unwrap();
        assert!(s.tree.is_interior(s.tree.root()));
    }

    #[test]
    fn unimodular_ekt_resolves_inner_ball() {
        let alpha = law(&[(0, 0.75), (1, 0.25)]);
        let beta = law(&[(0, 0.75), (2, 0.25)]);
        for seed in 0..200 {
            let s = unimodularised_ekt(&alpha, &beta, 3, seed, 64).unwrap();
            s.tree.validate().unwrap();
            crate::trees::ball_key(&s.tree, s.tree.root(), 3).unwrap();
            assert_ne!(count_succession_lines(&s.tree), SuccessionLines::Two);
        }
    }
}
