//! Increment laws and lazily extended two-sided increment windows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recorder::CensorReason;

pub const DEFAULT_CHUNK: usize = 4096;
pub const DEFAULT_MAX_EXTENT: i64 = 1 << 20;
const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LawKind {
    SkipFree,
    GeneralInteger,
}

/// Finite-support law on the integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub struct IncrementLaw {
    atoms: Vec<(i64, f64)>,
    kind: LawKind,
    cumulative: Vec<f64>,
    mean: f64,
    theta_up: Option<f64>,
    theta_down: Option<f64>,
}

/// Either `{"atoms": [[v, p], ...], "kind": ...}` or a bare atom list.
#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LawSpec {
    Full {
        atoms: Vec<(i64, f64)>,
        #[serde(default)]
        kind: Option<LawKind>,
    },
    Bare(Vec<(i64, f64)>),
}

impl TryFrom<LawSpec> for IncrementLaw {
    type Error = Error;

    fn try_from(spec: LawSpec) -> Result<Self> {
        match spec {
            LawSpec::Full { atoms, kind } => Self::build(atoms, kind),
            LawSpec::Bare(atoms) => Self::build(atoms, None),
        }
    }
}

impl From<IncrementLaw> for LawSpec {
    fn from(law: IncrementLaw) -> Self {
        LawSpec::Full { atoms: law.atoms, kind: Some(law.kind) }
    }
}

impl IncrementLaw {
    /// Builds a law from `(value, probability)` atoms. Zero-probability atoms are dropped.
    /// The kind is `SkipFree` when every supported value is at least −1.
    pub fn new(atoms: Vec<(i64, f64)>) -> Result<Self> {
        Self::build(atoms, None)
    }

    pub fn with_kind(atoms: Vec<(i64, f64)>, kind: LawKind) -> Result<Self> {
        Self::build(atoms, Some(kind))
    }

    fn build(mut atoms: Vec<(i64, f64)>, kind: Option<LawKind>) -> Result<Self> {
        if atoms.iter().any(|&(_, p)| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidLaw("probabilities must be finite and non-negative".into()));
        }
        atoms.sort_by_key(|&(v, _)| v);
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidLaw("duplicate atom values".into()));
        }
        let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
        }
        atoms.retain(|&(_, p)| p > 0.0);
        let skip_free = atoms[0].0 >= -1;
        let kind = match kind {
            Some(LawKind::SkipFree) if !skip_free => {
                return Err(Error::InvalidLaw("skip-free law has a value below -1".into()))
            }
            Some(k) => k,
            None if skip_free => LawKind::SkipFree,
            None => LawKind::GeneralInteger,
        };
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        let mean = atoms.iter().map(|&(v, p)| v as f64 * p).sum();
        let mut law = IncrementLaw {
            atoms,
            kind,
            cumulative,
            mean,
            theta_up: None,
            theta_down: None,
        };
        law.theta_up = law.adjustment_coefficient(1.0);
        law.theta_down = law.adjustment_coefficient(-1.0);
        Ok(law)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({ "atoms": self.atoms, "kind": self.kind })
    }

    pub fn atoms(&self) -> &[(i64, f64)] {
        &self.atoms
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn is_skip_free(&self) -> bool {
        self.kind == LawKind::SkipFree
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, p)| (v as f64 - self.mean).powi(2) * p)
            .sum()
    }

    pub fn prob(&self, value: i64) -> f64 {
        self.atoms
            .binary_search_by_key(&value, |&(v, _)| v)
            .map(|k| self.atoms[k].1)
            .unwrap_or(0.0)
    }

    pub fn min_value(&self) -> i64 {
        self.atoms[0].0
    }

    pub fn max_value(&self) -> i64 {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[k.min(self.atoms.len() - 1)].0
    }

    /// Positive root of `E[exp(sign * theta * X)] = 1`, when the walk with increments
    /// `sign * X` has negative drift. `Some(INFINITY)` when `sign * X` never increases.
    fn adjustment_coefficient(&self, sign: f64) -> Option<f64> {
        let drift = sign * self.mean;
        if drift >= 0.0 {
            return None;
        }
        if self.atoms.iter().all(|&(v, _)| sign * v as f64 <= 0.0) {
            return Some(f64::INFINITY);
        }
        let phi = |t: f64| -> f64 {
            self.atoms
                .iter()
                .map(|&(v, p)| p * (sign * t * v as f64).exp())
                .sum()
        };
        let mut hi = 1.0;
        while phi(hi) < 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

pub fn mean_of(law: &IncrementLaw) -> f64 {
    law.mean()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueChainParams {
    pub lambda: f64,
    pub mu: f64,
}

impl QueueChainParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let p = QueueChainParams { lambda, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.mu > 0.0 && self.lambda < self.mu) {
            return Err(Error::InvalidLaw(format!(
                "queue needs 0 < lambda < mu, got lambda={} mu={}",
                self.lambda, self.mu
            )));
        }
        Ok(())
    }

    pub fn up_prob(&self) -> f64 {
        self.lambda / (self.lambda + self.mu)
    }

    /// Stationary law of the embedded jump chain at state `n`.
    pub fn stationary(&self, n: u64) -> f64 {
        let q = 1.0 - self.up_prob();
        let rho = self.lambda / self.mu;
        let eta0 = 1.0 / (1.0 + 1.0 / (q * (1.0 - rho)));
        if n == 0 {
            eta0
        } else {
            eta0 * rho.powi(n as i32 - 1) / q
        }
    }

    fn step<R: Rng>(&self, n: i64, rng: &mut R) -> i64 {
        if n == 0 || rng.random::<f64>() < self.up_prob() {
            n + 1
        } else {
            n - 1
        }
    }

    fn draw_stationary<R: Rng>(&self, rng: &mut R) -> i64 {
        if rng.random::<f64>() < self.stationary(0) {
            return 0;
        }
        let rho = self.lambda / self.mu;
        let mut n = 1;
        while rng.random::<f64>() < rho {
            n += 1;
        }
        n
    }
}

/// Answer of a generator-level certificate about the unexplored part of a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Certain,
    Impossible,
    Unknown,
}

#[derive(Clone, Debug)]
enum Generator {
    Iid {
        law: IncrementLaw,
        right: ChaCha8Rng,
        left: ChaCha8Rng,
    },
    Queue {
        params: QueueChainParams,
        right: ChaCha8Rng,
        left: ChaCha8Rng,
        n0: i64,
        n_lo: i64,
        n_hi: i64,
    },
    Fixed {
        skip_free: bool,
    },
    Padded {
        pad: i64,
        data_lo: i64,
        data_hi: i64,
        skip_free: bool,
    },
    Periodic {
        block: Vec<i64>,
        skip_free: bool,
    },
}

/// Two-sided window of increments with prefix sums `S_n`, `S_0 = 0`.
#[derive(Clone, Debug)]
pub struct TrajectoryWindow {
    generator: Generator,
    left: Vec<i64>,
    right: Vec<i64>,
    max_extent: i64,
    chunk: usize,
    certificate_eps: Option<f64>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl TrajectoryWindow {
    fn with_generator(generator: Generator) -> Self {
        TrajectoryWindow {
            generator,
            left: vec![0],
            right: vec![0],
            max_extent: DEFAULT_MAX_EXTENT,
            chunk: DEFAULT_CHUNK,
            certificate_eps: None,
        }
    }

    pub fn iid(law: &IncrementLaw, seed: u64) -> Self {
        Self::with_generator(Generator::Iid {
            law: law.clone(),
            right: stream_rng(seed, 1),
            left: stream_rng(seed, 2),
        })
    }

    pub fn queue(params: QueueChainParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let n0 = params.draw_stationary(&mut stream_rng(seed, 3));
        Ok(Self::with_generator(Generator::Queue {
            params,
            right: stream_rng(seed, 1),
            left: stream_rng(seed, 2),
            n0,
            n_lo: n0,
            n_hi: n0,
        }))
    }

    /// Deterministic window with `xs[k] = x_{lo + k}`; nothing exists outside it.
    pub fn fixed(lo: i64, xs: &[i64]) -> Result<Self> {
        let hi = lo + xs.len() as i64;
        if lo > 0 || hi < 0 {
            return Err(Error::OutOfWindow { index: 0, lo, hi });
        }
        let mut w = Self::with_generator(Generator::Fixed {
            skip_free: xs.iter().all(|&x| x >= -1),
        });
        for k in (0..(-lo) as usize).rev() {
            let s = w.left[w.left.len() - 1] - xs[k];
            w.left.push(s);
        }
        for &x in &xs[(-lo) as usize..] {
            let s = w.right[w.right.len() - 1] + x;
            w.right.push(s);
        }
        Ok(w)
    }

    /// Deterministic window with `xs[k] = x_{lo + k}` and `x_n = pad` outside it.
    pub fn padded(lo: i64, xs: &[i64], pad: i64) -> Result<Self> {
        let mut w = Self::fixed(lo, xs)?;
        w.generator = Generator::Padded {
            pad,
            data_lo: lo,
            data_hi: lo + xs.len() as i64,
            skip_free: pad >= -1 && xs.iter().all(|&x| x >= -1),
        };
        Ok(w)
    }

    /// Bi-infinite deterministic window with `x_n = block[n mod block.len()]`.
    pub fn periodic(block: Vec<i64>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::InvalidLaw("empty periodic block".into()));
        }
        let skip_free = block.iter().all(|&x| x >= -1);
        Ok(Self::with_generator(Generator::Periodic { block, skip_free }))
    }

    pub fn with_max_extent(mut self, max_extent: i64) -> Self {
        self.max_extent = max_extent;
        self
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }

    /// Enables probabilistic certificates: a tail event whose probability is bounded by
    /// `eps` is treated as impossible. Exact certificates are always active.
    pub fn with_certificate_eps(mut self, eps: Option<f64>) -> Self {
        self.certificate_eps = eps;
        self
    }

    pub fn certificate_eps(&self) -> Option<f64> {
        self.certificate_eps
    }

    pub fn lo(&self) -> i64 {
        -(self.left.len() as i64 - 1)
    }

    pub fn hi(&self) -> i64 {
        self.right.len() as i64 - 1
    }

    pub fn is_skip_free(&self) -> bool {
        match &self.generator {
            Generator::Iid { law, .. } => law.is_skip_free(),
            Generator::Queue { .. } => true,
            Generator::Fixed { skip_free }
            | Generator::Padded { skip_free, .. }
            | Generator::Periodic { skip_free, .. } => *skip_free,
        }
    }

    pub fn law(&self) -> Option<&IncrementLaw> {
        match &self.generator {
            Generator::Iid { law, .. } => Some(law),
            _ => None,
        }
    }

    /// Queue length `N_n` for queue-driven windows.
    pub fn queue_length(&mut self, n: i64) -> Option<i64> {
        let s = self.s(n).ok()?;
        match &self.generator {
            Generator::Queue { n0, .. } => Some(n0 - s),
            _ => None,
        }
    }

    /// Prefix sum `S_n`, extending the window when needed.
    #[inline]
    pub fn s(&mut self, n: i64) -> std::result::Result<i64, CensorReason> {
        if n >= 0 {
            let k = n as usize;
            if k >= self.right.len() {
                self.extend_right(n)?;
            }
            Ok(self.right[k])
        } else {
            let k = (-n) as usize;
            if k >= self.left.len() {
                self.extend_left(n)?;
            }
            Ok(self.left[k])
        }
    }

    /// Increment `x_n = S_{n+1} - S_n`, extending the window when needed.
    pub fn x(&mut self, n: i64) -> std::result::Result<i64, CensorReason> {
        Ok(self.s(n + 1)? - self.s(n)?)
    }

    /// `S_n` if already inside the window.
    pub fn prefix(&self, n: i64) -> Option<i64> {
        if n >= 0 {
            self.right.get(n as usize).copied()
        } else {
            self.left.get((-n) as usize).copied()
        }
    }

    /// `S_k - S_j` for `lo <= j <= k <= hi`, without extending.
    pub fn partial_sum(&self, j: i64, k: i64) -> Result<i64> {
        let (lo, hi) = (self.lo(), self.hi());
        for idx in [j, k] {
            if idx < lo || idx > hi {
                return Err(Error::OutOfWindow { index: idx, lo, hi });
            }
        }
        if j > k {
            return Err(Error::InvalidArgument(format!("partial_sum needs j <= k, got {j} > {k}")));
        }
        Ok(self.prefix(k).unwrap() - self.prefix(j).unwrap())
    }

    /// Increments currently in the window, `x_lo .. x_{hi-1}`.
    pub fn increments(&self) -> Vec<i64> {
        (self.lo()..self.hi())
            .map(|n| self.prefix(n + 1).unwrap() - self.prefix(n).unwrap())
            .collect()
    }

    /// Grows the window until it covers `[lo, hi]`.
    pub fn ensure(&mut self, lo: i64, hi: i64) -> std::result::Result<(), CensorReason> {
        self.s(lo)?;
        self.s(hi)?;
        Ok(())
    }

    fn extend_right(&mut self, n: i64) -> std::result::Result<(), CensorReason> {
        if n > self.max_extent {
            return Err(CensorReason::WindowBudget);
        }
        let target = ((n as usize + 1).max(self.right.len() + self.chunk)).min(self.max_extent as usize + 1);
        match &mut self.generator {
            Generator::Fixed { .. } => return Err(CensorReason::WindowBudget),
            Generator::Padded { pad, .. } => {
                let mut s = self.right[self.right.len() - 1];
                while self.right.len() < target {
                    s += *pad;
                    self.right.push(s);
                }
            }
            Generator::Iid { law, right, .. } => {
                let mut s = self.right[self.right.len() - 1];
                self.right.reserve(target - self.right.len());
                while self.right.len() < target {
                    s += law.sample(right);
                    self.right.push(s);
                }
            }
            Generator::Queue { params, right, n_hi, .. } => {
                let mut s = self.right[self.right.len() - 1];
                while self.right.len() < target {
                    let next = params.step(*n_hi, right);
                    s += *n_hi - next;
                    *n_hi = next;
                    self.right.push(s);
                }
            }
            Generator::Periodic { block, .. } => {
                let p = block.len() as i64;
                let mut s = self.right[self.right.len() - 1];
                while self.right.len() < target {
                    let m = self.right.len() as i64 - 1;
                    s += block[m.rem_euclid(p) as usize];
                    self.right.push(s);
                }
            }
        }
        Ok(())
    }

    fn extend_left(&mut self, n: i64) -> std::result::Result<(), CensorReason> {
        if -n > self.max_extent {
            return Err(CensorReason::WindowBudget);
        }
        let need = (-n) as usize + 1;
        let target = need.max(self.left.len() + self.chunk).min(self.max_extent as usize + 1);
        match &mut self.generator {
            Generator::Fixed { .. } => return Err(CensorReason::WindowBudget),
            Generator::Padded { pad, .. } => {
                let mut s = self.left[self.left.len() - 1];
                while self.left.len() < target {
                    s -= *pad;
                    self.left.push(s);
                }
            }
            Generator::Iid { law, left, .. } => {
                let mut s = self.left[self.left.len() - 1];
                self.left.reserve(target - self.left.len());
                while self.left.len() < target {
                    s -= law.sample(left);
                    self.left.push(s);
                }
            }
            Generator::Queue { params, left, n_lo, .. } => {
                let mut s = self.left[self.left.len() - 1];
                while self.left.len() < target {
                    let prev = params.step(*n_lo, left);
                    s -= prev - *n_lo;
                    *n_lo = prev;
                    self.left.push(s);
                }
            }
            Generator::Periodic { block, .. } => {
                let p = block.len() as i64;
                let mut s = self.left[self.left.len() - 1];
                while self.left.len() < target {
                    let m = -(self.left.len() as i64);
                    s -= block[m.rem_euclid(p) as usize];
                    self.left.push(s);
                }
            }
        }
        Ok(())
    }

    fn lundberg(&self, theta: Option<f64>, gap: i64) -> Tail {
        match (theta, self.certificate_eps) {
            (Some(t), _) if t.is_infinite() => Tail::Impossible,
            (Some(t), Some(eps)) if (-t * gap as f64).exp() <= eps => Tail::Impossible,
            _ => Tail::Unknown,
        }
    }

    fn block_sum(block: &[i64]) -> i64 {
        block.iter().sum()
    }

    /// Will some `S_m >= level` occur at an unexplored `m > n`? `steps` positions after the
    /// reference point have been scanned up to `n`, all strictly below `level`.
    pub fn right_reach_above(&self, level: i64, n: i64, steps: i64) -> Tail {
        let current = self.prefix(n).expect("certificate position inside the window");
        match &self.generator {
            Generator::Iid { law, .. } => {
                if law.max_value() <= 0 {
                    Tail::Impossible
                } else if law.mean() >= 0.0 {
                    Tail::Certain
                } else {
                    self.lundberg(law.theta_up, level - current)
                }
            }
            Generator::Queue { n0, .. } => {
                if level <= *n0 {
                    Tail::Certain
                } else {
                    Tail::Impossible
                }
            }
            Generator::Padded { pad, data_hi, .. } => match (n >= *data_hi, *pad > 0) {
                (false, _) => Tail::Unknown,
                (true, true) => Tail::Certain,
                (true, false) if level > current => Tail::Impossible,
                (true, false) => Tail::Certain,
            },
            Generator::Fixed { .. } => Tail::Unknown,
            Generator::Periodic { block, .. } => {
                if Self::block_sum(block) > 0 {
                    Tail::Certain
                } else if steps >= block.len() as i64 {
                    Tail::Impossible
                } else {
                    Tail::Unknown
                }
            }
        }
    }

    /// Will some `S_m <= level` occur at an unexplored `m > n`?
    pub fn right_reach_below(&self, level: i64, n: i64, steps: i64) -> Tail {
        let current = self.prefix(n).expect("certificate position inside the window");
        match &self.generator {
            Generator::Iid { law, .. } => {
                if law.min_value() >= 0 {
                    Tail::Impossible
                } else if law.mean() <= 0.0 {
                    Tail::Certain
                } else {
                    self.lundberg(law.theta_down, current - level)
                }
            }
            Generator::Queue { .. } => Tail::Certain,
            Generator::Padded { pad, data_hi, .. } => match (n >= *data_hi, *pad < 0) {
                (false, _) => Tail::Unknown,
                (true, true) => Tail::Certain,
                (true, false) if level < current => Tail::Impossible,
                (true, false) => Tail::Certain,
            },
            Generator::Fixed { .. } => Tail::Unknown,
            Generator::Periodic { block, .. } => {
                if Self::block_sum(block) < 0 {
                    Tail::Certain
                } else if steps >= block.len() as i64 {
                    Tail::Impossible
                } else {
                    Tail::Unknown
                }
            }
        }
    }

    /// Will some `S_j >= level` occur at an unexplored `j < n` (scanning leftwards)?
    pub fn left_reach_above(&self, level: i64, n: i64, steps: i64) -> Tail {
        let current = self.prefix(n).expect("certificate position inside the window");
        match &self.generator {
            Generator::Iid { law, .. } => {
                if law.min_value() >= 0 {
                    Tail::Impossible
                } else if law.mean() <= 0.0 {
                    Tail::Certain
                } else {
                    self.lundberg(law.theta_down, level - current)
                }
            }
            Generator::Queue { n0, .. } => {
                if level <= *n0 {
                    Tail::Certain
                } else {
                    Tail::Impossible
                }
            }
            Generator::Padded { pad, data_lo, .. } => match (n <= *data_lo, *pad < 0) {
                (false, _) => Tail::Unknown,
                (true, true) => Tail::Certain,
                (true, false) if level > current => Tail::Impossible,
                (true, false) => Tail::Certain,
            },
            Generator::Fixed { .. } => Tail::Unknown,
            Generator::Periodic { block, .. } => {
                if Self::block_sum(block) < 0 {
                    Tail::Certain
                } else if steps >= block.len() as i64 {
                    Tail::Impossible
                } else {
                    Tail::Unknown
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(atoms: &[(i64, f64)]) -> IncrementLaw {
        IncrementLaw::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn means() {
        assert_eq!(mean_of(&law(&[(-1, 0.5), (1, 0.5)])), 0.0);
        assert_eq!(mean_of(&law(&[(-1, 1.0)])), -1.0);
        assert_eq!(mean_of(&law(&[(-1, 0.25), (1, 0.75)])), 0.5);
    }

    #[test]
    fn law_validation() {
        assert!(IncrementLaw::new(vec![(-1, 0.5), (1, 0.4)]).is_err());
        assert!(IncrementLaw::new(vec![(-1, 0.5), (-1, 0.5)]).is_err());
        assert!(IncrementLaw::new(vec![(-1, -0.5), (1, 1.5)]).is_err());
        assert_eq!(law(&[(-2, 0.5), (3, 0.5)]).kind(), LawKind::GeneralInteger);
        assert!(IncrementLaw::with_kind(vec![(-2, 0.5), (3, 0.5)], LawKind::SkipFree).is_err());
        let parsed = IncrementLaw::from_json(r#"{"atoms": [[1, 0.75], [-1, 0.25]]}"#).unwrap();
        assert_eq!(parsed.atoms(), &[(-1, 0.25), (1, 0.75)]);
    }

    #[test]
    fn adjustment_coefficients() {
        // E[e^{θX}] = 1 for {-1: .75, 1: .25} gives e^θ = 3.
        let l = law(&[(-1, 0.75), (1, 0.25)]);
        assert!((l.theta_up.unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(l.theta_down.is_none());
        assert_eq!(law(&[(-1, 1.0)]).theta_up, Some(f64::INFINITY));
    }

    #[test]
    fn seed_determinism_across_extension_orders() {
        let l = law(&[(-1, 0.3), (0, 0.2), (2, 0.5)]);
        let mut a = TrajectoryWindow::iid(&l, 7).with_chunk(3);
        let mut b = TrajectoryWindow::iid(&l, 7).with_chunk(5);
        a.ensure(-50, 0).unwrap();
        a.ensure(0, 70).unwrap();
        b.ensure(0, 70).unwrap();
        b.ensure(-50, 0).unwrap();
        for n in -50..=70 {
            assert_eq!(a.prefix(n), b.prefix(n));
        }
    }

    #[test]
    fn point_mass_window() {
        let mut w = TrajectoryWindow::iid(&law(&[(-1, 1.0)]), 3);
        for n in -100..100 {
            assert_eq!(w.x(n).unwrap(), -1);
        }
    }

    #[test]
    fn fixed_window_partial_sums() {
        let w = TrajectoryWindow::fixed(-3, &[-1, -1, 2]).unwrap();
        assert_eq!(w.partial_sum(-3, 0).unwrap(), 0);
        assert_eq!(w.partial_sum(-2, -2).unwrap(), 0);
        assert_eq!(w.partial_sum(-2, -1).unwrap(), -1);
        assert!(w.partial_sum(-4, 0).is_err());
        assert_eq!(w.increments(), vec![-1, -1, 2]);
    }

    #[test]
    fn fixed_window_censors_outside() {
        let mut w = TrajectoryWindow::fixed(-1, &[1, 1]).unwrap();
        assert!(w.s(1).is_ok());
        assert_eq!(w.s(2), Err(CensorReason::WindowBudget));
        assert_eq!(w.s(-2), Err(CensorReason::WindowBudget));
    }

    #[test]
    fn budget_exhaustion_censors() {
        let mut w = TrajectoryWindow::iid(&law(&[(-1, 0.5), (1, 0.5)]), 1).with_max_extent(100);
        assert!(w.s(100).is_ok());
        assert_eq!(w.s(101), Err(CensorReason::WindowBudget));
        assert_eq!(w.s(-101), Err(CensorReason::WindowBudget));
    }

    #[test]
    fn periodic_window() {
        let mut w = TrajectoryWindow::periodic(vec![1, -1, -1]).unwrap();
        assert_eq!(w.x(0).unwrap(), 1);
        assert_eq!(w.x(-1).unwrap(), -1);
        assert_eq!(w.x(-3).unwrap(), 1);
        assert_eq!(w.s(3).unwrap(), -1);
        assert_eq!(w.s(-3).unwrap(), 1);
    }

    #[test]
    fn queue_window_steps() {
        let params = QueueChainParams::new(1.0, 2.0).unwrap();
        let mut w = TrajectoryWindow::queue(params, 11).unwrap();
        for n in -1000..1000 {
            assert!(matches!(w.x(n).unwrap(), -1 | 1));
            assert!(w.queue_length(n).unwrap() >= 0);
        }
        assert!(QueueChainParams::new(2.0, 1.0).is_err());
    }

    #[test]
    fn queue_stationary_closed_form() {
        let p = QueueChainParams::new(1.0, 2.0).unwrap();
        assert!((p.stationary(0) - 0.25).abs() < 1e-15);
        assert!((p.stationary(1) - 0.375).abs() < 1e-15);
        assert!((p.stationary(3) - 0.375 * 0.25).abs() < 1e-15);
    }
}
