//! Coding a tree by child counts along its succession line, and decoding a sequence
//! through the record graph.
//!
//! Alignment: with `u_0 = o` and `u_k` the `k`-th successor (negative `k` for
//! predecessors), the code is `y_n = d_1(u_{n+1}) - 1`. A window of `n_back`
//! predecessors and `n_fwd` successors therefore covers `y_n` for
//! `n ∈ [-n_back - 1, n_fwd)`:
//!
//! ```text
//! vertex   u_{-2}  u_{-1}  u_0
//! code     y_{-3}  y_{-2}  y_{-1}
//! ```
//!
//! Decoding places `y` on the increments of a walk, extended by `-1` on both sides, and
//! returns the component of 0 in its record graph; the vertex labelled `k` is `u_k`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::increments::TrajectoryWindow;
use crate::recorder::{big_L, children_of, component_ball, record_of, ChildrenMode, Resolution};
use crate::trees::{a_map, b_map, rls_sort, succession_window, OrderedTree, Step, VertexFlag, VertexId};

/// Values outside a decoded window.
pub const PAD: i64 = -1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSequence {
    pub lo: i64,
    pub values: Vec<i64>,
}

impl CodeSequence {
    pub fn new(lo: i64, values: Vec<i64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|&v| v < -1) {
            return Err(Error::InvalidArgument(format!(
                "code value {} at index {} is below -1",
                values[k],
                lo + k as i64
            )));
        }
        Ok(CodeSequence { lo, values })
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<i64> {
        if n < self.lo {
            return None;
        }
        self.values.get((n - self.lo) as usize).copied()
    }

    /// Whitespace-separated integers, optionally preceded by `lo=K`. Without it the last
    /// value sits at index -1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace().peekable();
        let lo = match tokens.peek().and_then(|t| t.strip_prefix("lo=")) {
            Some(v) => {
                let lo = v.parse().map_err(|_| Error::Parse { offset: 0, message: format!("bad lo '{v}'") })?;
                tokens.next();
                Some(lo)
            }
            None => None,
        };
        let mut values = Vec::new();
        for tok in tokens {
            let offset = tok.as_ptr() as usize - text.as_ptr() as usize;
            values.push(
                tok.parse()
                    .map_err(|_| Error::Parse { offset, message: format!("expected an integer, got '{tok}'") })?,
            );
        }
        let lo = lo.unwrap_or(-(values.len() as i64));
        Self::new(lo, values)
    }

    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        format!("lo={}\n{}\n", self.lo, body.join(" "))
    }
}

/// Code of the succession window with `n_back` predecessors and `n_fwd` successors of `o`.
pub fn phi_r(t: &OrderedTree, o: VertexId, n_back: usize, n_fwd: usize) -> Result<CodeSequence> {
    let win = succession_window(t, o, n_back, n_fwd);
    let lo = -(n_back as i64) - 1;
    if win.origin < n_back {
        return Err(Error::CensoredWindow { index: -(win.origin as i64) - 2 });
    }
    let mut values = Vec::with_capacity(win.vertices.len());
    for (pos, &u) in win.vertices.iter().enumerate() {
        if !t.is_interior(u) {
            return Err(Error::CensoredWindow { index: lo + pos as i64 });
        }
        values.push(t.d1(u) as i64 - 1);
    }
    if win.vertices.len() < n_back + n_fwd + 1 {
        return Err(Error::CensoredWindow { index: lo + win.vertices.len() as i64 });
    }
    Ok(CodeSequence { lo, values })
}

/// The longest resolved part of the code around `o`, with the window's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedCode {
    pub code: CodeSequence,
    /// `vertices[k]` is `u_{code.lo + 1 + k}`.
    pub vertices: Vec<VertexId>,
}

pub fn phi_r_resolved(t: &OrderedTree, o: VertexId, max_back: usize, max_fwd: usize) -> ResolvedCode {
    if !t.is_interior(o) {
        return ResolvedCode { code: CodeSequence::default(), vertices: Vec::new() };
    }
    let walk = |step: fn(&OrderedTree, VertexId) -> Step, max: usize| {
        let mut out = Vec::new();
        let mut cur = o;
        while out.len() < max {
            match step(t, cur) {
                Step::Vertex(v) if t.is_interior(v) => {
                    out.push(v);
                    cur = v;
                }
                _ => break,
            }
        }
        out
    };
    let mut vertices = walk(b_map, max_back);
    let n_back = vertices.len();
    vertices.reverse();
    vertices.push(o);
    vertices.extend(walk(a_map, max_fwd));
    let values = vertices.iter().map(|&u| t.d1(u) as i64 - 1).collect();
    ResolvedCode { code: CodeSequence { lo: -(n_back as i64) - 1, values }, vertices }
}

/// Component of 0 in the record graph of `y`, labelled by index.
pub fn psi_r(y: &CodeSequence) -> Result<OrderedTree> {
    let lo = y.lo.min(0);
    let hi = y.hi().max(0);
    let xs: Vec<i64> = (lo..hi).map(|n| y.get(n).unwrap_or(PAD)).collect();
    let mut w = TrajectoryWindow::padded(lo, &xs, PAD)?;
    let budget = 4 * xs.len() + 16;
    Ok(component_ball(&mut w, usize::MAX, budget))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCodeReport {
    pub pass: bool,
    pub length: usize,
    pub total: i64,
    /// Length of the first proper prefix whose sum is not negative.
    pub violating_prefix: Option<usize>,
}

/// Checks that the code of a finite tree in increasing order sums to -1 with every proper
/// prefix negative.
pub fn finite_code_check(t: &OrderedTree) -> Result<FiniteCodeReport> {
    if !t.is_fully_resolved() {
        return Err(Error::NotFinite);
    }
    let order = rls_sort(t, t.top());
    let mut sum = 0i64;
    let mut violating_prefix = None;
    for (k, &v) in order.iter().enumerate() {
        sum += t.d1(v) as i64 - 1;
        if k + 1 < order.len() && sum >= 0 && violating_prefix.is_none() {
            violating_prefix = Some(k + 1);
        }
    }
    Ok(FiniteCodeReport {
        pass: sum == -1 && violating_prefix.is_none(),
        length: order.len(),
        total: sum,
        violating_prefix,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripReport {
    /// Indices where `y_k` was compared with `x_k`.
    pub checked: usize,
    pub mismatches: usize,
    /// Window vertices whose label differs from their position on the succession line.
    pub order_violations: usize,
    pub first_mismatch: Option<i64>,
    pub censored: bool,
}

fn descendant_tree(w: &mut TrajectoryWindow, a: i64, node_budget: usize) -> Option<OrderedTree> {
    let mut t = OrderedTree::singleton(Some(a));
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let label = t.label(v).unwrap();
        let Ok(Resolution::Resolved(kids)) = children_of(w, label, ChildrenMode::Formula) else {
            return None;
        };
        if t.len() + kids.len() > node_budget {
            return None;
        }
        let ids = kids
            .into_iter()
            .map(|c| {
                let id = t.add_vertex(Some(c), VertexFlag::Interior);
                queue.push_back(id);
                id
            })
            .collect();
        t.set_children(v, ids);
    }
    Some(t)
}

/// Codes the component of 0 around the origin and compares with the increments: for a
/// walk whose vertices all have type -1, `y_k = x_k` at every resolved index `k` with
/// `-n <= k < n`.
pub fn roundtrip_check(w: &mut TrajectoryWindow, n: usize, node_budget: usize) -> Result<RoundTripReport> {
    if !w.is_skip_free() {
        return Err(Error::NotSkipFree);
    }
    let censored = RoundTripReport { censored: true, ..Default::default() };
    let n = n as i64;
    let mut a = 0i64;
    let l = loop {
        let l = match big_L(w, a) {
            Resolution::Resolved(l) => l,
            _ => return Ok(censored),
        };
        if a > n && l < -n {
            break l;
        }
        match record_of(w, a) {
            Resolution::Resolved(r) => a = r,
            Resolution::ProvedInfinite => break l,
            Resolution::Censored(_) => return Ok(censored),
        }
    };
    if (a - l + 1) as usize > node_budget {
        return Ok(censored);
    }
    let Some(mut t) = descendant_tree(w, a, node_budget) else {
        return Ok(censored);
    };
    let origin = t.find_label(0).expect("0 descends from its ancestors");
    t.set_root(origin);
    let resolved = phi_r_resolved(&t, origin, (n - 1).max(0) as usize, n as usize);
    let mut report = RoundTripReport::default();
    for (pos, &u) in resolved.vertices.iter().enumerate() {
        let k = resolved.code.lo + pos as i64;
        if t.label(u) != Some(k + 1) {
            report.order_violations += 1;
        }
        if k < -n || k >= n {
            continue;
        }
        let x = w.x(k).map_err(|_| Error::CensoredWindow { index: k })?;
        report.checked += 1;
        if resolved.code.values[pos] != x {
            report.mismatches += 1;
            report.first_mismatch.get_or_insert(k);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::IncrementLaw;
    use crate::trees::{parse, serialize};

    fn two_leaf() -> CodeSequence {
        CodeSequence::new(-3, vec![-1, -1, 1]).unwrap()
    }

    #[test]
    fn two_leaf_code() {
        let t = parse("[(),()]").unwrap();
        assert_eq!(phi_r(&t, 0, 2, 0).unwrap(), two_leaf());
        assert!(matches!(phi_r(&t, 0, 3, 0), Err(Error::CensoredWindow { index: -4 })));
        assert!(matches!(phi_r(&t, 0, 2, 1), Err(Error::CensoredWindow { index: 0 })));
    }

    #[test]
    fn path_codes_to_zeros() {
        let t = parse("(((([]))))").unwrap();
        let top = t.top();
        let code = phi_r(&t, top, 4, 0).unwrap();
        assert_eq!(code.values, vec![-1, 0, 0, 0, 0]);
    }

    #[test]
    fn two_leaf_decodes() {
        let t = psi_r(&two_leaf()).unwrap();
        assert_eq!(serialize(&t), "0[-1(),-2()]");
        let back = phi_r_resolved(&t, t.root(), 10, 10);
        assert_eq!(back.code, two_leaf());
    }

    #[test]
    fn constant_sequences() {
        let zeros = CodeSequence::new(-3, vec![0; 6]).unwrap();
        let t = psi_r(&zeros).unwrap();
        assert_eq!(serialize(&t), "3(2(1(0[-1(-2(-3()))])))");
        let ones = CodeSequence::new(-3, vec![-1; 6]).unwrap();
        assert_eq!(serialize(&psi_r(&ones).unwrap()), "0[]");
    }

    #[test]
    fn decode_outside_origin() {
        let y = CodeSequence::new(2, vec![0, 1]).unwrap();
        let t = psi_r(&y).unwrap();
        assert_eq!(serialize(&t), "0[]");
    }

    #[test]
    fn sequence_text() {
        let y = CodeSequence::parse("lo=-2\n 1 -1\n").unwrap();
        assert_eq!(y, CodeSequence::new(-2, vec![1, -1]).unwrap());
        assert_eq!(CodeSequence::parse(&y.to_text()).unwrap(), y);
        assert_eq!(CodeSequence::parse("-1 -1 1").unwrap(), two_leaf());
        assert!(matches!(CodeSequence::parse("1 x"), Err(Error::Parse { offset: 2, .. })));
        assert!(CodeSequence::parse("-2").is_err());
    }

    #[test]
    fn finite_codes() {
        let single = finite_code_check(&OrderedTree::singleton(None)).unwrap();
        assert!(single.pass);
        assert_eq!(single.total, -1);
        let r = finite_code_check(&parse("[(),()]").unwrap()).unwrap();
        assert!(r.pass);
        assert_eq!(r.length, 3);
        let mut open = parse("[()]").unwrap();
        open.set_flag(1, VertexFlag::RadiusBoundary);
        assert_eq!(finite_code_check(&open), Err(Error::NotFinite));
    }

    #[test]
    fn zero_mean_roundtrip() {
        let law = IncrementLaw::new(vec![(-1, 0.5), (1, 0.5)]).unwrap();
        let mut checked = 0;
        for seed in 0..50 {
            let mut w = TrajectoryWindow::iid(&law, seed);
            let r = roundtrip_check(&mut w, 16, 200_000).unwrap();
            assert_eq!(r.mismatches, 0);
            assert_eq!(r.order_violations, 0);
            checked += r.checked;
        }
        assert!(checked > 0);
    }

    #[test]
    fn isolated_roundtrip() {
        let mut w = TrajectoryWindow::padded(-4, &[-1; 8], -1).unwrap();
        let r = roundtrip_check(&mut w, 4, 100).unwrap();
        assert_eq!(r.checked, 1);
        assert_eq!(r.mismatches, 0);
    }
}
