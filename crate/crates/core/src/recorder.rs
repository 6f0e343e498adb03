//! The record vertex-shift on a trajectory window and the graphs it generates.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::increments::{Tail, TrajectoryWindow};
use crate::trees::{OrderedTree, VertexFlag, VertexId};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CensorReason {
    WindowBudget,
    NodeBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution<V> {
    Resolved(V),
    ProvedInfinite,
    Censored(CensorReason),
}

impl<V> Resolution<V> {
    pub fn resolved(self) -> Option<V> {
        match self {
            Resolution::Resolved(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, Resolution::Resolved(_))
    }

    pub fn map<U>(self, f: impl FnOnce(V) -> U) -> Resolution<U> {
        match self {
            Resolution::Resolved(v) => Resolution::Resolved(f(v)),
            Resolution::ProvedInfinite => Resolution::ProvedInfinite,
            Resolution::Censored(r) => Resolution::Censored(r),
        }
    }
}

macro_rules! sum {
    ($w:expr, $n:expr) => {
        match $w.s($n) {
            Ok(v) => v,
            Err(r) => return Resolution::Censored(r),
        }
    };
}

/// `R(i) = inf{n > i : S_n >= S_i}`.
pub fn record_of(w: &mut TrajectoryWindow, i: i64) -> Resolution<i64> {
    let si = sum!(w, i);
    let mut n = i;
    loop {
        n += 1;
        let sn = sum!(w, n);
        if sn >= si {
            return Resolution::Resolved(n);
        }
        if w.right_reach_above(si, n, n - i) == Tail::Impossible {
            return Resolution::ProvedInfinite;
        }
    }
}

/// `L(i) = inf{j < i : y(k,i) >= 0 for all j <= k < i}`.
#[allow(non_snake_case)]
pub fn big_L(w: &mut TrajectoryWindow, i: i64) -> Resolution<i64> {
    let si = sum!(w, i);
    let mut j = i;
    loop {
        j -= 1;
        let sj = sum!(w, j);
        if sj > si {
            return Resolution::Resolved(j + 1);
        }
        if w.left_reach_above(si + 1, j, i - j) == Tail::Impossible {
            return Resolution::ProvedInfinite;
        }
    }
}

fn type_scan(w: &mut TrajectoryWindow, i: i64) -> Resolution<(i64, i64)> {
    let si = sum!(w, i);
    let mut min = i64::MAX;
    let mut arg = i;
    let mut j = i;
    loop {
        j -= 1;
        let sj = sum!(w, j);
        let y = si - sj;
        if y < 0 {
            while si - sum!(w, j) != -1 {
                j -= 1;
            }
            return Resolution::Resolved((-1, j));
        }
        if y < min {
            min = y;
            arg = j;
        }
        if w.left_reach_above(si - min + 1, j, i - j) == Tail::Impossible {
            return Resolution::Resolved((min, arg));
        }
    }
}

/// `t(i) = inf{y(m,i) ∨ -1 : m < i}`.
pub fn type_of(w: &mut TrajectoryWindow, i: i64) -> Resolution<i64> {
    type_scan(w, i).map(|(t, _)| t)
}

/// `l(i) = sup{m < i : y(m,i) = t(i)}`.
pub fn little_l(w: &mut TrajectoryWindow, i: i64) -> Resolution<i64> {
    type_scan(w, i).map(|(_, l)| l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChildrenMode {
    Formula,
    BruteScan,
}

/// Children of `i` in decreasing integer order, which is eldest first.
pub fn children_of(w: &mut TrajectoryWindow, i: i64, mode: ChildrenMode) -> Result<Resolution<Vec<i64>>> {
    match mode {
        ChildrenMode::Formula => {
            if !w.is_skip_free() {
                return Err(Error::NotSkipFree);
            }
            Ok(children_formula(w, i))
        }
        ChildrenMode::BruteScan => Ok(children_brute(w, i)),
    }
}

/// The m-th child is the largest `j < i` with `y(j,i) = x_{i-1} + 1 - m`.
fn children_formula(w: &mut TrajectoryWindow, i: i64) -> Resolution<Vec<i64>> {
    let si = sum!(w, i);
    let mut target = si - sum!(w, i - 1);
    let mut out = Vec::new();
    if target < 0 {
        return Resolution::Resolved(out);
    }
    let mut j = i;
    loop {
        j -= 1;
        let sj = sum!(w, j);
        if si - sj == target {
            out.push(j);
            if target == 0 {
                return Resolution::Resolved(out);
            }
            target -= 1;
        }
        if w.left_reach_above(si - target, j, i - j) == Tail::Impossible {
            return Resolution::Resolved(out);
        }
    }
}

fn first_weak_record_before(w: &TrajectoryWindow, j: i64, limit: i64) -> Option<i64> {
    let sj = w.prefix(j)?;
    (j + 1..=limit).find(|&n| w.prefix(n).is_some_and(|sn| sn >= sj))
}

fn children_brute(w: &mut TrajectoryWindow, i: i64) -> Resolution<Vec<i64>> {
    let l = match big_L(w, i) {
        Resolution::Resolved(l) => l,
        Resolution::ProvedInfinite => return Resolution::Censored(CensorReason::WindowBudget),
        Resolution::Censored(r) => return Resolution::Censored(r),
    };
    Resolution::Resolved((l..i).rev().filter(|&j| first_weak_record_before(w, j, i) == Some(i)).collect())
}

/// Descendants of `i` form the interval `[L(i), i]`.
pub fn descendants_interval(w: &mut TrajectoryWindow, i: i64) -> Resolution<(i64, i64)> {
    big_L(w, i).map(|l| (l, i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexShiftKind {
    Record,
    StrictRecord,
    ClimbingPoint,
}

/// Image of `i` under the vertex-shift.
pub fn shift_of(w: &mut TrajectoryWindow, kind: VertexShiftKind, i: i64) -> Resolution<i64> {
    match kind {
        VertexShiftKind::Record => record_of(w, i),
        VertexShiftKind::StrictRecord => {
            let si = sum!(w, i);
            let mut n = i;
            loop {
                n += 1;
                let sn = sum!(w, n);
                if sn > si {
                    return Resolution::Resolved(n);
                }
                if w.right_reach_above(si + 1, n, n - i) == Tail::Impossible {
                    return Resolution::ProvedInfinite;
                }
            }
        }
        VertexShiftKind::ClimbingPoint => {
            let mut k = i + 1;
            let mut best = sum!(w, k);
            let mut n = k;
            loop {
                match w.right_reach_below(best - 1, n, n - k) {
                    Tail::Impossible => return Resolution::Resolved(k),
                    // the walk goes below every level, so no minimum exists
                    Tail::Certain => return Resolution::ProvedInfinite,
                    Tail::Unknown => {}
                }
                n += 1;
                let cur = sum!(w, n);
                if cur < best {
                    best = cur;
                    k = n;
                }
            }
        }
    }
}

/// Children of `i` under the vertex-shift, eldest (largest) first.
pub fn shift_children(w: &mut TrajectoryWindow, kind: VertexShiftKind, i: i64) -> Resolution<Vec<i64>> {
    match kind {
        VertexShiftKind::Record if w.is_skip_free() => children_formula(w, i),
        VertexShiftKind::Record => children_brute(w, i),
        VertexShiftKind::StrictRecord => {
            let si = sum!(w, i);
            let mut k = i - 1;
            while sum!(w, k) < si {
                k -= 1;
            }
            let mut out = Vec::new();
            for j in (k + 1..i).rev() {
                let sj = w.prefix(j).unwrap();
                if (j + 1..=i).find(|&n| w.prefix(n).unwrap() > sj) == Some(i) {
                    out.push(j);
                }
            }
            Resolution::Resolved(out)
        }
        VertexShiftKind::ClimbingPoint => {
            let si = sum!(w, i);
            let mut n0 = i - 1;
            while sum!(w, n0) > si {
                n0 -= 1;
            }
            let mut out = Vec::new();
            for j in (n0..i).rev() {
                match shift_of(w, kind, j) {
                    Resolution::Resolved(c) if c == i => out.push(j),
                    Resolution::Censored(r) => return Resolution::Censored(r),
                    _ => {}
                }
            }
            Resolution::Resolved(out)
        }
    }
}

/// Ball of graph radius `radius` around vertex 0 in the record graph.
pub fn component_ball(w: &mut TrajectoryWindow, radius: usize, node_budget: usize) -> OrderedTree {
    shift_graph_ball(w, VertexShiftKind::Record, radius, node_budget)
}

/// Ball around vertex 0 in the graph of the given vertex-shift. Vertices are labelled by
/// their integer index; frontier vertices are flagged by why they were not expanded.
pub fn shift_graph_ball(
    w: &mut TrajectoryWindow,
    kind: VertexShiftKind,
    radius: usize,
    node_budget: usize,
) -> OrderedTree {
    let mut t = OrderedTree::singleton(Some(0));
    let mut ids: HashMap<i64, VertexId> = HashMap::from([(0, 0)]);
    let mut dist = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut intern = |t: &mut OrderedTree, dist: &mut Vec<usize>, queue: &mut VecDeque<usize>, label: i64, d: usize| {
        *ids.entry(label).or_insert_with(|| {
            let id = t.add_vertex(Some(label), VertexFlag::Interior);
            dist.push(d);
            queue.push_back(id);
            id
        })
    };
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        let label = t.label(v).unwrap();
        if d >= radius {
            t.set_flag(v, VertexFlag::RadiusBoundary);
            continue;
        }
        if t.len() >= node_budget {
            t.set_flag(v, VertexFlag::Censored);
            continue;
        }
        let mut resolved = true;
        if t.parent(v).is_none() {
            match shift_of(w, kind, label) {
                Resolution::Resolved(p) => {
                    let pid = intern(&mut t, &mut dist, &mut queue, p, d + 1);
                    t.push_child(pid, v);
                }
                Resolution::ProvedInfinite => {}
                Resolution::Censored(_) => resolved = false,
            }
        }
        match shift_children(w, kind, label) {
            Resolution::Resolved(list) => {
                let kids = list
                    .into_iter()
                    .map(|c| intern(&mut t, &mut dist, &mut queue, c, d + 1))
                    .collect();
                t.set_children(v, kids);
            }
            _ => resolved = false,
        }
        if !resolved {
            t.set_flag(v, VertexFlag::Censored);
        }
    }
    t
}

/// Per-vertex export row of a record-graph ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRow {
    pub index: i64,
    pub parent: Option<i64>,
    pub child_rank: Option<usize>,
    #[serde(rename = "type")]
    pub type_: Option<i64>,
    #[serde(rename = "L")]
    pub big_l: Option<i64>,
    pub censored: bool,
}

pub fn ball_table(w: &mut TrajectoryWindow, t: &OrderedTree) -> Vec<VertexRow> {
    t.vertices()
        .map(|v| {
            let index = t.label(v).expect("record balls carry labels");
            VertexRow {
                index,
                parent: t.parent(v).and_then(|p| t.label(p)),
                child_rank: t.rank(v),
                type_: type_of(w, index).resolved(),
                big_l: big_L(w, index).resolved(),
                censored: t.flag(v) == VertexFlag::Censored,
            }
        })
        .collect()
}

pub fn foil_partition(t: &OrderedTree) -> Vec<Vec<VertexId>> {
    t.foil_partition()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Exploration {
    FiniteComponentCertified,
    SpineEvidence,
    AllDescendantsFiniteEvidence,
    Inconclusive,
}

enum LeftScan {
    Dropped,
    StayedAbove,
    Censored,
}

fn left_scan(w: &mut TrajectoryWindow, i: i64, horizon: i64) -> LeftScan {
    let Ok(si) = w.s(i) else { return LeftScan::Censored };
    for j in (i - horizon..i).rev() {
        match w.s(j) {
            Ok(sj) if sj > si => return LeftScan::Dropped,
            Ok(_) => {}
            Err(_) => return LeftScan::Censored,
        }
    }
    LeftScan::StayedAbove
}

/// Heuristic classification of the component of 0 from a finite exploration.
///
/// A finite component is certified when the walk on `[0, horizon]` attains its last
/// maximum in the first half and ends at least four standard deviations below it, and
/// the left scan from that maximum drops below its level. Otherwise ancestors of 0 within
/// `sqrt(horizon)` steps are scanned leftwards for `horizon` steps: one that never drops
/// gives spine evidence, all dropping gives evidence that descendant sets are finite.
pub fn classify_exploration(w: &mut TrajectoryWindow, horizon: usize) -> Exploration {
    let h = horizon.max(1) as i64;
    let mut path = Vec::with_capacity(h as usize + 1);
    for n in 0..=h {
        match w.s(n) {
            Ok(s) => path.push(s),
            Err(_) => return Exploration::Inconclusive,
        }
    }
    let (mut arg, mut max) = (0usize, path[0]);
    for (n, &s) in path.iter().enumerate() {
        if s >= max {
            max = s;
            arg = n;
        }
    }
    let steps: Vec<f64> = path.windows(2).map(|p| (p[1] - p[0]) as f64).collect();
    let mean = steps.iter().sum::<f64>() / h as f64;
    let var = steps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / h as f64;
    let drop = (max - path[h as usize]) as f64;
    if arg as i64 <= h / 2
        && drop >= 4.0 * (var * h as f64).sqrt()
        && matches!(left_scan(w, arg as i64, h), LeftScan::Dropped)
    {
        return Exploration::FiniteComponentCertified;
    }
    let cap = (h as f64).sqrt().ceil() as i64;
    let mut a = 0i64;
    let mut all_dropped = true;
    loop {
        match left_scan(w, a, h) {
            LeftScan::StayedAbove => return Exploration::SpineEvidence,
            LeftScan::Censored => all_dropped = false,
            LeftScan::Dropped => {}
        }
        let sa = path[a as usize];
        match (a + 1..=cap).find(|&n| path[n as usize] >= sa) {
            Some(next) => a = next,
            None => break,
        }
    }
    if all_dropped {
        Exploration::AllDescendantsFiniteEvidence
    } else {
        Exploration::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::IncrementLaw;
    use crate::trees::serialize;

    const CE: [i64; 6] = [-1, -1, 1, -1, -1, 2];

    fn fixed(lo: i64, xs: &[i64]) -> TrajectoryWindow {
        TrajectoryWindow::fixed(lo, xs).unwrap()
    }

    fn law(atoms: &[(i64, f64)]) -> IncrementLaw {
        IncrementLaw::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn record_examples() {
        let mut w = fixed(0, &[0, 5]);
        assert_eq!(record_of(&mut w, 0), Resolution::Resolved(1));
        let mut w = fixed(0, &[1, 5]);
        assert_eq!(record_of(&mut w, 0), Resolution::Resolved(1));
        let mut w = fixed(0, &[-1, -1, 2]);
        assert_eq!(record_of(&mut w, 0), Resolution::Resolved(3));
        let mut w = fixed(0, &[-1, -1]);
        assert_eq!(record_of(&mut w, 0), Resolution::Censored(CensorReason::WindowBudget));
    }

    #[test]
    fn big_l_examples() {
        let mut w = fixed(-1, &[-1]);
        assert_eq!(big_L(&mut w, 0), Resolution::Resolved(0));
        let mut w = fixed(-4, &[-1, -1, -1, 2]);
        assert_eq!(big_L(&mut w, 0), Resolution::Resolved(-3));
        let mut w = fixed(-6, &CE);
        assert_eq!(big_L(&mut w, 0), Resolution::Resolved(-5));
    }

    #[test]
    fn type_and_l_examples() {
        let mut w = fixed(-1, &[-1]);
        assert_eq!(type_of(&mut w, 0), Resolution::Resolved(-1));
        assert_eq!(little_l(&mut w, 0), Resolution::Resolved(-1));
        let mut w = fixed(-6, &CE);
        assert_eq!(type_of(&mut w, 0), Resolution::Resolved(-1));
        assert_eq!(little_l(&mut w, 0), Resolution::Resolved(-6));
    }

    #[test]
    fn periodic_spine_type() {
        // S_n <= 0 for n < 0 and S hits 0 every period in the past
        let mut w = TrajectoryWindow::periodic(vec![-1, 1]).unwrap();
        assert_eq!(type_of(&mut w, 0), Resolution::Resolved(0));
        assert_eq!(little_l(&mut w, 0), Resolution::Resolved(-2));
        assert_eq!(big_L(&mut w, 0), Resolution::ProvedInfinite);
        assert_eq!(
            children_of(&mut w, 0, ChildrenMode::Formula).unwrap(),
            Resolution::Resolved(vec![-1, -2])
        );
        let mut w = TrajectoryWindow::periodic(vec![2, 1]).unwrap();
        // y(-1,0) = 1, y(-2,0) = 3, ...: minimum 1
        assert_eq!(type_of(&mut w, 0), Resolution::Resolved(1));
        assert_eq!(
            children_of(&mut w, 0, ChildrenMode::Formula).unwrap(),
            Resolution::Resolved(vec![-1])
        );
    }

    #[test]
    fn counterexample_children() {
        let mut w = fixed(-6, &CE);
        for mode in [ChildrenMode::Formula, ChildrenMode::BruteScan] {
            assert_eq!(children_of(&mut w, 0, mode).unwrap(), Resolution::Resolved(vec![-1, -2, -3]));
            assert_eq!(children_of(&mut w, -3, mode).unwrap(), Resolution::Resolved(vec![-4, -5]));
        }
        assert_eq!(record_of(&mut w, -5), Resolution::Resolved(-3));
        assert_eq!(descendants_interval(&mut w, 0), Resolution::Resolved((-5, 0)));
    }

    #[test]
    fn simple_children() {
        let mut w = fixed(-1, &[-1]);
        assert_eq!(children_of(&mut w, 0, ChildrenMode::Formula).unwrap(), Resolution::Resolved(vec![]));
        assert_eq!(descendants_interval(&mut w, 0), Resolution::Resolved((0, 0)));
        let mut w = fixed(-2, &[-1, 0]);
        assert_eq!(children_of(&mut w, 0, ChildrenMode::Formula).unwrap(), Resolution::Resolved(vec![-1]));
        assert_eq!(children_of(&mut w, 0, ChildrenMode::BruteScan).unwrap(), Resolution::Resolved(vec![-1]));
    }

    #[test]
    fn formula_rejects_general_laws() {
        let mut w = fixed(-2, &[-3, 1]);
        assert_eq!(children_of(&mut w, 0, ChildrenMode::Formula), Err(Error::NotSkipFree));
        assert!(children_of(&mut w, 0, ChildrenMode::BruteScan).is_ok());
    }

    #[test]
    fn counterexample_ball() {
        let mut w = fixed(-6, &CE);
        let t = component_ball(&mut w, 2, 100);
        let root = t.root();
        let kids: Vec<i64> = t.children(root).iter().map(|&c| t.label(c).unwrap()).collect();
        assert_eq!(kids, vec![-1, -2, -3]);
        let v3 = t.find_label(-3).unwrap();
        let grand: Vec<i64> = t.children(v3).iter().map(|&c| t.label(c).unwrap()).collect();
        assert_eq!(grand, vec![-4, -5]);
        // the parent of 0 lies outside the window
        assert_eq!(t.flag(root), VertexFlag::Censored);
        assert_eq!(serialize(&t), "0?[-1(),-2(),-3(-4*(),-5*())]");
    }

    #[test]
    fn point_mass_ball_is_isolated() {
        let mut w = TrajectoryWindow::iid(&law(&[(-1, 1.0)]), 5);
        let t = component_ball(&mut w, 3, 100);
        assert_eq!(t.len(), 1);
        assert!(t.is_interior(0));
    }

    #[test]
    fn strict_record_versus_record() {
        let mut w = fixed(0, &[0, -1, 2]);
        assert_eq!(record_of(&mut w, 0), Resolution::Resolved(1));
        assert_eq!(shift_of(&mut w, VertexShiftKind::StrictRecord, 0), Resolution::Resolved(3));
        let mut w = TrajectoryWindow::iid(&law(&[(-1, 1.0)]), 1);
        let t = shift_graph_ball(&mut w, VertexShiftKind::StrictRecord, 3, 100);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn climbing_point_matches_future_minimum() {
        let l = law(&[(-2, 0.2), (0, 0.3), (1, 0.5)]);
        for seed in 0..20 {
            let mut w = TrajectoryWindow::iid(&l, seed).with_certificate_eps(Some(1e-15));
            for i in -5..5 {
                let Resolution::Resolved(k) = shift_of(&mut w, VertexShiftKind::ClimbingPoint, i) else {
                    panic!("unresolved climbing point")
                };
                let hi = w.hi();
                let min = (i + 1..=hi).map(|n| w.prefix(n).unwrap()).min().unwrap();
                let first = (i + 1..=hi).find(|&n| w.prefix(n).unwrap() == min).unwrap();
                assert_eq!(k, first);
            }
        }
    }

    #[test]
    fn climbing_point_children_invert_parent() {
        let l = law(&[(-2, 0.2), (0, 0.3), (1, 0.5)]);
        let mut w = TrajectoryWindow::iid(&l, 3).with_certificate_eps(Some(1e-15));
        for i in -10..10 {
            if let Resolution::Resolved(kids) = shift_children(&mut w, VertexShiftKind::ClimbingPoint, i) {
                for c in kids {
                    assert_eq!(shift_of(&mut w, VertexShiftKind::ClimbingPoint, c), Resolution::Resolved(i));
                }
            }
        }
    }

    #[test]
    fn foils_are_depth_levels() {
        let mut w = fixed(-6, &CE);
        let t = component_ball(&mut w, 5, 100);
        for class in foil_partition(&t) {
            let d = t.depth(class[0]);
            assert!(class.iter().all(|&v| t.depth(v) == d));
        }
    }

    #[test]
    fn classify_simple_laws() {
        let mut w = TrajectoryWindow::iid(&law(&[(-1, 1.0)]), 0);
        assert_eq!(classify_exploration(&mut w, 10_000), Exploration::FiniteComponentCertified);
        let mut w = TrajectoryWindow::periodic(vec![1]).unwrap();
        assert_eq!(classify_exploration(&mut w, 100), Exploration::SpineEvidence);
    }

    #[test]
    fn ball_table_rows() {
        let mut w = fixed(-6, &CE);
        let t = component_ball(&mut w, 2, 100);
        let rows = ball_table(&mut w, &t);
        let r3 = rows.iter().find(|r| r.index == -3).unwrap();
        assert_eq!(r3.parent, Some(0));
        assert_eq!(r3.child_rank, Some(2));
        assert_eq!(r3.big_l, Some(-5));
        let json = serde_json::to_string(r3).unwrap();
        assert!(json.contains("\"L\":-5"));
    }
}
