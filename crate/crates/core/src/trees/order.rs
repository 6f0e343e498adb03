use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{OrderedTree, VertexId};
use crate::error::{Error, Result};

/// Outcome of one step of the immediate successor or predecessor map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Vertex(VertexId),
    /// No such vertex exists in the tree.
    End,
    /// The answer depends on a part of the tree that was not explored.
    Censored,
}

/// RLS comparison: `Less` means `u ≺ v`.
pub fn rls_compare(t: &OrderedTree, u: VertexId, v: VertexId) -> Result<Ordering> {
    if u == v {
        return Ok(Ordering::Equal);
    }
    let au = t.ancestors(u);
    let av = t.ancestors(v);
    let pos_v: std::collections::HashMap<VertexId, usize> =
        av.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let (iu, iv) = au
        .iter()
        .enumerate()
        .find_map(|(k, w)| pos_v.get(w).map(|&j| (k, j)))
        .ok_or(Error::Incomparable)?;
    if iv == 0 {
        return Ok(Ordering::Less);
    }
    if iu == 0 {
        return Ok(Ordering::Greater);
    }
    let lca = au[iu];
    if !t.is_interior(lca) {
        return Err(Error::Incomparable);
    }
    let ru = t.rank(au[iu - 1]).unwrap();
    let rv = t.rank(av[iv - 1]).unwrap();
    Ok(if rv < ru { Ordering::Less } else { Ordering::Greater })
}

/// All vertices of the subtree of `v` in RLS order: younger branches first, then `v`.
pub fn rls_sort(t: &OrderedTree, v: VertexId) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(t.len());
    let mut stack = vec![(v, false)];
    while let Some((u, expanded)) = stack.pop() {
        if expanded {
            out.push(u);
        } else {
            stack.push((u, true));
            for &c in t.children(u) {
                stack.push((c, false));
            }
        }
    }
    out
}

/// Immediate predecessor `b(u) = max{v : v ≺ u}`.
pub fn b_map(t: &OrderedTree, u: VertexId) -> Step {
    if !t.is_interior(u) {
        return Step::Censored;
    }
    if let Some(&eldest) = t.children(u).first() {
        return Step::Vertex(eldest);
    }
    let mut w = u;
    loop {
        let Some(p) = t.parent(w) else {
            return if t.is_interior(w) { Step::End } else { Step::Censored };
        };
        if !t.is_interior(p) {
            return Step::Censored;
        }
        let r = t.rank(w).unwrap();
        if let Some(&younger) = t.children(p).get(r + 1) {
            return Step::Vertex(younger);
        }
        w = p;
    }
}

/// Immediate successor `a(u) = min{v : v ≻ u}`.
pub fn a_map(t: &OrderedTree, u: VertexId) -> Step {
    let Some(p) = t.parent(u) else {
        return if t.is_interior(u) { Step::End } else { Step::Censored };
    };
    if !t.is_interior(p) {
        return Step::Censored;
    }
    let r = t.rank(u).unwrap();
    if r == 0 {
        return Step::Vertex(p);
    }
    let mut w = t.children(p)[r - 1];
    loop {
        if !t.is_interior(w) {
            return Step::Censored;
        }
        match t.children(w).last() {
            Some(&youngest) => w = youngest,
            None => return Step::Vertex(w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessionWindow {
    /// Consecutive vertices of the succession line in increasing RLS order.
    pub vertices: Vec<VertexId>,
    /// Position of the starting vertex in `vertices`.
    pub origin: usize,
    /// Why the backward iteration stopped early, if it did.
    pub back_stop: Option<Step>,
    /// Why the forward iteration stopped early, if it did.
    pub fwd_stop: Option<Step>,
}

/// Iterates `b` up to `n_back` times and `a` up to `n_fwd` times from `o`.
pub fn succession_window(t: &OrderedTree, o: VertexId, n_back: usize, n_fwd: usize) -> SuccessionWindow {
    let mut back = Vec::new();
    let mut back_stop = None;
    let mut cur = o;
    for _ in 0..n_back {
        match b_map(t, cur) {
            Step::Vertex(v) => {
                back.push(v);
                cur = v;
            }
            s => {
                back_stop = Some(s);
                break;
            }
        }
    }
    let mut fwd = Vec::new();
    let mut fwd_stop = None;
    cur = o;
    for _ in 0..n_fwd {
        match a_map(t, cur) {
            Step::Vertex(v) => {
                fwd.push(v);
                cur = v;
            }
            s => {
                fwd_stop = Some(s);
                break;
            }
        }
    }
    let origin = back.len();
    back.reverse();
    back.push(o);
    back.extend(fwd);
    SuccessionWindow { vertices: back, origin, back_stop, fwd_stop }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuccessionLines {
    One,
    Two,
    Undetermined,
}

/// Two lines iff some spine vertex has a non-spine child younger than its spine child.
pub fn count_succession_lines(t: &OrderedTree) -> SuccessionLines {
    let mut checked = false;
    for v in t.vertices() {
        if !t.is_spine(v) || !t.is_interior(v) {
            continue;
        }
        let kids = t.children(v);
        let Some(pos) = kids.iter().position(|&c| t.is_spine(c)) else {
            continue;
        };
        checked = true;
        if pos + 1 < kids.len() {
            return SuccessionLines::Two;
        }
    }
    if checked {
        SuccessionLines::One
    } else {
        SuccessionLines::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, VertexFlag};
    use super::*;

    fn labelled(text: &str) -> OrderedTree {
        parse(text).unwrap()
    }

    fn by_label(t: &OrderedTree, l: i64) -> VertexId {
        t.find_label(l).unwrap()
    }

    #[test]
    fn parent_above_child() {
        let t = labelled("0[-1()]");
        assert_eq!(rls_compare(&t, 1, 0).unwrap(), Ordering::Less);
        assert_eq!(rls_compare(&t, 0, 1).unwrap(), Ordering::Greater);
    }

    #[test]
    fn elder_branch_is_greater() {
        // children 2 (eldest) and 1; 0 below 2.
        let t = labelled("3[2(0()),1()]");
        let (c1, d) = (by_label(&t, 1), by_label(&t, 0));
        assert_eq!(rls_compare(&t, c1, d).unwrap(), Ordering::Less);
    }

    #[test]
    fn sort_matches_labels_on_lattice_tree() {
        let t = labelled("0[-1(),-2(),-3(-4(),-5())]");
        let labels: Vec<i64> = rls_sort(&t, t.top()).iter().map(|&v| t.label(v).unwrap()).collect();
        assert_eq!(labels, vec![-5, -4, -3, -2, -1, 0]);
        let mut all: Vec<VertexId> = t.vertices().collect();
        all.sort_by(|&a, &b| rls_compare(&t, a, b).unwrap());
        assert_eq!(all, rls_sort(&t, t.top()));
    }

    #[test]
    fn a_and_b_walk_the_sort() {
        let t = labelled("0[-1(),-2(),-3(-4(),-5())]");
        let order = rls_sort(&t, t.top());
        for k in 0..order.len() {
            let next = if k + 1 < order.len() { Step::Vertex(order[k + 1]) } else { Step::End };
            let prev = if k > 0 { Step::Vertex(order[k - 1]) } else { Step::End };
            assert_eq!(a_map(&t, order[k]), next);
            assert_eq!(b_map(&t, order[k]), prev);
        }
        let w = succession_window(&t, by_label(&t, -2), 10, 10);
        assert_eq!(w.vertices, order);
        assert_eq!(w.origin, 3);
    }

    #[test]
    fn single_vertex_window() {
        let t = OrderedTree::singleton(None);
        let w = succession_window(&t, 0, 3, 3);
        assert_eq!(w.vertices, vec![0]);
        assert_eq!(w.back_stop, Some(Step::End));
    }

    #[test]
    fn censored_neighbourhood_stops() {
        let mut t = labelled("1[0()]");
        t.set_flag(0, VertexFlag::RadiusBoundary);
        assert_eq!(a_map(&t, 1), Step::Censored);
        assert_eq!(b_map(&t, 0), Step::Censored);
    }

    #[test]
    fn incomparable_without_common_ancestor() {
        let mut t = labelled("1[0()]");
        let lone = t.add_vertex(None, VertexFlag::Interior);
        assert_eq!(rls_compare(&t, 1, lone), Err(Error::Incomparable));
    }

    #[test]
    fn succession_lines() {
        // spine 2 -> 1 -> 0, spine child youngest everywhere
        let t = labelled("2~(5(),1~(4(),0~*()))");
        assert_eq!(count_succession_lines(&t), SuccessionLines::One);
        let t = labelled("2~(1~(4(),0~*()),5())");
        assert_eq!(count_succession_lines(&t), SuccessionLines::Two);
        let t = labelled("2~*()");
        assert_eq!(count_succession_lines(&t), SuccessionLines::Undetermined);
    }
}
