//! Canonical keys of rooted balls.
//!
//! A vertex at distance `d < r` from the root is written `(P;C1,C2,...)` where `P` is
//! `^` followed by the parent's encoding, `-` when there is no parent, or `*` when the
//! parent is the vertex we came from; the children follow eldest first, with `*` in the
//! slot of the vertex we came from. A vertex at distance `r` is written `.`. Every vertex
//! closer than `r` must be interior, so keys only exist for resolved balls.

use serde::{Deserialize, Serialize};

use super::{OrderedTree, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallKey(pub String);

impl std::fmt::Display for BallKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

struct Encoder<'a> {
    t: &'a OrderedTree,
    r: usize,
    skip_root_children: bool,
    out: String,
}

impl Encoder<'_> {
    fn encode(&mut self, v: VertexId, from: Option<VertexId>, d: usize) -> Result<()> {
        if d == self.r {
            self.out.push('.');
            return Ok(());
        }
        if !self.t.is_interior(v) {
            return Err(Error::UnresolvedBall { vertex: v, radius: self.r });
        }
        self.out.push('(');
        match self.t.parent(v) {
            Some(p) if Some(p) == from => self.out.push('*'),
            Some(p) => {
                self.out.push('^');
                self.encode(p, Some(v), d + 1)?;
            }
            None => self.out.push('-'),
        }
        self.out.push(';');
        if d == 0 && self.skip_root_children {
            self.out.push('!');
        } else {
            for (k, &c) in self.t.children(v).iter().enumerate() {
                if k > 0 {
                    self.out.push(',');
                }
                if Some(c) == from {
                    self.out.push('*');
                } else {
                    self.encode(c, Some(v), d + 1)?;
                }
            }
        }
        self.out.push(')');
        Ok(())
    }
}

fn key_with(t: &OrderedTree, root: VertexId, r: usize, skip_root_children: bool) -> Result<BallKey> {
    let mut enc = Encoder { t, r, skip_root_children, out: format!("v1:r{r}:") };
    enc.encode(root, None, 0)?;
    Ok(BallKey(enc.out))
}

/// Key of the ball of radius `r` around `root`.
pub fn ball_key(t: &OrderedTree, root: VertexId, r: usize) -> Result<BallKey> {
    key_with(t, root, r, false)
}

/// Key of the ball of radius `r` around `root` in the tree with the strict descendants of
/// `root` removed.
pub fn non_descendant_key(t: &OrderedTree, root: VertexId, r: usize) -> Result<BallKey> {
    key_with(t, root, r, true)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, serialize, VertexFlag};
    use super::*;
    use std::collections::HashMap;

    /// All plane trees with exactly `n` vertices, in text form without labels.
    fn plane_trees(n: usize) -> Vec<String> {
        fn forests(n: usize, memo: &mut HashMap<usize, Vec<String>>) -> Vec<String> {
            if let Some(v) = memo.get(&n) {
                return v.clone();
            }
            let mut out = Vec::new();
            if n == 0 {
                out.push(String::new());
            }
            for first in 1..=n {
                for head in trees(first, memo) {
                    for tail in forests(n - first, memo) {
                        out.push(if tail.is_empty() { head.clone() } else { format!("{head},{tail}") });
                    }
                }
            }
            memo.insert(n, out.clone());
            out
        }
        fn trees(n: usize, memo: &mut HashMap<usize, Vec<String>>) -> Vec<String> {
            forests(n - 1, memo).into_iter().map(|f| format!("({f})")).collect()
        }
        trees(n, &mut HashMap::new())
    }

    #[test]
    fn isolated_root_key() {
        let t = OrderedTree::singleton(None);
        assert_eq!(ball_key(&t, 0, 3).unwrap().0, "v1:r3:(-;)");
        assert_eq!(ball_key(&t, 0, 0).unwrap().0, "v1:r0:.");
    }

    #[test]
    fn star_and_path_differ() {
        let star = parse("[(),(),()]").unwrap();
        let path = parse("[(())]").unwrap();
        assert_ne!(ball_key(&star, 0, 1).unwrap(), ball_key(&path, 0, 1).unwrap());
    }

    #[test]
    fn relabeling_invariance() {
        let a = parse("0[-1(),-2(),-3(-4(),-5())]").unwrap();
        let b = parse("10[7(),3(),1(0(),-9())]").unwrap();
        assert_eq!(ball_key(&a, a.root(), 2).unwrap(), ball_key(&b, b.root(), 2).unwrap());
    }

    #[test]
    fn unresolved_interior_is_an_error() {
        let mut t = parse("1(0[])").unwrap();
        t.set_flag(0, VertexFlag::Censored);
        assert!(ball_key(&t, t.root(), 2).is_err());
        assert!(ball_key(&t, t.root(), 1).is_ok());
    }

    #[test]
    fn exhaustive_collision_freedom() {
        // plane trees have no non-trivial automorphisms, so (tree, marked vertex) pairs
        // are isomorphic iff the tree and the mark coincide
        let mut pairs = 0;
        let mut keys = HashMap::new();
        for n in 1..=8 {
            for text in plane_trees(n) {
                let t = parse(&text).unwrap();
                assert_eq!(t.len(), n);
                for v in t.vertices() {
                    let marked = serialize(&t.rerooted(v));
                    let key = ball_key(&t, v, 8).unwrap();
                    if let Some(prev) = keys.insert(key, marked.clone()) {
                        panic!("collision between {prev} and {marked}");
                    }
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs, 4707);
    }

    #[test]
    fn non_descendant_key_ignores_subtree() {
        let a = parse("2(1[0()],5())").unwrap();
        let b = parse("2(1[0(),3()],5())").unwrap();
        assert_eq!(
            non_descendant_key(&a, a.root(), 2).unwrap(),
            non_descendant_key(&b, b.root(), 2).unwrap()
        );
        assert_ne!(ball_key(&a, a.root(), 2).unwrap(), ball_key(&b, b.root(), 2).unwrap());
    }
}
