//! Ordered family trees: storage, RLS order, succession lines, ball keys and text format.

mod key;
mod order;
mod text;

pub use key::{ball_key, non_descendant_key, BallKey};
pub use order::{
    a_map, b_map, count_succession_lines, rls_compare, rls_sort, succession_window, Step,
    SuccessionLines, SuccessionWindow,
};
pub use text::{parse, serialize};

use serde::{Deserialize, Serialize};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexFlag {
    /// Parent and full child list are known.
    Interior,
    /// Exploration stopped here because of the radius.
    RadiusBoundary,
    /// Exploration stopped here because of a window or node budget.
    Censored,
}

/// Rooted ordered family tree. Children are stored eldest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedTree {
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    flags: Vec<VertexFlag>,
    labels: Vec<Option<i64>>,
    spine: Vec<bool>,
    root: VertexId,
}

impl OrderedTree {
    /// Single interior vertex, which is the root.
    pub fn singleton(label: Option<i64>) -> Self {
        OrderedTree {
            parent: vec![None],
            children: vec![Vec::new()],
            flags: vec![VertexFlag::Interior],
            labels: vec![label],
            spine: vec![false],
            root: 0,
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        OrderedTree {
            parent: Vec::with_capacity(n),
            children: Vec::with_capacity(n),
            flags: Vec::with_capacity(n),
            labels: Vec::with_capacity(n),
            spine: Vec::with_capacity(n),
            root: 0,
        }
    }

    pub fn add_vertex(&mut self, label: Option<i64>, flag: VertexFlag) -> VertexId {
        self.parent.push(None);
        self.children.push(Vec::new());
        self.flags.push(flag);
        self.labels.push(label);
        self.spine.push(false);
        self.parent.len() - 1
    }

    /// Appends `child` as the youngest child of `parent`.
    pub fn push_child(&mut self, parent: VertexId, child: VertexId) {
        debug_assert!(self.parent[child].is_none());
        self.parent[child] = Some(parent);
        self.children[parent].push(child);
    }

    /// Inserts `child` at sibling position `rank` (0 = eldest).
    pub fn insert_child(&mut self, parent: VertexId, child: VertexId, rank: usize) {
        debug_assert!(self.parent[child].is_none());
        self.parent[child] = Some(parent);
        self.children[parent].insert(rank, child);
    }

    /// Replaces the child list of `v`, eldest first, updating parent links.
    pub fn set_children(&mut self, v: VertexId, kids: Vec<VertexId>) {
        for &c in &kids {
            self.parent[c] = Some(v);
        }
        self.children[v] = kids;
    }

    pub fn set_root(&mut self, v: VertexId) {
        self.root = v;
    }

    pub fn set_flag(&mut self, v: VertexId, flag: VertexFlag) {
        self.flags[v] = flag;
    }

    pub fn set_spine(&mut self, v: VertexId, on: bool) {
        self.spine[v] = on;
    }

    pub fn set_label(&mut self, v: VertexId, label: Option<i64>) {
        self.labels[v] = label;
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn flag(&self, v: VertexId) -> VertexFlag {
        self.flags[v]
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.flags[v] == VertexFlag::Interior
    }

    pub fn label(&self, v: VertexId) -> Option<i64> {
        self.labels[v]
    }

    pub fn is_spine(&self, v: VertexId) -> bool {
        self.spine[v]
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.len()
    }

    pub fn find_label(&self, label: i64) -> Option<VertexId> {
        self.labels.iter().position(|&l| l == Some(label))
    }

    /// Number of children `d_1(v)`; only meaningful for interior vertices.
    pub fn d1(&self, v: VertexId) -> usize {
        self.children[v].len()
    }

    /// Position of `v` among its siblings, 0 for the eldest.
    pub fn rank(&self, v: VertexId) -> Option<usize> {
        let p = self.parent[v]?;
        self.children[p].iter().position(|&c| c == v)
    }

    /// `v, F(v), F²(v), ...` up to the stored top.
    pub fn ancestors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.ancestors(v).len() - 1
    }

    /// The stored vertex without a parent reachable from the root.
    pub fn top(&self) -> VertexId {
        *self.ancestors(self.root).last().unwrap()
    }

    /// True when every vertex is interior.
    pub fn is_fully_resolved(&self) -> bool {
        self.flags.iter().all(|&f| f == VertexFlag::Interior)
    }

    pub fn has_censored(&self) -> bool {
        self.flags.contains(&VertexFlag::Censored)
    }

    /// Same tree with a different distinguished vertex.
    pub fn rerooted(&self, v: VertexId) -> Self {
        let mut t = self.clone();
        t.root = v;
        t
    }

    /// Vertices of the subtree of `v` in preorder, eldest branch first.
    pub fn subtree(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    /// Graph distances from `v` along parent and child links, up to `max`.
    pub fn distances_from(&self, v: VertexId, max: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[v] = Some(0);
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            if d == max {
                continue;
            }
            let nbrs = self.parent[u].into_iter().chain(self.children[u].iter().copied());
            for w in nbrs {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Checks parent/child consistency and acyclicity.
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: String| Err(crate::Error::InvalidArgument(m));
        if self.root >= self.len() {
            return bad("root out of range".into());
        }
        for v in self.vertices() {
            for &c in &self.children[v] {
                if self.parent[c] != Some(v) {
                    return bad(format!("child {c} of {v} has another parent"));
                }
            }
            if let Some(p) = self.parent[v] {
                if self.children[p].iter().filter(|&&c| c == v).count() != 1 {
                    return bad(format!("{v} listed {} times under {p}",
                        self.children[p].iter().filter(|&&c| c == v).count()));
                }
            }
            let mut cur = v;
            for _ in 0..=self.len() {
                match self.parent[cur] {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            if self.parent[cur].is_some() {
                return bad(format!("cycle through {v}"));
            }
        }
        let tops = self.vertices().filter(|&v| self.parent[v].is_none()).count();
        if tops != 1 {
            return bad(format!("{tops} vertices without parent"));
        }
        Ok(())
    }

    /// Copy with vertices renumbered in preorder from the top.
    pub fn canonical(&self) -> Self {
        let order = self.subtree(self.top());
        let mut index = vec![0; self.len()];
        for (k, &v) in order.iter().enumerate() {
            index[v] = k;
        }
        let mut t = OrderedTree::with_capacity(order.len());
        for &v in &order {
            let id = t.add_vertex(self.labels[v], self.flags[v]);
            t.spine[id] = self.spine[v];
            t.parent[id] = self.parent[v].map(|p| index[p]);
            t.children[id] = self.children[v].iter().map(|&c| index[c]).collect();
        }
        t.root = index[self.root];
        t
    }

    /// Restriction to the ball of radius `r` around `center`, which becomes the root.
    /// Vertices at distance `r` are flagged as radius boundary unless already censored.
    pub fn ball(&self, center: VertexId, r: usize) -> Self {
        let dist = self.distances_from(center, r);
        let mut index = vec![usize::MAX; self.len()];
        let mut t = OrderedTree::with_capacity(self.len());
        let top = self.ancestors(center).into_iter().rev().find(|&v| dist[v].is_some()).unwrap();
        for v in self.subtree(top) {
            let Some(d) = dist[v] else { continue };
            let flag = match self.flags[v] {
                VertexFlag::Interior if d == r => VertexFlag::RadiusBoundary,
                f => f,
            };
            let id = t.add_vertex(self.labels[v], flag);
            t.spine[id] = self.spine[v];
            index[v] = id;
            if let Some(p) = self.parent[v] {
                if index[p] != usize::MAX {
                    t.parent[id] = Some(index[p]);
                    t.children[index[p]].push(id);
                }
            }
        }
        t.root = index[center];
        t
    }

    /// Vertices at depth ≥ 1 sharing an ancestor `F^n` with each other, grouped, using only
    /// interior vertices; the top of each chain forms a singleton.
    pub fn foil_partition(&self) -> Vec<Vec<VertexId>> {
        let mut classes: std::collections::BTreeMap<(VertexId, usize), Vec<VertexId>> =
            Default::default();
        let mut singles = Vec::new();
        for v in self.vertices() {
            if !self.is_interior(v) {
                continue;
            }
            let chain = self.ancestors(v);
            let depth = chain.len() - 1;
            if depth == 0 {
                singles.push(vec![v]);
            } else {
                classes.entry((chain[depth], depth)).or_default().push(v);
            }
        }
        let mut out: Vec<Vec<VertexId>> = singles.into_iter().chain(classes.into_values()).collect();
        out.sort();
        out
    }
}
