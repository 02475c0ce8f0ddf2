//! Marked binary trees: planar trivalent bicolored trees with one marked edge per
//! inner vertex, their blocks, and the F₃ classes \overline{A_v}.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{BranchConfig, Color};
use crate::error::{Error, Result};
use crate::f3::{self, md3, F3Class};

/// External node identifier as written in JSON (number or string).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Num(u64),
    Str(String),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Num(n) => write!(f, "{n}"),
            NodeId::Str(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerSpec {
    pub id: NodeId,
    pub color: Color,
    pub adj: Vec<NodeId>,
    pub mark: NodeId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafSpec {
    pub id: NodeId,
    pub branch: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub inner: Vec<InnerSpec>,
    pub leaves: Vec<LeafSpec>,
}

#[derive(Clone, Debug)]
enum Kind {
    Inner { color: Color, mark: usize },
    Leaf { branch: usize },
}

#[derive(Clone, Debug)]
struct Node {
    id: NodeId,
    kind: Kind,
    adj: Vec<usize>,
}

/// Which way (B1, B2) follow the marked edge around an inner vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rotation {
    #[default]
    Anticlockwise,
    Clockwise,
}

#[derive(Clone, Debug)]
pub struct MarkedBinaryTree {
    nodes: Vec<Node>,
    leaf_of_branch: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub genus: Option<usize>,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect()
    }

    pub fn into_result(self) -> Result<usize> {
        if self.valid {
            Ok(self.genus.unwrap_or(0))
        } else {
            Err(Error::invalid(self.failures().join("; ")))
        }
    }
}

/// A tree obtained by cutting an edge or merging two terminals, with the
/// correspondence back to the original branch indices.
#[derive(Clone, Debug)]
pub struct Derived {
    pub tree: MarkedBinaryTree,
    /// New branch index → original branch index (`None` for the new terminal).
    pub origin: Vec<Option<usize>>,
    /// Branch index of the new terminal.
    pub new_branch: usize,
}

impl Derived {
    pub fn indices(&self) -> Vec<u8> {
        self.tree.indices()
    }
}

impl MarkedBinaryTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        let mut index = HashMap::new();
        let mut nodes = Vec::new();
        for s in &spec.inner {
            if index.insert(s.id.clone(), nodes.len()).is_some() {
                return Err(Error::invalid(format!("duplicate node id {}", s.id)));
            }
            nodes.push(Node { id: s.id.clone(), kind: Kind::Inner { color: s.color, mark: 0 }, adj: vec![] });
        }
        for l in &spec.leaves {
            if index.insert(l.id.clone(), nodes.len()).is_some() {
                return Err(Error::invalid(format!("duplicate node id {}", l.id)));
            }
            nodes.push(Node { id: l.id.clone(), kind: Kind::Leaf { branch: l.branch }, adj: vec![] });
        }
        let resolve = |id: &NodeId| {
            index.get(id).copied().ok_or_else(|| Error::invalid(format!("unknown node id {id}")))
        };
        for (k, s) in spec.inner.iter().enumerate() {
            let adj = s.adj.iter().map(resolve).collect::<Result<Vec<_>>>()?;
            let mark = resolve(&s.mark)?;
            nodes[k].adj = adj;
            nodes[k].kind = Kind::Inner { color: s.color, mark };
        }
        let m = spec.leaves.len();
        let mut leaf_of_branch = vec![usize::MAX; m];
        for (k, l) in spec.leaves.iter().enumerate() {
            let node = spec.inner.len() + k;
            if l.branch >= m || leaf_of_branch[l.branch] != usize::MAX {
                return Err(Error::invalid(format!(
                    "leaf {}: branch indices must be a permutation of 0..{m}",
                    l.id
                )));
            }
            leaf_of_branch[l.branch] = node;
            let owners: Vec<usize> = (0..spec.inner.len()).filter(|&v| nodes[v].adj.contains(&node)).collect();
            if owners.len() != 1 {
                return Err(Error::invalid(format!(
                    "leaf {} must be adjacent to exactly one inner vertex, found {}",
                    l.id,
                    owners.len()
                )));
            }
            nodes[node].adj = owners;
        }
        Ok(MarkedBinaryTree { nodes, leaf_of_branch })
    }

    pub fn to_spec(&self) -> TreeSpec {
        let mut inner = Vec::new();
        let mut leaves = Vec::new();
        for n in &self.nodes {
            match n.kind {
                Kind::Inner { color, mark } => inner.push(InnerSpec {
                    id: n.id.clone(),
                    color,
                    adj: n.adj.iter().map(|&u| self.nodes[u].id.clone()).collect(),
                    mark: self.nodes[mark].id.clone(),
                }),
                Kind::Leaf { branch } => leaves.push(LeafSpec { id: n.id.clone(), branch }),
            }
        }
        leaves.sort_by_key(|l| l.branch);
        TreeSpec { inner, leaves }
    }

    /// The two-vertex tree of the genus-2 worked example: λ₁, λ₂ black on a white
    /// vertex, λ₃, λ₄ white on a black vertex, both marking the middle edge.
    pub fn example7() -> Self {
        let n = NodeId::Num;
        let spec = TreeSpec {
            inner: vec![
                InnerSpec { id: n(1), color: Color::White, adj: vec![n(11), n(12), n(2)], mark: n(2) },
                InnerSpec { id: n(2), color: Color::Black, adj: vec![n(1), n(13), n(14)], mark: n(1) },
            ],
            leaves: (0..4).map(|k| LeafSpec { id: n(11 + k as u64), branch: k }).collect(),
        };
        MarkedBinaryTree::from_spec(&spec).expect("static tree")
    }

    /// One black inner vertex with three white leaves, the third one marked.
    pub fn simplest() -> Self {
        let n = NodeId::Num;
        let spec = TreeSpec {
            inner: vec![InnerSpec { id: n(0), color: Color::Black, adj: vec![n(1), n(2), n(3)], mark: n(3) }],
            leaves: (0..3).map(|k| LeafSpec { id: n(1 + k as u64), branch: k }).collect(),
        };
        MarkedBinaryTree::from_spec(&spec).expect("static tree")
    }

    pub fn m(&self) -> usize {
        self.leaf_of_branch.len()
    }

    pub fn genus(&self) -> usize {
        self.nodes.len() - self.m()
    }

    fn is_inner(&self, v: usize) -> bool {
        matches!(self.nodes[v].kind, Kind::Inner { .. })
    }

    pub fn node_id(&self, v: usize) -> &NodeId {
        &self.nodes[v].id
    }

    pub fn inner_color(&self, v: usize) -> Color {
        match self.nodes[v].kind {
            Kind::Inner { color, .. } => color,
            Kind::Leaf { .. } => self.leaf_color(v),
        }
    }

    pub fn mark(&self, v: usize) -> usize {
        match self.nodes[v].kind {
            Kind::Inner { mark, .. } => mark,
            Kind::Leaf { .. } => self.nodes[v].adj[0],
        }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nodes[v].adj
    }

    pub fn leaf(&self, branch: usize) -> usize {
        self.leaf_of_branch[branch]
    }

    pub fn branch_of(&self, v: usize) -> Option<usize> {
        match self.nodes[v].kind {
            Kind::Leaf { branch } => Some(branch),
            Kind::Inner { .. } => None,
        }
    }

    fn leaf_color(&self, leaf: usize) -> Color {
        match self.nodes[self.nodes[leaf].adj[0]].kind {
            Kind::Inner { color, .. } => color.other(),
            Kind::Leaf { .. } => Color::White,
        }
    }

    /// Terminal colors forced by bicoloring, as branching indices a_i.
    pub fn indices(&self) -> Vec<u8> {
        (0..self.m()).map(|b| self.leaf_color(self.leaf(b)).index()).collect()
    }

    /// Anticlockwise successor of `u` in the rotation at `v`.
    pub fn rot_next(&self, v: usize, u: usize) -> usize {
        let adj = &self.nodes[v].adj;
        let k = adj.iter().position(|&x| x == u).expect("not a neighbour");
        adj[(k + 1) % adj.len()]
    }

    pub fn rot_prev(&self, v: usize, u: usize) -> usize {
        let adj = &self.nodes[v].adj;
        let k = adj.iter().position(|&x| x == u).expect("not a neighbour");
        adj[(k + adj.len() - 1) % adj.len()]
    }

    /// Branch indices met by the boundary walk (arrive at v from u, leave
    /// towards rot_next(u)), starting at branch 0.
    pub fn cyclic_order(&self) -> Vec<usize> {
        let start = self.leaf(0);
        let mut out = vec![0];
        let (mut prev, mut cur) = (start, self.nodes[start].adj[0]);
        loop {
            if let Kind::Leaf { branch } = self.nodes[cur].kind {
                if cur == start {
                    break;
                }
                out.push(branch);
                std::mem::swap(&mut prev, &mut cur);
                continue;
            }
            let next = self.rot_next(cur, prev);
            prev = cur;
            cur = next;
        }
        out
    }

    /// Terminals of the component containing `u` once the edge (v, u) is cut,
    /// in boundary-walk order.
    pub fn side(&self, v: usize, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(v, u)];
        while let Some((p, x)) = stack.pop() {
            match self.nodes[x].kind {
                Kind::Leaf { branch } => out.push(branch),
                Kind::Inner { .. } => {
                    let c1 = self.rot_next(x, p);
                    let c2 = self.rot_next(x, c1);
                    stack.push((x, c2));
                    stack.push((x, c1));
                }
            }
        }
        out
    }

    /// Inner vertices in planar depth-first preorder from the terminal with
    /// branch index 0. This fixes the row order of period matrices.
    pub fn inner_order(&self) -> Vec<usize> {
        let start = self.leaf(0);
        let mut out = Vec::new();
        let mut stack = vec![(start, self.nodes[start].adj[0])];
        while let Some((p, x)) = stack.pop() {
            if self.is_inner(x) {
                out.push(x);
                let c1 = self.rot_next(x, p);
                let c2 = self.rot_next(x, c1);
                stack.push((x, c2));
                stack.push((x, c1));
            }
        }
        out
    }

    /// Neighbours of `v` leading to blocks B1, B2, B3.
    pub fn block_neighbors(&self, v: usize, rot: Rotation) -> [usize; 3] {
        let mark = self.mark(v);
        let step = |u| match rot {
            Rotation::Anticlockwise => self.rot_next(v, u),
            Rotation::Clockwise => self.rot_prev(v, u),
        };
        let n1 = step(mark);
        [n1, step(n1), mark]
    }

    /// The three blocks (B1, B2, B3) at inner vertex `v`.
    pub fn blocks_at(&self, v: usize) -> Result<[Vec<usize>; 3]> {
        self.blocks_at_with(v, Rotation::Anticlockwise)
    }

    pub fn blocks_at_with(&self, v: usize, rot: Rotation) -> Result<[Vec<usize>; 3]> {
        if v >= self.nodes.len() || !self.is_inner(v) {
            return Err(Error::invalid(format!("node {v} is not an inner vertex")));
        }
        Ok(self.block_neighbors(v, rot).map(|u| self.side(v, u)))
    }

    /// \overline{A_v} = −Σ_{B1} e_i + Σ_{B2} e_i.
    pub fn class_abar(&self, v: usize) -> F3Class {
        self.class_abar_with(v, Rotation::Anticlockwise)
    }

    pub fn class_abar_with(&self, v: usize, rot: Rotation) -> F3Class {
        let [b1, b2, _] = self.blocks_at_with(v, rot).expect("inner vertex");
        let mut k = vec![0i64; self.m()];
        for i in b1 {
            k[i] -= 1;
        }
        for i in b2 {
            k[i] += 1;
        }
        F3Class::raw(k).with_flag(true)
    }

    /// Coefficients c_v (in [`inner_order`](Self::inner_order)) with
    /// Λ ≡ Σ c_v \overline{A_v} mod Diag.
    pub fn abar_basis_expand(&self, lambda: &F3Class) -> Result<Vec<u8>> {
        let a = self.indices();
        if lambda.len() != self.m() {
            return Err(Error::invalid("labeling length differs from number of terminals"));
        }
        if f3::pi(&a, lambda.coeffs()) != 0 {
            return Err(Error::invalid("Π(Λ) ≠ 0"));
        }
        let order = self.inner_order();
        let mut cols: Vec<Vec<u8>> = order.iter().map(|&v| self.class_abar(v).coeffs().to_vec()).collect();
        cols.push(vec![1; self.m()]);
        let x = f3::solve(&cols, lambda.coeffs())
            .ok_or_else(|| Error::numerical("abar_basis_expand", "Λ is outside the span of the Abar basis"))?;
        Ok(x[..order.len()].to_vec())
    }

    /// Structural and combinatorial validation against a configuration.
    pub fn validate(&self, config: &BranchConfig) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name, fails: Vec<String>| {
            checks.push(Check { name, pass: fails.is_empty(), detail: fails.join(", ") });
        };
        let m = self.m();
        push(
            "terminal count",
            if m == config.m() && m >= 3 {
                vec![]
            } else {
                vec![format!("tree has {m} terminals, configuration has {}", config.m())]
            },
        );
        let s: u32 = config.indices().iter().map(|&a| a as u32).sum();
        push("index sum", if s.is_multiple_of(3) { vec![] } else { vec![format!("Σa_i = {s} ≢ 0 (mod 3)")] });

        let inner: Vec<usize> = (0..self.nodes.len()).filter(|&v| self.is_inner(v)).collect();
        let mut bad = vec![];
        for &v in &inner {
            let adj = &self.nodes[v].adj;
            let mut u = adj.clone();
            u.sort();
            u.dedup();
            if adj.len() != 3 || u.len() != 3 {
                bad.push(format!("non-trivalent vertex {} (degree {})", self.nodes[v].id, adj.len()));
            }
        }
        push("trivalent", bad);

        let mut bad = vec![];
        for &v in &inner {
            for &u in &self.nodes[v].adj {
                if u == v || !self.nodes[u].adj.contains(&v) {
                    bad.push(format!("edge {}–{} not listed at both ends", self.nodes[v].id, self.nodes[u].id));
                }
            }
        }
        push("adjacency symmetric", bad);

        let degree_sum: usize = self.nodes.iter().map(|n| n.adj.len()).sum();
        let edges = degree_sum / 2;
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            if !std::mem::replace(&mut seen[x], true) {
                stack.extend(self.nodes[x].adj.iter().copied());
            }
        }
        let connected = seen.iter().all(|&s| s);
        push(
            "connected and acyclic",
            if connected && edges + 1 == self.nodes.len() {
                vec![]
            } else {
                vec![format!("{} nodes, {edges} edges, connected = {connected}", self.nodes.len())]
            },
        );

        let mut bad = vec![];
        for &v in &inner {
            for &u in &self.nodes[v].adj {
                if u > v && self.is_inner(u) && self.inner_color(u) == self.inner_color(v) {
                    bad.push(format!("monochromatic edge {}–{}", self.nodes[v].id, self.nodes[u].id));
                }
            }
        }
        push("bicolored", bad);

        let mut bad = vec![];
        if m == config.m() {
            for b in 0..m {
                let leaf = self.leaf(b);
                let expected = config.color(b);
                if self.is_inner(self.nodes[leaf].adj[0]) && self.leaf_color(leaf) != expected {
                    bad.push(format!(
                        "color/index mismatch at leaf {} (branch {b}, a = {}, neighbour is {:?})",
                        self.nodes[leaf].id,
                        config.a(b),
                        self.inner_color(self.nodes[leaf].adj[0])
                    ));
                }
            }
        }
        push("leaf colors", bad);

        let mut bad = vec![];
        for &v in &inner {
            if !self.nodes[v].adj.contains(&self.mark(v)) {
                bad.push(format!("mark of {} is not a neighbour", self.nodes[v].id));
            }
        }
        push("markings", bad);

        push(
            "genus",
            if m >= 2 && inner.len() + 2 == m {
                vec![]
            } else {
                vec![format!("{} inner vertices for {m} terminals", inner.len())]
            },
        );

        let valid = checks.iter().all(|c| c.pass);
        ValidationReport { valid, genus: valid.then_some(inner.len()), checks }
    }

    /// Copy of the component containing `root` after cutting the edge to `cut`,
    /// with a new terminal in place of `cut`.
    fn extract(&self, root: usize, cut: usize, numbering: impl Fn(usize) -> usize, new_branch: usize) -> Derived {
        let mut map = HashMap::new();
        let mut order = vec![];
        let mut stack = vec![(cut, root)];
        while let Some((p, x)) = stack.pop() {
            map.insert(x, order.len());
            order.push(x);
            for &u in &self.nodes[x].adj {
                if u != p && !(x == root && u == cut) {
                    stack.push((x, u));
                }
            }
        }
        let new_leaf = order.len();
        let mut nodes: Vec<Node> = order
            .iter()
            .map(|&x| {
                let n = &self.nodes[x];
                let t = |u: usize| if x == root && u == cut { new_leaf } else { map[&u] };
                let kind = match n.kind {
                    Kind::Inner { color, mark } => Kind::Inner { color, mark: t(mark) },
                    Kind::Leaf { branch } => Kind::Leaf { branch: numbering(branch) },
                };
                Node { id: n.id.clone(), kind, adj: n.adj.iter().map(|&u| t(u)).collect() }
            })
            .collect();
        let id = match &self.nodes[cut].id {
            NodeId::Num(k) => NodeId::Str(format!("cut{k}")),
            NodeId::Str(s) => NodeId::Str(format!("cut{s}")),
        };
        nodes.push(Node { id, kind: Kind::Leaf { branch: new_branch }, adj: vec![0] });
        let m = order.iter().filter(|&&x| !self.is_inner(x)).count() + 1;
        let mut leaf_of_branch = vec![usize::MAX; m];
        let mut origin = vec![None; m];
        for (k, n) in nodes.iter().enumerate() {
            if let Kind::Leaf { branch } = n.kind {
                leaf_of_branch[branch] = k;
                if k != new_leaf {
                    origin[branch] = self.branch_of(order[k]);
                }
            }
        }
        Derived { tree: MarkedBinaryTree { nodes, leaf_of_branch }, origin, new_branch }
    }

    fn inner_edge(&self, e: (usize, usize)) -> Result<(usize, usize)> {
        let (u, w) = e;
        if u >= self.nodes.len() || w >= self.nodes.len() || !self.nodes[u].adj.contains(&w) {
            return Err(Error::invalid("not an edge"));
        }
        if !self.is_inner(u) || !self.is_inner(w) {
            return Err(Error::invalid("terminal edge cannot be decomposed"));
        }
        Ok(if self.inner_color(u) == Color::White { (u, w) } else { (w, u) })
    }

    /// All inner edges as (white end, black end).
    pub fn inner_edges(&self) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for v in 0..self.nodes.len() {
            if self.is_inner(v) && self.inner_color(v) == Color::White {
                for &u in &self.nodes[v].adj {
                    if self.is_inner(u) {
                        out.push((v, u));
                    }
                }
            }
        }
        out
    }

    /// Cuts the inner edge E = (p white, q black). The p-side gains a black
    /// terminal in place of q, the q-side a white terminal in place of p.
    /// Kept terminals are renumbered in increasing original order and the new
    /// terminal comes last.
    pub fn decompose(&self, e: (usize, usize)) -> Result<(Derived, Derived)> {
        let (p, q) = self.inner_edge(e)?;
        let make = |root, cut| {
            let mut kept = self.side(cut, root);
            kept.sort();
            let l = kept.len();
            let rank: HashMap<usize, usize> = kept.into_iter().enumerate().map(|(r, b)| (b, r)).collect();
            self.extract(root, cut, |b| rank[&b], l)
        };
        Ok((make(p, q), make(q, p)))
    }

    /// Λ = Λ_p + Λ_q with Λ_p constant on the q-side and Λ_q constant on the
    /// p-side, each returned in its decomposed tree's coordinates.
    pub fn split_class(&self, e: (usize, usize), lambda: &F3Class) -> Result<(F3Class, F3Class)> {
        let (p, q) = self.inner_edge(e)?;
        let a = self.indices();
        let k = lambda.coeffs();
        if f3::pi(&a, k) != 0 {
            return Err(Error::invalid("Λ is not in Ker Π"));
        }
        let (dp, dq) = self.decompose((p, q))?;
        let side_p = self.side(q, p);
        // The q-side has total index ≡ −1, so this c puts Λ_p in Ker Π.
        let c = md3(side_p.iter().map(|&i| a[i] as i64 * k[i] as i64).sum());
        let lp = (0..dp.tree.m())
            .map(|b| match dp.origin[b] {
                Some(i) => k[i] as i64,
                None => c as i64,
            })
            .collect::<Vec<_>>();
        let lq = (0..dq.tree.m())
            .map(|b| match dq.origin[b] {
                Some(i) => k[i] as i64 - c as i64,
                None => 0,
            })
            .collect::<Vec<_>>();
        Ok((F3Class::class(lp, &dp.indices())?, F3Class::class(lq, &dq.indices())?))
    }

    /// Pulls a class on a derived tree back to V(Γ): the cut-off side takes the
    /// value of the new terminal.
    pub fn embed(&self, d: &Derived, lambda: &F3Class) -> F3Class {
        let mut k = vec![lambda.coeffs()[d.new_branch] as i64; self.m()];
        for (b, o) in d.origin.iter().enumerate() {
            if let Some(i) = o {
                k[*i] = lambda.coeffs()[b] as i64;
            }
        }
        F3Class::raw(k)
    }

    /// The inner vertex adjacent to terminals `i` and `j`, if any.
    pub fn cherry(&self, i: usize, j: usize) -> Option<usize> {
        let (vi, vj) = (self.nodes[self.leaf(i)].adj[0], self.nodes[self.leaf(j)].adj[0]);
        (i != j && vi == vj).then_some(vi)
    }

    /// Tree Γ′ obtained by merging terminals i < j on a common vertex p into one
    /// terminal λ̃ at position i; the third neighbour q of p keeps its rotation.
    pub fn merge_terminals(&self, i: usize, j: usize) -> Result<Derived> {
        let (i, j) = (i.min(j), i.max(j));
        let p = self
            .cherry(i, j)
            .ok_or_else(|| Error::invalid(format!("terminals {i} and {j} do not share an inner vertex")))?;
        if self.m() < 4 {
            return Err(Error::invalid("merging needs at least 4 terminals"));
        }
        let q = *self.nodes[p]
            .adj
            .iter()
            .find(|&&u| u != self.leaf(i) && u != self.leaf(j))
            .expect("trivalent");
        Ok(self.extract(q, p, |b| if b > j { b - 1 } else { b }, i))
    }

    /// Λ′ = −(k_i+k_j)e_λ̃ + Σ_{l≠i,j} k_l e_l on the merged configuration.
    pub fn degenerate_class(&self, lambda: &F3Class, i: usize, j: usize) -> Result<F3Class> {
        let d = self.merge_terminals(i, j)?;
        let k = lambda.coeffs();
        let vals = d
            .origin
            .iter()
            .map(|o| match o {
                Some(l) => k[*l] as i64,
                None => -(k[i] as i64 + k[j] as i64),
            })
            .collect::<Vec<_>>();
        let out = F3Class::class(vals, &d.indices())?;
        let a = self.indices();
        if k[i] != k[j] && equidistribution(&a, k).balanced {
            assert!(
                equidistribution(&d.indices(), out.coeffs()).balanced,
                "degenerate_class lost equi-distribution"
            );
        }
        Ok(out)
    }
}

/// Counts #Λ_k (white, label k) and #Λ̄_k (black, label k).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equidistribution {
    pub white: [usize; 3],
    pub black: [usize; 3],
    pub balanced: bool,
}

pub fn equidistribution(a: &[u8], k: &[u8]) -> Equidistribution {
    let mut white = [0; 3];
    let mut black = [0; 3];
    for (&ai, &ki) in a.iter().zip(k) {
        if ai == 1 {
            white[ki as usize % 3] += 1;
        } else {
            black[ki as usize % 3] += 1;
        }
    }
    let d = |x: usize| white[x] as i64 - black[x] as i64;
    let balanced = d(0) == d(1) && d(1) == d(2);
    if balanced {
        debug_assert_eq!(f3::pi(a, k), 0);
    }
    Equidistribution { white, black, balanced }
}

pub fn is_equidistributed(config: &BranchConfig, lambda: &F3Class) -> bool {
    equidistribution(config.indices(), lambda.coeffs()).balanced
}

/// Generators of marked binary trees whose terminals 0..m appear in this
/// cyclic order.
pub mod gen {
    use super::*;
    use rand::Rng;

    #[derive(Clone, Debug)]
    pub enum Shape {
        Leaf(usize),
        Node(Box<Shape>, Box<Shape>),
    }

    /// Rooted plane binary trees on the consecutive leaves lo..=hi.
    pub fn shapes(lo: usize, hi: usize) -> Vec<Shape> {
        if lo == hi {
            return vec![Shape::Leaf(lo)];
        }
        let mut out = vec![];
        for s in lo..hi {
            for l in shapes(lo, s) {
                for r in shapes(s + 1, hi) {
                    out.push(Shape::Node(Box::new(l.clone()), Box::new(r)));
                }
            }
        }
        out
    }

    pub fn random_shape(lo: usize, hi: usize, rng: &mut impl Rng) -> Shape {
        if lo == hi {
            return Shape::Leaf(lo);
        }
        let s = rng.gen_range(lo..hi);
        Shape::Node(Box::new(random_shape(lo, s, rng)), Box::new(random_shape(s + 1, hi, rng)))
    }

    /// Builds the tree where leaf 0 hangs off the root of `shape` (covering
    /// leaves 1..m−1); `marks[k]` picks the marked neighbour of the k-th inner
    /// vertex in creation order.
    pub fn build(m: usize, shape: &Shape, root_color: Color, marks: &[usize]) -> MarkedBinaryTree {
        let mut nodes: Vec<Node> = vec![];
        let mut inner_seen = 0;
        fn go(
            s: &Shape,
            parent: usize,
            color: Color,
            nodes: &mut Vec<Node>,
            marks: &[usize],
            seen: &mut usize,
        ) -> usize {
            match s {
                Shape::Leaf(b) => {
                    nodes.push(Node { id: NodeId::Num(0), kind: Kind::Leaf { branch: *b }, adj: vec![parent] });
                    nodes.len() - 1
                }
                Shape::Node(l, r) => {
                    let me = nodes.len();
                    let k = *seen;
                    *seen += 1;
                    nodes.push(Node { id: NodeId::Num(0), kind: Kind::Inner { color, mark: 0 }, adj: vec![] });
                    let c1 = go(l, me, color.other(), nodes, marks, seen);
                    let c2 = go(r, me, color.other(), nodes, marks, seen);
                    let adj = vec![parent, c1, c2];
                    let mark = adj[marks.get(k).copied().unwrap_or(0) % 3];
                    nodes[me].adj = adj;
                    nodes[me].kind = Kind::Inner { color, mark };
                    me
                }
            }
        }
        nodes.push(Node { id: NodeId::Num(0), kind: Kind::Leaf { branch: 0 }, adj: vec![] });
        let root = go(shape, 0, root_color, &mut nodes, marks, &mut inner_seen);
        nodes[0].adj = vec![root];
        let mut leaf_of_branch = vec![0; m];
        for (k, n) in nodes.iter_mut().enumerate() {
            n.id = NodeId::Num(k as u64);
            if let Kind::Leaf { branch } = n.kind {
                leaf_of_branch[branch] = k;
            }
        }
        MarkedBinaryTree { nodes, leaf_of_branch }
    }

    /// Every marked binary tree with m terminals in cyclic order 0..m.
    pub fn all_trees(m: usize) -> impl Iterator<Item = MarkedBinaryTree> {
        assert!(m >= 3);
        let g = m - 2;
        shapes(1, m - 1).into_iter().flat_map(move |s| {
            [Color::White, Color::Black].into_iter().flat_map(move |c| {
                let s = s.clone();
                (0..3usize.pow(g as u32)).map(move |code| {
                    let marks: Vec<usize> = (0..g).map(|k| (code / 3usize.pow(k as u32)) % 3).collect();
                    build(m, &s, c, &marks)
                })
            })
        })
    }

    pub fn random_tree(m: usize, rng: &mut impl Rng) -> MarkedBinaryTree {
        let shape = random_shape(1, m - 1, rng);
        let color = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
        let marks: Vec<usize> = (0..m - 2).map(|_| rng.gen_range(0..3)).collect();
        build(m, &shape, color, &marks)
    }

    /// A random tree whose terminals are all white.
    pub fn random_white_tree(m: usize, rng: &mut impl Rng) -> MarkedBinaryTree {
        loop {
            let t = random_tree(m, rng);
            if t.indices().iter().all(|&a| a == 1) {
                return t;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex7() -> (MarkedBinaryTree, BranchConfig) {
        (MarkedBinaryTree::example7(), BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 1, 1]).unwrap())
    }

    #[test]
    fn example_tree_is_valid_genus_two() {
        let (t, c) = ex7();
        let r = t.validate(&c);
        assert!(r.valid, "{:?}", r.failures());
        assert_eq!(r.genus, Some(2));
        assert_eq!(t.indices(), vec![2, 2, 1, 1]);
        assert_eq!(t.cyclic_order(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn simplest_case_blocks_and_class() {
        let t = MarkedBinaryTree::simplest();
        let c = BranchConfig::from_reals(&[0.0, 1.0, 3.0], &[1, 1, 1]).unwrap();
        assert_eq!(t.validate(&c).genus, Some(1));
        let v = t.inner_order()[0];
        assert_eq!(t.blocks_at(v).unwrap(), [vec![0], vec![1], vec![2]]);
        assert_eq!(t.class_abar(v), F3Class::raw([-1, 1, 0]));
    }

    #[test]
    fn example_blocks_and_expansion() {
        let (t, _) = ex7();
        let o = t.inner_order();
        assert_eq!(t.blocks_at(o[0]).unwrap(), [vec![0], vec![1], vec![2, 3]]);
        assert_eq!(t.blocks_at(o[1]).unwrap(), [vec![2], vec![3], vec![0, 1]]);
        let diff = t.class_abar(o[0]).add(&t.class_abar(o[1]).scale(-1));
        assert_eq!(diff, F3Class::raw([-1, 1, 1, -1]));
        let lam = F3Class::class([-1, 1, 1, -1], &t.indices()).unwrap();
        assert_eq!(t.abar_basis_expand(&lam).unwrap(), vec![1, 2]);
        assert!(t.blocks_at(t.leaf(0)).is_err());
    }

    #[test]
    fn monochromatic_edge_is_reported() {
        let (t, c) = ex7();
        let mut spec = t.to_spec();
        spec.inner[1].color = Color::White;
        let bad = MarkedBinaryTree::from_spec(&spec).unwrap();
        let r = bad.validate(&c);
        assert!(!r.valid);
        assert!(r.failures().iter().any(|f| f.contains("monochromatic edge")));
    }

    #[test]
    fn unknown_ids_are_rejected_at_parse_time() {
        let mut spec = MarkedBinaryTree::example7().to_spec();
        spec.inner[0].mark = NodeId::Num(99);
        assert!(MarkedBinaryTree::from_spec(&spec).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let t = MarkedBinaryTree::example7();
        let s = t.to_spec();
        let u = MarkedBinaryTree::from_spec(&s).unwrap();
        assert_eq!(u.to_spec(), s);
    }

    #[test]
    fn decompose_middle_edge() {
        let (t, _) = ex7();
        let e = t.inner_edges()[0];
        let (p, q) = t.decompose(e).unwrap();
        for d in [&p, &q] {
            let cfg = BranchConfig::from_reals(&[0.0, 1.0, 2.0], &d.indices()).unwrap();
            assert_eq!(d.tree.validate(&cfg).genus, Some(1));
        }
        assert_eq!(p.indices(), vec![2, 2, 2]);
        assert_eq!(q.indices(), vec![1, 1, 1]);
    }

    #[test]
    fn degenerate_class_example() {
        let (t, _) = ex7();
        let lam = F3Class::class([2, 1, 1, 2], &t.indices()).unwrap();
        let d = t.merge_terminals(0, 1).unwrap();
        assert_eq!(d.indices(), vec![1, 1, 1]);
        let l2 = t.degenerate_class(&lam, 0, 1).unwrap();
        assert_eq!(l2.coeffs(), &[0, 1, 2]);
        assert!(equidistribution(&d.indices(), l2.coeffs()).balanced);
        assert!(t.degenerate_class(&lam, 1, 2).is_err());
    }

    #[test]
    fn equidistribution_examples() {
        assert!(equidistribution(&[2, 2, 1, 1], &[2, 1, 1, 2]).balanced);
        assert!(equidistribution(&[1; 6], &[0, 0, 1, 1, 2, 2]).balanced);
        assert!(equidistribution(&[1, 1, 1], &[0, 1, 2]).balanced);
        assert!(!equidistribution(&[1, 1, 1], &[0, 0, 1]).balanced);
    }

    #[test]
    fn tree_counts_are_catalan() {
        assert_eq!(gen::shapes(1, 3).len(), 2);
        assert_eq!(gen::shapes(1, 6).len(), 42);
        assert_eq!(gen::all_trees(4).count(), 2 * 2 * 9);
    }
}
