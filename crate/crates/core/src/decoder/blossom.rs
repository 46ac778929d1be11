//! Exact minimum-weight perfect matching by growing regions on the detector
//! graph.
//!
//! Each detection event starts as a region whose radius grows with time. A
//! region owns the graph nodes it has covered. When a growing region reaches
//! another region or the boundary, the event is handed to an Edmonds-style
//! matcher that works on regions rather than on explicit defect pairs:
//! alternating trees, blossoms (odd cycles of regions that grow as one) and
//! augmentations. Region radii are the dual variables, so the final matching
//! is a true minimum-weight perfect matching with boundary.
//!
//! All edge weights are even integers, which keeps every event at an integer
//! time.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::graph::MatchingGraph;
use super::DecodeError;

const NONE: u32 = u32::MAX;

/// Path between two detection events (or one event and the boundary) that
/// the matcher currently treats as tight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Edge {
    a: u32,
    /// `NONE` for the boundary.
    b: u32,
    parity: bool,
    length: i64,
}

impl Edge {
    fn rev(self) -> Edge {
        debug_assert!(self.b != NONE);
        Edge {
            a: self.b,
            b: self.a,
            ..self
        }
    }

    fn then(self, next: Edge) -> Edge {
        debug_assert_eq!(self.b, next.a);
        Edge {
            a: self.a,
            b: next.b,
            parity: self.parity ^ next.parity,
            length: self.length + next.length,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    /// Region whose shell holds this node; a detection event is owned by its
    /// own trivial region.
    owner: u32,
    /// Outermost region containing `owner`.
    top: u32,
    source: u32,
    parity: bool,
    dist: i64,
    /// Local radius is `radius(top) + offset`.
    offset: i64,
    version: u32,
}

impl Default for Node {
    fn default() -> Self {
        Self {
            owner: NONE,
            top: NONE,
            source: NONE,
            parity: false,
            dist: 0,
            offset: 0,
            version: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Region {
    /// `radius(t) = y + slope * t`.
    y: i64,
    slope: i64,
    blossom_parent: u32,
    /// Blossom cycle: child and the edge from it to the next child.
    children: Vec<(u32, Edge)>,
    shell: Vec<u32>,
    /// Detection event of a trivial region, `NONE` for blossoms.
    source: u32,
    tree: u32,
    /// Partner region (`NONE` for the boundary) and the edge leaving this region.
    matched: Option<(u32, Edge)>,
    version: u32,
    alive: bool,
}

impl Region {
    fn radius(&self, t: i64) -> i64 {
        self.y + self.slope * t
    }
}

#[derive(Debug, Clone, Default)]
struct TreeNode {
    inner: u32,
    outer: u32,
    inner_to_outer: Option<Edge>,
    parent: u32,
    /// From `inner` to the parent's outer region.
    parent_edge: Option<Edge>,
    children: Vec<u32>,
    root: u32,
    on_path: bool,
}

/// Region events carry this bit in their id.
const REGION_EVENT: u32 = 1 << 31;

/// `(time, id, version)`; ties resolve on id and version, so the processing
/// order is deterministic.
type Event = Reverse<(i64, u32, u32)>;

/// Result of one decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOutcome {
    pub predicted_flip: bool,
    pub total_weight: i64,
}

/// Matcher with reusable scratch state. One instance per worker thread.
#[derive(Debug, Clone)]
pub struct SparseBlossom<'g> {
    graph: &'g MatchingGraph,
    boundary: u32,
    nodes: Vec<Node>,
    touched: Vec<u32>,
    regions: Vec<Region>,
    num_regions: usize,
    tree: Vec<TreeNode>,
    num_tree: usize,
    free_tree: Vec<u32>,
    heap: BinaryHeap<Event>,
    now: i64,
    stack: Vec<u32>,
    collected: Vec<u32>,
    members: Vec<u32>,
    path_a: Vec<u32>,
    path_b: Vec<u32>,
    pairs: Vec<(u32, u32)>,
}

impl<'g> SparseBlossom<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        Self {
            graph,
            boundary: graph.boundary() as u32,
            nodes: vec![Node::default(); graph.num_nodes()],
            touched: Vec::new(),
            regions: Vec::new(),
            num_regions: 0,
            tree: Vec::new(),
            num_tree: 0,
            free_tree: Vec::new(),
            heap: BinaryHeap::new(),
            now: 0,
            stack: Vec::new(),
            collected: Vec::new(),
            members: Vec::new(),
            path_a: Vec::new(),
            path_b: Vec::new(),
            pairs: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g MatchingGraph {
        self.graph
    }

    /// Matched pairs from the last successful decode, `None` meaning the
    /// boundary.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, Option<usize>)> + '_ {
        self.pairs
            .iter()
            .map(|&(a, b)| (a as usize, (b != NONE).then_some(b as usize)))
    }

    fn reset(&mut self) {
        for &n in &self.touched {
            self.nodes[n as usize] = Node::default();
        }
        self.touched.clear();
        for r in &mut self.regions[..self.num_regions] {
            r.children.clear();
            r.shell.clear();
        }
        self.num_regions = 0;
        for t in &mut self.tree[..self.num_tree] {
            t.children.clear();
        }
        self.num_tree = 0;
        self.free_tree.clear();
        self.heap.clear();
        self.now = 0;
        self.pairs.clear();
    }

    /// Decodes a set of distinct detector indices.
    pub fn decode(&mut self, defects: &[usize]) -> Result<MatchOutcome, DecodeError> {
        self.reset();
        let n = self.graph.num_nodes();
        for &d in defects {
            if d >= n {
                return Err(DecodeError::DefectOutOfRange { index: d, num_nodes: n });
            }
            if self.nodes[d].owner != NONE {
                return Err(DecodeError::DuplicateDefect(d));
            }
            let r = self.new_region();
            let region = &mut self.regions[r as usize];
            region.slope = 1;
            region.source = d as u32;
            let root = self.new_tree_node();
            let t = &mut self.tree[root as usize];
            t.outer = r;
            t.root = root;
            self.regions[r as usize].tree = root;
            self.nodes[d] = Node {
                owner: r,
                top: r,
                source: d as u32,
                ..Node::default()
            };
            self.touched.push(d as u32);
        }
        for &d in defects {
            self.schedule_node(d as u32);
        }

        while let Some(Reverse((time, id, version))) = self.heap.pop() {
            if id & REGION_EVENT == 0 {
                if self.nodes[id as usize].version != version {
                    continue;
                }
                self.now = time;
                self.process_node(id);
            } else {
                let id = id & !REGION_EVENT;
                let r = &self.regions[id as usize];
                if r.version != version || !r.alive {
                    continue;
                }
                self.now = time;
                self.process_region(id);
            }
        }
        self.extract()
    }

    fn new_region(&mut self) -> u32 {
        let id = self.num_regions;
        if id == self.regions.len() {
            self.regions.push(Region::default());
        }
        self.num_regions += 1;
        let version = self.regions[id].version.wrapping_add(1);
        let r = &mut self.regions[id];
        r.y = 0;
        r.slope = 0;
        r.blossom_parent = NONE;
        r.source = NONE;
        r.tree = NONE;
        r.matched = None;
        r.version = version;
        r.alive = true;
        id as u32
    }

    fn new_tree_node(&mut self) -> u32 {
        let id = if let Some(id) = self.free_tree.pop() {
            id as usize
        } else {
            let id = self.num_tree;
            if id == self.tree.len() {
                self.tree.push(TreeNode::default());
            }
            self.num_tree += 1;
            id
        };
        let t = &mut self.tree[id];
        t.inner = NONE;
        t.outer = NONE;
        t.inner_to_outer = None;
        t.parent = NONE;
        t.parent_edge = None;
        t.children.clear();
        t.root = NONE;
        t.on_path = false;
        id as u32
    }

    fn free_tree_node(&mut self, id: u32) {
        self.tree[id as usize].children.clear();
        self.free_tree.push(id);
    }

    fn radius(&self, r: u32) -> i64 {
        self.regions[r as usize].radius(self.now)
    }

    fn slope(&self, r: u32) -> i64 {
        self.regions[r as usize].slope
    }

    fn local_radius(&self, n: u32) -> i64 {
        let node = &self.nodes[n as usize];
        self.radius(node.top) + node.offset
    }

    fn push_event(&mut self, time: i64, id: u32, version: u32) {
        self.heap.push(Reverse((time, id, version)));
    }

    /// Earliest event for node `n` and the adjacency slot that causes it.
    fn next_node_event(&self, n: u32) -> Option<(i64, usize)> {
        let node = &self.nodes[n as usize];
        let top = node.top;
        let a = self.slope(top);
        let lv = self.radius(top) + node.offset;
        let mut best: Option<(i64, usize)> = None;
        for (k, adj) in self.graph.neighbours(n as usize).iter().enumerate() {
            let t = if adj.to == self.boundary {
                if a != 1 {
                    continue;
                }
                self.now + adj.weight - lv
            } else {
                let other = &self.nodes[adj.to as usize];
                if other.owner == NONE {
                    if a != 1 {
                        continue;
                    }
                    self.now + adj.weight - lv
                } else {
                    if other.top == top {
                        continue;
                    }
                    let b = self.slope(other.top);
                    if a + b <= 0 {
                        continue;
                    }
                    let gap = adj.weight - lv - (self.radius(other.top) + other.offset);
                    debug_assert!(gap >= 0, "regions overlap");
                    if a + b == 2 {
                        debug_assert!(gap % 2 == 0, "odd gap between growing regions");
                        self.now + gap / 2
                    } else {
                        self.now + gap
                    }
                }
            };
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, k));
            }
        }
        best
    }

    fn schedule_node(&mut self, n: u32) {
        let version = self.nodes[n as usize].version.wrapping_add(1);
        self.nodes[n as usize].version = version;
        if let Some((t, _)) = self.next_node_event(n) {
            self.push_event(t, n, version);
        }
    }

    fn schedule_region(&mut self, r: u32) {
        let version = self.regions[r as usize].version.wrapping_add(1);
        self.regions[r as usize].version = version;
        if self.slope(r) != -1 {
            return;
        }
        let t = match self.regions[r as usize].shell.last() {
            Some(&u) => self.now + self.local_radius(u),
            None => self.now + self.radius(r),
        };
        self.push_event(t, r | REGION_EVENT, version);
    }

    /// All graph nodes inside region `r`, including nested blossom children.
    fn collect_nodes(&mut self, r: u32) {
        self.collected.clear();
        self.stack.clear();
        self.stack.push(r);
        while let Some(x) = self.stack.pop() {
            let region = &self.regions[x as usize];
            if region.source != NONE {
                self.collected.push(region.source);
            }
            self.collected.extend_from_slice(&region.shell);
            for &(c, _) in &region.children {
                self.stack.push(c);
            }
        }
    }

    fn reschedule_region_nodes(&mut self, r: u32) {
        self.collect_nodes(r);
        let nodes = std::mem::take(&mut self.collected);
        for &n in &nodes {
            self.schedule_node(n);
        }
        self.collected = nodes;
    }

    /// Changes a region's growth rate from now on. Lowering the slope only
    /// delays events, so pending node events are left to fire and recompute;
    /// raising it can bring events forward, so the region's nodes are
    /// rescheduled.
    fn set_slope(&mut self, r: u32, slope: i64) {
        let now = self.now;
        let region = &mut self.regions[r as usize];
        let old = region.slope;
        let radius = region.radius(now);
        region.slope = slope;
        region.y = radius - slope * now;
        if slope > old {
            self.reschedule_region_nodes(r);
        }
        self.schedule_region(r);
    }

    fn process_node(&mut self, v: u32) {
        let Some((t, k)) = self.next_node_event(v) else {
            return;
        };
        if t > self.now {
            let version = self.nodes[v as usize].version;
            self.push_event(t, v, version);
            return;
        }
        debug_assert_eq!(t, self.now);
        let adj = self.graph.neighbours(v as usize)[k];
        let node = self.nodes[v as usize];
        if adj.to == self.boundary {
            let edge = Edge {
                a: node.source,
                b: NONE,
                parity: node.parity ^ adj.parity,
                length: node.dist + adj.weight,
            };
            self.region_hit_boundary(node.top, edge);
        } else {
            let u = adj.to;
            let other = self.nodes[u as usize];
            if other.owner == NONE {
                let top = node.top;
                self.nodes[u as usize] = Node {
                    owner: top,
                    top,
                    source: node.source,
                    parity: node.parity ^ adj.parity,
                    dist: node.dist + adj.weight,
                    offset: -self.radius(top),
                    version: other.version,
                };
                self.touched.push(u);
                self.regions[top as usize].shell.push(u);
                self.schedule_node(u);
            } else {
                let edge = Edge {
                    a: node.source,
                    b: other.source,
                    parity: node.parity ^ adj.parity ^ other.parity,
                    length: node.dist + adj.weight + other.dist,
                };
                self.region_hit_region(node.top, other.top, edge);
            }
        }
        if self.nodes[v as usize].owner != NONE {
            self.schedule_node(v);
        }
    }

    fn process_region(&mut self, r: u32) {
        if self.slope(r) != -1 {
            return;
        }
        if let Some(&u) = self.regions[r as usize].shell.last() {
            if self.local_radius(u) > 0 {
                self.schedule_region(r);
                return;
            }
            self.regions[r as usize].shell.pop();
            self.release(u);
            self.schedule_region(r);
        } else if self.radius(r) > 0 {
            self.schedule_region(r);
        } else if self.regions[r as usize].source == NONE {
            self.shatter(r);
        } else {
            self.implode(r);
        }
    }

    fn release(&mut self, u: u32) {
        let version = self.nodes[u as usize].version.wrapping_add(1);
        self.nodes[u as usize] = Node {
            version,
            ..Node::default()
        };
        for adj in self.graph.neighbours(u as usize) {
            if adj.to == self.boundary {
                continue;
            }
            let x = &self.nodes[adj.to as usize];
            if x.owner != NONE && self.slope(x.top) == 1 {
                self.schedule_node(adj.to);
            }
        }
    }

    fn set_match(&mut self, a: u32, b: u32, edge: Edge) {
        self.regions[a as usize].matched = Some((b, edge));
        if b != NONE {
            self.regions[b as usize].matched = Some((a, edge.rev()));
        }
    }

    fn region_hit_boundary(&mut self, a: u32, edge: Edge) {
        let node = self.regions[a as usize].tree;
        debug_assert!(node != NONE && self.tree[node as usize].outer == a);
        self.set_match(a, NONE, edge);
        self.augment_from(node);
    }

    fn region_hit_region(&mut self, a: u32, b: u32, edge: Edge) {
        let (a, b, edge) = if self.regions[a as usize].tree == NONE {
            (b, a, edge.rev())
        } else {
            (a, b, edge)
        };
        let na = self.regions[a as usize].tree;
        debug_assert!(na != NONE && self.tree[na as usize].outer == a);
        let nb = self.regions[b as usize].tree;
        if nb != NONE {
            debug_assert_eq!(self.tree[nb as usize].outer, b);
            if self.tree[na as usize].root == self.tree[nb as usize].root {
                self.form_blossom(a, b, edge);
            } else {
                self.set_match(a, b, edge);
                self.augment_from(na);
                self.augment_from(nb);
            }
            return;
        }
        let (partner, partner_edge) = self.regions[b as usize]
            .matched
            .expect("region outside every tree must be matched");
        if partner == NONE {
            self.set_match(a, b, edge);
            self.augment_from(na);
        } else {
            let c = partner;
            let child = self.new_tree_node();
            let root = self.tree[na as usize].root;
            let t = &mut self.tree[child as usize];
            t.inner = b;
            t.outer = c;
            t.inner_to_outer = Some(partner_edge);
            t.parent = na;
            t.parent_edge = Some(edge.rev());
            t.root = root;
            self.tree[na as usize].children.push(child);
            for r in [b, c] {
                let region = &mut self.regions[r as usize];
                region.matched = None;
                region.tree = child;
            }
            self.set_slope(b, -1);
            self.set_slope(c, 1);
        }
    }

    /// Outer region of `n` has just been matched outside the tree. Flips the
    /// alternating path to the root and dissolves the tree into matched pairs.
    fn augment_from(&mut self, n: u32) {
        let mut cur = n;
        self.tree[cur as usize].on_path = true;
        while self.tree[cur as usize].parent != NONE {
            let t = &self.tree[cur as usize];
            let (inner, parent, edge) = (t.inner, t.parent, t.parent_edge.unwrap());
            let parent_outer = self.tree[parent as usize].outer;
            self.set_match(inner, parent_outer, edge);
            cur = parent;
            self.tree[cur as usize].on_path = true;
        }
        let mut members = std::mem::take(&mut self.members);
        members.clear();
        members.push(cur);
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            members.extend_from_slice(&self.tree[x as usize].children);
            i += 1;
        }
        for &x in &members {
            let t = &self.tree[x as usize];
            let (inner, outer, on_path) = (t.inner, t.outer, t.on_path);
            if !on_path {
                let edge = t.inner_to_outer.unwrap();
                self.set_match(inner, outer, edge);
            }
            for r in [inner, outer] {
                if r != NONE {
                    self.regions[r as usize].tree = NONE;
                    self.set_slope(r, 0);
                }
            }
        }
        for &x in &members {
            self.free_tree_node(x);
        }
        self.members = members;
    }

    fn depth(&self, mut n: u32) -> usize {
        let mut d = 0;
        while self.tree[n as usize].parent != NONE {
            n = self.tree[n as usize].parent;
            d += 1;
        }
        d
    }

    /// Outer regions `a` and `b` of the same tree touch along `edge`.
    fn form_blossom(&mut self, a: u32, b: u32, edge: Edge) {
        let na = self.regions[a as usize].tree;
        let nb = self.regions[b as usize].tree;
        let (mut x, mut y) = (na, nb);
        let (mut dx, mut dy) = (self.depth(x), self.depth(y));
        let mut path_a = std::mem::take(&mut self.path_a);
        let mut path_b = std::mem::take(&mut self.path_b);
        path_a.clear();
        path_b.clear();
        while dx > dy {
            path_a.push(x);
            x = self.tree[x as usize].parent;
            dx -= 1;
        }
        while dy > dx {
            path_b.push(y);
            y = self.tree[y as usize].parent;
            dy -= 1;
        }
        while x != y {
            path_a.push(x);
            path_b.push(y);
            x = self.tree[x as usize].parent;
            y = self.tree[y as usize].parent;
        }
        let lca = x;

        let mut cycle: Vec<(u32, Edge)> = Vec::new();
        let mut cur = self.tree[lca as usize].outer;
        for &p in path_a.iter().rev() {
            let t = &self.tree[p as usize];
            cycle.push((cur, t.parent_edge.unwrap().rev()));
            cycle.push((t.inner, t.inner_to_outer.unwrap()));
            cur = t.outer;
        }
        debug_assert_eq!(cur, a);
        cycle.push((a, edge));
        for &p in &path_b {
            let t = &self.tree[p as usize];
            cycle.push((t.outer, t.inner_to_outer.unwrap().rev()));
            cycle.push((t.inner, t.parent_edge.unwrap()));
        }

        let blossom = self.new_region();
        let now = self.now;
        {
            let region = &mut self.regions[blossom as usize];
            region.y = -now;
            region.slope = 1;
            region.tree = lca;
        }
        for &(child, _) in &cycle {
            let radius = self.radius(child);
            let region = &mut self.regions[child as usize];
            region.y = radius;
            region.slope = 0;
            region.version = region.version.wrapping_add(1);
            region.blossom_parent = blossom;
            region.tree = NONE;
            self.collect_nodes(child);
            for &n in &self.collected {
                let node = &mut self.nodes[n as usize];
                node.offset += radius;
                node.top = blossom;
            }
        }
        self.regions[blossom as usize].children = cycle;

        // The blossom takes the LCA's place in the tree and inherits the
        // children of every tree node it swallowed.
        for &p in path_a.iter().chain(&path_b) {
            self.tree[p as usize].on_path = true;
        }
        let mut new_children = std::mem::take(&mut self.members);
        new_children.clear();
        for &p in std::iter::once(&lca).chain(&path_a).chain(&path_b) {
            for &c in &self.tree[p as usize].children {
                if !self.tree[c as usize].on_path {
                    new_children.push(c);
                }
            }
        }
        for &c in &new_children {
            self.tree[c as usize].parent = lca;
        }
        let lca_node = &mut self.tree[lca as usize];
        lca_node.outer = blossom;
        lca_node.children.clear();
        lca_node.children.extend_from_slice(&new_children);
        self.members = new_children;
        for &p in path_a.iter().chain(&path_b) {
            self.free_tree_node(p);
        }
        self.path_a = path_a;
        self.path_b = path_b;
        self.reschedule_region_nodes(blossom);
    }

    /// A trivial inner region has shrunk to nothing: its parent and child
    /// outer regions now touch through it.
    fn implode(&mut self, m: u32) {
        let n = self.regions[m as usize].tree;
        let t = &self.tree[n as usize];
        let outer = t.outer;
        let to_parent = t.parent_edge.unwrap();
        let to_outer = t.inner_to_outer.unwrap();
        let parent_outer = self.tree[t.parent as usize].outer;
        self.form_blossom(outer, parent_outer, to_outer.rev().then(to_parent));
    }

    /// Index within blossom `b` of the child containing detection event `s`.
    fn child_index(&self, b: u32, s: u32) -> usize {
        let mut r = self.nodes[s as usize].owner;
        while self.regions[r as usize].blossom_parent != b {
            r = self.regions[r as usize].blossom_parent;
            debug_assert!(r != NONE);
        }
        self.regions[b as usize]
            .children
            .iter()
            .position(|&(c, _)| c == r)
            .expect("child present in cycle")
    }

    /// An inner blossom has shrunk to nothing: split it back into its
    /// children, keeping the even alternating path inside the tree.
    fn shatter(&mut self, b: u32) {
        let n = self.regions[b as usize].tree;
        let to_parent = self.tree[n as usize].parent_edge.unwrap();
        let to_outer = self.tree[n as usize].inner_to_outer.unwrap();
        let i_in = self.child_index(b, to_parent.a);
        let i_out = self.child_index(b, to_outer.a);
        let children = std::mem::take(&mut self.regions[b as usize].children);
        let k = children.len();

        for &(c, _) in &children {
            let radius = self.radius(c);
            self.regions[c as usize].blossom_parent = NONE;
            self.collect_nodes(c);
            for &node in &self.collected {
                let node = &mut self.nodes[node as usize];
                node.offset -= radius;
                node.top = c;
            }
        }

        // Even path from the entry child to the exit child.
        let forward = ((i_out + k - i_in) % k).is_multiple_of(2);
        let step = |i: usize| if forward { (i + 1) % k } else { (i + k - 1) % k };
        let edge_to_next = |i: usize| {
            if forward {
                children[i].1
            } else {
                children[(i + k - 1) % k].1.rev()
            }
        };
        let mut path = vec![i_in];
        while *path.last().unwrap() != i_out {
            let last = *path.last().unwrap();
            path.push(step(last));
        }

        let root = self.tree[n as usize].root;
        let parent = self.tree[n as usize].parent;
        let mut above = parent;
        let mut above_edge = to_parent;
        let mut j = 0;
        while j + 1 < path.len() {
            let (inner, outer) = (children[path[j]].0, children[path[j + 1]].0);
            let node = self.new_tree_node();
            let t = &mut self.tree[node as usize];
            t.inner = inner;
            t.outer = outer;
            t.inner_to_outer = Some(edge_to_next(path[j]));
            t.parent = above;
            t.parent_edge = Some(above_edge);
            t.root = root;
            if above == parent {
                let siblings = &mut self.tree[parent as usize].children;
                let pos = siblings.iter().position(|&c| c == n).unwrap();
                siblings[pos] = node;
            } else {
                self.tree[above as usize].children.push(node);
            }
            self.regions[inner as usize].tree = node;
            self.regions[outer as usize].tree = node;
            above = node;
            above_edge = edge_to_next(path[j + 1]).rev();
            j += 2;
        }
        let exit = children[i_out].0;
        {
            let t = &mut self.tree[n as usize];
            t.inner = exit;
            t.parent = above;
            t.parent_edge = Some(above_edge);
        }
        if above != parent {
            self.tree[above as usize].children.push(n);
        }
        self.regions[exit as usize].tree = n;

        // The other arc pairs up along the cycle.
        let (start, len) = if forward {
            ((i_out + 1) % k, k - path.len())
        } else {
            ((i_in + 1) % k, k - path.len())
        };
        for m in (0..len).step_by(2) {
            let i = (start + m) % k;
            let (c1, e) = children[i];
            let c2 = children[(i + 1) % k].0;
            self.set_match(c1, c2, e);
        }

        self.regions[b as usize].alive = false;
        self.regions[b as usize].version = self.regions[b as usize].version.wrapping_add(1);
        for (idx, &(c, _)) in children.iter().enumerate() {
            let on_path = path.iter().position(|&p| p == idx);
            let slope = match on_path {
                Some(pos) if pos % 2 == 0 => -1,
                Some(_) => 1,
                None => 0,
            };
            self.set_slope(c, slope);
            if slope == 0 {
                // Frozen before and after, but no longer inside a shrinking
                // blossom, so growing neighbours can reach it again.
                self.regions[c as usize].tree = NONE;
                self.reschedule_region_nodes(c);
            }
        }
    }

    fn extract(&mut self) -> Result<MatchOutcome, DecodeError> {
        let mut outcome = MatchOutcome {
            predicted_flip: false,
            total_weight: 0,
        };
        let mut work: Vec<(u32, u32)> = Vec::new();
        for r in 0..self.num_regions as u32 {
            let region = &self.regions[r as usize];
            if !region.alive || region.blossom_parent != NONE {
                continue;
            }
            let Some((partner, edge)) = region.matched else {
                return Err(DecodeError::Unmatched);
            };
            if partner != NONE && partner < r {
                continue;
            }
            self.pairs.push((edge.a, edge.b));
            outcome.predicted_flip ^= edge.parity;
            outcome.total_weight += edge.length;
            work.push((r, edge.a));
            if partner != NONE {
                work.push((partner, edge.b));
            }
        }
        while let Some((r, s)) = work.pop() {
            if self.regions[r as usize].source != NONE {
                continue;
            }
            let i = self.child_index(r, s);
            let children = &self.regions[r as usize].children;
            let k = children.len();
            work.push((children[i].0, s));
            for m in (1..k).step_by(2) {
                let (c1, e) = children[(i + m) % k];
                let c2 = children[(i + m + 1) % k].0;
                self.pairs.push((e.a, e.b));
                outcome.predicted_flip ^= e.parity;
                outcome.total_weight += e.length;
                work.push((c1, e.a));
                work.push((c2, e.b));
            }
        }
        Ok(outcome)
    }
}
