//! The hierarchical filter index: a balanced B+-tree-like structure whose
//! leaves are the indexed Bloom filters and whose inner nodes hold the
//! bitwise OR of their children. A query walks down from the root, pruning
//! every subtree whose aggregate does not match, so an all-membership
//! lookup touches far fewer filters than a linear scan whenever the upper
//! aggregates are selective.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::HashFamily;
use crate::metric::Metric;

struct Node {
    /// External filter id for leaves; generated id for inner nodes.
    id: u64,
    val: BitVector,
    parent: Option<usize>,
    /// Empty for leaves.
    children: Vec<usize>,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Tree index over Bloom filters that all share one hash family.
///
/// `order` is the minimum fanout `d`: non-root inner nodes keep between
/// `d` and `2d` children and the root between 2 and `2d`, with one
/// exception: when the no-split heuristic is enabled, a node whose value
/// has every bit set is allowed to keep absorbing children past `2d`,
/// because splitting a saturated node only adds levels that cannot prune
/// anything.
///
/// Every operation adds the number of nodes it touched (value read or
/// written, or child/parent links rewritten) to an access counter, the
/// hardware-independent cost measure reported by the benchmark harness.
/// Readers may share the tree across threads; mutation requires exclusive
/// access, and per-operation cost readings only make sense single-threaded
/// (reset, run one operation, read).
pub struct BloofiTree {
    nodes: Vec<Option<Node>>,
    free: Vec<usize>,
    root: Option<usize>,
    order: usize,
    metric: Metric,
    heuristic: bool,
    family: Arc<HashFamily>,
    leaves: HashMap<u64, usize>,
    next_inner_id: u64,
    accesses: AtomicU64,
}

impl BloofiTree {
    pub fn new(
        family: Arc<HashFamily>,
        order: usize,
        metric: Metric,
        heuristic: bool,
    ) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter("tree order must be at least 2".into()));
        }
        Ok(BloofiTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: None,
            order,
            metric,
            heuristic,
            family,
            leaves: HashMap::new(),
            next_inner_id: 0,
            accesses: AtomicU64::new(0),
        })
    }

    /// Builds a tree from a whole collection at once: the filters are first
    /// chained greedily (start from the all-zero vector, repeatedly pick
    /// the unplaced filter closest to the previously placed one, an O(N^2)
    /// ordering pass), then each filter is attached next to the rightmost
    /// leaf. Ties in the chain keep input order.
    pub fn bulk_build(
        family: Arc<HashFamily>,
        order: usize,
        metric: Metric,
        heuristic: bool,
        filters: &[(u64, BloomFilter)],
    ) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::InvalidParameter("bulk build needs at least one filter".into()));
        }
        let mut tree = BloofiTree::new(family.clone(), order, metric, heuristic)?;
        let mut seen = std::collections::HashSet::new();
        for (id, filter) in filters {
            if filter.family().as_ref() != family.as_ref() {
                return Err(Error::FamilyMismatch);
            }
            if !seen.insert(*id) {
                return Err(Error::DuplicateId(*id));
            }
        }

        let mut remaining: Vec<usize> = (0..filters.len()).collect();
        let mut prev = BitVector::new(family.m());
        let mut ordering = Vec::with_capacity(filters.len());
        while !remaining.is_empty() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (slot, &idx) in remaining.iter().enumerate() {
                let d = metric.distance(&prev, filters[idx].1.bits());
                if d < best_d {
                    best_d = d;
                    best = slot;
                }
            }
            let idx = remaining.remove(best);
            prev = filters[idx].1.bits().clone();
            ordering.push(idx);
        }
        for idx in ordering {
            let (id, filter) = &filters[idx];
            tree.insert_rightmost(*id, filter.bits().clone());
        }
        Ok(tree)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn heuristic_enabled(&self) -> bool {
        self.heuristic
    }

    pub fn family(&self) -> &Arc<HashFamily> {
        &self.family
    }

    /// Number of indexed filters (leaves).
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Total live nodes, leaves included.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    /// Edges from the root down to the leaf level (0 when the root is a
    /// single leaf or the tree is empty).
    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut cur = self.root;
        while let Some(i) = cur {
            match self.node(i).children.first() {
                Some(&c) => {
                    h += 1;
                    cur = Some(c);
                }
                None => break,
            }
        }
        h
    }

    pub fn contains_id(&self, id: u64) -> bool {
        self.leaves.contains_key(&id)
    }

    pub fn root_value(&self) -> Option<&BitVector> {
        self.root.map(|i| &self.node(i).val)
    }

    /// Nodes touched since the last reset. Callers measuring per-operation
    /// cost reset the counter, run one operation, and read it back.
    pub fn access_cost(&self) -> u64 {
        self.accesses.load(Ordering::Relaxed)
    }

    pub fn reset_access_cost(&self) {
        self.accesses.store(0, Ordering::Relaxed);
    }

    /// Identifiers of all leaf filters matching `element`, ascending. Each
    /// node whose value is tested counts one access; a subtree is pruned as
    /// soon as its aggregate fails to match.
    pub fn find_matches(&self, element: u64) -> Vec<u64> {
        let Some(root) = self.root else {
            return Vec::new();
        };
        let positions = self.family.positions(element);
        let mut out = Vec::new();
        self.find_rec(root, &positions, &mut out);
        out.sort_unstable();
        out
    }

    fn find_rec(&self, node: usize, positions: &[usize], out: &mut Vec<u64>) {
        self.touch(1);
        let n = self.node(node);
        if !positions.iter().all(|&p| n.val.get(p)) {
            return;
        }
        if n.is_leaf() {
            out.push(n.id);
            return;
        }
        for &c in &n.children {
            self.find_rec(c, positions, out);
        }
    }

    /// Inserts a filter under a fresh leaf, descending through the child
    /// with the smallest distance to the incoming value (first child wins
    /// ties) and splitting overfull ancestors on the way back up.
    pub fn insert(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        if self.leaves.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.insert_bits(id, filter.bits().clone());
        Ok(())
    }

    fn insert_bits(&mut self, id: u64, bits: BitVector) {
        match self.root {
            None => {
                let leaf = self.alloc(Node { id, val: bits, parent: None, children: Vec::new() });
                self.touch(1);
                self.root = Some(leaf);
                self.leaves.insert(id, leaf);
            }
            Some(root) if self.node(root).is_leaf() => {
                let leaf = self.alloc(Node { id, val: bits, parent: None, children: Vec::new() });
                self.touch(1);
                self.grow_root(root, leaf);
                self.leaves.insert(id, leaf);
            }
            Some(root) => {
                let leaf = self.alloc(Node {
                    id,
                    val: bits.clone(),
                    parent: None,
                    children: Vec::new(),
                });
                self.touch(1);
                let pending = self.insert_rec(root, &bits, leaf);
                debug_assert!(pending.is_none(), "root splits are resolved in insert_rec");
                self.leaves.insert(id, leaf);
            }
        }
    }

    /// Recursive step of the insertion. Returns a freshly split-off node
    /// that still needs to be linked beside `node`'s parent; the root call
    /// always resolves to `None` because a root split grows a new root.
    fn insert_rec(&mut self, node: usize, bits: &BitVector, new_leaf: usize) -> Option<usize> {
        if self.node(node).is_leaf() {
            // Closest leaf found: the new leaf becomes its next sibling.
            return self.insert_into_parent(new_leaf, node);
        }
        self.touch(1);
        self.node_mut(node).val.union_with(bits);
        let children = self.node(node).children.clone();
        let mut best = children[0];
        let mut best_d = f64::INFINITY;
        for &c in &children {
            self.touch(1);
            let d = self.metric.distance(&self.node(c).val, bits);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        let sibling = self.insert_rec(best, bits, new_leaf)?;
        if self.node(node).parent.is_some() {
            self.insert_into_parent(sibling, node)
        } else {
            self.grow_root(node, sibling);
            None
        }
    }

    /// Links `new_entry` immediately after `after` under `after`'s parent,
    /// then splits the parent if it overflowed. Returns the split-off
    /// node, which the caller must link one level further up.
    fn insert_into_parent(&mut self, new_entry: usize, after: usize) -> Option<usize> {
        let parent = self.node(after).parent.expect("insert_into_parent requires a parent");
        let pos = self.child_position(parent, after);
        self.node_mut(parent).children.insert(pos + 1, new_entry);
        self.node_mut(new_entry).parent = Some(parent);
        self.touch(1);
        self.maybe_split(parent)
    }

    /// Splits `node` when it holds more than `2d` children by moving its
    /// last `d` children to a new sibling and recomputing both aggregates
    /// exactly. A saturated (all-ones) node is left whole when the
    /// heuristic is on. The new sibling is returned unlinked.
    fn maybe_split(&mut self, node: usize) -> Option<usize> {
        if self.node(node).children.len() <= 2 * self.order {
            return None;
        }
        if self.heuristic && self.node(node).val.is_all_ones() {
            return None;
        }
        let moved = {
            let order = self.order;
            let n = self.node_mut(node);
            let at = n.children.len() - order;
            n.children.split_off(at)
        };
        let sib_val = self.or_of(&moved);
        let id = self.fresh_inner_id();
        let sib = self.alloc(Node { id, val: sib_val, parent: None, children: moved });
        let moved_count = self.node(sib).children.len();
        for i in 0..moved_count {
            let c = self.node(sib).children[i];
            self.node_mut(c).parent = Some(sib);
        }
        let val = self.or_of(&self.node(node).children.clone());
        self.node_mut(node).val = val;
        self.touch(2 + moved_count as u64);
        Some(sib)
    }

    /// Removes the leaf holding `id`, rebalancing underflowing ancestors by
    /// redistribution with an adjacent sibling (preferring the right one)
    /// or by merging into it, and recomputing aggregates up to the root.
    pub fn delete(&mut self, id: u64) -> Result<()> {
        let leaf = self.leaves.remove(&id).ok_or(Error::UnknownId(id))?;
        if self.root == Some(leaf) {
            self.root = None;
            self.free_node(leaf);
            self.touch(1);
            return Ok(());
        }
        self.remove_child(leaf);
        self.free_node(leaf);
        Ok(())
    }

    fn remove_child(&mut self, child: usize) {
        let parent = self.node(child).parent.expect("remove_child requires a parent");
        let pos = self.child_position(parent, child);
        self.node_mut(parent).children.remove(pos);
        self.touch(1);

        if self.root == Some(parent) && self.node(parent).children.len() == 1 {
            // Height shrinks: the lone remaining child is the new root.
            let only = self.node(parent).children[0];
            self.node_mut(only).parent = None;
            self.root = Some(only);
            self.free_node(parent);
            self.touch(1);
            return;
        }

        let underflow = self.root != Some(parent) && self.node(parent).children.len() < self.order;
        if !underflow {
            self.recompute_to_root(parent);
            return;
        }

        let (sibling, sibling_on_right) = self.adjacent_sibling(parent);
        if self.node(sibling).children.len() > self.order {
            self.redistribute(parent, sibling, sibling_on_right);
        } else {
            self.merge_into_sibling(parent, sibling, sibling_on_right);
        }
    }

    /// Moves children from the richer `sibling` into the underflowing
    /// `node` so the two even out, taking them from the adjacent end to
    /// preserve the left-to-right leaf order.
    fn redistribute(&mut self, node: usize, sibling: usize, sibling_on_right: bool) {
        let t = self.node(node).children.len();
        let s = self.node(sibling).children.len();
        debug_assert!(t < self.order && s > self.order);
        // Even the pair out, but never push `node` past its 2d cap (the
        // sibling can exceed 2d under the all-ones exemption).
        let move_n = ((s - t) / 2).min(2 * self.order - t);
        let moved: Vec<usize> = if sibling_on_right {
            let taken: Vec<usize> = self.node_mut(sibling).children.drain(..move_n).collect();
            self.node_mut(node).children.extend(&taken);
            taken
        } else {
            let at = s - move_n;
            let taken = self.node_mut(sibling).children.split_off(at);
            self.node_mut(node).children.splice(0..0, taken.iter().copied());
            taken
        };
        for &c in &moved {
            self.node_mut(c).parent = Some(node);
        }
        self.touch(moved.len() as u64);
        self.recompute_val(sibling);
        self.recompute_val(node);
        // Losing children may have dropped the sibling out of its
        // saturation exemption while it still exceeds 2d.
        while let Some(extra) = self.maybe_split(sibling) {
            self.link_after(sibling, extra);
        }
        let parent = self.node(node).parent.expect("redistributed node is never the root");
        self.recompute_to_root(parent);
    }

    /// Gives all of `node`'s children to `sibling` and deletes `node`,
    /// recursing into the parent level.
    fn merge_into_sibling(&mut self, node: usize, sibling: usize, sibling_on_right: bool) {
        let moved: Vec<usize> = std::mem::take(&mut self.node_mut(node).children);
        if sibling_on_right {
            self.node_mut(sibling).children.splice(0..0, moved.iter().copied());
        } else {
            self.node_mut(sibling).children.extend(&moved);
        }
        for &c in &moved {
            self.node_mut(c).parent = Some(sibling);
        }
        self.touch(moved.len() as u64);
        self.recompute_val(sibling);
        self.remove_child(node);
        self.free_node(node);
    }

    /// OR-updates the leaf for `id` and every ancestor with `filter`. The
    /// new value must be a superset of the stored one: in-place updates
    /// model element additions, and a shrinking filter would silently
    /// leave stale bits in the aggregates (rebuild instead).
    pub fn update(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        let leaf = *self.leaves.get(&id).ok_or(Error::UnknownId(id))?;
        if !self.node(leaf).val.is_subset_of(filter.bits()) {
            return Err(Error::NonMonotonicUpdate(id));
        }
        let bits = filter.bits().clone();
        let mut cur = Some(leaf);
        while let Some(i) = cur {
            self.touch(1);
            self.node_mut(i).val.union_with(&bits);
            cur = self.node(i).parent;
        }
        Ok(())
    }

    /// Reconstructs the tree from its current leaves with a fresh run of
    /// iterative inserts (ascending id order). Useful when many deletes or
    /// updates have degraded how well similar filters share subtrees.
    pub fn rebuild(&mut self) {
        let mut entries: Vec<(u64, BitVector)> = self
            .leaves
            .iter()
            .map(|(&id, &idx)| (id, self.node(idx).val.clone()))
            .collect();
        entries.sort_unstable_by_key(|(id, _)| *id);
        let mut fresh =
            BloofiTree::new(self.family.clone(), self.order, self.metric, self.heuristic)
                .expect("order already validated");
        for (id, bits) in entries {
            fresh.insert_bits(id, bits);
        }
        fresh.touch(self.access_cost());
        fresh.next_inner_id = fresh.next_inner_id.max(self.next_inner_id);
        *self = fresh;
    }

    // ---- internals -----------------------------------------------------

    fn node(&self, i: usize) -> &Node {
        self.nodes[i].as_ref().expect("stale node index")
    }

    fn node_mut(&mut self, i: usize) -> &mut Node {
        self.nodes[i].as_mut().expect("stale node index")
    }

    fn alloc(&mut self, node: Node) -> usize {
        match self.free.pop() {
            Some(i) => {
                self.nodes[i] = Some(node);
                i
            }
            None => {
                self.nodes.push(Some(node));
                self.nodes.len() - 1
            }
        }
    }

    fn free_node(&mut self, i: usize) {
        self.nodes[i] = None;
        self.free.push(i);
    }

    fn fresh_inner_id(&mut self) -> u64 {
        let id = self.next_inner_id;
        self.next_inner_id += 1;
        id
    }

    fn touch(&self, n: u64) {
        self.accesses.fetch_add(n, Ordering::Relaxed);
    }

    fn child_position(&self, parent: usize, child: usize) -> usize {
        self.node(parent)
            .children
            .iter()
            .position(|&c| c == child)
            .expect("child not linked under parent")
    }

    fn or_of(&self, nodes: &[usize]) -> BitVector {
        let mut val = self.node(nodes[0]).val.clone();
        for &i in &nodes[1..] {
            val.union_with(&self.node(i).val);
        }
        val
    }

    /// Puts a new root above `a` with children `[a, b]`.
    fn grow_root(&mut self, a: usize, b: usize) {
        let mut val = self.node(a).val.clone();
        val.union_with(&self.node(b).val);
        let id = self.fresh_inner_id();
        let root = self.alloc(Node { id, val, parent: None, children: vec![a, b] });
        self.node_mut(a).parent = Some(root);
        self.node_mut(b).parent = Some(root);
        self.root = Some(root);
        self.touch(1);
    }

    fn link_after(&mut self, node: usize, sibling: usize) {
        let parent = self.node(node).parent.expect("link_after requires a parent");
        let pos = self.child_position(parent, node);
        self.node_mut(parent).children.insert(pos + 1, sibling);
        self.node_mut(sibling).parent = Some(parent);
        self.touch(1);
    }

    /// Returns the right-adjacent sibling when there is one, otherwise the
    /// left one.
    fn adjacent_sibling(&self, node: usize) -> (usize, bool) {
        let parent = self.node(node).parent.expect("the root has no sibling");
        let children = &self.node(parent).children;
        let pos = children.iter().position(|&c| c == node).expect("child not linked");
        if pos + 1 < children.len() {
            (children[pos + 1], true)
        } else {
            (children[pos - 1], false)
        }
    }

    fn recompute_val(&mut self, node: usize) {
        let children = self.node(node).children.clone();
        debug_assert!(!children.is_empty());
        let val = self.or_of(&children);
        self.node_mut(node).val = val;
        self.touch(1 + children.len() as u64);
    }

    /// Recomputes aggregates from `start` to the root, then splits any node
    /// on that path that lost its all-ones exemption while oversized.
    fn recompute_to_root(&mut self, start: usize) {
        let mut cur = Some(start);
        while let Some(i) = cur {
            self.recompute_val(i);
            cur = self.node(i).parent;
        }
        self.repair_overflow(start);
    }

    /// Walks from `start` to the current root, splitting every node that
    /// exceeds `2d` children without being saturated. Splitting the root
    /// grows a new one, and split-off siblings may in turn overflow the
    /// next level, which the walk picks up as it climbs.
    fn repair_overflow(&mut self, start: usize) {
        let mut node = start;
        loop {
            while let Some(sib) = self.maybe_split(node) {
                if self.node(node).parent.is_some() {
                    self.link_after(node, sib);
                } else {
                    self.grow_root(node, sib);
                }
            }
            match self.node(node).parent {
                Some(p) => node = p,
                None => return,
            }
        }
    }

    /// Bulk-construction insert: OR the value down the rightmost spine and
    /// attach the new leaf beside the rightmost leaf, unwinding splits the
    /// same way ordinary inserts do.
    fn insert_rightmost(&mut self, id: u64, bits: BitVector) {
        let Some(root) = self.root else {
            self.insert_bits(id, bits);
            return;
        };
        if self.node(root).is_leaf() {
            self.insert_bits(id, bits);
            return;
        }
        let leaf = self.alloc(Node { id, val: bits.clone(), parent: None, children: Vec::new() });
        self.touch(1);
        self.leaves.insert(id, leaf);

        let mut spine = Vec::new();
        let mut cur = root;
        while !self.node(cur).is_leaf() {
            self.touch(1);
            self.node_mut(cur).val.union_with(&bits);
            spine.push(cur);
            cur = *self.node(cur).children.last().expect("inner node has children");
        }
        let mut pending = self.insert_into_parent(leaf, cur);
        for idx in (0..spine.len()).rev() {
            let Some(sib) = pending else {
                break;
            };
            let node = spine[idx];
            pending = if self.node(node).parent.is_some() {
                self.insert_into_parent(sib, node)
            } else {
                self.grow_root(node, sib);
                None
            };
        }
        debug_assert!(pending.is_none());
    }

    /// Verifies the structural invariants; intended for tests and
    /// debugging. Checks exact aggregation, parent links, leaf depth,
    /// fanout bounds (with the all-ones exemption), the node-count bound
    /// `ceil(N + (N-1)/(d-1))`, and that the height fits the minimum
    /// population a tree of that height must hold.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else {
            if !self.leaves.is_empty() {
                return Err("empty tree with registered leaves".into());
            }
            if self.node_count() != 0 {
                return Err("empty tree with live nodes".into());
            }
            return Ok(());
        };
        if self.node(root).parent.is_some() {
            return Err("root has a parent".into());
        }

        let d = self.order;
        let mut stack = vec![(root, 0usize)];
        let mut visited = 0usize;
        let mut leaf_depth: Option<usize> = None;
        let mut leaf_seen = 0usize;
        while let Some((i, depth)) = stack.pop() {
            visited += 1;
            let n = self.node(i);
            if n.is_leaf() {
                leaf_seen += 1;
                match leaf_depth {
                    None => leaf_depth = Some(depth),
                    Some(ld) if ld != depth => {
                        return Err(format!("leaf {} at depth {depth}, expected {ld}", n.id))
                    }
                    _ => {}
                }
                match self.leaves.get(&n.id) {
                    Some(&idx) if idx == i => {}
                    _ => return Err(format!("leaf {} not registered in the id map", n.id)),
                }
                continue;
            }

            let len = n.children.len();
            let exempt = self.heuristic && n.val.is_all_ones();
            if len > 2 * d && !exempt {
                return Err(format!("node {} has {len} children without saturation", n.id));
            }
            let min = if i == root { 2 } else { d };
            if len < min {
                return Err(format!("node {} underflows with {len} children", n.id));
            }
            let expect = self.or_of(&n.children);
            if expect != n.val {
                return Err(format!("node {} value is not the OR of its children", n.id));
            }
            for &c in &n.children {
                if self.node(c).parent != Some(i) {
                    return Err(format!("child of node {} has a wrong parent link", n.id));
                }
                stack.push((c, depth + 1));
            }
        }

        if leaf_seen != self.leaves.len() {
            return Err(format!("{} leaves walked, {} registered", leaf_seen, self.leaves.len()));
        }
        if visited != self.node_count() {
            return Err(format!("{} nodes reachable, {} live", visited, self.node_count()));
        }
        let n = self.leaves.len();
        let bound = n + (n.saturating_sub(1) + d.saturating_sub(2)) / (d - 1);
        if visited > bound {
            return Err(format!("{visited} nodes exceed the bound {bound} for {n} leaves"));
        }
        let h = leaf_depth.unwrap_or(0);
        if h == 0 {
            if n != 1 {
                return Err(format!("height 0 with {n} leaves"));
            }
        } else {
            let min_leaves = 2u128 * (d as u128).pow(h as u32 - 1);
            if (n as u128) < min_leaves {
                return Err(format!("height {h} needs at least {min_leaves} leaves, has {n}"));
            }
        }
        Ok(())
    }
}

/// Construction and inspection helpers for tests: golden trees from the
/// worked examples are laid out explicitly rather than grown by inserts.
#[doc(hidden)]
pub mod testkit {
    use super::*;

    /// Declarative tree layout.
    pub enum Layout {
        Leaf { id: u64, bits: &'static str },
        Inner(Vec<Layout>),
    }

    pub fn leaf(id: u64, bits: &'static str) -> Layout {
        Layout::Leaf { id, bits }
    }

    pub fn inner(children: Vec<Layout>) -> Layout {
        Layout::Inner(children)
    }

    /// Materializes an explicit layout (inner values become the OR of the
    /// children) and verifies the result against the tree invariants.
    pub fn build_tree(
        family: Arc<HashFamily>,
        order: usize,
        metric: Metric,
        heuristic: bool,
        layout: &Layout,
    ) -> BloofiTree {
        let mut tree = BloofiTree::new(family, order, metric, heuristic).unwrap();
        let root = build_node(&mut tree, layout, None);
        tree.root = Some(root);
        tree.check_invariants().expect("explicit layout violates tree invariants");
        tree
    }

    fn build_node(tree: &mut BloofiTree, layout: &Layout, parent: Option<usize>) -> usize {
        match layout {
            Layout::Leaf { id, bits } => {
                let val = BitVector::from_bit_string(bits).unwrap();
                let idx = tree.alloc(Node { id: *id, val, parent, children: Vec::new() });
                tree.leaves.insert(*id, idx);
                idx
            }
            Layout::Inner(children) => {
                let id = tree.fresh_inner_id();
                let idx = tree.alloc(Node {
                    id,
                    val: BitVector::new(tree.family.m()),
                    parent,
                    children: Vec::new(),
                });
                let child_idx: Vec<usize> =
                    children.iter().map(|c| build_node(tree, c, Some(idx))).collect();
                let val = tree.or_of(&child_idx);
                let node = tree.node_mut(idx);
                node.children = child_idx;
                node.val = val;
                idx
            }
        }
    }

    /// Snapshot of a tree's shape and values for golden comparisons.
    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct NodeView {
        pub value: String,
        pub leaf_id: Option<u64>,
        pub children: Vec<NodeView>,
    }

    pub fn view_leaf(id: u64, value: &str) -> NodeView {
        NodeView { value: value.to_string(), leaf_id: Some(id), children: Vec::new() }
    }

    pub fn view_inner(value: &str, children: Vec<NodeView>) -> NodeView {
        NodeView { value: value.to_string(), leaf_id: None, children }
    }

    /// Dumps the current tree; `None` for an empty tree.
    pub fn snapshot(tree: &BloofiTree) -> Option<NodeView> {
        tree.root.map(|root| snap(tree, root))
    }

    fn snap(tree: &BloofiTree, i: usize) -> NodeView {
        let n = tree.node(i);
        NodeView {
            value: n.val.to_bit_string(),
            leaf_id: n.is_leaf().then_some(n.id),
            children: n.children.iter().map(|&c| snap(tree, c)).collect(),
        }
    }
}
