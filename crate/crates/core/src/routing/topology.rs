use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::bfs_distances;
use crate::model::{NodeId, Position};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Mbps.
    pub bandwidth: f64,
    /// Seconds per hop.
    pub latency: f64,
}

/// Undirected data links between devices, plus their positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    nodes: BTreeSet<NodeId>,
    links: BTreeMap<(NodeId, NodeId), LinkParams>,
    positions: BTreeMap<NodeId, Position>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, position: Position) {
        self.nodes.insert(id);
        self.positions.insert(id, position);
    }

    /// Adds or replaces the link between `a` and `b`.
    pub fn add_link(&mut self, a: NodeId, b: NodeId, params: LinkParams) {
        debug_assert_ne!(a, b);
        for n in [a, b] {
            if self.nodes.insert(n) {
                self.positions.entry(n).or_default();
            }
        }
        self.links.insert(key(a, b), params);
    }

    pub fn remove_link(&mut self, a: NodeId, b: NodeId) -> Option<LinkParams> {
        self.links.remove(&key(a, b))
    }

    /// Drops every link of `n`; the node itself stays listed.
    pub fn isolate(&mut self, n: NodeId) {
        self.links.retain(|(a, b), _| *a != n && *b != n);
    }

    pub fn link(&self, a: NodeId, b: NodeId) -> Option<LinkParams> {
        self.links.get(&key(a, b)).copied()
    }

    pub fn links(&self) -> impl Iterator<Item = ((NodeId, NodeId), LinkParams)> + '_ {
        self.links.iter().map(|(k, v)| (*k, *v))
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        self.links
            .keys()
            .filter_map(|(a, b)| {
                if *a == n {
                    Some(*b)
                } else if *b == n {
                    Some(*a)
                } else {
                    None
                }
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn position(&self, n: NodeId) -> Option<Position> {
        self.positions.get(&n).copied()
    }

    pub fn positions(&self) -> &BTreeMap<NodeId, Position> {
        &self.positions
    }

    pub fn set_position(&mut self, n: NodeId, p: Position) {
        self.positions.insert(n, p);
    }

    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = self.nodes.iter().map(|n| (*n, Vec::new())).collect();
        for (a, b) in self.links.keys() {
            adj.entry(*a).or_default().push(*b);
            adj.entry(*b).or_default().push(*a);
        }
        adj
    }

    /// Hop distances from `src`.
    pub fn hop_distances(&self, src: NodeId) -> BTreeMap<NodeId, u32> {
        bfs_distances(&self.adjacency(), src)
    }

    /// Longest shortest path between any two mutually reachable nodes.
    pub fn diameter(&self) -> u32 {
        let adj = self.adjacency();
        self.nodes
            .iter()
            .map(|n| bfs_distances(&adj, *n).values().copied().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        match self.nodes.iter().next() {
            None => true,
            Some(n) => self.hop_distances(*n).len() == self.nodes.len(),
        }
    }
}
