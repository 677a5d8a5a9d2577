//! Augmenting-path search with blossom contraction over an alternating
//! forest.
//!
//! A [`Search`] is begun on a graph and a mate array and then advanced with
//! an operation budget, so a long search can be spread over many calls as
//! long as the graph it reads does not change in between. In multi mode,
//! every augmentation retires the trees it used and the pass continues with
//! the rest; a pass that augments nothing certifies that the matching is
//! maximum.

use std::collections::VecDeque;

use crate::graph::NodeId;
use crate::matching::{Adjacency, FREE};

const UNLABELED: u8 = 0;
const EVEN: u8 = 1;
const ODD: u8 = 2;

pub enum Roots<'a> {
    AllFree,
    Only(&'a [NodeId]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Pending,
    Done { augmented: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Search {
    base: Vec<NodeId>,
    parent: Vec<NodeId>,
    label: Vec<u8>,
    root: Vec<NodeId>,
    dead: Vec<bool>,
    mark: Vec<u32>,
    in_blossom: Vec<u32>,
    stamp: u32,
    queue: VecDeque<NodeId>,
    current: Option<NodeId>,
    buf: Vec<NodeId>,
    pos: usize,
    multi: bool,
    augmented: usize,
    done: bool,
    /// Elementary operations performed (cumulative).
    pub ops: u64,
}

impl Search {
    pub fn new() -> Self {
        Search {
            done: true,
            ..Default::default()
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Label the roots and reset all per-search state.
    pub fn begin<A: Adjacency + ?Sized>(&mut self, g: &A, mate: &[NodeId], roots: Roots<'_>, multi: bool) {
        let n = g.node_count();
        if self.base.len() != n {
            self.base = vec![0; n];
            self.parent = vec![FREE; n];
            self.label = vec![UNLABELED; n];
            self.root = vec![FREE; n];
            self.dead = vec![false; n];
            self.mark = vec![0; n];
            self.in_blossom = vec![0; n];
            self.stamp = 0;
        }
        for v in 0..n {
            self.base[v] = v as NodeId;
            self.parent[v] = FREE;
            self.label[v] = UNLABELED;
            self.root[v] = FREE;
            self.dead[v] = false;
        }
        self.ops += n as u64;
        self.queue.clear();
        self.current = None;
        self.buf.clear();
        self.pos = 0;
        self.multi = multi;
        self.augmented = 0;
        self.done = false;
        let plant = |s: &mut Self, r: NodeId| {
            if mate[r as usize] == FREE && s.label[r as usize] == UNLABELED {
                s.label[r as usize] = EVEN;
                s.root[r as usize] = r;
                s.queue.push_back(r);
            }
        };
        match roots {
            Roots::AllFree => {
                for v in 0..n as NodeId {
                    plant(self, v);
                }
            }
            Roots::Only(rs) => {
                for &r in rs {
                    plant(self, r);
                }
            }
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|x| *x = 0);
            self.in_blossom.iter_mut().for_each(|x| *x = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    fn lca(&mut self, mate: &[NodeId], mut a: NodeId, mut b: NodeId) -> NodeId {
        let s = self.next_stamp();
        loop {
            self.ops += 1;
            a = self.base[a as usize];
            self.mark[a as usize] = s;
            if mate[a as usize] == FREE {
                break;
            }
            a = self.parent[mate[a as usize] as usize];
        }
        loop {
            self.ops += 1;
            b = self.base[b as usize];
            if self.mark[b as usize] == s {
                return b;
            }
            b = self.parent[mate[b as usize] as usize];
        }
    }

    fn mark_path(&mut self, mate: &[NodeId], mut v: NodeId, b: NodeId, mut child: NodeId, s: u32) {
        while self.base[v as usize] != b {
            self.ops += 1;
            let mv = mate[v as usize];
            self.in_blossom[self.base[v as usize] as usize] = s;
            self.in_blossom[self.base[mv as usize] as usize] = s;
            self.parent[v as usize] = child;
            child = mv;
            v = self.parent[mv as usize];
        }
    }

    /// Alternate the tree path above a vertex whose old mate is `o`.
    fn walk(&mut self, mate: &mut [NodeId], mut o: NodeId) {
        while o != FREE {
            self.ops += 1;
            let e = self.parent[o as usize];
            let next = mate[e as usize];
            mate[o as usize] = e;
            mate[e as usize] = o;
            o = next;
        }
    }

    fn retire(&mut self, r: NodeId) {
        if r != FREE {
            self.dead[r as usize] = true;
        }
    }

    fn blocked(&self, v: NodeId) -> bool {
        let r = self.root[v as usize];
        r != FREE && self.dead[r as usize]
    }

    fn finished(&self) -> Step {
        Step::Done {
            augmented: self.augmented,
        }
    }

    /// Advance the search by roughly `budget` operations.
    pub fn run<A: Adjacency + ?Sized>(&mut self, g: &A, mate: &mut [NodeId], budget: u64) -> Step {
        if self.done {
            return self.finished();
        }
        let stop = self.ops.saturating_add(budget);
        let n = g.node_count();
        while self.ops < stop {
            let v = match self.current {
                Some(v) if self.pos < self.buf.len() && !self.blocked(v) => v,
                _ => {
                    let Some(v) = self.queue.pop_front() else {
                        self.done = true;
                        return self.finished();
                    };
                    self.ops += 1;
                    self.current = None;
                    if self.blocked(v) {
                        continue;
                    }
                    self.buf.clear();
                    g.neighbors_into(v, &mut self.buf);
                    self.ops += self.buf.len() as u64;
                    self.pos = 0;
                    self.current = Some(v);
                    continue;
                }
            };
            let w = self.buf[self.pos];
            self.pos += 1;
            self.ops += 1;
            let (vi, wi) = (v as usize, w as usize);
            if self.base[vi] == self.base[wi] || mate[vi] == w || self.blocked(w) {
                continue;
            }
            match self.label[wi] {
                UNLABELED if mate[wi] == FREE => {
                    let (rv, ov) = (self.root[vi], mate[vi]);
                    self.walk(mate, ov);
                    mate[vi] = w;
                    mate[wi] = v;
                    self.finish_augment(rv, FREE);
                    if self.done {
                        return self.finished();
                    }
                }
                UNLABELED => {
                    let x = mate[wi];
                    self.label[wi] = ODD;
                    self.parent[wi] = v;
                    self.root[wi] = self.root[vi];
                    self.label[x as usize] = EVEN;
                    self.root[x as usize] = self.root[vi];
                    self.queue.push_back(x);
                }
                EVEN if self.root[wi] != self.root[vi] => {
                    let (rv, rw) = (self.root[vi], self.root[wi]);
                    let (ov, ow) = (mate[vi], mate[wi]);
                    self.walk(mate, ov);
                    self.walk(mate, ow);
                    mate[vi] = w;
                    mate[wi] = v;
                    self.finish_augment(rv, rw);
                    if self.done {
                        return self.finished();
                    }
                }
                EVEN => {
                    let b = self.lca(mate, v, w);
                    let s = self.next_stamp();
                    self.mark_path(mate, v, b, w, s);
                    self.mark_path(mate, w, b, v, s);
                    let r = self.root[vi];
                    for i in 0..n {
                        self.ops += 1;
                        if self.in_blossom[self.base[i] as usize] == s {
                            self.base[i] = b;
                            if self.label[i] != EVEN {
                                self.label[i] = EVEN;
                                self.root[i] = r;
                                self.queue.push_back(i as NodeId);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Step::Pending
    }

    fn finish_augment(&mut self, r1: NodeId, r2: NodeId) {
        self.augmented += 1;
        if self.multi {
            self.retire(r1);
            self.retire(r2);
            self.current = None;
        } else {
            self.done = true;
        }
    }

    /// One complete search; true if it augmented.
    pub fn augment<A: Adjacency + ?Sized>(&mut self, g: &A, mate: &mut [NodeId], roots: Roots<'_>) -> bool {
        self.begin(g, mate, roots, false);
        matches!(self.run(g, mate, u64::MAX), Step::Done { augmented: 1 })
    }

    /// Vertices labeled even by the last search, other than roots. After an
    /// unsuccessful single-root search each is reachable from the root by
    /// an even alternating path ending in a matched edge.
    pub fn even_non_roots(&self) -> Vec<NodeId> {
        (0..self.label.len())
            .filter(|&v| self.label[v] == EVEN && self.root[v] != v as NodeId)
            .map(|v| v as NodeId)
            .collect()
    }

    /// After an unsuccessful single-root search, shift the matching along
    /// the even alternating path from the root to `x`: the root becomes
    /// matched and `x` becomes free. Size is unchanged.
    pub fn shift_to(&mut self, mate: &mut [NodeId], x: NodeId) {
        debug_assert_eq!(self.label[x as usize], EVEN);
        let o = mate[x as usize];
        self.walk(mate, o);
        mate[x as usize] = FREE;
    }
}

/// Greedy pass: match each free vertex to its first free neighbor.
pub fn greedy_fill<A: Adjacency + ?Sized>(g: &A, mate: &mut [NodeId]) -> u64 {
    let mut buf = Vec::new();
    let mut ops = 0;
    for v in 0..g.node_count() {
        ops += 1;
        if mate[v] != FREE {
            continue;
        }
        buf.clear();
        g.neighbors_into(v as NodeId, &mut buf);
        ops += buf.len() as u64;
        if let Some(&w) = buf.iter().find(|&&w| mate[w as usize] == FREE && w as usize != v) {
            mate[v] = w;
            mate[w as usize] = v as NodeId;
        }
    }
    ops
}

/// Maximum matching by greedy warm start and repeated multi-path passes.
pub fn maximum_matching<A: Adjacency + ?Sized>(g: &A) -> Vec<NodeId> {
    let mut mate = vec![FREE; g.node_count()];
    greedy_fill(g, &mut mate);
    let mut s = Search::new();
    loop {
        s.begin(g, &mate, Roots::AllFree, true);
        if let Step::Done { augmented: 0 } = s.run(g, &mut mate, u64::MAX) {
            return mate;
        }
    }
}
