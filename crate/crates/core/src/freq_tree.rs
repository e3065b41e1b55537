//! Counting tries over symbol contexts.
//!
//! A root-to-node path of length `d` spells a context of `d` symbols in
//! chronological order (oldest first). Each ingested symbol credits, for every
//! suffix of the current window that ends at the new symbol, the terminal
//! node of that suffix's path. Only the terminal node is incremented, so a
//! node's count is the number of times its exact context was credited, and the
//! counts of a node's children never sum to more than the node's own count.
//!
//! Two builders share this update rule:
//!
//! - Active LeZi, whose window length follows the longest word of an LZ78
//!   dictionary and therefore grows without bound;
//! - PPM, whose window is simply the last `m` symbols.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

const ROOT: usize = 0;

#[derive(Debug, Clone)]
struct Node {
    symbol: Symbol,
    count: u64,
    /// Sorted by symbol.
    children: Vec<(Symbol, usize)>,
}

impl Node {
    fn new(symbol: Symbol) -> Self {
        Self { symbol, count: 0, children: Vec::new() }
    }
}

/// Rooted multi-way counting trie. The single source of all probability
/// estimates in this crate.
#[derive(Debug, Clone)]
pub struct FrequencyTree {
    nodes: Vec<Node>,
    alphabet: Alphabet,
    max_depth: Option<usize>,
    total: u64,
}

impl FrequencyTree {
    /// Tree with no depth limit, as grown by Active LeZi.
    pub fn unbounded(alphabet: Alphabet) -> Self {
        Self { nodes: vec![Node::new(0)], alphabet, max_depth: None, total: 0 }
    }

    /// Fixed-depth PPM tree.
    pub fn ppm(alphabet: Alphabet, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::domain("PPM tree depth must be positive"));
        }
        Ok(Self { nodes: vec![Node::new(0)], alphabet, max_depth: Some(depth), total: 0 })
    }

    /// Builds a PPM tree of the given depth over a whole sequence.
    pub fn ppm_from(alphabet: Alphabet, depth: usize, seq: &[Symbol]) -> Result<Self> {
        let mut tree = Self::ppm(alphabet, depth)?;
        for i in 0..seq.len() {
            tree.ppm_ingest(&seq[..i], seq[i])?;
        }
        Ok(tree)
    }

    /// Runs Active LeZi over a whole sequence.
    pub fn active_lezi_from(alphabet: Alphabet, seq: &[Symbol]) -> Result<(Self, LeZiState)> {
        let mut tree = Self::unbounded(alphabet);
        let mut state = LeZiState::default();
        for &v in seq {
            state.ingest(&mut tree, v)?;
        }
        Ok((tree, state))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.max_depth
    }

    /// Number of symbols ingested so far.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Ingests `v` into a fixed-depth tree. `history` holds the previously
    /// ingested symbols (most recent last); only its last `m - 1` entries are
    /// read.
    pub fn ppm_ingest(&mut self, history: &[Symbol], v: Symbol) -> Result<()> {
        let m = self.max_depth.ok_or_else(|| Error::domain("ppm_ingest needs a fixed-depth tree"))?;
        self.alphabet.check(v)?;
        let keep = history.len().min(m - 1);
        let recent = &history[history.len() - keep..];
        for start in 0..=keep {
            let id = self.walk_create(recent[start..].iter().copied().chain(std::iter::once(v)));
            self.nodes[id].count += 1;
        }
        self.total += 1;
        Ok(())
    }

    /// Credits every suffix of `window`; the window's last element is the
    /// newly ingested symbol.
    fn credit_window<'a>(&mut self, window: impl Iterator<Item = &'a Symbol> + Clone) {
        let len = window.clone().count();
        for start in 0..len {
            let id = self.walk_create(window.clone().skip(start).copied());
            self.nodes[id].count += 1;
        }
        self.total += 1;
    }

    fn walk_create(&mut self, path: impl Iterator<Item = Symbol>) -> usize {
        let mut cur = ROOT;
        for s in path {
            cur = match self.nodes[cur].children.binary_search_by_key(&s, |&(c, _)| c) {
                Ok(i) => self.nodes[cur].children[i].1,
                Err(i) => {
                    let id = self.nodes.len();
                    self.nodes.push(Node::new(s));
                    self.nodes[cur].children.insert(i, (s, id));
                    id
                }
            };
        }
        cur
    }

    fn find(&self, context: &[Symbol]) -> Option<usize> {
        let mut cur = ROOT;
        for &s in context {
            let children = &self.nodes[cur].children;
            cur = children.binary_search_by_key(&s, |&(c, _)| c).ok().map(|i| children[i].1)?;
        }
        Some(cur)
    }

    /// Count stored for `context`, or 0 when the path does not exist. The
    /// empty context reports the number of ingested symbols.
    pub fn context_count(&self, context: &[Symbol]) -> u64 {
        if context.is_empty() {
            return self.total;
        }
        self.find(context).map_or(0, |id| self.nodes[id].count)
    }

    /// `(symbol, count)` of every stored continuation of `context`, in
    /// ascending symbol order.
    pub fn continuations(&self, context: &[Symbol]) -> Vec<(Symbol, u64)> {
        self.find(context)
            .map(|id| self.nodes[id].children.iter().map(|&(s, c)| (s, self.nodes[c].count)).collect())
            .unwrap_or_default()
    }

    /// Count of `context` together with the total count of its stored
    /// continuations, in one walk.
    pub(crate) fn context_and_followers(&self, context: &[Symbol]) -> Option<(u64, u64, usize)> {
        let id = if context.is_empty() { ROOT } else { self.find(context)? };
        let node = &self.nodes[id];
        let count = if context.is_empty() { self.total } else { node.count };
        let followers = node.children.iter().map(|&(_, c)| self.nodes[c].count).sum();
        Some((count, followers, id))
    }

    pub(crate) fn children_of(&self, id: usize) -> impl Iterator<Item = (Symbol, u64)> + '_ {
        self.nodes[id].children.iter().map(move |&(s, c)| (s, self.nodes[c].count))
    }

    /// Symbols with a positive depth-1 count, and how many there are.
    pub fn observed_alphabet(&self) -> Result<(usize, Vec<Symbol>)> {
        if self.is_empty() {
            return Err(Error::domain("observed alphabet of an empty tree"));
        }
        let symbols: Vec<Symbol> = self.continuations(&[]).into_iter().filter(|&(_, c)| c > 0).map(|(s, _)| s).collect();
        Ok((symbols.len(), symbols))
    }

    /// Depth of the deepest stored node.
    pub fn depth(&self) -> usize {
        fn go(t: &FrequencyTree, id: usize) -> usize {
            t.nodes[id].children.iter().map(|&(_, c)| 1 + go(t, c)).max().unwrap_or(0)
        }
        go(self, ROOT)
    }

    /// Every stored context of exactly `depth` symbols with its count, in
    /// lexicographic order.
    pub fn contexts_at_depth(&self, depth: usize) -> Vec<(Vec<Symbol>, u64)> {
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(depth);
        self.collect_depth(ROOT, depth, &mut path, &mut out);
        out
    }

    fn collect_depth(&self, id: usize, depth: usize, path: &mut Vec<Symbol>, out: &mut Vec<(Vec<Symbol>, u64)>) {
        if path.len() == depth {
            out.push((path.clone(), self.nodes[id].count));
            return;
        }
        for &(s, c) in &self.nodes[id].children {
            path.push(s);
            self.collect_depth(c, depth, path, out);
            path.pop();
        }
    }

    /// Pre-order dump, one `depth,symbol,count` line per node (root
    /// omitted), children in ascending symbol order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(usize, usize)> = self.nodes[ROOT].children.iter().rev().map(|&(_, c)| (c, 1)).collect();
        while let Some((id, depth)) = stack.pop() {
            let n = &self.nodes[id];
            let _ = writeln!(out, "{depth},{},{}", n.symbol, n.count);
            stack.extend(n.children.iter().rev().map(|&(_, c)| (c, depth + 1)));
        }
        out
    }
}

/// Parsing state of Active LeZi.
#[derive(Debug, Clone, Default)]
pub struct LeZiState {
    window: VecDeque<Symbol>,
    dictionary: HashSet<Vec<Symbol>>,
    word: Vec<Symbol>,
    max_word_len: usize,
}

impl LeZiState {
    /// Appends `v` to the current word and the window, grows the dictionary
    /// LZ78-style (the word restarts only after an insertion), trims the
    /// window to the longest dictionary word and credits the tree.
    pub fn ingest(&mut self, tree: &mut FrequencyTree, v: Symbol) -> Result<()> {
        tree.alphabet.check(v)?;
        self.word.push(v);
        self.window.push_back(v);
        if !self.dictionary.contains(&self.word) {
            self.max_word_len = self.max_word_len.max(self.word.len());
            self.dictionary.insert(std::mem::take(&mut self.word));
        }
        while self.window.len() > self.max_word_len {
            self.window.pop_front();
        }
        tree.credit_window(self.window.iter());
        Ok(())
    }

    pub fn window(&self) -> Vec<Symbol> {
        self.window.iter().copied().collect()
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    pub fn dictionary(&self) -> &HashSet<Vec<Symbol>> {
        &self.dictionary
    }
}
