//! Counting balanced edge numberings.
//!
//! A numbering assigns a label in `0..p^N - 1` to every edge; it is balanced
//! when the labels around each vertex (a loop counted twice) form an
//! admissible triple. [`count_brute`] walks every assignment.
//! [`count_dp`] eliminates vertices one at a time, keeping a table from the
//! labels of the currently open edges (the frontier) to the number of
//! partial numberings that produce them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::{is_admissible, LabelChecker, LevelParams, Triple};
use crate::error::CountError;
use crate::graph::{IndexedGraph, TrivalentGraph};

/// Default bound on the number of assignments [`count_brute`] will visit.
pub const DEFAULT_BRUTE_GUARD: u128 = 100_000_000;
/// Default cap on the estimated size of one frontier table.
pub const DEFAULT_MEMCAP_BYTES: u64 = 8 << 30;

/// Tables smaller than this are processed on the calling thread.
const PARALLEL_THRESHOLD: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EdgeNumbering(pub BTreeMap<String, u64>);

impl EdgeNumbering {
    pub fn get(&self, edge: &str) -> Option<u64> {
        self.0.get(edge).copied()
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for EdgeNumbering {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        EdgeNumbering(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Dp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Dp => "dp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub graph: String,
    pub p: u64,
    pub level: u32,
    pub count: BigUint,
    pub method: Method,
    /// Vertex ids in the order they were processed.
    pub order: Vec<String>,
    pub elapsed: Duration,
}

/// Wire form of a [`CountReport`]. The count travels as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReportJson {
    pub graph: String,
    pub p: u64,
    #[serde(rename = "N")]
    pub level: u32,
    pub count: String,
    pub method: Method,
    pub elapsed_ms: u64,
}

impl CountReport {
    /// With `stable` the elapsed time is written as 0 so that identical
    /// inputs give identical output.
    pub fn to_json(&self, stable: bool) -> CountReportJson {
        CountReportJson {
            graph: self.graph.clone(),
            p: self.p,
            level: self.level,
            count: self.count.to_str_radix(10),
            method: self.method,
            elapsed_ms: if stable {
                0
            } else {
                self.elapsed.as_millis() as u64
            },
        }
    }
}

pub fn is_balanced(
    graph: &TrivalentGraph,
    numbering: &EdgeNumbering,
    lp: &LevelParams,
) -> Result<bool, CountError> {
    graph.validate()?;
    for e in &graph.edges {
        if !numbering.0.contains_key(&e.id) {
            return Err(CountError::MissingEdge(e.id.clone()));
        }
    }
    if let Some(extra) = numbering
        .0
        .keys()
        .find(|k| !graph.edges.iter().any(|e| &&e.id == k))
    {
        return Err(CountError::ExtraEdge(extra.clone()));
    }
    for v in &graph.vertices {
        let ids = graph.vertex_triple(v)?;
        let t = Triple(ids.map(|id| numbering.0[&id]));
        if !is_admissible(t, lp) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn checker_for(lp: &LevelParams) -> Result<(LabelChecker, u64), CountError> {
    let alphabet = lp.alphabet_size();
    if alphabet > u32::MAX as u128 {
        return Err(CountError::AlphabetTooLarge(alphabet));
    }
    let checker = LabelChecker::new(lp).ok_or(CountError::AlphabetTooLarge(alphabet))?;
    Ok((checker, alphabet as u64))
}

/// Visits all `(p^N - 1)^|E|` assignments.
pub fn count_brute(
    graph: &TrivalentGraph,
    lp: &LevelParams,
    guard: u128,
) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let ig = graph.indexed()?;
    let (checker, alphabet) = checker_for(lp)?;
    let edges = ig.edge_count() as u32;
    let size = (alphabet as u128)
        .checked_pow(edges)
        .filter(|s| *s <= guard)
        .ok_or(CountError::GuardExceeded {
            size: (alphabet as u128).saturating_pow(edges),
            guard,
        })?;
    let mut count: u64 = 0;
    if size > 0 {
        let mut labels = vec![0u64; ig.edge_count()];
        'outer: loop {
            if ig.branches.iter().all(|b| {
                checker.admits(labels[b[0]], labels[b[1]], labels[b[2]])
            }) {
                count += 1;
            }
            for x in labels.iter_mut() {
                *x += 1;
                if *x < alphabet {
                    continue 'outer;
                }
                *x = 0;
            }
            break;
        }
    }
    Ok(CountReport {
        graph: graph.name.clone(),
        p: lp.p(),
        level: lp.level(),
        count: BigUint::from(count),
        method: Method::Brute,
        order: graph.vertices.clone(),
        elapsed: start.elapsed(),
    })
}

// ---------------------------------------------------------------------------
// Elimination orders

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    /// The natural sweep when it is no wider than the greedy order.
    #[default]
    Auto,
    /// Vertices in the order the graph lists them.
    Natural,
    /// Repeatedly the vertex leaving the smallest frontier.
    Greedy,
    /// Caller-supplied vertex ids.
    Explicit(Vec<String>),
}

/// Open edges after each elimination step.
fn frontiers(ig: &IndexedGraph, order: &[usize]) -> Vec<Vec<usize>> {
    let mut frontier: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(order.len());
    for &v in order {
        frontier = next_frontier(ig, &frontier, v);
        out.push(frontier.clone());
    }
    out
}

fn distinct_edges(branches: &[usize; 3]) -> Vec<usize> {
    let mut d = Vec::with_capacity(3);
    for &e in branches {
        if !d.contains(&e) {
            d.push(e);
        }
    }
    d
}

fn next_frontier(ig: &IndexedGraph, frontier: &[usize], v: usize) -> Vec<usize> {
    let d = distinct_edges(&ig.branches[v]);
    let mut next: Vec<usize> = frontier.iter().copied().filter(|e| !d.contains(e)).collect();
    for e in d {
        let (a, b) = ig.edge_ends[e];
        if a != b && !frontier.contains(&e) {
            next.push(e);
        }
    }
    next
}

fn max_width(ig: &IndexedGraph, order: &[usize]) -> usize {
    frontiers(ig, order).iter().map(Vec::len).max().unwrap_or(0)
}

fn greedy_order(ig: &IndexedGraph) -> Vec<usize> {
    let n = ig.vertex_count();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut frontier = Vec::new();
    for _ in 0..n {
        let (v, next) = (0..n)
            .filter(|&v| !done[v])
            .map(|v| (v, next_frontier(ig, &frontier, v)))
            .min_by_key(|(v, f)| (f.len(), *v))
            .expect("unprocessed vertex remains");
        done[v] = true;
        order.push(v);
        frontier = next;
    }
    order
}

fn resolve_order(
    graph: &TrivalentGraph,
    ig: &IndexedGraph,
    order: &EliminationOrder,
) -> Result<Vec<usize>, CountError> {
    let natural: Vec<usize> = (0..ig.vertex_count()).collect();
    Ok(match order {
        EliminationOrder::Natural => natural,
        EliminationOrder::Greedy => greedy_order(ig),
        EliminationOrder::Auto => {
            let greedy = greedy_order(ig);
            if max_width(ig, &natural) <= max_width(ig, &greedy) {
                natural
            } else {
                greedy
            }
        }
        EliminationOrder::Explicit(ids) => {
            let mut seen = vec![false; ig.vertex_count()];
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                let v = graph
                    .vertex_index(id)
                    .ok_or_else(|| CountError::InvalidOrder(format!("unknown vertex {id}")))?;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(CountError::InvalidOrder(format!("vertex {id} repeated")));
                }
                out.push(v);
            }
            if out.len() != ig.vertex_count() {
                return Err(CountError::InvalidOrder("not every vertex listed".into()));
            }
            out
        }
    })
}

/// Maximum frontier width of the order `count_dp` would use.
pub fn frontier_width(graph: &TrivalentGraph, order: &EliminationOrder) -> Result<usize, CountError> {
    let ig = graph.indexed()?;
    let order = resolve_order(graph, &ig, order)?;
    Ok(max_width(&ig, &order))
}

// ---------------------------------------------------------------------------
// Frontier dynamic program

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpOptions {
    pub order: EliminationOrder,
    pub memcap_bytes: u64,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            order: EliminationOrder::Auto,
            memcap_bytes: DEFAULT_MEMCAP_BYTES,
        }
    }
}

#[derive(Debug)]
struct Overflow;

/// Exact counter stored in frontier tables.
trait Tally: Clone + Send + Sync {
    fn one() -> Self;
    fn add_from(&mut self, other: &Self) -> Result<(), Overflow>;
    fn into_big(self) -> BigUint;
}

impl Tally for u64 {
    fn one() -> Self {
        1
    }
    #[inline]
    fn add_from(&mut self, other: &Self) -> Result<(), Overflow> {
        *self = self.checked_add(*other).ok_or(Overflow)?;
        Ok(())
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Tally for BigUint {
    fn one() -> Self {
        BigUint::from(1u8)
    }
    #[inline]
    fn add_from(&mut self, other: &Self) -> Result<(), Overflow> {
        *self += other;
        Ok(())
    }
    fn into_big(self) -> BigUint {
        self
    }
}

enum StepError {
    Overflow,
    MemCap(u128),
}

/// Where the label of a branch, or of an output frontier slot, comes from.
#[derive(Clone, Copy, Debug)]
enum Source {
    /// position in the incoming frontier
    Old(usize),
    /// index among the edges first seen at this vertex
    New(usize),
}

struct Step {
    slots: [Source; 3],
    new_count: usize,
    output: Vec<Source>,
    /// branch slots occupied by the last new edge
    last_slots: Vec<usize>,
}

impl Step {
    fn plan(ig: &IndexedGraph, frontier: &[usize], next: &[usize], v: usize) -> Step {
        let branches = ig.branches[v];
        let mut new_edges: Vec<usize> = Vec::new();
        let slots = branches.map(|e| match frontier.iter().position(|&f| f == e) {
            Some(pos) => Source::Old(pos),
            None => {
                let idx = match new_edges.iter().position(|&n| n == e) {
                    Some(i) => i,
                    None => {
                        new_edges.push(e);
                        new_edges.len() - 1
                    }
                };
                Source::New(idx)
            }
        });
        let output = next
            .iter()
            .map(|e| match frontier.iter().position(|f| f == e) {
                Some(pos) => Source::Old(pos),
                None => Source::New(new_edges.iter().position(|n| n == e).expect("new edge")),
            })
            .collect();
        let last_slots = match new_edges.len() {
            0 => Vec::new(),
            k => (0..3)
                .filter(|&s| matches!(slots[s], Source::New(i) if i == k - 1))
                .collect(),
        };
        Step {
            slots,
            new_count: new_edges.len(),
            output,
            last_slots,
        }
    }
}

struct Packing {
    bits: u32,
    mask: u128,
}

impl Packing {
    #[inline]
    fn get(&self, key: u128, pos: usize) -> u64 {
        ((key >> (self.bits as usize * pos)) & self.mask) as u64
    }
}

struct StepContext<'a> {
    step: &'a Step,
    checker: &'a LabelChecker,
    alphabet: u64,
    pack: &'a Packing,
    entry_cap: usize,
}

impl StepContext<'_> {
    fn run_chunk<C: Tally>(
        &self,
        entries: &[(u128, C)],
    ) -> Result<HashMap<u128, C>, StepError> {
        let mut out: HashMap<u128, C> = HashMap::new();
        let step = self.step;
        let bound = self.checker.bound();
        let mut new_vals = [0u64; 3];
        for (key, cnt) in entries {
            let old = |pos: usize| self.pack.get(*key, pos);
            // labels of the retained frontier edges, pre-shifted
            let mut base_key: u128 = 0;
            for (slot, src) in step.output.iter().enumerate() {
                if let Source::Old(pos) = src {
                    base_key |= (old(*pos) as u128) << (self.pack.bits as usize * slot);
                }
            }
            let emit = |vals: &[u64; 3], out: &mut HashMap<u128, C>| -> Result<(), StepError> {
                let label = |s: Source| match s {
                    Source::Old(pos) => old(pos),
                    Source::New(i) => vals[i],
                };
                let t = step.slots.map(label);
                if !self.checker.admits(t[0], t[1], t[2]) {
                    return Ok(());
                }
                let mut k = base_key;
                for (slot, src) in step.output.iter().enumerate() {
                    if let Source::New(i) = src {
                        k |= (vals[*i] as u128) << (self.pack.bits as usize * slot);
                    }
                }
                match out.get_mut(&k) {
                    Some(acc) => acc.add_from(cnt).map_err(|_| StepError::Overflow)?,
                    None => {
                        if out.len() >= self.entry_cap {
                            return Err(StepError::MemCap(out.len() as u128 + 1));
                        }
                        out.insert(k, cnt.clone());
                    }
                }
                Ok(())
            };
            if step.new_count == 0 {
                emit(&new_vals, &mut out)?;
                continue;
            }
            // odometer over all but the last new edge
            let free = step.new_count - 1;
            new_vals[..free].iter_mut().for_each(|x| *x = 0);
            loop {
                // range of the last new edge allowed by the sum and triangle bounds
                let others: Vec<u64> = (0..3)
                    .filter(|s| !step.last_slots.contains(s))
                    .map(|s| match step.slots[s] {
                        Source::Old(pos) => old(pos),
                        Source::New(i) => new_vals[i],
                    })
                    .collect();
                let (lo, hi) = match others.as_slice() {
                    [y, z] => {
                        let (y, z) = (*y as i64, *z as i64);
                        ((y - z).abs(), (y + z).min(bound - y - z))
                    }
                    [y] => {
                        let y = *y as i64;
                        ((y + 1) / 2, (bound - y).div_euclid(2))
                    }
                    _ => (0, bound),
                };
                let hi = hi.min(self.alphabet as i64 - 1);
                let mut x = lo;
                while x <= hi {
                    new_vals[free] = x as u64;
                    emit(&new_vals, &mut out)?;
                    x += 1;
                }
                // advance odometer
                let mut i = 0;
                while i < free {
                    new_vals[i] += 1;
                    if new_vals[i] < self.alphabet {
                        break;
                    }
                    new_vals[i] = 0;
                    i += 1;
                }
                if i == free {
                    break;
                }
            }
        }
        Ok(out)
    }
}

fn merge<C: Tally>(
    mut a: HashMap<u128, C>,
    mut b: HashMap<u128, C>,
    entry_cap: usize,
) -> Result<HashMap<u128, C>, StepError> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (k, v) in b {
        match a.get_mut(&k) {
            Some(acc) => acc.add_from(&v).map_err(|_| StepError::Overflow)?,
            None => {
                a.insert(k, v);
            }
        }
    }
    if a.len() > entry_cap {
        return Err(StepError::MemCap(a.len() as u128));
    }
    Ok(a)
}

fn entry_bytes<C>() -> u64 {
    // key, value and hash-table overhead
    (std::mem::size_of::<u128>() + std::mem::size_of::<C>() + 16) as u64
}

enum DpFailure {
    Overflow,
    MemCap { entries: u128, step: usize },
}

fn contract<C: Tally>(
    ig: &IndexedGraph,
    order: &[usize],
    checker: &LabelChecker,
    alphabet: u64,
    memcap: u64,
) -> Result<BigUint, DpFailure> {
    let bits = (64 - alphabet.saturating_sub(1).leading_zeros()).max(1);
    let pack = Packing {
        bits,
        mask: (1u128 << bits) - 1,
    };
    let entry_cap = (memcap / entry_bytes::<C>()).min(usize::MAX as u64) as usize;
    let fronts = frontiers(ig, order);
    let mut frontier: Vec<usize> = Vec::new();
    let mut table: Vec<(u128, C)> = vec![(0, C::one())];
    for (idx, &v) in order.iter().enumerate() {
        let next = &fronts[idx];
        let step = Step::plan(ig, &frontier, next, v);
        let ctx = StepContext {
            step: &step,
            checker,
            alphabet,
            pack: &pack,
            entry_cap,
        };
        let result = if table.len() < PARALLEL_THRESHOLD {
            ctx.run_chunk(&table)
        } else {
            let chunk = table.len().div_ceil(rayon::current_num_threads() * 4).max(1);
            table
                .par_chunks(chunk)
                .map(|c| ctx.run_chunk(c))
                .try_reduce(HashMap::new, |a, b| merge(a, b, entry_cap))
        };
        let map = result.map_err(|e| match e {
            StepError::Overflow => DpFailure::Overflow,
            StepError::MemCap(entries) => DpFailure::MemCap { entries, step: idx },
        })?;
        table = map.into_iter().collect();
        if table.is_empty() {
            return Ok(BigUint::from(0u8));
        }
        frontier = next.clone();
    }
    debug_assert!(frontier.is_empty());
    Ok(table
        .into_iter()
        .map(|(_, c)| c.into_big())
        .sum())
}

/// Exact count by vertex elimination. Runs on the current rayon pool.
pub fn count_dp(
    graph: &TrivalentGraph,
    lp: &LevelParams,
    opts: &DpOptions,
) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let ig = graph.indexed()?;
    let order = resolve_order(graph, &ig, &opts.order)?;
    let order_ids = order.iter().map(|&v| graph.vertices[v].clone()).collect();
    let report = |count: BigUint| CountReport {
        graph: graph.name.clone(),
        p: lp.p(),
        level: lp.level(),
        count,
        method: Method::Dp,
        order: order_ids,
        elapsed: start.elapsed(),
    };
    let (checker, alphabet) = checker_for(lp)?;
    if alphabet == 0 {
        return Ok(report(BigUint::from(0u8)));
    }
    let width = max_width(&ig, &order);
    let bits = (64 - alphabet.saturating_sub(1).leading_zeros()).max(1);
    let fronts = frontiers(&ig, &order);
    let memcap_err = |entries: u128, step: usize, bytes: u64| CountError::MemoryCapExceeded {
        needed: entries.saturating_mul(bytes as u128),
        cap: opts.memcap_bytes,
        frontier: fronts[step]
            .iter()
            .map(|&e| graph.edges[e].id.clone())
            .collect(),
    };
    if width as u32 * bits > 128 {
        let step = fronts.iter().position(|f| f.len() == width).unwrap_or(0);
        return Err(memcap_err(
            (alphabet as u128).saturating_pow(width as u32),
            step,
            entry_bytes::<u64>(),
        ));
    }
    let count = match contract::<u64>(&ig, &order, &checker, alphabet, opts.memcap_bytes) {
        Ok(c) => c,
        Err(DpFailure::Overflow) => {
            match contract::<BigUint>(&ig, &order, &checker, alphabet, opts.memcap_bytes) {
                Ok(c) => c,
                Err(DpFailure::MemCap { entries, step }) => {
                    return Err(memcap_err(entries, step, entry_bytes::<BigUint>()))
                }
                Err(DpFailure::Overflow) => unreachable!("BigUint addition cannot overflow"),
            }
        }
        Err(DpFailure::MemCap { entries, step }) => {
            return Err(memcap_err(entries, step, entry_bytes::<u64>()))
        }
    };
    Ok(report(count))
}

/// `count_dp` with default options, returning only the count.
pub fn count(graph: &TrivalentGraph, lp: &LevelParams) -> Result<BigUint, CountError> {
    Ok(count_dp(graph, lp, &DpOptions::default())?.count)
}
