//! Bin packing primitives over exact rational sizes: instance validation,
//! First-Fit, First-Fit Decreasing with its structural observables, and an
//! exact optimum for small inputs.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::size::{fmt_q, parse_rational, q, Size, Q};

pub type ClusterId = String;

/// A single item. `index` defines the processing order among equal sizes
/// and must be unique within an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub index: usize,
    pub size: Size,
    pub cluster: Option<ClusterId>,
}

impl Item {
    pub fn new(index: usize, size: Size) -> Self {
        Item {
            index,
            size,
            cluster: None,
        }
    }
}

/// A run of identical items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemClass {
    pub size: Size,
    pub count: u64,
    pub cluster: Option<ClusterId>,
    pub label: String,
}

impl ItemClass {
    pub fn new(size: Size, count: u64) -> Self {
        ItemClass {
            size,
            count,
            cluster: None,
            label: String::new(),
        }
    }
}

/// Expands classes into items with consecutive indices starting at 0.
pub fn expand(classes: &[ItemClass]) -> Vec<Item> {
    let mut items = Vec::new();
    for class in classes {
        for _ in 0..class.count {
            items.push(Item {
                index: items.len(),
                size: class.size.clone(),
                cluster: class.cluster.clone(),
            });
        }
    }
    items
}

/// Items from a list of sizes, indexed by position.
pub fn items_from_sizes(sizes: &[Size]) -> Vec<Item> {
    sizes.iter().enumerate().map(|(i, s)| Item::new(i, s.clone())).collect()
}

/// Groups sizes into `(size, multiplicity)` pairs, largest size first.
pub fn group_sizes<'a, I: IntoIterator<Item = &'a Size>>(sizes: I) -> Vec<(Size, u64)> {
    let mut counts: BTreeMap<Size, u64> = BTreeMap::new();
    for s in sizes {
        *counts.entry(s.clone()).or_default() += 1;
    }
    counts.into_iter().rev().collect()
}

pub fn total_size<'a, I: IntoIterator<Item = &'a Size>>(sizes: I) -> Q {
    sizes.into_iter().fold(Q::zero(), |acc, s| acc + s.value())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    /// Positions into the item slice the packing was built from.
    pub items: Vec<usize>,
    pub load: Q,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Packing {
    pub bins: Vec<Bin>,
}

impl Packing {
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    /// Builds a packing from position lists, computing loads.
    pub fn from_positions(items: &[Item], bins: Vec<Vec<usize>>) -> Self {
        let bins = bins
            .into_iter()
            .map(|positions| {
                let load = positions.iter().fold(Q::zero(), |acc, &p| acc + items[p].size.value());
                Bin { items: positions, load }
            })
            .collect();
        Packing { bins }
    }
}

/// Raw item record prior to validation.
#[derive(Clone, Debug, Default)]
pub struct RawItem {
    pub size: String,
    pub index: Option<usize>,
    pub cluster: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    /// Normalized instance, present when there are no errors.
    pub items: Option<Vec<Item>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks raw records: sizes in `[0, 1]`, unique indices, lowest terms.
/// Records without an index take their position.
pub fn validate_instance(raw: &[RawItem]) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut items = Vec::with_capacity(raw.len());
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (pos, record) in raw.iter().enumerate() {
        let (value, non_reduced) = parse_rational(&record.size)?;
        if non_reduced {
            report.warnings.push(format!(
                "item {pos}: `{}` is not in lowest terms (normalized to {})",
                record.size,
                fmt_q(&value)
            ));
        }
        let index = record.index.unwrap_or(pos);
        if let Some(first) = seen.insert(index, pos) {
            report
                .errors
                .push(format!("duplicate index {index} (items {first} and {pos})"));
        }
        match Size::new(value) {
            Ok(size) => items.push(Item {
                index,
                size,
                cluster: record.cluster.clone(),
            }),
            Err(e) => report.errors.push(format!("item {pos}: {e}")),
        }
    }
    if report.errors.is_empty() {
        report.items = Some(items);
    }
    Ok(report)
}

fn first_fit_order(items: &[Item], order: &[usize]) -> Packing {
    let one = Q::one();
    let mut bins: Vec<Bin> = Vec::new();
    for &pos in order {
        let size = items[pos].size.value();
        match bins.iter_mut().find(|b| (&b.load + size) <= one) {
            Some(bin) => {
                bin.load += size;
                bin.items.push(pos);
            }
            None => bins.push(Bin {
                items: vec![pos],
                load: size.clone(),
            }),
        }
    }
    Packing { bins }
}

/// First-Fit in the given list order.
pub fn first_fit(items: &[Item]) -> Packing {
    let order: Vec<usize> = (0..items.len()).collect();
    first_fit_order(items, &order)
}

/// FFD output plus the observables used by the weighting arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FfdTrace {
    pub packing: Packing,
    /// Positions in the order FFD processed them.
    pub order: Vec<usize>,
    pub bin_count: usize,
    /// Number of inner bins (all but the last) holding an item above 1/2.
    pub tau: usize,
    /// Size of the first item of the last bin; `None` for an empty input.
    pub theta: Option<Size>,
    pub first_items: Vec<Size>,
}

/// Processing order for FFD: non-increasing size, ties by ascending index.
pub fn ffd_order(items: &[Item]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .size
            .cmp(&items[a].size)
            .then(items[a].index.cmp(&items[b].index))
    });
    order
}

pub fn ffd(items: &[Item]) -> FfdTrace {
    let order = ffd_order(items);
    let packing = first_fit_order(items, &order);
    let bin_count = packing.bins.len();
    let first_items: Vec<Size> = packing.bins.iter().map(|b| items[b.items[0]].size.clone()).collect();
    let tau = packing
        .bins
        .iter()
        .take(bin_count.saturating_sub(1))
        .take_while(|b| b.items.iter().any(|&p| items[p].size.is_large()))
        .count();
    let theta = first_items.last().cloned();
    FfdTrace {
        packing,
        order,
        bin_count,
        tau,
        theta,
        first_items,
    }
}

/// Structural facts every FF/FFD packing satisfies; returns a description
/// of each violated one.
pub fn pairwise_load_violations(packing: &Packing) -> Vec<String> {
    let one = Q::one();
    let mut out = Vec::new();
    let bins = &packing.bins;
    for i in 0..bins.len() {
        for j in i + 1..bins.len() {
            if &bins[i].load + &bins[j].load <= one {
                out.push(format!(
                    "bins {i} and {j} have total load {} <= 1",
                    fmt_q(&(&bins[i].load + &bins[j].load))
                ));
            }
        }
    }
    out
}

/// FFD-specific structure: large-item prefix and the bin-opening rule.
pub fn ffd_structure_violations(items: &[Item], trace: &FfdTrace) -> Vec<String> {
    let mut out = pairwise_load_violations(&trace.packing);
    let bins = &trace.packing.bins;
    let has_large: Vec<bool> = bins
        .iter()
        .map(|b| b.items.iter().any(|&p| items[p].size.is_large()))
        .collect();
    if let Some(first_small) = has_large.iter().position(|&l| !l) {
        if let Some(late) = has_large[first_small..].iter().position(|&l| l) {
            out.push(format!(
                "bin {} has a large item after non-large bin {first_small}",
                first_small + late
            ));
        }
    }
    let tau_expected = has_large
        .iter()
        .take(bins.len().saturating_sub(1))
        .take_while(|&&l| l)
        .count();
    if trace.tau != tau_expected {
        out.push(format!("tau {} != {tau_expected}", trace.tau));
    }

    for (b, first) in trace.first_items.iter().enumerate() {
        let x = first.value();
        if x.is_zero() {
            continue;
        }
        // s ranges over integers >= 2 with x > 1/s and 1/(s-1) >= x; larger s
        // make the condition vacuous.
        let s_max = (Q::one() / x).floor().to_integer().to_u64().unwrap_or(u64::MAX) + 1;
        for s in 2..=s_max.min(10_000) {
            let lo = q(1, s as i64);
            let hi = q(1, s as i64 - 1);
            if x <= &lo {
                continue;
            }
            for (e, bin) in bins.iter().enumerate().take(b) {
                let has_above = bin.items.iter().any(|&p| items[p].size.value() > &hi);
                if has_above {
                    continue;
                }
                let in_range = bin
                    .items
                    .iter()
                    .filter(|&&p| {
                        let v = items[p].size.value();
                        v > &lo && v <= &hi
                    })
                    .count();
                if (in_range as u64) < s - 1 {
                    out.push(format!(
                        "bin {b} opens with {first} > 1/{s} but earlier bin {e} has only {in_range} items in (1/{s}, 1/{}]",
                        s - 1
                    ));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingCheck {
    pub ok: bool,
    pub violation: Option<String>,
}

/// Exact check that `packing` covers `items` once each with loads <= 1.
pub fn verify_packing(items: &[Item], packing: &Packing) -> PackingCheck {
    let fail = |msg: String| PackingCheck {
        ok: false,
        violation: Some(msg),
    };
    let mut seen = vec![0u32; items.len()];
    for (b, bin) in packing.bins.iter().enumerate() {
        if bin.items.is_empty() {
            return fail(format!("bin {b} is empty"));
        }
        let mut load = Q::zero();
        for &p in &bin.items {
            if p >= items.len() {
                return fail(format!("coverage mismatch: bin {b} references unknown item {p}"));
            }
            seen[p] += 1;
            load += items[p].size.value();
        }
        if load > Q::one() {
            return fail(format!("bin {b} overfull by {}", fmt_q(&(load - Q::one()))));
        }
    }
    if let Some(p) = seen.iter().position(|&c| c != 1) {
        return fail(format!("coverage mismatch: item {p} packed {} times", seen[p]));
    }
    PackingCheck {
        ok: true,
        violation: None,
    }
}

pub const DEFAULT_ITEM_LIMIT: usize = 24;
const PATTERN_WORK_LIMIT: u64 = 60_000_000;
const SEARCH_NODE_LIMIT: u64 = 30_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalSolution {
    pub bins: u64,
    pub packing: Packing,
}

/// Minimum number of bins with a witness packing.
///
/// Inputs with at most three distinct positive sizes are solved at pattern
/// level regardless of multiplicity; otherwise the expanded item count must
/// not exceed `item_limit` and a branch-and-bound search is used.
pub fn exact_optimal(items: &[Item], item_limit: usize) -> Result<OptimalSolution> {
    let mut by_size: BTreeMap<&Size, Vec<usize>> = BTreeMap::new();
    for (pos, item) in items.iter().enumerate() {
        by_size.entry(&item.size).or_default().push(pos);
    }
    let zeros: Vec<usize> = by_size
        .iter()
        .filter(|(s, _)| s.is_zero())
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    let positive: Vec<(&Size, Vec<usize>)> = by_size.into_iter().rev().filter(|(s, _)| !s.is_zero()).collect();

    let mut bins: Vec<Vec<usize>> = if positive.is_empty() {
        Vec::new()
    } else if positive.len() <= 3 {
        let groups: Vec<(Size, u64)> = positive.iter().map(|(s, v)| ((*s).clone(), v.len() as u64)).collect();
        let (_, patterns) = pattern_solve(&groups, true)?;
        let mut cursors = vec![0usize; positive.len()];
        let mut bins = Vec::with_capacity(patterns.len());
        for pattern in patterns {
            let mut bin = Vec::new();
            for (g, &c) in pattern.iter().enumerate() {
                for _ in 0..c {
                    bin.push(positive[g].1[cursors[g]]);
                    cursors[g] += 1;
                }
            }
            bins.push(bin);
        }
        bins
    } else {
        let n: usize = positive.iter().map(|(_, v)| v.len()).sum();
        if n > item_limit {
            return Err(Error::TooLarge(format!(
                "{n} items with {} distinct sizes exceed the item limit {item_limit}",
                positive.len()
            )));
        }
        let order: Vec<usize> = positive.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let sizes: Vec<&Size> = order.iter().map(|&p| &items[p].size).collect();
        let assignment = branch_and_bound(&sizes)?;
        let count = assignment.iter().max().map_or(0, |m| m + 1);
        let mut bins = vec![Vec::new(); count];
        for (k, &b) in assignment.iter().enumerate() {
            bins[b].push(order[k]);
        }
        bins
    };
    if !zeros.is_empty() {
        if bins.is_empty() {
            bins.push(Vec::new());
        }
        bins[0].extend(zeros);
    }
    let packing = Packing::from_positions(items, bins);
    Ok(OptimalSolution {
        bins: packing.bins.len() as u64,
        packing,
    })
}

/// Optimal bin count for grouped sizes without building a packing.
pub fn optimal_bin_count(groups: &[(Size, u64)], item_limit: usize) -> Result<u64> {
    let positive: Vec<(Size, u64)> = groups.iter().filter(|(s, c)| !s.is_zero() && *c > 0).cloned().collect();
    let merged = group_counts(&positive);
    if merged.is_empty() {
        let any_zero = groups.iter().any(|(_, c)| *c > 0);
        return Ok(u64::from(any_zero));
    }
    if merged.len() <= 3 {
        return pattern_solve(&merged, false).map(|(n, _)| n);
    }
    let classes: Vec<ItemClass> = merged.iter().map(|(s, c)| ItemClass::new(s.clone(), *c)).collect();
    let n: u64 = merged.iter().map(|(_, c)| c).sum();
    if n > item_limit as u64 {
        return Err(Error::TooLarge(format!(
            "{n} items with {} distinct sizes exceed the item limit {item_limit}",
            merged.len()
        )));
    }
    exact_optimal(&expand(&classes), item_limit).map(|s| s.bins)
}

fn group_counts(groups: &[(Size, u64)]) -> Vec<(Size, u64)> {
    let mut counts: BTreeMap<Size, u64> = BTreeMap::new();
    for (s, c) in groups {
        *counts.entry(s.clone()).or_default() += c;
    }
    counts.into_iter().rev().collect()
}

/// Scales sizes to integers over their common denominator.
fn scaled(sizes: &[&Q]) -> (Vec<BigInt>, BigInt) {
    let den = sizes.iter().fold(BigInt::one(), |acc, s| acc.lcm(s.denom()));
    let nums = sizes.iter().map(|s| s.numer() * (&den / s.denom())).collect();
    (nums, den)
}

/// Pattern-level DP for at most three distinct positive sizes. Returns the
/// optimal count and, when requested, one pattern (per-group counts) per bin.
fn pattern_solve(groups: &[(Size, u64)], want_patterns: bool) -> Result<(u64, Vec<Vec<u64>>)> {
    debug_assert!(!groups.is_empty() && groups.len() <= 3);
    let values: Vec<&Q> = groups.iter().map(|(s, _)| s.value()).collect();
    let (nums, cap) = scaled(&values);
    let counts: Vec<u64> = groups.iter().map(|(_, c)| *c).collect();
    let per_bin: Vec<u64> = nums.iter().map(|a| (&cap / a).to_u64().unwrap_or(u64::MAX)).collect();

    if groups.len() == 1 {
        let per = per_bin[0].max(1);
        let n = counts[0].div_ceil(per);
        let mut patterns = Vec::new();
        if want_patterns {
            let mut left = counts[0];
            while left > 0 {
                let take = left.min(per);
                patterns.push(vec![take]);
                left -= take;
            }
        }
        return Ok((n, patterns));
    }

    // All feasible non-empty patterns bounded by the available counts.
    let bounds: Vec<u64> = counts.iter().zip(&per_bin).map(|(&c, &p)| c.min(p)).collect();
    let mut patterns: Vec<Vec<u64>> = Vec::new();
    let mut current = vec![0u64; groups.len()];
    enumerate_patterns(&nums, &cap, &bounds, 0, BigInt::zero(), &mut current, &mut patterns);
    patterns.retain(|p| p.iter().any(|&c| c > 0));

    let radix: Vec<u64> = counts.iter().map(|c| c + 1).collect();
    let states = radix.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r));
    let states = match states {
        Some(s) if s.saturating_mul(patterns.len() as u64) <= PATTERN_WORK_LIMIT => s as usize,
        _ => {
            return Err(Error::TooLarge(format!(
                "pattern search over counts {counts:?} with {} patterns",
                patterns.len()
            )))
        }
    };
    let strides: Vec<usize> = {
        let mut s = vec![1usize; radix.len()];
        for i in (0..radix.len() - 1).rev() {
            s[i] = s[i + 1] * radix[i + 1] as usize;
        }
        s
    };
    let mut best = vec![u32::MAX; states];
    let mut choice = vec![u32::MAX; if want_patterns { states } else { 0 }];
    best[0] = 0;
    let mut state = vec![0u64; radix.len()];
    for idx in 1..states {
        // decode
        let mut rem = idx;
        for i in 0..radix.len() {
            state[i] = (rem / strides[i]) as u64;
            rem %= strides[i];
        }
        let mut local = u32::MAX;
        let mut local_choice = u32::MAX;
        for (pi, p) in patterns.iter().enumerate() {
            let mut prev = idx;
            let mut any = false;
            for i in 0..radix.len() {
                let take = p[i].min(state[i]);
                if take > 0 {
                    any = true;
                }
                prev -= take as usize * strides[i];
            }
            if !any {
                continue;
            }
            let cand = best[prev].saturating_add(1);
            if cand < local {
                local = cand;
                local_choice = pi as u32;
            }
        }
        best[idx] = local;
        if want_patterns {
            choice[idx] = local_choice;
        }
    }
    let full = states - 1;
    let n = best[full] as u64;
    let mut out = Vec::new();
    if want_patterns {
        let mut idx = full;
        let mut left = counts.clone();
        while idx != 0 {
            let p = &patterns[choice[idx] as usize];
            let take: Vec<u64> = p.iter().zip(&left).map(|(&a, &b)| a.min(b)).collect();
            for i in 0..radix.len() {
                left[i] -= take[i];
                idx -= take[i] as usize * strides[i];
            }
            out.push(take);
        }
    }
    Ok((n, out))
}

fn enumerate_patterns(
    nums: &[BigInt],
    cap: &BigInt,
    bounds: &[u64],
    depth: usize,
    used: BigInt,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if depth == nums.len() {
        out.push(current.clone());
        return;
    }
    let mut load = used;
    for c in 0..=bounds[depth] {
        if &load > cap {
            break;
        }
        current[depth] = c;
        enumerate_patterns(nums, cap, bounds, depth + 1, load.clone(), current, out);
        load += &nums[depth];
    }
    current[depth] = 0;
}

trait Amount: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}
impl Amount for u128 {}
impl Amount for BigInt {}

/// Branch-and-bound over sizes sorted non-increasingly. Returns a bin index
/// per size (bins numbered in first-use order).
fn branch_and_bound(sizes: &[&Size]) -> Result<Vec<usize>> {
    let values: Vec<&Q> = sizes.iter().map(|s| s.value()).collect();
    let (nums, cap) = scaled(&values);
    let small = cap.bits() <= 100 && nums.iter().all(|n| n.bits() <= 100);
    if small {
        let nums: Vec<u128> = nums.iter().map(|n| n.to_u128().unwrap()).collect();
        let cap = cap.to_u128().unwrap();
        Search::new(nums, cap).run()
    } else {
        Search::new(nums, cap).run()
    }
}

struct Search<T: Amount> {
    sizes: Vec<T>,
    cap: T,
    /// suffix[i] = total size of items i..
    suffix: Vec<T>,
    same_as_prev: Vec<bool>,
    loads: Vec<T>,
    assign: Vec<usize>,
    best: Vec<usize>,
    best_count: usize,
    lower: usize,
    nodes: u64,
}

impl<T: Amount> Search<T> {
    fn new(sizes: Vec<T>, cap: T) -> Self {
        let n = sizes.len();
        let mut suffix = vec![T::zero(); n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1].clone() + sizes[i].clone();
        }
        let same_as_prev = (0..n).map(|i| i > 0 && sizes[i] == sizes[i - 1]).collect();
        Search {
            sizes,
            cap,
            suffix,
            same_as_prev,
            loads: Vec::new(),
            assign: vec![0; n],
            best: Vec::new(),
            best_count: usize::MAX,
            lower: 0,
            nodes: 0,
        }
    }

    fn bins_for(&self, amount: &T) -> usize {
        // ceil(amount / cap); amounts never exceed n * cap.
        if amount.is_zero() {
            return 0;
        }
        let mut k = 1usize;
        let mut total = self.cap.clone();
        while &total < amount {
            total = total + self.cap.clone();
            k += 1;
        }
        k
    }

    fn run(mut self) -> Result<Vec<usize>> {
        let n = self.sizes.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        // FFD incumbent.
        let mut loads: Vec<T> = Vec::new();
        let mut assign = vec![0; n];
        for (size, a) in self.sizes.iter().zip(assign.iter_mut()) {
            let slot = loads.iter().position(|l| l.clone() + size.clone() <= self.cap);
            match slot {
                Some(b) => {
                    loads[b] = loads[b].clone() + size.clone();
                    *a = b;
                }
                None => {
                    *a = loads.len();
                    loads.push(size.clone());
                }
            }
        }
        self.best_count = loads.len();
        self.best = assign;

        let half = |x: &T, cap: &T| x.clone() + x.clone() > *cap;
        let large = self.sizes.iter().filter(|s| half(s, &self.cap)).count();
        self.lower = self.bins_for(&self.suffix[0].clone()).max(large);
        if self.best_count > self.lower {
            self.dfs(0)?;
        }
        Ok(self.best)
    }

    fn dfs(&mut self, i: usize) -> Result<()> {
        if self.best_count == self.lower {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > SEARCH_NODE_LIMIT {
            return Err(Error::TooLarge(format!(
                "branch-and-bound exceeded {SEARCH_NODE_LIMIT} nodes"
            )));
        }
        if i == self.sizes.len() {
            if self.loads.len() < self.best_count {
                self.best_count = self.loads.len();
                self.best = self.assign.clone();
            }
            return Ok(());
        }
        // Remaining items beyond the free space of open bins need new bins.
        let free = self
            .loads
            .iter()
            .fold(T::zero(), |acc, l| acc + (self.cap.clone() - l.clone()));
        let rest = &self.suffix[i];
        let extra = if *rest > free {
            let over = rest.clone() - free;
            self.bins_for(&over)
        } else {
            0
        };
        if self.loads.len() + extra >= self.best_count {
            return Ok(());
        }

        let size = self.sizes[i].clone();
        let start = if self.same_as_prev[i] { self.assign[i - 1] } else { 0 };
        let mut tried: Vec<T> = Vec::new();
        for b in start..self.loads.len() {
            let load = self.loads[b].clone();
            if load.clone() + size.clone() > self.cap || tried.contains(&load) {
                continue;
            }
            tried.push(load.clone());
            self.loads[b] = load.clone() + size.clone();
            self.assign[i] = b;
            self.dfs(i + 1)?;
            self.loads[b] = load;
            if self.best_count == self.lower {
                return Ok(());
            }
        }
        if self.loads.len() + 1 < self.best_count {
            self.assign[i] = self.loads.len();
            self.loads.push(size);
            self.dfs(i + 1)?;
            self.loads.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(list: &[(i64, i64)]) -> Vec<Item> {
        let s: Vec<Size> = list.iter().map(|&(a, b)| Size::ratio(a, b)).collect();
        items_from_sizes(&s)
    }

    fn loads(p: &Packing) -> Vec<Q> {
        p.bins.iter().map(|b| b.load.clone()).collect()
    }

    fn raw(size: &str) -> RawItem {
        RawItem {
            size: size.into(),
            ..Default::default()
        }
    }

    #[test]
    fn validate_examples() {
        let r = validate_instance(&[raw("3/5"), raw("2/5")]).unwrap();
        assert!(r.is_valid());
        assert_eq!(r.items.unwrap().len(), 2);

        let r = validate_instance(&[raw("7/5")]).unwrap();
        assert!(!r.is_valid());
        assert!(r.errors[0].contains("size exceeds 1"));

        let r = validate_instance(&[raw("0")]).unwrap();
        assert!(r.is_valid());

        assert!(matches!(validate_instance(&[raw("1/0")]), Err(Error::Parse(_))));
    }

    #[test]
    fn validate_duplicates_and_reduction() {
        let mut a = raw("2/4");
        a.index = Some(3);
        let mut b = raw("1/3");
        b.index = Some(3);
        let r = validate_instance(&[a, b]).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.errors[0].contains("duplicate index 3"));
    }

    #[test]
    fn first_fit_examples() {
        let p = first_fit(&sizes(&[(1, 2), (1, 2), (1, 2)]));
        assert_eq!(p.bins.len(), 2);
        assert_eq!(p.bins[0].items, vec![0, 1]);

        let p = first_fit(&sizes(&[(3, 5), (1, 2), (2, 5)]));
        assert_eq!(p.bins.len(), 2);
        assert_eq!(p.bins[0].items, vec![0, 2]);
        assert_eq!(p.bins[1].items, vec![1]);

        assert_eq!(first_fit(&[]).bins.len(), 0);
    }

    #[test]
    fn ffd_examples() {
        let items = sizes(&[(3, 5), (1, 2), (2, 5), (3, 10)]);
        let t = ffd(&items);
        assert_eq!(t.bin_count, 2);
        assert_eq!(loads(&t.packing), vec![q(1, 1), q(4, 5)]);
        assert_eq!(t.packing.bins[0].items, vec![0, 2]);
        assert_eq!(t.packing.bins[1].items, vec![1, 3]);
        assert_eq!(t.tau, 1);
        assert_eq!(t.theta, Some(Size::ratio(1, 2)));

        let t = ffd(&sizes(&[(0, 1), (0, 1)]));
        assert_eq!(t.bin_count, 1);

        let t = ffd(&sizes(&[(2, 3), (2, 3), (2, 3)]));
        assert_eq!(t.bin_count, 3);
        assert_eq!(t.tau, 2);
        assert_eq!(t.theta, Some(Size::ratio(2, 3)));

        let t = ffd(&[]);
        assert_eq!(t.bin_count, 0);
        assert_eq!(t.theta, None);
    }

    #[test]
    fn ffd_tau_zero_when_only_last_bin_is_large() {
        // One large item and nothing else: a single bin, which is not inner.
        let t = ffd(&sizes(&[(3, 5)]));
        assert_eq!(t.tau, 0);
    }

    #[test]
    fn ffd_ties_by_index() {
        let mut items = sizes(&[(1, 3), (1, 3)]);
        items[0].index = 9;
        items[1].index = 2;
        assert_eq!(ffd(&items).order, vec![1, 0]);
    }

    #[test]
    fn zero_items_join_first_bin() {
        let t = ffd(&sizes(&[(0, 1), (3, 5), (3, 5)]));
        assert_eq!(t.bin_count, 2);
        assert!(t.packing.bins[0].items.contains(&0));
    }

    #[test]
    fn exact_examples() {
        let items = sizes(&[(51, 100), (51, 100), (49, 100)]);
        let s = exact_optimal(&items, DEFAULT_ITEM_LIMIT).unwrap();
        assert_eq!(s.bins, 2);
        assert!(verify_packing(&items, &s.packing).ok);

        let items = sizes(&[(1, 3), (1, 3), (1, 3)]);
        assert_eq!(exact_optimal(&items, DEFAULT_ITEM_LIMIT).unwrap().bins, 1);

        // 3613 items of 1/1807 + mu: at most 1806 per bin.
        let mu = q(1, 10_000_000_000);
        let s = Size::new(q(1, 1807) + mu).unwrap();
        let class = ItemClass::new(s.clone(), 3613);
        assert_eq!(optimal_bin_count(&[(s, 3613)], DEFAULT_ITEM_LIMIT).unwrap(), 3);
        let items = expand(&[class]);
        let sol = exact_optimal(&items, DEFAULT_ITEM_LIMIT).unwrap();
        assert_eq!(sol.bins, 3);
        assert!(verify_packing(&items, &sol.packing).ok);
    }

    #[test]
    fn exact_too_large() {
        let s: Vec<Size> = (0..30).map(|i| Size::ratio(1, 7 + i)).collect();
        assert!(matches!(
            exact_optimal(&items_from_sizes(&s), DEFAULT_ITEM_LIMIT),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn exact_handles_zero_sizes() {
        let items = sizes(&[(0, 1), (0, 1)]);
        let s = exact_optimal(&items, DEFAULT_ITEM_LIMIT).unwrap();
        assert_eq!(s.bins, 1);
        assert!(verify_packing(&items, &s.packing).ok);
        assert_eq!(exact_optimal(&[], DEFAULT_ITEM_LIMIT).unwrap().bins, 0);
    }

    #[test]
    fn verify_packing_examples() {
        let items = sizes(&[(1, 2), (1, 2)]);
        let ok = verify_packing(&items, &Packing::from_positions(&items, vec![vec![0, 1]]));
        assert!(ok.ok);

        let items = sizes(&[(3, 5), (3, 5)]);
        let bad = verify_packing(&items, &Packing::from_positions(&items, vec![vec![0, 1]]));
        assert!(!bad.ok);
        assert_eq!(bad.violation.unwrap(), "bin 0 overfull by 1/5");

        let missing = verify_packing(&items, &Packing::from_positions(&items, vec![vec![0]]));
        assert!(missing.violation.unwrap().starts_with("coverage mismatch"));
    }
}
