//! Worst-case clustered instances for the price of clustering, their
//! global packing certificates, and the closed-form lower bounds.
//!
//! Item families (all sizes perturbed by multiples of a tiny unit `nu`):
//!
//! | kind            | size                                  |
//! |-----------------|---------------------------------------|
//! | positive (2,i)  | 1/2 + i nu                            |
//! | negative (2,i)  | 1/2 - i nu                            |
//! | type 2          | 1/2 + P nu  (P = number of pairs)     |
//! | positive (3,i)  | 1/3 + K 3^(3i) nu                     |
//! | negative (3,i)  | 1/3 - K 3^(3i-1) nu                   |
//! | positive (6,i)  | 1/6 + K 3^(3i-1) nu - N nu            |
//! | negative (6,i)  | 1/6 - K 3^(3i) nu - N nu              |
//! | type t          | 1/t + nu, t in {7, 43, 1807}          |
//!
//! `K` is the least power of three above `10 N`, which keeps the ladder
//! terms ahead of every `N nu` term; `nu` is small enough for the fullest
//! certificate bin to fit.
//!
//! For `k >= 3` the cluster layout is: family-2 clusters of one positive
//! `(2,i+1)`, one negative `(2,i)` and `k-2` type-2 items; family-3 clusters
//! of `2k-3` positive and two negative `(3,i)` items; family-6 clusters of
//! `5k-9` positive `(6,i+1)` and five negative `(6,i)` items; and type-`t`
//! clusters of `(k-1)(t-1)+1` items. Counts per index follow from the global
//! packing: every positive `(3,i)` (i < M) shares a bin with a negative
//! `(6,i)`, every negative `(3,i)` (i > 1) with a positive `(6,i)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::clustering::{Cluster, ClusteredInstance};
use crate::error::{Error, Result};
use crate::packing::{optimal_bin_count, ItemClass, DEFAULT_ITEM_LIMIT};
use crate::size::{fmt_q, q, qi, Size, Q};

pub const FAMILIES: [u32; 6] = [2, 3, 6, 7, 43, 1807];
const UNIT_FAMILIES: [u32; 3] = [7, 43, 1807];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Pos2(u64),
    Neg2(u64),
    Type2,
    Pos3(u32),
    Neg3(u32),
    Pos6(u32),
    Neg6(u32),
    Unit(u32),
}

impl Kind {
    /// Compact code used in certificate files, e.g. `pos3:2`, `t2`, `u7`.
    pub fn code(&self) -> String {
        match self {
            Kind::Pos2(i) => format!("pos2:{i}"),
            Kind::Neg2(i) => format!("neg2:{i}"),
            Kind::Type2 => "t2".into(),
            Kind::Pos3(i) => format!("pos3:{i}"),
            Kind::Neg3(i) => format!("neg3:{i}"),
            Kind::Pos6(i) => format!("pos6:{i}"),
            Kind::Neg6(i) => format!("neg6:{i}"),
            Kind::Unit(t) => format!("u{t}"),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Pos2(i) => write!(f, "positive type (2,{i})"),
            Kind::Neg2(i) => write!(f, "negative type (2,{i})"),
            Kind::Type2 => write!(f, "type 2"),
            Kind::Pos3(i) => write!(f, "positive type (3,{i})"),
            Kind::Neg3(i) => write!(f, "negative type (3,{i})"),
            Kind::Pos6(i) => write!(f, "positive type (6,{i})"),
            Kind::Neg6(i) => write!(f, "negative type (6,{i})"),
            Kind::Unit(t) => write!(f, "type {t}"),
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown item kind `{s}`"));
        if s == "t2" {
            return Ok(Kind::Type2);
        }
        if let Some(t) = s.strip_prefix('u') {
            return t.parse().map(Kind::Unit).map_err(|_| bad());
        }
        let (tag, idx) = s.split_once(':').ok_or_else(bad)?;
        let small = || idx.parse::<u32>().map_err(|_| bad());
        Ok(match tag {
            "pos2" => Kind::Pos2(idx.parse().map_err(|_| bad())?),
            "neg2" => Kind::Neg2(idx.parse().map_err(|_| bad())?),
            "pos3" => Kind::Pos3(small()?),
            "neg3" => Kind::Neg3(small()?),
            "pos6" => Kind::Pos6(small()?),
            "neg6" => Kind::Neg6(small()?),
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// `nu = 1 / (10^7 K 3^(3M))`.
    Ladder,
    /// Explicit base unit, used to probe how large `nu` may get.
    BaseUnit(Q),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub n: u64,
    pub m: u32,
    pub k: u32,
    pub families: BTreeSet<u32>,
    pub perturbation: Perturbation,
}

impl GeneratorParams {
    pub fn new(k: u32, n: u64, m: u32, families: &[u32]) -> Self {
        GeneratorParams {
            n,
            m,
            k,
            families: families.iter().copied().collect(),
            perturbation: Perturbation::Ladder,
        }
    }

    fn has(&self, family: u32) -> bool {
        self.families.contains(&family)
    }
}

pub fn families_label(families: &BTreeSet<u32>) -> String {
    let list: Vec<String> = families.iter().map(|f| f.to_string()).collect();
    format!("{{{}}}", list.join(","))
}

/// Cluster and pair counts as exact multiples of `N`.
#[derive(Clone, Debug)]
struct Counts {
    k: u64,
    pairs: Q,
    /// Family-3 clusters for index `i` at position `i - 1`.
    f3: Vec<Q>,
    /// Family-6 clusters pairing positive `(6,i+1)` with negative `(6,i)`,
    /// for `i = 1..M-1`.
    f6: Vec<Q>,
    /// Type-`t` clusters.
    units: Vec<(u32, Q)>,
}

fn counts_per_n(params: &GeneratorParams) -> Counts {
    let k = params.k as i64;
    let m = params.m as usize;
    let pairs = q(1, k - 1);
    let mut f3 = vec![Q::zero(); m];
    let mut f6 = vec![Q::zero(); m.saturating_sub(1)];
    let mut units = Vec::new();
    if params.has(3) {
        // Ratio between consecutive indices, from the certificate balance.
        let r = q(10, (5 * k - 9) * (2 * k - 3));
        let top = (qi(1) - &r) * q(k - 2, (k - 1) * (2 * k - 1));
        let mut a = top.clone();
        for i in (0..m).rev() {
            f3[i] = a.clone();
            a *= &r;
        }
        if params.has(6) {
            for i in 0..m - 1 {
                f6[i] = &f3[i] * q(2 * k - 3, 5);
            }
        }
        let pos_top = &top * qi(2 * k - 3);
        for t in UNIT_FAMILIES {
            if params.has(t) {
                let size = (k - 1) * (t as i64 - 1) + 1;
                units.push((t, &pos_top / qi(size)));
            }
        }
    }
    Counts {
        k: params.k as u64,
        pairs,
        f3,
        f6,
        units,
    }
}

impl Counts {
    fn coefficients(&self) -> Vec<Q> {
        let k = self.k as i64;
        let mut out = vec![self.pairs.clone(), qi(1) - &self.pairs];
        for a in &self.f3 {
            out.push(a.clone());
            out.push(a * qi(2 * k - 3));
        }
        out.extend(self.f6.iter().cloned());
        out.extend(self.units.iter().map(|(_, c)| c.clone()));
        out
    }
}

/// Smallest `N` making every count in the construction integral.
pub fn required_modulus(params: &GeneratorParams) -> u64 {
    counts_per_n(params)
        .coefficients()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
        .to_u64()
        .unwrap_or(u64::MAX)
}

fn validate_params(params: &GeneratorParams) -> Result<()> {
    if params.k < 3 {
        return Err(Error::Generator("k must be at least 3".into()));
    }
    if params.m < 1 {
        return Err(Error::Generator("M must be at least 1".into()));
    }
    if params.m > 12 {
        return Err(Error::Generator("M above 12 is not supported".into()));
    }
    if let Some(f) = params.families.iter().find(|f| !FAMILIES.contains(f)) {
        return Err(Error::Generator(format!("unknown family {f}")));
    }
    if !params.has(2) {
        return Err(Error::Generator(
            "family 2 is required (it certifies the global optimum)".into(),
        ));
    }
    if !params.has(3) {
        if let Some(f) = params.families.iter().find(|&&f| f != 2) {
            return Err(Error::Generator(format!(
                "family {f} requires family 3 (its certificate bins hold type-(3,i) items)"
            )));
        }
    }
    let modulus = required_modulus(params);
    if params.n == 0 || !params.n.is_multiple_of(modulus) {
        return Err(Error::Generator(format!(
            "N must be divisible by {modulus} for families {}, M={}",
            families_label(&params.families),
            params.m
        )));
    }
    let pairs = params.n / (params.k as u64 - 1);
    if pairs < 2 {
        return Err(Error::Generator(format!(
            "N/(k-1) = {pairs} leaves no family-2 cluster; increase N"
        )));
    }
    Ok(())
}

/// Least power of three strictly above `10 N`.
fn ladder_scale(n: u64) -> BigInt {
    let mut k = BigInt::one();
    let bound = BigInt::from(10u64) * BigInt::from(n);
    while k <= bound {
        k *= 3u32;
    }
    k
}

fn pow3(e: u32) -> BigInt {
    Pow::pow(BigInt::from(3u32), e)
}

/// Bin pattern: item kinds with per-bin counts, repeated `multiplicity` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub parts: Vec<(Kind, u64)>,
    pub multiplicity: u64,
}

/// Pattern-level global packing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub kinds: BTreeMap<Kind, Size>,
    pub patterns: Vec<Pattern>,
}

impl Certificate {
    pub fn bin_count(&self) -> u64 {
        self.patterns.iter().map(|p| p.multiplicity).sum()
    }

    pub fn pattern_load(&self, pattern: &Pattern) -> Result<Q> {
        let mut load = Q::zero();
        for (kind, count) in &pattern.parts {
            let size = self
                .kinds
                .get(kind)
                .ok_or_else(|| Error::InvalidInstance(format!("pattern uses undeclared kind {}", kind.code())))?;
            load += size.value() * Q::from_integer((*count).into());
        }
        Ok(load)
    }

    /// Size multiset consumed by the certificate.
    pub fn size_counts(&self) -> Result<BTreeMap<Size, u64>> {
        let mut counts: BTreeMap<Size, u64> = BTreeMap::new();
        for p in &self.patterns {
            for (kind, count) in &p.parts {
                let size = self
                    .kinds
                    .get(kind)
                    .ok_or_else(|| Error::InvalidInstance(format!("undeclared kind {}", kind.code())))?;
                *counts.entry(size.clone()).or_default() += count * p.multiplicity;
            }
        }
        Ok(counts)
    }

    /// Conservation and per-pattern feasibility problems, if any.
    pub fn check_against(&self, inst: &ClusteredInstance) -> Vec<String> {
        let mut problems = Vec::new();
        for (i, p) in self.patterns.iter().enumerate() {
            match self.pattern_load(p) {
                Ok(load) if load > Q::one() => problems.push(format!(
                    "pattern {i} ({}) has load {} > 1",
                    pattern_label(p),
                    fmt_q(&load)
                )),
                Ok(_) => {}
                Err(e) => problems.push(e.to_string()),
            }
        }
        match self.size_counts() {
            Ok(used) => {
                let have = inst.size_counts();
                if used != have {
                    let missing = have
                        .iter()
                        .find(|(s, c)| used.get(*s) != Some(*c))
                        .map(|(s, c)| {
                            format!(
                                "size {s}: instance {c}, certificate {}",
                                used.get(s).copied().unwrap_or(0)
                            )
                        })
                        .or_else(|| {
                            used.iter()
                                .find(|(s, _)| !have.contains_key(*s))
                                .map(|(s, c)| format!("size {s}: instance 0, certificate {c}"))
                        })
                        .unwrap_or_default();
                    problems.push(format!("certificate does not conserve items ({missing})"));
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        problems
    }
}

fn pattern_label(p: &Pattern) -> String {
    p.parts
        .iter()
        .map(|(k, c)| format!("{}x{c}", k.code()))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug)]
pub struct GeneratedConstruction {
    pub params: GeneratorParams,
    pub nu: Q,
    pub instance: ClusteredInstance,
    pub certificate: Certificate,
    /// Expected optimal cost per cluster, aligned with `instance.clusters`.
    pub predicted: Vec<u64>,
    pub large_item_count: u64,
}

impl GeneratedConstruction {
    pub fn predicted_sum(&self) -> u64 {
        self.predicted.iter().sum()
    }
}

fn int(c: &Q, n: u64) -> u64 {
    (c * Q::from_integer(n.into()))
        .to_integer()
        .to_u64()
        .expect("count fits u64")
}

pub fn generate_construction(params: &GeneratorParams) -> Result<GeneratedConstruction> {
    validate_params(params)?;
    let n = params.n;
    let m = params.m;
    let k = params.k as u64;
    let counts = counts_per_n(params);
    let pairs = int(&counts.pairs, n);
    let scale = ladder_scale(n);

    let nu = match &params.perturbation {
        Perturbation::Ladder => {
            let den = BigInt::from(10_000_000u64) * &scale * pow3(3 * m);
            Q::new(BigInt::one(), den)
        }
        Perturbation::BaseUnit(nu) => {
            if nu <= &Q::zero() {
                return Err(Error::Generator("base unit must be positive".into()));
            }
            nu.clone()
        }
    };
    let kq = Q::from_integer(scale.clone());
    let nq = Q::from_integer(n.into());

    let mut kinds: BTreeMap<Kind, Size> = BTreeMap::new();
    let mut put = |kind: Kind, value: Q| -> Result<()> {
        let size = Size::new(value)
            .map_err(|e| Error::Generator(format!("{kind} has size outside [0, 1] ({e}); base unit too large")))?;
        kinds.insert(kind, size);
        Ok(())
    };
    for i in 1..=pairs {
        let d = &nu * Q::from_integer(i.into());
        put(Kind::Pos2(i), q(1, 2) + &d)?;
        put(Kind::Neg2(i), q(1, 2) - &d)?;
    }
    put(Kind::Type2, q(1, 2) + &nu * Q::from_integer(pairs.into()))?;
    if params.has(3) {
        for i in 1..=m {
            let up = &kq * Q::from_integer(pow3(3 * i)) * &nu;
            let down = &kq * Q::from_integer(pow3(3 * i - 1)) * &nu;
            put(Kind::Pos3(i), q(1, 3) + &up)?;
            put(Kind::Neg3(i), q(1, 3) - &down)?;
            if params.has(6) {
                if i >= 2 {
                    put(Kind::Pos6(i), q(1, 6) + &down - &nq * &nu)?;
                }
                if i < m {
                    put(Kind::Neg6(i), q(1, 6) - &up - &nq * &nu)?;
                }
            }
        }
    }
    for (t, _) in &counts.units {
        put(Kind::Unit(*t), q(1, *t as i64) + &nu)?;
    }

    let class = |kind: Kind, count: u64, cluster: &str| ItemClass {
        size: kinds[&kind].clone(),
        count,
        cluster: Some(cluster.to_string()),
        label: kind.to_string(),
    };
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut predicted = Vec::new();

    // Family 2; the leftover positive (2,1), negative (2,P) and k-2 type-2
    // items join the first cluster.
    for i in 1..pairs {
        let id = format!("f2-{i}");
        let mut classes = vec![class(Kind::Pos2(i + 1), 1, &id), class(Kind::Neg2(i), 1, &id)];
        if i == 1 {
            classes.push(class(Kind::Pos2(1), 1, &id));
            classes.push(class(Kind::Neg2(pairs), 1, &id));
            classes.push(class(Kind::Type2, 2 * (k - 2), &id));
            predicted.push(2 * k - 2);
        } else {
            classes.push(class(Kind::Type2, k - 2, &id));
            predicted.push(k);
        }
        clusters.push(Cluster { id, classes });
    }
    if params.has(3) {
        for i in 1..=m {
            for j in 1..=int(&counts.f3[i as usize - 1], n) {
                let id = format!("f3-{i}-{j}");
                let classes = vec![class(Kind::Pos3(i), 2 * k - 3, &id), class(Kind::Neg3(i), 2, &id)];
                clusters.push(Cluster { id, classes });
                predicted.push(k);
            }
        }
    }
    if params.has(6) {
        for i in 1..m {
            for j in 1..=int(&counts.f6[i as usize - 1], n) {
                let id = format!("f6-{i}-{j}");
                let classes = vec![class(Kind::Pos6(i + 1), 5 * k - 9, &id), class(Kind::Neg6(i), 5, &id)];
                clusters.push(Cluster { id, classes });
                predicted.push(k);
            }
        }
    }
    for (t, c) in &counts.units {
        let per = (k - 1) * (*t as u64 - 1) + 1;
        for j in 1..=int(c, n) {
            let id = format!("f{t}-{j}");
            clusters.push(Cluster {
                id: id.clone(),
                classes: vec![class(Kind::Unit(*t), per, &id)],
            });
            predicted.push(k);
        }
    }

    // Global certificate.
    let mut patterns: Vec<Pattern> = (1..=pairs)
        .map(|i| Pattern {
            parts: vec![(Kind::Pos2(i), 1), (Kind::Neg2(i), 1)],
            multiplicity: 1,
        })
        .collect();
    let type2_bins = n - pairs;
    let mut used = 0u64;
    if params.has(3) {
        for i in 1..=m {
            let a = int(&counts.f3[i as usize - 1], n);
            let pos = (2 * k - 3) * a;
            let neg = 2 * a;
            let mut top = vec![(Kind::Type2, 1), (Kind::Pos3(i), 1)];
            if i == m {
                top.extend(counts.units.iter().map(|(t, _)| (Kind::Unit(*t), 1)));
            } else if params.has(6) {
                top.push((Kind::Neg6(i), 1));
            }
            let mut low = vec![(Kind::Type2, 1), (Kind::Neg3(i), 1)];
            if i > 1 && params.has(6) {
                low.push((Kind::Pos6(i), 1));
            }
            patterns.push(Pattern {
                parts: top,
                multiplicity: pos,
            });
            patterns.push(Pattern {
                parts: low,
                multiplicity: neg,
            });
            used += pos + neg;
        }
    }
    if used > type2_bins {
        return Err(Error::Generator(format!(
            "{used} type-(3,i) items exceed the {type2_bins} type-2 bins"
        )));
    }
    if type2_bins > used {
        patterns.push(Pattern {
            parts: vec![(Kind::Type2, 1)],
            multiplicity: type2_bins - used,
        });
    }
    patterns.retain(|p| p.multiplicity > 0);

    let instance = ClusteredInstance { k, clusters };
    let large_item_count = instance.large_item_count();
    Ok(GeneratedConstruction {
        params: params.clone(),
        nu,
        instance,
        certificate: Certificate { kinds, patterns },
        predicted,
        large_item_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ConstructionReport {
    pub checks: Vec<CheckEntry>,
    pub global_opt: u64,
    pub sum_cluster_opt: u64,
    pub predicted_sum: u64,
    /// Clusters whose solver optimum differs from the prediction.
    pub mismatched: Vec<(String, u64, u64)>,
    pub min_cluster_opt: u64,
    pub ratio: Q,
}

impl ConstructionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn entry(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckEntry {
    CheckEntry {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Strict and non-strict inequalities the construction relies on, derived
/// from the kinds present.
pub fn inequality_checks(kinds: &BTreeMap<Kind, Size>) -> Vec<CheckEntry> {
    let one = Q::one();
    let v = |k: &Kind| kinds.get(k).map(|s| s.value().clone());
    let times = |x: &Q, c: i64| x * qi(c);
    let mut out = Vec::new();
    let mut push_all = |name: String, fails: Vec<String>, total: usize| {
        let passed = fails.is_empty();
        let detail = if passed {
            format!("{total} instances hold")
        } else {
            format!("{} of {total} fail, first: {}", fails.len(), fails[0])
        };
        out.push(entry(name, passed, detail));
    };

    let nonpositive: Vec<String> = kinds
        .iter()
        .filter(|(_, s)| s.is_zero())
        .map(|(k, _)| k.to_string())
        .collect();
    push_all("every size is positive".into(), nonpositive, kinds.len());

    let pairs = kinds
        .keys()
        .filter_map(|k| match k {
            Kind::Neg2(i) => Some(*i),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    if pairs > 0 {
        let mut exact = Vec::new();
        let mut cross = Vec::new();
        let mut with_t2 = Vec::new();
        let t2 = v(&Kind::Type2);
        for i in 1..=pairs {
            let (Some(p), Some(n)) = (v(&Kind::Pos2(i)), v(&Kind::Neg2(i))) else {
                exact.push(format!("missing pair {i}"));
                continue;
            };
            if &p + &n != one {
                exact.push(format!("i={i}: sum {}", fmt_q(&(&p + &n))));
            }
            if i < pairs {
                if let Some(pn) = v(&Kind::Pos2(i + 1)) {
                    if &pn + &n <= one {
                        cross.push(format!("i={i}"));
                    }
                }
                if let Some(t) = &t2 {
                    if t + &n <= one {
                        with_t2.push(format!("i={i}"));
                    }
                }
            }
        }
        push_all("positive(2,i) + negative(2,i) = 1".into(), exact, pairs as usize);
        push_all("positive(2,i+1) + negative(2,i) > 1".into(), cross, pairs as usize - 1);
        push_all(
            "type 2 + negative(2,i) > 1 for i < P".into(),
            with_t2,
            pairs as usize - 1,
        );
    }

    for (kind, size) in kinds {
        let x = size.value();
        match kind {
            Kind::Pos3(i) => {
                if let Some(n) = v(&Kind::Neg3(*i)) {
                    let three = x + times(&n, 2);
                    out.push(entry(
                        format!("positive(3,{i}) + 2 negative(3,{i}) > 1"),
                        three > one,
                        fmt_q(&three),
                    ));
                }
                let two = times(x, 2);
                out.push(entry(format!("2 positive(3,{i}) <= 1"), two <= one, fmt_q(&two)));
            }
            Kind::Neg6(i) => {
                if let Some(p) = v(&Kind::Pos6(i + 1)) {
                    let six = &p + times(x, 5);
                    out.push(entry(
                        format!("positive(6,{}) + 5 negative(6,{i}) > 1", i + 1),
                        six > one,
                        fmt_q(&six),
                    ));
                    let five = times(&p, 5);
                    out.push(entry(
                        format!("5 positive(6,{}) <= 1", i + 1),
                        five <= one,
                        fmt_q(&five),
                    ));
                }
            }
            Kind::Unit(t) => {
                let t = *t as i64;
                let over = times(x, t);
                let fit = times(x, t - 1);
                out.push(entry(format!("{t} type-{t} items > 1"), over > one, fmt_q(&over)));
                out.push(entry(format!("{} type-{t} items <= 1", t - 1), fit <= one, fmt_q(&fit)));
            }
            _ => {}
        }
    }
    out
}

/// Verifies a construction with exact arithmetic: certificate conservation
/// and feasibility, the large-item bound on the global optimum, every
/// cluster's optimum against its prediction, and the inequality system.
pub fn verify_construction(c: &GeneratedConstruction) -> ConstructionReport {
    let mut checks = Vec::new();
    let cert = &c.certificate;
    let problems = cert.check_against(&c.instance);
    checks.push(entry(
        "certificate conservation and feasibility",
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} patterns, {} bins", cert.patterns.len(), cert.bin_count())
        } else {
            problems.join("; ")
        },
    ));

    let large = c.instance.large_item_count();
    let bins = cert.bin_count();
    checks.push(entry(
        "large-item count equals certificate bins",
        large == bins && large == c.large_item_count,
        format!("{large} items above 1/2, {bins} certificate bins"),
    ));

    let mut sum = 0u64;
    let mut mismatched = Vec::new();
    let mut min_opt = u64::MAX;
    let mut errors = Vec::new();
    // Clusters with identical contents share an optimum.
    let mut cache: BTreeMap<Vec<(Size, u64)>, u64> = BTreeMap::new();
    for (cluster, &want) in c.instance.clusters.iter().zip(&c.predicted) {
        let mut groups = cluster.groups();
        groups.sort();
        let opt = match cache.get(&groups) {
            Some(&o) => o,
            None => match optimal_bin_count(&groups, DEFAULT_ITEM_LIMIT) {
                Ok(o) => {
                    cache.insert(groups, o);
                    o
                }
                Err(e) => {
                    errors.push(format!("{}: {e}", cluster.id));
                    continue;
                }
            },
        };
        sum += opt;
        min_opt = min_opt.min(opt);
        if opt != want {
            mismatched.push((cluster.id.clone(), opt, want));
        }
    }
    if c.predicted.len() != c.instance.clusters.len() {
        errors.push("prediction count does not match cluster count".into());
    }
    checks.push(entry(
        "cluster optima match predictions",
        mismatched.is_empty() && errors.is_empty(),
        if let Some((id, got, want)) = mismatched.first() {
            format!(
                "{} mismatches, first {id}: solver {got}, predicted {want}",
                mismatched.len()
            )
        } else if let Some(e) = errors.first() {
            e.clone()
        } else {
            format!("{} clusters, sum {sum}", c.instance.clusters.len())
        },
    ));
    let min_opt = if min_opt == u64::MAX { 0 } else { min_opt };
    checks.push(entry(
        format!("every cluster optimum >= k = {}", c.instance.k),
        min_opt >= c.instance.k,
        format!("minimum {min_opt}"),
    ));
    checks.extend(inequality_checks(&cert.kinds));

    let ratio = if bins == 0 {
        Q::zero()
    } else {
        Q::new(sum.into(), bins.into())
    };
    ConstructionReport {
        checks,
        global_opt: bins,
        sum_cluster_opt: sum,
        predicted_sum: c.predicted_sum(),
        mismatched,
        min_cluster_opt: min_opt,
        ratio,
    }
}

/// Lower bound on the price of clustering for parameter `k >= 4`.
pub fn lb_formula(k: u32) -> Result<Q> {
    if k < 4 {
        return Err(Error::InvalidArgument(format!(
            "k = {k}: the general formula needs k >= 4 (use k3-limit for k = 3)"
        )));
    }
    Ok(lb_expression(k as i64))
}

/// The general-k expression, also valid at `k = 3`.
pub(crate) fn lb_expression(k: i64) -> Q {
    let a = k - 1;
    let b = 2 * k - 1;
    let c = 5 * k - 9;
    let tail = q(1, 6 * k - 5) + q(1, 42 * k - 41) + q(1, 1806 * k - 1805);
    q(k, a)
        + q(k * (k - 2), a * b)
        + q(2 * k * (k - 2), a * b * c)
        + qi(k * (10 * k * k * k - 53 * k * k + 83 * k - 34)) * tail / qi(a * b * c)
}

/// Limit of the `k = 3` construction's ratio as `N, M` grow.
pub fn k3_limit() -> Q {
    q(19, 10) + q(2, 18065) + q(2, 425) + q(2, 65)
}

/// Total clustered cost per `N` of the `k = 3` construction as a closed
/// form, keeping only the terms of enabled families and counting the merged
/// family-2 cluster as 3.
pub fn k3_finite_prediction(n: u64, m: u32, families: &BTreeSet<u32>) -> Q {
    let nq = Q::from_integer(n.into());
    let five_ninths = q(5, 9);
    let mut per_n = q(3, 2) - q(3, 1) / &nq;
    if families.contains(&3) {
        per_n += q(3, 10) * (qi(1) - Pow::pow(&five_ninths, m as u64));
        if families.contains(&6) {
            per_n += q(1, 10) * (qi(1) - Pow::pow(&five_ninths, (m - 1) as u64));
        }
        if families.contains(&7) {
            per_n += q(2, 65);
        }
        if families.contains(&43) {
            per_n += q(2, 425);
        }
        if families.contains(&1807) {
            per_n += q(2, 18065);
        }
    }
    per_n * nq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_kind(c: &GeneratedConstruction, kind: Kind) -> u64 {
        c.instance
            .clusters
            .iter()
            .flat_map(|cl| &cl.classes)
            .filter(|cl| cl.label == kind.to_string())
            .map(|cl| cl.count)
            .sum()
    }

    #[test]
    fn kind_codes_round_trip() {
        for kind in [
            Kind::Pos2(17),
            Kind::Neg2(1),
            Kind::Type2,
            Kind::Pos3(2),
            Kind::Neg3(1),
            Kind::Pos6(3),
            Kind::Neg6(2),
            Kind::Unit(1807),
        ] {
            assert_eq!(kind.code().parse::<Kind>().unwrap(), kind);
        }
        assert!("pos9:1".parse::<Kind>().is_err());
    }

    #[test]
    fn small_k3_counts() {
        let c = generate_construction(&GeneratorParams::new(3, 90, 1, &[2, 3])).unwrap();
        let pos2: u64 = (1..=45).map(|i| count_kind(&c, Kind::Pos2(i))).sum();
        let neg2: u64 = (1..=45).map(|i| count_kind(&c, Kind::Neg2(i))).sum();
        assert_eq!(pos2, 45);
        assert_eq!(neg2, 45);
        assert_eq!(count_kind(&c, Kind::Type2), 45);
        assert_eq!(count_kind(&c, Kind::Pos3(1)), 12);
        assert_eq!(count_kind(&c, Kind::Neg3(1)), 8);
        let f2 = c.instance.clusters.iter().filter(|cl| cl.id.starts_with("f2-")).count();
        let f3 = c.instance.clusters.iter().filter(|cl| cl.id.starts_with("f3-")).count();
        assert_eq!(f2, 44);
        assert_eq!(f3, 4);
        assert_eq!(c.instance.clusters[0].item_count(), 6);
        assert_eq!(c.large_item_count, 90);
        assert_eq!(c.certificate.bin_count(), 90);
    }

    #[test]
    fn divisibility_errors() {
        let err = generate_construction(&GeneratorParams::new(3, 91, 1, &[2, 3])).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid generator parameters: N must be divisible by 90 for families {2,3}, M=1"
        );
        assert!(generate_construction(&GeneratorParams::new(3, 90, 1, &[3])).is_err());
        assert!(generate_construction(&GeneratorParams::new(3, 90, 1, &[2, 7])).is_err());
        assert_eq!(required_modulus(&GeneratorParams::new(3, 1, 2, &[2, 3, 6, 7])), 10530);
        assert_eq!(required_modulus(&GeneratorParams::new(4, 1, 1, &[2, 3])), 231);
    }

    #[test]
    fn family6_layout() {
        let c = generate_construction(&GeneratorParams::new(3, 52650, 2, &[2, 3, 6, 7])).unwrap();
        let f6: Vec<&Cluster> = c
            .instance
            .clusters
            .iter()
            .filter(|cl| cl.id.starts_with("f6-"))
            .collect();
        assert_eq!(f6.len(), 780);
        assert!(f6.iter().all(|cl| cl.item_count() == 11));
        assert_eq!(count_kind(&c, Kind::Unit(7)), 7020);
    }

    #[test]
    fn k3_general_expression_matches_limit() {
        assert_eq!(lb_expression(3), k3_limit());
        assert!(lb_formula(3).is_err());
    }

    #[test]
    fn tampered_certificate_fails() {
        let mut c = generate_construction(&GeneratorParams::new(3, 90, 1, &[2, 3])).unwrap();
        c.certificate.patterns[0].parts.push((Kind::Type2, 1));
        let report = verify_construction(&c);
        let f = report.failures();
        assert!(f[0].name.starts_with("certificate"));
        assert!(f[0].detail.contains("load"));
    }

    #[test]
    fn large_base_unit_breaks_certificate() {
        let mut p = GeneratorParams::new(3, 90, 1, &[2, 3, 7]);
        // 13-item type-7 clusters need N divisible by 13 as well.
        p.n = 1170;
        p.perturbation = Perturbation::BaseUnit(q(1, 1_000_000));
        let c = generate_construction(&p).unwrap();
        let report = verify_construction(&c);
        assert!(!report.passed());
        assert!(report
            .failures()
            .iter()
            .any(|f| f.detail.contains("u7") && f.detail.contains("> 1")));

        p.perturbation = Perturbation::BaseUnit(q(1, 1000));
        assert!(generate_construction(&p).is_err());
    }
}
