//! Online bin packing with delays: the phase algorithm, an exact offline
//! optimum for small inputs, and the competitive-bound check.
//!
//! The online algorithm watches the total delay of all arrived, unpacked
//! items. When it reaches `rho`, every such item is packed by FFD and a new
//! phase starts with the next arrival. Instances whose delay functions are
//! all linear or piecewise linear are simulated in exact rationals; power
//! delays switch the whole run to `f64` with bisection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::packing::{ffd, Item};
use crate::size::{fmt_q, parse_rational, q, to_f64, Size, Q};
use crate::weights::pi_sequence;

/// Default number of sequence terms behind `rho`.
pub const DEFAULT_PI_TERMS: usize = 30;
/// Default item limit of [`offline_optimal`].
pub const DEFAULT_OFFLINE_LIMIT: usize = 12;
/// Relative accuracy of float crossing times.
pub const CROSSING_TOLERANCE: f64 = 1e-12;
/// Absolute slack for bound checks on float runs.
pub const FLOAT_BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelayFunction {
    /// `d(t) = rate * t`.
    Linear(Q),
    /// `d(t) = rate * t^exponent`.
    Power { rate: Q, exponent: Q },
    /// Piecewise linear through `(0, 0)` and the given points, constant
    /// after the last one.
    Table(Vec<(Q, Q)>),
}

impl DelayFunction {
    pub fn linear(rate: Q) -> Result<Self> {
        let f = DelayFunction::Linear(rate);
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            DelayFunction::Linear(r) if !r.is_positive() => bad(format!("linear rate {} must be positive", fmt_q(r))),
            DelayFunction::Power { rate, exponent } if !rate.is_positive() || !exponent.is_positive() => {
                bad("power delay needs a positive rate and exponent".into())
            }
            DelayFunction::Table(points) => {
                if points.is_empty() {
                    return bad("delay table needs at least one point".into());
                }
                let mut prev = (Q::zero(), Q::zero());
                for (t, v) in points {
                    if t <= &prev.0 {
                        return bad("delay table times must be strictly increasing and positive".into());
                    }
                    if v < &prev.1 {
                        return bad("delay table values must be non-decreasing and non-negative".into());
                    }
                    prev = (t.clone(), v.clone());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, DelayFunction::Table(_))
    }

    /// Supremum of a bounded delay.
    pub fn limit(&self) -> Option<Q> {
        match self {
            DelayFunction::Table(points) => points.last().map(|(_, v)| v.clone()),
            _ => None,
        }
    }

    /// Exact value; `None` for power delays.
    pub fn eval_q(&self, t: &Q) -> Option<Q> {
        if !t.is_positive() {
            return Some(Q::zero());
        }
        match self {
            DelayFunction::Linear(r) => Some(r * t),
            DelayFunction::Power { .. } => None,
            DelayFunction::Table(points) => {
                let mut prev = (Q::zero(), Q::zero());
                for (pt, pv) in points {
                    if t <= pt {
                        let frac = (t - &prev.0) / (pt - &prev.0);
                        return Some(&prev.1 + frac * (pv - &prev.1));
                    }
                    prev = (pt.clone(), pv.clone());
                }
                Some(prev.1)
            }
        }
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            DelayFunction::Linear(r) => to_f64(r) * t,
            DelayFunction::Power { rate, exponent } => to_f64(rate) * t.powf(to_f64(exponent)),
            DelayFunction::Table(points) => {
                let mut prev = (0.0, 0.0);
                for (pt, pv) in points {
                    let (pt, pv) = (to_f64(pt), to_f64(pv));
                    if t <= pt {
                        return prev.1 + (t - prev.0) / (pt - prev.0) * (pv - prev.1);
                    }
                    prev = (pt, pv);
                }
                prev.1
            }
        }
    }

    /// Kink positions (relative to arrival) of a piecewise-linear delay.
    fn kinks(&self) -> &[(Q, Q)] {
        match self {
            DelayFunction::Table(points) => points,
            _ => &[],
        }
    }
}

impl fmt::Display for DelayFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayFunction::Linear(r) => write!(f, "linear:{}", fmt_q(r)),
            DelayFunction::Power { rate, exponent } => {
                write!(f, "power:{},{}", fmt_q(rate), fmt_q(exponent))
            }
            DelayFunction::Table(points) => {
                let parts: Vec<String> = points
                    .iter()
                    .map(|(t, v)| format!("{}:{}", fmt_q(t), fmt_q(v)))
                    .collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for DelayFunction {
    type Err = Error;

    /// `linear:<rate>`, `power:<rate>,<exp>` or `table:<t1>:<v1>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let rat = |x: &str| parse_rational(x).map(|(v, _)| v);
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("malformed delay `{s}`")))?;
        let f = match kind {
            "linear" => DelayFunction::Linear(rat(rest)?),
            "power" => {
                let (r, e) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("power delay needs `rate,exp`: `{s}`")))?;
                DelayFunction::Power {
                    rate: rat(r)?,
                    exponent: rat(e)?,
                }
            }
            "table" => {
                let mut points = Vec::new();
                for pair in rest.split(',') {
                    let (t, v) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("table entry needs `t:v`: `{pair}`")))?;
                    points.push((rat(t)?, rat(v)?));
                }
                DelayFunction::Table(points)
            }
            _ => return Err(Error::Parse(format!("unknown delay kind `{kind}`"))),
        };
        f.validate().map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse(m),
            other => other,
        })?;
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedItem {
    pub item: Item,
    pub arrival: Q,
    pub delay: DelayFunction,
}

impl TimedItem {
    pub fn new(index: usize, size: Size, arrival: Q, delay: DelayFunction) -> Self {
        TimedItem {
            item: Item::new(index, size),
            arrival,
            delay,
        }
    }
}

pub fn all_exact(items: &[TimedItem]) -> bool {
    items.iter().all(|it| !matches!(it.delay, DelayFunction::Power { .. }))
}

/// Largest `rho` root with the sequence sum bounded by `pi_hat`, and the
/// resulting competitive bound.
pub fn rho_for(pi_hat: f64) -> (f64, f64) {
    let rho = (-pi_hat + (pi_hat * pi_hat + 4.0).sqrt()) / 2.0;
    let bound = (1.0 + 1.0 / rho).max(1.0 + rho + pi_hat);
    (rho, bound)
}

/// `rho` equalising `1 + 1/rho` and `1 + rho + pi_hat`, with `pi_hat` the
/// partial sum over `pi_terms` terms.
pub fn compute_rho(pi_terms: usize) -> Result<(f64, f64)> {
    if pi_terms == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    Ok(rho_for(pi_sequence(pi_terms).partial_f64()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phase {
    /// Positions into the input slice.
    pub items: Vec<usize>,
    pub trigger_time: f64,
    pub accumulated_delay: f64,
    pub bins: usize,
    /// Ended by the horizon rather than by reaching `rho`.
    pub flushed: bool,
    /// Exact trigger time and delay on rational runs.
    pub exact: Option<(Q, Q)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub rho: f64,
    /// `rho` as the exact rational value of the `f64`, used on exact runs.
    pub rho_exact: Q,
    pub phases: Vec<Phase>,
    pub total_cost: f64,
    pub total_cost_exact: Option<Q>,
}

impl SimulationTrace {
    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn total_bins(&self) -> usize {
        self.phases.iter().map(|p| p.bins).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.total_cost_exact.is_some()
    }
}

/// Arithmetic the simulator needs from its time/cost domain.
trait Scalar: Clone + PartialOrd + fmt::Debug {
    fn nil() -> Self;
    fn from_q(x: &Q) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn delay(d: &DelayFunction, t: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn exact(&self) -> Option<Q>;
    /// Earliest `t` in `[lo, hi]` (or `[lo, inf)` when `hi` is `None`) with
    /// pending delay `>= rho`, given the pending delay at `lo` is below it.
    fn crossing(pending: &[(&DelayFunction, Self)], lo: &Self, hi: Option<&Self>, rho: &Self) -> Option<Self>;
}

fn pending_delay<S: Scalar>(pending: &[(&DelayFunction, S)], t: &S) -> S {
    pending
        .iter()
        .fold(S::nil(), |acc, (d, a)| acc.plus(&S::delay(d, &t.minus(a))))
}

impl Scalar for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn delay(d: &DelayFunction, t: &Self) -> Self {
        d.eval_q(t).expect("exact runs have no power delays")
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn exact(&self) -> Option<Q> {
        Some(self.clone())
    }

    fn crossing(pending: &[(&DelayFunction, Self)], lo: &Self, hi: Option<&Self>, rho: &Self) -> Option<Self> {
        // The pending delay is affine between consecutive kinks.
        let mut cuts: Vec<Q> = pending
            .iter()
            .flat_map(|(d, a)| d.kinks().iter().map(move |(t, _)| a + t))
            .filter(|t| t > lo && hi.is_none_or(|h| t < h))
            .collect();
        cuts.sort();
        cuts.dedup();
        if let Some(h) = hi {
            cuts.push(h.clone());
        }
        let mut left = lo.clone();
        let mut at_left = pending_delay(pending, &left);
        for right in cuts {
            let at_right = pending_delay(pending, &right);
            if &at_right >= rho {
                let frac = (rho - &at_left) / (&at_right - &at_left);
                return Some(&left + frac * (&right - &left));
            }
            left = right;
            at_left = at_right;
        }
        if hi.is_some() {
            return None;
        }
        // Final ray: only linear delays keep growing.
        let slope: Q = pending
            .iter()
            .filter_map(|(d, _)| match d {
                DelayFunction::Linear(r) => Some(r.clone()),
                _ => None,
            })
            .sum();
        if slope.is_positive() {
            Some(&left + (rho - &at_left) / slope)
        } else {
            None
        }
    }
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn from_q(x: &Q) -> Self {
        to_f64(x)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn delay(d: &DelayFunction, t: &Self) -> Self {
        d.eval_f64(*t)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn exact(&self) -> Option<Q> {
        None
    }

    fn crossing(pending: &[(&DelayFunction, Self)], lo: &Self, hi: Option<&Self>, rho: &Self) -> Option<Self> {
        let f = |t: f64| pending_delay(pending, &t);
        let lo = *lo;
        let hi = match hi {
            Some(&h) => {
                if f(h) < *rho {
                    return None;
                }
                h
            }
            None => {
                if pending.iter().all(|(d, _)| d.is_bounded()) {
                    let sup: f64 = pending.iter().filter_map(|(d, _)| d.limit()).map(|v| to_f64(&v)).sum();
                    if sup < *rho {
                        return None;
                    }
                }
                let mut width = 1.0f64;
                while f(lo + width) < *rho {
                    width *= 2.0;
                    if !width.is_finite() {
                        return None;
                    }
                }
                lo + width
            }
        };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..400 {
            let at_b = f(b);
            if at_b - rho <= CROSSING_TOLERANCE * rho || b - a <= f64::EPSILON * b.abs().max(1.0) {
                break;
            }
            let mid = a + (b - a) / 2.0;
            if mid <= a || mid >= b {
                break;
            }
            if f(mid) >= *rho {
                b = mid;
            } else {
                a = mid;
            }
        }
        Some(b)
    }
}

fn check_order(items: &[TimedItem]) -> Result<()> {
    for (pos, w) in items.windows(2).enumerate() {
        if w[1].arrival < w[0].arrival {
            return Err(Error::Simulation(format!(
                "item {} arrives before item {}; items must be in arrival order",
                pos + 1,
                pos
            )));
        }
    }
    if let Some(it) = items.iter().find(|it| it.arrival.is_negative()) {
        return Err(Error::Simulation(format!(
            "item {} has a negative arrival time",
            it.item.index
        )));
    }
    for it in items {
        it.delay.validate()?;
    }
    Ok(())
}

/// Runs the phase algorithm. `horizon` is used only when the remaining items
/// have bounded delays that never reach `rho`; it must not precede the last
/// arrival.
pub fn simulate(items: &[TimedItem], rho: f64, horizon: Option<&Q>) -> Result<SimulationTrace> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    check_order(items)?;
    if let (Some(h), Some(last)) = (horizon, items.last()) {
        if h < &last.arrival {
            return Err(Error::Simulation(format!(
                "horizon {} precedes the last arrival {}",
                fmt_q(h),
                fmt_q(&last.arrival)
            )));
        }
    }
    let rho_exact = Q::from_float(rho).expect("finite rho");
    if all_exact(items) {
        run::<Q>(items, rho, rho_exact, horizon)
    } else {
        run::<f64>(items, rho, rho_exact, horizon)
    }
}

fn run<S: Scalar>(items: &[TimedItem], rho: f64, rho_exact: Q, horizon: Option<&Q>) -> Result<SimulationTrace> {
    let rho_s = S::from_q(&rho_exact);
    let arrivals: Vec<S> = items.iter().map(|it| S::from_q(&it.arrival)).collect();
    let mut phases = Vec::new();
    let mut total = S::nil();
    let mut start = 0;
    while start < items.len() {
        // Grow the pending set event by event until the delay reaches rho.
        let mut end = start + 1;
        while end < items.len() && arrivals[end] == arrivals[start] {
            end += 1;
        }
        let (trigger, flushed) = loop {
            let pending: Vec<(&DelayFunction, S)> =
                (start..end).map(|i| (&items[i].delay, arrivals[i].clone())).collect();
            let lo = arrivals[end - 1].clone();
            let hi = arrivals.get(end);
            if let Some(t) = S::crossing(&pending, &lo, hi, &rho_s) {
                break (t, false);
            }
            if end == items.len() {
                let h = horizon.ok_or_else(|| {
                    Error::Simulation("pending delay stays below rho after the last arrival; supply a horizon".into())
                })?;
                break (S::from_q(h), true);
            }
            let t = arrivals[end].clone();
            while end < items.len() && arrivals[end] == t {
                end += 1;
            }
        };
        // Items arriving exactly at the trigger belong to the next phase.
        let mut stop = end;
        if !flushed {
            while stop > start + 1 && arrivals[stop - 1] >= trigger {
                stop -= 1;
            }
        }
        let pending: Vec<(&DelayFunction, S)> = (start..stop).map(|i| (&items[i].delay, arrivals[i].clone())).collect();
        let accumulated = pending_delay(&pending, &trigger);
        let batch: Vec<Item> = (start..stop).map(|i| items[i].item.clone()).collect();
        let bins = ffd(&batch).bin_count;
        total = total.plus(&accumulated).plus(&S::from_q(&Q::from_integer(bins.into())));
        phases.push(Phase {
            items: (start..stop).collect(),
            trigger_time: trigger.to_f64(),
            accumulated_delay: accumulated.to_f64(),
            bins,
            flushed,
            exact: trigger.exact().zip(accumulated.exact()),
        });
        start = stop;
    }
    Ok(SimulationTrace {
        rho,
        rho_exact,
        phases,
        total_cost: total.to_f64(),
        total_cost_exact: total.exact(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OfflineSolution {
    /// Positions into the input slice; each bin sorted, bins ordered by their
    /// first position.
    pub partition: Vec<Vec<usize>>,
    pub bin_count: usize,
    pub total_delay: f64,
    pub cost: f64,
    /// Exact delay and cost when no power delays occur.
    pub exact: Option<(Q, Q)>,
}

#[derive(Clone, Debug)]
enum Cost {
    Exact(Q),
    Float(f64),
}

impl Cost {
    fn add(&self, o: &Cost) -> Cost {
        match (self, o) {
            (Cost::Exact(a), Cost::Exact(b)) => Cost::Exact(a + b),
            (a, b) => Cost::Float(a.f64() + b.f64()),
        }
    }

    fn f64(&self) -> f64 {
        match self {
            Cost::Exact(q) => to_f64(q),
            Cost::Float(x) => *x,
        }
    }

    fn cmp(&self, o: &Cost) -> Ordering {
        match (self, o) {
            (Cost::Exact(a), Cost::Exact(b)) => a.cmp(b),
            (a, b) => a.f64().total_cmp(&b.f64()),
        }
    }
}

#[derive(Clone, Debug)]
struct Best {
    delay: Cost,
    bins: usize,
    partition: Vec<Vec<usize>>,
}

impl Best {
    fn cost(&self) -> Cost {
        self.delay.add(&Cost::Exact(Q::from_integer(self.bins.into())))
    }

    fn better_than(&self, o: &Best) -> bool {
        self.cost()
            .cmp(&o.cost())
            .then(self.bins.cmp(&o.bins))
            .then_with(|| self.partition.cmp(&o.partition))
            == Ordering::Less
    }
}

/// Minimum of bins plus delay over all feasible partitions, each bin closing
/// at its last arrival. Ties go to fewer bins, then the lexicographically
/// smallest partition.
pub fn offline_optimal(items: &[TimedItem], limit: usize) -> Result<OfflineSolution> {
    let n = items.len();
    if n > limit {
        return Err(Error::TooLarge(format!("{n} items exceed the offline limit {limit}")));
    }
    if n > 20 {
        return Err(Error::TooLarge(format!("{n} items exceed the hard offline limit 20")));
    }
    for it in items {
        it.delay.validate()?;
    }
    let exact = all_exact(items);
    let full = (1usize << n) - 1;

    // Per-subset bin delay, or None when infeasible.
    let mut bin_delay: Vec<Option<Cost>> = vec![None; full + 1];
    for (mask, slot) in bin_delay.iter_mut().enumerate().skip(1) {
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let load: Q = members.iter().map(|&i| items[i].item.size.value().clone()).sum();
        if load > Q::one() {
            continue;
        }
        let close = members.iter().map(|&i| &items[i].arrival).max().expect("non-empty");
        *slot = Some(if exact {
            Cost::Exact(
                members
                    .iter()
                    .map(|&i| items[i].delay.eval_q(&(close - &items[i].arrival)).expect("exact"))
                    .sum(),
            )
        } else {
            let close = to_f64(close);
            Cost::Float(
                members
                    .iter()
                    .map(|&i| items[i].delay.eval_f64(close - to_f64(&items[i].arrival)))
                    .sum(),
            )
        });
    }

    // best[mask]: optimum over the items in mask; the bin holding the lowest
    // position is chosen first, so partitions come out in canonical order.
    let mut best: Vec<Option<Best>> = vec![None; full + 1];
    best[0] = Some(Best {
        delay: Cost::Exact(Q::zero()),
        bins: 0,
        partition: Vec::new(),
    });
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        let mut winner: Option<Best> = None;
        loop {
            let bin = sub | low;
            if let (Some(d), Some(tail)) = (&bin_delay[bin], &best[mask ^ bin]) {
                let members: Vec<usize> = (0..n).filter(|i| bin >> i & 1 == 1).collect();
                let mut partition = Vec::with_capacity(tail.partition.len() + 1);
                partition.push(members);
                partition.extend(tail.partition.iter().cloned());
                let cand = Best {
                    delay: d.add(&tail.delay),
                    bins: tail.bins + 1,
                    partition,
                };
                if winner.as_ref().is_none_or(|w| cand.better_than(w)) {
                    winner = Some(cand);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask] = winner;
    }
    let b = best[full].take().expect("singletons are always feasible");
    let cost = b.cost();
    Ok(OfflineSolution {
        bin_count: b.bins,
        total_delay: b.delay.f64(),
        cost: cost.f64(),
        exact: match (&b.delay, &cost) {
            (Cost::Exact(d), Cost::Exact(c)) => Some((d.clone(), c.clone())),
            _ => None,
        },
        partition: b.partition,
    })
}

/// Offline cost of a given partition under the close-at-last-arrival rule.
pub fn partition_cost(items: &[TimedItem], partition: &[Vec<usize>]) -> Result<f64> {
    let mut cost = 0.0;
    for bin in partition {
        let load: Q = bin.iter().map(|&i| items[i].item.size.value().clone()).sum();
        if load > Q::one() {
            return Err(Error::InfeasibleBin(format!("bin {bin:?} has load {}", fmt_q(&load))));
        }
        let close = bin.iter().map(|&i| to_f64(&items[i].arrival)).fold(f64::MIN, f64::max);
        cost += 1.0
            + bin
                .iter()
                .map(|&i| items[i].delay.eval_f64(close - to_f64(&items[i].arrival)))
                .sum::<f64>();
    }
    Ok(cost)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub alg: f64,
    /// `(1 + 1/rho) D + (1 + rho + pi_hat) B`.
    pub split_bound: f64,
    /// `max(1 + 1/rho, 1 + rho + pi_hat) (B + D)`.
    pub ratio_bound: f64,
    pub ratio: f64,
    pub split_holds: bool,
    pub ratio_holds: bool,
    pub exact: bool,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.split_holds && self.ratio_holds
    }
}

/// Checks the competitive bound for one instance. `pi_hat` is a certified
/// upper bound on the sequence sum, so the check is conservative. Exact runs
/// compare rationals; float runs allow [`FLOAT_BOUND_TOLERANCE`].
pub fn check_bound(trace: &SimulationTrace, off: &OfflineSolution, pi_terms: usize) -> BoundCheck {
    let pi_hat = pi_sequence(pi_terms).upper_rounded;
    let b = Q::from_integer(off.bin_count.into());
    let rho = &trace.rho_exact;
    let one = Q::one();
    let a_coef = &one + one.clone() / rho;
    let b_coef = &one + rho + &pi_hat;
    let ratio_q = a_coef.clone().max(b_coef.clone());
    match (&trace.total_cost_exact, &off.exact) {
        (Some(alg), Some((d, _))) => {
            let split = &a_coef * d + &b_coef * &b;
            let ratio = &ratio_q * (d + &b);
            BoundCheck {
                alg: to_f64(alg),
                split_bound: to_f64(&split),
                ratio_bound: to_f64(&ratio),
                ratio: to_f64(&ratio_q),
                split_holds: alg <= &split,
                ratio_holds: alg <= &ratio,
                exact: true,
            }
        }
        _ => {
            let d = off.total_delay;
            let bf = off.bin_count as f64;
            let split = to_f64(&a_coef) * d + to_f64(&b_coef) * bf;
            let ratio = to_f64(&ratio_q) * (d + bf);
            BoundCheck {
                alg: trace.total_cost,
                split_bound: split,
                ratio_bound: ratio,
                ratio: to_f64(&ratio_q),
                split_holds: trace.total_cost <= split + FLOAT_BOUND_TOLERANCE,
                ratio_holds: trace.total_cost <= ratio + FLOAT_BOUND_TOLERANCE,
                exact: false,
            }
        }
    }
}

/// Random timed instance: up to `max_items` items with sizes on the grid
/// `1/20`, arrivals on the grid `1/4` in `[0, 3]` and linear rates in
/// `{1/4, ..., 2}`.
pub fn random_timed_instance<R: Rng>(rng: &mut R, max_items: usize) -> Vec<TimedItem> {
    let n = rng.gen_range(1..=max_items.max(1));
    let mut arrivals: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=12)).collect();
    arrivals.sort_unstable();
    arrivals
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            let size = Size::ratio(rng.gen_range(1..=20), 20);
            let rate = q(rng.gen_range(1..=8), 4);
            TimedItem::new(i, size, q(a, 4), DelayFunction::Linear(rate))
        })
        .collect()
}

/// Zero-size items with identity delays at the given arrival times.
pub fn tcp_ack_instance(arrivals: &[Q]) -> Vec<TimedItem> {
    arrivals
        .iter()
        .enumerate()
        .map(|(i, a)| TimedItem::new(i, Size::zero(), a.clone(), DelayFunction::Linear(Q::one())))
        .collect()
}

/// Exact-value sanity helper for traces: every non-flushed phase delay
/// equals `rho` on exact runs.
pub fn phase_delay_errors(trace: &SimulationTrace) -> Vec<String> {
    let mut out = Vec::new();
    for (i, p) in trace.phases.iter().enumerate().filter(|(_, p)| !p.flushed) {
        match &p.exact {
            Some((_, d)) if d != &trace.rho_exact => out.push(format!("phase {i}: delay {} != rho", fmt_q(d))),
            None if (p.accumulated_delay - trace.rho).abs() > CROSSING_TOLERANCE * trace.rho * 4.0 => {
                out.push(format!("phase {i}: delay {} far from rho", p.accumulated_delay))
            }
            _ => {}
        }
    }
    out
}

/// Total cost re-derived from phases, as a float.
pub fn recompute_cost(trace: &SimulationTrace) -> f64 {
    trace.phases.iter().map(|p| p.accumulated_delay + p.bins as f64).sum()
}

pub fn exact_rho(rho: f64) -> Q {
    Q::from_float(rho).unwrap_or_else(Q::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size::qi;

    fn lin(i: usize, size: Size, arrive: Q, rate: i64) -> TimedItem {
        TimedItem::new(i, size, arrive, DelayFunction::Linear(qi(rate)))
    }

    #[test]
    fn rho_values() {
        let (rho, bound) = compute_rho(30).unwrap();
        assert!((rho - 0.4640251938).abs() < 1e-9);
        assert!((bound - 3.1550554008).abs() < 1e-9);
        let (golden, _) = rho_for(1.0);
        assert!((golden - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let (r6, _) = compute_rho(6).unwrap();
        assert!((r6 - 0.4640251938).abs() < 1e-9);
    }

    #[test]
    fn single_item_costs_rho_plus_one() {
        let (rho, _) = compute_rho(30).unwrap();
        let items = vec![lin(0, Size::ratio(1, 2), qi(0), 1)];
        let t = simulate(&items, rho, None).unwrap();
        assert_eq!(t.phase_count(), 1);
        let rq = exact_rho(rho);
        assert_eq!(t.total_cost_exact, Some(&rq + qi(1)));
        assert_eq!(t.phases[0].exact.as_ref().unwrap().0, rq);
    }

    #[test]
    fn two_items_trigger_at_half_rho() {
        let rho = 0.5;
        let items = vec![
            lin(0, Size::ratio(3, 10), qi(0), 1),
            lin(1, Size::ratio(3, 10), qi(0), 1),
        ];
        let t = simulate(&items, rho, None).unwrap();
        assert_eq!(t.phases.len(), 1);
        assert_eq!(t.phases[0].exact, Some((q(1, 4), q(1, 2))));
        assert_eq!(t.total_cost_exact, Some(q(3, 2)));
    }

    #[test]
    fn arrival_at_trigger_starts_next_phase() {
        let items = vec![lin(0, Size::ratio(1, 2), qi(0), 1), lin(1, Size::ratio(1, 2), qi(1), 1)];
        let t = simulate(&items, 1.0, None).unwrap();
        assert_eq!(t.phases.len(), 2);
        assert_eq!(t.phases[0].items, vec![0]);
        assert_eq!(t.phases[1].exact.as_ref().unwrap().0, qi(2));
        assert_eq!(t.total_cost_exact, Some(qi(4)));
    }

    #[test]
    fn later_arrivals_join_the_phase() {
        // Item 1 arrives before the crossing and raises the slope.
        let items = vec![
            lin(0, Size::ratio(1, 2), qi(0), 1),
            lin(1, Size::ratio(1, 2), q(1, 2), 1),
        ];
        let t = simulate(&items, 1.0, None).unwrap();
        assert_eq!(t.phases.len(), 1);
        assert_eq!(t.phases[0].exact.as_ref().unwrap().0, q(3, 4));
        assert_eq!(t.total_cost_exact, Some(qi(2)));
    }

    #[test]
    fn tcp_ack_shape() {
        let items = tcp_ack_instance(&[qi(0), qi(0), q(1, 10), qi(5)]);
        let t = simulate(&items, 0.5, None).unwrap();
        assert!(t.phases.iter().all(|p| p.bins == 1));
        assert_eq!(t.phases.len(), 2);
        assert!(phase_delay_errors(&t).is_empty());
    }

    #[test]
    fn bounded_delays_need_horizon() {
        let table = DelayFunction::Table(vec![(qi(1), q(1, 10))]);
        let items = vec![TimedItem::new(0, Size::ratio(1, 2), qi(0), table)];
        assert!(matches!(simulate(&items, 0.5, None), Err(Error::Simulation(_))));
        let t = simulate(&items, 0.5, Some(&qi(10))).unwrap();
        assert!(t.phases[0].flushed);
        assert_eq!(t.total_cost_exact, Some(q(11, 10)));
    }

    #[test]
    fn table_crossing_is_exact() {
        let table = DelayFunction::Table(vec![(qi(1), q(1, 10)), (qi(2), qi(1))]);
        let items = vec![TimedItem::new(0, Size::ratio(1, 2), qi(0), table)];
        let t = simulate(&items, 0.55, None).unwrap();
        let (trigger, delay) = t.phases[0].exact.clone().unwrap();
        assert_eq!(delay, exact_rho(0.55));
        assert!(trigger > qi(1) && trigger < qi(2));
    }

    #[test]
    fn power_delays_use_bisection() {
        let d = DelayFunction::Power {
            rate: qi(1),
            exponent: qi(2),
        };
        let items = vec![TimedItem::new(0, Size::ratio(1, 2), qi(0), d)];
        let t = simulate(&items, 0.25, None).unwrap();
        assert!(!t.is_exact());
        assert!((t.phases[0].trigger_time - 0.5).abs() < 1e-11);
        assert!(phase_delay_errors(&t).is_empty());
    }

    #[test]
    fn offline_examples() {
        let two = vec![lin(0, Size::ratio(2, 5), qi(0), 1), lin(1, Size::ratio(2, 5), qi(1), 1)];
        let off = offline_optimal(&two, 12).unwrap();
        assert_eq!(off.exact.as_ref().unwrap().1, qi(2));
        assert_eq!(off.partition, vec![vec![0, 1]]);

        let one = vec![lin(0, Size::ratio(1, 2), qi(3), 1)];
        let off = offline_optimal(&one, 12).unwrap();
        assert_eq!((off.bin_count, off.cost), (1, 1.0));

        let big = vec![lin(0, Size::ratio(3, 5), qi(0), 1), lin(1, Size::ratio(3, 5), qi(0), 1)];
        let off = offline_optimal(&big, 12).unwrap();
        assert_eq!(off.partition, vec![vec![0], vec![1]]);
        assert!(offline_optimal(&big, 1).is_err());
    }

    #[test]
    fn bound_holds_for_single_item() {
        let (rho, _) = compute_rho(30).unwrap();
        let items = vec![lin(0, Size::ratio(1, 2), qi(0), 1)];
        let t = simulate(&items, rho, None).unwrap();
        let off = offline_optimal(&items, 12).unwrap();
        let c = check_bound(&t, &off, 30);
        assert!(c.holds() && c.exact);
        assert!((c.ratio - 3.1550554008).abs() < 1e-9);
    }

    #[test]
    fn delay_parse_round_trip() {
        for s in ["linear:3/2", "power:1/1,1/2", "table:1/1:1/10,2/1:1/1"] {
            let d: DelayFunction = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("table:1/1:1/2,1/2:1/1".parse::<DelayFunction>().is_err());
        assert!("linear:0".parse::<DelayFunction>().is_err());
    }
}
