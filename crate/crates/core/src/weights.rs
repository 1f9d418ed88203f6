//! Weight functions and the per-bin / per-cluster inequalities they satisfy.
//!
//! Three piecewise functions of the form `coefficient * x + bonus(x)` bound
//! the price of clustering (`w195`, `wk3`, `wk4`); the harmonic-type
//! function `v` bounds FFD per phase in the delay model. Every check here is
//! an exact rational comparison.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::packing::{exact_optimal, ffd, items_from_sizes, total_size, Item};
use crate::size::{fmt_q, q, qi, Size, Q};

/// Additive bonus on the interval `(lower, upper]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bonus {
    pub lower: Q,
    pub upper: Q,
    pub bonus: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Piecewise {
        coefficient: Q,
        bonuses: Vec<Bonus>,
    },
    /// `v(0) = 0`, `v(x) = 1` above 1/2, `x + 1/(j(j+1))` on `(1/(j+1), 1/j]`.
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    pub name: String,
    pub kind: WeightKind,
}

pub const BUILTIN_NAMES: [&str; 4] = ["w195", "wk3", "wk4", "v"];

/// Denominator shared by the `wk4` constants.
pub const WK4_DELTA: i64 = 77805;
/// Per-bin cap numerator for `wk4` over [`WK4_DELTA`].
pub const WK4_LAMBDA: i64 = 146312;

fn piecewise(name: &str, coefficient: Q, bonuses: &[(Q, Q, Q)]) -> WeightFunction {
    WeightFunction {
        name: name.to_string(),
        kind: WeightKind::Piecewise {
            coefficient,
            bonuses: bonuses
                .iter()
                .map(|(lower, upper, bonus)| Bonus {
                    lower: lower.clone(),
                    upper: upper.clone(),
                    bonus: bonus.clone(),
                })
                .collect(),
        },
    }
}

pub fn make_builtin(name: &str) -> Result<WeightFunction> {
    let one = qi(1);
    let half = q(1, 2);
    let third = q(1, 3);
    let quarter = q(1, 4);
    let sixth = q(1, 6);
    Ok(match name {
        "w195" => piecewise("w195", q(9, 5), &[(half, one, q(3, 20))]),
        "wk3" => piecewise(
            "wk3",
            q(21, 13),
            &[
                (half.clone(), one, q(997, 3900)),
                (third.clone(), half, q(64, 975)),
                (quarter.clone(), third, q(18, 325)),
                (sixth, quarter, q(2, 195)),
            ],
        ),
        "wk4" => piecewise(
            "wk4",
            q(28, 19),
            &[
                (half.clone(), one, q(25124, WK4_DELTA)),
                (third.clone(), half, q(6528, WK4_DELTA)),
                (quarter.clone(), third, q(5520, WK4_DELTA)),
                (sixth, quarter, q(1008, WK4_DELTA)),
            ],
        ),
        "v" => WeightFunction {
            name: "v".to_string(),
            kind: WeightKind::Harmonic,
        },
        other => return Err(Error::UnknownFunction(other.to_string())),
    })
}

/// Per-bin weight cap the function is claimed to respect.
pub fn builtin_cap(f: &WeightFunction) -> Result<Q> {
    Ok(match f.name.as_str() {
        "w195" => q(39, 20),
        "wk3" => q(581, 300),
        "wk4" => q(WK4_LAMBDA, WK4_DELTA),
        "v" => pi_sequence(30).upper_rounded,
        other => return Err(Error::UnknownFunction(other.to_string())),
    })
}

impl WeightFunction {
    pub fn eval(&self, x: &Size) -> Q {
        let x = x.value();
        match &self.kind {
            WeightKind::Piecewise { coefficient, bonuses } => {
                let bonus = bonuses
                    .iter()
                    .find(|b| x > &b.lower && x <= &b.upper)
                    .map_or_else(Q::zero, |b| b.bonus.clone());
                coefficient * x + bonus
            }
            WeightKind::Harmonic => {
                if x.is_zero() {
                    Q::zero()
                } else if x > &q(1, 2) {
                    Q::one()
                } else {
                    let j = harmonic_index(x);
                    x + Q::new(1.into(), &j * (&j + 1u32))
                }
            }
        }
    }

    pub fn total(&self, sizes: &[Size]) -> Q {
        sizes.iter().fold(Q::zero(), |acc, s| acc + self.eval(s))
    }

    /// Points where the bonus (or harmonic piece) changes, within `[0, 1]`.
    pub fn breakpoints(&self) -> Vec<Q> {
        match &self.kind {
            WeightKind::Piecewise { bonuses, .. } => {
                let mut pts: Vec<Q> = bonuses
                    .iter()
                    .flat_map(|b| [b.lower.clone(), b.upper.clone()])
                    .collect();
                pts.sort();
                pts.dedup();
                pts
            }
            WeightKind::Harmonic => (1..=64).map(|j| q(1, j)).collect(),
        }
    }
}

/// The `j` with `x` in `(1/(j+1), 1/j]`, for `0 < x <= 1`.
fn harmonic_index(x: &Q) -> num_bigint::BigInt {
    (Q::one() / x).floor().to_integer()
}

pub fn eval_weight(f: &WeightFunction, x: &Q) -> Result<Q> {
    let size = Size::new(x.clone()).map_err(|e| Error::InvalidArgument(format!("weight argument: {e}")))?;
    Ok(f.eval(&size))
}

/// Terms beyond this are too large to hold exactly (the bit length doubles
/// with each term).
pub const EXACT_TERMS: usize = 16;

/// Prefix of the sequence `c_1 = 1, c_i = c_{i-1}(c_{i-1} + 1)` and bounds on
/// `pi_inf = sum 1/c_i`.
#[derive(Clone, Debug)]
pub struct HarmonicSequence {
    pub n: usize,
    /// `c_1 ..= c_min(n, EXACT_TERMS)`.
    pub terms: Vec<BigUint>,
    /// Exact `sum_{i<=n} 1/c_i` when `n <= EXACT_TERMS`.
    pub partial_sum: Option<Q>,
    /// Exact partial sum over the stored terms; a lower bound for the sum
    /// over `n` terms.
    pub partial_lower: Q,
    /// `2 / c_{m+1}` with `m` the number of stored terms. Since
    /// `c_{i+1} >= 2 c_i`, the tail after `m` is below this.
    pub tail_bound: Q,
    /// [`HarmonicSequence::upper`] rounded up to [`BOUND_DIGITS`] decimals:
    /// still a certified upper bound, but cheap to compute with.
    pub upper_rounded: Q,
}

/// Decimal digits kept by [`HarmonicSequence::upper_rounded`].
pub const BOUND_DIGITS: u32 = 40;

impl HarmonicSequence {
    /// Certified strict upper bound on `pi_inf` (and on every partial sum).
    pub fn upper(&self) -> Q {
        &self.partial_lower + &self.tail_bound
    }

    pub fn partial_f64(&self) -> f64 {
        self.partial_lower.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn c_terms(n: usize) -> Vec<BigUint> {
    let mut terms = Vec::with_capacity(n);
    let mut c = BigUint::one();
    for _ in 0..n {
        terms.push(c.clone());
        c = &c * (&c + 1u32);
    }
    terms
}

pub fn pi_sequence(n: usize) -> HarmonicSequence {
    static SATURATED: OnceLock<HarmonicSequence> = OnceLock::new();
    let n = n.max(1);
    if n >= EXACT_TERMS {
        let base = SATURATED.get_or_init(|| build_pi_sequence(EXACT_TERMS));
        return HarmonicSequence {
            n,
            partial_sum: (n == EXACT_TERMS).then(|| base.partial_lower.clone()),
            ..base.clone()
        };
    }
    build_pi_sequence(n)
}

fn build_pi_sequence(n: usize) -> HarmonicSequence {
    let m = n.min(EXACT_TERMS);
    let mut all = c_terms(m + 1);
    let next = all.pop().expect("m + 1 >= 2 terms");
    // Every term divides the last, so the sum has denominator c_m.
    let last = all.last().expect("m >= 1").clone();
    let numer: BigUint = all.iter().map(|c| &last / c).sum();
    let partial = Q::new(numer.into(), last.into());
    let tail_bound = Q::new(2.into(), next.into());
    let scale = Q::from_integer(Pow::pow(BigInt::from(10u32), BOUND_DIGITS));
    let upper_rounded = ((&partial + &tail_bound) * &scale).ceil() / scale;
    HarmonicSequence {
        n,
        terms: all,
        partial_sum: (n <= EXACT_TERMS).then(|| partial.clone()),
        partial_lower: partial,
        tail_bound,
        upper_rounded,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapViolation {
    pub bin: Vec<Size>,
    pub weight: Q,
    pub cap: Q,
}

/// Every supplied bin whose total weight exceeds `cap`. Bins with total size
/// above 1 are rejected.
pub fn bin_weight_cap_check<I>(f: &WeightFunction, cap: &Q, bins: I) -> Result<Vec<CapViolation>>
where
    I: IntoIterator<Item = Vec<Size>>,
{
    let mut out = Vec::new();
    for bin in bins {
        let load = total_size(&bin);
        if load > Q::one() {
            return Err(Error::InfeasibleBin(format!("total size {} exceeds 1", fmt_q(&load))));
        }
        let weight = f.total(&bin);
        if &weight > cap {
            out.push(CapViolation {
                bin,
                weight,
                cap: cap.clone(),
            });
        }
    }
    Ok(out)
}

/// All multisets of at most `max_items` sizes `j/den` with `j/den > above`
/// and total at most 1, in lexicographic order of non-decreasing `j`.
pub struct GridBins {
    den: i64,
    lo: i64,
    max_items: usize,
    stack: Vec<i64>,
    started: bool,
}

pub fn grid_bins(den: i64, max_items: usize, above: &Q) -> GridBins {
    let lo = (above * Q::from_integer(den.into())).floor().to_integer();
    let lo = lo.to_i64().unwrap_or(0) + 1;
    GridBins {
        den,
        lo: lo.max(1),
        max_items,
        stack: Vec::new(),
        started: false,
    }
}

impl GridBins {
    fn stack_total(&self) -> i64 {
        self.stack.iter().sum()
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            if self.max_items == 0 || self.lo > self.den {
                return false;
            }
            self.stack.push(self.lo);
            return true;
        }
        // Extend with the smallest admissible next element.
        if self.stack.len() < self.max_items {
            let last = *self.stack.last().unwrap();
            if self.stack_total() + last <= self.den {
                self.stack.push(last);
                return true;
            }
        }
        // Otherwise bump the deepest element that can grow.
        while let Some(top) = self.stack.pop() {
            let next = top + 1;
            if self.stack_total() + next <= self.den {
                self.stack.push(next);
                return true;
            }
        }
        false
    }
}

impl Iterator for GridBins {
    type Item = Vec<Size>;

    fn next(&mut self) -> Option<Vec<Size>> {
        if !self.advance() {
            return None;
        }
        Some(
            self.stack
                .iter()
                .map(|&j| Size::new(Q::new(j.into(), self.den.into())).unwrap())
                .collect(),
        )
    }
}

const BREAKPOINTS: [i64; 8] = [2, 3, 4, 5, 6, 7, 43, 1807];

/// A size just above or below a reciprocal `1/t`, the regime where the
/// weight functions are tight.
fn near_breakpoint<R: Rng>(rng: &mut R) -> Q {
    let t = BREAKPOINTS[rng.gen_range(0..BREAKPOINTS.len())];
    let scale = [100i64, 10_000, 1_000_000][rng.gen_range(0..3)];
    let offset = q(rng.gen_range(0..=40), scale * t);
    if rng.gen_bool(0.5) {
        q(1, t) + offset
    } else {
        q(1, t) - offset
    }
}

fn clamp_unit(x: Q) -> Option<Size> {
    if x <= Q::zero() {
        None
    } else {
        Size::new(x.min(Q::one())).ok()
    }
}

/// A random feasible bin: items drawn near breakpoints, uniformly on a grid,
/// or filling the remaining space, until the bin is full or an attempt fails.
pub fn random_bin<R: Rng>(rng: &mut R) -> Vec<Size> {
    let mut bin = Vec::new();
    let mut load = Q::zero();
    let max_items = rng.gen_range(1..=20);
    let mut misses = 0;
    while bin.len() < max_items && misses < 3 {
        let room = Q::one() - &load;
        if room.is_zero() {
            break;
        }
        let candidate = match rng.gen_range(0..10) {
            0..=3 => near_breakpoint(rng),
            4..=7 => {
                let den = [12i64, 60, 420, 997, 3900][rng.gen_range(0..5)];
                q(rng.gen_range(1..=den), den)
            }
            8 => room.clone(),
            _ => room.clone() - q(rng.gen_range(1..=20), 100_000),
        };
        match clamp_unit(candidate) {
            Some(s) if s.value() <= &room => {
                load += s.value();
                bin.push(s);
            }
            _ => misses += 1,
        }
    }
    bin
}

/// A random cluster of up to `max_items` items biased toward families of
/// similar sizes around a common reciprocal, as in the worst-case clusters.
pub fn random_cluster<R: Rng>(rng: &mut R, max_items: usize) -> Vec<Size> {
    let n = rng.gen_range(3..=max_items.max(3));
    let mode = rng.gen_range(0..4);
    let center = BREAKPOINTS[rng.gen_range(0..6)];
    (0..n)
        .filter_map(|_| match mode {
            0 => {
                let den = [12i64, 60, 420][rng.gen_range(0..3)];
                clamp_unit(q(rng.gen_range(1..=den), den))
            }
            1 => clamp_unit(near_breakpoint(rng)),
            _ => {
                let eps = q(rng.gen_range(0..=30), 1000 * center);
                let x = if rng.gen_bool(0.5) {
                    q(1, center) + eps
                } else {
                    q(1, center) - eps
                };
                clamp_unit(x)
            }
        })
        .collect()
}

/// A random multiset of at most `max_items` sizes on a grid; includes zero
/// sizes occasionally.
pub fn random_multiset<R: Rng>(rng: &mut R, max_items: usize) -> Vec<Size> {
    let n = rng.gen_range(0..=max_items);
    let den = [2i64, 6, 12, 30, 60, 420, 1000][rng.gen_range(0..7)];
    (0..n)
        .map(|_| {
            let j = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=den) };
            Size::new(q(j, den)).unwrap()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dominance {
    Holds {
        weight: Q,
        ffd_bins: usize,
        opt: u64,
    },
    Violated {
        weight: Q,
        ffd_bins: usize,
        opt: u64,
    },
    /// The cluster's optimum is below the required `k`.
    PreconditionFailed {
        opt: u64,
    },
}

/// Compares a cluster's total weight with its FFD bin count, provided the
/// cluster's exact optimum is at least `k`.
pub fn cluster_weight_dominates_ffd(
    f: &WeightFunction,
    cluster: &[Item],
    k: u64,
    item_limit: usize,
) -> Result<Dominance> {
    let opt = exact_optimal(cluster, item_limit)?.bins;
    if opt < k {
        return Ok(Dominance::PreconditionFailed { opt });
    }
    let sizes: Vec<Size> = cluster.iter().map(|i| i.size.clone()).collect();
    let weight = f.total(&sizes);
    let ffd_bins = ffd(cluster).bin_count;
    Ok(if weight >= qi(ffd_bins as i64) {
        Dominance::Holds { weight, ffd_bins, opt }
    } else {
        Dominance::Violated { weight, ffd_bins, opt }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FfdVCheck {
    pub holds: bool,
    pub ffd_bins: usize,
    pub v_total: Q,
}

/// `FFD(J) <= V(J) + 1` for the harmonic weight `v`.
pub fn ffd_v_bound_check(sizes: &[Size]) -> FfdVCheck {
    let v = make_builtin("v").expect("builtin");
    let ffd_bins = ffd(&items_from_sizes(sizes)).bin_count;
    let v_total = v.total(sizes);
    FfdVCheck {
        holds: qi(ffd_bins as i64) <= &v_total + Q::one(),
        ffd_bins,
        v_total,
    }
}

/// Points `b - 1/den`, `b`, `b + 1/den` around each breakpoint, plus every
/// grid point `j/den`, where the function decreases.
pub fn monotonicity_violations(f: &WeightFunction, den: i64) -> Vec<String> {
    let step = q(1, den);
    let mut points: Vec<Q> = (0..=den).map(|j| q(j, den)).collect();
    for b in f.breakpoints() {
        points.push(&b - &step);
        points.push(b.clone());
        points.push(&b + &step);
    }
    let mut points: Vec<Size> = points.into_iter().filter_map(|x| Size::new(x).ok()).collect();
    points.sort();
    points.dedup();
    points
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (f.eval(&w[0]), f.eval(&w[1]));
            (a > b).then(|| format!("{}: w({}) = {} > w({}) = {}", f.name, w[0], fmt_q(&a), w[1], fmt_q(&b)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::DEFAULT_ITEM_LIMIT;
    use crate::rng::trial_rng;
    use crate::size::cmp_q;
    use std::cmp::Ordering;

    fn s(a: i64, b: i64) -> Size {
        Size::ratio(a, b)
    }

    #[test]
    fn builtin_constants() {
        let wk3 = make_builtin("wk3").unwrap();
        match &wk3.kind {
            WeightKind::Piecewise { coefficient, bonuses } => {
                assert_eq!(coefficient, &q(21, 13));
                assert_eq!(bonuses[1].bonus, q(64, 975));
                assert_eq!(bonuses[1].lower, q(1, 3));
                assert_eq!(bonuses[1].upper, q(1, 2));
            }
            _ => panic!(),
        }
        let wk4 = make_builtin("wk4").unwrap();
        assert_eq!(wk4.eval(&s(1, 1)), q(28, 19) + q(25124, 77805));
        assert!(make_builtin("w9").is_err());
    }

    #[test]
    fn eval_examples() {
        let wk3 = make_builtin("wk3").unwrap();
        assert_eq!(wk3.eval(&s(3, 5)), q(4777, 3900));
        assert_eq!(wk3.eval(&s(1, 6)), q(7, 26));
        // Upper endpoints belong to their interval.
        assert_eq!(wk3.eval(&s(1, 3)), q(21, 39) + q(18, 325));
        assert_eq!(wk3.eval(&s(1, 1)), q(7297, 3900));

        let w195 = make_builtin("w195").unwrap();
        assert_eq!(w195.eval(&s(3, 5)), q(9, 5) * q(3, 5) + q(3, 20));
        assert_eq!(w195.eval(&s(1, 2)), q(9, 10));

        let v = make_builtin("v").unwrap();
        assert_eq!(v.eval(&s(3, 10)), q(23, 60));
        assert_eq!(v.eval(&Size::zero()), Q::zero());
        assert_eq!(v.eval(&s(3, 5)), Q::one());
        assert_eq!(v.eval(&s(1, 2)), q(2, 3));
        assert_eq!(v.eval(&s(1, 3)), q(1, 3) + q(1, 12));

        assert!(eval_weight(&v, &q(3, 2)).is_err());
        for f in BUILTIN_NAMES {
            assert_eq!(make_builtin(f).unwrap().eval(&Size::zero()), Q::zero());
        }
    }

    #[test]
    fn cap_examples() {
        let wk3 = make_builtin("wk3").unwrap();
        let tight = vec![s(51, 100), s(49, 100)];
        assert_eq!(wk3.total(&tight), q(581, 300));
        assert!(bin_weight_cap_check(&wk3, &q(581, 300), vec![tight])
            .unwrap()
            .is_empty());

        let w195 = make_builtin("w195").unwrap();
        assert_eq!(w195.total(&[s(1, 1)]), q(39, 20));
        assert!(bin_weight_cap_check(&w195, &q(39, 20), vec![vec![s(1, 1)]])
            .unwrap()
            .is_empty());
        assert!(bin_weight_cap_check(&w195, &Q::zero(), vec![vec![]])
            .unwrap()
            .is_empty());

        let over = bin_weight_cap_check(&w195, &q(1, 1), vec![vec![s(1, 1)]]).unwrap();
        assert_eq!(over.len(), 1);

        assert!(matches!(
            bin_weight_cap_check(&w195, &q(2, 1), vec![vec![s(3, 5), s(3, 5)]]),
            Err(Error::InfeasibleBin(_))
        ));
    }

    #[test]
    fn pi_examples() {
        let p5 = pi_sequence(5);
        let terms: Vec<u64> = p5.terms.iter().map(|c| c.to_u64().unwrap()).collect();
        assert_eq!(terms, vec![1, 2, 6, 42, 1806]);
        assert_eq!(p5.partial_sum.clone().unwrap(), q(509, 301));

        let p1 = pi_sequence(1);
        assert_eq!(p1.partial_sum.unwrap(), Q::one());

        let p6 = pi_sequence(6);
        assert_eq!(p6.terms[5], BigUint::from(3263442u64));
        assert!(p6.partial_sum.unwrap() < q(1691030207, 1_000_000_000));
    }

    #[test]
    fn pi_bounds_nest() {
        let mut prev_upper: Option<Q> = None;
        let mut prev_sum = Q::zero();
        for n in 1..=EXACT_TERMS {
            let p = pi_sequence(n);
            let sum = p.partial_sum.clone().unwrap();
            assert_eq!(cmp_q(&sum, &prev_sum), Ordering::Greater);
            assert_eq!(cmp_q(&p.upper(), &sum), Ordering::Greater);
            if let Some(u) = &prev_upper {
                assert_ne!(cmp_q(&p.upper(), u), Ordering::Greater);
            }
            prev_upper = Some(p.upper());
            prev_sum = sum;
        }
        let big = pi_sequence(30);
        assert!(big.partial_sum.is_none());
        assert_eq!(big.terms.len(), EXACT_TERMS);
        assert_eq!(big.upper(), pi_sequence(EXACT_TERMS).upper());
        let rounded = &big.upper_rounded;
        assert_ne!(cmp_q(rounded, &big.upper()), Ordering::Less);
        assert!(rounded - big.upper() <= q(1, 10i64.pow(18)) / Q::from_integer(BigInt::from(10u64.pow(18))));
    }

    #[test]
    fn dominance_examples() {
        let wk3 = make_builtin("wk3").unwrap();
        let c = items_from_sizes(&[s(51, 100), s(51, 100), s(49, 100)]);
        assert_eq!(
            cluster_weight_dominates_ffd(&wk3, &c, 3, DEFAULT_ITEM_LIMIT).unwrap(),
            Dominance::PreconditionFailed { opt: 2 }
        );

        // Three just above 1/3, two just below, with one above + two below > 1.
        let eps = q(1, 300);
        let big = Size::new(q(1, 3) + &eps).unwrap();
        let small = Size::new(q(1, 3) - &eps / qi(3)).unwrap();
        let c = items_from_sizes(&[big.clone(), big.clone(), big, small.clone(), small]);
        match cluster_weight_dominates_ffd(&wk3, &c, 3, DEFAULT_ITEM_LIMIT).unwrap() {
            Dominance::Holds { opt, ffd_bins, weight } => {
                assert_eq!(opt, 3);
                assert_eq!(ffd_bins, 3);
                assert!(weight >= qi(3));
            }
            other => panic!("{other:?}"),
        }

        let c = items_from_sizes(&[s(1, 1), s(1, 1), s(1, 1)]);
        match cluster_weight_dominates_ffd(&wk3, &c, 3, DEFAULT_ITEM_LIMIT).unwrap() {
            Dominance::Holds { weight, .. } => assert_eq!(weight, qi(3) * q(7297, 3900)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ffd_v_examples() {
        let zero = ffd_v_bound_check(&[Size::zero(), Size::zero()]);
        assert!(zero.holds);
        assert_eq!((zero.ffd_bins, zero.v_total.clone()), (1, Q::zero()));
        assert!(ffd_v_bound_check(&[]).holds);
        let two = ffd_v_bound_check(&[s(3, 5), s(3, 5)]);
        assert!(two.holds);
        assert_eq!((two.ffd_bins, two.v_total), (2, qi(2)));
    }

    #[test]
    fn grid_enumeration_matches_brute_force() {
        let above = q(1, 4);
        let fast: Vec<Vec<Size>> = grid_bins(24, 3, &above).collect();
        let mut brute = Vec::new();
        for a in 7..=24 {
            brute.push(vec![a]);
            for b in a..=24 {
                if a + b <= 24 {
                    brute.push(vec![a, b]);
                }
                for c in b..=24 {
                    if a + b + c <= 24 {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        brute.sort();
        let mut fast_j: Vec<Vec<i64>> = fast
            .iter()
            .map(|bin| {
                bin.iter()
                    .map(|x| (x.value() * qi(24)).to_integer().to_i64().unwrap())
                    .collect()
            })
            .collect();
        fast_j.sort();
        assert_eq!(fast_j, brute);
    }

    #[test]
    fn random_sources_are_feasible() {
        for t in 0..200 {
            let mut rng = trial_rng(11, t);
            let bin = random_bin(&mut rng);
            assert!(total_size(&bin) <= Q::one());
        }
    }

    #[test]
    fn builtins_are_monotone() {
        for name in BUILTIN_NAMES {
            let f = make_builtin(name).unwrap();
            assert!(monotonicity_violations(&f, 420).is_empty(), "{name}");
        }
    }
}
