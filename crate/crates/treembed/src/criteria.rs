//! Divergence criteria: witness-producing checks that a statistic set can
//! tell two sentences apart near their divergence point.
//!
//! Each checker takes a pair of distinct sentences, decomposes them at their
//! divergence point into a shared prefix of `p` words and tails of `m` and
//! `n` words, and searches an offset window `j = 1, 2, …` past the shared
//! prefix for a statistic that separates the two truncations at `p + j`
//! words. The checkers differ in which statistics they accept and in the
//! side conditions the offset must satisfy; a successful check returns the
//! witness (offset, statistic, the two separating values, and any certified
//! side conditions), and a failed check returns `None`. Errors are reserved
//! for violated preconditions.
//!
//! Witness searches scan offsets in increasing order and statistics in
//! declaration order, so a returned witness is the least one. Each criterion
//! is monotone in its statistic set: adding statistics can only turn `None`
//! into a witness, never the reverse.

use thiserror::Error;

use crate::stats::{FiniteStatistic, LinearStatistic, StatValue};
use crate::words::{awl_or_zero, split_at_divergence, Sentence, Tok, Word};
use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CriterionError {
    #[error("the two sentences must be distinct")]
    EqualSentences,
    #[error("the discount δ must lie in [0, 1)")]
    BadDiscount,
    #[error("the offset allowance J must be at least 1")]
    BadAllowance,
    #[error("the length fraction ε must be positive")]
    BadFraction,
    #[error("both sentences must diverge strictly before their ends")]
    NoProperTails,
}

/// Which separating evaluation a witness carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparatingValues {
    Finite { left: StatValue, right: StatValue },
    Linear { left: Word<Tok>, right: Word<Tok> },
}

/// Which long-or-different condition a pivot pair of words satisfied, in the
/// order the disjuncts are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotCondition {
    LongLeft,
    LongRight,
    WordsDiffer,
}

/// Side conditions certified by a tail-controlled witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessDetail {
    /// Finite-statistic criteria certify nothing beyond the separation.
    Finite,
    /// Tail weights on both sides, plus the pivot condition that held.
    TailControlled {
        tail_awl_left: Rat,
        tail_awl_right: Rat,
        pivot: PivotCondition,
    },
    /// Tail weights plus the offsets at which separation was required and
    /// achieved, innermost first, each with the statistic that separated.
    Cascade {
        tail_awl_left: Rat,
        tail_awl_right: Rat,
        separated_offsets: Vec<(u64, String)>,
    },
}

/// A successful criterion check: the least offset and statistic separating
/// the two sentences' truncations, with the two differing values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionWitness {
    /// Offset past the shared prefix, 1-based: the truncations compared have
    /// `p + j` words.
    pub j: u64,
    pub stat_id: String,
    pub values: SeparatingValues,
    pub detail: WitnessDetail,
}

struct Divergence<'a> {
    a: &'a Sentence<Tok>,
    b: &'a Sentence<Tok>,
    p: u64,
    m: u64,
    n: u64,
}

fn diverge<'a>(
    a: &'a Sentence<Tok>,
    b: &'a Sentence<Tok>,
) -> Result<Divergence<'a>, CriterionError> {
    if a == b {
        return Err(CriterionError::EqualSentences);
    }
    let d = split_at_divergence(a, b);
    Ok(Divergence { a, b, p: d.p as u64, m: d.m as u64, n: d.n as u64 })
}

impl Divergence<'_> {
    fn min_tail(&self) -> u64 {
        self.m.min(self.n)
    }

    /// Largest admissible offset: `floor(δ·min(m,n)) + J`, but never past the
    /// shorter sentence.
    fn j_max(&self, delta: Rat, j_allow: u64) -> u64 {
        let discounted = (delta * Rat::from_integer(self.min_tail())).to_integer();
        (discounted + j_allow).min(self.min_tail())
    }

    fn truncations(&self, j: u64) -> (Sentence<Tok>, Sentence<Tok>) {
        let k = (self.p + j) as usize;
        (self.a.prefix(k), self.b.prefix(k))
    }

    fn word_at(&self, side_a: bool, j: u64) -> &Word<Tok> {
        let s = if side_a { self.a } else { self.b };
        &s.words()[(self.p + j - 1) as usize]
    }

    fn tail_awl(&self, side_a: bool, j: u64) -> Rat {
        let s = if side_a { self.a } else { self.b };
        awl_or_zero(&s.suffix_words((self.p + j) as usize))
    }
}

fn check_discount(delta: Rat) -> Result<(), CriterionError> {
    if delta < Rat::from_integer(1) {
        Ok(())
    } else {
        Err(CriterionError::BadDiscount)
    }
}

fn check_allowance(j_allow: u64) -> Result<(), CriterionError> {
    if j_allow >= 1 {
        Ok(())
    } else {
        Err(CriterionError::BadAllowance)
    }
}

fn check_fraction(eps: Rat) -> Result<(), CriterionError> {
    if eps > Rat::from_integer(0) {
        Ok(())
    } else {
        Err(CriterionError::BadFraction)
    }
}

fn separate_finite(
    stats: &[FiniteStatistic],
    left: &Sentence<Tok>,
    right: &Sentence<Tok>,
) -> Option<(String, SeparatingValues)> {
    stats.iter().find_map(|s| {
        let lv = s.eval(left);
        let rv = s.eval(right);
        (lv != rv).then(|| {
            (s.id().to_owned(), SeparatingValues::Finite { left: lv, right: rv })
        })
    })
}

fn separate_linear(
    stats: &[LinearStatistic],
    level: u64,
    left: &Sentence<Tok>,
    right: &Sentence<Tok>,
) -> Option<(String, SeparatingValues)> {
    stats.iter().find_map(|s| {
        let lv = s.eval(level, left);
        let rv = s.eval(level, right);
        (lv != rv).then(|| {
            (s.id().to_owned(), SeparatingValues::Linear { left: lv, right: rv })
        })
    })
}

/// Finite-statistic criterion with a discounted offset window: some
/// statistic separates the `p + j` truncations for an offset
/// `1 ≤ j ≤ floor(δ·min(m,n)) + J`.
pub fn check_upsilon(
    a: &Sentence<Tok>,
    b: &Sentence<Tok>,
    stats: &[FiniteStatistic],
    delta: Rat,
    j_allow: u64,
) -> Result<Option<CriterionWitness>, CriterionError> {
    check_discount(delta)?;
    check_allowance(j_allow)?;
    let div = diverge(a, b)?;
    for j in 1..=div.j_max(delta, j_allow) {
        let (left, right) = div.truncations(j);
        if let Some((stat_id, values)) = separate_finite(stats, &left, &right) {
            return Ok(Some(CriterionWitness {
                j,
                stat_id,
                values,
                detail: WitnessDetail::Finite,
            }));
        }
    }
    Ok(None)
}

/// The undiscounted finite-statistic criterion: the offset window is just
/// `1 ≤ j ≤ J`.
pub fn check_leo(
    a: &Sentence<Tok>,
    b: &Sentence<Tok>,
    stats: &[FiniteStatistic],
    j_allow: u64,
) -> Result<Option<CriterionWitness>, CriterionError> {
    check_upsilon(a, b, stats, Rat::from_integer(0), j_allow)
}

/// Linear-statistic criterion with tail control: at witness offset `j`, both
/// tails past `p + j` have average word length ≤ `n_bound`, the pivot words
/// at `p + j` are long (≥ ε·(m+n) letters) or differ, and some statistic at
/// level `m + n` separates the truncations.
pub fn check_virgo(
    a: &Sentence<Tok>,
    b: &Sentence<Tok>,
    stats: &[LinearStatistic],
    delta: Rat,
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<Option<CriterionWitness>, CriterionError> {
    check_discount(delta)?;
    check_allowance(j_allow)?;
    check_fraction(eps)?;
    let div = diverge(a, b)?;
    if div.min_tail() == 0 {
        return Err(CriterionError::NoProperTails);
    }
    let level = div.m + div.n;
    let long = eps * Rat::from_integer(level);
    for j in 1..=div.j_max(delta, j_allow) {
        let tail_awl_left = div.tail_awl(true, j);
        let tail_awl_right = div.tail_awl(false, j);
        if tail_awl_left > n_bound || tail_awl_right > n_bound {
            continue;
        }
        let wl = div.word_at(true, j);
        let wr = div.word_at(false, j);
        let pivot = if Rat::from_integer(wl.len() as u64) >= long {
            PivotCondition::LongLeft
        } else if Rat::from_integer(wr.len() as u64) >= long {
            PivotCondition::LongRight
        } else if wl != wr {
            PivotCondition::WordsDiffer
        } else {
            continue;
        };
        let (left, right) = div.truncations(j);
        if let Some((stat_id, values)) = separate_linear(stats, level, &left, &right) {
            return Ok(Some(CriterionWitness {
                j,
                stat_id,
                values,
                detail: WitnessDetail::TailControlled {
                    tail_awl_left,
                    tail_awl_right,
                    pivot,
                },
            }));
        }
    }
    Ok(None)
}

/// Linear-statistic criterion with a separation cascade: at witness offset
/// `j ≤ J`, both tails past `p + j` have average word length ≤ `n_bound`,
/// and for every inner offset `j' ≤ j` all of whose strictly later words up
/// to `j` are short on both sides (≤ ε·(m+n) letters), some statistic at
/// level `m + n` separates the `p + j'` truncations. The inner offset
/// `j' = j` has no later words to be short, so separation at `j` itself is
/// always required.
pub fn check_taurus(
    a: &Sentence<Tok>,
    b: &Sentence<Tok>,
    stats: &[LinearStatistic],
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<Option<CriterionWitness>, CriterionError> {
    check_allowance(j_allow)?;
    check_fraction(eps)?;
    let div = diverge(a, b)?;
    if div.min_tail() == 0 {
        return Err(CriterionError::NoProperTails);
    }
    let level = div.m + div.n;
    let long = eps * Rat::from_integer(level);
    let is_short = |side_a: bool, off: u64| {
        Rat::from_integer(div.word_at(side_a, off).len() as u64) < long
    };
    'offsets: for j in 1..=div.j_max(Rat::from_integer(0), j_allow) {
        let tail_awl_left = div.tail_awl(true, j);
        let tail_awl_right = div.tail_awl(false, j);
        if tail_awl_left > n_bound || tail_awl_right > n_bound {
            continue;
        }
        let mut separated_offsets = Vec::new();
        let mut outermost = None;
        for j_inner in (1..=j).rev() {
            let gap_is_short =
                (j_inner + 1..=j).all(|off| is_short(true, off) && is_short(false, off));
            if !gap_is_short {
                continue;
            }
            let (left, right) = div.truncations(j_inner);
            match separate_linear(stats, level, &left, &right) {
                Some((stat_id, values)) => {
                    if j_inner == j {
                        outermost = Some((stat_id.clone(), values));
                    }
                    separated_offsets.push((j_inner, stat_id));
                }
                None => continue 'offsets,
            }
        }
        separated_offsets.reverse();
        let (stat_id, values) =
            outermost.expect("offset j itself is always in the cascade");
        return Ok(Some(CriterionWitness {
            j,
            stat_id,
            values,
            detail: WitnessDetail::Cascade {
                tail_awl_left,
                tail_awl_right,
                separated_offsets,
            },
        }));
    }
    Ok(None)
}
