//! Diary maps: height- and order-preserving maps from sentences into the
//! word-tree over a finite codomain.
//!
//! A diary writes one codomain letter per day (per input word), and what it
//! writes about day `i` may depend only on the first `i` words. That makes
//! every diary 1-Lipschitz for the tree metrics. The constructions here
//! range from the trivial diary of a finite statistic to the interleaved
//! capacity-κ construction whose guarantee constant `M` bounds metric
//! distortion from below on pairs certified by the matching criterion.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::stats::{product_stat, FiniteStatistic, LinearStatistic, StatValue};
use crate::words::{norm_r, HasStar, Letter, Sentence, StarredSentence, Tok, Word};
use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiaryError {
    #[error("diary capacity κ must be at least 1")]
    ZeroCapacity,
    #[error("the discount δ must lie in [0, 1)")]
    BadDiscount,
    #[error("the offset allowance J must be at least 1")]
    BadAllowance,
    #[error("the length fraction ε must be positive")]
    BadFraction,
    #[error("at least one statistic is required")]
    EmptyStatisticSet,
}

/// A height- and order-preserving map from sentences over `L` to words over
/// the finite codomain `O`: the output has one letter per input word, and
/// letter `i` depends only on the first `i` input words.
#[derive(Clone)]
pub struct Diary<L: Letter, O: Letter> {
    id: String,
    apply_fn: Arc<dyn Fn(&Sentence<L>) -> Word<O> + Send + Sync>,
    guarantee: Option<Rat>,
    codomain_size: Option<u128>,
}

impl<L: Letter, O: Letter> std::fmt::Debug for Diary<L, O> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Diary")
            .field("id", &self.id)
            .field("guarantee", &self.guarantee)
            .finish()
    }
}

impl<L: Letter, O: Letter> Diary<L, O> {
    /// Builds a diary from its per-day entry function. The derived map sends
    /// `⟨w_1 … w_i⟩` to `⟨entry(w_1), entry(w_1 w_2), …⟩`, which is height-
    /// and order-preserving by construction.
    pub fn from_entry(
        id: impl Into<String>,
        codomain_size: Option<u128>,
        guarantee: Option<Rat>,
        entry: impl Fn(&Sentence<L>) -> O + Send + Sync + 'static,
    ) -> Self {
        Diary {
            id: id.into(),
            apply_fn: Arc::new(move |a| {
                Word::from_letters((1..=a.len()).map(|i| entry(&a.prefix(i))))
            }),
            guarantee,
            codomain_size,
        }
    }

    /// Builds a diary from a whole-sentence map. The caller must ensure the
    /// map is height- and order-preserving; constructions here that use this
    /// constructor compute all days in a single pass for efficiency.
    fn from_apply(
        id: impl Into<String>,
        codomain_size: Option<u128>,
        guarantee: Option<Rat>,
        apply: impl Fn(&Sentence<L>) -> Word<O> + Send + Sync + 'static,
    ) -> Self {
        Diary { id: id.into(), apply_fn: Arc::new(apply), guarantee, codomain_size }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// The declared distortion guarantee `M`, when this diary was built by a
    /// construction that carries one.
    pub fn guarantee(&self) -> Option<Rat> {
        self.guarantee
    }

    /// Cardinality of the declared codomain when representable; `None` means
    /// finite but astronomically large. Finiteness is what bounds the
    /// valence of the codomain tree.
    pub fn codomain_size(&self) -> Option<u128> {
        self.codomain_size
    }

    pub fn apply(&self, a: &Sentence<L>) -> Word<O> {
        (self.apply_fn)(a)
    }

    /// The final day's entry, i.e. the last letter of `apply`.
    pub fn entry(&self, a: &Sentence<L>) -> Option<O> {
        self.apply(a).last().cloned()
    }
}

/// Pairs two diaries over the same input alphabet letterwise. The guarantee
/// of the pair is the larger of the component guarantees (present only when
/// both components carry one).
pub fn pair_diaries<L: Letter, O1: Letter, O2: Letter>(
    d1: &Diary<L, O1>,
    d2: &Diary<L, O2>,
) -> Diary<L, (O1, O2)> {
    let id = format!("pair({}, {})", d1.id, d2.id);
    let codomain_size = d1
        .codomain_size
        .zip(d2.codomain_size)
        .and_then(|(a, b)| a.checked_mul(b));
    let guarantee = d1.guarantee.zip(d2.guarantee).map(|(a, b)| a.max(b));
    let (f1, f2) = (d1.apply_fn.clone(), d2.apply_fn.clone());
    Diary::from_apply(id, codomain_size, guarantee, move |a| {
        let (w1, w2) = (f1(a), f2(a));
        debug_assert_eq!(w1.len(), w2.len());
        Word::from_letters(
            w1.letters().iter().cloned().zip(w2.letters().iter().cloned()),
        )
    })
}

/// The diary associated to a finite statistic: each day records the
/// statistic's value on the prefix read so far.
pub fn diary_from_finite(stat: &FiniteStatistic) -> Diary<Tok, StatValue> {
    let id = format!("diary({})", stat.id());
    let size = stat.codomain().size();
    let stat = stat.clone();
    Diary::from_entry(id, size, None, move |a| stat.eval(a))
}

/// The product diary of a finite statistic set, carrying the guarantee
/// `M = 2J/(1−δ)` it earns on pairs the discounted finite criterion
/// certifies.
pub fn upsilon_diary(
    stats: &[FiniteStatistic],
    delta: Rat,
    j_allow: u64,
) -> Result<Diary<Tok, StatValue>, DiaryError> {
    let slack = discount_slack(delta)?;
    check_allowance(j_allow)?;
    let m = Rat::from_integer(2 * j_allow) / slack;
    let product = product_stat(stats);
    let id = format!("upsilon({})", product.id());
    let size = product.codomain().size();
    Ok(Diary::from_entry(id, size, Some(m), move |a| product.eval(a)))
}

fn discount_slack(delta: Rat) -> Result<Rat, DiaryError> {
    if delta < Rat::from_integer(1) {
        Ok(Rat::from_integer(1) - delta)
    } else {
        Err(DiaryError::BadDiscount)
    }
}

fn check_allowance(j_allow: u64) -> Result<(), DiaryError> {
    if j_allow >= 1 {
        Ok(())
    } else {
        Err(DiaryError::BadAllowance)
    }
}

fn check_fraction(eps: Rat) -> Result<(), DiaryError> {
    if eps > Rat::from_integer(0) {
        Ok(())
    } else {
        Err(DiaryError::BadFraction)
    }
}

/// Source coordinates of an event: the `pos`-th letter of the `day`-th word,
/// both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EventRef {
    pub day: usize,
    pub pos: usize,
}

/// Where an event was written down: the `page`-th letter of the `chapter`-th
/// output word, both 1-based. Page 1 is the newest event of its day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PageRef {
    pub chapter: usize,
    pub page: usize,
}

/// The record of which events a capacity-κ diary wrote where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiaryProvenance {
    kappa: usize,
    /// `page_source[chapter−1][page−1]` = the event written there.
    page_source: Vec<Vec<EventRef>>,
    /// `recorded[day−1][pos−1]` = the page holding that event, if any.
    recorded: Vec<Vec<Option<PageRef>>>,
}

impl DiaryProvenance {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn chapters(&self) -> usize {
        self.page_source.len()
    }

    pub fn pages(&self, chapter: usize) -> &[EventRef] {
        &self.page_source[chapter - 1]
    }

    /// The source event of a page.
    pub fn source(&self, page: PageRef) -> EventRef {
        self.page_source[page.chapter - 1][page.page - 1]
    }

    /// The page where the event at `(day, pos)` was written, or `None` if it
    /// was never recorded. Coordinates are 1-based and must index an actual
    /// event of the input sentence.
    pub fn is_recorded(&self, day: usize, pos: usize) -> Option<PageRef> {
        self.recorded[day - 1][pos - 1]
    }

    /// Every event that never made it into the diary, in stream order.
    pub fn unrecorded(&self) -> Vec<EventRef> {
        let mut out = Vec::new();
        for (di, day) in self.recorded.iter().enumerate() {
            for (pi, slot) in day.iter().enumerate() {
                if slot.is_none() {
                    out.push(EventRef { day: di + 1, pos: pi + 1 });
                }
            }
        }
        out
    }
}

/// A capacity-κ diary run: the output chapters together with full
/// provenance, plus the unrecorded leftover after each day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceTrace<L> {
    pub chapters: Vec<Word<L>>,
    pub provenance: DiaryProvenance,
    /// `leftovers[i]` = the unrecorded initial segment left after day `i+1`.
    pub leftovers: Vec<Word<L>>,
}

/// Runs the capacity-κ diary: each day appends the day's letters to the
/// unrecorded backlog and writes the most recent unrecorded event first,
/// until the chapter holds κ pages or the backlog is empty.
pub fn alice_diary<L: Letter>(
    kappa: usize,
    a: &Sentence<L>,
) -> Result<AliceTrace<L>, DiaryError> {
    if kappa == 0 {
        return Err(DiaryError::ZeroCapacity);
    }
    let mut pending: Vec<(L, EventRef)> = Vec::new();
    let mut chapters = Vec::with_capacity(a.len());
    let mut page_source = Vec::with_capacity(a.len());
    let mut leftovers = Vec::with_capacity(a.len());
    let mut recorded: Vec<Vec<Option<PageRef>>> =
        a.words().iter().map(|w| vec![None; w.len()]).collect();
    for (di, w) in a.words().iter().enumerate() {
        for (pi, letter) in w.letters().iter().enumerate() {
            pending.push((letter.clone(), EventRef { day: di + 1, pos: pi + 1 }));
        }
        let take = kappa.min(pending.len());
        let split = pending.len() - take;
        let mut letters = Vec::with_capacity(take);
        let mut sources = Vec::with_capacity(take);
        for (page_idx, (letter, ev)) in pending.drain(split..).rev().enumerate() {
            recorded[ev.day - 1][ev.pos - 1] =
                Some(PageRef { chapter: di + 1, page: page_idx + 1 });
            letters.push(letter);
            sources.push(ev);
        }
        chapters.push(Word::from_letters(letters));
        page_source.push(sources);
        leftovers.push(Word::from_letters(pending.iter().map(|(l, _)| l.clone())));
    }
    Ok(AliceTrace {
        chapters,
        provenance: DiaryProvenance { kappa, page_source, recorded },
        leftovers,
    })
}

/// The capacity-κ diary as a [`Diary`] value (chapters as output letters,
/// provenance dropped).
pub fn alice_diary_map<L: Letter>(kappa: usize) -> Result<Diary<L, Word<L>>, DiaryError> {
    if kappa == 0 {
        return Err(DiaryError::ZeroCapacity);
    }
    Ok(Diary::from_apply(format!("alice(kappa={kappa})"), None, None, move |a| {
        let trace = alice_diary(kappa, a).expect("capacity validated at construction");
        Word::from_letters(trace.chapters)
    }))
}

/// A letter of the interleaved alphabet: the anchor marking a word start, or
/// a base letter stacked with one normalized statistic row per statistic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stacked {
    Anchor,
    Ev { base: Tok, rows: Vec<Tok> },
}

impl HasStar for Stacked {
    fn star() -> Self {
        Stacked::Anchor
    }
}

fn ceil_to_nat(r: Rat) -> u64 {
    r.ceil().to_integer()
}

/// The padding factor ω of the interleaving: the smallest natural ≥ τ/ε,
/// where τ is the largest growth prefactor among the statistics.
pub fn interleave_omega(stats: &[LinearStatistic], eps: Rat) -> Result<u64, DiaryError> {
    check_fraction(eps)?;
    let tau = stats
        .iter()
        .map(LinearStatistic::tau)
        .max()
        .ok_or(DiaryError::EmptyStatisticSet)?;
    Ok(ceil_to_nat(tau / eps))
}

/// Stretches a sentence into a starred sentence over the stacked alphabet:
/// word `i` is an anchor followed by `ω·len(w_i)` letters whose base
/// component cycles through `w_i` and whose row `k` spells the reversal of
/// `stat^k_∞` on the prefix through word `i`, normalized to exactly
/// `ω·len(w_i)` letters (star-padded).
pub fn interleave_embed(
    a: &Sentence<Tok>,
    stats: &[LinearStatistic],
    eps: Rat,
) -> Result<StarredSentence<Stacked>, DiaryError> {
    let omega = interleave_omega(stats, eps)? as usize;
    let mut words = Vec::with_capacity(a.len());
    for i in 1..=a.len() {
        let w = &a.words()[i - 1];
        let prefix = a.prefix(i);
        let span = omega * w.len();
        let rows: Vec<Word<Tok>> = stats
            .iter()
            .map(|s| norm_r(&s.eval_infty(&prefix), span).reversed())
            .collect();
        let mut letters = Vec::with_capacity(span + 1);
        letters.push(Stacked::Anchor);
        for r in 0..span {
            letters.push(Stacked::Ev {
                base: w.letters()[r % w.len()],
                rows: rows.iter().map(|row| row.letters()[r]).collect(),
            });
        }
        words.push(Word::from_letters(letters));
    }
    let sentence = Sentence::new(words).expect("anchored words are nonempty");
    Ok(StarredSentence::new(sentence).expect("anchor starts each word exactly once"))
}

/// The exact parameters of an interleaved capacity diary, all derived from
/// the statistic set and the four check constants by rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirgoDiaryParams {
    /// Largest growth prefactor among the statistics.
    pub tau: Rat,
    /// Interleaving padding factor: least natural ≥ τ/ε.
    pub omega: u64,
    /// Bound `12τJ/(1−δ) + ωN + 1` on unrecorded spans, head side.
    pub u_bound: Rat,
    /// Bound `12(τ+ε)J/(1−δ) + ωN + 1` on unrecorded spans, tail side.
    pub v_bound: Rat,
    /// Diary capacity: least natural strictly above all four thresholds
    /// `16U/(1−δ)`, `64Jτ/(1−δ)`, `16V/(1−δ)`, `64J(τ+ε)/(1−δ)`.
    pub kappa: u64,
}

fn least_nat_above(r: Rat) -> u64 {
    r.floor().to_integer() + 1
}

/// Computes the derived parameters of [`virgo_diary`] without building the
/// diary.
pub fn virgo_params(
    stats: &[LinearStatistic],
    delta: Rat,
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<VirgoDiaryParams, DiaryError> {
    let slack = discount_slack(delta)?;
    check_allowance(j_allow)?;
    check_fraction(eps)?;
    let tau = stats
        .iter()
        .map(LinearStatistic::tau)
        .max()
        .ok_or(DiaryError::EmptyStatisticSet)?;
    let omega = ceil_to_nat(tau / eps);
    let one = Rat::from_integer(1);
    let jr = Rat::from_integer(j_allow);
    let omega_n = Rat::from_integer(omega) * n_bound;
    let u_bound = Rat::from_integer(12) * tau * jr / slack + omega_n + one;
    let v_bound = Rat::from_integer(12) * (tau + eps) * jr / slack + omega_n + one;
    let thresholds = [
        Rat::from_integer(16) * u_bound / slack,
        Rat::from_integer(64) * jr * tau / slack,
        Rat::from_integer(16) * v_bound / slack,
        Rat::from_integer(64) * jr * (tau + eps) / slack,
    ];
    let kappa = least_nat_above(thresholds.into_iter().max().expect("nonempty"));
    Ok(VirgoDiaryParams { tau, omega, u_bound, v_bound, kappa })
}

/// An interleaved capacity diary together with its derived parameters.
#[derive(Debug, Clone)]
pub struct VirgoDiary {
    pub diary: Diary<Tok, Word<Stacked>>,
    pub params: VirgoDiaryParams,
}

fn virgo_guarantee(slack: Rat, j_allow: u64) -> Rat {
    let three = Rat::from_integer(3);
    let eight = Rat::from_integer(8) / slack;
    let case3 = Rat::from_integer(32 * j_allow) / slack;
    three.max(eight).max(case3)
}

fn build_virgo(
    label: &str,
    stats: &[LinearStatistic],
    delta: Rat,
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
    kappa_override: Option<u64>,
) -> Result<VirgoDiary, DiaryError> {
    let mut params = virgo_params(stats, delta, j_allow, n_bound, eps)?;
    if let Some(k) = kappa_override {
        if k == 0 {
            return Err(DiaryError::ZeroCapacity);
        }
        params.kappa = k;
    }
    let slack = discount_slack(delta)?;
    let guarantee = virgo_guarantee(slack, j_allow);
    let kappa = params.kappa as usize;
    let stats: Vec<LinearStatistic> = stats.to_vec();
    let id = format!("{label}(kappa={kappa})");
    let diary = Diary::from_apply(id, None, Some(guarantee), move |a| {
        let stretched = interleave_embed(a, &stats, eps)
            .expect("statistic set and fraction validated at construction");
        let trace = alice_diary(kappa, stretched.sentence())
            .expect("capacity validated at construction");
        Word::from_letters(trace.chapters)
    });
    Ok(VirgoDiary { diary, params })
}

/// The interleaved capacity diary: the capacity-κ diary composed with the
/// statistic interleaving, with capacity and guarantee derived from the
/// parameters. Carries guarantee `M = max(3, 8/(1−δ), 32J/(1−δ))` on pairs
/// certified by the tail-controlled linear criterion.
pub fn virgo_diary(
    stats: &[LinearStatistic],
    delta: Rat,
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<VirgoDiary, DiaryError> {
    build_virgo("virgo", stats, delta, j_allow, n_bound, eps, None)
}

/// [`virgo_diary`] with the derived capacity replaced by an explicit κ; the
/// guarantee only holds for the derived capacity, so this is for
/// experimentation.
pub fn virgo_diary_with_kappa(
    stats: &[LinearStatistic],
    delta: Rat,
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
    kappa: u64,
) -> Result<VirgoDiary, DiaryError> {
    build_virgo("virgo", stats, delta, j_allow, n_bound, eps, Some(kappa))
}

/// The cascade variant: delegates to [`virgo_diary`] at δ = 0 with the tail
/// bound inflated to `N + 6J²ε`, the slack the cascade criterion's gap
/// condition costs. Same guarantee shape, evaluated at δ = 0.
pub fn taurus_diary(
    stats: &[LinearStatistic],
    j_allow: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<VirgoDiary, DiaryError> {
    let inflated = n_bound + Rat::from_integer(6 * j_allow * j_allow) * eps;
    build_virgo("taurus", stats, Rat::from_integer(0), j_allow, inflated, eps, None)
}

/// A paired finite/linear diary with its linear-side parameters.
#[derive(Debug, Clone)]
pub struct CombinedDiary {
    pub diary: Diary<Tok, (StatValue, Word<Stacked>)>,
    pub params: VirgoDiaryParams,
}

/// Pairs the product diary of the finite statistics (at δ = 0, allowance
/// `J_fin`) with the cascade diary of the linear statistics (allowance
/// `J_lin`, tail bound `N`, fraction ε). The guarantee is the larger
/// component guarantee.
pub fn combined_diary(
    s_fin: &[FiniteStatistic],
    s_lin: &[LinearStatistic],
    j_fin: u64,
    j_lin: u64,
    n_bound: Rat,
    eps: Rat,
) -> Result<CombinedDiary, DiaryError> {
    let finite = upsilon_diary(s_fin, Rat::from_integer(0), j_fin)?;
    let linear = taurus_diary(s_lin, j_lin, n_bound, eps)?;
    Ok(CombinedDiary {
        diary: pair_diaries(&finite, &linear.diary),
        params: linear.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{base10_length_linear, last_letter, trunc_finite, trunc_linear};
    use crate::words::Alphabet;

    fn al() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["a", "b", "c"]).unwrap())
    }

    fn chapters_of<L: Letter>(trace: &AliceTrace<L>) -> Vec<Word<L>> {
        trace.chapters.clone()
    }

    #[test]
    fn finite_diary_records_prefix_values() {
        let al = al();
        let d = diary_from_finite(&last_letter(al.clone()));
        let out = d.apply(&al.sentence("abc|bc|aa").unwrap());
        let letters: Vec<StatValue> = out.letters().to_vec();
        let l = |s: &str| StatValue::Letter(al.tok(s).unwrap());
        assert_eq!(letters, vec![l("c"), l("c"), l("a")]);

        let d2 = diary_from_finite(&trunc_finite(2, al.clone()));
        assert_eq!(
            d2.apply(&al.sentence("abc").unwrap()).letters(),
            &[StatValue::Word(al.word("bc").unwrap())]
        );
        assert!(d.apply(&Sentence::empty()).is_empty());
    }

    #[test]
    fn upsilon_diary_guarantee() {
        let al = al();
        let d = upsilon_diary(&[last_letter(al)], Rat::from_integer(0), 1).unwrap();
        assert_eq!(d.guarantee(), Some(Rat::from_integer(2)));
        assert_eq!(
            upsilon_diary(&[], Rat::from_integer(1), 1).unwrap_err(),
            DiaryError::BadDiscount
        );
        assert_eq!(
            upsilon_diary(&[], Rat::from_integer(0), 0).unwrap_err(),
            DiaryError::BadAllowance
        );
    }

    #[test]
    fn capacity_diary_golden_two_days() {
        let al = al();
        let trace = alice_diary(3, &al.sentence("abac|cb").unwrap()).unwrap();
        assert_eq!(
            chapters_of(&trace),
            vec![al.word("cab").unwrap(), al.word("bca").unwrap()]
        );
        // The final a of the diary is the first event of day one.
        assert_eq!(
            trace.provenance.is_recorded(1, 1),
            Some(PageRef { chapter: 2, page: 3 })
        );
    }

    #[test]
    fn capacity_diary_exact_fit() {
        let al = al();
        let trace = alice_diary(3, &al.sentence("abc").unwrap()).unwrap();
        assert_eq!(chapters_of(&trace), vec![al.word("cba").unwrap()]);
        assert!(trace.provenance.unrecorded().is_empty());
    }

    #[test]
    fn capacity_diary_golden_five_days() {
        let al = al();
        let trace = alice_diary(3, &al.sentence("abac|cb|accc|bcbc|a").unwrap()).unwrap();
        let want: Vec<Word<Tok>> = ["cab", "bca", "ccc", "cbc", "aba"]
            .iter()
            .map(|s| al.word(s).unwrap())
            .collect();
        assert_eq!(chapters_of(&trace), want);
        let leftovers: Vec<Word<Tok>> =
            ["a", "", "a", "ab", ""].iter().map(|s| al.word(s).unwrap()).collect();
        assert_eq!(trace.leftovers, leftovers);
    }

    #[test]
    fn recording_is_most_recent_first() {
        let al = al();
        let trace = alice_diary(3, &al.sentence("abac").unwrap()).unwrap();
        let prov = &trace.provenance;
        // Four events, three pages: the oldest is left over.
        assert_eq!(prov.is_recorded(1, 1), None);
        assert_eq!(prov.is_recorded(1, 4), Some(PageRef { chapter: 1, page: 1 }));
        assert_eq!(prov.source(PageRef { chapter: 1, page: 1 }), EventRef { day: 1, pos: 4 });
        assert_eq!(prov.unrecorded(), vec![EventRef { day: 1, pos: 1 }]);
    }

    #[test]
    fn capacity_diary_conservation() {
        let al = al();
        let a = al.sentence("abac|cb|accc|bcbc|a").unwrap();
        for kappa in 1..=6 {
            let trace = alice_diary(kappa, &a).unwrap();
            let mut seen = 0usize;
            for (i, chapter) in trace.chapters.iter().enumerate() {
                seen += a.words()[i].len();
                let written: usize = trace.chapters[..=i].iter().map(Word::len).sum();
                assert_eq!(seen - written, trace.leftovers[i].len());
                // A chapter underfills only when nothing was left unwritten.
                if chapter.len() < kappa {
                    assert!(trace.leftovers[i].is_empty());
                }
            }
        }
    }

    #[test]
    fn interleave_shape_and_base_row() {
        let al = al();
        let a = al.sentence("ab").unwrap();
        let stats = [trunc_linear(1)];
        assert_eq!(interleave_omega(&stats, Rat::from_integer(1)).unwrap(), 1);
        let s = interleave_embed(&a, &stats, Rat::from_integer(1)).unwrap();
        let word = &s.sentence().words()[0];
        assert_eq!(word.len(), 1 + 2);
        assert_eq!(word.letters()[0], Stacked::Anchor);
        let bases: Vec<Tok> = word.letters()[1..]
            .iter()
            .map(|l| match l {
                Stacked::Ev { base, .. } => *base,
                Stacked::Anchor => panic!("anchor inside a word"),
            })
            .collect();
        assert_eq!(bases, al.word("ab").unwrap().letters().to_vec());

        // ω = 2 doubles the span and cycles the base letters.
        let stats2 = [trunc_linear(2)];
        let s2 = interleave_embed(&a, &stats2, Rat::from_integer(1)).unwrap();
        let word2 = &s2.sentence().words()[0];
        assert_eq!(word2.len(), 1 + 4);
        let bases2: Vec<Tok> = word2.letters()[1..]
            .iter()
            .map(|l| match l {
                Stacked::Ev { base, .. } => *base,
                Stacked::Anchor => panic!("anchor inside a word"),
            })
            .collect();
        assert_eq!(bases2, al.word("abab").unwrap().letters().to_vec());
    }

    #[test]
    fn interleave_rows_reverse_normed_stats() {
        let al = al();
        let a = al.sentence("ab|c").unwrap();
        let stats = [trunc_linear(1)];
        let s = interleave_embed(&a, &stats, Rat::from_integer(1)).unwrap();
        // Word 2 has span 1; its statistic row is the reversal of
        // norm_1(stat_∞(⟨ab|c⟩)) = norm_1("c…") = "c".
        let word2 = &s.sentence().words()[1];
        match &word2.letters()[1] {
            Stacked::Ev { base, rows } => {
                assert_eq!(*base, al.tok("c").unwrap());
                assert_eq!(rows.as_slice(), &[al.tok("c").unwrap()]);
            }
            Stacked::Anchor => panic!("anchor inside a word"),
        }
        // Word 1 (span 2): stat_∞(⟨ab⟩) = "ba", normed to 2 = "ba",
        // reversed = "ab".
        let word1 = &s.sentence().words()[0];
        let row_letters: Vec<Tok> = word1.letters()[1..]
            .iter()
            .map(|l| match l {
                Stacked::Ev { rows, .. } => rows[0],
                Stacked::Anchor => panic!("anchor inside a word"),
            })
            .collect();
        assert_eq!(row_letters, al.word("ab").unwrap().letters().to_vec());
    }

    #[test]
    fn interleave_preserves_distances() {
        let al = al();
        let stats = [trunc_linear(2)];
        let eps = Rat::new(1, 2);
        let pairs = [
            ("ab|c|aa", "ab|c"),
            ("ab|c", "ab|b"),
            ("a", "b|c|a"),
            ("abc|a", "abc|a"),
        ];
        for (x, y) in pairs {
            let sx = al.sentence(x).unwrap();
            let sy = al.sentence(y).unwrap();
            let ix = interleave_embed(&sx, &stats, eps).unwrap();
            let iy = interleave_embed(&sy, &stats, eps).unwrap();
            assert_eq!(
                crate::words::sentence_tree_distance(ix.sentence(), iy.sentence()),
                crate::words::sentence_tree_distance(&sx, &sy),
            );
        }
    }

    #[test]
    fn virgo_params_reference_values() {
        let p = virgo_params(
            &[trunc_linear(12), base10_length_linear(12)],
            Rat::from_integer(0),
            2,
            Rat::from_integer(18),
            Rat::from_integer(1),
        )
        .unwrap();
        assert_eq!(p.tau, Rat::from_integer(12));
        assert_eq!(p.omega, 12);
        assert_eq!(p.u_bound, Rat::from_integer(505));
        assert_eq!(p.v_bound, Rat::from_integer(529));
        assert_eq!(p.kappa, 8465);
    }

    #[test]
    fn virgo_guarantee_value() {
        let d = virgo_diary(
            &[trunc_linear(12), base10_length_linear(12)],
            Rat::from_integer(0),
            2,
            Rat::from_integer(18),
            Rat::from_integer(1),
        )
        .unwrap();
        assert_eq!(d.diary.guarantee(), Some(Rat::from_integer(64)));
    }

    #[test]
    fn taurus_inflates_the_tail_bound() {
        let stats = [trunc_linear(12), base10_length_linear(12)];
        let t = taurus_diary(&stats, 2, Rat::from_integer(18), Rat::from_integer(1)).unwrap();
        let direct = virgo_params(
            &stats,
            Rat::from_integer(0),
            2,
            Rat::from_integer(42),
            Rat::from_integer(1),
        )
        .unwrap();
        assert_eq!(t.params, direct);
        assert_eq!(t.diary.guarantee(), Some(Rat::from_integer(64)));

        let t1 = taurus_diary(&[trunc_linear(1)], 1, Rat::from_integer(0), Rat::from_integer(1))
            .unwrap();
        let direct1 = virgo_params(
            &[trunc_linear(1)],
            Rat::from_integer(0),
            1,
            Rat::from_integer(6),
            Rat::from_integer(1),
        )
        .unwrap();
        assert_eq!(t1.params, direct1);
    }

    #[test]
    fn combined_diary_pairs_components() {
        let al = al();
        let c = combined_diary(
            &[last_letter(al.clone())],
            &[trunc_linear(12), base10_length_linear(12)],
            2,
            2,
            Rat::from_integer(18),
            Rat::from_integer(1),
        )
        .unwrap();
        assert_eq!(c.diary.guarantee(), Some(Rat::from_integer(64)));
        let out = c.diary.apply(&al.sentence("ab|c").unwrap());
        assert_eq!(out.len(), 2);
        // The finite component is the product entry over S_fin.
        let (fin, _lin) = &out.letters()[1];
        assert_eq!(*fin, StatValue::Tuple(vec![StatValue::Letter(al.tok("c").unwrap())]));
    }

    #[test]
    fn small_capacity_virgo_runs_end_to_end() {
        let al = al();
        let d = virgo_diary_with_kappa(
            &[trunc_linear(1)],
            Rat::from_integer(0),
            1,
            Rat::from_integer(2),
            Rat::from_integer(1),
            4,
        )
        .unwrap();
        assert_eq!(d.params.kappa, 4);
        let a = al.sentence("ab|c|ba").unwrap();
        let out = d.diary.apply(&a);
        assert_eq!(out.len(), 3);
        // Order preservation: the diary of a prefix is the prefix of the
        // diary.
        let out2 = d.diary.apply(&a.prefix(2));
        assert_eq!(out.letters()[..2], out2.letters()[..]);
    }

    #[test]
    fn diaries_are_height_and_order_preserving() {
        let al = al();
        let d = diary_from_finite(&last_letter(al.clone()));
        let a = al.sentence("ab|c|ba|aa").unwrap();
        let full = d.apply(&a);
        assert_eq!(full.len(), a.len());
        for i in 0..=a.len() {
            let part = d.apply(&a.prefix(i));
            assert_eq!(part.letters(), &full.letters()[..i]);
        }
    }
}
