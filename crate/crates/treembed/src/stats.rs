//! Finite and linear statistics over sentences.
//!
//! A *finite statistic* evaluates a sentence into a finite ordered codomain;
//! a *linear statistic* is a family `stat_c` of word-valued evaluators whose
//! output length grows at most linearly in `c` and which refine each other:
//! for `c ≤ c'`, `stat_c`'s output is a prefix of `stat_{c'}`'s. The
//! untruncated limit `stat_∞` exists because all inputs here are finite.
//!
//! Statistics are immutable closures over immutable configuration and can be
//! evaluated concurrently without coordination.

use std::fmt;
use std::sync::Arc;

use crate::words::{base10_digits, Alphabet, Sentence, Tok, Word};
use crate::Rat;

/// A value produced by a finite statistic. Products evaluate componentwise
/// into tuples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatValue {
    Unit,
    Letter(Tok),
    Word(Word<Tok>),
    Nat(u64),
    Flag(bool),
    Tuple(Vec<StatValue>),
}

/// Description of a finite statistic's codomain, rich enough to test
/// membership and to bound its cardinality.
#[derive(Debug, Clone)]
pub enum Codomain {
    Letters(Arc<Alphabet>),
    /// Words over the alphabet of length ≤ the bound (star allowed as a pad).
    WordsUpTo(Arc<Alphabet>, usize),
    /// {0, …, m−1}.
    Mod(u64),
    Flags,
    Unit,
    Product(Vec<Codomain>),
}

impl Codomain {
    pub fn contains(&self, v: &StatValue) -> bool {
        match (self, v) {
            (Codomain::Letters(al), StatValue::Letter(t)) => al.contains(*t),
            (Codomain::WordsUpTo(al, max), StatValue::Word(w)) => {
                w.len() <= *max && w.letters().iter().all(|&t| al.contains(t))
            }
            (Codomain::Mod(m), StatValue::Nat(n)) => n < m,
            (Codomain::Flags, StatValue::Flag(_)) => true,
            (Codomain::Unit, StatValue::Unit) => true,
            (Codomain::Product(cs), StatValue::Tuple(vs)) => {
                cs.len() == vs.len() && cs.iter().zip(vs).all(|(c, v)| c.contains(v))
            }
            _ => false,
        }
    }

    /// Cardinality when it fits in a `u128`; `None` means finite but
    /// astronomically large. Always finite either way, which is what bounds
    /// the valence of diary codomain trees.
    pub fn size(&self) -> Option<u128> {
        match self {
            Codomain::Letters(al) => Some(al.len() as u128 + 2),
            Codomain::WordsUpTo(al, max) => {
                // Σ_{i ≤ max} (|A|+2)^i, counting the reserved tokens.
                let base = al.len() as u128 + 2;
                let mut total: u128 = 0;
                let mut pow: u128 = 1;
                for _ in 0..=*max {
                    total = total.checked_add(pow)?;
                    pow = pow.checked_mul(base)?;
                }
                Some(total)
            }
            Codomain::Mod(m) => Some(*m as u128),
            Codomain::Flags => Some(2),
            Codomain::Unit => Some(1),
            Codomain::Product(cs) => {
                cs.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.size()?))
            }
        }
    }
}

type FiniteEval = Arc<dyn Fn(&Sentence<Tok>) -> StatValue + Send + Sync>;

/// A finite statistic: a named evaluator from sentences into a declared
/// finite codomain. Evaluation requires a nonempty sentence whenever the
/// statistic reads the final word, which all built-ins do.
#[derive(Clone)]
pub struct FiniteStatistic {
    id: String,
    codomain: Codomain,
    eval: FiniteEval,
}

impl fmt::Debug for FiniteStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteStatistic").field("id", &self.id).finish()
    }
}

impl FiniteStatistic {
    pub fn new(
        id: impl Into<String>,
        codomain: Codomain,
        eval: impl Fn(&Sentence<Tok>) -> StatValue + Send + Sync + 'static,
    ) -> Self {
        FiniteStatistic { id: id.into(), codomain, eval: Arc::new(eval) }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn codomain(&self) -> &Codomain {
        &self.codomain
    }

    pub fn eval(&self, a: &Sentence<Tok>) -> StatValue {
        (self.eval)(a)
    }
}

fn final_word<'a>(a: &'a Sentence<Tok>, id: &str) -> &'a Word<Tok> {
    a.words()
        .last()
        .unwrap_or_else(|| panic!("statistic {id:?} requires a nonempty sentence"))
}

/// The final letter of the final word.
pub fn last_letter(alphabet: Arc<Alphabet>) -> FiniteStatistic {
    FiniteStatistic::new("last_letter", Codomain::Letters(alphabet), |a| {
        let w = final_word(a, "last_letter");
        StatValue::Letter(*w.last().expect("sentence words are nonempty"))
    })
}

/// The final `min(κ, len)` letters of the final word, in original order.
pub fn trunc_finite(kappa: usize, alphabet: Arc<Alphabet>) -> FiniteStatistic {
    FiniteStatistic::new(
        format!("trunc_finite({kappa})"),
        Codomain::WordsUpTo(alphabet, kappa),
        move |a| StatValue::Word(final_word(a, "trunc_finite").suffix(kappa)),
    )
}

/// Length of the final word, modulo `m`.
pub fn length_mod(m: u64) -> FiniteStatistic {
    assert!(m > 0, "length_mod needs a positive modulus");
    FiniteStatistic::new(format!("length_mod({m})"), Codomain::Mod(m), move |a| {
        StatValue::Nat(final_word(a, "length_mod").len() as u64 % m)
    })
}

/// An arbitrary yes/no question about the sentence.
pub fn predicate_stat(
    id: impl Into<String>,
    q: impl Fn(&Sentence<Tok>) -> bool + Send + Sync + 'static,
) -> FiniteStatistic {
    FiniteStatistic::new(id, Codomain::Flags, move |a| StatValue::Flag(q(a)))
}

/// The componentwise product of finitely many finite statistics. The empty
/// product is the constant unit statistic.
pub fn product_stat(stats: &[FiniteStatistic]) -> FiniteStatistic {
    let id = format!(
        "product({})",
        stats.iter().map(FiniteStatistic::id).collect::<Vec<_>>().join(", ")
    );
    let codomain = Codomain::Product(stats.iter().map(|s| s.codomain.clone()).collect());
    let evals: Vec<FiniteEval> = stats.iter().map(|s| s.eval.clone()).collect();
    FiniteStatistic::new(id, codomain, move |a| {
        StatValue::Tuple(evals.iter().map(|e| e(a)).collect())
    })
}

type LinearEval = Arc<dyn Fn(u64, &Sentence<Tok>) -> Word<Tok> + Send + Sync>;
type LinearLimit = Arc<dyn Fn(&Sentence<Tok>) -> Word<Tok> + Send + Sync>;

/// A linear statistic: `eval(c, α)` is a word of length ≤ τ·c over the
/// statistic's codomain alphabet, and outputs refine along `c` — for
/// `c ≤ c'`, `eval(c, α)` is a prefix of `eval(c', α)` and of the limit
/// `eval_infty(α)`.
#[derive(Clone)]
pub struct LinearStatistic {
    id: String,
    tau: Rat,
    eval: LinearEval,
    eval_infty: LinearLimit,
}

impl fmt::Debug for LinearStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearStatistic")
            .field("id", &self.id)
            .field("tau", &self.tau)
            .finish()
    }
}

impl LinearStatistic {
    pub fn new(
        id: impl Into<String>,
        tau: Rat,
        eval: impl Fn(u64, &Sentence<Tok>) -> Word<Tok> + Send + Sync + 'static,
        eval_infty: impl Fn(&Sentence<Tok>) -> Word<Tok> + Send + Sync + 'static,
    ) -> Self {
        assert!(tau >= Rat::from_integer(1), "a linear statistic needs τ ≥ 1");
        LinearStatistic {
            id: id.into(),
            tau,
            eval: Arc::new(eval),
            eval_infty: Arc::new(eval_infty),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// The linear growth prefactor τ.
    pub fn tau(&self) -> Rat {
        self.tau
    }

    pub fn eval(&self, c: u64, a: &Sentence<Tok>) -> Word<Tok> {
        (self.eval)(c, a)
    }

    pub fn eval_infty(&self, a: &Sentence<Tok>) -> Word<Tok> {
        (self.eval_infty)(a)
    }
}

fn floor_u64(r: Rat) -> u64 {
    r.to_integer()
}

/// The final `τ·c` letters of the final word, written newest-first (so that
/// growing `c` extends the output on the right, as the refinement condition
/// requires).
pub fn trunc_linear(tau: u64) -> LinearStatistic {
    LinearStatistic::new(
        format!("trunc_linear({tau})"),
        Rat::from_integer(tau),
        move |c, a| {
            let budget = (tau * c) as usize;
            final_word(a, "trunc_linear").suffix(budget).reversed()
        },
        |a| final_word(a, "trunc_linear").reversed(),
    )
}

/// Whether the final word has at most `c` letters: the empty word when it is
/// longer, the single letter `0` otherwise.
pub fn howmany() -> LinearStatistic {
    let zero = Word::from_letters(vec![Tok::Sym(0)]);
    let zero2 = zero.clone();
    LinearStatistic::new(
        "howmany",
        Rat::from_integer(1),
        move |c, a| {
            if final_word(a, "howmany").len() as u64 > c {
                Word::empty()
            } else {
                zero.clone()
            }
        },
        move |_| zero2.clone(),
    )
}

fn digit_word(n: u64) -> Word<Tok> {
    Word::from_letters(base10_digits(n).into_iter().map(|d| Tok::Sym(d as u32)))
}

/// The final `τ·c` digits of the base-10 expansion of the final word's
/// length, least significant first.
pub fn base10_length_linear(tau: u64) -> LinearStatistic {
    LinearStatistic::new(
        format!("base10_length({tau})"),
        Rat::from_integer(tau),
        move |c, a| {
            let budget = (tau * c) as usize;
            digit_word(final_word(a, "base10_length").len() as u64)
                .reversed()
                .prefix(budget)
        },
        |a| digit_word(final_word(a, "base10_length").len() as u64).reversed(),
    )
}

/// A priority permutation family: for each letter count `l`, a permutation of
/// `0..l` giving the order in which the sentence's letters are emitted.
pub type PriorityFamily = Arc<dyn Fn(usize) -> Vec<usize> + Send + Sync>;

fn reorder_letters(a: &Sentence<Tok>, sigma: &PriorityFamily, id: &str) -> Word<Tok> {
    let stream: Vec<Tok> = a
        .words()
        .iter()
        .flat_map(|w| w.letters().iter().copied())
        .collect();
    let perm = sigma(stream.len());
    let mut seen = vec![false; stream.len()];
    let valid = perm.len() == stream.len()
        && perm.iter().all(|&i| {
            i < stream.len() && !std::mem::replace(&mut seen[i], true)
        });
    assert!(valid, "{id}: priority family must return a permutation of 0..{}", stream.len());
    Word::from_letters(perm.into_iter().map(|i| stream[i]))
}

/// Order-of-priority statistic: the whole letter stream of the sentence,
/// re-ordered by `σ(letter count)` and truncated to the first `τ·c` letters.
pub fn oop(tau: u64, sigma: PriorityFamily) -> LinearStatistic {
    let sigma2 = sigma.clone();
    LinearStatistic::new(
        format!("oop({tau})"),
        Rat::from_integer(tau),
        move |c, a| reorder_letters(a, &sigma, "oop").prefix((tau * c) as usize),
        move |a| reorder_letters(a, &sigma2, "oop"),
    )
}

/// The τ·c letter budget of a linear statistic at level `c`, floored to a
/// natural.
pub fn letter_budget(stat: &LinearStatistic, c: u64) -> u64 {
    floor_u64(stat.tau() * Rat::from_integer(c))
}

/// The alphabet of decimal digits, with digit `d` as symbol index `d`.
pub fn digit_alphabet() -> Arc<Alphabet> {
    Arc::new(
        Alphabet::new((0..10u32).map(|d| d.to_string()))
            .expect("digit alphabet is well-formed"),
    )
}
