//! Finite words and sentences, and the metrics of their ambient trees.
//!
//! A *word* over an alphabet is a finite letter sequence; the word-tree has
//! the words as vertices, rooted at the empty word, with an edge for each
//! appended letter. A *sentence* is a finite sequence of nonempty words and
//! lives in the sentence-tree, the word-tree over the alphabet of nonempty
//! words. Both trees carry the usual rooted-tree metric
//! `len + len' − 2·(longest common prefix)`, which is all the geometry the
//! rest of the crate consumes.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use crate::Rat;
use thiserror::Error;

/// Requirements on a letter type: value semantics plus a total order so that
/// words can be compared, hashed, and used as map keys.
pub trait Letter: Clone + Eq + Ord + Hash + fmt::Debug + 'static {}
impl<T: Clone + Eq + Ord + Hash + fmt::Debug + 'static> Letter for T {}

/// Letter types with a distinguished "star" letter, used to mark word starts
/// in starred sentences and as the padding letter of [`norm_r`].
pub trait HasStar: Letter {
    fn star() -> Self;
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet must be nonempty and duplicate-free")]
    BadAlphabet,
    #[error("unknown letter {0:?} for this alphabet")]
    UnknownLetter(String),
    #[error("sentences may not contain empty words")]
    EmptyWordInSentence,
    #[error("empty sentence has no average word length")]
    EmptySentence,
    #[error("word index {word} / letter index {letter} out of range")]
    IndexOutOfRange { word: usize, letter: usize },
    #[error("the two words are equal; nothing to discriminate")]
    EqualWords,
    #[error(
        "words are indistinguishable within window {k}: equal final letters and equal \
         final length digits (their tree distance must exceed {k})"
    )]
    NotClose { k: u64 },
    #[error("every word of a starred sentence must begin with the star letter and contain no further star")]
    NotStarred,
}

/// A concrete letter: either one of the two reserved tokens or a symbol of
/// some [`Alphabet`], identified by its index there.
///
/// `Star` is the padding/word-start marker (rendered `*`); `BlackStar` is the
/// anchor letter of interleaved words (rendered `#`). Symbols compare by
/// index, so the derived order is the alphabet's declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tok {
    Star,
    BlackStar,
    Sym(u32),
}

impl HasStar for Tok {
    fn star() -> Self {
        Tok::Star
    }
}

pub const STAR_SPELLING: &str = "*";
pub const BLACK_STAR_SPELLING: &str = "#";

/// An ordered, duplicate-free set of symbol spellings. The reserved spellings
/// `*` and `#` always parse to [`Tok::Star`] and [`Tok::BlackStar`] and may
/// not be declared as symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: BTreeMap<String, u32>,
    /// True when every symbol is a single character, in which case words
    /// parse and render without separators.
    single_char: bool,
}

impl Alphabet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(symbols: I) -> Result<Self, WordError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(WordError::BadAlphabet);
        }
        let mut index = BTreeMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s == STAR_SPELLING || s == BLACK_STAR_SPELLING {
                return Err(WordError::BadAlphabet);
            }
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(WordError::BadAlphabet);
            }
        }
        let single_char = symbols.iter().all(|s| s.chars().count() == 1);
        Ok(Alphabet { symbols, index, single_char })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The declared symbols, in order, as letters.
    pub fn letters(&self) -> impl Iterator<Item = Tok> + '_ {
        (0..self.symbols.len() as u32).map(Tok::Sym)
    }

    pub fn tok(&self, spelling: &str) -> Result<Tok, WordError> {
        match spelling {
            STAR_SPELLING => Ok(Tok::Star),
            BLACK_STAR_SPELLING => Ok(Tok::BlackStar),
            s => self
                .index
                .get(s)
                .map(|&i| Tok::Sym(i))
                .ok_or_else(|| WordError::UnknownLetter(s.to_string())),
        }
    }

    pub fn spelling(&self, tok: Tok) -> &str {
        match tok {
            Tok::Star => STAR_SPELLING,
            Tok::BlackStar => BLACK_STAR_SPELLING,
            Tok::Sym(i) => &self.symbols[i as usize],
        }
    }

    /// Whether `tok` is a declared symbol or reserved token of this alphabet.
    pub fn contains(&self, tok: Tok) -> bool {
        match tok {
            Tok::Star | Tok::BlackStar => true,
            Tok::Sym(i) => (i as usize) < self.symbols.len(),
        }
    }

    /// Parses a word: single-character alphabets read letter-per-character,
    /// multi-character alphabets read dot-separated spellings. The empty
    /// string is the empty word.
    pub fn word(&self, text: &str) -> Result<Word<Tok>, WordError> {
        if text.is_empty() {
            return Ok(Word::empty());
        }
        let toks = if self.single_char {
            text.chars()
                .map(|c| self.tok(&c.to_string()))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            text.split('.').map(|s| self.tok(s)).collect::<Result<Vec<_>, _>>()?
        };
        Ok(Word::from_letters(toks))
    }

    /// Parses a sentence from `|`-separated words, e.g. `"abac|cb"`. The
    /// empty string is the empty sentence.
    pub fn sentence(&self, text: &str) -> Result<Sentence<Tok>, WordError> {
        if text.is_empty() {
            return Ok(Sentence::empty());
        }
        Sentence::new(text.split('|').map(|w| self.word(w)).collect::<Result<Vec<_>, _>>()?)
    }

    pub fn render_word(&self, word: &Word<Tok>) -> String {
        let parts: Vec<&str> = word.letters().iter().map(|&t| self.spelling(t)).collect();
        if self.single_char {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    pub fn render_sentence(&self, sentence: &Sentence<Tok>) -> String {
        sentence
            .words()
            .iter()
            .map(|w| self.render_word(w))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// A finite word. May be empty — the root of the word-tree — except where an
/// operation states otherwise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word<L>(Vec<L>);

impl<L: Letter> Word<L> {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = L>>(letters: I) -> Self {
        Word(letters.into_iter().collect())
    }

    pub fn letters(&self) -> &[L] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&L> {
        self.0.last()
    }

    pub fn push(&mut self, letter: L) {
        self.0.push(letter);
    }

    pub fn reversed(&self) -> Self {
        Word(self.0.iter().rev().cloned().collect())
    }

    /// The final `min(k, len)` letters, in original order.
    pub fn suffix(&self, k: usize) -> Self {
        let start = self.0.len().saturating_sub(k);
        Word(self.0[start..].to_vec())
    }

    /// The first `min(k, len)` letters.
    pub fn prefix(&self, k: usize) -> Self {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl<L: fmt::Debug> fmt::Debug for Word<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", self.0)
    }
}

/// A finite sequence of nonempty words; a vertex of the sentence-tree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence<L>(Vec<Word<L>>);

impl<L: Letter> Sentence<L> {
    pub fn empty() -> Self {
        Sentence(Vec::new())
    }

    pub fn new(words: Vec<Word<L>>) -> Result<Self, WordError> {
        if words.iter().any(Word::is_empty) {
            return Err(WordError::EmptyWordInSentence);
        }
        Ok(Sentence(words))
    }

    pub fn words(&self) -> &[Word<L>] {
        &self.0
    }

    /// Number of words — the height of this vertex in the sentence-tree.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_letters(&self) -> u64 {
        self.0.iter().map(|w| w.len() as u64).sum()
    }

    /// The sentence formed by the first `n` words.
    pub fn prefix(&self, n: usize) -> Self {
        Sentence(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The sentence formed by the words from index `from` on.
    pub fn suffix_words(&self, from: usize) -> Self {
        Sentence(self.0[from.min(self.0.len())..].to_vec())
    }

    pub fn push(&mut self, word: Word<L>) -> Result<(), WordError> {
        if word.is_empty() {
            return Err(WordError::EmptyWordInSentence);
        }
        self.0.push(word);
        Ok(())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut words = self.0.clone();
        words.extend_from_slice(&other.0);
        Sentence(words)
    }
}

impl<L: fmt::Debug> fmt::Debug for Sentence<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sentence{:?}", self.0)
    }
}

/// A sentence whose every word begins with the star letter and contains no
/// further star. The star acts as an unforgeable word-start marker, which is
/// what makes diary output decodable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StarredSentence<L>(Sentence<L>);

impl<L: HasStar> StarredSentence<L> {
    pub fn new(sentence: Sentence<L>) -> Result<Self, WordError> {
        let star = L::star();
        for word in sentence.words() {
            let ok = word.letters().first() == Some(&star)
                && !word.letters()[1..].contains(&star);
            if !ok {
                return Err(WordError::NotStarred);
            }
        }
        Ok(StarredSentence(sentence))
    }

    /// Builds a starred sentence by prefixing a star to each payload word.
    /// Payload words must be nonempty and star-free.
    pub fn from_payload(payload: &Sentence<L>) -> Result<Self, WordError> {
        let star = L::star();
        let mut words = Vec::with_capacity(payload.len());
        for w in payload.words() {
            if w.letters().contains(&star) {
                return Err(WordError::NotStarred);
            }
            let mut letters = Vec::with_capacity(w.len() + 1);
            letters.push(star.clone());
            letters.extend_from_slice(w.letters());
            words.push(Word::from_letters(letters));
        }
        Ok(StarredSentence(Sentence(words)))
    }

    pub fn sentence(&self) -> &Sentence<L> {
        &self.0
    }

    pub fn into_sentence(self) -> Sentence<L> {
        self.0
    }
}

/// The divergence decomposition of a sentence pair: the shared prefix of `p`
/// words and the two tails of `m` and `n` words. The sentence-tree distance
/// is `m + n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceDecomposition<L> {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub shared: Sentence<L>,
    pub tail_a: Sentence<L>,
    pub tail_b: Sentence<L>,
}

fn lcp_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

/// Graph distance in the word-tree: `len + len' − 2·lcp`.
pub fn word_tree_distance<L: Letter>(w: &Word<L>, w2: &Word<L>) -> u64 {
    let lcp = lcp_len(w.letters(), w2.letters());
    (w.len() + w2.len() - 2 * lcp) as u64
}

/// Graph distance in the sentence-tree: `m + n` from the divergence
/// decomposition.
pub fn sentence_tree_distance<L: Letter>(a: &Sentence<L>, b: &Sentence<L>) -> u64 {
    let lcp = lcp_len(a.words(), b.words());
    (a.len() + b.len() - 2 * lcp) as u64
}

pub fn split_at_divergence<L: Letter>(
    a: &Sentence<L>,
    b: &Sentence<L>,
) -> DivergenceDecomposition<L> {
    let p = lcp_len(a.words(), b.words());
    DivergenceDecomposition {
        p,
        m: a.len() - p,
        n: b.len() - p,
        shared: a.prefix(p),
        tail_a: a.suffix_words(p),
        tail_b: b.suffix_words(p),
    }
}

/// Average word length: total letters over word count.
pub fn awl<L: Letter>(a: &Sentence<L>) -> Result<Rat, WordError> {
    if a.is_empty() {
        return Err(WordError::EmptySentence);
    }
    Ok(Rat::new(a.total_letters(), a.len() as u64))
}

/// Average word length with the empty sentence counted as 0, the convention
/// used by tail bounds (an empty tail carries no letters).
pub fn awl_or_zero<L: Letter>(a: &Sentence<L>) -> Rat {
    if a.is_empty() {
        Rat::from_integer(0)
    } else {
        Rat::new(a.total_letters(), a.len() as u64)
    }
}

fn check_index<L: Letter>(
    a: &Sentence<L>,
    word_idx: usize,
    letter_idx: usize,
) -> Result<(), WordError> {
    if word_idx >= a.len() || letter_idx >= a.words()[word_idx].len() {
        return Err(WordError::IndexOutOfRange { word: word_idx, letter: letter_idx });
    }
    Ok(())
}

/// The tail-sentence of the letter at `(word_idx, letter_idx)` (0-based):
/// writing that word as `v·a·w`, the result is `⟨a·w, u_{i+1}, …⟩`.
pub fn tail_sentence<L: Letter>(
    a: &Sentence<L>,
    word_idx: usize,
    letter_idx: usize,
) -> Result<Sentence<L>, WordError> {
    check_index(a, word_idx, letter_idx)?;
    let mut words = Vec::with_capacity(a.len() - word_idx);
    words.push(Word::from_letters(a.words()[word_idx].letters()[letter_idx..].to_vec()));
    words.extend_from_slice(&a.words()[word_idx + 1..]);
    Ok(Sentence(words))
}

/// The head-sentence of the letter at `(word_idx, letter_idx)` (0-based):
/// writing that word as `v·a·w`, the result is `⟨u_1, …, u_{i−1}, v·a⟩`.
pub fn head_sentence<L: Letter>(
    a: &Sentence<L>,
    word_idx: usize,
    letter_idx: usize,
) -> Result<Sentence<L>, WordError> {
    check_index(a, word_idx, letter_idx)?;
    let mut words = a.words()[..word_idx].to_vec();
    words.push(Word::from_letters(a.words()[word_idx].letters()[..=letter_idx].to_vec()));
    Ok(Sentence(words))
}

/// Normalizes `u` to exactly `r` letters: truncates to the first `r`, or pads
/// with the star letter.
pub fn norm_r<L: HasStar>(u: &Word<L>, r: usize) -> Word<L> {
    let mut letters: Vec<L> = u.letters()[..r.min(u.len())].to_vec();
    while letters.len() < r {
        letters.push(L::star());
    }
    Word::from_letters(letters)
}

/// Base-10 digits of `n`, most significant first. `0` has the single digit 0;
/// expansions never carry leading zeros.
pub(crate) fn base10_digits(n: u64) -> Vec<u8> {
    if n == 0 {
        return vec![0];
    }
    let mut digits = Vec::new();
    let mut n = n;
    while n > 0 {
        digits.push((n % 10) as u8);
        n /= 10;
    }
    digits.reverse();
    digits
}

/// Which of the two close-word conclusions holds for a pair within tree
/// distance `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discriminant {
    /// The final `min(k, len)` letters of the two words differ.
    LastLetters,
    /// The final `min(k, digits)` base-10 digits of the two lengths differ.
    LengthDigits,
}

/// Tells two distinct words apart by bounded final data: first by their final
/// `k` letters, then by the final `k` digits of their base-10 lengths. Words
/// within tree distance `k` of each other always differ in one of the two
/// windows; an error therefore means the pair was farther apart than `k`.
pub fn discriminate_close_words<L: Letter>(
    w: &Word<L>,
    w2: &Word<L>,
    k: u64,
) -> Result<Discriminant, WordError> {
    if w == w2 {
        return Err(WordError::EqualWords);
    }
    let k_usize = k.min(usize::MAX as u64) as usize;
    if w.suffix(k_usize) != w2.suffix(k_usize) {
        return Ok(Discriminant::LastLetters);
    }
    let d1 = base10_digits(w.len() as u64);
    let d2 = base10_digits(w2.len() as u64);
    let tail = |d: &[u8]| d[d.len().saturating_sub(k_usize)..].to_vec();
    if tail(&d1) != tail(&d2) {
        return Ok(Discriminant::LengthDigits);
    }
    Err(WordError::NotClose { k })
}
