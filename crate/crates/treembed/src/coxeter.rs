//! The hexagonal right-angled Coxeter group and its two tree coordinates.
//!
//! Six involutive generators `a1 a2 a3 b1 b2 b3`; `a_k` and `b_l` commute
//! exactly when `k ≠ l`, so the commutation graph is a hexagon. Group
//! elements are kept in a canonical form (the lexicographically least
//! reduced word in the declared generator order), which makes equality,
//! hashing, and the word metric cheap. The two *tree coordinates* of an
//! element split a one-sided normal form into blocks after each letter of
//! one family, giving a sentence over the generator alphabet; the geometry
//! of those sentences is what the embedding machinery consumes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::words::{Alphabet, Sentence, Tok, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoxeterError {
    #[error("unknown generator {0:?} (expected a1..a3, b1..b3, or e)")]
    UnknownGenerator(String),
    #[error("generator index {0} out of range 1..=3")]
    BadIndex(u8),
    #[error("ball radius {radius} exceeds the enumeration cap {cap}")]
    RadiusOverCap { radius: u32, cap: u32 },
}

/// Which triple a generator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::A => Family::B,
            Family::B => Family::A,
        }
    }
}

/// A generator `a_k` or `b_k`, `k ∈ {1, 2, 3}`. The derived order is
/// `a1 < a2 < a3 < b1 < b2 < b3`, the order canonical forms minimize
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HexLetter {
    family: Family,
    index: u8,
}

impl HexLetter {
    pub fn new(family: Family, index: u8) -> Result<Self, CoxeterError> {
        if (1..=3).contains(&index) {
            Ok(HexLetter { family, index })
        } else {
            Err(CoxeterError::BadIndex(index))
        }
    }

    pub fn family(self) -> Family {
        self.family
    }

    pub fn index(self) -> u8 {
        self.index
    }

    /// Whether the two generators commute: opposite families and distinct
    /// indices.
    pub fn commutes(self, other: HexLetter) -> bool {
        self.family != other.family && self.index != other.index
    }
}

impl fmt::Display for HexLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::A => 'a',
            Family::B => 'b',
        };
        write!(f, "{fam}{}", self.index)
    }
}

/// All six generators in canonical order.
pub const GENERATORS: [HexLetter; 6] = [
    HexLetter { family: Family::A, index: 1 },
    HexLetter { family: Family::A, index: 2 },
    HexLetter { family: Family::A, index: 3 },
    HexLetter { family: Family::B, index: 1 },
    HexLetter { family: Family::B, index: 2 },
    HexLetter { family: Family::B, index: 3 },
];

/// The generator alphabet as a word/sentence alphabet, with `a1..b3` as
/// symbols 0..6 in canonical order.
pub fn hex_alphabet() -> Arc<Alphabet> {
    static CELL: OnceLock<Arc<Alphabet>> = OnceLock::new();
    CELL.get_or_init(|| {
        Arc::new(
            Alphabet::new(GENERATORS.map(|g| g.to_string()))
                .expect("generator spellings are well-formed"),
        )
    })
    .clone()
}

/// The alphabet symbol of a generator.
pub fn letter_tok(l: HexLetter) -> Tok {
    let fam = match l.family {
        Family::A => 0u32,
        Family::B => 3u32,
    };
    Tok::Sym(fam + (l.index - 1) as u32)
}

/// The generator of an alphabet symbol, if it names one.
pub fn tok_letter(t: Tok) -> Option<HexLetter> {
    match t {
        Tok::Sym(i @ 0..=5) => Some(GENERATORS[i as usize]),
        _ => None,
    }
}

/// Rewrites a word to a geodesic representative of the same element: scan
/// left to right, and let each letter cancel against an equal earlier letter
/// when everything between them commutes with it.
pub fn reduce(letters: &[HexLetter]) -> Vec<HexLetter> {
    let mut out: Vec<HexLetter> = Vec::with_capacity(letters.len());
    'next: for &x in letters {
        let mut t = out.len();
        while t > 0 {
            let y = out[t - 1];
            if y == x {
                out.remove(t - 1);
                continue 'next;
            }
            if !y.commutes(x) {
                break;
            }
            t -= 1;
        }
        out.push(x);
    }
    out
}

/// The lexicographically least word obtainable from a reduced word by
/// commuting adjacent letters: repeatedly emit the least letter whose
/// earlier letters all commute with it.
fn lex_least_form(mut w: Vec<HexLetter>) -> Vec<HexLetter> {
    let mut out = Vec::with_capacity(w.len());
    while !w.is_empty() {
        let mut best = (w[0], 0usize);
        for (i, &x) in w.iter().enumerate().skip(1) {
            if x < best.0 && w[..i].iter().all(|&y| y.commutes(x)) {
                best = (x, i);
            }
        }
        w.remove(best.1);
        out.push(best.0);
    }
    out
}

/// A group element, stored as the canonical (reduced, lexicographically
/// least) word in its generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    word: Vec<HexLetter>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { word: Vec::new() }
    }

    /// The element spelled by an arbitrary word in the generators.
    pub fn from_word(letters: &[HexLetter]) -> Self {
        GroupElement { word: lex_least_form(reduce(letters)) }
    }

    /// The canonical geodesic spelling.
    pub fn letters(&self) -> &[HexLetter] {
        &self.word
    }

    /// Word length — the distance from the identity.
    pub fn len(&self) -> u64 {
        self.word.len() as u64
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut letters = self.word.clone();
        letters.extend_from_slice(&other.word);
        GroupElement::from_word(&letters)
    }

    pub fn mul_gen(&self, g: HexLetter) -> GroupElement {
        let mut letters = self.word.clone();
        letters.push(g);
        GroupElement::from_word(&letters)
    }

    /// The inverse: generators are involutions, so reverse the word.
    pub fn inverse(&self) -> GroupElement {
        let reversed: Vec<HexLetter> = self.word.iter().rev().copied().collect();
        GroupElement::from_word(&reversed)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.word.iter().map(HexLetter::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl FromStr for GroupElement {
    type Err = CoxeterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "e" {
            return Ok(GroupElement::identity());
        }
        let mut letters = Vec::new();
        for part in s.split('.') {
            let bytes = part.as_bytes();
            let ok = bytes.len() == 2
                && (bytes[0] == b'a' || bytes[0] == b'b')
                && (b'1'..=b'3').contains(&bytes[1]);
            if !ok {
                return Err(CoxeterError::UnknownGenerator(part.to_string()));
            }
            let family = if bytes[0] == b'a' { Family::A } else { Family::B };
            letters.push(HexLetter { family, index: bytes[1] - b'0' });
        }
        Ok(GroupElement::from_word(&letters))
    }
}

/// Distance in the word metric: the length of `g⁻¹h`.
pub fn word_metric(g: &GroupElement, h: &GroupElement) -> u64 {
    g.inverse().mul(h).len()
}

/// Default cap on ball enumeration radii; beyond it the ball sizes grow into
/// the tens of millions.
pub const DEFAULT_BALL_CAP: u32 = 12;

/// All elements of word length ≤ `radius`, ordered by length and then
/// canonically within each length. Errors above [`DEFAULT_BALL_CAP`]; use
/// [`ball_with_cap`] to raise the cap deliberately.
pub fn ball(radius: u32) -> Result<Vec<GroupElement>, CoxeterError> {
    ball_with_cap(radius, DEFAULT_BALL_CAP)
}

pub fn ball_with_cap(radius: u32, cap: u32) -> Result<Vec<GroupElement>, CoxeterError> {
    if radius > cap {
        return Err(CoxeterError::RadiusOverCap { radius, cap });
    }
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut out = Vec::new();
    let mut layer = vec![GroupElement::identity()];
    seen.insert(GroupElement::identity());
    out.extend(layer.iter().cloned());
    for _ in 0..radius {
        let mut next = Vec::new();
        for g in &layer {
            for s in GENERATORS {
                let h = g.mul_gen(s);
                if h.len() == g.len() + 1 && seen.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        next.sort_unstable();
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

fn one_sided_rep(g: &GroupElement, left: Family) -> Vec<HexLetter> {
    let mut w = g.word.clone();
    loop {
        let mut changed = false;
        for i in 0..w.len().saturating_sub(1) {
            if w[i].family != left && w[i + 1].family == left && w[i].commutes(w[i + 1]) {
                w.swap(i, i + 1);
                changed = true;
            }
        }
        if !changed {
            return w;
        }
    }
}

/// The A-left representative: the canonical word rewritten so that no
/// A-generator can commute further left. Fixed under the rewriting, and a
/// geodesic spelling of the same element.
pub fn a_left_rep(g: &GroupElement) -> Vec<HexLetter> {
    one_sided_rep(g, Family::A)
}

/// The B-left representative, symmetrically.
pub fn b_left_rep(g: &GroupElement) -> Vec<HexLetter> {
    one_sided_rep(g, Family::B)
}

fn coordinate(rep: &[HexLetter], split_after: Family) -> Sentence<Tok> {
    let mut words = Vec::new();
    let mut cur: Vec<Tok> = Vec::new();
    for &x in rep {
        cur.push(letter_tok(x));
        if x.family == split_after {
            words.push(Word::from_letters(std::mem::take(&mut cur)));
        }
    }
    // A trailing block with no letter of the splitting family is dropped.
    Sentence::new(words).expect("each block ends with its splitting letter")
}

/// The A-coordinate of an element: its A-left representative cut after each
/// A-generator, one sentence word per block; a trailing all-B block is
/// dropped.
pub fn f_a(g: &GroupElement) -> Sentence<Tok> {
    coordinate(&a_left_rep(g), Family::A)
}

/// The B-coordinate, symmetrically.
pub fn f_b(g: &GroupElement) -> Sentence<Tok> {
    coordinate(&b_left_rep(g), Family::B)
}
