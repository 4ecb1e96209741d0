//! The end-to-end embedding of the hexagonal Coxeter group into a product
//! of two bounded-valence trees, with distortion reporting.
//!
//! An element maps to its two tree coordinates (sentences), and each
//! coordinate through the standard combined diary into the codomain tree.
//! The coordinate pair is an exact isometry for the summed sentence-tree
//! metric; the diary stage is 1-Lipschitz and, on pairs at group distance
//! ≥ 12, loses at most a factor of `2M` with `M = 64` — certified per pair
//! by one of three observable mechanisms (height escape, a finite-statistic
//! witness, or a tail-controlled linear witness).

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coxeter::{f_a, f_b, word_metric, GroupElement};
use crate::criteria::{check_leo, check_virgo};
use crate::diary::{
    pair_diaries, upsilon_diary, virgo_diary, virgo_diary_with_kappa, CombinedDiary, Stacked,
    VirgoDiaryParams,
};
use crate::stats::{
    base10_length_linear, last_letter, trunc_linear, FiniteStatistic, LinearStatistic,
    StatValue,
};
use crate::words::{sentence_tree_distance, split_at_divergence, word_tree_distance, Word};
use crate::{coxeter::hex_alphabet, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmbedError {
    #[error("distortion reports need at least one pair")]
    EmptySample,
}

/// The standard parameter set of the hexagonal embedding: one finite
/// statistic (the last letter), two linear statistics (reversed truncation
/// and length digits, both with prefactor 12), offset allowances 2, tail
/// bound 18, length fraction 1.
#[derive(Debug, Clone)]
pub struct HexParams {
    pub s_fin: Vec<FiniteStatistic>,
    pub s_lin: Vec<LinearStatistic>,
    pub j_fin: u64,
    pub j_lin: u64,
    pub n_bound: Rat,
    pub eps: Rat,
}

impl HexParams {
    pub fn standard() -> Self {
        HexParams {
            s_fin: vec![last_letter(hex_alphabet())],
            s_lin: vec![trunc_linear(12), base10_length_linear(12)],
            j_fin: 2,
            j_lin: 2,
            n_bound: Rat::from_integer(18),
            eps: Rat::from_integer(1),
        }
    }
}

/// One output letter of the combined diary: the finite product entry paired
/// with the interleaved capacity chapter.
pub type HexEntry = (StatValue, Word<Stacked>);

/// The image of a group element: one diary word per tree coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedElement {
    pub a: Word<HexEntry>,
    pub b: Word<HexEntry>,
}

/// Distance in the product of the two codomain trees (ℓ¹).
pub fn embedded_distance(x: &EmbeddedElement, y: &EmbeddedElement) -> u64 {
    word_tree_distance(&x.a, &y.a) + word_tree_distance(&x.b, &y.b)
}

/// Which mechanism certifies the diary-stage lower bound for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriterionUsed {
    /// The dominant coordinate's tails differ in height by ≥ a third of
    /// their sum, so height preservation alone gives the bound.
    HeightEscape,
    /// The finite statistics separate near the divergence point.
    Leo,
    /// The linear statistics separate with tail control.
    Virgo,
}

impl CriterionUsed {
    pub fn label(self) -> &'static str {
        match self {
            CriterionUsed::HeightEscape => "height-escape",
            CriterionUsed::Leo => "leo",
            CriterionUsed::Virgo => "virgo",
        }
    }
}

/// The embedding pipeline: tree coordinates composed with the combined
/// diary, plus the criterion dispatch used for reporting.
pub struct HexEmbedder {
    params: HexParams,
    combined: CombinedDiary,
}

impl HexEmbedder {
    pub fn standard() -> Self {
        Self::with_params(HexParams::standard(), None)
    }

    /// Builds the pipeline, optionally overriding the derived diary
    /// capacity (the guarantee only holds for the derived value). The
    /// diary pairs the finite product diary with the tail-controlled
    /// linear diary, both at discount 0.
    pub fn with_params(params: HexParams, kappa_override: Option<u64>) -> Self {
        let zero = Rat::from_integer(0);
        let finite = upsilon_diary(&params.s_fin, zero, params.j_fin)
            .expect("standard finite parameters are valid");
        let linear = match kappa_override {
            None => virgo_diary(&params.s_lin, zero, params.j_lin, params.n_bound, params.eps),
            Some(k) => virgo_diary_with_kappa(
                &params.s_lin,
                zero,
                params.j_lin,
                params.n_bound,
                params.eps,
                k,
            ),
        }
        .expect("standard linear parameters are valid");
        let combined = CombinedDiary {
            diary: pair_diaries(&finite, &linear.diary),
            params: linear.params,
        };
        HexEmbedder { params, combined }
    }

    /// The linear-side diary parameters (capacity, padding factor, bounds).
    pub fn diary_params(&self) -> &VirgoDiaryParams {
        &self.combined.params
    }

    /// The distortion guarantee constant M.
    pub fn guarantee(&self) -> Rat {
        self.combined.diary.guarantee().expect("combined diaries carry a guarantee")
    }

    pub fn embed(&self, g: &GroupElement) -> EmbeddedElement {
        EmbeddedElement {
            a: self.combined.diary.apply(&f_a(g)),
            b: self.combined.diary.apply(&f_b(g)),
        }
    }

    /// Reports which mechanism certifies the pair on its dominant
    /// coordinate, or `None` when none applies (possible only below the
    /// d_G ≥ 12 regime the guarantee quantifies over).
    pub fn dispatch(&self, g: &GroupElement, h: &GroupElement) -> Option<CriterionUsed> {
        if g == h {
            return None;
        }
        let (ga, gb) = (f_a(g), f_b(g));
        let (ha, hb) = (f_a(h), f_b(h));
        let da = sentence_tree_distance(&ga, &ha);
        let db = sentence_tree_distance(&gb, &hb);
        let (x, y) = if da >= db { (&ga, &ha) } else { (&gb, &hb) };
        if x == y {
            // The dominant coordinate cannot be trivial unless both are.
            return None;
        }
        let dec = split_at_divergence(x, y);
        let (m, n) = (dec.m as u64, dec.n as u64);
        let diff = m.max(n) - m.min(n);
        if 3 * diff >= m + n {
            return Some(CriterionUsed::HeightEscape);
        }
        let leo = check_leo(x, y, &self.params.s_fin, self.params.j_fin)
            .expect("sentences differ and J ≥ 1");
        if leo.is_some() {
            return Some(CriterionUsed::Leo);
        }
        let virgo = check_virgo(
            x,
            y,
            &self.params.s_lin,
            Rat::from_integer(0),
            self.params.j_lin,
            self.params.n_bound,
            self.params.eps,
        )
        .expect("|m−n| < (m+n)/3 forces min(m,n) ≥ 1");
        virgo.map(|_| CriterionUsed::Virgo)
    }
}

/// How to pick pairs for a distortion report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    /// All unordered pairs of distinct elements.
    Exhaustive,
    /// `count` seeded uniform draws of unordered distinct pairs.
    Sample { count: usize, seed: u64 },
}

/// Exhaustive when the square of the element count stays within `limit`,
/// sampling otherwise.
pub fn auto_selection(n_elements: usize, limit: usize, count: usize, seed: u64) -> PairSelection {
    if n_elements.saturating_mul(n_elements) <= limit {
        PairSelection::Exhaustive
    } else {
        PairSelection::Sample { count, seed }
    }
}

/// One compared pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairRow {
    pub g: String,
    pub h: String,
    pub d_g: u64,
    pub d_f: u64,
    pub d_df: u64,
    pub criterion: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionSummary {
    /// Guarantee constant M, as an exact rational string.
    pub m: String,
    /// Linear-side diary capacity κ.
    pub kappa: u64,
    pub radius: u32,
    pub pair_mode: String,
    pub seed: Option<u64>,
    pub pairs: usize,
    /// max d_G/d_DF over pairs with d_G ≥ 12, exact.
    pub max_distortion: Option<String>,
    /// Rows per certifying mechanism ("small" collects d_G < 12 pairs no
    /// mechanism certifies).
    pub counts: BTreeMap<String, usize>,
    /// d_F = d_G on every pair.
    pub coordinates_exact: bool,
    /// d_DF ≤ d_G on every pair.
    pub lipschitz_ok: bool,
    /// d_DF ≥ d_G/(2M) on every pair with d_G ≥ 12.
    pub lower_bound_ok: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub rows: Vec<PairRow>,
    pub summary: DistortionSummary,
}

/// Renders a nonnegative rational, as an integer when it is one.
pub fn rat_string(r: Rat) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn select_pairs(n: usize, selection: PairSelection) -> Vec<(usize, usize)> {
    match selection {
        PairSelection::Exhaustive => {
            let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j));
                }
            }
            pairs
        }
        PairSelection::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pairs = Vec::with_capacity(count);
            while pairs.len() < count {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
            pairs
        }
    }
}

/// Embeds every element once, measures every selected pair, and aggregates
/// the verification flags; `radius` is recorded verbatim in the summary.
pub fn distortion_report(
    embedder: &HexEmbedder,
    elements: &[GroupElement],
    selection: PairSelection,
    radius: u32,
) -> Result<DistortionReport, EmbedError> {
    let pairs = select_pairs(elements.len(), selection);
    if pairs.is_empty() {
        return Err(EmbedError::EmptySample);
    }
    let images: HashMap<&GroupElement, EmbeddedElement> = elements
        .par_iter()
        .map(|g| (g, embedder.embed(g)))
        .collect();
    let m = embedder.guarantee();
    let two_m = Rat::from_integer(2) * m;
    let rows: Vec<PairRow> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (g, h) = (&elements[i], &elements[j]);
            let d_g = word_metric(g, h);
            let d_f = sentence_tree_distance(&f_a(g), &f_a(h))
                + sentence_tree_distance(&f_b(g), &f_b(h));
            let d_df = embedded_distance(&images[g], &images[h]);
            let criterion = match embedder.dispatch(g, h) {
                Some(c) => c.label().to_string(),
                None if d_g < 12 => "small".to_string(),
                None => "none".to_string(),
            };
            PairRow { g: g.to_string(), h: h.to_string(), d_g, d_f, d_df, criterion }
        })
        .collect();

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut coordinates_exact = true;
    let mut lipschitz_ok = true;
    let mut lower_bound_ok = true;
    let mut max_distortion: Option<Rat> = None;
    for row in &rows {
        *counts.entry(row.criterion.clone()).or_insert(0) += 1;
        if row.d_f != row.d_g {
            coordinates_exact = false;
            violations.push(format!(
                "coordinate distance {} differs from group distance {} on ({}, {})",
                row.d_f, row.d_g, row.g, row.h
            ));
        }
        if row.d_df > row.d_g {
            lipschitz_ok = false;
            violations.push(format!(
                "diary distance {} exceeds group distance {} on ({}, {})",
                row.d_df, row.d_g, row.g, row.h
            ));
        }
        if row.d_g >= 12 {
            // d_DF ≥ d_G/(2M)  ⇔  d_DF · 2M ≥ d_G.
            if Rat::from_integer(row.d_df) * two_m < Rat::from_integer(row.d_g) {
                lower_bound_ok = false;
                violations.push(format!(
                    "diary distance {} below {}/(2·{}) on ({}, {})",
                    row.d_df,
                    row.d_g,
                    rat_string(m),
                    row.g,
                    row.h
                ));
            }
            if row.criterion == "none" {
                violations.push(format!(
                    "no mechanism certifies ({}, {}) at group distance {}",
                    row.g, row.h, row.d_g
                ));
            }
            if row.d_df > 0 {
                let ratio = Rat::new(row.d_g, row.d_df);
                max_distortion =
                    Some(max_distortion.map_or(ratio, |best| best.max(ratio)));
            }
        }
    }
    let (pair_mode, seed) = match selection {
        PairSelection::Exhaustive => ("exhaustive".to_string(), None),
        PairSelection::Sample { seed, .. } => ("sample".to_string(), Some(seed)),
    };
    let summary = DistortionSummary {
        m: rat_string(m),
        kappa: embedder.diary_params().kappa,
        radius,
        pair_mode,
        seed,
        pairs: rows.len(),
        max_distortion: max_distortion.map(rat_string),
        counts,
        coordinates_exact,
        lipschitz_ok,
        lower_bound_ok,
        violations,
    };
    Ok(DistortionReport { rows, summary })
}
