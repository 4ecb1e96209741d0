//! End-to-end acceptance gate for the workspace.
//!
//! One test per criterion, each emitting a single `criterion NN …: PASS`
//! line (visible with `--nocapture`; the harness's own per-test line is the
//! pass/fail verdict). Every check is exact — integer or rational
//! arithmetic throughout — and every randomised suite runs from a fixed
//! seed, so the gate is deterministic.

use std::collections::{HashMap, HashSet};
use std::process::Command;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use treembed::coxeter::{ball, f_a, f_b, word_metric, GroupElement};
use treembed::criteria::{check_leo, check_taurus, check_virgo};
use treembed::diary::{
    alice_diary, taurus_diary, upsilon_diary, virgo_diary, PageRef,
};
use treembed::embed::{
    auto_selection, distortion_report, embedded_distance, EmbeddedElement, HexEmbedder,
    PairSelection,
};
use treembed::projection::{
    build_complexes, free_product_instance, tree_segments_instance, verify_axioms,
    verify_properties, verify_complexes, VerifyOptions,
};
use treembed::stats::{base10_length_linear, last_letter, trunc_linear};
use treembed::words::{
    awl, sentence_tree_distance, tail_sentence, word_tree_distance, StarredSentence,
};
use treembed::{Alphabet, Rat, Sentence, Tok, Word};

fn pass(number: u32, name: &str) {
    println!("criterion {number:02} ({name}): PASS");
}

fn rat(n: u64) -> Rat {
    Rat::from_integer(n)
}

/// Ceiling of a nonnegative rational as an integer.
fn rat_ceil(r: Rat) -> u64 {
    r.ceil().to_integer()
}

// ---------------------------------------------------------------------------
// Criterion 1: the coordinate pair is an exact isometry onto its image —
// d_G(g, h) = d(F_A g, F_A h) + d(F_B g, F_B h), over all of ball(5) and a
// 10^4 sample of pairs from ball(8).
// ---------------------------------------------------------------------------

fn coordinate_distance(g: &GroupElement, h: &GroupElement) -> u64 {
    sentence_tree_distance(&f_a(g), &f_a(h)) + sentence_tree_distance(&f_b(g), &f_b(h))
}

#[test]
fn acceptance_01_coordinate_exactness() {
    let b5 = ball(5).expect("ball(5)");
    assert_eq!(b5.len(), 1711);
    let coords: Vec<(Sentence<Tok>, Sentence<Tok>)> =
        b5.par_iter().map(|g| (f_a(g), f_b(g))).collect();
    b5.par_iter().enumerate().for_each(|(i, g)| {
        for j in (i + 1)..b5.len() {
            let h = &b5[j];
            let d_g = word_metric(g, h);
            let d_f = sentence_tree_distance(&coords[i].0, &coords[j].0)
                + sentence_tree_distance(&coords[i].1, &coords[j].1);
            assert_eq!(d_f, d_g, "coordinate distance mismatch for {g} vs {h}");
        }
    });

    let b8 = ball(8).expect("ball(8)");
    assert_eq!(b8.len(), 89041);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0001);
    let pairs: Vec<(usize, usize)> = (0..10_000)
        .map(|_| loop {
            let i = rng.gen_range(0..b8.len());
            let j = rng.gen_range(0..b8.len());
            if i != j {
                return (i.min(j), i.max(j));
            }
        })
        .collect();
    let needed: HashSet<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    let cache: HashMap<usize, (Sentence<Tok>, Sentence<Tok>)> = needed
        .into_par_iter()
        .map(|i| (i, (f_a(&b8[i]), f_b(&b8[i]))))
        .collect();
    pairs.par_iter().for_each(|&(i, j)| {
        let d_g = word_metric(&b8[i], &b8[j]);
        let (ai, bi) = &cache[&i];
        let (aj, bj) = &cache[&j];
        let d_f = sentence_tree_distance(ai, aj) + sentence_tree_distance(bi, bj);
        assert_eq!(d_f, d_g, "coordinate distance mismatch for {} vs {}", b8[i], b8[j]);
    });

    pass(1, "coordinate exactness on ball(5) and sampled ball(8)");
}

// ---------------------------------------------------------------------------
// Criterion 2: the tree-pair embedding is 1-Lipschitz and, for d_G ≥ 12,
// distorts by at most 2M = 128: d_DF ≤ d_G and 2M·d_DF ≥ d_G.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_02_distortion_bounds() {
    let embedder = HexEmbedder::standard();
    let m = embedder.guarantee();
    assert_eq!(m, rat(64));
    let two_m = 128u64;

    let check = |g: &GroupElement,
                 h: &GroupElement,
                 eg: &EmbeddedElement,
                 eh: &EmbeddedElement|
     -> bool {
        let d_g = word_metric(g, h);
        let d_df = embedded_distance(eg, eh);
        assert!(d_df <= d_g, "embedding not 1-Lipschitz on {g} vs {h}");
        if d_g >= 12 {
            assert!(
                two_m * d_df >= d_g,
                "lower distortion bound failed on {g} vs {h}: d_G={d_g}, d_DF={d_df}"
            );
            true
        } else {
            false
        }
    };

    let b5 = ball(5).expect("ball(5)");
    let images5: Vec<EmbeddedElement> = b5.par_iter().map(|g| embedder.embed(g)).collect();
    b5.par_iter().enumerate().for_each(|(i, g)| {
        for j in (i + 1)..b5.len() {
            check(g, &b5[j], &images5[i], &images5[j]);
        }
    });

    let b8 = ball(8).expect("ball(8)");
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0001);
    let pairs: Vec<(usize, usize)> = (0..10_000)
        .map(|_| loop {
            let i = rng.gen_range(0..b8.len());
            let j = rng.gen_range(0..b8.len());
            if i != j {
                return (i.min(j), i.max(j));
            }
        })
        .collect();
    let needed: HashSet<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    let cache: HashMap<usize, EmbeddedElement> = needed
        .into_par_iter()
        .map(|i| (i, embedder.embed(&b8[i])))
        .collect();
    let exercised: usize = pairs
        .par_iter()
        .map(|&(i, j)| usize::from(check(&b8[i], &b8[j], &cache[&i], &cache[&j])))
        .sum();
    assert!(exercised > 0, "sample never reached d_G >= 12; bound untested");

    pass(2, "distortion within [d_G/128, d_G] on ball(5) and sampled ball(8)");
}

// ---------------------------------------------------------------------------
// Criterion 3: bounded-memory recorder goldens, including full provenance.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_recorder_goldens() {
    let alphabet = Alphabet::new(["a", "b", "c"]).expect("alphabet");
    let render = |words: &[Word<Tok>]| -> Vec<String> {
        words.iter().map(|w| alphabet.render_word(w)).collect()
    };

    // Two days, capacity 3: the remembered-newest-first chapters, and the
    // day-1 opening event surfacing as the oldest page of chapter 2.
    let two = alice_diary(3, &alphabet.sentence("abac|cb").unwrap()).unwrap();
    assert_eq!(render(&two.chapters), ["cab", "bca"]);
    assert_eq!(render(&two.leftovers), ["a", ""]);
    assert_eq!(
        two.provenance.is_recorded(1, 1),
        Some(PageRef { chapter: 2, page: 3 })
    );
    assert!(two.provenance.unrecorded().is_empty());

    // Five days, capacity 3.
    let five = alice_diary(3, &alphabet.sentence("abac|cb|accc|bcbc|a").unwrap()).unwrap();
    assert_eq!(render(&five.chapters), ["cab", "bca", "ccc", "cbc", "aba"]);
    assert_eq!(render(&five.leftovers), ["a", "", "a", "ab", ""]);
    assert_eq!(
        five.provenance.is_recorded(3, 1),
        Some(PageRef { chapter: 5, page: 3 })
    );
    assert_eq!(
        five.provenance.is_recorded(4, 1),
        Some(PageRef { chapter: 5, page: 2 })
    );
    assert!(five.provenance.unrecorded().is_empty());

    // Capacity 1 forgets: the day-1 opening event is never written.
    let tight = alice_diary(1, &alphabet.sentence("ab|c").unwrap()).unwrap();
    assert_eq!(render(&tight.chapters), ["b", "c"]);
    let lost = tight.provenance.unrecorded();
    assert_eq!(lost.len(), 1);
    assert_eq!((lost[0].day, lost[0].pos), (1, 1));
    assert_eq!(tight.provenance.is_recorded(1, 1), None);

    // Single day: the chapter is the reversed suffix.
    let one = alice_diary(3, &alphabet.sentence("abc").unwrap()).unwrap();
    assert_eq!(render(&one.chapters), ["cba"]);

    pass(3, "recorder goldens with provenance");
}

// ---------------------------------------------------------------------------
// Criterion 4: recording guarantee — if κ is at least the average word
// length of a letter's tail-sentence, the recorder writes that letter down.
// 10^4 randomised (sentence, event) cases.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_04_recording_guarantee() {
    let alphabet = Alphabet::new(["a", "b", "c"]).expect("alphabet");
    let toks: Vec<Tok> = ["a", "b", "c"].iter().map(|s| alphabet.tok(s).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0004);

    for case in 0..10_000 {
        let days = rng.gen_range(1..=6usize);
        let words: Vec<Word<Tok>> = (0..days)
            .map(|_| {
                let len = rng.gen_range(1..=6usize);
                Word::from_letters((0..len).map(|_| toks[rng.gen_range(0..3)]))
            })
            .collect();
        let sentence = Sentence::new(words).unwrap();
        let day = rng.gen_range(0..days);
        let pos = rng.gen_range(0..sentence.words()[day].len());

        let tail = tail_sentence(&sentence, day, pos).unwrap();
        let n = awl(&tail).unwrap();
        let kappa = (rat_ceil(n) + rng.gen_range(0..3u64)) as usize;

        let trace = alice_diary(kappa, &sentence).unwrap();
        assert!(
            trace.provenance.is_recorded(day + 1, pos + 1).is_some(),
            "case {case}: event (day {}, pos {}) with tail AWL {n} unrecorded at κ={kappa}",
            day + 1,
            pos + 1,
        );
    }

    pass(4, "recording guarantee on 10^4 randomised events");
}

// ---------------------------------------------------------------------------
// Criterion 5: recorder rigidity, exhaustively. Over every starred sentence
// with at most 4 days, day length at most 4 and a 2-letter payload alphabet,
// any two sentences with equal capacity-2 diaries must (a) agree on every
// day whose word fits within the capacity, and (b) record letters sitting at
// equal distance from their word ends on the same page of the same chapter.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_recorder_rigidity_exhaustive() {
    const KAPPA: usize = 2;
    let payload = [Tok::Sym(0), Tok::Sym(1)];

    // Every starred word of length ≤ 4: a star followed by 0..=3 payload letters.
    let mut day_words: Vec<Word<Tok>> = Vec::new();
    for len in 0..=3usize {
        for mask in 0..(1u32 << len) {
            let mut letters = vec![Tok::Star];
            for bit in 0..len {
                letters.push(payload[((mask >> bit) & 1) as usize]);
            }
            day_words.push(Word::from_letters(letters));
        }
    }
    assert_eq!(day_words.len(), 15);

    // Every starred sentence with 1..=4 such days.
    let mut sentences: Vec<Sentence<Tok>> = Vec::new();
    let mut stack: Vec<Word<Tok>> = Vec::new();
    fn extend(
        day_words: &[Word<Tok>],
        stack: &mut Vec<Word<Tok>>,
        out: &mut Vec<Sentence<Tok>>,
    ) {
        if !stack.is_empty() {
            out.push(Sentence::new(stack.clone()).unwrap());
        }
        if stack.len() == 4 {
            return;
        }
        for w in day_words {
            stack.push(w.clone());
            extend(day_words, stack, out);
            stack.pop();
        }
    }
    extend(&day_words, &mut stack, &mut sentences);
    assert_eq!(sentences.len(), 15 + 15 * 15 + 15 * 15 * 15 + 15 * 15 * 15 * 15);
    for s in &sentences {
        StarredSentence::new(s.clone()).expect("enumerated sentence is starred");
    }

    // Bucket by diary output.
    let traces: Vec<_> = sentences
        .par_iter()
        .map(|s| alice_diary(KAPPA, s).unwrap())
        .collect();
    let mut buckets: HashMap<Vec<Vec<Tok>>, Vec<usize>> = HashMap::new();
    for (idx, trace) in traces.iter().enumerate() {
        let key: Vec<Vec<Tok>> =
            trace.chapters.iter().map(|w| w.letters().to_vec()).collect();
        buckets.entry(key).or_default().push(idx);
    }

    let mut pairs_checked = 0u64;
    let mut page_matches = 0u64;
    for members in buckets.values() {
        for (s, &x) in members.iter().enumerate() {
            for &y in &members[s + 1..] {
                pairs_checked += 1;
                let (sa, sb) = (&sentences[x], &sentences[y]);
                let (ta, tb) = (&traces[x], &traces[y]);
                assert_eq!(sa.len(), sb.len(), "equal diaries from unequal day counts");

                for day in 0..sa.len() {
                    let (wa, wb) = (&sa.words()[day], &sb.words()[day]);
                    // (a) Short days are preserved verbatim.
                    if wa.len().min(wb.len()) <= KAPPA {
                        assert_eq!(
                            wa, wb,
                            "day {} fits capacity yet differs between {sa:?} and {sb:?}",
                            day + 1
                        );
                    }
                    // (b) Recorded letters at equal distance from their word
                    // ends share a page.
                    for pa in 0..wa.len() {
                        let dist = wa.len() - 1 - pa;
                        if dist >= wb.len() {
                            continue;
                        }
                        let pb = wb.len() - 1 - dist;
                        let ra = ta.provenance.is_recorded(day + 1, pa + 1);
                        let rb = tb.provenance.is_recorded(day + 1, pb + 1);
                        if let (Some(page_a), Some(page_b)) = (ra, rb) {
                            page_matches += 1;
                            assert_eq!(
                                page_a, page_b,
                                "recorded pages diverge for {sa:?} vs {sb:?} at day {}",
                                day + 1
                            );
                            assert!(page_a.chapter >= day + 1, "page written before its day");
                            assert_eq!(
                                wa.letters()[pa],
                                wb.letters()[pb],
                                "same page holds different letters"
                            );
                        }
                    }
                }
            }
        }
    }
    assert!(pairs_checked > 0 && page_matches > 0, "rigidity suite was vacuous");

    pass(5, "recorder rigidity over all 54240 starred sentences");
}

// ---------------------------------------------------------------------------
// Criterion 6: diary separation — 10^3 constructed sentence pairs carrying a
// discriminating letter pair in their divergent parts, with capacity chosen
// from the tail average word lengths; the diaries must stay at distance at
// least d(α, β) − 2j − 2i.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_06_diary_separation() {
    let toks = [Tok::Sym(0), Tok::Sym(1), Tok::Sym(2)];
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0006);

    for case in 0..1_000 {
        let p = rng.gen_range(0..=2usize);
        let m = rng.gen_range(1..=4usize);
        let n = rng.gen_range(1..=4usize);
        let j = rng.gen_range(1..=m.min(n));

        let word = |len: usize, rng: &mut ChaCha8Rng| -> Vec<Tok> {
            (0..len).map(|_| toks[rng.gen_range(0..3)]).collect()
        };
        let prefix: Vec<Vec<Tok>> = (0..p)
            .map(|_| {
                let len = rng.gen_range(1..=3usize);
                word(len, &mut rng)
            })
            .collect();
        let mut tail_a: Vec<Vec<Tok>> = (0..m)
            .map(|_| {
                let len = rng.gen_range(1..=3usize);
                word(len, &mut rng)
            })
            .collect();
        let mut tail_b: Vec<Vec<Tok>> = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=3usize);
                word(len, &mut rng)
            })
            .collect();

        // Plant distinct letters in day p+j at equal distance from the ends.
        let (la, lb) = (tail_a[j - 1].len(), tail_b[j - 1].len());
        let dist = rng.gen_range(0..la.min(lb));
        tail_a[j - 1][la - 1 - dist] = toks[0];
        tail_b[j - 1][lb - 1 - dist] = toks[1];
        // The sentences must diverge at day p+1.
        if j > 1 && tail_a[0] == tail_b[0] {
            tail_a[0][0] = toks[0];
            tail_b[0][0] = toks[1];
        }

        let build = |tail: &[Vec<Tok>]| -> StarredSentence<Tok> {
            let words: Vec<Word<Tok>> = prefix
                .iter()
                .chain(tail.iter())
                .map(|w| Word::from_letters(w.iter().copied()))
                .collect();
            StarredSentence::from_payload(&Sentence::new(words).unwrap()).unwrap()
        };
        let alpha = build(&tail_a);
        let beta = build(&tail_b);

        // Tail average word lengths of the planted letters; the letter sits
        // one position later in the starred word than in its payload.
        let n_a = awl(&tail_sentence(alpha.sentence(), p + j - 1, la - dist).unwrap()).unwrap();
        let n_b = awl(&tail_sentence(beta.sentence(), p + j - 1, lb - dist).unwrap()).unwrap();

        let i = rng.gen_range(0..=(m.min(n) - j));
        let bound_a = n_a * rat((m - j + 1) as u64) / rat((i + 1) as u64);
        let bound_b = n_b * rat((n - j + 1) as u64) / rat((i + 1) as u64);
        let kappa = rat_ceil(bound_a.max(bound_b)) as usize;

        let diary_a = alice_diary(kappa, alpha.sentence()).unwrap();
        let diary_b = alice_diary(kappa, beta.sentence()).unwrap();
        let d_diary = sentence_tree_distance(
            &Sentence::new(diary_a.chapters).unwrap(),
            &Sentence::new(diary_b.chapters).unwrap(),
        );
        let d_orig = sentence_tree_distance(alpha.sentence(), beta.sentence());
        assert!(
            d_diary + 2 * (j as u64) + 2 * (i as u64) >= d_orig,
            "case {case}: diary distance {d_diary} under floor {d_orig} − 2·{j} − 2·{i}"
        );
    }

    pass(6, "diary separation on 10^3 constructed pairs");
}

// ---------------------------------------------------------------------------
// Criterion 7: criterion/diary compatibility — every pair certified by a
// separation criterion is separated by the matching diary with its declared
// guarantee M: M · d_Ω(Dα, Dβ) ≥ d_W(α, β).
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_criterion_diary_guarantees() {
    let alphabet = Arc::new(Alphabet::new(["a", "b", "c"]).expect("alphabet"));
    let toks: Vec<Tok> =
        ["a", "b", "c"].iter().map(|s| alphabet.tok(s).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE_0007);

    let random_pair = |rng: &mut ChaCha8Rng| -> (Sentence<Tok>, Sentence<Tok>) {
        let shared = rng.gen_range(0..=2usize);
        let word = |rng: &mut ChaCha8Rng| -> Word<Tok> {
            let len = rng.gen_range(1..=3usize);
            Word::from_letters((0..len).map(|_| toks[rng.gen_range(0..3)]))
        };
        let prefix: Vec<Word<Tok>> = (0..shared).map(|_| word(rng)).collect();
        let extend = |rng: &mut ChaCha8Rng| -> Sentence<Tok> {
            let extra = rng.gen_range(1..=3usize);
            let mut words = prefix.clone();
            words.extend((0..extra).map(|_| word(rng)));
            Sentence::new(words).unwrap()
        };
        (extend(rng), extend(rng))
    };

    const WANT: u64 = 1_000;
    const CAP: u64 = 500_000;

    // Final-letter statistic under the plain finite criterion: M = 2J = 4.
    let s_fin = vec![last_letter(alphabet.clone())];
    let leo = upsilon_diary(&s_fin, rat(0), 2).unwrap();
    let m_leo = leo.guarantee().unwrap();
    assert_eq!(m_leo, rat(4));
    let mut certified = 0u64;
    let mut attempts = 0u64;
    while certified < WANT && attempts < CAP {
        attempts += 1;
        let (a, b) = random_pair(&mut rng);
        if a == b {
            continue;
        }
        if let Ok(Some(_)) = check_leo(&a, &b, &s_fin, 2) {
            let d_omega = word_tree_distance(&leo.apply(&a), &leo.apply(&b));
            let d_w = sentence_tree_distance(&a, &b);
            assert!(
                m_leo * rat(d_omega) >= rat(d_w),
                "finite-criterion guarantee failed: d_Ω={d_omega}, d_W={d_w}"
            );
            certified += 1;
        }
    }
    assert_eq!(certified, WANT, "too few finite-certified pairs within {CAP} attempts");

    // Linear statistics under the tail-controlled criterion and its cascade
    // variant: τ = 2 truncation plus length digits, M = 32J = 64.
    let s_lin = vec![trunc_linear(2), base10_length_linear(2)];
    let virgo = virgo_diary(&s_lin, rat(0), 2, rat(3), rat(1)).unwrap();
    let m_virgo = virgo.diary.guarantee().unwrap();
    assert_eq!(m_virgo, rat(64));
    let mut certified = 0u64;
    let mut attempts = 0u64;
    while certified < WANT && attempts < CAP {
        attempts += 1;
        let (a, b) = random_pair(&mut rng);
        if a == b {
            continue;
        }
        if let Ok(Some(_)) = check_virgo(&a, &b, &s_lin, rat(0), 2, rat(3), rat(1)) {
            let d_omega = word_tree_distance(&virgo.diary.apply(&a), &virgo.diary.apply(&b));
            let d_w = sentence_tree_distance(&a, &b);
            assert!(
                m_virgo * rat(d_omega) >= rat(d_w),
                "tail-criterion guarantee failed: d_Ω={d_omega}, d_W={d_w}"
            );
            certified += 1;
        }
    }
    assert_eq!(certified, WANT, "too few tail-certified pairs within {CAP} attempts");

    let taurus = taurus_diary(&s_lin, 2, rat(3), rat(1)).unwrap();
    let m_taurus = taurus.diary.guarantee().unwrap();
    assert_eq!(m_taurus, rat(64));
    let mut certified = 0u64;
    let mut attempts = 0u64;
    while certified < WANT && attempts < CAP {
        attempts += 1;
        let (a, b) = random_pair(&mut rng);
        if a == b {
            continue;
        }
        if let Ok(Some(_)) = check_taurus(&a, &b, &s_lin, 2, rat(3), rat(1)) {
            let d_omega =
                word_tree_distance(&taurus.diary.apply(&a), &taurus.diary.apply(&b));
            let d_w = sentence_tree_distance(&a, &b);
            assert!(
                m_taurus * rat(d_omega) >= rat(d_w),
                "cascade-criterion guarantee failed: d_Ω={d_omega}, d_W={d_w}"
            );
            certified += 1;
        }
    }
    assert_eq!(certified, WANT, "too few cascade-certified pairs within {CAP} attempts");

    pass(7, "criterion certificates honour their diary guarantees (3 × 10^3 pairs)");
}

// ---------------------------------------------------------------------------
// Criterion 8: projection-complex metric theory on 100 seeded tree-segment
// instances — axioms at θ = 0, order laws, quasigeodesic bounds, spanning
// tree, distance formula, tree-of-spaces comparison, tripod middles.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_projection_tree_segments() {
    let ks = [1u64, 2, 5];
    for seed in 0..100u64 {
        let n_vertices = 100 + ((seed as usize * 37) % 101); // 100..=200
        let n_segments = 3 + (seed as usize % 18); // 3..=20
        let sys = tree_segments_instance(seed, n_vertices, n_segments)
            .unwrap_or_else(|e| panic!("seed {seed}: instance generation failed: {e}"));
        let k = ks[seed as usize % ks.len()];

        let axioms = verify_axioms(&sys);
        assert!(axioms.passes, "seed {seed}: axioms failed: {:?}", axioms.violation);
        assert_eq!(axioms.minimal_theta, 0, "seed {seed}: tree segments must be 0-thin");

        let opts = VerifyOptions { seed, ..VerifyOptions::default() };
        let bundle = build_complexes(&sys, k, 0, seed).unwrap();
        let s5 = verify_complexes(&sys, &bundle, &opts).unwrap();
        for check in &s5.checks {
            assert!(
                check.passed,
                "seed {seed}, K={k}: {} failed: {:?}",
                check.name, check.counterexample
            );
        }
        let props = verify_properties(&sys, k, &opts).unwrap();
        for check in &props.checks {
            assert!(
                check.passed,
                "seed {seed}, K={k}: {} failed: {:?}",
                check.name, check.counterexample
            );
        }
    }

    pass(8, "metric theory on 100 tree-segment instances (K ∈ {1, 2, 5})");
}

// ---------------------------------------------------------------------------
// Criterion 9: the free-product family — axioms hold through radius 4 (1970
// indices), and the radius-3 instance passes the full metric-theory battery.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_projection_free_product() {
    let sys3 = free_product_instance(3).unwrap();
    assert_eq!(sys3.n_indices(), 338);
    let axioms3 = verify_axioms(&sys3);
    assert!(axioms3.passes, "radius-3 axioms failed: {:?}", axioms3.violation);
    assert_eq!(axioms3.minimal_theta, 0);

    let opts = VerifyOptions::default();
    let bundle = build_complexes(&sys3, 2, 0, 0).unwrap();
    let s5 = verify_complexes(&sys3, &bundle, &opts).unwrap();
    for check in &s5.checks {
        assert!(check.passed, "radius-3 {} failed: {:?}", check.name, check.counterexample);
    }
    let props = verify_properties(&sys3, 2, &opts).unwrap();
    for check in &props.checks {
        assert!(check.passed, "radius-3 {} failed: {:?}", check.name, check.counterexample);
    }

    let sys4 = free_product_instance(4).unwrap();
    assert_eq!(sys4.n_indices(), 1970);
    let axioms4 = verify_axioms(&sys4);
    assert!(axioms4.passes, "radius-4 axioms failed: {:?}", axioms4.violation);
    assert_eq!(axioms4.minimal_theta, 0);

    pass(9, "free-product instances: axioms to radius 4, full battery at radius 3");
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI determinism — identical invocations with a fixed seed
// produce byte-identical standard output and output files.
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> std::process::Output {
    let exe = env!("CARGO_BIN_EXE_treembed");
    Command::new(exe)
        .args(args)
        .output()
        .expect("failed to launch the CLI binary")
}

#[test]
fn acceptance_10_cli_determinism() {
    let scratch = std::env::temp_dir().join(format!("treembed-accept-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&scratch);

    // embed: stdout summary plus two output files.
    let mut embed_runs: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for run in 0..2 {
        let dir = scratch.join(format!("embed{run}"));
        std::fs::create_dir_all(&dir).unwrap();
        let out = run_cli(&[
            "embed",
            "--seed",
            "11",
            "--radius",
            "2",
            "--pairs",
            "300",
            "--kappa",
            "64",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "embed run failed: {}", String::from_utf8_lossy(&out.stderr));
        let csv = std::fs::read(dir.join("distortion.csv")).unwrap();
        let summary = std::fs::read(dir.join("summary.json")).unwrap();
        embed_runs.push((out.stdout, csv, summary));
    }
    assert_eq!(embed_runs[0], embed_runs[1], "embed output not byte-identical");

    // proj: stdout report plus an output file.
    let mut proj_runs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for run in 0..2 {
        let path = scratch.join(format!("proj{run}.json"));
        let out = run_cli(&[
            "proj",
            "--seed",
            "3",
            "--big-k",
            "2",
            "--checks",
            "axioms,complexes,properties",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "proj run failed: {}", String::from_utf8_lossy(&out.stderr));
        let report = std::fs::read(&path).unwrap();
        proj_runs.push((out.stdout, report));
    }
    assert_eq!(proj_runs[0], proj_runs[1], "proj output not byte-identical");

    // diary: pure stdout.
    let diary_runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let out = run_cli(&["diary", "--kappa", "3", "abac|cb", "abc"]);
            assert!(
                out.status.success(),
                "diary run failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        })
        .collect();
    assert_eq!(diary_runs[0], diary_runs[1], "diary output not byte-identical");

    let _ = std::fs::remove_dir_all(&scratch);
    pass(10, "CLI byte-determinism for embed, proj and diary");
}

// ---------------------------------------------------------------------------
// Sanity: the distortion-report plumbing used by the CLI agrees with the
// direct computations above on a small exhaustive run.
// ---------------------------------------------------------------------------

#[test]
fn distortion_report_matches_direct_computation() {
    let embedder = HexEmbedder::standard();
    let elements = ball(1).unwrap();
    let selection = auto_selection(elements.len(), 1_000_000, 10, 7);
    assert!(matches!(selection, PairSelection::Exhaustive));
    let report = distortion_report(&embedder, &elements, selection, 1).unwrap();
    assert_eq!(report.rows.len(), 21);
    assert!(report.summary.coordinates_exact);
    assert!(report.summary.lipschitz_ok);
    assert!(report.summary.lower_bound_ok);
    for row in &report.rows {
        let g: GroupElement = row.g.parse().unwrap();
        let h: GroupElement = row.h.parse().unwrap();
        assert_eq!(row.d_g, word_metric(&g, &h));
        assert_eq!(row.d_f, coordinate_distance(&g, &h));
    }
    pass(0, "distortion report cross-check");
}
