mod common;

use common::oracles::*;
use morphseg::eval::{levenshtein, morpheme_overlap};
use morphseg::labeler::entmax15;
use morphseg::segmenter::count_words;
use morphseg::subword::{morfessor_train, MorfessorConfig};
use morphseg::{MatchPolicy, Segmentation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ulm_viterbi_and_likelihood_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let vocab = random_ulm(&mut rng, 20);
        let len = rng.gen_range(1..=8);
        let word = random_string(&mut rng, &['a', 'b', 'c'], len);
        let (best, total) = ulm_enumerate(&vocab, &word);
        let (pieces, score) = vocab.viterbi(&word).unwrap();
        assert_eq!(pieces.concat(), word);
        assert!((score - best).abs() < 1e-9, "{word}: {score} vs {best}");
        assert!((ulm_score(&vocab, &pieces) - best).abs() < 1e-9);
        assert!((vocab.word_log_likelihood(&word) - total).abs() < 1e-9);
    }
}

#[test]
fn hmm_viterbi_and_likelihood_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut derivable = 0;
    for _ in 0..80 {
        let model = random_hmm(&mut rng, 20);
        let word = random_hmm_word(&mut rng, &model, 8);
        let paths = hmm_paths(&model, &word);
        let best = paths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match model.viterbi(&word) {
            Some(d) => {
                derivable += 1;
                assert!((d.log_prob - best).abs() < 1e-9, "{word}: {} vs {best}", d.log_prob);
                assert_eq!(d.morphs().concat(), word);
                assert!((model.word_log_likelihood(&word) - log_sum(&paths)).abs() < 1e-9);
            }
            None => {
                assert!(paths.is_empty());
                assert_eq!(model.word_log_likelihood(&word), f64::NEG_INFINITY);
            }
        }
    }
    assert!(derivable > 20);
}

#[test]
fn entmax_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let fast = entmax15(&scores);
        let slow = entmax_bisect(&scores);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-8, "{scores:?}: {fast:?} vs {slow:?}");
        }
    }
}

#[test]
fn levenshtein_matches_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let (la, lb) = (rng.gen_range(0..=6), rng.gen_range(0..=6));
        let a = random_string(&mut rng, &['a', 'b', 'c', ' ', '@'], la);
        let b = random_string(&mut rng, &['a', 'b', 'c', ' ', '@'], lb);
        let ac: Vec<char> = a.chars().collect();
        let bc: Vec<char> = b.chars().collect();
        assert_eq!(levenshtein(&a, &b), naive_levenshtein(&ac, &bc), "{a:?} {b:?}");
    }
}

#[test]
fn multiset_overlap_is_a_maximum_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool = ["a", "b", "ab", "c"];
    for _ in 0..300 {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<&str> {
            (0..rng.gen_range(1..=6)).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
        };
        let gold = draw(&mut rng);
        let pred = draw(&mut rng);
        let score = morpheme_overlap(
            &Segmentation::from_strs(&gold).unwrap(),
            &Segmentation::from_strs(&pred).unwrap(),
            MatchPolicy::Multiset,
        );
        assert_eq!(score.correct as usize, max_matching(&gold, &pred), "{gold:?} {pred:?}");
    }
}

#[test]
fn morfessor_cost_and_viterbi_match_recomputation() {
    let words = count_words([
        "walk", "walks", "walked", "walking", "talk", "talks", "talked", "jump", "jumps", "jumped", "play",
        "played", "plays", "playing",
    ]);
    let (model, _) = morfessor_train::<f64>(&words, &MorfessorConfig::default());

    let tokens: u64 = model.lexicon.values().sum();
    let corpus: f64 = model
        .lexicon
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| -(c as f64) * (c as f64 / tokens as f64).ln())
        .sum();
    let lexicon: f64 = model
        .lexicon
        .iter()
        .filter(|(_, &c)| c > 0)
        .flat_map(|(m, _)| m.chars())
        .map(|ch| model.char_costs[&ch])
        .sum();
    assert!((model.corpus_cost - corpus).abs() < 1e-9);
    assert!((model.lexicon_cost - lexicon).abs() < 1e-9);

    // Viterbi over known morphs equals the cheapest exhaustive cover.
    let cost = |pieces: &[String]| -> Option<f64> {
        pieces
            .iter()
            .map(|p| model.lexicon.get(p).filter(|&&c| c > 0).map(|&c| (tokens as f64 / c as f64).ln()))
            .sum()
    };
    for word in ["walking", "talks", "jumping", "playwalk"] {
        let best = all_splits(word)
            .iter()
            .filter_map(|s| cost(s))
            .fold(f64::INFINITY, f64::min);
        let got = cost(&model.viterbi(word)).unwrap();
        assert!((got - best).abs() < 1e-9, "{word}");
    }
}
