mod common;

use common::{alg, random_structure, rng, FormulaGen, LUK_OPS};
use mvzero::semantics::evaluate_sentence;
use mvzero::Vocabulary;
use proptest::prelude::*;
use rand::seq::SliceRandom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn values_are_invariant_under_relabelling(seed in any::<u64>(), n in 1usize..5) {
        let a = alg("L3");
        let vocab = Vocabulary::parse("P/1,R/2").unwrap();
        let mut r = rng(seed);
        let f = FormulaGen::new(&vocab, LUK_OPS).with_constants(&a).sentence(&mut r, 4);
        let m = random_structure(&mut r, n, &a, &vocab);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let p = m.permuted(&perm).unwrap();
        prop_assert_eq!(evaluate_sentence(&m, &f).unwrap(), evaluate_sentence(&p, &f).unwrap());
    }

    #[test]
    fn quantifiers_are_meets_and_joins(seed in any::<u64>(), n in 1usize..5) {
        let a = alg("G4");
        let vocab = Vocabulary::unary("P");
        let m = random_structure(&mut rng(seed), n, &a, &vocab);
        let t = m.table("P").unwrap();
        let f = mvzero::syntax::parse_sentence("forall x. P(x)", &vocab, &a.signature()).unwrap();
        let g = mvzero::syntax::parse_sentence("exists x. P(x)", &vocab, &a.signature()).unwrap();
        prop_assert_eq!(evaluate_sentence(&m, &f).unwrap(), a.meet_all(t.iter().copied()).unwrap());
        prop_assert_eq!(evaluate_sentence(&m, &g).unwrap(), a.join_all(t.iter().copied()).unwrap());
    }
}
