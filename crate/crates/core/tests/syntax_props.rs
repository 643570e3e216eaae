mod common;

use common::{alg, random_term, rng, FormulaGen, LUK_OPS};
use mvzero::syntax::{parse_formula, parse_sentence, parse_term};
use mvzero::Vocabulary;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn formula_print_parse_round_trip(seed in any::<u64>(), depth in 0usize..5) {
        let a = alg("L4");
        let vocab = Vocabulary::parse("P/1,R/2").unwrap();
        let gen = FormulaGen::new(&vocab, LUK_OPS).with_constants(&a);
        let mut r = rng(seed);
        let f = gen.formula(&mut r, depth, &mut vec!["x".into()]);
        let text = f.to_string();
        let back = parse_formula(&text, &vocab, &a.signature()).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn sentences_have_no_free_variables(seed in any::<u64>()) {
        let a = alg("L3");
        let vocab = Vocabulary::parse("R/2").unwrap();
        let f = FormulaGen::new(&vocab, LUK_OPS).sentence(&mut rng(seed), 4);
        prop_assert!(f.is_sentence());
        prop_assert!(parse_sentence(&f.to_string(), &vocab, &a.signature()).is_ok());
    }

    #[test]
    fn term_print_parse_round_trip(seed in any::<u64>(), vars in 1usize..4, depth in 0usize..5) {
        let sig = mvzero::continuum::signature();
        let ops = [("and", 2), ("or", 2), ("not", 1), ("imp", 2), ("oplus", 2), ("odot", 2), ("mul", 2)];
        let t = random_term(&mut rng(seed), &ops, vars, depth);
        let back = parse_term(&t.to_string(), &sig).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn free_variable_rejected_as_sentence() {
    let a = alg("L3");
    let vocab = Vocabulary::unary("P");
    assert!(parse_sentence("P(x)", &vocab, &a.signature()).is_err());
    assert!(parse_sentence("exists x. P(x)", &vocab, &a.signature()).is_ok());
}
