mod common;

use std::collections::BTreeMap;

use common::{alg, random_structure, rng, FormulaGen, LUK_OPS};
use mvzero::semantics::evaluate;
use mvzero::translator::{classical_evaluate, inverse_transform, partition_axioms, transform_model, translate};
use mvzero::Vocabulary;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exactly_one_translation_holds(seed in any::<u64>(), n in 1usize..4) {
        let a = alg("L4");
        let vocab = Vocabulary::parse("P/1,R/2").unwrap();
        let mut r = rng(seed);
        let f = FormulaGen::new(&vocab, LUK_OPS).with_constants(&a).formula(&mut r, 3, &mut vec!["x".into()]);
        let m = random_structure(&mut r, n, &a, &vocab);
        let c = transform_model(&m).unwrap();
        let bundle = translate(&f, &a).unwrap();
        for x in 0..n {
            let asg = BTreeMap::from([("x".to_string(), x)]);
            let value = evaluate(&m, &f, &asg).unwrap();
            let holding: Vec<_> = bundle
                .iter()
                .filter(|(_, g)| classical_evaluate(&c, g, &asg).unwrap())
                .map(|(b, _)| b)
                .collect();
            prop_assert_eq!(holding, vec![value]);
        }
    }

    #[test]
    fn transformed_models_satisfy_partition_axioms(seed in any::<u64>(), n in 1usize..4) {
        let a = alg("G4");
        let vocab = Vocabulary::parse("P/1,R/2").unwrap();
        let m = random_structure(&mut rng(seed), n, &a, &vocab);
        let c = transform_model(&m).unwrap();
        for ax in partition_axioms(&vocab, &a) {
            prop_assert!(classical_evaluate(&c, &ax, &BTreeMap::new()).unwrap(), "{}", ax);
        }
        let back = inverse_transform(&c, &vocab, a.clone()).unwrap();
        prop_assert_eq!(back.tables(), m.tables());
    }
}

#[test]
fn partition_axiom_count() {
    let a = alg("L3");
    let vocab = Vocabulary::parse("P/1,R/2,S/3").unwrap();
    assert_eq!(partition_axioms(&vocab, &a).len(), 6);
}
