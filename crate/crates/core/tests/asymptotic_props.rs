mod common;

use common::{alg, random_term, rng, ops_for, FormulaGen, LATTICE_NEG_OPS};
use mvzero::algebra::{reduct, term_range_finite};
use mvzero::asymptotic::{qe_demorgan, Decider};
use mvzero::syntax::witness_sentences;
use mvzero::translator::ConstraintProfile;
use mvzero::{Budget, Elem, Formula, LatticeAlgebra, Term, Vocabulary};
use proptest::prelude::*;

/// Values of `t` at every point of `A^k`, by direct recursion.
fn all_values(a: &LatticeAlgebra, t: &Term) -> Vec<Elem> {
    let k = t.arity();
    let total = a.size().pow(k as u32);
    (0..total)
        .map(|mut code| {
            let vars: Vec<Elem> = (0..k)
                .map(|_| {
                    let e = Elem(code % a.size());
                    code /= a.size();
                    e
                })
                .collect();
            t.eval(&vars, &|c| a.elem(c), &|op, args| a.apply(op, args)).unwrap()
        })
        .collect()
}

const CHAINS: [&str; 5] = ["L3", "L4", "L5", "G3", "G4"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn qe_matches_decider(seed in any::<u64>(), which in 0usize..4) {
        let name = ["L3", "G3", "L4", "B2"][which];
        let a = reduct(&alg(name), &["not"]).unwrap();
        let vocab = Vocabulary::parse("P/1,Q/1").unwrap();
        let f = FormulaGen::new(&vocab, LATTICE_NEG_OPS).with_constants(&a).sentence(&mut rng(seed), 4);
        let Formula::Const(label) = qe_demorgan(&f, &a).unwrap() else {
            return Err(TestCaseError::fail("sentence did not reduce to a constant"));
        };
        let none = ConstraintProfile::none();
        let v = Decider::new(&a, &vocab, &none).unwrap().almost_sure_value(&f).unwrap();
        prop_assert_eq!(a.label(v), label.as_str(), "{}", f);
    }

    #[test]
    fn memo_does_not_change_values(seed in any::<u64>(), which in 0usize..5) {
        let a = alg(CHAINS[which]);
        let vocab = Vocabulary::parse("P/1,R/2").unwrap();
        let f = FormulaGen::new(&vocab, ops_for(CHAINS[which])).sentence(&mut rng(seed), 3);
        let none = ConstraintProfile::none();
        let on = Decider::new(&a, &vocab, &none).unwrap().with_memo(true).almost_sure_value(&f).unwrap();
        let off = Decider::new(&a, &vocab, &none).unwrap().with_memo(false).almost_sure_value(&f).unwrap();
        let (explained, _) = Decider::new(&a, &vocab, &none).unwrap().explain(&f).unwrap();
        prop_assert_eq!(on, off);
        prop_assert_eq!(on, explained);
    }

    #[test]
    fn term_range_matches_enumeration(seed in any::<u64>(), which in 0usize..5, vars in 1usize..4) {
        let a = alg(CHAINS[which]);
        let t = random_term(&mut rng(seed), ops_for(CHAINS[which]), vars, 4);
        let values = all_values(&a, &t);
        let r = term_range_finite(&a, &t, &Budget::default()).unwrap();
        prop_assert_eq!(r.min, a.meet_all(values.iter().copied()).unwrap());
        prop_assert_eq!(r.max, a.join_all(values.iter().copied()).unwrap());
    }

    /// Every tuple of values is realised almost surely, so the witness
    /// sentences take the extreme values of the term.
    #[test]
    fn witness_sentences_take_term_extrema(seed in any::<u64>(), which in 0usize..5, vars in 1usize..3) {
        let a = alg(CHAINS[which]);
        let t = random_term(&mut rng(seed), ops_for(CHAINS[which]), vars, 3);
        let values = all_values(&a, &t);
        let (all, some) = witness_sentences(&t, "P");
        let vocab = Vocabulary::unary("P");
        let none = ConstraintProfile::none();
        let d = Decider::new(&a, &vocab, &none).unwrap();
        prop_assert_eq!(d.almost_sure_value(&all).unwrap(), a.meet_all(values.iter().copied()).unwrap());
        prop_assert_eq!(d.almost_sure_value(&some).unwrap(), a.join_all(values.iter().copied()).unwrap());
    }
}
