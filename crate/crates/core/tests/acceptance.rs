//! Acceptance criteria, one line of output per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use common::{alg, all_structures, demorgan_brute_force, random_structure, rng, FormulaGen, LATTICE_NEG_OPS, LUK_OPS};
use mvzero::algebra::{reduct, term_range_finite, Rational};
use mvzero::asymptotic::{almost_sure_set_demorgan, almost_sure_value, qe_demorgan, Decider};
use mvzero::continuum::{self, ValueInterval};
use mvzero::montecarlo::{AtomDistribution, RandomModel};
use mvzero::semantics::evaluate;
use mvzero::syntax::{parse_sentence, parse_term, witness_sentences};
use mvzero::translator::{classical_evaluate, transform_model, translate, ConstraintProfile};
use mvzero::{Budget, Elem, Formula, LatticeAlgebra, Term, Vocabulary};
use num_bigint::BigInt;
use num_rational::BigRational;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn luk_witness(n: usize, k: usize) -> String {
    format!("forall x. times({k}, oplus(pow(P(x),{n}), not P(x)))")
}

/// `t_1 = v1 | not v1`, `t_{k+1} = v_{k+1} | (v_{k+1} -> t_k)`.
fn godel_term(k: usize) -> Term {
    let v = |i: usize| Term::Var(i);
    let mut t = Term::apply("or", vec![v(0), Term::apply("not", vec![v(0)])]);
    for i in 1..k {
        t = Term::apply("or", vec![v(i), Term::apply("imp", vec![v(i), t])]);
    }
    t
}

fn godel_label(n: usize, k: usize) -> String {
    if k == n {
        "1".into()
    } else {
        format!("g{k}")
    }
}

fn unary() -> Vocabulary {
    Vocabulary::unary("P")
}

fn criterion_1() -> Check {
    let budget = Budget::default();
    let mut cases = 0;
    for n in 2..=5usize {
        let a = alg(&format!("L{}", n + 1));
        for k in 1..=n {
            let f = parse_sentence(&luk_witness(n, k), &unary(), &a.signature()).map_err(|e| e.to_string())?;
            let v = almost_sure_value(&f, &unary(), &a, &ConstraintProfile::none()).map_err(|e| e.to_string())?;
            let want = Rational::new(k as i64, n as i64);
            ensure(a.value(v) == Some(want), || format!("L{}: k={k} gave {}", n + 1, a.label(v)))?;
            let t = parse_term(&format!("times({k}, oplus(pow(v,{n}), not v))"), &a.signature()).map_err(|e| e.to_string())?;
            let r = term_range_finite(&a, &t, &budget).map_err(|e| e.to_string())?;
            ensure(a.value(r.min) == Some(want), || format!("L{}: term minimum {}", n + 1, a.label(r.min)))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} sentences, exact k/N, term minima agree"))
}

fn criterion_2() -> Check {
    let budget = Budget::default();
    let mut cases = 0;
    for n in 1..=4usize {
        let a = alg(&format!("G{}", n + 1));
        for k in 1..=n {
            let t = godel_term(k);
            let (f, _) = witness_sentences(&t, "P");
            let v = almost_sure_value(&f, &unary(), &a, &ConstraintProfile::none()).map_err(|e| e.to_string())?;
            let want = godel_label(n, k);
            ensure(a.label(v) == want, || format!("G{}: k={k} gave {}, want {want}", n + 1, a.label(v)))?;
            let r = term_range_finite(&a, &t, &budget).map_err(|e| e.to_string())?;
            ensure(a.label(r.min) == want, || format!("G{}: term minimum {}", n + 1, a.label(r.min)))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} sentences, exact g_k"))
}

fn labels(a: &LatticeAlgebra, s: &BTreeSet<Elem>) -> Vec<String> {
    s.iter().map(|e| a.label(*e).to_string()).collect()
}

fn demorgan_set(name: &str) -> Result<(LatticeAlgebra, BTreeSet<Elem>), String> {
    let a = reduct(&alg(name), &["not"]).map_err(|e| e.to_string())?;
    let set = almost_sure_set_demorgan(&a).map_err(|e| e.to_string())?;
    let [e1, e2, d1, d2] = demorgan_brute_force(&a);
    let oracle: BTreeSet<Elem> = [a.bottom().unwrap(), e1, e2, d1, d2, a.top().unwrap()].into();
    ensure(set == oracle, || format!("{name}: {:?} vs brute force {:?}", labels(&a, &set), labels(&a, &oracle)))?;
    Ok((a, set))
}

fn criterion_3() -> Check {
    let expect: &[(&str, &[&str])] = &[
        ("B2", &["0", "1"]),
        ("L3", &["0", "1/2", "1"]),
        ("L4", &["0", "1/3", "2/3", "1"]),
        ("G3", &["0", "g1", "1"]),
        ("G4", &["0", "g1", "1"]),
        ("G5", &["0", "g1", "1"]),
        ("G6", &["0", "g1", "1"]),
    ];
    for (name, want) in expect {
        let (a, set) = demorgan_set(name)?;
        ensure(labels(&a, &set) == *want, || format!("{name}: {:?}", labels(&a, &set)))?;
    }
    let (a, set) = demorgan_set("prod(G3,L4)")?;
    ensure(set.len() == 5, || format!("prod(G3,L4): {:?}", labels(&a, &set)))?;
    let g = reduct(&alg("G4"), &["not"]).unwrap();
    let [_, _, _, d2] = demorgan_brute_force(&g);
    ensure(g.label(d2) == "1", || "G-chain delta' is not 1".into())?;
    Ok(format!(
        "product set {:?}; note: on G-chains inf(not v | not not v) = 1, not 0, the set is unchanged",
        labels(&a, &set)
    ))
}

fn translation_agrees(m: &mvzero::semantics::WeightedStructure, f: &Formula, a: &LatticeAlgebra) -> Result<u64, String> {
    let bundle = translate(f, a).map_err(|e| e.to_string())?;
    let c = transform_model(m).map_err(|e| e.to_string())?;
    let free = f.free_variables();
    let mut checked = 0;
    let total = m.n().pow(free.len() as u32);
    for code in 0..total {
        let mut asg = BTreeMap::new();
        let mut rest = code;
        for v in &free {
            asg.insert(v.clone(), rest % m.n());
            rest /= m.n();
        }
        let value = evaluate(m, f, &asg).map_err(|e| e.to_string())?;
        for (b, fb) in bundle.iter() {
            let holds = classical_evaluate(&c, fb, &asg).map_err(|e| e.to_string())?;
            ensure(holds == (b == value), || format!("{f} at {asg:?}: value {}, translation for {} says {holds}", a.label(value), a.label(b)))?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_4() -> Check {
    let a = alg("L3");
    let vocab = Vocabulary::parse("R/2").unwrap();
    let gen = FormulaGen::new(&vocab, LUK_OPS);
    let mut r = rng(4);
    let mut checks = 0;
    let singles = all_structures(1, &a, &vocab);
    for _ in 0..100 {
        let f = gen.formula(&mut r, 3, &mut vec!["x".into(), "y".into()]);
        for m in &singles {
            checks += translation_agrees(m, &f, &a)?;
        }
    }
    for _ in 0..500 {
        let f = gen.formula(&mut r, 3, &mut vec!["x".into(), "y".into()]);
        let m = random_structure(&mut r, 2, &a, &vocab);
        checks += translation_agrees(&m, &f, &a)?;
    }
    Ok(format!("{checks} (value, assignment) checks over n = 1 exhaustively and 500 cases at n = 2"))
}

fn criterion_5() -> Check {
    let vocab = Vocabulary::parse("P/1,Q/1").unwrap();
    let mut total = 0;
    for (name, seed) in [("L3", 5u64), ("G3", 55)] {
        let a = reduct(&alg(name), &["not"]).unwrap();
        let gen = FormulaGen::new(&vocab, LATTICE_NEG_OPS).with_constants(&a);
        let mut r = rng(seed);
        let mut done = 0;
        while done < 200 {
            let f = gen.sentence(&mut r, 4);
            if f.quantifier_depth() > 4 {
                continue;
            }
            let q = qe_demorgan(&f, &a).map_err(|e| format!("{name}: {f}: {e}"))?;
            let Formula::Const(label) = &q else {
                return Err(format!("{name}: {f} reduced to {q}"));
            };
            let v = almost_sure_value(&f, &vocab, &a, &ConstraintProfile::none()).map_err(|e| e.to_string())?;
            ensure(a.label(v) == label, || format!("{name}: {f}: elimination {label}, decider {}", a.label(v)))?;
            done += 1;
        }
        total += done;
    }
    Ok(format!("{total}/{total} sentences agree"))
}

fn criterion_6() -> Check {
    let budget = Budget::default();
    let big = |p: i64, q: i64| BigRational::new(BigInt::from(p), BigInt::from(q));
    for (name, sentence, value, base) in [
        ("B2", "exists x. P(x)", "1", (1i64, 2i64)),
        ("L3", "forall x. P(x) | not P(x)", "1/2", (2, 3)),
    ] {
        let a = alg(name);
        let d = AtomDistribution::uniform(&unary(), &a, &ConstraintProfile::none()).unwrap();
        let model = RandomModel::new(a.clone(), unary(), d, ConstraintProfile::none()).unwrap();
        let f = parse_sentence(sentence, &unary(), &a.signature()).unwrap();
        for n in 1..=8u32 {
            let mu = model.exact_mu_small(&f, n as usize, &budget).map_err(|e| e.to_string())?;
            let want = big(1, 1) - big(base.0.pow(n), base.1.pow(n));
            let got = mu.probability(a.elem(value).unwrap());
            ensure(got == want, || format!("{name} n={n}: {got} != {want}"))?;
        }
    }
    Ok("n = 1..8 exact for both closed forms".into())
}

fn criterion_7() -> Check {
    let mut sentences: Vec<(String, String)> = Vec::new();
    for n in 2..=5usize {
        for k in 1..=n {
            sentences.push((format!("L{}", n + 1), luk_witness(n, k)));
        }
    }
    for n in 1..=4usize {
        for k in 1..=n {
            sentences.push((format!("G{}", n + 1), witness_sentences(&godel_term(k), "P").0.to_string()));
        }
    }
    let mut worst = 1.0f64;
    for (i, (name, text)) in sentences.iter().enumerate() {
        let a = alg(name);
        let f = parse_sentence(text, &unary(), &a.signature()).unwrap();
        let none = ConstraintProfile::none();
        let decided = Decider::new(&a, &unary(), &none).unwrap().almost_sure_value(&f).map_err(|e| e.to_string())?;
        let uniform = AtomDistribution::uniform(&unary(), &a, &none).unwrap();
        let weights: Vec<u32> = (1..=a.size() as u32).collect();
        let skewed = AtomDistribution::weighted(&unary(), &a, &none, &weights).unwrap();
        let mut modes = Vec::new();
        for (j, d) in [uniform, skewed].into_iter().enumerate() {
            let model = RandomModel::new(a.clone(), unary(), d, none.clone()).unwrap();
            let e = model.estimate_distribution(&f, 50, 2000, 700 + (i * 2 + j) as u64).map_err(|e| e.to_string())?;
            if j == 0 {
                let freq = e.frequency(decided);
                worst = worst.min(freq);
                ensure(freq >= 0.95, || format!("{name} {text}: frequency {freq} of {}", a.label(decided)))?;
            }
            modes.push(e.modal());
        }
        ensure(modes[0] == modes[1], || format!("{name} {text}: modal values differ"))?;
    }
    Ok(format!("{} sentences, lowest frequency {worst:.4}, modal values agree across distributions", sentences.len()))
}

fn criterion_8() -> Check {
    let sig = continuum::signature();
    let f = parse_sentence("forall x. P(x) | not P(x)", &unary(), &sig).unwrap();
    let v = ValueInterval::new(Rational::new(1, 2), Rational::new(51, 100)).unwrap();
    let r = continuum::estimate_concentration(&f, &unary(), 200, 2000, 20, 8, Some(v)).map_err(|e| e.to_string())?;
    let mass = r.in_interval.unwrap();
    ensure(mass >= 0.95, || format!("mass in [0.5, 0.51] is {mass}"))?;
    ensure(r.values.iter().all(|&x| x >= 0.5), || format!("minimum sample {}", r.min))?;
    Ok(format!("mass {mass:.4} (target {:.4}), minimum {:.6}", 1.0 - 0.98f64.powi(200), r.min))
}

fn criterion_9() -> Check {
    let sig = continuum::signature();
    let budget = Budget::default();
    let run = |text: &str, tol: f64| {
        let t = parse_term(text, &sig).map_err(|e| e.to_string())?;
        continuum::term_extremum_interval(&t, tol, &budget).map_err(|e| e.to_string())
    };
    let r = run("v | not v", 1e-5)?;
    ensure((r.inf - 0.5).abs() <= 1e-5, || format!("inf(v | not v) = {}", r.inf))?;
    for n in 2..=5 {
        let r = run(&format!("oplus(pow(v,{n}), not v)"), 1e-5)?;
        ensure((r.inf - 1.0 / n as f64).abs() <= 1e-5, || format!("N={n}: inf {}", r.inf))?;
    }
    let g = run("not v | mul(v, v)", 1e-5)?;
    ensure((g.inf - 0.381966).abs() <= 1e-4, || format!("golden inf {}", g.inf))?;
    ensure((g.argmin[0] - 0.618034).abs() <= 1e-4, || format!("golden argmin {}", g.argmin[0]))?;
    ensure(!g.notes.is_empty(), || "discrepancy note missing".into())?;
    Ok(format!("golden minimum {:.6} at {:.6}; note: {}", g.inf, g.argmin[0], g.notes[0]))
}

fn criterion_10() -> Check {
    let f = continuum::extension_axiom_interval(1, 4, &[1], &unary()).map_err(|e| e.to_string())?;
    let high = ValueInterval::new(Rational::new(9, 10), Rational::from_integer(1)).unwrap();
    let mut medians = Vec::new();
    for n in [10usize, 50, 200] {
        let mut runs: Vec<f64> = (0..3u64)
            .map(|s| {
                continuum::estimate_concentration(&f, &unary(), n, 1000, 10, 1000 + s, Some(high))
                    .map(|r| r.in_interval.unwrap())
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        runs.sort_by(f64::total_cmp);
        medians.push(runs[1]);
    }
    ensure(medians.windows(2).all(|w| w[0] <= w[1]), || format!("medians {medians:?} not monotone"))?;
    ensure(medians[2] > 0.9, || format!("median at n = 200 is {}", medians[2]))?;
    Ok(format!("medians {medians:.4?} at n = 10, 50, 200"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Lukasiewicz witness values", criterion_1),
        ("Godel witness values", criterion_2),
        ("De Morgan value sets", criterion_3),
        ("translation equivalence", criterion_4),
        ("elimination agrees with the decider", criterion_5),
        ("exact small-n distributions", criterion_6),
        ("Monte Carlo convergence", criterion_7),
        ("infinite-valued concentration", criterion_8),
        ("continuous extrema", criterion_9),
        ("extension-axiom trend", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
