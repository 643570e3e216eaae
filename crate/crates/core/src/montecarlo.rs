//! Random finite structures, empirical and exact value distributions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Elem, LatticeAlgebra, Rational};
use crate::asymptotic::Decider;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::semantics::{check_constraints, diagonal, Evaluator, WeightedStructure};
use crate::syntax::{Formula, Vocabulary};
use crate::translator::ConstraintProfile;

const Z95: f64 = 1.959_963_984_540_054;
const MAX_REJECTIONS: u64 = 10_000;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Per-relation probabilities over the carrier, indexed by element.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomDistribution {
    weights: Vec<Vec<Rational>>,
}

impl AtomDistribution {
    /// Explicit probabilities per relation, in vocabulary order.
    pub fn new(vocab: &Vocabulary, alg: &LatticeAlgebra, weights: Vec<Vec<Rational>>) -> Result<Self> {
        if weights.len() != vocab.relations().len() {
            return Err(Error::InvalidArgument(format!(
                "{} distributions for {} relations",
                weights.len(),
                vocab.relations().len()
            )));
        }
        for ((name, _), w) in vocab.relations().iter().zip(&weights) {
            if w.len() != alg.size() {
                return Err(Error::InvalidArgument(format!("distribution for {name} has {} entries", w.len())));
            }
            if w.iter().any(|p| *p < Rational::zero()) {
                return Err(Error::InvalidArgument(format!("negative probability for {name}")));
            }
            if w.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::InvalidArgument(format!("probabilities for {name} do not sum to 1")));
            }
        }
        Ok(AtomDistribution { weights })
    }

    /// Uniform over the values the profile allows.
    pub fn uniform(vocab: &Vocabulary, alg: &LatticeAlgebra, profile: &ConstraintProfile) -> Result<Self> {
        Self::weighted(vocab, alg, profile, &vec![1; alg.size()])
    }

    /// Proportional to `weights[e]`, restricted to the values the profile
    /// allows.
    pub fn weighted(vocab: &Vocabulary, alg: &LatticeAlgebra, profile: &ConstraintProfile, weights: &[u32]) -> Result<Self> {
        if weights.len() != alg.size() {
            return Err(Error::InvalidArgument(format!("{} weights for {} elements", weights.len(), alg.size())));
        }
        let mut out = Vec::new();
        for (name, _) in vocab.relations() {
            let allowed = profile.allowed(name, alg);
            let w: Vec<i64> = alg
                .elements()
                .map(|e| if allowed.contains(&e) { i64::from(weights[e.0]) } else { 0 })
                .collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                return Err(Error::InvalidArgument(format!("relation {name} has empty support")));
            }
            out.push(w.into_iter().map(|x| Rational::new(x, total)).collect());
        }
        Self::new(vocab, alg, out)
    }

    pub fn probability(&self, rel: usize, e: Elem) -> Rational {
        self.weights[rel][e.0]
    }

    pub fn support(&self, rel: usize) -> Vec<Elem> {
        (0..self.weights[rel].len()).filter(|&i| !self.weights[rel][i].is_zero()).map(Elem).collect()
    }
}

struct Draw {
    values: Vec<Elem>,
    cumulative: Vec<f64>,
}

impl Draw {
    fn pick(&self, u: f64) -> Elem {
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// A random-structure model: algebra, vocabulary, atom distribution and
/// constraint profile.
pub struct RandomModel {
    alg: Arc<LatticeAlgebra>,
    vocab: Vocabulary,
    dist: AtomDistribution,
    profile: ConstraintProfile,
    draws: Vec<Draw>,
    graph: Vec<bool>,
}

impl RandomModel {
    pub fn new(alg: Arc<LatticeAlgebra>, vocab: Vocabulary, dist: AtomDistribution, profile: ConstraintProfile) -> Result<Self> {
        profile.validate(&vocab, &alg)?;
        let mut draws = Vec::new();
        let mut graph = Vec::new();
        for (r, (name, arity)) in vocab.relations().iter().enumerate() {
            let support = dist.support(r);
            if support.is_empty() || dist.weights[r].len() != alg.size() {
                return Err(Error::InvalidArgument(format!("distribution does not fit relation {name}")));
            }
            let allowed = profile.allowed(name, &alg);
            if let Some(bad) = support.iter().find(|e| !allowed.contains(e)) {
                return Err(Error::Profile(format!(
                    "{name} gives positive probability to the forbidden value {}",
                    alg.label(*bad)
                )));
            }
            let g = profile.graph && *arity == 2;
            if g {
                let bottom = alg.bottom().expect("validated");
                if dist.probability(r, bottom).is_zero() {
                    return Err(Error::Profile(format!(
                        "{name} never takes {} but the graph profile forces it on the diagonal",
                        alg.label(bottom)
                    )));
                }
            }
            let mut acc = 0.0;
            let cumulative = support
                .iter()
                .map(|&e| {
                    let p = dist.probability(r, e);
                    acc += *p.numer() as f64 / *p.denom() as f64;
                    acc
                })
                .collect();
            draws.push(Draw { values: support, cumulative });
            graph.push(g);
        }
        Ok(RandomModel { alg, vocab, dist, profile, draws, graph })
    }

    pub fn algebra(&self) -> &LatticeAlgebra {
        &self.alg
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn distribution(&self) -> &AtomDistribution {
        &self.dist
    }

    /// The profile extended by the support restrictions of the distribution.
    pub fn effective_profile(&self) -> ConstraintProfile {
        let mut p = self.profile.clone();
        for (r, (name, _)) in self.vocab.relations().iter().enumerate() {
            let zero: Vec<String> = self
                .alg
                .elements()
                .filter(|&e| self.dist.probability(r, e).is_zero())
                .map(|e| self.alg.label(e).to_string())
                .collect();
            if !zero.is_empty() {
                p = p.with_forbidden(name, zero);
            }
        }
        p
    }

    fn identity(&self, n: usize) -> Result<Option<Vec<Elem>>> {
        if self.vocab.has_crisp_identity() || self.profile.crisp_identity {
            Ok(Some(diagonal(n, &self.alg)?))
        } else {
            Ok(None)
        }
    }

    fn draw_tables(&self, n: usize, seed: u64, stream: u64, attempt: u64) -> Vec<Vec<Elem>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let bottom = self.alg.bottom();
        self.vocab
            .relations()
            .iter()
            .enumerate()
            .map(|(r, (_, arity))| {
                rng.set_word_pos(((attempt as u128) << 40) | ((r as u128) << 32));
                let draw = &self.draws[r];
                if self.graph[r] {
                    let mut t = vec![bottom.expect("validated"); n * n];
                    for i in 0..n {
                        for j in i + 1..n {
                            let v = draw.pick(rng.gen());
                            t[i * n + j] = v;
                            t[j * n + i] = v;
                        }
                    }
                    t
                } else {
                    (0..n.pow(*arity as u32)).map(|_| draw.pick(rng.gen())).collect()
                }
            })
            .collect()
    }

    fn sample_indexed(&self, n: usize, seed: u64, index: u64) -> Result<WeightedStructure> {
        if n == 0 {
            return Err(Error::InvalidArgument("domain size must be at least 1".into()));
        }
        for attempt in 0..MAX_REJECTIONS {
            let tables = self.draw_tables(n, seed, index, attempt);
            let m = WeightedStructure::from_tables_unchecked(n, self.alg.clone(), self.vocab.clone(), tables, self.identity(n)?)?;
            if self.profile.custom.is_empty() || check_constraints(&m, &self.profile)?.ok() {
                return Ok(m);
            }
        }
        Err(Error::Profile(format!("no structure satisfying the profile in {MAX_REJECTIONS} draws")))
    }

    /// One random structure on `n` elements. Cells are drawn independently
    /// except where the profile links them; custom profile sentences are
    /// enforced by rejection.
    pub fn sample_structure(&self, n: usize, seed: u64) -> Result<WeightedStructure> {
        self.sample_indexed(n, seed, 0)
    }

    /// Value frequencies of `sentence` over `samples` random structures.
    pub fn estimate_distribution(&self, sentence: &Formula, n: usize, samples: u64, seed: u64) -> Result<EmpiricalDistribution> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        let ev = Evaluator::new(sentence, &self.vocab, &self.alg)?;
        if let Some(v) = ev.free_variables().first() {
            return Err(Error::FreeVariable(v.clone()));
        }
        let values: Vec<Elem> = (0..samples)
            .into_par_iter()
            .map(|i| ev.eval_sentence(&self.sample_indexed(n, seed, i)?))
            .collect::<Result<_>>()?;
        let mut counts = vec![0u64; self.alg.size()];
        for v in values {
            counts[v.0] += 1;
        }
        Ok(EmpiricalDistribution::from_counts(&self.alg, sentence.to_string(), n, samples, seed, counts))
    }

    /// Exact `μ_n` by enumerating every structure on `n` elements.
    pub fn exact_mu_small(&self, sentence: &Formula, n: usize, budget: &Budget) -> Result<ExactDistribution> {
        if n == 0 {
            return Err(Error::InvalidArgument("domain size must be at least 1".into()));
        }
        let ev = Evaluator::new(sentence, &self.vocab, &self.alg)?;
        if let Some(v) = ev.free_variables().first() {
            return Err(Error::FreeVariable(v.clone()));
        }
        // One entry per independent draw: (relation, cells it fills).
        let mut slots: Vec<(usize, Vec<usize>)> = Vec::new();
        for (r, (_, arity)) in self.vocab.relations().iter().enumerate() {
            if self.graph[r] {
                for i in 0..n {
                    for j in i + 1..n {
                        slots.push((r, vec![i * n + j, j * n + i]));
                    }
                }
            } else {
                slots.extend((0..n.pow(*arity as u32)).map(|c| (r, vec![c])));
            }
        }
        let mut total: u64 = 1;
        for (r, _) in &slots {
            total = total.saturating_mul(self.draws[*r].values.len() as u64);
        }
        if total > budget.max_models {
            return Err(Error::Budget(format!("{total} structures exceed the limit of {}", budget.max_models)));
        }
        let big = |p: Rational| BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
        let probs: Vec<Vec<BigRational>> = (0..self.draws.len())
            .map(|r| self.draws[r].values.iter().map(|&e| big(self.dist.probability(r, e))).collect())
            .collect();
        let bottom = self.alg.bottom();
        let mut tables: Vec<Vec<Elem>> = self
            .vocab
            .relations()
            .iter()
            .enumerate()
            .map(|(r, (_, arity))| vec![if self.graph[r] { bottom.expect("validated") } else { Elem(0) }; n.pow(*arity as u32)])
            .collect();
        let identity = self.identity(n)?;
        let mut acc = vec![BigRational::zero(); self.alg.size()];
        let mut mass = BigRational::zero();
        let mut digits = vec![0usize; slots.len()];
        loop {
            let mut p = BigRational::one();
            for ((r, cells), &d) in slots.iter().zip(&digits) {
                for &c in cells {
                    tables[*r][c] = self.draws[*r].values[d];
                }
                p *= &probs[*r][d];
            }
            let m = WeightedStructure::from_tables_unchecked(n, self.alg.clone(), self.vocab.clone(), tables.clone(), identity.clone())?;
            if self.profile.custom.is_empty() || check_constraints(&m, &self.profile)?.ok() {
                let v = ev.eval_sentence(&m)?;
                acc[v.0] += &p;
                mass += p;
            }
            let mut pos = slots.len();
            loop {
                if pos == 0 {
                    if mass.is_zero() {
                        return Err(Error::Profile(format!("no structure on {n} elements satisfies the profile")));
                    }
                    let rows = self
                        .alg
                        .elements()
                        .map(|e| ExactProbability { value: e, label: self.alg.label(e).to_string(), probability: &acc[e.0] / &mass })
                        .collect();
                    return Ok(ExactDistribution { sentence: sentence.to_string(), n, models: total, rows });
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < self.draws[slots[pos].0].values.len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Empirical distributions over a sweep of domain sizes, set against the
    /// decided almost-sure value.
    pub fn convergence_report(
        &self,
        sentence: &Formula,
        sizes: &[usize],
        samples: u64,
        seed: u64,
        threshold: f64,
        budget: &Budget,
    ) -> Result<ConvergenceReport> {
        let profile = self.effective_profile();
        let decided = Decider::new(&self.alg, &self.vocab, &profile)?
            .with_budget(budget.clone())
            .almost_sure_value(sentence)?;
        let rows = sizes
            .iter()
            .map(|&n| self.estimate_distribution(sentence, n, samples, seed))
            .collect::<Result<Vec<_>>>()?;
        let last = rows.last().map_or(0.0, |r| r.frequency(decided));
        Ok(ConvergenceReport {
            decided,
            decided_label: self.alg.label(decided).to_string(),
            threshold,
            converged: last >= threshold,
            rows,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueFrequency {
    #[serde(skip)]
    pub value: Elem,
    pub label: String,
    pub count: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Sampled frequencies of each carrier value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub sentence: String,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<ValueFrequency>,
}

impl EmpiricalDistribution {
    fn from_counts(alg: &LatticeAlgebra, sentence: String, n: usize, samples: u64, seed: u64, counts: Vec<u64>) -> Self {
        let rows = alg
            .elements()
            .map(|e| {
                let count = counts[e.0];
                let (ci_low, ci_high) = wilson_interval(count, samples);
                ValueFrequency {
                    value: e,
                    label: alg.label(e).to_string(),
                    count,
                    frequency: count as f64 / samples as f64,
                    ci_low,
                    ci_high,
                }
            })
            .collect();
        EmpiricalDistribution { sentence, n, samples, seed, rows }
    }

    pub fn frequency(&self, e: Elem) -> f64 {
        self.rows.iter().find(|r| r.value == e).map_or(0.0, |r| r.frequency)
    }

    pub fn row(&self, e: Elem) -> Option<&ValueFrequency> {
        self.rows.iter().find(|r| r.value == e)
    }

    /// Most frequent value; ties go to the smaller element index.
    pub fn modal(&self) -> Elem {
        self.rows.iter().fold(&self.rows[0], |best, r| if r.count > best.count { r } else { best }).value
    }
}

impl fmt::Display for EmpiricalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}  (n = {}, {} samples, seed {})", self.sentence, self.n, self.samples, self.seed)?;
        for r in &self.rows {
            writeln!(f, "  {:>8}  {:.4}  [{:.4}, {:.4}]", r.label, r.frequency, r.ci_low, r.ci_high)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactProbability {
    pub value: Elem,
    pub label: String,
    pub probability: BigRational,
}

impl ExactProbability {
    pub fn approx(&self) -> f64 {
        self.probability.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub sentence: String,
    pub n: usize,
    /// Structures enumerated, before profile filtering.
    pub models: u64,
    pub rows: Vec<ExactProbability>,
}

impl ExactDistribution {
    pub fn probability(&self, e: Elem) -> BigRational {
        self.rows.iter().find(|r| r.value == e).map_or_else(BigRational::zero, |r| r.probability.clone())
    }
}

impl fmt::Display for ExactDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}  (n = {}, {} structures)", self.sentence, self.n, self.models)?;
        for r in &self.rows {
            writeln!(f, "  {:>8}  {}", r.label, r.probability)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    #[serde(skip)]
    pub decided: Elem,
    pub decided_label: String,
    pub threshold: f64,
    /// Whether the decided value reaches `threshold` at the largest size.
    pub converged: bool,
    pub rows: Vec<EmpiricalDistribution>,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "almost-sure value: {}", self.decided_label)?;
        for r in &self.rows {
            writeln!(f, "  n = {:>4}: {:.4} at {}, modal {}", r.n, r.frequency(self.decided), self.decided_label, r.rows[r.modal().0].label)?;
        }
        write!(
            f,
            "verdict: {} (threshold {})",
            if self.converged { "converged" } else { "not converged" },
            self.threshold
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;
    use crate::syntax::parse_sentence;

    fn model(alg: &str, vocab: &str, profile: ConstraintProfile) -> RandomModel {
        let a = Arc::new(builtin(alg).unwrap());
        let v = Vocabulary::parse(vocab).unwrap();
        let d = AtomDistribution::uniform(&v, &a, &profile).unwrap();
        RandomModel::new(a, v, d, profile).unwrap()
    }

    fn sentence(m: &RandomModel, s: &str) -> Formula {
        parse_sentence(s, m.vocabulary(), &m.algebra().signature()).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_examples() {
        let m = model("B2", "P/1", ConstraintProfile::none());
        let f = sentence(&m, "exists x. P(x)");
        let d = m.exact_mu_small(&f, 3, &Budget::default()).unwrap();
        assert_eq!(d.probability(Elem(1)), ratio(7, 8));
        let m = model("L3", "P/1", ConstraintProfile::none());
        let f = sentence(&m, "forall x. P(x)");
        let d = m.exact_mu_small(&f, 1, &Budget::default()).unwrap();
        assert!(d.rows.iter().all(|r| r.probability == ratio(1, 3)));
        let tight = Budget { max_models: 100, ..Budget::default() };
        assert!(matches!(m.exact_mu_small(&f, 5, &tight), Err(Error::Budget(_))));
    }

    #[test]
    fn graph_exact_counts_pairs() {
        let m = model("B2", "R/2", ConstraintProfile::graph());
        let f = sentence(&m, "exists x. exists y. R(x,y)");
        let d = m.exact_mu_small(&f, 3, &Budget::default()).unwrap();
        assert_eq!(d.models, 8);
        assert_eq!(d.probability(Elem(1)), ratio(7, 8));
    }

    #[test]
    fn sampling_is_deterministic_and_respects_support() {
        let prof = ConstraintProfile::none().with_forbidden("P", ["1/2"]);
        let m = model("L3", "P/1,R/2", prof);
        let a = m.sample_structure(6, 42).unwrap();
        let b = m.sample_structure(6, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, m.sample_structure(6, 43).unwrap());
        for s in 0..50 {
            let t = m.sample_structure(5, s).unwrap();
            assert!(t.table("P").unwrap().iter().all(|&e| e != Elem(1)));
        }
    }

    #[test]
    fn graph_samples_are_symmetric() {
        let m = model("L3", "R/2", ConstraintProfile::graph());
        let s = m.sample_structure(7, 1).unwrap();
        assert!(check_constraints(&s, &ConstraintProfile::graph()).unwrap().ok());
    }

    #[test]
    fn graph_needs_bottom_in_support() {
        let a = Arc::new(builtin("B2").unwrap());
        let v = Vocabulary::parse("R/2").unwrap();
        let d = AtomDistribution::new(&v, &a, vec![vec![Rational::zero(), Rational::one()]]).unwrap();
        assert!(matches!(RandomModel::new(a, v, d, ConstraintProfile::graph()), Err(Error::Profile(_))));
    }

    #[test]
    fn estimate_matches_closed_form() {
        let m = model("L3", "P/1", ConstraintProfile::none());
        let f = sentence(&m, "forall x. P(x) | not P(x)");
        let e = m.estimate_distribution(&f, 20, 2000, 7).unwrap();
        let row = e.row(Elem(1)).unwrap();
        assert!(row.ci_low <= 0.9997 && 0.99 < row.frequency);
        assert_eq!(e, m.estimate_distribution(&f, 20, 2000, 7).unwrap());
        assert!(m.estimate_distribution(&f, 20, 0, 7).is_err());
    }

    #[test]
    fn convergence_verdict() {
        let m = model("B2", "P/1", ConstraintProfile::none());
        let f = sentence(&m, "forall x. P(x)");
        let r = m.convergence_report(&f, &[5, 20], 500, 3, 0.95, &Budget::default()).unwrap();
        assert_eq!(r.decided_label, "0");
        assert!(r.converged);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }
}
