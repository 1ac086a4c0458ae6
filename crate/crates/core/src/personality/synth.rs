//! Synthetic users drawn from known item parameters, as counts and as texts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::catalog::{trait_index, TRAITS};
use super::evidence::{logistic, logit, EvidenceVector, TrainingCorpus};
use super::lexicon::{EvidenceEntry, EvidenceLexicon};
use super::model::{ItemParams, TraitModel};
use super::TraitError;

/// Ranges item parameters are drawn from. Rates are on the natural scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub traits: Vec<String>,
    pub items_per_trait: usize,
    pub rate: (f64, f64),
    pub lambda: (f64, f64),
    pub sigma2: (f64, f64),
}

impl GeneratorSpec {
    /// A few frequent, sharply loading cues per trait.
    pub fn strong(traits: &[&str], items_per_trait: usize) -> Self {
        GeneratorSpec {
            traits: traits.iter().map(|t| String::from(*t)).collect(),
            items_per_trait,
            rate: (0.002, 0.006),
            lambda: (0.6, 0.9),
            sigma2: (0.1, 0.3),
        }
    }

    /// Every catalog trait, sparse cues with mixed strength.
    pub fn all_traits(items_per_trait: usize) -> Self {
        GeneratorSpec {
            traits: TRAITS.iter().map(|t| String::from(t.id)).collect(),
            items_per_trait,
            rate: (0.0005, 0.004),
            lambda: (0.2, 0.8),
            sigma2: (0.2, 0.8),
        }
    }
}

/// Cue word of generated item `j`. Digits keep it a fixed point of the lemmatizer.
pub fn cue_word(j: usize) -> String {
    format!("c{j:04}")
}

fn filler_word(k: usize) -> String {
    format!("f{k}")
}

const FILLER: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGenerator {
    pub lexicon: EvidenceLexicon,
    pub model: TraitModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Evidence from the drawn counts, with generating traits in catalog order.
    pub corpus: TrainingCorpus,
    /// Latent logit-scale item values before count sampling.
    pub latent: Vec<Vec<f64>>,
    /// One text per user; empty unless requested.
    pub texts: Vec<String>,
}

impl SyntheticGenerator {
    pub fn new(lexicon: EvidenceLexicon, model: TraitModel) -> Result<Self, TraitError> {
        model.validate()?;
        model.check_lexicon(&lexicon)?;
        Ok(SyntheticGenerator { lexicon, model })
    }

    /// Draws item parameters from `spec`; item `j` is cued by [`cue_word`]`(j)`.
    pub fn random(spec: &GeneratorSpec, seed: u64) -> Result<Self, TraitError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        let mut model = TraitModel::empty(Vec::new());
        for t in &spec.traits {
            let ti = trait_index(t).ok_or_else(|| TraitError::UnknownTrait(t.clone()))?;
            for _ in 0..spec.items_per_trait {
                let j = entries.len();
                let cue = cue_word(j);
                entries.push(EvidenceEntry {
                    evidence_id: format!("e{j:04}"),
                    trait_id: t.clone(),
                    pattern_id: format!("p{j:04}"),
                    cue,
                });
                let rate = rng.random_range(spec.rate.0..=spec.rate.1);
                model.traits[ti].items.push(ItemParams {
                    item: j,
                    mu: logit(rate),
                    lambda: rng.random_range(spec.lambda.0..=spec.lambda.1),
                    sigma2: rng.random_range(spec.sigma2.0..=spec.sigma2.1),
                });
            }
        }
        model.evidence_ids = entries.iter().map(|e| e.evidence_id.clone()).collect();
        let lexicon = EvidenceLexicon::new(entries)?;
        SyntheticGenerator::new(lexicon, model)
    }

    /// Draws parameters for the items of an existing lexicon; `spec.traits` and
    /// `spec.items_per_trait` are ignored.
    pub fn random_over(lexicon: EvidenceLexicon, spec: &GeneratorSpec, seed: u64) -> Result<Self, TraitError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = TraitModel::empty(lexicon.entries().iter().map(|e| e.evidence_id.clone()).collect());
        for (j, e) in lexicon.entries().iter().enumerate() {
            let ti = trait_index(&e.trait_id).ok_or_else(|| TraitError::UnknownTrait(e.trait_id.clone()))?;
            let rate = rng.random_range(spec.rate.0..=spec.rate.1);
            model.traits[ti].items.push(ItemParams {
                item: j,
                mu: logit(rate),
                lambda: rng.random_range(spec.lambda.0..=spec.lambda.1),
                sigma2: rng.random_range(spec.sigma2.0..=spec.sigma2.1),
            });
        }
        SyntheticGenerator::new(lexicon, model)
    }

    /// Trait index and parameters of every item; items no trait uses get a flat prior.
    fn item_table(&self) -> Vec<(usize, ItemParams)> {
        let mut table: Vec<(usize, ItemParams)> = (0..self.lexicon.len())
            .map(|j| (0, ItemParams { item: j, mu: logit(0.001), lambda: 0.0, sigma2: 1.0 }))
            .collect();
        for (ti, t) in self.model.traits.iter().enumerate() {
            for p in &t.items {
                table[p.item] = (ti, *p);
            }
        }
        table
    }

    /// Samples `n_users` users of `words` tokens each. Texts hold each cue word
    /// as often as its count plus shuffled filler up to the word budget.
    pub fn generate(&self, n_users: usize, words: u32, seed: u64, with_texts: bool) -> SyntheticCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = self.item_table();
        let mut users = Vec::with_capacity(n_users);
        let mut thetas = Vec::with_capacity(n_users);
        let mut latent = Vec::with_capacity(n_users);
        let mut texts = Vec::new();
        for _ in 0..n_users {
            let theta: Vec<f64> = (0..TRAITS.len()).map(|_| rng.sample(StandardNormal)).collect();
            let mut ys = Vec::with_capacity(table.len());
            let mut counts = Vec::with_capacity(table.len());
            for (ti, p) in &table {
                let noise: f64 = rng.sample(StandardNormal);
                let y = p.mu + p.lambda * theta[*ti] + libm::sqrt(p.sigma2) * noise;
                let x = logistic(y);
                let c = Binomial::new(words as u64, x).map_or(0, |b| b.sample(&mut rng));
                ys.push(y);
                counts.push(c as u32);
            }
            if with_texts {
                texts.push(render_text(&counts, words, &mut rng));
            }
            users.push(EvidenceVector::from_counts(counts, words));
            thetas.push(theta);
            latent.push(ys);
        }
        SyntheticCorpus { corpus: TrainingCorpus { users, theta: Some(thetas) }, latent, texts }
    }
}

fn render_text(counts: &[u32], words: u32, rng: &mut ChaCha8Rng) -> String {
    let mut toks: Vec<String> = Vec::with_capacity(words as usize);
    for (j, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            toks.push(cue_word(j));
        }
    }
    while toks.len() < words as usize {
        toks.push(filler_word(rng.random_range(0..FILLER)));
    }
    toks.shuffle(rng);
    toks.join(" ")
}

/// Pearson correlation; zero when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / libm::sqrt(saa * sbb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{compile, CompileOptions, Lemmatizer};
    use crate::personality::evidence::extract_evidence;

    fn strong() -> SyntheticGenerator {
        SyntheticGenerator::random(&GeneratorSpec::strong(&["warmth", "anxiety"], 4), 3).unwrap()
    }

    #[test]
    fn deterministic() {
        let g = strong();
        assert_eq!(g, strong());
        assert_eq!(g.generate(20, 300, 9, true), g.generate(20, 300, 9, true));
        assert_ne!(g.generate(20, 300, 9, false).corpus, g.generate(20, 300, 10, false).corpus);
    }

    #[test]
    fn texts_reproduce_counts() {
        let g = strong();
        let s = g.generate(10, 400, 1, true);
        let m = compile(&g.lexicon.cue_patterns(), Lemmatizer::Rules, &CompileOptions::default()).unwrap();
        for (text, ev) in s.texts.iter().zip(&s.corpus.users) {
            let got = extract_evidence(text, &g.lexicon, &m).unwrap();
            assert_eq!(got.counts, ev.counts);
            assert_eq!(got.n_tokens, 400);
        }
    }

    #[test]
    fn latent_moments_match_parameters() {
        let g = strong();
        let s = g.generate(4000, 0, 5, false);
        for t in &g.model.traits {
            for p in &t.items {
                let col: Vec<f64> = s.latent.iter().map(|r| r[p.item]).collect();
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                let total = p.lambda * p.lambda + p.sigma2;
                // about five standard errors of each moment
                assert!((mean - p.mu).abs() < 5.0 * libm::sqrt(total / n), "mean {mean} vs {}", p.mu);
                assert!((var - total).abs() < 5.0 * total * libm::sqrt(2.0 / n), "var {var} vs {total}");
            }
        }
    }

    #[test]
    fn zero_loadings_carry_no_trait_signal() {
        let mut spec = GeneratorSpec::strong(&["warmth"], 3);
        spec.lambda = (0.0, 0.0);
        let g = SyntheticGenerator::random(&spec, 2).unwrap();
        let s = g.generate(3000, 2000, 4, false);
        let ti = trait_index("warmth").unwrap();
        let theta: Vec<f64> = s.corpus.theta.as_ref().unwrap().iter().map(|t| t[ti]).collect();
        for j in 0..3 {
            let x: Vec<f64> = s.corpus.users.iter().map(|u| u.rates[j]).collect();
            assert!(correlation(&x, &theta).abs() < 0.08);
        }
    }

    #[test]
    fn unknown_trait_rejected() {
        let spec = GeneratorSpec::strong(&["charm"], 2);
        assert_eq!(SyntheticGenerator::random(&spec, 0), Err(TraitError::UnknownTrait("charm".into())));
    }

    #[test]
    fn parameters_over_a_given_lexicon() {
        let lex = strong().lexicon;
        let spec = GeneratorSpec::strong(&[], 0);
        let g = SyntheticGenerator::random_over(lex.clone(), &spec, 11).unwrap();
        assert_eq!(g.lexicon, lex);
        let items: usize = g.model.traits.iter().map(|t| t.items.len()).sum();
        assert_eq!(items, lex.len());
        for p in &g.model.trait_params("anxiety").unwrap().items {
            assert_eq!(lex.entries()[p.item].trait_id, "anxiety");
            assert!((0.6..=0.9).contains(&p.lambda));
        }
    }
}
