//! Order-k token Markov sampler: the test-harness stand-in for a simple
//! text bot. Trained on token streams, sampled with a seeded RNG.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Transition table from k-token contexts to weighted continuations.
#[derive(Debug, Clone)]
pub struct MarkovModel {
    order: usize,
    /// context -> list of (next token, count); deterministic ordering.
    transitions: BTreeMap<Vec<u32>, Vec<(u32, u32)>>,
    /// contexts that opened a training document, with multiplicity
    starts: Vec<Vec<u32>>,
    /// unigram counts, the order-0 fallback
    unigrams: Vec<(u32, u32)>,
}

impl MarkovModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_contexts(&self) -> usize {
        self.transitions.len()
    }

    /// Count (k+1)-gram continuations over every document.
    pub fn train(docs: &[&[u32]], order: usize) -> Result<MarkovModel> {
        let mut transitions: BTreeMap<Vec<u32>, BTreeMap<u32, u32>> = BTreeMap::new();
        let mut starts = Vec::new();
        let mut unigram_counts: BTreeMap<u32, u32> = BTreeMap::new();
        for doc in docs {
            for &t in doc.iter() {
                *unigram_counts.entry(t).or_insert(0) += 1;
            }
            if doc.len() > order {
                starts.push(doc[..order].to_vec());
                for w in doc.windows(order + 1) {
                    let ctx = w[..order].to_vec();
                    *transitions.entry(ctx).or_default().entry(w[order]).or_insert(0) += 1;
                }
            }
        }
        if unigram_counts.is_empty() {
            return Err(Error::invalid("markov training needs non-empty documents"));
        }
        if order > 0 && transitions.is_empty() {
            return Err(Error::invalid(
                "markov training needs documents longer than the order",
            ));
        }
        Ok(MarkovModel {
            order,
            transitions: transitions
                .into_iter()
                .map(|(ctx, next)| (ctx, next.into_iter().collect()))
                .collect(),
            starts,
            unigrams: unigram_counts.into_iter().collect(),
        })
    }

    fn weighted_pick(choices: &[(u32, u32)], rng: &mut ChaCha8Rng) -> u32 {
        let total: u64 = choices.iter().map(|&(_, c)| c as u64).sum();
        let mut target = rng.random_range(0..total);
        for &(token, c) in choices {
            if target < c as u64 {
                return token;
            }
            target -= c as u64;
        }
        choices.last().unwrap().0
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        if self.starts.is_empty() {
            Vec::new()
        } else {
            self.starts[rng.random_range(0..self.starts.len())].clone()
        }
    }

    /// Sample `length` tokens. Dead-end contexts (observed only at the end of
    /// a training document) restart from a fresh document-initial context.
    pub fn generate(&self, length: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::with_capacity(length);
        if self.order == 0 {
            while out.len() < length {
                out.push(Self::weighted_pick(&self.unigrams, rng));
            }
            return out;
        }
        let mut context = self.random_start(rng);
        out.extend_from_slice(&context);
        while out.len() < length {
            match self.transitions.get(&context) {
                Some(next) => {
                    let token = Self::weighted_pick(next, rng);
                    out.push(token);
                    context.remove(0);
                    context.push(token);
                }
                None => {
                    context = self.random_start(rng);
                    out.extend_from_slice(&context);
                }
            }
        }
        out.truncate(length);
        out
    }
}

/// Character-level variant: contexts are Unicode scalar values, so the
/// sampler invents pseudo-words. The closer analog of a simple neural bot.
pub struct CharMarkov {
    inner: MarkovModel,
}

impl CharMarkov {
    pub fn train(texts: &[&str], order: usize) -> Result<CharMarkov> {
        let streams: Vec<Vec<u32>> = texts
            .iter()
            .map(|t| t.chars().map(|c| c as u32).collect())
            .collect();
        let refs: Vec<&[u32]> = streams.iter().map(|s| s.as_slice()).collect();
        Ok(CharMarkov {
            inner: MarkovModel::train(&refs, order)?,
        })
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    /// Sample a text of roughly `chars` characters.
    pub fn generate(&self, chars: usize, rng: &mut ChaCha8Rng) -> String {
        self.inner
            .generate(chars, rng)
            .into_iter()
            .map(|c| char::from_u32(c).unwrap_or(' '))
            .collect()
    }
}
