//! Problem instances, rankings, coverage semantics and the
//! satisfying-time objective.
//!
//! An instance has documents with topic sets `C_s`, and users with an
//! interest set `I_u` plus a threshold `K_u`. A ranking is a permutation
//! of all documents; user `u`'s satisfying time is the first prefix
//! length covering at least `K_u` topics of `I_u`, and the objective is
//! the sum of satisfying times.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense index of a document in instance order.
pub type DocIdx = usize;
/// Dense index of a user in instance order.
pub type UserIdx = usize;
/// Dense index of a topic in instance order.
pub type TopicIdx = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown document index {0}")]
    UnknownDocument(usize),
    #[error("unknown user index {0}")]
    UnknownUser(usize),
    #[error("unknown topic id {0:?}")]
    UnknownTopicId(String),
    #[error("unknown document id {0:?}")]
    UnknownDocumentId(String),
    #[error("order is not a permutation of the documents")]
    NotAPermutation,
    #[error("user {0} cannot be satisfied by the full document set")]
    UnsatisfiableUser(usize),
}

/// Fixed-width bitset over the topic universe.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TopicSet {
    blocks: Vec<u64>,
}

impl TopicSet {
    pub fn empty(n_topics: usize) -> Self {
        TopicSet {
            blocks: vec![0; n_topics.div_ceil(64)],
        }
    }

    pub fn from_indices(n_topics: usize, indices: &[TopicIdx]) -> Self {
        let mut s = Self::empty(n_topics);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, idx: TopicIdx) {
        self.blocks[idx / 64] |= 1 << (idx % 64);
    }

    #[inline]
    pub fn contains(&self, idx: TopicIdx) -> bool {
        self.blocks
            .get(idx / 64)
            .is_some_and(|b| b & (1 << (idx % 64)) != 0)
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union_with(&mut self, other: &TopicSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersection_count(&self, other: &TopicSet) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &TopicSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &TopicSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &TopicSet) -> TopicSet {
        TopicSet {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &TopicSet) -> TopicSet {
        TopicSet {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = TopicIdx> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &b)| {
            let mut bits = b;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(bi * 64 + tz)
                }
            })
        })
    }
}

impl fmt::Debug for TopicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An RDC problem instance.
///
/// Identifiers are opaque strings; all algorithmic code works on the
/// dense indices. Construction resolves names but performs no semantic
/// validation — call [`Instance::validate`] to collect violations.
#[derive(Clone, Debug)]
pub struct Instance {
    topic_ids: Vec<String>,
    doc_ids: Vec<String>,
    doc_topics: Vec<TopicSet>,
    user_ids: Vec<String>,
    user_interests: Vec<TopicSet>,
    thresholds: Vec<usize>,
}

/// One semantic defect found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateTopicId(String),
    DuplicateDocumentId(String),
    DuplicateUserId(String),
    /// Topic appears in no document (the universe must equal the union
    /// of the document topic sets).
    UncoveredTopic(String),
    /// `K_u` outside `1..=|I_u|`.
    ThresholdOutOfRange { user: String, k: usize, interest_size: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateTopicId(id) => write!(f, "duplicate topic id {id:?}"),
            Violation::DuplicateDocumentId(id) => write!(f, "duplicate document id {id:?}"),
            Violation::DuplicateUserId(id) => write!(f, "duplicate user id {id:?}"),
            Violation::UncoveredTopic(id) => write!(f, "topic {id:?} appears in no document"),
            Violation::ThresholdOutOfRange { user, k, interest_size } => write!(
                f,
                "user {user:?}: threshold {k} outside 1..=|I_u|={interest_size}"
            ),
        }
    }
}

impl Instance {
    /// Build from named parts. Unknown topic references are hard errors;
    /// everything else is left to `validate`.
    pub fn new(
        topics: Vec<String>,
        documents: Vec<(String, Vec<String>)>,
        users: Vec<(String, Vec<String>, usize)>,
    ) -> Result<Self, ModelError> {
        let topic_index: HashMap<&str, TopicIdx> = topics
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let resolve = |names: &[String]| -> Result<Vec<TopicIdx>, ModelError> {
            names
                .iter()
                .map(|n| {
                    topic_index
                        .get(n.as_str())
                        .copied()
                        .ok_or_else(|| ModelError::UnknownTopicId(n.clone()))
                })
                .collect()
        };
        let n = topics.len();
        let mut doc_ids = Vec::with_capacity(documents.len());
        let mut doc_topics = Vec::with_capacity(documents.len());
        for (id, ts) in &documents {
            doc_ids.push(id.clone());
            doc_topics.push(TopicSet::from_indices(n, &resolve(ts)?));
        }
        let mut user_ids = Vec::with_capacity(users.len());
        let mut user_interests = Vec::with_capacity(users.len());
        let mut thresholds = Vec::with_capacity(users.len());
        for (id, interests, k) in &users {
            user_ids.push(id.clone());
            user_interests.push(TopicSet::from_indices(n, &resolve(interests)?));
            thresholds.push(*k);
        }
        Ok(Instance {
            topic_ids: topics,
            doc_ids,
            doc_topics,
            user_ids,
            user_interests,
            thresholds,
        })
    }

    /// Build from dense indices with canonical ids (`e1..`, `s1..`, `u1..`).
    pub fn from_indexed(
        n_topics: usize,
        docs: Vec<Vec<TopicIdx>>,
        users: Vec<(Vec<TopicIdx>, usize)>,
    ) -> Self {
        Instance {
            topic_ids: (1..=n_topics).map(|i| format!("e{i}")).collect(),
            doc_ids: (1..=docs.len()).map(|i| format!("s{i}")).collect(),
            doc_topics: docs
                .iter()
                .map(|d| TopicSet::from_indices(n_topics, d))
                .collect(),
            user_ids: (1..=users.len()).map(|i| format!("u{i}")).collect(),
            user_interests: users
                .iter()
                .map(|(ts, _)| TopicSet::from_indices(n_topics, ts))
                .collect(),
            thresholds: users.iter().map(|(_, k)| *k).collect(),
        }
    }

    pub fn n_topics(&self) -> usize {
        self.topic_ids.len()
    }
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn topic_ids(&self) -> &[String] {
        &self.topic_ids
    }
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }
    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn doc_topics(&self, s: DocIdx) -> &TopicSet {
        &self.doc_topics[s]
    }
    pub fn all_doc_topics(&self) -> &[TopicSet] {
        &self.doc_topics
    }
    pub fn interests(&self, u: UserIdx) -> &TopicSet {
        &self.user_interests[u]
    }
    pub fn threshold(&self, u: UserIdx) -> usize {
        self.thresholds[u]
    }

    pub fn doc_index(&self, id: &str) -> Option<DocIdx> {
        self.doc_ids.iter().position(|d| d == id)
    }
    pub fn user_index(&self, id: &str) -> Option<UserIdx> {
        self.user_ids.iter().position(|u| u == id)
    }

    /// Collect every invariant violation. Empty result means the
    /// instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashMap::new();
        for id in &self.topic_ids {
            if seen.insert(id, ()).is_some() {
                out.push(Violation::DuplicateTopicId(id.clone()));
            }
        }
        seen.clear();
        for id in &self.doc_ids {
            if seen.insert(id, ()).is_some() {
                out.push(Violation::DuplicateDocumentId(id.clone()));
            }
        }
        seen.clear();
        for id in &self.user_ids {
            if seen.insert(id, ()).is_some() {
                out.push(Violation::DuplicateUserId(id.clone()));
            }
        }
        let mut covered = TopicSet::empty(self.n_topics());
        for d in &self.doc_topics {
            covered.union_with(d);
        }
        for (i, id) in self.topic_ids.iter().enumerate() {
            if !covered.contains(i) {
                out.push(Violation::UncoveredTopic(id.clone()));
            }
        }
        for u in 0..self.n_users() {
            let size = self.user_interests[u].count();
            let k = self.thresholds[u];
            if k < 1 || k > size {
                out.push(Violation::ThresholdOutOfRange {
                    user: self.user_ids[u].clone(),
                    k,
                    interest_size: size,
                });
            }
        }
        out
    }

    /// Number of topics of `I_u` covered by the union of `doc_subset`.
    ///
    /// Monotone and submodular in the subset.
    pub fn coverage_count(&self, user: UserIdx, doc_subset: &[DocIdx]) -> Result<usize, ModelError> {
        if user >= self.n_users() {
            return Err(ModelError::UnknownUser(user));
        }
        let mut union = TopicSet::empty(self.n_topics());
        for &s in doc_subset {
            if s >= self.n_docs() {
                return Err(ModelError::UnknownDocument(s));
            }
            union.union_with(&self.doc_topics[s]);
        }
        Ok(union.intersection_count(&self.user_interests[user]))
    }
}

/// Running coverage of a document prefix: the covered topic set plus the
/// per-user count of covered interesting topics.
#[derive(Clone, Debug)]
pub struct CoverageState {
    covered: TopicSet,
    counts: Vec<usize>,
}

impl CoverageState {
    pub fn new(instance: &Instance) -> Self {
        CoverageState {
            covered: TopicSet::empty(instance.n_topics()),
            counts: vec![0; instance.n_users()],
        }
    }

    /// Add one document, updating covered topics and per-user counts.
    pub fn add_doc(&mut self, instance: &Instance, doc: DocIdx) {
        let fresh = instance.doc_topics[doc].difference(&self.covered);
        if fresh.is_empty() {
            return;
        }
        for (u, interests) in instance.user_interests.iter().enumerate() {
            self.counts[u] += fresh.intersection_count(interests);
        }
        self.covered.union_with(&fresh);
    }

    pub fn covered(&self) -> &TopicSet {
        &self.covered
    }

    pub fn user_count(&self, u: UserIdx) -> usize {
        self.counts[u]
    }

    pub fn satisfied(&self, instance: &Instance, u: UserIdx) -> bool {
        self.counts[u] >= instance.thresholds[u]
    }
}

/// A full ranking: document permutation plus per-user satisfying times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub order: Vec<DocIdx>,
    /// 1-based satisfying time per user.
    pub satisfy_times: Vec<usize>,
    pub total_cost: u64,
}

fn check_permutation(instance: &Instance, order: &[DocIdx]) -> Result<(), ModelError> {
    let n = instance.n_docs();
    if order.len() != n {
        return Err(ModelError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for &s in order {
        if s >= n || seen[s] {
            return Err(ModelError::NotAPermutation);
        }
        seen[s] = true;
    }
    Ok(())
}

/// Evaluate a permutation: per-user satisfying times and total cost.
pub fn evaluate(instance: &Instance, order: &[DocIdx]) -> Result<Ranking, ModelError> {
    check_permutation(instance, order)?;
    let mut state = CoverageState::new(instance);
    let mut times = vec![0usize; instance.n_users()];
    let mut remaining = instance.n_users();
    for (pos, &s) in order.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        state.add_doc(instance, s);
        for u in 0..instance.n_users() {
            if times[u] == 0 && state.satisfied(instance, u) {
                times[u] = pos + 1;
                remaining -= 1;
            }
        }
    }
    if let Some(u) = times.iter().position(|&t| t == 0) {
        if instance.n_users() > 0 {
            return Err(ModelError::UnsatisfiableUser(u));
        }
    }
    let total_cost = times.iter().map(|&t| t as u64).sum();
    Ok(Ranking {
        order: order.to_vec(),
        satisfy_times: times,
        total_cost,
    })
}

/// Concatenate per-round selections into a permutation of `0..n_docs`.
///
/// Duplicates keep their first occurrence; within a round documents are
/// emitted in index order; documents never selected are appended at the
/// end in index order.
pub fn complete_ranking_indices(
    n_docs: usize,
    round_selections: &[Vec<DocIdx>],
) -> Result<Vec<DocIdx>, ModelError> {
    let mut emitted = vec![false; n_docs];
    let mut order = Vec::with_capacity(n_docs);
    for round in round_selections {
        let mut sel = round.clone();
        sel.sort_unstable();
        for s in sel {
            if s >= n_docs {
                return Err(ModelError::UnknownDocument(s));
            }
            if !emitted[s] {
                emitted[s] = true;
                order.push(s);
            }
        }
    }
    for s in 0..n_docs {
        if !emitted[s] {
            order.push(s);
        }
    }
    Ok(order)
}

/// [`complete_ranking_indices`] against an instance's document set.
pub fn complete_ranking(
    instance: &Instance,
    round_selections: &[Vec<DocIdx>],
) -> Result<Vec<DocIdx>, ModelError> {
    complete_ranking_indices(instance.n_docs(), round_selections)
}
