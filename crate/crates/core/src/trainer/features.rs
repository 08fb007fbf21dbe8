use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::equation::OpRuleSet;

/// A rule table abduced in one iteration, kept as a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationalFeature {
    pub rules: OpRuleSet,
    pub created_at_iteration: usize,
    pub source_consistency: usize,
}

/// The latest `capacity` features; pushing into a full buffer drops the oldest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBuffer {
    capacity: usize,
    items: VecDeque<RelationalFeature>,
}

impl FeatureBuffer {
    /// `capacity` must be positive.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "feature buffer needs a positive capacity");
        FeatureBuffer {
            capacity,
            items: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Returns the evicted feature, if any.
    pub fn push(&mut self, feature: RelationalFeature) -> Option<RelationalFeature> {
        let evicted = if self.items.len() == self.capacity {
            self.items.pop_front()
        } else {
            None
        };
        self.items.push_back(feature);
        evicted
    }

    /// Oldest first.
    pub fn snapshot(&self) -> Vec<RelationalFeature> {
        self.items.iter().copied().collect()
    }
}

/// The most frequent among the rule tables defining the most entries;
/// ties go to the one seen last.
pub fn consensus_rules(features: &[RelationalFeature]) -> Option<OpRuleSet> {
    let widest = features.iter().map(|f| f.rules.len()).max()?;
    let wide: Vec<&RelationalFeature> = features.iter().filter(|f| f.rules.len() == widest).collect();
    let mut best: Option<(usize, OpRuleSet)> = None;
    for f in &wide {
        let count = wide.iter().filter(|g| g.rules == f.rules).count();
        if best.is_none_or(|(c, _)| count >= c) {
            best = Some((count, f.rules));
        }
    }
    best.map(|(_, r)| r)
}
