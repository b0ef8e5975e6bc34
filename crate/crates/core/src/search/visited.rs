use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::lnf::RelevanceSet;
use crate::model::State;
use crate::rational::Rational;

/// `s_prime` is dominated by `s`: same propositions and no solution-relevant
/// variable higher in `s_prime`.
pub fn dominated_by(rv: &RelevanceSet, s_prime: &State, s: &State) -> bool {
    s_prime.props == s.props && rv.iter().all(|v| s_prime.vals[v.0] <= s.vals[v.0])
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    props: FixedBitSet,
    relevant: Vec<Rational>,
}

/// Visited states bucketed by propositions and relevant values. Values of
/// variables outside `rV` are left out of the key so that states differing
/// only there share a bucket.
#[derive(Clone, Debug)]
pub struct VisitedTable<'a> {
    rv: &'a RelevanceSet,
    buckets: HashMap<Key, Vec<(State, Rational)>>,
    len: usize,
}

impl<'a> VisitedTable<'a> {
    pub fn new(rv: &'a RelevanceSet) -> Self {
        VisitedTable { rv, buckets: HashMap::new(), len: 0 }
    }

    fn key(&self, s: &State) -> Key {
        Key { props: s.props.clone(), relevant: self.rv.iter().map(|v| s.vals[v.0].clone()).collect() }
    }

    /// True if a stored state dominates `s` and was reached with cost at most
    /// `g`.
    pub fn dominates(&self, s: &State, g: &Rational) -> bool {
        self.buckets
            .get(&self.key(s))
            .is_some_and(|b| b.iter().any(|(t, tg)| tg <= g && dominated_by(self.rv, s, t)))
    }

    pub fn insert(&mut self, s: State, g: Rational) {
        let key = self.key(&s);
        self.buckets.entry(key).or_default().push((s, g));
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
