//! The thicket query graph.
//!
//! The edge `A -> B` carries the expected Littlestone-dimension drop when the
//! learner queries `A`, the target is `B`, and the counterexample is drawn from
//! `μ` conditioned on `Δ(A, B)`:
//!
//! ```text
//! d(A, B) = Σ_{x ∈ Δ(A,B)} μ(x) · (Ldim(C) - Ldim(C_{x = B(x)})) / μ(Δ(A,B))
//! ```
//!
//! The query rank of `A` is `min_{B ≠ A} d(A, B)` and the max-min learner
//! queries a concept of maximal rank (lowest index on ties).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;

use crate::concept::{Concept, ConceptClass, ConceptSet};
use crate::error::{Error, Result};
use crate::littlestone::LdimCache;
use crate::rational::{self, Rational};

/// Query rank; `Infinite` is the empty infimum of a singleton class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryRank {
    Finite(Rational),
    Infinite,
}

impl QueryRank {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            QueryRank::Finite(r) => Some(r),
            QueryRank::Infinite => None,
        }
    }
}

impl Ord for QueryRank {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (QueryRank::Finite(a), QueryRank::Finite(b)) => a.cmp(b),
            (QueryRank::Finite(_), QueryRank::Infinite) => Ordering::Less,
            (QueryRank::Infinite, QueryRank::Finite(_)) => Ordering::Greater,
            (QueryRank::Infinite, QueryRank::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for QueryRank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QueryRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryRank::Finite(r) => f.write_str(&rational::format(r)),
            QueryRank::Infinite => f.write_str("inf"),
        }
    }
}

/// Whose drop an edge averages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeConvention {
    /// Drops of the target `B` on edge `A -> B`.
    #[default]
    Target,
    /// Drops of the query `A`. Wrong for the learner; kept for mutation tests.
    Query,
}

/// Lazily weighted thicket graph on a subclass of a root class.
///
/// Vertices are root-class concept indices.
pub struct ThicketGraph<'c, 'a> {
    cache: &'c LdimCache<'a>,
    members: ConceptSet,
    vertices: Vec<usize>,
    convention: EdgeConvention,
    weights: RefCell<HashMap<(usize, usize), Rational>>,
}

impl<'c, 'a> ThicketGraph<'c, 'a> {
    pub fn new(cache: &'c LdimCache<'a>, members: ConceptSet) -> Self {
        Self::with_convention(cache, members, EdgeConvention::Target)
    }

    pub fn with_convention(
        cache: &'c LdimCache<'a>,
        members: ConceptSet,
        convention: EdgeConvention,
    ) -> Self {
        let vertices = members.ones().collect();
        Self {
            cache,
            members,
            vertices,
            convention,
            weights: RefCell::new(HashMap::new()),
        }
    }

    /// Graph on the whole root class.
    pub fn full(cache: &'c LdimCache<'a>) -> Self {
        Self::new(cache, cache.class().all())
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.cache.class()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn members(&self) -> &ConceptSet {
        &self.members
    }

    pub fn ldim(&self) -> i32 {
        self.cache.ldim(&self.members)
    }

    fn check_member(&self, v: usize) -> Result<()> {
        if v < self.members.len() && self.members.contains(v) {
            Ok(())
        } else {
            Err(Error::NotInClass)
        }
    }

    /// Exact `d(query, target)`.
    pub fn edge_weight(&self, query: usize, target: usize) -> Result<Rational> {
        self.check_member(query)?;
        self.check_member(target)?;
        if query == target {
            return Err(Error::SelfEdge);
        }
        if let Some(w) = self.weights.borrow().get(&(query, target)) {
            return Ok(w.clone());
        }
        let w = self.compute_weight(query, target);
        self.weights.borrow_mut().insert((query, target), w.clone());
        Ok(w)
    }

    fn compute_weight(&self, query: usize, target: usize) -> Rational {
        let class = self.class();
        let domain = class.domain();
        let delta = class
            .concept(query)
            .symmetric_difference(class.concept(target))
            .expect("concepts share the domain");
        let learned_from = match self.convention {
            EdgeConvention::Target => target,
            EdgeConvention::Query => query,
        };
        let mut total = Rational::zero();
        let mut weighted = Rational::zero();
        for &x in &delta {
            let w = domain.weight(x);
            total += w;
            let drop = self.cache.drop_of(&self.members, learned_from, x);
            if drop != 0 {
                weighted += w * rational::int(drop as i64);
            }
        }
        weighted / total
    }

    pub fn query_rank(&self, query: usize) -> Result<QueryRank> {
        self.check_member(query)?;
        let mut best: Option<Rational> = None;
        for &b in &self.vertices {
            if b == query {
                continue;
            }
            let w = self.edge_weight(query, b)?;
            if best.as_ref().is_none_or(|m| w < *m) {
                best = Some(w);
            }
        }
        Ok(best.map_or(QueryRank::Infinite, QueryRank::Finite))
    }

    /// Lowest-index concept of maximal query rank, with that rank.
    pub fn max_min_query(&self) -> Result<(usize, QueryRank)> {
        let mut best: Option<(usize, QueryRank)> = None;
        for &a in &self.vertices {
            // Row minimum with early exit: once the running minimum is no
            // better than the incumbent, `a` cannot replace it.
            let mut row_min = QueryRank::Infinite;
            for &b in &self.vertices {
                if b == a {
                    continue;
                }
                let w = QueryRank::Finite(self.edge_weight(a, b)?);
                if w < row_min {
                    row_min = w;
                }
                if best.as_ref().is_some_and(|(_, r)| row_min <= *r) {
                    break;
                }
            }
            if best.as_ref().is_none_or(|(_, r)| row_min > *r) {
                best = Some((a, row_min));
            }
        }
        best.ok_or(Error::EmptyClass)
    }

    /// Searches simple cycles of length `2..=max_len` whose edges all weigh at
    /// most 1/2 with at least one strictly below. Returns the vertices in
    /// cycle order.
    pub fn find_deficient_cycle(&self, max_len: usize) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut matrix = vec![vec![None; n]; n];
        for (i, &a) in self.vertices.iter().enumerate() {
            for (j, &b) in self.vertices.iter().enumerate() {
                if i != j {
                    matrix[i][j] = Some(self.edge_weight(a, b).expect("members"));
                }
            }
        }
        deficient_cycle(&matrix, max_len)
            .map(|cycle| cycle.into_iter().map(|i| self.vertices[i]).collect())
    }
}

/// Deficient-cycle search on a dense weight matrix (`None` on the diagonal).
///
/// Only edges of weight at most 1/2 can lie on a deficient cycle, so the DFS
/// runs on that subgraph. Each cycle is enumerated from its smallest vertex.
pub fn deficient_cycle(weights: &[Vec<Option<Rational>>], max_len: usize) -> Option<Vec<usize>> {
    let half = rational::half();
    let n = weights.len();
    let light: Vec<Vec<(usize, bool)>> = weights
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(j, w)| w.as_ref().filter(|w| **w <= half).map(|w| (j, *w < half)))
                .collect()
        })
        .collect();

    fn extend(
        light: &[Vec<(usize, bool)>],
        start: usize,
        strict_so_far: bool,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
    ) -> bool {
        let last = *path.last().expect("nonempty path");
        for &(next, strict) in &light[last] {
            let strict = strict_so_far || strict;
            if next == start && path.len() >= 2 && strict {
                return true;
            }
            if next > start && !on_path[next] && path.len() < max_len {
                path.push(next);
                on_path[next] = true;
                if extend(light, start, strict, max_len, path, on_path) {
                    return true;
                }
                on_path[next] = false;
                path.pop();
            }
        }
        false
    }

    let mut on_path = vec![false; n];
    for start in 0..n {
        let mut path = vec![start];
        on_path[start] = true;
        if extend(&light, start, false, max_len, &mut path, &mut on_path) {
            return Some(path);
        }
        on_path[start] = false;
    }
    None
}

fn member_index(class: &ConceptClass, concept: &Concept) -> Result<usize> {
    class.index_of(concept).ok_or(Error::NotInClass)
}

/// `d(A, B)` on a whole class.
pub fn edge_weight(class: &ConceptClass, query: &Concept, target: &Concept) -> Result<Rational> {
    let a = member_index(class, query)?;
    let b = member_index(class, target)?;
    let cache = LdimCache::new(class);
    ThicketGraph::full(&cache).edge_weight(a, b)
}

pub fn query_rank(class: &ConceptClass, query: &Concept) -> Result<QueryRank> {
    let a = member_index(class, query)?;
    let cache = LdimCache::new(class);
    ThicketGraph::full(&cache).query_rank(a)
}

pub fn max_min_query(class: &ConceptClass) -> Result<Concept> {
    let cache = LdimCache::new(class);
    let (a, _) = ThicketGraph::full(&cache).max_min_query()?;
    Ok(class.concept(a).clone())
}

pub fn find_deficient_cycle(class: &ConceptClass, max_len: usize) -> Option<Vec<usize>> {
    let cache = LdimCache::new(class);
    ThicketGraph::full(&cache).find_deficient_cycle(max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn c3() -> ConceptClass {
        ConceptClass::from_bitstrings(&["10", "01", "11"]).unwrap()
    }

    /// Direct evaluation of the defining sum with materialised restrictions.
    fn brute_weight(class: &ConceptClass, a: usize, b: usize) -> Rational {
        let d = crate::littlestone::ldim(class);
        let (ca, cb) = (class.concept(a), class.concept(b));
        let delta = ca.symmetric_difference(cb).unwrap();
        let total = class.domain().mass(&delta);
        let mut sum = Rational::zero();
        for x in delta {
            let r = class
                .restrict(&[(x, cb.value(x))].into_iter().collect())
                .unwrap();
            let drop = d - crate::littlestone::ldim(&r);
            sum += class.domain().weight(x) * int(drop as i64);
        }
        sum / total
    }

    #[test]
    fn c3_edge_weights() {
        let c = c3();
        let (a, b) = (c.concept(0), c.concept(1));
        assert_eq!(edge_weight(&c, a, b).unwrap(), ratio(1, 2));
        assert_eq!(edge_weight(&c, b, a).unwrap(), ratio(1, 2));
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(
                        edge_weight(&c, c.concept(i), c.concept(j)).unwrap(),
                        brute_weight(&c, i, j)
                    );
                }
            }
        }
        assert_eq!(edge_weight(&c, a, a), Err(Error::SelfEdge));
    }

    #[test]
    fn c3_ranks_and_query() {
        let c = c3();
        assert_eq!(
            query_rank(&c, c.concept(2)).unwrap(),
            QueryRank::Finite(int(1))
        );
        // d(10, 11) = 0: restricting x2 to 1 leaves {01, 11}, still Ldim 1.
        assert_eq!(brute_weight(&c, 0, 2), int(0));
        assert_eq!(
            query_rank(&c, c.concept(0)).unwrap(),
            QueryRank::Finite(int(0))
        );
        assert_eq!(
            query_rank(&c, c.concept(1)).unwrap(),
            QueryRank::Finite(int(0))
        );
        assert_eq!(max_min_query(&c).unwrap().to_bitstring(), "11");
        assert!(find_deficient_cycle(&c, 3).is_none());
    }

    #[test]
    fn singleton_conventions() {
        let c = ConceptClass::from_bitstrings(&["01"]).unwrap();
        assert_eq!(query_rank(&c, c.concept(0)).unwrap(), QueryRank::Infinite);
        assert_eq!(max_min_query(&c).unwrap(), *c.concept(0));
        assert!(find_deficient_cycle(&c, 5).is_none());
        let empty = ConceptClass::empty(crate::concept::Domain::uniform(2));
        assert_eq!(max_min_query(&empty), Err(Error::EmptyClass));
    }

    #[test]
    fn two_concept_tie_breaks_low() {
        let dom = crate::concept::Domain::with_weights(vec![ratio(1, 5), ratio(4, 5)]).unwrap();
        let c = ConceptClass::from_bitstrings_weighted(dom, &["10", "01"]).unwrap();
        // Both edges weigh 1: every restriction isolates the target.
        assert_eq!(max_min_query(&c).unwrap().to_bitstring(), "10");
    }

    #[test]
    fn not_in_class() {
        let c = c3();
        let outsider = Concept::parse("00").unwrap();
        assert_eq!(query_rank(&c, &outsider), Err(Error::NotInClass));
    }

    #[test]
    fn planted_cycle_is_found() {
        let w = |n, d| Some(ratio(n, d));
        // 0 -> 1 -> 2 -> 0 with weights 1/2, 1/3, 1/2; every other edge heavy.
        let matrix = vec![
            vec![None, w(1, 2), w(1, 1)],
            vec![w(1, 1), None, w(1, 3)],
            vec![w(1, 2), w(1, 1), None],
        ];
        assert_eq!(deficient_cycle(&matrix, 3), Some(vec![0, 1, 2]));
        assert_eq!(deficient_cycle(&matrix, 2), None);

        // All edges exactly 1/2: not deficient.
        let flat = vec![
            vec![None, w(1, 2), w(1, 2)],
            vec![w(1, 2), None, w(1, 2)],
            vec![w(1, 2), w(1, 2), None],
        ];
        assert_eq!(deficient_cycle(&flat, 3), None);

        // Two-cycle with one strict edge.
        let pair = vec![vec![None, w(1, 4)], vec![w(1, 2), None]];
        assert_eq!(deficient_cycle(&pair, 2), Some(vec![0, 1]));
    }

    #[test]
    fn uniform_disjoint_singletons_have_flat_weights() {
        let c = ConceptClass::from_bitstrings(&["100", "010", "001"]).unwrap();
        let cache = LdimCache::new(&c);
        let g = ThicketGraph::full(&cache);
        for &a in g.vertices() {
            for &b in g.vertices() {
                if a != b {
                    assert_eq!(g.edge_weight(a, b).unwrap(), ratio(1, 2));
                }
            }
        }
        assert!(g.find_deficient_cycle(3).is_none());
    }
}
