//! Finite posets with the Alexandrov topology (opens are up-sets).

use std::collections::HashMap;

use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("relation is not antisymmetric: {0} <= {1} and {1} <= {0}")]
    NotAntisymmetric(String, String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(String),
    #[error("lattice of opens exceeds {0} members")]
    TooManyOpens(usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct PosetSpace {
    names: Vec<String>,
    index: HashMap<String, usize>,
    up: Vec<PointSet>,
    down: Vec<PointSet>,
    upper_covers: Vec<Vec<usize>>,
    lower_covers: Vec<Vec<usize>>,
    linear: Vec<usize>,
}

impl std::fmt::Debug for PosetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PosetSpace({:?}, hasse {:?})", self.names, self.hasse())
    }
}

impl PosetSpace {
    /// Builds the reflexive-transitive closure of the given relation pairs `a <= b`.
    pub fn new(names: Vec<String>, pairs: &[(String, String)]) -> Result<Self, PosetError> {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PosetError::DuplicatePoint(n.clone()));
            }
        }
        let mut idx_pairs = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let ia = *index.get(a).ok_or_else(|| PosetError::UnknownPoint(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| PosetError::UnknownPoint(b.clone()))?;
            idx_pairs.push((ia, ib));
        }
        Self::from_indices(names, &idx_pairs)
    }

    pub fn from_indices(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = names.len();
        let mut up: Vec<PointSet> = (0..n).map(|i| PointSet::singleton(n, i)).collect();
        for &(a, b) in pairs {
            up[a].insert(b);
        }
        for k in 0..n {
            for i in 0..n {
                if i != k && up[i].contains(k) {
                    let uk = up[k].clone();
                    up[i] = up[i].union(&uk);
                }
            }
        }
        for i in 0..n {
            for j in up[i].iter() {
                if j != i && up[j].contains(i) {
                    return Err(PosetError::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        let mut down: Vec<PointSet> = (0..n).map(|_| PointSet::empty(n)).collect();
        for i in 0..n {
            for j in up[i].iter() {
                down[j].insert(i);
            }
        }
        let mut upper_covers = vec![Vec::new(); n];
        let mut lower_covers = vec![Vec::new(); n];
        for x in 0..n {
            for y in up[x].iter() {
                if y == x {
                    continue;
                }
                let between = up[x].intersection(&down[y]);
                if between.len() == 2 {
                    upper_covers[x].push(y);
                    lower_covers[y].push(x);
                }
            }
        }
        // Linear extension: sort by size of the down-set, ties by index.
        let mut linear: Vec<usize> = (0..n).collect();
        linear.sort_by_key(|&x| (down[x].len(), x));
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(PosetSpace { names, index, up, down, upper_covers, lower_covers, linear })
    }

    /// The poset with a single point named `name`.
    pub fn point(name: &str) -> Self {
        Self::from_indices(vec![name.to_string()], &[]).expect("one point")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// Minimal open neighbourhood `U_x = {y : x <= y}`.
    pub fn up(&self, x: usize) -> &PointSet {
        &self.up[x]
    }

    /// Closure of a point: `{y : y <= x}`.
    pub fn down(&self, x: usize) -> &PointSet {
        &self.down[x]
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper_covers[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower_covers[x]
    }

    /// Points in an order where `x < y` implies `x` comes first.
    pub fn linear_extension(&self) -> &[usize] {
        &self.linear
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.len())
    }

    pub fn set_of(&self, names: &[&str]) -> Result<PointSet, PosetError> {
        let mut s = self.empty_set();
        for n in names {
            s.insert(self.index_of(n).ok_or_else(|| PosetError::UnknownPoint(n.to_string()))?);
        }
        Ok(s)
    }

    pub fn up_closure(&self, s: &PointSet) -> PointSet {
        let mut out = self.empty_set();
        for x in s.iter() {
            out = out.union(&self.up[x]);
        }
        out
    }

    pub fn down_closure(&self, s: &PointSet) -> PointSet {
        let mut out = self.empty_set();
        for x in s.iter() {
            out = out.union(&self.down[x]);
        }
        out
    }

    pub fn is_open(&self, s: &PointSet) -> bool {
        s.iter().all(|x| self.up[x].is_subset(s))
    }

    pub fn is_closed(&self, s: &PointSet) -> bool {
        s.iter().all(|x| self.down[x].is_subset(s))
    }

    /// A chain `a <= b <= c` with `a, c` in `s` and `b` outside, if one exists.
    pub fn convexity_witness(&self, s: &PointSet) -> Option<(usize, usize, usize)> {
        for a in s.iter() {
            for c in s.iter() {
                if a == c || !self.leq(a, c) {
                    continue;
                }
                let between = self.up[a].intersection(&self.down[c]);
                if let Some(b) = between.difference(s).iter().next() {
                    return Some((a, b, c));
                }
            }
        }
        None
    }

    /// Locally closed subsets are exactly the order-convex ones.
    pub fn is_locally_closed(&self, s: &PointSet) -> bool {
        self.convexity_witness(s).is_none()
    }

    /// All covering pairs `(x, y)` with `x < y` and nothing strictly between.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for &y in &self.upper_covers[x] {
                out.push((x, y));
            }
        }
        out
    }

    /// Covering pairs of the induced order on `s`.
    pub fn hasse_within(&self, s: &PointSet) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in s.iter() {
            for y in self.up[x].intersection(s).iter() {
                if y == x {
                    continue;
                }
                let between = self.up[x].intersection(&self.down[y]).intersection(s);
                if between.len() == 2 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Number of edges in a longest chain.
    pub fn height(&self) -> usize {
        let mut h = vec![0usize; self.len()];
        for &x in &self.linear {
            for &y in &self.lower_covers[x] {
                h[x] = h[x].max(h[y] + 1);
            }
        }
        h.into_iter().max().unwrap_or(0)
    }

    pub fn minimal_in(&self, s: &PointSet) -> Vec<usize> {
        s.iter().filter(|&x| self.down[x].intersection(s).len() == 1).collect()
    }

    pub fn maximal_in(&self, s: &PointSet) -> Vec<usize> {
        s.iter().filter(|&x| self.up[x].intersection(s).len() == 1).collect()
    }

    /// Induced subposet; the returned vector maps new indices to old ones.
    pub fn subposet(&self, s: &PointSet) -> (PosetSpace, Vec<usize>) {
        let pts = s.to_vec();
        let names = pts.iter().map(|&i| self.names[i].clone()).collect();
        let mut pairs = Vec::new();
        for (a, &x) in pts.iter().enumerate() {
            for (b, &y) in pts.iter().enumerate() {
                if a != b && self.leq(x, y) {
                    pairs.push((a, b));
                }
            }
        }
        (PosetSpace::from_indices(names, &pairs).expect("suborder of a poset"), pts)
    }

    /// Product order; the pair `(i, j)` has index `i * other.len() + j`.
    pub fn product(&self, other: &PosetSpace) -> PosetSpace {
        let m = other.len();
        let mut names = Vec::with_capacity(self.len() * m);
        for a in &self.names {
            for b in &other.names {
                names.push(format!("({a}|{b})"));
            }
        }
        let mut pairs = Vec::new();
        for (x, y) in self.hasse() {
            for j in 0..m {
                pairs.push((x * m + j, y * m + j));
            }
        }
        for (x, y) in other.hasse() {
            for i in 0..self.len() {
                pairs.push((i * m + x, i * m + y));
            }
        }
        PosetSpace::from_indices(names, &pairs).expect("product of posets")
    }

    pub fn opposite(&self) -> PosetSpace {
        let pairs: Vec<(usize, usize)> = self.hasse().into_iter().map(|(x, y)| (y, x)).collect();
        PosetSpace::from_indices(self.names.clone(), &pairs).expect("opposite of a poset")
    }

    /// All strictly increasing chains `x0 < ... < xk` with `k <= max_k`, grouped by `k`.
    pub fn chains(&self, max_k: usize) -> Vec<Vec<Vec<usize>>> {
        let mut by_len: Vec<Vec<Vec<usize>>> = vec![(0..self.len()).map(|x| vec![x]).collect()];
        for k in 1..=max_k {
            let mut next = Vec::new();
            for c in &by_len[k - 1] {
                let last = *c.last().expect("nonempty chain");
                for y in self.up[last].iter() {
                    if y != last {
                        let mut d = c.clone();
                        d.push(y);
                        next.push(d);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            by_len.push(next);
        }
        by_len
    }

    /// Every up-set, ordered by size then by membership bits.
    pub fn all_up_sets(&self, cap: usize) -> Result<Vec<PointSet>, PosetError> {
        let order: Vec<usize> = self.linear.iter().rev().copied().collect();
        let mut out = Vec::new();
        let mut cur = self.empty_set();
        self.enum_up(&order, 0, &mut cur, &mut out, cap)?;
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.to_vec().cmp(&b.to_vec())));
        Ok(out)
    }

    fn enum_up(
        &self,
        order: &[usize],
        k: usize,
        cur: &mut PointSet,
        out: &mut Vec<PointSet>,
        cap: usize,
    ) -> Result<(), PosetError> {
        if k == order.len() {
            if out.len() >= cap {
                return Err(PosetError::TooManyOpens(cap));
            }
            out.push(cur.clone());
            return Ok(());
        }
        let x = order[k];
        self.enum_up(order, k + 1, cur, out, cap)?;
        if self.up[x].iter().all(|y| y == x || cur.contains(y)) {
            cur.insert(x);
            self.enum_up(order, k + 1, cur, out, cap)?;
            cur.remove(x);
        }
        Ok(())
    }

    pub fn names_of(&self, s: &PointSet) -> Vec<String> {
        s.iter().map(|i| self.names[i].clone()).collect()
    }
}

/// Chain poset `p0 < p1 < ... < p{n-1}`.
pub fn chain_poset(n: usize) -> PosetSpace {
    let names = (0..n).map(|i| format!("p{i}")).collect();
    let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    PosetSpace::from_indices(names, &pairs).expect("chain")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> PosetSpace {
        PosetSpace::new(vec!["a".into(), "e".into()], &[("a".into(), "e".into())]).unwrap()
    }

    #[test]
    fn sierpinski_opens() {
        let p = sierpinski();
        let opens = p.all_up_sets(100).unwrap();
        let named: Vec<Vec<String>> = opens.iter().map(|o| p.names_of(o)).collect();
        assert_eq!(named, vec![vec![], vec!["e".to_string()], vec!["a".to_string(), "e".to_string()]]);
    }

    #[test]
    fn rejects_cycles() {
        let r = PosetSpace::new(
            vec!["a".into(), "b".into()],
            &[("a".into(), "b".into()), ("b".into(), "a".into())],
        );
        assert!(matches!(r, Err(PosetError::NotAntisymmetric(_, _))));
    }

    #[test]
    fn convexity() {
        let p = chain_poset(3);
        let s = PointSet::from_iter(3, [0, 2]);
        assert_eq!(p.convexity_witness(&s), Some((0, 1, 2)));
        assert_eq!(p.height(), 2);
        assert_eq!(p.chains(5).len(), 3);
    }

    #[test]
    fn product_order() {
        let p = sierpinski().product(&sierpinski());
        assert_eq!(p.len(), 4);
        assert_eq!(p.height(), 2);
        assert!(p.leq(0, 3));
        assert!(!p.leq(1, 2));
    }
}
