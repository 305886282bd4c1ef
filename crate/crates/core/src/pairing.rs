//! Pair partitions of {0,..,r-1}, their genus, and small permutation helpers.
//!
//! The genus of a pairing pi (viewed as a fixed-point-free involution) is
//! defined through the cycle count of gamma o pi, where gamma is the full
//! cycle (0 1 ... r-1):  genus = (r/2 + 1 - #cycles(gamma o pi)) / 2.
//! Genus 0 coincides with the non-crossing pairings.

use crate::error::{Error, Result};

/// Hard cap on word length for pairing enumeration: (16-1)!! ~ 2 * 10^6.
pub const MAX_PAIRING_LETTERS: usize = 16;

/// Permutation of {0,..,r-1} stored as the image vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let r = map.len();
        let mut seen = vec![false; r];
        for &v in &map {
            if v >= r || seen[v] {
                return Err(Error::domain("not a permutation"));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(r: usize) -> Self {
        Permutation {
            map: (0..r).collect(),
        }
    }

    /// Full cycle p -> p+1 mod r.
    pub fn full_cycle(r: usize) -> Self {
        Permutation {
            map: (0..r).map(|p| (p + 1) % r).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, p: usize) -> usize {
        self.map[p]
    }

    /// (self o rhs)(p) = self(rhs(p)).
    pub fn compose(&self, rhs: &Permutation) -> Permutation {
        assert_eq!(self.len(), rhs.len());
        Permutation {
            map: rhs.map.iter().map(|&p| self.map[p]).collect(),
        }
    }

    pub fn num_cycles(&self) -> usize {
        let r = self.len();
        let mut seen = vec![false; r];
        let mut cycles = 0;
        for start in 0..r {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.map[p];
            }
        }
        cycles
    }

    /// All r! permutations in lexicographic order; intended for small r.
    pub fn enumerate_all(r: usize) -> Result<Vec<Permutation>> {
        if r > 8 {
            return Err(Error::guard(format!(
                "permutation enumeration capped at r = 8, got {r}"
            )));
        }
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(r);
        let mut used = vec![false; r];
        fn rec(
            r: usize,
            current: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<Permutation>,
        ) {
            if current.len() == r {
                out.push(Permutation {
                    map: current.clone(),
                });
                return;
            }
            for v in 0..r {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    rec(r, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        rec(r, &mut current, &mut used, &mut out);
        Ok(out)
    }
}

/// Pair partition of {0,..,r-1}: partner[p] = q iff {p,q} is a block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    partner: Vec<usize>,
}

impl Pairing {
    /// Build from explicit blocks (0-based).
    pub fn from_pairs(r: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if r % 2 != 0 || pairs.len() * 2 != r {
            return Err(Error::domain("pair list does not cover an even ground set"));
        }
        let mut partner = vec![usize::MAX; r];
        for &(p, q) in pairs {
            if p >= r || q >= r || p == q || partner[p] != usize::MAX || partner[q] != usize::MAX {
                return Err(Error::domain("invalid pair list"));
            }
            partner[p] = q;
            partner[q] = p;
        }
        Ok(Pairing { partner })
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn partner(&self, p: usize) -> usize {
        self.partner[p]
    }

    /// Blocks {p, partner(p)} with p < partner(p), in increasing p order.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter(|&p| p < self.partner[p])
            .map(|p| (p, self.partner[p]))
            .collect()
    }

    pub fn as_permutation(&self) -> Permutation {
        Permutation {
            map: self.partner.clone(),
        }
    }

    /// Genus from the cycle count of gamma o pi; always a nonnegative integer
    /// bounded by r/4.
    pub fn genus(&self) -> u32 {
        let r = self.len();
        if r == 0 {
            return 0;
        }
        let gamma = Permutation::full_cycle(r);
        let cycles = gamma.compose(&self.as_permutation()).num_cycles();
        let num = r / 2 + 1 - cycles;
        debug_assert!(num % 2 == 0, "genus defect must be even");
        (num / 2) as u32
    }

    /// Crossing test: pi is non-crossing iff no p < q < pi(p) < pi(q).
    pub fn is_noncrossing(&self) -> bool {
        let r = self.len();
        for p in 0..r {
            let pp = self.partner[p];
            if pp <= p {
                continue;
            }
            for q in (p + 1)..pp {
                if self.partner[q] > pp {
                    return false;
                }
            }
        }
        true
    }
}

/// (r-1)!! for even r.
pub fn double_factorial_count(r: usize) -> u64 {
    let mut c = 1u64;
    let mut k = r.saturating_sub(1);
    while k > 1 {
        c *= k as u64;
        k -= 2;
    }
    c
}

/// Catalan number C_k.
pub fn catalan(k: usize) -> u64 {
    let mut c = vec![0u64; k + 1];
    c[0] = 1;
    for n in 1..=k {
        for i in 0..n {
            c[n] += c[i] * c[n - 1 - i];
        }
    }
    c[k]
}

/// Visit every pairing of {0,..,r-1} exactly once, in a fixed order
/// (smallest unpaired point first, partners in increasing order).
pub fn for_each_pairing<F: FnMut(&Pairing)>(r: usize, mut f: F) -> Result<()> {
    if r % 2 != 0 {
        return Err(Error::domain(format!("pairings need even r, got {r}")));
    }
    if r > MAX_PAIRING_LETTERS {
        return Err(Error::guard(format!(
            "pairing enumeration capped at r = {MAX_PAIRING_LETTERS}, got {r}"
        )));
    }
    let mut partner = vec![usize::MAX; r];
    fn rec<F: FnMut(&Pairing)>(partner: &mut Vec<usize>, f: &mut F) {
        let r = partner.len();
        let p = match partner.iter().position(|&v| v == usize::MAX) {
            None => {
                f(&Pairing {
                    partner: partner.clone(),
                });
                return;
            }
            Some(p) => p,
        };
        for q in (p + 1)..r {
            if partner[q] == usize::MAX {
                partner[p] = q;
                partner[q] = p;
                rec(partner, f);
                partner[p] = usize::MAX;
                partner[q] = usize::MAX;
            }
        }
    }
    rec(&mut partner, &mut f);
    Ok(())
}

/// Materialized enumeration; prefer `for_each_pairing` in hot paths.
pub fn enumerate_pairings(r: usize) -> Result<Vec<Pairing>> {
    let mut out = Vec::new();
    for_each_pairing(r, |p| out.push(p.clone()))?;
    Ok(out)
}

/// Brute-force check of the tuple-indicator identity
/// sum over (i_1..i_r) in {1..d}^r of prod_p 1_{i_p = i_{sigma(p)}} = d^{#cycles(sigma)}.
/// Returns the brute-force sum after asserting the identity.
pub fn indicator_sum_check(sigma: &Permutation, d: usize) -> Result<u64> {
    let r = sigma.len();
    if r > 8 {
        return Err(Error::guard(format!(
            "indicator sum brute force capped at r = 8, got {r}"
        )));
    }
    if d > 4 || d == 0 {
        return Err(Error::guard(format!(
            "indicator sum brute force needs 1 <= d <= 4, got {d}"
        )));
    }
    let mut total = 0u64;
    let mut tuple = vec![0usize; r];
    loop {
        let ok = (0..r).all(|p| tuple[p] == tuple[sigma.apply(p)]);
        if ok {
            total += 1;
        }
        // Odometer increment over {0,..,d-1}^r.
        let mut k = 0;
        loop {
            if k == r {
                let expected = (d as u64).pow(sigma.num_cycles() as u32);
                if total != expected {
                    return Err(Error::domain(format!(
                        "indicator identity violated: {total} vs d^cycles = {expected}"
                    )));
                }
                return Ok(total);
            }
            tuple[k] += 1;
            if tuple[k] < d {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_counts_are_double_factorials() {
        let expected = [1u64, 3, 15, 105, 945];
        for (i, &e) in expected.iter().enumerate() {
            let r = 2 * (i + 1);
            assert_eq!(enumerate_pairings(r).unwrap().len() as u64, e);
            assert_eq!(double_factorial_count(r), e);
        }
    }

    #[test]
    fn odd_r_is_rejected() {
        assert!(enumerate_pairings(3).is_err());
        assert!(enumerate_pairings(18).is_err());
    }

    #[test]
    fn genus_of_small_pairings() {
        // {0,1},{2,3} and {0,3},{1,2} are planar; {0,2},{1,3} has genus 1.
        let p1 = Pairing::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let p2 = Pairing::from_pairs(4, &[(0, 3), (1, 2)]).unwrap();
        let p3 = Pairing::from_pairs(4, &[(0, 2), (1, 3)]).unwrap();
        assert_eq!(p1.genus(), 0);
        assert_eq!(p2.genus(), 0);
        assert_eq!(p3.genus(), 1);
        assert!(p1.is_noncrossing());
        assert!(p2.is_noncrossing());
        assert!(!p3.is_noncrossing());
    }

    #[test]
    fn genus_distribution_r4_r6_r8() {
        let hist = |r: usize| -> Vec<usize> {
            let mut h = vec![0usize; r / 4 + 1];
            for_each_pairing(r, |p| h[p.genus() as usize] += 1).unwrap();
            h
        };
        assert_eq!(hist(4), vec![2, 1]);
        assert_eq!(hist(6), vec![5, 10]);
        assert_eq!(hist(8), vec![14, 70, 21]);
    }

    #[test]
    fn noncrossing_counts_are_catalan() {
        for k in 1..=6usize {
            let r = 2 * k;
            let mut nc = 0u64;
            for_each_pairing(r, |p| {
                if p.is_noncrossing() {
                    nc += 1;
                }
            })
            .unwrap();
            assert_eq!(nc, catalan(k), "NC2({r})");
        }
        assert_eq!(
            (1..=5).map(catalan).collect::<Vec<_>>(),
            vec![1, 2, 5, 14, 42]
        );
    }

    #[test]
    fn genus_zero_iff_noncrossing() {
        for k in 1..=5usize {
            for_each_pairing(2 * k, |p| {
                assert_eq!(p.genus() == 0, p.is_noncrossing(), "pairing {:?}", p.blocks());
            })
            .unwrap();
        }
    }

    #[test]
    fn genus_is_bounded_by_quarter_r() {
        for k in 1..=5usize {
            let r = 2 * k;
            for_each_pairing(r, |p| {
                assert!((p.genus() as usize) <= r / 4);
            })
            .unwrap();
        }
    }

    #[test]
    fn indicator_identity_brute_force() {
        for r in 1..=5usize {
            for sigma in Permutation::enumerate_all(r).unwrap() {
                for d in 1..=3usize {
                    let s = indicator_sum_check(&sigma, d).unwrap();
                    assert_eq!(s, (d as u64).pow(sigma.num_cycles() as u32));
                }
            }
        }
    }

    #[test]
    fn indicator_guards() {
        let sigma = Permutation::identity(9);
        assert!(indicator_sum_check(&sigma, 2).is_err());
        let sigma = Permutation::identity(4);
        assert!(indicator_sum_check(&sigma, 5).is_err());
    }

    #[test]
    fn permutation_compose_and_cycles() {
        let gamma = Permutation::full_cycle(4);
        assert_eq!(gamma.num_cycles(), 1);
        let id = Permutation::identity(4);
        assert_eq!(id.num_cycles(), 4);
        let composed = gamma.compose(&gamma);
        assert_eq!(composed.apply(0), 2);
        assert_eq!(composed.num_cycles(), 2);
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn pairing_from_pairs_validates() {
        assert!(Pairing::from_pairs(4, &[(0, 1), (1, 2)]).is_err());
        assert!(Pairing::from_pairs(4, &[(0, 0), (1, 2)]).is_err());
        assert!(Pairing::from_pairs(3, &[(0, 1)]).is_err());
    }
}
