//! Finitely generated abelian groups in invariant-factor canonical form.
//!
//! A group is `Z^free_rank + Z_{d_1} + ... + Z_{d_t}` with each `d_k >= 2`
//! and `d_k | d_{k+1}`. Two values are isomorphic exactly when they are
//! field-equal, so == is the isomorphism test. Generator order is fixed:
//! free generators first, then torsion generators ascending.

use super::matrix::{smith_form, Int, Matrix};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FgAbGroup {
    free_rank: usize,
    torsion: Vec<Int>,
}

impl FgAbGroup {
    pub fn new(free_rank: usize, torsion: Vec<Int>) -> Result<Self> {
        for (k, d) in torsion.iter().enumerate() {
            if *d < Int::from(2) {
                return Err(Error::BadCanonicalForm(format!("invariant factor {d} < 2")));
            }
            if k > 0 && !(d % &torsion[k - 1]).is_zero() {
                return Err(Error::BadCanonicalForm(format!(
                    "invariant factor {} does not divide {}",
                    torsion[k - 1],
                    d
                )));
            }
        }
        Ok(FgAbGroup { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        FgAbGroup { free_rank: 0, torsion: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup { free_rank: rank, torsion: vec![] }
    }

    pub fn cyclic(d: u64) -> Self {
        assert!(d >= 2);
        FgAbGroup { free_rank: 0, torsion: vec![Int::from(d)] }
    }

    /// (Z_2)^r
    pub fn elementary_two(r: usize) -> Self {
        FgAbGroup { free_rank: 0, torsion: vec![Int::from(2); r] }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[Int] {
        &self.torsion
    }

    /// Number of generators in the canonical presentation.
    pub fn gens(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    /// Minimal number of generators.
    pub fn rank(&self) -> usize {
        self.gens()
    }

    /// Order of generator `k`; 0 encodes infinite.
    pub fn gen_order(&self, k: usize) -> Int {
        if k < self.free_rank {
            Int::zero()
        } else {
            self.torsion[k - self.free_rank].clone()
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn is_elementary_two(&self) -> bool {
        self.free_rank == 0 && self.torsion.iter().all(|d| *d == Int::from(2))
    }

    pub fn is_two_group(&self) -> bool {
        self.free_rank == 0
            && self.torsion.iter().all(|d| {
                let mut d = d.clone();
                while d.is_even() {
                    d /= 2;
                }
                d.is_one()
            })
    }

    /// None encodes infinite order.
    pub fn order(&self) -> Option<Int> {
        if self.free_rank > 0 {
            None
        } else {
            Some(self.torsion.iter().product())
        }
    }

    pub fn order_u64(&self) -> Option<u64> {
        self.order().and_then(|o| o.to_u64())
    }

    /// Least common multiple of element orders; None encodes infinite.
    /// The invariant-factor chain makes this the last torsion factor.
    pub fn exponent(&self) -> Option<Int> {
        if self.free_rank > 0 {
            None
        } else {
            Some(self.torsion.last().cloned().unwrap_or_else(Int::one))
        }
    }

    /// Columns `d_k * e_k` for each torsion generator: the relation lattice
    /// of the canonical presentation.
    pub fn relation_cols(&self) -> Matrix {
        let n = self.gens();
        let t = self.torsion.len();
        let mut m = Matrix::zeros(n, t);
        for (j, d) in self.torsion.iter().enumerate() {
            m[(self.free_rank + j, j)] = d.clone();
        }
        m
    }

    /// Orders of the canonical generators, 0 for free ones.
    pub fn gen_orders(&self) -> Vec<Int> {
        (0..self.gens()).map(|k| self.gen_order(k)).collect()
    }

    /// Reduce a coefficient vector to canonical coordinates: torsion
    /// coordinates into `0..d_k`, free coordinates untouched.
    pub fn reduce_vec(&self, mut coeffs: Vec<Int>) -> Vec<Int> {
        assert_eq!(coeffs.len(), self.gens(), "coefficient count mismatch");
        for (j, d) in self.torsion.iter().enumerate() {
            let c = &mut coeffs[self.free_rank + j];
            *c = c.mod_floor(d);
        }
        coeffs
    }

    pub fn element(&self, coeffs: Vec<Int>) -> GroupElement {
        GroupElement { parent: self.clone(), coeffs: self.reduce_vec(coeffs) }
    }

    pub fn element_i64(&self, coeffs: Vec<i64>) -> GroupElement {
        self.element(coeffs.into_iter().map(Int::from).collect())
    }

    pub fn zero_element(&self) -> GroupElement {
        GroupElement { parent: self.clone(), coeffs: vec![Int::zero(); self.gens()] }
    }

    pub fn basis_element(&self, k: usize) -> GroupElement {
        let mut coeffs = vec![Int::zero(); self.gens()];
        coeffs[k] = Int::one();
        self.element(coeffs)
    }

    /// All elements of a finite group, odometer order on coefficients
    /// (last coordinate fastest).
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        if self.free_rank > 0 {
            return Err(Error::TooLarge("cannot enumerate an infinite group".into()));
        }
        let mut out = vec![self.zero_element()];
        for (k, d) in self.torsion.iter().enumerate() {
            let d = d
                .to_usize()
                .ok_or_else(|| Error::TooLarge("torsion factor exceeds usize".into()))?;
            let mut next = Vec::with_capacity(out.len() * d);
            for el in &out {
                for c in 0..d {
                    let mut coeffs = el.coeffs.clone();
                    coeffs[k] = Int::from(c);
                    next.push(GroupElement { parent: self.clone(), coeffs });
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Group literal: `0`, or `free^r x d1 x d2 x ...`.
    pub fn literal(&self) -> String {
        if self.is_trivial() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("free^{}", self.free_rank));
        }
        for d in &self.torsion {
            parts.push(d.to_string());
        }
        parts.join(" x ")
    }

    /// Parse a group literal. Arbitrary cyclic factors are accepted and
    /// canonicalized, so `2 x 3` parses to the same value as `6`.
    pub fn parse_literal(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::BadLiteral("empty literal".into()));
        }
        if s == "0" {
            return Ok(FgAbGroup::trivial());
        }
        let mut free_rank = 0usize;
        let mut factors: Vec<Int> = Vec::new();
        for tok in s.split('x') {
            let tok = tok.trim();
            if tok == "free" {
                free_rank += 1;
            } else if let Some(r) = tok.strip_prefix("free^") {
                let r: usize = r
                    .parse()
                    .map_err(|_| Error::BadLiteral(format!("bad free rank in {tok:?}")))?;
                free_rank += r;
            } else {
                let d: Int = tok
                    .parse()
                    .map_err(|_| Error::BadLiteral(format!("bad cyclic order {tok:?}")))?;
                if d < Int::from(2) {
                    return Err(Error::BadLiteral(format!("cyclic order {d} < 2")));
                }
                factors.push(d);
            }
        }
        let mut orders = vec![Int::zero(); free_rank];
        orders.extend(factors);
        Ok(canonicalize_presentation(&orders).group)
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// An element in canonical coordinates of its parent group.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroupElement {
    parent: FgAbGroup,
    coeffs: Vec<Int>,
}

impl GroupElement {
    pub fn parent(&self) -> &FgAbGroup {
        &self.parent
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.parent, other.parent, "elements of different groups");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        self.parent.element(coeffs)
    }

    pub fn neg(&self) -> GroupElement {
        self.parent.element(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn sub(&self, other: &GroupElement) -> GroupElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, n: &Int) -> GroupElement {
        self.parent.element(self.coeffs.iter().map(|a| a * n).collect())
    }

    /// None encodes infinite order.
    pub fn order(&self) -> Option<Int> {
        let mut ord = Int::one();
        for (k, c) in self.coeffs.iter().enumerate() {
            let d = self.parent.gen_order(k);
            if d.is_zero() {
                if !c.is_zero() {
                    return None;
                }
            } else if !c.is_zero() {
                let co = &d / d.gcd(c);
                ord = ord.lcm(&co);
            }
        }
        Some(ord)
    }
}

/// A group presented as `Z^gens / column-lattice(relations)`, canonicalized.
///
/// `to_canonical` maps presentation coordinates to canonical coordinates of
/// `group`; `from_canonical` is a two-sided inverse modulo the relations,
/// valid whenever `relations` is the complete relation lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub group: FgAbGroup,
    pub to_canonical: Matrix,
    pub from_canonical: Matrix,
}

pub fn presented_group(gens: usize, relations: &Matrix) -> Presentation {
    assert_eq!(relations.rows(), gens, "relation matrix must have one row per generator");
    let s = smith_form(relations);
    let bound = gens.min(relations.cols());
    let mut free_idx = Vec::new();
    let mut torsion_idx = Vec::new();
    for i in 0..gens {
        if i >= bound || s.d[(i, i)].is_zero() {
            free_idx.push(i);
        } else if !s.d[(i, i)].is_one() {
            torsion_idx.push(i);
        }
    }
    // Free generators first, then torsion ascending; the Smith chain is
    // already ascending among the non-unit entries.
    let torsion: Vec<Int> = torsion_idx.iter().map(|&i| s.d[(i, i)].clone()).collect();
    let group = FgAbGroup { free_rank: free_idx.len(), torsion };
    let mut selected = free_idx;
    selected.extend(torsion_idx);
    let to_canonical = s.u.submatrix_rows(&selected);
    let from_canonical = s.u_inv.submatrix_cols(&selected);
    Presentation { group, to_canonical, from_canonical }
}

/// Canonicalize a direct sum of cyclic presentations given by `orders`
/// (0 encodes a free factor). Returns the canonical group and the
/// coordinate isomorphisms in both directions.
pub fn canonicalize_presentation(orders: &[Int]) -> Presentation {
    let gens = orders.len();
    let nonzero: Vec<Int> = orders.iter().filter(|o| !o.is_zero()).cloned().collect();
    let mut relations = Matrix::zeros(gens, nonzero.len());
    let mut j = 0;
    for (i, o) in orders.iter().enumerate() {
        if !o.is_zero() {
            assert!(!o.is_negative(), "negative order");
            relations[(i, j)] = o.clone();
            j += 1;
        }
    }
    presented_group(gens, &relations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_validation() {
        assert!(FgAbGroup::new(0, vec![Int::from(2), Int::from(4)]).is_ok());
        assert!(FgAbGroup::new(0, vec![Int::from(2), Int::from(3)]).is_err());
        assert!(FgAbGroup::new(0, vec![Int::from(1)]).is_err());
    }

    #[test]
    fn literal_round_trip() {
        for lit in ["0", "free^1", "2", "free^2 x 2 x 4", "3 x 6"] {
            let g = FgAbGroup::parse_literal(lit).unwrap();
            let again = FgAbGroup::parse_literal(&g.literal()).unwrap();
            assert_eq!(g, again);
        }
        assert_eq!(FgAbGroup::parse_literal("free^1 x 2 x 4").unwrap().literal(), "free^1 x 2 x 4");
    }

    #[test]
    fn literal_canonicalizes() {
        // Z_2 + Z_3 = Z_6
        let g = FgAbGroup::parse_literal("2 x 3").unwrap();
        assert_eq!(g, FgAbGroup::cyclic(6));
        // Z_4 + Z_2 reorders into the divisor chain.
        let g = FgAbGroup::parse_literal("4 x 2").unwrap();
        assert_eq!(g, FgAbGroup::new(0, vec![Int::from(2), Int::from(4)]).unwrap());
        // Compact CLI style without spaces.
        let g = FgAbGroup::parse_literal("2x2").unwrap();
        assert_eq!(g, FgAbGroup::elementary_two(2));
        assert_eq!(FgAbGroup::parse_literal("2 x 6 x 5").unwrap().literal(), "2 x 30");
    }

    #[test]
    fn orders_and_exponent() {
        let g = FgAbGroup::parse_literal("2 x 4").unwrap();
        assert_eq!(g.order(), Some(Int::from(8)));
        assert_eq!(g.exponent(), Some(Int::from(4)));
        assert_eq!(FgAbGroup::trivial().exponent(), Some(Int::one()));
        assert_eq!(FgAbGroup::parse_literal("free^1 x 2").unwrap().exponent(), None);
        let g = FgAbGroup::parse_literal("3 x 15").unwrap();
        assert_eq!(g.exponent(), Some(Int::from(15)));
    }

    #[test]
    fn element_arithmetic_and_order() {
        let g = FgAbGroup::parse_literal("free^1 x 4").unwrap();
        let x = g.element_i64(vec![0, 3]);
        assert_eq!(x.order(), Some(Int::from(4)));
        assert_eq!(x.add(&x).coeffs()[1], Int::from(2));
        let y = g.element_i64(vec![2, 0]);
        assert_eq!(y.order(), None);
        assert_eq!(x.scale(&Int::from(4)), g.zero_element());
        // Negative coefficients reduce into 0..d.
        let z = g.element_i64(vec![0, -1]);
        assert_eq!(z.coeffs()[1], Int::from(3));
    }

    #[test]
    fn element_enumeration() {
        let g = FgAbGroup::parse_literal("2 x 4").unwrap();
        let els = g.elements().unwrap();
        assert_eq!(els.len(), 8);
        assert_eq!(els.iter().filter(|e| e.order() == Some(Int::from(4))).count(), 4);
        assert!(FgAbGroup::free(1).elements().is_err());
    }

    #[test]
    fn presentation_canonicalization_round_trips() {
        // [4, 2, 6] -> Z_2 + Z_2 + Z_12
        let orders: Vec<Int> = [4, 2, 6].iter().map(|&d| Int::from(d)).collect();
        let p = canonicalize_presentation(&orders);
        assert_eq!(p.group, FgAbGroup::parse_literal("2 x 2 x 12").unwrap());
        // to_canonical * from_canonical = id modulo canonical orders
        let comp = p.to_canonical.mul(&p.from_canonical);
        for i in 0..p.group.gens() {
            for j in 0..p.group.gens() {
                let expect = if i == j { Int::one() } else { Int::zero() };
                let diff = &comp[(i, j)] - expect;
                let d = p.group.gen_order(i);
                assert!(
                    if d.is_zero() { diff.is_zero() } else { (&diff % &d).is_zero() },
                    "round trip failed at ({i},{j})"
                );
            }
        }
        // and the other composite is the identity modulo the presentation orders
        let comp = p.from_canonical.mul(&p.to_canonical);
        for i in 0..orders.len() {
            for j in 0..orders.len() {
                let expect = if i == j { Int::one() } else { Int::zero() };
                let diff = &comp[(i, j)] - expect;
                let d = &orders[i];
                assert!(
                    if d.is_zero() { diff.is_zero() } else { (&diff % d).is_zero() },
                    "reverse round trip failed at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn presentation_with_free_parts() {
        let orders: Vec<Int> = vec![Int::zero(), Int::from(4), Int::zero()];
        let p = canonicalize_presentation(&orders);
        assert_eq!(p.group, FgAbGroup::parse_literal("free^2 x 4").unwrap());
    }

    #[test]
    fn two_group_predicates() {
        assert!(FgAbGroup::elementary_two(3).is_elementary_two());
        assert!(FgAbGroup::parse_literal("2 x 8").unwrap().is_two_group());
        assert!(!FgAbGroup::parse_literal("2 x 8").unwrap().is_elementary_two());
        assert!(!FgAbGroup::parse_literal("6").unwrap().is_two_group());
        assert!(FgAbGroup::trivial().is_elementary_two());
        assert!(!FgAbGroup::free(1).is_two_group());
    }
}
