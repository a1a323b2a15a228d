//! Bounded exhaustive enumeration: hom-sets, automorphism groups,
//! injections, and the list of finite abelian groups up to an order bound.
//!
//! Every enumeration here has a fixed deterministic order; searches built
//! on top inherit reproducibility from that.

use super::group::{FgAbGroup, GroupElement};
use super::hom::Homomorphism;
use super::matrix::{Int, Matrix};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Hard cap on brute-force enumerations; desk-scale searches stay far
/// below it, anything above is reported instead of attempted.
const MAX_ENUMERATION: u128 = 1 << 22;

fn matrix_lex(a: &Matrix, b: &Matrix) -> Ordering {
    for r in 0..a.rows() {
        for (x, y) in a.row(r).iter().zip(b.row(r)) {
            match x.cmp(y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
    }
    Ordering::Equal
}

pub fn elements_of_order_dividing(g: &FgAbGroup, d: &Int) -> Result<Vec<GroupElement>> {
    Ok(g.elements()?.into_iter().filter(|x| x.scale(d).is_zero()).collect())
}

/// All homomorphisms `source -> target`, ordered lexicographically by
/// reduced matrix. Errors when the hom-set is infinite (free generators on
/// both sides) or exceeds the enumeration cap.
pub fn enumerate_homomorphisms(
    source: &FgAbGroup,
    target: &FgAbGroup,
) -> Result<Vec<Homomorphism>> {
    // Candidate values for entry (k, j), ascending.
    let mut value_lists: Vec<Vec<Int>> = Vec::new();
    let mut count: u128 = 1;
    for k in 0..target.gens() {
        let e = target.gen_order(k);
        for j in 0..source.gens() {
            let d = source.gen_order(j);
            let values: Vec<Int> = if d.is_zero() {
                if e.is_zero() {
                    return Err(Error::InfiniteHomSet);
                }
                let e = e.to_u64().ok_or_else(|| Error::TooLarge("huge target order".into()))?;
                (0..e).map(Int::from).collect()
            } else if e.is_zero() {
                vec![Int::zero()]
            } else {
                let g = e.gcd(&d);
                let step = &e / &g;
                let g = g.to_u64().ok_or_else(|| Error::TooLarge("huge gcd".into()))?;
                (0..g).map(|t| Int::from(t) * &step).collect()
            };
            count = count.saturating_mul(values.len() as u128);
            if count > MAX_ENUMERATION {
                return Err(Error::TooLarge(format!(
                    "hom-set {source} -> {target} has more than {MAX_ENUMERATION} elements"
                )));
            }
            value_lists.push(values);
        }
    }
    let entries = value_lists.len();
    let mut idx = vec![0usize; entries];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let mut m = Matrix::zeros(target.gens(), source.gens());
        for (pos, &i) in idx.iter().enumerate() {
            let (k, j) = (pos / source.gens().max(1), pos % source.gens().max(1));
            m[(k, j)] = value_lists[pos][i].clone();
        }
        out.push(
            Homomorphism::new(source.clone(), target.clone(), m)
                .expect("enumerated entries satisfy well-definedness by construction"),
        );
        // Odometer, last entry fastest: lexicographic matrix order.
        let mut pos = entries;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < value_lists[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Memoized [`enumerate_automorphisms`], keyed by the canonical group
/// literal. Callers that revisit the same few groups thousands of times
/// (morphism-group enumeration, campaign rows) share one list.
pub(crate) fn cached_automorphisms(g: &FgAbGroup) -> Result<std::sync::Arc<Vec<Homomorphism>>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<Vec<Homomorphism>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = g.literal();
    if let Some(hit) = cache.lock().expect("automorphism cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let fresh = Arc::new(enumerate_automorphisms(g)?);
    cache.lock().expect("automorphism cache lock").insert(key, fresh.clone());
    Ok(fresh)
}

/// All automorphisms, ordered lexicographically by reduced matrix.
///
/// Finite groups are brute-forced over endomorphisms; `Z + torsion`
/// decomposes as units x translations x torsion automorphisms. Free rank
/// two or more is an infinite automorphism group.
pub fn enumerate_automorphisms(g: &FgAbGroup) -> Result<Vec<Homomorphism>> {
    match g.free_rank() {
        0 => {
            let mut out: Vec<Homomorphism> = enumerate_homomorphisms(g, g)?
                .into_iter()
                .filter(|f| f.is_surjective())
                .collect();
            out.sort_by(|a, b| matrix_lex(a.matrix(), b.matrix()));
            Ok(out)
        }
        1 => {
            let torsion = FgAbGroup::new(0, g.torsion().to_vec()).expect("torsion part is canonical");
            let torsion_autos = enumerate_automorphisms(&torsion)?;
            let shifts = torsion.elements()?;
            let t = torsion.gens();
            let mut out = Vec::with_capacity(2 * shifts.len() * torsion_autos.len());
            for unit in [Int::one(), -Int::one()] {
                for v in &shifts {
                    for phi in &torsion_autos {
                        let mut m = Matrix::zeros(1 + t, 1 + t);
                        m[(0, 0)] = unit.clone();
                        for k in 0..t {
                            m[(1 + k, 0)] = v.coeffs()[k].clone();
                            for j in 0..t {
                                m[(1 + k, 1 + j)] = phi.matrix()[(k, j)].clone();
                            }
                        }
                        out.push(
                            Homomorphism::new(g.clone(), g.clone(), m)
                                .expect("block automorphism is well-defined"),
                        );
                    }
                }
            }
            out.sort_by(|a, b| matrix_lex(a.matrix(), b.matrix()));
            Ok(out)
        }
        _ => Err(Error::InfiniteAutGroup),
    }
}

/// All injective homomorphisms `k -> pi` for finite `k`, `pi`, found by
/// column backtracking: candidate images must have the exact generator
/// order and every partial map must already be injective.
pub fn enumerate_injections(k: &FgAbGroup, pi: &FgAbGroup) -> Result<Vec<Homomorphism>> {
    assert!(pi.is_finite(), "injection enumeration requires a finite ambient group");
    if !k.is_finite() {
        return Ok(vec![]);
    }
    if k.is_trivial() {
        return Ok(vec![Homomorphism::zero(k, pi)]);
    }
    if let (Some(ko), Some(po)) = (k.order(), pi.order()) {
        if ko > po {
            return Ok(vec![]);
        }
    }
    let els = pi.elements()?;
    // Candidate columns per torsion factor: elements of exactly that order.
    let mut candidates: Vec<Vec<GroupElement>> = Vec::new();
    for d in k.torsion() {
        candidates
            .push(els.iter().filter(|x| x.order().as_ref() == Some(d)).cloned().collect());
    }
    let mut out = Vec::new();
    let mut chosen: Vec<GroupElement> = Vec::new();
    fn recurse(
        k: &FgAbGroup,
        pi: &FgAbGroup,
        candidates: &[Vec<GroupElement>],
        chosen: &mut Vec<GroupElement>,
        out: &mut Vec<Homomorphism>,
    ) {
        let j = chosen.len();
        if j == k.torsion().len() {
            let mut m = Matrix::zeros(pi.gens(), j);
            for (c, x) in chosen.iter().enumerate() {
                for r in 0..pi.gens() {
                    m[(r, c)] = x.coeffs()[r].clone();
                }
            }
            out.push(
                Homomorphism::new(k.clone(), pi.clone(), m)
                    .expect("candidate orders divide the generator orders"),
            );
            return;
        }
        let prefix = FgAbGroup::new(0, k.torsion()[..=j].to_vec())
            .expect("prefix of an invariant chain is canonical");
        for x in &candidates[j] {
            chosen.push(x.clone());
            let mut m = Matrix::zeros(pi.gens(), j + 1);
            for (c, y) in chosen.iter().enumerate() {
                for r in 0..pi.gens() {
                    m[(r, c)] = y.coeffs()[r].clone();
                }
            }
            let partial = Homomorphism::new(prefix.clone(), pi.clone(), m)
                .expect("candidate orders divide the generator orders");
            if partial.is_injective() {
                recurse(k, pi, candidates, chosen, out);
            }
            chosen.pop();
        }
    }
    recurse(k, pi, &candidates, &mut chosen, &mut out);
    Ok(out)
}

/// Every finite abelian group of order at most `max`, as canonical forms,
/// ordered by (order, invariant chain). With `two_groups_only` the list is
/// restricted to 2-groups.
pub fn finite_abelian_groups_up_to(max: u64, two_groups_only: bool) -> Vec<FgAbGroup> {
    fn chains(m: u64, base: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if m == 1 {
            out.push(prefix.clone());
            return;
        }
        let mut d = base.max(2);
        while d <= m {
            if m % d == 0 && d % base == 0 {
                prefix.push(d);
                chains(m / d, d, prefix, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    for n in 1..=max {
        if two_groups_only && !n.is_power_of_two() {
            continue;
        }
        let mut cs = Vec::new();
        chains(n, 1, &mut Vec::new(), &mut cs);
        for c in cs {
            out.push(
                FgAbGroup::new(0, c.into_iter().map(Int::from).collect())
                    .expect("chain is canonical by construction"),
            );
        }
    }
    out
}
