//! Whitehead's universal quadratic functor Γ and the family Γ_n^1.
//!
//! Γ is determined on finitely generated abelian groups by
//! Γ(Z) = Z, Γ(Z_n) = Z_{2n} for even n and Z_n for odd n, together with
//! Γ(⊕_i A_i) = ⊕_i Γ(A_i) ⊕ ⊕_{i<j} A_i⊗A_j for an ordered cyclic
//! decomposition. Elements of the carrier are written over tagged
//! generators γ(a_i) and a_i⊗a_j; morphisms are induced tag-by-tag from
//! the quadratic expansion
//!
//! γ(Σ c_k e_k) = Σ c_k² γ(e_k) + Σ_{k<l} c_k c_l (e_k ⊗ e_l)
//!
//! and the bilinear pairing rewrites [e_k,e_k] = 2γ(e_k),
//! [e_l,e_k] = e_k⊗e_l for k < l.
//!
//! Γ_2^1 = Γ; for n ≥ 3, Γ_n^1(A) = A ⊗ Z_2 with the induced mod-2 maps.

use crate::abgroup::{
    canonicalize_presentation, FgAbGroup, GroupElement, Homomorphism, Int, Matrix, Presentation,
};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Tagged generator of a Γ-carrier: `GammaGen(i)` is γ(a_i) for the i-th
/// cyclic summand of the base (or a_i⊗1 in the mod-2 regime),
/// `TensorGen(i, j)` is a_i⊗a_j with i < j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GammaTag {
    GammaGen(usize),
    TensorGen(usize, usize),
}

impl fmt::Display for GammaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaTag::GammaGen(i) => write!(f, "g({i})"),
            GammaTag::TensorGen(i, j) => write!(f, "t({i},{j})"),
        }
    }
}

impl std::str::FromStr for GammaTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadLiteral(format!("not a gamma tag: {s:?}"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("g(").and_then(|r| r.strip_suffix(')')) {
            return rest.trim().parse::<usize>().map(GammaTag::GammaGen).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("t(").and_then(|r| r.strip_suffix(')')) {
            let (i, j) = rest.split_once(',').ok_or_else(bad)?;
            let i = i.trim().parse::<usize>().map_err(|_| bad())?;
            let j = j.trim().parse::<usize>().map_err(|_| bad())?;
            if i >= j {
                return Err(bad());
            }
            return Ok(GammaTag::TensorGen(i, j));
        }
        Err(bad())
    }
}

/// Which functor the carrier realizes: the quadratic Γ (degree n = 2) or
/// the mod-2 tensor functor (degrees n ≥ 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GammaKind {
    Quadratic,
    ModTwo,
}

/// One cyclic summand of the primary refinement of the base group.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Summand {
    /// Order of the summand: 0 for Z, otherwise a prime power.
    order: Int,
    /// Canonical base generator this summand lives on.
    base_col: usize,
    /// Summand generator expressed in the base: `gen_mult * e_{base_col}`.
    gen_mult: Int,
    /// Projection coefficient: summand coordinate of x is
    /// `proj_mult * x_{base_col}` mod `order`.
    proj_mult: Int,
}

/// Γ(A) (or A⊗Z_2) presented over tagged generators, together with the
/// isomorphism onto its canonical carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaGroup {
    kind: GammaKind,
    base: FgAbGroup,
    summands: Vec<Summand>,
    basis_tags: Vec<GammaTag>,
    tag_orders: Vec<Int>,
    carrier: Presentation,
}

pub(crate) fn factorize(d: &Int) -> Vec<(Int, u32)> {
    let mut rest = d.clone();
    let mut out = Vec::new();
    let mut p = Int::from(2);
    while &p * &p <= rest {
        if (&rest % &p).is_zero() {
            let mut e = 0;
            while (&rest % &p).is_zero() {
                rest /= &p;
                e += 1;
            }
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if rest > Int::one() {
        out.push((rest, 1));
    }
    out
}

fn modular_inverse(a: &Int, m: &Int) -> Int {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "inverse of non-unit {a} mod {m}");
    e.x.mod_floor(m)
}

fn primary_refinement(base: &FgAbGroup) -> Vec<Summand> {
    let mut summands: Vec<Summand> = (0..base.free_rank())
        .map(|k| Summand {
            order: Int::zero(),
            base_col: k,
            gen_mult: Int::one(),
            proj_mult: Int::one(),
        })
        .collect();
    let mut torsion: Vec<(Int, u32, Summand)> = Vec::new();
    for (k, d) in base.torsion().iter().enumerate() {
        for (p, e) in factorize(d) {
            let q = p.pow(e);
            let cofactor = d / &q;
            torsion.push((
                p,
                e,
                Summand {
                    order: q.clone(),
                    base_col: base.free_rank() + k,
                    gen_mult: cofactor.clone(),
                    proj_mult: modular_inverse(&cofactor, &q),
                },
            ));
        }
    }
    torsion.sort_by(|a, b| (&a.0, a.1, a.2.base_col).cmp(&(&b.0, b.1, b.2.base_col)));
    summands.extend(torsion.into_iter().map(|(_, _, s)| s));
    summands
}

/// Order of the tensor summand A_i ⊗ A_j: gcd of the two cyclic orders,
/// with 0 standing for Z (so gcd(0, d) = d and gcd(0, 0) = 0).
fn tensor_order(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}

fn gamma_gen_order(d: &Int) -> Int {
    if d.is_zero() || d.is_odd() {
        d.clone()
    } else {
        d * 2
    }
}

impl GammaGroup {
    fn build(base: &FgAbGroup, kind: GammaKind) -> GammaGroup {
        let summands = primary_refinement(base);
        let s = summands.len();
        let mut basis_tags = Vec::new();
        let mut tag_orders = Vec::new();
        match kind {
            GammaKind::Quadratic => {
                for (i, sm) in summands.iter().enumerate() {
                    basis_tags.push(GammaTag::GammaGen(i));
                    tag_orders.push(gamma_gen_order(&sm.order));
                }
                for i in 0..s {
                    for j in i + 1..s {
                        basis_tags.push(GammaTag::TensorGen(i, j));
                        tag_orders.push(tensor_order(&summands[i].order, &summands[j].order));
                    }
                }
            }
            GammaKind::ModTwo => {
                let two = Int::from(2);
                for (i, sm) in summands.iter().enumerate() {
                    basis_tags.push(GammaTag::GammaGen(i));
                    tag_orders.push(sm.order.gcd(&two));
                }
            }
        }
        let carrier = canonicalize_presentation(&tag_orders);
        GammaGroup { kind, base: base.clone(), summands, basis_tags, tag_orders, carrier }
    }

    pub fn kind(&self) -> GammaKind {
        self.kind
    }

    pub fn base(&self) -> &FgAbGroup {
        &self.base
    }

    /// The canonical-form group the tagged presentation is isomorphic to.
    pub fn carrier(&self) -> &FgAbGroup {
        &self.carrier.group
    }

    pub fn basis_tags(&self) -> &[GammaTag] {
        &self.basis_tags
    }

    pub fn tag_orders(&self) -> &[Int] {
        &self.tag_orders
    }

    pub fn tag_count(&self) -> usize {
        self.basis_tags.len()
    }

    /// Number of cyclic summands in the primary refinement of the base.
    pub fn summand_count(&self) -> usize {
        self.summands.len()
    }

    pub fn summand_orders(&self) -> Vec<Int> {
        self.summands.iter().map(|s| s.order.clone()).collect()
    }

    /// The i-th summand generator as an element of the base group.
    pub fn summand_gen(&self, i: usize) -> GroupElement {
        let sm = &self.summands[i];
        let mut coeffs = vec![Int::zero(); self.base.gens()];
        coeffs[sm.base_col] = sm.gen_mult.clone();
        self.base.element(coeffs)
    }

    fn tag_index(&self, tag: GammaTag) -> usize {
        let s = self.summands.len();
        match tag {
            GammaTag::GammaGen(i) => i,
            GammaTag::TensorGen(i, j) => {
                debug_assert!(i < j && j < s);
                s + i * (2 * s - i - 1) / 2 + (j - i - 1)
            }
        }
    }

    /// Coordinates of a base element over the primary refinement,
    /// reduced mod summand orders.
    pub fn summand_coords(&self, x: &GroupElement) -> Vec<Int> {
        assert_eq!(x.parent(), &self.base, "element of the wrong base group");
        self.summands
            .iter()
            .map(|sm| {
                let c = &sm.proj_mult * &x.coeffs()[sm.base_col];
                if sm.order.is_zero() {
                    c
                } else {
                    c.mod_floor(&sm.order)
                }
            })
            .collect()
    }

    fn reduce_tags(&self, mut v: Vec<Int>) -> Vec<Int> {
        for (c, d) in v.iter_mut().zip(&self.tag_orders) {
            if !d.is_zero() {
                *c = c.mod_floor(d);
            }
        }
        v
    }

    /// The element with the given tag coefficients.
    pub fn element(&self, coeffs: Vec<Int>) -> QuadraticElement {
        assert_eq!(coeffs.len(), self.tag_count(), "tag coefficient count mismatch");
        QuadraticElement { parent: self.clone(), coeffs: self.reduce_tags(coeffs) }
    }

    pub fn element_i64(&self, coeffs: Vec<i64>) -> QuadraticElement {
        self.element(coeffs.into_iter().map(Int::from).collect())
    }

    pub fn zero_element(&self) -> QuadraticElement {
        self.element(vec![Int::zero(); self.tag_count()])
    }

    /// γ(x) for a base element x, by the quadratic expansion over summand
    /// coordinates. Quadratic kind only.
    pub fn gamma_of(&self, x: &GroupElement) -> QuadraticElement {
        assert_eq!(self.kind, GammaKind::Quadratic, "gamma_of needs the quadratic functor");
        let c = self.summand_coords(x);
        let mut v = vec![Int::zero(); self.tag_count()];
        for i in 0..c.len() {
            v[self.tag_index(GammaTag::GammaGen(i))] = &c[i] * &c[i];
            for j in i + 1..c.len() {
                v[self.tag_index(GammaTag::TensorGen(i, j))] = &c[i] * &c[j];
            }
        }
        self.element(v)
    }

    /// The symmetric pairing [x, y] = γ(x+y) − γ(x) − γ(y) of two base
    /// elements, expanded bilinearly. Quadratic kind only.
    pub fn tensor_of(&self, x: &GroupElement, y: &GroupElement) -> QuadraticElement {
        assert_eq!(self.kind, GammaKind::Quadratic, "tensor_of needs the quadratic functor");
        let c = self.summand_coords(x);
        let d = self.summand_coords(y);
        let mut v = vec![Int::zero(); self.tag_count()];
        for i in 0..c.len() {
            v[self.tag_index(GammaTag::GammaGen(i))] = Int::from(2) * &c[i] * &d[i];
            for j in i + 1..c.len() {
                v[self.tag_index(GammaTag::TensorGen(i, j))] = &c[i] * &d[j] + &c[j] * &d[i];
            }
        }
        self.element(v)
    }

    /// Mod-2 reduction x⊗1 of a base element. ModTwo kind only.
    pub fn reduction_of(&self, x: &GroupElement) -> QuadraticElement {
        assert_eq!(self.kind, GammaKind::ModTwo, "reduction_of needs the mod-2 functor");
        self.element(self.summand_coords(x))
    }

    /// Translate tag coefficients to the canonical carrier.
    pub fn tags_to_carrier(&self, coeffs: &[Int]) -> GroupElement {
        assert_eq!(coeffs.len(), self.tag_count());
        self.carrier.group.element(self.carrier.to_canonical.mul_vec(coeffs))
    }

    /// Express a carrier element over the tags, reduced mod tag orders.
    pub fn carrier_to_tags(&self, x: &GroupElement) -> Vec<Int> {
        assert_eq!(x.parent(), self.carrier());
        self.reduce_tags(self.carrier.from_canonical.mul_vec(x.coeffs()))
    }

    /// The hom carrier → carrier with the given action on tags,
    /// checked for well-definedness.
    pub fn hom_from_tag_matrix(&self, target: &GammaGroup, tags: &Matrix) -> Result<Homomorphism> {
        if tags.rows() != target.tag_count() || tags.cols() != self.tag_count() {
            return Err(Error::ShapeMismatch(format!(
                "tag matrix is {}x{}, expected {}x{}",
                tags.rows(),
                tags.cols(),
                target.tag_count(),
                self.tag_count()
            )));
        }
        let m = target.carrier.to_canonical.mul(tags).mul(&self.carrier.from_canonical);
        Homomorphism::new(self.carrier().clone(), target.carrier().clone(), m)
    }
}

/// An element of a Γ-carrier written over the tagged generators,
/// coefficients reduced mod tag orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticElement {
    parent: GammaGroup,
    coeffs: Vec<Int>,
}

impl QuadraticElement {
    pub fn parent(&self) -> &GammaGroup {
        &self.parent
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Int::is_zero)
    }

    pub fn add(&self, other: &QuadraticElement) -> QuadraticElement {
        assert_eq!(self.parent, other.parent, "elements of different carriers");
        let v = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        self.parent.element(v)
    }

    pub fn neg(&self) -> QuadraticElement {
        self.parent.element(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn sub(&self, other: &QuadraticElement) -> QuadraticElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, n: &Int) -> QuadraticElement {
        self.parent.element(self.coeffs.iter().map(|a| a * n).collect())
    }

    /// Exact order in the carrier; None means infinite.
    pub fn order(&self) -> Option<Int> {
        let mut ord = Int::one();
        for (c, d) in self.coeffs.iter().zip(&self.parent.tag_orders) {
            if d.is_zero() {
                if !c.is_zero() {
                    return None;
                }
            } else {
                ord = ord.lcm(&(d / c.gcd(d)));
            }
        }
        Some(ord)
    }

    pub fn to_carrier(&self) -> GroupElement {
        self.parent.tags_to_carrier(&self.coeffs)
    }
}

impl fmt::Display for QuadraticElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, tag) in self.coeffs.iter().zip(&self.parent.basis_tags) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{tag}")?;
            } else {
                write!(f, "{c}*{tag}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Exact order of a carrier element; None means infinite.
pub fn element_order(x: &QuadraticElement) -> Option<Int> {
    x.order()
}

/// Γ(A) with its tagged presentation and canonical carrier.
pub fn gamma_object(a: &FgAbGroup) -> GammaGroup {
    GammaGroup::build(a, GammaKind::Quadratic)
}

/// Γ_n^1(A): the quadratic functor for n = 2, A⊗Z_2 for n ≥ 3.
pub fn gamma_n1(n: u32, a: &FgAbGroup) -> Result<GammaGroup> {
    match n {
        0 | 1 => Err(Error::WrongN),
        2 => Ok(GammaGroup::build(a, GammaKind::Quadratic)),
        _ => Ok(GammaGroup::build(a, GammaKind::ModTwo)),
    }
}

/// The action of the induced map on tagged generators: column per source
/// tag, written over the target tags.
pub fn gamma_tag_matrix(src: &GammaGroup, tgt: &GammaGroup, f: &Homomorphism) -> Result<Matrix> {
    if f.source() != src.base() || f.target() != tgt.base() {
        return Err(Error::ShapeMismatch(
            "morphism endpoints do not match the gamma bases".into(),
        ));
    }
    if src.kind() != tgt.kind() {
        return Err(Error::ShapeMismatch("mixed quadratic and mod-2 functors".into()));
    }
    let images: Vec<GroupElement> =
        (0..src.summand_count()).map(|i| f.apply(&src.summand_gen(i))).collect();
    let mut m = Matrix::zeros(tgt.tag_count(), src.tag_count());
    for (s, tag) in src.basis_tags().iter().enumerate() {
        let col = match (src.kind(), tag) {
            (GammaKind::Quadratic, GammaTag::GammaGen(i)) => tgt.gamma_of(&images[*i]),
            (GammaKind::Quadratic, GammaTag::TensorGen(i, j)) => {
                tgt.tensor_of(&images[*i], &images[*j])
            }
            (GammaKind::ModTwo, GammaTag::GammaGen(i)) => tgt.reduction_of(&images[*i]),
            (GammaKind::ModTwo, GammaTag::TensorGen(..)) => {
                unreachable!("mod-2 carriers have no tensor tags")
            }
        };
        for (t, c) in col.coeffs().iter().enumerate() {
            m[(t, s)] = c.clone();
        }
    }
    Ok(m)
}

/// Pushes a carrier element through the map induced by an endomorphism of
/// the base, staying in tag coordinates.
pub fn gamma_apply(f: &Homomorphism, x: &QuadraticElement) -> Result<QuadraticElement> {
    let gg = x.parent();
    let m = gamma_tag_matrix(gg, gg, f)?;
    Ok(gg.element(m.mul_vec(x.coeffs())))
}

/// Γ(f) (resp. f⊗Z_2) between prebuilt carriers; well-definedness of the
/// tag-by-tag images is certified by the homomorphism constructor.
pub fn gamma_morphism_between(
    src: &GammaGroup,
    tgt: &GammaGroup,
    f: &Homomorphism,
) -> Result<Homomorphism> {
    let tags = gamma_tag_matrix(src, tgt, f)?;
    src.hom_from_tag_matrix(tgt, &tags)
}

/// Γ(f) between freshly built carriers of f's endpoints.
pub fn gamma_morphism(f: &Homomorphism) -> Result<Homomorphism> {
    let src = gamma_object(f.source());
    let tgt = gamma_object(f.target());
    gamma_morphism_between(&src, &tgt, f)
}

/// Γ_n^1(f) between freshly built carriers of f's endpoints.
pub fn gamma_n1_morphism(n: u32, f: &Homomorphism) -> Result<Homomorphism> {
    let src = gamma_n1(n, f.source())?;
    let tgt = gamma_n1(n, f.target())?;
    gamma_morphism_between(&src, &tgt, f)
}
