//! Homomorphisms between canonical groups, with kernels, cokernels and
//! exact preimages computed through the Smith normal form.

use super::group::{canonicalize_presentation, presented_group, FgAbGroup, GroupElement};
use super::matrix::{smith_form, Int, Matrix};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

/// Column `j` is the image of source generator `j` in target coordinates.
/// The matrix is stored reduced (torsion coordinates in `0..d_k`), so
/// equality of maps is equality of fields.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    source: FgAbGroup,
    target: FgAbGroup,
    matrix: Matrix,
}

impl Homomorphism {
    /// Checks shape and well-definedness: for each source generator of
    /// order `d_j`, `d_j * column_j` must vanish in the target.
    pub fn new(source: FgAbGroup, target: FgAbGroup, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != target.gens() || matrix.cols() != source.gens() {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, expected {}x{} for {} -> {}",
                matrix.rows(),
                matrix.cols(),
                target.gens(),
                source.gens(),
                source,
                target
            )));
        }
        for j in 0..source.gens() {
            let d = source.gen_order(j);
            if d.is_zero() {
                continue;
            }
            for k in 0..target.gens() {
                let e = target.gen_order(k);
                let prod = &d * &matrix[(k, j)];
                let ok = if e.is_zero() { prod.is_zero() } else { (&prod % &e).is_zero() };
                if !ok {
                    return Err(Error::IllDefined(format!(
                        "generator {j} of order {d} maps to an element not killed by {d} \
                         (coordinate {k})"
                    )));
                }
            }
        }
        Ok(Homomorphism { matrix: reduce_matrix(&target, matrix), source, target })
    }

    pub fn from_i64(source: &FgAbGroup, target: &FgAbGroup, rows: Vec<Vec<i64>>) -> Result<Self> {
        Homomorphism::new(source.clone(), target.clone(), Matrix::from_i64(rows))
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        Homomorphism {
            source: g.clone(),
            target: g.clone(),
            matrix: Matrix::identity(g.gens()),
        }
    }

    pub fn zero(source: &FgAbGroup, target: &FgAbGroup) -> Self {
        Homomorphism {
            source: source.clone(),
            target: target.clone(),
            matrix: Matrix::zeros(target.gens(), source.gens()),
        }
    }

    /// Negation of the identity; an involution unless the group is
    /// elementary abelian 2 (where it collapses to the identity).
    pub fn neg_identity(g: &FgAbGroup) -> Self {
        Homomorphism {
            source: g.clone(),
            target: g.clone(),
            matrix: reduce_matrix(g, Matrix::identity(g.gens()).neg()),
        }
    }

    pub fn source(&self) -> &FgAbGroup {
        &self.source
    }

    pub fn target(&self) -> &FgAbGroup {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_zero_map(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.matrix == reduce_matrix(&self.target, Matrix::identity(self.target.gens()))
    }

    pub fn apply(&self, x: &GroupElement) -> GroupElement {
        assert_eq!(x.parent(), &self.source, "element not in the source group");
        self.target.element(self.matrix.mul_vec(x.coeffs()))
    }

    /// `self . other` (apply `other` first). Requires `other.target == self.source`.
    pub fn compose(&self, other: &Homomorphism) -> Result<Homomorphism> {
        if other.target != self.source {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.source, self.target, other.source, other.target
            )));
        }
        Ok(Homomorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: reduce_matrix(&self.target, self.matrix.mul(&other.matrix)),
        })
    }

    pub fn add(&self, other: &Homomorphism) -> Homomorphism {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        Homomorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: reduce_matrix(&self.target, self.matrix.add(&other.matrix)),
        }
    }

    pub fn sub(&self, other: &Homomorphism) -> Homomorphism {
        assert_eq!(self.source, other.source);
        assert_eq!(self.target, other.target);
        Homomorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: reduce_matrix(&self.target, self.matrix.sub(&other.matrix)),
        }
    }

    /// Kernel subgroup in canonical form together with its inclusion.
    pub fn kernel(&self) -> (FgAbGroup, Homomorphism) {
        // x lies in the kernel iff M x lands in the relation lattice of the
        // target: solve [M | R_target] z = 0 and project z onto the x-part.
        let rt = self.target.relation_cols();
        let w = self.matrix.hstack(&rt);
        let s = smith_form(&w);
        let total = w.cols();
        let ker_cols: Vec<usize> = (s.rank..total).collect();
        let ker_basis = s.v.submatrix_cols(&ker_cols);
        let sg = self.source.gens();
        let lattice = ker_basis.submatrix_rows(&(0..sg).collect::<Vec<_>>());

        // Relations among the lattice generators as elements of the source.
        let ra = self.source.relation_cols();
        let w2 = lattice.hstack(&ra);
        let s2 = smith_form(&w2);
        let rel_cols: Vec<usize> = (s2.rank..w2.cols()).collect();
        let rel_basis = s2.v.submatrix_cols(&rel_cols);
        let rels = rel_basis.submatrix_rows(&(0..lattice.cols()).collect::<Vec<_>>());

        let p = presented_group(lattice.cols(), &rels);
        let incl_matrix = lattice.mul(&p.from_canonical);
        let incl = Homomorphism::new(p.group.clone(), self.source.clone(), incl_matrix)
            .expect("kernel inclusion must be well-defined");
        (p.group, incl)
    }

    /// Cokernel in canonical form together with the projection.
    pub fn cokernel(&self) -> (FgAbGroup, Homomorphism) {
        let rt = self.target.relation_cols();
        let rels = rt.hstack(&self.matrix);
        let p = presented_group(self.target.gens(), &rels);
        let proj = Homomorphism::new(self.target.clone(), p.group.clone(), p.to_canonical)
            .expect("cokernel projection must be well-defined");
        (p.group, proj)
    }

    /// Some preimage of `y`, or None if `y` is outside the image.
    pub fn preimage(&self, y: &GroupElement) -> Option<GroupElement> {
        assert_eq!(y.parent(), &self.target, "element not in the target group");
        // Solve M x + R t = y over Z.
        let rt = self.target.relation_cols();
        let w = self.matrix.hstack(&rt);
        let s = smith_form(&w);
        let yy = s.u.mul_vec(y.coeffs());
        let total = w.cols();
        let mut sol = vec![Int::zero(); total];
        for (i, yi) in yy.iter().enumerate() {
            if i < s.rank {
                let d = s.diagonal_entry(i);
                let (q, r) = yi.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                sol[i] = q;
            } else if !yi.is_zero() {
                return None;
            }
        }
        let z = s.v.mul_vec(&sol);
        Some(self.source.element(z[..self.source.gens()].to_vec()))
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().0.is_trivial()
    }

    pub fn is_surjective(&self) -> bool {
        self.cokernel().0.is_trivial()
    }

    pub fn is_isomorphism(&self) -> bool {
        // For f.g. groups a homomorphism is invertible iff it is both
        // injective and surjective; no finiteness needed.
        self.is_injective() && self.is_surjective()
    }

    /// Two-sided inverse of an isomorphism.
    pub fn inverse(&self) -> Result<Homomorphism> {
        let mut cols = Vec::with_capacity(self.target.gens());
        for k in 0..self.target.gens() {
            let e = self.target.basis_element(k);
            let x = self
                .preimage(&e)
                .ok_or_else(|| Error::IllDefined("not surjective, no inverse".into()))?;
            cols.push(x.coeffs().to_vec());
        }
        let mut m = Matrix::zeros(self.source.gens(), self.target.gens());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        let inv = Homomorphism::new(self.target.clone(), self.source.clone(), m)?;
        let left = inv.compose(self)?;
        let right = self.compose(&inv)?;
        if !left.is_identity() || !right.is_identity() {
            return Err(Error::IllDefined("not an isomorphism".into()));
        }
        Ok(inv)
    }

    /// Order as an element of the automorphism group; None if no power
    /// returns to the identity within `cap` steps.
    pub fn automorphism_order(&self, cap: u64) -> Option<u64> {
        assert_eq!(self.source, self.target);
        let mut p = self.clone();
        for k in 1..=cap {
            if p.is_identity() {
                return Some(k);
            }
            p = self.compose(&p).expect("endomorphism composes with itself");
        }
        None
    }
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom({} -> {}) {:?}", self.source, self.target, self.matrix)
    }
}

fn reduce_matrix(target: &FgAbGroup, mut m: Matrix) -> Matrix {
    for k in 0..target.gens() {
        let d = target.gen_order(k);
        if d.is_zero() {
            continue;
        }
        for j in 0..m.cols() {
            let v = m[(k, j)].mod_floor(&d);
            m[(k, j)] = v;
        }
    }
    m
}

/// Direct sum `A + B` in canonical form with inclusions and projections.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub group: FgAbGroup,
    pub incl_a: Homomorphism,
    pub incl_b: Homomorphism,
    pub proj_a: Homomorphism,
    pub proj_b: Homomorphism,
}

pub fn direct_sum(a: &FgAbGroup, b: &FgAbGroup) -> DirectSum {
    let mut orders = a.gen_orders();
    orders.extend(b.gen_orders());
    let p = canonicalize_presentation(&orders);
    let na = a.gens();
    let nb = b.gens();
    let stack_a = {
        let mut m = Matrix::zeros(na + nb, na);
        for i in 0..na {
            m[(i, i)] = Int::one();
        }
        m
    };
    let stack_b = {
        let mut m = Matrix::zeros(na + nb, nb);
        for i in 0..nb {
            m[(na + i, i)] = Int::one();
        }
        m
    };
    let incl_a = Homomorphism::new(a.clone(), p.group.clone(), p.to_canonical.mul(&stack_a))
        .expect("direct-sum inclusion is well-defined");
    let incl_b = Homomorphism::new(b.clone(), p.group.clone(), p.to_canonical.mul(&stack_b))
        .expect("direct-sum inclusion is well-defined");
    let rows_a: Vec<usize> = (0..na).collect();
    let rows_b: Vec<usize> = (na..na + nb).collect();
    let proj_a =
        Homomorphism::new(p.group.clone(), a.clone(), p.from_canonical.submatrix_rows(&rows_a))
            .expect("direct-sum projection is well-defined");
    let proj_b =
        Homomorphism::new(p.group.clone(), b.clone(), p.from_canonical.submatrix_rows(&rows_b))
            .expect("direct-sum projection is well-defined");
    DirectSum { group: p.group, incl_a, incl_b, proj_a, proj_b }
}
