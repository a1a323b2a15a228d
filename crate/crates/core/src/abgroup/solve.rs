//! Exact solution of systems of integer linear congruences, and the
//! homomorphism-equation solver built on top of it.
//!
//! A system is `A w = rhs (mod m)` row-wise, with a per-row modulus
//! (0 encodes equality over Z). Slack variables turn the congruences into
//! a pure Z-linear system which one Smith reduction solves; the reduction
//! is cached so many right-hand sides can be tried against the same
//! left-hand side cheaply.

use super::group::FgAbGroup;
use super::hom::Homomorphism;
use super::matrix::{smith_form, Int, Matrix, SmithForm};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::Zero;

pub struct CongruenceSystem {
    unknowns: usize,
    rows: usize,
    snf: SmithForm,
    total_cols: usize,
}

impl CongruenceSystem {
    /// `coeffs` is rows x unknowns; `moduli` one per row (0 = exact).
    pub fn new(coeffs: Matrix, moduli: &[Int]) -> Self {
        assert_eq!(coeffs.rows(), moduli.len());
        let unknowns = coeffs.cols();
        let rows = coeffs.rows();
        let slack: Vec<usize> = (0..rows).filter(|&r| !moduli[r].is_zero()).collect();
        let mut w = Matrix::zeros(rows, unknowns + slack.len());
        for r in 0..rows {
            for c in 0..unknowns {
                w[(r, c)] = coeffs[(r, c)].clone();
            }
        }
        for (j, &r) in slack.iter().enumerate() {
            w[(r, unknowns + j)] = moduli[r].clone();
        }
        let total_cols = w.cols();
        CongruenceSystem { unknowns, rows, snf: smith_form(&w), total_cols }
    }

    /// One solution of `A w = rhs (mod m)`, or None.
    pub fn solve(&self, rhs: &[Int]) -> Option<Vec<Int>> {
        assert_eq!(rhs.len(), self.rows);
        let y = self.snf.u.mul_vec(rhs);
        let mut w = vec![Int::zero(); self.total_cols];
        for (i, yi) in y.iter().enumerate() {
            if i < self.snf.rank {
                let d = self.snf.diagonal_entry(i);
                let (q, r) = yi.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                w[i] = q;
            } else if !yi.is_zero() {
                return None;
            }
        }
        let z = self.snf.v.mul_vec(&w);
        Some(z[..self.unknowns].to_vec())
    }
}

/// A linear condition on the unknown homomorphism `W: S -> T`.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `W . l = r` where `l: X -> S`, `r: X -> T`.
    Post { l: Homomorphism, r: Homomorphism },
    /// `l . W = r` where `l: T -> Y`, `r: S -> Y`.
    Pre { l: Homomorphism, r: Homomorphism },
}

impl Constraint {
    pub fn post(l: Homomorphism, r: Homomorphism) -> Self {
        Constraint::Post { l, r }
    }

    pub fn pre(l: Homomorphism, r: Homomorphism) -> Self {
        Constraint::Pre { l, r }
    }
}

/// Row builder shared by `solve_hom_equations` and cached sequence solvers.
/// Unknown entry (k, j) of `W: source -> target` has index `k * s + j`.
pub(crate) struct HomSystemBuilder {
    source: FgAbGroup,
    target: FgAbGroup,
    rows: Vec<Vec<Int>>,
    moduli: Vec<Int>,
    rhs: Vec<Int>,
}

impl HomSystemBuilder {
    pub fn new(source: &FgAbGroup, target: &FgAbGroup) -> Self {
        let mut b = HomSystemBuilder {
            source: source.clone(),
            target: target.clone(),
            rows: Vec::new(),
            moduli: Vec::new(),
            rhs: Vec::new(),
        };
        b.push_well_definedness();
        b
    }

    fn unknowns(&self) -> usize {
        self.source.gens() * self.target.gens()
    }

    fn push_well_definedness(&mut self) {
        // d_j * W[k][j] = 0 (mod e_k) for torsion source generators.
        for j in 0..self.source.gens() {
            let d = self.source.gen_order(j);
            if d.is_zero() {
                continue;
            }
            for k in 0..self.target.gens() {
                let mut row = vec![Int::zero(); self.unknowns()];
                row[k * self.source.gens() + j] = d.clone();
                self.rows.push(row);
                self.moduli.push(self.target.gen_order(k));
                self.rhs.push(Int::zero());
            }
        }
    }

    /// `W . l = r`: rows depend on `l` only, rhs on `r` only.
    pub fn push_post(&mut self, l: &Homomorphism, r: Option<&Homomorphism>) -> Result<()> {
        if l.target() != &self.source {
            return Err(Error::ShapeMismatch(format!(
                "post-composition constraint: l has target {}, unknown has source {}",
                l.target(),
                self.source
            )));
        }
        if let Some(r) = r {
            if r.source() != l.source() || r.target() != &self.target {
                return Err(Error::ShapeMismatch(
                    "post-composition constraint: r must go from l's source to the unknown's target"
                        .into(),
                ));
            }
        }
        for k in 0..self.target.gens() {
            for c in 0..l.source().gens() {
                let mut row = vec![Int::zero(); self.unknowns()];
                for j in 0..self.source.gens() {
                    row[k * self.source.gens() + j] = l.matrix()[(j, c)].clone();
                }
                self.rows.push(row);
                self.moduli.push(self.target.gen_order(k));
                self.rhs.push(match r {
                    Some(r) => r.matrix()[(k, c)].clone(),
                    None => Int::zero(),
                });
            }
        }
        Ok(())
    }

    /// `l . W = r`: rows depend on `l` only, rhs on `r` only.
    pub fn push_pre(&mut self, l: &Homomorphism, r: Option<&Homomorphism>) -> Result<()> {
        if l.source() != &self.target {
            return Err(Error::ShapeMismatch(format!(
                "pre-composition constraint: l has source {}, unknown has target {}",
                l.source(),
                self.target
            )));
        }
        if let Some(r) = r {
            if r.source() != &self.source || r.target() != l.target() {
                return Err(Error::ShapeMismatch(
                    "pre-composition constraint: r must go from the unknown's source to l's target"
                        .into(),
                ));
            }
        }
        for y in 0..l.target().gens() {
            for j in 0..self.source.gens() {
                let mut row = vec![Int::zero(); self.unknowns()];
                for k in 0..self.target.gens() {
                    row[k * self.source.gens() + j] = l.matrix()[(y, k)].clone();
                }
                self.rows.push(row);
                self.moduli.push(l.target().gen_order(y));
                self.rhs.push(match r {
                    Some(r) => r.matrix()[(y, j)].clone(),
                    None => Int::zero(),
                });
            }
        }
        Ok(())
    }

    pub fn build(self) -> (CongruenceSystem, Vec<Int>, FgAbGroup, FgAbGroup) {
        let sys = CongruenceSystem::new(Matrix::from_rows(self.rows), &self.moduli);
        (sys, self.rhs, self.source, self.target)
    }
}

pub(crate) fn hom_from_unknowns(
    source: &FgAbGroup,
    target: &FgAbGroup,
    w: &[Int],
) -> Result<Homomorphism> {
    let mut m = Matrix::zeros(target.gens(), source.gens());
    for k in 0..target.gens() {
        for j in 0..source.gens() {
            m[(k, j)] = w[k * source.gens() + j].clone();
        }
    }
    Homomorphism::new(source.clone(), target.clone(), m)
}

/// One homomorphism `W: source -> target` satisfying every constraint, or
/// None if the system has no solution. The returned map is verified
/// against each constraint before being handed back.
pub fn solve_hom_equations(
    source: &FgAbGroup,
    target: &FgAbGroup,
    constraints: &[Constraint],
) -> Result<Option<Homomorphism>> {
    let mut b = HomSystemBuilder::new(source, target);
    for c in constraints {
        match c {
            Constraint::Post { l, r } => b.push_post(l, Some(r))?,
            Constraint::Pre { l, r } => b.push_pre(l, Some(r))?,
        }
    }
    let (sys, rhs, source, target) = b.build();
    let Some(w) = sys.solve(&rhs) else {
        return Ok(None);
    };
    let omega = hom_from_unknowns(&source, &target, &w)
        .expect("solver output satisfies well-definedness congruences");
    for c in constraints {
        match c {
            Constraint::Post { l, r } => {
                assert_eq!(&omega.compose(l)?, r, "solver returned an invalid solution");
            }
            Constraint::Pre { l, r } => {
                assert_eq!(&l.compose(&omega)?, r, "solver returned an invalid solution");
            }
        }
    }
    Ok(Some(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abgroup::enumerate::enumerate_homomorphisms;

    fn g(lit: &str) -> FgAbGroup {
        FgAbGroup::parse_literal(lit).unwrap()
    }

    #[test]
    fn scalar_congruence() {
        // 2w = 4 (mod 6) has solutions w = 2, 5.
        let sys = CongruenceSystem::new(Matrix::from_i64(vec![vec![2]]), &[Int::from(6)]);
        let w = sys.solve(&[Int::from(4)]).unwrap();
        let r = (Int::from(2) * &w[0] - Int::from(4)).mod_floor(&Int::from(6));
        assert!(r.is_zero());
        // 2w = 3 (mod 6) has none.
        assert!(sys.solve(&[Int::from(3)]).is_none());
    }

    #[test]
    fn unknown_endomorphism_pinned_by_two_constraints() {
        // W: Z_4 -> Z_4 with W . incl = incl and proj . W = proj,
        // where incl: Z_2 -> Z_4 and proj: Z_4 -> Z_2. Solutions: 1, 3.
        let z2 = g("2");
        let z4 = g("4");
        let incl = Homomorphism::from_i64(&z2, &z4, vec![vec![2]]).unwrap();
        let proj = Homomorphism::from_i64(&z4, &z2, vec![vec![1]]).unwrap();
        let omega = solve_hom_equations(
            &z4,
            &z4,
            &[
                Constraint::post(incl.clone(), incl.clone()),
                Constraint::pre(proj.clone(), proj.clone()),
            ],
        )
        .unwrap()
        .expect("solvable");
        let v = omega.matrix()[(0, 0)].clone();
        assert!(v == Int::from(1) || v == Int::from(3));
    }

    #[test]
    fn infeasible_system_returns_none() {
        // W: Z_2 -> Z_4 with W = incl impossible as W(1) must have order <= 2
        // while rhs asks for the identity coordinate 1.
        let z2 = g("2");
        let z4 = g("4");
        let id2 = Homomorphism::identity(&z2);
        // r: Z_2 -> Z_4 sending 1 to 2; l = id; constraint W = r is solvable:
        let r = Homomorphism::from_i64(&z2, &z4, vec![vec![2]]).unwrap();
        let w = solve_hom_equations(&z2, &z4, &[Constraint::post(id2.clone(), r.clone())])
            .unwrap()
            .unwrap();
        assert_eq!(w, r);
        // Now demand proj . W = id on Z_2 with proj: Z_4 -> Z_2: impossible,
        // since W lands in 2Z_4 which proj kills.
        let proj = Homomorphism::from_i64(&z4, &z2, vec![vec![1]]).unwrap();
        let res = solve_hom_equations(&z2, &z4, &[Constraint::pre(proj, id2.clone())]).unwrap();
        assert!(res.is_none());
    }

    #[test]
    fn shape_mismatch_detected() {
        let z2 = g("2");
        let z4 = g("4");
        let id4 = Homomorphism::identity(&z4);
        let err = solve_hom_equations(&z2, &z2, &[Constraint::post(id4.clone(), id4)]);
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn free_targets_use_exact_rows() {
        // W: Z -> Z with 3W = multiplication by 6 forces W = x2.
        let z = g("free^1");
        let three = Homomorphism::from_i64(&z, &z, vec![vec![3]]).unwrap();
        let six = Homomorphism::from_i64(&z, &z, vec![vec![6]]).unwrap();
        let w = solve_hom_equations(&z, &z, &[Constraint::pre(three.clone(), six)])
            .unwrap()
            .unwrap();
        assert_eq!(w.matrix()[(0, 0)], Int::from(2));
        // 3W = x5 has no integer solution.
        let five = Homomorphism::from_i64(&z, &z, vec![vec![5]]).unwrap();
        assert!(solve_hom_equations(&z, &z, &[Constraint::pre(three, five)]).unwrap().is_none());
    }

    #[test]
    fn agreement_with_brute_force_on_small_homsets() {
        // For every (L, R) pair over small groups, solver solvability must
        // match a brute-force scan over all homomorphisms.
        let s = g("2 x 4");
        let t = g("4");
        let x = g("2");
        let ls = enumerate_homomorphisms(&x, &s).unwrap();
        let rs = enumerate_homomorphisms(&x, &t).unwrap();
        let all_w = enumerate_homomorphisms(&s, &t).unwrap();
        for l in &ls {
            for r in &rs {
                let brute = all_w.iter().any(|w| &w.compose(l).unwrap() == r);
                let solved = solve_hom_equations(&s, &t, &[Constraint::post(l.clone(), r.clone())])
                    .unwrap();
                assert_eq!(brute, solved.is_some(), "solver disagrees with brute force");
                if let Some(w) = solved {
                    assert_eq!(&w.compose(l).unwrap(), r);
                }
            }
        }
    }
}
