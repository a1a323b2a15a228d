//! Canonical finitely generated abelian groups, integer matrices, Smith
//! normal form, homomorphisms, exact congruence solving and bounded
//! enumeration.

mod enumerate;
mod group;
mod hom;
mod matrix;
mod solve;

pub use enumerate::{
    elements_of_order_dividing, enumerate_automorphisms, enumerate_homomorphisms,
    enumerate_injections, finite_abelian_groups_up_to,
};
pub(crate) use enumerate::cached_automorphisms;
pub use group::{canonicalize_presentation, presented_group, FgAbGroup, GroupElement, Presentation};
pub use hom::{direct_sum, DirectSum, Homomorphism};
pub use matrix::{smith_form, Int, Matrix, SmithForm};
pub use solve::{solve_hom_equations, CongruenceSystem, Constraint};
pub(crate) use solve::{hom_from_unknowns, HomSystemBuilder};
