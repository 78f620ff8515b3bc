//! Terms, equations and normal forms over Ershov algebras: distributive
//! lattices with a least element and relative complement `∖`.

pub mod model;
pub mod modelfile;
pub mod noetherian;
pub mod parser;
pub mod render;
pub mod rewrite;
pub mod semantics;
pub mod sysnf;
pub mod terms;

pub use model::{ConstantFamily, Elem, FinSetElement, PowersetModel};
pub use parser::{parse_equation, parse_system, parse_term};
pub use rewrite::{normalize_term_cnf, normalize_term_dnf};
pub use sysnf::{normalize_system, NormalInequality, Shape};
pub use terms::{EqSystem, Equation, Term};
