//! Core library: finite relations, coalgebra kinds, predicate liftings,
//! relational connectors, simulation checking and distinguishing formulas.

pub mod connectors;
pub mod err;
pub mod functors;
pub mod gen;
pub mod ioformats;
pub mod laws;
pub mod liftings;
pub mod logic;
pub mod oracle;
pub mod simulation;
pub mod rel;

pub use connectors::{connector_holds, ConnectorExpr, EvalCaps, NatTrans};
pub use err::{Error, Result};
pub use functors::{Coalgebra, FunctorKind, FunctorTerm, Ratio};
pub use ioformats::{
    elaborate_connector, parse_aut, parse_chc, parse_connector, parse_connector_with,
    parse_relation, serialize_chc, serialize_connector, write_relation, AutDocument,
    ConnectorSyntax, NatSyntax,
};
pub use laws::{catalog, run_all, LawCfg, LawReport, DEFAULT_SEED, LAW_GROUPS};
pub use liftings::{InnerSkel, LambdaRel, Lifting, PosSkel};
pub use logic::{
    distinguishing_formula, eval_formula, parse_formula, Formula, FormulaNode, SideTag,
};
pub use rel::{FinSet, Map, Rel, Subset};
pub use simulation::{greatest_bisimulation, greatest_simulation, is_simulation, SimResult};
