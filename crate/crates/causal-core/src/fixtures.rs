//! Small reference models shared by tests, docs, and the CLI examples.

use crate::model::{CausalModel, ModelBuilder};

/// The two-arsonist forest fire model: binary `U1, U2` drive `A1, A2`, and
/// the forest burns (`B = 1`) iff either arsonist drops a match.
pub fn arson() -> CausalModel {
    ModelBuilder::new()
        .exogenous("U1", ["0", "1"])
        .exogenous("U2", ["0", "1"])
        .endogenous("A1", ["0", "1"], &["U1"], ["0", "1"])
        .endogenous("A2", ["0", "1"], &["U2"], ["0", "1"])
        .endogenous_fn("B", ["0", "1"], &["A1", "A2"], |p| {
            if p[0] == "1" || p[1] == "1" {
                "1".into()
            } else {
                "0".into()
            }
        })
        .build()
        .expect("arson model is well-formed")
}

/// A three-variable chain `X1 -> X2 -> Y` of identities, each driven only
/// through `X1`'s exogenous input.
pub fn identity_chain() -> CausalModel {
    ModelBuilder::new()
        .exogenous("U", ["0", "1"])
        .endogenous("X1", ["0", "1"], &["U"], ["0", "1"])
        .endogenous("X2", ["0", "1"], &["X1"], ["0", "1"])
        .endogenous("Y", ["0", "1"], &["X2"], ["0", "1"])
        .build()
        .expect("chain model is well-formed")
}
