//! Deterministic enumeration helpers for the search procedures.
//!
//! Subsets are visited by size and then lexicographically on the index
//! tuple; value tuples are visited lexicographically by declared domain
//! order. The witness-determinism contract of the oracle rests on these
//! orders being fixed.

use crate::error::Result;
use crate::model::{CausalModel, Value, VarId};

/// Calls `f` on every subset of `{0, …, n-1}` (as a sorted index slice),
/// ordered by size then lexicographically. Stops early when `f` returns
/// `Some`.
pub fn for_each_subset<R>(n: usize, mut f: impl FnMut(&[usize]) -> Result<Option<R>>) -> Result<Option<R>> {
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    if let Some(r) = f(&idx)? {
        return Ok(Some(r));
    }
    for k in 1..=n {
        idx.clear();
        idx.extend(0..k);
        'combos: loop {
            if let Some(r) = f(&idx)? {
                return Ok(Some(r));
            }
            let mut i = k;
            while i > 0 {
                i -= 1;
                if idx[i] < n - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    continue 'combos;
                }
            }
            break;
        }
    }
    Ok(None)
}

/// Calls `f` on every value tuple of the product domain of `vars`, in
/// lexicographic order (first variable slowest). The empty variable list
/// yields exactly one empty tuple. Stops early when `f` returns `Some`.
pub fn for_each_value_tuple<R>(
    m: &CausalModel,
    vars: &[VarId],
    mut f: impl FnMut(&[Value]) -> Result<Option<R>>,
) -> Result<Option<R>> {
    let sizes: Vec<usize> = vars.iter().map(|&v| m.domain(v).len()).collect();
    let mut tuple: Vec<Value> = vec![Value(0); vars.len()];
    loop {
        if let Some(r) = f(&tuple)? {
            return Ok(Some(r));
        }
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            tuple[pos] = Value(tuple[pos].0 + 1);
            if tuple[pos].index() < sizes[pos] {
                break;
            }
            tuple[pos] = Value(0);
        }
    }
}

/// All value tuples of the product domain of `vars`, materialized in
/// lexicographic order.
pub fn value_tuples(m: &CausalModel, vars: &[VarId]) -> Vec<Vec<Value>> {
    let mut out = Vec::new();
    let _ = for_each_value_tuple::<()>(m, vars, |t| {
        out.push(t.to_vec());
        Ok(None)
    });
    out
}

/// Sorts variable ids by variable name; the canonical presentation order for
/// variable sets in reports and searches.
pub fn sort_by_name(m: &CausalModel, vars: &mut [VarId]) {
    vars.sort_by(|a, b| m.name(*a).cmp(m.name(*b)));
}
