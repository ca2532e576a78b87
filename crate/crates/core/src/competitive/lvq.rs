//! Single-sample update rules for the four LVQ variants.
//!
//! Every rule moves prototypes along `x - m`: toward the sample when the
//! prototype's label matches the sample's, away when it does not. Only the
//! prototypes named by each rule move; all others are left bit-identical.

use super::{prototype_distance, CodebookSet};

/// Moves the winning prototype by `alpha` toward `x` on a label match,
/// away on a mismatch. Returns the winner's index.
pub fn lvq1_step(cb: &mut CodebookSet, x: &[f64], label: usize, alpha: f64) -> usize {
    let v = cb.nearest(x);
    let winner = &mut cb.vectors_mut()[v];
    let sign = if winner.label == label { alpha } else { -alpha };
    for (m, &xi) in winner.m.iter_mut().zip(x) {
        *m += sign * (xi - *m);
    }
    v
}

/// LVQ1 with a per-prototype learning rate: the winner moves by its own
/// `alpha`, which then shrinks after a correct classification and grows
/// after a wrong one via alpha / (1 + c * alpha), clamped to `alpha_cap`
/// so repeated errors cannot destabilize the prototype. Returns the
/// winner's index.
pub fn olvq1_step(cb: &mut CodebookSet, x: &[f64], label: usize, alpha_cap: f64) -> usize {
    let v = cb.nearest(x);
    let winner = &mut cb.vectors_mut()[v];
    let c = if winner.label == label { 1.0 } else { -1.0 };
    let alpha = winner.alpha;
    for (m, &xi) in winner.m.iter_mut().zip(x) {
        *m = (1.0 - c * alpha) * *m + c * alpha * xi;
    }
    winner.alpha = (alpha / (1.0 + c * alpha)).min(alpha_cap);
    v
}

/// Relative-distance window gate shared by LVQ2 and LVQ3: the sample must
/// fall between the two prototypes, min(e_i/e_j, e_j/e_i) > (1-w)/(1+w).
/// Symmetric in the two distances; a zero distance never passes.
fn inside_window(e_i: f64, e_j: f64, window: f64) -> bool {
    if e_i <= 0.0 || e_j <= 0.0 {
        return false;
    }
    let k = (1.0 - window) / (1.0 + window);
    (e_i / e_j).min(e_j / e_i) > k
}

/// Pair update: when the two nearest prototypes carry one matching and one
/// differing label and `x` falls inside the window, the matching one moves
/// toward `x` and the differing one away, both by `alpha`. Returns whether
/// the update fired.
pub fn lvq2_step(cb: &mut CodebookSet, x: &[f64], label: usize, alpha: f64, window: f64) -> bool {
    let (first, second) = cb.two_nearest(x);
    let first_match = cb.vectors()[first].label == label;
    let second_match = cb.vectors()[second].label == label;
    if first_match == second_match {
        return false;
    }
    let e_first = prototype_distance(&cb.vectors()[first], x);
    let e_second = prototype_distance(&cb.vectors()[second], x);
    if !inside_window(e_first, e_second, window) {
        return false;
    }
    for (idx, matches) in [(first, first_match), (second, second_match)] {
        let sign = if matches { alpha } else { -alpha };
        for (m, &xi) in cb.vectors_mut()[idx].m.iter_mut().zip(x) {
            *m += sign * (xi - *m);
        }
    }
    true
}

/// LVQ2 extended with a same-class branch: when both nearest prototypes
/// match the sample's label, both move toward `x` by the damped step
/// `epsilon * alpha`; the mixed-label case is exactly the LVQ2 update.
/// Returns whether any prototype moved.
pub fn lvq3_step(
    cb: &mut CodebookSet,
    x: &[f64],
    label: usize,
    alpha: f64,
    window: f64,
    epsilon: f64,
) -> bool {
    let (first, second) = cb.two_nearest(x);
    let first_match = cb.vectors()[first].label == label;
    let second_match = cb.vectors()[second].label == label;
    if first_match != second_match {
        return lvq2_step(cb, x, label, alpha, window);
    }
    if !first_match || epsilon == 0.0 {
        return false;
    }
    let step = epsilon * alpha;
    for idx in [first, second] {
        for (m, &xi) in cb.vectors_mut()[idx].m.iter_mut().zip(x) {
            *m += step * (xi - *m);
        }
    }
    true
}
