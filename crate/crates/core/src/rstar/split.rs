//! Topological split.

use super::mbr::{area, empty_rect, expand, margin, overlap};
use super::Node;

/// Splits an overflowing node's entries into two groups of at least `min`
/// entries each; returns entry indices `(kept, moved)`.
pub(crate) fn choose_split(node: &Node, dims: usize, min: usize) -> (Vec<usize>, Vec<usize>) {
    let m2 = 2 * dims;
    let count = node.len();
    let min = min.clamp(1, count / 2);
    // Leaf entries are points, so sorting by low and by high coincide.
    let sorts: &[bool] = if node.level == 0 {
        &[false]
    } else {
        &[false, true]
    };

    let mut prefix = vec![0f32; count * m2];
    let mut suffix = vec![0f32; count * m2];
    let mut order: Vec<usize> = (0..count).collect();

    let sorted = |order: &mut Vec<usize>, axis: usize, by_high: bool| {
        let key = |k: usize| node.rect(k, m2)[if by_high { dims + axis } else { axis }];
        order.clear();
        order.extend(0..count);
        order.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    };

    let mut best_axis = 0;
    let mut best_margin = f64::INFINITY;
    for axis in 0..dims {
        let mut s = 0.0;
        for &by_high in sorts {
            sorted(&mut order, axis, by_high);
            fill_bounds(node, &order, m2, &mut prefix, &mut suffix);
            for k in min..=count - min {
                s += margin(&prefix[(k - 1) * m2..k * m2]) + margin(&suffix[k * m2..(k + 1) * m2]);
            }
        }
        if s < best_margin {
            best_margin = s;
            best_axis = axis;
        }
    }

    let mut best: Option<(f64, f64, bool, usize)> = None;
    for &by_high in sorts {
        sorted(&mut order, best_axis, by_high);
        fill_bounds(node, &order, m2, &mut prefix, &mut suffix);
        for k in min..=count - min {
            let a = &prefix[(k - 1) * m2..k * m2];
            let b = &suffix[k * m2..(k + 1) * m2];
            let key = (overlap(a, b), area(a) + area(b));
            if best.is_none_or(|(o, ar, _, _)| key < (o, ar)) {
                best = Some((key.0, key.1, by_high, k));
            }
        }
    }
    let (_, _, by_high, k) = best.expect("at least one distribution");
    sorted(&mut order, best_axis, by_high);
    let moved = order.split_off(k);
    (order, moved)
}

/// `prefix[k]` bounds entries `order[..=k]`, `suffix[k]` bounds `order[k..]`.
fn fill_bounds(node: &Node, order: &[usize], m2: usize, prefix: &mut [f32], suffix: &mut [f32]) {
    let count = order.len();
    let mut acc = empty_rect(m2 / 2);
    for (i, &k) in order.iter().enumerate() {
        expand(&mut acc, node.rect(k, m2));
        prefix[i * m2..(i + 1) * m2].copy_from_slice(&acc);
    }
    let mut acc = empty_rect(m2 / 2);
    for i in (0..count).rev() {
        expand(&mut acc, node.rect(order[i], m2));
        suffix[i * m2..(i + 1) * m2].copy_from_slice(&acc);
    }
}
