//! Dense transforms on the subset lattice of a table's coordinates.
//!
//! A table over a set of variables is a flat row-major array. An axis is
//! `(stride, levels)` for one variable. For a cell `x` write `x_v = 0` for
//! the baseline and `supp x` for its non-baseline coordinates.

use crate::table::LevelSpec;
use crate::varset::VarSet;

pub type Axis = (usize, usize);

/// Row-major axes of `set`, with every stride multiplied by `inner`.
pub fn axes(spec: &LevelSpec, set: VarSet, inner: usize) -> Vec<Axis> {
    let mut out: Vec<Axis> = Vec::with_capacity(set.len());
    let mut stride = inner;
    for v in set.to_vec().into_iter().rev() {
        out.push((stride, spec.levels(v)));
        stride *= spec.levels(v);
    }
    out.reverse();
    out
}

/// Axes of the block table `(given, target)` laid out as `s · |I_target| + r`.
pub fn block_axes(spec: &LevelSpec, given: VarSet, target: VarSet) -> (Vec<Axis>, Vec<Axis>) {
    (
        axes(spec, given, spec.cells(target)),
        axes(spec, target, 1),
    )
}

fn digit(idx: usize, (stride, m): Axis) -> usize {
    (idx / stride) % m
}

/// `f(x) ← Σ_{F ⊆₀ supp x} (−1)^{|supp x \ F|} f(x_F)` along the given axes.
pub fn mobius(f: &mut [f64], axes: &[Axis]) {
    for &ax in axes {
        for idx in 0..f.len() {
            let d = digit(idx, ax);
            if d != 0 {
                f[idx] -= f[idx - d * ax.0];
            }
        }
    }
}

/// `f(x) ← Σ_{F ⊆₀ supp x} f(x_F)`, the inverse of [`mobius`].
pub fn zeta(f: &mut [f64], axes: &[Axis]) {
    for &ax in axes {
        for idx in 0..f.len() {
            let d = digit(idx, ax);
            if d != 0 {
                f[idx] += f[idx - d * ax.0];
            }
        }
    }
}

/// `f(x) ← Σ_{y : y = x on supp x} f(y)`: baseline entries along each axis
/// become the sum over that axis.
pub fn marginal_sums<T>(f: &mut [T], axes: &[Axis])
where
    T: Copy + std::ops::AddAssign,
{
    for &(stride, m) in axes {
        for idx in 0..f.len() {
            if digit(idx, (stride, m)) == 0 {
                for l in 1..m {
                    let add = f[idx + l * stride];
                    f[idx] += add;
                }
            }
        }
    }
}

/// `log Σ exp x`, stable for large entries.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
