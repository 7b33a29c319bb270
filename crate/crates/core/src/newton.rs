//! Vertices of Newton polyhedra `conv(S) + ℝ₊^d` over finite sets of multi-indices.
//!
//! A point `α ∈ S` is a vertex iff it is not in `conv(S \ {α}) + ℝ₊^d`. That is a linear
//! feasibility problem with small integer data, solved exactly by a phase-I simplex
//! over rationals with Bland's rule.

use num_rational::Ratio;

use crate::poly::MultiIndex;

type Q = Ratio<i128>;

fn q(v: i128) -> Q {
    Q::from_integer(v)
}

/// Is there `λ ≥ 0`, `Σλ = 1` with `Σ λ_β β ≤ α` componentwise?
fn dominated(alpha: &[u32], others: &[&MultiIndex]) -> bool {
    let d = alpha.len();
    let nl = others.len();
    if nl == 0 {
        return false;
    }
    // rows: d inequality rows with slacks, plus the convexity row
    let m = d + 1;
    let ncols = nl + d + m;
    let mut t: Vec<Vec<Q>> = vec![vec![q(0); ncols + 1]; m];
    for j in 0..d {
        for (b, beta) in others.iter().enumerate() {
            t[j][b] = q(beta[j] as i128);
        }
        t[j][nl + j] = q(1);
        t[j][nl + d + j] = q(1);
        t[j][ncols] = q(alpha[j] as i128);
    }
    for b in 0..nl {
        t[d][b] = q(1);
    }
    t[d][nl + d + d] = q(1);
    t[d][ncols] = q(1);
    let mut basis: Vec<usize> = (0..m).map(|i| nl + d + i).collect();
    // reduced costs of the phase-I objective Σ artificials
    let mut cost = vec![q(0); ncols + 1];
    for row in &t {
        for c in 0..=ncols {
            cost[c] -= row[c];
        }
    }
    for i in 0..m {
        cost[nl + d + i] = q(0);
    }
    loop {
        let Some(enter) = (0..ncols).find(|&c| cost[c] < q(0)) else { break };
        let mut leave: Option<usize> = None;
        for r in 0..m {
            if t[r][enter] > q(0) {
                let ratio = t[r][ncols] / t[r][enter];
                leave = match leave {
                    None => Some(r),
                    Some(l) => {
                        let rl = t[l][ncols] / t[l][enter];
                        if ratio < rl || (ratio == rl && basis[r] < basis[l]) {
                            Some(r)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(l) = leave else { break };
        let piv = t[l][enter];
        for c in 0..=ncols {
            t[l][c] /= piv;
        }
        for r in 0..m {
            if r != l && t[r][enter] != q(0) {
                let f = t[r][enter];
                for c in 0..=ncols {
                    let v = t[l][c] * f;
                    t[r][c] -= v;
                }
            }
        }
        let f = cost[enter];
        for c in 0..=ncols {
            let v = t[l][c] * f;
            cost[c] -= v;
        }
        basis[l] = enter;
    }
    // optimum of Σ artificials is -cost[rhs]
    cost[ncols] == q(0)
}

/// Vertex set of the Newton polyhedron of `support`, sorted and deduplicated.
pub fn newton_vertices(support: &[MultiIndex]) -> Vec<MultiIndex> {
    let mut pts: Vec<MultiIndex> = support.to_vec();
    pts.sort();
    pts.dedup();
    pts.iter()
        .filter(|a| {
            let others: Vec<&MultiIndex> = pts.iter().filter(|b| b != a).collect();
            !dominated(a, &others)
        })
        .cloned()
        .collect()
}
