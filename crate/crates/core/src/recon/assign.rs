use serde::{Deserialize, Serialize};

/// Per-vertex matching of incoming half-edges to their successors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    pub vertex: usize,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
    /// `cost[i][j]` for `incoming[i] → outgoing[j]`.
    pub cost: Vec<Vec<f64>>,
    /// `(i, j)` index pairs that may not be matched.
    pub forbidden: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `perm[i]` is the outgoing index matched to incoming `i`.
    pub perm: Vec<usize>,
    /// Sum of the chosen entries of the unmasked cost matrix.
    pub cost: f64,
    /// The mask admitted no perfect matching; a forbidden pair was used.
    pub infeasible: bool,
}

/// Minimum-cost perfect matching on a square matrix (potentials / shortest augmenting path).
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based arrays: p[j] is the row matched to column j.
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

pub fn solve_assignment(p: &AssignmentProblem) -> Assignment {
    let n = p.cost.len();
    let finite_max = p.cost.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    let big = (finite_max + 1.0) * (n as f64 + 1.0) * 4.0;
    let mut masked = p.cost.clone();
    for &(i, j) in &p.forbidden {
        masked[i][j] = big;
    }
    let perm = hungarian(&masked);
    let infeasible = perm.iter().enumerate().any(|(i, &j)| p.forbidden.contains(&(i, j)));
    let cost = perm.iter().enumerate().map(|(i, &j)| p.cost[i][j]).sum();
    Assignment { perm, cost, infeasible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(cost: &[Vec<f64>], forbidden: &[(usize, usize)]) -> Option<f64> {
        let n = cost.len();
        (0..n)
            .permutations(n)
            .filter(|perm| perm.iter().enumerate().all(|(i, &j)| !forbidden.contains(&(i, j))))
            .map(|perm| perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
            .min_by(f64::total_cmp)
    }

    #[test]
    fn degree_two_takes_the_only_feasible_matching() {
        let p = AssignmentProblem {
            vertex: 0,
            incoming: vec![0, 2],
            outgoing: vec![1, 3],
            cost: vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            forbidden: vec![(0, 0), (1, 1)],
        };
        let a = solve_assignment(&p);
        assert_eq!(a.perm, vec![1, 0]);
        assert!(!a.infeasible);
        assert_eq!(a.cost, 10.0);
    }

    #[test]
    fn degree_one_is_infeasible() {
        let p = AssignmentProblem { vertex: 0, incoming: vec![0], outgoing: vec![1], cost: vec![vec![0.3]], forbidden: vec![(0, 0)] };
        let a = solve_assignment(&p);
        assert!(a.infeasible);
        assert_eq!(a.perm, vec![0]);
    }

    #[test]
    fn random_five_by_five_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let cost: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
            let forbidden: Vec<(usize, usize)> = (0..5).filter(|_| rng.gen_bool(0.5)).map(|i| (i, i)).collect();
            let p = AssignmentProblem { vertex: 0, incoming: vec![], outgoing: vec![], cost: cost.clone(), forbidden: forbidden.clone() };
            let a = solve_assignment(&p);
            assert!(!a.infeasible);
            assert!((a.cost - brute_force(&cost, &forbidden).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_problem() {
        assert!(hungarian(&[]).is_empty());
    }
}
