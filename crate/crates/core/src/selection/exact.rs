use super::{Selection, SelectionError, SelectionProblem, REDUNDANCY_TOLERANCE};

pub const DEFAULT_EXACT_CAP: usize = 25;

/// Depth-first branch and bound.
///
/// Subsets are visited in lexicographic order of their sorted index lists,
/// so keeping only strict improvements leaves the lexicographically smallest
/// optimum. The bound is the fractional-knapsack relaxation of the objective
/// over the undecided sentences; it ignores the redundancy constraint, which
/// cannot be pruned on because adding a dissimilar sentence can restore
/// feasibility.
pub fn select_exact(problem: &SelectionProblem, cap: usize) -> Result<Selection, SelectionError> {
    let n = problem.len();
    if n > cap {
        return Err(SelectionError::TooLarge { n, cap });
    }
    let mut by_score: Vec<usize> = (0..n).filter(|&i| problem.scores[i] > 0.0).collect();
    by_score.sort_by(|&a, &b| problem.scores[b].total_cmp(&problem.scores[a]).then(a.cmp(&b)));

    let mut search = Search { problem, by_score, chosen: Vec::with_capacity(n), best: Vec::new(), best_value: 0.0 };
    search.visit(0, 0.0, 0, 0.0);
    Ok(Selection::evaluate(problem, search.best))
}

struct Search<'a> {
    problem: &'a SelectionProblem,
    by_score: Vec<usize>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
}

impl Search<'_> {
    /// Explores every extension of `chosen` by indices `>= next`. The caller
    /// has already scored `chosen` itself.
    fn visit(&mut self, next: usize, value: f64, length: usize, redundancy: f64) {
        let p = self.problem;
        let slack = 1e-9 * (1.0 + self.best_value.abs());
        if self.upper_bound(next, value, length) < self.best_value - slack {
            return;
        }
        for j in next..p.len() {
            let new_length = length + p.lengths[j];
            if new_length > p.size_budget {
                continue;
            }
            let new_value = value + p.gain(j);
            let mut new_redundancy = redundancy;
            for &i in &self.chosen {
                new_redundancy += p.sim(i, j) - p.theta;
            }
            self.chosen.push(j);
            let feasible = self.chosen.len() < 2 || new_redundancy <= REDUNDANCY_TOLERANCE;
            if feasible && new_value > self.best_value {
                self.best_value = new_value;
                self.best.clone_from(&self.chosen);
            }
            self.visit(j + 1, new_value, new_length, new_redundancy);
            self.chosen.pop();
        }
    }

    fn upper_bound(&self, next: usize, value: f64, length: usize) -> f64 {
        let p = self.problem;
        let mut room = p.size_budget.saturating_sub(length) as f64;
        let mut bound = value;
        for &i in &self.by_score {
            if room <= 0.0 {
                break;
            }
            if i < next {
                continue;
            }
            let take = (p.lengths[i] as f64).min(room);
            bound += take * p.scores[i];
            room -= take;
        }
        bound
    }
}
