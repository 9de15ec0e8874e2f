use super::{Selection, SelectionProblem};

/// Greedy fill followed by first-improvement local search, from two
/// starting orders.
///
/// Each greedy pass adds positive-score sentences in a fixed order whenever
/// the addition keeps both constraints. One pass orders by score (objective
/// gain per character), the other by total gain `L_i·S_i`. Local search then
/// repeatedly applies the first improving feasible move among additions,
/// removals, one-for-one swaps and two-for-one swaps until none remains. The
/// better of the two results is returned, the score-ordered one on ties.
///
/// Running totals make every move O(1) to test: `row[k]` holds
/// `Σ_{i ∈ chosen, i ≠ k} sim(i, k)`.
pub fn select_heuristic(problem: &SelectionProblem) -> Selection {
    let positive: Vec<usize> = (0..problem.len()).filter(|&i| problem.scores[i] > 0.0).collect();
    let mut by_score = positive.clone();
    by_score.sort_by(|&a, &b| problem.scores[b].total_cmp(&problem.scores[a]).then(a.cmp(&b)));
    let mut by_gain = positive;
    by_gain.sort_by(|&a, &b| problem.gain(b).total_cmp(&problem.gain(a)).then(a.cmp(&b)));

    let mut best: Option<Selection> = None;
    for order in [by_score, by_gain] {
        let candidate = run_from(problem, &order);
        if best.as_ref().map_or(true, |b| candidate.objective > b.objective) {
            best = Some(candidate);
        }
    }
    best.unwrap_or_else(Selection::empty)
}

fn run_from(problem: &SelectionProblem, order: &[usize]) -> Selection {
    let mut state = State::new(problem);
    for &j in order {
        if state.add_delta(j).is_some() {
            state.add(j);
        }
    }
    while state.improve() {}
    let chosen = (0..problem.len()).filter(|&i| state.member[i]).collect();
    Selection::evaluate(problem, chosen)
}

struct State<'a> {
    p: &'a SelectionProblem,
    member: Vec<bool>,
    count: usize,
    value: f64,
    length: usize,
    redundancy: f64,
    row: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(p: &'a SelectionProblem) -> Self {
        State { p, member: vec![false; p.len()], count: 0, value: 0.0, length: 0, redundancy: 0.0, row: vec![0.0; p.len()] }
    }

    fn improves(&self, delta: f64) -> bool {
        delta > 1e-12 * (1.0 + self.value.abs())
    }

    /// Incremental redundancy sums are held to zero rather than the shared
    /// tolerance, so the final recount in ascending order stays within it.
    fn feasible(&self, count: usize, length: usize, redundancy: f64) -> bool {
        length <= self.p.size_budget && (count < 2 || redundancy <= 0.0)
    }

    /// Redundancy change from adding `j`, if the result is feasible.
    fn add_delta(&self, j: usize) -> Option<f64> {
        let d = self.row[j] - self.count as f64 * self.p.theta;
        let ok = self.feasible(self.count + 1, self.length + self.p.lengths[j], self.redundancy + d);
        ok.then_some(d)
    }

    fn drop_delta(&self, i: usize) -> Option<f64> {
        let d = -(self.row[i] - (self.count - 1) as f64 * self.p.theta);
        let ok = self.feasible(self.count - 1, self.length - self.p.lengths[i], self.redundancy + d);
        ok.then_some(d)
    }

    fn swap_delta(&self, out: usize, inn: usize) -> Option<f64> {
        let rest = (self.count - 1) as f64 * self.p.theta;
        let d = -(self.row[out] - rest) + (self.row[inn] - self.p.sim(out, inn) - rest);
        let length = self.length - self.p.lengths[out] + self.p.lengths[inn];
        self.feasible(self.count, length, self.redundancy + d).then_some(d)
    }

    /// Redundancy change from dropping `a` and `b` and adding `inn`, if the
    /// result is feasible.
    fn double_swap_delta(&self, a: usize, b: usize, inn: usize) -> Option<f64> {
        let theta = self.p.theta;
        let c = self.count as f64;
        let d = -(self.row[a] - (c - 1.0) * theta) - (self.row[b] - self.p.sim(a, b) - (c - 2.0) * theta)
            + (self.row[inn] - self.p.sim(a, inn) - self.p.sim(b, inn) - (c - 2.0) * theta);
        let length = self.length - self.p.lengths[a] - self.p.lengths[b] + self.p.lengths[inn];
        self.feasible(self.count - 1, length, self.redundancy + d).then_some(d)
    }

    fn add(&mut self, j: usize) {
        self.redundancy += self.row[j] - self.count as f64 * self.p.theta;
        self.member[j] = true;
        self.count += 1;
        self.value += self.p.gain(j);
        self.length += self.p.lengths[j];
        for k in 0..self.p.len() {
            if k != j {
                self.row[k] += self.p.sim(j, k);
            }
        }
    }

    fn remove(&mut self, i: usize) {
        self.redundancy -= self.row[i] - (self.count - 1) as f64 * self.p.theta;
        self.member[i] = false;
        self.count -= 1;
        self.value -= self.p.gain(i);
        self.length -= self.p.lengths[i];
        for k in 0..self.p.len() {
            if k != i {
                self.row[k] -= self.p.sim(i, k);
            }
        }
    }

    fn improve(&mut self) -> bool {
        let n = self.p.len();
        for j in (0..n).filter(|&j| !self.member[j]) {
            if self.improves(self.p.gain(j)) && self.add_delta(j).is_some() {
                self.add(j);
                return true;
            }
        }
        for i in (0..n).filter(|&i| self.member[i]) {
            if self.improves(-self.p.gain(i)) && self.drop_delta(i).is_some() {
                self.remove(i);
                return true;
            }
        }
        for out in (0..n).filter(|&i| self.member[i]) {
            for inn in (0..n).filter(|&j| !self.member[j]) {
                if self.improves(self.p.gain(inn) - self.p.gain(out)) && self.swap_delta(out, inn).is_some() {
                    self.remove(out);
                    self.add(inn);
                    return true;
                }
            }
        }
        let members: Vec<usize> = (0..n).filter(|&i| self.member[i]).collect();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                for inn in (0..n).filter(|&j| !self.member[j]) {
                    let delta = self.p.gain(inn) - self.p.gain(a) - self.p.gain(b);
                    if self.improves(delta) && self.double_swap_delta(a, b, inn).is_some() {
                        self.remove(a);
                        self.remove(b);
                        self.add(inn);
                        return true;
                    }
                }
            }
        }
        false
    }
}
