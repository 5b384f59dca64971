//! Non-dominated sorting with both objectives maximized.

/// `a` dominates `b`: no worse in both objectives, strictly better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Point indices grouped into fronts, best front first. Indices inside a
/// front are ascending.
pub fn pareto_fronts(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(points[i], points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Picks up to `k` points walking the fronts in order; within a front higher
/// first objective wins, then lower index.
pub fn select_best(points: &[(f64, f64)], k: usize) -> Vec<usize> {
    let mut selected = Vec::with_capacity(k);
    for mut front in pareto_fronts(points) {
        front.sort_by(|&a, &b| points[b].0.total_cmp(&points[a].0).then(a.cmp(&b)));
        for i in front {
            if selected.len() == k {
                return selected;
            }
            selected.push(i);
        }
    }
    selected
}
