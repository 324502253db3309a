use super::network::LinkTable;

/// Hop-indexed minimum-energy table: `cost[h][v]` is the cheapest walk of
/// exactly `h` hops from any source to `v`, built from row `h − 1` plus one
/// feasible link.
#[derive(Debug, Clone)]
pub struct DpTable {
    ids: Vec<usize>,
    cost: Vec<Vec<f64>>,
    pred: Vec<Vec<Option<usize>>>,
}

impl DpTable {
    /// `ids` names the table's local indices; `sources` are local indices
    /// with zero cost at hop 0.
    pub(crate) fn run(ids: Vec<usize>, sources: &[usize], links: &LinkTable, duration: f64, max_hops: usize) -> Self {
        let k = links.size();
        debug_assert_eq!(ids.len(), k);
        let mut start = vec![f64::INFINITY; k];
        for &s in sources {
            start[s] = 0.0;
        }
        let mut cost = vec![start];
        let mut pred = vec![vec![None; k]];
        for h in 1..=max_hops {
            let prev = &cost[h - 1];
            let mut row = vec![f64::INFINITY; k];
            let mut row_pred = vec![None; k];
            for v in 0..k {
                for (u, &reached) in prev.iter().enumerate() {
                    if !reached.is_finite() {
                        continue;
                    }
                    let Some(power) = links.power(u, v) else { continue };
                    let candidate = reached + power * duration;
                    if candidate < row[v] {
                        row[v] = candidate;
                        row_pred[v] = Some(u);
                    }
                }
            }
            cost.push(row);
            pred.push(row_pred);
        }
        DpTable { ids, cost, pred }
    }

    pub fn max_hops(&self) -> usize {
        self.cost.len() - 1
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    fn local(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub(crate) fn cost_local(&self, v: usize, h: usize) -> f64 {
        self.cost[h][v]
    }

    /// Minimum cost in joules of reaching `id` in exactly `h` hops; `+∞` if unreachable.
    pub fn min_cost(&self, id: usize, h: usize) -> f64 {
        match self.local(id) {
            Some(v) if h <= self.max_hops() => self.cost[h][v],
            _ => f64::INFINITY,
        }
    }

    pub fn predecessor(&self, id: usize, h: usize) -> Option<usize> {
        let v = self.local(id)?;
        self.pred.get(h)?[v].map(|u| self.ids[u])
    }

    /// Local indices of the optimal walk ending at `v` after `h` hops.
    pub(crate) fn walk_local(&self, v: usize, h: usize) -> Option<Vec<usize>> {
        if !self.cost[h][v].is_finite() {
            return None;
        }
        let mut walk = vec![v];
        let mut cur = v;
        for step in (1..=h).rev() {
            cur = self.pred[step][cur]?;
            walk.push(cur);
        }
        walk.reverse();
        Some(walk)
    }

    /// Node ids of the optimal walk ending at `id` after exactly `h` hops.
    pub fn path(&self, id: usize, h: usize) -> Option<Vec<usize>> {
        let v = self.local(id)?;
        if h > self.max_hops() {
            return None;
        }
        self.walk_local(v, h).map(|w| w.into_iter().map(|u| self.ids[u]).collect())
    }
}
