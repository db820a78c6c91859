use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Maximum bipartite matching (Hopcroft–Karp). `adj[u]` lists the right
/// vertices left vertex `u` may pair with; visiting order follows the
/// lists, so sorted input gives a deterministic result. Returns
/// `pair[u] = Some(v)`.
pub fn hopcroft_karp(adj: &[Vec<usize>], right_count: usize) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut pair_left = vec![NIL; n];
    let mut pair_right = vec![NIL; right_count];
    let mut dist = vec![0usize; n];

    loop {
        // layer free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n {
            if pair_left[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = pair_right[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; n];
        for u in 0..n {
            if pair_left[u] == NIL {
                augment(
                    u,
                    adj,
                    &mut pair_left,
                    &mut pair_right,
                    &mut dist,
                    &mut next,
                );
            }
        }
    }
    pair_left
        .into_iter()
        .map(|v| (v != NIL).then_some(v))
        .collect()
}

/// Iterative layered DFS from free left vertex `root`.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    pair_left: &mut [usize],
    pair_right: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if next[u] == adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][next[u]];
        let w = pair_right[v];
        if w == NIL {
            // flip the alternating path on the stack
            let mut v = v;
            while let Some(u) = stack.pop() {
                let prev = pair_left[u];
                pair_left[u] = v;
                pair_right[v] = u;
                v = prev;
            }
            return true;
        }
        if dist[w] == dist[u] + 1 {
            stack.push(w);
        } else {
            next[u] += 1;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(adj: &[Vec<usize>], right: usize) -> usize {
        fn go(u: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; right])
    }

    #[test]
    fn forced_pair() {
        assert_eq!(hopcroft_karp(&[vec![0]], 1), vec![Some(0)]);
    }

    #[test]
    fn needs_augmenting_path() {
        // greedy would give 0-0 and leave 1 unmatched
        let adj = vec![vec![0, 1], vec![0]];
        assert_eq!(hopcroft_karp(&adj, 2), vec![Some(1), Some(0)]);
    }

    #[test]
    fn matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let (l, r) = (rng.gen_range(0..7), rng.gen_range(1..7));
            let adj: Vec<Vec<usize>> = (0..l)
                .map(|_| (0..r).filter(|_| rng.gen_bool(0.35)).collect())
                .collect();
            let m = hopcroft_karp(&adj, r);
            let mut used = vec![false; r];
            for (u, v) in m.iter().enumerate() {
                if let Some(v) = *v {
                    assert!(adj[u].contains(&v));
                    assert!(!used[v]);
                    used[v] = true;
                }
            }
            assert_eq!(m.iter().flatten().count(), brute_force(&adj, r));
        }
    }
}
