use crate::constellation::ContactTable;

pub const UNREACHABLE: u32 = u32::MAX;

/// Per-satellite hop count to the nearest satellite holding a ground
/// contact, with the lowest-index neighbour one hop closer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistanceMap {
    pub distance: Vec<u32>,
    pub next_hop: Vec<Option<usize>>,
}

impl HopDistanceMap {
    pub fn distance(&self, sat: usize) -> Option<u32> {
        let d = self.distance[sat];
        (d != UNREACHABLE).then_some(d)
    }
}

/// All-pairs hop distances by Floyd–Warshall, reduced to the distance
/// towards the nearest contact satellite. `adjacency` must be symmetric.
pub fn floyd_hop_distances(adjacency: &[Vec<usize>], contact_sats: &[usize]) -> HopDistanceMap {
    let n = adjacency.len();
    let mut d = vec![UNREACHABLE; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
        for &j in &adjacency[i] {
            d[i * n + j] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == UNREACHABLE {
                continue;
            }
            for j in 0..n {
                let dkj = d[k * n + j];
                if dkj != UNREACHABLE && dik + dkj < d[i * n + j] {
                    d[i * n + j] = dik + dkj;
                }
            }
        }
    }
    let distance: Vec<u32> = (0..n)
        .map(|i| {
            contact_sats
                .iter()
                .map(|&c| d[i * n + c])
                .min()
                .unwrap_or(UNREACHABLE)
        })
        .collect();
    with_next_hops(adjacency, distance)
}

/// Same map by multi-source breadth-first search; linear instead of cubic.
pub fn bfs_hop_distances(adjacency: &[Vec<usize>], contact_sats: &[usize]) -> HopDistanceMap {
    let mut distance = vec![UNREACHABLE; adjacency.len()];
    let mut queue = std::collections::VecDeque::new();
    for &c in contact_sats {
        if distance[c] != 0 {
            distance[c] = 0;
            queue.push_back(c);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if distance[v] == UNREACHABLE {
                distance[v] = distance[u] + 1;
                queue.push_back(v);
            }
        }
    }
    with_next_hops(adjacency, distance)
}

fn with_next_hops(adjacency: &[Vec<usize>], distance: Vec<u32>) -> HopDistanceMap {
    let next_hop = (0..adjacency.len())
        .map(|i| {
            let d = distance[i];
            if d == 0 || d == UNREACHABLE {
                return None;
            }
            adjacency[i]
                .iter()
                .copied()
                .filter(|&j| distance[j] == d - 1)
                .min()
        })
        .collect();
    HopDistanceMap { distance, next_hop }
}

/// Live ISL adjacency at slot `t`, neighbour lists ascending.
pub fn live_adjacency(contacts: &ContactTable, t: usize) -> Vec<Vec<usize>> {
    (0..contacts.sat_count())
        .map(|i| contacts.live_neighbors(t, i).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(p: usize, s: usize) -> Vec<Vec<usize>> {
        let id = |o: usize, k: usize| o * s + k;
        let mut adj = vec![Vec::new(); p * s];
        for o in 0..p {
            for k in 0..s {
                let i = id(o, k);
                for j in [
                    id(o, (k + s - 1) % s),
                    id(o, (k + 1) % s),
                    id((o + p - 1) % p, k),
                    id((o + 1) % p, k),
                ] {
                    if j != i && !adj[i].contains(&j) {
                        adj[i].push(j);
                    }
                }
                adj[i].sort_unstable();
            }
        }
        adj
    }

    #[test]
    fn grid_manhattan() {
        let map = floyd_hop_distances(&torus(3, 3), &[0]);
        assert_eq!(map.distance(4), Some(2));
        assert_eq!(map.distance(0), Some(0));
        assert_eq!(map.next_hop[0], None);
        assert_eq!(map.next_hop[4], Some(1));
    }

    #[test]
    fn floyd_matches_bfs_on_random_torus() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let full = torus(5, 5);
            // drop some links symmetrically
            let mut adj = full.clone();
            for i in 0..25 {
                for &j in &full[i] {
                    if i < j && rng.gen_bool(0.2) {
                        adj[i].retain(|&x| x != j);
                        adj[j].retain(|&x| x != i);
                    }
                }
            }
            let contacts: Vec<usize> = (0..25).filter(|_| rng.gen_bool(0.1)).collect();
            let a = floyd_hop_distances(&adj, &contacts);
            let b = bfs_hop_distances(&adj, &contacts);
            assert_eq!(a, b);
            for i in 0..25 {
                if let Some(nh) = a.next_hop[i] {
                    assert_eq!(a.distance[nh] + 1, a.distance[i]);
                }
            }
        }
    }

    #[test]
    fn isolated_satellite_unreachable() {
        let adj = vec![vec![1], vec![0], vec![]];
        let map = floyd_hop_distances(&adj, &[0]);
        assert_eq!(map.distance(2), None);
        assert_eq!(map.next_hop[1], Some(0));
    }
}
