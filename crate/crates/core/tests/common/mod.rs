//! Shared generators and independent oracles for the integration and
//! acceptance suites. Everything here recomputes results from first
//! principles and stays independent of the library's implementation paths.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use product_space::diffusion::ProductIncome;
use product_space::dynamics::{TransitionLabel, TransitionTable};
use product_space::proximity::ProximityMatrix;
use product_space::specialization::SpecializationMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn product_codes(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{i:04}")).collect()
}

pub fn country_codes(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let a = b'A' + (i / 26) as u8;
            let b = b'A' + (i % 26) as u8;
            format!("{}{}X", a as char, b as char)
        })
        .collect()
}

/// Random specialization matrix with the given fill probability.
pub fn random_spec(rng: &mut ChaCha8Rng, nc: usize, np: usize, fill: f64) -> SpecializationMatrix {
    let bits = (0..nc * np).map(|_| rng.gen_bool(fill)).collect();
    SpecializationMatrix::new(country_codes(nc), product_codes(np), bits, 1.0).unwrap()
}

/// Random symmetric proximity matrix; `zero_frac` of the off-diagonal pairs
/// are exactly zero.
pub fn random_proximity(rng: &mut ChaCha8Rng, n: usize, zero_frac: f64) -> ProximityMatrix {
    let mut phi = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = if rng.gen_bool(zero_frac) {
                0.0
            } else {
                rng.gen_range(0.0..=1.0)
            };
            phi[i * n + j] = v;
            phi[j * n + i] = v;
        }
    }
    ProximityMatrix::from_dense(product_codes(n), phi).unwrap()
}

/// Proximity by direct evaluation of the two conditional probabilities
/// min{P(i|j), P(j|i)} over explicit country enumeration.
pub fn conditional_phi_oracle(s: &SpecializationMatrix, i: usize, j: usize) -> f64 {
    let nc = s.countries().len();
    let si: Vec<usize> = (0..nc).filter(|&c| s.bit(c, i)).collect();
    let sj: Vec<usize> = (0..nc).filter(|&c| s.bit(c, j)).collect();
    if si.is_empty() || sj.is_empty() {
        return 0.0;
    }
    let inter = si.iter().filter(|c| sj.contains(c)).count() as f64;
    let p_i_given_j = inter / sj.len() as f64;
    let p_j_given_i = inter / si.len() as f64;
    p_i_given_j.min(p_j_given_i)
}

/// Maximum total weight over every acyclic subset of the positive-weight
/// edges. With strictly positive weights this equals the maximum spanning
/// forest weight; enumeration is exhaustive (n <= 6 keeps it tiny).
pub fn brute_force_forest_weight(p: &ProximityMatrix) -> f64 {
    let n = p.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if p.get(i, j) > 0.0 {
                edges.push((i, j, p.get(i, j)));
            }
        }
    }
    let m = edges.len();
    assert!(m <= 20, "edge enumeration only meant for tiny graphs");
    let mut best = 0.0f64;
    'subset: for mask in 0u32..(1 << m) {
        // Cycle check by incremental component merging over plain vectors.
        let mut comp: Vec<usize> = (0..n).collect();
        let mut weight = 0.0;
        for (k, &(i, j, w)) in edges.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            let (ci, cj) = (comp[i], comp[j]);
            if ci == cj {
                continue 'subset; // cycle
            }
            for c in comp.iter_mut() {
                if *c == cj {
                    *c = ci;
                }
            }
            weight += w;
        }
        best = best.max(weight);
    }
    best
}

/// Hop distance from a seed set over the graph keeping edges with
/// `phi >= phi0` (or strictly greater when `inclusive` is false), capped at
/// `max_rounds`. `None` marks unreachable products.
pub fn bfs_threshold_distances(
    p: &ProximityMatrix,
    seeds: &[usize],
    phi0: f64,
    inclusive: bool,
    max_rounds: u32,
) -> Vec<Option<u32>> {
    let n = p.n();
    let mut dist: Vec<Option<u32>> = vec![None; n];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in seeds {
        dist[s] = Some(0);
        frontier.push(s);
    }
    let mut round = 0;
    while !frontier.is_empty() && round < max_rounds {
        round += 1;
        let mut next = Vec::new();
        for j in 0..n {
            if dist[j].is_some() {
                continue;
            }
            // Only the newest frontier needs checking: a node adjacent to an
            // older reached node was itself reached on an earlier round.
            let hit = frontier.iter().any(|&i| {
                let phi = p.get(i, j);
                if inclusive {
                    phi >= phi0
                } else {
                    phi > phi0
                }
            });
            if hit {
                next.push(j);
            }
        }
        for &j in &next {
            dist[j] = Some(round);
        }
        frontier = next;
    }
    dist
}

/// Labels every (country, candidate-product) pair transition iff the nearest
/// developed neighbor's proximity clears `cut`, computed directly from the
/// inputs (independent of the curve implementation).
pub fn plant_by_phi_star(
    s0: &SpecializationMatrix,
    p: &ProximityMatrix,
    cut: f64,
) -> TransitionTable {
    let nc = s0.countries().len();
    let np = s0.products().len();
    let mut entries = Vec::new();
    for c in 0..nc {
        for j in 0..np {
            if s0.bit(c, j) {
                continue;
            }
            let mut phi_star = 0.0f64;
            for i in 0..np {
                if i != j && s0.bit(c, i) {
                    phi_star = phi_star.max(p.get(i, j));
                }
            }
            let label = if phi_star > cut {
                TransitionLabel::Transition
            } else {
                TransitionLabel::Undeveloped
            };
            entries.push((c, j, label));
        }
    }
    TransitionTable {
        countries: s0.countries().to_vec(),
        products: s0.products().to_vec(),
        entries,
        low: 0.5,
        high: 1.0,
    }
}

/// Two-cluster world: a rich core and poor periphery joined by one bridge at
/// phi 0.6. Above the bridge nothing moves; below it the poor cluster
/// reaches the core.
pub fn two_cluster_world() -> (SpecializationMatrix, ProximityMatrix, Vec<ProductIncome>) {
    let np = 20;
    let codes = product_codes(np);
    let mut phi = vec![0.0; np * np];
    let set = |phi: &mut Vec<f64>, i: usize, j: usize, v: f64| {
        phi[i * np + j] = v;
        phi[j * np + i] = v;
    };
    for i in 0..10 {
        for j in i + 1..10 {
            set(&mut phi, i, j, 0.9); // core
            set(&mut phi, i + 10, j + 10, 0.9); // periphery
        }
    }
    set(&mut phi, 9, 10, 0.6); // bridge
    let p = ProximityMatrix::from_dense(codes.clone(), phi).unwrap();

    let countries = country_codes(16);
    let mut bits = Vec::new();
    for c in 0..16 {
        for j in 0..np {
            let rich = c < 8;
            bits.push(if rich { j < 10 } else { j >= 10 });
        }
    }
    let s = SpecializationMatrix::new(countries, codes.clone(), bits, 1.0).unwrap();

    let prodys = codes
        .iter()
        .enumerate()
        .map(|(j, c)| ProductIncome {
            product: c.clone(),
            prody: if j < 10 { 30000.0 } else { 3000.0 },
        })
        .collect();
    (s, p, prodys)
}

/// Average-linkage leaf order recomputed from scratch at every merge (no
/// Lance-Williams shortcut), with the same deterministic tie rule the
/// library documents: merge the pair whose smallest leaf labels are
/// lexicographically least, smaller-labelled cluster first.
pub fn average_linkage_oracle(p: &ProximityMatrix) -> Vec<String> {
    let n = p.n();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &x in &clusters[a] {
                    for &y in &clusters[b] {
                        sum += 1.0 - p.get(x, y);
                    }
                }
                let d = sum / (clusters[a].len() * clusters[b].len()) as f64;
                let key = {
                    let ma = *clusters[a].iter().min().unwrap();
                    let mb = *clusters[b].iter().min().unwrap();
                    (ma.min(mb), ma.max(mb))
                };
                let take = match best {
                    None => true,
                    Some((ba, bb, bd)) => {
                        let bkey = {
                            let ma = *clusters[ba].iter().min().unwrap();
                            let mb = *clusters[bb].iter().min().unwrap();
                            (ma.min(mb), ma.max(mb))
                        };
                        d < bd || (d == bd && key < bkey)
                    }
                };
                if take {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, _) = best.unwrap();
        let (a, b) = (a.min(b), a.max(b));
        let removed = clusters.remove(b);
        let target = &mut clusters[a];
        if removed.iter().min() < target.iter().min() {
            let mut merged = removed;
            merged.extend_from_slice(target);
            *target = merged;
        } else {
            target.extend_from_slice(&removed);
        }
    }
    clusters[0].iter().map(|&i| p.products()[i].clone()).collect()
}
