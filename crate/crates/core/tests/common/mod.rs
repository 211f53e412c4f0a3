//! Generators of triangle-local four-outcome distributions.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tricert::dist::TriangleDistribution;

/// Hidden state of one source: a token bit and a label k with weights `w`.
pub struct Source {
    pub q: f64,
    pub w: Vec<f64>,
}

/// Local model in which every party outputs the PTC first bit from its two
/// tokens, flipped when both labels equal the last value, and a second bit
/// given by an arbitrary table of its two sources' hidden states.
pub struct LocalTokenModel {
    pub sources: [Source; 3],
    /// `second[s][(ta, ka)][(tb, kb)]`, indexed by the two sources party s sees.
    pub second: [Vec<Vec<u8>>; 3],
    pub flip_first: bool,
}

/// Sources seen by each party, in order: A sees (β, γ), B sees (α, γ), C sees (α, β).
pub const SEES: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

impl LocalTokenModel {
    pub fn random(rng: &mut ChaCha8Rng, k: usize, q_range: (f64, f64), rare: f64, flip_first: bool) -> Self {
        let sources = std::array::from_fn(|_| {
            let q = {
                let x = rng.gen_range(q_range.0..q_range.1);
                if rng.gen() {
                    x
                } else {
                    1.0 - x
                }
            };
            let mut w = vec![(1.0 - rare) / (k - 1).max(1) as f64; k];
            if k > 1 {
                w[k - 1] = rare;
            } else {
                w[0] = 1.0;
            }
            Source { q, w }
        });
        let states = 2 * k;
        let second = std::array::from_fn(|_| {
            (0..states).map(|_| (0..states).map(|_| rng.gen_range(0..2)).collect()).collect()
        });
        Self { sources, second, flip_first }
    }

    pub fn distribution(&self) -> TriangleDistribution {
        let k = self.sources[0].w.len();
        let states = 2 * k;
        let weight = |s: usize, st: usize| {
            let (t, kk) = (st / k, st % k);
            let pt = if t == 0 { self.sources[s].q } else { 1.0 - self.sources[s].q };
            pt * self.sources[s].w[kk]
        };
        let mut table = vec![0.0; 64];
        for sa in 0..states {
            for sb in 0..states {
                for sg in 0..states {
                    let st = [sa, sb, sg];
                    let p = weight(0, sa) * weight(1, sb) * weight(2, sg);
                    if p == 0.0 {
                        continue;
                    }
                    let mut o = [0usize; 3];
                    for party in 0..3 {
                        let (x, y) = SEES[party];
                        let (tx, kx) = (st[x] / k, st[x] % k);
                        let (ty, ky) = (st[y] / k, st[y] % k);
                        let mut x1 = tx ^ ty ^ 1;
                        if self.flip_first && k > 1 && kx == k - 1 && ky == k - 1 {
                            x1 ^= 1;
                        }
                        let x2 = usize::from(self.second[party][st[x]][st[y]]);
                        o[party] = 2 * x1 + x2;
                    }
                    table[16 * o[0] + 4 * o[1] + o[2]] += p;
                }
            }
        }
        TriangleDistribution::new(4, table).expect("local model yields a distribution")
    }
}

pub fn exact_ptc_local(rng: &mut ChaCha8Rng) -> TriangleDistribution {
    LocalTokenModel::random(rng, 2, (0.6, 0.95), 0.5, false).distribution()
}

pub fn noisy_local(rng: &mut ChaCha8Rng) -> TriangleDistribution {
    let rare = rng.gen_range(0.02..0.08);
    LocalTokenModel::random(rng, 3, (0.75, 0.95), rare, true).distribution()
}
