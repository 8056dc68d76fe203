#![allow(dead_code)]

use deep_polar::channels::LLR_MAX;
use deep_polar::construction::{build_code, DeepPolarCode, LayerConfig};
use deep_polar::gf2::{BitVector, Gf2Matrix};
use deep_polar::presets;
use deep_polar::reliability::ProfileSource;
use rand::Rng;

pub fn example1() -> DeepPolarCode {
    build_code(
        &[LayerConfig::new(8, 4, Some(4)), LayerConfig::new(32, 7, Some(8))],
        &ProfileSource::Bec(0.5),
        None,
    )
    .unwrap()
}

pub fn example2() -> DeepPolarCode {
    build_code(
        &[LayerConfig::new(4, 3, None), LayerConfig::new(32, 12, Some(8))],
        &ProfileSource::Bec(0.5),
        None,
    )
    .unwrap()
}

pub fn preset(name: &str) -> DeepPolarCode {
    presets::find(name)
        .unwrap_or_else(|| panic!("preset {name}"))
        .config
        .build()
        .unwrap()
}

pub fn toy() -> DeepPolarCode {
    preset("toy")
}

pub fn random_bits(rng: &mut impl Rng, k: usize) -> BitVector {
    BitVector::from_bools((0..k).map(|_| rng.random::<bool>()))
}

pub fn noiseless(x: &BitVector) -> Vec<f64> {
    x.iter().map(|b| if b { -LLR_MAX } else { LLR_MAX }).collect()
}

/// `G_N` built from Kronecker powers of `[[1,0],[1,1]]`.
pub fn dense_kernel(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                next[r][c] = g[r][c];
                next[r + m][c] = g[r][c];
                next[r + m][c + m] = g[r][c];
            }
        }
        g = next;
    }
    g
}

/// Row vector times dense matrix over GF(2).
pub fn dense_mul(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let cols = g.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| u.iter().zip(g).fold(0u8, |acc, (&a, row)| acc ^ (a & row[c])))
        .collect()
}

pub fn dense_transpose(g: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let n = g.len();
    (0..n).map(|c| (0..n).map(|r| g[r][c]).collect()).collect()
}

pub fn to_bits(v: &BitVector) -> Vec<u8> {
    v.to_bits()
}

pub fn matrix_rows(m: &Gf2Matrix) -> Vec<BitVector> {
    m.rows().to_vec()
}
