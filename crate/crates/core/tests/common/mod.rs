#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

/// GF(2^8) product by carry-less multiplication and reduction modulo 0x11D,
/// written without tables.
pub fn gf_mul_oracle(a: u8, b: u8) -> u8 {
    let mut product: u16 = 0;
    for bit in 0..8 {
        if b & (1 << bit) != 0 {
            product ^= (a as u16) << bit;
        }
    }
    for bit in (8..15).rev() {
        if product & (1 << bit) != 0 {
            product ^= 0x11D << (bit - 8);
        }
    }
    product as u8
}

/// Every `k`-element subset of `0..m`, in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + m - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/zfec")
}

/// `(k, m, file name)` triples produced by the reference zfec tool.
pub fn zfec_names() -> Vec<(usize, usize, String)> {
    fs::read_to_string(fixture_dir().join("names.txt"))
        .expect("names fixture")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            let k = it.next().unwrap().parse().unwrap();
            let m = it.next().unwrap().parse().unwrap();
            (k, m, it.next().unwrap().to_string())
        })
        .collect()
}

/// Payload of a zfec share file: the file minus its variable-length header.
pub fn zfec_share_payload(name: &str, input_len: usize, k: usize) -> Vec<u8> {
    let bytes = fs::read(fixture_dir().join(name)).expect("share fixture");
    let payload_len = input_len.div_ceil(k);
    bytes[bytes.len() - payload_len..].to_vec()
}

/// Deterministic pseudo-random bytes (xorshift).
pub fn pseudo_random(len: usize, seed: u64) -> Vec<u8> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 24) as u8
        })
        .collect()
}
