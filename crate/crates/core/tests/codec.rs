mod common;

use std::fs;

use common::{binomial, fixture_dir, gf_mul_oracle, k_subsets, pseudo_random, zfec_names, zfec_share_payload};
use ecstore::codec::{
    self, build_coding_matrix, format_share_name, gf_div, gf_inv, gf_mul, parse_chunk_filename, Chunk, CodingParams,
    DecodePath,
};
use proptest::prelude::*;

#[test]
fn gf_mul_matches_oracle_on_all_pairs() {
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            assert_eq!(gf_mul(a, b), gf_mul_oracle(a, b), "{a} * {b}");
        }
    }
}

#[test]
fn gf_inverse_and_division() {
    for a in 1..=255u8 {
        assert_eq!(gf_mul(a, gf_inv(a)), 1);
        for b in [1u8, 2, 29, 255] {
            assert_eq!(gf_mul(gf_div(a, b), b), a);
        }
    }
}

fn assert_all_submatrices_invertible(k: usize, m: usize) {
    let matrix = build_coding_matrix(CodingParams::new(k, m).unwrap()).unwrap();
    let subsets = k_subsets(m, k);
    assert_eq!(subsets.len(), binomial(m, k));
    for rows in subsets {
        assert!(matrix.select_rows(&rows).inverse().is_some(), "({k},{m}) rows {rows:?}");
    }
}

#[test]
fn every_square_submatrix_is_invertible() {
    assert_all_submatrices_invertible(2, 3);
    assert_all_submatrices_invertible(4, 8);
    assert_all_submatrices_invertible(10, 15);
}

#[test]
fn payloads_match_reference_shares() {
    for base in ["small.bin", "padded.bin"] {
        let input = fs::read(fixture_dir().join(base)).unwrap();
        let params = CodingParams::new(10, 15).unwrap();
        let chunks = codec::encode(&input, params).unwrap();
        for chunk in &chunks {
            let name = codec::chunk_filename(base, &chunk.header).unwrap();
            let want = zfec_share_payload(&name, input.len(), 10);
            assert_eq!(chunk.payload, want, "{name}");
        }
    }
}

#[test]
fn share_names_match_reference_tool() {
    let names = zfec_names();
    assert!(names.len() > 200);
    for (k, m, name) in names {
        let parsed = parse_chunk_filename(&name).unwrap();
        assert_eq!(parsed.total, m, "{name} (k={k})");
        assert_eq!(format_share_name("data.bin", parsed.chunk_index, m).unwrap(), name);
    }
    assert!(parse_chunk_filename("data.bin.3_15.fec").is_err());
}

#[test]
fn decode_prefers_data_chunks() {
    let data = pseudo_random(5000, 11);
    let chunks = codec::encode(&data, CodingParams::new(4, 7).unwrap()).unwrap();
    let all = codec::reconstruct(&chunks).unwrap();
    assert_eq!(all.path, DecodePath::Systematic);
    let some: Vec<&Chunk> = chunks.iter().skip(2).collect();
    let rec = codec::reconstruct(&some).unwrap();
    assert_eq!(rec.data, data);
    assert_eq!(rec.path, DecodePath::Inverted { recovered: 2 });
}

#[test]
fn too_few_chunks_is_an_error() {
    let chunks = codec::encode(b"hello world", CodingParams::new(3, 5).unwrap()).unwrap();
    assert!(codec::decode(&chunks[..2]).is_err());
    let mixed = vec![
        chunks[0].clone(),
        codec::encode(b"other", CodingParams::new(3, 6).unwrap()).unwrap()[1].clone(),
        chunks[2].clone(),
    ];
    assert!(codec::decode(&mixed).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn any_k_chunks_round_trip(
        len in 0usize..3000,
        k in 1usize..=12,
        extra in 0usize..=8,
        seed in any::<u64>(),
        pick in any::<u64>(),
    ) {
        let m = k + extra;
        let data = pseudo_random(len, seed);
        let chunks = codec::encode(&data, CodingParams::new(k, m).unwrap()).unwrap();
        let mut idx: Vec<usize> = (0..m).collect();
        // Fisher-Yates driven by `pick`.
        let mut s = pick as usize;
        for i in (1..m).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            idx.swap(i, (s >> 33) % (i + 1));
        }
        let chosen: Vec<Chunk> = idx[..k].iter().map(|&i| chunks[i].clone()).collect();
        prop_assert_eq!(codec::decode(&chosen).unwrap(), data);
        // Bytes on the wire parse back identically.
        for c in &chunks {
            prop_assert_eq!(&Chunk::from_bytes(&c.to_bytes()).unwrap(), c);
        }
    }
}
