//! Arithmetic in GF(2^8) with the reducing polynomial x^8 + x^4 + x^3 + x^2 + 1.
//!
//! Multiplication goes through log/antilog tables generated from the primitive
//! element `2`. The tables are computed at compile time and never mutated.

/// Reducing polynomial, including the x^8 term.
pub const POLYNOMIAL: u16 = 0x11D;

/// Log and antilog tables for the field.
///
/// `exp_table` is doubled to 512 entries so that `exp[log a + log b]` never
/// needs a modular reduction. `log_table[0]` is a sentinel (zero has no log)
/// and must never be read as a real logarithm.
#[derive(Debug, Clone)]
pub struct GfTables {
    pub exp_table: [u8; 512],
    pub log_table: [u8; 256],
}

impl GfTables {
    const fn build() -> Self {
        let mut exp_table = [0u8; 512];
        let mut log_table = [0u8; 256];
        let mut x: u16 = 1;
        let mut i = 0;
        while i < 255 {
            exp_table[i] = x as u8;
            log_table[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= POLYNOMIAL;
            }
            i += 1;
        }
        while i < 512 {
            exp_table[i] = exp_table[i - 255];
            i += 1;
        }
        GfTables {
            exp_table,
            log_table,
        }
    }
}

static TABLES: GfTables = GfTables::build();

/// The process-wide field tables.
pub fn tables() -> &'static GfTables {
    &TABLES
}

#[inline]
pub fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = &TABLES;
    t.exp_table[t.log_table[a as usize] as usize + t.log_table[b as usize] as usize]
}

/// Multiplicative inverse. Panics on zero.
#[inline]
pub fn gf_inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no multiplicative inverse in GF(256)");
    let t = &TABLES;
    t.exp_table[255 - t.log_table[a as usize] as usize]
}

/// `a / b`. Panics if `b` is zero.
#[inline]
pub fn gf_div(a: u8, b: u8) -> u8 {
    gf_mul(a, gf_inv(b))
}

/// `alpha^n` for the primitive element alpha = 2.
#[inline]
pub fn gf_exp(n: usize) -> u8 {
    TABLES.exp_table[n % 255]
}

/// Full 256-entry product row for a fixed coefficient.
pub(crate) fn mul_row(coef: u8) -> [u8; 256] {
    let mut row = [0u8; 256];
    if coef == 0 {
        return row;
    }
    let t = &TABLES;
    let lc = t.log_table[coef as usize] as usize;
    for (x, slot) in row.iter_mut().enumerate().skip(1) {
        *slot = t.exp_table[lc + t.log_table[x] as usize];
    }
    row
}

/// `dst[i] ^= coef * src[i]` for every byte position.
pub(crate) fn mul_add_slice(dst: &mut [u8], src: &[u8], coef: u8) {
    debug_assert_eq!(dst.len(), src.len());
    match coef {
        0 => {}
        1 => {
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= *s;
            }
        }
        _ => {
            let row = mul_row(coef);
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= row[*s as usize];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_log_consistent_over_whole_field() {
        let t = tables();
        for x in 1..=255u8 {
            assert_eq!(t.exp_table[t.log_table[x as usize] as usize], x);
        }
        for i in 0..255 {
            assert_eq!(t.exp_table[i], t.exp_table[i + 255]);
        }
    }

    #[test]
    fn inverse_and_identities() {
        for x in 0..=255u8 {
            assert_eq!(gf_mul(x, 0), 0);
            assert_eq!(gf_mul(0, x), 0);
            assert_eq!(gf_mul(x, 1), x);
            if x != 0 {
                assert_eq!(gf_mul(x, gf_inv(x)), 1);
                assert_eq!(gf_div(x, x), 1);
            }
        }
    }

    #[test]
    fn generator_has_full_order() {
        let mut seen = [false; 256];
        for i in 0..255 {
            let v = gf_exp(i);
            assert!(!seen[v as usize], "alpha^{i} repeats");
            seen[v as usize] = true;
        }
        assert!(!seen[0]);
    }

    #[test]
    fn mul_row_matches_gf_mul() {
        for c in [0u8, 1, 2, 0x53, 0xff] {
            let row = mul_row(c);
            for x in 0..=255u8 {
                assert_eq!(row[x as usize], gf_mul(c, x));
            }
        }
    }

    #[test]
    #[should_panic]
    fn inverse_of_zero_panics() {
        gf_inv(0);
    }
}
