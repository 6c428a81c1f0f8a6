use super::gf::{gf_exp, gf_inv, gf_mul};
use super::{CodecError, CodingParams};

/// Dense row-major matrix over GF(2^8).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// New matrix made of the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(r));
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u8;
                for t in 0..self.cols {
                    acc ^= gf_mul(self.get(i, t), rhs.get(t, j));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Gauss-Jordan inverse. `None` if the matrix is singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "only square matrices have inverses");
        let n = self.rows;
        let mut work = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| work.get(r, col) != 0)?;
            if pivot != col {
                work.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let scale = gf_inv(work.get(col, col));
            work.scale_row(col, scale);
            inv.scale_row(col, scale);
            for r in 0..n {
                let factor = work.get(r, col);
                if r != col && factor != 0 {
                    work.add_scaled_row(r, col, factor);
                    inv.add_scaled_row(r, col, factor);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, factor: u8) {
        for c in 0..self.cols {
            let v = self.get(r, c);
            self.set(r, c, gf_mul(v, factor));
        }
    }

    /// row[dst] += factor * row[src]
    fn add_scaled_row(&mut self, dst: usize, src: usize, factor: u8) {
        for c in 0..self.cols {
            let v = self.get(dst, c) ^ gf_mul(factor, self.get(src, c));
            self.set(dst, c, v);
        }
    }
}

/// Systematic m x k coding matrix.
///
/// Rows start as evaluations of the monomials 1, x, .., x^(k-1) at the
/// distinct points 0, alpha^0, alpha^1, .., alpha^(m-2); the whole matrix is
/// then multiplied by the inverse of its top k x k block so that block becomes
/// the identity. Any k rows of a Vandermonde matrix on distinct points are
/// independent, and right-multiplying by an invertible matrix keeps them so.
/// This is the same construction zfec uses, so coding payloads agree byte for
/// byte.
pub fn build_coding_matrix(params: CodingParams) -> Result<Matrix, CodecError> {
    let (k, m) = (params.k(), params.m());
    let mut vdm = Matrix::zeros(m, k);
    vdm.set(0, 0, 1);
    for r in 1..m {
        for c in 0..k {
            vdm.set(r, c, gf_exp((r - 1) * c));
        }
    }
    let top: Vec<usize> = (0..k).collect();
    let top_inv = vdm
        .select_rows(&top)
        .inverse()
        .ok_or(CodecError::InvalidParams {
            k,
            m,
            reason: "vandermonde top block is singular",
        })?;
    let out = vdm.mul(&top_inv);
    debug_assert!((0..k).all(|r| (0..k).all(|c| out.get(r, c) == u8::from(r == c))));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, m: usize) -> CodingParams {
        CodingParams::new(k, m).unwrap()
    }

    #[test]
    fn no_coding_rows_is_identity() {
        assert_eq!(build_coding_matrix(params(3, 3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = build_coding_matrix(params(4, 8)).unwrap();
        let sub = m.select_rows(&[1, 4, 6, 7]);
        let inv = sub.inverse().unwrap();
        assert_eq!(sub.mul(&inv), Matrix::identity(4));
        assert_eq!(inv.mul(&sub), Matrix::identity(4));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, 3);
        m.set(0, 1, 5);
        m.set(1, 0, 3);
        m.set(1, 1, 5);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn largest_field_capacity_builds() {
        let m = build_coding_matrix(params(200, 255)).unwrap();
        assert_eq!((m.rows(), m.cols()), (255, 200));
    }
}
