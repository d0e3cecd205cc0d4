//! Small dense linear algebra.
//!
//! Storage and arithmetic come from `nalgebra`; factorizations and the
//! singularity thresholds are implemented here because every sign test in the
//! crate depends on their exact, scale-relative semantics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative pivot threshold used by [`Lu::factor`].
pub const PIVOT_RTOL: f64 = 1e-12;

/// Largest Euclidean norm over the rows of `a`.
pub fn max_row_norm(a: &Matrix) -> f64 {
    a.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Row-major nested copy of `a`, the layout used in reports.
pub fn to_rows(a: &Matrix) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `serialize_with` adapter writing a matrix as a list of rows.
pub fn serialize_rows<S: serde::Serializer>(a: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&to_rows(a), s)
}

fn max_abs_entry(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Partially pivoted LU factorization of a square matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    swaps_odd: bool,
}

impl Lu {
    /// Factor `a`, failing when a pivot falls below `1e-12 * max|a_ij|`.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let floor = PIVOT_RTOL * max_abs_entry(a);
        Self::factor_with_floor(a, floor)
    }

    /// Factor `a`, failing only on an exactly zero (or non-finite) pivot.
    pub fn factor_exact(a: &Matrix) -> Result<Self> {
        Self::factor_with_floor(a, 0.0)
    }

    fn factor_with_floor(a: &Matrix, floor: f64) -> Result<Self> {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps_odd = false;
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, lu[(r, col)]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty column");
            if !pivot.is_finite() || pivot.abs() <= floor || pivot == 0.0 {
                return Err(Error::SingularMatrix { column: col, pivot });
            }
            if pivot_row != col {
                lu.swap_rows(pivot_row, col);
                perm.swap(pivot_row, col);
                swaps_odd = !swaps_odd;
            }
            for r in col + 1..n {
                let m = lu[(r, col)] / pivot;
                lu[(r, col)] = m;
                if m != 0.0 {
                    for c in col + 1..n {
                        lu[(r, c)] -= m * lu[(col, c)];
                    }
                }
            }
        }
        Ok(Self { lu, perm, swaps_odd })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn det(&self) -> f64 {
        let d: f64 = self.lu.diagonal().iter().product();
        if self.swaps_odd {
            -d
        } else {
            d
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &Vector) -> Vector {
        let n = self.dim();
        let mut x = Vector::from_iterator(n, self.perm.iter().map(|&p| b[p]));
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    /// Solve `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.nrows(), b.ncols());
        for (j, col) in b.column_iter().enumerate() {
            out.set_column(j, &self.solve(&col.into_owned()));
        }
        out
    }

    /// Solve `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &Vector) -> Vector {
        let n = self.dim();
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, then x = Pᵀ w.
        let mut z = b.clone();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[(j, i)] * z[j];
            }
            z[i] = acc / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[(j, i)] * z[j];
            }
            z[i] = acc;
        }
        let mut x = Vector::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

/// Solve `A x = b` with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    Ok(Lu::factor(a)?.solve(b))
}

/// Sign of a determinant with scale-relative zero detection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetSign {
    pub sign: i8,
    pub det: f64,
}

/// Determinant and its sign; the sign is 0 when `|det| < tol * scaleⁿ` with
/// `scale` the largest row norm.
pub fn det_sign(a: &Matrix, tol: f64) -> DetSign {
    let n = a.nrows();
    if n == 0 {
        return DetSign { sign: 1, det: 1.0 };
    }
    let det = Lu::factor_exact(a).map(|lu| lu.det()).unwrap_or(0.0);
    let scale = max_row_norm(a);
    let threshold = tol * scale.powi(n as i32);
    let sign = if det.abs() < threshold || det == 0.0 {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    };
    DetSign { sign, det }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    let ident = Matrix::identity(n, n);
    if n == 0 {
        return Ok(ident);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    let norm1 = a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
    let squarings = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let lu = Lu::factor_exact(&(&v - &u)).map_err(|_| Error::Overflow)?;
    let mut r = lu.solve_matrix(&(&v + &u));
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

/// Estimate of the smallest singular value by inverse power iteration on AᵀA.
pub fn smallest_singular_value(a: &Matrix) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let Ok(lu) = Lu::factor_exact(a) else {
        return 0.0;
    };
    // Fixed, non-symmetric start vector keeps the estimate deterministic.
    let mut v = Vector::from_iterator(n, (0..n).map(|i| 1.0 + 0.6180339887 * i as f64));
    v /= v.norm();
    for _ in 0..50 {
        let w = lu.solve_transpose(&v);
        let u = lu.solve(&w);
        let norm = u.norm();
        if !norm.is_finite() || norm == 0.0 {
            return 0.0;
        }
        v = u / norm;
    }
    (a * v).norm()
}

/// True when the smallest singular value is below `tol * max(1, scale)`,
/// where `scale` is the largest row norm of `a`.
pub fn near_singular(a: &Matrix, tol: f64) -> bool {
    near_singular_scaled(a, tol, max_row_norm(a))
}

/// [`near_singular`] with an explicit scale.
pub fn near_singular_scaled(a: &Matrix, tol: f64, scale: f64) -> bool {
    smallest_singular_value(a) < tol * scale.max(1.0)
}

/// `(det ∂₂g, det S)` for `J = [[A, B], [C, D]]` partitioned after `k` rows and
/// columns, with `S = A - B D⁻¹ C` the Schur complement of `D`.
pub fn block_schur_det(j: &Matrix, k: usize) -> Result<(f64, f64)> {
    let (d_lu, s) = schur_parts(j, k)?;
    let det_s = if s.nrows() == 0 {
        1.0
    } else {
        Lu::factor_exact(&s).map(|lu| lu.det()).unwrap_or(0.0)
    };
    Ok((d_lu.map_or(1.0, |lu| lu.det()), det_s))
}

/// Schur complement `A - B D⁻¹ C` of the trailing block.
pub fn schur_complement(j: &Matrix, k: usize) -> Result<Matrix> {
    Ok(schur_parts(j, k)?.1)
}

fn schur_parts(j: &Matrix, k: usize) -> Result<(Option<Lu>, Matrix)> {
    assert!(j.is_square() && k <= j.nrows(), "bad block partition");
    let n = j.nrows();
    let s = n - k;
    let a = j.view((0, 0), (k, k)).into_owned();
    if s == 0 {
        return Ok((None, a));
    }
    let b = j.view((0, k), (k, s)).into_owned();
    let c = j.view((k, 0), (s, k)).into_owned();
    let d = j.view((k, k), (s, s)).into_owned();
    let lu = Lu::factor(&d).map_err(|_| Error::SingularBlock { point: Vec::new() })?;
    let schur = a - b * lu.solve_matrix(&c);
    Ok((Some(lu), schur))
}
