//! Compressed sparse row matrices assembled from triplets.

use num_complex::Complex64;

/// CSR matrix with sorted column indices within each row.
#[derive(Clone, Debug)]
pub struct SparseOperator<T = f64> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

pub type RealOperator = SparseOperator<f64>;
pub type ComplexOperator = SparseOperator<Complex64>;

impl<T> SparseOperator<T>
where
    T: Copy + Default + PartialEq + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
{
    /// Build from unordered triplets; duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &mut Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets.iter() {
            debug_assert!(r < nrows && c < ncols);
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { nrows, ncols, row_ptr, cols, vals }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseOperator {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => T::default(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T>
    where
        T: std::ops::Mul<T, Output = T>,
    {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::default(); self.nrows];
        for r in 0..self.nrows {
            let mut acc = T::default();
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Entry-wise linear combination `alpha * self + beta * other`, merging
    /// the sparsity patterns.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut trips: Vec<(usize, usize, T)> =
            Vec::with_capacity(self.nnz() + other.nnz());
        for (r, c, v) in self.iter() {
            trips.push((r, c, v * alpha));
        }
        for (r, c, v) in other.iter() {
            trips.push((r, c, v * beta));
        }
        Self::from_triplets(self.nrows, self.ncols, &mut trips)
    }

    /// Largest absolute difference against another operator (pattern union).
    pub fn max_abs_diff(&self, other: &Self) -> f64
    where
        T: Magnitude,
    {
        let mut m: f64 = 0.0;
        for (r, c, v) in self.iter() {
            m = m.max((v + other.get(r, c) * (-1.0)).magnitude());
        }
        for (r, c, v) in other.iter() {
            m = m.max((self.get(r, c) + v * (-1.0)).magnitude());
        }
        m
    }

    /// Apply homogeneous Dirichlet elimination: zero the rows and columns of
    /// the marked dofs and put a unit diagonal there.
    pub fn eliminate_dirichlet(&self, is_dirichlet: &[bool], one: T) -> Self {
        assert_eq!(self.nrows, self.ncols);
        let mut trips: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.iter() {
            if is_dirichlet[r] || is_dirichlet[c] {
                continue;
            }
            trips.push((r, c, v));
        }
        for (d, &m) in is_dirichlet.iter().enumerate() {
            if m {
                trips.push((d, d, one));
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &mut trips)
    }
}

/// Absolute value for real and complex scalars.
pub trait Magnitude: Copy + std::ops::Add<Output = Self> {
    fn magnitude(self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl SparseOperator<f64> {
    /// Convert to a faer column-major sparse matrix.
    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        let trips: Vec<faer::sparse::Triplet<usize, usize, f64>> = self
            .iter()
            .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("valid triplets")
    }

    /// Promote to a complex operator scaled by a complex factor.
    pub fn scale_complex(&self, factor: Complex64) -> SparseOperator<Complex64> {
        let mut trips: Vec<(usize, usize, Complex64)> = self
            .iter()
            .map(|(r, c, v)| (r, c, factor * v))
            .collect();
        SparseOperator::from_triplets(self.nrows, self.ncols, &mut trips)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (r, c, v) in self.iter() {
            m = m.max((v - self.get(c, r)).abs());
        }
        m
    }
}

impl SparseOperator<Complex64> {
    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, Complex64> {
        let trips: Vec<faer::sparse::Triplet<usize, usize, Complex64>> = self
            .iter()
            .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("valid triplets")
    }

    /// Complex linear combination of real operators: `sum_i coeff_i * ops_i`.
    pub fn combine(ops: &[(&SparseOperator<f64>, Complex64)]) -> SparseOperator<Complex64> {
        assert!(!ops.is_empty());
        let (n, m) = (ops[0].0.nrows(), ops[0].0.ncols());
        let mut trips: Vec<(usize, usize, Complex64)> = Vec::new();
        for &(op, coeff) in ops {
            assert_eq!((op.nrows(), op.ncols()), (n, m));
            for (r, c, v) in op.iter() {
                trips.push((r, c, coeff * v));
            }
        }
        SparseOperator::from_triplets(n, m, &mut trips)
    }
}

// dense helpers used by the small eigenvalue problems

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
