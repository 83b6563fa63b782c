//! Minimal compressed-sparse-row matrix used to assemble finite-difference
//! operators by composition.

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *data.last_mut().expect("nonempty") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: d.to_vec(),
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], data: vec![] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Iterate over stored entries as (row, col, value).
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        (self.indptr[r]..self.indptr[r + 1])
            .find(|&k| self.indices[k] == c)
            .map_or(0.0, |k| self.data[k])
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// diag(d)·self
    pub fn scale_rows(mut self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.nrows);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                self.data[k] *= d[r];
            }
        }
        self
    }

    /// α·self + β·other
    pub fn lin_comb(&self, alpha: f64, other: &Csr, beta: f64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self
            .triplets()
            .map(|(r, c, v)| (r, c, alpha * v))
            .chain(other.triplets().map(|(r, c, v)| (r, c, beta * v)))
            .collect();
        Csr::from_triplets(self.nrows, self.ncols, trip)
    }

    /// self·other (Gustavson's algorithm with a dense accumulator).
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let n = other.ncols;
        let mut acc = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut cols = Vec::new();
        for r in 0..self.nrows {
            cols.clear();
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (j, a) = (self.indices[k], self.data[k]);
                for kk in other.indptr[j]..other.indptr[j + 1] {
                    let c = other.indices[kk];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * other.data[kk];
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                indices.push(c);
                data.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        Csr { nrows: self.nrows, ncols: n, indptr, indices, data }
    }

    /// [self other]
    pub fn hstack(&self, other: &Csr) -> Csr {
        assert_eq!(self.nrows, other.nrows);
        let off = self.ncols;
        let trip = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c + off, v)))
            .collect();
        Csr::from_triplets(self.nrows, self.ncols + other.ncols, trip)
    }

    /// [self; other]
    pub fn vstack(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.ncols);
        let off = self.nrows;
        let trip = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r + off, c, v)))
            .collect();
        Csr::from_triplets(self.nrows + other.nrows, self.ncols, trip)
    }

    /// Principal submatrix on the listed (sorted, unique) indices.
    pub fn restrict(&self, keep: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut trip = Vec::new();
        for (new_r, &r) in keep.iter().enumerate() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = map[self.indices[k]];
                if c != usize::MAX {
                    trip.push((new_r, c, self.data[k]));
                }
            }
        }
        Csr::from_triplets(keep.len(), keep.len(), trip)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.data[k] * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }
}
