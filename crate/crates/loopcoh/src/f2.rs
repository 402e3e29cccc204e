//! Bit-packed exact linear algebra over the two-element field.
//!
//! Every degreewise computation in this crate bottoms out here: vectors and
//! matrices store 64 field elements per machine word, and elimination works
//! word-at-a-time with XOR. All values are immutable once built and all
//! operations are pure, so everything is freely shareable across threads.

use std::fmt;

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A vector over F_2. Trailing padding bits of the last word are kept zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vector {
    len: usize,
    words: Vec<u64>,
}

impl F2Vector {
    pub fn zeros(len: usize) -> Self {
        F2Vector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector e_i.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector with ones exactly at the given positions.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &F2Vector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Index of the first set bit, if any.
    pub fn first_set(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(w * WORD_BITS + word.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Indices of all set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * WORD_BITS + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Vector[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}

/// A dense matrix over F_2, row-major, each row padded to whole words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = words_for(cols);
        F2Matrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[F2Vector], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has wrong length");
            let start = i * m.words_per_row;
            m.data[start..start + m.words_per_row].copy_from_slice(r.words());
        }
        m
    }

    pub fn from_bit_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index out of range");
        (self.data[r * self.words_per_row + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        let mask = 1u64 << (c % WORD_BITS);
        let idx = r * self.words_per_row + c / WORD_BITS;
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    pub fn row(&self, r: usize) -> F2Vector {
        assert!(r < self.rows);
        let start = r * self.words_per_row;
        F2Vector {
            len: self.cols,
            words: self.data[start..start + self.words_per_row].to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> F2Vector {
        let mut v = F2Vector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    /// Matrix-vector product m·v.
    pub fn mul_vector(&self, v: &F2Vector) -> F2Vector {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vector");
        let mut out = F2Vector::zeros(self.rows);
        for r in 0..self.rows {
            let start = r * self.words_per_row;
            let mut acc = 0u64;
            for (k, &vw) in v.words().iter().enumerate() {
                acc ^= self.data[start + k] & vw;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Matrix product self·other.
    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = F2Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_start = r * out.words_per_row;
            for c in 0..self.cols {
                if self.get(r, c) {
                    let o_start = c * other.words_per_row;
                    for k in 0..other.words_per_row {
                        out.data[out_start + k] ^= other.data[o_start + k];
                    }
                }
            }
        }
        out
    }

    /// Row rank over F_2.
    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(self.cols);
        for r in 0..self.rows {
            ech.insert(self.row(r));
        }
        ech.rank()
    }

    /// Basis of the right kernel {v : m·v = 0}, in reduced-echelon-determined
    /// form: one vector per free column, ordered by free column index.
    pub fn kernel_basis(&self) -> Vec<F2Vector> {
        let mut ech = Echelon::with_tags(self.rows, self.cols);
        let mut kernel = Vec::new();
        for c in 0..self.cols {
            let col = self.column(c);
            let mut tag = F2Vector::zeros(self.cols);
            tag.set(c, true);
            if let Some(dependency) = ech.insert_tagged(col, tag) {
                kernel.push(dependency);
            }
        }
        kernel
    }

    /// (rank, rows − rank): image dimension and cokernel dimension of the map
    /// into the length-`rows` target space.
    pub fn image_and_cokernel_dims(&self) -> (usize, usize) {
        let r = self.rank();
        (r, self.rows - r)
    }

    /// A solution x of m·x = b when b lies in the column space, `None`
    /// otherwise. Free variables are set to zero, so the answer is canonical.
    pub fn solve(&self, b: &F2Vector) -> Option<F2Vector> {
        assert_eq!(
            b.len(),
            self.rows,
            "right-hand side length {} does not match {} rows",
            b.len(),
            self.rows
        );
        let mut ech = Echelon::with_tags(self.rows, self.cols);
        for c in 0..self.cols {
            let mut tag = F2Vector::zeros(self.cols);
            tag.set(c, true);
            ech.insert_tagged(self.column(c), tag);
        }
        let (residual, combo) = ech.reduce_tagged(b);
        if residual.is_zero() {
            Some(combo)
        } else {
            None
        }
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Incremental Gaussian elimination: rows are stored with their leading bit
/// as pivot, and new vectors are reduced by XOR against existing pivots.
///
/// With tags enabled, each stored row remembers which inserted vectors it is
/// a combination of, which turns the echelon into a solver: reducing `v` to
/// zero yields the combination of previously inserted vectors equal to `v`.
pub struct Echelon {
    width: usize,
    tag_width: usize,
    /// pivot bit -> index into `rows`
    pivot_of: Vec<Option<u32>>,
    rows: Vec<F2Vector>,
    tags: Vec<F2Vector>,
}

impl Echelon {
    pub fn new(width: usize) -> Self {
        Echelon {
            width,
            tag_width: 0,
            pivot_of: vec![None; width],
            rows: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn with_tags(width: usize, tag_width: usize) -> Self {
        Echelon {
            width,
            tag_width,
            pivot_of: vec![None; width],
            rows: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Reduce `v` against the stored rows; returns the residual.
    pub fn reduce(&self, v: &F2Vector) -> F2Vector {
        assert_eq!(v.len(), self.width, "width mismatch in reduce");
        let mut r = v.clone();
        while let Some(p) = r.first_set() {
            match self.pivot_of[p] {
                Some(idx) => r.xor_assign(&self.rows[idx as usize]),
                None => break,
            }
        }
        r
    }

    /// Reduce `v`, also accumulating the tag combination used.
    pub fn reduce_tagged(&self, v: &F2Vector) -> (F2Vector, F2Vector) {
        assert_eq!(v.len(), self.width, "width mismatch in reduce");
        let mut r = v.clone();
        let mut tag = F2Vector::zeros(self.tag_width);
        while let Some(p) = r.first_set() {
            match self.pivot_of[p] {
                Some(idx) => {
                    r.xor_assign(&self.rows[idx as usize]);
                    tag.xor_assign(&self.tags[idx as usize]);
                }
                None => break,
            }
        }
        (r, tag)
    }

    /// Insert a vector; returns true if it was independent (rank grew).
    pub fn insert(&mut self, v: F2Vector) -> bool {
        let r = self.reduce(&v);
        match r.first_set() {
            None => false,
            Some(p) => {
                self.pivot_of[p] = Some(self.rows.len() as u32);
                self.rows.push(r);
                if self.tag_width > 0 {
                    self.tags.push(F2Vector::zeros(self.tag_width));
                }
                true
            }
        }
    }

    /// Insert a tagged vector. If it was dependent, returns the combined tag
    /// (the dependency certificate: tag(v) + Σ tags of rows used = 0-residual
    /// combination); if independent, stores it and returns `None`.
    pub fn insert_tagged(&mut self, v: F2Vector, tag: F2Vector) -> Option<F2Vector> {
        assert_eq!(tag.len(), self.tag_width, "tag width mismatch");
        let (r, mut t) = self.reduce_tagged(&v);
        t.xor_assign(&tag);
        match r.first_set() {
            None => Some(t),
            Some(p) => {
                self.pivot_of[p] = Some(self.rows.len() as u32);
                self.rows.push(r);
                self.tags.push(t);
                None
            }
        }
    }
}
