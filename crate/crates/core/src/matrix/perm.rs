use std::fmt;

use num_complex::Complex64;

use super::{BistoMatrix, CMatrix, MatrixError};

/// Permutation matrix stored as an index map: row `i` has its single 1 in
/// column `image[i]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermMatrix {
    image: Vec<usize>,
}

impl PermMatrix {
    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn new(image: Vec<usize>) -> Result<Self, MatrixError> {
        let n = image.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut seen = vec![false; n];
        for &k in &image {
            if k >= n || seen[k] {
                return Err(MatrixError::InvalidPermutation(format!("{image:?} is not a bijection on 0..{n}")));
            }
            seen[k] = true;
        }
        Ok(Self { image })
    }

    /// Parses cycle notation with 1-based labels.
    ///
    /// Cycles are separated by commas. A cycle is either a run of single
    /// digits (`"123"`) or labels joined by `-` or spaces (`"1-10-3"`). The
    /// cycle `(c1 c2 … ck)` sends basis vector `e_c1` to `e_c2`, …, `e_ck` to
    /// `e_c1`, so `"1234"` at order 4 is the matrix with ones at (2,1), (3,2),
    /// (4,3) and (1,4). `"I"` or an empty string is the identity.
    pub fn from_cycles(n: usize, spec: &str) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        let spec = spec.trim();
        if spec.is_empty() || spec.eq_ignore_ascii_case("i") || spec.eq_ignore_ascii_case("id") {
            return Ok(Self { image });
        }
        for cycle in spec.split(',') {
            let cycle = cycle.trim().trim_start_matches('(').trim_end_matches(')');
            let labels: Vec<&str> = if cycle.contains(['-', ' ']) {
                cycle.split(['-', ' ']).filter(|s| !s.is_empty()).collect()
            } else {
                cycle.char_indices().map(|(i, ch)| &cycle[i..i + ch.len_utf8()]).collect()
            };
            let mut elems = Vec::with_capacity(labels.len());
            for label in labels {
                let k: usize = label
                    .parse()
                    .map_err(|_| MatrixError::InvalidPermutation(format!("bad cycle label {label:?} in {spec:?}")))?;
                if k == 0 || k > n {
                    return Err(MatrixError::InvalidPermutation(format!("label {k} outside 1..={n}")));
                }
                if touched[k - 1] {
                    return Err(MatrixError::InvalidPermutation(format!("label {k} repeated in {spec:?}")));
                }
                touched[k - 1] = true;
                elems.push(k - 1);
            }
            // e_{c_m} -> e_{c_{m+1}} means P[c_{m+1}][c_m] = 1.
            for m in 0..elems.len() {
                let next = elems[(m + 1) % elems.len()];
                image[next] = elems[m];
            }
        }
        Self::new(image)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Column index of the 1 in row `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.order() != other.order() {
            return Err(MatrixError::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(Self { image: self.image.iter().map(|&k| other.image[k]).collect() })
    }

    /// Transpose, which is also the inverse.
    pub fn transpose(&self) -> Self {
        let mut inv = vec![0; self.order()];
        for (i, &k) in self.image.iter().enumerate() {
            inv[k] = i;
        }
        Self { image: inv }
    }

    /// Trace of the matrix, i.e. the number of fixed points.
    pub fn trace(&self) -> usize {
        self.image.iter().enumerate().filter(|(i, &k)| *i == k).count()
    }

    pub fn is_identity(&self) -> bool {
        self.trace() == self.order()
    }

    pub fn is_involution(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &k)| self.image[k] == i)
    }

    /// Disjoint cycles (0-based), fixed points included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let inv = self.transpose();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            // follow e_c -> P e_c
            let mut k = inv.image[start];
            while k != start {
                seen[k] = true;
                cycle.push(k);
                k = inv.image[k];
            }
            out.push(cycle);
        }
        out
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.order(), |i, j| {
            if self.image[i] == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn to_bisto(&self) -> BistoMatrix {
        let n = self.order();
        let mut e = vec![0.0; n * n];
        for (i, &k) in self.image.iter().enumerate() {
            e[i * n + k] = 1.0;
        }
        BistoMatrix::from_parts(n, e, 0.0)
    }

    /// All permutations of order `n` in lexicographic order of their images.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { image: current.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Debug for PermMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.image)
    }
}

impl fmt::Display for PermMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| c.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(if self.order() > 9 { "-" } else { "" }))
            .collect();
        if cycles.is_empty() {
            write!(f, "I")
        } else {
            write!(f, "{}", cycles.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_notation_matches_printed_matrices() {
        // P_12, P_123 and P_1234 at order 4, as printed row by row.
        assert_eq!(PermMatrix::from_cycles(4, "12").unwrap().image(), &[1, 0, 2, 3]);
        assert_eq!(PermMatrix::from_cycles(4, "123").unwrap().image(), &[2, 0, 1, 3]);
        assert_eq!(PermMatrix::from_cycles(4, "1234").unwrap().image(), &[3, 0, 1, 2]);
        assert_eq!(PermMatrix::from_cycles(4, "12,34").unwrap().image(), &[1, 0, 3, 2]);
        assert_eq!(PermMatrix::from_cycles(12, "1-10, 11-12").unwrap().apply(0), 9);
        assert!(PermMatrix::from_cycles(4, "I").unwrap().is_identity());
    }

    #[test]
    fn cycle_notation_errors() {
        assert!(PermMatrix::from_cycles(4, "15").is_err());
        assert!(PermMatrix::from_cycles(4, "121").is_err());
        assert!(PermMatrix::from_cycles(4, "1x").is_err());
    }

    #[test]
    fn new_rejects_non_bijections() {
        assert!(PermMatrix::new(vec![0, 0, 1]).is_err());
        assert!(PermMatrix::new(vec![0, 3, 1]).is_err());
        assert!(PermMatrix::new(vec![]).is_err());
    }

    #[test]
    fn display_roundtrips_through_cycles() {
        for p in PermMatrix::all(4) {
            let s = p.to_string();
            assert_eq!(PermMatrix::from_cycles(4, &s).unwrap(), p, "{s}");
        }
    }

    #[test]
    fn compose_is_matrix_product() {
        let all = PermMatrix::all(3);
        assert_eq!(all.len(), 6);
        for p in &all {
            for q in &all {
                let pq = p.compose(q).unwrap().to_cmatrix();
                assert_eq!(pq, p.to_cmatrix().matmul(&q.to_cmatrix()).unwrap());
            }
            assert!(p.compose(&p.transpose()).unwrap().is_identity());
        }
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = PermMatrix::all(4);
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0].image() < w[1].image()));
    }
}
