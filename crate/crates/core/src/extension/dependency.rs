//! Dependency lists: `g`-subsets of rows (columns) whose removal keeps the rank.
//!
//! With `N` an orthonormal basis of the left (right) null space, deleting the rows
//! (columns) `S` keeps rank `r` exactly when the `g x g` block `N[S, :]` is
//! non-singular. The block test is cheap; borderline blocks fall back to a direct
//! rank computation on the reduced matrix.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::graph::{rank_profile, RankProfile};
use crate::linalg::{self, RMatrix};

/// Subsets beyond this count are refused rather than enumerated.
pub const MAX_SUBSETS: u128 = 200_000_000;

// Bounds on |det N[S,:]| divided by the product of its row norms.
const ACCEPT: f64 = 1e-7;
const REJECT: f64 = 1e-11;
const NULL_ROW: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencyKind {
    Row,
    Column,
}

impl std::fmt::Display for DependencyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DependencyKind::Row => "row",
            DependencyKind::Column => "column",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DependencyList {
    kind: DependencyKind,
    indices: Vec<usize>,
    n: usize,
}

impl DependencyList {
    /// Indices are sorted; duplicates or out-of-range entries are rejected. The
    /// rank condition itself is not checked here, see [`removal_preserves_rank`].
    pub fn new(kind: DependencyKind, mut indices: Vec<usize>, n: usize) -> Result<Self, ExtensionError> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(ExtensionError::InvalidDependencyList(format!(
                "repeated index in {indices:?}"
            )));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= n) {
            return Err(ExtensionError::InvalidDependencyList(format!(
                "index {i} out of range for n = {n}"
            )));
        }
        Ok(Self { kind, indices, n })
    }

    pub fn kind(&self) -> DependencyKind {
        self.kind
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Every dependency list of one kind, with the pruning data used to find them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependencyEnumeration {
    pub kind: DependencyKind,
    pub profile: RankProfile,
    /// Zero rows (columns): members of every list.
    pub mandatory: Vec<usize>,
    /// Indices outside the support of the null space: members of no list.
    pub excluded: Vec<usize>,
    pub lists: Vec<DependencyList>,
}

impl DependencyEnumeration {
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Nullity zero: nothing to enumerate, the matrix is already non-singular.
    pub fn already_nonsingular(&self) -> bool {
        self.profile.nullity == 0
    }
}

/// Orthonormal basis (`n x g`) of the left null space (rows) or null space (columns).
pub fn null_basis(a: &RMatrix, kind: DependencyKind, nullity: usize) -> RMatrix {
    let n = a.nrows();
    if nullity == 0 {
        return RMatrix::zeros(n, 0);
    }
    let svd = a.clone().svd(kind == DependencyKind::Row, kind == DependencyKind::Column);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[x]
            .total_cmp(&svd.singular_values[y])
            .then(x.cmp(&y))
    });
    let cols = &order[..nullity];
    match kind {
        DependencyKind::Row => {
            let u = svd.u.expect("left singular vectors requested");
            RMatrix::from_fn(n, nullity, |i, j| u[(i, cols[j])])
        }
        DependencyKind::Column => {
            let vt = svd.v_t.expect("right singular vectors requested");
            RMatrix::from_fn(n, nullity, |i, j| vt[(cols[j], i)])
        }
    }
}

/// Direct check: rank of `a` with the given rows (columns) deleted equals `rank`.
pub fn removal_preserves_rank(
    a: &RMatrix,
    kind: DependencyKind,
    indices: &[usize],
    rank: usize,
    tol: Option<f64>,
) -> bool {
    let reduced = match kind {
        DependencyKind::Row => a.clone().remove_rows_at(indices),
        DependencyKind::Column => a.clone().remove_columns_at(indices),
    };
    linalg::numerical_rank(&reduced, tol) == rank
}

fn is_zero_line(a: &RMatrix, kind: DependencyKind, i: usize) -> bool {
    match kind {
        DependencyKind::Row => a.row(i).iter().all(|&x| x == 0.0),
        DependencyKind::Column => a.column(i).iter().all(|&x| x == 0.0),
    }
}

/// `|det M| / prod(row norms)` for a small square block, by partial pivoting.
fn normalized_det(block: &mut [f64], g: usize, row_norms: &[f64]) -> f64 {
    let mut det = 1.0;
    for k in 0..g {
        let (p, pmax) = (k..g)
            .map(|i| (i, block[i * g + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..g {
                block.swap(k * g + j, p * g + j);
            }
        }
        let piv = block[k * g + k];
        det *= piv.abs();
        for i in k + 1..g {
            let f = block[i * g + k] / piv;
            if f != 0.0 {
                for j in k + 1..g {
                    block[i * g + j] -= f * block[k * g + j];
                }
            }
        }
    }
    det / row_norms.iter().product::<f64>()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All size-`g` dependency lists of `a`, lexicographically sorted.
///
/// `required` (the row restriction used for duplicate-row studies) keeps only
/// lists that contain every given index. With nullity zero the result is empty
/// and [`DependencyEnumeration::already_nonsingular`] is set.
pub fn enumerate_dependency_lists(
    a: &RMatrix,
    kind: DependencyKind,
    required: Option<&[usize]>,
) -> Result<DependencyEnumeration, ExtensionError> {
    let profile = rank_profile(a, None)?;
    let n = a.nrows();
    let g = profile.nullity;
    let mandatory: Vec<usize> = (0..n).filter(|&i| is_zero_line(a, kind, i)).collect();
    if let Some(req) = required {
        if let Some(&i) = req.iter().find(|&&i| i >= n) {
            return Err(ExtensionError::InvalidDependencyList(format!(
                "required index {i} out of range for n = {n}"
            )));
        }
    }
    let mut result = DependencyEnumeration {
        kind,
        profile,
        mandatory: mandatory.clone(),
        excluded: Vec::new(),
        lists: Vec::new(),
    };
    if g == 0 {
        log::info!("{kind} dependency lists: matrix is already non-singular");
        return Ok(result);
    }

    let basis = null_basis(a, kind, g);
    let row_norm: Vec<f64> = (0..n).map(|i| basis.row(i).norm()).collect();
    result.excluded = (0..n).filter(|&i| row_norm[i] <= NULL_ROW).collect();

    let mut fixed: Vec<usize> = mandatory;
    if let Some(req) = required {
        fixed.extend_from_slice(req);
    }
    fixed.sort_unstable();
    fixed.dedup();
    if fixed.len() > g || fixed.iter().any(|i| result.excluded.contains(i)) {
        return Ok(result);
    }
    let free: Vec<usize> = (0..n)
        .filter(|i| !fixed.contains(i) && !result.excluded.contains(i))
        .collect();
    let choose = g - fixed.len();
    let total = binomial(free.len(), choose);
    if total > MAX_SUBSETS {
        return Err(ExtensionError::TooManySubsets { count: total });
    }

    let mut block = vec![0.0; g * g];
    let mut norms = vec![0.0; g];
    let mut set = Vec::with_capacity(g);
    let mut lists = Vec::new();
    for extra in free.iter().copied().combinations(choose) {
        set.clear();
        set.extend_from_slice(&fixed);
        set.extend_from_slice(&extra);
        set.sort_unstable();
        for (r, &i) in set.iter().enumerate() {
            norms[r] = row_norm[i];
            for c in 0..g {
                block[r * g + c] = basis[(i, c)];
            }
        }
        let score = normalized_det(&mut block, g, &norms);
        let valid = if score >= ACCEPT {
            true
        } else if score <= REJECT {
            false
        } else {
            removal_preserves_rank(a, kind, &set, profile.rank, Some(profile.tolerance))
        };
        if valid {
            lists.push(DependencyList {
                kind,
                indices: set.clone(),
                n,
            });
        }
    }
    lists.sort_by(|x, y| x.indices.cmp(&y.indices));
    result.lists = lists;
    Ok(result)
}

/// Indices of rows that duplicate an earlier row exactly, grouped by content:
/// every returned group has at least two members.
pub fn duplicate_rows(a: &RMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let group: Vec<usize> = (i..n).filter(|&j| a.row(i) == a.row(j)).collect();
        if group.len() > 1 {
            for &j in &group {
                seen[j] = true;
            }
            groups.push(group);
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use proptest::prelude::*;

    fn brute_force(a: &RMatrix, kind: DependencyKind) -> Vec<Vec<usize>> {
        let p = rank_profile(a, None).unwrap();
        if p.nullity == 0 {
            return Vec::new();
        }
        (0..a.nrows())
            .combinations(p.nullity)
            .filter(|s| removal_preserves_rank(a, kind, s, p.rank, None))
            .collect()
    }

    fn indices(e: &DependencyEnumeration) -> Vec<Vec<usize>> {
        e.lists.iter().map(|l| l.indices().to_vec()).collect()
    }

    #[test]
    fn backward_shift_lists() {
        let a = Digraph::line(5).unwrap().adjacency();
        let cols = enumerate_dependency_lists(&a, DependencyKind::Column, None).unwrap();
        assert_eq!(indices(&cols), vec![vec![0]]);
        assert_eq!(cols.mandatory, vec![0]);
        let rows = enumerate_dependency_lists(&a, DependencyKind::Row, None).unwrap();
        assert_eq!(indices(&rows), vec![vec![4]]);
    }

    #[test]
    fn nonsingular_has_no_lists() {
        let a = Digraph::cycle(4).unwrap().adjacency();
        let e = enumerate_dependency_lists(&a, DependencyKind::Row, None).unwrap();
        assert!(e.already_nonsingular());
        assert!(e.is_empty());
    }

    #[test]
    fn required_rows_filter() {
        // Rows 0 and 1 are identical, rows 2 and 3 are identical.
        let a = RMatrix::from_row_slice(
            4,
            4,
            &[1., 1., 0., 0., 1., 1., 0., 0., 0., 0., 1., 1., 0., 0., 1., 1.],
        );
        let all = enumerate_dependency_lists(&a, DependencyKind::Row, None).unwrap();
        assert_eq!(indices(&all), vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]);
        let some = enumerate_dependency_lists(&a, DependencyKind::Row, Some(&[1])).unwrap();
        assert_eq!(indices(&some), vec![vec![1, 2], vec![1, 3]]);
        let none = enumerate_dependency_lists(&a, DependencyKind::Row, Some(&[0, 1])).unwrap();
        assert!(none.is_empty());
        assert!(enumerate_dependency_lists(&a, DependencyKind::Row, Some(&[9])).is_err());
        assert_eq!(duplicate_rows(&a), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn list_validation() {
        assert!(DependencyList::new(DependencyKind::Row, vec![2, 2], 4).is_err());
        assert!(DependencyList::new(DependencyKind::Row, vec![4], 4).is_err());
        let l = DependencyList::new(DependencyKind::Column, vec![3, 1], 4).unwrap();
        assert_eq!(l.indices(), &[1, 3]);
    }

    fn singular_01(max_n: usize) -> impl Strategy<Value = RMatrix> {
        (2..=max_n).prop_flat_map(|n| {
            (prop::collection::vec(prop::bool::weighted(0.3), n * n), 1..n).prop_map(
                move |(bits, copy)| {
                    let mut a = RMatrix::from_fn(n, n, |i, j| f64::from(bits[i * n + j] as u8));
                    // Force a dependency so the matrix is singular.
                    let src = a.row(copy - 1).clone_owned();
                    a.set_row(copy, &src);
                    a
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_exhaustive_search(a in singular_01(8)) {
            for kind in [DependencyKind::Row, DependencyKind::Column] {
                let e = enumerate_dependency_lists(&a, kind, None).unwrap();
                prop_assert_eq!(indices(&e), brute_force(&a, kind));
                for l in &e.lists {
                    prop_assert!(removal_preserves_rank(&a, kind, l.indices(), e.profile.rank, None));
                    for m in &e.mandatory {
                        prop_assert!(l.contains(*m));
                    }
                }
            }
        }
    }
}
