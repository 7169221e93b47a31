use std::fmt::Write as _;

use serde::Serialize;

use super::assignment::{max_weight_assignment, near_permutation};
use super::{cluster_indices, default_gap_tol, HermitianPencil};
use crate::error::{invalid, Result};
use crate::linalg::{MatrixC, Spectrum};

/// Maximum number of dyadic halvings of a grid step during matching.
pub const MAX_REFINE_DEPTH: usize = 8;

/// Cluster-level overlap below which a step is considered ambiguous.
const AMBIGUOUS_OVERLAP: f64 = 0.5;

/// Eigenvalue branches of a pencil sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenBranchSet {
    grid: Vec<f64>,
    /// `branches[b][k]`: value of branch `b` at `grid[k]`.
    branches: Vec<Vec<f64>>,
    /// Per grid point; column `b` is the eigenvector of branch `b`.
    #[serde(skip)]
    frames: Vec<MatrixC>,
    /// `order[k][b]`: position of branch `b` in the sorted spectrum at `k`.
    order: Vec<Vec<usize>>,
    /// Per grid point, the clusters (as sorted branch ids) whose spectral gap
    /// fell below the tolerance.
    exceptional_flags: Vec<Vec<Vec<usize>>>,
    gap_tols: Vec<f64>,
    /// Extra eigendecompositions spent on step refinement.
    refinements: usize,
}

impl EigenBranchSet {
    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn branch(&self, b: usize) -> &[f64] {
        &self.branches[b]
    }

    pub fn branches(&self) -> &[Vec<f64>] {
        &self.branches
    }

    pub fn frame(&self, k: usize) -> &MatrixC {
        &self.frames[k]
    }

    pub fn order(&self, k: usize) -> &[usize] {
        &self.order[k]
    }

    pub fn exceptional_flags(&self, k: usize) -> &[Vec<usize>] {
        &self.exceptional_flags[k]
    }

    pub fn gap_tol(&self, k: usize) -> f64 {
        self.gap_tols[k]
    }

    pub fn refinements(&self) -> usize {
        self.refinements
    }

    /// Branch values at grid point `k`, in branch order.
    pub fn values_at(&self, k: usize) -> Vec<f64> {
        self.branches.iter().map(|b| b[k]).collect()
    }

    pub fn has_exceptional_points(&self) -> bool {
        self.exceptional_flags.iter().any(|f| !f.is_empty())
    }

    /// CSV with header `t,branch_1,…,branch_n,flags`. Flags list the
    /// degenerate clusters at each point as 1-based branch ids joined by
    /// `+`, clusters separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for b in 0..self.n() {
            let _ = write!(out, ",branch_{}", b + 1);
        }
        out.push_str(",flags\n");
        for (k, t) in self.grid.iter().enumerate() {
            let _ = write!(out, "{t}");
            for b in &self.branches {
                let _ = write!(out, ",{}", b[k]);
            }
            let flags: Vec<String> = self.exceptional_flags[k]
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|b| (b + 1).to_string())
                        .collect::<Vec<_>>()
                        .join("+")
                })
                .collect();
            let _ = writeln!(out, ",{}", flags.join(";"));
        }
        out
    }
}

fn overlaps(prev: &MatrixC, next: &MatrixC) -> Vec<Vec<f64>> {
    let n = prev.n();
    (0..n)
        .map(|b| {
            (0..n)
                .map(|i| {
                    let mut acc = num_complex::Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += prev[(k, b)].conj() * next[(k, i)];
                    }
                    acc.norm_sqr()
                })
                .collect()
        })
        .collect()
}

fn reorder(frame: &MatrixC, perm: &[usize]) -> MatrixC {
    MatrixC::from_fn(frame.n(), |i, b| frame[(i, perm[b])])
}

struct Tracker<'a> {
    pencil: &'a HermitianPencil,
    gap_tol: Option<f64>,
    refinements: usize,
}

impl Tracker<'_> {
    fn tol_for(&self, s: &Spectrum) -> f64 {
        self.gap_tol.unwrap_or_else(|| default_gap_tol(s))
    }

    /// Returns `perm` with branch `b` (columns of `prev`) landing on sorted
    /// index `perm[b]` of `next`.
    fn advance(
        &mut self,
        prev: &MatrixC,
        t0: f64,
        t1: f64,
        next: &Spectrum,
        depth: usize,
    ) -> Result<Vec<usize>> {
        let w = overlaps(prev, next.frame());
        if let Some(perm) = near_permutation(&w, 1e-6) {
            return Ok(perm);
        }
        let assign = max_weight_assignment(&w);
        let clusters = cluster_indices(next.values(), self.tol_for(next))?;
        let mut cluster_of = vec![0; next.n()];
        for (c, idx) in clusters.iter().enumerate() {
            for &i in idx {
                cluster_of[i] = c;
            }
        }
        let resolved = assign.iter().enumerate().all(|(b, &i)| {
            clusters[cluster_of[i]].iter().map(|&j| w[b][j]).sum::<f64>() >= AMBIGUOUS_OVERLAP
        });
        if resolved || depth >= MAX_REFINE_DEPTH {
            return Ok(assign);
        }
        let mid = 0.5 * (t0 + t1);
        let s_mid = self.pencil.spectrum_at(mid)?;
        self.refinements += 1;
        let perm_mid = self.advance(prev, t0, mid, &s_mid, depth + 1)?;
        let frame_mid = reorder(s_mid.frame(), &perm_mid);
        self.advance(&frame_mid, mid, t1, next, depth + 1)
    }
}

/// Tracks the eigenvalue branches of `p` along `grid`.
///
/// Consecutive grid points are matched by the assignment that maximizes the
/// total squared eigenvector overlap. Steps whose matching is ambiguous at
/// the cluster level are halved (up to [`MAX_REFINE_DEPTH`] times) and
/// matched through the intermediate points. Inside a degenerate cluster the
/// pairing is arbitrary; such points are listed in the exceptional flags.
///
/// `gap_tol = None` uses `1e-8·max(1, ‖M(t)‖₂)` at each point.
pub fn track_branches(
    p: &HermitianPencil,
    grid: &[f64],
    gap_tol: Option<f64>,
) -> Result<EigenBranchSet> {
    if grid.len() < 2 {
        return Err(invalid("grid must contain at least two points"));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be finite and strictly increasing"));
    }
    if let Some(tol) = gap_tol {
        if !(tol > 0.0) {
            return Err(invalid("gap_tol must be positive"));
        }
    }
    let n = p.n();
    let mut tracker = Tracker {
        pencil: p,
        gap_tol,
        refinements: 0,
    };

    let spectra: Vec<Spectrum> = grid
        .iter()
        .map(|&t| p.spectrum_at(t))
        .collect::<Result<_>>()?;

    let mut order: Vec<Vec<usize>> = Vec::with_capacity(grid.len());
    let mut frames: Vec<MatrixC> = Vec::with_capacity(grid.len());
    order.push((0..n).collect());
    frames.push(spectra[0].frame().clone());
    for k in 1..grid.len() {
        let perm = tracker.advance(&frames[k - 1], grid[k - 1], grid[k], &spectra[k], 0)?;
        frames.push(reorder(spectra[k].frame(), &perm));
        order.push(perm);
    }

    let mut branches = vec![Vec::with_capacity(grid.len()); n];
    let mut flags = Vec::with_capacity(grid.len());
    let mut gap_tols = Vec::with_capacity(grid.len());
    for (k, s) in spectra.iter().enumerate() {
        let mut branch_of = vec![0; n];
        for (b, &i) in order[k].iter().enumerate() {
            branches[b].push(s.values()[i]);
            branch_of[i] = b;
        }
        let tol = tracker.tol_for(s);
        gap_tols.push(tol);
        let clusters = cluster_indices(s.values(), tol)?
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let mut ids: Vec<usize> = c.iter().map(|&i| branch_of[i]).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        flags.push(clusters);
    }

    Ok(EigenBranchSet {
        grid: grid.to_vec(),
        branches,
        frames,
        order,
        exceptional_flags: flags,
        gap_tols,
        refinements: tracker.refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, rng_from_seed};
    use crate::linalg::{eigh, HermitianMatrix};

    fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
        (0..=steps)
            .map(|k| a + (b - a) * k as f64 / steps as f64)
            .collect()
    }

    fn swap() -> HermitianMatrix {
        HermitianMatrix::new(MatrixC::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap())
            .unwrap()
    }

    #[test]
    fn exact_crossing_keeps_identity() {
        let p = HermitianPencil::new(
            HermitianMatrix::from_real_diag(&[1.0, -1.0]),
            HermitianMatrix::from_real_diag(&[-1.0, 1.0]),
        )
        .unwrap();
        let grid = linspace(0.0, 2.0, 20);
        let set = track_branches(&p, &grid, None).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            assert!((set.branch(0)[k] - (1.0 - t)).abs() < 1e-14);
            assert!((set.branch(1)[k] - (t - 1.0)).abs() < 1e-14);
        }
        // the crossing at t = 1 is flagged
        assert!(!set.exceptional_flags(10).is_empty());
        assert!(set.exceptional_flags(3).is_empty());
    }

    #[test]
    fn avoided_crossing_closed_form() {
        let p = HermitianPencil::new(HermitianMatrix::from_real_diag(&[1.0, -1.0]), swap()).unwrap();
        let grid = linspace(-2.0, 2.0, 40);
        let set = track_branches(&p, &grid, Some(1.0)).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let r = (1.0 + t * t).sqrt();
            assert!((set.branch(0)[k] - r).abs() < 1e-13);
            assert!((set.branch(1)[k] + r).abs() < 1e-13);
        }
        assert!(!set.has_exceptional_points());
    }

    #[test]
    fn random_pencil_matches_direct_eigh() {
        let mut rng = rng_from_seed(5);
        let p = HermitianPencil::new(random_hermitian(4, &mut rng), random_hermitian(4, &mut rng))
            .unwrap();
        let grid = linspace(-2.0, 2.0, 100);
        let set = track_branches(&p, &grid, None).unwrap();
        let lip = p.lipschitz().unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let mut got = set.values_at(k);
            got.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let want = eigh(&p.at(t)).unwrap();
            for (g, w) in got.iter().zip(want.values()) {
                assert!((g - w).abs() <= 1e-10);
            }
        }
        for b in set.branches() {
            for (k, w) in b.windows(2).enumerate() {
                let dt = grid[k + 1] - grid[k];
                assert!((w[1] - w[0]).abs() <= lip * dt + 1e-8);
            }
        }
    }

    #[test]
    fn permanent_degeneracy_is_flagged_everywhere() {
        let p = HermitianPencil::new(
            HermitianMatrix::from_real_diag(&[2.0, 2.0, 0.0]),
            HermitianMatrix::from_real_diag(&[1.0, 1.0, 0.0]),
        )
        .unwrap();
        let set = track_branches(&p, &linspace(-1.0, 1.0, 8), None).unwrap();
        for k in 0..set.grid().len() {
            assert_eq!(set.exceptional_flags(k), &[vec![0, 1]]);
        }
    }

    #[test]
    fn csv_layout() {
        let p = HermitianPencil::new(
            HermitianMatrix::from_real_diag(&[1.0, -1.0]),
            HermitianMatrix::from_real_diag(&[-1.0, 1.0]),
        )
        .unwrap();
        let set = track_branches(&p, &[0.0, 1.0, 2.0], None).unwrap();
        let csv = set.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,branch_1,branch_2,flags");
        assert_eq!(lines[1], "0,1,-1,");
        assert_eq!(lines[2], "1,0,0,1+2");
        assert_eq!(lines[3], "2,-1,1,");
    }

    #[test]
    fn rejects_bad_grids() {
        let p = HermitianPencil::new(HermitianMatrix::identity(2), HermitianMatrix::identity(2)).unwrap();
        assert!(track_branches(&p, &[0.0], None).is_err());
        assert!(track_branches(&p, &[0.0, 0.0], None).is_err());
        assert!(track_branches(&p, &[1.0, 0.0], None).is_err());
        assert!(track_branches(&p, &[0.0, 1.0], Some(0.0)).is_err());
    }
}
