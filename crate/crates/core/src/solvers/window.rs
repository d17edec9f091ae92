use std::collections::VecDeque;

use super::Window;
use crate::linalg::{DenseMatrix, Vector};

/// Sliding history for the windowed acceleration solvers.
///
/// Keeps the most recent `m + 1` iterate/residual pairs (all of them for
/// [`Window::Full`]) with the newest entry at index 0, plus the cached
/// image `M r_k` of the newest residual under the fixed-point map's linear
/// part. Caching `M r_k` once per iteration means every consumer of the
/// window works from the same floating-point vector.
pub struct WindowState {
    capacity: Window,
    xs: VecDeque<Vector>,
    rs: VecDeque<Vector>,
    mr_head: Vector,
}

impl WindowState {
    pub fn new(capacity: Window, x0: Vector, r0: Vector, mr0: Vector) -> Self {
        let mut xs = VecDeque::new();
        let mut rs = VecDeque::new();
        xs.push_front(x0);
        rs.push_front(r0);
        Self { capacity, xs, rs, mr_head: mr0 }
    }

    /// Number of history terms behind the head (`min(k, m)` at step `k`).
    pub fn depth(&self) -> usize {
        self.rs.len() - 1
    }

    pub fn head_x(&self) -> &Vector {
        &self.xs[0]
    }

    pub fn head_r(&self) -> &Vector {
        &self.rs[0]
    }

    /// `M r_k` for the current head residual.
    pub fn mr_head(&self) -> &Vector {
        &self.mr_head
    }

    /// `x_{k-i}`; `i = 0` is the head, `i ≤ depth()`.
    pub fn x_back(&self, i: usize) -> &Vector {
        &self.xs[i]
    }

    /// `r_{k-i}`; `i = 0` is the head, `i ≤ depth()`.
    pub fn r_back(&self, i: usize) -> &Vector {
        &self.rs[i]
    }

    /// The least-squares matrix `W_k` whose column `i` is
    /// `r_{k-i} - M r_k` for `i = 0, …, depth()`.
    ///
    /// Column 0 equals `A r_k`, since `r_k - M r_k = A r_k`.
    pub fn assemble_difference_matrix(&self) -> DenseMatrix {
        let n = self.mr_head.len();
        DenseMatrix::from_fn(n, self.depth() + 1, |row, i| {
            self.rs[i][row] - self.mr_head[row]
        })
    }

    /// Pushes the next iterate/residual pair and its `M r` image, evicting
    /// the oldest entry once the window is over capacity.
    pub fn advance(&mut self, x: Vector, r: Vector, mr: Vector) {
        self.xs.push_front(x);
        self.rs.push_front(r);
        self.mr_head = mr;
        if let Window::Size(m) = self.capacity {
            while self.xs.len() > m + 1 {
                self.xs.pop_back();
                self.rs.pop_back();
            }
        }
    }
}
