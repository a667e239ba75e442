//! Recurrent graph models with a rooted origin and a single-step SRW kernel.
//!
//! Graphs are represented implicitly through neighbor enumeration; nothing is
//! ever materialized, so walks of 10^7+ steps stay allocation-free.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A graph vertex, encoded as a fixed-width integer pair.
///
/// Equality and hashing are structural. The line graph uses `(x, 0)`, the
/// square lattice uses `(x, y)`, and the comb uses `(x, 0)` for spine
/// vertices and `(x, y > 0)` for tooth vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i64,
    pub y: i64,
}

impl Vertex {
    pub const fn new(x: i64, y: i64) -> Self {
        Vertex { x, y }
    }
}

/// Built-in recurrent graphs. All are infinite, locally finite, and
/// recurrent for the simple random walk started at the origin.
///
/// `Pair` is a two-vertex path (origin and one companion vertex) used as a
/// degenerate fixture: its walk returns to the origin every 2 steps,
/// deterministically. It is not part of [`builtin_models`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphModel {
    /// The integer line Z.
    Z1,
    /// The square lattice Z^2.
    Z2,
    /// The comb: a spine along y = 0 with upward teeth at every x.
    Comb,
    /// Two-vertex path; deterministic return time 2.
    Pair,
}

impl GraphModel {
    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::Z1 => "z1",
            GraphModel::Z2 => "z2",
            GraphModel::Comb => "comb",
            GraphModel::Pair => "pair",
        }
    }

    pub fn from_name(name: &str) -> Option<GraphModel> {
        match name {
            "z1" => Some(GraphModel::Z1),
            "z2" => Some(GraphModel::Z2),
            "comb" => Some(GraphModel::Comb),
            "pair" => Some(GraphModel::Pair),
            _ => None,
        }
    }

    /// The rooted origin every walker starts from.
    pub fn origin(&self) -> Vertex {
        Vertex::new(0, 0)
    }

    /// Neighbor list in a fixed-size buffer. Single source of truth for both
    /// [`neighbors`](Self::neighbors) and [`step`](Self::step); order is
    /// lexicographic in `(x, y)` so runs are reproducible from a seed alone.
    #[inline]
    fn neighbor_array(&self, v: Vertex) -> ([Vertex; 4], usize) {
        let mut buf = [Vertex::new(0, 0); 4];
        let len = match self {
            GraphModel::Z1 => {
                buf[0] = Vertex::new(v.x - 1, 0);
                buf[1] = Vertex::new(v.x + 1, 0);
                2
            }
            GraphModel::Z2 => {
                buf[0] = Vertex::new(v.x - 1, v.y);
                buf[1] = Vertex::new(v.x, v.y - 1);
                buf[2] = Vertex::new(v.x, v.y + 1);
                buf[3] = Vertex::new(v.x + 1, v.y);
                4
            }
            GraphModel::Comb => {
                if v.y == 0 {
                    // Spine vertex: left, tooth above, right.
                    buf[0] = Vertex::new(v.x - 1, 0);
                    buf[1] = Vertex::new(v.x, 1);
                    buf[2] = Vertex::new(v.x + 1, 0);
                    3
                } else {
                    // Tooth vertex: down, up.
                    buf[0] = Vertex::new(v.x, v.y - 1);
                    buf[1] = Vertex::new(v.x, v.y + 1);
                    2
                }
            }
            GraphModel::Pair => {
                buf[0] = Vertex::new(1 - v.x, 0);
                1
            }
        };
        (buf, len)
    }

    /// Ordered neighbor list of `v`. Deterministic: repeated calls return
    /// identical lists.
    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        let (buf, len) = self.neighbor_array(v);
        buf[..len].to_vec()
    }

    /// One SRW step from `v`: a uniformly chosen neighbor.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, v: Vertex, rng: &mut R) -> Vertex {
        let (buf, len) = self.neighbor_array(v);
        buf[rng.random_range(0..len)]
    }
}

/// The built-in test family: Z for exact analytics, Z^2 for slower
/// recurrence, the comb for anomalous return exponents.
pub fn builtin_models() -> Vec<GraphModel> {
    vec![GraphModel::Z1, GraphModel::Z2, GraphModel::Comb]
}
