use serde::{Deserialize, Serialize};

/// Axis-parallel square `center + [-side/2, side/2]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub center: [f64; 2],
    pub side: f64,
}

impl Square {
    pub fn new(center: [f64; 2], side: f64) -> Self {
        Square { center, side }
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    /// Sup-norm distance from the center.
    pub fn sup_dist(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.center[0]).abs().max((x[1] - self.center[1]).abs())
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.sup_dist(x) < self.half()
    }

    pub fn contains_closed(&self, x: [f64; 2]) -> bool {
        self.sup_dist(x) <= self.half()
    }

    pub fn padded(&self, pad: f64) -> Square {
        Square::new(self.center, self.side + 2.0 * pad)
    }

    pub fn lo(&self) -> [f64; 2] {
        [self.center[0] - self.half(), self.center[1] - self.half()]
    }

    pub fn hi(&self) -> [f64; 2] {
        [self.center[0] + self.half(), self.center[1] + self.half()]
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }
}

pub fn sup_norm(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}
