use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn length(self) -> f64 {
        self.length_sq().sqrt()
    }

    pub fn length_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Wraps into `[0, w) × [0, h)`.
    pub fn wrap(self, w: f64, h: f64) -> Self {
        Self::new(wrap_coord(self.x, w), wrap_coord(self.y, h))
    }

    /// Shortest displacement from `self` to `to` on a `w × h` torus.
    pub fn delta_to(self, to: Vec2, w: f64, h: f64) -> Vec2 {
        Vec2::new(wrap_delta(to.x - self.x, w), wrap_delta(to.y - self.y, h))
    }
}

fn wrap_coord(v: f64, size: f64) -> f64 {
    // Objects move far less than one screen per tick.
    if (0.0..size).contains(&v) {
        v
    } else if v < 0.0 && v >= -size {
        let r = v + size;
        if r < size {
            r
        } else {
            0.0
        }
    } else if v >= size && v < 2.0 * size {
        v - size
    } else {
        v.rem_euclid(size)
    }
}

fn wrap_delta(d: f64, size: f64) -> f64 {
    let half = size / 2.0;
    if d > half {
        d - size
    } else if d < -half {
        d + size
    } else {
        d
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_delta_takes_short_way() {
        let a = Vec2::new(5.0, 5.0);
        let b = Vec2::new(635.0, 475.0);
        let d = a.delta_to(b, 640.0, 480.0);
        assert_eq!(d, Vec2::new(-10.0, -10.0));
        assert_eq!(Vec2::new(-1.0, 481.0).wrap(640.0, 480.0), Vec2::new(639.0, 1.0));
    }
}
