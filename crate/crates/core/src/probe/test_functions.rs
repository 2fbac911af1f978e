//! Fixed families of smooth, compactly supported test functions.

use serde::{Deserialize, Serialize};

use crate::solver::initial::bump_profile;

/// One-dimensional bump `exp(1 - 1 / (1 - r^2))`, `r = (x - center) / width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump1 {
    pub center: f64,
    pub width: f64,
}

impl Bump1 {
    pub fn new(center: f64, width: f64) -> Self {
        Bump1 { center, width }
    }

    pub fn value(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.width;
        bump_profile(r * r)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.width;
        let r2 = r * r;
        if r2 >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - r2;
        bump_profile(r2) * (-2.0 * r / (d * d)) / self.width
    }

    /// Open support interval.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }
}

/// Tensor product `b_t(t) * prod_a b_a(x_a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBump {
    pub name: String,
    pub time: Bump1,
    pub space: Vec<Bump1>,
}

impl SpaceTimeBump {
    fn spatial(&self, p: [f64; 2]) -> f64 {
        self.space.iter().enumerate().map(|(a, b)| b.value(p[a])).product()
    }

    pub fn value(&self, t: f64, p: [f64; 2]) -> f64 {
        let bt = self.time.value(t);
        if bt == 0.0 {
            return 0.0;
        }
        bt * self.spatial(p)
    }

    pub fn time_derivative(&self, t: f64, p: [f64; 2]) -> f64 {
        let d = self.time.derivative(t);
        if d == 0.0 {
            return 0.0;
        }
        d * self.spatial(p)
    }

    /// Spatial gradient; unused axes are zero.
    pub fn gradient(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let bt = self.time.value(t);
        let mut g = [0.0; 2];
        if bt == 0.0 {
            return g;
        }
        for a in 0..self.space.len() {
            let mut prod = bt * self.space[a].derivative(p[a]);
            for (b, bump) in self.space.iter().enumerate() {
                if b != a {
                    prod *= bump.value(p[b]);
                }
            }
            g[a] = prod;
        }
        g
    }
}

/// Spatial test function for the initial trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialTest {
    Bump { name: String, factors: Vec<Bump1> },
    /// indicator of the box `[lo_a, hi_a]`
    Indicator { name: String, lo: Vec<f64>, hi: Vec<f64> },
}

impl SpatialTest {
    pub fn name(&self) -> &str {
        match self {
            SpatialTest::Bump { name, .. } | SpatialTest::Indicator { name, .. } => name,
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            SpatialTest::Bump { factors, .. } => factors.iter().enumerate().map(|(a, b)| b.value(p[a])).product(),
            SpatialTest::Indicator { lo, hi, .. } => {
                let inside = lo.iter().zip(hi).enumerate().all(|(a, (l, h))| p[a] >= *l && p[a] <= *h);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn along(extents: &[f64], center: f64, width: f64) -> Vec<Bump1> {
    extents.iter().map(|&l| Bump1::new(center * l, width * l)).collect()
}

/// Boundary-flux weights, supported in `(0, T)` in time: one covering the
/// whole closed box and one at each end of the box diagonal.
pub fn boundary_family(extents: &[f64], t_end: f64) -> Vec<SpaceTimeBump> {
    vec![
        SpaceTimeBump {
            name: "global".into(),
            time: Bump1::new(0.5 * t_end, 0.45 * t_end),
            space: along(extents, 0.5, 1.0),
        },
        SpaceTimeBump {
            name: "low_corner".into(),
            time: Bump1::new(0.35 * t_end, 0.3 * t_end),
            space: along(extents, 0.0, 0.6),
        },
        SpaceTimeBump {
            name: "high_corner".into(),
            time: Bump1::new(0.65 * t_end, 0.3 * t_end),
            space: along(extents, 1.0, 0.6),
        },
    ]
}

/// Weak-form test functions, supported in `(-inf, T)` in time and
/// nonzero at `t = 0`: interior, boundary-straddling and global.
pub fn weak_family(extents: &[f64], t_end: f64, width: f64) -> Vec<SpaceTimeBump> {
    vec![
        SpaceTimeBump {
            name: "interior".into(),
            time: Bump1::new(0.0, 0.6 * t_end),
            space: along(extents, 0.5, width),
        },
        SpaceTimeBump {
            name: "straddling".into(),
            time: Bump1::new(0.3 * t_end, 0.5 * t_end),
            space: along(extents, 0.3, 0.4),
        },
        SpaceTimeBump {
            name: "global".into(),
            time: Bump1::new(0.0, 0.75 * t_end),
            space: along(extents, 0.5, 1.0),
        },
    ]
}

/// Initial-trace test functions: a bump, a box indicator and the constant 1.
pub fn trace_family(extents: &[f64], width: f64) -> Vec<SpatialTest> {
    vec![
        SpatialTest::Bump {
            name: "bump".into(),
            factors: along(extents, 0.5, width),
        },
        SpatialTest::Indicator {
            name: "box".into(),
            lo: extents.iter().map(|l| 0.2 * l).collect(),
            hi: extents.iter().map(|l| 0.6 * l).collect(),
        },
        SpatialTest::Indicator {
            name: "one".into(),
            lo: vec![0.0; extents.len()],
            hi: extents.to_vec(),
        },
    ]
}
