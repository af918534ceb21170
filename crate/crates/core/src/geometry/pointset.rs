use std::path::Path;

use serde::{Deserialize, Serialize};

use super::space::{Point, Space};
use crate::error::{Error, Result};

/// Closed ball `B̄_R(c)` within which a point set is complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub center: Point,
    pub radius: f64,
}

/// Where a point set came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(generator: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            generator: generator.into(),
            seed,
        }
    }
}

/// A finite configuration `Λ`, complete inside its window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
    window: Window,
    provenance: Provenance,
}

impl PointSet {
    /// Validates dimensions, window membership and distinctness.
    pub fn new(space: &Space, points: Vec<Point>, window: Window, provenance: Provenance) -> Result<Self> {
        space.check_point(&window.center)?;
        if !(window.radius > 0.0) || !window.radius.is_finite() {
            return Err(Error::input(format!("window radius must be positive, got {}", window.radius)));
        }
        for p in &points {
            space.check_point(p)?;
            if space.dist(&p.0, &window.center.0) > window.radius * (1.0 + 1e-12) + 1e-12 {
                return Err(Error::input(format!(
                    "point {p} lies outside the window of radius {} around {}",
                    window.radius, window.center
                )));
            }
        }
        let mut sorted: Vec<&Point> = points.iter().collect();
        sorted.sort_by(|a, b| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("duplicate point {}", w[0])));
        }
        Ok(Self {
            points,
            window,
            provenance,
        })
    }

    /// Empty set with the given window.
    pub fn empty(space: &Space, window: Window) -> Result<Self> {
        Self::new(space, Vec::new(), window, Provenance::new("empty", None))
    }

    /// Reads one point per line (whitespace-separated coordinates); blank
    /// lines and anything after `#` are ignored.
    pub fn from_text(space: &Space, text: &str, window: Window, provenance: Provenance) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let coords = content
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::input(format!("line {}: cannot parse `{tok}`", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(Point(coords));
        }
        Self::new(space, points, window, provenance)
    }

    pub fn from_file(space: &Space, path: &Path, window: Window) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let provenance = Provenance::new(format!("file:{}", path.display()), None);
        Self::from_text(space, &text, window, provenance)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// True when `B_r(x)` lies inside the window.
    pub fn covers_ball(&self, space: &Space, x: &Point, r: f64) -> bool {
        space.ball_inside(&x.0, r, &self.window.center.0, self.window.radius)
    }

    /// The points within the closed ball `B̄_radius(center)`, which must lie
    /// inside the current window.
    pub fn restrict(&self, space: &Space, center: &Point, radius: f64) -> Result<Self> {
        space.check_point(center)?;
        if !self.covers_ball(space, center, radius) {
            return Err(Error::Censored(format!(
                "sub-window of radius {radius} around {center} exceeds the point-set window"
            )));
        }
        let points = self
            .points
            .iter()
            .filter(|p| space.dist(&p.0, &center.0) <= radius * (1.0 + 1e-12) + 1e-12)
            .cloned()
            .collect();
        Ok(Self {
            points,
            window: Window {
                center: center.clone(),
                radius,
            },
            provenance: self.provenance.clone(),
        })
    }

    /// Union with another set on the same window (duplicates rejected).
    pub fn union(&self, space: &Space, other: &PointSet) -> Result<Self> {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Self::new(
            space,
            points,
            self.window.clone(),
            Provenance::new(
                format!("union({}, {})", self.provenance.generator, other.provenance.generator),
                self.provenance.seed,
            ),
        )
    }

    /// Minimal pairwise distance (infinite for fewer than two points).
    pub fn min_separation(&self, space: &Space) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.min(space.dist(&p.0, &q.0));
            }
        }
        best
    }

    /// The same configuration moved by a coordinate translation (Euclidean
    /// type spaces only).
    pub fn translated(&self, space: &Space, by: &[f64]) -> Result<Self> {
        let points = self.points.iter().map(|p| p.translate(by)).collect();
        let window = Window {
            center: self.window.center.translate(by),
            radius: self.window.radius,
        };
        Self::new(space, points, window, self.provenance.clone())
    }
}
