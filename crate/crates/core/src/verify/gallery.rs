//! Named test domains with probe points and structural flags.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::geometry::{DomainSpec, Point};

const BUILTIN: &str = include_str!("../../data/gallery.json");

/// Domain classes that decide which checks apply to an entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub simply_connected: bool,
    /// The boundary in the plane is one connected set.
    pub connected_boundary: bool,
    /// `λ ≥ b/δ` for the entry's constant `b`.
    pub uniformly_perfect: bool,
    pub twice_punctured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub domain: DomainSpec,
    pub flags: Flags,
    /// Uniform perfectness constant, required when the flag is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub probes: Vec<Point>,
}

/// `inner ⊂ outer`; densities of `inner` dominate those of `outer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedPair {
    pub inner: String,
    pub outer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gallery {
    pub entries: Vec<GalleryEntry>,
    #[serde(default)]
    pub nested: Vec<NestedPair>,
}

impl GalleryEntry {
    /// Checks the domain, the probes and the flags the variant determines.
    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(MetricError::InvalidArgument(format!("entry {}: {why}", self.name)));
        self.domain.validate()?;
        if !self.domain.is_hyperbolic() {
            return bad("domain is not hyperbolic".into());
        }
        if let Some(p) = self.probes.iter().find(|p| !self.domain.contains(**p)) {
            return bad(format!("probe ({}, {}) is not in the domain", p.re, p.im));
        }
        let twice = matches!(&self.domain, DomainSpec::PuncturedPlane { punctures } if punctures.len() == 2);
        let connected = self.domain.boundary_components().len() == 1;
        if self.flags.simply_connected != self.domain.is_simply_connected() {
            return bad("simply_connected flag contradicts the domain".into());
        }
        if self.flags.twice_punctured != twice {
            return bad("twice_punctured flag contradicts the domain".into());
        }
        if self.flags.connected_boundary != connected {
            return bad("connected_boundary flag contradicts the domain".into());
        }
        if self.flags.uniformly_perfect {
            // isolated boundary points, including ∞, rule out λ ≥ b/δ
            if !self.domain.punctures().is_empty() || self.domain.has_compact_complement() {
                return bad("a domain with isolated boundary points is not uniformly perfect".into());
            }
            if !self.b.is_some_and(|b| b > 0.0 && b <= 2.0) {
                return bad("uniformly perfect entries need a constant 0 < b ≤ 2".into());
            }
        }
        Ok(())
    }

    /// Adds `count` random probes, uniformly distributed over a region
    /// around the domain and kept away from the boundary.
    fn draw_probes(&mut self, rng: &mut ChaCha8Rng, count: usize) -> Result<()> {
        let (lo, hi) = match (self.domain.bounding_box(), self.domain.complement_extent()) {
            (Some(b), _) => b,
            (None, Some((c, r))) => {
                let r = 3.0 * r.max(1.0);
                (c - Point::new(r, r), c + Point::new(r, r))
            }
            (None, None) => (Point::new(-3.0, -3.0), Point::new(3.0, 3.0)),
        };
        let min_distance = 0.02 * (hi - lo).norm();
        let mut tries = 0;
        while self.probes.len() < count {
            tries += 1;
            if tries > 10_000 * count {
                return Err(MetricError::InvalidArgument(format!(
                    "entry {}: could not place probes",
                    self.name
                )));
            }
            let z = Point::new(rng.gen_range(lo.re..hi.re), rng.gen_range(lo.im..hi.im));
            if self.domain.contains(z) && self.domain.boundary_distance(z)? >= min_distance {
                self.probes.push(z);
            }
        }
        Ok(())
    }
}

impl Gallery {
    /// The default six-domain gallery.
    pub fn builtin() -> Gallery {
        Gallery::from_json(BUILTIN).expect("bundled gallery parses")
    }

    pub fn from_json(text: &str) -> Result<Gallery> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn entry(&self, name: &str) -> Option<&GalleryEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(MetricError::InvalidArgument("gallery is empty".into()));
        }
        for (i, e) in self.entries.iter().enumerate() {
            e.validate()?;
            if self.entries[..i].iter().any(|o| o.name == e.name) {
                return Err(MetricError::InvalidArgument(format!("duplicate entry {}", e.name)));
            }
        }
        for pair in &self.nested {
            let (Some(inner), Some(outer)) = (self.entry(&pair.inner), self.entry(&pair.outer)) else {
                return Err(MetricError::InvalidArgument(format!(
                    "nested pair {} ⊂ {} names an unknown entry",
                    pair.inner, pair.outer
                )));
            };
            if let Some(p) = inner.probes.iter().find(|p| !outer.domain.contains(**p)) {
                return Err(MetricError::InvalidArgument(format!(
                    "probe ({}, {}) of {} is not in {}",
                    p.re, p.im, inner.name, outer.name
                )));
            }
        }
        Ok(())
    }

    /// Gives every entry without probes `count` random ones drawn from a
    /// generator seeded with `seed`.
    pub fn fill_probes(&mut self, seed: u64, count: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for e in self.entries.iter_mut().filter(|e| e.probes.is_empty()) {
            e.draw_probes(&mut rng, count)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn builtin_gallery_is_valid() {
        let g = Gallery::builtin();
        g.validate().unwrap();
        assert_eq!(g.entries.len(), 6);
        assert!(g.entries.iter().all(|e| e.probes.len() == 20));
        let ext = g.entry("exterior-disk").unwrap();
        assert!(ext.flags.connected_boundary && !ext.flags.simply_connected);
    }

    #[test]
    fn inconsistent_flags_are_rejected() {
        let mut g = Gallery::builtin();
        g.entries[0].flags.simply_connected = false;
        assert!(g.validate().is_err());
        let mut g = Gallery::builtin();
        g.entries[3].flags.uniformly_perfect = true;
        assert!(g.validate().is_err());
        let mut g = Gallery::builtin();
        g.entries[0].probes.push(pt(2.0, 0.0));
        assert!(g.validate().is_err());
        let mut g = Gallery::builtin();
        g.nested.push(NestedPair {
            inner: "unit-disk".into(),
            outer: "twice-punctured-plane".into(),
        });
        assert!(g.validate().is_err(), "0 is a probe of the disk");
    }

    #[test]
    fn random_probes_are_reproducible() {
        let mut a = Gallery::builtin();
        for e in &mut a.entries {
            e.probes.clear();
        }
        let mut b = a.clone();
        a.fill_probes(7, 5).unwrap();
        b.fill_probes(7, 5).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let mut c = b.clone();
        for e in &mut c.entries {
            e.probes.clear();
        }
        c.fill_probes(8, 5).unwrap();
        assert_ne!(b, c);
    }
}
