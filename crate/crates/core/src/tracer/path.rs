use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scene::{EdgeId, FaceId, Scene};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Interaction {
    Reflection(FaceId),
    Diffraction(EdgeId),
}

impl Interaction {
    pub fn is_reflection(&self) -> bool {
        matches!(self, Interaction::Reflection(_))
    }

    /// Label used in path dumps, e.g. `R:ground` or `D:e1.vedge2`.
    pub fn label(&self, scene: &Scene) -> String {
        match *self {
            Interaction::Reflection(f) => format!("R:{}", scene.face_name(f)),
            Interaction::Diffraction(e) => format!("D:{}", scene.edge_name(e)),
        }
    }
}

/// One geometric propagation path from source to destination.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationPath {
    pub vertices: Vec<Point3>,
    pub interactions: Vec<Interaction>,
    pub length: f64,
    pub departure_dir: Point3,
    pub arrival_dir: Point3,
}

impl PropagationPath {
    /// Builds a path from its vertices; lengths and directions are derived.
    pub fn new(vertices: Vec<Point3>, interactions: Vec<Interaction>) -> Self {
        assert_eq!(vertices.len(), interactions.len() + 2);
        let length = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
        let n = vertices.len();
        let departure_dir = (vertices[1] - vertices[0]).normalize();
        let arrival_dir = (vertices[n - 1] - vertices[n - 2]).normalize();
        Self {
            vertices,
            interactions,
            length,
            departure_dir,
            arrival_dir,
        }
    }

    pub fn source(&self) -> Point3 {
        self.vertices[0]
    }

    pub fn destination(&self) -> Point3 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn is_los(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn reflection_count(&self) -> usize {
        self.interactions.iter().filter(|i| i.is_reflection()).count()
    }

    pub fn diffraction_count(&self) -> usize {
        self.interactions.len() - self.reflection_count()
    }

    /// Same path traversed from destination to source.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        let mut i = self.interactions.clone();
        i.reverse();
        Self::new(v, i)
    }

    pub fn sequence_label(&self, scene: &Scene) -> String {
        if self.interactions.is_empty() {
            return "LOS".to_string();
        }
        self.interactions
            .iter()
            .map(|i| i.label(scene))
            .collect::<Vec<_>>()
            .join("|")
    }

    pub(crate) fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.interactions
            .len()
            .cmp(&other.interactions.len())
            .then(self.length.total_cmp(&other.length))
            .then_with(|| self.interactions.cmp(&other.interactions))
    }
}

impl fmt::Display for PropagationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} interactions, {:.6} m", self.interactions.len(), self.length)
    }
}

/// Sorts into canonical order and drops repeated interaction sequences.
pub fn canonicalize(paths: &mut Vec<PropagationPath>, dedup_tolerance: f64) {
    paths.sort_by(|a, b| a.canonical_cmp(b));
    let mut out: Vec<PropagationPath> = Vec::with_capacity(paths.len());
    for p in paths.drain(..) {
        let dup = out.iter().any(|q| {
            q.interactions == p.interactions && (q.length - p.length).abs() <= dedup_tolerance
        });
        if !dup {
            out.push(p);
        }
    }
    *paths = out;
}

/// Interaction-pattern predicates for scenario variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PathFilter {
    #[default]
    #[serde(rename = "all")]
    All,
    #[serde(rename = "los")]
    LosOnly,
    /// Direct ray plus rays with exactly one ground reflection.
    #[serde(rename = "los+ground")]
    LosAndSingleGround,
    #[serde(rename = "no-los")]
    ExcludeLos,
}

impl PathFilter {
    pub fn accepts(&self, p: &PropagationPath) -> bool {
        match self {
            PathFilter::All => true,
            PathFilter::LosOnly => p.is_los(),
            PathFilter::LosAndSingleGround => {
                p.is_los() || p.interactions == [Interaction::Reflection(FaceId::GROUND)]
            }
            PathFilter::ExcludeLos => !p.is_los(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PathFilter::All => "all",
            PathFilter::LosOnly => "los",
            PathFilter::LosAndSingleGround => "los+ground",
            PathFilter::ExcludeLos => "no-los",
        }
    }
}

impl std::str::FromStr for PathFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(PathFilter::All),
            "los" => Ok(PathFilter::LosOnly),
            "los+ground" => Ok(PathFilter::LosAndSingleGround),
            "no-los" => Ok(PathFilter::ExcludeLos),
            other => Err(format!(
                "unknown path filter '{other}' (expected all, los, los+ground, no-los)"
            )),
        }
    }
}

/// Order-preserving selection by predicate.
pub fn filter_paths(
    paths: &[PropagationPath],
    pred: impl Fn(&PropagationPath) -> bool,
) -> Vec<PropagationPath> {
    paths.iter().filter(|p| pred(p)).cloned().collect()
}
