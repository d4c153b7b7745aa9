//! JSON scene files and the bundled fixtures.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExtrudedPolygon, GeoAnchor, Material, Scene};
use crate::error::{Error, Result};

pub const SCENE_SCHEMA_VERSION: u32 = 1;

const DEFAULT_MATERIALS: &str = include_str!("../../data/materials.json");

const BUNDLED: &[(&str, &str)] = &[
    ("suburb-28ghz", include_str!("../../data/scenes/suburb-28ghz.json")),
    ("single-wall", include_str!("../../data/scenes/single-wall.json")),
    ("parallel-walls", include_str!("../../data/scenes/parallel-walls.json")),
    ("ground-only", include_str!("../../data/scenes/ground-only.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub fmin_ghz: f64,
    pub fmax_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSpec {
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub footprint: Vec<[f64; 2]>,
    pub height: f64,
    pub material: String,
}

/// On-disk scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<GeoAnchor>,
    pub ground: GroundSpec,
    /// Extra or overriding materials; merged over the default set.
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialSpec>,
    #[serde(default)]
    pub buildings: Vec<BuildingSpec>,
}

impl MaterialSpec {
    fn to_material(&self, name: &str) -> Result<Material> {
        Material::new(
            name,
            self.a,
            self.b,
            self.c,
            self.d,
            (self.fmin_ghz, self.fmax_ghz),
        )
    }
}

impl SceneFile {
    pub fn build(self) -> Result<Scene> {
        if self.schema != SCENE_SCHEMA_VERSION {
            return Err(Error::InvalidScene(format!(
                "unsupported schema {} (expected {SCENE_SCHEMA_VERSION})",
                self.schema
            )));
        }
        let mut materials = default_materials();
        for (name, spec) in &self.materials {
            let m = spec.to_material(name)?;
            match materials.iter_mut().find(|x| &x.name == name) {
                Some(slot) => *slot = m,
                None => materials.push(m),
            }
        }
        let buildings = self
            .buildings
            .into_iter()
            .map(|b| ExtrudedPolygon {
                name: b.name,
                footprint: b.footprint,
                height: b.height,
                material: b.material,
            })
            .collect();
        Scene::new(self.anchor, materials, &self.ground.material, buildings)
    }
}

/// The default material set (ITU-R P.2040 concrete and brick).
pub fn default_materials() -> Vec<Material> {
    let table: BTreeMap<String, MaterialSpec> =
        serde_json::from_str(DEFAULT_MATERIALS).expect("bundled material table parses");
    table
        .iter()
        .map(|(name, spec)| spec.to_material(name).expect("bundled material is valid"))
        .collect()
}

pub fn bundled_scene_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Source text of a bundled scene.
pub fn bundled_scene_text(name: &str) -> Result<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownScene(name.to_string()))
}

pub(super) fn bundled_scene(name: &str) -> Result<Scene> {
    Scene::from_json_str(bundled_scene_text(name)?)
}

/// Reads and validates a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::SceneIo {
        path: path.to_path_buf(),
        source,
    })?;
    Scene::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_materials_match_itu_table() {
        let mats = default_materials();
        assert!(mats.contains(&Material::concrete()));
        assert!(mats.contains(&Material::brick()));
    }

    #[test]
    fn empty_building_list_gives_ground_only() {
        let s = Scene::from_json_str(r#"{"schema":1,"ground":{"material":"concrete"}}"#).unwrap();
        assert!(s.buildings().is_empty());
        assert_eq!(s.faces().len(), 1);
        assert_eq!(s.ground_material().name, "concrete");
    }

    #[test]
    fn schema_is_mandatory() {
        let err = Scene::from_json_str(r#"{"ground":{"material":"concrete"}}"#).unwrap_err();
        assert!(matches!(err, Error::SceneParse(_)));
        let err = Scene::from_json_str(r#"{"schema":2,"ground":{"material":"concrete"}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidScene(_)));
    }

    #[test]
    fn custom_materials_override_defaults() {
        let s = Scene::from_json_str(
            r#"{"schema":1,"ground":{"material":"concrete"},
                "materials":{"concrete":{"a":6.0,"b":0.0,"c":0.0,"d":0.0,"fmin_ghz":1,"fmax_ghz":50}}}"#,
        )
        .unwrap();
        assert_eq!(s.ground_material().eps_a, 6.0);
    }

    #[test]
    fn bundled_suburb_structure() {
        let s = Scene::bundled("suburb-28ghz").unwrap();
        assert_eq!(s.buildings().len(), 12);
        assert_eq!(s.ground_material().name, "concrete");
        assert!(s
            .buildings()
            .iter()
            .all(|b| s.material(b.material).name == "brick"));
        let anchor = s.anchor().unwrap();
        assert_eq!(anchor.latitude_deg, 3.07351);
        assert_eq!(anchor.longitude_deg, 101.58633);
    }

    #[test]
    fn all_bundled_scenes_load() {
        for name in bundled_scene_names() {
            Scene::bundled(name).unwrap();
        }
        assert!(matches!(
            Scene::bundled("nope"),
            Err(Error::UnknownScene(_))
        ));
    }

    #[test]
    fn loading_is_idempotent() {
        let dir = std::env::temp_dir().join(format!("ristrace-scene-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.json");
        std::fs::write(&path, BUNDLED[0].1).unwrap();
        let a = load_scene(&path).unwrap();
        let b = load_scene(&path).unwrap();
        assert_eq!(a, b);
        std::fs::remove_dir_all(&dir).ok();
        assert!(matches!(
            load_scene(dir.join("missing.json")),
            Err(Error::SceneIo { .. })
        ));
    }
}
