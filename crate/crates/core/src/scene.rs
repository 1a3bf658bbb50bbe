//! JSON scene documents: a spec, named points and objects over them.
//!
//! ```json
//! {"spec": {"kind": "distorted", "n": 4, "d": 0.01},
//!  "points": {"P0": [0,0,0,0], "P1": [1,0,0,0]},
//!  "objects": [{"kind": "segment", "skeleton": ["P0", "P1"]}]}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, WorldFunctionSpec};
use crate::objects::{ElementaryObject, ObjectKind};
use crate::vector_algebra::Skeleton;

/// A skeleton entry: either the name of a scene point or inline coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Name(String),
    Coords(Point),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: ObjectKind,
    pub skeleton: Vec<PointRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub spec: WorldFunctionSpec,
    #[serde(default)]
    pub points: BTreeMap<String, Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.points.values() {
            self.spec.check(p)?;
        }
        for i in 0..self.objects.len() {
            self.object(i)?;
        }
        Ok(())
    }

    pub fn point(&self, name: &str) -> Result<&Point> {
        self.points
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("unknown point {name:?}")))
    }

    pub fn resolve(&self, r: &PointRef) -> Result<Point> {
        match r {
            PointRef::Name(n) => self.point(n).cloned(),
            PointRef::Coords(p) => Ok(p.clone()),
        }
    }

    pub fn object(&self, index: usize) -> Result<ElementaryObject> {
        let o = self
            .objects
            .get(index)
            .ok_or_else(|| Error::Invalid(format!("no object #{index}")))?;
        let pts = o.skeleton.iter().map(|r| self.resolve(r)).collect::<Result<Vec<_>>>()?;
        ElementaryObject::new(o.kind, Skeleton::new(pts)?, self.spec)
    }

    pub fn object_by_name(&self, name: &str) -> Result<ElementaryObject> {
        let i = self
            .objects
            .iter()
            .position(|o| o.name.as_deref() == Some(name))
            .ok_or_else(|| Error::Invalid(format!("unknown object {name:?}")))?;
        self.object(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_resolve() {
        let s = Scene::from_json(
            r#"{"spec": {"kind": "distorted", "n": 4, "d": 0.01},
                "points": {"P0": [0,0,0,0], "P1": [1,0,0,0]},
                "objects": [{"name": "seg", "kind": "segment", "skeleton": ["P0", [2,0,0,0]]}]}"#,
        )
        .unwrap();
        let o = s.object_by_name("seg").unwrap();
        assert_eq!(o.skeleton.points()[1].coords(), &[2.0, 0.0, 0.0, 0.0]);
        let back: Scene = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_fields_and_names() {
        assert!(Scene::from_json(r#"{"spec": {"kind": "euclidean", "n": 2}, "extra": 1}"#).is_err());
        assert!(Scene::from_json(
            r#"{"spec": {"kind": "euclidean", "n": 2}, "objects": [{"kind": "segment", "skeleton": ["A", "B"]}]}"#
        )
        .is_err());
    }
}
