use std::collections::BTreeMap;
use std::path::Path;

use chiralkit::reconstruction::Correspondences;
use chiralkit::{CameraArrangement, FiniteCamera, ProjectivePoint, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// On-disk scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    /// Row-major 3x4 camera matrices.
    pub cameras: Vec<[[f64; 4]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 4]>>,
    /// `correspondences[i][k]` is the affine image of point `k` in camera `i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondences: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub file: SceneFile,
    pub arrangement: CameraArrangement,
    pub points: Option<Vec<ProjectivePoint>>,
    pub correspondences: Option<Correspondences>,
}

impl Scene {
    pub fn parse(text: &str, tol: Tolerances) -> Result<Self, CliError> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| CliError::Scene(e.to_string()))?;
        Self::from_file(file, tol)
    }

    pub fn load(path: &Path, tol: Tolerances) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, tol)
    }

    pub fn from_file(file: SceneFile, tol: Tolerances) -> Result<Self, CliError> {
        let cameras = file
            .cameras
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                FiniteCamera::from_rows(*rows).map_err(|e| CliError::Scene(format!("camera {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let arrangement = CameraArrangement::new(cameras, tol).map_err(|e| CliError::Scene(e.to_string()))?;
        let points = file
            .points
            .as_ref()
            .map(|ps| {
                ps.iter()
                    .enumerate()
                    .map(|(k, p)| ProjectivePoint::from_array(*p).map_err(|e| CliError::Scene(format!("point {k}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let correspondences = file
            .correspondences
            .as_ref()
            .map(|c| Correspondences::new(c.clone()).map_err(|e| CliError::Scene(e.to_string())))
            .transpose()?;
        if let Some(c) = &correspondences {
            if c.cameras() != arrangement.len() {
                return Err(CliError::Scene(format!(
                    "correspondences have {} rows for {} cameras",
                    c.cameras(),
                    arrangement.len()
                )));
            }
            if let Some(ps) = &points {
                if c.points() != ps.len() {
                    return Err(CliError::Scene(format!(
                        "correspondences have {} columns for {} points",
                        c.points(),
                        ps.len()
                    )));
                }
            }
        }
        Ok(Self {
            file,
            arrangement,
            points,
            correspondences,
        })
    }

    /// Canonical JSON form of the scene.
    pub fn canonical_json(&self) -> String {
        let canonical = SceneFile {
            cameras: self.arrangement.cameras().iter().map(|c| c.rows()).collect(),
            ..self.file.clone()
        };
        serde_json::to_string_pretty(&canonical).expect("scene serializes")
    }
}
