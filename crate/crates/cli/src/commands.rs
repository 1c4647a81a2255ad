use std::path::Path;

use chiralkit::euclidean::{euclidean_upgrade, EuclideanError};
use chiralkit::joint_image::{chiral_joint_image_member, JointImageError};
use chiralkit::oracle::{ca_vs_projection, domain_agreement, OracleError};
use chiralkit::reconstruction::{try_sign, upgrade as decide_upgrade, ReconstructionError, UpgradeStatus};
use chiralkit::{
    CjiStatus, DomainClassification, EuclideanCamera, ImageTuple, ProjectivePoint, ProjectiveReconstruction,
};
use serde_json::{json, Value};

use crate::plot::{epipolar_plot, render_svg, write_csv, PLOT_SAMPLES, PLOT_WINDOW};
use crate::{CliError, Outcome, Scene, EXIT_NO, EXIT_UNDECIDED, EXIT_YES};

fn parse_floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::Argument(format!("{what} needs {N} comma-separated numbers, got {s:?}")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Argument(format!("{what}: {p:?} is not a finite number")))?;
    }
    if out.iter().all(|&v| v == 0.0) {
        return Err(CliError::Argument(format!("{what} must be nonzero")));
    }
    Ok(out)
}

/// `x,y,z,w`.
pub fn parse_point(s: &str) -> Result<[f64; 4], CliError> {
    parse_floats::<4>(s, "point")
}

/// `x,y,w`.
pub fn parse_image_point(s: &str) -> Result<[f64; 3], CliError> {
    parse_floats::<3>(s, "image point")
}

/// `p1=x,y,w`.
pub fn parse_plot_spec(s: &str) -> Result<[f64; 3], CliError> {
    let rest = s
        .strip_prefix("p1=")
        .ok_or_else(|| CliError::Argument(format!("plot spec must look like p1=x,y,w, got {s:?}")))?;
    parse_image_point(rest)
}

fn coords(q: &ProjectivePoint) -> [f64; 4] {
    let c = q.coords();
    [c[0], c[1], c[2], c[3]]
}

fn joint_image_error(e: JointImageError) -> CliError {
    match e {
        JointImageError::DomainEmpty => CliError::DomainEmpty,
        other => CliError::Argument(other.to_string()),
    }
}

fn reconstruction_error(e: ReconstructionError) -> CliError {
    match e {
        ReconstructionError::Lp(e) => CliError::Numerical(e.to_string()),
        ReconstructionError::VerificationFailed(s) => CliError::Numerical(s),
        other => CliError::Scene(other.to_string()),
    }
}

pub fn domain(scene: &Scene, point: Option<[f64; 4]>) -> Outcome {
    let a = &scene.arrangement;
    match point {
        None => {
            let w = a.nonempty_witness();
            let mut out = json!({ "nonempty": w.nonempty, "eps": w.eps });
            if let Some(q) = &w.witness {
                out["witness"] = json!(coords(q));
            }
            Outcome::new(out, if w.nonempty { EXIT_YES } else { EXIT_NO })
        }
        Some(p) => {
            let q = ProjectivePoint::from_array(p).expect("parsed points are nonzero and finite");
            let class = a.contains(&q);
            let signs: Vec<i8> = a.sign_pattern(&q).iter().map(|s| s.as_i8()).collect();
            let code = match class {
                DomainClassification::Interior | DomainClassification::Boundary => EXIT_YES,
                DomainClassification::Outside | DomainClassification::DomainEmpty => EXIT_NO,
            };
            Outcome::new(json!({ "point": p, "classification": class, "signs": signs }), code)
        }
    }
}

pub fn cji_tuple(scene: &Scene, tuple: &[[f64; 3]]) -> Result<Outcome, CliError> {
    let a = &scene.arrangement;
    if tuple.len() != a.len() {
        return Err(CliError::Argument(format!(
            "expected {} image points, got {}",
            a.len(),
            tuple.len()
        )));
    }
    let p = ImageTuple::from_arrays(tuple).map_err(|e| CliError::Argument(e.to_string()))?;
    let class = chiral_joint_image_member(a, &p).map_err(joint_image_error)?;
    let code = match class.status {
        CjiStatus::ChiralMember | CjiStatus::EpipolePositive(_) => EXIT_YES,
        CjiStatus::NonMember => EXIT_NO,
        CjiStatus::BaselinePoint => EXIT_UNDECIDED,
    };
    let mut out = serde_json::to_value(&class).expect("classification serializes");
    out["tuple"] = json!(tuple);
    Ok(Outcome::new(out, code))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn cji_plot(scene: &Scene, p1: [f64; 3], out: Option<&Path>, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let a = &scene.arrangement;
    if a.len() != 2 {
        return Err(CliError::Argument(format!("plots need exactly two cameras, got {}", a.len())));
    }
    if !a.is_nonempty() {
        return Err(CliError::DomainEmpty);
    }
    let plot = epipolar_plot(a, p1, PLOT_WINDOW, PLOT_SAMPLES)?;
    if let Some(path) = out {
        write_file(path, render_svg(a, &plot)?.as_bytes())?;
    }
    if let Some(path) = csv {
        let mut buf = Vec::new();
        write_csv(&plot, &mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(Outcome::new(plot.summary(), EXIT_YES))
}

fn reconstruction(scene: &Scene) -> Result<ProjectiveReconstruction, CliError> {
    let points = scene
        .points
        .clone()
        .ok_or_else(|| CliError::Scene("upgrade needs world points".into()))?;
    let r = match &scene.correspondences {
        Some(c) => ProjectiveReconstruction::new(scene.arrangement.clone(), points, c),
        None => ProjectiveReconstruction::from_points(scene.arrangement.clone(), points),
    };
    r.map_err(|e| CliError::Scene(e.to_string()))
}

pub fn upgrade(scene: &Scene) -> Result<Outcome, CliError> {
    let r = reconstruction(scene)?;
    let result = decide_upgrade(&r).map_err(reconstruction_error)?;
    let signs = try_sign(&r).map(|s| s.camera_signs().to_vec());
    let mut out = json!({
        "signable": !matches!(result.status, UpgradeStatus::NotSignable),
        "camera_signs": signs,
        "upgradable": result.is_upgradable(),
        "certificate": result.certificate,
    });
    if let UpgradeStatus::Upgradable {
        homography,
        system,
        margin,
        on_boundary,
    } = &result.status
    {
        out["system"] = json!(system);
        out["homography"] = json!(homography.rows());
        out["margin"] = json!(margin);
        out["on_boundary"] = json!(on_boundary);
    }
    let code = if result.is_upgradable() { EXIT_YES } else { EXIT_NO };
    Ok(Outcome::new(out, code))
}

pub fn upgrade_euclidean(scene: &Scene) -> Result<Outcome, CliError> {
    for (i, c) in scene.arrangement.cameras().iter().enumerate() {
        EuclideanCamera::from_camera(c).map_err(|e| CliError::Scene(format!("camera {i} is not Euclidean: {e}")))?;
    }
    let r = reconstruction(scene)?;
    let Some(s) = try_sign(&r) else {
        return Ok(Outcome::new(json!({ "signable": false, "upgradable": false }), EXIT_NO));
    };
    let up = euclidean_upgrade(&s).map_err(|e| match e {
        EuclideanError::VerificationFailed(s) => CliError::Numerical(s),
        EuclideanError::Reconstruction(e) => reconstruction_error(e),
        other => CliError::Scene(other.to_string()),
    })?;
    let mut out = json!({
        "signable": true,
        "camera_signs": s.camera_signs(),
        "upgradable": up.is_some(),
    });
    let code = match &up {
        Some(u) => {
            out["index"] = json!(u.index);
            out["homography"] = json!(u.homography.rows());
            let cameras: Vec<Value> = u
                .cameras
                .iter()
                .map(|c| {
                    let r = c.r();
                    let rows: Vec<[f64; 3]> = (0..3).map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]).collect();
                    json!({ "r": rows, "t": [c.t()[0], c.t()[1], c.t()[2]] })
                })
                .collect();
            out["cameras"] = json!(cameras);
            out["points"] = json!(u.points.iter().map(coords).collect::<Vec<_>>());
            EXIT_YES
        }
        None => EXIT_NO,
    };
    Ok(Outcome::new(out, code))
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::DomainEmpty => CliError::DomainEmpty,
        OracleError::SamplingExhausted(_) => CliError::Numerical(e.to_string()),
        OracleError::JointImage(e) => joint_image_error(e),
    }
}

pub fn oracle(scene: &Scene, trials: usize, seed: u64) -> Result<Outcome, CliError> {
    let a = &scene.arrangement;
    if !a.is_nonempty() {
        return Err(CliError::DomainEmpty);
    }
    let domain = domain_agreement(a, trials, seed).map_err(oracle_error)?;
    let projection = ca_vs_projection(a, trials, seed).map_err(oracle_error)?;
    let code = if domain.disagreements() == 0 && projection.disagreements() == 0 {
        EXIT_YES
    } else {
        EXIT_NO
    };
    Ok(Outcome::new(json!({ "domain": domain, "ca_vs_projection": projection }), code))
}
